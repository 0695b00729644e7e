import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smsmac.channel import AdditiveSymmetricMac, ComplexGaussianMac, DiscreteMac, RealGaussianMac, Var
from smsmac.infoq import (
    DiscreteJoint,
    conditional_mi,
    lemma1_identity,
    markov_inequality_holds,
    renyi_cmi,
    renyi_cmi_down,
)
from smsmac.mixture import (
    GaussianMixture,
    InfoEstimate,
    discrete_entropy,
    gaussian_entropy,
    mixture_entropy,
)

# two-sender binary channel with ternary output, rows indexed by (x1, x2)
TABLE_2X2 = np.array([
    [[0.7, 0.2, 0.1], [0.2, 0.5, 0.3]],
    [[0.1, 0.3, 0.6], [0.25, 0.25, 0.5]],
])


# ---------------------------------------------------------
# mixtures
# ---------------------------------------------------------


def test_discrete_entropy_basic():
    assert discrete_entropy([0.5, 0.5]) == pytest.approx(math.log(2))
    assert discrete_entropy([1.0, 0.0]) == 0.0
    with pytest.raises(ValueError):
        discrete_entropy([0.5, 0.6])


def test_single_component_entropy_closed_form():
    for v in (0.3, 1.0, 4.0):
        gm = GaussianMixture([1.0], [2.0], v)
        assert mixture_entropy(gm).value == pytest.approx(0.5 * math.log(2 * math.pi * math.e * v))
        gm = GaussianMixture([1.0], [1 + 1j], v)
        assert mixture_entropy(gm).value == pytest.approx(math.log(math.pi * math.e * v))


def test_well_separated_mixture_adds_label_entropy():
    gm = GaussianMixture([0.25, 0.75], [0.0, 60.0], 1.0)
    expected = gaussian_entropy(1.0) + discrete_entropy([0.25, 0.75])
    assert mixture_entropy(gm).value == pytest.approx(expected, abs=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.floats(-50, 50), st.integers(0, 2**31))
def test_entropy_translation_invariant(shift, seed):
    rng = np.random.default_rng(seed)
    gm = GaussianMixture(rng.dirichlet(np.ones(3)), rng.normal(0, 3, 3), 1.0)
    assert mixture_entropy(gm.translated(shift)).value == pytest.approx(mixture_entropy(gm).value, abs=1e-7)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 5.0), st.integers(0, 2**31))
def test_entropy_scaling(a, seed):
    # scaling Y by a adds ln a
    rng = np.random.default_rng(seed)
    w, mu = rng.dirichlet(np.ones(3)), rng.normal(0, 2, 3)
    base = mixture_entropy(GaussianMixture(w, mu, 1.0)).value
    scaled = mixture_entropy(GaussianMixture(w, a * mu, a * a)).value
    assert scaled == pytest.approx(base + math.log(a), abs=1e-7)


def test_monte_carlo_entropy_agrees_with_quadrature():
    gm = GaussianMixture([0.2, 0.5, 0.3], [0.0, 1.3, 4.0], [1.0, 0.5, 2.0])
    q = mixture_entropy(gm)
    mc = mixture_entropy(gm, "monte-carlo", samples=200_000, rng=np.random.default_rng(0))
    assert mc.method == "monte-carlo" and mc.error > 0
    assert abs(mc.value - q.value) < 4 * mc.error


def test_complex_mixture_density_normalised():
    gm = GaussianMixture([0.5, 0.5], [0j, 2 + 1j], 0.7)
    from smsmac.mixture import expect_under
    est = expect_under(gm, lambda y: np.ones(np.shape(y)))
    assert est.value == pytest.approx(1.0, abs=1e-12)


def test_mixture_validation():
    with pytest.raises(ValueError):
        GaussianMixture([0.5, 0.6], [0, 1], 1)
    with pytest.raises(ValueError):
        GaussianMixture([1.0], [0.0], 0.0)
    with pytest.raises(ValueError):
        mixture_entropy(GaussianMixture([1.0], [0.0], 1.0), method="simpson")


def test_info_estimate_combine():
    a = InfoEstimate(1.0, "quadrature", 1e-9)
    b = InfoEstimate(0.5, "quadrature", 2e-9, flagged=True)
    c = a.combine(b, 1, -2)
    assert c.value == pytest.approx(0.0) and c.error == pytest.approx(5e-9) and c.flagged
    with pytest.raises(ValueError):
        InfoEstimate(0.0, "exact", -1.0)


# ---------------------------------------------------------
# conditional mutual information
# ---------------------------------------------------------


def _brute_cmi(table, target_axes, cond_axes):
    """I(Y; X_T | X_C) from an explicit joint of uniform inputs and the table."""
    c = table.ndim - 1
    q = table.shape[0]
    total = 0.0
    for x in itertools.product(range(q), repeat=c):
        for y in range(table.shape[-1]):
            pxy = table[x][y] / q**c
            if pxy == 0:
                continue
            tc = [z for z in itertools.product(range(q), repeat=c)
                  if all(z[a] == x[a] for a in target_axes + cond_axes)]
            cc = [z for z in itertools.product(range(q), repeat=c)
                  if all(z[a] == x[a] for a in cond_axes)]
            p_tc = np.mean([table[z][y] for z in tc])
            p_c = np.mean([table[z][y] for z in cc])
            total += pxy * math.log(p_tc / p_c)
    return total


def test_discrete_cmi_against_brute_force():
    mac = DiscreteMac.random(3, 2, 4, np.random.default_rng(9))
    for targets, cond in [([1], []), ([1], [2]), ([1, 3], [2]), ([2], [1, 3])]:
        got = conditional_mi(mac, [Var.x(i) for i in targets], [Var.x(i) for i in cond])
        ref = _brute_cmi(mac.table, [i - 1 for i in targets], [i - 1 for i in cond])
        assert got.method == "exact"
        assert got.value == pytest.approx(ref, abs=1e-12)


def test_discrete_2x2_frozen_values():
    # mpmath evaluation at 30 digits
    mac = DiscreteMac(TABLE_2X2, 2)
    assert conditional_mi(mac, ["X1"], ["X2"]).value == pytest.approx(0.13295410267795663, abs=1e-13)
    assert conditional_mi(mac, ["X1"]).value == pytest.approx(0.076028016996955205, abs=1e-13)
    assert conditional_mi(mac, ["X1", "X2"]).value == pytest.approx(0.15249571043179573, abs=1e-13)


def test_real_gaussian_frozen_values():
    # mpmath quadrature, E = 1.5, v = 1, binary inputs, two senders
    mac = RealGaussianMac(E=1.5, v=1.0, p=2, c=2)
    assert conditional_mi(mac, ["X1"], ["X2"]).value == pytest.approx(0.22117083121973561, abs=1e-8)
    assert conditional_mi(mac, ["X1"]).value == pytest.approx(0.15351557649100984, abs=1e-8)
    assert conditional_mi(mac, ["X1", "X2"]).value == pytest.approx(0.37468640771074546, abs=1e-8)
    assert conditional_mi(mac, [Var.total()]).value == pytest.approx(0.1112977544500587, abs=1e-8)


def test_complex_single_sender_frozen_value():
    # scipy dblquad over [-9, 9]^2, E = v = 1
    mac = ComplexGaussianMac(E=1.0, v=1.0, c=1)
    assert conditional_mi(mac, ["X1"]).value == pytest.approx(0.6133561205160429, abs=1e-7)


def test_gaussian_cmi_against_monte_carlo():
    # direct sampling of ln p(y | x1, x2-x3) - ln p(y | x2-x3)
    mac = RealGaussianMac(E=1.2, v=1.0, p=2, c=3)
    rng = np.random.default_rng(1)
    n = 200_000
    xs = rng.integers(0, 2, (n, 3))
    ys = mac.sample(xs, rng)
    allx = np.array(list(itertools.product(range(2), repeat=3)))
    dens = np.exp(-(ys[:, None] - 1.2 * allx.sum(1)[None]) ** 2 / 2)
    d = (xs[:, 1] - xs[:, 2]) % 2
    same_d = ((allx[:, 1] - allx[:, 2]) % 2)[None] == d[:, None]
    same_x1 = allx[:, 0][None] == xs[:, 0][:, None]
    num = (dens * (same_d & same_x1)).sum(1) / (same_d & same_x1).sum(1)
    den = (dens * same_d).sum(1) / same_d.sum(1)
    vals = np.log(num / den)
    ref, se = vals.mean(), vals.std() / math.sqrt(n)
    got = conditional_mi(mac, [Var.x(1)], [Var.diff(2, 3)]).value
    assert abs(got - ref) < 4 * se


def test_cmi_zero_for_symmetric_single_sender():
    mac = AdditiveSymmetricMac([0.8, 0.15, 0.05], 3, 1, 3)
    assert conditional_mi(mac, ["X1"]).value == pytest.approx(0.0, abs=1e-14)
    assert conditional_mi(mac, ["X1"], ["X2"]).value == pytest.approx(0.0, abs=1e-14)
    assert conditional_mi(mac, ["X1"], ["X2", "X3"]).value > 0.1


def test_cmi_rejects_overlap():
    mac = DiscreteMac(TABLE_2X2, 2)
    with pytest.raises(ValueError):
        conditional_mi(mac, ["X1"], ["X1"])


# ---------------------------------------------------------
# Renyi quantities
# ---------------------------------------------------------


def test_renyi_discrete_frozen_values():
    # mpmath closed forms at 30 digits, s = 1/4
    mac = DiscreteMac(TABLE_2X2, 2)
    assert renyi_cmi(0.25, mac, ["X1"], ["X2"]).value == pytest.approx(0.15740830660726736, abs=1e-13)
    assert renyi_cmi_down(0.25, mac, ["X1"], ["X2"]).value == pytest.approx(0.1568430546654319, abs=1e-13)
    assert renyi_cmi_down(1 / 3, mac, ["X1"], ["X2"]).value == pytest.approx(0.16393811102105793, abs=1e-13)


def test_renyi_gaussian_frozen_values():
    mac = RealGaussianMac(E=1.5, v=1.0, p=2, c=2)
    assert renyi_cmi(0.5, mac, ["X1"], ["X2"]).value == pytest.approx(0.27994811898391645, abs=1e-8)
    assert renyi_cmi_down(0.5, mac, ["X1"], ["X2"]).value == pytest.approx(0.2762606685780808, abs=1e-8)


def test_renyi_requires_positive_order():
    mac = DiscreteMac(TABLE_2X2, 2)
    with pytest.raises(ValueError):
        renyi_cmi(0.0, mac, ["X1"])


@pytest.mark.parametrize("seed", range(10))
def test_renyi_ordering_random_channels(seed):
    mac = DiscreteMac.random(2, 2, 3, np.random.default_rng(seed))
    for s in (0.1, 0.25, 0.5):
        down = renyi_cmi_down(s, mac, ["X1"], ["X2"]).value
        up = renyi_cmi(s, mac, ["X1"], ["X2"]).value
        dual = renyi_cmi_down(s / (1 - s), mac, ["X1"], ["X2"]).value
        assert down <= up + 1e-9 <= dual + 2e-9


def test_renyi_converges_to_shannon():
    mac = DiscreteMac.random(2, 2, 3, np.random.default_rng(42))
    ref = conditional_mi(mac, ["X1"], ["X2"]).value
    gaps = [abs(renyi_cmi(0.1 / 2**j, mac, ["X1"], ["X2"]).value - ref) for j in range(6)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-2


def test_renyi_gaussian_ordering():
    mac = RealGaussianMac(E=1.0, v=1.0, p=2, c=2)
    s = 0.25
    down = renyi_cmi_down(s, mac, ["X1"], ["X2"]).value
    up = renyi_cmi(s, mac, ["X1"], ["X2"]).value
    mi = conditional_mi(mac, ["X1"], ["X2"]).value
    assert mi <= down + 1e-8 and down <= up + 1e-8


# ---------------------------------------------------------
# four-variable identities
# ---------------------------------------------------------


def test_lemma1_identity_random_joints():
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert lemma1_identity(DiscreteJoint.random((2, 3, 2, 2), rng)) < 1e-12


def test_markov_inequality_on_constructed_joints():
    # B - D - C Markov: p(a, b, c, d) = p(d) p(c | d) p(a, b | c, d) needs B indep C given D,
    # built as p(d) p(b | d) p(c | d) p(a | b, c, d)
    rng = np.random.default_rng(1)
    for _ in range(30):
        pd = rng.dirichlet(np.ones(2))
        pb = rng.dirichlet(np.ones(2), size=2)
        pc = rng.dirichlet(np.ones(2), size=2)
        pa = rng.dirichlet(np.ones(2), size=(2, 2, 2))
        p = np.einsum("d,db,dc,bcda->abcd", pd, pb, pc, pa)
        assert markov_inequality_holds(DiscreteJoint(p)) is True


def test_markov_inequality_not_claimed_without_independence():
    j = DiscreteJoint.random((2, 2, 2, 2), np.random.default_rng(2))
    assert markov_inequality_holds(j) is None


def test_joint_validation():
    with pytest.raises(ValueError):
        DiscreteJoint(np.full((2, 2, 2), 1 / 8))
