"""The nine acceptance criteria, each printing one PASS/FAIL line."""

import math
import time

import numpy as np
from scipy.optimize import bisect

from _oracles import two_symbol_leakage
from conftest import ACCEPTANCE_LINES
from smsmac.bound import asymptotic_limit, fig2_value, theorem1_capacity, theorem2_bound
from smsmac.channel import AdditiveSymmetricMac, DiscreteMac, RealGaussianMac
from smsmac.cli import main
from smsmac.config import load_config, protocol_from_sections
from smsmac.gf import collision_census, index_to_vector, make_code_pair
from smsmac.infoq import DiscreteJoint, conditional_mi, lemma1_identity, markov_inequality_holds, renyi_cmi, renyi_cmi_down
from smsmac.simproto import ProtocolConfig, build_code, estimate_leakage, run_experiment

HALF_LN2 = 0.5 * math.log(2)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _csv_body(text):
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


def test_criterion_1_fig2_asymptote(capsys):
    v8 = fig2_value(8.0).value
    v10 = fig2_value(10.0).value
    t0 = time.perf_counter()
    code = main(["fig2", "--grid", "0:8:81", "--v", "1"])
    elapsed = time.perf_counter() - t0
    rows = _csv_body(capsys.readouterr().out)
    rel8 = abs(v8 - HALF_LN2) / HALF_LN2
    gap10 = abs(v10 - asymptotic_limit(2))
    ok = rel8 < 0.02 and gap10 < 1e-3 and elapsed < 60 and code == 0 and len(rows) == 82
    report(1, ok, f"E=8 {v8:.6f} (rel {rel8:.2e}), E=10 gap {gap10:.2e}, 81 points in {elapsed:.1f}s")


def test_criterion_2_fig2_threshold():
    root = bisect(lambda E: fig2_value(E).value, 1.0, 4.0, xtol=1e-8)
    report(2, abs(root - 2.1715) <= 0.02, f"root {root:.6f} vs 2.1715 +- 0.02")


def test_criterion_3_asymptotic_formula():
    err2 = abs(asymptotic_limit(2) - HALF_LN2)
    worst = 0.0
    for p in (2, 3, 5, 7):
        j = np.arange(-p + 1, p)
        w = (p - np.abs(j)) / p**2
        h_tri = -math.fsum(w * np.log(w))
        worst = max(worst, abs(asymptotic_limit(p) - (2 * math.log(p) - h_tri)))
    report(3, err2 <= 4 * np.finfo(float).eps and worst < 1e-12,
           f"|A(2) - ln2/2| = {err2:.1e}, max triangular-entropy gap {worst:.1e}")


def test_criterion_4_theorem_consistency():
    gaps = []
    for c in (2, 3):
        mac = AdditiveSymmetricMac.noiseless(2, 1, c)
        gaps.append(abs(theorem2_bound(mac).bound - theorem1_capacity(mac)))
        gaps.append(abs(theorem1_capacity(mac) - math.log(2)))
    report(4, max(gaps) < 1e-6, f"max |bound - capacity| over c=2,3: {max(gaps):.1e}")


def test_criterion_5_renyi_properties():
    rng = np.random.default_rng(2024)
    worst_order, worst_concave, mono_fail = -np.inf, -np.inf, 0
    channels = 50
    for _ in range(channels):
        mac = DiscreteMac.random(3, 2, 3, rng)
        for s in (0.1, 0.25, 0.5):
            down = renyi_cmi_down(s, mac, ["X1"], ["X2"]).value
            up = renyi_cmi(s, mac, ["X1"], ["X2"]).value
            dual = renyi_cmi_down(s / (1 - s), mac, ["X1"], ["X2"]).value
            worst_order = max(worst_order, down - up, up - dual)
            a = renyi_cmi_down(s, mac, ["X1"], ["X2", "X3"]).value
            b = renyi_cmi_down(s, mac, ["X1", "X2"], ["X3"]).value
            r = s / (1 + s)
            worst_concave = max(worst_concave, math.exp(r * a) - math.exp(r * b))
        ref = conditional_mi(mac, ["X1"], ["X2"]).value
        gaps = [abs(renyi_cmi(0.1 / 2**j, mac, ["X1"], ["X2"]).value - ref) for j in range(6)]
        mono_fail += not all(g1 < g0 for g0, g1 in zip(gaps, gaps[1:]))
    ok = worst_order <= 1e-9 and worst_concave <= 1e-9 and mono_fail == 0
    report(5, ok, f"{channels} channels: ordering slack {worst_order:.1e}, "
                  f"concavity slack {worst_concave:.1e}, non-monotone {mono_fail}")


def test_criterion_6_appendix_oracle():
    rng = np.random.default_rng(6)
    residual = max(lemma1_identity(DiscreteJoint.random((2, 2, 2, 2), rng)) for _ in range(100))
    held = 0
    for _ in range(100):
        pd = rng.dirichlet(np.ones(2))
        pb = rng.dirichlet(np.ones(2), size=2)
        pc = rng.dirichlet(np.ones(2), size=2)
        pa = rng.dirichlet(np.ones(2), size=(2, 2, 2))
        # B and C conditionally independent given D
        p = np.einsum("d,db,dc,bcda->abcd", pd, pb, pc, pa)
        held += markov_inequality_holds(DiscreteJoint(p)) is True
    report(6, residual < 1e-10 and held == 100, f"max identity residual {residual:.1e}, inequality held {held}/100")


def test_criterion_7_universal2():
    q, nl, k, kp, draws = 2, 4, 1, 1, 200
    rng = np.random.default_rng(7)
    x, xp = index_to_vector(np.array([3, 12]), nl, q)
    f, fp = index_to_vector(np.array([1, 2]), k + kp, q)
    frac2, frac4, pair2, pair4 = [], [], [], []
    for _ in range(draws):
        cp = make_code_pair(nl, 1, k, kp, q, rng)
        h, tot = collision_census(cp.g2)
        frac2.append(h / tot)
        h, tot = collision_census(cp.g4)
        frac4.append(h / tot)
        pair2.append(np.array_equal(cp.g2.apply(x[None]), cp.g2.apply(xp[None])))
        pair4.append(np.array_equal(cp.g4.apply(f[None]), cp.g4.apply(fp[None])))
    b2, b4 = q ** -(nl - k - kp), q**-kp

    def within(samples, bound):
        s = np.asarray(samples, dtype=float)
        se = s.std(ddof=1) / math.sqrt(len(s))
        return s.mean() <= bound + 3 * se, s.mean(), se

    checks = [within(frac2, b2), within(frac4, b4), within(pair2, b2), within(pair4, b4)]
    ok = all(c[0] for c in checks)
    detail = ", ".join(f"{m:.3f}+-{se:.3f}" for _, m, se in checks)
    report(7, ok, f"collision rates (G2 census, G4 census, G2 pair, G4 pair) {detail} vs bounds {b2}, {b4}")


def test_criterion_8_protocol_end_to_end():
    noiseless = run_experiment(protocol_from_sections(load_config("symmetric_noiseless")))
    leak_max = max(abs(v.value) for v in noiseless.leakage.values())
    gauss_cfg = protocol_from_sections(load_config("gauss_c2_E6"))
    gauss = run_experiment(gauss_cfg, coalition_list=[])

    mac = RealGaussianMac(6.0, 1.0, 2, 2)
    cfg2 = ProtocolConfig(q=2, l=1, n=2, k=1, kprime=1, c=2, channel=mac)
    inst = build_code(cfg2, np.random.default_rng(7))
    est = estimate_leakage(inst, mac, (1,), 10_000, np.random.default_rng(8))
    ref = two_symbol_leakage(inst.code.g1.array, inst.code.g3.array, 6.0)
    z = abs(est.value - ref) / est.error
    ok = (noiseless.errors == 0 and leak_max <= 1e-3 and gauss.trials == 100_000
          and gauss.error_rate < 1e-2 and z < 3)
    report(8, ok, f"noiseless errors {noiseless.errors}, max leakage {leak_max:.1e}; "
                  f"E=6 error {gauss.error_rate:.2e} over {gauss.trials}; "
                  f"n=2 leakage {est.value:.4f} vs quadrature {ref:.4f} ({z:.2f} se)")


def test_criterion_9_determinism(capsys):
    commands = [
        ["bound", "--config", "gauss_c3_E8"],
        ["fig2", "--grid", "0:4:5", "--general"],
        ["asymptote", "--p", "5"],
        ["check-symmetric", "--config", "symmetric_noiseless"],
        ["renyi", "--config", "discrete_2x2", "--s", "0.25", "--given", "X2"],
        ["simulate", "--config", "gauss_c2_E6", "--seed", "3"],
        ["simulate", "--config", "symmetric_noiseless"],
    ]
    mismatched = []
    for argv in commands:
        main(argv)
        first = _csv_body(capsys.readouterr().out)
        main(argv)
        second = _csv_body(capsys.readouterr().out)
        if first != second or not first:
            mismatched.append(argv[0])
    report(9, not mismatched, f"{len(commands)} reruns, body mismatches: {mismatched or 'none'}")
