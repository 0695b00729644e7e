"""Information quantities of a MAC under uniformly distributed inputs.

Targets and conditioners are lists of :class:`~smsmac.channel.Var`.  Every
input not pinned down by them is averaged uniformly, so all conditional
output laws are finite mixtures obtained by partitioning the enumerated
input tuples.  All values are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .channel import DiscreteMac, GaussianMac, MacModel, Var, partition
from .mixture import (
    DEFAULT_TOL,
    GaussianMixture,
    InfoEstimate,
    discrete_entropy,
    expect_under,
    mixture_entropy,
)

__all__ = [
    "GaussianMixture",
    "InfoEstimate",
    "DiscreteJoint",
    "discrete_entropy",
    "mixture_entropy",
    "conditional_mi",
    "renyi_cmi",
    "renyi_cmi_down",
    "lemma1_identity",
    "markov_inequality_holds",
]


def _as_vars(items) -> list[Var]:
    out = []
    for it in items or ():
        if isinstance(it, Var):
            out.append(it)
        elif isinstance(it, str):
            out.append(Var.parse(it))
        else:
            out.append(Var.x(int(it)))
    return out


class _Classes:
    """Tuples grouped by conditioner value and by (target, conditioner) value."""

    def __init__(self, mac: MacModel, targets, conditioners):
        t, cnd = _as_vars(targets), _as_vars(conditioners)
        if set(t) & set(cnd):
            raise ValueError("targets and conditioners must be disjoint")
        xs = mac.tuples
        self.xs = xs
        self.cond = partition(mac, cnd)
        self.joint = partition(mac, t + cnd)
        n = len(xs)
        self.n = n
        # each joint class sits inside exactly one conditioner class
        self.joint_to_cond = np.zeros(self.joint.max() + 1, dtype=np.int64)
        self.joint_to_cond[self.joint] = self.cond
        self.cond_members = [np.flatnonzero(self.cond == c) for c in range(self.cond.max() + 1)]
        self.joint_members = [np.flatnonzero(self.joint == j) for j in range(self.joint.max() + 1)]


class _EntropyCache:
    def __init__(self, mac: MacModel, tol: float):
        self.mac, self.tol = mac, tol
        self.store: dict = {}

    def __call__(self, members: np.ndarray) -> InfoEstimate:
        mac = self.mac
        if isinstance(mac, DiscreteMac):
            law = mac.law(mac.tuples[members])
            return InfoEstimate(discrete_entropy(law / law.sum()), "exact")
        gm = mac.mixture(mac.tuples[members])
        key = gm.shape_key()
        if key not in self.store:
            self.store[key] = mixture_entropy(gm, tol=self.tol)
        return self.store[key]


def _check_mac(mac: MacModel) -> None:
    if not isinstance(mac, (DiscreteMac, GaussianMac)):
        raise TypeError(f"unsupported channel type {type(mac).__name__}")


def conditional_mi(mac: MacModel, targets: Sequence, conditioners: Sequence = (),
                   tol: float = DEFAULT_TOL, cache: _EntropyCache | None = None) -> InfoEstimate:
    """``I(Y; targets | conditioners)`` with all inputs uniform.

    Computed as ``H(Y | C) - H(Y | T, C)``, each an average of output
    entropies over the classes of input tuples.
    """
    _check_mac(mac)
    cls = _Classes(mac, targets, conditioners)
    ent = cache if cache is not None else _EntropyCache(mac, tol)
    h_c = [ent(m) for m in cls.cond_members]
    h_tc = [ent(m) for m in cls.joint_members]
    n = cls.n
    val = sum(len(m) / n * h.value for m, h in zip(cls.cond_members, h_c))
    val -= sum(len(m) / n * h.value for m, h in zip(cls.joint_members, h_tc))
    err = sum(len(m) / n * h.error for m, h in zip(cls.cond_members, h_c))
    err += sum(len(m) / n * h.error for m, h in zip(cls.joint_members, h_tc))
    flagged = any(h.flagged for h in h_c + h_tc)
    method = "exact" if isinstance(mac, DiscreteMac) else "quadrature"
    # exact zeros (e.g. identical laws) may come out as -1e-17
    if abs(val) <= err + 1e-12:
        val = max(val, 0.0)
    return InfoEstimate(val, method, err, n, flagged)


def _renyi_sums(mac: MacModel, cls: _Classes, s: float, tol: float, down: bool):
    """Sum inside the logarithm of either Renyi conditional information."""
    n = cls.n
    total, err, flagged = 0.0, 0.0, False
    if isinstance(mac, DiscreteMac):
        rows = mac.table[tuple(cls.xs.T)]
        if not down:
            for j, mem in enumerate(cls.joint_members):
                p_tc = rows[mem].mean(axis=0)
                p_c = rows[cls.cond_members[cls.joint_to_cond[j]]].mean(axis=0)
                nz = p_tc > 0
                total += len(mem) / n * float((p_tc[nz] ** (1 + s) * p_c[nz] ** (-s)).sum())
        else:
            for c, cmem in enumerate(cls.cond_members):
                inner = np.zeros(mac.ny)
                for j in np.flatnonzero(cls.joint_to_cond == c):
                    mem = cls.joint_members[j]
                    inner += len(mem) / len(cmem) * rows[mem].mean(axis=0) ** (1 + s)
                total += len(cmem) / n * float((inner ** (1 / (1 + s))).sum())
        return total, 0.0, False

    if not down:
        for j, mem in enumerate(cls.joint_members):
            g_tc = mac.mixture(cls.xs[mem])
            g_c = mac.mixture(cls.xs[cls.cond_members[cls.joint_to_cond[j]]])

            def ratio(y, g_tc=g_tc, g_c=g_c):
                return np.exp(s * (g_tc.logpdf(y) - g_c.logpdf(y)))

            est = expect_under(g_tc, ratio, tol)
            w = len(mem) / n
            total += w * est.value
            err += w * est.error
            flagged |= est.flagged
        return total, err, flagged

    for c, cmem in enumerate(cls.cond_members):
        g_c = mac.mixture(cls.xs[cmem])
        parts = [
            (math.log(len(cls.joint_members[j]) / len(cmem)), mac.mixture(cls.xs[cls.joint_members[j]]))
            for j in np.flatnonzero(cls.joint_to_cond == c)
        ]

        def root(y, parts=parts, g_c=g_c):
            terms = np.stack([lw + (1 + s) * g.logpdf(y) for lw, g in parts], axis=0)
            return np.exp(logsumexp(terms, axis=0) / (1 + s) - g_c.logpdf(y))

        est = expect_under(g_c, root, tol)
        w = len(cmem) / n
        total += w * est.value
        err += w * est.error
        flagged |= est.flagged
    return total, err, flagged


def _renyi(s, mac, targets, conditioners, tol, down) -> InfoEstimate:
    if not s > 0:
        raise ValueError("Renyi order parameter s must be positive")
    _check_mac(mac)
    cls = _Classes(mac, targets, conditioners)
    # the log-sum is divided by s afterwards, so tighten the inner tolerance
    total, err, flagged = _renyi_sums(mac, cls, s, tol * min(1.0, s), down)
    scale = (1 + s) / s if down else 1 / s
    val = scale * math.log(total)
    method = "exact" if isinstance(mac, DiscreteMac) else "quadrature"
    return InfoEstimate(val, method, scale * err / total, cls.n, flagged)


def renyi_cmi(s: float, mac: MacModel, targets: Sequence, conditioners: Sequence = (),
              tol: float = DEFAULT_TOL) -> InfoEstimate:
    """Renyi conditional mutual information ``I_{1+s}(Y; targets | conditioners)``.

    ``s * I = log sum_{z1,z2} P(z1,z2) int p(y|z1,z2)^(1+s) p(y|z2)^(-s) dy``.
    """
    return _renyi(s, mac, targets, conditioners, tol, down=False)


def renyi_cmi_down(s: float, mac: MacModel, targets: Sequence, conditioners: Sequence = (),
                   tol: float = DEFAULT_TOL) -> InfoEstimate:
    """Down-arrow variant ``I^down_{1+s}(Y; targets | conditioners)``.

    ``s/(1+s) * I = log sum_{z2} P(z2) int (sum_{z1} P(z1|z2)
    p(y|z1,z2)^(1+s))^(1/(1+s)) dy``.  Order ``1/(1-s)`` corresponds to the
    parameter ``s/(1-s)``.
    """
    return _renyi(s, mac, targets, conditioners, tol, down=True)


# ---------------------------------------------------------------------------
# four-variable discrete joints


@dataclass(frozen=True)
class DiscreteJoint:
    """Joint pmf of ``(A, B, C, D)`` as a 4-axis array."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 4:
            raise ValueError("joint must have exactly four axes (A, B, C, D)")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("joint must be a probability tensor")
        object.__setattr__(self, "p", p)

    @classmethod
    def random(cls, shape, rng: np.random.Generator) -> DiscreteJoint:
        return cls(rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape))

    def entropy(self, axes: str) -> float:
        keep = tuple("ABCD".index(a) for a in axes)
        drop = tuple(i for i in range(4) if i not in keep)
        return discrete_entropy(self.p.sum(axis=drop))

    def cmi(self, x: str, y: str, given: str = "") -> float:
        """``I(x; y | given)`` for axis-name strings such as ``"A"``, ``"CD"``."""
        h = self.entropy
        return h(x + given) + h(y + given) - h(x + y + given) - (h(given) if given else 0.0)


def lemma1_identity(joint: DiscreteJoint) -> float:
    """Residual of ``I(A;B|CD) + I(B;C|D) = I(A;B|D) + I(B;C|AD)``."""
    j = joint
    lhs = j.cmi("A", "B", "CD") + j.cmi("B", "C", "D")
    rhs = j.cmi("A", "B", "D") + j.cmi("B", "C", "AD")
    return abs(lhs - rhs)


def markov_inequality_holds(joint: DiscreteJoint, tol: float = 1e-10) -> bool | None:
    """``I(A;B|D) <= I(A;B|CD)`` whenever ``I(B;C|D) <= tol``.

    Returns ``None`` when ``B`` and ``C`` are not conditionally independent
    given ``D``, since nothing is claimed then.
    """
    if joint.cmi("B", "C", "D") > tol:
        return None
    return joint.cmi("A", "B", "D") <= joint.cmi("A", "B", "CD") + tol
