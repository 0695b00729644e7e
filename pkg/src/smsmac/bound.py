"""Lower bound on the secure modulo-sum capacity and related closed forms.

Coalitions ``J`` are tuples of 1-based sender labels; ``J`` ranges over the
nonempty proper subsets of ``{1..c}`` and ``i`` over the members of ``J``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .channel import AdditiveSymmetricMac, MacModel, Var
from .infoq import _EntropyCache, conditional_mi, renyi_cmi_down
from .mixture import (
    DEFAULT_TOL,
    GaussianMixture,
    InfoEstimate,
    discrete_entropy,
    gaussian_entropy,
    mixture_entropy,
)

__all__ = [
    "CoalitionTerm",
    "BoundReport",
    "RateConditions",
    "coalitions",
    "coalition_variables",
    "theorem2_bound",
    "lemma2_claim_check",
    "theorem1_capacity",
    "fig2_value",
    "fig2_curve",
    "general_iw",
    "general_bound",
    "asymptotic_limit",
    "rate_conditions_check",
    "max_feasible_message_rate",
    "leakage_exponent",
]

HYPOTHESIS_TOL = 1e-9


def coalitions(c: int) -> list[tuple[tuple[int, ...], int]]:
    """Every pair ``(J, i)`` with ``J`` a nonempty proper subset of [c], ``i`` in ``J``."""
    out = []
    for size in range(1, c):
        for J in itertools.combinations(range(1, c + 1), size):
            out.extend((J, i) for i in J)
    return out


@dataclass(frozen=True)
class CoalitionVariables:
    """The input variables entering the three terms for one ``(J, i)``."""

    J: tuple[int, ...]
    i: int
    rest: tuple[Var, ...]  # X_{J_i}
    complement: tuple[Var, ...]  # X_{J^c}
    differences: tuple[Var, ...]  # (X_j - X_j')_{j, j' in J^c}

    @property
    def jc_size(self) -> int:
        return len(self.complement)


def coalition_variables(c: int, J, i: int) -> CoalitionVariables:
    J = tuple(sorted(J))
    if not J or len(J) >= c or i not in J or not set(J) <= set(range(1, c + 1)):
        raise ValueError(f"need a nonempty proper coalition J of [1..{c}] containing i")
    jc = [j for j in range(1, c + 1) if j not in J]
    # differences against the first complement member generate all pairwise ones
    diffs = tuple(Var.diff(j, jc[0]) for j in jc[1:])
    return CoalitionVariables(
        J=J,
        i=i,
        rest=tuple(Var.x(j) for j in J if j != i),
        complement=tuple(Var.x(j) for j in jc),
        differences=diffs,
    )


@dataclass(frozen=True)
class CoalitionTerm:
    J: tuple[int, ...]
    i: int
    term1: float
    term2: float
    term3: float
    # the three conditional informations the terms subtract, plus the
    # difference-only information used by the third hypothesis
    info_single: float = 0.0
    info_complement: float = 0.0
    info_differences: float = 0.0
    info_differences_only: float = 0.0
    hypotheses: tuple[bool, bool, bool] = (True, True, True)

    @property
    def min(self) -> float:
        return min(self.term1, self.term2, self.term3)


@dataclass(frozen=True)
class BoundReport:
    """Evaluation of the three-term lower bound for one channel.

    ``bound`` is the raw minimum over all coalition terms (it may be
    negative); ``guaranteed`` is False when any hypothesis fails, in which
    case the number certifies nothing.
    """

    iw: float
    terms: tuple[CoalitionTerm, ...]
    bound: float
    c: int
    error: float = 0.0
    flagged: bool = False

    @property
    def hypotheses(self) -> tuple[bool, bool, bool]:
        return tuple(all(t.hypotheses[k] for t in self.terms) for k in range(3))

    @property
    def guaranteed(self) -> bool:
        return all(self.hypotheses)

    @property
    def achievable_rate(self) -> float:
        return max(self.bound, 0.0) if self.guaranteed else 0.0

    @property
    def argmin(self) -> CoalitionTerm:
        return min(self.terms, key=lambda t: t.min)


class _InfoTable:
    """Memoised ``I(Y; targets | conditioners)`` for one channel."""

    def __init__(self, mac: MacModel, tol: float):
        self.mac = mac
        self.cache = _EntropyCache(mac, tol)
        self.tol = tol
        self.seen: dict = {}
        self.error = 0.0
        self.flagged = False

    def __call__(self, targets, conditioners=()) -> float:
        key = (frozenset(targets), frozenset(conditioners))
        if key not in self.seen:
            if not targets:
                est = InfoEstimate(0.0, "exact")
            else:
                est = conditional_mi(self.mac, list(targets), list(conditioners),
                                     tol=self.tol, cache=self.cache)
            self.seen[key] = est
            self.error = max(self.error, est.error)
            self.flagged |= est.flagged
        return self.seen[key].value


def _snap(x: float) -> float:
    # cancellation of equal entropies leaves float dust around zero
    return 0.0 if abs(x) < 1e-12 else x


def theorem2_bound(mac: MacModel, tol: float = DEFAULT_TOL) -> BoundReport:
    """Three-term lower bound minimised over every ``(J, i)``.

    For each pair the terms are

    * ``I(W) - I(Y; X_i | X_{J_i})``
    * ``(|J^c| + 1) I(W) - I(Y; X_i, X_{J^c} | X_{J_i})``
    * ``|J^c| I(W) - I(Y; X_i, (X_j - X_j')_{J^c} | X_{J_i})``

    with ``I(W) = I(Y; X_1 + ... + X_c)``.  A singleton ``J^c`` has no
    differences, so the third term then equals the first.
    """
    info = _InfoTable(mac, tol)
    iw = info([Var.total()])
    terms = []
    for J, i in coalitions(mac.c):
        cv = coalition_variables(mac.c, J, i)
        xi = Var.x(i)
        single = info([xi], cv.rest)
        comp = info([xi, *cv.complement], cv.rest)
        diff = info([xi, *cv.differences], cv.rest)
        diff_only = info(list(cv.differences), cv.rest)
        m = cv.jc_size
        t1 = _snap(iw - single)
        t2 = _snap((m + 1) * iw - comp)
        t3 = _snap(m * iw - diff)
        hyp = (
            t1 > HYPOTHESIS_TOL,
            t2 > HYPOTHESIS_TOL,
            m * iw - diff_only > HYPOTHESIS_TOL,
        )
        terms.append(CoalitionTerm(J, i, t1, t2, t3, single, comp, diff, diff_only, hyp))
    bound = min(t.min for t in terms)
    return BoundReport(iw, tuple(terms), bound, mac.c, info.error, info.flagged)


@dataclass(frozen=True)
class Lemma2Check:
    holds: bool
    witness: tuple[tuple[int, ...], int]
    value: float
    best_singleton_complement: float
    table: dict = field(repr=False, default_factory=dict)


def lemma2_claim_check(mac: MacModel, tol: float = DEFAULT_TOL) -> Lemma2Check:
    """Is ``max_{(J, j)} I(Y; X_j | X_{J_j})`` attained with ``|[c] \\ J| = 1``?

    The comparison allows a slack of ``10 * tol`` for quadrature error.
    """
    if mac.c < 3:
        raise ValueError("the claim concerns c >= 3 senders")
    info = _InfoTable(mac, tol)
    table = {}
    for J, i in coalitions(mac.c):
        cv = coalition_variables(mac.c, J, i)
        table[(J, i)] = info([Var.x(i)], cv.rest)
    witness = max(table, key=table.get)
    best = table[witness]
    single_jc = {k: v for k, v in table.items() if mac.c - len(k[0]) == 1}
    best_single = max(single_jc.values())
    if mac.c - len(witness[0]) != 1 and best_single >= best - 10 * tol:
        witness = max(single_jc, key=single_jc.get)
    holds = best_single >= best - 10 * tol
    return Lemma2Check(holds, witness, best, best_single, table)


def theorem1_capacity(mac: MacModel) -> float:
    """Capacity ``l ln q - H(P_N)`` of the single-access channel of an additive MAC."""
    if not isinstance(mac, AdditiveSymmetricMac):
        raise TypeError("Theorem-1 capacity needs an AdditiveSymmetricMac")
    return mac.l * math.log(mac.q) - discrete_entropy(mac.noise)


# ---------------------------------------------------------------------------
# real Gaussian closed forms (p = 2, c = 3 plot and the general formula)


def _h(counts, levels, E, v, tol) -> InfoEstimate:
    gm = GaussianMixture.from_counts(counts, np.asarray(levels, dtype=float) * E, v)
    return mixture_entropy(gm, tol=tol)


def fig2_value(E: float, v: float = 1.0, tol: float = DEFAULT_TOL) -> InfoEstimate:
    """``h(P0+2PE+2P2E+P3E)/6 + h(P0+PE)/2 - h(P0+2P2E)/3 - h(P0+2PE+P2E)/4``."""
    if v <= 0:
        raise ValueError("noise variance must be positive")
    a = _h([1, 2, 2, 1], [0, 1, 2, 3], E, v, tol)
    b = _h([1, 1], [0, 1], E, v, tol)
    c = _h([1, 2], [0, 2], E, v, tol)
    d = _h([1, 2, 1], [0, 1, 2], E, v, tol)
    return a.combine(b).combine(c, 1, -1).combine(d, 1, -1)


def fig2_curve(E_grid: Iterable[float], v: float = 1.0,
               tol: float = DEFAULT_TOL) -> list[tuple[float, InfoEstimate]]:
    return [(float(E), fig2_value(float(E), v, tol)) for E in E_grid]


def _alpha(p: int, c: int) -> np.ndarray:
    """Number of tuples in {0..p-1}^c with each integer sum 0..c(p-1)."""
    counts = np.ones(1, dtype=np.int64)
    for _ in range(c):
        counts = np.convolve(counts, np.ones(p, dtype=np.int64))
    return counts


def general_iw(E: float, v: float, p: int, c: int, tol: float = DEFAULT_TOL) -> InfoEstimate:
    """``I(W)`` for the real Gaussian MAC via integer-sum counts.

    ``h(sum_s alpha_s P_{sE} / p^c) - sum_j (1/p) h(sum_i alpha(i,j) P_{(j+ip)E} / p^(c-1))``
    where ``alpha(i, j)`` counts tuples whose integer sum is ``j + i p``.
    """
    alpha = _alpha(p, c)
    levels = np.arange(alpha.size)
    total = _h(alpha, levels, E, v, tol)
    for j in range(p):
        sel = levels % p == j
        part = _h(alpha[sel], levels[sel], E, v, tol)
        total = total.combine(part, 1, -1 / p)
    return total


def general_bound(E: float, v: float, p: int, c: int, tol: float = DEFAULT_TOL,
                  given: str = "printed") -> InfoEstimate:
    """``general_iw`` minus the largest single-sender term.

    With ``given="printed"`` the subtracted term conditions on
    ``X_2..X_{c-1}``: ``h(sum_{j,j'} P_{(j+j')E} / p^2) - h(sum_j P_{jE} / p)``.
    With ``given="others"`` it conditions on ``X_2..X_c``:
    ``h(sum_j P_{jE} / p) - h(P_0)``.
    """
    iw = general_iw(E, v, p, c, tol)
    one = _h(np.ones(p), np.arange(p), E, v, tol)
    if given == "printed":
        two = _h(_alpha(p, 2), np.arange(2 * p - 1), E, v, tol)
        return iw.combine(two, 1, -1).combine(one, 1, 1)
    if given == "others":
        noise = InfoEstimate(gaussian_entropy(v), "quadrature")
        return iw.combine(one, 1, -1).combine(noise, 1, 1)
    raise ValueError(f"given must be 'printed' or 'others', not {given!r}")


def asymptotic_limit(p: int) -> float:
    """Large-amplitude limit ``sum_{|j|<p} ((p-|j|)/p^2) ln(p-|j|)`` in nats."""
    if p < 2:
        raise ValueError("alphabet size must be at least 2")
    j = np.arange(-p + 1, p)
    w = (p - np.abs(j)) / p**2
    return float(math.fsum(w * np.log(p - np.abs(j))))


# ---------------------------------------------------------------------------
# rate region and leakage exponents


@dataclass(frozen=True)
class RateConditions:
    """Message and scramble rates in nats per channel use.

    ``rM = (k/n) ln q`` and ``rL = (k'/n) ln q``.
    """

    rM: float
    rL: float

    def __post_init__(self):
        if self.rM < 0 or self.rL < 0:
            raise ValueError("rates must be nonnegative")

    @classmethod
    def from_dims(cls, n: int, k: int, kprime: int, q: int) -> RateConditions:
        return cls(k / n * math.log(q), kprime / n * math.log(q))


@dataclass(frozen=True)
class RateCheck:
    J: tuple[int, ...]
    i: int
    decodable: bool  # rM + rL < I(W)
    complement: bool  # rL + (rM + rL)|J^c| > I(Y; X_i, X_{J^c} | X_{J_i})
    single: bool  # rL > I(Y; X_i | X_{J_i})
    differences: bool  # rL + (rM + rL)(|J^c| - 1) > I(Y; X_i, diffs | X_{J_i})

    @property
    def feasible(self) -> bool:
        return self.decodable and self.complement and self.single and self.differences


def rate_conditions_check(mac: MacModel, rates: RateConditions, report: BoundReport | None = None,
                          tol: float = DEFAULT_TOL) -> list[RateCheck]:
    """Single-letter form of the four rate conditions for every ``(J, i)``."""
    report = theorem2_bound(mac, tol) if report is None else report
    rM, rL = rates.rM, rates.rL
    out = []
    for t in report.terms:
        m = mac.c - len(t.J)
        out.append(RateCheck(
            t.J, t.i,
            decodable=rM + rL < report.iw,
            complement=rL + (rM + rL) * m > t.info_complement,
            single=rL > t.info_single,
            differences=rL + (rM + rL) * (m - 1) > t.info_differences,
        ))
    return out


def max_feasible_message_rate(mac: MacModel, report: BoundReport | None = None,
                              slack: float = 1e-10, tol: float = DEFAULT_TOL,
                              iters: int = 200) -> float:
    """Largest ``rM`` satisfying every condition with ``rM + rL = I(W) - slack``.

    Found by bisection on ``rM``; returns 0 when no positive rate works.
    """
    report = theorem2_bound(mac, tol) if report is None else report
    total = report.iw - slack

    def ok(rm):
        if rm < 0 or rm > total:
            return False
        rates = RateConditions(rm, total - rm)
        return all(r.feasible for r in rate_conditions_check(mac, rates, report))

    lo, hi = 0.0, total
    if not ok(lo):
        return 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class LeakageExponents:
    """Per-use exponents of the three leakage terms (negative means decay)."""

    s: float
    complement: float
    single: float
    differences: float

    @property
    def worst(self) -> float:
        return max(self.complement, self.single, self.differences)

    def bound(self, n: int) -> float:
        """Sum of the three terms ``exp(n e_k)`` at blocklength ``n``."""
        return sum(math.exp(n * e) for e in (self.complement, self.single, self.differences))


def leakage_exponent(s: float, mac: MacModel, rates: RateConditions, J, i: int,
                     tol: float = DEFAULT_TOL) -> LeakageExponents:
    """Single-letter exponents of the three summands of the leakage bound.

    Uses the down-arrow Renyi information of order ``1/(1-s)``:
    ``e = s * (I_down - rate term)`` for the complement, single-sender and
    difference variables respectively.
    """
    if not 0 < s <= 0.5:
        raise ValueError("s must lie in (0, 1/2]")
    cv = coalition_variables(mac.c, J, i)
    m = cv.jc_size
    xi = Var.x(i)
    sp = s / (1 - s)

    def idown(targets):
        return renyi_cmi_down(sp, mac, targets, list(cv.rest), tol=tol).value

    rM, rL = rates.rM, rates.rL
    e1 = s * (idown([xi, *cv.complement]) - rL - (rM + rL) * m)
    e2 = s * (idown([xi]) - rL)
    e3 = s * (idown([xi, *cv.differences]) - rL - (rM + rL) * (m - 1))
    return LeakageExponents(s, e1, e2, e3)
