"""Multiple access channel models with discrete inputs.

Every sender uses the input alphabet F_q^l, encoded as integers
``0 .. q**l - 1`` via base-q digits (see :func:`smsmac.gf.index_to_vector`).
Senders are labelled ``1 .. c`` wherever a coalition or a derived input
variable is named; input tuples themselves are ordinary positional
sequences.
"""

from __future__ import annotations

import cmath
import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import ndtr

from .gf import index_to_vector, is_prime, vector_to_index
from .mixture import GaussianMixture

__all__ = [
    "ENUMERATION_CAP",
    "MacModel",
    "GaussianMac",
    "RealGaussianMac",
    "ComplexGaussianMac",
    "DiscreteMac",
    "AdditiveSymmetricMac",
    "Var",
    "SymmetryAction",
    "translation_action",
    "shift_action",
    "identity_action",
    "is_symmetric",
    "output_mixture",
    "partition",
    "HEXAGON_ORDER",
]

ENUMERATION_CAP = 2**14


class MacModel(ABC):
    """Channel ``W`` from ``c`` inputs in F_q^l to one output."""

    c: int
    q: int
    l: int
    output: str  # "real", "complex" or "discrete"

    def _init_alphabet(self, c: int, q: int, l: int) -> None:
        if c < 1:
            raise ValueError("need at least one sender")
        if not is_prime(q):
            raise ValueError(f"input field size {q} is not prime")
        if l < 1:
            raise ValueError("input dimension l must be positive")
        self.c, self.q, self.l = int(c), int(q), int(l)

    @property
    def alphabet_size(self) -> int:
        return self.q**self.l

    def check_inputs(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        if x.shape[-1] != self.c:
            raise ValueError(f"expected {self.c} inputs, got {x.shape[-1]}")
        if np.any((x < 0) | (x >= self.alphabet_size)):
            raise ValueError("input outside the alphabet")
        return x

    @cached_property
    def tuples(self) -> np.ndarray:
        """All input tuples, shape ``(A**c, c)``, in lexicographic order."""
        count = self.alphabet_size**self.c
        if count > ENUMERATION_CAP:
            raise ValueError(
                f"{count} input tuples exceed the enumeration cap {ENUMERATION_CAP}"
            )
        return index_to_vector(np.arange(count), self.c, self.alphabet_size)

    @abstractmethod
    def density(self, y, x) -> float:
        """Likelihood of output ``y`` given input tuple ``x``."""

    @abstractmethod
    def log_density_batch(self, y, xs) -> np.ndarray:
        """Log-likelihoods for outputs ``y`` (shape ``(T,)``) against input
        tuples ``xs`` (shape ``(N, c)``); returns shape ``(T, N)``."""

    @abstractmethod
    def sample(self, x, rng: np.random.Generator):
        """Draw outputs for input tuples of shape ``(..., c)``."""


class GaussianMac(MacModel):
    """Additive Gaussian MAC whose mean is a sum of per-sender points."""

    points: np.ndarray
    v: float

    def mean(self, x) -> np.ndarray:
        x = self.check_inputs(x)
        return self.points[x].sum(axis=-1)

    def density(self, y, x) -> float:
        mu = self.mean(x)
        if self.output == "complex":
            return float(math.exp(-abs(y - mu) ** 2 / self.v) / (math.pi * self.v))
        return float(math.exp(-((y - mu) ** 2) / (2 * self.v)) / math.sqrt(2 * math.pi * self.v))

    def log_density_batch(self, y, xs) -> np.ndarray:
        mu = self.points[np.asarray(xs)].sum(axis=-1)
        d = np.asarray(y)[:, None] - mu[None, :]
        if self.output == "complex":
            return -np.abs(d) ** 2 / self.v - math.log(math.pi * self.v)
        return -(d**2) / (2 * self.v) - 0.5 * math.log(2 * math.pi * self.v)

    def sample(self, x, rng: np.random.Generator):
        mu = self.mean(x)
        if self.output == "complex":
            z = rng.standard_normal(np.shape(mu) + (2,)) @ np.array([1, 1j])
            return mu + math.sqrt(self.v / 2) * z
        return mu + math.sqrt(self.v) * rng.standard_normal(np.shape(mu))

    def mixture(self, xs) -> GaussianMixture:
        """Uniform mixture of the output laws of the tuples ``xs``, merged."""
        xs = np.asarray(xs)
        mu = self.points[xs].sum(axis=-1)
        return GaussianMixture(np.full(len(mu), 1.0 / len(mu)), mu, self.v).merged()


class RealGaussianMac(GaussianMac):
    """``Y = E (x_1 + ... + x_c) + N`` with ``N ~ N(0, v)`` and inputs in {0..p-1}."""

    output = "real"

    def __init__(self, E: float, v: float, p: int, c: int):
        if E < 0:
            raise ValueError("amplitude E must be nonnegative")
        if v <= 0:
            raise ValueError("noise variance must be positive")
        self._init_alphabet(c, p, 1)
        self.E, self.v, self.p = float(E), float(v), int(p)
        self.points = self.E * np.arange(self.p, dtype=float)

    def __repr__(self):
        return f"RealGaussianMac(E={self.E}, v={self.v}, p={self.p}, c={self.c})"


# Geometric index k of the point E*exp(i k pi / 3) assigned to labels 1..6,
# following the order in which the hexagon constellation is usually listed:
# E, E e^{2pi i/3}, E e^{pi i/3}, E e^{4pi i/3}, E e^{5pi i/3}, -E.
HEXAGON_ORDER = (0, 2, 1, 4, 5, 3)


class ComplexGaussianMac(GaussianMac):
    """Hexagonal F_7 constellation over a circular complex Gaussian channel.

    Label 0 maps to the origin and labels 1..6 to ``E exp(i k pi / 3)``
    with ``k = order[label - 1]``.  The noise has total variance ``v``.
    """

    output = "complex"

    def __init__(self, E: float, v: float, c: int, order: Sequence[int] = HEXAGON_ORDER):
        if E < 0:
            raise ValueError("amplitude E must be nonnegative")
        if v <= 0:
            raise ValueError("noise variance must be positive")
        if sorted(order) != list(range(6)):
            raise ValueError("order must be a permutation of 0..5")
        self._init_alphabet(c, 7, 1)
        self.E, self.v, self.order = float(E), float(v), tuple(order)
        pts = [0j] + [E * cmath.exp(1j * k * math.pi / 3) for k in self.order]
        self.points = np.array(pts, dtype=complex)

    def __repr__(self):
        return f"ComplexGaussianMac(E={self.E}, v={self.v}, c={self.c})"


class DiscreteMac(MacModel):
    """MAC with a finite output alphabet given by a probability table.

    ``table`` has shape ``(A,) * c + (ny,)`` with ``A = q**l``.
    """

    output = "discrete"

    def __init__(self, table, q: int, l: int = 1):
        table = np.asarray(table, dtype=float)
        c = table.ndim - 1
        self._init_alphabet(c, q, l)
        if table.shape[:-1] != (self.alphabet_size,) * c:
            raise ValueError(f"table shape {table.shape} does not match alphabet {q}**{l}")
        if np.any(table < 0) or not np.allclose(table.sum(axis=-1), 1.0, atol=1e-12):
            raise ValueError("each table row must be a probability vector")
        self.table = table
        self.ny = table.shape[-1]

    @classmethod
    def random(cls, c: int, q: int, ny: int, rng: np.random.Generator, alpha: float = 1.0):
        rows = rng.dirichlet(np.full(ny, alpha), size=(q,) * c)
        return cls(rows, q)

    def probs(self, x) -> np.ndarray:
        x = self.check_inputs(x)
        return self.table[tuple(np.moveaxis(x, -1, 0))]

    def density(self, y, x) -> float:
        return float(self.probs(x)[..., int(y)])

    def log_density_batch(self, y, xs) -> np.ndarray:
        xs = np.asarray(xs)
        rows = self.table[tuple(xs.T)]  # (N, ny)
        with np.errstate(divide="ignore"):
            return np.log(rows.T[np.asarray(y, dtype=np.int64)])

    def sample(self, x, rng: np.random.Generator):
        p = self.probs(x)
        cdf = np.cumsum(p, axis=-1)
        u = rng.random(p.shape[:-1] + (1,))
        out = (u > cdf).sum(axis=-1)
        return np.minimum(out, self.ny - 1)

    def law(self, xs) -> np.ndarray:
        """Output distribution averaged uniformly over tuples ``xs``."""
        xs = np.asarray(xs)
        return self.table[tuple(xs.T)].mean(axis=0)

    def __repr__(self):
        return f"DiscreteMac(c={self.c}, q={self.q}, l={self.l}, ny={self.ny})"


class AdditiveSymmetricMac(DiscreteMac):
    """``Y = x_1 + ... + x_c + N`` over F_q^l with noise law ``noise``."""

    def __init__(self, noise, q: int, l: int, c: int):
        noise = np.asarray(noise, dtype=float)
        if noise.shape != (q**l,):
            raise ValueError(f"noise table needs {q**l} entries")
        if np.any(noise < 0) or abs(noise.sum() - 1.0) > 1e-12:
            raise ValueError("noise table must be a probability vector")
        self.noise = noise
        A = q**l
        digits = index_to_vector(np.arange(A), l, q)
        # shift[a, y] = index of y - a
        shift = vector_to_index((digits[None, :, :] - digits[:, None, :]) % q, q)
        idx = index_to_vector(np.arange(A**c), c, A)
        total = vector_to_index(digits[idx].sum(axis=1) % q, q)
        table = noise[shift[total]].reshape((A,) * c + (A,))
        super().__init__(table, q, l)

    @classmethod
    def noiseless(cls, q: int, l: int, c: int) -> AdditiveSymmetricMac:
        noise = np.zeros(q**l)
        noise[0] = 1.0
        return cls(noise, q, l, c)

    @classmethod
    def bit_flip(cls, flip: float, c: int) -> AdditiveSymmetricMac:
        return cls([1.0 - flip, flip], 2, 1, c)

    def __repr__(self):
        return f"AdditiveSymmetricMac(q={self.q}, l={self.l}, c={self.c})"


# ---------------------------------------------------------------------------
# derived input variables


_TERM = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*[Xx](\d+)")


@dataclass(frozen=True)
class Var:
    """Linear combination over F_q of sender inputs, applied per coordinate.

    ``coeffs`` holds ``(sender, coefficient)`` pairs with 1-based senders;
    ``Var.total`` (no pairs, ``is_total``) stands for the modulo sum of all
    inputs whatever ``c`` is.
    """

    coeffs: tuple[tuple[int, int], ...] = ()
    is_total: bool = False

    @classmethod
    def x(cls, i: int) -> Var:
        return cls(((int(i), 1),))

    @classmethod
    def diff(cls, j: int, jp: int) -> Var:
        return cls(((int(j), 1), (int(jp), -1)))

    @classmethod
    def total(cls) -> Var:
        return cls((), True)

    @classmethod
    def parse(cls, text: str) -> Var:
        """Parse ``X1``, ``X2-X3``, ``2*X1+X2`` or ``sum``."""
        s = text.replace(" ", "")
        if s.lower() in {"sum", "total", "x[c]"}:
            return cls.total()
        pos, out = 0, []
        for m in _TERM.finditer(s):
            if m.start() != pos:
                break
            sign = -1 if m.group(1) == "-" else 1
            coef = int(m.group(2)) if m.group(2) else 1
            out.append((int(m.group(3)), sign * coef))
            pos = m.end()
        if pos != len(s) or not out:
            raise ValueError(f"cannot parse input variable {text!r}")
        return cls(tuple(out))

    def senders(self, c: int) -> tuple[int, ...]:
        if self.is_total:
            return tuple(range(1, c + 1))
        return tuple(sorted({i for i, _ in self.coeffs}))

    def evaluate(self, mac: MacModel, xs: np.ndarray) -> np.ndarray:
        """Value index of this variable for each tuple in ``xs``."""
        coeffs = [(i, 1) for i in range(1, mac.c + 1)] if self.is_total else self.coeffs
        for i, _ in coeffs:
            if not 1 <= i <= mac.c:
                raise ValueError(f"sender X{i} does not exist for c={mac.c}")
        digits = index_to_vector(xs, mac.l, mac.q)  # (N, c, l)
        acc = np.zeros(digits.shape[:1] + digits.shape[2:], dtype=np.int64)
        for i, a in coeffs:
            acc = acc + (a % mac.q) * digits[:, i - 1, :]
        return vector_to_index(acc % mac.q, mac.q)

    def __str__(self):
        if self.is_total:
            return "sum"
        parts = []
        for i, a in self.coeffs:
            sign = "-" if a < 0 else "+"
            mag = "" if abs(a) == 1 else f"{abs(a)}*"
            parts.append(f"{sign}{mag}X{i}")
        s = "".join(parts)
        return s[1:] if s.startswith("+") else s


def partition(mac: MacModel, variables: Sequence[Var], xs: np.ndarray | None = None) -> np.ndarray:
    """Class label of every input tuple under the joint value of ``variables``."""
    xs = mac.tuples if xs is None else xs
    if not variables:
        return np.zeros(len(xs), dtype=np.int64)
    cols = np.stack([v.evaluate(mac, xs) for v in variables], axis=1)
    _, inv = np.unique(cols, axis=0, return_inverse=True)
    return inv.ravel()


# ---------------------------------------------------------------------------
# symmetry


@dataclass(frozen=True)
class SymmetryAction:
    """Family ``f_x`` of output maps indexed by ``x`` in F_q^l.

    ``kind="translation"`` means ``f_x(y) = y + shift(x)`` on a continuous
    output; ``kind="group"`` means ``f_x(y) = y + x`` in F_q^l on a discrete
    output; ``apply`` evaluates ``f_x`` pointwise in both cases.
    """

    q: int
    l: int
    kind: str
    apply: Callable
    shift: Callable | None = None

    def composition_violations(self, ys) -> int:
        """Number of grid points and index pairs where f_a o f_b != f_(a+b)."""
        A = self.q**self.l
        digits = index_to_vector(np.arange(A), self.l, self.q)
        bad = 0
        for a in range(A):
            for b in range(A):
                ab = int(vector_to_index((digits[a] + digits[b]) % self.q, self.q))
                for y in ys:
                    lhs = self.apply(a, self.apply(b, y))
                    rhs = self.apply(ab, y)
                    if not np.isclose(lhs, rhs, rtol=0, atol=1e-12):
                        bad += 1
        return bad


def translation_action(q: int, l: int) -> SymmetryAction:
    """Group translation ``y -> y + x`` on F_q^l (discrete outputs)."""
    A = q**l
    digits = index_to_vector(np.arange(A), l, q)
    table = vector_to_index((digits[:, None, :] + digits[None, :, :]) % q, q)
    return SymmetryAction(q, l, "group", lambda x, y: int(table[int(x), int(y)]))


def shift_action(q: int, l: int, shift: Callable) -> SymmetryAction:
    """Output translation ``y -> y + shift(x)`` on the real line or plane."""
    return SymmetryAction(q, l, "translation", lambda x, y: y + shift(int(x)), shift)


def identity_action(q: int, l: int = 1) -> SymmetryAction:
    return shift_action(q, l, lambda x: 0.0)


def _measure_real(mu: np.ndarray, v: float, a: float, b: float) -> np.ndarray:
    s = math.sqrt(v)
    return ndtr((b - mu) / s) - ndtr((a - mu) / s)


def _measure_complex(mu: np.ndarray, v: float, rect) -> np.ndarray:
    (ar, br), (ai, bi) = rect
    s = math.sqrt(v / 2)
    px = ndtr((br - mu.real) / s) - ndtr((ar - mu.real) / s)
    py = ndtr((bi - mu.imag) / s) - ndtr((ai - mu.imag) / s)
    return px * py


def is_symmetric(mac: MacModel, action: SymmetryAction, grid=None, tol: float = 1e-9):
    """Check ``W_{x + a e_i}(B) = W_x(f_a^{-1}(B))`` for every tuple, shift and sender.

    That is, moving one input by ``a`` pushes the output law forward
    through ``f_a``.

    ``grid`` lists interval edges (real output) or pairs of edge lists
    (complex output, rectangles are their products); it is ignored for
    discrete outputs where singletons are used.  Returns
    ``(holds, worst_violation)``.
    """
    xs = mac.tuples
    A = mac.alphabet_size
    digits = index_to_vector(np.arange(A), mac.l, mac.q)
    add = vector_to_index((digits[:, None, :] + digits[None, :, :]) % mac.q, mac.q)

    if mac.output == "discrete":
        base = mac.table[tuple(xs.T)]  # (N, ny)
        worst = 0.0
        ys = np.arange(mac.ny)
        for a in range(A):
            img = np.array([action.apply(a, y) for y in ys])
            # pushforward of W_x through f_a: mass at y moves to f_a(y)
            lhs = np.zeros_like(base)
            lhs[:, img] = base
            for i in range(mac.c):
                shifted = xs.copy()
                shifted[:, i] = add[shifted[:, i], a]
                rhs = mac.table[tuple(shifted.T)]
                worst = max(worst, float(np.abs(lhs - rhs).max()))
        return worst <= tol, worst

    if not isinstance(mac, GaussianMac):
        raise TypeError("continuous symmetry checks need a Gaussian-family MAC")
    if action.kind != "translation":
        raise ValueError("continuous outputs need a translation action")
    mu = mac.points[xs].sum(axis=-1)
    if grid is None:
        lo = float(mu.real.min()) - 5 * math.sqrt(mac.v)
        hi = float(mu.real.max()) + 5 * math.sqrt(mac.v)
        edges = np.linspace(lo, hi, 41)
        grid = edges if mac.output == "real" else (edges, np.linspace(-hi, hi, 41))
    worst = 0.0
    for a in range(A):
        sh = action.shift(a)
        for i in range(mac.c):
            shifted = xs.copy()
            shifted[:, i] = add[shifted[:, i], a]
            mu2 = mac.points[shifted].sum(axis=-1)
            if mac.output == "real":
                edges = np.asarray(grid, dtype=float)
                for lo_, hi_ in zip(edges[:-1], edges[1:]):
                    lhs = _measure_real(mu, mac.v, lo_ - sh, hi_ - sh)
                    rhs = _measure_real(mu2, mac.v, lo_, hi_)
                    worst = max(worst, float(np.abs(lhs - rhs).max()))
            else:
                er, ei = (np.asarray(g, dtype=float) for g in grid)
                shc = complex(sh)
                for r0, r1 in zip(er[:-1], er[1:]):
                    for i0, i1 in zip(ei[:-1], ei[1:]):
                        lhs = _measure_complex(
                            mu, mac.v, ((r0 - shc.real, r1 - shc.real), (i0 - shc.imag, i1 - shc.imag))
                        )
                        rhs = _measure_complex(mu2, mac.v, ((r0, r1), (i0, i1)))
                        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst <= tol, worst


# ---------------------------------------------------------------------------
# conditional output laws


def _constraint_mask(mac: MacModel, fixed) -> np.ndarray:
    xs = mac.tuples
    mask = np.ones(len(xs), dtype=bool)
    if fixed is None:
        return mask
    items = fixed.items() if isinstance(fixed, Mapping) else fixed
    for var, value in items:
        if not isinstance(var, Var):
            var = Var.x(int(var))
        if np.ndim(value):
            value = vector_to_index(np.asarray(value) % mac.q, mac.q)
        mask &= var.evaluate(mac, xs) == int(value)
    return mask


def output_mixture(mac: MacModel, fixed=None) -> GaussianMixture:
    """Output law given a partial assignment or linear constraints on the inputs.

    ``fixed`` maps senders (1-based ints) or :class:`Var` objects to values;
    a list of ``(Var, value)`` pairs is accepted as well.  Inputs not pinned
    down are uniform.  Components are the distinct channel means weighted by
    the number of consistent tuples.
    """
    if not isinstance(mac, GaussianMac):
        raise TypeError(f"{type(mac).__name__} is not a Gaussian-family MAC")
    mask = _constraint_mask(mac, fixed)
    if not mask.any():
        raise ValueError("no input tuple satisfies the constraints")
    return mac.mixture(mac.tuples[mask])
