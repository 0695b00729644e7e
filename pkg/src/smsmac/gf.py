"""Arithmetic and dense linear algebra over prime fields F_q.

Vectors and matrices wrap read-only ``int64`` numpy arrays whose entries lie
in ``[0, q)``.  Dimensions at the scale used here stay below 64, so plain
Gaussian elimination is fast enough and products never overflow for any
prime below 2**31.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "FieldElement",
    "FieldVector",
    "FieldMatrix",
    "CodePair",
    "is_prime",
    "field_arith",
    "random_matrix",
    "sample_invertible",
    "make_code_pair",
    "collision_census",
    "index_to_vector",
    "vector_to_index",
]


@lru_cache(maxsize=256)
def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q < 4:
        return True
    if q % 2 == 0:
        return False
    d = 3
    while d * d <= q:
        if q % d == 0:
            return False
        d += 2
    return True


def _check_modulus(q: int) -> int:
    q = int(q)
    if not is_prime(q):
        raise ValueError(f"modulus {q} is not prime")
    if q >= 2**31:
        raise ValueError("modulus must be below 2**31")
    return q


@dataclass(frozen=True)
class FieldElement:
    """An element of the prime field F_q."""

    value: int
    q: int

    def __post_init__(self):
        _check_modulus(self.q)
        if not 0 <= self.value < self.q:
            raise ValueError(f"{self.value} is not a residue mod {self.q}")

    def _same(self, other: FieldElement) -> None:
        if not isinstance(other, FieldElement):
            raise TypeError("expected a FieldElement")
        if other.q != self.q:
            raise ValueError(f"modulus mismatch: {self.q} vs {other.q}")

    def __add__(self, other):
        self._same(other)
        return FieldElement((self.value + other.value) % self.q, self.q)

    def __sub__(self, other):
        self._same(other)
        return FieldElement((self.value - other.value) % self.q, self.q)

    def __mul__(self, other):
        self._same(other)
        return FieldElement((self.value * other.value) % self.q, self.q)

    def __neg__(self):
        return FieldElement((-self.value) % self.q, self.q)

    def inverse(self) -> FieldElement:
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse in F_q")
        return FieldElement(pow(self.value, -1, self.q), self.q)

    def __truediv__(self, other):
        self._same(other)
        return self * other.inverse()

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"F{self.q}({self.value})"


def field_arith(a: FieldElement, b: FieldElement | None, op: str) -> FieldElement:
    """Apply ``op`` in {add, sub, mul, inv, neg}; unary ops ignore ``b``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "neg":
        return -a
    raise ValueError(f"unknown field operation {op!r}")


def _frozen(arr, q: int) -> np.ndarray:
    out = np.array(arr, dtype=np.int64) % q
    out.setflags(write=False)
    return out


class FieldVector:
    """Column vector over F_q with fixed dimension."""

    __slots__ = ("entries", "q")

    def __init__(self, entries, q: int):
        self.q = _check_modulus(q)
        arr = _frozen(entries, self.q)
        if arr.ndim != 1:
            raise ValueError("FieldVector entries must be one-dimensional")
        self.entries = arr

    @classmethod
    def zeros(cls, dim: int, q: int) -> FieldVector:
        return cls(np.zeros(dim, dtype=np.int64), q)

    @classmethod
    def random(cls, dim: int, q: int, rng: np.random.Generator) -> FieldVector:
        return cls(rng.integers(0, q, size=dim), q)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __len__(self):
        return self.dim

    def __getitem__(self, i):
        return FieldElement(int(self.entries[i]), self.q)

    def _same(self, other: FieldVector) -> None:
        if not isinstance(other, FieldVector):
            raise TypeError("expected a FieldVector")
        if other.q != self.q:
            raise ValueError(f"modulus mismatch: {self.q} vs {other.q}")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        self._same(other)
        return FieldVector(self.entries + other.entries, self.q)

    def __sub__(self, other):
        self._same(other)
        return FieldVector(self.entries - other.entries, self.q)

    def __neg__(self):
        return FieldVector(-self.entries, self.q)

    def scale(self, a: int) -> FieldVector:
        return FieldVector(self.entries * (int(a) % self.q), self.q)

    def concat(self, other: FieldVector) -> FieldVector:
        if other.q != self.q:
            raise ValueError(f"modulus mismatch: {self.q} vs {other.q}")
        return FieldVector(np.concatenate([self.entries, other.entries]), self.q)

    def __eq__(self, other):
        if not isinstance(other, FieldVector):
            return NotImplemented
        return (
            self.q == other.q
            and self.dim == other.dim
            and bool(np.array_equal(self.entries, other.entries))
        )

    def __hash__(self):
        return hash((self.q, self.entries.tobytes()))

    def to_index(self) -> int:
        return vector_to_index(self.entries, self.q)

    def __repr__(self):
        return f"FieldVector({self.entries.tolist()}, q={self.q})"


def index_to_vector(index, dim: int, q: int) -> np.ndarray:
    """Base-q digits of ``index`` (first coordinate most significant).

    Works elementwise on integer arrays, appending a trailing axis of
    length ``dim``.
    """
    index = np.asarray(index, dtype=np.int64)
    powers = q ** np.arange(dim - 1, -1, -1, dtype=np.int64)
    return (index[..., None] // powers) % q


def vector_to_index(vec, q: int) -> np.ndarray | int:
    """Inverse of :func:`index_to_vector` along the last axis."""
    vec = np.asarray(vec, dtype=np.int64)
    dim = vec.shape[-1]
    powers = q ** np.arange(dim - 1, -1, -1, dtype=np.int64)
    out = (vec * powers).sum(axis=-1)
    return int(out) if out.ndim == 0 else out


def _eliminate(a: np.ndarray, q: int):
    """Row-reduce a copy of ``a`` mod q.

    Returns the reduced matrix, pivot columns, and the determinant factor
    (product of pivots times the swap sign), which equals det(a) for square
    full-rank input.
    """
    m = np.array(a, dtype=np.int64) % q
    rows, cols = m.shape
    pivots = []
    det = 1
    r = 0
    for col in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, col])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
            det = -det
        piv = int(m[r, col])
        det = (det * piv) % q
        m[r] = (m[r] * pow(piv, -1, q)) % q
        factors = m[:, col].copy()
        factors[r] = 0
        m = (m - np.outer(factors, m[r])) % q
        pivots.append(col)
        r += 1
    return m, pivots, det % q


class FieldMatrix:
    """Dense rectangular matrix over F_q."""

    __slots__ = ("array", "q")

    def __init__(self, array, q: int):
        self.q = _check_modulus(q)
        arr = _frozen(array, self.q)
        if arr.ndim != 2:
            raise ValueError("FieldMatrix needs a two-dimensional array")
        self.array = arr

    @classmethod
    def identity(cls, dim: int, q: int) -> FieldMatrix:
        return cls(np.eye(dim, dtype=np.int64), q)

    @property
    def shape(self) -> tuple[int, int]:
        return self.array.shape

    def __matmul__(self, other):
        if isinstance(other, FieldMatrix):
            if other.q != self.q:
                raise ValueError(f"modulus mismatch: {self.q} vs {other.q}")
            if self.shape[1] != other.shape[0]:
                raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
            return FieldMatrix(self.array @ other.array, self.q)
        if isinstance(other, FieldVector):
            if other.q != self.q:
                raise ValueError(f"modulus mismatch: {self.q} vs {other.q}")
            if self.shape[1] != other.dim:
                raise ValueError(f"cannot apply {self.shape} matrix to dim {other.dim}")
            return FieldVector(self.array @ other.entries, self.q)
        return NotImplemented

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        """Apply to a stack of raw vectors of shape (..., cols)."""
        return (np.asarray(vectors, dtype=np.int64) @ self.array.T) % self.q

    def __eq__(self, other):
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.q == other.q and bool(np.array_equal(self.array, other.array))

    def __hash__(self):
        return hash((self.q, self.shape, self.array.tobytes()))

    def rank(self) -> int:
        return len(_eliminate(self.array, self.q)[1])

    def det(self) -> FieldElement:
        rows, cols = self.shape
        if rows != cols:
            raise ValueError("determinant of a non-square matrix")
        _, pivots, det = _eliminate(self.array, self.q)
        return FieldElement(det if len(pivots) == rows else 0, self.q)

    def is_invertible(self) -> bool:
        rows, cols = self.shape
        return rows == cols and self.rank() == rows

    def inverse(self) -> FieldMatrix:
        rows, cols = self.shape
        if rows != cols:
            raise ValueError("inverse of a non-square matrix")
        aug = np.hstack([self.array, np.eye(rows, dtype=np.int64)])
        red, pivots, _ = _eliminate(aug, self.q)
        if pivots[:rows] != list(range(rows)):
            raise ZeroDivisionError("matrix is singular over F_q")
        return FieldMatrix(red[:, rows:], self.q)

    def rows(self, start: int, stop: int) -> FieldMatrix:
        return FieldMatrix(self.array[start:stop], self.q)

    def __repr__(self):
        return f"FieldMatrix({self.array.tolist()}, q={self.q})"


def random_matrix(rows: int, cols: int, q: int, rng: np.random.Generator) -> FieldMatrix:
    return FieldMatrix(rng.integers(0, q, size=(rows, cols)), q)


def sample_invertible(dim: int, q: int, rng: np.random.Generator) -> FieldMatrix:
    """Uniform draw from GL(dim, F_q) by rejection from uniform matrices."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    while True:
        m = random_matrix(dim, dim, q, rng)
        if m.is_invertible():
            return m


@dataclass(frozen=True)
class CodePair:
    """Random linear maps shared by all players.

    ``g1`` maps ``(f, e)`` with ``f`` in F_q^(k+k') and ``e`` in
    F_q^(nl-k-k') onto F_q^(nl); ``g2`` recovers ``e``.  ``g3`` maps
    ``(m, l)`` onto F_q^(k+k') and ``g4`` recovers ``m``.  The recovery maps
    are coordinate projections of the inverses, so for uniform invertible
    ``g1``/``g3`` they form universal2 hash families.
    """

    g1: FieldMatrix
    g2: FieldMatrix
    g3: FieldMatrix
    g4: FieldMatrix
    n: int
    l: int
    k: int
    kprime: int
    q: int

    @property
    def nl(self) -> int:
        return self.n * self.l

    @property
    def inner_dim(self) -> int:
        return self.k + self.kprime

    @property
    def coset_dim(self) -> int:
        return self.nl - self.inner_dim

    @cached_property
    def g1_inverse(self) -> FieldMatrix:
        return self.g1.inverse()

    @cached_property
    def g3_inverse(self) -> FieldMatrix:
        return self.g3.inverse()


def make_code_pair(n: int, l: int, k: int, kprime: int, q: int,
                   rng: np.random.Generator) -> CodePair:
    q = _check_modulus(q)
    if min(n, l) < 1 or min(k, kprime) < 0:
        raise ValueError("need n, l >= 1 and k, k' >= 0")
    nl, inner = n * l, k + kprime
    if inner > nl:
        raise ValueError(f"k + k' = {inner} exceeds n*l = {nl}")
    if inner < 1:
        raise ValueError("k + k' must be positive")
    g1 = sample_invertible(nl, q, rng)
    g3 = sample_invertible(inner, q, rng)
    g2 = g1.inverse().rows(inner, nl)
    g4 = g3.inverse().rows(0, k)
    return CodePair(g1=g1, g2=g2, g3=g3, g4=g4, n=n, l=l, k=k, kprime=kprime, q=q)


def collision_census(g: FieldMatrix) -> tuple[int, int]:
    """Count unordered pairs x != x' with g x = g x' over the whole domain.

    Returns ``(collisions, pairs)``.
    """
    q = g.q
    cols = g.shape[1]
    domain = index_to_vector(np.arange(q**cols), cols, q)
    images = vector_to_index(g.apply(domain), q)
    _, counts = np.unique(images, return_counts=True)
    collisions = int((counts * (counts - 1) // 2).sum())
    total = q**cols
    return collisions, total * (total - 1) // 2
