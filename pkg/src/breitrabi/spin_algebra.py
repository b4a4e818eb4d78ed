"""Angular-momentum matrices and SU(2) rotations for arbitrary spin j.

Basis states are ordered by decreasing projection, ``m = j, j-1, ..., -j``,
so row/column 0 is the stretched state ``|j, j>``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "HalfInteger",
    "SpinOperatorSet",
    "spin_operators",
    "projections",
    "rotation_matrix",
]


@functools.total_ordering
@dataclass(frozen=True)
class HalfInteger:
    """Exact half-integer number stored as twice its value."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, (int, np.integer)) or isinstance(self.twice, bool):
            raise TypeError(f"twice-value must be an integer, got {self.twice!r}")
        object.__setattr__(self, "twice", int(self.twice))

    @classmethod
    def of(cls, value) -> "HalfInteger":
        """Coerce ``value`` (HalfInteger, int, float, Fraction or '3/2') to a HalfInteger."""
        if isinstance(value, HalfInteger):
            return value
        if isinstance(value, str):
            value = Fraction(value.strip())
        doubled = 2 * Fraction(value)
        if doubled.denominator != 1:
            raise ValueError(f"{value!r} is not an integer or half-integer")
        return cls(int(doubled))

    @property
    def value(self) -> float:
        return self.twice / 2

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.twice / 2

    def __add__(self, other):
        other = HalfInteger.of(other)
        return HalfInteger(self.twice + other.twice)

    __radd__ = __add__

    def __sub__(self, other):
        other = HalfInteger.of(other)
        return HalfInteger(self.twice - other.twice)

    def __neg__(self):
        return HalfInteger(-self.twice)

    def __abs__(self):
        return HalfInteger(abs(self.twice))

    def __eq__(self, other):
        if isinstance(other, HalfInteger):
            return self.twice == other.twice
        try:
            return self.twice == 2 * Fraction(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        other = HalfInteger.of(other)
        return self.twice < other.twice

    def __hash__(self):
        return hash(("HalfInteger", self.twice))

    def __str__(self) -> str:
        if self.is_integer:
            return str(self.twice // 2)
        return f"{self.twice}/2"

    def signed(self) -> str:
        """String with explicit sign, e.g. ``+1``, ``0``, ``-3/2``."""
        s = str(self)
        return s if self.twice <= 0 else "+" + s

    def __repr__(self) -> str:
        return f"HalfInteger({self})"


def projections(j: HalfInteger) -> list[HalfInteger]:
    """Projections ``j, j-1, ..., -j`` as HalfIntegers."""
    j = HalfInteger.of(j)
    if j.twice < 0:
        raise ValueError(f"spin magnitude must be non-negative, got {j}")
    return [HalfInteger(t) for t in range(j.twice, -j.twice - 1, -2)]


@dataclass(frozen=True, eq=False)
class SpinOperatorSet:
    j: HalfInteger
    Jz: np.ndarray
    Jplus: np.ndarray
    Jminus: np.ndarray
    Jx: np.ndarray
    Jy: np.ndarray

    @property
    def dim(self) -> int:
        return self.j.twice + 1

    def component(self, n) -> np.ndarray:
        """The operator ``n . J`` for a 3-vector ``n``."""
        nx, ny, nz = n
        return nx * self.Jx + ny * self.Jy + nz * self.Jz


@functools.lru_cache(maxsize=None)
def _spin_operators(twice_j: int) -> SpinOperatorSet:
    j = HalfInteger(twice_j)
    m = np.array([p.value for p in projections(j)])
    jv = j.value
    dim = len(m)
    jplus = np.zeros((dim, dim))
    # <m+1|J+|m> sits one row above column m in descending order
    for col in range(1, dim):
        mm = m[col]
        jplus[col - 1, col] = np.sqrt((jv - mm) * (jv + mm + 1))
    jminus = jplus.T.copy()
    jz = np.diag(m)
    jx = 0.5 * (jplus + jminus)
    jy = -0.5j * (jplus - jminus)
    for arr in (jz, jplus, jminus, jx, jy):
        arr.setflags(write=False)
    return SpinOperatorSet(j, jz, jplus, jminus, jx, jy)


def spin_operators(j) -> SpinOperatorSet:
    """Spin matrices ``Jz, J+, J-, Jx, Jy`` for spin ``j`` (units of hbar).

    Matrices are read-only and cached per ``j``.
    """
    j = HalfInteger.of(j)
    if j.twice < 0:
        raise ValueError(f"spin magnitude must be non-negative, got {j}")
    return _spin_operators(j.twice)


@functools.lru_cache(maxsize=None)
def _jy_eigensystem(twice_j: int):
    ops = _spin_operators(twice_j)
    return np.linalg.eigh(ops.Jy)


def rotation_matrix(j, theta: float, phi: float) -> np.ndarray:
    """``exp(-i phi Jz) exp(-i theta Jy)`` for spin ``j``.

    The y rotation uses the eigendecomposition of ``Jy``; the z rotation is
    diagonal in this basis.
    """
    j = HalfInteger.of(j)
    w, v = _jy_eigensystem(j.twice)
    ry = (v * np.exp(-1j * theta * w)) @ v.conj().T
    m = np.array([p.value for p in projections(j)])
    return np.exp(-1j * phi * m)[:, None] * ry
