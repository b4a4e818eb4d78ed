"""Breit-Rabi Hamiltonian for an electron spin 1/2 coupled to a nuclear spin I.

All energies are in units of the hyperfine constant A.  The field enters via
``a_prime = a/A`` and ``b_prime = b/A`` (1/T) and the hyperfine coupling is
scaled by ``f`` (``A -> f A``).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .spin_algebra import HalfInteger, projections, rotation_matrix, spin_operators

__all__ = [
    "ELECTRON_SPIN",
    "AtomParams",
    "FieldPoint",
    "ProductBasis",
    "Block",
    "BlockHamiltonian",
    "load_presets",
    "preset",
    "product_basis",
    "diagonal_element",
    "build_hamiltonian",
    "build_kron_hamiltonian",
    "build_rotated_hamiltonian",
    "field_direction",
    "rotation_operator",
]

ELECTRON_SPIN = HalfInteger(1)

F_BOUNDS = (-1.0, 1.0)


@dataclass(frozen=True)
class AtomParams:
    name: str
    I: HalfInteger
    a_prime: float
    b_prime: float

    def __post_init__(self):
        object.__setattr__(self, "I", HalfInteger.of(self.I))
        if self.I.twice < 1:
            raise ValueError(f"nuclear spin must be >= 1/2, got {self.I}")
        if self.a_prime == self.b_prime:
            raise ValueError("a_prime and b_prime must differ")

    @property
    def nuclear_dim(self) -> int:
        return self.I.twice + 1

    @property
    def dim(self) -> int:
        return 2 * self.nuclear_dim


@dataclass(frozen=True)
class FieldPoint:
    """Field magnitude ``B`` (T) and hyperfine scale ``f``."""

    B: float
    f: float = 1.0

    def __post_init__(self):
        lo, hi = F_BOUNDS
        if not lo <= self.f <= hi:
            warnings.warn(f"f={self.f} outside [{lo}, {hi}]", stacklevel=3)


def load_presets() -> dict[str, AtomParams]:
    text = resources.files("breitrabi").joinpath("data/atoms.json").read_text()
    raw = json.loads(text)
    return {
        name: AtomParams(name, HalfInteger.of(v["I"]), float(v["a_prime"]), float(v["b_prime"]))
        for name, v in raw.items()
    }


def preset(name: str) -> AtomParams:
    presets = load_presets()
    try:
        return presets[name]
    except KeyError:
        raise KeyError(f"unknown atom preset {name!r}; known: {sorted(presets)}") from None


@dataclass(frozen=True, eq=False)
class ProductBasis:
    """Product states ``|m_S, m_I>`` sorted by decreasing m, then decreasing m_S."""

    I: HalfInteger
    entries: tuple[tuple[HalfInteger, HalfInteger], ...]
    m_of: tuple[HalfInteger, ...]
    # position of each entry in the electron (x) nuclear tensor ordering
    tensor_index: tuple[int, ...]

    def __len__(self):
        return len(self.entries)

    def block_slices(self) -> list[tuple[HalfInteger, slice]]:
        out = []
        start = 0
        for i in range(1, len(self.m_of) + 1):
            if i == len(self.m_of) or self.m_of[i] != self.m_of[start]:
                out.append((self.m_of[start], slice(start, i)))
                start = i
        return out

    def permutation(self) -> np.ndarray:
        """Matrix P with ``P @ v_tensor`` giving the vector in this ordering."""
        n = len(self.entries)
        p = np.zeros((n, n))
        p[np.arange(n), list(self.tensor_index)] = 1.0
        return p

    def to_tensor(self, amplitudes) -> np.ndarray:
        """Reshape basis amplitudes into a (2, 2I+1) electron-by-nuclear array."""
        amplitudes = np.asarray(amplitudes)
        flat = np.zeros(len(self.entries), dtype=np.result_type(amplitudes, float))
        flat[list(self.tensor_index)] = amplitudes
        return flat.reshape(2, self.I.twice + 1)


def product_basis(I) -> ProductBasis:
    I = HalfInteger.of(I)
    ms_list = projections(ELECTRON_SPIN)
    mi_list = projections(I)
    dim_i = len(mi_list)
    items = []
    for a, ms in enumerate(ms_list):
        for b, mi in enumerate(mi_list):
            items.append((ms, mi, a * dim_i + b))
    items.sort(key=lambda t: (-(t[0] + t[1]).twice, -t[0].twice))
    return ProductBasis(
        I=I,
        entries=tuple((ms, mi) for ms, mi, _ in items),
        m_of=tuple(ms + mi for ms, mi, _ in items),
        tensor_index=tuple(k for _, _, k in items),
    )


def diagonal_element(m_S, m_I, point: FieldPoint, atom: AtomParams) -> float:
    """``f m_S m_I + m_S a' B + m_I b' B``."""
    ms = float(HalfInteger.of(m_S))
    mi = float(HalfInteger.of(m_I))
    # grouping matches the Kronecker assembly so both paths agree bitwise
    return point.f * (ms * mi) + point.B * (ms * atom.a_prime + mi * atom.b_prime)


def _flip_flop(m_S: HalfInteger, m_I: HalfInteger, I: HalfInteger) -> float:
    """``<m_S+1, m_I-1| S+ I- |m_S, m_I>``."""
    s, ms = ELECTRON_SPIN.value, m_S.value
    i, mi = I.value, m_I.value
    return math.sqrt((s - ms) * (s + ms + 1)) * math.sqrt((i + mi) * (i - mi + 1))


@dataclass(frozen=True, eq=False)
class Block:
    m: HalfInteger
    matrix: np.ndarray
    basis_slice: slice

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class BlockHamiltonian:
    atom: AtomParams
    point: FieldPoint
    basis: ProductBasis
    blocks: tuple[Block, ...] = field(default_factory=tuple)

    def block(self, m) -> Block:
        m = HalfInteger.of(m)
        for blk in self.blocks:
            if blk.m == m:
                return blk
        raise KeyError(f"no block with m={m}")

    def dense(self) -> np.ndarray:
        h = np.zeros((len(self.basis), len(self.basis)))
        for blk in self.blocks:
            h[blk.basis_slice, blk.basis_slice] = blk.matrix
        return h

    def trace(self) -> float:
        return float(sum(np.trace(b.matrix) for b in self.blocks))


def build_hamiltonian(atom: AtomParams, point: FieldPoint) -> BlockHamiltonian:
    """Fill each fixed-m block directly from the matrix-element formulas."""
    basis = product_basis(atom.I)
    blocks = []
    for m, sl in basis.block_slices():
        states = basis.entries[sl]
        n = len(states)
        mat = np.zeros((n, n))
        for r, (ms, mi) in enumerate(states):
            mat[r, r] = diagonal_element(ms, mi, point, atom)
        for r, (ms_r, mi_r) in enumerate(states):
            for c, (ms_c, mi_c) in enumerate(states):
                if ms_r.twice == ms_c.twice + 2 and mi_r.twice == mi_c.twice - 2:
                    val = 0.5 * point.f * _flip_flop(ms_c, mi_c, atom.I)
                    mat[r, c] = val
                    mat[c, r] = val
        mat.setflags(write=False)
        blocks.append(Block(m, mat, sl))
    return BlockHamiltonian(atom, point, basis, tuple(blocks))


def field_direction(theta: float, phi: float) -> np.ndarray:
    return np.array([
        math.sin(theta) * math.cos(phi),
        math.sin(theta) * math.sin(phi),
        math.cos(theta),
    ])


def _kron_terms(atom: AtomParams):
    s = spin_operators(ELECTRON_SPIN)
    i = spin_operators(atom.I)
    one_s = np.eye(s.dim)
    one_i = np.eye(i.dim)
    hyperfine = sum(np.kron(sa, ia) for sa, ia in ((s.Jx, i.Jx), (s.Jy, i.Jy), (s.Jz, i.Jz)))
    electron = [np.kron(op, one_i) for op in (s.Jx, s.Jy, s.Jz)]
    nuclear = [np.kron(one_s, op) for op in (i.Jx, i.Jy, i.Jz)]
    return hyperfine, electron, nuclear


def _to_basis_order(atom: AtomParams, h_tensor: np.ndarray) -> np.ndarray:
    idx = list(product_basis(atom.I).tensor_index)
    return h_tensor[np.ix_(idx, idx)]


def build_kron_hamiltonian(atom: AtomParams, point: FieldPoint, theta: float = 0.0,
                           phi: float = 0.0) -> np.ndarray:
    """Dense Hamiltonian assembled from Kronecker products of spin matrices.

    ``f I.S + B (a' n.S + b' n.I)`` with ``n`` at polar angle ``theta`` and
    azimuth ``phi``, returned in the product-basis ordering.  Independent of
    :func:`build_hamiltonian`, which it cross-checks at ``theta = 0``.
    """
    hyperfine, electron, nuclear = _kron_terms(atom)
    n = field_direction(theta, phi)
    zeeman = sum(n[k] * (atom.a_prime * electron[k] + atom.b_prime * nuclear[k]) for k in range(3))
    h = point.f * hyperfine + point.B * zeeman
    h = _to_basis_order(atom, h)
    if theta == 0.0:
        # purely real along z; imaginary parts are exact zeros
        return h.real.copy()
    return h


def build_rotated_hamiltonian(atom: AtomParams, point: FieldPoint, theta: float,
                              phi: float) -> np.ndarray:
    """Hermitian Hamiltonian for the field along ``n(theta, phi)``."""
    h = build_kron_hamiltonian(atom, point, theta, phi)
    h = np.asarray(h, dtype=complex)
    return 0.5 * (h + h.conj().T)


def rotation_operator(atom: AtomParams, theta: float, phi: float) -> np.ndarray:
    """Joint rotation ``R_S (x) R_I`` in product-basis ordering."""
    r = np.kron(rotation_matrix(ELECTRON_SPIN, theta, phi), rotation_matrix(atom.I, theta, phi))
    return _to_basis_order(atom, r)
