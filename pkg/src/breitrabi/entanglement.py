"""Electron-nuclear entanglement of pure product-basis states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import AtomParams, FieldPoint, ProductBasis, product_basis
from .spectra import LevelId, level
from .spin_algebra import HalfInteger, projections

__all__ = [
    "ELECTRON",
    "NUCLEAR",
    "ReducedDensity",
    "SchmidtDecomposition",
    "reduced_density",
    "von_neumann_entropy",
    "binary_entropy",
    "schmidt",
    "level_entropy",
    "entropy_sweep",
    "entropy_maximum",
]

ELECTRON, NUCLEAR = "electron", "nuclear"

NORM_TOL = 1e-10
CLIP_TOL = 1e-14
# off-diagonal magnitude below which rho_e is treated as already diagonal
DIAGONAL_TOL = 1e-14
# Schmidt terms with amplitude below this are rounding residue
AMPLITUDE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class ReducedDensity:
    subsystem: str
    matrix: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        w = np.linalg.eigvalsh(self.matrix)
        if w.min() < -CLIP_TOL:
            raise ValueError(f"reduced density has negative eigenvalue {w.min():.3e}")
        return np.clip(w, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``psi = sum_i sqrt(p_i) |e_i> (x) |f_i>`` with ``p`` descending.

    ``electron_vectors[i]`` and ``nuclear_vectors[i]`` are expressed in the
    ``m_S = +1/2, -1/2`` and ``m_I = I, ..., -I`` bases.
    """

    coefficients: np.ndarray
    electron_vectors: np.ndarray
    nuclear_vectors: np.ndarray
    I: HalfInteger

    @property
    def M(self) -> int:
        return int(np.count_nonzero(self.coefficients > CLIP_TOL))

    def reconstruct(self, basis: ProductBasis) -> np.ndarray:
        tensor = sum(math.sqrt(p) * np.outer(e, f) for p, e, f in
                     zip(self.coefficients, self.electron_vectors, self.nuclear_vectors))
        return np.asarray(tensor).reshape(-1)[list(basis.tensor_index)]

    def sharp_m(self, subsystem: str, tol: float = 1e-12) -> list[HalfInteger]:
        """Projection of each Schmidt vector; ValueError if one is not sharp."""
        if subsystem == ELECTRON:
            vecs, proj = self.electron_vectors, projections(HalfInteger(1))
        else:
            vecs, proj = self.nuclear_vectors, projections(self.I)
        out = []
        for k, v in enumerate(vecs[: len(self.coefficients)]):
            support = np.flatnonzero(np.abs(v) > tol)
            if len(support) != 1:
                raise ValueError(
                    f"{subsystem} Schmidt vector {k} has no sharp m (support {support.tolist()})"
                )
            out.append(proj[support[0]])
        return out


def _tensor(state, basis: ProductBasis) -> np.ndarray:
    state = np.asarray(state)
    if state.shape != (len(basis),):
        raise ValueError(f"state has shape {state.shape}, expected ({len(basis)},)")
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm {norm:.12g})")
    return basis.to_tensor(state.astype(complex))


def reduced_density(state, subsystem: str, basis: ProductBasis | None = None) -> ReducedDensity:
    """Partial trace of ``|psi><psi|`` onto ``subsystem``."""
    if basis is None:
        basis = _basis_for_length(len(state))
    psi = _tensor(state, basis)
    if subsystem == ELECTRON:
        rho = psi @ psi.conj().T
    elif subsystem == NUCLEAR:
        rho = psi.T @ psi.conj()
    else:
        raise ValueError(f"unknown subsystem {subsystem!r}")
    rho = 0.5 * (rho + rho.conj().T)
    return ReducedDensity(subsystem, rho)


def _basis_for_length(n: int) -> ProductBasis:
    if n % 2 or n < 4:
        raise ValueError(f"no electron (x) nuclear basis has dimension {n}")
    return product_basis(HalfInteger(n // 2 - 1))


def binary_entropy(p: float) -> float:
    """Entropy in bits of the distribution ``(p, 1-p)``."""
    return von_neumann_entropy(np.array([p, 1.0 - p]))


def von_neumann_entropy(rho) -> float:
    """``-sum lambda log2 lambda`` with ``0 log 0 = 0``.

    Accepts a :class:`ReducedDensity`, a density matrix, or a 1-d array of
    eigenvalues.
    """
    if isinstance(rho, ReducedDensity):
        w = rho.eigenvalues()
    else:
        arr = np.asarray(rho)
        w = arr if arr.ndim == 1 else np.linalg.eigvalsh(0.5 * (arr + arr.conj().T))
        if np.min(w) < -CLIP_TOL:
            raise ValueError(f"negative eigenvalue {np.min(w):.3e}")
        w = np.clip(np.real(w), 0.0, 1.0)
    # weights below the clip tolerance are rounding residue, not entanglement
    w = w[w > CLIP_TOL]
    return float(-np.sum(w * np.log2(w)) + 0.0)


def _gauge(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    ph = v[k] / abs(v[k])
    return v / ph


def schmidt(state, basis: ProductBasis | None = None) -> SchmidtDecomposition:
    """Schmidt decomposition from the electron reduced density.

    Electron vectors are gauge-fixed so their largest component is real and
    positive; the nuclear partners absorb the phase.  When ``rho_e`` is
    diagonal (all fixed-m eigenstates) the ``m_S`` basis vectors are used
    directly, ordered by weight and then by ``m_S`` descending.
    """
    if basis is None:
        basis = _basis_for_length(len(state))
    psi = _tensor(state, basis)
    rho_e = psi @ psi.conj().T
    if abs(rho_e[0, 1]) <= DIAGONAL_TOL:
        w = np.real(np.diag(rho_e))
        vecs = np.eye(2, dtype=complex)
        order = sorted(range(2), key=lambda k: (-round(w[k], 14), k))
    else:
        w, vecs = np.linalg.eigh(0.5 * (rho_e + rho_e.conj().T))
        order = [int(k) for k in np.argsort(-w, kind="stable")]
    ps, es, fs = [], [], []
    for k in order:
        e = _gauge(vecs[:, k])
        raw = e.conj() @ psi
        for prev in fs:
            # re-orthogonalize; rho_e residuals are amplified by 1/sqrt(p1 p2)
            raw = raw - np.vdot(prev, raw) * prev
        # weight from the partner's norm keeps small terms accurate
        norm = float(np.linalg.norm(raw))
        if norm <= AMPLITUDE_TOL:
            continue
        ps.append(norm * norm)
        es.append(e)
        fs.append(raw / norm)
    ps = np.array(ps)
    return SchmidtDecomposition(ps / ps.sum(), np.array(es), np.array(fs), basis.I)


def level_entropy(atom: AtomParams, point: FieldPoint, level_id) -> float:
    lv = level(atom, point, level_id)
    basis = product_basis(atom.I)
    return von_neumann_entropy(reduced_density(lv.amplitudes, ELECTRON, basis))


@dataclass(frozen=True, eq=False)
class EntropyTable:
    B: np.ndarray
    f: float
    ids: tuple[LevelId, ...]
    entropy: np.ndarray  # (n_points, n_levels)

    def column(self, level_id) -> np.ndarray:
        if isinstance(level_id, str):
            level_id = LevelId.parse(level_id)
        return self.entropy[:, self.ids.index(level_id)]


def entropy_sweep(atom: AtomParams, level_ids, B_values, f: float = 1.0) -> EntropyTable:
    """Entanglement entropy (bits) of each requested level along ``B_values``."""
    from .spectra import level_ids as all_ids

    ids = tuple(all_ids(atom) if level_ids is None else
                [LevelId.parse(x) if isinstance(x, str) else x for x in level_ids])
    B = np.asarray(B_values, dtype=float)
    out = np.array([[level_entropy(atom, FieldPoint(float(b), f), i) for i in ids] for b in B])
    return EntropyTable(B, f, ids, out)


def entropy_maximum(atom: AtomParams, level_id, B_lo: float, B_hi: float, f: float = 1.0,
                    n_scan: int = 401, tol: float = 1e-13, h: float = 1e-7) -> tuple[float, float]:
    """Field of maximal entropy of one level inside ``[B_lo, B_hi]``.

    The coarse maximum on a scan is refined by bisection on the sign of the
    central-difference slope.  Returns ``(B_max, S_max)``.
    """
    def s(b):
        return level_entropy(atom, FieldPoint(b, f), level_id)

    grid = np.linspace(B_lo, B_hi, n_scan)
    vals = np.array([s(b) for b in grid])
    k = int(np.argmax(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, n_scan - 1)]

    def slope(b):
        return s(b + h) - s(b - h)

    if slope(lo) <= 0 or slope(hi) >= 0:
        # maximum on the window edge or flat; no interior refinement possible
        return float(grid[k]), float(vals[k])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if slope(mid) > 0:
            lo = mid
        else:
            hi = mid
    b = 0.5 * (lo + hi)
    return float(b), s(b)
