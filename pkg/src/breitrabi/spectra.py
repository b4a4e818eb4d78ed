"""Eigenlevels of the block Hamiltonian: closed forms, Jacobi oracle, sweeps.

Levels carry a stable identity ``(m, branch)``.  Within a two-state block the
``plus`` branch is the upper level; one-state blocks use ``single``.  The
mixing angle of a two-state block with entries ``[[h11, o], [o, h22]]`` is
``alpha = atan2(2 o, h11 - h22)`` in the block's own basis ordering, so the
plus eigenvector is ``(cos alpha/2, sin alpha/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import AtomParams, FieldPoint, build_hamiltonian, product_basis
from .jacobi import jacobi_eigh
from .spin_algebra import HalfInteger

__all__ = [
    "PLUS",
    "MINUS",
    "SINGLE",
    "LevelId",
    "EigenLevel",
    "SpectrumTable",
    "LevelTrackingError",
    "eigensolve_block",
    "hydrogen_closed_form",
    "sodium_closed_form",
    "numeric_levels",
    "levels",
    "level",
    "level_ids",
    "spectrum_sweep",
    "ground_state",
    "energy_gap",
    "DEGENERACY_TOL",
]

PLUS, MINUS, SINGLE = "plus", "minus", "single"
_BRANCH_RANK = {PLUS: 0, SINGLE: 1, MINUS: 2}
_BRANCH_MARK = {PLUS: "+", MINUS: "-", SINGLE: ""}

# energies closer than this count as an exact tie for ground-state selection
DEGENERACY_TOL = 1e-12
AMBIGUITY_TOL = 1e-6


class LevelTrackingError(RuntimeError):
    pass


@dataclass(frozen=True, order=False)
class LevelId:
    m: HalfInteger
    branch: str

    def __post_init__(self):
        object.__setattr__(self, "m", HalfInteger.of(self.m))
        if self.branch not in _BRANCH_RANK:
            raise ValueError(f"unknown branch {self.branch!r}")

    @property
    def sort_key(self):
        return (-self.m.twice, _BRANCH_RANK[self.branch])

    @property
    def label(self) -> str:
        """Column-friendly name such as ``E[+1]-`` or ``E[+2]``."""
        return f"E[{self.m.signed()}]{_BRANCH_MARK[self.branch]}"

    @classmethod
    def parse(cls, text: str) -> "LevelId":
        """Parse ``E[+1]-``, ``+1-``, ``0+`` or ``-2``."""
        t = text.strip()
        if t.startswith("E[") and "]" in t:
            m_txt, mark = t[2:].split("]", 1)
        else:
            mark = t[-1] if t[-1:] in "+-" and len(t) > 1 and t[-2].isdigit() else ""
            m_txt = t[: len(t) - len(mark)]
        branch = {"+": PLUS, "-": MINUS, "": SINGLE}[mark]
        return cls(HalfInteger.of(m_txt.lstrip("+")), branch)

    def __str__(self):
        return self.label


@dataclass(frozen=True, eq=False)
class EigenLevel:
    m: HalfInteger
    branch: str
    energy: float
    amplitudes: np.ndarray
    alpha: float | None = None

    @property
    def id(self) -> LevelId:
        return LevelId(self.m, self.branch)


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    atom: AtomParams
    grid: tuple[FieldPoint, ...]
    ids: tuple[LevelId, ...]
    levels: tuple[tuple[EigenLevel, ...], ...]
    gap: np.ndarray

    @property
    def energies(self) -> np.ndarray:
        """(n_points, n_levels) energy array, columns in ``ids`` order."""
        return np.array([[lv.energy for lv in row] for row in self.levels])

    def column(self, level_id) -> np.ndarray:
        k = self.ids.index(level_id)
        return self.energies[:, k]


def eigensolve_block(block) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and column eigenvectors of a symmetric block."""
    block = np.asarray(block, dtype=float)
    if block.shape == (1, 1):
        return block.diagonal().copy(), np.ones((1, 1))
    if block.shape[0] > 10:
        raise ValueError("blocks larger than 10x10 are not supported")
    return jacobi_eigh(block)


def _mixing_angle(off2: float, diag_diff: float) -> float:
    return math.atan2(off2, diag_diff)


def _pair(alpha: float):
    return (math.cos(alpha / 2), math.sin(alpha / 2)), (-math.sin(alpha / 2), math.cos(alpha / 2))


def _unit(dim: int, idx: int) -> np.ndarray:
    v = np.zeros(dim)
    v[idx] = 1.0
    return v


def _two_state(dim, i1, i2, vec) -> np.ndarray:
    v = np.zeros(dim)
    v[i1], v[i2] = vec
    return v


def hydrogen_closed_form(atom: AtomParams, point: FieldPoint) -> list[EigenLevel]:
    """Analytic levels for I = 1/2, ordered by identity."""
    if atom.I != HalfInteger(1):
        raise ValueError(f"hydrogen closed form needs I=1/2, got I={atom.I}")
    f, B = point.f, point.B
    s = atom.a_prime + atom.b_prime
    c = atom.a_prime - atom.b_prime
    root = 0.5 * math.hypot(c * B, f)
    alpha = _mixing_angle(f, c * B)
    vp, vm = _pair(alpha)
    return [
        EigenLevel(HalfInteger(2), SINGLE, f / 4 + s * B / 2, _unit(4, 0)),
        EigenLevel(HalfInteger(0), PLUS, -f / 4 + root, _two_state(4, 1, 2, vp), alpha),
        EigenLevel(HalfInteger(0), MINUS, -f / 4 - root, _two_state(4, 1, 2, vm), alpha),
        EigenLevel(HalfInteger(-2), SINGLE, f / 4 - s * B / 2, _unit(4, 3)),
    ]


def sodium_closed_form(atom: AtomParams, point: FieldPoint) -> list[EigenLevel]:
    """Analytic levels for I = 3/2, ordered by identity.

    Basis positions: 0 |1/2,3/2>; 1 |1/2,1/2>, 2 |-1/2,3/2>; 3 |1/2,-1/2>,
    4 |-1/2,1/2>; 5 |1/2,-3/2>, 6 |-1/2,-1/2>; 7 |-1/2,-3/2>.
    """
    if atom.I != HalfInteger(3):
        raise ValueError(f"sodium closed form needs I=3/2, got I={atom.I}")
    f, B = point.f, point.B
    a, b = atom.a_prime, atom.b_prime
    c = a - b
    r3 = math.sqrt(3.0)

    # m = +1: diagonal difference f + cB, off-diagonal sqrt(3) f / 2
    alpha1 = _mixing_angle(r3 * f, f + c * B)
    root1 = 0.5 * math.hypot(f + c * B, r3 * f)
    p1, m1 = _pair(alpha1)

    # m = -1: written in the order (|-1/2,-1/2>, |1/2,-3/2>) with angle alpha2,
    # which is the m = +1 solution under B -> -B
    alpha2 = _mixing_angle(r3 * f, f - c * B)
    root2 = 0.5 * math.hypot(f - c * B, r3 * f)
    p2, m2 = _pair(alpha2)
    alpha_m1_block = _mixing_angle(r3 * f, -(f - c * B))

    # m = 0: off-diagonal is f (not f/2), hence the factor 2
    alpha0 = _mixing_angle(2 * f, c * B)
    root0 = 0.5 * math.hypot(c * B, 2 * f)
    p0, m0 = _pair(alpha0)

    return [
        EigenLevel(HalfInteger(4), SINGLE, 3 * f / 4 + (a + 3 * b) * B / 2, _unit(8, 0)),
        EigenLevel(HalfInteger(2), PLUS, -f / 4 + b * B + root1, _two_state(8, 1, 2, p1), alpha1),
        EigenLevel(HalfInteger(2), MINUS, -f / 4 + b * B - root1, _two_state(8, 1, 2, m1), alpha1),
        EigenLevel(HalfInteger(0), PLUS, -f / 4 + root0, _two_state(8, 3, 4, p0), alpha0),
        EigenLevel(HalfInteger(0), MINUS, -f / 4 - root0, _two_state(8, 3, 4, m0), alpha0),
        EigenLevel(HalfInteger(-2), PLUS, -f / 4 - b * B + root2, _two_state(8, 6, 5, p2),
                   alpha_m1_block),
        EigenLevel(HalfInteger(-2), MINUS, -f / 4 - b * B - root2, _two_state(8, 6, 5, m2),
                   alpha_m1_block),
        EigenLevel(HalfInteger(-4), SINGLE, 3 * f / 4 - (a + 3 * b) * B / 2, _unit(8, 7)),
    ]


def numeric_levels(atom: AtomParams, point: FieldPoint) -> list[EigenLevel]:
    """Levels from the Jacobi solver; two-state branches ranked by energy."""
    ham = build_hamiltonian(atom, point)
    dim = len(ham.basis)
    out = []
    for blk in ham.blocks:
        w, v = eigensolve_block(blk.matrix)
        sl = blk.basis_slice
        if blk.dim == 1:
            out.append(EigenLevel(blk.m, SINGLE, float(w[0]), _unit(dim, sl.start)))
            continue
        if blk.dim != 2:
            raise ValueError(f"unexpected block dimension {blk.dim}")
        mat = blk.matrix
        alpha = _mixing_angle(2 * mat[0, 1], mat[0, 0] - mat[1, 1])
        for k, branch in ((1, PLUS), (0, MINUS)):
            amp = np.zeros(dim)
            amp[sl] = v[:, k]
            out.append(EigenLevel(blk.m, branch, float(w[k]), amp, alpha))
    return out


def levels(atom: AtomParams, point: FieldPoint) -> list[EigenLevel]:
    """All levels at one field point, ordered by identity."""
    if atom.I == HalfInteger(1):
        return hydrogen_closed_form(atom, point)
    if atom.I == HalfInteger(3):
        return sodium_closed_form(atom, point)
    return numeric_levels(atom, point)


def level_ids(atom: AtomParams) -> list[LevelId]:
    basis = product_basis(atom.I)
    ids = []
    for m, sl in basis.block_slices():
        if sl.stop - sl.start == 1:
            ids.append(LevelId(m, SINGLE))
        else:
            ids.extend([LevelId(m, PLUS), LevelId(m, MINUS)])
    return ids


def level(atom: AtomParams, point: FieldPoint, level_id) -> EigenLevel:
    if isinstance(level_id, str):
        level_id = LevelId.parse(level_id)
    for lv in levels(atom, point):
        if lv.id == level_id:
            return lv
    raise KeyError(f"atom {atom.name} has no level {level_id}")


def _ground_key(lv: EigenLevel):
    # ties: larger |m| first, then positive m, then the lower branch
    return (-abs(lv.m).twice, -lv.m.twice, 0 if lv.branch == MINUS else 1)


def ground_state(atom: AtomParams, point: FieldPoint, tol: float = DEGENERACY_TOL) -> EigenLevel:
    lvls = levels(atom, point)
    e0 = min(lv.energy for lv in lvls)
    tied = [lv for lv in lvls if lv.energy - e0 <= tol * max(1.0, abs(e0))]
    return min(tied, key=_ground_key)


def energy_gap(atom: AtomParams, point: FieldPoint) -> float:
    """Difference between the two lowest energies (0 when the ground level is degenerate)."""
    e = sorted(lv.energy for lv in levels(atom, point))
    return max(e[1] - e[0], 0.0)


def _track(prev: list[EigenLevel], cur: list[EigenLevel], where: FieldPoint) -> list[EigenLevel]:
    """Relabel two-state branches at ``cur`` by maximal overlap with ``prev``."""
    out = list(cur)
    by_m: dict[HalfInteger, list[int]] = {}
    for k, lv in enumerate(cur):
        by_m.setdefault(lv.m, []).append(k)
    prev_by_id = {lv.id: lv for lv in prev}
    for m, idx in by_m.items():
        if len(idx) != 2:
            continue
        a, b = (cur[k] for k in idx)
        ov = np.abs([[np.vdot(prev_by_id[LevelId(m, br)].amplitudes, x.amplitudes)
                      for x in (a, b)] for br in (PLUS, MINUS)])
        if abs(ov[0, 0] - ov[0, 1]) < AMBIGUITY_TOL or abs(ov[1, 0] - ov[1, 1]) < AMBIGUITY_TOL:
            raise LevelTrackingError(
                f"ambiguous overlap continuation in block m={m} at B={where.B}, f={where.f}: "
                f"overlaps {ov.round(8).tolist()}"
            )
        plus_is_a = ov[0, 0] > ov[0, 1]
        src_plus, src_minus = (a, b) if plus_is_a else (b, a)
        out[idx[0]] = EigenLevel(m, PLUS, src_plus.energy, src_plus.amplitudes, src_plus.alpha)
        out[idx[1]] = EigenLevel(m, MINUS, src_minus.energy, src_minus.amplitudes, src_minus.alpha)
    return out


def spectrum_sweep(atom: AtomParams, B_range, f: float = 1.0, n_points: int | None = None,
                   tracking: str = "auto") -> SpectrumTable:
    """Levels over a field sweep at fixed ``f``.

    ``B_range`` is either ``(lo, hi)`` with ``n_points`` or an explicit array.
    ``tracking="auto"`` uses closed-form labels where they exist and overlap
    continuation otherwise; ``"overlap"`` forces continuation.
    """
    if n_points is None:
        grid_b = np.asarray(B_range, dtype=float)
    else:
        if n_points < 2:
            raise ValueError("n_points must be >= 2")
        grid_b = np.linspace(B_range[0], B_range[1], n_points)
    if grid_b.size < 2:
        raise ValueError("a sweep needs at least two points")
    grid = tuple(FieldPoint(float(B), f) for B in grid_b)
    closed = atom.I in (HalfInteger(1), HalfInteger(3))
    rows = []
    for point in grid:
        if closed and tracking == "auto":
            rows.append(levels(atom, point))
        else:
            cur = numeric_levels(atom, point)
            rows.append(cur if not rows else _track(rows[-1], cur, point))
    ids = tuple(lv.id for lv in rows[0])
    gap = np.array([_sorted_gap(row) for row in rows])
    return SpectrumTable(atom, grid, ids, tuple(tuple(r) for r in rows), gap)


def _sorted_gap(row) -> float:
    e = sorted(lv.energy for lv in row)
    return max(e[1] - e[0], 0.0)
