"""Level crossings, avoided crossings and the ground-state phase diagram.

Sweeps run along ``B`` (at fixed ``f``) or along ``f`` (at fixed ``B``).
Level differences are always taken between identified levels, never between
energy-sorted indices, so identity swaps cannot create spurious events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import AtomParams, FieldPoint, build_hamiltonian
from .spectra import LevelId, MINUS, PLUS, energy_gap, ground_state, level
from .spin_algebra import HalfInteger

__all__ = [
    "REAL",
    "AVOIDED",
    "REAL_GAP_TOL",
    "CrossingEvent",
    "PhaseDiagram",
    "find_real_crossings",
    "find_avoided_crossings",
    "phase_diagram",
    "ground_boundary",
    "golden_section_min",
]

REAL, AVOIDED = "real", "avoided"
REAL_GAP_TOL = 1e-10
BISECT_TOL = 1e-12
GOLDEN_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CrossingEvent:
    kind: str
    parameter_name: str
    location: float
    level_a: LevelId
    level_b: LevelId
    gap_at_event: float
    fixed_value: float = 0.0


def _point(axis: str, x: float, fixed: float) -> FieldPoint:
    if axis == "B":
        return FieldPoint(x, fixed)
    if axis == "f":
        return FieldPoint(fixed, x)
    raise ValueError(f"sweep axis must be 'B' or 'f', got {axis!r}")


def _as_id(x) -> LevelId:
    return LevelId.parse(x) if isinstance(x, str) else x


def _bisect(g, lo: float, hi: float, glo: float, tol: float = BISECT_TOL) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_real_crossings(atom: AtomParams, sweep_axis: str, fixed: float, pair, lo: float,
                        hi: float, n_points: int = 401) -> list[CrossingEvent]:
    """Sign changes of ``E_a - E_b`` for two levels from different m blocks."""
    a, b = (_as_id(p) for p in pair)
    if a.m == b.m:
        raise ValueError(
            f"{a} and {b} share m={a.m}; same-block pairs are avoided crossings"
        )

    def diff(x):
        p = _point(sweep_axis, x, fixed)
        return level(atom, p, a).energy - level(atom, p, b).energy

    xs = np.linspace(lo, hi, n_points)
    ds = np.array([diff(float(x)) for x in xs])
    roots = []
    for k in range(n_points):
        if ds[k] == 0.0:
            roots.append(float(xs[k]))
        elif k + 1 < n_points and ds[k + 1] != 0.0 and (ds[k] > 0) != (ds[k + 1] > 0):
            roots.append(_bisect(diff, float(xs[k]), float(xs[k + 1]), float(ds[k])))
    events = []
    for x in roots:
        events.append(CrossingEvent(REAL, sweep_axis, x, a, b, abs(diff(x)), fixed))
    return events


def golden_section_min(g, lo: float, hi: float, tol: float = GOLDEN_TOL) -> float:
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    gc, gd = g(c), g(d)
    while hi - lo > tol:
        if gc < gd:
            hi, d, gd = d, c, gc
            c = hi - _INVPHI * (hi - lo)
            gc = g(c)
        else:
            lo, c, gc = c, d, gd
            d = lo + _INVPHI * (hi - lo)
            gd = g(d)
    return 0.5 * (lo + hi)


def _block_parts(atom: AtomParams, axis: str, fixed: float, m: HalfInteger):
    def parts(x):
        mat = build_hamiltonian(atom, _point(axis, x, fixed)).block(m).matrix
        if mat.shape != (2, 2):
            raise ValueError(f"block m={m} has dimension {mat.shape[0]}, need 2")
        return mat[0, 0] - mat[1, 1], mat[0, 1]
    return parts


def find_avoided_crossings(atom: AtomParams, sweep_axis: str, fixed: float, block_m, lo: float,
                           hi: float, n_points: int = 401) -> list[CrossingEvent]:
    """Interior minima of the splitting ``sqrt(d^2 + 4 o^2)`` inside one two-state block.

    ``d`` is the diagonal difference and ``o`` the off-diagonal element, so the
    splitting is the eigenvalue difference of the block.  Minima are located
    by golden-section search, then polished by bisection on the sign of the
    slope of ``d^2 + 4 o^2``.
    """
    m = HalfInteger.of(block_m)
    parts = _block_parts(atom, sweep_axis, fixed, m)

    def gap2(x):
        d, o = parts(x)
        return d * d + 4.0 * o * o

    def gap(x):
        return math.sqrt(gap2(x))

    xs = np.linspace(lo, hi, n_points)
    gs = np.array([gap(float(x)) for x in xs])
    events = []
    for k in range(1, n_points - 1):
        if not (gs[k] < gs[k - 1] and gs[k] <= gs[k + 1]):
            continue
        x = golden_section_min(gap, float(xs[k - 1]), float(xs[k + 1]))
        x = _polish_min(gap2, float(xs[k - 1]), float(xs[k + 1]), x)
        g = gap(x)
        if g <= REAL_GAP_TOL:
            # a true degeneracy inside the block is not an avoided crossing
            continue
        if events and abs(events[-1].location - x) < 10 * GOLDEN_TOL:
            continue
        events.append(CrossingEvent(AVOIDED, sweep_axis, x, LevelId(m, PLUS), LevelId(m, MINUS),
                                    g, fixed))
    return events


def _polish_min(g, lo: float, hi: float, x0: float, h: float = 1e-6) -> float:
    def slope(x):
        return g(x + h) - g(x - h)

    if not (slope(lo) < 0 < slope(hi)):
        return x0
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        s = slope(mid)
        if s == 0.0:
            return mid
        if s < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class PhaseDiagram:
    f_grid: np.ndarray
    B_grid: np.ndarray
    m_label: np.ndarray  # (n_f, n_B) ground-state m as float
    branch: np.ndarray  # (n_f, n_B) ground-state branch names
    gap: np.ndarray
    entropy: np.ndarray | None = None
    extras: dict = field(default_factory=dict)


def phase_diagram(atom: AtomParams, f_grid, B_grid, with_entropy: bool = True) -> PhaseDiagram:
    """Ground-state m label, gap and (optionally) entropy on an (f, B) grid."""
    from .entanglement import ELECTRON, reduced_density, von_neumann_entropy
    from .hamiltonian import product_basis

    f_grid = np.asarray(f_grid, dtype=float)
    B_grid = np.asarray(B_grid, dtype=float)
    if f_grid.size == 0 or B_grid.size == 0:
        raise ValueError("grids must be nonempty")
    basis = product_basis(atom.I)
    shape = (f_grid.size, B_grid.size)
    m_label = np.zeros(shape)
    branch = np.empty(shape, dtype=object)
    gap = np.zeros(shape)
    ent = np.zeros(shape) if with_entropy else None
    for i, f in enumerate(f_grid):
        for j, B in enumerate(B_grid):
            p = FieldPoint(float(B), float(f))
            gs = ground_state(atom, p)
            m_label[i, j] = gs.m.value
            branch[i, j] = gs.branch
            gap[i, j] = energy_gap(atom, p)
            if with_entropy:
                ent[i, j] = von_neumann_entropy(reduced_density(gs.amplitudes, ELECTRON, basis))
    return PhaseDiagram(f_grid, B_grid, m_label, branch, gap, ent)


def ground_boundary(atom: AtomParams, B: float, f_lo: float, f_hi: float,
                    n_points: int = 201) -> list[CrossingEvent]:
    """Points along ``f`` (fixed ``B``) where the ground level changes identity.

    Each label change on the scan is refined by bisection on the energy
    difference of the two ground levels bracketing it.
    """
    fs = np.linspace(f_lo, f_hi, n_points)
    ids = [ground_state(atom, FieldPoint(B, float(f))).id for f in fs]
    out = []
    for k in range(n_points - 1):
        a, b = ids[k], ids[k + 1]
        if a == b:
            continue
        if a.m == b.m:
            continue

        def diff(f, a=a, b=b):
            p = FieldPoint(B, f)
            return level(atom, p, a).energy - level(atom, p, b).energy

        lo, hi = float(fs[k]), float(fs[k + 1])
        dlo, dhi = diff(lo), diff(hi)
        if dlo == 0.0 or (dlo > 0) == (dhi > 0):
            # boundary sits on a sample within rounding; the tie-break flipped the label late
            x = lo if abs(dlo) <= abs(dhi) else hi
        else:
            x = _bisect(diff, lo, hi, dlo)
        out.append(CrossingEvent(REAL, "f", x, a, b, abs(diff(x)), B))
    return out
