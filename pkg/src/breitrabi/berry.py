"""Geometric phases for conical loops of the field direction.

The field direction ``n = (sin t cos p, sin t sin p, cos t)`` is carried once
around the z axis at fixed polar angle ``t``, enclosing the solid angle
``Omega = 2 pi (1 - cos t)``.  Analytic phases use the Schmidt decomposition
of the z-quantized eigenstate (its Schmidt weights do not change along the
loop); numeric phases use discrete Wilson loops over eigenvectors of the
rotated Hamiltonian.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .entanglement import ELECTRON, NUCLEAR, SchmidtDecomposition, schmidt
from .hamiltonian import (
    ELECTRON_SPIN,
    AtomParams,
    FieldPoint,
    _kron_terms,
    _to_basis_order,
    field_direction,
    product_basis,
)
from .spectra import EigenLevel, LevelId, level
from .spin_algebra import HalfInteger, rotation_matrix

__all__ = [
    "DegeneracyError",
    "LoopSpec",
    "BerryResult",
    "MarginalScan",
    "solid_angle",
    "basis_phase",
    "reduce_phase",
    "phase_difference",
    "total_phase_analytic",
    "marginal_phase",
    "marginal_phase_closed",
    "average_phase",
    "berry_result",
    "wilson_loop_phase",
    "loop_eigenvectors",
    "berry_phase_numeric",
    "schmidt_phases_numeric",
    "marginal_phase_numeric",
    "marginal_phase_scan",
    "DEFAULT_STEPS",
]

DEFAULT_STEPS = 1000
LOOP_GAP_TOL = 1e-8
SCHMIDT_DEGENERACY_TOL = 1e-9
NODE_ZERO_TOL = 1e-14


class DegeneracyError(RuntimeError):
    pass


@dataclass(frozen=True)
class LoopSpec:
    theta: float
    B: float
    f: float = 1.0
    steps: int = DEFAULT_STEPS

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if self.steps < 3:
            raise ValueError(f"a loop needs at least 3 steps, got {self.steps}")

    @property
    def point(self) -> FieldPoint:
        return FieldPoint(self.B, self.f)


def solid_angle(theta: float) -> float:
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    return 2.0 * math.pi * (1.0 - math.cos(theta))


def basis_phase(j, m, omega: float) -> float:
    """Phase ``-m Omega`` of the state ``|j, m>`` quantized along the loop axis."""
    j, m = HalfInteger.of(j), HalfInteger.of(m)
    if abs(m) > j or (j - m).twice % 2:
        raise ValueError(f"m={m} is not a projection of j={j}")
    return -m.value * omega


def reduce_phase(x: float) -> float:
    """Map an angle into ``(-pi, pi]``."""
    y = math.remainder(x, 2.0 * math.pi)
    return math.pi if y <= -math.pi else y


def phase_difference(x: float, y: float) -> float:
    """Signed distance between two angles, modulo 2 pi."""
    return math.remainder(x - y, 2.0 * math.pi)


def total_phase_analytic(lv: EigenLevel, omega: float) -> float:
    """Unreduced total phase ``-m Omega`` of a z-quantized eigenstate."""
    return -lv.m.value * omega


def _schmidt_phases(sd: SchmidtDecomposition, subsystem: str, omega: float) -> list[float]:
    j = ELECTRON_SPIN if subsystem == ELECTRON else sd.I
    return [basis_phase(j, m, omega) for m in sd.sharp_m(subsystem)]


def marginal_phase(sd: SchmidtDecomposition, subsystem: str, omega: float) -> float:
    """``arg sum_i p_i exp(i beta_i)`` for one subsystem, in ``(-pi, pi]``."""
    betas = _schmidt_phases(sd, subsystem, omega)
    z = sum(p * cmath.exp(1j * b) for p, b in zip(sd.coefficients, betas))
    g = cmath.phase(z)
    return math.pi if g <= -math.pi else g


def marginal_phase_closed(cos_alpha: float, omega: float) -> float:
    """Quadrant-correct ``arctan(cos(alpha) tan(Omega/2))``.

    Electron marginal phase of a two-term state whose ``m_S = -1/2`` weight
    exceeds the ``m_S = +1/2`` weight by ``cos(alpha)``.
    """
    g = math.atan2(cos_alpha * math.sin(omega / 2), math.cos(omega / 2))
    return math.pi if g <= -math.pi else g


def average_phase(sd: SchmidtDecomposition, subsystem: str, omega: float) -> float:
    betas = _schmidt_phases(sd, subsystem, omega)
    return float(sum(p * b for p, b in zip(sd.coefficients, betas)))


@dataclass(frozen=True, eq=False)
class BerryResult:
    level: LevelId
    omega: float
    total: float
    total_reduced: float
    marginal_electron: float
    marginal_nuclear: float
    average_electron: float
    average_nuclear: float
    per_schmidt_phases: tuple[tuple[float, float, float], ...]

    @property
    def schmidt_sum(self) -> float:
        """``sum_i p_i (beta_i^e + beta_i^n)``, unreduced."""
        return float(sum(p * (be + bn) for p, be, bn in self.per_schmidt_phases))


def berry_result(atom: AtomParams, point: FieldPoint, level_id, theta: float) -> BerryResult:
    lv = level(atom, point, level_id)
    omega = solid_angle(theta)
    sd = schmidt(lv.amplitudes, product_basis(atom.I))
    be = _schmidt_phases(sd, ELECTRON, omega)
    bn = _schmidt_phases(sd, NUCLEAR, omega)
    total = total_phase_analytic(lv, omega)
    return BerryResult(
        level=lv.id,
        omega=omega,
        total=total,
        total_reduced=reduce_phase(total),
        marginal_electron=marginal_phase(sd, ELECTRON, omega),
        marginal_nuclear=marginal_phase(sd, NUCLEAR, omega),
        average_electron=average_phase(sd, ELECTRON, omega),
        average_nuclear=average_phase(sd, NUCLEAR, omega),
        per_schmidt_phases=tuple(zip(map(float, sd.coefficients), be, bn)),
    )


def wilson_loop_phase(states) -> float:
    """``-arg prod_k <psi_k|psi_{k+1}>`` around a closed loop (``psi_N = psi_0``).

    ``states`` has shape ``(N, dim)``; each row may carry an arbitrary phase.
    """
    states = np.asarray(states)
    nxt = np.roll(states, -1, axis=0)
    overlaps = np.einsum("kd,kd->k", states.conj(), nxt)
    # product of unit phases avoids under/overflow of tiny moduli
    prod = np.prod(overlaps / np.abs(overlaps))
    g = -cmath.phase(prod)
    return math.pi if g <= -math.pi else g


def _loop_hamiltonians(atom: AtomParams, loop: LoopSpec) -> tuple[np.ndarray, np.ndarray]:
    hyperfine, electron, nuclear = _kron_terms(atom)
    hyperfine = _to_basis_order(atom, hyperfine)
    zeeman = [_to_basis_order(atom, atom.a_prime * e + atom.b_prime * n)
              for e, n in zip(electron, nuclear)]
    phis = 2.0 * math.pi * np.arange(loop.steps) / loop.steps
    dirs = np.array([field_direction(loop.theta, p) for p in phis])
    h = loop.f * hyperfine[None] + loop.B * np.einsum("kc,cij->kij", dirs, np.array(zeeman))
    h = 0.5 * (h + np.conj(np.swapaxes(h, 1, 2)))
    return phis, h


def loop_eigenvectors(atom: AtomParams, loop: LoopSpec, level_id) -> np.ndarray:
    """Eigenvectors of the tracked level at every loop step, shape ``(N, dim)``.

    The level is selected by its z-axis energy (the spectrum does not depend
    on the field direction) and checked against maximal overlap with the
    previous step.
    """
    level_id = LevelId.parse(level_id) if isinstance(level_id, str) else level_id
    target = level(atom, loop.point, level_id).energy
    phis, h = _loop_hamiltonians(atom, loop)
    w, v = np.linalg.eigh(h)
    out = np.empty((loop.steps, w.shape[1]), dtype=complex)
    for k in range(loop.steps):
        idx = int(np.argmin(np.abs(w[k] - target)))
        others = np.delete(w[k], idx)
        gap = float(np.min(np.abs(others - w[k, idx])))
        if gap <= LOOP_GAP_TOL:
            raise DegeneracyError(
                f"level {level_id} is degenerate on the loop at phi={phis[k]:.6g} (gap {gap:.3e})"
            )
        out[k] = v[k, :, idx]
        if k:
            ov = np.abs(v[k].conj().T @ out[k - 1])
            if int(np.argmax(ov)) != idx:
                raise DegeneracyError(
                    f"overlap continuation lost level {level_id} at phi={phis[k]:.6g}"
                )
    return out


def berry_phase_numeric(atom: AtomParams, loop: LoopSpec, level_id) -> float:
    """Discrete Wilson-loop Berry phase of one level, in ``(-pi, pi]``."""
    return wilson_loop_phase(loop_eigenvectors(atom, loop, level_id))


def _local_electron_bases(theta: float, phis: np.ndarray) -> np.ndarray:
    # columns |n; +1/2>, |n; -1/2> at every step
    return np.array([rotation_matrix(ELECTRON_SPIN, theta, p) for p in phis])


def schmidt_phases_numeric(atom: AtomParams, loop: LoopSpec, level_id):
    """Schmidt weights and per-vector Wilson-loop phases ``(p, beta_e, beta_n)``.

    Schmidt vectors are taken from the rotated eigenstate at every step.  When
    the two weights coincide the electron vectors are the local ``n . S``
    eigenstates, which is the rotated image of the ``m_S`` basis.
    """
    states = loop_eigenvectors(atom, loop, level_id)
    basis = product_basis(atom.I)
    n = loop.steps
    phis = 2.0 * math.pi * np.arange(n) / n
    flat = np.zeros_like(states)
    flat[:, list(basis.tensor_index)] = states
    tensor = flat.reshape(n, 2, atom.nuclear_dim)
    rho = tensor @ np.conj(np.swapaxes(tensor, 1, 2))
    w, vecs = np.linalg.eigh(rho)
    w, vecs = w[:, ::-1], vecs[:, :, ::-1]
    ps = np.clip(w[0], 0.0, 1.0)
    if np.max(np.abs(w - w[0])) > 1e-8:
        raise ValueError("Schmidt weights change along the loop")
    if abs(ps[0] - ps[1]) < SCHMIDT_DEGENERACY_TOL:
        vecs = _local_electron_bases(loop.theta, phis)
    out = []
    for i, p in enumerate(ps):
        if p <= 1e-14:
            continue
        e = vecs[:, :, i]
        fvec = np.einsum("ka,kab->kb", e.conj(), tensor) / math.sqrt(p)
        out.append((float(p), wilson_loop_phase(e), wilson_loop_phase(fvec)))
    return out


def marginal_phase_numeric(atom: AtomParams, loop: LoopSpec, level_id, subsystem: str) -> float:
    k = 1 if subsystem == ELECTRON else 2
    z = sum(t[0] * cmath.exp(1j * t[k]) for t in schmidt_phases_numeric(atom, loop, level_id))
    g = cmath.phase(z)
    return math.pi if g <= -math.pi else g


@dataclass(frozen=True, eq=False)
class MarginalScan:
    level: LevelId
    subsystem: str
    f: float
    B: np.ndarray
    theta: np.ndarray
    gamma: np.ndarray  # (n_theta, n_B)
    nodes: tuple[tuple[float, ...], ...]  # node fields per theta row


def _marginal_at(atom, f, level_id, subsystem, B, theta) -> float:
    r = berry_result(atom, FieldPoint(B, f), level_id, theta)
    return r.marginal_electron if subsystem == ELECTRON else r.marginal_nuclear


def marginal_phase_scan(atom: AtomParams, level_id, B_values, theta_values, f: float = 1.0,
                        subsystem: str = ELECTRON, node_tol: float = 1e-12) -> MarginalScan:
    """Marginal phase on a (theta, B) grid plus its nodes along B.

    A node is a sign change of ``Im sum_i p_i exp(i beta_i)``, where the
    marginal phase is 0 mod pi and its arctan form vanishes.  With the
    quadrant-correct value this is a passage through 0 or through the
    ``+-pi`` cut.  Nodes are refined by bisection to ``node_tol``.
    """
    level_id = LevelId.parse(level_id) if isinstance(level_id, str) else level_id
    B = np.asarray(B_values, dtype=float)
    th = np.asarray(theta_values, dtype=float)
    gamma = np.array([[_marginal_at(atom, f, level_id, subsystem, float(b), float(t)) for b in B]
                      for t in th])
    nodes = []
    for r, t in enumerate(th):

        def g(b, t=t):
            return _node_sign(_marginal_at(atom, f, level_id, subsystem, b, float(t)))

        row = [_node_sign(x) for x in gamma[r]]
        found = []
        for k in range(len(B) - 1):
            lo_v, hi_v = row[k], row[k + 1]
            if lo_v == 0.0:
                if 0 < k and row[k - 1] * hi_v < 0:
                    found.append(float(B[k]))
                continue
            if lo_v * hi_v < 0:
                lo, hi = float(B[k]), float(B[k + 1])
                while hi - lo > node_tol:
                    mid = 0.5 * (lo + hi)
                    if mid in (lo, hi):
                        break
                    gm = g(mid)
                    if gm == 0.0:
                        lo = hi = mid
                        break
                    if gm == lo_v:
                        lo = mid
                    else:
                        hi = mid
                found.append(0.5 * (lo + hi))
        nodes.append(tuple(found))
    return MarginalScan(level_id, subsystem, f, B, th, gamma, tuple(nodes))


def _node_sign(gamma: float) -> float:
    # sign of sin(gamma); rounding residue near 0 and pi counts as zero
    s = math.sin(gamma)
    return 0.0 if abs(s) <= NODE_ZERO_TOL else math.copysign(1.0, s)


def rotated_state(atom: AtomParams, lv: EigenLevel, theta: float, phi: float) -> np.ndarray:
    """Image of a z-quantized eigenstate under the joint field rotation."""
    from .hamiltonian import rotation_operator
    return rotation_operator(atom, theta, phi) @ lv.amplitudes
