"""Coupled propagation of the density matrix and the classical nuclei."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .coulomb import FOUR_PI
from .errors import ConfigurationError, DivergenceError
from .lattice import MomentumLattice
from .meanfield import bdf_rhs_matrix, exchange_matrix, nuclear_density_vector, potential_matrix
from .newton import NucleusState, forces_arrays, nuclear_arrays, nuclear_form_factors
from .opspace import (
    KernelOperator,
    d0_matrix,
    density_vector,
    p0_matrix,
    random_hs_sample,
    retract_matrix,
)
from .spinor import d0_symbol, p0_symbol

log = logging.getLogger(__name__)

__all__ = [
    "SystemState",
    "EnergyParts",
    "SimulationOptions",
    "Trajectory",
    "CoupledSystem",
    "energy_parts",
    "total_energy",
    "rk4_step",
    "simulate",
    "build_initial_state",
    "diagnostics_header",
]


@dataclass(frozen=True, eq=False)
class SystemState:
    q: KernelOperator
    nuclei: tuple[NucleusState, ...] = ()
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "nuclei", tuple(self.nuclei))

    @property
    def lattice(self) -> MomentumLattice:
        return self.q.lattice

    def positions(self) -> np.ndarray:
        return np.array([n.x for n in self.nuclei]).reshape(-1, 3)

    def velocities(self) -> np.ndarray:
        return np.array([n.v for n in self.nuclei]).reshape(-1, 3)


@dataclass(frozen=True)
class EnergyParts:
    kinetic_dirac: float  # tr_{P0}(D0 Q)
    nuclear_attraction: float  # D(rho_Q, sum z f)
    direct: float  # D(rho_Q, rho_Q)
    exchange: float  # int int |Q(x,y)|^2 / |x-y|
    nuclear_kinetic: float
    nuclear_repulsion: float  # sum_{i<j} D(z_i f_i, z_j f_j)
    self_energies: float  # sum_k ||z_k f_k||_C^2
    rho_minus_nuclei: float  # ||rho_Q - sum z f||_C^2
    alpha: float

    @property
    def total(self) -> float:
        a = self.alpha
        return (
            self.kinetic_dirac
            - a * self.nuclear_attraction
            + 0.5 * a * self.direct
            - 0.5 * a * self.exchange
            + self.nuclear_kinetic
            + a * self.nuclear_repulsion
        )

    def coercivity_slack(self) -> float:
        """LHS minus RHS of the lower bound that controls global existence."""
        a = self.alpha
        lhs = self.total + 0.5 * a * self.self_energies
        rhs = (
            (1.0 - a * math.pi / 4.0) * self.kinetic_dirac
            + 0.5 * a * self.rho_minus_nuclei
            + self.nuclear_kinetic
        )
        return lhs - rhs


class CoupledSystem:
    """Array-level right-hand side and energy for fixed lattice, nuclei species and coupling."""

    def __init__(self, lattice: MomentumLattice, z, m, sigma, alpha: float):
        if alpha < 0:
            raise ConfigurationError("coupling constant alpha must be nonnegative")
        self.lattice = lattice
        self.z = np.asarray(z, dtype=float)
        self.m = np.asarray(m, dtype=float)
        self.sigma = np.asarray(sigma, dtype=float)
        self.alpha = float(alpha)

    @classmethod
    def for_state(cls, state: SystemState, alpha: float) -> "CoupledSystem":
        z, m, s, _, _ = nuclear_arrays(state.nuclei)
        return cls(state.lattice, z, m, s, alpha)

    def form_factors(self, x: np.ndarray) -> np.ndarray:
        return nuclear_form_factors(self.lattice.difference.points, self.z, self.sigma, x)

    def nuclear_rho(self, x: np.ndarray) -> np.ndarray:
        g = self.form_factors(x)
        return g.sum(axis=0) if len(g) else np.zeros(len(self.lattice.difference), dtype=complex)

    def bdf(self, mat: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(dQ/dt, rho_Q)`` with nuclei frozen at ``x``."""
        return bdf_rhs_matrix(self.lattice, mat, self.nuclear_rho(x), self.alpha)

    def accelerations(self, rho: np.ndarray, x: np.ndarray) -> np.ndarray:
        if self.alpha == 0 or len(self.z) == 0:
            return np.zeros((len(self.z), 3))
        f = forces_arrays(self.lattice, rho, self.z, self.sigma, x, self.alpha)
        return f / self.m[:, None]

    def rhs(self, mat, x, v):
        dmat, rho = self.bdf(mat, x)
        return dmat, v.copy(), self.accelerations(rho, x)

    def step(self, mat, x, v, dt: float):
        """One classical fourth-order Runge-Kutta step of the joint system."""
        k1 = self.rhs(mat, x, v)
        k2 = self.rhs(mat + 0.5 * dt * k1[0], x + 0.5 * dt * k1[1], v + 0.5 * dt * k1[2])
        k3 = self.rhs(mat + 0.5 * dt * k2[0], x + 0.5 * dt * k2[1], v + 0.5 * dt * k2[2])
        k4 = self.rhs(mat + dt * k3[0], x + dt * k3[1], v + dt * k3[2])
        c = dt / 6.0
        return tuple(y + c * (a + 2.0 * b + 2.0 * e + d) for y, a, b, e, d in zip((mat, x, v), k1, k2, k3, k4))

    def energy_parts(self, mat: np.ndarray, x: np.ndarray, v: np.ndarray) -> EnergyParts:
        lat = self.lattice
        n = lat.size
        diff = lat.difference
        w = diff.coulomb_weights
        idx = np.arange(n)
        qd = mat.reshape(n, 4, n, 4)[idx, :, idx, :]
        dq = d0_symbol(lat.points) @ qd
        pm = p0_symbol(lat.points)
        pp = np.eye(4) - pm
        kin = np.einsum("iab,ibc,ica->", pm, dq, pm) + np.einsum("iab,ibc,ica->", pp, dq, pp)
        rho = density_vector(lat, mat)
        g = self.form_factors(x)
        nrho = g.sum(axis=0) if len(g) else np.zeros_like(rho)
        gram = FOUR_PI * np.einsum("k,ik,jk->ij", w, g.conj(), g).real
        exch = np.vdot(mat, exchange_matrix(lat, mat)).real if self.alpha != 0 else 0.0
        return EnergyParts(
            kinetic_dirac=float(kin.real),
            nuclear_attraction=float(FOUR_PI * np.sum(w * rho.conj() * nrho).real),
            direct=float(FOUR_PI * np.sum(w * np.abs(rho) ** 2)),
            exchange=float(exch),
            nuclear_kinetic=float(0.5 * np.sum(self.m[:, None] * v * v)),
            nuclear_repulsion=float(np.sum(np.triu(gram, 1))),
            self_energies=float(np.trace(gram)),
            rho_minus_nuclei=float(FOUR_PI * np.sum(w * np.abs(rho - nrho) ** 2)),
            alpha=self.alpha,
        )

    def exchange_energy(self, mat: np.ndarray) -> float:
        return float(np.vdot(mat, exchange_matrix(self.lattice, mat)).real)


def _unpack(state: SystemState):
    _, _, _, x, v = nuclear_arrays(state.nuclei)
    return state.q.mat, x, v


def _pack(state: SystemState, mat, x, v, t) -> SystemState:
    nuclei = tuple(n.moved(x=x[i], v=v[i]) for i, n in enumerate(state.nuclei))
    return SystemState(KernelOperator(state.lattice, mat), nuclei, t)


def energy_parts(state: SystemState, alpha: float) -> EnergyParts:
    return CoupledSystem.for_state(state, alpha).energy_parts(*_unpack(state))


def total_energy(state: SystemState, alpha: float) -> float:
    return energy_parts(state, alpha).total


def rk4_step(state: SystemState, dt: float, alpha: float, retraction: bool = False) -> SystemState:
    if not dt > 0:
        raise ConfigurationError("time step must be positive")
    system = CoupledSystem.for_state(state, alpha)
    mat, x, v = system.step(*_unpack(state), dt)
    if retraction:
        mat = retract_matrix(state.lattice, mat)
    return _pack(state, mat, x, v, state.t + dt)


@dataclass
class SimulationOptions:
    retraction: bool = False
    retraction_period: int = 10
    sample_every: int = 10
    divergence_bound: float = 1e3
    keep_states: bool = True


def diagnostics_header(n_nuclei: int) -> list[str]:
    cols = ["t", "energy", "charge_trQ3", "projector_residual", "hs_norm_Q"]
    for k in range(n_nuclei):
        cols += [f"{c}{k}" for c in ("x", "y", "z", "vx", "vy", "vz")]
    return cols


@dataclass
class Trajectory:
    header: list[str]
    rows: list[list[float]] = field(default_factory=list)
    states: list[SystemState] = field(default_factory=list)
    energies: list[EnergyParts] = field(default_factory=list)
    steps: int = 0
    dt: float = 0.0

    def column(self, name: str) -> np.ndarray:
        j = self.header.index(name)
        return np.array([r[j] for r in self.rows])

    @property
    def final(self) -> SystemState:
        return self.states[-1]

    def energy_drift(self) -> float:
        e = self.column("energy")
        return float(np.max(np.abs(e - e[0])) / max(1.0, abs(e[0])))

    def charge_drift(self) -> float:
        c = self.column("charge_trQ3")
        return float(np.max(np.abs(c - c[0])))


def _diagnostics(system: CoupledSystem, mat, x, v, t):
    parts = system.energy_parts(mat, x, v)
    m2 = mat @ mat
    charge = np.einsum("ij,ji->", m2, mat).real
    p0 = p0_matrix(system.lattice)
    # (Q + P0)^2 - (Q + P0) = Q^2 + Q P0 + P0 Q - Q
    qp = mat @ p0
    residual = np.linalg.norm(m2 + qp + qp.conj().T - mat)
    row = [t, parts.total, float(charge), float(residual), float(np.linalg.norm(mat))]
    for k in range(len(x)):
        row += [float(c) for c in x[k]] + [float(c) for c in v[k]]
    return row, parts


def simulate(
    s0: SystemState,
    dt: float,
    t_final: float,
    alpha: float,
    opts: SimulationOptions | None = None,
    callback: Callable[[SystemState], None] | None = None,
) -> Trajectory:
    """Integrate from ``s0`` to ``s0.t + t_final`` with fixed-step RK4.

    The step is adjusted to ``t_final / round(t_final / dt)`` so the run ends
    exactly at ``t_final``.
    """
    opts = opts or SimulationOptions()
    if not dt > 0 or not t_final > 0:
        raise ConfigurationError("dt and t_final must be positive")
    nsteps = max(1, int(round(t_final / dt)))
    h = t_final / nsteps
    system = CoupledSystem.for_state(s0, alpha)
    mat, x, v = _unpack(s0)
    mat, x, v = mat.copy(), x.copy(), v.copy()
    traj = Trajectory(header=diagnostics_header(len(s0.nuclei)), dt=h)

    def record(step: int):
        t = s0.t + step * h
        row, parts = _diagnostics(system, mat, x, v, t)
        if not np.all(np.isfinite(row)):
            bad = [traj.header[j] for j, val in enumerate(row) if not np.isfinite(val)]
            raise DivergenceError(f"non-finite diagnostics {bad} at t={t:.6g}")
        traj.rows.append(row)
        traj.energies.append(parts)
        state = _pack(s0, mat.copy(), x.copy(), v.copy(), t)
        if opts.keep_states:
            traj.states.append(state)
        if callback is not None:
            callback(state)

    record(0)
    for step in range(1, nsteps + 1):
        mat, x, v = system.step(mat, x, v, h)
        if opts.retraction and step % opts.retraction_period == 0:
            mat = retract_matrix(s0.lattice, mat)
        norm = np.linalg.norm(mat)
        if not np.isfinite(norm) or norm > opts.divergence_bound:
            traj.steps = step
            raise DivergenceError(
                f"||Q||_HS = {norm:.3e} exceeds bound {opts.divergence_bound:g} at t={s0.t + step * h:.6g}"
            )
        if step % opts.sample_every == 0 or step == nsteps:
            record(step)
    traj.steps = nsteps
    if not opts.keep_states:
        traj.states.append(_pack(s0, mat, x, v, s0.t + t_final))
    return traj


def _positive_basis(lattice: MomentumLattice) -> np.ndarray:
    """Orthonormal basis (columns) of the range of ``1 - P0``."""
    n = lattice.size
    cols = []
    for i, pm in enumerate(p0_symbol(lattice.points)):
        vals, vecs = np.linalg.eigh(np.eye(4) - pm)
        for j in np.flatnonzero(vals > 0.5):
            col = np.zeros(4 * n, dtype=complex)
            col[4 * i : 4 * i + 4] = vecs[:, j]
            cols.append(col)
    return np.array(cols).T


def build_initial_state(
    kind: str,
    lattice: MomentumLattice,
    nuclei: Sequence[NucleusState] = (),
    *,
    q: int = 0,
    epsilon: float = 0.0,
    seed: int = 0,
    alpha: float = 0.0,
) -> SystemState:
    """Vacuum, charged or unitarily perturbed initial data.

    ``charged`` fills the ``q`` lowest positive-energy orbitals of the
    projected Dirac operator in the nuclear potential (coupling ``alpha``).
    """
    nuclei = tuple(nuclei)
    if kind == "vacuum":
        mat = np.zeros((lattice.dim, lattice.dim), dtype=complex)
    elif kind == "charged":
        basis = _positive_basis(lattice)
        if not 0 <= q <= basis.shape[1]:
            raise ConfigurationError(f"charge {q} exceeds the positive subspace dimension {basis.shape[1]}")
        nrho = nuclear_density_vector(lattice, nuclei)
        d = d0_matrix(lattice) - alpha * potential_matrix(lattice, nrho)
        h = basis.conj().T @ d @ basis
        _, vecs = scipy.linalg.eigh(0.5 * (h + h.conj().T))
        phi = basis @ vecs[:, :q]
        mat = phi @ phi.conj().T
    elif kind == "perturbed":
        a = random_hs_sample(lattice, 1.0, seed).mat
        vals, vecs = scipy.linalg.eigh(a)
        u = (vecs * np.exp(1j * epsilon * vals)) @ vecs.conj().T
        p0 = p0_matrix(lattice)
        mat = u @ p0 @ u.conj().T - p0
        mat = 0.5 * (mat + mat.conj().T)
    else:
        raise ConfigurationError(f"unknown initial state kind {kind!r}")
    return SystemState(KernelOperator(lattice, mat), nuclei, 0.0)
