"""Alternating fixed-point iteration between the electronic and nuclear subsystems.

Each sweep solves the BDF equation with the nuclear trajectories frozen and
then Newton's equations with the electronic density frozen.  Frozen inputs are
read between time knots from cubic Hermite interpolants: positions with their
velocities, densities with their exact time derivatives.  Both interpolants
are fourth-order accurate, matching the RK4 core.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .dynamics import (
    CoupledSystem,
    SimulationOptions,
    SystemState,
    Trajectory,
    _diagnostics,
    _pack,
    _unpack,
    diagnostics_header,
    simulate,
)
from .errors import ConfigurationError
from .opspace import density_vector

log = logging.getLogger(__name__)

__all__ = ["PicardReport", "picard_schauder"]

INTERPOLATION = "cubic Hermite between step knots (order 4)"


@dataclass
class PicardReport:
    distances: list[float] = field(default_factory=list)
    converged: bool = False
    tol: float = 0.0
    direct_distance: float = float("nan")
    interpolation: str = INTERPOLATION

    @property
    def iterations(self) -> int:
        return len(self.distances)

    @property
    def ratios(self) -> list[float]:
        d = self.distances
        return [d[i + 1] / d[i] for i in range(len(d) - 1) if d[i] > 0]

    @property
    def monotone(self) -> bool:
        d = self.distances
        return all(d[i + 1] <= d[i] for i in range(len(d) - 1))

    @property
    def matches_direct(self) -> bool:
        return bool(self.direct_distance <= 10.0 * self.tol)


def _hermite(t, y, dy):
    shape = y.shape[1:]
    flat = CubicHermiteSpline(t, y.reshape(len(t), -1), dy.reshape(len(t), -1), axis=0)
    return lambda s: flat(s).reshape(shape)


def _c1_distance(x1, v1, x2, v2) -> float:
    if x1.size == 0:
        return 0.0
    return float(np.max(np.abs(x1 - x2)) + np.max(np.abs(v1 - v2)))


def _bdf_sweep(system: CoupledSystem, mat0, times, xs, vs):
    """RK4 for Q with positions read from the frozen trajectory."""
    lat = system.lattice
    x_of = _hermite(times, xs, vs)
    mats = [mat0]
    rhos = []
    drhos = []
    mat = mat0
    for n in range(len(times) - 1):
        h = times[n + 1] - times[n]
        xm = x_of(times[n] + 0.5 * h)
        k1, rho = system.bdf(mat, xs[n])
        rhos.append(rho)
        drhos.append(density_vector(lat, k1))
        k2, _ = system.bdf(mat + 0.5 * h * k1, xm)
        k3, _ = system.bdf(mat + 0.5 * h * k2, xm)
        k4, _ = system.bdf(mat + h * k3, xs[n + 1])
        mat = mat + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        mats.append(mat)
    k_end, rho = system.bdf(mat, xs[-1])
    rhos.append(rho)
    drhos.append(density_vector(lat, k_end))
    return mats, np.array(rhos), np.array(drhos)


def _newton_sweep(system: CoupledSystem, x0, v0, times, rhos, drhos):
    """RK4 for the nuclei with the electronic density read from the frozen interpolant."""
    rho_of = _hermite(times, rhos, drhos)
    xs, vs = [x0], [v0]
    x, v = x0, v0
    for n in range(len(times) - 1):
        h = times[n + 1] - times[n]
        rm = rho_of(times[n] + 0.5 * h)
        a1 = system.accelerations(rhos[n], x)
        a2 = system.accelerations(rm, x + 0.5 * h * v)
        a3 = system.accelerations(rm, x + 0.5 * h * (v + 0.5 * h * a1))
        a4 = system.accelerations(rhos[n + 1], x + h * (v + 0.5 * h * a2))
        # velocities at the stages: v, v + h/2 a1, v + h/2 a2, v + h a3
        x = x + h / 6.0 * (v + 2 * (v + 0.5 * h * a1) + 2 * (v + 0.5 * h * a2) + (v + h * a3))
        v = v + h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        xs.append(x)
        vs.append(v)
    return np.array(xs), np.array(vs)


def picard_schauder(
    s0: SystemState,
    tau: float,
    dt: float,
    alpha: float,
    max_iter: int = 20,
    tol: float = 1e-10,
    compare_direct: bool = True,
) -> tuple[Trajectory, PicardReport]:
    """Iterate the two frozen-coefficient solves on ``[0, tau]`` to their common fixed point.

    Non-convergence is reported through ``report.converged``, not raised.
    """
    if not tau > 0 or not dt > 0:
        raise ConfigurationError("tau and dt must be positive")
    nsteps = max(1, int(round(tau / dt)))
    times = s0.t + np.linspace(0.0, tau, nsteps + 1)
    system = CoupledSystem.for_state(s0, alpha)
    mat0, x0, v0 = _unpack(s0)
    # initial guess: free flight
    xs = x0[None] + (times - s0.t)[:, None, None] * v0[None]
    vs = np.repeat(v0[None], len(times), axis=0)

    report = PicardReport(tol=tol)
    mats = None
    for j in range(max_iter):
        mats, rhos, drhos = _bdf_sweep(system, mat0, times, xs, vs)
        new_xs, new_vs = _newton_sweep(system, x0, v0, times, rhos, drhos)
        d = _c1_distance(new_xs, new_vs, xs, vs)
        report.distances.append(d)
        log.debug("picard sweep %d: distance %.3e", j + 1, d)
        xs, vs = new_xs, new_vs
        if d < tol:
            report.converged = True
            break
    if report.converged:
        # Q consistent with the final nuclear iterate
        mats, _, _ = _bdf_sweep(system, mat0, times, xs, vs)

    traj = Trajectory(header=diagnostics_header(len(s0.nuclei)), dt=tau / nsteps, steps=nsteps)
    for n, t in enumerate(times):
        row, parts = _diagnostics(system, mats[n], xs[n], vs[n], float(t))
        traj.rows.append(row)
        traj.energies.append(parts)
        traj.states.append(_pack(s0, mats[n], xs[n], vs[n], float(t)))

    if compare_direct:
        direct = simulate(s0, tau / nsteps, tau, alpha, SimulationOptions(sample_every=1))
        dx = np.array([st.positions() for st in direct.states])
        dv = np.array([st.velocities() for st in direct.states])
        report.direct_distance = _c1_distance(xs, vs, dx, dv)
    return traj, report

