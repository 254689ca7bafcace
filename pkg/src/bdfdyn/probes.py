"""Numerical Lipschitz estimate of the coupled flow."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dynamics import SimulationOptions, SystemState, simulate
from .errors import ConfigurationError
from .opspace import KernelOperator, p0_matrix, random_hs_sample

__all__ = ["GrowthReport", "perturb_state", "lipschitz_divergence_probe"]


@dataclass
class GrowthReport:
    times: np.ndarray
    h: np.ndarray
    rate: float
    tolerance: float

    @property
    def bounded(self) -> bool:
        """``h(t) <= h(0) exp(rate t) (1 + tolerance)`` at every sample."""
        if not math.isfinite(self.rate):
            return False
        envelope = self.h[0] * np.exp(self.rate * self.times) * (1.0 + self.tolerance)
        return bool(np.all(self.h <= envelope + 1e-300))


def perturb_state(s0: SystemState, delta: float, seed: int = 0) -> SystemState:
    """Move every nucleus by ``delta`` in position and velocity and rotate ``Q + P0`` by a unitary of size ``delta``.

    The rotation keeps ``Q + P0`` a projector whenever it was one.
    """
    lat = s0.lattice
    a = random_hs_sample(lat, 1.0, seed).mat
    vals, vecs = scipy.linalg.eigh(a)
    u = (vecs * np.exp(1j * delta * vals)) @ vecs.conj().T
    p = s0.q.mat + p0_matrix(lat)
    mat = u @ p @ u.conj().T - p0_matrix(lat)
    mat = 0.5 * (mat + mat.conj().T)
    dx = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
    dv = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)
    nuclei = tuple(n.moved(x=n.x + delta * dx, v=n.v + delta * dv) for n in s0.nuclei)
    return SystemState(KernelOperator(lat, mat), nuclei, s0.t)


def _distance(a: SystemState, b: SystemState) -> float:
    dq = float(np.linalg.norm(a.q.mat - b.q.mat))
    dx = float(np.sum(np.linalg.norm(a.positions() - b.positions(), axis=1))) if a.nuclei else 0.0
    return dx + dq


def lipschitz_divergence_probe(
    s0: SystemState,
    delta: float,
    dt: float,
    t_final: float,
    alpha: float,
    *,
    seed: int = 0,
    samples: int = 20,
    tolerance: float = 1e-9,
) -> GrowthReport:
    """Track ``h(t) = sum_k |dx_k| + ||dQ||_HS`` between ``s0`` and a ``delta``-perturbed copy.

    The rate is the smallest exponent whose envelope dominates every sample,
    ``max_t log(h(t)/h(0))/t`` (floored at zero).
    """
    if delta < 0:
        raise ConfigurationError("perturbation size must be nonnegative")
    nsteps = max(1, int(round(t_final / dt)))
    every = max(1, nsteps // samples)
    opts = SimulationOptions(sample_every=every, keep_states=True)
    other = perturb_state(s0, delta, seed) if delta > 0 else s0
    base = simulate(s0, dt, t_final, alpha, opts).states
    pert = simulate(other, dt, t_final, alpha, opts).states
    times = np.array([st.t - s0.t for st in base])
    h = np.array([_distance(a, b) for a, b in zip(base, pert)])
    if h[0] == 0:
        return GrowthReport(times, h, 0.0 if np.all(h == 0) else math.inf, tolerance)
    with np.errstate(divide="ignore"):
        rates = np.log(h[1:] / h[0]) / times[1:]
    rate = max(0.0, float(np.max(rates))) if len(rates) else 0.0
    return GrowthReport(times, h, rate, tolerance)
