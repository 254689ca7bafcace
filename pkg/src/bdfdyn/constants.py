"""Numerical estimates of the constants that fix the local existence time.

``C_f`` is exact for Gaussians.  The operator constants are empirical
suprema over random Hilbert-Schmidt samples drawn on the sphere of radius
``C^e ||Q_I||`` (or 1 when ``Q_I = 0``) in the space norm
``(||Q||_HS^2 + ||rho_Q||_C^2)^{1/2}``.  They are lower bounds of the true
suprema, so the reported admissible time is an estimate, not a certificate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .coulomb import FOUR_PI
from .errors import ConfigurationError
from .lattice import MomentumLattice
from .meanfield import _p0_blocks, _times_symbols, bdf_rhs_matrix, exchange_matrix, nuclear_density_vector, potential_matrix
from .newton import NucleusState, nuclear_arrays
from .opspace import d0_matrix, density_vector, random_hs_sample
from .spinor import free_energy

__all__ = [
    "ConstantReport",
    "gaussian_cf",
    "space_norm",
    "estimate_constants",
    "ball_membership",
]

_SAFETY = 1.0 - 1e-9


def gaussian_cf(z: float, sigma: float) -> float:
    """``max(||z f||_C, ||z grad f||_C)`` for a normalized Gaussian of width ``sigma``.

    ``||f||_C^2 = 1/(sigma sqrt(pi))`` and ``||grad f||_C^2 = 4 pi (4 pi sigma^2)^{-3/2}``;
    both are translation invariant.
    """
    plain = (sigma * math.sqrt(math.pi)) ** -0.5
    grad = math.sqrt(FOUR_PI * (FOUR_PI * sigma * sigma) ** -1.5)
    return z * max(plain, grad)


def space_norm(lattice: MomentumLattice, mat: np.ndarray) -> float:
    rho = density_vector(lattice, mat)
    coul = FOUR_PI * np.sum(lattice.difference.coulomb_weights * np.abs(rho) ** 2)
    return float(math.sqrt(np.linalg.norm(mat) ** 2 + coul))


@dataclass(frozen=True)
class ConstantReport:
    C_f: float
    C_F: float
    C1: float
    C2: float
    C3: float
    kappa: float
    c_e: float
    q_init_norm: float
    tau_inequality_1: float
    tau_inequality_2: float
    samples: int

    @property
    def tau_admissible(self) -> float:
        return min(self.tau_inequality_1, self.tau_inequality_2)

    def satisfies(self, tau: float, alpha: float, nuclei: Sequence[NucleusState]) -> tuple[bool, bool]:
        """Whether ``tau`` meets the two smallness conditions."""
        first = tau * self.C_F < 1.0 and 1.0 / (1.0 - tau * self.C_F) < self.c_e
        second = all(
            alpha * tau / n.m * self.C_f * (self.c_e * self.q_init_norm + self.C_f) <= np.linalg.norm(n.v)
            for n in nuclei
        )
        return first, second

    def as_dict(self) -> dict:
        d = asdict(self)
        d["tau_admissible"] = self.tau_admissible
        return d


def estimate_constants(
    lattice: MomentumLattice,
    nuclei: Sequence[NucleusState],
    alpha: float,
    c_e: float,
    q_init_norm: float,
    samples: int = 8,
    seed: int = 0,
) -> ConstantReport:
    if not c_e > 1:
        raise ConfigurationError("c_e must be greater than 1")
    if samples < 1:
        raise ConfigurationError("samples must be at least 1")
    if alpha < 0:
        raise ConfigurationError("alpha must be nonnegative")
    nuclei = tuple(nuclei)
    z, m, s, _, v = nuclear_arrays(nuclei)
    c_f = max((gaussian_cf(zk, sk) for zk, sk in zip(z, s)), default=0.0)

    radius = c_e * q_init_norm if q_init_norm > 0 else 1.0
    nrho = nuclear_density_vector(lattice, nuclei)
    d_x = d0_matrix(lattice) - alpha * potential_matrix(lattice, nrho)
    p0b = _p0_blocks(lattice)
    e_cut = float(free_energy(np.array([lattice.cutoff, 0.0, 0.0])))
    w = lattice.difference.coulomb_weights

    def v_prime(mat):
        rho = density_vector(lattice, mat)
        return alpha * (potential_matrix(lattice, rho) - exchange_matrix(lattice, mat)), rho

    def norm(mat):
        return space_norm(lattice, mat)

    c_big = c1 = c2 = c3 = kappa = 0.0
    for j in range(samples):
        q = random_hs_sample(lattice, 1.0, seed + j).mat
        q *= radius / norm(q)
        qn = norm(q)
        f, _ = bdf_rhs_matrix(lattice, q, nrho, alpha)
        c_big = max(c_big, norm(f) / qn)
        c1 = max(c1, norm(d_x @ q - q @ d_x) / qn)
        vq, rho = v_prime(q)
        other = random_hs_sample(lattice, 1.0, seed + 1_000_003 + j).mat
        other *= radius / norm(other)
        c2 = max(c2, norm(vq @ other - other @ vq) / (qn * norm(other)))
        vp = _times_symbols(lattice, vq, p0b)
        c3 = max(c3, norm(vp - vp.conj().T) / qn)
        rho_norm = math.sqrt(FOUR_PI * np.sum(w * np.abs(rho) ** 2))
        if rho_norm > 0:
            direct = potential_matrix(lattice, rho)
            kappa = max(kappa, np.linalg.norm(direct, 2) / (e_cut * rho_norm))

    tau1 = (1.0 - 1.0 / c_e) / c_big * _SAFETY if c_big > 0 else math.inf
    tau2 = math.inf
    if alpha > 0 and c_f > 0:
        bound = alpha * c_f * (c_e * q_init_norm + c_f)
        speeds = np.linalg.norm(v, axis=1) if len(v) else np.zeros(0)
        if not (q_init_norm == 0 and np.all(speeds == 0)):
            tau2 = float(np.min(speeds * m / bound)) if len(speeds) else math.inf
    return ConstantReport(
        C_f=float(c_f),
        C_F=float(c_big),
        C1=float(c1),
        C2=float(c2),
        C3=float(c3),
        kappa=float(kappa),
        c_e=float(c_e),
        q_init_norm=float(q_init_norm),
        tau_inequality_1=float(tau1),
        tau_inequality_2=float(tau2),
        samples=int(samples),
    )


def ball_membership(trajectory, report: ConstantReport, tau: float) -> dict:
    """Whether a trajectory stays in the bounded sets used by the fixed-point argument on ``[0, tau]``.

    Reported, never enforced.
    """
    if not trajectory.states:
        raise ValueError("trajectory carries no states")
    s0 = trajectory.states[0]
    inside_q = True
    inside_v = True
    v0 = np.linalg.norm(s0.velocities(), axis=1) if s0.nuclei else np.zeros(0)
    limit = report.c_e * report.q_init_norm
    for st in trajectory.states:
        if st.t - s0.t > tau * (1 + 1e-12):
            break
        if space_norm(st.lattice, st.q.mat) > limit * (1 + 1e-12):
            inside_q = False
        if st.nuclei and np.any(np.linalg.norm(st.velocities(), axis=1) > 2 * v0 * (1 + 1e-12)):
            inside_v = False
    return {"electronic": inside_q, "nuclear": inside_v}
