"""Property suites run by ``bdfdyn check``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ALPHA_CRITICAL, SimConfig
from .coulomb import GaussianShape, coulomb_inner, coulomb_norm, gaussian_density
from .dynamics import CoupledSystem, SimulationOptions, SystemState, energy_parts, simulate
from .lattice import C0, build_lattice
from .meanfield import bdf_rhs, direct_potential_op, exchange_matrix
from .opspace import (
    charge_tr_q3,
    commutator,
    density_of,
    hs_norm,
    p0_operator,
    p0_split_trace,
    projector_residual,
)
from .oracles import cube_c0_adaptive, exchange_position_space, free_evolution, gaussian_pair_coulomb

__all__ = [
    "PropertyResult",
    "invariants_suite",
    "oracle_suite",
    "order_suite",
    "coulomb_pair_error",
    "exchange_oracle_error",
    "richardson_slopes",
]


@dataclass(frozen=True)
class PropertyResult:
    name: str
    value: float
    threshold: float
    passed: bool
    relation: str = "<="

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: {self.value:.3e} {self.relation} {self.threshold:.3e}"


def _at_most(name, value, threshold):
    return PropertyResult(name, float(value), threshold, bool(value <= threshold))


def _at_least(name, value, threshold):
    return PropertyResult(name, float(value), threshold, bool(value >= threshold), ">=")


def invariants_suite(cfg: SimConfig, s0: SystemState) -> list[PropertyResult]:
    q = s0.q
    alpha = cfg.alpha
    out = [_at_most("Q hermitian defect", q.hermitian_defect(), 1e-13)]
    res = projector_residual(q)
    out.append(_at_most("projector residual", res, 1e-10))
    tr3 = charge_tr_q3(q)
    out.append(_at_most("split trace vs tr Q^3", abs(p0_split_trace(q) - tr3), 1e-9))
    f = bdf_rhs(q, s0.nuclei, alpha)
    out.append(_at_most("rhs hermitian defect", f.hermitian_defect(), 1e-12))
    out.append(_at_most("d/dt tr Q^3 at generator level", abs(3.0 * np.vdot((q @ q).mat.conj().T, f.mat).real), 1e-10))
    system = CoupledSystem.for_state(s0, alpha)
    rho = density_of(q)
    source = rho.values - system.nuclear_rho(s0.positions())
    v = direct_potential_op(type(rho)(q.lattice, source))
    leak = coulomb_norm(density_of(commutator(v, p0_operator(q.lattice))))
    out.append(_at_most("density of [V, P0]", leak, 1e-12))
    out.append(_at_least("D(rho_Q, rho_Q)", coulomb_inner(rho, rho).real, 0.0))
    parts = energy_parts(s0, alpha)
    out.append(_at_most("energy is finite", 0.0 if math.isfinite(parts.total) else math.inf, 0.0))
    if alpha < ALPHA_CRITICAL:
        out.append(_at_least("coercivity slack", parts.coercivity_slack(), -1e-9))
    if res <= 1e-9:
        out.append(_at_least("tr_P0(D0 Q) - ||Q||^2", parts.kinetic_dirac - hs_norm(q) ** 2, -1e-8))
    return out


def coulomb_pair_error(cutoff: float, n: int, sigma1: float, sigma2: float, d: float) -> float:
    """Relative error of the discrete Coulomb pairing of two unit Gaussians."""
    lat = build_lattice(cutoff, n)
    r1 = gaussian_density(lat, GaussianShape(sigma1))
    r2 = gaussian_density(lat, GaussianShape(sigma2), (d, 0.0, 0.0))
    exact = gaussian_pair_coulomb(sigma1, sigma2, d)
    return abs(coulomb_inner(r1, r2).real / exact - 1.0)


def rank_one_coefficients(lattice, width: float | None = None) -> np.ndarray:
    """Gaussian spinor amplitudes, one lattice spacing wide by default.

    Narrower amplitudes spread ``psi`` over the whole period cell and the
    single-cell position integral stops representing it.
    """
    width = lattice.spacing if width is None else width
    p = lattice.points
    amp = np.exp(-np.sum(p * p, axis=1) / (2.0 * width * width))
    spinor = np.array([1.0, 0.3j, 0.2, -0.1])
    c = amp[:, None] * spinor[None, :]
    return c / np.linalg.norm(c)


def exchange_oracle_error(cutoff: float, n: int = 3, grid: int = 32) -> float:
    """Relative error of ``<Q, R(Q)>`` against position-space quadrature for a rank-one ``Q``."""
    lat = build_lattice(cutoff, n)
    c = rank_one_coefficients(lat)
    flat = c.ravel()
    mat = np.outer(flat, flat.conj())
    discrete = np.vdot(mat, exchange_matrix(lat, mat)).real
    return abs(discrete / exchange_position_space(lat, c, grid) - 1.0)


def _pair_parameters(cfg: SimConfig) -> tuple[float, float, float]:
    if len(cfg.nuclei) >= 2:
        a, b = cfg.nuclei[:2]
        return a.sigma, b.sigma, float(np.linalg.norm(np.subtract(a.x0, b.x0)))
    if len(cfg.nuclei) == 1:
        return cfg.nuclei[0].sigma, cfg.nuclei[0].sigma, 0.0
    return 0.5, 0.5, 2.0


def oracle_suite(cfg: SimConfig, s0: SystemState) -> list[PropertyResult]:
    out = [_at_most("c0 vs adaptive quadrature (rel)", abs(C0 / cube_c0_adaptive() - 1.0), 1e-8)]
    s1, s2, d = _pair_parameters(cfg)
    out.append(_at_most(f"Coulomb Gaussian pair n=7 (rel, s={s1},{s2}, d={d:g})", coulomb_pair_error(cfg.lambda_cutoff, 7, s1, s2, d), 0.02))
    out.append(_at_most("exchange rank-one n=3 (rel)", exchange_oracle_error(cfg.lambda_cutoff, 3), 0.05))
    t_end, dt = 0.2, 1e-3
    free = SystemState(s0.q, (), 0.0)
    traj = simulate(free, dt, t_end, 0.0, SimulationOptions(sample_every=10**9, keep_states=False))
    exact = free_evolution(s0.lattice, s0.q.mat, t_end)
    out.append(_at_most("free evolution vs symbol phases (HS)", np.linalg.norm(traj.final.q.mat - exact), 1e-8))
    return out


def _flat_state(s: SystemState) -> np.ndarray:
    parts = [s.q.mat.ravel()]
    if s.nuclei:
        parts += [s.positions().ravel().astype(complex), s.velocities().ravel().astype(complex)]
    return np.concatenate(parts)


def richardson_slopes(s0: SystemState, alpha: float, t_end: float, dts) -> tuple[list[float], list[float]]:
    """Errors ``|y(dt) - y(dt/2)|`` and the fitted slopes ``log2(e_i / e_{i+1})``."""
    opts = SimulationOptions(sample_every=10**9, keep_states=False)
    finals = [_flat_state(simulate(s0, dt, t_end, alpha, opts).final) for dt in dts]
    errors = [float(np.linalg.norm(finals[i] - finals[i + 1])) for i in range(len(finals) - 1)]
    slopes = [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]
    return errors, slopes


def order_suite(cfg: SimConfig, s0: SystemState) -> list[PropertyResult]:
    t_end = min(cfg.t_final, 0.4)
    base = t_end / 4
    dts = [base, base / 2, base / 4, base / 8]
    _, slopes = richardson_slopes(s0, cfg.alpha, t_end, dts)
    return [
        PropertyResult(f"RK4 Richardson slope {i + 1}", s, 4.0, abs(s - 4.0) <= 0.3, "~")
        for i, s in enumerate(slopes)
    ]
