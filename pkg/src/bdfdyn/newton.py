"""Classical nuclei: potential-energy surface and analytic forces.

The force on a nucleus is the exact negative gradient of the
position-dependent part of the total energy,

    U = -alpha D(rho_Q, sum_k z_k f_k(. - x_k)) + alpha sum_{i<j} D(z_i f_i(. - x_i), z_j f_j(. - x_j)),

evaluated with the same discrete Coulomb pairing used everywhere else, so the
coupled flow conserves the discrete energy exactly in continuous time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .coulomb import FOUR_PI, GaussianShape
from .opspace import KernelOperator, density_vector

__all__ = [
    "NucleusState",
    "nuclear_arrays",
    "nuclear_form_factors",
    "potential_energy_U",
    "potential_energy_arrays",
    "nuclear_force",
    "forces_arrays",
    "newton_rhs",
]


@dataclass(frozen=True, eq=False)
class NucleusState:
    z: float
    m: float
    shape: GaussianShape
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError(f"nuclear charge must be positive, got {self.z!r}")
        if not self.m > 0:
            raise ValueError(f"nuclear mass must be positive, got {self.m!r}")
        object.__setattr__(self, "x", np.array(self.x, dtype=float).reshape(3))
        object.__setattr__(self, "v", np.array(self.v, dtype=float).reshape(3))

    @classmethod
    def gaussian(cls, z, m, sigma, x, v=(0.0, 0.0, 0.0)) -> "NucleusState":
        return cls(z=z, m=m, shape=GaussianShape(sigma), x=x, v=v)

    def moved(self, x=None, v=None) -> "NucleusState":
        return replace(self, x=self.x if x is None else x, v=self.v if v is None else v)


def nuclear_arrays(nuclei: Sequence[NucleusState]):
    """``(z, m, sigma, x, v)`` arrays for a list of nuclei."""
    z = np.array([n.z for n in nuclei], dtype=float)
    m = np.array([n.m for n in nuclei], dtype=float)
    s = np.array([n.shape.sigma for n in nuclei], dtype=float)
    x = np.array([n.x for n in nuclei], dtype=float).reshape(-1, 3)
    v = np.array([n.v for n in nuclei], dtype=float).reshape(-1, 3)
    return z, m, s, x, v


def nuclear_form_factors(kpts: np.ndarray, z: np.ndarray, sigma: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Rows ``z_k f_k(k) exp(-i k.x_k)`` for every nucleus, shape (M, K)."""
    if len(z) == 0:
        return np.zeros((0, len(kpts)), dtype=complex)
    k2 = np.einsum("kj,kj->k", kpts, kpts)
    amp = z[:, None] * (2.0 * np.pi) ** -1.5 * np.exp(-0.5 * sigma[:, None] ** 2 * k2[None, :])
    return amp * np.exp(-1j * (x @ kpts.T))


def potential_energy_arrays(lattice, rho: np.ndarray, z, sigma, x, alpha: float) -> float:
    diff = lattice.difference
    w = diff.coulomb_weights
    g = nuclear_form_factors(diff.points, z, sigma, x)
    electron = FOUR_PI * np.sum(w * rho.conj() * g.sum(axis=0)).real
    gram = FOUR_PI * np.einsum("k,ik,jk->ij", w, g.conj(), g).real
    pairs = np.sum(np.triu(gram, 1))
    return float(alpha * (-electron + pairs))


def forces_arrays(lattice, rho: np.ndarray, z, sigma, x, alpha: float) -> np.ndarray:
    """Forces ``-grad U`` on all nuclei, shape (M, 3)."""
    if len(z) == 0:
        return np.zeros((0, 3))
    diff = lattice.difference
    k = diff.points
    w = diff.coulomb_weights
    g = nuclear_form_factors(k, z, sigma, x)
    # d/dx_k of g_k is -i k g_k; of conj(g_k) is +i k conj(g_k)
    electron = FOUR_PI * (-1j * (w * rho.conj())[None, :] * g) @ k
    other = g.sum(axis=0)[None, :] - g
    pair = FOUR_PI * (1j * (w[None, :] * g.conj() * other)) @ k
    grad = alpha * (-electron.real + pair.real)
    return -grad


def _rho_of(q: KernelOperator) -> np.ndarray:
    return density_vector(q.lattice, q.mat)


def potential_energy_U(q: KernelOperator, nuclei: Sequence[NucleusState], alpha: float) -> float:
    z, _, s, x, _ = nuclear_arrays(nuclei)
    return potential_energy_arrays(q.lattice, _rho_of(q), z, s, x, alpha)


def nuclear_force(q: KernelOperator, nuclei: Sequence[NucleusState], alpha: float, k: int) -> np.ndarray:
    if not 0 <= k < len(nuclei):
        raise IndexError(f"nucleus index {k} out of range for {len(nuclei)} nuclei")
    z, _, s, x, _ = nuclear_arrays(nuclei)
    return forces_arrays(q.lattice, _rho_of(q), z, s, x, alpha)[k]


def newton_rhs(nuclei: Sequence[NucleusState], q: KernelOperator, alpha: float) -> list[tuple[np.ndarray, np.ndarray]]:
    """``(dx/dt, dv/dt)`` for every nucleus."""
    z, m, s, x, v = nuclear_arrays(nuclei)
    f = forces_arrays(q.lattice, _rho_of(q), z, s, x, alpha)
    return [(v[i].copy(), f[i] / m[i]) for i in range(len(nuclei))]

