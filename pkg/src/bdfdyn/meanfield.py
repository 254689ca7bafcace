"""Mean-field operator, fluctuation potential and the BDF right-hand side.

All three Coulomb-type terms (direct, nuclear, exchange) replace ``1/|k|^2``
by the cell weights ``w(k)/h^3``, so they share one regularization and the
direct and nuclear operators are exactly the gradients of the corresponding
discrete energy terms.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse

from .coulomb import FOUR_PI, ChargeDensity
from .lattice import MomentumLattice
from .newton import NucleusState, nuclear_arrays, nuclear_form_factors
from .opspace import KernelOperator, d0_matrix, density_vector, p0_symbol

__all__ = [
    "PotentialOperator",
    "potential_matrix",
    "direct_potential_op",
    "nuclear_potential_op",
    "nuclear_density_vector",
    "exchange_matrix",
    "exchange_op",
    "interaction_matrix",
    "assemble_mean_field",
    "assemble_v",
    "bdf_rhs",
    "bdf_rhs_matrix",
]

_UNIT = (2.0 * np.pi) ** -1.5
_EXCHANGE_PREFACTOR = FOUR_PI / (2.0 * np.pi) ** 3


class PotentialOperator(KernelOperator):
    """Multiplication-type kernel ``(2 pi)^{-3/2} v(p - q) I_4``."""

    __slots__ = ("vhat",)

    def __init__(self, lattice: MomentumLattice, mat, vhat):
        super().__init__(lattice, mat)
        self.vhat = np.asarray(vhat, dtype=complex)


def potential_matrix(lattice: MomentumLattice, source: np.ndarray) -> np.ndarray:
    """Matrix of the Coulomb potential generated by the Fourier density ``source``."""
    diff = lattice.difference
    kernel = _UNIT * FOUR_PI * (diff.coulomb_weights * source)[diff.pair_index]
    return np.kron(kernel, np.eye(4))


def _potential(lattice: MomentumLattice, source: np.ndarray) -> PotentialOperator:
    diff = lattice.difference
    vhat = FOUR_PI * source * diff.coulomb_weights / lattice.cell_volume
    return PotentialOperator(lattice, potential_matrix(lattice, source), vhat)


def direct_potential_op(rho: ChargeDensity) -> PotentialOperator:
    """Operator of ``rho * 1/|x|``."""
    return _potential(rho.lattice, rho.values)


def nuclear_density_vector(lattice: MomentumLattice, nuclei: Sequence[NucleusState]) -> np.ndarray:
    z, _, s, x, _ = nuclear_arrays(nuclei)
    g = nuclear_form_factors(lattice.difference.points, z, s, x)
    return g.sum(axis=0) if len(g) else np.zeros(len(lattice.difference), dtype=complex)


def nuclear_potential_op(lattice: MomentumLattice, nuclei: Sequence[NucleusState]) -> PotentialOperator:
    """Operator of ``sum_k z_k f_k(|. - x_k|) * 1/|x|`` (attraction sign left to the caller)."""
    return _potential(lattice, nuclear_density_vector(lattice, nuclei))


@lru_cache(maxsize=8)
def _exchange_sparse(lattice: MomentumLattice) -> scipy.sparse.csr_matrix:
    n = lattice.size
    g = lattice.grid_index
    lookup = lattice.lookup
    diff = lattice.difference
    weights = _EXCHANGE_PREFACTOR * diff.coulomb_weights
    rows, cols, vals = [], [], []
    jj = np.arange(n)
    for i in range(n):
        # k = p_i - p_i'; partner of j is j' with p_j' = p_j - k
        shift = g - g[i]  # (i', 3): g_i' - g_i
        target = g[None, :, :] + shift[:, None, :]  # (i', j, 3)
        inside = np.all((target >= 0) & (target < lattice.n_per_axis), axis=2)
        t = np.where(inside[..., None], target, 0)
        jp = np.where(inside, lookup[t[..., 0], t[..., 1], t[..., 2]], -1)
        ip_idx, j_idx = np.nonzero(jp >= 0)
        rows.append(i * n + jj[j_idx])
        cols.append(ip_idx * n + jp[ip_idx, j_idx])
        vals.append(weights[diff.pair_index[i, ip_idx]])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n * n, n * n))


def exchange_matrix(lattice: MomentumLattice, mat: np.ndarray) -> np.ndarray:
    """Matrix of the operator with kernel ``Q(x, y)/|x - y|``."""
    n = lattice.size
    blocks = np.ascontiguousarray(mat.reshape(n, 4, n, 4).transpose(0, 2, 1, 3))
    # real weights: act on the interleaved real/imaginary view
    out = (_exchange_sparse(lattice) @ blocks.reshape(n * n, 16).view(float)).view(complex)
    return out.reshape(n, n, 4, 4).transpose(0, 2, 1, 3).reshape(4 * n, 4 * n)


def exchange_op(q: KernelOperator) -> KernelOperator:
    return KernelOperator(q.lattice, exchange_matrix(q.lattice, q.mat))


def interaction_matrix(lattice: MomentumLattice, mat: np.ndarray, nuclear_rho: np.ndarray, alpha: float):
    """``(V, rho)``: fluctuation potential matrix and the electronic density of ``mat``."""
    rho = density_vector(lattice, mat)
    if alpha == 0:
        return np.zeros_like(mat), rho
    v = potential_matrix(lattice, rho - nuclear_rho) - exchange_matrix(lattice, mat)
    return alpha * v, rho


def _times_symbols(lattice: MomentumLattice, mat: np.ndarray, sym: np.ndarray) -> np.ndarray:
    """``mat @ blockdiag(sym)`` without forming the block-diagonal matrix."""
    n = lattice.size
    return np.matmul(mat.reshape(4 * n, n, 1, 4), sym[None]).reshape(4 * n, 4 * n)


@lru_cache(maxsize=16)
def _p0_blocks(lattice: MomentumLattice) -> np.ndarray:
    return p0_symbol(lattice.points)


def bdf_rhs_matrix(lattice: MomentumLattice, mat: np.ndarray, nuclear_rho: np.ndarray, alpha: float):
    """``(dQ/dt, rho)`` with ``i dQ/dt = [D_Q, Q] + [V_Q, P0]``.

    ``mat`` must be Hermitian: both commutators are then ``A - A^*`` with a
    single product ``A``.
    """
    v, rho = interaction_matrix(lattice, mat, nuclear_rho, alpha)
    a = (d0_matrix(lattice) + v) @ mat
    if alpha != 0:
        a += _times_symbols(lattice, v, _p0_blocks(lattice))
    return -1j * (a - a.conj().T), rho


def assemble_v(q: KernelOperator, nuclei: Sequence[NucleusState], alpha: float) -> KernelOperator:
    nrho = nuclear_density_vector(q.lattice, nuclei)
    v, _ = interaction_matrix(q.lattice, q.mat, nrho, alpha)
    return KernelOperator(q.lattice, v)


def assemble_mean_field(q: KernelOperator, nuclei: Sequence[NucleusState], alpha: float) -> KernelOperator:
    if alpha < 0:
        raise ValueError("coupling constant must be nonnegative")
    v = assemble_v(q, nuclei, alpha)
    return KernelOperator(q.lattice, d0_matrix(q.lattice) + v.mat)


def bdf_rhs(q: KernelOperator, nuclei: Sequence[NucleusState], alpha: float) -> KernelOperator:
    """Time derivative ``dQ/dt = -i ([D_Q, Q] + [V_Q, P0])``."""
    nrho = nuclear_density_vector(q.lattice, nuclei)
    f, _ = bdf_rhs_matrix(q.lattice, q.mat, nrho, alpha)
    return KernelOperator(q.lattice, f)
