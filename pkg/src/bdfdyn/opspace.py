"""Hilbert-Schmidt kernel algebra on a momentum lattice.

A kernel ``Q(p, q)`` (4x4 blocks over lattice pairs) is stored as the dense
matrix ``mat = h^3 * Q``, indexed by ``4*i + a``.  In that representation
operator composition is plain matrix multiplication, the identity is the
identity matrix, traces are matrix traces and the Hilbert-Schmidt norm is the
Frobenius norm, so every routine below works on ``mat`` directly.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg

from .coulomb import ChargeDensity
from .errors import LatticeMismatchError, RetractionError
from .lattice import MomentumLattice
from .spinor import d0_symbol, p0_symbol

__all__ = [
    "KernelOperator",
    "identity",
    "symbol_operator",
    "d0_operator",
    "p0_operator",
    "d0_matrix",
    "p0_matrix",
    "commutator",
    "hs_norm",
    "hs_inner",
    "trace",
    "p0_split_trace",
    "charge_tr_q3",
    "density_vector",
    "density_of",
    "projector_residual",
    "projector_residual_matrix",
    "retract_to_projector",
    "retract_matrix",
    "random_hs_sample",
    "op_norm",
]

_DENSITY_PREFACTOR = (2.0 * np.pi) ** -1.5


class KernelOperator:
    """Kernel operator on ``lattice`` held as its matrix representation."""

    __slots__ = ("lattice", "mat")

    def __init__(self, lattice: MomentumLattice, mat):
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (lattice.dim, lattice.dim):
            raise ValueError(f"expected a {lattice.dim}x{lattice.dim} matrix, got {mat.shape}")
        self.lattice = lattice
        self.mat = mat

    @classmethod
    def zeros(cls, lattice: MomentumLattice) -> "KernelOperator":
        return cls(lattice, np.zeros((lattice.dim, lattice.dim), dtype=complex))

    @classmethod
    def from_blocks(cls, lattice: MomentumLattice, blocks) -> "KernelOperator":
        """Build from kernel values ``blocks[i, j] = Q(p_i, p_j)`` of shape (N, N, 4, 4)."""
        blocks = np.asarray(blocks, dtype=complex)
        n = lattice.size
        mat = blocks.transpose(0, 2, 1, 3).reshape(4 * n, 4 * n) * lattice.cell_volume
        return cls(lattice, mat)

    @property
    def blocks(self) -> np.ndarray:
        n = self.lattice.size
        return self.mat.reshape(n, 4, n, 4).transpose(0, 2, 1, 3) / self.lattice.cell_volume

    def adjoint(self) -> "KernelOperator":
        return KernelOperator(self.lattice, self.mat.conj().T)

    def hermitian_defect(self) -> float:
        return float(np.linalg.norm(self.mat - self.mat.conj().T))

    def _check(self, other: "KernelOperator") -> None:
        if other.lattice is not self.lattice:
            raise LatticeMismatchError("kernel operators live on different lattices")

    def __add__(self, other):
        self._check(other)
        return KernelOperator(self.lattice, self.mat + other.mat)

    def __sub__(self, other):
        self._check(other)
        return KernelOperator(self.lattice, self.mat - other.mat)

    def __neg__(self):
        return KernelOperator(self.lattice, -self.mat)

    def __mul__(self, scalar):
        return KernelOperator(self.lattice, self.mat * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return KernelOperator(self.lattice, self.mat / scalar)

    def __matmul__(self, other):
        self._check(other)
        return KernelOperator(self.lattice, self.mat @ other.mat)

    def __repr__(self) -> str:
        return f"KernelOperator(N={self.lattice.size}, hs_norm={hs_norm(self):.3e})"


def _block_diag(symbols: np.ndarray) -> np.ndarray:
    n = len(symbols)
    out = np.zeros((n, 4, n, 4), dtype=complex)
    idx = np.arange(n)
    out[idx, :, idx, :] = symbols
    return out.reshape(4 * n, 4 * n)


@lru_cache(maxsize=16)
def d0_matrix(lattice: MomentumLattice) -> np.ndarray:
    m = _block_diag(d0_symbol(lattice.points))
    m.setflags(write=False)
    return m


@lru_cache(maxsize=16)
def p0_matrix(lattice: MomentumLattice) -> np.ndarray:
    m = _block_diag(p0_symbol(lattice.points))
    m.setflags(write=False)
    return m


def identity(lattice: MomentumLattice) -> KernelOperator:
    return KernelOperator(lattice, np.eye(lattice.dim, dtype=complex))


def symbol_operator(lattice: MomentumLattice, symbols) -> KernelOperator:
    """Multiplication by a momentum symbol: kernel ``delta_pq h^-3 S(p)``."""
    return KernelOperator(lattice, _block_diag(np.asarray(symbols, dtype=complex)))


def d0_operator(lattice: MomentumLattice) -> KernelOperator:
    return KernelOperator(lattice, d0_matrix(lattice).copy())


def p0_operator(lattice: MomentumLattice) -> KernelOperator:
    return KernelOperator(lattice, p0_matrix(lattice).copy())


def commutator(a: KernelOperator, b: KernelOperator) -> KernelOperator:
    a._check(b)
    return KernelOperator(a.lattice, a.mat @ b.mat - b.mat @ a.mat)


def hs_norm(q: KernelOperator) -> float:
    return float(np.linalg.norm(q.mat))


def hs_inner(a: KernelOperator, b: KernelOperator) -> complex:
    """``tr(A^* B)``."""
    a._check(b)
    return complex(np.vdot(a.mat, b.mat))


def trace(q: KernelOperator) -> complex:
    return complex(np.trace(q.mat))


def op_norm(q: KernelOperator) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(q.mat, 2))


def _diag_blocks(lattice: MomentumLattice, mat: np.ndarray) -> np.ndarray:
    n = lattice.size
    idx = np.arange(n)
    return mat.reshape(n, 4, n, 4)[idx, :, idx, :]


def p0_split_trace(q: KernelOperator) -> float:
    """``tr P0 Q P0 + tr (1-P0) Q (1-P0)``.

    Both projectors are block diagonal, so only the diagonal blocks of ``Q``
    enter.
    """
    lat = q.lattice
    pm = p0_symbol(lat.points)
    pp = np.eye(4) - pm
    qd = _diag_blocks(lat, q.mat)
    minus = np.einsum("iab,ibc,ica->", pm, qd, pm)
    plus = np.einsum("iab,ibc,ica->", pp, qd, pp)
    return float((minus + plus).real)


def charge_tr_q3(q: KernelOperator) -> float:
    m2 = q.mat @ q.mat
    return float(np.einsum("ij,ji->", m2, q.mat).real)


def density_vector(lattice: MomentumLattice, mat: np.ndarray) -> np.ndarray:
    """Fourier density ``rho(k)`` on the difference lattice of a kernel matrix."""
    n = lattice.size
    tr = np.einsum("iaja->ij", mat.reshape(n, 4, n, 4))
    diff = lattice.difference
    idx = diff.pair_index.ravel()
    k = len(diff)
    rho = np.bincount(idx, weights=tr.real.ravel(), minlength=k) + 1j * np.bincount(
        idx, weights=tr.imag.ravel(), minlength=k
    )
    return _DENSITY_PREFACTOR * rho


def density_of(q: KernelOperator) -> ChargeDensity:
    return ChargeDensity(q.lattice, density_vector(q.lattice, q.mat))


def projector_residual_matrix(lattice: MomentumLattice, mat: np.ndarray) -> float:
    p = mat + p0_matrix(lattice)
    return float(np.linalg.norm(p @ p - p))


def projector_residual(q: KernelOperator) -> float:
    """HS norm of ``P^2 - P`` for ``P = Q + P0``."""
    return projector_residual_matrix(q.lattice, q.mat)


def retract_matrix(lattice: MomentumLattice, mat: np.ndarray, tie_tol: float = 1e-6) -> np.ndarray:
    p = mat + p0_matrix(lattice)
    p = 0.5 * (p + p.conj().T)
    vals, vecs = scipy.linalg.eigh(p)
    if np.any(np.abs(vals - 0.5) < tie_tol):
        worst = vals[np.argmin(np.abs(vals - 0.5))]
        raise RetractionError(f"eigenvalue {worst:.3e} is within {tie_tol:g} of 1/2")
    occ = vecs[:, vals > 0.5]
    return occ @ occ.conj().T - p0_matrix(lattice)


def retract_to_projector(q: KernelOperator) -> KernelOperator:
    """Round the spectrum of ``Q + P0`` to {0, 1} and return the new ``P - P0``."""
    return KernelOperator(q.lattice, retract_matrix(q.lattice, q.mat))


def random_hs_sample(lattice: MomentumLattice, norm_bound: float, seed: int) -> KernelOperator:
    """Hermitian Gaussian sample rescaled to Hilbert-Schmidt norm ``norm_bound``."""
    if not norm_bound > 0:
        raise ValueError("norm_bound must be positive")
    rng = np.random.default_rng(seed)
    d = lattice.dim
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (g + g.conj().T)
    # a hair under the bound so rounding can never push the norm over it
    h *= norm_bound * (1.0 - 1e-12) / np.linalg.norm(h)
    return KernelOperator(lattice, h)
