"""Momentum-space discretization of the cutoff one-particle space.

Points live on a uniform cubic grid of spacing ``h = 2*cutoff/n_per_axis``
intersected with the closed ball ``|p| <= cutoff``.  Internally every grid
point is tracked through an integer offset vector ``m`` with ``p = m*h/2``;
all offsets share the parity of ``n_per_axis - 1`` so that pairwise
differences are integer multiples of ``h``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "MomentumLattice",
    "DifferenceLattice",
    "build_lattice",
    "build_difference_lattice",
    "cell_inverse_square_integral",
    "C0",
]


def _face_integral_c0(order: int = 48) -> float:
    # div(u/|u|^2) = 1/|u|^2 in 3D, so the cube integral reduces to six
    # identical smooth face integrals.
    x, w = np.polynomial.legendre.leggauss(order)
    x, w = 0.5 * x, 0.5 * w
    y, z = np.meshgrid(x, x, indexing="ij")
    return float(3.0 * np.sum(np.outer(w, w) / (0.25 + y * y + z * z)))


#: integral of 1/|u|^2 over the unit cube centred at the origin
C0: float = _face_integral_c0()


@lru_cache(maxsize=None)
def _gauss_cube(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x, w = 0.5 * x, 0.5 * w
    gx, gy, gz = np.meshgrid(x, x, x, indexing="ij")
    gw = w[:, None, None] * w[None, :, None] * w[None, None, :]
    nodes = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    return nodes, gw.ravel()


@lru_cache(maxsize=None)
def _cell_integral_canonical(a: int, b: int, c: int) -> float:
    if a == b == c == 0:
        return C0
    order = 16 if max(a, b, c) <= 1 else 8
    nodes, weights = _gauss_cube(order)
    u = nodes + np.array([a, b, c], dtype=float)
    return float(np.sum(weights / np.einsum("ij,ij->i", u, u)))


def cell_inverse_square_integral(d) -> float:
    """Integral of ``1/|u|^2`` over the unit cube centred at integer vector ``d``.

    The value depends only on the sorted absolute components, which makes
    ``c(d) == c(-d)`` hold bit for bit.
    """
    a, b, c = sorted(abs(int(v)) for v in d)
    return _cell_integral_canonical(a, b, c)


@dataclass(frozen=True, eq=False)
class DifferenceLattice:
    """All pairwise differences ``p - q`` of a momentum lattice."""

    spacing: float
    offsets: np.ndarray  # (K, 3) integer multiples of the spacing
    coulomb_weights: np.ndarray  # (K,) cell integrals of 1/|k|^2
    pair_index: np.ndarray = field(repr=False)  # (N, N): index of p_i - p_j
    zero_index: int = 0
    negation: np.ndarray = field(default=None, repr=False)  # index of -k

    @property
    def points(self) -> np.ndarray:
        return self.offsets * self.spacing

    def __len__(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True, eq=False)
class MomentumLattice:
    cutoff: float
    n_per_axis: int
    offsets: np.ndarray = field(repr=False)  # (N, 3) odd/even half-spacing offsets

    @property
    def spacing(self) -> float:
        return 2.0 * self.cutoff / self.n_per_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def points(self) -> np.ndarray:
        return self.offsets * (0.5 * self.spacing)

    @property
    def size(self) -> int:
        return len(self.offsets)

    @property
    def dim(self) -> int:
        """Dimension of the discrete one-particle space (4 spinor slots per point)."""
        return 4 * len(self.offsets)

    def __len__(self) -> int:
        return len(self.offsets)

    @cached_property
    def grid_index(self) -> np.ndarray:
        """Axis indices in ``range(n_per_axis)`` for every point."""
        return (self.offsets + (self.n_per_axis - 1)) // 2

    @cached_property
    def lookup(self) -> np.ndarray:
        """Dense ``n^3`` table from axis indices to point index (-1 outside the ball)."""
        n = self.n_per_axis
        table = np.full((n, n, n), -1, dtype=np.int64)
        g = self.grid_index
        table[g[:, 0], g[:, 1], g[:, 2]] = np.arange(len(g))
        return table

    @cached_property
    def negation(self) -> np.ndarray:
        """Index of ``-p`` for every point ``p``."""
        g = (self.n_per_axis - 1) - self.grid_index
        return self.lookup[g[:, 0], g[:, 1], g[:, 2]]

    @cached_property
    def difference(self) -> DifferenceLattice:
        return build_difference_lattice(self)

    def energies(self) -> np.ndarray:
        """Free kinetic energy ``sqrt(1 + |p|^2)`` at every point."""
        p = self.points
        return np.sqrt(1.0 + np.einsum("ij,ij->i", p, p))


def build_lattice(cutoff: float, n_per_axis: int) -> MomentumLattice:
    if not cutoff > 0:
        raise ConfigurationError(f"cutoff must be positive, got {cutoff!r}")
    if int(n_per_axis) != n_per_axis or n_per_axis < 2:
        raise ConfigurationError(f"n_per_axis must be an integer >= 2, got {n_per_axis!r}")
    n = int(n_per_axis)
    axis = 2 * np.arange(n) - (n - 1)
    mx, my, mz = np.meshgrid(axis, axis, axis, indexing="ij")
    offsets = np.stack([mx.ravel(), my.ravel(), mz.ravel()], axis=1)
    # |p| <= cutoff  <=>  |m|^2 <= n^2 since p = m*cutoff/n; exact in integers
    keep = np.einsum("ij,ij->i", offsets, offsets) <= n * n
    offsets = offsets[keep]  # meshgrid order is already lexicographic
    return MomentumLattice(cutoff=float(cutoff), n_per_axis=n, offsets=offsets)


def build_difference_lattice(lattice: MomentumLattice) -> DifferenceLattice:
    m = lattice.offsets
    diffs = (m[:, None, :] - m[None, :, :]) // 2
    flat = diffs.reshape(-1, 3)
    offsets, inverse = np.unique(flat, axis=0, return_inverse=True)
    pair_index = inverse.reshape(len(m), len(m))
    h = lattice.spacing
    weights = h * np.array([cell_inverse_square_integral(d) for d in offsets])
    zero = int(np.flatnonzero(~offsets.any(axis=1))[0])
    # np.unique sorts lexicographically, and the set is closed under negation
    negation = np.searchsorted(
        offsets.view([("", offsets.dtype)] * 3).ravel(),
        (-offsets).copy().view([("", offsets.dtype)] * 3).ravel(),
    )
    return DifferenceLattice(
        spacing=h,
        offsets=offsets,
        coulomb_weights=weights,
        pair_index=pair_index,
        zero_index=zero,
        negation=negation,
    )
