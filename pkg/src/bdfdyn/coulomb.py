"""Coulomb-space primitives on the difference lattice.

Densities are represented by their unitary Fourier transform
``rho(k) = (2 pi)^{-3/2} int rho(x) exp(-i k.x) dx`` sampled on the difference
lattice.  Momentum integrals against ``1/|k|^2`` use the cell-integrated
weights of :mod:`bdfdyn.lattice`, and the explicit ``4 pi`` makes
``coulomb_inner`` equal to the position-space double integral
``int int rho1(x) rho2(y) / |x - y|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LatticeMismatchError

__all__ = [
    "ChargeDensity",
    "GaussianShape",
    "fourier_gaussian",
    "gaussian_density",
    "translate_density",
    "coulomb_inner",
    "coulomb_norm",
    "coulomb_gradient",
    "FOUR_PI",
]

FOUR_PI = 4.0 * np.pi
_UNIT = (2.0 * np.pi) ** -1.5


@dataclass(frozen=True, eq=False)
class ChargeDensity:
    lattice: object  # MomentumLattice; the density lives on lattice.difference
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (len(self.lattice.difference),):
            raise ValueError("density must have one value per difference-lattice point")
        object.__setattr__(self, "values", vals)

    def _check(self, other: "ChargeDensity") -> None:
        if other.lattice is not self.lattice:
            raise LatticeMismatchError("densities live on different lattices")

    def __add__(self, other: "ChargeDensity") -> "ChargeDensity":
        self._check(other)
        return ChargeDensity(self.lattice, self.values + other.values)

    def __sub__(self, other: "ChargeDensity") -> "ChargeDensity":
        self._check(other)
        return ChargeDensity(self.lattice, self.values - other.values)

    def __mul__(self, scalar) -> "ChargeDensity":
        return ChargeDensity(self.lattice, self.values * scalar)

    __rmul__ = __mul__

    def reality_defect(self) -> float:
        neg = self.lattice.difference.negation
        return float(np.max(np.abs(self.values[neg] - self.values.conj()), initial=0.0))

    @classmethod
    def zeros(cls, lattice) -> "ChargeDensity":
        return cls(lattice, np.zeros(len(lattice.difference), dtype=complex))


@dataclass(frozen=True)
class GaussianShape:
    """Normalized Gaussian ``(2 pi s^2)^{-3/2} exp(-|x|^2 / 2 s^2)``."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"Gaussian width must be positive, got {self.sigma!r}")


def fourier_gaussian(shape: GaussianShape, k) -> np.ndarray | complex:
    k = np.asarray(k, dtype=float)
    k2 = np.sum(k * k, axis=-1)
    out = _UNIT * np.exp(-0.5 * shape.sigma**2 * k2) + 0j
    return out if out.ndim else complex(out)


def gaussian_density(lattice, shape: GaussianShape, center=(0.0, 0.0, 0.0), charge: float = 1.0) -> ChargeDensity:
    """``charge * f(|x - center|)`` as a :class:`ChargeDensity`."""
    k = lattice.difference.points
    phase = np.exp(-1j * (k @ np.asarray(center, dtype=float)))
    return ChargeDensity(lattice, charge * fourier_gaussian(shape, k) * phase)


def translate_density(rho: ChargeDensity, shift) -> ChargeDensity:
    """Density of ``x -> rho(x - shift)``."""
    k = rho.lattice.difference.points
    return ChargeDensity(rho.lattice, rho.values * np.exp(-1j * (k @ np.asarray(shift, dtype=float))))


def coulomb_inner(rho1: ChargeDensity, rho2: ChargeDensity) -> complex:
    rho1._check(rho2)
    w = rho1.lattice.difference.coulomb_weights
    return complex(FOUR_PI * np.sum(w * rho1.values.conj() * rho2.values))


def coulomb_norm(rho: ChargeDensity) -> float:
    w = rho.lattice.difference.coulomb_weights
    return float(np.sqrt(FOUR_PI * np.sum(w * np.abs(rho.values) ** 2)))


def coulomb_gradient(rho: ChargeDensity, shape: GaussianShape, center, charge: float = 1.0) -> np.ndarray:
    """Gradient in ``center`` of ``D(rho, charge * f(|. - center|))``."""
    diff = rho.lattice.difference
    k = diff.points
    g = charge * fourier_gaussian(shape, k) * np.exp(-1j * (k @ np.asarray(center, dtype=float)))
    integrand = diff.coulomb_weights * rho.values.conj() * g
    return (FOUR_PI * np.einsum("k,kj->j", integrand, -1j * k)).real
