"""Independent reference computations used to validate the discretization.

None of these share code paths with the production assemblies: they work in
position space or with one-dimensional radial quadrature.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, signal

from .lattice import MomentumLattice
from .spinor import d0_symbol, free_energy

__all__ = [
    "cube_c0_adaptive",
    "gaussian_pair_coulomb",
    "gaussian_potential_at_origin",
    "gaussian_coulomb_norms",
    "exchange_position_space",
    "free_evolution",
]


def cube_c0_adaptive(epsrel: float = 1e-13) -> float:
    """``int_{[-1/2,1/2]^3} du/|u|^2`` by adaptive quadrature.

    In polar form the integral is the solid-angle average of the distance to
    the cube surface; on the face ``x = 1/2`` that gives ``(1/2)/r^2 dy dz``.
    """
    val, _ = integrate.dblquad(
        lambda z, y: 0.5 / (0.25 + y * y + z * z), 0.0, 0.5, 0.0, 0.5, epsabs=0, epsrel=epsrel
    )
    return 6.0 * 4.0 * val


def _gaussian_profile(r, s):
    return (2.0 * np.pi * s * s) ** -1.5 * np.exp(-0.5 * r * r / (s * s))


def gaussian_pair_coulomb(sigma1: float, sigma2: float, d: float) -> float:
    """``int int f1(x) f2(y - d e) / |x - y|`` for normalized Gaussians.

    The convolution of the two Gaussians is a Gaussian of width
    ``sqrt(s1^2 + s2^2)``; its potential at distance ``d`` follows from the
    shell theorem as a one-dimensional radial integral.
    """
    s = math.hypot(sigma1, sigma2)
    outer, _ = integrate.quad(lambda r: r * _gaussian_profile(r, s), d, np.inf, epsabs=0, epsrel=1e-12)
    if d == 0:
        return 4.0 * np.pi * outer
    inner, _ = integrate.quad(lambda r: r * r * _gaussian_profile(r, s), 0.0, d, epsabs=0, epsrel=1e-12)
    return 4.0 * np.pi * (inner / d + outer)


def gaussian_potential_at_origin(sigma: float) -> float:
    """Potential of a unit Gaussian at its own center, ``sqrt(2/pi)/sigma``."""
    return gaussian_pair_coulomb(sigma, 0.0, 0.0)


def gaussian_coulomb_norms(z: float, sigma: float) -> tuple[float, float]:
    """``(||z f||_C, ||z grad f||_C)`` by radial quadrature in momentum space."""
    fhat2 = lambda k: (2.0 * np.pi) ** -3 * np.exp(-(sigma * k) ** 2)  # noqa: E731
    # 4 pi int |f|^2/|k|^2 d^3k = 16 pi^2 int |f|^2 dk
    a, _ = integrate.quad(fhat2, 0.0, np.inf, epsabs=0, epsrel=1e-13)
    b, _ = integrate.quad(lambda k: k * k * fhat2(k), 0.0, np.inf, epsabs=0, epsrel=1e-13)
    c = 16.0 * np.pi**2
    return z * math.sqrt(c * a), z * math.sqrt(c * b)


# mean inverse distance between two uniform points of the unit cube
_CUBE_SELF = 0.9411563086341


def exchange_position_space(lattice: MomentumLattice, coeffs: np.ndarray, grid: int = 24) -> float:
    """``int int |psi(x)|^2 |psi(y)|^2 / |x - y|`` for ``Q = |psi><psi|``.

    ``coeffs`` are the spinor amplitudes of ``psi`` at the lattice points,
    shape (N, 4) with ``sum |c|^2 = 1``.  ``psi`` is the trigonometric
    polynomial with those Fourier coefficients on one period cell of side
    ``2 pi / h``; the double integral uses the midpoint rule on a
    ``grid^3`` mesh with the exact self-cell value on the diagonal, summed
    as an aperiodic convolution.
    """
    c = np.asarray(coeffs, dtype=complex).reshape(lattice.size, 4)
    period = 2.0 * np.pi / lattice.spacing
    a = period / grid
    g = (np.arange(grid) + 0.5) * a - 0.5 * period
    pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    psi = (np.exp(1j * pts @ lattice.points.T) @ c) * period**-1.5
    rho = (np.sum(np.abs(psi) ** 2, axis=1) * a**3).reshape(grid, grid, grid)
    # pair kernel 1/|x - y| on all grid offsets, exact cube self-term at zero offset
    off = np.arange(-(grid - 1), grid) * a
    dist = np.sqrt(off[:, None, None] ** 2 + off[None, :, None] ** 2 + off[None, None, :] ** 2)
    kernel = np.divide(1.0, dist, out=np.zeros_like(dist), where=dist > 0)
    kernel[grid - 1, grid - 1, grid - 1] = _CUBE_SELF / a
    potential = signal.fftconvolve(rho, kernel, mode="same")
    total = np.sum(rho * potential)
    return float(total)


def free_evolution(lattice: MomentumLattice, mat: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i D0 t) Q exp(i D0 t)`` through the diagonal symbol phases."""
    p = lattice.points
    e = free_energy(p)[:, None, None]
    u = np.cos(e * t) * np.eye(4) - 1j * np.sin(e * t) * d0_symbol(p) / e
    n = lattice.size
    blocks = mat.reshape(n, 4, n, 4)
    left = np.einsum("iab,ibjc->iajc", u, blocks)
    out = np.einsum("iajc,jdc->iajd", left, u.conj())
    return out.reshape(4 * n, 4 * n)
