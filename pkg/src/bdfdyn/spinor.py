"""4x4 Dirac algebra in the standard representation."""

from __future__ import annotations

import numpy as np

__all__ = ["PAULI", "dirac_matrices", "d0_symbol", "p0_symbol", "free_energy"]

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)


def dirac_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(alpha_1, alpha_2, alpha_3, beta)``.

    ``beta = diag(1, 1, -1, -1)``; with the identity in its place the free
    operator would have no spectral gap and ``beta`` would not be traceless.
    """
    alphas = tuple(np.block([[_Z2, s], [s, _Z2]]) for s in PAULI)
    beta = np.block([[_I2, _Z2], [_Z2, -_I2]])
    return (*alphas, beta)


_ALPHA1, _ALPHA2, _ALPHA3, _BETA = dirac_matrices()
_ALPHA = np.stack([_ALPHA1, _ALPHA2, _ALPHA3])


def free_energy(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return np.sqrt(1.0 + np.sum(p * p, axis=-1))


def d0_symbol(p) -> np.ndarray:
    """``alpha . p + beta``; accepts a single 3-vector or an ``(..., 3)`` array."""
    p = np.asarray(p, dtype=float)
    return np.einsum("...j,jab->...ab", p, _ALPHA) + _BETA


def p0_symbol(p) -> np.ndarray:
    """Projector onto the negative-energy eigenspace of ``d0_symbol(p)``."""
    p = np.asarray(p, dtype=float)
    e = free_energy(p)[..., None, None]
    return 0.5 * (np.eye(4) - d0_symbol(p) / e)
