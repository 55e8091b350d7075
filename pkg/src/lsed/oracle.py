"""Independent reference results.

Hamiltonian diagonalization in a harmonic-oscillator basis and adaptive
quadrature wrappers.  Nothing here depends on the self-consistent solver.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError, TruncationError

__all__ = ["BasisSpec", "Eigensystem", "diagonalize", "quad_integrate", "fourier_integrate"]


@dataclass(frozen=True)
class BasisSpec:
    """Harmonic basis of ``size`` functions with frequency ``scale``."""

    size: int = 80
    scale: float = 1.0

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 4:
            raise DomainError("basis size must be an integer >= 4")
        if not self.scale > 0:
            raise DomainError("basis scale must be positive")


@dataclass(frozen=True, eq=False)
class Eigensystem:
    """Sorted eigenvalues and position matrix elements in the eigenbasis."""

    eigenvalues: np.ndarray
    x: np.ndarray
    basis_size: int

    @property
    def strengths(self):
        return np.abs(self.x) ** 2


def _eigensystem(coeffs, offset, size, scale, hbar, m):
    # build x in a padded basis so powers of x are exact on the kept block
    big = size + len(coeffs) + 2
    n = np.arange(1, big)
    lower = np.sqrt(n)
    x = np.sqrt(hbar / (2 * m * scale)) * (np.diag(lower, 1) + np.diag(lower, -1))
    p2 = -(hbar * m * scale / 2) * (
        np.diag(np.sqrt(n[:-1] * n[1:]), 2) + np.diag(np.sqrt(n[:-1] * n[1:]), -2)
        - np.diag(2 * np.arange(big) + 1.0)
    )
    V = offset * np.eye(big)
    xp = np.eye(big)
    for k, kn in enumerate(coeffs, start=1):
        xp = xp @ x
        V = V - kn * (xp @ x) / (k + 1)
    H = (p2 / (2 * m) + V)[:size, :size]
    E, U = np.linalg.eigh(H)
    X = U.T @ x[:size, :size] @ U
    return E, X


def diagonalize(force, basis, constants, n_levels=10, tol=1e-10, max_doublings=4):
    """Eigenvalues and position matrix of p^2/2m + V(x).

    The basis is doubled until the lowest ``n_levels`` eigenvalues change by
    less than ``tol`` (relative to max(1, |E|)).

    Returns
    -------
    Eigensystem
        Levels and matrix elements from the converged (larger) basis,
        truncated to ``basis.size``.
    """
    if force.is_free:
        raise DomainError("potential is not confining")
    coeffs = force.coeffs
    size = int(basis.size)
    n_levels = min(n_levels, size)
    E, X = _eigensystem(coeffs, force.potential_offset, size, basis.scale,
                        constants.hbar, constants.m)
    for _ in range(max_doublings):
        E2, X2 = _eigensystem(coeffs, force.potential_offset, 2 * size, basis.scale,
                              constants.hbar, constants.m)
        change = np.abs(E2[:n_levels] - E[:n_levels]) / np.maximum(1.0, np.abs(E2[:n_levels]))
        if change.max() <= tol:
            # fix the sign of each eigenvector so that x_{a,a+1} >= 0
            X2 = X2[:size, :size]
            s = np.ones(size)
            for a in range(size - 1):
                s[a + 1] = s[a] * (-1.0 if X2[a, a + 1] < 0 else 1.0)
            return Eigensystem(E2[:size], s[:, None] * X2 * s[None, :], 2 * size)
        size *= 2
        E, X = E2, X2
    raise TruncationError(
        f"lowest {n_levels} levels not converged to {tol} after {max_doublings} basis doublings"
    )


def quad_integrate(f, domain, tol=1e-10, points=None, limit=500):
    """Adaptive quadrature of ``f`` over ``domain = (a, b)`` (b may be inf).

    Raises
    ------
    QuadratureError
        The error estimate exceeds ``tol`` (absolute, or relative to the value).
    """
    a, b = domain
    kw = {"limit": limit, "epsabs": tol, "epsrel": tol}
    if points is not None and np.isfinite(b):
        kw["points"] = points
    with warnings.catch_warnings():
        # the error estimate is checked below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, **kw)
    if not np.isfinite(val) or err > max(tol, tol * abs(val)) * 10:
        raise QuadratureError(f"quadrature error estimate {err:.3e} exceeds tolerance {tol}")
    return val


def fourier_integrate(f, omega, kind="sin", tol=1e-10, limlst=200):
    """int_0^inf f(s) sin(omega s) ds (or cos), by QAWF."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, 0.0, np.inf, weight=kind, wvar=omega,
                                  epsabs=tol, limlst=limlst)
    if not np.isfinite(val) or err > max(tol, tol * abs(val)) * 10:
        raise QuadratureError(f"Fourier quadrature error {err:.3e} exceeds tolerance {tol}")
    return val
