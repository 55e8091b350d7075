"""Polynomial external forces f(x) = sum_n k_n x**n, n >= 1."""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError

__all__ = ["ForceModel"]


@dataclass(frozen=True)
class ForceModel:
    """Polynomial force and its potential.

    Parameters
    ----------
    coeffs : sequence of float
        ``coeffs[j]`` is ``k_{j+1}``, the coefficient of ``x**(j+1)``.
        There is no constant term.
    potential_offset : float
        Added to ``V(x) = -sum_n k_n x**(n+1) / (n+1)``.

    The potential must be bounded below: either the force vanishes
    identically or the highest-order term of ``V`` has even degree and a
    positive coefficient.
    """

    coeffs: tuple = ()
    potential_offset: float = 0.0

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if not np.all(np.isfinite(k)):
            raise DomainError("force coefficients must be finite")
        nz = np.flatnonzero(k)
        k = k[: nz[-1] + 1] if nz.size else k[:0]
        object.__setattr__(self, "coeffs", tuple(float(c) for c in k))
        if k.size and not ((k.size % 2 == 1) and k[-1] < 0):
            raise DomainError(
                "potential is not bounded below: leading force term must be an odd "
                "power with a negative coefficient"
            )

    @classmethod
    def harmonic(cls, omega0=1.0, m=1.0):
        return cls((-m * omega0**2,))

    @classmethod
    def quartic(cls, lam, omega0=1.0, m=1.0):
        """f = -m omega0^2 x - lam x^3."""
        return cls((-m * omega0**2, 0.0, -lam))

    @property
    def is_free(self):
        return len(self.coeffs) == 0

    @property
    def degree(self):
        return len(self.coeffs)

    @property
    def k(self):
        """Coefficients as an array, ``k[j] = k_{j+1}``."""
        return np.array(self.coeffs, dtype=float)

    def poly(self):
        """Power-series coefficients of f, lowest order first (constant included)."""
        return np.concatenate([[0.0], self.k])

    def force(self, x):
        return P.polyval(x, self.poly())

    def derivative(self, x, order=1):
        """``order``-th derivative of the force at ``x``."""
        c = P.polyder(self.poly(), order) if self.degree >= order else [0.0]
        return P.polyval(x, c)

    def potential_poly(self):
        return P.polyint(-self.poly(), k=self.potential_offset)

    def potential(self, x):
        return P.polyval(x, self.potential_poly())

    def harmonic_frequency(self, m=1.0):
        """sqrt(-k_1 / m), the small-oscillation frequency about x = 0."""
        k1 = self.coeffs[0] if self.coeffs else 0.0
        if not k1 < 0:
            raise DomainError("force has no restoring linear term")
        return float(np.sqrt(-k1 / m))

    def scaled(self, s):
        """Force with the nonlinear (n >= 2) coefficients multiplied by ``s``."""
        k = self.k.copy()
        k[1:] *= s
        return ForceModel(tuple(k), self.potential_offset)

    def to_dict(self):
        return {"coeffs": list(self.coeffs), "potential_offset": self.potential_offset}
