"""Energy balance between a bound charge and the background field.

For a state alpha with transition frequencies omega_ab = Omega_a - Omega_b
and strengths |x_ab|^2, the power absorbed from a field with density rho is

    P_abs = -(4 pi^2 e^2 / 3 hbar) sum_b omega_ab rho(|omega_ab|) |x_ab|^2,

and the Larmor power radiated is (2 e^2 / 3 c^3) sum_b omega_ab^4 |x_ab|^2.
For the ground state (all omega_ab < 0) the two agree term by term exactly
when rho = hbar omega^3 / (2 pi^2 c^3).
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (AmbiguityError, DegenerateSpectrumError, DomainError,
                     SingularResponseError)
from .field import (PhysicalConstants, excess_density, spectral_density,
                    zero_point_density)

__all__ = [
    "RateReport",
    "BalanceResidual",
    "radiative_correction",
    "absorbed_power",
    "larmor_power",
    "ground_state_balance",
    "detailed_balance_residual",
    "solve_vacuum_spectrum",
    "integral_of_motion_balance",
    "transition_rates",
    "equilibrium_spectrum",
    "printed_equilibrium_form",
    "two_level_equilibrium_check",
]


def _transitions(X, state, include_zero=False):
    """Frequencies and strengths from ``state`` to the other interior states."""
    n = X.interior
    if not 0 <= state < n:
        raise DomainError(f"state {state} outside the interior block of size {n}")
    idx = np.array([b for b in range(n) if b != state], dtype=int)
    w = X.frequencies[state, idx]
    s = X.strengths()[state, idx]
    if not include_zero:
        keep = w != 0
        w, s = w[keep], s[keep]
    return w, s


def _rate_prefactor(k):
    return 4.0 * np.pi**2 * k.e_charge**2 / (3.0 * k.hbar)


@dataclass(frozen=True)
class RateReport:
    """Absorption and emission powers split into induced and spontaneous parts."""

    W_ab_induced: float
    W_em_induced: float
    W_em_spontaneous: float
    W_ab_spontaneous: float = 0.0

    @property
    def W_ab(self):
        return self.W_ab_induced + self.W_ab_spontaneous

    @property
    def W_em(self):
        return self.W_em_induced + self.W_em_spontaneous

    def to_dict(self):
        return {"W_ab_induced": self.W_ab_induced, "W_em_induced": self.W_em_induced,
                "W_em_spontaneous": self.W_em_spontaneous,
                "W_ab_spontaneous": self.W_ab_spontaneous,
                "W_ab": self.W_ab, "W_em": self.W_em}


@dataclass(frozen=True)
class BalanceResidual:
    """Per-frequency detailed-balance brackets and their weighted total.

    ``per_frequency`` holds ``{"omega": omega_ab, "bracket": value,
    "strength": |x_ab|^2}``; ``total`` is the sum of
    ``bracket |omega| |x_ab|^2 (2 e^2 / 3 c^3)``.
    """

    per_frequency: tuple
    total: float

    def max_abs_bracket(self, relative=False):
        """Largest |bracket|, optionally divided by max(1, |omega|^3)."""
        if not self.per_frequency:
            return 0.0
        b = np.array([p["bracket"] for p in self.per_frequency])
        if relative:
            w = np.array([p["omega"] for p in self.per_frequency])
            b = b / np.maximum(1.0, np.abs(w) ** 3)
        return float(np.abs(b).max())

    def to_dict(self):
        return {"per_frequency": list(self.per_frequency), "total": self.total}


def _mode_integral(omega, omega_t, theta, epsilon):
    # int_0^inf exp(-eps s) cos(theta - omega s) sin(omega_t s) ds
    if epsilon == 0:
        den = omega**2 - omega_t**2
        if np.any(den == 0):
            raise SingularResponseError("field mode coincides with a transition frequency")
        return -omega_t * np.cos(theta) / den
    e2 = epsilon**2
    sp, sm = omega_t + omega, omega_t - omega
    c = 0.5 * (sp / (sp**2 + e2) + sm / (sm**2 + e2))
    s = 0.5 * (epsilon / (e2 + (omega - omega_t) ** 2) - epsilon / (e2 + (omega + omega_t) ** 2))
    return c * np.cos(theta) + s * np.sin(theta)


def radiative_correction(X, state, realization, t, epsilon=0.0, constants=None):
    """First-order displacement of state ``state`` induced by the field.

    ``dx(t) = -(2 e / hbar) sum_b |x_ab|^2 int_0^inf E(t - s) sin(omega_ab s) ds``.
    Each cosine mode is integrated in closed form.  ``epsilon = 0`` is the
    principal value of the adiabatic limit; ``epsilon > 0`` keeps the
    convergence factor exp(-epsilon s).
    """
    k = constants or realization.spectrum.constants
    w_t, s = _transitions(X, state)
    t = np.asarray(t, dtype=float)
    om = realization.omegas
    amp = realization.effective_weights
    theta = np.multiply.outer(t, om) + realization.phases
    total = np.zeros(t.shape)
    for wt, st in zip(w_t, s):
        if st == 0:
            continue
        total = total + st * (_mode_integral(om, wt, theta, epsilon) @ amp)
    out = -2.0 * k.e_charge / k.hbar * total
    return out if np.ndim(out) else float(out)


def absorbed_power(X, state, model):
    """-(4 pi^2 e^2 / 3 hbar) sum_b omega_ab rho(|omega_ab|) |x_ab|^2."""
    w, s = _transitions(X, state)
    rho = spectral_density(model, np.abs(w))
    return float(-_rate_prefactor(model.constants) * np.sum(w * rho * s))


def larmor_power(X, state, constants):
    """(2 e^2 / 3 c^3) sum_b omega_ab^4 |x_ab|^2."""
    w, s = _transitions(X, state)
    return float(2.0 * constants.e_charge**2 / (3.0 * constants.c**3) * np.sum(w**4 * s))


def ground_state_balance(X, state, model):
    """Relative imbalance (absorbed - radiated) / radiated."""
    rad = larmor_power(X, state, model.constants)
    return (absorbed_power(X, state, model) - rad) / rad


def _check_nondegenerate(w):
    u = np.sort(w)
    if u.size > 1 and np.any(np.diff(u) <= 1e-12 * np.abs(u).max()):
        raise DegenerateSpectrumError("transition frequencies of this state are degenerate")


def detailed_balance_residual(X, state, model):
    """Per-frequency detailed-balance brackets for a ground state.

    The bracket is ``-|omega|^3 + (2 pi^2 c^3 / hbar) rho(|omega|)``.

    Raises
    ------
    DomainError
        ``state`` has upward and downward transitions (not a ground state).
    """
    k = model.constants
    w, s = _transitions(X, state)
    if np.any(w > 0):
        raise DomainError(
            "the strict per-frequency form applies to the ground state only; "
            "use transition_rates for excited states"
        )
    _check_nondegenerate(w)
    aw = np.abs(w)
    bracket = -aw**3 + (2.0 * np.pi**2 * k.c**3 / k.hbar) * spectral_density(model, aw)
    pref = 2.0 * k.e_charge**2 / (3.0 * k.c**3)
    per = tuple({"omega": float(a), "bracket": float(b), "strength": float(c)}
                for a, b, c in zip(w, bracket, s))
    return BalanceResidual(per, float(pref * np.sum(bracket * aw * s)))


def solve_vacuum_spectrum(frequencies, constants=None, method="analytic"):
    """Spectral density that zeroes the detailed-balance bracket at each frequency.

    ``method="analytic"`` returns hbar omega^3 / (2 pi^2 c^3);
    ``method="bisection"`` finds the root of the bracket with Brent's method.
    """
    k = constants or PhysicalConstants()
    w = np.atleast_1d(np.asarray(frequencies, dtype=float))
    if np.any(w <= 0):
        raise DomainError("frequencies must be positive")
    if method == "analytic":
        out = k.hbar * w**3 / (2.0 * np.pi**2 * k.c**3)
    elif method == "bisection":
        g = 2.0 * np.pi**2 * k.c**3 / k.hbar
        out = np.array([
            brentq(lambda r, om=om: -om**3 + g * r, 0.0, 2.0 * om**3 / g,
                   xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
            for om in w
        ])
    else:
        raise DomainError(f"unknown method {method!r}")
    return out


def integral_of_motion_balance(xi, X, state, model):
    """Equilibrium residual of an integral of motion with values ``xi``.

    ``sum_b [-(hbar / 2 pi^2 c^3) omega_ab^3 + rho(omega_ab)] (xi_a - xi_b) |x_ab|^2``,
    with rho continued to negative frequency as an odd function, so the
    bracket equals ``sign(omega) (rho(|omega|) - rho0(|omega|))``.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape[0] < X.interior:
        raise DomainError("need one xi value per interior state")
    k = model.constants
    n = X.interior
    idx = np.array([b for b in range(n) if b != state], dtype=int)
    w = X.frequencies[state, idx]
    s = X.strengths()[state, idx]
    aw = np.abs(w)
    rho_odd = np.sign(w) * spectral_density(model, aw)
    bracket = -k.hbar * w**3 / (2.0 * np.pi**2 * k.c**3) + rho_odd
    return float(np.sum(bracket * (xi[state] - xi[idx]) * s))


def transition_rates(X, state, model):
    """Induced and spontaneous absorption/emission powers of ``state``.

    Downward transitions (omega_ab > 0) emit, upward ones absorb.  Only the
    density above the vacuum level, rho_e = rho - rho0, induces transitions;
    spontaneous emission carries 2 rho0 and spontaneous absorption is zero.
    """
    k = model.constants
    w, s = _transitions(X, state)
    aw = np.abs(w)
    rho_e = np.atleast_1d(excess_density(model, aw))
    if np.any(rho_e < -1e-12 * np.maximum(zero_point_density(aw, k), 1e-300)):
        raise DomainError("field density below the vacuum level (rho_e < 0)")
    rho_e = np.maximum(rho_e, 0.0)
    rho0 = zero_point_density(aw, k)
    c = _rate_prefactor(k)
    up, down = w < 0, w > 0
    return RateReport(
        W_ab_induced=float(c * np.sum(aw[up] * rho_e[up] * s[up])),
        W_em_induced=float(c * np.sum(aw[down] * rho_e[down] * s[down])),
        W_em_spontaneous=float(2.0 * c * np.sum(aw[down] * rho0[down] * s[down])),
        W_ab_spontaneous=0.0,
    )


def equilibrium_spectrum(omega, beta, constants=None):
    """Density that balances induced absorption against total emission.

    Solving ``exp(-beta E_a) rho_e = exp(-beta E_b) (rho_e + 2 rho0)`` with
    ``E_b - E_a = hbar omega`` gives ``rho_e = 2 rho0 / (exp(beta hbar omega) - 1)``,
    so ``rho = rho0 coth(beta hbar omega / 2)``.  ``beta = inf`` gives rho0.
    """
    k = constants or PhysicalConstants()
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("omega must be positive")
    if not beta > 0:
        raise DomainError("beta must be positive")
    rho0 = zero_point_density(w, k)
    with np.errstate(over="ignore"):
        rho_e = 2.0 * rho0 / np.expm1(beta * k.hbar * w)
    out = rho0 + rho_e
    return out if np.ndim(out) else float(out)


def printed_equilibrium_form(omega, beta, constants=None):
    """rho0 cosh(beta hbar omega / 2), kept only for comparison with the coth solution."""
    k = constants or PhysicalConstants()
    w = np.asarray(omega, dtype=float)
    with np.errstate(over="ignore"):
        out = zero_point_density(w, k) * np.cosh(0.5 * beta * k.hbar * w)
    return out if np.ndim(out) else float(out)


def two_level_equilibrium_check(X, beta, model):
    """Einstein balance residual for a system with one transition frequency.

    Returns ``exp(-beta E_lo) rho_e |x|^2 - exp(-beta E_hi) (rho_e + 2 rho0) |x|^2``
    with energies ``hbar Omega`` measured from the lower level.  Negative
    values mean net emission.

    Raises
    ------
    AmbiguityError
        The active transitions involve more than one frequency.
    """
    k = model.constants
    strengths = X.strengths()
    n = X.size
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if strengths[a, b] > 0]
    if not pairs:
        raise AmbiguityError("no active transition")
    freqs = np.array([abs(X.frequencies[a, b]) for a, b in pairs])
    if np.ptp(freqs) > 1e-12 * freqs.max() or len(pairs) > 1:
        raise AmbiguityError(
            f"{len(pairs)} active transitions; the two-level check needs exactly one"
        )
    a, b = pairs[0]
    lo, hi = (a, b) if X.omegas[a] < X.omegas[b] else (b, a)
    w = X.omegas[hi] - X.omegas[lo]
    x2 = strengths[lo, hi]
    rho_e = excess_density(model, w)
    rho0 = zero_point_density(w, k)
    boltz_hi = np.exp(-beta * k.hbar * w)
    return float(rho_e * x2 - boltz_hi * (rho_e + 2.0 * rho0) * x2)
