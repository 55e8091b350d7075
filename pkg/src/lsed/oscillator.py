"""Linear response and stationary moments of the harmonic oscillator.

With the field written as a sum of modes ``w cos(omega t + phi)`` the
oscillator responds mode by mode with

    chi(omega) = -(e / m) / (omega^2 + i tau omega^3 - omega0^2)

per unit field weight, so the stationary variances are the spectral
integrals ``<x^2> = int |chi|^2 S d omega`` and
``<p^2> = m^2 int omega^2 |chi|^2 S d omega``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResolutionError
from .field import PhysicalConstants, power_spectrum

__all__ = [
    "OscillatorSpec",
    "StationaryMoments",
    "response_amplitude",
    "reduced_response_amplitude",
    "stationary_moments",
    "discrete_moments",
    "linewidth",
    "MIN_LINEWIDTH_NODES",
]

MIN_LINEWIDTH_NODES = 50
_GAUSS_ORDER = 24


@dataclass(frozen=True)
class OscillatorSpec:
    omega0: float = 1.0
    constants: PhysicalConstants = None

    def __post_init__(self):
        if not self.omega0 > 0:
            raise DomainError("omega0 must be positive")
        if self.constants is None:
            object.__setattr__(self, "constants", PhysicalConstants())


@dataclass(frozen=True)
class StationaryMoments:
    """Stationary second moments <x^2>, <p^2> and their geometric mean."""

    x2: float
    p2: float

    @property
    def uncertainty_product(self):
        return float(np.sqrt(self.x2 * self.p2))

    def to_dict(self):
        return {"x2": self.x2, "p2": self.p2, "product": self.uncertainty_product}


def linewidth(spec):
    """Resonance linewidth tau omega0^2."""
    return spec.constants.tau * spec.omega0**2


def response_amplitude(spec, omega, field_weight=1.0):
    """Complex response of the oscillator to one field mode.

    Parameters
    ----------
    spec : OscillatorSpec
    omega : float or array_like
        Positive mode frequency.
    field_weight : float or array_like
        Mode amplitude.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("response needs positive frequency")
    k = spec.constants
    out = -(k.e_charge * np.asarray(field_weight) / k.m) / (
        w**2 + 1j * k.tau * w**3 - spec.omega0**2)
    return out if np.ndim(out) else complex(out)


def reduced_response_amplitude(spec, omega, field_weight=1.0):
    """Response of the order-reduced equation of motion.

    ``m x'' = -m omega0^2 (x + tau x') + e (E + tau E')`` gives
    ``x = (e / m) (1 - i omega tau) / (omega0^2 - omega^2 - i tau omega omega0^2)``
    for a mode ``exp(-i omega t)``.  It differs from the exact response at
    order tau away from resonance.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("response needs positive frequency")
    k = spec.constants
    w0 = spec.omega0
    out = (k.e_charge * np.asarray(field_weight) / k.m) * (1 - 1j * w * k.tau) / (
        w0**2 - w**2 - 1j * k.tau * w * w0**2)
    return out if np.ndim(out) else complex(out)


def _response(kind):
    if kind == "exact":
        return response_amplitude
    if kind == "reduced":
        return reduced_response_amplitude
    raise DomainError(f"unknown response kind {kind!r}")


def _moments_from(spec, omega, weights, model, response):
    chi2 = np.abs(_response(response)(spec, omega)) ** 2
    s = power_spectrum(model, omega) * weights
    m = spec.constants.m
    return StationaryMoments(
        x2=float(np.sum(chi2 * s)),
        p2=float(m**2 * np.sum(omega**2 * chi2 * s)),
    )


def discrete_moments(spec, model, grid, response="exact"):
    """Moments as the plain sum over grid modes.

    This is the exact ensemble expectation for a field sampled on ``grid``,
    and the natural reference for Monte-Carlo runs on that grid.
    """
    return _moments_from(spec, grid.nodes, grid.widths, model, response)


def _panel_edges(lo, hi, center, width):
    # fine panels near the resonance, geometric growth away from it
    steps = [0.0, 0.25, 0.5, 1.0]
    while steps[-1] * width < max(center - lo, hi - center):
        steps.append(steps[-1] * 1.5)
    steps = np.array(steps) * width
    pts = np.concatenate([center - steps[::-1], center + steps[1:]])
    pts = pts[(pts > lo) & (pts < hi)]
    return np.unique(np.concatenate([[lo, hi], pts]))


def _gauss_nodes(edges, order=_GAUSS_ORDER):
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x + 0.5 * (b + a)
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def _resolution_check(spec, grid):
    g = linewidth(spec)
    nodes = grid.nodes
    inside = np.count_nonzero(np.abs(nodes - spec.omega0) <= 5 * g)
    if inside < MIN_LINEWIDTH_NODES:
        suggested = int(np.ceil(MIN_LINEWIDTH_NODES * grid.bandwidth / (10 * g)))
        raise ResolutionError(
            f"only {inside} grid nodes within 5 linewidths of the resonance "
            f"(need {MIN_LINEWIDTH_NODES}); use at least {suggested} uniform modes",
            suggested_n_modes=suggested,
        )


def stationary_moments(spec, model, grid, refine=True, response="exact"):
    """Stationary <x^2> and <p^2> of the oscillator in the field ``model``.

    Parameters
    ----------
    spec : OscillatorSpec
    model : SpectralModel
    grid : FrequencyGrid
        Integration range ``[omega_min, omega_max]``.  It should span at
        least ``[omega0 / 10, 20 omega0]``.
    refine : bool
        If True (default) the spectral integral is evaluated by composite
        Gauss-Legendre quadrature on panels graded around the resonance, so
        the grid only sets the limits.  If False the grid modes are summed
        directly, which requires at least 50 nodes within five linewidths of
        ``omega0``.
    response : {"exact", "reduced"}

    Raises
    ------
    ResolutionError
        ``refine=False`` and the grid is too coarse near resonance.
    """
    if not refine:
        _resolution_check(spec, grid)
        return discrete_moments(spec, model, grid, response)
    lo = max(grid.omega_min, 1e-12 * spec.omega0)
    edges = _panel_edges(lo, grid.omega_max, spec.omega0, 0.5 * linewidth(spec))
    nodes, weights = _gauss_nodes(edges)
    return _moments_from(spec, nodes, weights, model, response)
