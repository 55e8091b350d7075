"""Radiation spectra, discrete random-field synthesis and relevant-amplitude algebra.

A random field is represented as a finite sum of cosine modes

    E(t) = sum_k w_k r_k cos(omega_k t + phi_k),

with ``w_k = sqrt(2 S(omega_k) d omega_k)``, independent uniform phases and
unit amplitude factors ``r_k`` (Rayleigh-distributed factors are optional).
The ensemble covariance of such a field is ``sum_k S(omega_k) d omega_k
cos(omega_k s)``, the midpoint rule for ``int S(omega) cos(omega s) d omega``.
"""

from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "PhysicalConstants",
    "SpectrumKind",
    "SpectralModel",
    "Spacing",
    "FrequencyGrid",
    "FieldRealization",
    "FieldEnsemble",
    "ModeQuadratures",
    "RelevantAmplitudes",
    "zero_point_density",
    "spectral_density",
    "excess_density",
    "power_spectrum",
    "phase_generator",
    "sample_phases",
    "sample_realization",
    "sample_ensemble",
    "evaluate_field",
    "autocovariance",
    "ensemble_autocovariance",
    "mode_quadratures",
    "mean_mode_energy",
    "build_relevant_amplitudes",
]


def _readonly(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants of the model.

    ``tau`` defaults to ``2 e^2 / (3 m c^3)``; an explicit value must agree
    with that expression to 1e-12 relative.  ``e_charge = 0`` describes an
    uncoupled particle with ``tau = 0``.
    """

    hbar: float = 1.0
    c: float = 1.0
    e_charge: float = 0.01
    m: float = 1.0
    tau: float = None

    def __post_init__(self):
        for name in ("hbar", "c", "m"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise DomainError(f"{name} must be finite and positive, got {val!r}")
        if not (np.isfinite(self.e_charge) and self.e_charge >= 0):
            raise DomainError(f"e_charge must be finite and nonnegative, got {self.e_charge!r}")
        tau = 2.0 * self.e_charge**2 / (3.0 * self.m * self.c**3)
        if self.tau is None:
            object.__setattr__(self, "tau", tau)
        else:
            if not self.tau >= 0:
                raise DomainError(f"tau must be nonnegative, got {self.tau!r}")
            if abs(self.tau - tau) > 1e-12 * tau:
                raise DomainError(
                    f"tau={self.tau!r} inconsistent with 2e^2/(3mc^3)={tau!r}"
                )

    @classmethod
    def from_tau(cls, tau, hbar=1.0, c=1.0, m=1.0):
        """Constants whose charge is chosen to produce the given ``tau``."""
        if not tau > 0:
            raise DomainError(f"tau must be positive, got {tau!r}")
        e = np.sqrt(1.5 * tau * m * c**3)
        return cls(hbar=hbar, c=c, e_charge=float(e), m=m)

    def with_charge(self, e_charge):
        """Copy with a new charge and ``tau`` recomputed."""
        return PhysicalConstants(hbar=self.hbar, c=self.c, e_charge=e_charge, m=self.m)

    def to_dict(self):
        return {"hbar": self.hbar, "c": self.c, "e_charge": self.e_charge,
                "m": self.m, "tau": self.tau}


class SpectrumKind(str, Enum):
    ZERO_POINT = "zero_point"
    PLANCK = "planck"
    RAYLEIGH_JEANS = "rayleigh_jeans"
    CUSTOM = "custom"


@dataclass(frozen=True)
class SpectralModel:
    """Spectral energy density rho(omega) of the background field.

    Parameters
    ----------
    kind : SpectrumKind or str
    beta : float, optional
        Inverse temperature (inverse energy). Required for Planck and
        Rayleigh-Jeans spectra.
    constants : PhysicalConstants
    custom_table : tuple of arrays, optional
        ``(omega, rho)`` samples, linearly interpolated and zero outside.
    """

    kind: SpectrumKind = SpectrumKind.ZERO_POINT
    beta: float = None
    constants: PhysicalConstants = dc_field(default_factory=PhysicalConstants)
    custom_table: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SpectrumKind(self.kind))
        if self.kind in (SpectrumKind.PLANCK, SpectrumKind.RAYLEIGH_JEANS):
            if self.beta is None:
                raise ConfigurationError(f"{self.kind.value} spectrum requires beta")
            if not self.beta > 0:
                raise DomainError(f"beta must be positive, got {self.beta!r}")
        if self.kind is SpectrumKind.CUSTOM:
            if self.custom_table is None:
                raise ConfigurationError("custom spectrum requires custom_table")
            w, r = (np.asarray(a, dtype=float) for a in self.custom_table)
            if w.shape != r.shape or w.ndim != 1 or w.size == 0:
                raise ConfigurationError("custom_table must be two equal-length 1-d arrays")
            if np.any(np.diff(w) <= 0):
                raise ConfigurationError("custom_table frequencies must increase")
            if np.any(r < 0):
                raise DomainError("custom spectral density must be nonnegative")
            object.__setattr__(self, "custom_table", (_readonly(w), _readonly(r)))

    @classmethod
    def zero_point(cls, constants=None):
        return cls(SpectrumKind.ZERO_POINT, constants=constants or PhysicalConstants())

    @classmethod
    def planck(cls, beta, constants=None):
        return cls(SpectrumKind.PLANCK, beta=beta, constants=constants or PhysicalConstants())

    @classmethod
    def rayleigh_jeans(cls, beta, constants=None):
        return cls(SpectrumKind.RAYLEIGH_JEANS, beta=beta,
                   constants=constants or PhysicalConstants())

    @classmethod
    def custom(cls, omega, rho, constants=None):
        return cls(SpectrumKind.CUSTOM, custom_table=(omega, rho),
                   constants=constants or PhysicalConstants())

    def to_dict(self):
        d = {"kind": self.kind.value, "beta": self.beta, "constants": self.constants.to_dict()}
        if self.custom_table is not None:
            d["custom_table"] = [list(map(float, a)) for a in self.custom_table]
        return d


def _check_omega(omega):
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise DomainError("frequency must be nonnegative")
    return w


def zero_point_density(omega, constants):
    """Vacuum spectral density hbar omega^3 / (2 pi^2 c^3)."""
    w = _check_omega(omega)
    return constants.hbar * w**3 / (2.0 * np.pi**2 * constants.c**3)


def _thermal_excess(w, beta, constants):
    # 2 rho0 / (exp(beta hbar w) - 1), with the w -> 0 limit taken explicitly
    x = beta * constants.hbar * w
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = 2.0 * zero_point_density(w, constants) / np.expm1(x)
    return np.where(w > 0, out, 0.0)


def spectral_density(model, omega):
    """Spectral energy density rho(omega) of ``model``.

    Parameters
    ----------
    model : SpectralModel
    omega : float or array_like
        Nonnegative angular frequency.

    Returns
    -------
    float or ndarray
    """
    w = _check_omega(omega)
    k = model.constants
    if model.kind is SpectrumKind.ZERO_POINT:
        out = zero_point_density(w, k)
    elif model.kind is SpectrumKind.PLANCK:
        out = zero_point_density(w, k) + _thermal_excess(w, model.beta, k)
    elif model.kind is SpectrumKind.RAYLEIGH_JEANS:
        out = w**2 / (np.pi**2 * k.c**3 * model.beta)
    else:
        tw, tr = model.custom_table
        if tw.size == 1:
            out = np.full_like(w, tr[0])
        else:
            out = np.interp(w, tw, tr, left=0.0, right=0.0)
    return out if np.ndim(out) else float(out)


def excess_density(model, omega):
    """Spectral density above the vacuum level, rho - rho0."""
    w = _check_omega(omega)
    if model.kind is SpectrumKind.ZERO_POINT:
        out = np.zeros_like(w)
    elif model.kind is SpectrumKind.PLANCK:
        out = _thermal_excess(w, model.beta, model.constants)
    else:
        out = spectral_density(model, w) - zero_point_density(w, model.constants)
    return out if np.ndim(out) else float(out)


def power_spectrum(model, omega):
    """Field power spectrum S(omega) = (4 pi / 3) rho(omega)."""
    return 4.0 * np.pi / 3.0 * spectral_density(model, omega)


class Spacing(str, Enum):
    UNIFORM = "uniform"
    LOGARITHMIC = "logarithmic"


@dataclass(frozen=True)
class FrequencyGrid:
    """Partition of [omega_min, omega_max] into ``n_modes`` cells.

    Mode frequencies are cell midpoints (geometric midpoints for
    logarithmic spacing).
    """

    omega_min: float
    omega_max: float
    n_modes: int
    spacing: Spacing = Spacing.UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "spacing", Spacing(self.spacing))
        if not (0 <= self.omega_min < self.omega_max and np.isfinite(self.omega_max)):
            raise DomainError("need 0 <= omega_min < omega_max < inf")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise DomainError("n_modes must be a positive integer")
        object.__setattr__(self, "n_modes", int(self.n_modes))
        if self.spacing is Spacing.LOGARITHMIC and self.omega_min == 0:
            raise DomainError("logarithmic spacing needs omega_min > 0")

    @classmethod
    def with_spacing(cls, omega_min, omega_max, d_omega):
        """Uniform grid whose cell width does not exceed ``d_omega``."""
        n = int(np.ceil((omega_max - omega_min) / d_omega - 1e-9))
        return cls(omega_min, omega_max, max(n, 1))

    @property
    def edges(self):
        if self.spacing is Spacing.UNIFORM:
            return np.linspace(self.omega_min, self.omega_max, self.n_modes + 1)
        return np.geomspace(self.omega_min, self.omega_max, self.n_modes + 1)

    @property
    def nodes(self):
        e = self.edges
        if self.spacing is Spacing.UNIFORM:
            return 0.5 * (e[1:] + e[:-1])
        return np.sqrt(e[1:] * e[:-1])

    @property
    def widths(self):
        return np.diff(self.edges)

    @property
    def bandwidth(self):
        return self.omega_max - self.omega_min

    def to_dict(self):
        return {"omega_min": self.omega_min, "omega_max": self.omega_max,
                "n_modes": self.n_modes, "spacing": self.spacing.value}


def phase_generator(seed, realization=0):
    """Counter-based generator for one realization.

    Phase ``k`` of realization ``r`` is the ``k``-th draw of a Philox stream
    keyed by ``(seed, r)``, so it does not depend on how many modes are drawn.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(realization),))
    return np.random.Generator(np.random.Philox(ss))


def sample_phases(n_modes, seed, n_realizations=1, start=0):
    """Uniform phases on [-pi, pi), shape ``(n_realizations, n_modes)``."""
    out = np.empty((n_realizations, n_modes))
    for r in range(n_realizations):
        out[r] = phase_generator(seed, start + r).uniform(-np.pi, np.pi, n_modes)
    return out


def _rayleigh_factors(n_modes, seed, realization):
    # independent stream so the phases are unchanged by the amplitude flag
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(realization), 1))
    return np.random.Generator(np.random.Philox(ss)).rayleigh(np.sqrt(0.5), n_modes)


@dataclass(frozen=True, eq=False)
class FieldRealization:
    """One sampled field: mode frequencies, weights, amplitude factors and phases."""

    omegas: np.ndarray
    weights: np.ndarray
    phases: np.ndarray
    amplitudes: np.ndarray
    seed: dict
    grid: FrequencyGrid = None
    spectrum: SpectralModel = None

    def __post_init__(self):
        for name in ("omegas", "weights", "phases", "amplitudes"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        n = self.omegas.shape
        if not (self.weights.shape == self.phases.shape == self.amplitudes.shape == n):
            raise DomainError("mode arrays must share one shape")

    @property
    def effective_weights(self):
        return self.weights * self.amplitudes

    @property
    def n_modes(self):
        return self.omegas.size

    @property
    def modes(self):
        return [
            {"omega_k": float(w), "weight": float(a), "phase": float(p)}
            for w, a, p in zip(self.omegas, self.effective_weights, self.phases)
        ]

    @property
    def constants(self):
        return self.spectrum.constants if self.spectrum is not None else None

    def correlation_time(self):
        """2 pi over the occupied bandwidth (0 for a field with no weight)."""
        if not np.any(self.effective_weights):
            return 0.0
        if self.grid is not None:
            band = self.grid.bandwidth
        else:
            band = float(np.ptp(self.omegas)) if self.omegas.size > 1 else 0.0
        return np.inf if band == 0 else 2.0 * np.pi / band

    def columns(self):
        """Audit columns ``(omega, weight, phase)``."""
        return {"omega": self.omegas, "weight": self.effective_weights, "phase": self.phases}


def sample_realization(model, grid, seed, realization=0, rayleigh=False):
    """Draw one field realization.

    Parameters
    ----------
    model : SpectralModel
    grid : FrequencyGrid
    seed : int
    realization : int
        Index of this realization within an ensemble sharing ``seed``.
    rayleigh : bool
        Multiply each weight by a Rayleigh factor with unit mean square.
    """
    w = grid.nodes
    weights = np.sqrt(2.0 * power_spectrum(model, w) * grid.widths)
    phases = phase_generator(seed, realization).uniform(-np.pi, np.pi, grid.n_modes)
    amps = (_rayleigh_factors(grid.n_modes, seed, realization) if rayleigh
            else np.ones(grid.n_modes))
    return FieldRealization(
        omegas=w, weights=weights, phases=phases, amplitudes=amps,
        seed={"seed": int(seed), "realization": int(realization), "rayleigh": bool(rayleigh)},
        grid=grid, spectrum=model,
    )


def sample_ensemble(model, grid, seed, n_realizations, rayleigh=False):
    """List of realizations ``0 .. n_realizations-1`` sharing ``seed``."""
    return [sample_realization(model, grid, seed, r, rayleigh) for r in range(n_realizations)]


def evaluate_field(realization, t, derivative=0):
    """Field value (or its time derivative) at time(s) ``t``."""
    t = np.asarray(t, dtype=float)
    if realization.n_modes == 0:
        return np.zeros_like(t) if t.ndim else 0.0
    w = realization.omegas
    arg = np.multiply.outer(t, w) + realization.phases + 0.5 * np.pi * derivative
    out = np.cos(arg) @ (realization.effective_weights * w**derivative)
    return out if np.ndim(out) else float(out)


class FieldEnsemble:
    """Many realizations on a common mode set, evaluated together.

    With ``A = w r cos(phi)`` and ``B = w r sin(phi)`` the field of every
    realization at time ``t`` is ``A @ cos(omega t) - B @ sin(omega t)``.
    """

    def __init__(self, realizations):
        if not realizations:
            raise DomainError("empty ensemble")
        self.omegas = realizations[0].omegas
        for r in realizations:
            if not np.array_equal(r.omegas, self.omegas):
                raise DomainError("realizations must share mode frequencies")
        w = np.array([r.effective_weights for r in realizations])
        ph = np.array([r.phases for r in realizations])
        self.realizations = list(realizations)
        self._a = w * np.cos(ph)
        self._b = w * np.sin(ph)

    def __len__(self):
        return len(self.realizations)

    def derivatives(self, t):
        """Return ``(E, dE/dt, d2E/dt2)`` for every realization at scalar ``t``."""
        w = self.omegas
        c = np.cos(w * t)
        s = np.sin(w * t)
        basis = np.stack([c, s, w * s, w * c, w * w * c, w * w * s], axis=1)
        pa = self._a @ basis
        pb = self._b @ basis
        e0 = pa[:, 0] - pb[:, 1]
        e1 = -(pa[:, 2] + pb[:, 3])
        e2 = -(pa[:, 4] - pb[:, 5])
        return e0, e1, e2


def autocovariance(model, grid, lag):
    """Discrete covariance sum_k S(omega_k) d omega_k cos(omega_k lag)."""
    lag = np.asarray(lag, dtype=float)
    sw = power_spectrum(model, grid.nodes) * grid.widths
    out = np.cos(np.multiply.outer(lag, grid.nodes)) @ sw
    return out if np.ndim(out) else float(out)


def ensemble_autocovariance(model, grid, seed, n_realizations, lags, t0=0.0, batch=2000,
                            workers=1, rayleigh=False):
    """Monte-Carlo estimate of <E(t0) E(t0 + lag)> and its standard error.

    Realizations are processed in fixed batches; ``workers`` threads share the
    batches and the partial sums are combined in batch order, so the result
    does not depend on ``workers``.

    Returns
    -------
    mean, stderr : ndarray
        One entry per lag.
    """
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    w = grid.nodes
    weights = np.sqrt(2.0 * power_spectrum(model, w) * grid.widths)
    cos_lag = np.cos(np.outer(w, t0 + lags))
    sin_lag = np.sin(np.outer(w, t0 + lags))

    def partial(start):
        n = min(batch, n_realizations - start)
        ph = sample_phases(grid.n_modes, seed, n, start)
        wt = np.broadcast_to(weights, ph.shape)
        if rayleigh:
            wt = wt * np.array([_rayleigh_factors(grid.n_modes, seed, start + r)
                                for r in range(n)])
        e0 = np.sum(wt * np.cos(w * t0 + ph), axis=1)
        e_lag = (wt * np.cos(ph)) @ cos_lag - (wt * np.sin(ph)) @ sin_lag
        prod = e0[:, None] * e_lag
        return prod.sum(axis=0), (prod**2).sum(axis=0)

    starts = range(0, n_realizations, batch)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(partial, starts))
    else:
        parts = [partial(s0) for s0 in starts]
    total = np.zeros(lags.size)
    total2 = np.zeros(lags.size)
    for a, b in parts:
        total += a
        total2 += b
    mean = total / n_realizations
    var = (total2 / n_realizations - mean**2) * n_realizations / max(n_realizations - 1, 1)
    return mean, np.sqrt(np.maximum(var, 0.0) / n_realizations)


@dataclass(frozen=True, eq=False)
class ModeQuadratures:
    """Momentum-like and position-like quadratures of field modes."""

    p_beta: np.ndarray
    q_beta: np.ndarray
    omega: np.ndarray

    def energy(self):
        return 0.5 * (self.p_beta**2 + self.omega**2 * self.q_beta**2)


def mode_quadratures(omega, phases, constants, amplitudes=1.0):
    """Quadratures of modes carrying mean energy hbar omega / 2.

    ``p = sqrt(2 U) r cos(phi)`` and ``q = sqrt(2 U) r sin(phi) / omega`` with
    ``U = hbar omega / 2``.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("mode frequencies must be positive")
    amp = np.sqrt(constants.hbar * omega) * np.asarray(amplitudes, dtype=float)
    phases = np.asarray(phases, dtype=float)
    return ModeQuadratures(
        p_beta=amp * np.cos(phases),
        q_beta=amp * np.sin(phases) / omega,
        omega=np.broadcast_to(omega, phases.shape).copy(),
    )


def mean_mode_energy(omega, constants):
    """Phase average of (p^2 + omega^2 q^2) / 2, using <cos^2> = <sin^2> = 1/2."""
    omega = np.asarray(omega, dtype=float)
    u = 0.5 * constants.hbar * omega
    mean_p2 = 2.0 * u * 0.5
    mean_q2 = 2.0 * u * 0.5 / omega**2
    return 0.5 * (mean_p2 + omega**2 * mean_q2)


@dataclass(frozen=True, eq=False)
class RelevantAmplitudes:
    """Unit-modulus factors a[alpha, beta] = exp(i (phi_alpha - phi_beta))."""

    state_phases: np.ndarray
    matrix: np.ndarray

    @property
    def size(self):
        return self.state_phases.size


def build_relevant_amplitudes(state_phases):
    """Relevant-amplitude matrix for the given per-state phases."""
    ph = np.atleast_1d(np.asarray(state_phases, dtype=float))
    if ph.size == 0:
        raise DomainError("at least one state phase is required")
    v = np.exp(1j * ph)
    a = np.outer(v, v.conj())
    np.fill_diagonal(a, 1.0)
    return RelevantAmplitudes(_readonly(ph), _readonly(a, complex))
