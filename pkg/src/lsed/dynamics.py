"""Trajectories of a radiating charge in a sampled field, and energy balance.

The third-order radiation-reaction equation is reduced to leading order in
tau (Landau-Lifshitz form):

    m a = f(x) + tau (f'(x) v + e dE/dt) + e E(t).

Along solutions of this equation the Hamiltonian with Schott term,
H = m v^2 / 2 + V(x) - m tau v a, obeys

    dH/dt = e v E - m tau a^2 - tau^2 v (f''(x) v^2 + f'(x) a + e d2E/dt2),

so the absorbed/radiated balance holds up to the last, second-order term.
The integrals of the three power terms are carried as extra ODE components
so that window averages are as accurate as the integration itself.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (DomainError, EscapeError, InsufficientWindowError,
                     IntegrationError, SingularResponseError)
from .field import FieldEnsemble

__all__ = [
    "ParticleState",
    "Trajectory",
    "BalanceReport",
    "integrate",
    "integrate_ensemble",
    "hamiltonian",
    "power_balance",
    "free_particle_response",
    "relaxation_time",
]

# per-realization ODE components
_X, _V, _RAD, _ABS, _CORR, _X2, _V2 = range(7)
_NCOMP = 7


@dataclass(frozen=True)
class ParticleState:
    x: float = 0.0
    v: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not all(np.isfinite([self.x, self.v, self.t])):
            raise DomainError("particle state must be finite")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution with cumulative energy integrals.

    ``radiated``, ``absorbed`` and ``correction`` are the integrals from the
    start of m tau a^2, e v E and the second-order reduction term;
    ``int_x2`` and ``int_v2`` integrate x^2 and v^2.
    """

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray
    E: np.ndarray
    H: np.ndarray
    radiated: np.ndarray
    absorbed: np.ndarray
    correction: np.ndarray
    int_x2: np.ndarray
    int_v2: np.ndarray
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        for name in ("t", "x", "v", "a", "E", "H", "radiated", "absorbed",
                     "correction", "int_x2", "int_v2"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(np.diff(self.t) <= 0):
            raise DomainError("trajectory times must increase strictly")

    @property
    def samples(self):
        return [
            {"t": t, "x": x, "v": v, "a": a, "E_field": e}
            for t, x, v, a, e in zip(self.t, self.x, self.v, self.a, self.E)
        ]

    def columns(self):
        return {"t": self.t, "x": self.x, "v": self.v, "a": self.a, "E": self.E}

    def window_index(self, t0, t1):
        """Sample indices nearest to the window ends."""
        i0 = int(np.argmin(np.abs(self.t - t0)))
        i1 = int(np.argmin(np.abs(self.t - t1)))
        return i0, i1

    def time_average(self, name, t0, t1):
        """Window average of x^2 or v^2 (``name`` in {"x2", "v2"}) from the exact integrals."""
        q = {"x2": self.int_x2, "v2": self.int_v2}[name]
        i0, i1 = self.window_index(t0, t1)
        return (q[i1] - q[i0]) / (self.t[i1] - self.t[i0])


@dataclass(frozen=True)
class BalanceReport:
    """Window-averaged power balance.

    ``identity_residual`` is ``dH_dt - (absorbed - radiated - correction)``,
    which vanishes up to integration error; ``correction`` is the average of
    the second-order reduction term.
    """

    radiated_power: float
    absorbed_power: float
    dH_dt: float
    correction: float
    window: tuple
    threshold: float = 0.05

    @property
    def identity_residual(self):
        return self.dH_dt - (self.absorbed_power - self.radiated_power - self.correction)

    @property
    def balance_residual(self):
        """``dH_dt + radiated - absorbed``, the balance without the reduction term."""
        return self.dH_dt + self.radiated_power - self.absorbed_power

    @property
    def quantum_regime(self):
        if self.radiated_power <= 0:
            return False
        rel = abs(self.radiated_power - self.absorbed_power) / self.radiated_power
        return bool(rel < self.threshold)

    def to_dict(self):
        return {
            "radiated_power": self.radiated_power,
            "absorbed_power": self.absorbed_power,
            "dH_dt": self.dH_dt,
            "correction": self.correction,
            "identity_residual": self.identity_residual,
            "window": list(self.window),
            "threshold": self.threshold,
            "quantum_regime": self.quantum_regime,
        }


def hamiltonian(state, accel, force, constants):
    """m v^2 / 2 + V(x) - m tau v a."""
    m, tau = constants.m, constants.tau
    return 0.5 * m * state.v**2 + force.potential(state.x) - m * tau * state.v * accel


def _hamiltonian_arrays(x, v, a, force, constants):
    m, tau = constants.m, constants.tau
    return 0.5 * m * v**2 + force.potential(x) - m * tau * v * a


def relaxation_time(omega0, constants):
    """1 / (tau omega0^2), the radiative relaxation time of an oscillator."""
    return 1.0 / (constants.tau * omega0**2)


def _length_scale(force, realizations, constants):
    try:
        w = force.harmonic_frequency(constants.m)
    except DomainError:
        w = max((float(r.omegas.max()) for r in realizations if r.n_modes), default=1.0)
    return np.sqrt(constants.hbar / (constants.m * w))


class _RHS:
    def __init__(self, force, ensemble, constants, R):
        self.force = force
        self.ens = ensemble
        self.R = R
        self.m = constants.m
        self.tau = constants.tau
        self.e = constants.e_charge
        self.zero = np.zeros(R)

    def field(self, t):
        if self.ens is None:
            return self.zero, self.zero, self.zero
        return self.ens.derivatives(t)

    def accel(self, t, x, v):
        e0, e1, e2 = self.field(t)
        f = self.force.force(x)
        f1 = self.force.derivative(x, 1)
        a = (f + self.tau * (f1 * v + self.e * e1) + self.e * e0) / self.m
        return a, f1, e0, e2

    def __call__(self, t, y):
        R = self.R
        x = y[:R]
        v = y[R:2 * R]
        a, f1, e0, e2 = self.accel(t, x, v)
        f2 = self.force.derivative(x, 2)
        out = np.empty_like(y)
        out[:R] = v
        out[R:2 * R] = a
        out[2 * R:3 * R] = self.m * self.tau * a * a
        out[3 * R:4 * R] = self.e * v * e0
        out[4 * R:5 * R] = self.tau**2 * v * (f2 * v * v + f1 * a + self.e * e2)
        out[5 * R:6 * R] = x * x
        out[6 * R:7 * R] = v * v
        return out


def integrate_ensemble(force, realizations, init, t_end, constants=None, *,
                       rtol=1e-9, atol=1e-12, method="DOP853", t_eval=None,
                       n_samples=1001, escape_bound=None, max_step=np.inf):
    """Integrate one trajectory per realization as a single stacked ODE.

    Parameters
    ----------
    force : ForceModel
    realizations : list of FieldRealization, or None
        ``None`` (or an empty list) means no field; then ``constants`` is
        required and a single trajectory is returned.
    init : ParticleState or list of ParticleState
    t_end : float
    constants : PhysicalConstants, optional
        Defaults to the constants of the realizations' spectrum.
    t_eval : array_like, optional
        Sample times; default ``n_samples`` equally spaced points.
    escape_bound : float, optional
        Largest allowed |x|; default 1e3 times the larger of the initial
        amplitude and the natural length sqrt(hbar / m omega).

    Returns
    -------
    list of Trajectory

    Raises
    ------
    EscapeError, IntegrationError
    """
    realizations = list(realizations or [])
    if constants is None:
        if not realizations or realizations[0].spectrum is None:
            raise DomainError("constants are required when no field is given")
        constants = realizations[0].spectrum.constants
    R = max(len(realizations), 1)
    inits = list(init) if isinstance(init, (list, tuple)) else [init] * R
    if len(inits) != R:
        raise DomainError("need one initial state per realization")
    t0 = inits[0].t
    if any(s.t != t0 for s in inits):
        raise DomainError("initial states must share a start time")
    if not t_end > t0:
        raise DomainError("t_end must exceed the initial time")

    ens = FieldEnsemble(realizations) if realizations else None
    rhs = _RHS(force, ens, constants, R)
    y0 = np.zeros(_NCOMP * R)
    y0[:R] = [s.x for s in inits]
    y0[R:2 * R] = [s.v for s in inits]

    if escape_bound is None:
        scale = max(np.abs(y0[:R]).max(), _length_scale(force, realizations, constants))
        escape_bound = 1e3 * scale

    def escape(t, y):
        return escape_bound - np.abs(y[:R]).max()
    escape.terminal = True

    if t_eval is None:
        t_eval = np.linspace(t0, t_end, n_samples)
    t_eval = np.asarray(t_eval, dtype=float)

    sol = solve_ivp(rhs, (t0, t_end), y0, method=method, t_eval=t_eval, rtol=rtol,
                    atol=atol, events=escape, max_step=max_step)
    if sol.status == 1:
        t_esc = float(sol.t_events[0][0])
        raise EscapeError(f"trajectory left |x| < {escape_bound:.3g} at t = {t_esc:.6g}")
    if sol.status != 0:
        raise IntegrationError(f"integration failed: {sol.message}")

    y = sol.y.reshape(_NCOMP, R, -1)
    ts = sol.t
    meta = {
        "method": method, "rtol": rtol, "atol": atol, "t_end": float(t_end),
        "nfev": int(sol.nfev), "escape_bound": float(escape_bound),
        "constants": constants.to_dict(), "force": force.to_dict(),
    }
    # accelerations and fields at the samples, from the reduced equation
    acc = np.empty((R, ts.size))
    efield = np.empty((R, ts.size))
    for j, t in enumerate(ts):
        a, _, e0, _ = rhs.accel(t, y[_X, :, j], y[_V, :, j])
        acc[:, j] = a
        efield[:, j] = e0
    out = []
    for r in range(R):
        m = dict(meta)
        if realizations:
            m["seed"] = dict(realizations[r].seed)
        x, v, a = y[_X, r], y[_V, r], acc[r]
        out.append(Trajectory(
            t=ts, x=x, v=v, a=a, E=efield[r],
            H=_hamiltonian_arrays(x, v, a, force, constants),
            radiated=y[_RAD, r], absorbed=y[_ABS, r], correction=y[_CORR, r],
            int_x2=y[_X2, r], int_v2=y[_V2, r], meta=m,
        ))
    return out


def integrate(force, realization, init, t_end, constants=None, **kwargs):
    """Integrate the reduced equation of motion in one field realization.

    ``realization`` may be None for motion without a field.  Keyword
    arguments are passed to :func:`integrate_ensemble`.

    Returns
    -------
    Trajectory
    """
    reals = [realization] if realization is not None else []
    return integrate_ensemble(force, reals, init, t_end, constants, **kwargs)[0]


def power_balance(traj, realization, window, threshold=0.05, min_correlation_times=10):
    """Window-averaged radiated, absorbed and Hamiltonian powers.

    Window ends are snapped to the nearest samples.  The averages are formed
    from the integrated power components, and dH/dt from the Hamiltonian
    difference across the window.

    Raises
    ------
    InsufficientWindowError
        The window is shorter than ``min_correlation_times`` field
        correlation times.
    """
    t0, t1 = window
    if not (traj.t[0] <= t0 < t1 <= traj.t[-1] + 1e-12 * abs(traj.t[-1])):
        raise DomainError("window must lie inside the trajectory span")
    tc = realization.correlation_time() if realization is not None else 0.0
    if t1 - t0 < min_correlation_times * tc:
        raise InsufficientWindowError(
            f"window {t1 - t0:.4g} shorter than {min_correlation_times} field "
            f"correlation times ({tc:.4g} each)"
        )
    i0, i1 = traj.window_index(t0, t1)
    if i1 <= i0:
        raise InsufficientWindowError("window contains no samples")
    width = traj.t[i1] - traj.t[i0]
    return BalanceReport(
        radiated_power=float((traj.radiated[i1] - traj.radiated[i0]) / width),
        absorbed_power=float((traj.absorbed[i1] - traj.absorbed[i0]) / width),
        dH_dt=float((traj.H[i1] - traj.H[i0]) / width),
        correction=float((traj.correction[i1] - traj.correction[i0]) / width),
        window=(float(traj.t[i0]), float(traj.t[i1])),
        threshold=threshold,
    )


def free_particle_response(grid, realization, t, derivative=0, constants=None):
    """Closed-form steady motion of a free radiating charge.

    Each mode ``w cos(omega t + phi)`` is the real part of
    ``w exp(-i (omega t + phi))`` and drives the response
    ``chi = -e / (m omega^2 + i m tau omega^3)``, so
    ``x(t) = Re sum chi w exp(-i (omega t + phi))``.

    Parameters
    ----------
    grid : FrequencyGrid or None
        Only used to check that the realization belongs to it.
    realization : FieldRealization
    t : float or array_like
    derivative : int
        0 for position, 1 for velocity, 2 for acceleration.
    """
    if grid is not None and realization.grid is not None and realization.grid != grid:
        raise DomainError("realization was not sampled on this grid")
    w = realization.omegas
    if np.any(w <= 0):
        raise SingularResponseError("free-particle response is singular at zero frequency")
    k = constants or realization.spectrum.constants
    chi = -k.e_charge / (k.m * w**2 + 1j * k.m * k.tau * w**3)
    amp = chi * realization.effective_weights * (-1j * w) ** derivative
    t = np.asarray(t, dtype=float)
    phase = np.exp(-1j * (np.multiply.outer(t, w) + realization.phases))
    out = (phase @ amp).real
    return out if np.ndim(out) else float(out)
