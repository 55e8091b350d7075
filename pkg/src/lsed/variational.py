"""Phase variations of a stationary state and the curvature of its mean energy.

A variation of the stochastic phases phi_lambda -> phi_lambda + eps dphi_lambda
(with dphi_alpha = 0 for the state under study) acts on the state through
the relevant amplitudes a_{alpha lambda}.  To first order it mixes in the
vector g_lambda = dphi_lambda conj(a_{alpha lambda}); the normalized varied
state is

    psi(eps) = cos(eps s) |alpha> + i sin(eps s) g / s,    s = |dphi|.

The observable is averaged over an ensemble of phase draws.  Because H is
diagonal in the solved basis and <a_{alpha lambda}> = 0, the first-order term
vanishes and the deviation starts at eps^2 sum_lambda dphi_lambda^2
(E_lambda - E_alpha), which is nonnegative for the ground state.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .field import PhysicalConstants
from .solver import hamiltonian_matrix, momentum_matrix, potential_matrix

__all__ = [
    "PhaseVariation",
    "ScanResult",
    "mean_kinetic",
    "mean_kinetic_mc",
    "observable_matrix",
    "random_direction",
    "phase_variation_scan",
]


@dataclass(frozen=True, eq=False)
class PhaseVariation:
    """Direction of a phase variation around state ``state_index``.

    ``deltas[state_index]`` is ignored (treated as 0).
    """

    state_index: int
    deltas: np.ndarray
    epsilon: float = 1.0

    def __post_init__(self):
        d = np.array(self.deltas, dtype=float)
        if not np.all(np.isfinite(d)):
            raise DomainError("phase deltas must be finite")
        if not self.epsilon >= 0:
            raise DomainError("epsilon must be nonnegative")
        d[self.state_index] = 0.0
        d.setflags(write=False)
        object.__setattr__(self, "deltas", d)


@dataclass(frozen=True, eq=False)
class ScanResult:
    epsilons: np.ndarray
    deviations: np.ndarray
    slope: float
    linear_coef: float
    quadratic_coef: float
    predicted_quadratic: float
    n_draws: int
    even: np.ndarray = None
    odd: np.ndarray = None

    def first_order_ratio(self):
        """Largest |odd part| / |even part| of the deviation over the scan."""
        pos = np.abs(self.even) > 0
        if not np.any(pos):
            return 0.0
        return float(np.max(np.abs(self.odd[pos]) / np.abs(self.even[pos])))

    def rows(self):
        return [{"epsilon": float(e), "deviation": float(d), "fitted_slope": self.slope}
                for e, d in zip(self.epsilons, self.deviations)]

    def to_dict(self):
        return {"epsilon": self.epsilons.tolist(), "deviation": self.deviations.tolist(),
                "slope": self.slope, "linear_coef": self.linear_coef,
                "quadratic_coef": self.quadratic_coef,
                "first_order_ratio": self.first_order_ratio(),
                "predicted_quadratic": self.predicted_quadratic, "n_draws": self.n_draws}


def mean_kinetic(X, state, amplitudes=None, t=0.0, constants=None):
    """Phase-averaged kinetic energy of ``state``: (m/2) sum_b omega_ab^2 |x_ab|^2.

    The ensemble average <conj(a_ab) a_ab'> = delta_bb' removes all cross
    terms, and with them the time dependence.
    """
    k = constants or PhysicalConstants()
    if amplitudes is not None and amplitudes.size != X.size:
        raise DomainError("amplitudes and response matrix cover different states")
    w = X.frequencies[state]
    return float(0.5 * k.m * np.sum(w**2 * X.strengths()[state]))


def mean_kinetic_mc(X, state, n_draws=100_000, seed=0, t=0.0, constants=None):
    """Monte-Carlo phase average of (m/2) |sum_b i omega_ab x_ab a_ab exp(i omega_ab t)|^2.

    Returns
    -------
    mean, stderr : float
    """
    k = constants or PhysicalConstants()
    rng = np.random.Generator(np.random.Philox(seed))
    w = X.frequencies[state]
    c = 1j * w * X.entries[state] * np.exp(1j * w * t)
    ph = rng.uniform(-np.pi, np.pi, (n_draws, X.size))
    a = np.exp(1j * (ph[:, [state]] - ph))
    vals = 0.5 * k.m * np.abs(a @ c) ** 2
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_draws))


def observable_matrix(X, force, constants, observable="energy"):
    """Matrix of the kinetic, potential or total energy."""
    if observable == "energy":
        return hamiltonian_matrix(X, force, constants).H
    if observable == "kinetic":
        P = momentum_matrix(X, constants)
        return P @ P / (2.0 * constants.m)
    if observable == "potential":
        return potential_matrix(force, X.entries)
    raise DomainError(f"unknown observable {observable!r}")


def random_direction(X, state, rng):
    """Random unit phase-variation direction over the interior states."""
    d = np.zeros(X.size)
    d[: X.interior] = rng.standard_normal(X.interior)
    d[state] = 0.0
    return PhaseVariation(state, d / np.linalg.norm(d))


def phase_variation_scan(X, state, direction, epsilons, force=None, constants=None,
                         observable="energy", n_draws=100_000, seed=0, matrix=None,
                         antithetic=True):
    """Deviation of the phase-averaged observable along a phase variation.

    Parameters
    ----------
    X : ResponseMatrix
    state : int
    direction : PhaseVariation
    epsilons : array_like
        Variation scales; the direction is multiplied by ``direction.epsilon``.
    force, constants
        Used to build the observable matrix unless ``matrix`` is given.
    observable : {"energy", "kinetic", "potential"}
    n_draws : int
        Ensemble size (each draw is paired with its antithetic partner,
        with every phase except phi_alpha shifted by pi, when ``antithetic``).

    Returns
    -------
    ScanResult
        ``slope`` is the least-squares log-log slope of |deviation| against
        eps.  ``linear_coef`` and ``quadratic_coef`` are the odd and even
        parts of the deviation at the smallest positive eps, divided by eps
        and eps^2.
    """
    if direction.state_index != state:
        raise DomainError("variation direction refers to another state")
    k = constants or PhysicalConstants()
    if matrix is None:
        if force is None:
            raise DomainError("need a force or an observable matrix")
        matrix = observable_matrix(X, force, k, observable)
    n = X.interior
    A = np.asarray(matrix)[:n, :n]
    d = direction.deltas[:n] * direction.epsilon
    s = float(np.linalg.norm(d))
    eps = np.asarray(epsilons, dtype=float)
    a_aa = A[state, state].real
    if s == 0:
        dev = np.zeros_like(eps)
        return ScanResult(eps, dev, float("nan"), 0.0, 0.0, 0.0, n_draws, dev, dev)

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    ph = rng.uniform(-np.pi, np.pi, (n_draws, n))
    g = d * np.exp(-1j * (ph[:, [state]] - ph))
    quad = np.einsum("ij,ij->i", g.conj(), g @ A.T).real / s**2
    cross = (g @ A[state]).imag / s
    if antithetic:
        # shifting every phase but phi_alpha by pi flips g
        quad = np.concatenate([quad, quad])
        cross = np.concatenate([cross, -cross])
    q_mean = quad.mean()
    x_mean = cross.mean()

    def deviation(e):
        c = np.cos(e * s)
        sn = np.sin(e * s)
        return (c**2 - 1.0) * a_aa + sn**2 * q_mean - 2.0 * c * sn * x_mean

    dev = deviation(eps)
    # split into even and odd parts in eps; the odd part is the first-order term
    even = 0.5 * (dev + deviation(-eps))
    odd = 0.5 * (dev - deviation(-eps))
    pos = (eps > 0) & (np.abs(dev) > 0)
    slope = float(np.polyfit(np.log(eps[pos]), np.log(np.abs(dev[pos])), 1)[0]) \
        if np.count_nonzero(pos) >= 2 else float("nan")
    i = int(np.argmin(np.where(eps > 0, eps, np.inf)))
    linear = float(odd[i] / eps[i]) if eps[i] > 0 else 0.0
    quadratic = float(even[i] / eps[i] ** 2) if eps[i] > 0 else 0.0
    diag = np.diag(A).real
    predicted = float(np.sum(d**2 * (diag - a_aa)))
    return ScanResult(eps, dev, slope, linear, quadratic, predicted, n_draws,
                      even=even, odd=odd)
