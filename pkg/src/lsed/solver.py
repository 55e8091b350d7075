"""Self-consistent response matrices for polynomial forces.

The unknowns are the state frequencies Omega_alpha and the response matrix
X (the position matrix).  They satisfy

    m omega_ab^2 X_ab = -F_ab,     F = sum_n k_n X^n,
    [X, P] = i hbar 1,             P_ab = i m omega_ab X_ab,

with omega_ab = Omega_a - Omega_b.  Energies follow from the diagonal of
H = P^2 / 2m + V(X).

The solve works in the gauge where X is real symmetric.  The unknowns are
the upper triangle of X and Omega_1 .. Omega_{N-1} (Omega_0 = 0).  The
equations are the upper triangle of the equation of motion and the first
N - 1 diagonal commutator conditions.  The last diagonal condition is
dropped because the trace of a finite commutator vanishes, which makes the
system square.  Damped Newton with an analytic Jacobian is continued from
the harmonic ladder of k_1 by scaling the nonlinear coefficients from 0 to 1.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (DegenerateSpectrumError, DivergenceError, DomainError,
                     TruncationError)
from .field import PhysicalConstants, RelevantAmplitudes

__all__ = [
    "ResponseMatrix",
    "LevelSpectrum",
    "SolveReport",
    "SolveResult",
    "SolverOptions",
    "HamiltonianDiagnostics",
    "harmonic_ladder",
    "force_matrix",
    "momentum_matrix",
    "commutator_matrix",
    "commutator_defect",
    "hamiltonian_matrix",
    "poissonian",
    "ladder_commutator",
    "solve_selfconsistent",
]


@dataclass(frozen=True, eq=False)
class ResponseMatrix:
    """Response matrix x_ab with the state frequencies that define omega_ab.

    Parameters
    ----------
    entries : (N, N) complex array
        Hermitian.
    omegas : (N,) array
        State frequencies Omega_a; ``frequencies[a, b] = omegas[a] - omegas[b]``.
    interior : int, optional
        Size of the leading block trusted after truncation (default: all).
    """

    entries: np.ndarray
    omegas: np.ndarray
    interior: int = None

    def __post_init__(self):
        x = np.array(self.entries, dtype=complex)
        w = np.array(self.omegas, dtype=float)
        if x.ndim != 2 or x.shape[0] != x.shape[1]:
            raise DomainError("response matrix must be square")
        if w.shape != (x.shape[0],):
            raise DomainError("need one state frequency per row")
        scale = max(np.abs(x).max(initial=0.0), 1e-300)
        if np.abs(x - x.conj().T).max(initial=0.0) > 1e-12 * scale:
            raise DomainError("response matrix must be Hermitian")
        x = 0.5 * (x + x.conj().T)
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "entries", x)
        object.__setattr__(self, "omegas", w)
        n = x.shape[0]
        m = n if self.interior is None else int(self.interior)
        if not 0 <= m <= n:
            raise DomainError("interior block exceeds matrix size")
        object.__setattr__(self, "interior", m)

    @property
    def size(self):
        return self.entries.shape[0]

    @property
    def frequencies(self):
        return self.omegas[:, None] - self.omegas[None, :]

    def strengths(self):
        """Transition strengths |x_ab|^2."""
        return np.abs(self.entries) ** 2

    def block(self, n):
        """Leading ``n`` x ``n`` sub-system."""
        return ResponseMatrix(self.entries[:n, :n], self.omegas[:n], min(n, self.interior))

    def to_dict(self):
        return {"N": self.size, "omegas": self.omegas.tolist(), "interior": self.interior,
                "X_real": self.entries.real.tolist(), "X_imag": self.entries.imag.tolist()}


@dataclass(frozen=True, eq=False)
class LevelSpectrum:
    """Ascending state frequencies and energies E = hbar Omega."""

    omegas: np.ndarray
    energies: np.ndarray

    @classmethod
    def from_energies(cls, energies, hbar=1.0):
        e = np.asarray(energies, dtype=float)
        return cls(e / hbar, e)

    def frequencies(self):
        return self.omegas[:, None] - self.omegas[None, :]


@dataclass
class SolveReport:
    """Post-hoc diagnostics of a self-consistent solve.

    Residuals are maxima over the interior block, recomputed from the final
    matrices.
    """

    iterations: int
    homotopy_steps: list
    eom_residual: float
    commutator_defect: float
    hamiltonian_offdiag: float
    bohr_residual: float
    interior_block: tuple
    branch_jumps: list = dc_field(default_factory=list)
    residual_trace: list = dc_field(default_factory=list)

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "homotopy_steps": [float(s) for s in self.homotopy_steps],
            "eom_residual": self.eom_residual,
            "commutator_defect": self.commutator_defect,
            "hamiltonian_offdiag": self.hamiltonian_offdiag,
            "bohr_residual": self.bohr_residual,
            "interior_block": list(self.interior_block),
            "branch_jumps": self.branch_jumps,
        }


@dataclass
class SolveResult:
    spectrum: LevelSpectrum
    X: ResponseMatrix
    report: SolveReport
    hamiltonian: np.ndarray


@dataclass(frozen=True)
class SolverOptions:
    """Knobs of the Newton-homotopy solve.

    Parameters
    ----------
    margin : int, optional
        Rows excluded from the trusted interior block (default N // 4).
    initial_step : float
        First homotopy increment in the nonlinear scale.
    min_step : float
        Smallest homotopy increment before giving up.
    max_iter : int
        Newton iterations allowed per homotopy stage.
    rtol : float
        Residual tolerance relative to the largest equation-of-motion term.
    degeneracy_tol : float
        Relative level spacing below which levels count as degenerate.
    """

    margin: int = None
    initial_step: float = 0.25
    min_step: float = 1e-4
    max_iter: int = 40
    rtol: float = 1e-12
    degeneracy_tol: float = 1e-8


def harmonic_ladder(N, omega0, constants):
    """Exact truncated ladder solution of the harmonic force -m omega0^2 x."""
    n = np.arange(1, N)
    off = np.sqrt(constants.hbar * n / (2.0 * constants.m * omega0))
    X = np.diag(off, 1) + np.diag(off, -1)
    omegas = omega0 * (np.arange(N) + 0.5)
    return ResponseMatrix(X, omegas)


def _entries(X):
    return X.entries if isinstance(X, ResponseMatrix) else np.asarray(X)


def _matrix_powers(X, n):
    out = [np.eye(X.shape[0], dtype=X.dtype)]
    for _ in range(n):
        out.append(out[-1] @ X)
    return out


def force_matrix(force, X):
    """F = sum_n k_n X^n with matrix powers."""
    x = _entries(X)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DomainError("X must be square")
    pows = _matrix_powers(x, force.degree)
    F = np.zeros_like(x)
    for n, k in enumerate(force.coeffs, start=1):
        F = F + k * pows[n]
    return F


def potential_matrix(force, X):
    x = _entries(X)
    pows = _matrix_powers(x, force.degree + 1)
    V = force.potential_offset * np.eye(x.shape[0], dtype=x.dtype)
    for n, k in enumerate(force.coeffs, start=1):
        V = V - k * pows[n + 1] / (n + 1)
    return V


def momentum_matrix(X, constants):
    """P_ab = i m omega_ab x_ab."""
    return 1j * constants.m * X.frequencies * X.entries


def commutator_matrix(X, constants):
    """[X, P] - i hbar 1 over the full matrix."""
    P = momentum_matrix(X, constants)
    x = X.entries
    return x @ P - P @ x - 1j * constants.hbar * np.eye(X.size)


def commutator_defect(X, constants, block=None):
    """Largest entry of |[X, P] - i hbar 1| over the leading ``block`` rows/columns."""
    n = X.interior if block is None else int(block)
    d = commutator_matrix(X, constants)[:n, :n]
    return float(np.abs(d).max(initial=0.0))


@dataclass(frozen=True, eq=False)
class HamiltonianDiagnostics:
    H: np.ndarray
    offdiag_norm: float
    bohr_residual: float


def hamiltonian_matrix(X, force, constants, block=None):
    """H = P^2 / 2m + V(X) with interior-block diagnostics.

    Returns
    -------
    HamiltonianDiagnostics
        ``offdiag_norm`` is the largest off-diagonal |H_ab| and
        ``bohr_residual`` the largest |H_aa - H_bb - hbar omega_ab|, both over
        the leading ``block`` indices (default: the interior block).
    """
    n = X.interior if block is None else int(block)
    P = momentum_matrix(X, constants)
    H = P @ P / (2.0 * constants.m) + potential_matrix(force, X.entries)
    Hi = H[:n, :n]
    off = Hi - np.diag(np.diag(Hi))
    d = np.diag(Hi).real
    bohr = (d[:, None] - d[None, :]) - constants.hbar * X.frequencies[:n, :n]
    return HamiltonianDiagnostics(
        H=H,
        offdiag_norm=float(np.abs(off).max(initial=0.0)),
        bohr_residual=float(np.abs(bohr).max(initial=0.0)),
    )


def poissonian(A, B, amplitudes):
    """Elementwise product of the commutator [A, B] with a_ab."""
    A = np.asarray(A)
    B = np.asarray(B)
    a = amplitudes.matrix if isinstance(amplitudes, RelevantAmplitudes) else np.asarray(amplitudes)
    if A.shape != B.shape or A.shape != a.shape or A.ndim != 2:
        raise DomainError(f"dimension mismatch: {A.shape}, {B.shape}, {a.shape}")
    return (A @ B - B @ A) * a


def ladder_commutator(q, p, omega, constants):
    """[a, a^dagger] from mode quadrature matrices: -(i omega / 2U) [q, p], U = hbar omega / 2."""
    u = 0.5 * constants.hbar * omega
    return -1j * omega / (2.0 * u) * (q @ p - p @ q)


class _System:
    """Residual and Jacobian of the square real system."""

    def __init__(self, N, constants):
        self.N = N
        self.m = constants.m
        self.hbar = constants.hbar
        self.iu = np.triu_indices(N)
        self.nu = self.iu[0].size
        self.off = self.iu[0] != self.iu[1]

    def unpack(self, z):
        N = self.N
        X = np.zeros((N, N))
        X[self.iu] = z[: self.nu]
        X = X + np.triu(X, 1).T
        om = np.concatenate([[0.0], z[self.nu:]])
        return X, om

    def pack(self, X, om):
        return np.concatenate([X[self.iu], om[1:] - om[0]])

    def residual(self, z, k):
        X, om = self.unpack(z)
        w = om[:, None] - om[None, :]
        F = np.zeros_like(X)
        P = np.eye(self.N)
        for kn in k:
            P = P @ X
            F += kn * P
        r1 = self.m * w**2 * X + F
        r2 = 2.0 * self.m * np.sum(w.T * X**2, axis=1) - self.hbar
        scale = np.abs(self.m * w**2 * X).max()
        return np.concatenate([r1[self.iu], r2[:-1]]), scale

    def jacobian(self, z, k):
        N, m, nu = self.N, self.m, self.nu
        a_, b_ = self.iu
        X, om = self.unpack(z)
        w = om[:, None] - om[None, :]
        pows = _matrix_powers(X, len(k))
        # d F_ab / d X_cd = sum_n k_n sum_j (X^j)_ac (X^{n-1-j})_db
        G = np.zeros((nu, N, N))
        for n, kn in enumerate(k, start=1):
            if kn == 0.0:
                continue
            for j in range(n):
                G += kn * pows[j][a_, :, None] * pows[n - 1 - j][b_, None, :]
        G[np.arange(nu), a_, b_] += m * w[a_, b_] ** 2
        # symmetric parameters: X_cd and X_dc move together
        J1x = G[:, a_, b_] + np.where(self.off, G[:, b_, a_], 0.0)
        idx = np.arange(nu)
        val = 2.0 * m * w[a_, b_] * X[a_, b_]
        J1o = np.zeros((nu, N))
        J1o[idx, a_] += val
        J1o[idx, b_] -= val
        J2x = np.zeros((N, nu))
        o = self.off
        J2x[a_[o], idx[o]] = 4.0 * m * w[b_[o], a_[o]] * X[a_[o], b_[o]]
        J2x[b_[o], idx[o]] = 4.0 * m * w[a_[o], b_[o]] * X[a_[o], b_[o]]
        X2 = X**2
        J2o = 2.0 * m * X2
        J2o[np.diag_indices(N)] -= 2.0 * m * X2.sum(axis=1)
        return np.block([[J1x, J1o[:, 1:]], [J2x[:-1], J2o[:-1, 1:]]])


def _newton(system, z, k, opts, trace):
    """Damped Newton; returns (z, iterations) or raises DivergenceError."""
    r, scale = system.residual(z, k)
    nr = np.abs(r).max()
    for it in range(1, opts.max_iter + 1):
        trace.append(float(nr))
        if nr <= opts.rtol * max(scale, system.hbar):
            return z, it - 1
        J = system.jacobian(z, k)
        try:
            dz = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise DivergenceError(f"singular Jacobian: {exc}", trace) from exc
        t = 1.0
        while True:
            z_new = z + t * dz
            r_new, scale_new = system.residual(z_new, k)
            nr_new = np.abs(r_new).max()
            if nr_new < nr or t < 1e-3:
                break
            t *= 0.5
        small_step = np.abs(t * dz).max() <= 1e-14 * (1.0 + np.abs(z).max())
        z, r, nr, scale = z_new, r_new, nr_new, scale_new
        if small_step and nr <= 1e3 * opts.rtol * max(scale, system.hbar):
            trace.append(float(nr))
            return z, it
    raise DivergenceError(
        f"Newton did not converge in {opts.max_iter} iterations (residual {nr:.3e})", trace
    )


def solve_selfconsistent(force, N, constants=None, opts=None):
    """Solve the self-consistent matrix equations for a confining polynomial force.

    Parameters
    ----------
    force : ForceModel
    N : int
        Truncation size, at least 4.
    constants : PhysicalConstants, optional
    opts : SolverOptions, optional

    Returns
    -------
    SolveResult

    Raises
    ------
    DivergenceError
        Newton failed even at the smallest homotopy step.
    DegenerateSpectrumError
        Two interior levels coincide.
    TruncationError
        The trusted interior block is empty.
    """
    constants = constants or PhysicalConstants()
    opts = opts or SolverOptions()
    N = int(N)
    if N < 4:
        raise DomainError("truncation N must be at least 4")
    if force.is_free:
        raise DomainError("the self-consistent solve needs a confining force")
    margin = N // 4 if opts.margin is None else int(opts.margin)
    interior = N - margin
    if interior <= 0:
        raise TruncationError(f"interior block empty for N={N}, margin={margin}")
    w0 = force.harmonic_frequency(constants.m)

    system = _System(N, constants)
    guess = harmonic_ladder(N, w0, constants)
    z = system.pack(guess.entries.real, guess.omegas)
    k_full = force.k

    trace, steps, jumps = [], [], []
    iterations = 0
    s, ds = 0.0, (1.0 if len(k_full) == 1 else opts.initial_step)
    if len(k_full) == 1:
        z, it = _newton(system, z, k_full, opts, trace)
        iterations += it
        steps.append(1.0)
        s = 1.0
    while s < 1.0:
        s_try = min(1.0, s + ds)
        k = k_full.copy()
        k[1:] *= s_try
        try:
            z_new, it = _newton(system, z.copy(), k, opts, trace)
        except DivergenceError:
            ds *= 0.5
            if ds < opts.min_step:
                raise DivergenceError(
                    f"homotopy stalled at nonlinear scale {s:.4g}", trace
                ) from None
            continue
        om_old = system.unpack(z)[1]
        om_new = system.unpack(z_new)[1]
        if np.any(np.diff(np.argsort(om_new[:interior])) != 1) and np.all(
                np.diff(om_old[:interior]) > 0):
            jumps.append({"scale": float(s_try), "kind": "level reordering"})
        iterations += it
        z, s = z_new, s_try
        steps.append(s)
        if it <= 4:
            ds = min(2.0 * ds, 1.0)

    X, om = system.unpack(z)
    # order states by frequency; energies near the truncation edge are not
    # trusted, so energy order is only checked on the interior block
    order = np.argsort(om, kind="stable")
    X = X[np.ix_(order, order)]
    om = om[order]
    sign = np.ones(N)
    for a in range(N - 1):
        sign[a + 1] = sign[a] * (-1.0 if X[a, a + 1] < 0 else 1.0)
    X = sign[:, None] * X * sign[None, :]

    base = ResponseMatrix(X, om, interior)
    H = hamiltonian_matrix(base, force, constants, block=N).H
    E = np.diag(H).real
    if np.any(np.diff(E[:interior]) <= 0):
        jumps.append({"scale": 1.0, "kind": "interior energies not ascending"})
    om = om - om[0] + E[0] / constants.hbar
    Xr = ResponseMatrix(X, om, interior)

    gaps = np.diff(np.sort(om[:interior]))
    scale = max(np.abs(om[:interior]).max(), 1e-300)
    if gaps.size and gaps.min() < opts.degeneracy_tol * scale:
        raise DegenerateSpectrumError(
            f"levels within the interior block coincide (min gap {gaps.min():.3e})"
        )

    diag = hamiltonian_matrix(Xr, force, constants)
    w = Xr.frequencies
    eom = constants.m * w**2 * Xr.entries + force_matrix(force, Xr)
    report = SolveReport(
        iterations=iterations,
        homotopy_steps=steps,
        eom_residual=float(np.abs(eom[:interior, :interior]).max()),
        commutator_defect=commutator_defect(Xr, constants),
        hamiltonian_offdiag=diag.offdiag_norm,
        bohr_residual=diag.bohr_residual,
        interior_block=(0, interior),
        branch_jumps=jumps,
        residual_trace=trace,
    )
    spectrum = LevelSpectrum(E / constants.hbar, E)
    return SolveResult(spectrum=spectrum, X=Xr, report=report, hamiltonian=diag.H)
