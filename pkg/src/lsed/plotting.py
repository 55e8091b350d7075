"""Figures written next to the tabular outputs."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return path


def autocovariance(path, lags, quad, mean, stderr):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(lags, quad, "k-", label="quadrature")
    ax.errorbar(lags, mean, yerr=3 * np.asarray(stderr), fmt="o", ms=3, label="ensemble, 3 s.e.")
    ax.set_xlabel("lag")
    ax.set_ylabel("field covariance")
    ax.legend()
    return _save(fig, path)


def trajectory(path, traj, t_relax):
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax1.plot(traj.t, traj.x, lw=0.6)
    ax1.axvline(t_relax, color="k", ls=":")
    ax1.set_ylabel("x")
    ax2.plot(traj.t, traj.H, lw=0.6, label="H")
    ax2.plot(traj.t, traj.absorbed - traj.radiated, lw=0.6, label="absorbed - radiated")
    ax2.axvline(t_relax, color="k", ls=":")
    ax2.set_xlabel("t")
    ax2.legend()
    return _save(fig, path)


def oscillator_moments(path, temps, x2, target):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(temps, target, "k-", label="coth law")
    ax.plot(temps, x2, "o", label="quadrature")
    ax.set_xlabel("temperature (1 / beta)")
    ax.set_ylabel("<x^2>")
    ax.legend()
    return _save(fig, path)


def levels(path, solver_e, oracle_e):
    fig, ax = plt.subplots(figsize=(6, 4))
    n = np.arange(len(oracle_e))
    ax.plot(n, oracle_e, "k_", ms=14, label="diagonalization")
    ax.plot(n, solver_e[: len(n)], "o", ms=4, label="self-consistent")
    ax.set_xlabel("level")
    ax.set_ylabel("energy")
    ax.legend()
    return _save(fig, path)


def brackets(path, omega, zp, rj):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.abs(omega), zp, "o", ms=3, label="zero-point")
    ax.plot(np.abs(omega), rj, "s", ms=3, label="Rayleigh-Jeans")
    ax.axhline(0, color="k", lw=0.5)
    ax.set_xlabel("|transition frequency|")
    ax.set_ylabel("balance bracket")
    ax.legend()
    return _save(fig, path)


def planck(path, x, ratio, cosh):
    fig, ax = plt.subplots(figsize=(6, 4))
    order = np.argsort(x)
    ax.loglog(x[order], ratio[order], "k-", label="rho / rho0 (coth)")
    ax.loglog(x[order], cosh[order], "r--", label="cosh form")
    ax.set_xlabel("beta hbar omega")
    ax.set_ylabel("rho / rho0")
    ax.legend()
    return _save(fig, path)


def variational(path, scans):
    fig, ax = plt.subplots(figsize=(6, 4))
    for s in scans:
        ax.loglog(s.epsilons, np.abs(s.deviations), lw=0.7)
    e = scans[0].epsilons
    ax.loglog(e, e**2 * np.abs(scans[0].deviations[-1]) / e[-1] ** 2, "k:", label="slope 2")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("|mean energy deviation|")
    ax.legend()
    return _save(fig, path)


def report(path, names, passed):
    fig, ax = plt.subplots(figsize=(8, 1.0 + 0.3 * len(names)))
    y = np.arange(len(names))
    ax.barh(y, [1] * len(names), color=["tab:green" if p else "tab:red" for p in passed])
    ax.set_yticks(y, names)
    ax.set_xticks([])
    ax.set_title("green: pass, red: fail", loc="left")
    return _save(fig, path)
