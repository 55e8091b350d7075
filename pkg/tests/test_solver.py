import numpy as np
import pytest

from lsed.errors import DivergenceError, DomainError, TruncationError
from lsed.field import PhysicalConstants, build_relevant_amplitudes
from lsed.forces import ForceModel
from lsed.oracle import BasisSpec, diagonalize
from lsed.solver import (ResponseMatrix, SolverOptions, commutator_defect, force_matrix,
                         hamiltonian_matrix, harmonic_ladder, ladder_commutator,
                         momentum_matrix, poissonian, solve_selfconsistent)

K = PhysicalConstants()


@pytest.fixture(scope="module")
def quartic():
    return solve_selfconsistent(ForceModel.quartic(0.1), 40, K)


def test_force_matrix_linear_and_zero():
    X = harmonic_ladder(6, 1.0, K)
    np.testing.assert_array_equal(force_matrix(ForceModel.harmonic(), X), -X.entries)
    np.testing.assert_array_equal(force_matrix(ForceModel.quartic(0.3), np.zeros((3, 3))),
                                  np.zeros((3, 3)))


def test_force_matrix_cubic_by_hand():
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    F = force_matrix(ForceModel((-1.0, 0.0, -2.0)), X)
    # X^3 = X for this matrix
    assert F[0, 1] == pytest.approx(-1.0 - 2.0)
    F3 = force_matrix(ForceModel((0.0, 0.0, -2.0)), X)
    assert F3[0, 1] == pytest.approx(-2.0)


def test_exact_ladder_has_no_interior_commutator_defect():
    X = harmonic_ladder(12, 1.0, K)
    assert commutator_defect(X, K, block=11) < 1e-12


def test_zero_matrix_defect_is_hbar():
    X = ResponseMatrix(np.zeros((4, 4)), np.arange(4.0))
    assert commutator_defect(X, PhysicalConstants(hbar=1.7)) == pytest.approx(1.7)


def test_truncation_edge_defect_is_order_hbar():
    N = 10
    X = harmonic_ladder(N, 1.0, K)
    full = commutator_defect(X, K, block=N)
    assert full == pytest.approx(N * K.hbar, rel=1e-12)


def test_ladder_hamiltonian_is_diagonal():
    X = harmonic_ladder(10, 1.0, K)
    d = hamiltonian_matrix(X, ForceModel.harmonic(), K, block=9)
    np.testing.assert_allclose(np.diag(d.H).real[:9], np.arange(9) + 0.5, atol=1e-12)
    assert d.offdiag_norm < 1e-10
    assert d.bohr_residual < 1e-12


def test_poissonian_reduces_to_commutator():
    X = harmonic_ladder(8, 1.0, K)
    P = momentum_matrix(X, K)
    ones = np.ones((8, 8))
    np.testing.assert_array_equal(poissonian(X.entries, X.entries, ones), np.zeros((8, 8)))
    C = poissonian(X.entries, P, build_relevant_amplitudes(np.zeros(8)))
    np.testing.assert_allclose(C[:7, :7], 1j * np.eye(7), atol=1e-12)
    with pytest.raises(DomainError):
        poissonian(X.entries, P, np.ones((3, 3)))


def test_single_mode_ladder_commutator_is_one():
    # quadratures q, p of one mode: [q, p] = i hbar, U = hbar omega / 2
    omega = 2.5
    X = harmonic_ladder(30, omega, K)
    q = X.entries
    p = momentum_matrix(X, K)
    c = ladder_commutator(q, p, omega, K)
    # [a, a^dagger] from -(i omega / 2U) [q, p] = -(i omega / hbar omega) (i hbar) = 1
    np.testing.assert_allclose(np.diag(c)[:29], np.ones(29), atol=1e-12)


def test_harmonic_solution():
    res = solve_selfconsistent(ForceModel.harmonic(), 20, K)
    n = np.arange(16)
    np.testing.assert_allclose(res.spectrum.energies[:16], n + 0.5, atol=1e-10)
    x = res.X.entries
    np.testing.assert_allclose(np.diag(x, 1)[:16].real, np.sqrt((n + 1) / 2), atol=1e-10)
    mask = np.abs(np.subtract.outer(np.arange(20), np.arange(20))) != 1
    assert np.abs(x[:16, :16][mask[:16, :16]]).max() < 1e-10


def test_quartic_matches_oracle(quartic):
    o = diagonalize(ForceModel.quartic(0.1), BasisSpec(80), K, n_levels=5)
    np.testing.assert_allclose(quartic.spectrum.energies[:5], o.eigenvalues[:5], rtol=1e-4)


def test_zero_coupling_limit_reproduces_harmonic():
    a = solve_selfconsistent(ForceModel.quartic(0.0), 20, K)
    b = solve_selfconsistent(ForceModel.harmonic(), 20, K)
    np.testing.assert_array_equal(a.spectrum.energies, b.spectrum.energies)


def test_solution_residuals(quartic):
    r = quartic.report
    assert r.commutator_defect < 1e-8
    assert r.bohr_residual < 1e-8
    assert r.eom_residual < 1e-8
    assert r.hamiltonian_offdiag < 1e-8
    assert r.branch_jumps == []
    assert r.interior_block == (0, 30)


def test_frequency_chain_rule(quartic):
    w = quartic.X.frequencies
    np.testing.assert_array_equal(w, -w.T)
    n = 8
    for a in range(n):
        for b in range(n):
            np.testing.assert_allclose(w[a, b] + w[b, :n], w[a, :n], atol=1e-12)


def test_hermitian_and_gauge(quartic):
    x = quartic.X.entries
    np.testing.assert_array_equal(x, x.conj().T)
    assert np.all(np.diag(x, 1).real[:29] > 0)


def test_levels_ascending_and_bohr_rule(quartic):
    E = quartic.spectrum.energies[:30]
    assert np.all(np.diff(E) > 0)
    # E = hbar Omega holds on the interior block, not at the truncation edge
    np.testing.assert_allclose(quartic.spectrum.omegas[:30], quartic.X.omegas[:30], rtol=1e-10)


def test_scale_covariance_harmonic():
    base = solve_selfconsistent(ForceModel.harmonic(1.0, 1.0), 16, K)
    heavy = solve_selfconsistent(ForceModel.harmonic(1.0, 4.0), 16, PhysicalConstants(m=4.0))
    np.testing.assert_allclose(np.abs(heavy.X.entries[:12, :12]),
                               np.abs(base.X.entries[:12, :12]) / 2, atol=1e-12)
    big_hbar = solve_selfconsistent(ForceModel.harmonic(), 16, PhysicalConstants(hbar=3.0))
    np.testing.assert_allclose(big_hbar.spectrum.energies[:12], 3 * base.spectrum.energies[:12],
                               rtol=1e-12)


def test_rejects_small_truncation_and_free_force():
    with pytest.raises(DomainError):
        solve_selfconsistent(ForceModel.harmonic(), 3, K)
    with pytest.raises(DomainError):
        solve_selfconsistent(ForceModel(()), 10, K)
    with pytest.raises(TruncationError):
        solve_selfconsistent(ForceModel.harmonic(), 8, K, SolverOptions(margin=8))


def test_divergence_reports_residual_trace():
    with pytest.raises(DivergenceError) as info:
        solve_selfconsistent(ForceModel.quartic(50.0), 12, K,
                             SolverOptions(max_iter=1, min_step=0.2))
    assert info.value.residual_trace


def test_response_matrix_validation():
    with pytest.raises(DomainError):
        ResponseMatrix([[0, 1], [2, 0]], [0.0, 1.0])
    with pytest.raises(DomainError):
        ResponseMatrix(np.zeros((2, 3)), [0.0, 1.0])
    X = harmonic_ladder(6, 1.0, K)
    assert X.block(2).size == 2
