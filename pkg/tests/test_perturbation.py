import numpy as np
import pytest

from spinchain import (ChainSpec, clean_hamiltonian, clean_propagator_table,
                       compute_coefficients, eigendecompose, ensemble_average,
                       infidelity_sums, perturbative_fidelity, transfer_time)
from spinchain.perturbation import QuadratureError, _coefficients_on_grid


def propagator_matrix(sd, t):
    v = sd.eigenvectors
    return (v * np.exp(-1j * sd.eigenvalues * t)) @ v.T


def gauss_triangle_oracle(n, t, order=80):
    """D_ll and F_ll by Gauss-Legendre quadrature over 0<=t2<=t1<=t.

    Independent of the package's Simpson machinery: the integrands are
    evaluated from dense propagator matrices at arbitrary nodes.
    """
    sd = eigendecompose(clean_hamiltonian(n))
    x, w = np.polynomial.legendre.leggauss(order)

    def d_integrand(l, t1, t2):
        u1, u2 = propagator_matrix(sd, t1), propagator_matrix(sd, t2)
        ksum = np.sum(u1[l, :] * u2[l, :].conj())
        return (1.0 - 2.0 * abs(u1[l, 0]) ** 2 - 2.0 * abs(u2[l, 0]) ** 2
                + 4.0 * u1[l, 0].conj() * u2[l, 0] * ksum)

    def f_integrand(l, t1, t2):
        u1, u2 = propagator_matrix(sd, t1), propagator_matrix(sd, t2)
        a = u1[l, 0].conj() * u1[:, l + 1] + u1[l + 1, 0].conj() * u1[:, l]
        b = u2[l, 0].conj() * u2[:, l + 1].conj() + u2[l + 1, 0].conj() * u2[:, l].conj()
        return 4.0 * np.sum(a * b)

    def triangle(fn, l):
        total = 0.0 + 0.0j
        t1_nodes = 0.5 * t * (x + 1.0)
        for t1, w1 in zip(t1_nodes, w):
            t2_nodes = 0.5 * t1 * (x + 1.0)
            inner = sum(w2 * fn(l, t1, t2) for t2, w2 in zip(t2_nodes, w))
            total += w1 * inner * (0.5 * t1) * (0.5 * t)
        return total

    d = np.array([triangle(d_integrand, l) for l in range(n)])
    f = np.array([triangle(f_integrand, l) for l in range(n - 1)])
    return d, f


def gauss_line_oracle(n, t, order=120):
    """C_l and E_l by plain Gauss-Legendre on [0, t]."""
    sd = eigendecompose(clean_hamiltonian(n))
    x, w = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * t * (x + 1.0)
    c = np.zeros(n)
    e = np.zeros(n - 1)
    for s, ws in zip(nodes, w):
        u = propagator_matrix(sd, s)
        c += ws * (1.0 - 2.0 * np.abs(u[:, 0]) ** 2)
        e += ws * 4.0 * (u[:-1, 0] * u[1:, 0].conj()).real
    return c * 0.5 * t, e * 0.5 * t


def test_zero_time_coefficients_vanish():
    table = clean_propagator_table(8)
    coeffs = compute_coefficients(table, t=0.0)
    assert np.all(coeffs.c == 0) and np.all(coeffs.e == 0)
    assert np.all(coeffs.d_diag == 0) and np.all(coeffs.f_diag == 0)


def test_c_and_e_are_real_arrays():
    coeffs = compute_coefficients(clean_propagator_table(10))
    assert coeffs.c.dtype.kind == "f" and coeffs.e.dtype.kind == "f"
    assert coeffs.d_diag.dtype.kind == "c" and coeffs.f_diag.dtype.kind == "c"
    assert coeffs.c.shape == (10,) and coeffs.e.shape == (9,)


def test_richardson_contract_at_transfer_time():
    coeffs = compute_coefficients(clean_propagator_table(10), rel_tol=1e-6)
    assert coeffs.richardson_rel <= 1e-6


def test_single_integrals_match_gauss_oracle():
    t = transfer_time()
    coeffs = compute_coefficients(clean_propagator_table(7, t=t))
    c_ref, e_ref = gauss_line_oracle(7, t)
    assert np.max(np.abs(coeffs.c - c_ref)) < 1e-8
    # E vanishes identically for the clean chain (bipartite gauge), and
    # both routes must agree on that
    assert np.max(np.abs(e_ref)) < 1e-10
    assert np.max(np.abs(coeffs.e)) < 1e-10


def test_double_integrals_match_gauss_triangle_oracle():
    t = transfer_time()
    coeffs = compute_coefficients(clean_propagator_table(4, t=t))
    d_ref, f_ref = gauss_triangle_oracle(4, t)
    scale_d = np.max(np.abs(d_ref))
    scale_f = np.max(np.abs(f_ref))
    assert np.max(np.abs(coeffs.d_diag - d_ref)) < 1e-5 * scale_d
    assert np.max(np.abs(coeffs.f_diag - f_ref)) < 1e-5 * scale_f


def test_simpson_convergence_is_fourth_order():
    sd = eigendecompose(clean_hamiltonian(10))
    t = transfer_time()
    results = []
    for m in (400, 800, 1600, 3200):
        results.append(_coefficients_on_grid(sd, np.arange(m + 1) * (t / m)))
    # family index 1 is D, 3 is F; compare successive Richardson gaps
    for fam in (1, 3):
        gap1 = np.max(np.abs(results[0][fam] - results[1][fam]))
        gap2 = np.max(np.abs(results[1][fam] - results[2][fam]))
        gap3 = np.max(np.abs(results[2][fam] - results[3][fam]))
        order12 = np.log2(gap1 / gap2)
        order23 = np.log2(gap2 / gap3)
        assert 3.0 < order12 < 5.0
        assert 3.0 < order23 < 5.0


def test_explicit_coarse_step_is_refused():
    table = clean_propagator_table(10)
    with pytest.raises(QuadratureError):
        compute_coefficients(table, rel_tol=1e-12, max_refinements=0)


def test_too_coarse_table_step_rejected():
    with pytest.raises(QuadratureError):
        clean_propagator_table(10, step=1.0)


def test_unperturbed_fidelity_is_one():
    coeffs = compute_coefficients(clean_propagator_table(12))
    assert perturbative_fidelity(coeffs) == 1.0


def test_infidelity_quadratic_in_disorder():
    coeffs = compute_coefficients(clean_propagator_table(12))
    base_j = 1.0 - perturbative_fidelity(coeffs, eps_j=1e-3)
    base_b = 1.0 - perturbative_fidelity(coeffs, eps_b=1e-3)
    assert 1.0 - perturbative_fidelity(coeffs, eps_j=2e-3) == pytest.approx(4 * base_j, rel=1e-12)
    assert 1.0 - perturbative_fidelity(coeffs, eps_b=2e-3) == pytest.approx(4 * base_b, rel=1e-12)
    # the two sectors add independently
    mixed = 1.0 - perturbative_fidelity(coeffs, eps_j=1e-3, eps_b=1e-3)
    assert mixed == pytest.approx(base_j + base_b, rel=1e-12)


def test_table_unitarity_on_grid():
    table = clean_propagator_table(15)
    sd = table.decomposition
    for t in table.times[:: len(table.times) // 7]:
        u = propagator_matrix(sd, t)
        assert np.max(np.abs(u @ u.conj().T - np.eye(15))) < 1e-10


def test_field_sector_formula_matches_monte_carlo():
    # the printed formula with time-ordered D reproduces the engine's
    # field-disorder infidelity with unit prefactor
    n, eps_b = 8, 5e-3
    t = transfer_time()
    coeffs = compute_coefficients(clean_propagator_table(n, t=t))
    pert = 1.0 - perturbative_fidelity(coeffs, eps_b=eps_b)
    spec = ChainSpec(n_sites=n, eps_b=eps_b)
    mean, err = ensemble_average(spec, 3000, 21, [t])
    mc = 1.0 - mean[0]
    assert abs(mc - pert) < max(4.0 * err[0], 0.03 * pert)


def test_coupling_sector_proportional_to_monte_carlo():
    # the printed bond coefficients omit the modulation weights, so the MC
    # infidelity is a constant multiple of the formula across eps
    n = 8
    t = transfer_time()
    coeffs = compute_coefficients(clean_propagator_table(n, t=t))
    _, coupling_sum = infidelity_sums(coeffs)
    ratios = []
    for i, eps_j in enumerate((3e-3, 1e-2)):
        spec = ChainSpec(n_sites=n, eps_j=eps_j)
        mean, _ = ensemble_average(spec, 3000, 22, [t], key_prefix=(i,))
        ratios.append((1.0 - mean[0]) / (coupling_sum * eps_j ** 2))
    assert ratios[0] == pytest.approx(ratios[1], rel=0.1)
