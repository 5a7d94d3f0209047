import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracwave.core import apply_laplacian, build_grid, make_params, restrict, stationary_weights
from fracwave.decimation import build_tree, limit_eigenvalue, lowest_child
from fracwave.eigenfunctions import (
    GREEN_SUP,
    Eigenfunction,
    UnsupportedParameterError,
    basis_matrix,
    build_basis,
    convergence_bound,
    evaluate,
    extend,
    extend_lowest,
    full_basis,
    harmonic_extend,
    harmonic_fill,
    level0_basis,
    limit_approximation,
    product_norm_bound,
    sup_norm_bound,
)
from fracwave.oracle import align, dense_eigensystem


def test_level_zero_basis():
    par = make_params(0.2)
    const, alt = level0_basis(par)
    assert const.eigenvalue == 0.0 and alt.eigenvalue == 2.0
    np.testing.assert_array_equal(const.values, [1, 1])
    np.testing.assert_array_equal(alt.values, [1, -1])
    assert const.residual() == 0.0 and alt.residual() == 0.0


def test_extension_example_at_one_fifth():
    par = make_params(0.2)
    f = extend(level0_basis(par)[1], 0.2, k_index=1)
    np.testing.assert_allclose(f.values, [1.0, 0.8, -0.8, -1.0], atol=1e-15)
    assert f.residual() < 1e-12


def test_harmonic_extension_of_a_single_cell():
    par = make_params(0.2)
    np.testing.assert_allclose(harmonic_extend(par, [0.0, 1.0]), [0, 1 / 6, 5 / 6, 1], atol=1e-15)
    np.testing.assert_allclose(harmonic_extend(par, np.full(4, 2.5)), np.full(10, 2.5), rtol=1e-15)
    with pytest.raises(ValueError):
        harmonic_extend(par, np.zeros(5))


def test_harmonic_fill_is_linear_in_resistance(asym, rng):
    f = rng.standard_normal(10)
    fine = harmonic_fill(asym, f, 3)
    grid = build_grid(asym, 5)
    expect = np.interp(grid.coords_resistance, build_grid(asym, 2).coords_resistance, f)
    np.testing.assert_allclose(fine, expect, atol=1e-13)
    np.testing.assert_allclose(evaluate(asym, 2, f, grid.coords_resistance), expect, atol=1e-13)


def test_extend_guards():
    par = make_params(0.2)
    alt = level0_basis(par)[1]
    with pytest.raises(ValueError):
        extend(alt, 0.3)  # not a preimage of 2
    with pytest.raises(ValueError):
        extend(level0_basis(par)[0], 1.2)  # forbidden 1 + p
    with pytest.raises(UnsupportedParameterError):
        extend(level0_basis(make_params(0.5))[1], 0.5)
    with pytest.raises(UnsupportedParameterError):
        full_basis(make_params(0.5), 2)


def test_values_are_read_only():
    f = level0_basis(make_params(0.2))[0]
    with pytest.raises(ValueError):
        f.values[0] = 3.0
    with pytest.raises(ValueError):
        Eigenfunction(f.params, 1, 0, 0.0, np.ones(3))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_full_basis_matches_dense_eigenvectors(asym, n):
    basis = full_basis(asym, n)
    dense = dense_eigensystem(asym, n)
    np.testing.assert_allclose([f.eigenvalue for f in basis], build_tree(asym, n).levels[n])
    for k, f in enumerate(basis):
        assert align(dense.eigenvectors[:, k], f.values) < 1e-7


@pytest.mark.parametrize("n", [2, 4, 6])
def test_residuals_and_coarse_agreement(asym, n):
    basis = build_basis(asym, 2, n)
    coarse = build_basis(asym, 2, n - 1) if n > 2 else None
    for k, f in enumerate(basis):
        assert f.residual() < 1e-10 * max(1.0, f.sup_norm)
        if coarse is not None:
            assert np.array_equal(restrict(f.values, n, n - 1), coarse[k].values)
    assert np.all(basis[0].values == 1.0)


def test_full_basis_is_mu_orthogonal(asym):
    for n in range(1, 7):
        values, _ = basis_matrix(full_basis(asym, n))
        gram = (values * stationary_weights(asym, n)) @ values.T
        d = np.sqrt(np.diag(gram))
        gram = gram / np.outer(d, d) - np.eye(d.size)
        assert np.max(np.abs(gram)) < 1e-9


def test_uniform_boundedness_along_lowest_branch(asym):
    n0 = 2
    base = build_basis(asym, n0, n0)
    j = np.arange(1, 80)
    for i in range(9):
        for k, f in enumerate(build_basis(asym, n0, n0 + i)):
            gamma = (min(asym.p, asym.q) / 2) ** j * base[k].eigenvalue / asym.q
            if gamma.max() >= 1:
                continue  # the product gives no bound
            assert f.sup_norm <= base[k].sup_norm / np.prod(1 - gamma) * (1 + 1e-12)


def test_harmonic_proximity(asym):
    for n in range(2, 7):
        for f, g in zip(build_basis(asym, 2, n), build_basis(asym, 2, n + 1)):
            if f.eigenvalue >= asym.q:
                continue
            gap = np.max(np.abs(g.values - harmonic_extend(asym, f.values)))
            assert gap <= f.eigenvalue / (asym.q - f.eigenvalue) * f.sup_norm + 1e-13


def test_sup_norm_bound_at_one_fifth():
    par = make_params(0.2)
    assert sup_norm_bound(level0_basis(par)[0]) == 1.0
    for n in range(2, 10):
        base = build_basis(par, 2, n)
        finer = {m: build_basis(par, 2, m) for m in range(n + 1, 11)}
        for k in range(10):
            bound = sup_norm_bound(base[k])
            assert all(finer[m][k].sup_norm <= bound for m in finer)
            assert all(finer[m][k].sup_norm <= product_norm_bound(base[k], m) * (1 + 1e-12) for m in finer)
    f = build_basis(par, 2, 4)[1]
    assert sup_norm_bound(f) / f.sup_norm - 1 < 0.05


def test_bounds_reject_large_p():
    f = build_basis(make_params(0.8), 1, 2)[1]
    for fn in (sup_norm_bound, lambda g: convergence_bound(g, 1.0), lambda g: product_norm_bound(g, 3)):
        with pytest.raises(ValueError):
            fn(f)
    g = build_basis(make_params(0.2), 1, 1)[2]
    with pytest.raises(ValueError):
        sup_norm_bound(g, next_eigenvalue=0.9)


def test_convergence_bound_dominates_measured_gap():
    par = make_params(0.2)
    assert GREEN_SUP == 0.25
    for n in (3, 4, 5):
        coarse = build_basis(par, 2, n)
        fine = build_basis(par, 2, n + 3)
        for k in range(10):
            lim = limit_eigenvalue(par, k).value
            bound = convergence_bound(coarse[k], lim)
            gap = np.max(np.abs(fine[k].values - harmonic_fill(par, coarse[k].values, 3)))
            assert gap <= bound
    assert convergence_bound(build_basis(par, 2, 3)[0], 0.0) == 0.0


def test_convergence_bound_shrinks_by_about_c0():
    par = make_params(0.2)
    lim = limit_eigenvalue(par, 4).value
    b = [convergence_bound(build_basis(par, 2, n)[4], lim) for n in (4, 5, 6)]
    assert b[0] / b[1] == pytest.approx(par.c0, rel=0.05)
    assert b[1] / b[2] == pytest.approx(par.c0, rel=0.02)


def test_limit_approximation():
    par = make_params(0.2)
    f = build_basis(par, 2, 4)[3]
    approx = limit_approximation(f, limit_eigenvalue(par, 3).value, fill_levels=2)
    assert approx.fill_level == 6 and approx.harmonic_fill.size == 3**6 + 1
    assert approx.error_bound > 0


@given(st.one_of(st.floats(0.1, 0.45), st.floats(0.55, 0.9)), st.integers(0, 9))
def test_extend_lowest_keeps_coarse_values(p, k):
    par = make_params(p)
    base = full_basis(par, 2)
    rows, history = extend_lowest(par, base[k].values, [base[k].eigenvalue], 3)
    assert np.array_equal(restrict(rows[0], 5, 2), base[k].values)
    assert history.shape == (4, 1)
    lap = apply_laplacian(par, 5, rows[0])
    assert np.max(np.abs(lap - history[-1, 0] * rows[0])) < 1e-10 * max(1.0, np.abs(rows).max())
    assert history[1, 0] == lowest_child(par, base[k].eigenvalue)
