import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aolab.errors import ConfigurationError
from aolab.oracles import pressure_oracle
from aolab.oracles import dense_forward
from aolab.spectral import (
    VOLUME,
    FilterSpec,
    Grid,
    SpectralVectorField,
    apply_filter,
    apply_inverse_filter,
    divergence,
    full_coefficients,
    gradient,
    hermitian_defect,
    leray_project,
    max_divergence,
    norms,
    shift,
    solve_pressure,
    to_physical,
    to_spectral,
    transform,
)

from conftest import random_field, sin_x_ey


def single_mode(n, k, vec, value=1.0):
    """Half-layout field with coefficient ``value * vec`` at k (and its mirror)."""
    grid = Grid(n)
    c = np.zeros((3,) + grid.spectral_shape, complex)
    kx, ky, kz = k
    for comp, a in enumerate(vec):
        c[comp, kx % n, ky % n, kz] = value * a
    field = SpectralVectorField(grid, c)
    # round-trip through real space enforces Hermitian symmetry
    return to_spectral(grid, to_physical(field))


# -- grid -----------------------------------------------------------------------------


@pytest.mark.parametrize("n", [4, 12, 0, 7])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ConfigurationError):
        Grid(n)


def test_grid_cutoff_and_wavenumbers():
    g = Grid(32)
    assert g.dealias_cutoff == 10
    kx = g.wavenumbers.kx.ravel()
    assert kx.min() == -16 and kx.max() == 15


# -- transform ------------------------------------------------------------------------


def test_zero_samples_give_zero_coefficients():
    g = Grid(8)
    f = transform(np.zeros((3, 8, 8, 8)), g)
    assert np.all(f.coeffs == 0)


def test_sin_x_pair():
    grid, samples = sin_x_ey()
    full = full_coefficients(to_spectral(grid, samples))
    expect = np.zeros_like(full)
    expect[1, 1, 0, 0] = -0.5j
    expect[1, -1, 0, 0] = 0.5j
    assert np.allclose(full, expect, atol=1e-14)


def test_round_trip_random():
    g = Grid(16)
    rng = np.random.default_rng(3)
    samples = rng.standard_normal((3, 16, 16, 16))
    back = transform(transform(samples, g))
    assert np.max(np.abs(back - samples)) <= 1e-12 * np.max(np.abs(samples))


def test_parseval():
    g = Grid(16)
    rng = np.random.default_rng(4)
    samples = rng.standard_normal((3, 16, 16, 16))
    lhs = np.sum(samples**2) * g.spacing**3
    rhs = norms(to_spectral(g, samples))["l2_sq"]
    assert abs(lhs - rhs) <= 1e-10 * lhs


def test_transform_requires_grid_and_finite_input():
    with pytest.raises(ConfigurationError):
        transform(np.zeros((3, 8, 8, 8)))
    bad = np.zeros((3, 8, 8, 8))
    bad[0, 0, 0, 0] = np.nan
    with pytest.raises(ConfigurationError):
        to_spectral(Grid(8), bad)


# -- filters --------------------------------------------------------------------------


def test_helmholtz_single_mode():
    v = single_mode(8, (1, 0, 0), (0, 1, 0))
    u = apply_inverse_filter(FilterSpec.helmholtz(1.0), v)
    assert np.allclose(u.coeffs, v.coeffs / 2)


def test_helmholtz_alpha_zero_is_identity():
    v = random_field(seed=2)
    u = apply_inverse_filter(FilterSpec.helmholtz(0.0), v)
    assert np.array_equal(u.coeffs, v.coeffs)


def test_fractional_half_order():
    v = single_mode(8, (2, 0, 0), (0, 1, 0))
    u = apply_inverse_filter(FilterSpec.fractional(1.0, 0.5), v)
    assert np.allclose(u.coeffs, v.coeffs / 3)


@pytest.mark.parametrize("theta", [0.0, -0.5, 1.5])
def test_fractional_theta_domain(theta):
    with pytest.raises(ConfigurationError):
        FilterSpec.fractional(1.0, theta)


def test_filter_preserves_solenoidal_flag():
    v = random_field(seed=5)
    assert v.solenoidal
    assert apply_inverse_filter(FilterSpec.helmholtz(0.3), v).solenoidal


@given(alpha=st.floats(0, 3), theta=st.floats(0.05, 1.0), seed=st.integers(0, 2**32))
def test_filter_never_amplifies(alpha, theta, seed):
    v = random_field(seed=seed)
    for spec in (FilterSpec.helmholtz(alpha), FilterSpec.fractional(alpha, theta)):
        u = apply_inverse_filter(spec, v)
        assert np.all(np.abs(u.coeffs) <= np.abs(v.coeffs) + 1e-15)
        assert np.allclose(apply_filter(spec, u).coeffs, v.coeffs, rtol=1e-12, atol=1e-15)


# -- projection -----------------------------------------------------------------------


def test_project_gradient_mode_vanishes():
    w = single_mode(8, (1, 2, 0), (1, 2, 0))
    assert np.max(np.abs(leray_project(w).coeffs)) < 1e-15


def test_project_formula_case():
    w = single_mode(8, (1, 0, 0), (1, 1, 0))
    p = leray_project(w)
    assert np.allclose(p.coeffs, single_mode(8, (1, 0, 0), (0, 1, 0)).coeffs, atol=1e-15)


def test_project_leaves_solenoidal_fields_alone():
    v = random_field(seed=6)
    assert np.allclose(leray_project(v).coeffs, v.coeffs, atol=1e-15)


@given(seed=st.integers(0, 2**32))
def test_projector_idempotent_and_solenoidal(seed):
    rng = np.random.default_rng(seed)
    g = Grid(8)
    w = to_spectral(g, rng.standard_normal((3, 8, 8, 8)))
    p1 = leray_project(w)
    p2 = leray_project(p1)
    scale = np.max(np.abs(p1.coeffs))
    assert np.max(np.abs(p2.coeffs - p1.coeffs)) <= 1e-12 * scale
    assert max_divergence(p1) <= 1e-12
    assert np.allclose(p1.coeffs[:, 0, 0, 0], w.coeffs[:, 0, 0, 0])


# -- pressure -------------------------------------------------------------------------


def test_pressure_of_parallel_shear_vanishes():
    g = Grid(16)
    x, y, z = g.coordinates()
    zero = np.zeros_like(x)
    u = to_spectral(g, np.stack([np.sin(y) + 0.3 * np.cos(2 * y), zero, zero]))
    p = solve_pressure(u, u)
    assert np.max(np.abs(p.coeffs)) < 1e-15


@given(seed=st.integers(0, 2**32))
def test_pressure_mean_zero(seed):
    u = random_field(seed=seed)
    assert solve_pressure(u, u).coeffs[0, 0, 0] == 0


def test_pressure_matches_dense_oracle():
    v = random_field(seed=21)
    u = apply_inverse_filter(FilterSpec.helmholtz(0.7), v)
    got = dense_forward(solve_pressure(u, v).physical())
    ref = pressure_oracle(u.physical(), v.physical())
    assert np.max(np.abs(got - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_pressure_solves_poisson_with_sign():
    # Laplacian(p) = -d_i d_j (u_i v_j)
    g = Grid(16)
    x, y, z = g.coordinates()
    u = to_spectral(g, np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y), 0 * x]))
    p = solve_pressure(u, u).physical()
    expect = (np.cos(2 * x) + np.cos(2 * y)) / 4
    assert np.allclose(p, expect, atol=1e-13)


# -- shift and increments ------------------------------------------------------------


def test_shift_zero_is_identity():
    v = random_field(seed=8)
    assert np.allclose(shift(v, (0, 0, 0)).coeffs, v.coeffs, atol=0)


def test_shift_by_pi_flips_sin():
    grid, samples = sin_x_ey()
    w = to_spectral(grid, samples)
    assert np.allclose(shift(w, (np.pi, 0, 0)).physical(), -samples, atol=1e-14)


def test_shift_off_grid_matches_analytic():
    grid, samples = sin_x_ey()
    w = to_spectral(grid, samples)
    x, _, _ = grid.coordinates()
    assert np.max(np.abs(shift(w, (0.3, 0, 0)).physical()[1] - np.sin(x + 0.3))) <= 1e-12


@given(
    a=st.tuples(*[st.floats(-7, 7)] * 3),
    b=st.tuples(*[st.floats(-7, 7)] * 3),
    seed=st.integers(0, 2**32),
)
def test_shift_group_law(a, b, seed):
    v = random_field(seed=seed)
    lhs = shift(shift(v, a), b).coeffs
    rhs = shift(v, np.add(a, b)).coeffs
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(v.coeffs))


# -- derivatives and norms -------------------------------------------------------------


def test_gradient_and_divergence_of_sin():
    grid, samples = sin_x_ey()
    w = to_spectral(grid, samples)
    g = gradient(w).physical()
    x, _, _ = grid.coordinates()
    assert np.allclose(g[0, 1], np.cos(x), atol=1e-14)
    assert np.allclose(g[1:], 0, atol=1e-14)
    assert np.max(np.abs(divergence(w).coeffs)) < 1e-15


def test_norms_of_sin():
    grid, samples = sin_x_ey()
    n = norms(to_spectral(grid, samples), alpha=1.0)
    assert n["l2_sq"] == pytest.approx(VOLUME / 2, rel=1e-13)
    assert n["h1_alpha_sq"] == pytest.approx(VOLUME, rel=1e-13)
    # independent grid quadrature
    assert np.sum(samples**2) * grid.spacing**3 == pytest.approx(VOLUME / 2, rel=1e-13)


def test_norms_of_zero():
    z = SpectralVectorField.zeros(Grid(8))
    assert norms(z, 1.0) == {"l2_sq": 0.0, "h1_alpha_sq": 0.0}


@given(seed=st.integers(0, 2**32))
def test_generated_fields_are_hermitian(seed):
    assert hermitian_defect(random_field(n=16, seed=seed)) <= 1e-15
