import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aolab.errors import BlowUpError, ConfigurationError, StateError
from aolab.models import (
    HYDRO_ALPHA_KINDS,
    ModelKind,
    ModelState,
    conserved_quantity,
    rhs,
    run_simulation,
    step_rk4,
    tendency_pairing,
)
from aolab.oracles import dense_forward, rhs_oracle
from aolab.spectral import (
    VOLUME,
    FilterSpec,
    Grid,
    SpectralVectorField,
    apply_filter,
    max_divergence,
    to_spectral,
)
from aolab.synthetic import SynthSpec, generate

from conftest import random_field, sin_x_ey

ALL_KINDS = list(ModelKind)


def make_state(kind, v, alpha=0.5, b=None, seed_b=99):
    kind = ModelKind(kind)
    if not kind.has_magnetic_field:
        b = None
    elif b is None:
        b = random_field(v.grid.n, seed=seed_b)
    return ModelState(kind, v, FilterSpec.helmholtz(alpha), b=b)


def shear(n=16, amplitude=1.0):
    g = Grid(n)
    x, y, z = g.coordinates()
    zero = np.zeros_like(x)
    return to_spectral(g, amplitude * np.stack([np.sin(y), zero, zero]), True)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_zero_state_has_zero_tendency(kind):
    z = SpectralVectorField.zeros(Grid(8))
    b = z if ModelKind(kind).has_magnetic_field else None
    t = rhs(make_state(kind, z, b=b))
    assert np.all(t.dv.coeffs == 0)
    if b is not None:
        assert np.all(t.db.coeffs == 0)


def test_zero_state_is_fixed_by_rk4():
    z = SpectralVectorField.zeros(Grid(8))
    s = step_rk4(make_state("leray_alpha", z), 0.1)
    assert np.all(s.v.coeffs == 0) and s.time == pytest.approx(0.1)


def test_shear_is_steady():
    s = make_state("leray_alpha", shear())
    assert np.max(np.abs(rhs(s).dv.coeffs)) < 1e-15
    s1 = step_rk4(s, 0.05)
    assert np.max(np.abs(s1.v.coeffs - s.v.coeffs)) <= 1e-12


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_rhs_matches_dense_oracle(kind):
    v = random_field(8, seed=31)
    b = random_field(8, seed=32)
    state = make_state(kind, v, alpha=0.7, b=b)
    tend = rhs(state)
    ref = rhs_oracle(kind, v.physical(), 0.7, b.physical())
    if ModelKind(kind).has_magnetic_field:
        pairs = [(tend.dv, ref[0]), (tend.db, ref[1])]
    else:
        pairs = [(tend.dv, ref)]
    for got, want in pairs:
        err = np.max(np.abs(dense_forward(got.physical()) - want))
        assert err <= 1e-10 * np.max(np.abs(want))


def test_magnetic_field_bookkeeping():
    v = random_field(8, seed=1)
    with pytest.raises(StateError):
        ModelState("leray_alpha", v, b=v)
    with pytest.raises(StateError):
        ModelState("mhd_leray_alpha", v)


def test_rk4_temporal_order_on_taylor_green():
    g = Grid(16)
    v = generate(SynthSpec("taylor_green", amplitude=2.0), g)
    s0 = make_state("leray_alpha", v, alpha=0.3)

    def run(dt, t_end=0.4):
        s = s0
        for _ in range(int(round(t_end / dt))):
            s = step_rk4(s, dt)
        return s.v.coeffs

    a, b, c = run(0.1), run(0.05), run(0.025)
    order = np.log2(np.linalg.norm(a - b) / np.linalg.norm(b - c))
    assert order >= 3.5


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_rk4_preserves_divergence(kind):
    s = make_state(kind, random_field(16, seed=3, amplitude=20.0))
    for _ in range(3):
        s = step_rk4(s, 0.01)
    assert max_divergence(s.v) <= 1e-11
    if s.b is not None:
        assert max_divergence(s.b) <= 1e-11


def test_blow_up_reports_time():
    v = random_field(8, seed=4)
    v = v * (1e3 / np.abs(v.physical()).max())
    s = make_state("euler", v)
    with pytest.raises(BlowUpError) as info:
        run_simulation(s, 0.5, 100.0)
    assert info.value.time > 0
    assert info.value.trajectory is not None and len(info.value.trajectory.times) >= 1


def test_nan_state_raises_blow_up():
    v = random_field(8, seed=4)
    c = v.coeffs.copy()
    c[0, 1, 0, 0] = np.nan
    s = make_state("leray_alpha", SpectralVectorField(v.grid, c))
    with pytest.raises(BlowUpError):
        step_rk4(s, 0.01)


# -- conserved quantities --------------------------------------------------------------


def test_conserved_quantity_zero():
    z = SpectralVectorField.zeros(Grid(8))
    assert conserved_quantity(make_state("clark_alpha", z)) == 0.0


def test_conserved_quantity_leray_sin():
    grid, samples = sin_x_ey()
    v = to_spectral(grid, samples, True)
    assert conserved_quantity(make_state("leray_alpha", v)) == pytest.approx(VOLUME / 2, rel=1e-13)


def test_conserved_quantity_euler_alpha_h1():
    grid, samples = sin_x_ey()
    spec = FilterSpec.helmholtz(1.0)
    u = to_spectral(grid, samples, True)
    v = apply_filter(spec, u)
    s = ModelState("euler_alpha", v, spec)
    assert conserved_quantity(s) == pytest.approx(VOLUME, rel=1e-13)


def test_conserved_quantity_mhd_adds_magnetic_energy():
    v, b = random_field(8, seed=1), random_field(8, seed=2)
    s = ModelState("mhd_leray_alpha", v, FilterSpec.helmholtz(0.5), b=b)
    lv = conserved_quantity(ModelState("leray_alpha", v, FilterSpec.helmholtz(0.5)))
    lb = conserved_quantity(ModelState("leray_alpha", b, FilterSpec.helmholtz(0.5)))
    assert conserved_quantity(s) == pytest.approx(lv + lb, rel=1e-14)


# -- invariants ---------------------------------------------------------------------------


@settings(max_examples=10)
@given(seed=st.integers(0, 2**32), kind=st.sampled_from(ALL_KINDS), alpha=st.floats(0, 2))
def test_tendency_orthogonality(seed, kind, alpha):
    v = random_field(16, seed=seed)
    value, scale = tendency_pairing(make_state(kind, v, alpha, seed_b=seed + 1))
    assert abs(value) <= 1e-9 * scale


@settings(max_examples=10)
@given(seed=st.integers(0, 2**32))
def test_alpha_zero_collapses_onto_euler(seed):
    v = random_field(16, seed=seed)
    ref = rhs(ModelState("euler", v)).dv.coeffs
    for kind in HYDRO_ALPHA_KINDS:
        got = rhs(ModelState(kind, v, FilterSpec.helmholtz(0.0))).dv.coeffs
        assert np.max(np.abs(got - ref)) <= 1e-12 * np.max(np.abs(ref))


# -- trajectories ---------------------------------------------------------------------------


def test_shear_energy_constant():
    traj = run_simulation(make_state("leray_alpha", shear()), 0.05, 1.0, cadence=5)
    assert np.max(np.abs(traj.relative_drift())) <= 1e-12


def test_zero_field_series_is_zero():
    z = SpectralVectorField.zeros(Grid(8))
    traj = run_simulation(make_state("euler", z), 0.1, 1.0)
    assert all(e == 0 for e in traj.energies) and len(traj.times) == 11


def test_drift_shrinks_with_dt():
    v = random_field(16, seed=7, kmax=4)
    v = v * (6.0 / np.abs(v.physical()).max())
    s = make_state("leray_alpha", v)
    d1 = run_simulation(s, 0.01, 0.5, cadence=5).max_drift()
    d2 = run_simulation(s, 0.005, 0.5, cadence=10).max_drift()
    assert d1 / d2 >= 8


def test_trajectories_are_deterministic():
    s = make_state("clark_alpha", random_field(8, seed=9, amplitude=10.0))
    a = run_simulation(s, 0.02, 0.2, keep_snapshots=True)
    b = run_simulation(s, 0.02, 0.2, keep_snapshots=True)
    assert a.energies == b.energies
    assert np.array_equal(a.snapshots[-1].v.coeffs, b.snapshots[-1].v.coeffs)


@pytest.mark.parametrize("dt,t_end,cadence", [(0.3, 1.0, 1), (0.1, 1.0, 3), (-0.1, 1.0, 1),
                                              (0.1, 0.0, 1)])
def test_run_simulation_validates_schedule(dt, t_end, cadence):
    s = make_state("euler", random_field(8, seed=1))
    with pytest.raises(ConfigurationError):
        run_simulation(s, dt, t_end, cadence)
