"""Inviscid alpha-models in projected pseudo-spectral form.

Every model is written as dv/dt = -P[N(u, v, ...)] where P is the Leray
projector, so the pressure (and the magnetic pressure for MHD) never has
to be computed.  Quadratic products are formed in real space and truncated
with the two-thirds rule, which makes each model an exact Galerkin
truncation: the discrete tendencies conserve the model's energy exactly and
only the time stepper drifts.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
from enum import Enum
from typing import Optional

import numpy as np

from .errors import BlowUpError, ConfigurationError, StateError
from .spectral import (
    FilterSpec,
    SpectralVectorField,
    apply_inverse_filter,
    forward_coeffs,
    inner,
    inverse_coeffs,
    norms,
)


class ModelKind(str, Enum):
    EULER = "euler"
    LERAY_ALPHA = "leray_alpha"
    EULER_ALPHA = "euler_alpha"
    MODIFIED_LERAY_ALPHA = "modified_leray_alpha"
    CLARK_ALPHA = "clark_alpha"
    MHD_LERAY_ALPHA = "mhd_leray_alpha"

    @property
    def has_magnetic_field(self):
        return self is ModelKind.MHD_LERAY_ALPHA

    @property
    def conserves_h1(self):
        return self in _H1_KINDS


_H1_KINDS = frozenset(
    {ModelKind.EULER_ALPHA, ModelKind.MODIFIED_LERAY_ALPHA, ModelKind.CLARK_ALPHA}
)

HYDRO_ALPHA_KINDS = (
    ModelKind.LERAY_ALPHA,
    ModelKind.EULER_ALPHA,
    ModelKind.MODIFIED_LERAY_ALPHA,
    ModelKind.CLARK_ALPHA,
)


@dataclass(frozen=True, eq=False)
class ModelState:
    """Evolved fields of one model.  ``u`` is always derived from ``v``."""

    kind: ModelKind
    v: SpectralVectorField
    filter: FilterSpec = field(default_factory=FilterSpec)
    b: Optional[SpectralVectorField] = None
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.kind.has_magnetic_field and self.b is None:
            raise StateError(f"{self.kind.value} requires a magnetic field")
        if not self.kind.has_magnetic_field and self.b is not None:
            raise StateError(f"{self.kind.value} does not carry a magnetic field")

    @property
    def grid(self):
        return self.v.grid

    @property
    def u(self):
        if self.kind is ModelKind.EULER:
            return self.v
        return apply_inverse_filter(self.filter, self.v)


@dataclass(frozen=True, eq=False)
class Tendency:
    dv: SpectralVectorField
    db: Optional[SpectralVectorField] = None


@dataclass(frozen=True)
class _Band:
    """Index set and wavenumbers of the modes kept by the two-thirds rule."""

    ix: np.ndarray
    iy: np.ndarray
    nz: int
    kx: np.ndarray
    ky: np.ndarray
    kz: np.ndarray
    inv_k2: np.ndarray

    def take(self, c):
        return c[..., self.ix[:, None], self.iy[None, :], : self.nz]

    def scatter(self, cb, grid):
        out = np.zeros(cb.shape[:-3] + grid.spectral_shape, dtype=complex)
        out[..., self.ix[:, None], self.iy[None, :], : self.nz] = cb
        return out


@lru_cache(maxsize=8)
def _band(n):
    cut = n // 3
    idx = np.r_[0 : cut + 1, n - cut : n]
    k = np.fft.fftfreq(n, 1.0 / n)
    kx = k[idx][:, None, None]
    ky = k[idx][None, :, None]
    kz = np.arange(cut + 1, dtype=float)[None, None, :]
    k2 = kx**2 + ky**2 + kz**2
    inv_k2 = np.zeros_like(k2)
    np.divide(1.0, k2, out=inv_k2, where=k2 > 0)
    return _Band(idx, idx, cut + 1, kx, ky, kz, inv_k2)


def _divergence_of(t, band):
    """(div T)_j = d_i T_ij for band-restricted tensors ``t[..., i, j, :, :, :]``."""
    return 1j * (band.kx * t[..., 0, :, :, :, :]
                 + band.ky * t[..., 1, :, :, :, :]
                 + band.kz * t[..., 2, :, :, :, :])


def _project(c, band):
    kdotc = (band.kx * c[..., 0, :, :, :] + band.ky * c[..., 1, :, :, :]
             + band.kz * c[..., 2, :, :, :]) * band.inv_k2
    out = np.empty_like(c)
    out[..., 0, :, :, :] = c[..., 0, :, :, :] - band.kx * kdotc
    out[..., 1, :, :, :] = c[..., 1, :, :, :] - band.ky * kdotc
    out[..., 2, :, :, :] = c[..., 2, :, :, :] - band.kz * kdotc
    return out


def _curl(c, band):
    """Curl of band-restricted vector coefficients."""
    cx, cy, cz = c[0], c[1], c[2]
    return 1j * np.stack([
        band.ky * cz - band.kz * cy,
        band.kz * cx - band.kx * cz,
        band.kx * cy - band.ky * cx,
    ])


def _to_real(parts, n, band):
    """Inverse transform a stack of band-restricted vectors in one batch."""
    stacked = np.concatenate(parts)
    full = np.zeros(stacked.shape[:-3] + (n, n, n // 2 + 1), dtype=complex)
    full[..., band.ix[:, None], band.iy[None, :], : band.nz] = stacked
    return inverse_coeffs(full, n)


def _products(pairs, n):
    """Pointwise products a_i * b_j packed as 3x3 blocks, one block per pair."""
    out = np.empty((len(pairs), 3, 3) + (n, n, n))
    for p, (a, b) in enumerate(pairs):
        np.multiply(a[:, None], b[None, :], out=out[p])
    return out


def _cross(a, b):
    """Pointwise a x b for real arrays shaped (3, ...)."""
    return np.stack([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def _forward_band(t, n, band):
    return band.take(forward_coeffs(t, n))


def nonlinear_term(state):
    """Unprojected, dealiased nonlinearity N for the momentum (and induction).

    Returns coefficients restricted to the dealiased band (see ``_band``),
    shaped (3, ...) or, for MHD, (2, 3, ...).  Terms that differ only by a
    gradient are interchangeable here because the result is always projected,
    so the cheapest equivalent form is used: for Euler and Euler-alpha the
    advection is written as curl(v) x u.
    """
    grid = state.grid
    n = grid.n
    band = _band(n)
    kind = state.kind
    v = band.take(state.v.coeffs)
    u = v if kind is ModelKind.EULER else band.take(state.u.coeffs)

    if kind is ModelKind.MHD_LERAY_ALPHA:
        # Elsasser-like pairing: N_v + N_B = div((u - B)(v + B)) and
        # N_v - N_B = div((u + B)(v - B)), two products instead of four.
        b = band.take(state.b.coeffs)
        ur, vr, br = _to_real([u, v, b], n, band).reshape((3, 3) + (n,) * 3)
        t = _products([(ur - br, vr + br), (ur + br, vr - br)], n)
        s, d = _divergence_of(_forward_band(t, n, band), band)
        return np.stack([0.5 * (s + d), 0.5 * (s - d)])

    if kind in (ModelKind.EULER, ModelKind.EULER_ALPHA):
        ur, wr = _to_real([u, _curl(v, band)], n, band).reshape((2, 3) + (n,) * 3)
        return _forward_band(_cross(wr, ur), n, band)

    if kind in (ModelKind.LERAY_ALPHA, ModelKind.MODIFIED_LERAY_ALPHA):
        ur, vr = _to_real([u, v], n, band).reshape((2, 3) + (n,) * 3)
        a, b = (vr, ur) if kind is ModelKind.MODIFIED_LERAY_ALPHA else (ur, vr)
        t = _products([(a, b)], n)[0]
        return _divergence_of(_forward_band(t, n, band), band)

    if kind is ModelKind.CLARK_ALPHA:
        # div(u v + v u - u u - alpha^2 grad u grad u^T) equals
        # curl(v) x u + div((v - u) u) up to a gradient.
        ur, wr, dr = _to_real([u, _curl(v, band), v - u], n, band).reshape((3, 3) + (n,) * 3)
        t = _products([(dr, ur)], n)[0]
        spec = _forward_band(np.concatenate([_cross(wr, ur), t.reshape((9,) + t.shape[2:])]), n, band)
        return spec[:3] + _divergence_of(spec[3:].reshape((3, 3) + spec.shape[1:]), band)

    raise StateError(f"unsupported model {kind!r}")


def rhs(state):
    """Projected tendency of the state's evolved fields."""
    grid = state.grid
    band = _band(grid.n)
    proj = band.scatter(-_project(nonlinear_term(state), band), grid)
    if state.kind is ModelKind.MHD_LERAY_ALPHA:
        return Tendency(
            SpectralVectorField(grid, proj[0], True),
            SpectralVectorField(grid, proj[1], True),
        )
    return Tendency(SpectralVectorField(grid, proj, True))


def _advance(state, tend, h, time=None):
    v = SpectralVectorField(state.grid, state.v.coeffs + h * tend.dv.coeffs, True)
    b = None
    if state.b is not None:
        b = SpectralVectorField(state.grid, state.b.coeffs + h * tend.db.coeffs, True)
    return replace(state, v=v, b=b, time=state.time if time is None else time)


def step_rk4(state, dt):
    """One classical four-stage Runge-Kutta step."""
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    k1 = rhs(state)
    k2 = rhs(_advance(state, k1, 0.5 * dt))
    k3 = rhs(_advance(state, k2, 0.5 * dt))
    k4 = rhs(_advance(state, k3, dt))
    dv = (k1.dv.coeffs + 2 * k2.dv.coeffs + 2 * k3.dv.coeffs + k4.dv.coeffs) / 6.0
    db = None
    if state.b is not None:
        db = (k1.db.coeffs + 2 * k2.db.coeffs + 2 * k3.db.coeffs + k4.db.coeffs) / 6.0
        db = SpectralVectorField(state.grid, db, True)
    new = _advance(
        state, Tendency(SpectralVectorField(state.grid, dv, True), db), dt,
        time=state.time + dt,
    )
    finite = np.all(np.isfinite(new.v.coeffs))
    if new.b is not None:
        finite = finite and np.all(np.isfinite(new.b.coeffs))
    if not finite:
        raise BlowUpError("non-finite values after RK4 step", new.time)
    return new


def conserved_quantity(state):
    """The model's formally conserved energy-like quantity."""
    kind = state.kind
    if kind.conserves_h1:
        return norms(state.u, state.filter.alpha)["h1_alpha_sq"]
    energy = norms(state.v)["l2_sq"]
    if kind is ModelKind.MHD_LERAY_ALPHA:
        energy += norms(state.b)["l2_sq"]
    return energy


def tendency_pairing(state, tend=None):
    """Energy production of a tendency; zero for an exactly conservative rhs.

    Returns (pairing, scale) where scale normalises the pairing for relative
    comparisons.
    """
    if tend is None:
        tend = rhs(state)
    kind = state.kind
    if kind.conserves_h1:
        u = state.u
        return inner(u, tend.dv), np.sqrt(norms(u)["l2_sq"] * norms(tend.dv)["l2_sq"])
    value = inner(state.v, tend.dv)
    scale = norms(state.v)["l2_sq"] * norms(tend.dv)["l2_sq"]
    if kind is ModelKind.MHD_LERAY_ALPHA:
        value += inner(state.b, tend.db)
        scale = (norms(state.v)["l2_sq"] + norms(state.b)["l2_sq"]) * (
            norms(tend.dv)["l2_sq"] + norms(tend.db)["l2_sq"]
        )
    return value, np.sqrt(scale)


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    def relative_drift(self):
        e = np.asarray(self.energies, dtype=float)
        if e.size == 0 or e[0] == 0.0:
            return np.zeros_like(e)
        return (e - e[0]) / e[0]

    def max_drift(self):
        d = self.relative_drift()
        return float(np.max(np.abs(d))) if d.size else 0.0


def run_simulation(state0, dt, t_end, cadence=1, keep_snapshots=False,
                   on_record=None, jump_tolerance=0.1):
    """Advance ``state0`` to ``t_end`` recording the energy every ``cadence`` steps.

    ``on_record(state)`` is called at every recorded step, including t=0.
    A :class:`BlowUpError` raised here carries the partial trajectory.
    """
    if not t_end > 0:
        raise ConfigurationError(f"t_end must be positive, got {t_end}")
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    steps = int(round(t_end / dt))
    if steps < 1 or abs(steps * dt - t_end) > 1e-9 * t_end:
        raise ConfigurationError(f"t_end={t_end} is not a whole number of steps dt={dt}")
    if cadence < 1 or steps % cadence:
        raise ConfigurationError(f"cadence {cadence} does not divide {steps} steps")

    traj = Trajectory()
    t0 = state0.time
    state = state0

    def record(s):
        traj.times.append(s.time)
        traj.energies.append(conserved_quantity(s))
        if keep_snapshots:
            traj.snapshots.append(s)
        if on_record is not None:
            on_record(s)

    record(state)
    e0 = traj.energies[0]
    for i in range(1, steps + 1):
        try:
            state = step_rk4(state, dt)
        except BlowUpError as exc:
            exc.trajectory = traj
            raise
        state = replace(state, time=t0 + i * dt)
        if i % cadence == 0:
            record(state)
            e = traj.energies[-1]
            if not np.isfinite(e) or (e0 > 0 and abs(e - e0) > jump_tolerance * e0):
                raise BlowUpError(
                    f"energy jump {abs(e - e0) / e0:.3g} exceeds {jump_tolerance}",
                    state.time, traj,
                )
    return traj
