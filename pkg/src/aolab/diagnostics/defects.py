"""Defect terms D1..D11 as mollified increment integrals.

Two kernels cover the whole catalog:

    P1  = pre * int int d_i phi_eps(xi) da_i (db . dc) dxi dx
    P3  =       int int d_i phi_eps(xi) du_j d(d_k u_i) d(d_k u_j) dxi dx

with dw = w(x + xi) - w(x).  The x-integral is an exact grid sum (products
of three band-limited fields stay below the Nyquist frequency) and the
increments use exact spectral shifts, so the only approximation is the
quadrature over xi.  Because d phi_eps is parallel to xi, only xi.F enters.

The x-integrated cubic is odd in xi and so is grad phi, so the integrated
value is even and may be computed from one direction per antipodal pair
(``fold=True``).  The pointwise density has no such symmetry.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ConfigurationError, DegenerateFitError
from ..models import ModelKind
from ..spectral import inverse_coeffs
from .mollifier import Mollifier
from .quadrature import XiQuadrature

ROLES = ("u", "v", "B", "grad_u")


@dataclass(frozen=True)
class DefectSpec:
    label: str
    pattern: str
    field_a: str = "u"
    field_b: str = "u"
    field_c: str = "u"
    prefactor: float = 1.0

    def __post_init__(self):
        if self.pattern not in ("P1", "P3"):
            raise ConfigurationError(f"unknown defect pattern {self.pattern!r}")
        for role in (self.field_a, self.field_b, self.field_c):
            if role not in ROLES:
                raise ConfigurationError(f"unknown field role {role!r}")
        if self.pattern == "P1" and self.field_a == "grad_u":
            raise ConfigurationError("the transported role of P1 must be a vector field")
        if self.pattern == "P1" and (self.field_b == "grad_u") != (self.field_c == "grad_u"):
            raise ConfigurationError("P1 contracts b with c; both or neither may be grad_u")

    @property
    def roles(self):
        if self.pattern == "P3":
            return ("u", "grad_u")
        return tuple(dict.fromkeys((self.field_a, self.field_b, self.field_c)))

    @property
    def needs_magnetic_field(self):
        return "B" in (self.field_a, self.field_b, self.field_c)


CATALOG = {
    "D1": DefectSpec("D1", "P1", "u", "v", "v", 0.5),
    "D2": DefectSpec("D2", "P1", "u", "u", "u", 0.5),
    "D3": DefectSpec("D3", "P1", "u", "grad_u", "grad_u", 1.0),
    "D4": DefectSpec("D4", "P1", "u", "u", "u", 0.5),
    "D5": DefectSpec("D5", "P3"),
    "D6": DefectSpec("D6", "P1", "u", "u", "u", 0.5),
    "D7": DefectSpec("D7", "P3"),
    "D8": DefectSpec("D8", "P1", "u", "grad_u", "grad_u", 1.0),
    "D9": DefectSpec("D9", "P1", "u", "v", "v", 0.5),
    "D10": DefectSpec("D10", "P1", "u", "B", "B", 0.5),
    "D11": DefectSpec("D11", "P1", "B", "B", "v", 1.0),
}

# Which model's energy balance each label belongs to.
LABEL_MODELS = {
    "D1": (ModelKind.LERAY_ALPHA,),
    "D2": (ModelKind.EULER_ALPHA,),
    "D3": (ModelKind.EULER_ALPHA,),
    "D4": (ModelKind.MODIFIED_LERAY_ALPHA,),
    "D5": (ModelKind.MODIFIED_LERAY_ALPHA,),
    "D6": (ModelKind.CLARK_ALPHA,),
    "D7": (ModelKind.CLARK_ALPHA,),
    "D8": (ModelKind.CLARK_ALPHA,),
    "D9": (ModelKind.MHD_LERAY_ALPHA,),
    "D10": (ModelKind.MHD_LERAY_ALPHA,),
    "D11": (ModelKind.MHD_LERAY_ALPHA,),
}


def defect_spec(label):
    try:
        return CATALOG[label]
    except KeyError:
        raise ConfigurationError(f"unknown defect label {label!r}") from None


def roles_from_state(state):
    """Role map {u, v[, B]} for a model state."""
    roles = {"u": state.u, "v": state.v}
    if state.b is not None:
        roles["B"] = state.b
    return roles


# -- shifting machinery ------------------------------------------------------------


class _Shifter:
    """Real-space samples of role fields and their translates."""

    def __init__(self, fields, roles):
        missing = [r for r in roles if r != "grad_u" and r not in fields]
        if "grad_u" in roles and "u" not in fields:
            missing.append("u")
        if missing:
            raise ConfigurationError(f"defect needs fields {sorted(set(missing))}")
        grid = next(iter(fields.values())).grid
        for f in fields.values():
            if f.grid.n != grid.n:
                raise ConfigurationError("defect fields live on different grids")
        self.grid = grid
        n = grid.n
        wn = grid.wavenumbers
        blocks, self.slices = [], {}
        start = 0
        for role in roles:
            if role == "grad_u":
                c = fields["u"].coeffs
                c = np.stack([1j * wn.kx * c, 1j * wn.ky * c, 1j * wn.kz * c]).reshape(
                    (9,) + grid.spectral_shape
                )
            else:
                c = fields[role].coeffs
            blocks.append(c)
            self.slices[role] = slice(start, start + len(c))
            start += len(c)
        self.coeffs = np.concatenate(blocks)
        self.base = inverse_coeffs(self.coeffs, n)
        k = np.fft.fftfreq(n, 1.0 / n)
        self._k = (k[:, None, None], k[None, :, None], np.arange(n // 2 + 1)[None, None, :])

    def increments(self, xi):
        kx, ky, kz = self._k
        phase = np.exp(1j * kx * xi[0]) * np.exp(1j * ky * xi[1]) * np.exp(1j * kz * xi[2])
        shifted = inverse_coeffs(self.coeffs * phase, self.grid.n)
        shifted -= self.base
        return {role: shifted[sl] for role, sl in self.slices.items()}


def _p1_density(spec, inc, d):
    a = inc[spec.field_a]
    b = inc[spec.field_b]
    c = inc[spec.field_c]
    along = d[0] * a[0] + d[1] * a[1] + d[2] * a[2]
    return along * np.einsum("i...,i...->...", b, c)


def _p3_density(inc, d):
    du = inc["u"]
    dg = inc["grad_u"].reshape((3, 3) + du.shape[1:])  # dg[k, i] = d(d_k u_i)
    gd = d[0] * dg[:, 0] + d[1] * dg[:, 1] + d[2] * dg[:, 2]
    gu = np.einsum("kj...,j...->k...", dg, du)
    return np.einsum("k...,k...->...", gd, gu)


def _density(spec, inc, d):
    if spec.pattern == "P3":
        return _p3_density(inc, d)
    return _p1_density(spec, inc, d)


# -- estimates --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DefectEstimate:
    """Defect at one scale.

    ``value`` is the space integral of the defect density, ``l1`` the space
    integral of its absolute value, and ``density`` (when kept) the pointwise
    density on the grid.
    """

    label: str
    epsilon: float
    value: float
    l1: float
    n_r: int
    density: Optional[np.ndarray] = field(default=None, repr=False)
    profile: str = "bump"


def check_epsilon(epsilon, grid):
    lo, hi = grid.spacing, np.pi
    if not (lo < epsilon < hi):
        raise ConfigurationError(
            f"epsilon={epsilon:.6g} outside the resolved range ({lo:.6g}, pi) for n={grid.n}"
        )


def _accumulate(specs, shifter, epsilon, profiles, quad, fold):
    """Defect densities for every (label, profile) pair at one scale.

    All labels and profiles share the xi nodes, so each node costs a single
    batched shift.  With ``fold`` only one direction per antipodal pair is
    visited; the space integral is unchanged but the pointwise density is not
    the true one, so folding is only used when the density is discarded.
    """
    xi, s, dirs, w = quad.nodes(epsilon, fold=fold)
    # grad phi_eps(xi) = eps^-4 c rho'(s) d, so only d . F is needed
    coef = {
        p: w * Mollifier(epsilon, p).normaliser * Mollifier(epsilon, p).rho_slope(s) / epsilon**4
        for p in profiles
    }
    shape = shifter.grid.physical_shape
    out = {(sp.label, p): np.zeros(shape) for sp in specs for p in profiles}
    for j in range(len(xi)):
        if all(coef[p][j] == 0.0 for p in profiles):
            continue
        inc = shifter.increments(xi[j])
        for sp in specs:
            g = _density(sp, inc, dirs[j])
            for p in profiles:
                out[(sp.label, p)] += (sp.prefactor * coef[p][j]) * g
    return out


def _as_specs(specs):
    if isinstance(specs, (str, DefectSpec)):
        specs = [specs]
    return [defect_spec(s) if isinstance(s, str) else s for s in specs]


def _shared_roles(specs):
    return tuple(dict.fromkeys(r for sp in specs for r in sp.roles))


def defect_estimates(specs, fields, epsilon, quad=None, profiles=("bump",),
                     keep_density=False, fold=None):
    """Estimates for several labels and mollifier profiles at one scale.

    Returns ``{(label, profile): DefectEstimate}``.  ``l1`` needs the true
    pointwise density and is NaN when ``fold`` is requested.
    """
    specs = _as_specs(specs)
    quad = quad or XiQuadrature()
    shifter = _Shifter(fields, _shared_roles(specs))
    check_epsilon(epsilon, shifter.grid)
    fold = False if fold is None else fold
    dv = shifter.grid.spacing**3
    dens = _accumulate(specs, shifter, epsilon, profiles, quad, fold)
    out = {}
    for (label, p), d in dens.items():
        l1 = float("nan") if fold else float(np.abs(d).sum() * dv)
        out[(label, p)] = DefectEstimate(
            label, epsilon, float(d.sum() * dv), l1, quad.n_r,
            d if keep_density and not fold else None, p,
        )
    return out


def defect_estimate(spec, fields, mollifier, quad=None, refine=False, keep_density=False,
                    tolerance=5e-3, max_radial=128):
    """Estimate the defect ``spec`` at scale ``mollifier.epsilon``.

    ``fields`` maps role names (u, v, B) to spectral vector fields; grad_u is
    derived from u.  With ``refine`` the radial rule is doubled until the
    integrated value moves by less than ``tolerance`` (relative).
    """
    (spec,) = _as_specs(spec)
    quad = quad or XiQuadrature()
    key = (spec.label, mollifier.profile)

    def run(q):
        return defect_estimates(spec, fields, mollifier.epsilon, q, (mollifier.profile,),
                                keep_density)[key]

    est = run(quad)
    while refine and 2 * quad.n_r <= max_radial:
        quad = quad.refined()
        finer = run(quad)
        moved = abs(finer.value - est.value)
        est = finer
        if moved <= tolerance * abs(finer.value) or finer.value == 0.0:
            break
    return est


# -- series ------------------------------------------------------------------------


def default_ladder(grid, count=8):
    """Geometric ladder from pi/4 down to max(4 h, pi/64), h the grid spacing.

    On coarse grids where 4 h would leave less than a factor of two, the
    lower end drops to 1.25 h so the ladder still spans a usable range.
    """
    top = np.pi / 4
    low = max(4.0 * grid.spacing, np.pi / 64)
    if low > top / 2:
        low = 1.25 * grid.spacing
    if low >= top:
        raise ConfigurationError(f"grid n={grid.n} is too coarse for a defect ladder")
    return np.geomspace(top, low, count)


@dataclass(frozen=True, eq=False)
class DefectSeries:
    label: str
    epsilons: np.ndarray
    values: np.ndarray
    l1: np.ndarray
    slope: float
    slope_value: float
    degenerate: bool
    profile: str = "bump"

    def rows(self):
        return [
            (self.label, float(e), float(v), float(a), self.slope)
            for e, v, a in zip(self.epsilons, self.values, self.l1)
        ]


def loglog_slope(x, y, floor=1e-14):
    """Least-squares slope of log|y| against log x over samples with |y| > floor."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    ok = (y > floor) & (x > 0)
    if ok.sum() < 2:
        raise DegenerateFitError("fewer than two samples above the fit floor")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def _check_ladder(eps, grid):
    eps = np.asarray(eps, dtype=float)
    if eps.ndim != 1 or len(eps) < 2 or np.any(np.diff(eps) >= 0):
        raise ConfigurationError("epsilon ladder must be strictly decreasing with >= 2 entries")
    for e in eps:
        check_epsilon(e, grid)
    return eps


def _series(label, profile, eps, ests):
    values = np.array([e.value for e in ests])
    l1 = np.array([e.l1 for e in ests])
    try:
        slope, degenerate = loglog_slope(eps, l1), False
    except DegenerateFitError:
        slope, degenerate = float("nan"), True
    try:
        slope_value = loglog_slope(eps, values)
    except DegenerateFitError:
        slope_value = float("nan")
    return DefectSeries(label, eps, values, l1, slope, slope_value, degenerate, profile)


def defect_series_many(specs, fields, epsilons=None, quad=None, profiles=("bump",)):
    """Series for several labels and profiles sharing every shift.

    Returns ``{(label, profile): DefectSeries}``.
    """
    specs = _as_specs(specs)
    grid = next(iter(fields.values())).grid
    eps = _check_ladder(default_ladder(grid) if epsilons is None else epsilons, grid)
    per_scale = [defect_estimates(specs, fields, e, quad, profiles) for e in eps]
    return {
        key: _series(key[0], key[1], eps, [pe[key] for pe in per_scale])
        for key in per_scale[0]
    }


def defect_series(spec, fields, epsilons=None, quad=None, profile="bump"):
    """Defect estimates over a descending ladder of scales.

    ``slope`` is fitted to the L1 norm of the pointwise defect density, which
    measures how fast the density itself vanishes; ``slope_value`` is the same
    fit applied to the signed space integral, which cancels exactly for
    symmetric flows.  ``degenerate`` is set (and ``slope`` is NaN) when every
    sample is zero.
    """
    (spec,) = _as_specs(spec)
    return defect_series_many([spec], fields, epsilons, quad, (profile,))[(spec.label, profile)]


__all__ = [
    "CATALOG",
    "DefectEstimate",
    "DefectSeries",
    "DefectSpec",
    "LABEL_MODELS",
    "ROLES",
    "check_epsilon",
    "default_ladder",
    "defect_estimate",
    "defect_estimates",
    "defect_series",
    "defect_series_many",
    "defect_spec",
    "loglog_slope",
    "roles_from_state",
]
