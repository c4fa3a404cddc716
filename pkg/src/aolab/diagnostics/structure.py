"""Increment statistics: structure functions, Besov slope fits, sigma probes."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DegenerateFitError
from ..spectral import VOLUME, inverse_coeffs, shift_phase
from .quadrature import stencil_directions

FIT_FLOOR = 1e-14


def increment(w, xi):
    """Real samples of w(x + xi) - w(x); exact for band-limited w."""
    xi = np.asarray(xi, dtype=float)
    n = w.grid.n
    return inverse_coeffs(w.coeffs * shift_phase(w.grid, xi), n) - inverse_coeffs(w.coeffs, n)


def _directions(directions):
    if directions is None:
        return stencil_directions()[0]
    d = np.atleast_2d(np.asarray(directions, dtype=float))
    norm = np.linalg.norm(d, axis=1, keepdims=True)
    if np.any(norm == 0):
        raise ConfigurationError("zero direction vector")
    return d / norm


def _check_radii(radii):
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(radii <= 0) or np.any(radii > np.pi):
        raise ConfigurationError("radii must lie in (0, pi]")
    return radii


@dataclass(frozen=True, eq=False)
class StructureFunctionTable:
    p: int
    radii: np.ndarray
    directions: np.ndarray
    values: np.ndarray


def structure_function(w, p, radii, directions=None):
    """S_p(r): volume average of |dw(r d; x)|^p, averaged over directions d.

    ``directions`` defaults to the 26 normalised stencil offsets with equal
    weights.  The magnitude |dw| is the Euclidean norm over components.
    """
    if p not in (1, 2, 3):
        raise ConfigurationError(f"structure function order must be 1, 2 or 3, got {p}")
    radii = _check_radii(radii)
    dirs = _directions(directions)
    n = w.grid.n
    base = inverse_coeffs(w.coeffs, n)
    values = np.zeros(len(radii))
    for i, r in enumerate(radii):
        acc = 0.0
        for d in dirs:
            shifted = inverse_coeffs(w.coeffs * shift_phase(w.grid, r * d), n)
            mag = np.sqrt(np.sum((shifted - base) ** 2, axis=0))
            acc += np.mean(mag**p)
        values[i] = acc / len(dirs)
    return StructureFunctionTable(p, radii, dirs, values)


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares log-log slope ``exponent`` with its coefficient of
    determination ``r2`` over ``window`` = (r_min, r_max)."""

    exponent: float
    r2: float
    window: tuple
    p: int = 3

    @property
    def besov_s(self):
        return self.exponent / self.p


def fit_slope(radii, values, p=3, window=None):
    """Fit log S against log r over samples inside ``window`` above the floor."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    ok = (values > FIT_FLOOR) & (radii > 0)
    if window is not None:
        ok &= (radii >= window[0]) & (radii <= window[1])
    if not np.any(values > FIT_FLOOR):
        raise DegenerateFitError("structure function table is identically zero")
    if ok.sum() < 2:
        raise DegenerateFitError("fewer than two usable samples in the fit window")
    x, y = np.log(radii[ok]), np.log(values[ok])
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 if ss == 0 else 1.0 - np.sum(resid**2) / ss
    return SlopeFit(float(slope), float(r2), (float(radii[ok].min()), float(radii[ok].max())), p)


def default_window(grid):
    """Radii between four grid spacings and pi/2, where rough synthetic fields
    show their power law before the dealiasing cutoff smooths them."""
    return (4.0 * grid.spacing, np.pi / 2)


def besov_exponent_estimate(w, p=3, window=None, count=10, directions=None):
    """Fit zeta_p from S_p over geometric radii spanning ``window``.

    The Besov index estimate is ``fit.besov_s`` = zeta_p / p.
    """
    window = default_window(w.grid) if window is None else tuple(window)
    if not (0 < window[0] < window[1] <= np.pi):
        raise ConfigurationError(f"invalid fit window {window}")
    radii = np.geomspace(window[0], window[1], count)
    table = structure_function(w, p, radii, directions)
    return fit_slope(table.radii, table.values, p), table


@dataclass(frozen=True, eq=False)
class SigmaProbe:
    """sigma(r) = direction-averaged int |da||db||dc| dx divided by r.

    ``trend`` is true when the mean of sigma over the smallest quartile of
    radii lies below that over the largest quartile (sigma -> 0 observed).
    """

    radii: np.ndarray
    sigma: np.ndarray
    trend: bool


def sigma_probe(fields, radii, directions=None):
    """Probe the sigma-condition for a role triple ``fields = (a, b, c)``."""
    a, b, c = fields
    radii = np.sort(_check_radii(radii))
    if len(radii) < 4:
        raise ConfigurationError("sigma_probe needs at least four radii")
    dirs = _directions(directions)
    distinct = []
    for f in (a, b, c):
        if not any(f is g for g in distinct):
            distinct.append(f)
    sigma = np.zeros(len(radii))
    for i, r in enumerate(radii):
        acc = 0.0
        for d in dirs:
            mags = {id(f): np.sqrt(np.sum(increment(f, r * d) ** 2, axis=0)) for f in distinct}
            acc += np.mean(mags[id(a)] * mags[id(b)] * mags[id(c)]) * VOLUME
        sigma[i] = acc / len(dirs) / r
    q = max(1, len(radii) // 4)
    trend = bool(np.mean(sigma[:q]) < np.mean(sigma[-q:]))
    if np.all(sigma == 0):
        trend = True
    return SigmaProbe(radii, sigma, trend)


__all__ = [
    "SigmaProbe",
    "SlopeFit",
    "StructureFunctionTable",
    "besov_exponent_estimate",
    "default_window",
    "fit_slope",
    "increment",
    "sigma_probe",
    "structure_function",
]
