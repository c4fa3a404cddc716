"""Radial mollifiers of unit mass supported in the ball of radius epsilon."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from ..errors import ConfigurationError

PROFILES = ("bump", "polynomial")


def _bump(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def _bump_slope(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1.0
    ri = r[inside]
    q = 1.0 - ri**2
    out[inside] = np.exp(-1.0 / q) * (-2.0 * ri / q**2)
    return out


def _poly(r):
    r = np.asarray(r, dtype=float)
    return np.where(r < 1.0, (1.0 - np.minimum(r, 1.0) ** 2) ** 4, 0.0)


def _poly_slope(r):
    r = np.asarray(r, dtype=float)
    rc = np.minimum(r, 1.0)
    return np.where(r < 1.0, -8.0 * rc * (1.0 - rc**2) ** 3, 0.0)


_SHAPES = {"bump": (_bump, _bump_slope), "polynomial": (_poly, _poly_slope)}


@lru_cache(maxsize=None)
def _normaliser(profile):
    rho = _SHAPES[profile][0]
    mass, _ = quad(lambda r: 4.0 * np.pi * r * r * float(rho(r)), 0.0, 1.0,
                   epsabs=1e-14, epsrel=1e-13, limit=200)
    return 1.0 / mass


@dataclass(frozen=True)
class Mollifier:
    """phi_eps(x) = eps^-3 c rho(|x|/eps) with c chosen so the integral is one.

    ``profile`` is ``"bump"`` (exp(-1/(1-r^2))) or ``"polynomial"`` ((1-r^2)^4).
    """

    epsilon: float
    profile: str = "bump"

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ConfigurationError(f"unknown mollifier profile {self.profile!r}")
        if not self.epsilon > 0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def normaliser(self):
        return _normaliser(self.profile)

    def rho(self, s):
        """Unnormalised profile at scaled radius s = |x|/eps."""
        return _SHAPES[self.profile][0](s)

    def rho_slope(self, s):
        """d rho / d s."""
        return _SHAPES[self.profile][1](s)

    def at_scale(self, epsilon):
        return Mollifier(epsilon, self.profile)

    def phi(self, x):
        """phi_eps at points ``x`` shaped (..., 3)."""
        r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        eps = self.epsilon
        return self.normaliser * self.rho(r / eps) / eps**3

    def grad_phi(self, x):
        """Analytic gradient eps^-4 c rho'(|x|/eps) x/|x|, zero at the origin."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        eps = self.epsilon
        radial = self.normaliser * self.rho_slope(r / eps) / eps**4
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[..., None] > 0, x / r[..., None], 0.0)
        return radial[..., None] * unit

    def fourier(self, kmag, nodes=96):
        """Transform of phi_eps at wavenumber magnitudes ``kmag``.

        For a radial kernel this is 4 pi c int_0^1 rho(s) s^2 sinc(k eps s) ds,
        evaluated with Gauss-Legendre nodes; equals one at k = 0.
        """
        kmag = np.asarray(kmag, dtype=float)
        x, w = np.polynomial.legendre.leggauss(nodes)
        s = 0.5 * (x + 1.0)
        w = 0.5 * w * 4.0 * np.pi * self.normaliser * s**2 * self.rho(s)
        flat = kmag.ravel()
        uniq, inv = np.unique(flat, return_inverse=True)
        arg = np.outer(uniq * self.epsilon, s)
        vals = (np.sinc(arg / np.pi) * w).sum(axis=1)
        return vals[inv].reshape(kmag.shape)

    def mass(self):
        """Numerical integral of phi_eps over R^3; one up to quadrature error."""
        eps = self.epsilon
        value, _ = quad(lambda r: 4.0 * np.pi * r * r * float(self.phi([r, 0.0, 0.0])),
                        0.0, eps, epsabs=1e-14, epsrel=1e-13, limit=200)
        return value


__all__ = ["Mollifier", "PROFILES"]
