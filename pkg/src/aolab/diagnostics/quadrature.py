"""Spherical quadrature over the ball of radius epsilon.

Nodes are written as xi = eps * s * d with s in (0, 1) a Gauss-Legendre
abscissa and d a unit direction, so that

    int_{|xi| < eps} f(xi) dxi  ~=  eps^3 sum_{s, d} w_s w_d s^2 f(eps s d).

Every direction set here comes in antipodal pairs with equal weights, which
lets odd integrands cancel to round-off and lets callers fold the set in half.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..errors import ConfigurationError

DIRECTION_SETS = ("stencil26", "lebedev26", "gauss_product")


def _stencil_vectors():
    pts = np.array([p for p in product((-1, 0, 1), repeat=3) if any(p)], dtype=float)
    return pts


def stencil_directions():
    """The 26 normalised offsets of the {-1,0,1}^3 stencil with equal weights."""
    pts = _stencil_vectors()
    dirs = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    return dirs, np.full(len(dirs), 4.0 * np.pi / len(dirs))


def lebedev26_directions():
    """Same 26 points weighted as the degree-7 Lebedev rule."""
    pts = _stencil_vectors()
    order = np.count_nonzero(pts, axis=1)
    table = {1: 1.0 / 21.0, 2: 4.0 / 105.0, 3: 9.0 / 280.0}
    w = np.array([table[o] for o in order]) * 4.0 * np.pi
    return pts / np.linalg.norm(pts, axis=1, keepdims=True), w


def gauss_product_directions(n_theta):
    """Gauss-Legendre in cos(theta) times 2*n_theta uniform azimuths.

    Exact for spherical polynomials of degree below 2*n_theta.  n_theta must
    be even so the polar nodes pair up under x -> -x.
    """
    if n_theta < 2 or n_theta % 2:
        raise ConfigurationError(f"n_theta must be a positive even integer, got {n_theta}")
    mu, wmu = np.polynomial.legendre.leggauss(n_theta)
    n_phi = 2 * n_theta
    phi = (np.arange(n_phi) + 0.5) * 2.0 * np.pi / n_phi
    sin_t = np.sqrt(1.0 - mu**2)
    dirs = np.stack(
        [
            (sin_t[:, None] * np.cos(phi)[None, :]).ravel(),
            (sin_t[:, None] * np.sin(phi)[None, :]).ravel(),
            np.repeat(mu, n_phi),
        ],
        axis=1,
    )
    w = np.repeat(wmu, n_phi) * (2.0 * np.pi / n_phi)
    return dirs, w


def antipodal_half(dirs, weights):
    """Indices of one representative per antipodal pair.

    Raises if the set is not closed under d -> -d with matching weights.
    """
    keep = []
    used = np.zeros(len(dirs), dtype=bool)
    for i, d in enumerate(dirs):
        if used[i]:
            continue
        j = int(np.argmin(np.linalg.norm(dirs + d, axis=1)))
        if np.linalg.norm(dirs[j] + d) > 1e-12 or abs(weights[j] - weights[i]) > 1e-14:
            raise ConfigurationError("direction set is not antipodally paired")
        used[i] = used[j] = True
        keep.append(i)
    return np.array(keep)


@dataclass(frozen=True, eq=False)
class XiQuadrature:
    """Radial Gauss-Legendre nodes on (0, 1) combined with a direction set."""

    n_r: int = 16
    directions: str = "lebedev26"
    n_theta: int = 8
    dirs: np.ndarray = field(init=False, repr=False)
    dir_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_r < 1:
            raise ConfigurationError(f"n_r must be positive, got {self.n_r}")
        if self.directions == "stencil26":
            d, w = stencil_directions()
        elif self.directions == "lebedev26":
            d, w = lebedev26_directions()
        elif self.directions == "gauss_product":
            d, w = gauss_product_directions(self.n_theta)
        else:
            raise ConfigurationError(
                f"unknown direction set {self.directions!r}; expected one of {DIRECTION_SETS}"
            )
        object.__setattr__(self, "dirs", d)
        object.__setattr__(self, "dir_weights", w)

    @property
    def n_dir(self):
        return len(self.dirs)

    def radial(self):
        """Gauss-Legendre abscissas and weights mapped to (0, 1)."""
        x, w = np.polynomial.legendre.leggauss(self.n_r)
        return 0.5 * (x + 1.0), 0.5 * w

    def refined(self):
        return XiQuadrature(2 * self.n_r, self.directions, self.n_theta)

    def half(self):
        """Directions and doubled weights, one per antipodal pair."""
        idx = antipodal_half(self.dirs, self.dir_weights)
        return self.dirs[idx], 2.0 * self.dir_weights[idx]

    def nodes(self, epsilon, fold=False):
        """Points ``xi`` (m, 3), scaled radii ``s`` (m,), directions (m, 3)
        and volume weights (m,) for integration over the eps-ball."""
        s, ws = self.radial()
        dirs, wd = self.half() if fold else (self.dirs, self.dir_weights)
        ss = np.repeat(s, len(dirs))
        dd = np.tile(dirs, (len(s), 1))
        w = epsilon**3 * np.repeat(ws * s**2, len(dirs)) * np.tile(wd, len(s))
        return epsilon * ss[:, None] * dd, ss, dd, w

    def integrate(self, f, epsilon):
        """Integrate a vectorised ``f(xi)`` over the ball of radius epsilon."""
        xi, _, _, w = self.nodes(epsilon)
        return float(np.sum(w * f(xi)))


__all__ = [
    "DIRECTION_SETS",
    "XiQuadrature",
    "antipodal_half",
    "gauss_product_directions",
    "lebedev26_directions",
    "stencil_directions",
]
