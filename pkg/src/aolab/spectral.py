"""Fourier representation of periodic fields on the box [0, 2*pi)^3.

Coefficients are stored in the real-FFT half layout ``(..., n, n, n//2 + 1)``
and normalised so that a field is reconstructed as

    w(x) = sum_k c(k) exp(i k.x),   k integer,

i.e. ``c = rfftn(samples) / n**3``.  Real-space samples use the layout
``(..., ix, iy, iz)`` with ``x_j = 2*pi*j/n``.
"""

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError

TWO_PI = 2.0 * np.pi
VOLUME = TWO_PI**3

_SPATIAL_AXES = (-3, -2, -1)


def fft_workers():
    """Worker count for the FFT backend, capped by ``AOL_THREADS``."""
    env = os.environ.get("AOL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"AOL_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


@dataclass(frozen=True)
class _Wavenumbers:
    kx: np.ndarray
    ky: np.ndarray
    kz: np.ndarray
    k2: np.ndarray
    inv_k2: np.ndarray
    keep: np.ndarray
    multiplicity: np.ndarray


@lru_cache(maxsize=16)
def _wavenumbers(n):
    k1 = np.fft.fftfreq(n, 1.0 / n)
    kr = np.fft.rfftfreq(n, 1.0 / n)
    kx = k1[:, None, None]
    ky = k1[None, :, None]
    kz = kr[None, None, :]
    k2 = kx**2 + ky**2 + kz**2
    inv_k2 = np.zeros_like(k2)
    np.divide(1.0, k2, out=inv_k2, where=k2 > 0)
    cut = n // 3
    keep = (np.abs(kx) <= cut) & (np.abs(ky) <= cut) & (np.abs(kz) <= cut)
    # modes 0 < kz < n/2 stand for themselves and their conjugate partner
    mult = np.full(kr.shape, 2.0)
    mult[0] = 1.0
    if n % 2 == 0:
        mult[-1] = 1.0
    mult = np.broadcast_to(mult[None, None, :], k2.shape)
    out = _Wavenumbers(kx, ky, kz, k2, inv_k2, keep, mult)
    for arr in (kx, ky, kz, k2, inv_k2, keep):
        arr.setflags(write=False)
    return out


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n`` points per axis on [0, 2*pi)^3."""

    n: int

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ConfigurationError(
                f"grid size must be a power of two >= 8, got {n!r}"
            )

    @property
    def length(self):
        return TWO_PI

    @property
    def spacing(self):
        return TWO_PI / self.n

    @property
    def dealias_cutoff(self):
        return self.n // 3

    @property
    def spectral_shape(self):
        return (self.n, self.n, self.n // 2 + 1)

    @property
    def physical_shape(self):
        return (self.n, self.n, self.n)

    @property
    def wavenumbers(self):
        return _wavenumbers(self.n)

    def coordinates(self):
        """Return the three coordinate arrays broadcast to the full grid."""
        x = np.arange(self.n) * self.spacing
        return np.meshgrid(x, x, x, indexing="ij")


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a real field; leading axes index components."""

    grid: Grid
    coeffs: np.ndarray
    solenoidal: bool = False

    def __post_init__(self):
        if self.coeffs.shape[-3:] != self.grid.spectral_shape:
            raise ConfigurationError(
                f"coefficient shape {self.coeffs.shape} does not match grid n={self.grid.n}"
            )

    @property
    def components(self):
        return self.coeffs.shape[:-3]

    def _new(self, coeffs, solenoidal=None):
        if solenoidal is None:
            solenoidal = self.solenoidal
        cls = _class_for(coeffs.shape[:-3])
        return cls(self.grid, coeffs, solenoidal)

    def copy(self):
        return self._new(self.coeffs.copy())

    def __add__(self, other):
        return self._new(self.coeffs + other.coeffs, self.solenoidal and other.solenoidal)

    def __sub__(self, other):
        return self._new(self.coeffs - other.coeffs, self.solenoidal and other.solenoidal)

    def __neg__(self):
        return self._new(-self.coeffs)

    def __mul__(self, scalar):
        return self._new(self.coeffs * scalar)

    __rmul__ = __mul__

    def physical(self):
        return to_physical(self)

    @classmethod
    def zeros(cls, grid, components=(3,)):
        return _class_for(tuple(components))(
            grid, np.zeros(tuple(components) + grid.spectral_shape, complex), True
        )


class ScalarField(SpectralField):
    pass


class SpectralVectorField(SpectralField):
    @classmethod
    def zeros(cls, grid, components=(3,)):
        return super().zeros(grid, components)


class SpectralTensorField(SpectralField):
    pass


def _class_for(components):
    if components == ():
        return ScalarField
    if components == (3,):
        return SpectralVectorField
    if components == (3, 3):
        return SpectralTensorField
    return SpectralField


# -- transforms ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _torch():
    try:
        import torch
    except ImportError:
        return None
    return torch


def fft_backend():
    """Name of the active FFT backend: ``AOL_FFT`` = scipy | torch | auto."""
    choice = os.environ.get("AOL_FFT", "auto").lower()
    if choice not in ("auto", "scipy", "torch"):
        raise ConfigurationError(f"AOL_FFT must be auto, scipy or torch, got {choice!r}")
    if choice == "scipy":
        return "scipy"
    if _torch() is None:
        if choice == "torch":
            raise ConfigurationError("AOL_FFT=torch but torch is not importable")
        return "scipy"
    return "torch"


def forward_coeffs(samples, n):
    """Raw forward transform of real samples to normalised half-spectrum."""
    if fft_backend() == "torch":
        torch = _torch()
        torch.set_num_threads(fft_workers())
        out = torch.fft.rfftn(torch.from_numpy(np.ascontiguousarray(samples)),
                              dim=_SPATIAL_AXES, norm="forward")
        return out.numpy()
    return sfft.rfftn(samples, axes=_SPATIAL_AXES, workers=fft_workers(), norm="forward")


def inverse_coeffs(coeffs, n):
    """Raw inverse of :func:`forward_coeffs`."""
    if fft_backend() == "torch":
        torch = _torch()
        torch.set_num_threads(fft_workers())
        out = torch.fft.irfftn(torch.from_numpy(np.ascontiguousarray(coeffs)),
                               s=(n, n, n), dim=_SPATIAL_AXES, norm="forward")
        return out.numpy()
    return sfft.irfftn(
        coeffs, s=(n, n, n), axes=_SPATIAL_AXES, workers=fft_workers(), norm="forward"
    )


def to_spectral(grid, samples, solenoidal=False):
    samples = np.asarray(samples, dtype=float)
    if samples.shape[-3:] != grid.physical_shape:
        raise ConfigurationError(
            f"sample shape {samples.shape} does not match grid n={grid.n}"
        )
    if not np.all(np.isfinite(samples)):
        raise ConfigurationError("non-finite samples")
    coeffs = forward_coeffs(samples, grid.n)
    return _class_for(samples.shape[:-3])(grid, coeffs, solenoidal)


def to_physical(field):
    return inverse_coeffs(field.coeffs, field.grid.n)


def transform(obj, grid=None):
    """Map real samples to a spectral field, or a spectral field to samples."""
    if isinstance(obj, SpectralField):
        return to_physical(obj)
    if grid is None:
        raise ConfigurationError("a grid is required to transform real samples")
    return to_spectral(grid, obj)


def full_coefficients(field):
    """Coefficients on the full integer lattice ``(..., n, n, n)``."""
    n = field.grid.n
    return sfft.fftn(to_physical(field), axes=_SPATIAL_AXES) / n**3


def hermitian_defect(field):
    """Largest violation of c(-k) = conj(c(k)) on the self-conjugate planes."""
    n = field.grid.n
    worst = 0.0
    for iz in {0, n // 2}:
        plane = field.coeffs[..., iz]
        partner = np.roll(np.flip(plane, axis=(-2, -1)), 1, axis=(-2, -1))
        worst = max(worst, float(np.max(np.abs(plane - np.conj(partner)), initial=0.0)))
    return worst


# -- filters --------------------------------------------------------------------

FILTER_KINDS = ("identity", "helmholtz", "fractional")


@dataclass(frozen=True)
class FilterSpec:
    """Relation between the evolved field v and the advecting field u.

    The symbol s(k) satisfies v(k) = s(k) u(k):
    identity 1, helmholtz 1 + alpha^2 |k|^2,
    fractional 1 + alpha^(2 theta) |k|^(2 theta).
    """

    kind: str = "identity"
    alpha: float = 0.0
    theta: float = 1.0

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ConfigurationError(f"unknown filter kind {self.kind!r}")
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        if self.kind == "fractional" and not (0.0 < self.theta <= 1.0):
            raise ConfigurationError(
                f"fractional order must lie in (0, 1], got {self.theta}"
            )

    @classmethod
    def helmholtz(cls, alpha):
        return cls("helmholtz", float(alpha), 1.0)

    @classmethod
    def fractional(cls, alpha, theta):
        return cls("fractional", float(alpha), float(theta))

    def symbol(self, grid):
        k2 = grid.wavenumbers.k2
        if self.kind == "identity" or self.alpha == 0.0:
            return np.ones_like(k2)
        if self.kind == "helmholtz":
            return 1.0 + self.alpha**2 * k2
        return 1.0 + self.alpha ** (2 * self.theta) * k2**self.theta


def apply_inverse_filter(spec, v):
    """Recover u from v by dividing each mode by the filter symbol."""
    return v._new(v.coeffs / spec.symbol(v.grid))


def apply_filter(spec, u):
    """Inverse of :func:`apply_inverse_filter`: v = s(k) u."""
    return u._new(u.coeffs * spec.symbol(u.grid))


# -- projection, derivatives, shifts -------------------------------------------


def _kvec(grid):
    wn = grid.wavenumbers
    return (wn.kx, wn.ky, wn.kz)


def leray_project(w):
    wn = w.grid.wavenumbers
    kx, ky, kz = _kvec(w.grid)
    c = w.coeffs
    kdotc = (kx * c[0] + ky * c[1] + kz * c[2]) * wn.inv_k2
    out = np.stack([c[0] - kx * kdotc, c[1] - ky * kdotc, c[2] - kz * kdotc])
    return w._new(out, solenoidal=True)


def dealias(w):
    """Zero every mode with some |k_i| above the two-thirds cutoff."""
    return w._new(w.coeffs * w.grid.wavenumbers.keep)


def gradient(w):
    """Spectral gradient; component ``[a, ...]`` holds d/dx_a of ``w[...]``."""
    kx, ky, kz = _kvec(w.grid)
    c = w.coeffs
    out = np.stack([1j * kx * c, 1j * ky * c, 1j * kz * c])
    return _class_for(out.shape[:-3])(w.grid, out, False)


def divergence(w):
    """Contract the first component axis with i k."""
    kx, ky, kz = _kvec(w.grid)
    c = w.coeffs
    out = 1j * (kx * c[0] + ky * c[1] + kz * c[2])
    return _class_for(out.shape[:-3])(w.grid, out, False)


def laplacian(w):
    return w._new(-w.grid.wavenumbers.k2 * w.coeffs)


def shift(w, xi):
    """Exact translate: the result samples w(x + xi) for band-limited w."""
    xi = np.asarray(xi, dtype=float)
    return w._new(w.coeffs * shift_phase(w.grid, xi))


def shift_phase(grid, xi):
    kx, ky, kz = _kvec(grid)
    return (
        np.exp(1j * kx * xi[0]) * np.exp(1j * ky * xi[1]) * np.exp(1j * kz * xi[2])
    )


def max_divergence(w):
    """Largest divergence coefficient magnitude, relative to max |c|."""
    scale = float(np.max(np.abs(w.coeffs), initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(divergence(w).coeffs))) / scale


# -- pressure ---------------------------------------------------------------------


def solve_pressure(u, v):
    """Mean-zero p with Laplacian(p) = -div div (u (x) v)."""
    grid = u.grid
    ur = to_physical(u)
    vr = to_physical(v)
    t = forward_coeffs(ur[:, None] * vr[None, :], grid.n) * grid.wavenumbers.keep
    kx, ky, kz = _kvec(grid)
    ks = (kx, ky, kz)
    kkt = sum(ks[i] * ks[j] * t[i, j] for i in range(3) for j in range(3))
    p = -kkt * grid.wavenumbers.inv_k2
    p[0, 0, 0] = 0.0
    return ScalarField(grid, p)


# -- norms --------------------------------------------------------------------------


def mode_sum(values, grid):
    """Sum a half-spectrum quantity over the full lattice (real part)."""
    mult = grid.wavenumbers.multiplicity
    return float(np.sum(np.real(values) * mult))


def inner(a, b):
    """Real-space L2 inner product over the box, via Parseval."""
    prod = a.coeffs * np.conj(b.coeffs)
    if prod.ndim > 3:
        prod = prod.reshape((-1,) + a.grid.spectral_shape).sum(axis=0)
    return VOLUME * mode_sum(prod, a.grid)


def norms(w, alpha=0.0):
    """Return ``{"l2_sq": |w|^2, "h1_alpha_sq": |w|^2 + alpha^2 |grad w|^2}``."""
    power = np.abs(w.coeffs) ** 2
    if power.ndim > 3:
        power = power.reshape((-1,) + w.grid.spectral_shape).sum(axis=0)
    l2 = VOLUME * mode_sum(power, w.grid)
    grad = VOLUME * mode_sum(power * w.grid.wavenumbers.k2, w.grid)
    return {"l2_sq": l2, "h1_alpha_sq": l2 + alpha**2 * grad}
