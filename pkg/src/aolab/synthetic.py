"""Seed-deterministic divergence-free test fields."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .spectral import SpectralVectorField, leray_project, norms

SYNTH_KINDS = ("taylor_green", "band_limited_random", "power_law_rough")

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


class SeededRng:
    """SplitMix64 stream.  Output depends only on the seed, never on platform."""

    def __init__(self, seed):
        self.state = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)

    def next_uint64(self, size):
        idx = np.arange(1, size + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = self.state + idx * _GOLDEN
            self.state = self.state + np.uint64(size) * _GOLDEN
            z = (z ^ (z >> np.uint64(30))) * _MIX1
            z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))

    def uniform(self, size):
        """Doubles in [0, 1) built from the top 53 bits."""
        return (self.next_uint64(size) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, size):
        """Standard normals by the Box-Muller transform, consumed in pairs."""
        m = (size + 1) // 2
        u1 = 1.0 - self.uniform(m)  # (0, 1]
        u2 = self.uniform(m)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
        return z[:size]


@dataclass(frozen=True)
class SynthSpec:
    kind: str = "band_limited_random"
    h: float = 0.5
    kmin: int = 1
    kmax: int = 4
    amplitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SYNTH_KINDS:
            raise ConfigurationError(f"unknown synthetic field kind {self.kind!r}")
        if self.kind == "power_law_rough" and not (0.0 < self.h < 1.0):
            raise ConfigurationError(f"h must lie in (0, 1), got {self.h}")
        if self.kmin < 1 or self.kmax < self.kmin:
            raise ConfigurationError(f"invalid band [{self.kmin}, {self.kmax}]")


def _full_wavenumbers(n):
    k = np.fft.fftfreq(n, 1.0 / n)
    kx, ky, kz = np.meshgrid(k, k, k, indexing="ij")
    return kx, ky, kz


def _hermitian(c):
    """Keep the lexicographically positive half and mirror it to -k."""
    n = c.shape[-1]
    kx, ky, kz = _full_wavenumbers(n)
    nyq = -(n // 2)
    positive = (kx > 0) | ((kx == 0) & (ky > 0)) | ((kx == 0) & (ky == 0) & (kz > 0))
    partner = np.roll(np.flip(c, axis=(-3, -2, -1)), 1, axis=(-3, -2, -1))
    out = np.where(positive, c, np.conj(partner))
    out[..., 0, 0, 0] = 0.0
    selfconj = (kx == nyq) | (ky == nyq) | (kz == nyq)
    return np.where(selfconj, 0.0, out)


def _to_half(c):
    return np.ascontiguousarray(c[..., : c.shape[-1] // 2 + 1])


def _normalise(field, target):
    l2 = np.sqrt(norms(field)["l2_sq"])
    if l2 == 0.0:
        return field
    return field * (target / l2)


def generate(spec, grid):
    """Build the spectral field described by ``spec`` on ``grid``.

    taylor_green returns amplitude * (sin x cos y cos z, -cos x sin y cos z, 0);
    the random kinds are normalised so that their L2 norm over the box equals
    ``amplitude``.
    """
    n = grid.n
    if spec.kind == "taylor_green":
        # exact coefficients at k = (sx, sy, 1): -i sx / 8 and i sy / 8, so k . c = 0 exactly
        c = np.zeros((3,) + grid.spectral_shape, complex)
        for sx in (-1, 1):
            for sy in (-1, 1):
                c[0, sx % n, sy % n, 1] = -1j * sx / 8 * spec.amplitude
                c[1, sx % n, sy % n, 1] = 1j * sy / 8 * spec.amplitude
        return SpectralVectorField(grid, c, True)

    cut = grid.dealias_cutoff
    kx, ky, kz = _full_wavenumbers(n)
    kmag = np.sqrt(kx**2 + ky**2 + kz**2)
    rng = SeededRng(spec.seed)
    size = 3 * n**3

    if spec.kind == "band_limited_random":
        if spec.kmax > cut:
            raise ConfigurationError(
                f"kmax={spec.kmax} exceeds the dealiasing cutoff {cut} for n={n}"
            )
        band = (kmag >= spec.kmin) & (kmag <= spec.kmax)
        g = rng.normal(2 * size)
        c = (g[:size] + 1j * g[size:]).reshape((3, n, n, n)) * band
    else:
        if spec.kmin > cut:
            raise ConfigurationError(f"kmin={spec.kmin} exceeds cutoff {cut}")
        band = (kmag >= spec.kmin) & (kmag <= cut)
        mag = np.zeros_like(kmag)
        mag[band] = kmag[band] ** -(spec.h + 1.5)
        phase = rng.uniform(size).reshape((3, n, n, n))
        c = mag * np.exp(2j * np.pi * phase)

    field = SpectralVectorField(grid, _to_half(_hermitian(c)))
    field = leray_project(field)
    return _normalise(field, spec.amplitude)


def shell_spectrum(field):
    """Shell-averaged |c(k)|^2 per integer shell; returns (k, mean power, count)."""
    grid = field.grid
    wn = grid.wavenumbers
    power = np.sum(np.abs(field.coeffs) ** 2, axis=0)
    shell = np.rint(np.sqrt(wn.k2)).astype(int)
    mult = wn.multiplicity
    kmax = int(shell.max())
    tot = np.bincount(shell.ravel(), (power * mult).ravel(), minlength=kmax + 1)
    cnt = np.bincount(shell.ravel(), np.broadcast_to(mult, shell.shape).ravel(), minlength=kmax + 1)
    k = np.arange(kmax + 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(cnt > 0, tot / cnt, 0.0)
    return k, mean, cnt


__all__ = ["SeededRng", "SynthSpec", "generate", "shell_spectrum"]
