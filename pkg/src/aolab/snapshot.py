"""Binary snapshots of model states.

Layout (little-endian throughout)::

    magic   4 bytes  b"AOL1"
    version u32
    n       u32
    ncomp   u32      3, or 6 when B follows v
    alpha   f64
    theta   f64
    time    f64
    payload ncomp * n^3 f64, component-major, index ((z*n)+y)*n+x

The payload holds real-space samples, so a write/read cycle reproduces the
samples bit for bit.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    NaNPayloadError,
    SnapshotError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from .models import ModelKind, ModelState
from .spectral import FilterSpec, Grid, to_spectral

MAGIC = b"AOL1"
VERSION = 1
_HEADER = struct.Struct("<4sIII3d")
HEADER_BYTES = _HEADER.size


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Decoded file contents; ``samples`` has shape (ncomp, n, n, n) indexed
    [c, x, y, z] like every other real-space array in the package."""

    n: int
    alpha: float
    theta: float
    time: float
    samples: np.ndarray

    @property
    def ncomp(self):
        return self.samples.shape[0]

    def filter_spec(self):
        """Filter implied by the header: identity when alpha is zero,
        helmholtz when theta is one, fractional otherwise."""
        if self.alpha == 0.0:
            return FilterSpec()
        if self.theta == 1.0:
            return FilterSpec.helmholtz(self.alpha)
        return FilterSpec.fractional(self.alpha, self.theta)

    def to_state(self, kind=None, filter=None):
        """Rebuild a :class:`ModelState`.  ``kind`` defaults to
        mhd_leray_alpha for six components and leray_alpha otherwise."""
        if kind is None:
            kind = ModelKind.MHD_LERAY_ALPHA if self.ncomp == 6 else ModelKind.LERAY_ALPHA
        grid = Grid(self.n)
        v = to_spectral(grid, self.samples[:3], True)
        b = to_spectral(grid, self.samples[3:], True) if self.ncomp == 6 else None
        return ModelState(kind, v, filter or self.filter_spec(), b=b, time=self.time)


def state_samples(state):
    parts = [state.v.physical()]
    if state.b is not None:
        parts.append(state.b.physical())
    return np.concatenate(parts)


def encode(samples, alpha=0.0, theta=1.0, time=0.0):
    samples = np.asarray(samples, dtype=float)
    ncomp, n = samples.shape[0], samples.shape[-1]
    if samples.shape != (ncomp, n, n, n) or ncomp not in (3, 6):
        raise SnapshotError(f"cannot store samples of shape {samples.shape}")
    if not np.all(np.isfinite(samples)):
        raise NaNPayloadError("refusing to write non-finite samples")
    payload = np.ascontiguousarray(samples.transpose(0, 3, 2, 1), dtype="<f8")
    return _HEADER.pack(MAGIC, VERSION, n, ncomp, alpha, theta, time) + payload.tobytes()


def decode(data):
    if len(data) < HEADER_BYTES:
        if data[:4] != MAGIC[: len(data[:4])]:
            raise BadMagicError(f"bad magic {bytes(data[:4])!r}")
        raise TruncatedPayloadError(HEADER_BYTES, len(data))
    magic, version, n, ncomp, alpha, theta, time = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise VersionMismatchError(f"snapshot version {version}, reader supports {VERSION}")
    if ncomp not in (3, 6):
        raise SnapshotError(f"unsupported component count {ncomp}")
    expected = ncomp * n**3 * 8
    actual = len(data) - HEADER_BYTES
    if actual != expected:
        raise TruncatedPayloadError(expected, actual)
    flat = np.frombuffer(data, dtype="<f8", offset=HEADER_BYTES)
    if not np.all(np.isfinite(flat)):
        raise NaNPayloadError("snapshot payload contains NaN or Inf")
    samples = flat.reshape((ncomp, n, n, n)).transpose(0, 3, 2, 1).astype(float)
    return Snapshot(n, alpha, theta, time, samples)


def write_snapshot(state, path):
    """Write ``state`` (v, then B for MHD) to ``path``; returns the path."""
    f = state.filter
    alpha = 0.0 if f.kind == "identity" else f.alpha
    theta = f.theta if f.kind == "fractional" else 1.0
    path = Path(path)
    path.write_bytes(encode(state_samples(state), alpha, theta, state.time))
    return path


def read_snapshot(path):
    return decode(Path(path).read_bytes())


__all__ = [
    "HEADER_BYTES",
    "MAGIC",
    "Snapshot",
    "VERSION",
    "decode",
    "encode",
    "read_snapshot",
    "state_samples",
    "write_snapshot",
]
