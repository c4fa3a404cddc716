"""Onsager-type regularity thresholds for the alpha-models, in exact arithmetic.

Every bound is strict: a field whose index exceeds the stored value is
guaranteed to conserve the model's energy, while equality is left open.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError
from .models import ModelKind

F = Fraction


def _sobolev(q):
    return f"H^{{{q}}}"


@dataclass(frozen=True)
class PairRule:
    """a*s + b*r > bound, coupling the velocity index s and magnetic index r."""

    s_coef: Fraction
    r_coef: Fraction
    bound: Fraction
    strict: bool = True

    def holds(self, s, r):
        lhs = self.s_coef * s + self.r_coef * r
        return lhs > self.bound if self.strict else lhs >= self.bound

    def __str__(self):
        r = "r" if self.r_coef == 1 else f"{self.r_coef}r"
        s = "s" if self.s_coef == 1 else f"{self.s_coef}s"
        return f"{s} + {r} > {self.bound}"


@dataclass(frozen=True)
class BesovThreshold:
    """Strict lower bound on the B^s_{3,inf} index of ``field`` (and, for MHD,
    of B through ``r`` and the coupling ``pair``)."""

    model: ModelKind
    field: str
    s: Fraction
    strict: bool = True
    r: Fraction | None = None
    pair: PairRule | None = None

    def admits(self, s, r=None):
        if not s > self.s:
            return False
        if self.r is None:
            return True
        if r is None:
            raise DomainError("the magnetic index r is required for mhd_leray_alpha")
        return r > self.r and self.pair.holds(s, r)

    def __str__(self):
        parts = [f"s > {self.s}"]
        if self.r is not None:
            parts += [f"r > {self.r}", str(self.pair)]
        return ", ".join(parts)


@dataclass(frozen=True)
class SobolevThreshold:
    """Sobolev indices above which energy is conserved.  ``u``/``v`` are None
    where the table leaves that column empty; MHD uses ``s``/``r`` bounds for
    v in H^s and B in H^r together with ``pair``."""

    model: ModelKind
    u: Fraction | None = None
    v: Fraction | None = None
    strict: bool = True
    s: Fraction | None = None
    r: Fraction | None = None
    pair: PairRule | None = None

    def __str__(self):
        if self.pair is not None:
            return f"v H^s, B H^r, s > {self.s}, r > {self.r}, {self.pair}"
        parts = []
        if self.u is not None:
            parts.append(f"u {_sobolev(self.u)}")
        if self.v is not None:
            parts.append(f"v {_sobolev(self.v)}")
        return ", ".join(parts)


@dataclass(frozen=True)
class ThresholdEntry:
    model: ModelKind
    conserved: str
    besov: BesovThreshold
    sobolev: SobolevThreshold

    @property
    def besov_s(self):
        return self.besov.s

    @property
    def sobolev_u(self):
        return self.sobolev.u

    @property
    def sobolev_v(self):
        return self.sobolev.v

    def summary(self):
        return f"besov: {self.besov}; sobolev: {self.sobolev}"


def _entry(kind, conserved, field, s, su, sv):
    return ThresholdEntry(
        kind, conserved, BesovThreshold(kind, field, F(s)),
        SobolevThreshold(kind, None if su is None else F(su), F(sv)),
    )


_K = ModelKind
_H1 = "|u|_L2^2 + alpha^2 |grad u|_L2^2"
_MHD = _K.MHD_LERAY_ALPHA

THRESHOLDS = {
    _K.EULER: _entry(_K.EULER, "|v|_L2^2", "v", F(1, 3), None, F(5, 6)),
    _K.LERAY_ALPHA: _entry(_K.LERAY_ALPHA, "|v|_L2^2", "v", 0, F(5, 2), F(1, 2)),
    _K.EULER_ALPHA: _entry(_K.EULER_ALPHA, _H1, "u", 1, F(3, 2), F(-1, 2)),
    _K.MODIFIED_LERAY_ALPHA: _entry(_K.MODIFIED_LERAY_ALPHA, _H1, "u", 1, F(3, 2), F(-1, 2)),
    _K.CLARK_ALPHA: _entry(_K.CLARK_ALPHA, _H1, "u", 1, F(3, 2), F(-1, 2)),
    _MHD: ThresholdEntry(
        _MHD,
        "|v|_L2^2 + |B|_L2^2",
        BesovThreshold(_MHD, "v", F(0), r=F(0), pair=PairRule(F(1), F(2), F(1))),
        SobolevThreshold(_MHD, s=F(1, 2), r=F(1, 2), pair=PairRule(F(1), F(2), F(5, 2))),
    ),
}


def _kind(model):
    try:
        return ModelKind(model)
    except ValueError:
        raise DomainError(f"unknown model {model!r}") from None


def threshold_entry(model):
    return THRESHOLDS[_kind(model)]


def onsager_besov_threshold(model):
    """Besov index bound for ``model``; for MHD the bound carries r and the
    s + 2r > 1 coupling."""
    return THRESHOLDS[_kind(model)].besov


def onsager_sobolev_threshold(model):
    return THRESHOLDS[_kind(model)].sobolev


@dataclass(frozen=True)
class FractionalExponent:
    """Hoelder threshold gamma for the fractional filter of order theta.

    ``at_most`` marks the theta > 1/2 branch, where only the upper bound 0
    is known.
    """

    theta: Fraction
    gamma: Fraction
    at_most: bool = False
    strict: bool = True


def _exact(x, name):
    if isinstance(x, (int, Fraction)):
        return F(x)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x}")
    return F(x)


def fractional_onsager_exponent(theta):
    """gamma(theta) from 3 gamma + 2 theta = 1 for theta <= 1/2, else 0 (at most).

    Floats are converted exactly, so ``fractional_onsager_exponent(0.25)`` is
    exactly 1/6.
    """
    th = _exact(theta, "theta")
    if th <= 0:
        raise DomainError(f"fractional order must be positive, got {theta}")
    if th <= F(1, 2):
        return FractionalExponent(th, (1 - 2 * th) / 3)
    return FractionalExponent(th, F(0), at_most=True)


def mhd_tradeoff_check(s, r):
    """True iff s > 0, r > 0 and s + 2r > 1 (exact comparison)."""
    return THRESHOLDS[_MHD].besov.admits(_exact(s, "s"), _exact(r, "r"))


__all__ = [
    "BesovThreshold",
    "FractionalExponent",
    "PairRule",
    "SobolevThreshold",
    "THRESHOLDS",
    "ThresholdEntry",
    "fractional_onsager_exponent",
    "mhd_tradeoff_check",
    "onsager_besov_threshold",
    "onsager_sobolev_threshold",
    "threshold_entry",
]
