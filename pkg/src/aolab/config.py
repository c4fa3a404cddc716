"""Run configuration: a YAML document validated into a :class:`RunConfig`.

Unknown keys are rejected, and every error carries the dotted path of the
offending entry (``diagnostics.defects[1]``).
"""

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .diagnostics.defects import CATALOG, LABEL_MODELS
from .diagnostics.quadrature import DIRECTION_SETS
from .errors import ConfigurationError
from .models import ModelKind, ModelState
from .spectral import FilterSpec, Grid, SpectralVectorField, apply_inverse_filter, to_spectral
from .synthetic import SynthSpec, generate


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class FilterConfig(_Strict):
    kind: Literal["identity", "helmholtz", "fractional"] = "helmholtz"
    theta: float = 1.0


class InitConfig(_Strict):
    """Initial field.  ``peak_velocity`` rescales the field so that the
    largest sample of |u| (per component) equals it; otherwise the synthetic
    ``amplitude`` convention applies."""

    kind: Literal["taylor_green", "band_limited_random", "power_law_rough", "zero", "shear"] = (
        "band_limited_random"
    )
    h: float = 0.5
    kmin: int = 1
    kmax: int = 4
    amplitude: float = 1.0
    seed: Optional[int] = None
    peak_velocity: Optional[float] = Field(default=None, gt=0)


class DiagnosticsConfig(_Strict):
    defects: list[str] = []
    epsilons: Optional[list[float]] = None
    epsilon_count: int = Field(default=8, ge=2)
    n_r: int = Field(default=16, ge=1)
    directions: str = "lebedev26"
    profiles: list[Literal["bump", "polynomial"]] = ["bump"]
    structure_p: list[Literal[1, 2, 3]] = [3]
    radii: Optional[list[float]] = None
    structure_field: Literal["u", "v", "B"] = "v"
    snapshot: Optional[str] = None

    @field_validator("defects")
    @classmethod
    def _known_labels(cls, labels):
        for lab in labels:
            if lab not in CATALOG:
                raise ValueError(f"unknown defect label {lab!r}")
        return labels

    @field_validator("directions")
    @classmethod
    def _known_directions(cls, d):
        if d not in DIRECTION_SETS:
            raise ValueError(f"unknown direction set {d!r}")
        return d


class RunConfig(_Strict):
    model: ModelKind
    n: int = 32
    alpha: float = Field(default=0.5, ge=0)
    filter: FilterConfig = FilterConfig()
    init: InitConfig = InitConfig()
    magnetic_init: Optional[InitConfig] = None
    dt: float = Field(default=1e-3, gt=0)
    t_end: float = Field(default=1.0, gt=0)
    energy_cadence: int = Field(default=1, ge=1)
    snapshot_cadence: int = Field(default=0, ge=0)
    diagnostics: DiagnosticsConfig = DiagnosticsConfig()
    output_dir: str = "out"
    seed: int = 0

    @property
    def steps(self):
        return int(round(self.t_end / self.dt))

    def filter_spec(self):
        if self.filter.kind == "identity" or self.model is ModelKind.EULER:
            return FilterSpec()
        if self.filter.kind == "helmholtz":
            return FilterSpec.helmholtz(self.alpha)
        return FilterSpec.fractional(self.alpha, self.filter.theta)

    def digest(self):
        """Short hash of the canonical JSON form."""
        blob = json.dumps(self.model_dump(mode="json"), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def initial_state(self):
        grid = Grid(self.n)
        spec = self.filter_spec()
        v = _field(self.init, grid, self.seed, spec, self.model)
        b = None
        if self.model.has_magnetic_field:
            mi = self.magnetic_init or self.init.model_copy(
                update={"seed": (self.init.seed if self.init.seed is not None else self.seed) + 1}
            )
            b = _field(mi, grid, self.seed + 1, FilterSpec(), self.model)
        return ModelState(self.model, v, spec, b=b)


def _field(init, grid, seed, spec, kind):
    if init.kind == "zero":
        return SpectralVectorField.zeros(grid)
    if init.kind == "shear":
        x, y, z = grid.coordinates()
        zero = np.zeros_like(x)
        return to_spectral(grid, init.amplitude * np.stack([np.sin(y), zero, zero]), True)
    try:
        synth = SynthSpec(init.kind, init.h, init.kmin, init.kmax, init.amplitude,
                          seed if init.seed is None else init.seed)
        w = generate(synth, grid)
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), "init") from None
    if init.peak_velocity is not None:
        u = w if kind is ModelKind.EULER else apply_inverse_filter(spec, w)
        peak = float(np.abs(u.physical()).max())
        if peak > 0:
            w = w * (init.peak_velocity / peak)
    return w


def _path(loc):
    out = ""
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def _check(cfg):
    try:
        grid = Grid(cfg.n)
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), "n") from None
    steps = cfg.steps
    if abs(steps * cfg.dt - cfg.t_end) > 1e-9 * cfg.t_end:
        raise ConfigurationError(f"t_end={cfg.t_end} is not a whole number of steps dt={cfg.dt}",
                                 "t_end")
    if steps % cfg.energy_cadence:
        raise ConfigurationError(f"{cfg.energy_cadence} does not divide {steps} steps",
                                 "energy_cadence")
    if cfg.snapshot_cadence and steps % cfg.snapshot_cadence:
        raise ConfigurationError(f"{cfg.snapshot_cadence} does not divide {steps} steps",
                                 "snapshot_cadence")
    if cfg.filter.kind == "fractional" and not 0 < cfg.filter.theta <= 1:
        raise ConfigurationError(f"theta must lie in (0, 1], got {cfg.filter.theta}",
                                 "filter.theta")
    if cfg.init.kind in ("band_limited_random",) and cfg.init.kmax > grid.dealias_cutoff:
        raise ConfigurationError(
            f"kmax={cfg.init.kmax} exceeds the dealiasing cutoff {grid.dealias_cutoff}",
            "init.kmax")
    mhd = cfg.model.has_magnetic_field
    if cfg.magnetic_init is not None and not mhd:
        raise ConfigurationError(f"{cfg.model.value} carries no magnetic field", "magnetic_init")
    for i, lab in enumerate(cfg.diagnostics.defects):
        owners = LABEL_MODELS[lab]
        if ModelKind.MHD_LERAY_ALPHA in owners and not mhd:
            raise ConfigurationError(f"{lab} requires mhd_leray_alpha",
                                     f"diagnostics.defects[{i}]")
    if cfg.diagnostics.structure_field == "B" and not mhd:
        raise ConfigurationError("structure_field B requires mhd_leray_alpha",
                                 "diagnostics.structure_field")
    eps = cfg.diagnostics.epsilons
    if eps is not None:
        if len(eps) < 2 or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigurationError("must be strictly decreasing with at least two entries",
                                     "diagnostics.epsilons")
        for j, e in enumerate(eps):
            if not grid.spacing < e < np.pi:
                raise ConfigurationError(
                    f"{e} outside ({grid.spacing:.6g}, pi)", f"diagnostics.epsilons[{j}]")
    radii = cfg.diagnostics.radii
    if radii is not None:
        for j, r in enumerate(radii):
            if not 0 < r <= np.pi:
                raise ConfigurationError(f"{r} outside (0, pi]", f"diagnostics.radii[{j}]")
    return cfg


def parse_config(document):
    """Validate a mapping, YAML text or path into a :class:`RunConfig`."""
    if isinstance(document, Path):
        document = document.read_text()
    if isinstance(document, str):
        try:
            document = yaml.safe_load(document)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"malformed document: {exc}") from None
    if not isinstance(document, dict):
        raise ConfigurationError("configuration must be a mapping")
    try:
        cfg = RunConfig.model_validate(document)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigurationError(err["msg"], _path(err["loc"]) or None) from None
    return _check(cfg)


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


__all__ = ["DiagnosticsConfig", "FilterConfig", "InitConfig", "RunConfig", "load_config",
           "parse_config"]
