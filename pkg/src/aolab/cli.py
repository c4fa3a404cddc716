"""Command-line entry point: ``aolab simulate|defect|structure|exponents|verify``.

Exit codes: 0 success, 2 configuration error, 3 numerical blow-up,
4 verification failure.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config
from .diagnostics.defects import LABEL_MODELS, default_ladder, defect_series_many
from .diagnostics.quadrature import XiQuadrature
from .diagnostics.structure import default_window, fit_slope, structure_function
from .errors import BlowUpError, ConfigurationError, DegenerateFitError, SnapshotError
from .exponents import THRESHOLDS, threshold_entry
from .models import ModelKind, run_simulation
from .snapshot import read_snapshot, write_snapshot

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_VERIFY = 0, 2, 3, 4


class _Writer:
    """CSV file with a provenance comment line followed by a header row."""

    def __init__(self, path, cfg_hash, header):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", newline="")
        self._fh.write(f"# aolab {__version__} config {cfg_hash}\n")
        self._csv = csv.writer(self._fh, lineterminator="\n")
        self._csv.writerow(header)

    def row(self, *values):
        self._csv.writerow([_fmt(v) for v in values])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _say(quiet, *lines):
    if not quiet:
        for line in lines:
            print(line)


def _source_state(cfg):
    snap = cfg.diagnostics.snapshot
    if snap is None:
        return cfg.initial_state()
    return read_snapshot(snap).to_state(cfg.model, cfg.filter_spec())


# -- subcommands -----------------------------------------------------------------------


def cmd_simulate(cfg, quiet):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    state0 = cfg.initial_state()
    cadence = cfg.snapshot_cadence

    def on_record(s):
        steps = int(round((s.time - state0.time) / cfg.dt))
        if cadence and steps % cadence == 0:
            write_snapshot(s, out / f"snapshot_{steps:08d}.aol")

    # snapshots need every step visited; energies are written at energy_cadence
    record_every = cfg.energy_cadence
    if cadence:
        record_every = int(np.gcd(cadence, cfg.energy_cadence))
    code = EXIT_OK
    try:
        traj = run_simulation(state0, cfg.dt, cfg.t_end, record_every, on_record=on_record)
    except BlowUpError as exc:
        traj = exc.trajectory
        code = EXIT_BLOWUP
        print(f"blow-up: {exc}", file=sys.stderr)
    drift = traj.relative_drift() if traj is not None else []
    with _Writer(out / "energy.csv", cfg.digest(), ["time", "energy", "relative_drift"]) as w:
        for i, (t, e) in enumerate(zip(traj.times, traj.energies) if traj else []):
            steps = int(round((t - state0.time) / cfg.dt))
            if steps % cfg.energy_cadence == 0:
                w.row(float(t), float(e), float(drift[i]))
    if code == EXIT_OK:
        _say(quiet, f"{cfg.model.value}: {cfg.steps} steps, max |relative drift| "
                    f"{traj.max_drift():.3e}; wrote {out / 'energy.csv'}")
    return code


def _labels_for(cfg):
    if cfg.diagnostics.defects:
        return list(cfg.diagnostics.defects)
    return [lab for lab, owners in LABEL_MODELS.items() if cfg.model in owners]


def cmd_defect(cfg, quiet):
    state = _source_state(cfg)
    fields = {"u": state.u, "v": state.v}
    if state.b is not None:
        fields["B"] = state.b
    d = cfg.diagnostics
    eps = d.epsilons if d.epsilons is not None else default_ladder(state.grid, d.epsilon_count)
    quad = XiQuadrature(d.n_r, d.directions)
    series = defect_series_many(_labels_for(cfg), fields, eps, quad, tuple(d.profiles))
    out = Path(cfg.output_dir) / "defects.csv"
    header = ["label", "epsilon", "value", "slope", "l1", "profile"]
    with _Writer(out, cfg.digest(), header) as w:
        for (label, profile), s in series.items():
            for e, v, a in zip(s.epsilons, s.values, s.l1):
                w.row(label, float(e), float(v), float(s.slope), float(a), profile)
    for (label, profile), s in series.items():
        note = " (degenerate)" if s.degenerate else ""
        _say(quiet, f"{label} [{profile}] slope {s.slope:.4f}{note}")
    _say(quiet, f"wrote {out}")
    return EXIT_OK


def cmd_structure(cfg, quiet):
    state = _source_state(cfg)
    d = cfg.diagnostics
    w = {"u": state.u, "v": state.v, "B": state.b}[d.structure_field]
    window = default_window(state.grid)
    radii = np.asarray(d.radii) if d.radii is not None else np.geomspace(*window, 10)
    out = Path(cfg.output_dir)
    fits = []
    with _Writer(out / "structure.csv", cfg.digest(), ["p", "r", "value"]) as wr:
        for p in d.structure_p:
            table = structure_function(w, p, radii)
            for r, v in zip(table.radii, table.values):
                wr.row(p, float(r), float(v))
            try:
                fits.append(fit_slope(table.radii, table.values, p))
            except DegenerateFitError:
                fits.append(None)
    header = ["p", "exponent", "besov_s", "r2", "r_min", "r_max"]
    with _Writer(out / "structure_fit.csv", cfg.digest(), header) as wr:
        for p, fit in zip(d.structure_p, fits):
            if fit is None:
                wr.row(p, "nan", "nan", "nan", "nan", "nan")
                _say(quiet, f"p={p}: degenerate table")
                continue
            wr.row(p, fit.exponent, fit.besov_s, fit.r2, fit.window[0], fit.window[1])
            _say(quiet, f"p={p}: zeta {fit.exponent:.4f}, s = zeta/p {fit.besov_s:.4f}, "
                        f"r2 {fit.r2:.4f}")
    return EXIT_OK


def cmd_exponents(model, fmt, quiet):
    models = [ModelKind(model)] if model else list(THRESHOLDS)
    if fmt == "csv":
        rows = csv.writer(sys.stdout, lineterminator="\n")
        rows.writerow(["model", "conserved", "besov", "sobolev"])
        for m in models:
            e = threshold_entry(m)
            rows.writerow([m.value, e.conserved, str(e.besov), str(e.sobolev)])
        return EXIT_OK
    for m in models:
        line = threshold_entry(m).summary()
        _say(quiet, line if model else f"{m.value}: {line}")
    return EXIT_OK


def run_checks(checks, quiet=False):
    """Run acceptance checks, print one line each, return the exit code."""
    results = []
    for check in checks:
        r = check()
        results.append(r)
        _say(quiet, r.line())
    failed = [r for r in results if not r.passed]
    _say(quiet, f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_verify(suite, quiet):
    from .verify import suite_checks

    return run_checks(suite_checks(suite), quiet)


# -- argument parsing -----------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="aolab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"aolab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("simulate", "evolve a model and record its conserved quantity"),
                       ("defect", "defect-term series over an epsilon ladder"),
                       ("structure", "structure functions and slope fits")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, type=Path)
    p = sub.add_parser("exponents", help="Onsager threshold tables")
    p.add_argument("--model", choices=[k.value for k in ModelKind])
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p = sub.add_parser("verify", help="run acceptance suites")
    p.add_argument("--suite", default="quick")
    return parser


def main(argv=None, quiet=False):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        if args.command == "exponents":
            return cmd_exponents(args.model, args.format, quiet)
        if args.command == "verify":
            return cmd_verify(args.suite, quiet)
        cfg = load_config(args.config)
        return {"simulate": cmd_simulate, "defect": cmd_defect,
                "structure": cmd_structure}[args.command](cfg, quiet)
    except (ConfigurationError, SnapshotError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
