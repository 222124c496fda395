"""``polariton-clone`` command line: dispersion, clone, sweep, oracle, readout.

Exit codes: 0 success, 1 validation failure, 2 configuration error, 3 I/O error.
"""

import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from . import cloning_protocol as cp
from . import polariton_model as pm
from . import validation
from .config import ConfigError, load_config, parse_assignment
from .errors import InvalidArgumentError, UnsupportedConfigurationError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_IO = 3

DEFAULT_FORMAT = {"dispersion": "csv", "clone": "json", "sweep": "csv", "oracle": "json", "readout": "json"}
DISPERSION_HEADER = ("k_par", "E_ph", "E_upper", "E_lower", "delta", "mu2")
READOUT_HEADER = ("t", "theta", "mu_t", "nu_t", "meanQ", "meanP", "varQ", "varP", "covQP")
ORACLE_HEADER = ("name", "category", "value", "tolerance", "passed")


# ---------------------------------------------------------------------------
# formatting


def fmt_float(x, precision=15):
    x = float(x)
    if x == 0:
        return "0"  # also folds -0.0
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{precision}g")


def _json_value(obj, precision, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt_float(x, precision) if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json_value(v, precision, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if not len(obj):
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_json_value(v, precision, indent, level + 1) for v in obj) + "]"
        items = [pad + _json_value(v, precision, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_json(obj, precision=15):
    """Deterministic JSON with floats at ``precision`` significant digits."""
    return _json_value(obj, precision, 2, 0) + "\n"


def to_csv(header, rows, precision=15):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v, precision) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _records(header, rows):
    return [dict(zip(header, row)) for row in rows]


def render(header, rows, fmt, precision, extra=None):
    if fmt == "csv":
        return to_csv(header, rows, precision)
    doc = {"columns": list(header), "rows": _records(header, rows)}
    if extra:
        doc.update(extra)
    return to_json(doc, precision)


# ---------------------------------------------------------------------------
# commands


def _cavity(cfg):
    hbar_c = cfg.units.hbar * cfg.units.c
    if cfg.cavity.L_cav is None:
        return pm.CavityParams.resonant(cfg.cavity.E_at, cfg.units.g, cfg.cavity.m, hbar_c)
    return pm.CavityParams(cfg.cavity.E_at, cfg.units.g, cfg.cavity.L_cav, cfg.cavity.m, hbar_c)


def cmd_dispersion(cfg, fmt):
    d = cfg.dispersion
    points = pm.dispersion_curve(d.k_par_max, d.n_points, _cavity(cfg), d.mode)
    return render(DISPERSION_HEADER, [tuple(p) for p in points], fmt, cfg.output.precision), EXIT_OK, f"{len(points)} points"


def _ensemble(pr):
    return cp.SpinEnsemble.from_populations(pr.N, pr.alpha2, pr.phi_rel)


def clone_report(cfg):
    pr = cfg.protocol
    pair = pm.hopfield(pr.delta, cfg.units.g)
    return cp.run_cloning(pr.gamma, pr.V_in, _ensemble(pr), pr.gain, pair,
                          literal_sign=pr.literal_sign, convention=pr.convention)


def _clone_rows(cfg, report):
    pr = cfg.protocol
    rows = []
    for c in report.clones:
        flags = list(c.flags)
        if cp.FLAG_CLAMP in report.flags:
            flags.append(cp.FLAG_CLAMP)
        rows.append((float(report.delta), float(pr.alpha2), float(pr.phi_rel), int(pr.N), float(pr.gain),
                     float(pr.V_in), c.name, c.meanQ, c.meanP, c.varQ, c.varP, c.signal_gain, c.fidelity,
                     ";".join(flags)))
    return rows


def cmd_clone(cfg, fmt):
    report = clone_report(cfg)
    if fmt == "csv":
        text = to_csv(cp.SweepTable.HEADER, _clone_rows(cfg, report), cfg.output.precision)
    else:
        text = to_json(report.to_dict(), cfg.output.precision)
    return text, EXIT_OK, f"fidelity {fmt_float(report.fidelity, 12)}"


def cmd_sweep(cfg, fmt):
    pr = cfg.protocol
    defaults = {"delta": pr.delta, "alpha2": pr.alpha2, "phi": pr.phi_rel, "N": pr.N,
                "gain": pr.gain, "V_in": pr.V_in}
    table = cp.sweep(cfg.sweep.grid, pr.gamma, cfg.units.g, cfg.sweep.cap, defaults,
                     convention=pr.convention, literal_sign=pr.literal_sign)
    return render(cp.SweepTable.HEADER, list(table.rows()), fmt, cfg.output.precision), EXIT_OK, f"{len(table)} rows"


def cmd_oracle(cfg, fmt):
    o = cfg.oracle
    report = validation.run_checks(o.cutoff, o.cap, o.tolerance, o.seed, o.workers)
    if fmt == "csv":
        rows = [(c.name, c.category, c.value, c.tolerance, str(c.passed).lower()) for c in report.checks]
        text = to_csv(ORACLE_HEADER, rows, cfg.output.precision)
    else:
        text = to_json(report.to_dict(), cfg.output.precision)
    if report.passed:
        return text, EXIT_OK, f"{len(report.checks)} checks passed"
    failed = ", ".join(f"{c.name} ({fmt_float(c.value, 3)} > {fmt_float(c.tolerance, 3)})" for c in report.failures)
    return text, EXIT_VALIDATION, f"failed checks: {failed}"


def readout_times(cfg):
    r, g, hbar = cfg.readout, cfg.units.g, cfg.units.hbar
    times = [float(t) for t in np.linspace(0.0, r.t_max, r.n_times)] if r.n_times > 1 else [0.0]
    if r.include_quarter_period:
        quarter = 0.5 * math.pi * hbar / g
        if not any(abs(t - quarter) <= 1e-12 * max(1.0, quarter) for t in times):
            times.append(quarter)
    return sorted(times)


def cmd_readout(cfg, fmt):
    if cfg.protocol.delta != 0:
        raise ConfigError("protocol.delta", "readout needs delta = 0")
    report = clone_report(cfg)
    g, hbar = cfg.units.g, cfg.units.hbar
    rows = []
    for t in readout_times(cfg):
        res = cp.readout(t, report, 0.0, g, hbar)
        s, o = res.schedule, res.optical
        rows.append((s.t, g * s.t / hbar, s.mu_t, s.nu_t, o.meanQ, o.meanP, o.varQ, o.varP, res.optical_covQP))
    extra = {"dark_clone": report.dark.to_dict()}
    return render(READOUT_HEADER, rows, fmt, cfg.output.precision, extra), EXIT_OK, f"{len(rows)} times"


COMMANDS = {
    "dispersion": cmd_dispersion,
    "clone": cmd_clone,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "readout": cmd_readout,
}


# ---------------------------------------------------------------------------
# argument parsing

PROTOCOL_FLAGS = (
    ("--gamma-re", "protocol.gamma_re", float),
    ("--gamma-im", "protocol.gamma_im", float),
    ("--V-in", "protocol.V_in", float),
    ("--gain", "protocol.gain", float),
    ("--N", "protocol.N", int),
    ("--alpha2", "protocol.alpha2", float),
    ("--phi", "protocol.phi_rel", float),
    ("--delta", "protocol.delta", float),
    ("--convention", "protocol.convention", str),
    ("--g", "units.g", float),
)
COMMAND_FLAGS = {
    "dispersion": (
        ("--k-max", "dispersion.k_par_max", float),
        ("--n-points", "dispersion.n_points", int),
        ("--mode", "dispersion.mode", str),
        ("--E-at", "cavity.E_at", float),
        ("--L-cav", "cavity.L_cav", float),
        ("--g", "units.g", float),
    ),
    "clone": PROTOCOL_FLAGS,
    "sweep": PROTOCOL_FLAGS + (("--cap", "sweep.cap", int),),
    "oracle": (
        ("--cutoff", "oracle.cutoff", int),
        ("--tolerance", "oracle.tolerance", float),
        ("--cap", "oracle.cap", int),
        ("--workers", "oracle.workers", int),
    ),
    "readout": PROTOCOL_FLAGS + (
        ("--t-max", "readout.t_max", float),
        ("--n-times", "readout.n_times", int),
    ),
}


def _global_flags(parser, suppress):
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--config", help="TOML configuration file", **kw)
    parser.add_argument("--out", help="output path ('-' for stdout); output.path", **kw)
    parser.add_argument("--format", choices=("csv", "json"), help="output.format", **kw)
    parser.add_argument("--seed", type=int, help="seed for randomised checks; oracle.seed", **kw)
    parser.add_argument("--quiet", action="store_true", help="no summary on stderr; output.quiet", **kw)
    parser.add_argument("--set", action="append", metavar="BLOCK.KEY=VALUE",
                        help="override any config field (repeatable)", **kw)


def build_parser():
    parser = argparse.ArgumentParser(prog="polariton-clone", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, flags in COMMAND_FLAGS.items():
        p = sub.add_parser(name)
        _global_flags(p, suppress=True)
        for flag, path, kind in flags:
            p.add_argument(flag, dest="flag:" + path, type=kind, default=argparse.SUPPRESS, help=path)
        if name == "sweep":
            p.add_argument("--grid", action="append", metavar="AXIS=V1,V2,...", default=argparse.SUPPRESS,
                           help="sweep.grid.AXIS values (repeatable)")
        if name in ("clone", "sweep", "readout"):
            p.add_argument("--literal-sign", dest="flag:protocol.literal_sign", action="store_const",
                           const=True, default=argparse.SUPPRESS, help="protocol.literal_sign")
    return parser


def overrides_from_args(args):
    """Overrides in precedence order: ``--set``, dedicated flags, then global flags."""
    out = [parse_assignment(s) for s in getattr(args, "set", None) or ()]
    for key, value in vars(args).items():
        if key.startswith("flag:"):
            out.append((key[5:], value))
    for text in getattr(args, "grid", None) or ():
        if "=" not in text:
            raise ConfigError("sweep.grid", f"--grid expects AXIS=V1,V2,..., got {text!r}")
        axis, values = text.split("=", 1)
        try:
            out.append((f"sweep.grid.{axis.strip()}", [float(v) for v in values.split(",")]))
        except ValueError:
            raise ConfigError(f"sweep.grid.{axis.strip()}", f"not a list of numbers: {values!r}") from None
    if getattr(args, "out", None) is not None:
        out.append(("output.path", args.out))
    if getattr(args, "format", None) is not None:
        out.append(("output.format", args.format))
    if getattr(args, "seed", None) is not None:
        out.append(("oracle.seed", args.seed))
    if getattr(args, "quiet", False):
        out.append(("output.quiet", True))
    return out


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    quiet = bool(getattr(args, "quiet", False))
    try:
        cfg = load_config(getattr(args, "config", None), overrides_from_args(args))
        quiet = cfg.output.quiet
        fmt = cfg.output.format or DEFAULT_FORMAT[args.command]
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            text, code, summary = COMMANDS[args.command](cfg, fmt)
        _write(text, cfg.output.path)
    except (ConfigError, InvalidArgumentError, UnsupportedConfigurationError) as exc:
        print(f"polariton-clone: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"polariton-clone: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not quiet:
        for w in caught:
            print(f"polariton-clone: warning: {w.message}", file=sys.stderr)
    if code != EXIT_OK:
        print(f"polariton-clone: {summary}", file=sys.stderr)
    elif not quiet:
        where = "stdout" if cfg.output.path in (None, "-") else cfg.output.path
        print(f"polariton-clone: {args.command}: {summary} -> {where}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
