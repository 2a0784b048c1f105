"""Command-line front end: one subcommand per experiment, plus two dumps.

    systolab baseline | proposition | general | zoll | pu | scale | conjecture
             [--config cfg.json] [--out report.csv] [--format csv|json]
             [--t 0.05,-0.05] [--seed 7]
    systolab funk-scan [--config cfg.json] [--out scan.csv]
    systolab systole   [--config cfg.json] [--out report.json] [--t 0.1] ...

Each experiment prints one line per row and exits nonzero when any row
fails its bound, so a run doubles as a shell-scriptable check.  --config
points at a JSON file with ExperimentConfig fields (f in the coefficient
format of SphericalFunction.to_json); flags override the file.
"""

import argparse
import json
import math
import sys

from .circles import funk_scan, write_funk_scan
from .errors import IOFailure, SystolabError
from .experiments import ExperimentConfig, emit_report, run_experiment
from .geodesics import estimate_systole
from .harmonics import SphericalFunction
from .metric import area, normalized_variation, systolic_ratio

COMMAND_KINDS = {
    "baseline": "baseline",
    "proposition": "proposition",
    "general": "general_direction",
    "zoll": "zoll_first_order",
    "pu": "pu_even",
    "scale": "scale_invariance",
    "conjecture": "conjecture_probe",
}

_Y20 = [[2, 0, 1.0]]
_DEFAULTS = {
    "baseline": (None, (0.0,)),
    "proposition": (_Y20, (-0.1, -0.05, 0.05, 0.1)),
    "general_direction": ([[0, 0, 1.0], [2, 0, 1.0]], (-0.1, -0.05, 0.05, 0.1)),
    "zoll_first_order": ([[3, 0, 1.0]], (0.1, 0.05)),
    "pu_even": (_Y20, (-0.1, -0.05, 0.05, 0.1)),
    "scale_invariance": (_Y20, (0.1,)),
    "conjecture_probe": ([[1, 0, 1.0], [2, 0, 1.0]], (0.02, 0.05, 0.1)),
    "funk-scan": (_Y20, (0.1,)),
    "systole": (_Y20, (0.1,)),
}


def _parse_t_list(text):
    try:
        values = tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"could not parse {text!r} as a comma-separated list of t")
    if not values:
        raise argparse.ArgumentTypeError("expected a comma-separated list of t")
    return values


def _merged_settings(command, args):
    """Defaults, then the config file, then explicit flags."""
    default_f, default_t = _DEFAULTS[command]
    settings = {
        "f": default_f,
        "t_values": default_t,
        "N": 65,
        "n": 128,
        "tol": 1e-10,
        "seed": 0,
        "out": None,
        "format": "csv",
    }
    if args.config is not None:
        try:
            with open(args.config) as fh:
                settings.update(json.load(fh))
        except OSError as exc:
            raise IOFailure(f"could not read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SystolabError(f"config {args.config} is not valid JSON: {exc}") from exc
    if args.t is not None:
        settings["t_values"] = args.t
    if args.seed is not None:
        settings["seed"] = args.seed
    if args.out is not None:
        settings["out"] = args.out
    if args.format is not None:
        settings["format"] = args.format
    return settings


def _direction(settings):
    raw = settings.get("f")
    if raw is None:
        return None
    if isinstance(raw, dict):
        return SphericalFunction.from_json(raw)
    return SphericalFunction.from_pairs([tuple(e) for e in raw])


def _experiment_config(kind, settings):
    f = _direction(settings)
    return ExperimentConfig(
        kind=kind,
        f=f,
        t_values=tuple(settings["t_values"]),
        N=int(settings["N"]),
        n=int(settings["n"]),
        tol=float(settings["tol"]),
        seed=int(settings["seed"]),
        out=settings.get("out"),
        fmt=settings.get("format", "csv"),
    )


_EXTRA_LABELS = (
    ("conjecture_probe", "probe"),
    ("zoll_linear_max", "linear"),
    ("zoll_quad_ratio", "quad_ratio"),
    ("scale_ratio_dev", "scale_dev"),
)


def _print_rows(kind, rows):
    for row in rows:
        line = (
            f"t={row.t:+.6f}  area={row.area:.9f}  systole={row.systole:.9f}"
            f"  ratio={row.ratio:.9f}  ratio-1/pi={row.ratio_minus_inv_pi:+.3e}"
        )
        for key, label in _EXTRA_LABELS:
            if key in row.extras:
                line += f"  {label}={row.extras[key]:.6g}"
        line += f"  bound={'PASS' if row.bound_check else 'FAIL'}"
        if row.warnings:
            line += f"  [{'; '.join(row.warnings)}]"
        print(line)
    passed = sum(1 for row in rows if row.bound_check)
    print(f"{kind}: {passed}/{len(rows)} rows pass")


def _run_experiment_command(kind, args):
    cfg = _experiment_config(kind, _merged_settings(kind, args))
    rows = run_experiment(cfg)
    _print_rows(kind, rows)
    if cfg.out:
        emit_report(rows, cfg.out, fmt=cfg.fmt)
        print(f"report written to {cfg.out}")
    return 0 if all(row.bound_check for row in rows) else 1


def _run_funk_scan(args):
    settings = _merged_settings("funk-scan", args)
    f = _direction(settings)
    out = settings.get("out")
    if out:
        write_funk_scan(f, out)
        print(f"funk scan written to {out}")
    else:
        print("ux,uy,uz,funk_value")
        for row in funk_scan(f):
            print(",".join(repr(float(v)) for v in row))
    return 0


def _run_systole(args):
    settings = _merged_settings("systole", args)
    f = _direction(settings)
    records = []
    for t in settings["t_values"]:
        g = normalized_variation(f, t)
        report = estimate_systole(
            g,
            N=int(settings["N"]),
            n=int(settings["n"]),
            tol=float(settings["tol"]),
            seed=int(settings["seed"]),
        )
        ratio = systolic_ratio(area(g), report.systole)
        print(
            f"t={t:+.6f}  systole={report.systole:.12f}  ratio={ratio:.9f}"
            f"  curvature_min={report.curvature_min:.6f}"
            + (f"  [{'; '.join(report.warnings)}]" if report.warnings else "")
        )
        records.append({"t": t, "ratio": ratio, **report.to_json()})
    out = settings.get("out")
    if out:
        fmt = settings.get("format", "csv")
        if fmt == "json":
            text = json.dumps(records, indent=2, default=_json_nan) + "\n"
        else:
            lines = ["t,systole,witness_length,ratio,curvature_min,warnings"]
            for r in records:
                lines.append(
                    ",".join(
                        [
                            repr(r["t"]),
                            repr(r["systole"]),
                            repr(r["witness_length"]),
                            repr(r["ratio"]),
                            repr(r["curvature_min"]),
                            '"' + "; ".join(r["warnings"]) + '"',
                        ]
                    )
                )
            text = "\n".join(lines) + "\n"
        with open(out, "w", newline="") as fh:
            fh.write(text)
        print(f"systole report written to {out}")
    return 0


def _json_nan(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    raise TypeError(f"not JSON serializable: {value!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="systolab",
        description="systolic-ratio experiments on conformal spheres",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "baseline": "round metric: area, systole, ratio at their round values",
        "proposition": "ratio > 1/pi along a mean-zero conformal variation",
        "general": "normalized variation of an arbitrary direction",
        "zoll": "first-order Zoll family: circle lengths 2*pi + O(t^2)",
        "pu": "even directions keep ratio >= 1/pi",
        "scale": "ratio is invariant under rescaling the metric",
        "conjecture": "emit the sharp-constant probe without asserting it",
        "funk-scan": "dump the Funk transform of f on an axis grid",
        "systole": "estimate the systole of the variation at each t",
    }
    for name, text in descriptions.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
        p.add_argument("--out", help="write the report to this path")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument(
            "--t",
            type=_parse_t_list,
            help="comma-separated t values (overrides the config)",
        )
        p.add_argument("--seed", type=int, help="seed for the systole estimator")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "funk-scan":
            return _run_funk_scan(args)
        if args.command == "systole":
            return _run_systole(args)
        return _run_experiment_command(COMMAND_KINDS[args.command], args)
    except SystolabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
