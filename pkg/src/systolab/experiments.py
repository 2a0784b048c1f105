"""Experiment driver: sweep t along a variation direction, check the bound.

Each experiment kind fixes a preprocessing of the direction f, a family of
metrics g_t, and an inequality that every result row is checked against:

  baseline          round metric only; area, systole, ratio at their round
                    values.
  proposition       plain variation (1 + t*f0)^2 * g0 with mean-zero f0;
                    ratio strictly above 1/pi for t != 0, with the
                    quantitative lower bound 1/pi + t^2 |f0|^2 / (4 pi^2),
                    and systole <= 2*pi.
  general_direction normalized variation (1+lam*t)(1 + t*f0)^2 * g0 of an
                    arbitrary f = lam + f0; same ratio bound (the ratio is
                    scale-invariant, so the lam-direction drops out).
  zoll_first_order  exponential family exp(2*t*f_odd) * g0; great-circle
                    lengths are 2*pi + O(t^2): the t-linear term vanishes
                    (Funk transform of an odd function) and the maximal
                    deviation scales as t^2 (checked against t/2).  The
                    row's area/systole columns report the standard
                    (1 + t*f_odd)^2 family so that rows stay comparable
                    across kinds.
  pu_even           even part of f; ratio >= 1/pi, strictly for |t| >= 0.05.
  scale_invariance  ratio(mu * g_t) = ratio(g_t) for mu in {1/2, 2, 10},
                    each scale realized through the lam-direction
                    (1 + lam*t) = mu and re-estimated from scratch.
  conjecture_probe  emits (pi * ratio - 1) / (t^2 |pi_+ f0|^2), which the
                    sharp-constant conjecture keeps >= 1 at leading order;
                    recorded in the row extras, never asserted.

Rows are independent; a full run is reproducible from (config, seed).
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circles import great_circle_points
from .errors import IOFailure, NonAdmissibleT
from .geodesics import estimate_systole
from .harmonics import (
    SphericalFunction,
    build_quadrature,
    mean_zero_decompose,
    parity_decompose,
)
from .metric import area, make_variation, max_admissible_t, systolic_ratio

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi
INV_PI = 1.0 / math.pi

KINDS = (
    "baseline",
    "proposition",
    "general_direction",
    "zoll_first_order",
    "pu_even",
    "scale_invariance",
    "conjecture_probe",
)

#: Report columns, in emission order (identical for CSV and JSON).
CSV_COLUMNS = (
    "t",
    "area",
    "systole",
    "ratio",
    "ratio_minus_inv_pi",
    "two_pi_minus_systole",
    "curvature_min",
    "bound_check",
    "warnings",
)

LENGTH_TOL = 1e-4   # tolerance on length-scale claims (systole, 2*pi, ...)
RATIO_TOL = 1e-6    # tolerance on ratio-scale claims
SCALE_TOL = 1e-10   # scale invariance of the ratio
ZOLL_LINEAR_TOL = 1e-10
SCALE_FACTORS = (0.5, 2.0, 10.0)

#: Directions every sweep-style check is expected to cover.
def default_directions():
    """The standard test directions, as name -> SphericalFunction."""
    return {
        "Y20": SphericalFunction.harmonic(2, 0),
        "Y30": SphericalFunction.harmonic(3, 0),
        "Y21+0.5*Y43": SphericalFunction.from_pairs(
            [(2, 1, 1.0), (4, 3, 0.5)]
        ),
        "Y10+Y20": SphericalFunction.from_pairs([(1, 0, 1.0), (2, 0, 1.0)]),
    }


@dataclass(frozen=True)
class ResultRow:
    """One (t, metric) evaluation with its margins and bound verdict.

    extras holds kind-specific diagnostics (the conjecture probe value, the
    zoll deviation data, the scale-invariance spread); it is available to
    callers but deliberately kept out of the emitted report, whose columns
    are fixed.
    """

    t: float
    area: float
    systole: float
    ratio: float
    ratio_minus_inv_pi: float
    two_pi_minus_systole: float
    curvature_min: float
    bound_check: bool
    warnings: tuple
    extras: dict = field(default_factory=dict, compare=False, repr=False)

    def as_record(self):
        """Row as a plain dict in report-column order."""
        return {
            "t": self.t,
            "area": self.area,
            "systole": self.systole,
            "ratio": self.ratio,
            "ratio_minus_inv_pi": self.ratio_minus_inv_pi,
            "two_pi_minus_systole": self.two_pi_minus_systole,
            "curvature_min": self.curvature_min,
            "bound_check": self.bound_check,
            "warnings": "; ".join(self.warnings),
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """A reproducible experiment: kind, direction, t sweep, solver knobs.

    f is a SphericalFunction, a list of (l, m, value) coefficient pairs,
    or None for the round sphere.  Every t is validated against the
    admissible range of the preprocessed direction at construction time,
    so a config that exists can always be run.  out/fmt describe where a
    report should go; run_experiment itself never writes.
    """

    kind: str
    f: SphericalFunction = None
    t_values: tuple = (0.0,)
    N: int = 65
    n: int = 128
    tol: float = 1e-10
    seed: int = 0
    out: str = None
    fmt: str = "csv"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        ts = tuple(float(t) for t in self.t_values)
        if not ts:
            raise ValueError("t_values must contain at least one value")
        object.__setattr__(self, "t_values", ts)
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be 'csv' or 'json', got {self.fmt!r}")
        if self.f is None:
            object.__setattr__(self, "f", SphericalFunction.zeros(0))
        elif not isinstance(self.f, SphericalFunction):
            object.__setattr__(self, "f", SphericalFunction.from_pairs(self.f))
        if self.kind == "baseline":
            if any(t != 0.0 for t in ts):
                raise NonAdmissibleT("baseline runs only at t = 0")
            return
        direction = self.direction()
        bound = max_admissible_t(direction)
        for t in ts:
            if abs(t) >= bound:
                raise NonAdmissibleT(
                    f"t = {t:.6g} outside the admissible range "
                    f"]-{bound:.6g}, {bound:.6g}[ for this direction"
                )
        if self.kind == "general_direction":
            lam, _ = mean_zero_decompose(self.f)
            for t in ts:
                if 1.0 + lam * t <= 0.0:
                    raise NonAdmissibleT(
                        f"scale factor 1 + lam*t = {1.0 + lam * t:.6g} <= 0 "
                        f"at t = {t:.6g}"
                    )

    def direction(self):
        """The mean-zero direction actually fed into the metric."""
        _, f0 = mean_zero_decompose(self.f)
        if self.kind == "zoll_first_order":
            _, odd = parity_decompose(f0)
            return odd
        if self.kind == "pu_even":
            even, _ = parity_decompose(f0)
            return even
        return f0

    def to_json(self):
        return {
            "kind": self.kind,
            "f": self.f.to_json(),
            "t_values": list(self.t_values),
            "N": self.N,
            "n": self.n,
            "tol": self.tol,
            "seed": self.seed,
            "out": self.out,
            "format": self.fmt,
        }

    @classmethod
    def from_json(cls, obj):
        f = None if obj.get("f") is None else SphericalFunction.from_json(obj["f"])
        return cls(
            kind=obj["kind"],
            f=f,
            t_values=tuple(obj.get("t_values", (0.0,))),
            N=int(obj.get("N", 65)),
            n=int(obj.get("n", 128)),
            tol=float(obj.get("tol", 1e-10)),
            seed=int(obj.get("seed", 0)),
            out=obj.get("out"),
            fmt=obj.get("format", "csv"),
        )


def _metric_for(cfg, t, lam=None):
    """The row's metric: (1 + lam*t)(1 + t*f_used)^2 * g0.

    lam defaults to the mean of f for general_direction (the normalized
    variation) and to 0 for every other kind.
    """
    if lam is None:
        lam = 0.0
        if cfg.kind == "general_direction":
            lam, _ = mean_zero_decompose(cfg.f)
    return make_variation(cfg.direction(), t, lam=lam)


def _estimate(cfg, g):
    report = estimate_systole(g, N=cfg.N, n=cfg.n, tol=cfg.tol, seed=cfg.seed)
    return report


def _zoll_deviations(f_odd, t, axes, m):
    """Great-circle lengths of exp(2*t*f_odd) * g0 over an axis grid.

    Returns (max_u |l - 2*pi|, max_u |odd-in-t part of l|); the second is
    the t-linear (plus t-cubed) term, which the Funk transform of an odd
    function annihilates.
    """
    dev = 0.0
    linear = 0.0
    step = TWO_PI / m
    for u in axes:
        vals = f_odd(great_circle_points(u, m))
        l_plus = step * float(np.sum(np.exp(t * vals)))
        l_minus = step * float(np.sum(np.exp(-t * vals)))
        dev = max(dev, abs(l_plus - TWO_PI))
        linear = max(linear, 0.5 * abs(l_plus - l_minus))
    return dev, linear


def _zoll_check(cfg, t):
    """First-order Zoll facts for the row at t; returns (ok, extras)."""
    f_odd = cfg.direction()
    q = build_quadrature(max(2 * f_odd.degree + 2, 18))
    m = max(256, 4 * f_odd.degree + 8)
    dev_full, linear = _zoll_deviations(f_odd, t, q.nodes, m)
    extras = {"zoll_linear_max": linear, "zoll_deviation": dev_full}
    ok = linear <= ZOLL_LINEAR_TOL
    if t != 0.0:
        dev_half, _ = _zoll_deviations(f_odd, 0.5 * t, q.nodes, m)
        if dev_half > 1e-13:
            quad_ratio = dev_full / dev_half
            extras["zoll_quad_ratio"] = quad_ratio
            ok = ok and 3.5 <= quad_ratio <= 4.5
    return ok, extras


def _bound_check(cfg, t, a, systole, ratio):
    """The kind's inequality for one row; returns (ok, extras)."""
    extras = {}
    if cfg.kind == "baseline":
        return (
            abs(a - FOUR_PI) <= 1e-10
            and abs(systole - TWO_PI) <= LENGTH_TOL
            and abs(ratio - INV_PI) <= LENGTH_TOL
        ), extras

    norm2 = cfg.direction().l2_norm() ** 2
    quantitative = INV_PI + t * t * norm2 / (4.0 * math.pi**2) - RATIO_TOL

    if cfg.kind in ("proposition", "general_direction"):
        ok = ratio >= quantitative
        if t != 0.0 and norm2 > 0.0:
            ok = ok and ratio > INV_PI
        if cfg.kind == "proposition":
            ok = ok and systole <= TWO_PI + LENGTH_TOL
        return ok, extras

    if cfg.kind == "zoll_first_order":
        return _zoll_check(cfg, t)

    if cfg.kind == "pu_even":
        ok = ratio >= INV_PI - RATIO_TOL
        if abs(t) >= 0.05:
            ok = ok and ratio - INV_PI > 0.0
        return ok, extras

    if cfg.kind == "scale_invariance":
        deviations = []
        for mu in SCALE_FACTORS:
            # mu * g_t through the lam-direction: 1 + lam*t = mu.  At t = 0
            # the direction drops out and mu rides on t = 1 directly.
            if t != 0.0:
                g_mu = _metric_for(cfg, t, lam=(mu - 1.0) / t)
            else:
                g_mu = make_variation(
                    SphericalFunction.zeros(0), 1.0, lam=mu - 1.0
                )
            report_mu = _estimate(cfg, g_mu)
            ratio_mu = systolic_ratio(area(g_mu), report_mu.systole)
            deviations.append(abs(ratio_mu - ratio))
        extras["scale_ratio_dev"] = max(deviations)
        return max(deviations) <= SCALE_TOL, extras

    # conjecture_probe: emit, never assert.
    even, _ = parity_decompose(cfg.direction())
    denom = t * t * even.l2_norm() ** 2
    probe = (math.pi * ratio - 1.0) / denom if denom > 0.0 else math.nan
    extras["conjecture_probe"] = probe
    return True, extras


def run_experiment(cfg):
    """Run every t of the config and return one ResultRow per t, in order."""
    rows = []
    for t in cfg.t_values:
        g = _metric_for(cfg, t)
        a = area(g)
        report = _estimate(cfg, g)
        systole = report.systole
        ratio = systolic_ratio(a, systole)
        ok, extras = _bound_check(cfg, t, a, systole, ratio)
        rows.append(
            ResultRow(
                t=t,
                area=a,
                systole=systole,
                ratio=ratio,
                ratio_minus_inv_pi=ratio - INV_PI,
                two_pi_minus_systole=TWO_PI - systole,
                curvature_min=report.curvature_min,
                bound_check=ok,
                warnings=tuple(report.warnings),
                extras=extras,
            )
        )
    return rows


def _format_cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_report(rows, fmt="csv"):
    """Report text for the rows; deterministic byte-for-byte."""
    if not rows:
        raise ValueError("no rows to report")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            record = row.as_record()
            writer.writerow([_format_cell(record[c]) for c in CSV_COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        records = []
        for row in rows:
            record = row.as_record()
            if isinstance(record["curvature_min"], float) and math.isnan(
                record["curvature_min"]
            ):
                record["curvature_min"] = None
            records.append(record)
        return json.dumps(records, indent=2) + "\n"
    raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")


def emit_report(rows, path, fmt="csv"):
    """Write the report to path; identical inputs give identical bytes."""
    text = render_report(rows, fmt=fmt)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFailure(f"could not write report to {path}: {exc}") from exc
