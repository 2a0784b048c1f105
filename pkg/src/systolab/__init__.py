"""Numerical laboratory for the systolic area of conformal metrics on S^2."""

from .errors import (
    BandTooLow,
    CurvatureNotPositive,
    DegenerateSystole,
    IOFailure,
    NoConvergence,
    NonAdmissibleT,
    ProjectionResidualTooLarge,
    StepTooLarge,
    SystolabError,
)
from .harmonics import (
    SphereQuadrature,
    SphericalFunction,
    build_quadrature,
    integrate,
    laplacian,
    mean_zero_decompose,
    parity_decompose,
    sh_basis,
    sh_index,
)
from .metric import (
    ConformalMetric,
    DiscreteClosedCurve,
    area,
    curve_energy,
    curve_length,
    gauss_bonnet_integral,
    gauss_curvature,
    make_variation,
    max_admissible_t,
    min_curvature,
    normalized_variation,
    systolic_ratio,
)
from .circles import (
    CircleSpec,
    average_great_circle_length,
    find_signed_funk_axes,
    funk_image,
    funk_scan,
    funk_transform,
    funk_transform_many,
    great_circle_length,
    great_circle_length_many,
    great_circle_points,
    sample_circle,
    verify_tangent_bundle_identity,
    write_funk_scan,
)
from .geodesics import (
    GeodesicResult,
    SystoleReport,
    TightenResult,
    birkhoff_shorten,
    build_sweepout,
    estimate_systole,
    fibonacci_axes,
    geodesic_arc,
    integrate_geodesic,
    length_increase_violations,
    tighten_sweepout,
    write_trace,
    write_witness_curve,
)
from .experiments import (
    CSV_COLUMNS,
    ExperimentConfig,
    ResultRow,
    default_directions,
    emit_report,
    render_report,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "BandTooLow",
    "CurvatureNotPositive",
    "DegenerateSystole",
    "IOFailure",
    "NoConvergence",
    "NonAdmissibleT",
    "ProjectionResidualTooLarge",
    "StepTooLarge",
    "SystolabError",
    "SphereQuadrature",
    "SphericalFunction",
    "build_quadrature",
    "integrate",
    "laplacian",
    "mean_zero_decompose",
    "parity_decompose",
    "sh_basis",
    "sh_index",
    "ConformalMetric",
    "DiscreteClosedCurve",
    "area",
    "curve_energy",
    "curve_length",
    "gauss_bonnet_integral",
    "gauss_curvature",
    "make_variation",
    "max_admissible_t",
    "min_curvature",
    "normalized_variation",
    "systolic_ratio",
    "CircleSpec",
    "average_great_circle_length",
    "find_signed_funk_axes",
    "funk_image",
    "funk_scan",
    "funk_transform",
    "funk_transform_many",
    "great_circle_length",
    "great_circle_length_many",
    "great_circle_points",
    "sample_circle",
    "verify_tangent_bundle_identity",
    "write_funk_scan",
    "GeodesicResult",
    "SystoleReport",
    "TightenResult",
    "birkhoff_shorten",
    "build_sweepout",
    "estimate_systole",
    "fibonacci_axes",
    "geodesic_arc",
    "integrate_geodesic",
    "length_increase_violations",
    "tighten_sweepout",
    "write_trace",
    "write_witness_curve",
    "CSV_COLUMNS",
    "ExperimentConfig",
    "ResultRow",
    "default_directions",
    "emit_report",
    "render_report",
    "run_experiment",
    "__version__",
]
