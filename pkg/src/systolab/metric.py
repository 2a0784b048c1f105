"""Conformal metrics on the 2-sphere and their basic geometric quantities.

A metric here has the form g = (1 + lam*t) * (1 + t*f)^2 * g0 with g0 the
round metric and f a mean-zero band-limited function: the pointwise length
factor is w = sqrt(1 + lam*t) * (1 + t*f).  Setting lam = 0 gives the plain
conformal variation; lam equal to the mean of an arbitrary direction gives
the normalized variation that separates scaling from shape.

Curves are closed polygons on the sphere; lengths use the second-order
midpoint rule w(midpoint) * (round arc length of the edge), and energies fix
the parameter domain to total measure 2*pi so that for constant-speed curves
E = l^2 / (4*pi), aligning the threshold 2E <= l with l <= 2*pi.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from .errors import (
    BandTooLow,
    DegenerateSystole,
    NonAdmissibleT,
    ProjectionResidualTooLarge,
)
from .harmonics import (
    FOUR_PI,
    SphereQuadrature,
    SphericalFunction,
    build_quadrature,
    laplacian,
    mean_zero_decompose,
    normalize_points,
)

#: Relative L^2 residual allowed when projecting log w onto degree <= 2L.
CURVATURE_RESIDUAL_TOL = 1e-6

#: Slack on the pi/2 consecutive-vertex separation bound (allows exact pi/2).
_EDGE_SEP_TOL = 1e-9


def _tangent_basis(p):
    """Two orthonormal tangent vectors at unit point p."""
    a = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = a - np.dot(a, p) * p
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    return e1, e2


def _polish_abs_max(f, x0):
    """Sharpen a grid candidate for max |f| by BFGS in a local tangent chart."""
    v0 = f(x0)
    sign = 1.0 if v0 >= 0.0 else -1.0
    e1, e2 = _tangent_basis(x0)

    def neg_signed(u):
        y = x0 + u[0] * e1 + u[1] * e2
        r = np.linalg.norm(y)
        x = y / r
        val = sign * f(x)
        g = sign * f.gradient(x)
        return -val, -np.array([np.dot(g, e1), np.dot(g, e2)]) / r

    res = minimize(neg_signed, np.zeros(2), jac=True, method="BFGS",
                   options={"gtol": 1e-13, "maxiter": 80})
    return float(-res.fun)


def sup_norm(f):
    """Max of |f| over the sphere: dense-grid scan plus local polish.

    The grid is a quadrature node set several times denser than the band of
    f; the best candidates (and both poles, frequent extrema of zonal
    functions) are refined to machine precision with a chart-based BFGS.
    """
    if not np.any(f.coeffs):
        return 0.0
    band = max(6 * f.degree, 48)
    q = build_quadrature(band)
    vals = q.basis(f.degree) @ f.coeffs
    order = np.argsort(-np.abs(vals))[:8]
    candidates = [q.nodes[k] for k in order]
    candidates.append(np.array([0.0, 0.0, 1.0]))
    candidates.append(np.array([0.0, 0.0, -1.0]))
    best = float(np.max(np.abs(vals)))
    for x0 in candidates:
        best = max(best, _polish_abs_max(f, x0))
    return best


def max_admissible_t(f):
    """Symmetric admissible bound a = 1 / sup|f| (infinite for f = 0).

    The variation (1 + t*f)^2 * g0 is a genuine metric for every |t| < a;
    sign-asymmetric f admits a larger one-sided range, which we deliberately
    do not chase: the bound is used two-sidedly.
    """
    s = sup_norm(f)
    return math.inf if s == 0.0 else 1.0 / s


class ConformalMetric:
    """Immutable conformal metric (1 + lam*t) * (1 + t*f)^2 * g0.

    Parameters
    ----------
    f : SphericalFunction
        Mean-zero variation direction.
    t : float
        Variation parameter; |t| must stay below the admissible bound of f.
    lam : float
        Scale-direction coefficient (the mean of the original direction when
        the metric comes from the normalized variation).
    quadrature : SphereQuadrature
        Node set used for area integrals; band must be at least twice the
        degree of f so that w^2 integrates exactly.
    """

    def __init__(self, f, t, lam, quadrature):
        self.f = f
        self.t = float(t)
        self.lam = float(lam)
        self.quadrature = quadrature
        self.scale = 1.0 + self.lam * self.t
        self._sqrt_scale = math.sqrt(self.scale)

    @property
    def is_round(self):
        return self.t == 0.0

    def w(self, points):
        """Pointwise length factor w = sqrt(1 + lam*t) * (1 + t*f)."""
        if self.t == 0.0:
            p = np.asarray(points, dtype=float)
            shape = p.shape[:-1]
            return 1.0 if shape == () else np.ones(shape)
        return self._sqrt_scale * (1.0 + self.t * self.f(points))

    def log_factor_gradient(self, points):
        """Tangential gradient of rho = log w (exact, no projection).

        grad rho = t * grad f / (1 + t*f); the constant sqrt(1 + lam*t)
        contributes nothing.
        """
        p = normalize_points(points)
        if self.t == 0.0:
            return np.zeros(p.shape)
        flat = p.reshape(-1, 3)
        vals = self.f(flat)
        grads = self.f.gradient(flat)
        out = (self.t / (1.0 + self.t * vals))[:, np.newaxis] * grads
        return out.reshape(p.shape) if p.ndim > 1 else out[0]

    @cached_property
    def _node_w(self):
        vals = self.quadrature.basis(self.f.degree) @ self.f.coeffs
        return self._sqrt_scale * (1.0 + self.t * vals)

    @cached_property
    def _curvature_data(self):
        """Projected log-factor and its Laplacian, with residual guard."""
        L2 = max(16, 2 * self.f.degree)
        q_proj = build_quadrature(2 * L2 + 8)
        rho_nodes = np.log(self.w(q_proj.nodes))
        rho = q_proj.project(rho_nodes, L2)
        q_check = build_quadrature(3 * L2 + 8)
        rho_exact = np.log(self.w(q_check.nodes))
        diff = rho_exact - q_check.basis(L2) @ rho.coeffs
        norm = math.sqrt(q_check.integrate_values(rho_exact**2))
        residual = math.sqrt(q_check.integrate_values(diff**2))
        rel = residual / max(norm, 1e-300)
        if norm > 1e-14 and rel > CURVATURE_RESIDUAL_TOL:
            raise ProjectionResidualTooLarge(
                f"log-factor projection residual {rel:.3e} exceeds "
                f"{CURVATURE_RESIDUAL_TOL:.0e}; t is too close to the "
                "admissible boundary for spectral curvature"
            )
        return rho, laplacian(rho), q_check

    def to_json(self):
        return {
            "f": self.f.to_json(),
            "t": self.t,
            "lambda": self.lam,
            "L_quad_band": self.quadrature.band,
        }

    @classmethod
    def from_json(cls, obj):
        f = SphericalFunction.from_json(obj["f"])
        band = obj.get("L_quad_band")
        quad = None if band is None else SphereQuadrature(int(band))
        return make_variation(f, float(obj["t"]), float(obj.get("lambda", 0.0)),
                              quadrature=quad)

    def __repr__(self):
        return (f"ConformalMetric(degree={self.f.degree}, t={self.t}, "
                f"lam={self.lam})")


def make_variation(f, t, lam=0.0, quadrature=None):
    """Build the conformal metric (1 + lam*t) * (1 + t*f)^2 * g0.

    f must be mean-zero (split any constant part into lam beforehand, e.g.
    with mean_zero_decompose).  Raises NonAdmissibleT when |t| reaches the
    symmetric admissible bound of f or when 1 + lam*t <= 0.
    """
    mean, _ = mean_zero_decompose(f)
    if abs(mean) > 1e-12 * (1.0 + float(np.max(np.abs(f.coeffs)))):
        raise ValueError(
            f"direction has mean {mean:.3e}; pass its mean-zero part and put "
            "the constant component into lam"
        )
    if 1.0 + lam * t <= 0.0:
        raise NonAdmissibleT(f"scale factor 1 + lam*t = {1.0 + lam * t:.6g} <= 0")
    if t != 0.0:
        bound = max_admissible_t(f)
        if abs(t) >= bound:
            raise NonAdmissibleT(
                f"|t| = {abs(t):.6g} outside the admissible range "
                f"]-{bound:.6g}, {bound:.6g}[ for this direction"
            )
    if quadrature is None:
        quadrature = build_quadrature(2 * f.degree + 2)
    elif quadrature.band < 2 * f.degree:
        raise BandTooLow(
            f"quadrature band {quadrature.band} below 2*degree = {2 * f.degree}"
        )
    g = ConformalMetric(f, t, lam, quadrature)
    # Belt and braces: the bound above already implies positivity, but the
    # sup-norm is itself numerical, so confirm on a much denser grid.
    if t != 0.0:
        check = build_quadrature(3 * quadrature.band + 16)
        if np.min(g.w(check.nodes)) <= 0.0:
            raise NonAdmissibleT("length factor not positive on the check grid")
    return g


def normalized_variation(f, t, quadrature=None):
    """Normalized variation of an arbitrary direction f.

    Splits f = lam + f0 with f0 mean-zero and builds
    (1 + lam*t) * (1 + t*f0)^2 * g0, the form that isolates scaling.
    """
    lam, f0 = mean_zero_decompose(f)
    return make_variation(f0, t, lam, quadrature=quadrature)


def area(g):
    """Total area of (S^2, g) by quadrature of w^2 dv0.

    For lam = 0 this equals 4*pi + t^2 * integral(f^2) exactly (the
    quadrature band covers degree 2L), which is the variation's area law.
    """
    return float(g.quadrature.weights @ g._node_w**2)


class DiscreteClosedCurve:
    """Closed polygon on S^2: vertex i joins vertex i+1 (mod n).

    A point curve (all vertices equal) is explicitly allowed — the sweepout
    families need it.  Otherwise n >= 3 and consecutive vertices must stay
    within round distance pi/2 so the connecting arcs are unambiguous.
    """

    __slots__ = ("vertices", "is_point", "_edges")

    def __init__(self, vertices):
        v = normalize_points(np.atleast_2d(np.asarray(vertices, dtype=float)))
        spread = float(np.max(np.abs(v - v[0]))) if v.shape[0] > 1 else 0.0
        self.is_point = spread < 1e-12
        if not self.is_point:
            if v.shape[0] < 3:
                raise ValueError("closed curve needs at least 3 vertices")
            arcs = _arc_lengths(v, np.roll(v, -1, axis=0))
            worst = float(np.max(arcs))
            if worst > math.pi / 2.0 + _EDGE_SEP_TOL:
                raise ValueError(
                    f"consecutive vertices {worst:.4f} apart exceed pi/2"
                )
        self.vertices = v
        self._edges = None

    @property
    def n(self):
        return self.vertices.shape[0]

    @classmethod
    def point(cls, p, n=1):
        """Degenerate point curve at p with n identical vertices."""
        return cls(np.tile(np.asarray(p, dtype=float), (n, 1)))

    def edges(self):
        """(midpoints, round arc lengths) of the n closing edges, cached."""
        if self._edges is None:
            v = self.vertices
            nxt = np.roll(v, -1, axis=0)
            mids = v + nxt
            norms = np.linalg.norm(mids, axis=1, keepdims=True)
            mids = mids / norms
            self._edges = (mids, _arc_lengths(v, nxt))
        return self._edges

    def round_length(self):
        return float(np.sum(self.edges()[1]))

    def __repr__(self):
        kind = "point" if self.is_point else "closed"
        return f"DiscreteClosedCurve(n={self.n}, {kind})"


def _arc_lengths(p, q):
    """Round distances between paired unit points (robust at small angles)."""
    cross = np.linalg.norm(np.cross(p, q), axis=-1)
    dot = np.sum(p * q, axis=-1)
    return np.arctan2(cross, dot)


def curve_length(g, c):
    """Length of c under g: sum of w(edge midpoint) * round edge length."""
    if c.is_point:
        return 0.0
    mids, arcs = c.edges()
    return float(np.sum(g.w(mids) * arcs))


def curve_energy(g, c):
    """Energy of c with the parameter domain fixed to total measure 2*pi.

    E = 1/2 * sum (w(mid) * edge_len)^2 / dtau, dtau = 2*pi/n.  Discrete
    Cauchy-Schwarz gives E >= l^2/(4*pi), with equality exactly for
    constant-speed curves, so 2E <= l if and only if l <= 2*pi there.
    """
    if c.is_point:
        return 0.0
    mids, arcs = c.edges()
    seg = g.w(mids) * arcs
    dtau = 2.0 * math.pi / c.n
    return float(0.5 * np.sum(seg**2) / dtau)


def gauss_curvature(g, p):
    """Gauss curvature at p (or an array of points).

    K = (1 - lap0 rho) * exp(-2 rho) with rho = log w projected onto degree
    <= 2L; the same projection feeds both factors, so the Gauss-Bonnet
    integral stays an honest consistency check of the projection rather than
    an algebraic identity.
    """
    rho, lap_rho, _ = g._curvature_data
    pts = normalize_points(p)
    flat = pts.reshape(-1, 3)
    k = (1.0 - lap_rho(flat)) * np.exp(-2.0 * rho(flat))
    return float(k[0]) if pts.ndim == 1 else k.reshape(pts.shape[:-1])


def min_curvature(g):
    """Minimum of the Gauss curvature over a dense spectral check grid."""
    _, _, q_check = g._curvature_data
    return float(np.min(gauss_curvature(g, q_check.nodes)))


def gauss_bonnet_integral(g):
    """Integral of K over (S^2, g); equals 4*pi up to projection residue."""
    _, _, q_check = g._curvature_data
    k = gauss_curvature(g, q_check.nodes)
    return float(q_check.weights @ (k * g.w(q_check.nodes) ** 2))


def systolic_ratio(area_value, systole):
    """Scale-invariant ratio area / systole^2."""
    if systole <= 0.0:
        raise DegenerateSystole(f"systole must be positive, got {systole}")
    if area_value <= 0.0:
        raise ValueError(f"area must be positive, got {area_value}")
    return area_value / systole**2


ROUND_RATIO = 1.0 / math.pi
