"""Geodesics, Birkhoff curve shortening, sweepouts, and the systole estimate.

The geodesic equation of a conformal metric w^2 g0 is integrated in ambient
coordinates: the tangential acceleration is -2 (grad rho . cdot) cdot +
|cdot|^2 grad rho with rho = log w, and the radial term -|cdot|^2 c keeps the
trajectory on the sphere (position renormalized, velocity re-tangented each
step).  No charts, no pole cases.

Curve shortening is Birkhoff's scheme on closed polygons: alternating
even/odd passes move each vertex toward the metric midpoint of its
neighbors.  Vertex moves are proposed by damped Newton steps on the local
two-segment energy and accepted only when the local length does not
increase, which makes every pass length-non-increasing by construction (the
two local segments of the vertices in one parity class tile the curve's edge
set exactly once).  A curve whose round length falls below 0.1 is flagged
collapsed: it is converging to a point, which the systole must exclude.

Sweepouts realize the two families the minimax argument uses — the
half-turn loop of great circles, and for a fixed axis the stack of parallel
circles closed up by point curves along a half great circle.  Tightening a
sweepout shortens every member per iteration; the family maximum is a
certified upper bound for the minimax level, and the member attaining it is
polished to a discrete closed geodesic (Newton on the stationarity system)
to serve as witness.
"""

from __future__ import annotations

import csv
import math
import warnings

import numpy as np

from .errors import (
    CurvatureNotPositive,
    NoConvergence,
    ProjectionResidualTooLarge,
    StepTooLarge,
    SystolabError,
)
from .harmonics import FOUR_PI, normalize_points, sh_sum, sh_sum_grad
from .metric import (
    DiscreteClosedCurve,
    _arc_lengths,
    curve_energy,
    curve_length,
    min_curvature,
)
from .circles import CircleSpec, circle_frame, find_signed_funk_axes

TWO_PI = 2.0 * math.pi

#: Round length below which a shortening curve counts as collapsed to a point.
COLLAPSE_THRESHOLD = 0.1

#: Default sweepout shape and solver knobs.
DEFAULT_CURVES = 65
DEFAULT_VERTICES = 128
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 5000

#: Slack allowed on the per-pass length monotonicity assertion.
MONOTONE_SLACK = 1e-13

#: Global count of monotonicity violations ever detected (should stay 0).
_length_increase_violations = 0


def length_increase_violations():
    """How many Birkhoff passes ever increased a curve's length (target: 0)."""
    return _length_increase_violations


# ---------------------------------------------------------------------------
# metric sampling helpers (hot path: no basis matrices, no normalization cost)
# ---------------------------------------------------------------------------


def _w_values(g, pts):
    """Length factor at unit points, flat array in, flat array out."""
    if g.t == 0.0:
        return np.full(pts.shape[0], g._sqrt_scale)
    return g._sqrt_scale * (1.0 + g.t * sh_sum(g.f.coeffs, pts))


def _w_and_gradw(g, pts):
    """(w, grad w) with grad w tangential; grad w = sqrt(scale) * t * grad f."""
    if g.t == 0.0:
        return np.full(pts.shape[0], g._sqrt_scale), np.zeros_like(pts)
    vals, grads = sh_sum_grad(g.f.coeffs, pts)
    return g._sqrt_scale * (1.0 + g.t * vals), (g._sqrt_scale * g.t) * grads


def _rho_gradient(g, pts):
    """grad log w at (approximately unit) points, tangential, batched."""
    if g.t == 0.0:
        return np.zeros_like(pts)
    r = np.linalg.norm(pts, axis=-1, keepdims=True)
    unit = pts / r
    vals, grads = sh_sum_grad(g.f.coeffs, unit)
    return (g.t / (1.0 + g.t * vals))[:, None] * grads


# ---------------------------------------------------------------------------
# geodesic integration
# ---------------------------------------------------------------------------


class GeodesicPath:
    """Dense output of the geodesic integrator.

    points/velocities have shape (steps+1, 3) for a single start or
    (B, steps+1, 3) for a batch; lengths holds the cumulative metric length
    along the trajectory, integrated with the same fourth-order scheme.
    energy_drift is the max relative wobble of the conserved w^2 |cdot|^2.
    """

    __slots__ = ("points", "velocities", "lengths", "times", "energy_drift")

    def __init__(self, points, velocities, lengths, times, energy_drift):
        self.points = points
        self.velocities = velocities
        self.lengths = lengths
        self.times = times
        self.energy_drift = energy_drift

    @property
    def endpoint(self):
        return self.points[..., -1, :]


def _geodesic_rhs(g, c, v):
    """Ambient acceleration of the conformal geodesic equation."""
    speed2 = np.sum(v * v, axis=-1, keepdims=True)
    if g.t == 0.0:
        return -speed2 * c
    grad = _rho_gradient(g, c)
    radial = np.sum(grad * v, axis=-1, keepdims=True)
    return -speed2 * c - 2.0 * radial * v + speed2 * grad


def integrate_geodesic(g, p, v, T, h=5e-3):
    """Integrate the geodesic of g from (p, v) for parameter time T.

    Classical RK4 with fixed step (h is shrunk so the steps tile T exactly);
    the state carries the cumulative metric length as an extra component.
    After each step the position is renormalized onto the sphere and the
    velocity re-tangented; a single-step drift beyond 1e-6 raises
    StepTooLarge.  p and v may be single vectors or batches of shape (B, 3).
    """
    if h > 1e-2 + 1e-15:
        raise ValueError(f"step h={h} too large; the integrator contract caps h at 1e-2")
    if T <= 0.0:
        raise ValueError("T must be positive")
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    c = normalize_points(np.atleast_2d(p)).copy()
    vel = np.atleast_2d(np.asarray(v, dtype=float)).astype(float).copy()
    vel -= np.sum(vel * c, axis=-1, keepdims=True) * c
    if np.any(np.sum(vel * vel, axis=-1) < 1e-24):
        raise ValueError("initial velocity must be a nonzero tangent vector")
    steps = max(1, int(math.ceil(T / h - 1e-12)))
    dt = T / steps
    B = c.shape[0]
    pts = np.empty((B, steps + 1, 3))
    vels = np.empty((B, steps + 1, 3))
    lens = np.empty((B, steps + 1))
    pts[:, 0] = c
    vels[:, 0] = vel
    lens[:, 0] = 0.0
    conserved0 = _w_values(g, c) ** 2 * np.sum(vel * vel, axis=-1)
    drift = 0.0

    def rhs(state_c, state_v):
        acc = _geodesic_rhs(g, state_c, state_v)
        r = np.linalg.norm(state_c, axis=-1, keepdims=True)
        speed = _w_values(g, state_c / r) * np.sqrt(np.sum(state_v**2, axis=-1))
        return state_v, acc, speed

    for k in range(steps):
        k1c, k1v, k1s = rhs(c, vel)
        k2c, k2v, k2s = rhs(c + 0.5 * dt * k1c, vel + 0.5 * dt * k1v)
        k3c, k3v, k3s = rhs(c + 0.5 * dt * k2c, vel + 0.5 * dt * k2v)
        k4c, k4v, k4s = rhs(c + dt * k3c, vel + dt * k3v)
        c_new = c + (dt / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
        vel = vel + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        dlen = (dt / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        r = np.linalg.norm(c_new, axis=-1)
        if np.max(np.abs(r - 1.0)) > 1e-6:
            raise StepTooLarge(
                f"position drifted {np.max(np.abs(r - 1.0)):.2e} off the sphere in "
                f"one step; shrink h={h}"
            )
        c = c_new / r[:, None]
        vel = vel - np.sum(vel * c, axis=-1, keepdims=True) * c
        pts[:, k + 1] = c
        vels[:, k + 1] = vel
        lens[:, k + 1] = lens[:, k] + dlen
        conserved = _w_values(g, c) ** 2 * np.sum(vel * vel, axis=-1)
        drift = max(drift, float(np.max(np.abs(conserved / conserved0 - 1.0))))

    times = dt * np.arange(steps + 1)
    if single:
        return GeodesicPath(pts[0], vels[0], lens[0], times, drift)
    return GeodesicPath(pts, vels, lens, times, drift)


def _hermite_eval(c0, v0, c1, v1, dt, tau):
    """Cubic Hermite interpolation of a trajectory within one step."""
    s = tau / dt
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * c0 + h10 * dt * v0 + h01 * c1 + h11 * dt * v1


def geodesic_arc(g, p, q, tol=1e-10, max_iter=100):
    """Shortest geodesic arc of g between nearby points, by shooting.

    Newton iteration on (launch angle, arrival time): the residual is the
    arrival error expressed in a tangent basis at q; the time column of the
    Jacobian is the arrival velocity (free), the angle column is finite
    differenced with a companion trajectory integrated in the same batch.
    Requires round distance < pi/2 so the short arc is unambiguous.

    Returns (midpoint, arc_length): the point halving the metric length and
    the metric length of the arc.
    """
    p = normalize_points(np.asarray(p, dtype=float))
    q = normalize_points(np.asarray(q, dtype=float))
    d = float(_arc_lengths(p[None, :], q[None, :])[0])
    if not d < math.pi / 2.0 + 1e-9:
        raise ValueError(f"points are {d:.4f} apart; shooting needs < pi/2")
    if d < 1e-13:
        return p.copy(), 0.0
    # tangent frames at p (aimed at q) and at q (for the residual)
    e1 = q - np.dot(q, p) * p
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    b1 = p - np.dot(p, q) * q
    b1 /= np.linalg.norm(b1)
    b2 = np.cross(q, b1)

    theta, tau = 0.0, d
    h = min(1e-2, max(2e-3, d / 40.0))
    delta = 1e-7
    for iteration in range(max_iter):
        dirs = np.array(
            [
                math.cos(theta) * e1 + math.sin(theta) * e2,
                math.cos(theta + delta) * e1 + math.sin(theta + delta) * e2,
            ]
        )
        horizon = tau + 10.0 * h
        path = integrate_geodesic(g, np.array([p, p]), dirs, horizon, h)
        dt = path.times[1]
        k = min(int(tau / dt), path.points.shape[1] - 2)
        frac = tau - k * dt

        def arrival(b):
            c = _hermite_eval(
                path.points[b, k], path.velocities[b, k],
                path.points[b, k + 1], path.velocities[b, k + 1], dt, frac,
            )
            return c / np.linalg.norm(c)

        c0 = arrival(0)
        res = np.array([np.dot(c0 - q, b1), np.dot(c0 - q, b2)])
        if np.linalg.norm(res) < tol:
            total = _arc_interp(g, path, 0, dt, k, frac)
            mid = _metric_midpoint(path, 0, dt, total / 2.0)
            return mid, total
        vel_tau = path.velocities[0, k] + (frac / dt) * (
            path.velocities[0, k + 1] - path.velocities[0, k]
        )
        c1 = arrival(1)
        jac = np.array(
            [
                [np.dot(c1 - c0, b1) / delta, np.dot(vel_tau, b1)],
                [np.dot(c1 - c0, b2) / delta, np.dot(vel_tau, b2)],
            ]
        )
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular shooting Jacobian: {exc}") from exc
        limit = 0.5 * max(d, 1e-3)
        norm = float(np.linalg.norm(step))
        if norm > limit:
            step *= limit / norm
        theta += float(step[0])
        tau += float(step[1])
        tau = min(max(tau, 0.25 * d), 4.0 * d + 1.0)
    raise NoConvergence(f"shooting did not reach tol={tol} in {max_iter} iterations")


def _arc_interp(g, path, b, dt, k, frac):
    """Cumulative metric length at parameter k*dt + frac.

    Hermite interpolation of the RK4-integrated cumulative length, using the
    metric speeds at the bracketing nodes as exact derivatives.
    """
    ends = path.points[b, k : k + 2]
    speeds = _w_values(g, ends) * np.linalg.norm(path.velocities[b, k : k + 2], axis=-1)
    s = frac / dt
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return float(
        h00 * path.lengths[b, k]
        + h10 * dt * speeds[0]
        + h01 * path.lengths[b, k + 1]
        + h11 * dt * speeds[1]
    )


def _metric_midpoint(path, b, dt, target):
    """Point along a trajectory at a prescribed cumulative metric length."""
    lens = path.lengths[b]
    k = int(np.searchsorted(lens, target) - 1)
    k = max(0, min(k, len(lens) - 2))
    span = lens[k + 1] - lens[k]
    frac = 0.0 if span <= 0 else (target - lens[k]) * dt / span
    c = _hermite_eval(
        path.points[b, k], path.velocities[b, k],
        path.points[b, k + 1], path.velocities[b, k + 1], dt, frac,
    )
    return c / np.linalg.norm(c)


# ---------------------------------------------------------------------------
# Birkhoff curve shortening: batched alternating passes
# ---------------------------------------------------------------------------


def _batch_metric_lengths(g, X):
    """Metric lengths (midpoint rule) of a batch of closed polygons (B, n, 3)."""
    B, n, _ = X.shape
    nxt = np.roll(X, -1, axis=1)
    mids = X + nxt
    mids /= np.maximum(np.linalg.norm(mids, axis=-1, keepdims=True), 1e-30)
    arcs = _arc_lengths(X.reshape(-1, 3), nxt.reshape(-1, 3)).reshape(B, n)
    w = _w_values(g, mids.reshape(-1, 3)).reshape(B, n)
    return np.sum(w * arcs, axis=1)


def _batch_round_lengths(X):
    """Round lengths of a batch of closed polygons, for collapse detection."""
    B, n, _ = X.shape
    nxt = np.roll(X, -1, axis=1)
    return _arc_lengths(X.reshape(-1, 3), nxt.reshape(-1, 3)).reshape(B, n).sum(axis=1)


def _local_lengths(g, a, x, b):
    """Metric length of the two-segment path a--x--b for flat point arrays."""
    K = x.shape[0]
    m1 = a + x
    m2 = x + b
    m1 = m1 / np.maximum(np.linalg.norm(m1, axis=-1, keepdims=True), 1e-30)
    m2 = m2 / np.maximum(np.linalg.norm(m2, axis=-1, keepdims=True), 1e-30)
    w = _w_values(g, np.concatenate([m1, m2], axis=0))
    return w[:K] * _arc_lengths(a, x) + w[K:] * _arc_lengths(x, b)


def _vertex_newton_step(g, a, x, b):
    """One damped Newton step for each interior vertex of a two-segment path.

    Minimizes the local energy phi(x) = (w1 d1)^2 + (w2 d2)^2 whose minimizer
    is the metric midpoint; the Hessian is approximated by its dominant term
    2 (w1^2 + w2^2) Id, and the step is trust-region capped so the vertex
    never jumps past its neighbors.
    """
    K = x.shape[0]
    sum1 = a + x
    sum2 = x + b
    r1 = np.maximum(np.linalg.norm(sum1, axis=-1, keepdims=True), 1e-30)
    r2 = np.maximum(np.linalg.norm(sum2, axis=-1, keepdims=True), 1e-30)
    w, gw = _w_and_gradw(g, np.concatenate([sum1 / r1, sum2 / r2], axis=0))
    w1, w2 = w[:K], w[K:]
    gw1, gw2 = gw[:K], gw[K:]
    dot1 = np.sum(a * x, axis=-1)
    dot2 = np.sum(x * b, axis=-1)
    sin1 = np.linalg.norm(np.cross(a, x), axis=-1)
    sin2 = np.linalg.norm(np.cross(x, b), axis=-1)
    d1 = np.arctan2(sin1, dot1)
    d2 = np.arctan2(sin2, dot2)
    grad_d1 = -(a - dot1[:, None] * x) / np.maximum(sin1, 1e-30)[:, None]
    grad_d2 = -(b - dot2[:, None] * x) / np.maximum(sin2, 1e-30)[:, None]
    # pull the tangential gradient of w at each midpoint back through the
    # normalized-midpoint map (its transpose Jacobian is projection / norm)
    grad_w1 = gw1 / r1
    grad_w2 = gw2 / r2
    gphi = 2.0 * (w1 * d1)[:, None] * (d1[:, None] * grad_w1 + w1[:, None] * grad_d1)
    gphi += 2.0 * (w2 * d2)[:, None] * (d2[:, None] * grad_w2 + w2[:, None] * grad_d2)
    gphi -= np.sum(gphi * x, axis=-1, keepdims=True) * x
    hess = 2.0 * (w1 * w1 + w2 * w2)
    step = -gphi / hess[:, None]
    cap = 0.45 * np.maximum(d1, d2)
    norm = np.linalg.norm(step, axis=-1)
    scale = np.where(norm > cap, cap / np.maximum(norm, 1e-30), 1.0)
    x_new = x + scale[:, None] * step
    return x_new / np.linalg.norm(x_new, axis=-1, keepdims=True)


def _half_pass(g, X, parity, active, newton_iters=3):
    """Update every vertex of one parity class, in place, batch-wide.

    The two segments touching the vertices of one parity class tile the edge
    set exactly once (n even), so enforcing local length non-increase at each
    vertex makes the whole pass length-non-increasing.  Proposed positions
    are backtracked (full, half, quarter step) and the vertex is kept fixed
    when even the quarter step would lengthen its local path.  Returns the
    max vertex displacement per curve.
    """
    B, n, _ = X.shape
    disp = np.zeros(B)
    rows = np.flatnonzero(active)
    if rows.size == 0:
        return disp
    idx = np.arange(parity, n, 2)
    sub = X[rows]
    a = sub[:, (idx - 1) % n].reshape(-1, 3)
    b = sub[:, (idx + 1) % n].reshape(-1, 3)
    x0 = sub[:, idx].reshape(-1, 3)
    l0 = _local_lengths(g, a, x0, b)
    x = x0
    for _ in range(newton_iters):
        x = _vertex_newton_step(g, a, x, b)
    chosen = x0.copy()
    accepted = np.zeros(x0.shape[0], dtype=bool)
    for fraction in (1.0, 0.5, 0.25):
        rem = np.flatnonzero(~accepted)
        if rem.size == 0:
            break
        y = x0[rem] + fraction * (x[rem] - x0[rem])
        y /= np.maximum(np.linalg.norm(y, axis=-1, keepdims=True), 1e-30)
        ok = _local_lengths(g, a[rem], y, b[rem]) <= l0[rem]
        chosen[rem[ok]] = y[ok]
        accepted[rem[ok]] = True
    moved = np.linalg.norm(chosen - x0, axis=-1).reshape(rows.size, idx.size)
    disp[rows] = moved.max(axis=1)
    X[np.ix_(rows, idx)] = chosen.reshape(rows.size, idx.size, 3)
    return disp


def _run_passes(g, X, active, collapsed, max_passes, tol, on_pass=None, min_decrease=0.0):
    """Drive Birkhoff passes on a batch of curves, in place.

    active and collapsed are boolean masks updated in place: a curve freezes
    once its per-pass displacement falls below tol (discrete geodesic) or its
    round length falls below the collapse threshold.  Each pass asserts the
    length monotonicity the acceptance rule guarantees; a violation beyond
    MONOTONE_SLACK is counted and raised.  Returns (lengths, residuals,
    passes_done); residuals hold the last displacement of each curve.
    """
    global _length_increase_violations
    lengths = _batch_metric_lengths(g, X)
    residuals = np.full(X.shape[0], np.inf)
    residuals[~active] = 0.0
    passes_done = 0
    for _ in range(max_passes):
        if not active.any():
            break
        d0 = _half_pass(g, X, 0, active)
        d1 = _half_pass(g, X, 1, active)
        passes_done += 1
        new_lengths = _batch_metric_lengths(g, X)
        increase = new_lengths - lengths
        if np.any(increase > MONOTONE_SLACK):
            _length_increase_violations += int(np.sum(increase > MONOTONE_SLACK))
            raise SystolabError(
                f"Birkhoff pass increased a curve length by {float(increase.max()):.3e}"
            )
        drop = float(np.max(lengths[active] - new_lengths[active]))
        lengths = new_lengths
        residuals[active] = np.maximum(d0, d1)[active]
        rounds = _batch_round_lengths(X)
        newly_collapsed = active & (rounds < COLLAPSE_THRESHOLD)
        collapsed |= newly_collapsed
        active &= ~newly_collapsed
        active &= residuals >= tol
        if on_pass is not None:
            on_pass(passes_done, lengths)
        if min_decrease > 0.0 and drop < min_decrease:
            break
    return lengths, residuals, passes_done


# ---------------------------------------------------------------------------
# Newton polish: finish a near-geodesic to stationarity in a few jumps
# ---------------------------------------------------------------------------


def _tangent_frames(V):
    """Deterministic orthonormal tangent pair at each vertex of (n, 3)."""
    n = V.shape[0]
    seed = np.zeros((n, 3))
    seed[np.arange(n), np.argmin(np.abs(V), axis=1)] = 1.0
    e1 = np.cross(V, seed)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    return e1, np.cross(V, e1)


def _energy_gradient(g, V):
    """Tangential gradient of the discrete energy at each vertex, (n, 3)."""
    n = V.shape[0]
    nxt = np.roll(V, -1, axis=0)
    sums = V + nxt
    r = np.maximum(np.linalg.norm(sums, axis=-1, keepdims=True), 1e-30)
    w, gw = _w_and_gradw(g, sums / r)
    dots = np.sum(V * nxt, axis=-1)
    sins = np.linalg.norm(np.cross(V, nxt), axis=-1)
    d = np.arctan2(sins, dots)
    safe = np.maximum(sins, 1e-30)[:, None]
    grad_d_tail = -(nxt - dots[:, None] * V) / safe
    grad_d_head = -(V - dots[:, None] * nxt) / safe
    pull = gw / r
    coeff = (w * d)[:, None]
    g_tail = coeff * (d[:, None] * pull + w[:, None] * grad_d_tail)
    g_head = coeff * (d[:, None] * pull + w[:, None] * grad_d_head)
    grad = g_tail + np.roll(g_head, 1, axis=0)
    grad -= np.sum(grad * V, axis=-1, keepdims=True) * V
    return grad / (TWO_PI / n)


def _grad_norm(g, V):
    return float(np.max(np.linalg.norm(_energy_gradient(g, V), axis=-1)))


def _polygon_energy(g, V):
    """Discrete energy of one closed polygon (n, 3)."""
    n = V.shape[0]
    nxt = np.roll(V, -1, axis=0)
    mids = V + nxt
    mids /= np.maximum(np.linalg.norm(mids, axis=-1, keepdims=True), 1e-30)
    seg = _w_values(g, mids) * _arc_lengths(V, nxt)
    return float(np.sum(seg * seg) / (2.0 * TWO_PI / n))


def _newton_polish(g, V0, grad_tol=1e-11, max_newton=40, cap=0.25):
    """Jump a near-geodesic to stationarity with Newton's method.

    Solves grad E = 0 in the 2n tangent coordinates of the current vertices.
    The Jacobian is tridiagonal-cyclic in vertex blocks, so it is finite
    differenced with a cyclic coloring (vertices >= 3 apart are independent)
    in 2c gradient evaluations, c the smallest divisor of n that is >= 3.
    The linear solve uses lstsq because closed geodesics come in families
    (rotation along the curve, ambient isometries), which makes the Jacobian
    structurally rank-deficient; the step is trust-region capped per vertex
    so inflection zones of the energy landscape are crossed in bounded
    downhill slides.  The result is accepted only when the discrete energy
    did not increase — the energy is the Lyapunov function here, because
    re-parameterizing vertices along the same support wiggles the
    midpoint-rule length at O(1/n^2) in either sign while uphill jumps to
    saddle geodesics raise the energy.  Returns polished vertices or None.
    """
    n = V0.shape[0]
    c = next((k for k in range(3, n + 1) if n % k == 0), None)
    if c is None:
        return None
    base_energy = _polygon_energy(g, V0)
    V = V0.copy()
    delta = 1e-7
    classes = [np.flatnonzero(np.arange(n) % c == cls) for cls in range(c)]
    for _ in range(max_newton):
        e1, e2 = _tangent_frames(V)
        grad = _energy_gradient(g, V)
        fnorm = float(np.max(np.linalg.norm(grad, axis=-1)))
        if fnorm < grad_tol:
            break
        F = np.empty(2 * n)
        F[0::2] = np.sum(grad * e1, axis=-1)
        F[1::2] = np.sum(grad * e2, axis=-1)
        J = np.zeros((2 * n, 2 * n))
        for j, basis in enumerate((e1, e2)):
            for members in classes:
                shift = np.zeros((n, 1))
                shift[members] = delta
                Vp = V + shift * basis
                Vp /= np.linalg.norm(Vp, axis=-1, keepdims=True)
                gp = _energy_gradient(g, Vp)
                Fp = np.empty(2 * n)
                Fp[0::2] = np.sum(gp * e1, axis=-1)
                Fp[1::2] = np.sum(gp * e2, axis=-1)
                col = (Fp - F) / delta
                for i in members:
                    rows = np.array([(i - 1) % n, i, (i + 1) % n])
                    rr = np.concatenate([2 * rows, 2 * rows + 1])
                    J[rr, 2 * i + j] = col[rr]
        try:
            step = np.linalg.lstsq(J, -F, rcond=1e-10)[0]
        except np.linalg.LinAlgError:
            return None
        per_vertex = np.hypot(step[0::2], step[1::2])
        worst = float(per_vertex.max())
        if worst > cap:
            step *= cap / worst
        moved = False
        for scale in (1.0, 0.5, 0.25, 0.125, 0.0625):
            Vt = V + scale * (step[0::2, None] * e1 + step[1::2, None] * e2)
            Vt /= np.linalg.norm(Vt, axis=-1, keepdims=True)
            ft = _grad_norm(g, Vt)
            if ft < fnorm * (1.0 - 1e-3) or ft < grad_tol:
                V = Vt
                moved = True
                break
        if not moved:
            return None
    else:
        return None
    if _polygon_energy(g, V) > base_energy * (1.0 + 1e-11):
        return None
    return V


def _extrapolate_batch(g, X, active, lengths, drift, factors=(32.0, 16.0, 8.0, 4.0, 2.0)):
    """Aitken-style acceleration of slowly sliding curves, in place.

    A curve drifting through near-geodesic shapes (a shallow valley of the
    length functional) moves O(1/n^2) per pass; extrapolating along the
    drift of the last chunk jumps many passes at once.  A jump is accepted
    per curve only when it does not lengthen the curve and keeps every edge
    well short of a half turn, so monotonicity is preserved.
    """
    rows = np.flatnonzero(active)
    if rows.size == 0:
        return lengths
    taken = np.zeros(X.shape[0], dtype=bool)
    for factor in factors:
        trial = np.flatnonzero(active & ~taken)
        if trial.size == 0:
            break
        Y = X[trial] + factor * drift[trial]
        Y /= np.maximum(np.linalg.norm(Y, axis=-1, keepdims=True), 1e-30)
        new_lengths = _batch_metric_lengths(g, Y)
        edges = _arc_lengths(
            Y.reshape(-1, 3), np.roll(Y, -1, axis=1).reshape(-1, 3)
        ).reshape(Y.shape[0], -1)
        ok = (new_lengths <= lengths[trial]) & (edges.max(axis=1) < 1.4)
        good = trial[ok]
        X[good] = Y[ok]
        lengths[good] = new_lengths[ok]
        taken[good] = True
    return lengths


def _shorten_batch(g, X, tol, max_iter, polish_every=60):
    """Shorten a batch of closed polygons in place until stationary.

    Alternates chunks of Birkhoff passes with drift extrapolation and Newton
    polish on the curves that have not yet frozen; each polish is followed
    by a measuring pass so the reported residual is an honest per-pass
    vertex displacement.
    """
    B = X.shape[0]
    spread = np.max(np.abs(X.max(axis=1) - X.min(axis=1)), axis=-1)
    active = spread >= 1e-12
    collapsed = np.zeros(B, dtype=bool)
    attempts = np.zeros(B, dtype=int)
    lengths = _batch_metric_lengths(g, X)
    residuals = np.where(active, np.inf, 0.0)
    passes = 0
    while passes < max_iter and active.any():
        chunk = min(polish_every, max_iter - passes)
        before = X.copy()
        lengths, residuals, done = _run_passes(g, X, active, collapsed, chunk, tol)
        passes += done
        if not active.any() or passes >= max_iter:
            break
        lengths = _extrapolate_batch(g, X, active, lengths, X - before)
        for i in np.flatnonzero(active & (attempts < 6)):
            attempts[i] += 1
            polished = _newton_polish(g, X[i])
            if polished is not None:
                X[i] = polished
        lengths, residuals, done = _run_passes(g, X, active, collapsed, 1, tol)
        passes += done
    return lengths, residuals, collapsed, passes


class GeodesicResult:
    """A curve shortened to (or toward) a closed geodesic of g.

    residual is the max vertex displacement of the final Birkhoff pass;
    collapsed marks curves that shrank below the round-length threshold and
    are heading to a point, which the systole must exclude.
    """

    __slots__ = ("curve", "length", "energy", "residual", "collapsed", "passes")

    def __init__(self, curve, length, energy, residual, collapsed, passes):
        self.curve = curve
        self.length = length
        self.energy = energy
        self.residual = residual
        self.collapsed = collapsed
        self.passes = passes

    def __repr__(self):
        tag = "collapsed" if self.collapsed else f"residual={self.residual:.2e}"
        return f"GeodesicResult(length={self.length:.12f}, {tag}, passes={self.passes})"


def birkhoff_shorten(g, curve, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Shorten one closed curve to a discrete closed geodesic of g.

    Runs alternating-parity Birkhoff passes (with Newton polish acceleration)
    until the per-pass vertex displacement drops below tol or max_iter passes
    are spent.  Every pass is length-non-increasing; the curve is flagged
    collapsed when its round length falls below 0.1.
    """
    if curve.is_point:
        raise ValueError("cannot shorten a point curve")
    n = curve.vertices.shape[0]
    if n % 2 != 0:
        raise ValueError("Birkhoff passes need an even number of vertices")
    X = curve.vertices[None].copy()
    lengths, residuals, collapsed, passes = _shorten_batch(g, X, tol, max_iter)
    out = DiscreteClosedCurve(X[0])
    energy = 0.0 if out.is_point else curve_energy(g, out)
    return GeodesicResult(
        out, float(lengths[0]), energy, float(residuals[0]), bool(collapsed[0]), passes
    )


# ---------------------------------------------------------------------------
# sweepouts and tightening
# ---------------------------------------------------------------------------


class Sweepout:
    """A one-parameter family of closed curves sweeping out the sphere.

    kind "F": the half-turn loop of great circles around horizontal axes.
    kind "G": for a fixed axis u, the stack of parallel circles gamma(u, s)
    closed up by point curves marching back along a half great circle.
    """

    __slots__ = ("kind", "axis", "curves", "params")

    def __init__(self, kind, axis, curves, params):
        self.kind = kind
        self.axis = axis
        self.curves = curves
        self.params = params

    def __len__(self):
        return len(self.curves)


def build_sweepout(kind, N=DEFAULT_CURVES, n=DEFAULT_VERTICES, axis=None):
    """Construct the discrete family F or G(axis) with N members, n vertices.

    N must be odd (>= 9) so family G contains the exact great circle s = 0;
    n must be even (>= 32) for the alternating-parity shortening passes.
    """
    if N < 9 or N % 2 == 0:
        raise ValueError("N must be an odd integer >= 9")
    if n < 32 or n % 2 != 0:
        raise ValueError("n must be an even integer >= 32")
    params = np.arange(N) / (N - 1)
    if kind == "F":
        curves = []
        for i in range(N):
            ang = math.pi * i / (N - 1)
            u = np.array([math.cos(ang), math.sin(ang), 0.0])
            curves.append(DiscreteClosedCurve(CircleSpec(u, 0.0).points(n)))
        return Sweepout("F", None, curves, params)
    if kind == "G":
        if axis is None:
            raise ValueError("family G needs an axis")
        u = normalize_points(np.asarray(axis, dtype=float))
        n_points = 2 * max(2, N // 8)  # even, so the circle leg has odd count
        n_circles = N - n_points
        curves = []
        for j in range(n_circles):
            s = -1.0 + 2.0 * j / (n_circles - 1)
            curves.append(DiscreteClosedCurve(CircleSpec(u, s).points(n)))
        e1, _ = circle_frame(u)
        for k in range(1, n_points + 1):
            ang = math.pi * k / (n_points + 1)
            p = math.cos(ang) * u + math.sin(ang) * e1
            curves.append(DiscreteClosedCurve.point(p, n))
        return Sweepout("G", u, curves, params)
    raise ValueError(f"unknown sweepout kind {kind!r}; expected 'F' or 'G'")


class TightenResult:
    """Outcome of tightening a sweepout.

    width is the family maximum after the passes (an upper bound for the
    minimax level); witness is the maximal member shortened all the way to a
    discrete closed geodesic (None if it collapsed); trace records
    (iteration, max_length, argmax_index) per pass; lengths and collapsed
    give the final per-member state.
    """

    __slots__ = ("width", "witness", "trace", "lengths", "collapsed")

    def __init__(self, width, witness, trace, lengths, collapsed):
        self.width = width
        self.witness = witness
        self.trace = trace
        self.lengths = lengths
        self.collapsed = collapsed


def tighten_sweepout(g, sw, passes, tol=DEFAULT_TOL, polish_witness=True):
    """Shorten every member of a sweepout and report the family width.

    Runs up to `passes` Birkhoff passes on all members simultaneously
    (stopping early when the maximum length stalls), then polishes the
    member attaining the width into a witness geodesic.  The width after
    any number of length-non-increasing passes is a certified upper bound
    for the minimax level of the family.
    """
    counts = {c.vertices.shape[0] for c in sw.curves}
    if len(counts) != 1:
        raise ValueError("sweepout members must share one vertex count")
    X = np.stack([c.vertices for c in sw.curves]).astype(float)
    active = np.array([not c.is_point for c in sw.curves])
    collapsed = np.zeros(len(sw.curves), dtype=bool)
    lengths0 = _batch_metric_lengths(g, X)
    trace = [(0, float(lengths0.max()), int(np.argmax(lengths0)))]

    def on_pass(k, lens):
        trace.append((k, float(lens.max()), int(np.argmax(lens))))

    lengths, residuals, done = _run_passes(
        g, X, active, collapsed, passes, tol, on_pass=on_pass, min_decrease=1e-12
    )
    width = float(lengths.max())
    arg = int(np.argmax(lengths))
    witness = None
    if polish_witness and not collapsed[arg] and lengths[arg] > COLLAPSE_THRESHOLD:
        top = DiscreteClosedCurve(X[arg])
        if not top.is_point:
            witness = birkhoff_shorten(g, top, tol=tol)
    return TightenResult(width, witness, trace, lengths, collapsed)


def write_trace(trace, path):
    """Dump a tightening trace as CSV rows (iteration, max_length, argmax_index)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "max_length", "argmax_index"])
        for iteration, max_length, argmax_index in trace:
            writer.writerow([iteration, repr(float(max_length)), argmax_index])
    return path


def write_witness_curve(witness, path):
    """Dump a witness curve's vertices as CSV rows (x, y, z)."""
    curve = witness.curve if isinstance(witness, GeodesicResult) else witness
    verts = curve.vertices if isinstance(curve, DiscreteClosedCurve) else np.asarray(curve)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "z"])
        for p in verts:
            writer.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(p[2]))])
    return path


# ---------------------------------------------------------------------------
# the systole estimate
# ---------------------------------------------------------------------------


def fibonacci_axes(count):
    """Deterministic, roughly uniform axes on the upper half sphere.

    Great circles only see axes up to sign, so the grid stays on z > 0 to
    avoid antipodal duplicates.
    """
    k = np.arange(count, dtype=float)
    z = (k + 0.5) / count
    r = np.sqrt(1.0 - z * z)
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    phi = TWO_PI * k / golden**2
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


class SystoleReport:
    """Everything the systole estimate produced.

    systole is the minimum over all candidate lengths; witness is the
    shortest candidate that comes with an actual discrete geodesic;
    candidates lists (source_tag, length) pairs in the order examined;
    curvature_min is NaN when the curvature projection was not trustworthy.
    """

    __slots__ = ("systole", "witness", "candidates", "curvature_min", "warnings")

    def __init__(self, systole, witness, candidates, curvature_min, warnings_log):
        self.systole = systole
        self.witness = witness
        self.candidates = candidates
        self.curvature_min = curvature_min
        self.warnings = warnings_log

    def to_json(self):
        return {
            "systole": self.systole,
            "witness_length": None if self.witness is None else self.witness.length,
            "candidates": [[tag, length] for tag, length in self.candidates],
            "curvature_min": self.curvature_min,
            "warnings": list(self.warnings),
        }

    def __repr__(self):
        return (
            f"SystoleReport(systole={self.systole:.12f}, "
            f"candidates={len(self.candidates)}, curvature_min={self.curvature_min})"
        )


def _initial_width(g, sw):
    """Family maximum before any shortening pass."""
    X = np.stack([c.vertices for c in sw.curves])
    return float(_batch_metric_lengths(g, X).max())


def estimate_systole(
    g,
    N=DEFAULT_CURVES,
    n=DEFAULT_VERTICES,
    tol=DEFAULT_TOL,
    max_iter=DEFAULT_MAX_ITER,
    seed=0,
    family_passes=40,
    grid_axes=26,
    deep_axes=2,
    seed_circles=20,
):
    """Estimate the systole of g as the minimum over three candidate pools.

    (a) the width of the tightened great-circle family F,
    (b) the widths of the parallel-circle families G(u): every axis of a
        deterministic grid contributes its initial width, and the most
        promising axes (plus the signed extreme axes of the Funk transform
        of the direction, where the short geodesics live at first order)
        are tightened in full,
    (c) seeded great circles shortened to closed geodesics directly.

    Collapsed curves are excluded.  Returns a SystoleReport whose witness is
    the shortest candidate realized by an actual discrete geodesic.
    """
    warnings_log = []
    try:
        curvature_min = float(min_curvature(g))
    except ProjectionResidualTooLarge as exc:
        curvature_min = float("nan")
        warnings_log.append(f"curvature projection unreliable: {exc}")
    if math.isfinite(curvature_min) and curvature_min <= 0.0:
        message = f"metric has curvature min {curvature_min:.4e} <= 0"
        warnings.warn(message, CurvatureNotPositive)
        warnings_log.append(message)

    candidates = []
    witnesses = []

    def record(tag, length, result=None):
        candidates.append((tag, float(length)))
        if result is not None and not result.collapsed:
            witnesses.append((tag, result))

    # (a) the great-circle family
    res_f = tighten_sweepout(g, build_sweepout("F", N, n), family_passes, tol)
    record("family-F", res_f.width)
    if res_f.witness is not None and not res_f.witness.collapsed:
        record("geodesic-F", res_f.witness.length, res_f.witness)

    # (b) the parallel-circle families
    axes = [(f"grid{k}", u) for k, u in enumerate(fibonacci_axes(grid_axes))]
    if not g.is_round:
        signed = find_signed_funk_axes(g.f)
        if signed is not None:
            u0, u1 = signed
            axes = [("funk-min", u0), ("funk-max", u1)] + axes
    sweeps = [(tag, build_sweepout("G", N, n, axis=u)) for tag, u in axes]
    widths0 = np.array([_initial_width(g, sw) for _, sw in sweeps])
    n_signed = sum(1 for tag, _ in axes if tag.startswith("funk-"))
    deep = set(range(n_signed))
    deep |= set(np.argsort(widths0)[:deep_axes].tolist())
    for i, (tag, sw) in enumerate(sweeps):
        if i in deep:
            res = tighten_sweepout(g, sw, family_passes, tol)
            record(f"family-G-{tag}", res.width)
            if res.witness is not None and not res.witness.collapsed:
                record(f"geodesic-G-{tag}", res.witness.length, res.witness)
        else:
            record(f"family-G0-{tag}", widths0[i])

    # (c) seeded great circles shortened to geodesics
    rng = np.random.default_rng(seed)
    seed_axes = rng.normal(size=(seed_circles, 3))
    seed_axes /= np.linalg.norm(seed_axes, axis=-1, keepdims=True)
    tags = [f"seed{k}" for k in range(seed_circles)]
    extra = [u for tag, u in axes if tag.startswith("funk-")]
    if extra:
        seed_axes = np.concatenate([np.asarray(extra), seed_axes], axis=0)
        tags = [f"funk-circle{k}" for k in range(len(extra))] + tags
    X = np.stack([CircleSpec(u, 0.0).points(n) for u in seed_axes])
    budget = min(max_iter, 1500)
    lengths, residuals, collapsed, _ = _shorten_batch(g, X, tol, budget)
    for k, tag in enumerate(tags):
        # a curve still sliding is neither a geodesic nor a certified bound
        if collapsed[k] or not residuals[k] < 1e-6:
            continue
        out = DiscreteClosedCurve(X[k])
        result = GeodesicResult(
            out, float(lengths[k]), curve_energy(g, out),
            float(residuals[k]), False, 0,
        )
        record(f"geodesic-{tag}", lengths[k], result)

    valid = [(tag, length) for tag, length in candidates if length > COLLAPSE_THRESHOLD]
    if not valid:
        raise SystolabError("every candidate collapsed; no systole estimate")
    systole = min(length for _, length in valid)
    witness = None
    live = [(res.length, res) for _, res in witnesses if res.length > COLLAPSE_THRESHOLD]
    if live:
        witness = min(live, key=lambda pair: pair[0])[1]
    return SystoleReport(systole, witness, candidates, curvature_min, warnings_log)
