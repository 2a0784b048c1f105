"""Band-limited real functions on the unit 2-sphere.

The basis is the real spherical harmonics Y_lm, orthonormal with respect to
the surface measure dv of the round sphere (integral of Y_lm^2 over S^2 = 1,
so Y_00 = 1/sqrt(4*pi)).  Functions are stored as flat coefficient vectors of
length (L+1)^2 with index l*l + l + m.

Evaluation uses the sectoral-scaled associated Legendre functions
Q_lm(z) = Nbar_lm * P_lm(z) / (1-z^2)^(m/2), which are polynomials in z, and
the Cartesian azimuth polynomials C_m + i*S_m = (x + i*y)^m.  On the sphere
Y_lm = sqrt(2) * Q_lm(z) * C_m(x, y) (cosine branch, m > 0), so the whole
basis extends to polynomials in (x, y, z); differentiating that extension and
projecting out the radial component yields the exact tangential gradient
without pole special cases.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import BandTooLow

FOUR_PI = 4.0 * math.pi

#: Default band limit used across the lab.
DEFAULT_DEGREE = 8

#: Tolerated drift of an input point off the unit sphere before it is rejected.
UNIT_NORM_TOL = 1e-9


def sh_size(degree_max):
    """Number of real harmonics of degree <= degree_max."""
    return (degree_max + 1) ** 2


def sh_index(l, m):
    """Flat index of the (l, m) harmonic, -l <= m <= l."""
    if not 0 <= l:
        raise ValueError(f"degree l must be >= 0, got {l}")
    if not -l <= m <= l:
        raise ValueError(f"order m={m} outside [-{l}, {l}]")
    return l * l + l + m


def sh_degrees(degree_max):
    """Array mapping each flat index to its degree l."""
    ls = np.empty(sh_size(degree_max), dtype=int)
    for l in range(degree_max + 1):
        ls[l * l : (l + 1) ** 2] = l
    return ls


def normalize_points(points, tol=UNIT_NORM_TOL):
    """Return points renormalized onto S^2.

    Points whose norm drifted from 1 by more than ``tol`` are rejected: such
    inputs signal a bug upstream rather than accumulated rounding.
    """
    p = np.asarray(points, dtype=float)
    if p.shape[-1] != 3:
        raise ValueError(f"points must have trailing dimension 3, got shape {p.shape}")
    r = np.sqrt(np.sum(p * p, axis=-1))
    if np.any(np.abs(r - 1.0) > tol):
        worst = float(np.max(np.abs(r - 1.0)))
        raise ValueError(f"point drifted {worst:.3e} off the unit sphere (tol {tol:.0e})")
    return p / r[..., np.newaxis]


def sphere_point(x, y, z):
    """Validated point of S^2 as a length-3 array."""
    return normalize_points(np.array([x, y, z], dtype=float))


def _sectoral_scaled_legendre(z, degree_max, want_derivative=False):
    """Normalized associated Legendre values with the sin^m(theta) factor removed.

    Returns Q (and optionally dQ/dz) of shape (L+1, L+1, n); entry [l, m] is
    Nbar_lm * P_lm(z) / (1-z^2)^(m/2), a degree l-m polynomial in z.  Upward
    recursion in l for each fixed m; the scaled diagonal terms are constants.
    """
    z = np.asarray(z, dtype=float)
    L = degree_max
    n = z.shape[0]
    Q = np.zeros((L + 1, L + 1, n))
    Q[0, 0] = 1.0 / math.sqrt(FOUR_PI)
    for m in range(1, L + 1):
        Q[m, m] = math.sqrt((2 * m + 1) / (2.0 * m)) * Q[m - 1, m - 1]
    for m in range(L):
        Q[m + 1, m] = math.sqrt(2 * m + 3) * z * Q[m, m]
    for m in range(L + 1):
        for l in range(m + 2, L + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(
                (2.0 * l + 1.0)
                * ((l - 1.0) ** 2 - m * m)
                / ((2.0 * l - 3.0) * (l * l - m * m))
            )
            Q[l, m] = a * z * Q[l - 1, m] - b * Q[l - 2, m]
    if not want_derivative:
        return Q
    dQ = np.zeros_like(Q)
    for m in range(L):
        dQ[m + 1, m] = math.sqrt(2 * m + 3) * Q[m, m]
    for m in range(L + 1):
        for l in range(m + 2, L + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(
                (2.0 * l + 1.0)
                * ((l - 1.0) ** 2 - m * m)
                / ((2.0 * l - 3.0) * (l * l - m * m))
            )
            dQ[l, m] = a * (z * dQ[l - 1, m] + Q[l - 1, m]) - b * dQ[l - 2, m]
    return Q, dQ


def sh_basis(points, degree_max, grad=False):
    """Evaluate the real orthonormal basis at unit points.

    Parameters
    ----------
    points : array (..., 3), assumed on S^2 (no renormalization here).
    degree_max : highest degree L.
    grad : if True, also return the tangential gradients.

    Returns
    -------
    Y : array (n, (L+1)^2)
    dY : array (n, 3, (L+1)^2), only when grad=True; rows are tangential
         (orthogonal to the evaluation point).
    """
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    L = degree_max
    n = p.shape[0]
    nb = sh_size(L)

    # Azimuth polynomials (x + i y)^m.
    C = np.empty((L + 1, n))
    S = np.empty((L + 1, n))
    C[0] = 1.0
    S[0] = 0.0
    for m in range(1, L + 1):
        C[m] = x * C[m - 1] - y * S[m - 1]
        S[m] = x * S[m - 1] + y * C[m - 1]

    sqrt2 = math.sqrt(2.0)
    Y = np.empty((n, nb))
    if not grad:
        Q = _sectoral_scaled_legendre(z, L)
        for l in range(L + 1):
            Y[:, sh_index(l, 0)] = Q[l, 0]
            for m in range(1, l + 1):
                Y[:, sh_index(l, m)] = sqrt2 * Q[l, m] * C[m]
                Y[:, sh_index(l, -m)] = sqrt2 * Q[l, m] * S[m]
        return Y

    Q, dQ = _sectoral_scaled_legendre(z, L, want_derivative=True)
    dY = np.empty((n, 3, nb))
    for l in range(L + 1):
        k = sh_index(l, 0)
        Y[:, k] = Q[l, 0]
        dY[:, 0, k] = 0.0
        dY[:, 1, k] = 0.0
        dY[:, 2, k] = dQ[l, 0]
        for m in range(1, l + 1):
            kc = sh_index(l, m)
            ks = sh_index(l, -m)
            Y[:, kc] = sqrt2 * Q[l, m] * C[m]
            Y[:, ks] = sqrt2 * Q[l, m] * S[m]
            # d/dx (x+iy)^m = m (x+iy)^(m-1), d/dy = i m (x+iy)^(m-1)
            dY[:, 0, kc] = sqrt2 * Q[l, m] * m * C[m - 1]
            dY[:, 1, kc] = -sqrt2 * Q[l, m] * m * S[m - 1]
            dY[:, 2, kc] = sqrt2 * dQ[l, m] * C[m]
            dY[:, 0, ks] = sqrt2 * Q[l, m] * m * S[m - 1]
            dY[:, 1, ks] = sqrt2 * Q[l, m] * m * C[m - 1]
            dY[:, 2, ks] = sqrt2 * dQ[l, m] * S[m]
    # Remove the radial component: gradients of any smooth extension agree
    # tangentially, so the polynomial extension above is as good as any.
    radial = np.einsum("nik,ni->nk", dY, p)
    dY -= radial[:, np.newaxis, :] * p[:, :, np.newaxis]
    return Y, dY


_RECURRENCE_CACHE = {}


def _recurrence_tables(degree_max):
    """Cached scalar tables (qmm, edge, a, b) for the Legendre recurrences."""
    L = degree_max
    if L not in _RECURRENCE_CACHE:
        qmm = np.empty(L + 1)
        qmm[0] = 1.0 / math.sqrt(FOUR_PI)
        for m in range(1, L + 1):
            qmm[m] = math.sqrt((2 * m + 1) / (2.0 * m)) * qmm[m - 1]
        edge = np.array([math.sqrt(2 * m + 3) for m in range(L + 1)])
        a = np.zeros((L + 1, L + 1))
        b = np.zeros((L + 1, L + 1))
        for m in range(L + 1):
            for l in range(m + 2, L + 1):
                a[l, m] = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
                b[l, m] = math.sqrt(
                    (2.0 * l + 1.0)
                    * ((l - 1.0) ** 2 - m * m)
                    / ((2.0 * l - 3.0) * (l * l - m * m))
                )
        _RECURRENCE_CACHE[L] = (qmm, edge, a, b)
    return _RECURRENCE_CACHE[L]


def sh_sum(coeffs, points):
    """Sum of coeffs[k] * Y_k at unit points, without the basis matrix.

    Column-by-column accumulation in O(n) memory; harmonics whose
    coefficients vanish are skipped, so sparse directions evaluate in a
    handful of vector operations.
    """
    c = np.asarray(coeffs, dtype=float)
    L = math.isqrt(c.size) - 1
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    n = p.shape[0]
    qmm, edge, ta, tb = _recurrence_tables(L)
    sqrt2 = math.sqrt(2.0)
    val = np.zeros(n)
    cm = np.ones(n)
    sm = np.zeros(n)
    for m in range(L + 1):
        if m > 0:
            cm, sm = x * cm - y * sm, x * sm + y * cm
        q_prev2 = None
        q_prev1 = np.full(n, qmm[m])
        for l in range(m, L + 1):
            if l == m:
                q = q_prev1
            elif l == m + 1:
                q = edge[m] * z * q_prev1
            else:
                q = ta[l, m] * z * q_prev1 - tb[l, m] * q_prev2
            if l > m:
                q_prev2, q_prev1 = q_prev1, q
            if m == 0:
                cc = c[sh_index(l, 0)]
                if cc != 0.0:
                    val += cc * q
            else:
                cp = c[sh_index(l, m)]
                cn = c[sh_index(l, -m)]
                if cp != 0.0 or cn != 0.0:
                    val += (sqrt2 * (cp * cm + cn * sm)) * q
    return val


def sh_sum_grad(coeffs, points):
    """(values, tangential gradients) of a coefficient sum at unit points.

    Same accumulation scheme as sh_sum, carrying d/dz of the scaled Legendre
    values and the azimuth-derivative identities; the radial component is
    projected out at the end.
    """
    c = np.asarray(coeffs, dtype=float)
    L = math.isqrt(c.size) - 1
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    n = p.shape[0]
    qmm, edge, ta, tb = _recurrence_tables(L)
    sqrt2 = math.sqrt(2.0)
    val = np.zeros(n)
    gx = np.zeros(n)
    gy = np.zeros(n)
    gz = np.zeros(n)
    cm = np.ones(n)
    sm = np.zeros(n)
    cm_prev = None
    sm_prev = None
    for m in range(L + 1):
        if m > 0:
            cm_prev, sm_prev = cm, sm
            cm, sm = x * cm - y * sm, x * sm + y * cm
        q_prev2 = dq_prev2 = None
        q_prev1 = np.full(n, qmm[m])
        dq_prev1 = np.zeros(n)
        for l in range(m, L + 1):
            if l == m:
                q, dq = q_prev1, dq_prev1
            elif l == m + 1:
                q = edge[m] * z * q_prev1
                dq = edge[m] * q_prev1
            else:
                q = ta[l, m] * z * q_prev1 - tb[l, m] * q_prev2
                dq = ta[l, m] * (z * dq_prev1 + q_prev1) - tb[l, m] * dq_prev2
            if l > m:
                q_prev2, q_prev1 = q_prev1, q
                dq_prev2, dq_prev1 = dq_prev1, dq
            if m == 0:
                cc = c[sh_index(l, 0)]
                if cc != 0.0:
                    val += cc * q
                    gz += cc * dq
            else:
                cp = c[sh_index(l, m)]
                cn = c[sh_index(l, -m)]
                if cp != 0.0 or cn != 0.0:
                    azim = cp * cm + cn * sm
                    val += sqrt2 * azim * q
                    gz += sqrt2 * azim * dq
                    mq = m * sqrt2 * q
                    gx += mq * (cp * cm_prev + cn * sm_prev)
                    gy += mq * (cn * cm_prev - cp * sm_prev)
    radial = gx * x + gy * y + gz * z
    grads = np.column_stack([gx - radial * x, gy - radial * y, gz - radial * z])
    return val, grads


class SphericalFunction:
    """Real band-limited function on S^2 as a flat coefficient vector."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.ascontiguousarray(coeffs, dtype=float)
        if c.ndim != 1:
            raise ValueError("coeffs must be one-dimensional")
        L = math.isqrt(c.size) - 1
        if sh_size(L) != c.size:
            raise ValueError(f"coefficient length {c.size} is not a perfect square")
        self.coeffs = c

    @property
    def degree(self):
        return math.isqrt(self.coeffs.size) - 1

    @classmethod
    def zeros(cls, degree_max=DEFAULT_DEGREE):
        return cls(np.zeros(sh_size(degree_max)))

    @classmethod
    def constant(cls, value, degree_max=0):
        c = np.zeros(sh_size(degree_max))
        c[0] = value * math.sqrt(FOUR_PI)
        return cls(c)

    @classmethod
    def harmonic(cls, l, m, coeff=1.0, degree_max=None):
        L = l if degree_max is None else degree_max
        c = np.zeros(sh_size(L))
        c[sh_index(l, m)] = coeff
        return cls(c)

    @classmethod
    def from_pairs(cls, pairs, degree_max=None):
        """Build from [(l, m, value), ...]; omitted entries are zero."""
        pairs = list(pairs)
        L = max((l for l, _, _ in pairs), default=0)
        if degree_max is not None:
            if degree_max < L:
                raise ValueError(f"degree_max={degree_max} below largest pair degree {L}")
            L = degree_max
        c = np.zeros(sh_size(L))
        for l, m, v in pairs:
            c[sh_index(l, m)] += v
        return cls(c)

    def coefficient(self, l, m):
        k = sh_index(l, m)
        return float(self.coeffs[k]) if k < self.coeffs.size else 0.0

    def padded(self, degree_max):
        """Same function re-indexed with band limit >= current degree."""
        if degree_max < self.degree:
            raise ValueError("cannot shrink the band limit")
        c = np.zeros(sh_size(degree_max))
        c[: self.coeffs.size] = self.coeffs
        return SphericalFunction(c)

    def __call__(self, points):
        p = normalize_points(points)
        vals = sh_sum(self.coeffs, p)
        return float(vals[0]) if p.ndim == 1 else vals.reshape(p.shape[:-1])

    def gradient(self, points):
        """Tangential (sphere) gradient at unit points, shape (..., 3)."""
        p = normalize_points(points)
        _, g = sh_sum_grad(self.coeffs, p)
        return g[0] if p.ndim == 1 else g.reshape(p.shape)

    def l2_norm(self):
        """L^2 norm under dv (Parseval: sqrt of sum of squared coefficients)."""
        return float(np.sqrt(np.sum(self.coeffs**2)))

    def __add__(self, other):
        L = max(self.degree, other.degree)
        return SphericalFunction(self.padded(L).coeffs + other.padded(L).coeffs)

    def __sub__(self, other):
        L = max(self.degree, other.degree)
        return SphericalFunction(self.padded(L).coeffs - other.padded(L).coeffs)

    def __mul__(self, scalar):
        return SphericalFunction(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return SphericalFunction(-self.coeffs)

    def __repr__(self):
        nz = int(np.count_nonzero(self.coeffs))
        return f"SphericalFunction(degree={self.degree}, nonzero={nz})"

    def to_json(self):
        """JSON form {"L": int, "coeffs": [[l, m, value], ...]}, zeros omitted."""
        entries = []
        for l in range(self.degree + 1):
            for m in range(-l, l + 1):
                v = self.coeffs[sh_index(l, m)]
                if v != 0.0:
                    entries.append([l, m, float(v)])
        return {"L": self.degree, "coeffs": entries}

    @classmethod
    def from_json(cls, obj):
        return cls.from_pairs(
            [(int(l), int(m), float(v)) for l, m, v in obj.get("coeffs", [])],
            degree_max=int(obj["L"]),
        )


class SphereQuadrature:
    """Product quadrature on S^2: Gauss-Legendre in cos(theta), uniform longitude.

    Exact (to rounding) on every spherical harmonic of degree <= band, hence on
    products of harmonics whose total degree stays <= band.
    """

    def __init__(self, band):
        if band < 0:
            raise ValueError("band must be >= 0")
        self.band = band
        ntheta = band // 2 + 1
        nphi = band + 1
        zs, wz = leggauss(ntheta)
        phis = 2.0 * math.pi * np.arange(nphi) / nphi
        sin_t = np.sqrt(1.0 - zs**2)
        x = np.outer(sin_t, np.cos(phis)).ravel()
        y = np.outer(sin_t, np.sin(phis)).ravel()
        z = np.outer(zs, np.ones(nphi)).ravel()
        self.nodes = np.column_stack([x, y, z])
        self.weights = np.repeat(wz, nphi) * (2.0 * math.pi / nphi)
        self._basis_cache = {}

    @property
    def size(self):
        return self.weights.size

    def basis(self, degree_max):
        """Cached basis matrix (nodes x harmonics) up to degree_max."""
        if degree_max not in self._basis_cache:
            self._basis_cache[degree_max] = sh_basis(self.nodes, degree_max)
        return self._basis_cache[degree_max]

    def integrate_values(self, values):
        """Integral of node samples against the surface measure."""
        return float(self.weights @ np.asarray(values, dtype=float))

    def project(self, values, degree_max):
        """Least-squares-free spectral projection of node samples onto degree <= L."""
        coeffs = self.basis(degree_max).T @ (self.weights * np.asarray(values, dtype=float))
        return SphericalFunction(coeffs)

    def __repr__(self):
        return f"SphereQuadrature(band={self.band}, nodes={self.size})"


def build_quadrature(band):
    """Quadrature exact on all harmonics of degree <= band."""
    return SphereQuadrature(band)


def integrate(f, quadrature):
    """Integral of f dv; exact for band-limited f when the band suffices."""
    if quadrature.band < f.degree:
        raise BandTooLow(
            f"quadrature band {quadrature.band} below function degree {f.degree}"
        )
    return quadrature.integrate_values(quadrature.basis(f.degree) @ f.coeffs)


def mean_zero_decompose(f):
    """Split f = lambda * 1 + f0 with mean-zero f0.

    lambda is the mean (1/4pi) * integral of f, i.e. c_00 / sqrt(4pi); the
    remainder then integrates to zero, making the split a direct sum.
    """
    lam = float(f.coeffs[0]) / math.sqrt(FOUR_PI)
    c = f.coeffs.copy()
    c[0] = 0.0
    return lam, SphericalFunction(c)


def parity_decompose(f):
    """Split f into its even and odd parts under the antipodal map.

    Even part keeps even-degree coefficients, odd part the odd-degree ones;
    Y_lm(-p) = (-1)^l Y_lm(p).
    """
    ls = sh_degrees(f.degree)
    even = np.where(ls % 2 == 0, f.coeffs, 0.0)
    odd = np.where(ls % 2 == 1, f.coeffs, 0.0)
    return SphericalFunction(even), SphericalFunction(odd)


def laplacian(f):
    """Round Laplace-Beltrami: multiplies each degree-l coefficient by -l(l+1)."""
    ls = sh_degrees(f.degree)
    return SphericalFunction(f.coeffs * (-ls * (ls + 1.0)))
