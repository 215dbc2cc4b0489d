"""Scalar and small-matrix numerics plus a splittable random-number source.

Everything here is deterministic: functions are pure, and random draws are a
pure function of (master_seed, stream_id, counter).  The generator is
counter-based so that parallel replications can share a master seed while
drawing from provably disjoint, reproducible streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BracketError",
    "RngStream",
    "SymMatrix2",
    "bisect_root",
    "chi2_quantile_2dof",
    "draw_std_normal",
    "draw_uniform",
    "finite_diff_gradient",
    "finite_diff_hessian",
    "ln_gamma",
    "normal_quantile",
    "sample_moments",
]


class BracketError(ValueError):
    """Raised when a root bracket does not contain a sign change."""


# ---------------------------------------------------------------------------
# Counter-based random number generation
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STREAM_SALT = 0xD1B54A32D192ED03

_U64_GOLDEN = np.uint64(_GOLDEN)
_U64_C1 = np.uint64(0xBF58476D1CE4E5B9)
_U64_C2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def _mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit word."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z *= _U64_C1
    z ^= z >> np.uint64(27)
    z *= _U64_C2
    return z ^ (z >> np.uint64(31))


def _stream_key(master_seed: int, stream_id: int) -> int:
    a = _mix64(master_seed + _GOLDEN)
    b = _mix64(stream_id + _STREAM_SALT)
    return _mix64(a ^ b)


@dataclass
class RngStream:
    """Counter-based uniform/normal source keyed by (master_seed, stream_id).

    The i-th output of a stream is ``mix64(key + (i+1)*GOLDEN)`` where the key
    is a hash of (master_seed, stream_id); draws therefore depend only on the
    key and the counter, never on execution order elsewhere.  Streams with
    equal keys replay identical sequences, and distinct stream ids under one
    master seed are statistically independent.
    """

    master_seed: int
    stream_id: int = 0
    counter: int = 0
    _key: int = field(init=False, repr=False)

    def __post_init__(self):
        if not (0 <= self.master_seed <= _MASK64 and 0 <= self.stream_id <= _MASK64):
            raise ValueError("master_seed and stream_id must be unsigned 64-bit integers")
        self._key = _stream_key(self.master_seed, self.stream_id)

    def uniforms(self, k: int) -> np.ndarray:
        """Next ``k`` uniforms, strictly inside (0, 1)."""
        idx = np.arange(self.counter + 1, self.counter + k + 1, dtype=np.uint64)
        words = _mix64_array(np.uint64(self._key) + idx * _U64_GOLDEN)
        self.counter += k
        return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53

    def uniform(self) -> float:
        self.counter += 1
        w = _mix64((self._key + self.counter * _GOLDEN) & _MASK64)
        return ((w >> 11) + 0.5) * _INV_2_53

    def normals(self, k: int) -> np.ndarray:
        """Next ``k`` standard normals (inverse-CDF transform of uniforms)."""
        return normal_quantile(self.uniforms(k))

    def normal(self) -> float:
        return float(normal_quantile(self.uniform()))


def draw_uniform(rng: RngStream) -> float:
    """One uniform draw in the open interval (0, 1)."""
    return rng.uniform()


def draw_std_normal(rng: RngStream) -> float:
    """One standard-normal draw, a deterministic transform of one uniform."""
    return rng.normal()


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

# Lanczos coefficients, g = 7, n = 9 (Godfrey's published set).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_LN_SQRT_2PI = 0.9189385332046727417803297364  # ln sqrt(2*pi)
_LN_PI = 1.1447298858494001741434273513


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0 (Lanczos approximation)."""
    x = float(x)
    if not np.isfinite(x) or x <= 0.0:
        raise ValueError(f"ln_gamma requires finite x > 0, got {x}")
    if x < 0.5:
        # Reflection keeps the series argument >= 0.5.
        return _LN_PI - np.log(np.sin(np.pi * x)) - ln_gamma(1.0 - x)
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _LN_SQRT_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def chi2_quantile_2dof(p: float) -> float:
    """Quantile of the chi-squared distribution with 2 degrees of freedom.

    With 2 dof the CDF is 1 - exp(-q/2), so the quantile is exactly
    -2*ln(1-p).
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise ValueError(f"probability must lie strictly in (0, 1), got {p}")
    return -2.0 * np.log1p(-p)


# AS 241 (Wichura): rational approximations for the standard normal quantile.
_PPND_A = (
    3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
    1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
    3.3430575583588128105e4, 2.5090809287301226727e3,
)
_PPND_B = (
    1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
    5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
    2.8729085735721942674e4, 5.2264952788528545610e3,
)
_PPND_C = (
    1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
    3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4,
)
_PPND_D = (
    1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9,
)
_PPND_E = (
    6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7,
)
_PPND_F = (
    1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15,
)


def _poly(coef, r):
    acc = coef[-1]
    for c in coef[-2::-1]:
        acc = acc * r + c
    return acc


def normal_quantile(p):
    """Standard normal quantile (inverse CDF) for p in (0, 1).

    Wichura's AS 241 rational approximation; relative error below 1e-15,
    comfortably inside the 1e-9 needed for interval construction.  Accepts
    scalars or arrays.
    """
    p = np.asarray(p, dtype=np.float64)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("normal_quantile requires 0 < p < 1")
    q = p - 0.5
    out = np.empty_like(q)

    central = np.abs(q) <= 0.425
    if np.any(central):
        r = 0.180625 - q[central] * q[central]
        out[central] = q[central] * _poly(_PPND_A, r) / _poly(_PPND_B, r)

    tails = ~central
    if np.any(tails):
        pt = np.where(q[tails] < 0.0, p[tails], 1.0 - p[tails])
        r = np.sqrt(-np.log(pt))
        near = r <= 5.0
        val = np.empty_like(r)
        val[near] = _poly(_PPND_C, r[near] - 1.6) / _poly(_PPND_D, r[near] - 1.6)
        val[~near] = _poly(_PPND_E, r[~near] - 5.0) / _poly(_PPND_F, r[~near] - 5.0)
        out[tails] = np.where(q[tails] < 0.0, -val, val)

    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Root finding and finite differences
# ---------------------------------------------------------------------------

def bisect_root(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Bisection root of a sign-changing function on [lo, hi].

    Runs until the bracket width drops below ``tol`` and returns the midpoint.
    Deterministic; raises :class:`BracketError` when f(lo) and f(hi) share a
    sign.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # bracket is at float resolution
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _default_steps(theta, scale):
    return tuple(max(scale, scale * abs(t)) for t in theta)


def finite_diff_gradient(f, theta, h=None):
    """Central-difference gradient of f: R^2 -> R at theta, O(h^2) accurate."""
    t1, t2 = float(theta[0]), float(theta[1])
    h1, h2 = _default_steps((t1, t2), 1e-6) if h is None else (float(h[0]), float(h[1]))
    vals = (
        f((t1 + h1, t2)), f((t1 - h1, t2)),
        f((t1, t2 + h2)), f((t1, t2 - h2)),
    )
    if not all(np.isfinite(v) for v in vals):
        raise ValueError("function not finite at a gradient stencil point")
    return (vals[0] - vals[1]) / (2.0 * h1), (vals[2] - vals[3]) / (2.0 * h2)


def finite_diff_hessian(f, theta, h=None) -> "SymMatrix2":
    """Symmetric central-difference Hessian of f: R^2 -> R at theta.

    The cross term is averaged over the two stencil orientations, so the
    result is symmetric by construction.  Steps default to 1e-4*max(1,|theta|)
    per coordinate: second differences need a larger step than gradients to
    keep cancellation error below truncation error.
    """
    t1, t2 = float(theta[0]), float(theta[1])
    h1, h2 = _default_steps((t1, t2), 1e-4) if h is None else (float(h[0]), float(h[1]))
    f0 = f((t1, t2))
    fpp = f((t1 + h1, t2 + h2))
    fpm = f((t1 + h1, t2 - h2))
    fmp = f((t1 - h1, t2 + h2))
    fmm = f((t1 - h1, t2 - h2))
    fp0 = f((t1 + h1, t2))
    fm0 = f((t1 - h1, t2))
    f0p = f((t1, t2 + h2))
    f0m = f((t1, t2 - h2))
    vals = (f0, fpp, fpm, fmp, fmm, fp0, fm0, f0p, f0m)
    if not all(np.isfinite(v) for v in vals):
        raise ValueError("function not finite at a Hessian stencil point")
    d11 = (fp0 - 2.0 * f0 + fm0) / (h1 * h1)
    d22 = (f0p - 2.0 * f0 + f0m) / (h2 * h2)
    d12 = (fpp - fpm - fmp + fmm) / (4.0 * h1 * h2)
    return SymMatrix2(d11, d12, d22)


# ---------------------------------------------------------------------------
# Moments and 2x2 symmetric matrices
# ---------------------------------------------------------------------------

def sample_moments(values, upto: int = 4):
    """Mean, unbiased variance, and standardized skewness/kurtosis.

    Variance uses the n-1 denominator; skewness and kurtosis are the third
    and fourth central moments standardized by the population variance
    (kurtosis is plain, not excess).  ``upto`` limits how many moments are
    computed: 2 returns (mean, variance), 4 the full tuple.
    """
    x = np.asarray(values, dtype=np.float64)
    if upto not in (1, 2, 3, 4):
        raise ValueError("upto must be between 1 and 4")
    if x.ndim != 1 or x.size < upto:
        raise ValueError(f"need at least {upto} observations, got {x.size}")
    mean = float(np.mean(x))
    if upto == 1:
        return (mean,)
    d = x - mean
    var = float(np.sum(d * d) / (x.size - 1))
    if upto == 2:
        return mean, var
    m2 = float(np.mean(d * d))
    if m2 == 0.0:
        raise ValueError("zero variance: skewness and kurtosis are undefined")
    skew = float(np.mean(d**3)) / m2**1.5
    if upto == 3:
        return mean, var, skew
    kurt = float(np.mean(d**4)) / (m2 * m2)
    return mean, var, skew, kurt


@dataclass(frozen=True)
class SymMatrix2:
    """Symmetric 2x2 matrix stored as its three free entries."""

    a11: float
    a12: float
    a22: float

    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a12

    @property
    def is_positive_definite(self) -> bool:
        return self.a11 > 0.0 and self.det() > 0.0

    def inverse(self) -> "SymMatrix2":
        d = self.det()
        if d == 0.0:
            raise np.linalg.LinAlgError("singular 2x2 matrix")
        return SymMatrix2(self.a22 / d, -self.a12 / d, self.a11 / d)

    def quad_form(self, d1: float, d2: float) -> float:
        """Evaluate (d1, d2) M (d1, d2)^T."""
        return self.a11 * d1 * d1 + 2.0 * self.a12 * d1 * d2 + self.a22 * d2 * d2

    def eigh(self):
        """Eigenvalues (descending) and matching unit eigenvectors as columns."""
        mid = 0.5 * (self.a11 + self.a22)
        disc = np.hypot(0.5 * (self.a11 - self.a22), self.a12)
        w = np.array([mid + disc, mid - disc])
        ang = 0.5 * np.arctan2(2.0 * self.a12, self.a11 - self.a22)
        c, s = np.cos(ang), np.sin(ang)
        vecs = np.array([[c, -s], [s, c]])
        return w, vecs

    def to_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])

    @classmethod
    def from_array(cls, m) -> "SymMatrix2":
        m = np.asarray(m, dtype=np.float64)
        return cls(float(m[0, 0]), 0.5 * float(m[0, 1] + m[1, 0]), float(m[1, 1]))
