"""Maximum-likelihood fitting of the truncated log-logistic.

The fit first evaluates the interior-maximum criterion on truncation-
normalized data (``beta0 > beta_c``).  When it holds, the log-likelihood is
maximized over (ln alpha, ln beta) by multi-start Nelder-Mead simplex descent
followed by a Newton polish driven by the analytic score; when it fails, the
likelihood supremum sits on the boundary where the model degenerates to a
Pareto density with exponent ``beta0`` and the scale is no longer identified.

Uncertainty comes from the observed information (negative Hessian of the
log-likelihood at the estimate): Wald intervals per parameter and joint
confidence ellipses at the chi-squared(2 dof) threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .distribution import (
    DegenerateSampleError,
    ExistenceStats,
    LTLLParams,
    Sample,
    existence_stats,
    log_likelihood,
    score_gradient,
)
from .numerics import SymMatrix2, chi2_quantile_2dof, finite_diff_hessian, normal_quantile

__all__ = [
    "BoundaryFitError",
    "EllipsePoints",
    "MleFit",
    "confidence_ellipse",
    "fit_mle",
    "observed_information",
    "wald_intervals",
]

# Stationarity target: interior fits must satisfy ||score|| < SCORE_TOL*(1+|ll|).
SCORE_TOL = 1e-5
_POLISH_TARGET = 1e-8


class BoundaryFitError(RuntimeError):
    """Raised when an operation needs an interior fit but got a boundary one."""


@dataclass(frozen=True)
class MleFit:
    """Result of a maximum-likelihood fit, in the data's original units.

    ``boundary`` marks the Pareto degeneration (``beta0 <= beta_c``): then
    ``beta`` is the boundary exponent beta0, ``alpha`` is None (the scale is
    not identified in the limit), and no information matrix or intervals are
    available.
    """

    alpha: float | None
    beta: float
    x_l: float
    n: int
    boundary: bool
    loglik: float
    info: SymMatrix2 | None
    ci_alpha: tuple[float, float] | None
    ci_beta: tuple[float, float] | None
    converged: bool
    iterations: int
    score_norm: float
    stats: ExistenceStats | None

    @property
    def params(self) -> LTLLParams:
        if self.boundary:
            raise BoundaryFitError("boundary (Pareto) fit has no scale parameter")
        return LTLLParams(self.alpha, self.beta, self.x_l)


@dataclass(frozen=True)
class EllipsePoints:
    """Closed level-set curve of a quadratic form around a center point.

    Points are ordered by angle at equal angular spacing; consumers close the
    curve by joining the last point back to the first.  Every point satisfies
    (theta - center)^T matrix (theta - center) = threshold.
    """

    center: tuple[float, float]
    points: np.ndarray
    level: float
    matrix: SymMatrix2
    threshold: float

    @property
    def area(self) -> float:
        """Exact area enclosed by the ellipse."""
        return np.pi * self.threshold / np.sqrt(self.matrix.det())

    def polygon_area(self) -> float:
        """Shoelace area of the emitted polygon (approaches ``area``)."""
        x, y = self.points[:, 0], self.points[:, 1]
        return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

def _loglik_working(s: Sample):
    """Objective in z = (ln alpha, ln beta) on working-scale data."""

    def nll(z):
        return -log_likelihood(s, float(np.exp(z[0])), float(np.exp(z[1])))

    return nll


def _score_z(s: Sample, z):
    """Gradient of the log-likelihood in (ln alpha, ln beta) coordinates."""
    a, b = float(np.exp(z[0])), float(np.exp(z[1]))
    da, db = score_gradient(s, a, b)
    return np.array([a * da, b * db])


def _newton_polish(s: Sample, z, max_iter: int = 30):
    """Newton steps on the analytic score, with halving safeguards."""
    z = np.asarray(z, dtype=np.float64)
    ll = log_likelihood(s, float(np.exp(z[0])), float(np.exp(z[1])))
    used = 0
    h = 1e-5
    for _ in range(max_iter):
        g = _score_z(s, z)
        if np.linalg.norm(g) <= _POLISH_TARGET * (1.0 + abs(ll)):
            break
        # Hessian in z from central differences of the analytic score.
        gpa = _score_z(s, (z[0] + h, z[1]))
        gma = _score_z(s, (z[0] - h, z[1]))
        gpb = _score_z(s, (z[0], z[1] + h))
        gmb = _score_z(s, (z[0], z[1] - h))
        hess = np.column_stack([(gpa - gma) / (2 * h), (gpb - gmb) / (2 * h)])
        hess = 0.5 * (hess + hess.T)
        try:
            step = np.linalg.solve(hess, -g)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        improved = False
        for _ in range(8):
            z_new = z + step
            ll_new = log_likelihood(s, float(np.exp(z_new[0])), float(np.exp(z_new[1])))
            if ll_new >= ll - 1e-12:
                g_new = _score_z(s, z_new)
                if ll_new > ll or np.linalg.norm(g_new) < np.linalg.norm(g):
                    z, ll = z_new, ll_new
                    improved = True
                    break
            step *= 0.5
        used += 1
        if not improved:
            break
    return z, ll, used


def _start_points(w: Sample, stats: ExistenceStats | None):
    """Initial (ln alpha, ln beta) guesses on the working scale."""
    lmed = float(np.log(np.median(w.values)))
    lgeo = float(np.mean(w.log_values))
    if stats is not None:
        b0, bc = stats.beta0, stats.beta_c
        return [
            (lmed, np.log(b0)),
            (lgeo, np.log(1.5 * b0)),
            (lmed, np.log(1.2 * bc)),
        ]
    # Untruncated: shape guess from the interquartile ratio (q75/q25 = 9^(1/beta)).
    q25, q75 = np.quantile(w.values, [0.25, 0.75])
    b_iqr = np.log(9.0) / np.log(q75 / q25) if q75 > q25 else 1.0
    return [
        (lmed, np.log(b_iqr)),
        (lgeo, np.log(1.5 * b_iqr)),
        (lmed, np.log(0.75 * b_iqr)),
    ]


def fit_mle(s: Sample) -> MleFit:
    """Maximum-likelihood estimate of (alpha, beta) for a truncated sample.

    Fitting runs on data normalized by the truncation point (or by the
    sample median when x_l = 0, where the existence gate does not apply) and
    results are mapped back to original units.  Boundary samples return a
    flagged Pareto fit instead of raising.
    """
    if s.n_distinct < 2:
        raise DegenerateSampleError("need at least two distinct values to fit")

    if s.x_l > 0.0:
        scale = s.x_l
        w = s.normalized()
        stats = existence_stats(s)
        if not stats.interior:
            beta0 = stats.beta0
            # Pareto limit on x > x_l: density beta/x_l * (x/x_l)^-(beta+1).
            loglik = s.n * np.log(beta0) - s.n * np.log(s.x_l) - (beta0 + 1.0) * stats.s
            return MleFit(
                alpha=None, beta=beta0, x_l=s.x_l, n=s.n, boundary=True,
                loglik=float(loglik), info=None, ci_alpha=None, ci_beta=None,
                converged=True, iterations=0, score_norm=np.nan, stats=stats,
            )
    else:
        scale = float(np.median(s.values))
        w = Sample(s.values / scale, 0.0)
        stats = None

    nll = _loglik_working(w)
    best_z, best_ll, total_iter = None, -np.inf, 0
    for z0 in _start_points(w, stats):
        res = minimize(
            nll, np.asarray(z0), method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 2000, "maxfev": 4000},
        )
        total_iter += res.nit
        z, ll, polish_iter = _newton_polish(w, res.x)
        total_iter += polish_iter
        if ll > best_ll:
            best_z, best_ll = z, ll

    alpha = float(np.exp(best_z[0])) * scale
    beta = float(np.exp(best_z[1]))
    loglik = best_ll - s.n * np.log(scale)
    g = score_gradient(s, alpha, beta)
    score_norm = float(np.hypot(*g))
    converged = score_norm < SCORE_TOL * (1.0 + abs(loglik))

    info = observed_information(s, (alpha, beta))
    ci_alpha = ci_beta = None
    if info.is_positive_definite:
        fit_tmp = MleFit(alpha, beta, s.x_l, s.n, False, loglik, info,
                         None, None, converged, total_iter, score_norm, stats)
        ci_alpha, ci_beta = wald_intervals(fit_tmp, 0.05)

    return MleFit(
        alpha=alpha, beta=beta, x_l=s.x_l, n=s.n, boundary=False,
        loglik=loglik, info=info, ci_alpha=ci_alpha, ci_beta=ci_beta,
        converged=converged, iterations=total_iter, score_norm=score_norm,
        stats=stats,
    )


# ---------------------------------------------------------------------------
# Uncertainty
# ---------------------------------------------------------------------------

def observed_information(s: Sample, theta) -> SymMatrix2:
    """Observed information: negative Hessian of the log-likelihood at theta.

    Computed by symmetric finite differences of function values only, so it
    stays an independent check on anything derived from the analytic score.
    Positive definiteness is the caller's concern: an indefinite result flags
    a near-boundary or misconverged estimate.
    """
    alpha, beta = float(theta[0]), float(theta[1])

    def nll(th):
        a, b = th
        if a <= 0.0 or b <= 0.0:
            return np.inf
        return -log_likelihood(s, a, b)

    return finite_diff_hessian(nll, (alpha, beta))


def wald_intervals(fit: MleFit, gamma: float = 0.05):
    """Wald confidence intervals at level 1-gamma, clipped at zero.

    theta_i +/- z_(1-gamma/2) * sqrt((J^-1)_ii) with J the observed
    information of the full-sample log-likelihood.
    """
    if fit.boundary:
        raise BoundaryFitError("Wald intervals are unavailable for a boundary (Pareto) fit")
    if fit.info is None or not fit.info.is_positive_definite:
        raise ValueError("observed information is not positive-definite")
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    z = float(normal_quantile(1.0 - gamma / 2.0))
    inv = fit.info.inverse()
    se_a, se_b = math.sqrt(inv.a11), math.sqrt(inv.a22)
    ci_alpha = (max(0.0, fit.alpha - z * se_a), fit.alpha + z * se_a)
    ci_beta = (max(0.0, fit.beta - z * se_b), fit.beta + z * se_b)
    return ci_alpha, ci_beta


def _trace_ellipse(center, matrix: SymMatrix2, threshold: float, n_points: int,
                   level: float) -> EllipsePoints:
    if n_points < 3:
        raise ValueError("need at least 3 points to trace an ellipse")
    w, vecs = matrix.eigh()
    if w[1] <= 0.0:
        raise ValueError("quadratic form matrix is not positive-definite")
    radii = np.sqrt(threshold / w)
    phi = 2.0 * np.pi * np.arange(n_points) / n_points
    circ = np.stack([radii[0] * np.cos(phi), radii[1] * np.sin(phi)])
    pts = (vecs @ circ).T + np.asarray(center)
    return EllipsePoints(center=(float(center[0]), float(center[1])),
                         points=pts, level=level, matrix=matrix, threshold=threshold)


def confidence_ellipse(fit: MleFit, gamma: float = 0.05, n_points: int = 256) -> EllipsePoints:
    """Joint Wald confidence ellipse at level 1-gamma.

    The level set (theta - theta_hat)^T J (theta - theta_hat) = q, with J the
    full-sample observed information and q the chi-squared(2 dof) quantile at
    1-gamma, traced through the eigendecomposition of J.  With n_points = 4
    the trace degenerates to the four extreme points on the principal axes.
    """
    if fit.boundary:
        raise BoundaryFitError("confidence ellipse is unavailable for a boundary (Pareto) fit")
    if fit.info is None or not fit.info.is_positive_definite:
        raise ValueError("observed information is not positive-definite")
    threshold = chi2_quantile_2dof(1.0 - gamma)
    return _trace_ellipse((fit.alpha, fit.beta), fit.info, threshold, n_points, 1.0 - gamma)
