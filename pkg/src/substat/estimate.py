"""Intensity estimators and the invariance-direction fit.

Three estimators of the first-order intensity are provided, all evaluable
anywhere in the observation window:

* ``SubstationaryIntensity``: a 1-D Gaussian smoother of the orthogonal
  coordinate v = y*cos(theta) - x*sin(theta), divided by the boundary
  correction for the window, for patterns whose distribution is invariant
  along the subspace at angle theta;
* ``KernelIntensity2D``: the plain bivariate product-Gaussian smoother
  with its boundary correction, which makes no invariance assumption;
* ``StationaryIntensity``: the constant n / area.

The direction theta is estimated by maximizing the Poisson (composite)
log-likelihood of the substationary estimator over theta: a 1-degree
coarse grid over [-90, 90) degrees followed by golden-section refinement.
Bandwidths are selected by a leave-one-out cross-validated version of the
same likelihood; the plug-in likelihood itself keeps every point (leaving
the point in is what the profile fit uses, while cross validation removes
it to avoid the degenerate h -> 0 optimum).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import (
    PointPattern,
    Subspace,
    Window,
    chord_measure,
    project_xy,
    v_range,
)
from .kernels import (
    correction_2d,
    correction_substat_closed,
    kernel_1d,
    normal_cdf,
    validate_bandwidth,
)

__all__ = [
    "SubstationaryIntensity",
    "KernelIntensity2D",
    "StationaryIntensity",
    "FitResult",
    "BandwidthSelectionError",
    "intensity_substat",
    "intensity_2d",
    "intensity_stationary",
    "loglik",
    "fit_theta",
    "bandwidth_cv_scores",
    "select_bandwidth",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_DOMAIN_TOL = 1e-9
_CHUNK_ELEMENTS = 4_000_000

SUBSTAT_INTEGRAL_CELLS = 400
GRID2D_INTEGRAL_CELLS = 200


class BandwidthSelectionError(RuntimeError):
    """Raised when no bandwidth candidate yields a finite criterion."""


def _as_subspace(theta) -> Subspace:
    if isinstance(theta, Subspace):
        return theta
    return Subspace(float(theta))


def _gaussian_sums_1d(data: np.ndarray, targets: np.ndarray, h: float) -> np.ndarray:
    """sum_j phi((data_j - t) / h) / h for each target t.

    Summation always runs over ``data`` in its stored (canonical) order,
    chunked over targets to bound memory.
    """
    if data.size == 0:
        return np.zeros(targets.shape, dtype=float)
    out = np.empty(targets.shape, dtype=float)
    step = max(1, _CHUNK_ELEMENTS // data.size)
    for i in range(0, targets.size, step):
        d = (data[None, :] - targets[i : i + step, None]) / h
        np.multiply(d, d, out=d)
        d *= -0.5
        with np.errstate(under="ignore"):
            np.exp(d, out=d)
        out[i : i + step] = d.sum(axis=1)
    return out / (h * _SQRT_2PI)


def _gaussian_sums_2d(
    xd: np.ndarray, yd: np.ndarray, xt: np.ndarray, yt: np.ndarray, h: float
) -> np.ndarray:
    """sum_j phi((xd_j - x)/h) phi((yd_j - y)/h) / h^2 at each target."""
    if xd.size == 0:
        return np.zeros(xt.shape, dtype=float)
    out = np.empty(xt.shape, dtype=float)
    step = max(1, _CHUNK_ELEMENTS // xd.size)
    for i in range(0, xt.size, step):
        dx = (xd[None, :] - xt[i : i + step, None]) / h
        dy = (yd[None, :] - yt[i : i + step, None]) / h
        np.multiply(dx, dx, out=dx)
        np.multiply(dy, dy, out=dy)
        dx += dy
        dx *= -0.5
        with np.errstate(under="ignore"):
            np.exp(dx, out=dx)
        out[i : i + step] = dx.sum(axis=1)
    return out / (h * h * 2.0 * math.pi)


class SubstationaryIntensity:
    """Boundary-corrected 1-D kernel intensity on the orthogonal coordinate.

    The estimate at offset v is the kernel sum of the projected data
    divided by the retained kernel mass of the window, so it depends on
    the points only through their v-projections and is exactly invariant
    under shifts of the data along the subspace.
    """

    kind = "substationary"

    def __init__(self, pattern: PointPattern, theta, h: float):
        self.pattern = pattern
        self.theta = _as_subspace(theta)
        self.h = validate_bandwidth(h)
        _, v = project_xy(self.theta, pattern.x, pattern.y)
        # canonical (sorted) order makes every output independent of the
        # order the points were supplied in
        self._v_data = np.sort(np.atleast_1d(v))
        self._v_lo, self._v_hi = v_range(self.theta, pattern.window)

    @property
    def window(self) -> Window:
        return self.pattern.window

    def evaluate(self, v):
        """Intensity at orthogonal offset(s) v inside the projection range."""
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        if np.any(v_arr < self._v_lo - _DOMAIN_TOL) or np.any(v_arr > self._v_hi + _DOMAIN_TOL):
            raise ValueError(
                f"offset outside the projection range [{self._v_lo:.6g}, {self._v_hi:.6g}]"
            )
        sums = _gaussian_sums_1d(self._v_data, v_arr, self.h)
        corr = correction_substat_closed(self.theta, self.window, self.h, v_arr)
        out = sums / corr
        if np.isscalar(v) or np.ndim(v) == 0:
            return float(out[0])
        return out

    __call__ = evaluate

    def at_points(self, x, y):
        _, v = project_xy(self.theta, x, y)
        return self.evaluate(v)

    def integral(self, cells: int = SUBSTAT_INTEGRAL_CELLS) -> float:
        """Integral of the estimate over the window, by midpoint rule.

        Reduces to a 1-D integral of intensity times chord length.
        """
        mids, dv = _midpoints(self._v_lo, self._v_hi, cells)
        lam = self.evaluate(mids)
        chords = chord_measure(self.theta, self.window, mids)
        return float(np.sum(lam * chords) * dv)


class KernelIntensity2D:
    """Boundary-corrected bivariate product-Gaussian intensity estimate."""

    kind = "kernel2d"

    def __init__(self, pattern: PointPattern, h: float):
        self.pattern = pattern
        self.h = validate_bandwidth(h)
        order = np.lexsort((pattern.y, pattern.x))
        self._x_data = pattern.x[order]
        self._y_data = pattern.y[order]

    @property
    def window(self) -> Window:
        return self.pattern.window

    def evaluate(self, x, y):
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        if x_arr.shape != y_arr.shape:
            raise ValueError("x and y must have the same shape")
        if not np.all(self.window.contains(x_arr, y_arr, tol=_DOMAIN_TOL)):
            raise ValueError("evaluation location outside the observation window")
        sums = _gaussian_sums_2d(self._x_data, self._y_data, x_arr, y_arr, self.h)
        corr = correction_2d(self.window, self.h, x_arr, y_arr)
        out = sums / corr
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out[0])
        return out

    __call__ = evaluate
    at_points = evaluate

    def grid_values(self, x_mids: np.ndarray, y_mids: np.ndarray) -> np.ndarray:
        """Estimate on a tensor grid, exploiting the product kernel.

        Returns an array of shape (len(x_mids), len(y_mids)).  The kernel
        sum over the data factorizes into a matrix product, which is far
        cheaper than evaluating every grid node separately.
        """
        if self._x_data.size == 0:
            sums = np.zeros((x_mids.size, y_mids.size))
        else:
            with np.errstate(under="ignore"):
                ax = np.exp(-0.5 * ((self._x_data[:, None] - x_mids[None, :]) / self.h) ** 2)
                ay = np.exp(-0.5 * ((self._y_data[:, None] - y_mids[None, :]) / self.h) ** 2)
            sums = (ax.T @ ay) / (self.h * self.h * 2.0 * math.pi)
        # the correction factorizes over the axes just like the kernel
        fx = normal_cdf((self.window.z - x_mids) / self.h) - normal_cdf(-x_mids / self.h)
        fy = normal_cdf((self.window.omega - y_mids) / self.h) - normal_cdf(-y_mids / self.h)
        return sums / (fx[:, None] * fy[None, :])

    def integral(self, cells: int = GRID2D_INTEGRAL_CELLS) -> float:
        x_mids, dx = _midpoints(0.0, self.window.z, cells)
        y_mids, dy = _midpoints(0.0, self.window.omega, cells)
        return float(np.sum(self.grid_values(x_mids, y_mids)) * dx * dy)


class StationaryIntensity:
    """Constant intensity estimate n / area for stationary patterns."""

    kind = "stationary"

    def __init__(self, pattern: PointPattern):
        self.pattern = pattern
        self.value = pattern.n / pattern.window.area

    @property
    def window(self) -> Window:
        return self.pattern.window

    def evaluate(self, x, y):
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        if not np.all(self.window.contains(x_arr, y_arr, tol=_DOMAIN_TOL)):
            raise ValueError("evaluation location outside the observation window")
        out = np.full(x_arr.shape, self.value)
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(self.value)
        return out

    __call__ = evaluate
    at_points = evaluate

    def integral(self, cells: int | None = None) -> float:
        # constant integrand: the midpoint rule is exact, so integrate directly
        return self.value * self.window.area


def _midpoints(lo: float, hi: float, cells: int) -> tuple[np.ndarray, float]:
    if cells < 1:
        raise ValueError("cells must be >= 1")
    delta = (hi - lo) / cells
    mids = lo + (np.arange(cells) + 0.5) * delta
    return mids, delta


def intensity_substat(pattern: PointPattern, theta, h: float, v):
    """Substationary intensity estimate at offset(s) v."""
    return SubstationaryIntensity(pattern, theta, h).evaluate(v)


def intensity_2d(pattern: PointPattern, h: float, x, y=None):
    """Bivariate kernel intensity estimate at a location or arrays of them."""
    if y is None:
        x, y = x  # a Point or (x, y) pair
    return KernelIntensity2D(pattern, h).evaluate(x, y)


def intensity_stationary(pattern: PointPattern) -> float:
    """Constant intensity estimate n / area."""
    return StationaryIntensity(pattern).value


def loglik(pattern: PointPattern, estimator) -> float:
    """Poisson (composite) log-likelihood of the pattern under an estimate.

    sum_i log(lambda_hat(s_i)) minus the integral of lambda_hat over the
    window.  If the estimate vanishes at any data point the result is
    -inf and a warning is issued.
    """
    if pattern.n:
        lam = np.atleast_1d(estimator.at_points(pattern.x, pattern.y))
        if np.any(lam <= 0.0):
            warnings.warn(
                "intensity estimate is zero at a data point; log-likelihood is -inf",
                RuntimeWarning,
                stacklevel=2,
            )
            return float("-inf")
        point_term = float(np.sum(np.sort(np.log(lam))))
    else:
        point_term = 0.0
    return point_term - estimator.integral()


@dataclass(frozen=True)
class FitResult:
    """Outcome of the invariance-direction fit.

    trace holds the (theta, log-likelihood) pairs of the coarse grid;
    the refined maximizer never scores below any of them.
    """

    theta_hat: Subspace
    h: float
    loglik: float
    trace: tuple[tuple[float, float], ...]
    degenerate: bool = False


def _profile_loglik(pattern: PointPattern, theta: float, h: float, cells: int) -> float:
    est = SubstationaryIntensity(pattern, Subspace(theta), h)
    lam = est.at_points(pattern.x, pattern.y)
    point_term = float(np.sum(np.sort(np.log(lam))))
    return point_term - est.integral(cells)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def _golden_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Golden-section maximizer; returns the best probed (x, f(x))."""
    span = hi - lo
    best_x, best_f = 0.5 * (lo + hi), -math.inf
    if span <= tol:
        return best_x, f(best_x)
    n_iter = int(math.ceil(math.log(tol / span) / math.log(_INV_PHI)))
    c = lo + _INV_PHI_SQ * span
    d = lo + _INV_PHI * span
    fc, fd = f(c), f(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx > best_f:
            best_x, best_f = x, fx
    for _ in range(max(0, n_iter - 1)):
        if fc > fd:
            hi, d, fd = d, c, fc
            span *= _INV_PHI
            c = lo + _INV_PHI_SQ * span
            fc = f(c)
            if fc > best_f:
                best_x, best_f = c, fc
        else:
            lo, c, fc = c, d, fd
            span *= _INV_PHI
            d = lo + _INV_PHI * span
            fd = f(d)
            if fd > best_f:
                best_x, best_f = d, fd
    return best_x, best_f


def fit_theta(
    pattern: PointPattern,
    h: float,
    *,
    grid_step_deg: float = 1.0,
    tol: float = 1e-4,
    integral_cells: int = SUBSTAT_INTEGRAL_CELLS,
    search_halfwidth_deg: float | None = None,
    threads: int = 1,
) -> FitResult:
    """Estimate the invariance direction by profile composite likelihood.

    Evaluates the profile log-likelihood on a coarse angular grid over
    [-90, 90] degrees (the endpoints name the same subspace), then
    refines the bracketing interval by golden-section search to ``tol``
    radians.  The bandwidth is held fixed throughout.

    ``search_halfwidth_deg`` confines the search to that many degrees on
    either side of the horizontal axis.  In windows that carry little
    directional information the unrestricted profile is dominated by
    smoothing noise and the argmax wanders far from any true direction;
    replication studies that score the fitted angle against a reference
    axis bound the search instead of letting it roam (see the experiment
    harness, which fixes its own half-width as part of the protocol).

    A spread of less than 1e-9 across the grid is flagged as a degenerate
    fit.  Ties prefer the smallest angle.  Requires at least two points.
    """
    if pattern.n < 2:
        raise ValueError("subspace fitting requires at least two points")
    h = validate_bandwidth(h)
    if search_halfwidth_deg is None:
        halfwidth = 90.0
    else:
        halfwidth = float(search_halfwidth_deg)
        if not 0.0 < halfwidth <= 90.0:
            raise ValueError("search_halfwidth_deg must be in (0, 90]")
    n_grid = max(3, int(round(2.0 * halfwidth / grid_step_deg)) + 1)
    thetas = np.radians(np.linspace(-halfwidth, halfwidth, n_grid))

    def profile(theta: float) -> float:
        return _profile_loglik(pattern, theta, h, integral_cells)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(profile, thetas))
    else:
        values = [profile(t) for t in thetas]
    values = np.asarray(values)
    trace = tuple(zip((float(t) for t in thetas), (float(g) for g in values)))

    degenerate = bool(values.max() - values.min() < 1e-9)
    if degenerate:
        warnings.warn(
            "profile log-likelihood is flat across directions; "
            "the fitted angle is not informative",
            RuntimeWarning,
            stacklevel=2,
        )

    best_idx = int(np.argmax(values))  # first occurrence: smallest angle wins ties
    best_theta = float(thetas[best_idx])
    best_value = float(values[best_idx])

    # bracket one grid step on each side; on the unrestricted search the
    # bracket may cross +-90 degrees, where the Subspace normalization
    # wraps the angle and keeps the profile continuous
    step = math.radians(grid_step_deg)
    lo, hi = best_theta - step, best_theta + step
    if search_halfwidth_deg is not None:
        bound = math.radians(halfwidth)
        lo, hi = max(lo, -bound), min(hi, bound)
    refined_theta, refined_value = _golden_max(profile, lo, hi, tol)
    if refined_value > best_value:
        best_theta, best_value = refined_theta, refined_value

    return FitResult(
        theta_hat=Subspace(best_theta),
        h=h,
        loglik=best_value,
        trace=trace,
        degenerate=degenerate,
    )


def bandwidth_cv_scores(
    pattern: PointPattern,
    theta,
    candidates,
    *,
    integral_cells: int = SUBSTAT_INTEGRAL_CELLS,
) -> list[tuple[float, float]]:
    """Leave-one-out likelihood score for each candidate bandwidth.

    The point term drops each point from its own estimate; the integral
    term keeps all points.  Candidates whose leave-one-out estimate
    vanishes at some point score -inf.
    """
    candidates = [validate_bandwidth(h) for h in candidates]
    if not candidates:
        raise ValueError("no bandwidth candidates supplied")
    subspace = _as_subspace(theta)
    _, v = project_xy(subspace, pattern.x, pattern.y)
    v_data = np.sort(np.atleast_1d(v))
    lo, hi = v_range(subspace, pattern.window)
    scores: list[tuple[float, float]] = []
    for h in candidates:
        sums = _gaussian_sums_1d(v_data, v_data, h)
        loo = sums - kernel_1d(h, 0.0)
        corr = correction_substat_closed(subspace, pattern.window, h, v_data)
        lam_loo = loo / corr
        if pattern.n < 2 or np.any(lam_loo <= 0.0):
            scores.append((h, float("-inf")))
            continue
        mids, dv = _midpoints(lo, hi, integral_cells)
        lam_grid = _gaussian_sums_1d(v_data, mids, h) / correction_substat_closed(
            subspace, pattern.window, h, mids
        )
        integral = float(np.sum(lam_grid * chord_measure(subspace, pattern.window, mids)) * dv)
        scores.append((h, float(np.sum(np.sort(np.log(lam_loo)))) - integral))
    return scores


def select_bandwidth(pattern: PointPattern, theta, candidates) -> float:
    """Pick the candidate maximizing the leave-one-out likelihood score.

    Ties break to the smaller bandwidth.  Raises BandwidthSelectionError
    if every candidate is degenerate.
    """
    scores = bandwidth_cv_scores(pattern, theta, candidates)
    scores.sort(key=lambda hs: hs[0])
    best_h, best_score = None, -math.inf
    for h, score in scores:
        if math.isfinite(score) and score > best_score:
            best_h, best_score = h, score
    if best_h is None:
        raise BandwidthSelectionError(
            "every bandwidth candidate produced a degenerate leave-one-out score"
        )
    return best_h
