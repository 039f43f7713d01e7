"""Gaussian kernels and boundary corrections for the rectangular window.

A kernel intensity estimate divides each kernel sum by the mass the kernel
retains inside the window, so that locations near the boundary are not
deflated.  Two forms of that correction are provided for the 1-D
(orthogonal-coordinate) smoother:

* a closed form, assembled from the trapezoidal chord profile of the
  window, covering every subspace angle including the axis-aligned ones;
* an adaptive quadrature of the same integral, used as the reference
  oracle for the closed form.

Only the Gaussian kernel ships (``KERNELS``); the normal CDF is evaluated
through the complementary error function so deep tails underflow to zero
instead of losing precision to cancellation.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from .geometry import Subspace, Window, chord_measure, chord_segments, v_range

__all__ = [
    "KERNELS",
    "QuadratureError",
    "normal_pdf",
    "normal_cdf",
    "kernel_1d",
    "correction_substat_closed",
    "correction_substat_quadrature",
    "correction_2d",
    "validate_bandwidth",
]

KERNELS = ("gaussian",)

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_2 = math.sqrt(2.0)


class QuadratureError(RuntimeError):
    """Raised when the quadrature oracle cannot reach its tolerance."""


def validate_bandwidth(h: float) -> float:
    h = float(h)
    if not (h > 0.0 and math.isfinite(h)):
        raise ValueError(f"bandwidth must be a positive finite number, got {h}")
    return h


def normal_pdf(t):
    """Standard normal density, vectorized; deep tails underflow to 0."""
    t = np.asarray(t, dtype=float)
    with np.errstate(under="ignore"):
        out = np.exp(-0.5 * t * t) / _SQRT_2PI
    return out


def normal_cdf(t):
    """Standard normal CDF via erfc, accurate in both tails."""
    t = np.asarray(t, dtype=float)
    with np.errstate(under="ignore"):
        out = 0.5 * erfc(-t / _SQRT_2)
    return out


def kernel_1d(h: float, t):
    """Gaussian kernel of bandwidth h evaluated at displacement t."""
    h = validate_bandwidth(h)
    t = np.asarray(t, dtype=float)
    out = normal_pdf(t / h) / h
    if out.ndim == 0:
        return float(out)
    return out


def correction_substat_closed(subspace: Subspace, window: Window, h: float, v):
    """Kernel mass retained in the window around offset v, in closed form.

    Integrates the Gaussian kernel centered at v against the chord profile
    of the window.  Each linear piece a + b*t of the profile on [lo, hi]
    contributes

        (a + b*v) * (Phi((hi-v)/h) - Phi((lo-v)/h))
        + b*h * (phi((lo-v)/h) - phi((hi-v)/h)).

    The piecewise assembly reproduces the axis-aligned rectangle cases
    (single flat piece) and the oblique rise/plateau/fall cases alike.
    Pieces much narrower than h (steep slivers produced by angles within
    float rounding of the axis-aligned ones) are integrated by the
    midpoint rule instead; differencing Phi across such a piece would
    cancel catastrophically against the huge slope.
    """
    h = validate_bandwidth(h)
    v_arr = np.asarray(v, dtype=float)
    total = np.zeros_like(v_arr, dtype=float)
    for lo, hi, a, b in chord_segments(subspace, window):
        if hi - lo < 1e-6 * h:
            mid = 0.5 * (lo + hi)
            total = total + (hi - lo) * (a + b * mid) * normal_pdf((mid - v_arr) / h) / h
            continue
        tl = (lo - v_arr) / h
        tu = (hi - v_arr) / h
        total = total + (a + b * v_arr) * (normal_cdf(tu) - normal_cdf(tl))
        if b != 0.0:
            total = total + b * h * (normal_pdf(tl) - normal_pdf(tu))
    if total.ndim == 0:
        return float(total)
    return total


def correction_substat_quadrature(
    subspace: Subspace,
    window: Window,
    h: float,
    v: float,
    abs_tol: float = 1e-10,
) -> float:
    """Reference oracle for the 1-D boundary correction, by quadrature.

    Integrates chord(t) * K_h(t - v) adaptively over the projection range,
    seeding the subdivision with the chord knots and the kernel's center
    so narrow kernels inside wide windows are not missed.

    Raises QuadratureError if the estimated error exceeds the tolerance.
    """
    h = validate_bandwidth(h)
    v = float(v)
    lo, hi = v_range(subspace, window)

    def integrand(t):
        return chord_measure(subspace, window, t) * kernel_1d(h, t - v)

    seeds = [k[0] for k in chord_segments(subspace, window)]
    seeds += [v + k * h for k in (-8.0, -4.0, 0.0, 4.0, 8.0)]
    points = sorted({p for p in seeds if lo < p < hi})
    value, err = quad(
        integrand,
        lo,
        hi,
        points=points or None,
        limit=400,
        epsabs=1e-12,
        epsrel=1e-12,
    )
    if err > max(abs_tol, 1e-9 * abs(value)):
        raise QuadratureError(
            f"boundary-correction quadrature error {err:.3e} exceeds "
            f"tolerance (value {value:.6e})"
        )
    return value


def correction_2d(window: Window, h: float, x, y):
    """Retained mass of the product Gaussian kernel at (x, y), in (0, 1].

    The product kernel factorizes over the rectangle:
    [Phi((z-x)/h) - Phi(-x/h)] * [Phi((omega-y)/h) - Phi(-y/h)].
    """
    h = validate_bandwidth(h)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fx = normal_cdf((window.z - x) / h) - normal_cdf(-x / h)
    fy = normal_cdf((window.omega - y) / h) - normal_cdf(-y / h)
    out = fx * fy
    if out.ndim == 0:
        return float(out)
    return out
