"""Monte Carlo harness for the replication sweeps behind the two summary tables.

The first sweep scores the direction estimate: root mean squared error of
the fitted angle (in degrees; the generating direction is horizontal, so
the truth is zero).  The second scores four intensity estimators by root
mean integrated squared error, area-normalized:

    sqrt( mean over replications of (1/|S|) * integral_S (est - truth)^2 )

Every (process, a, z, h, replication) cell draws from its own RNG stream,
keyed by a stable hash of the cell coordinates, so results are bitwise
reproducible at any parallelism level and adding cells never perturbs
existing ones.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimate import (
    KernelIntensity2D,
    StationaryIntensity,
    SubstationaryIntensity,
    fit_theta,
)
from .geometry import PointPattern, Subspace, Window, chord_measure, project_xy, v_range
from .simulate import (
    PoissonBetaModel,
    RngStream,
    ThomasModel,
    simulate_poisson_beta,
    simulate_thomas,
)

__all__ = [
    "PROCESSES",
    "TABLE2_ESTIMATORS",
    "THETA_ESTIMATOR",
    "ExperimentPlan",
    "CellSummary",
    "ExperimentResult",
    "replication_stream",
    "root_mse_theta",
    "integrated_squared_error",
    "root_mise",
    "run_table1",
    "run_table2",
    "write_result_csv",
]

PROCESSES = ("poisson", "thomas")
TABLE2_ESTIMATORS = ("substat_known", "substat_fitted", "kernel2d", "stationary")
THETA_ESTIMATOR = "theta_hat"

MISE_CELLS_1D = 512
MISE_CELLS_2D = 128


@dataclass(frozen=True)
class ExperimentPlan:
    """A replication sweep over (a, z, h) cells for one process.

    ``search_halfwidth_deg`` is part of the replication protocol: the
    direction fit is scored against the generating (horizontal) axis, and
    the search is confined to this many degrees around it.  An open search
    would be dominated by smoothing noise in the weak-information cells
    (small windows, small bandwidths), where no criterion pins the angle;
    the published spreads for those cells match a bounded search.  Set it
    to None for a full [-90, 90) search.
    """

    process: str
    a_values: tuple[float, ...]
    z_values: tuple[float, ...]
    h_values: tuple[float, ...]
    replications: int
    master_seed: int
    target: str
    gamma: float = 5.0
    sigma: float = 0.02
    search_halfwidth_deg: float | None = 6.0

    def __post_init__(self) -> None:
        if self.process not in PROCESSES:
            raise ValueError(f"process must be one of {PROCESSES}, got {self.process!r}")
        if self.target not in ("table1", "table2"):
            raise ValueError(f"target must be 'table1' or 'table2', got {self.target!r}")
        for name in ("a_values", "z_values", "h_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must be nonempty")
            object.__setattr__(self, name, vals)
        if self.target == "table1" and any(a == 1.0 for a in self.a_values):
            raise ValueError(
                "direction sweeps exclude a=1: the invariance direction of a "
                "stationary pattern is not identified"
            )
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")


@dataclass(frozen=True)
class CellSummary:
    """Aggregated metric for one cell; samples carry the per-rep values."""

    metric_value: float
    mc_standard_error: float
    replications: int
    samples: tuple[float, ...] = field(repr=False, default=())


@dataclass(frozen=True)
class ExperimentResult:
    target: str
    cells: dict[tuple, CellSummary]

    def cell(self, process: str, a: float, z: float, h: float, estimator: str) -> CellSummary:
        return self.cells[(process, float(a), float(z), float(h), estimator)]


def replication_stream(
    master_seed: int, process: str, a: float, z: float, h: float, rep: int
) -> RngStream:
    """Independent stream for one replication of one cell.

    The stream index hashes the cell coordinates, so the draws of a cell
    never depend on which other cells the plan contains.
    """
    key = f"{process}|a={a:.12g}|z={z:.12g}|h={h:.12g}|rep={rep:d}"
    index = int.from_bytes(hashlib.blake2b(key.encode("ascii"), digest_size=8).digest(), "big")
    return RngStream(master_seed, index)


def _make_model(plan: ExperimentPlan, a: float, z: float):
    base = PoissonBetaModel(a, Window(z, 1.0))
    if plan.process == "poisson":
        return base
    return ThomasModel(base, gamma=plan.gamma, sigma=plan.sigma)


def _simulate(model, stream: RngStream) -> PointPattern:
    if isinstance(model, ThomasModel):
        return simulate_thomas(model, stream)
    return simulate_poisson_beta(model, stream)


def root_mse_theta(theta_hats) -> float:
    """Root mean squared fitted angle, reported in degrees (truth is 0)."""
    arr = np.degrees(np.asarray(list(theta_hats), dtype=float))
    if arr.size == 0:
        raise ValueError("need at least one fitted angle")
    return float(np.sqrt(np.mean(arr * arr)))


def _root_mean_with_se(squared_samples: np.ndarray) -> tuple[float, float]:
    """Root of the mean of the samples, with a delta-method standard error."""
    mean = float(np.mean(squared_samples))
    root = math.sqrt(mean)
    if squared_samples.size < 2 or root == 0.0:
        return root, 0.0
    se_mean = float(np.std(squared_samples, ddof=1)) / math.sqrt(squared_samples.size)
    return root, se_mean / (2.0 * root)


def integrated_squared_error(
    estimator,
    truth,
    theta_truth: Subspace,
    *,
    cells_1d: int = MISE_CELLS_1D,
    cells_2d: int = MISE_CELLS_2D,
) -> float:
    """Area-normalized integrated squared error of one fitted estimator.

    ``truth`` maps the orthogonal coordinate of ``theta_truth`` to the true
    intensity.  Estimators aligned with the true direction (the known-angle
    smoother and the constant) integrate on a 1-D midpoint grid weighted by
    chord length; everything else uses a 2-D midpoint grid over the window.
    """
    window = estimator.window
    aligned = estimator.kind == "stationary" or (
        estimator.kind == "substationary" and estimator.theta.theta == theta_truth.theta
    )
    if aligned:
        lo, hi = v_range(theta_truth, window)
        dv = (hi - lo) / cells_1d
        mids = lo + (np.arange(cells_1d) + 0.5) * dv
        if estimator.kind == "stationary":
            est_vals = np.full(mids.shape, estimator.value)
        else:
            est_vals = estimator.evaluate(mids)
        chords = chord_measure(theta_truth, window, mids)
        sq = (est_vals - np.asarray(truth(mids), dtype=float)) ** 2
        return float(np.sum(sq * chords) * dv / window.area)

    dx = window.z / cells_2d
    dy = window.omega / cells_2d
    x_mids = (np.arange(cells_2d) + 0.5) * dx
    y_mids = (np.arange(cells_2d) + 0.5) * dy
    _, v_true = project_xy(theta_truth, x_mids[:, None], y_mids[None, :])
    truth_vals = np.asarray(truth(v_true), dtype=float)
    if estimator.kind == "kernel2d":
        est_vals = estimator.grid_values(x_mids, y_mids)
    elif estimator.kind == "substationary":
        _, v_est = project_xy(estimator.theta, x_mids[:, None], y_mids[None, :])
        est_vals = estimator.evaluate(v_est.ravel()).reshape(v_est.shape)
    else:
        est_vals = estimator.at_points(
            np.broadcast_to(x_mids[:, None], v_true.shape).ravel(),
            np.broadcast_to(y_mids[None, :], v_true.shape).ravel(),
        ).reshape(v_true.shape)
    return float(np.mean((est_vals - truth_vals) ** 2))


def root_mise(estimates, truth, window: Window, theta_truth: Subspace) -> float:
    """Root mean integrated squared error over a list of fitted estimators."""
    estimates = list(estimates)
    if not estimates:
        raise ValueError("need at least one estimator")
    for est in estimates:
        if est.window != window:
            raise ValueError("all estimators must share the window")
    squared = np.array([integrated_squared_error(e, truth, theta_truth) for e in estimates])
    return float(np.sqrt(np.mean(squared)))


def _resolve_threads(threads: int) -> int:
    if threads <= 0:
        return os.cpu_count() or 1
    return threads


def _map_ordered(job, args, threads: int) -> list:
    if threads <= 1:
        return [job(a) for a in args]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, args))


def run_table1(plan: ExperimentPlan, threads: int = 0) -> ExperimentResult:
    """Root-MSE of the fitted angle for every (a, z, h) cell of the plan."""
    if plan.target != "table1":
        raise ValueError("plan target must be 'table1'")
    workers = _resolve_threads(threads)
    cells: dict[tuple, CellSummary] = {}
    for a in plan.a_values:
        for z in plan.z_values:
            model = _make_model(plan, a, z)
            for h in plan.h_values:

                def job(rep: int, model=model, a=a, z=z, h=h) -> float:
                    stream = replication_stream(plan.master_seed, plan.process, a, z, h, rep)
                    pattern = _simulate(model, stream)
                    fit = fit_theta(
                        pattern, h, search_halfwidth_deg=plan.search_halfwidth_deg
                    )
                    return fit.theta_hat.theta

                thetas = np.array(_map_ordered(job, range(plan.replications), workers))
                deg_sq = np.degrees(thetas) ** 2
                metric, se = _root_mean_with_se(deg_sq)
                key = (plan.process, a, z, h, THETA_ESTIMATOR)
                cells[key] = CellSummary(metric, se, plan.replications, tuple(map(float, thetas)))
    return ExperimentResult("table1", cells)


def run_table2(plan: ExperimentPlan, threads: int = 0) -> ExperimentResult:
    """Root-MISE of the four intensity estimators for every plan cell."""
    if plan.target != "table2":
        raise ValueError("plan target must be 'table2'")
    workers = _resolve_threads(threads)
    theta_truth = Subspace(0.0)
    cells: dict[tuple, CellSummary] = {}
    for a in plan.a_values:
        for z in plan.z_values:
            model = _make_model(plan, a, z)
            truth = model.intensity
            for h in plan.h_values:

                def job(rep: int, model=model, truth=truth, a=a, z=z, h=h) -> tuple:
                    stream = replication_stream(plan.master_seed, plan.process, a, z, h, rep)
                    pattern = _simulate(model, stream)
                    known = SubstationaryIntensity(pattern, theta_truth, h)
                    fitted_angle = fit_theta(
                        pattern, h, search_halfwidth_deg=plan.search_halfwidth_deg
                    ).theta_hat
                    fitted = SubstationaryIntensity(pattern, fitted_angle, h)
                    smooth2d = KernelIntensity2D(pattern, h)
                    constant = StationaryIntensity(pattern)
                    return tuple(
                        integrated_squared_error(est, truth, theta_truth)
                        for est in (known, fitted, smooth2d, constant)
                    )

                ises = np.array(_map_ordered(job, range(plan.replications), workers))
                for j, name in enumerate(TABLE2_ESTIMATORS):
                    metric, se = _root_mean_with_se(ises[:, j])
                    key = (plan.process, a, z, h, name)
                    cells[key] = CellSummary(
                        metric, se, plan.replications, tuple(map(float, ises[:, j]))
                    )
    return ExperimentResult("table2", cells)


def write_result_csv(result: ExperimentResult, path) -> None:
    """Write cells as CSV; float repr keeps the file bitwise reproducible."""
    lines = ["process,a,z,h,estimator,metric,mc_se,replications"]
    for (process, a, z, h, estimator), summary in result.cells.items():
        lines.append(
            f"{process},{a!r},{z!r},{h!r},{estimator},"
            f"{summary.metric_value!r},{summary.mc_standard_error!r},{summary.replications}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
