"""Monte Carlo estimation of detection capability over (criterion, d, k) grids.

Estimates are deterministic functions of the master seed: states and
per-sample randomness are addressed by sample index, work is blocked in
fixed chunks, and detection counts are summed exactly, so the worker count
never changes the result.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from . import batch, bounds
from .criteria import CriterionSpec, draw_fisher_pairs
from .quantum import InvalidInputError, Spectrum
from .sampling import SeedSpec

WORKERS_ENV = "ENTCAP_WORKERS"

BOUND_SELECTORS = ("ew", "spectrum")


class InsufficientDataError(RuntimeError):
    """Not enough qualifying rows for a fit."""


class NoThresholdError(RuntimeError):
    """The capability curve never crosses half its plateau."""


@dataclass(frozen=True)
class EstimateConfig:
    criterion: CriterionSpec
    dim_a: int
    dim_b: int
    k: int
    n_samples: int
    master_seed: int
    ci_level: float = 0.95
    ci_method: str = "wilson"  # wilson | clopper_pearson

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise InvalidInputError("subsystem dimensions must be positive")
        if self.k < 1:
            raise InvalidInputError("environment dimension k must be >= 1")
        if self.n_samples < 100:
            raise InvalidInputError("n_samples must be at least 100")
        if not 0.0 < self.ci_level < 1.0:
            raise InvalidInputError("ci_level must lie in (0, 1)")
        if self.ci_method not in ("wilson", "clopper_pearson"):
            raise InvalidInputError(f"unknown ci_method {self.ci_method!r}")


@dataclass(frozen=True)
class CapabilityEstimate:
    n_samples: int
    n_detected: int
    p_hat: float
    ci_low: float
    ci_high: float
    seed: int
    bound_value: float | None
    wall_time_s: float


@dataclass(frozen=True)
class SweepRow:
    experiment_id: str
    criterion: str
    d_a: int
    d_b: int
    k: int
    n_samples: int
    n_detected: int
    p_hat: float
    ci_low: float
    ci_high: float
    master_seed: int
    bound_value: float | None
    wall_time_s: float
    error: str = ""


def wilson_interval(n_detected: int, n_samples: int, level: float) -> tuple[float, float]:
    """Wilson score interval; well behaved in the small-p regime."""
    z = stats.norm.ppf(0.5 + level / 2.0)
    p = n_detected / n_samples
    denom = 1.0 + z * z / n_samples
    center = (p + z * z / (2.0 * n_samples)) / denom
    half = (
        z
        * math.sqrt(p * (1.0 - p) / n_samples + z * z / (4.0 * n_samples * n_samples))
        / denom
    )
    # the endpoints are exactly 0 / 1 at the boundary counts; avoid cancellation noise
    low = 0.0 if n_detected == 0 else max(0.0, center - half)
    high = 1.0 if n_detected == n_samples else min(1.0, center + half)
    return low, high


def clopper_pearson_interval(
    n_detected: int, n_samples: int, level: float
) -> tuple[float, float]:
    """Exact binomial (Clopper-Pearson) interval."""
    alpha = 1.0 - level
    if n_detected == 0:
        low = 0.0
    else:
        low = float(stats.beta.ppf(alpha / 2.0, n_detected, n_samples - n_detected + 1))
    if n_detected == n_samples:
        high = 1.0
    else:
        high = float(stats.beta.ppf(1.0 - alpha / 2.0, n_detected + 1, n_samples - n_detected))
    return low, high


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    if raw.strip():
        n = int(raw)
        if n < 1:
            raise InvalidInputError(f"{WORKERS_ENV} must be positive")
        return n
    return os.cpu_count() or 1


def _resolve_spec(cfg: EstimateConfig) -> CriterionSpec:
    spec = cfg.criterion
    if (
        spec.kind == "fisher"
        and spec.fisher_schedule == "per_experiment"
        and spec.fisher_pairs is None
    ):
        pairs = draw_fisher_pairs(
            cfg.dim_a, cfg.dim_b, spec.n_pairs,
            SeedSpec(cfg.master_seed, batch.EXPERIMENT_STREAM),
        )
        spec = replace(spec, fisher_pairs=pairs)
    return spec


def _count_chunk(args) -> int:
    spec, dim_a, dim_b, k, master_seed, lo, hi = args
    return batch.count_detections(spec, dim_a, dim_b, k, master_seed, lo, hi)


def estimate(cfg: EstimateConfig) -> CapabilityEstimate:
    """Monte Carlo capability estimate with a binomial confidence interval."""
    start = time.perf_counter()
    spec = _resolve_spec(cfg)
    chunks = [
        (spec, cfg.dim_a, cfg.dim_b, cfg.k, cfg.master_seed, lo,
         min(lo + batch.CHUNK_SIZE, cfg.n_samples))
        for lo in range(0, cfg.n_samples, batch.CHUNK_SIZE)
    ]
    workers = worker_count()
    if workers <= 1 or len(chunks) == 1:
        counts = [_count_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(_count_chunk, chunks, chunksize=1))
    n_detected = int(sum(counts))
    p_hat = n_detected / cfg.n_samples
    if cfg.ci_method == "wilson":
        ci_low, ci_high = wilson_interval(n_detected, cfg.n_samples, cfg.ci_level)
    else:
        ci_low, ci_high = clopper_pearson_interval(n_detected, cfg.n_samples, cfg.ci_level)
    return CapabilityEstimate(
        n_samples=cfg.n_samples,
        n_detected=n_detected,
        p_hat=p_hat,
        ci_low=ci_low,
        ci_high=ci_high,
        seed=cfg.master_seed,
        bound_value=None,
        wall_time_s=time.perf_counter() - start,
    )


def bound_value_for(cfg: EstimateConfig, selector: str) -> float:
    spec = cfg.criterion
    d = cfg.dim_a * cfg.dim_b
    if selector == "ew":
        if spec.kind in ("ew_fixed",):
            alpha = spec.witness.alpha
        elif spec.kind == "ew_ppt":
            alpha = 1.0
        elif spec.kind == "ew_faithful":
            alpha = math.sqrt((d - math.sqrt(d)) / 2.0)
        else:
            raise InvalidInputError(
                f"the ew bound applies to witness criteria, not {spec.kind!r}"
            )
        return bounds.ew_bound(alpha, cfg.k).value
    if selector == "spectrum":
        if spec.kind != "ew_fixed":
            raise InvalidInputError("the spectrum bound needs a fixed witness")
        w = np.linalg.eigvalsh(spec.witness.observable.entries)[::-1]
        return bounds.spectrum_bound(Spectrum(w), cfg.k).value
    raise InvalidInputError(f"unknown bound selector {selector!r}")


def sweep(
    grid: list[EstimateConfig],
    bound_attach: str | None = None,
    experiment_id: str = "",
) -> list[SweepRow]:
    """Run one estimate per grid point; per-point failures land in the error column."""
    if not grid:
        raise InvalidInputError("sweep grid is empty")
    rows = []
    for cfg in grid:
        try:
            est = estimate(cfg)
            bound_value = None
            if bound_attach is not None:
                bound_value = bound_value_for(cfg, bound_attach)
            rows.append(
                SweepRow(
                    experiment_id=experiment_id,
                    criterion=cfg.criterion.kind,
                    d_a=cfg.dim_a,
                    d_b=cfg.dim_b,
                    k=cfg.k,
                    n_samples=est.n_samples,
                    n_detected=est.n_detected,
                    p_hat=est.p_hat,
                    ci_low=est.ci_low,
                    ci_high=est.ci_high,
                    master_seed=cfg.master_seed,
                    bound_value=bound_value,
                    wall_time_s=est.wall_time_s,
                )
            )
        except Exception as exc:  # noqa: BLE001 - per-point isolation is the contract
            rows.append(
                SweepRow(
                    experiment_id=experiment_id,
                    criterion=cfg.criterion.kind,
                    d_a=cfg.dim_a,
                    d_b=cfg.dim_b,
                    k=cfg.k,
                    n_samples=cfg.n_samples,
                    n_detected=0,
                    p_hat=float("nan"),
                    ci_low=float("nan"),
                    ci_high=float("nan"),
                    master_seed=cfg.master_seed,
                    bound_value=None,
                    wall_time_s=0.0,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    return rows


MIN_FIT_COUNT = 10  # log of smaller counts is too noisy to fit


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r2: float


def fit_decay_slope(rows: list[SweepRow], k_min: int) -> DecayFit:
    """Least-squares fit of ln(p_hat) against k over well-populated rows."""
    pts = [
        (row.k, math.log(row.p_hat))
        for row in rows
        if not row.error and row.n_detected >= MIN_FIT_COUNT and row.k >= k_min
    ]
    if len(pts) < 3:
        raise InsufficientDataError(
            f"need at least 3 rows with n_detected >= {MIN_FIT_COUNT} and k >= {k_min}, "
            f"got {len(pts)}"
        )
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(slope), float(intercept), r2)


@dataclass(frozen=True)
class ThresholdResult:
    k_th: float
    plateau: float


def threshold_kth(rows: list[SweepRow]) -> ThresholdResult:
    """k at which capability first drops below half its initial plateau.

    The plateau is the mean p_hat of the three smallest k values; the crossing
    is linearly interpolated between the bracketing grid points.
    """
    pts = sorted(
        (row.k, row.p_hat) for row in rows if not row.error and not math.isnan(row.p_hat)
    )
    if len(pts) < 4:
        raise NoThresholdError("need at least 4 rows to locate a threshold")
    plateau = sum(p for _, p in pts[:3]) / 3.0
    target = plateau / 2.0
    for (k_prev, p_prev), (k_next, p_next) in zip(pts, pts[1:]):
        if p_prev >= target and p_next < target:
            frac = (p_prev - target) / (p_prev - p_next)
            return ThresholdResult(k_prev + frac * (k_next - k_prev), plateau)
    raise NoThresholdError("capability never crosses half the plateau")
