"""Nonparametric pairs bootstrap for any of the three estimators.

Whole (y_i, x_i) rows are resampled with replacement; the error law is
never assumed known, so resampling residuals is deliberately avoided.
Each replicate draws its indices from its own spawned substream, making
results independent of execution order (sequential or parallel runs
produce identical output).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import fit_foster, fit_parametric
from .data import (Dataset, FitResult, METHOD_FOSTER, METHOD_MPBL,
                   METHOD_PARAMETRIC)
from .errors import BootstrapError, MpblError
from .optimize import OptimConfig, fit_mpbl

__all__ = ["BootstrapResult", "bootstrap_fit", "QUANTILE_RULE"]

# percentile intervals interpolate linearly between order statistics
QUANTILE_RULE = "linear-interpolation (type 7)"

_MAX_FAILURE_FRACTION = 0.05


@dataclass(frozen=True)
class BootstrapResult:
    point: FitResult
    param_names: tuple[str, ...]
    bsd: np.ndarray
    bci: tuple[tuple[float, float], ...]
    b: int
    failures: int
    level: float
    seed: int


def _fit_once(method, data: Dataset, config) -> FitResult:
    if callable(method):
        return method(data)
    if method == METHOD_MPBL:
        return fit_mpbl(data, config)
    if method == METHOD_PARAMETRIC:
        if isinstance(config, OptimConfig):
            config = config.lambda_grid
        return fit_parametric(data, config)
    if method == METHOD_FOSTER:
        return fit_foster(data, config)
    raise ValueError(f"unknown method {method!r}")


def _params(fit: FitResult) -> np.ndarray:
    return np.concatenate([[fit.theta_hat.lam], fit.theta_hat.beta])


def _replicate(args):
    method, data, config, child_seed = args
    rng = np.random.Generator(np.random.Philox(child_seed))
    idx = rng.integers(0, data.n, size=data.n)
    try:
        resampled = Dataset(y=data.y[idx], x=data.x[idx])
        return _params(_fit_once(method, resampled, config))
    except (MpblError, np.linalg.LinAlgError):
        return None


def bootstrap_fit(data: Dataset, method, config=None, b: int = 500,
                  seed: int = 0, level: float = 0.95,
                  n_jobs: int = 1) -> BootstrapResult:
    """Point fit plus b pairs-bootstrap refits with SDs and percentile CIs.

    method is one of the method names or a callable data -> FitResult (the
    latter mainly for testing with stub estimators). Replicates whose refit
    fails (e.g. a singular resampled design) are dropped and counted; more
    than 5% failures aborts the run.
    """
    if b < 2:
        raise BootstrapError(f"need b >= 2 replicates, got {b}")
    if not 0.0 < level < 1.0:
        raise BootstrapError(f"level must be in (0, 1), got {level}")

    point = _fit_once(method, data, config)
    children = np.random.SeedSequence(seed).spawn(b)
    tasks = [(method, data, config, children[r]) for r in range(b)]

    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_replicate, tasks, chunksize=max(1, b // (4 * n_jobs))))
    else:
        results = [_replicate(t) for t in tasks]

    kept = [r for r in results if r is not None]
    failures = b - len(kept)
    if failures > _MAX_FAILURE_FRACTION * b:
        raise BootstrapError(
            f"{failures}/{b} bootstrap replicates failed to fit (limit 5%)")

    draws = np.vstack(kept)
    alpha = 0.5 * (1.0 - level)
    bsd = np.std(draws, axis=0, ddof=1)
    lo = np.quantile(draws, alpha, axis=0, method="linear")
    hi = np.quantile(draws, 1.0 - alpha, axis=0, method="linear")
    names = ("lambda",) + tuple(f"beta{j + 1}" for j in range(data.p))
    return BootstrapResult(
        point=point,
        param_names=names,
        bsd=bsd,
        bci=tuple((float(l), float(h)) for l, h in zip(lo, hi)),
        b=len(kept),
        failures=failures,
        level=level,
        seed=seed,
    )
