"""Profile maximization of the binomial likelihood.

The estimator is computed in three stages: for fixed lam, maximize the
likelihood over beta with Nelder-Mead from least-squares and rank-based
starts; scan lam over a grid to maximize the resulting profile; finally
re-grid around the incumbent at finer resolution. All stages are
deterministic for a given (data, config).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kernels
from .blik import gamma_hat
from .data import Dataset, FitResult, METHOD_MPBL, Theta
from .errors import OptimizationError, SingularDesignError
from .transform import boxcox

__all__ = [
    "LambdaGrid", "NmOptions", "OptimConfig", "ProfilePoint",
    "ols_init", "rank_init", "beta_given_lambda", "fit_mpbl",
]

_BAD_OBJECTIVE = 1e300  # sentinel for non-finite objective values

INIT_OLS = "ols"
INIT_RANK = "rank"


@dataclass(frozen=True)
class LambdaGrid:
    """Search grid for the transform power.

    The default [-2, 2] span at step 0.05 with two refinement rounds (each
    round: a fifth of the step, half of the span, centered and clipped at
    the incumbent) ends at resolution 0.002.
    """

    lo: float = -2.0
    hi: float = 2.0
    step: float = 0.05
    refine_rounds: int = 2

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.step <= 0.0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be >= 0")


@dataclass(frozen=True)
class NmOptions:
    """Simplex settings: reflection 1, expansion 2, contraction and shrink
    0.5 are fixed; tolerances and budget are configurable.

    max_iters=None resolves to 500 * p at call time. restarts counts extra
    simplex rebuilds from the incumbent after first convergence.
    """

    max_iters: int | None = None
    xtol: float = 1e-6
    ftol: float = 1e-8
    restarts: int = 1

    def __post_init__(self):
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")

    def resolve_iters(self, p: int) -> int:
        return 500 * p if self.max_iters is None else self.max_iters


@dataclass(frozen=True)
class OptimConfig:
    lambda_grid: LambdaGrid = field(default_factory=LambdaGrid)
    nm: NmOptions = field(default_factory=NmOptions)
    init_strategies: tuple[str, ...] = (INIT_OLS, INIT_RANK)
    warm_start: bool = True
    seed: int = 0  # recorded for provenance; the fit itself draws no randomness

    def __post_init__(self):
        for s in self.init_strategies:
            if s not in (INIT_OLS, INIT_RANK):
                raise ValueError(f"unknown init strategy {s!r}")
        if not self.init_strategies:
            raise ValueError("at least one init strategy required")


@dataclass(frozen=True)
class ProfilePoint:
    lam: float
    beta_lambda: np.ndarray
    pl: float
    n_evals: int = 0
    converged: bool = True


class _Workspace:
    """Per-fit precomputations shared across every (lam, beta) evaluation."""

    def __init__(self, data: Dataset):
        self.data = data
        self.order, self.first_ge = kernels.pair_tables(data.y)
        self.log_f, self.log_1mf = kernels.log_cdf_tables(data.n)
        self.scores = kernels.wilcoxon_scores(data.n)
        self.x = np.ascontiguousarray(data.x)
        xstar = np.column_stack([np.ones(data.n), data.x])
        cond = np.linalg.cond(xstar)
        if not np.isfinite(cond) or cond * cond > 1e12:
            raise SingularDesignError(
                f"normal equations condition number {cond * cond:.3e} exceeds 1e12")
        self.q, self.r = np.linalg.qr(xstar)

    def transformed(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        yl = boxcox(self.data.y, lam)
        return yl, np.ascontiguousarray(yl[self.order])

    def ols_coef(self, yl: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.r, self.q.T @ yl)

    def payload(self, yl: np.ndarray, yl_sorted: np.ndarray):
        return (yl, yl_sorted, self.first_ge, self.x, self.log_f,
                self.log_1mf, self.scores)


def ols_init(data: Dataset, lam: float) -> np.ndarray:
    """Least-squares slopes of y^(lam) on an intercept plus x.

    The intercept is discarded: it is absorbed into the error distribution
    during profiling.
    """
    ws = _Workspace(data)
    yl, _ = ws.transformed(lam)
    return ws.ols_coef(yl)[1:]


def rank_init(data: Dataset, lam: float, config: OptimConfig | None = None) -> np.ndarray:
    """Slopes minimizing the Jaeckel rank dispersion with Wilcoxon scores.

    Dispersion sum_i a(R(e_i)) e_i is translation invariant, so no
    intercept is involved; minimization starts from the OLS slopes.
    """
    config = config or OptimConfig()
    ws = _Workspace(data)
    yl, yl_sorted = ws.transformed(lam)
    return _rank_beta(ws, yl, yl_sorted, ws.ols_coef(yl)[1:], config)


def _rank_beta(ws: _Workspace, yl, yl_sorted, beta0, config: OptimConfig) -> np.ndarray:
    beta, _, _, _ = kernels.minimize_payload(
        kernels.OBJ_RANK_DISPERSION, beta0,
        config.nm.xtol, config.nm.ftol, config.nm.resolve_iters(ws.data.p),
        config.nm.restarts, ws.payload(yl, yl_sorted))
    return beta


def _beta_for_lambda(ws: _Workspace, lam: float, config: OptimConfig,
                     warm_beta: np.ndarray | None = None) -> ProfilePoint:
    yl, yl_sorted = ws.transformed(lam)
    payload = ws.payload(yl, yl_sorted)
    ols_beta = ws.ols_coef(yl)[1:]

    starts: list[np.ndarray] = []
    if INIT_OLS in config.init_strategies:
        starts.append(ols_beta)
    if INIT_RANK in config.init_strategies:
        starts.append(_rank_beta(ws, yl, yl_sorted, ols_beta, config))
    if warm_beta is not None:
        starts.append(np.asarray(warm_beta, dtype=np.float64))

    best = None
    total_evals = 0
    max_iter = config.nm.resolve_iters(ws.data.p)
    for start in starts:
        beta, f, n_evals, converged = kernels.minimize_payload(
            kernels.OBJ_NEG_LOGLIK, start, config.nm.xtol, config.nm.ftol,
            max_iter, config.nm.restarts, payload)
        total_evals += n_evals
        if best is None or f < best[1]:
            best = (beta, f, converged)
    beta, f, converged = best
    if not f < _BAD_OBJECTIVE:
        raise OptimizationError(
            f"no start produced a finite likelihood at lam={lam!r} "
            f"(starts tried: {len(starts)})")
    return ProfilePoint(lam=float(lam), beta_lambda=beta, pl=-f,
                        n_evals=total_evals, converged=converged)


def beta_given_lambda(data: Dataset, lam: float,
                      config: OptimConfig | None = None) -> ProfilePoint:
    """Maximize the likelihood over beta at fixed lam, best start wins."""
    config = config or OptimConfig()
    return _beta_for_lambda(_Workspace(data), lam, config)


def grid_points(lo: float, hi: float, step: float) -> np.ndarray:
    """Ascending points lo + k*step covering [lo, hi]."""
    count = int(round((hi - lo) / step))
    pts = lo + step * np.arange(count + 1)
    # rounding may push the last point just past hi
    if pts[-1] > hi + 1e-9 * step:
        pts = pts[:-1]
    return pts


def profile_grid_maximize(evaluate, grid: LambdaGrid, on_new_round=None):
    """Shared lam search: ascending scan, then centered refinement rounds.

    evaluate(lam) -> (value, aux); the incumbent is replaced only on strict
    improvement, so ties resolve to the smallest lam and the incumbent value
    never decreases across rounds. Returns (lam, value, aux, trace).
    """
    trace: list[tuple[float, float]] = []
    best = None

    def scan(points):
        nonlocal best
        for lam in points:
            value, aux = evaluate(float(lam))
            trace.append((float(lam), float(value)))
            if best is None or value > best[1]:
                best = (float(lam), float(value), aux)

    scan(grid_points(grid.lo, grid.hi, grid.step))
    if best is None:
        raise OptimizationError("empty lambda grid")

    span = grid.hi - grid.lo
    step = grid.step
    for _ in range(grid.refine_rounds):
        span /= 2.0
        step /= 5.0
        lo = max(grid.lo, best[0] - span / 2.0)
        hi = min(grid.hi, best[0] + span / 2.0)
        if on_new_round is not None:
            on_new_round(best)
        scan(grid_points(lo, hi, step))
    return best[0], best[1], best[2], trace


def fit_mpbl(data: Dataset, config: OptimConfig | None = None) -> FitResult:
    """Full profile-likelihood fit: grid over lam, Nelder-Mead over beta."""
    config = config or OptimConfig()
    ws = _Workspace(data)
    state = {"warm": None, "evals": 0}

    def evaluate(lam: float):
        point = _beta_for_lambda(ws, lam, config,
                                 warm_beta=state["warm"] if config.warm_start else None)
        if config.warm_start:
            state["warm"] = point.beta_lambda
        state["evals"] += point.n_evals
        return point.pl, point

    def on_new_round(best):
        # continue each refinement round from the incumbent's beta
        if config.warm_start:
            state["warm"] = best[2].beta_lambda

    lam, pl, point, trace = profile_grid_maximize(evaluate, config.lambda_grid,
                                                  on_new_round=on_new_round)
    theta = Theta(lam=lam, beta=point.beta_lambda)
    return FitResult(
        theta_hat=theta,
        gamma_hat=gamma_hat(data, theta),
        objective=pl,
        method=METHOD_MPBL,
        lambda_grid_trace=tuple(trace),
        converged=point.converged,
        n_obj_evals=state["evals"],
    )
