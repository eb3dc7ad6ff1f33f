"""Seeded generators for the six simulation models and the Monte Carlo
bias/MSE harness.

Covariates come from two correlated bivariate-normal draws: X1 and X3 are
unit-exponential transforms of the latent normals, X2 and X4 their sign
indicators. Models 1-2 are log-linear (true power 0), 3-4 linear (power 1),
5-6 reciprocal (power -1); each uses two or four of the covariates.

Randomness is counter-based: every (cell, rep) pair owns a Philox substream
keyed by (seed, model, error law, n, rep), and normal variates are produced
by inverse-CDF transform of uniforms, so reps are reproducible regardless
of execution order or parallelism.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import fit_foster, fit_parametric
from .data import Dataset, METHOD_FOSTER, METHOD_MPBL, METHOD_PARAMETRIC
from .errors import GeneratorError, MpblError
from .optimize import OptimConfig, fit_mpbl
from .special import erfc, norm_ppf

__all__ = [
    "ERR_NORMAL05", "ERR_CHISQ", "MODEL_TRUE_LAMBDA", "MODEL_TRUE_BETA",
    "SimSpec", "McSummary",
    "gen_covariates", "gen_response", "gen_dataset", "rep_rng", "run_cell",
]

ERR_NORMAL05 = "normal05"  # N(0, 0.5^2)
ERR_CHISQ = "chisq"        # 0.5 * (chi^2_1 - 1)
_ERROR_DISTS = (ERR_NORMAL05, ERR_CHISQ)

_SQRT1_2 = 0.7071067811865476
_UNIFORM_FLOOR = 1e-300  # keep inverse-CDF away from the exact endpoints
_MAX_REDRAW_ROUNDS = 1000

# True transformed-scale parameters. For the reciprocal models 5/Y = a + ...,
# the power -1 transform gives y^(-1) = 1 - 1/y = (1 - a/5) - (b/5) x - eps/5,
# hence slopes -2.5/5 = -0.5 (model 5) and -1.2/5 = -0.24 (model 6).
MODEL_TRUE_LAMBDA = {1: 0.0, 2: 0.0, 3: 1.0, 4: 1.0, 5: -1.0, 6: -1.0}
MODEL_TRUE_BETA = {
    1: (1.0, 1.0),
    2: (1.0, 1.0, 1.0, 1.0),
    3: (2.5, 2.5),
    4: (1.2, 1.2, 1.2, 1.2),
    5: (-0.5, -0.5),
    6: (-0.24, -0.24, -0.24, -0.24),
}
# MSE scaling used when reporting: x100 for models 1-4, x1000 for 5-6
MODEL_MSE_SCALE = {1: 100.0, 2: 100.0, 3: 100.0, 4: 100.0, 5: 1000.0, 6: 1000.0}


@dataclass(frozen=True)
class SimSpec:
    """One simulation cell: model, error law, sample size, replication."""

    model_id: int
    error_dist: str
    n: int
    reps: int
    seed: int = 0

    def __post_init__(self):
        if self.model_id not in MODEL_TRUE_LAMBDA:
            raise ValueError(f"model_id must be 1..6, got {self.model_id}")
        if self.error_dist not in _ERROR_DISTS:
            raise ValueError(f"error_dist must be one of {_ERROR_DISTS}, "
                             f"got {self.error_dist!r}")
        if self.n < 10:
            raise ValueError(f"need n >= 10, got {self.n}")
        if self.reps < 1:
            raise ValueError(f"need reps >= 1, got {self.reps}")

    @property
    def p(self) -> int:
        return len(MODEL_TRUE_BETA[self.model_id])


@dataclass(frozen=True)
class McSummary:
    """Aggregated bias and scaled MSE per method and parameter."""

    spec: SimSpec
    methods: tuple[str, ...]
    stats: dict  # method -> parameter -> {"bias": float, "mse_scaled": float}
    mse_scale: float
    reps_done: int
    wall_time: float
    redraws: int


def _uniforms(rng: np.random.Generator, *shape) -> np.ndarray:
    u = rng.random(shape)
    return np.maximum(u, _UNIFORM_FLOOR)


def _normals(rng: np.random.Generator, *shape) -> np.ndarray:
    return norm_ppf(_uniforms(rng, *shape))


def _norm_sf_neg_log(s: np.ndarray) -> np.ndarray:
    # -log(1 - Phi(s)) without cancellation: 1 - Phi(s) = erfc(s/sqrt(2))/2
    return -np.log(0.5 * erfc(s * _SQRT1_2))


def gen_covariates(n: int, rng: np.random.Generator) -> np.ndarray:
    """n x 4 covariate draws.

    Latent pairs (s11, s12) and (s21, s22) are bivariate normal with unit
    variances and correlation 0.6; X1/X3 are -log(1 - Phi(latent)), X2/X4
    the indicators of a positive latent.
    """
    z = _normals(rng, n, 4)
    s11, s12 = z[:, 0], 0.6 * z[:, 0] + 0.8 * z[:, 1]
    s21, s22 = z[:, 2], 0.6 * z[:, 2] + 0.8 * z[:, 3]
    out = np.empty((n, 4))
    out[:, 0] = _norm_sf_neg_log(s11)
    out[:, 1] = (s21 > 0.0).astype(np.float64)
    out[:, 2] = _norm_sf_neg_log(s12)
    out[:, 3] = (s22 > 0.0).astype(np.float64)
    return out


def _errors(dist: str, n: int, rng: np.random.Generator) -> np.ndarray:
    z = _normals(rng, n)
    if dist == ERR_NORMAL05:
        return 0.5 * z
    return 0.5 * (z * z - 1.0)


def _response_vec(model_id: int, x4: np.ndarray, eps: np.ndarray) -> np.ndarray:
    if model_id == 1:
        return np.exp(x4[:, 0] + x4[:, 1] + eps)
    if model_id == 2:
        return np.exp(x4[:, 0] + x4[:, 1] + x4[:, 2] + x4[:, 3] + eps)
    if model_id == 3:
        return 4.0 + 2.5 * x4[:, 0] + 2.5 * x4[:, 1] + eps
    if model_id == 4:
        return 4.0 + 1.2 * (x4[:, 0] + x4[:, 1] + x4[:, 2] + x4[:, 3]) + eps
    if model_id == 5:
        return 5.0 / (4.0 + 2.5 * x4[:, 0] + 2.5 * x4[:, 1] + eps)
    if model_id == 6:
        return 5.0 / (4.0 + 1.2 * (x4[:, 0] + x4[:, 1] + x4[:, 2] + x4[:, 3]) + eps)
    raise ValueError(f"model_id must be 1..6, got {model_id}")


def gen_response(model_id: int, x_row, eps: float) -> float:
    """Response formula for a single row (no redraw; see gen_dataset)."""
    x_row = np.asarray(x_row, dtype=np.float64).ravel()
    need = 4 if model_id in (2, 4, 6) else 2
    if x_row.size < need:
        raise ValueError(f"model {model_id} needs {need} covariates, got {x_row.size}")
    x4 = np.zeros((1, 4))
    x4[0, :min(x_row.size, 4)] = x_row[:4]
    return float(_response_vec(model_id, x4, np.array([eps]))[0])


def gen_dataset(model_id: int, error_dist: str, n: int,
                rng: np.random.Generator) -> tuple[Dataset, int]:
    """Draw one dataset; rows with a non-positive (or non-finite) response
    are redrawn with fresh covariates and error. Returns (data, redraws)."""
    ncols = 4 if model_id in (2, 4, 6) else 2
    x4 = gen_covariates(n, rng)
    eps = _errors(error_dist, n, rng)
    y = _response_vec(model_id, x4, eps)
    redraws = 0
    bad = ~(np.isfinite(y) & (y > 0.0))
    rounds = 0
    while np.any(bad):
        rounds += 1
        if rounds > _MAX_REDRAW_ROUNDS:
            raise GeneratorError(
                f"model {model_id}: a row failed to yield a positive response "
                f"after {_MAX_REDRAW_ROUNDS} consecutive redraws")
        k = int(np.sum(bad))
        redraws += k
        x_new = gen_covariates(k, rng)
        eps_new = _errors(error_dist, k, rng)
        x4[bad] = x_new
        eps[bad] = eps_new
        y[bad] = _response_vec(model_id, x_new, eps_new)
        bad = ~(np.isfinite(y) & (y > 0.0))
    return Dataset(y=y, x=x4[:, :ncols]), redraws


def rep_rng(spec: SimSpec, rep: int) -> np.random.Generator:
    """Philox substream for one repetition of one cell."""
    dist_code = _ERROR_DISTS.index(spec.error_dist)
    key = np.random.SeedSequence(
        (spec.seed, spec.model_id, dist_code, spec.n, rep))
    return np.random.Generator(np.random.Philox(key))


def _fit_method(method: str, data: Dataset, optim_config, foster_config):
    if method == METHOD_MPBL:
        return fit_mpbl(data, optim_config)
    if method == METHOD_PARAMETRIC:
        grid = (optim_config or OptimConfig()).lambda_grid
        return fit_parametric(data, grid)
    if method == METHOD_FOSTER:
        return fit_foster(data, foster_config)
    raise ValueError(f"unknown method {method!r}")


def _run_reps(spec: SimSpec, methods, rep_indices, optim_config, foster_config):
    """Fit every method on each listed rep; returns (estimates, redraws).

    estimates maps method -> array of shape (len(rep_indices), 1 + p) holding
    (lambda_hat, beta_hat...) per rep.
    """
    est = {m: np.empty((len(rep_indices), 1 + spec.p)) for m in methods}
    redraws = 0
    for row, rep in enumerate(rep_indices):
        rng = rep_rng(spec, rep)
        try:
            data, rd = gen_dataset(spec.model_id, spec.error_dist, spec.n, rng)
            redraws += rd
            for m in methods:
                fit = _fit_method(m, data, optim_config, foster_config)
                est[m][row, 0] = fit.theta_hat.lam
                est[m][row, 1:] = fit.theta_hat.beta
        except MpblError as exc:
            raise RuntimeError(
                f"cell {spec} failed at rep {rep} (seed {spec.seed}): {exc}") from exc
    return est, redraws


def run_cell(spec: SimSpec, methods=(METHOD_MPBL,), optim_config=None,
             foster_config=None, n_jobs: int = 1) -> McSummary:
    """Monte Carlo bias/MSE for one simulation cell.

    Every method sees the same generated datasets rep by rep. Aggregation
    order is fixed by rep index, so n_jobs only affects wall time.
    """
    methods = tuple(methods)
    t0 = time.perf_counter()
    all_reps = list(range(spec.reps))

    if n_jobs > 1 and spec.reps > 1:
        chunks = [all_reps[i::n_jobs] for i in range(n_jobs)]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(_run_reps, [spec] * len(chunks),
                                  [methods] * len(chunks), chunks,
                                  [optim_config] * len(chunks),
                                  [foster_config] * len(chunks)))
        est = {m: np.empty((spec.reps, 1 + spec.p)) for m in methods}
        redraws = 0
        for chunk, (part_est, part_rd) in zip(chunks, parts):
            redraws += part_rd
            for m in methods:
                est[m][chunk] = part_est[m]
    else:
        est, redraws = _run_reps(spec, methods, all_reps, optim_config, foster_config)

    truth = np.concatenate([[MODEL_TRUE_LAMBDA[spec.model_id]],
                            MODEL_TRUE_BETA[spec.model_id]])
    scale = MODEL_MSE_SCALE[spec.model_id]
    names = ("lambda",) + tuple(f"beta{j + 1}" for j in range(spec.p))
    stats = {}
    for m in methods:
        err = est[m] - truth
        stats[m] = {
            name: {"bias": float(np.mean(err[:, k])),
                   "mse_scaled": float(scale * np.mean(err[:, k] ** 2))}
            for k, name in enumerate(names)
        }
    return McSummary(
        spec=spec,
        methods=methods,
        stats=stats,
        mse_scale=scale,
        reps_done=spec.reps,
        wall_time=time.perf_counter() - t0,
        redraws=redraws,
    )
