"""Dataset container, parameter types, and fit-result records."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "Dataset", "Theta", "FitResult",
    "METHOD_MPBL", "METHOD_PARAMETRIC", "METHOD_FOSTER", "METHODS",
    "validate",
]

METHOD_MPBL = "mpbl"
METHOD_PARAMETRIC = "parametric"
METHOD_FOSTER = "foster"
METHODS = (METHOD_MPBL, METHOD_PARAMETRIC, METHOD_FOSTER)


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out is arr:
        out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable regression sample: positive response y and n x p design x.

    x carries no intercept column; the model intercept is absorbed into the
    error distribution during profiling and recovered afterwards.
    """

    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", _readonly(np.asarray(self.y).ravel()))
        x = np.asarray(self.x, dtype=np.float64)
        if x.ndim != 2:
            raise ValidationError([(None, f"covariate matrix must be 2-D, got ndim={x.ndim}")])
        object.__setattr__(self, "x", _readonly(x))
        problems = []
        if self.x.shape[0] != self.n:
            problems.append((None, f"row mismatch: {self.n} responses vs "
                                   f"{self.x.shape[0]} covariate rows"))
        if self.p < 1:
            problems.append((None, "at least one covariate column required"))
        if problems:
            raise ValidationError(problems)
        if not np.all(np.isfinite(self.y)) or not np.all(self.y > 0.0):
            raise ValidationError([(None, "response must be finite and strictly positive "
                                          "(use validate() for a per-row report)")])
        if not np.all(np.isfinite(self.x)):
            raise ValidationError([(None, "covariates must be finite")])
        if self.n < self.p + 2:
            raise ValidationError([(None, f"need n >= p + 2 rows, got n={self.n}, p={self.p}")])

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


def validate(raw_y, raw_x) -> Dataset:
    """Check raw arrays row by row and return a Dataset.

    Raises ValidationError carrying every violation as (row, reason); row is
    None for whole-table problems such as dimension mismatches.
    """
    y = np.asarray(raw_y, dtype=np.float64).ravel()
    x = np.asarray(raw_x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    violations: list[tuple[int | None, str]] = []
    if x.ndim != 2:
        raise ValidationError([(None, f"covariate matrix must be 2-D, got ndim={x.ndim}")])
    if y.shape[0] != x.shape[0]:
        raise ValidationError([(None, f"row mismatch: {y.shape[0]} responses vs "
                                      f"{x.shape[0]} covariate rows")])
    n, p = x.shape
    if p < 1:
        violations.append((None, "at least one covariate column required"))

    for i in np.flatnonzero(~np.isfinite(y)):
        violations.append((int(i), f"non-finite response {y[i]!r}"))
    for i in np.flatnonzero(np.isfinite(y) & (y <= 0.0)):
        violations.append((int(i), f"non-positive response {y[i]!r}"))
    for i in np.flatnonzero(~np.all(np.isfinite(x), axis=1)):
        violations.append((int(i), "non-finite covariate"))

    if n < p + 2:
        violations.append((None, f"need n >= p + 2 rows, got n={n}, p={p}"))

    # A constant column would make the profile objective flat along its
    # coefficient: shifting that coefficient shifts every residual and every
    # query point together, leaving all ECDF evaluations unchanged.
    if n > 0 and np.all(np.isfinite(x)):
        for j in np.flatnonzero(np.ptp(x, axis=0) == 0.0):
            violations.append((None, f"covariate column {j} is constant; the intercept "
                                     "is absorbed into the error distribution, so a "
                                     "constant column leaves the objective flat"))

    if violations:
        raise ValidationError(violations)
    return Dataset(y=y, x=x)


@dataclass(frozen=True)
class Theta:
    """Parameter pair (lam, beta) for the transformation model."""

    lam: float
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "beta", _readonly(np.asarray(self.beta).ravel()))
        if not np.isfinite(self.lam) or not np.all(np.isfinite(self.beta)):
            raise ValidationError([(None, "theta components must be finite")])


@dataclass(frozen=True)
class FitResult:
    """Common output of the three estimators."""

    theta_hat: Theta
    gamma_hat: float
    objective: float
    method: str
    lambda_grid_trace: tuple[tuple[float, float], ...]
    converged: bool
    n_obj_evals: int
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        object.__setattr__(self, "lambda_grid_trace",
                           tuple((float(l), float(v)) for l, v in self.lambda_grid_trace))
