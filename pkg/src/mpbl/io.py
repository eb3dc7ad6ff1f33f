"""CSV ingestion, result serialization, and residual diagnostics export.

JSON output uses canonical key ordering and a schema_version field; floats
serialize with shortest round-trip decimals, so parse/re-serialize is
byte-identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bootstrap import BootstrapResult, QUANTILE_RULE
from .data import Dataset, FitResult, Theta, validate
from .errors import MpblError
from .simgen import McSummary
from .special import norm_ppf
from .transform import boxcox

__all__ = ["ColumnSpec", "CsvLoad", "read_csv", "export_residual_qq",
           "write_results", "fit_result_to_dict"]

SCHEMA_VERSION = 1

_MISSING_TOKENS = {"", "na", "nan"}


@dataclass(frozen=True)
class ColumnSpec:
    """Column selection and per-column rescaling for CSV ingestion.

    transforms maps a column name to a multiplier applied after parsing
    (e.g. 0.1 to store age/10); response_offset is added to the response
    before validation (e.g. +1 to shift a count off zero).
    """

    response: str
    covariates: tuple[str, ...]
    transforms: dict | None = None
    response_offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "covariates", tuple(self.covariates))
        if self.response in self.covariates:
            raise ValueError(f"response column {self.response!r} also listed as covariate")
        for col, scale in (self.transforms or {}).items():
            if not np.isfinite(scale) or scale == 0.0:
                raise ValueError(f"scale for column {col!r} must be finite and nonzero")


@dataclass(frozen=True)
class CsvLoad:
    dataset: Dataset
    dropped: int
    total: int


def read_csv(path, spec: ColumnSpec) -> CsvLoad:
    """Parse, rescale, drop rows with missing values in the selected
    columns, then validate."""
    path = Path(path)
    transforms = spec.transforms or {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise MpblError(f"{path}: empty file, header row required")
        for col in (spec.response, *spec.covariates):
            if col not in reader.fieldnames:
                raise MpblError(f"{path}: unknown column {col!r}; "
                                f"available: {reader.fieldnames}")
        y_rows: list[float] = []
        x_rows: list[list[float]] = []
        dropped = 0
        total = 0
        for line_no, row in enumerate(reader, start=2):
            total += 1
            cells = [row[c] for c in (spec.response, *spec.covariates)]
            if any(c is None or c.strip().lower() in _MISSING_TOKENS for c in cells):
                dropped += 1
                continue
            values = []
            for col, cell in zip((spec.response, *spec.covariates), cells):
                try:
                    v = float(cell)
                except ValueError:
                    raise MpblError(f"{path}: unparseable value {cell!r} in column "
                                    f"{col!r} at line {line_no}") from None
                values.append(v * transforms.get(col, 1.0))
            y_rows.append(values[0] + spec.response_offset)
            x_rows.append(values[1:])
    if not y_rows:
        raise MpblError(f"{path}: no usable rows after dropping {dropped} of {total}")
    return CsvLoad(dataset=validate(np.array(y_rows), np.array(x_rows)),
                   dropped=dropped, total=total)


def export_residual_qq(data: Dataset, fit: FitResult, path) -> Path:
    """CSV of standardized sorted residuals against normal quantiles.

    Residuals are y^(lam) - x' beta - gamma at the fitted parameters, scaled
    by their sample SD; plotting positions are (i - 0.5)/n.
    """
    if data.n < 3:
        raise MpblError(f"need n >= 3 for residual standardization, got n={data.n}")
    resid = boxcox(data.y, fit.theta_hat.lam) - data.x @ fit.theta_hat.beta \
        - fit.gamma_hat
    sd = float(np.std(resid, ddof=1))
    if sd == 0.0:
        raise MpblError("residuals are constant; nothing to plot")
    sorted_resid = np.sort(resid) / sd
    theo = norm_ppf((np.arange(1, data.n + 1) - 0.5) / data.n)
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sorted_residual", "theoretical_normal_quantile"])
        for r, t in zip(sorted_resid, theo):
            writer.writerow([repr(float(r)), repr(float(t))])
    return path


def fit_result_to_dict(fit: FitResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "fit_result",
        "method": fit.method,
        "lambda_hat": fit.theta_hat.lam,
        "beta_hat": [float(b) for b in fit.theta_hat.beta],
        "gamma_hat": fit.gamma_hat,
        "objective": fit.objective,
        "converged": fit.converged,
        "n_obj_evals": fit.n_obj_evals,
        "lambda_grid_trace": [[l, v] for l, v in fit.lambda_grid_trace],
        "diagnostics": {k: float(v) for k, v in fit.diagnostics.items()},
    }


def fit_result_from_dict(obj: dict) -> FitResult:
    return FitResult(
        theta_hat=Theta(lam=obj["lambda_hat"], beta=np.array(obj["beta_hat"])),
        gamma_hat=obj["gamma_hat"],
        objective=obj["objective"],
        method=obj["method"],
        lambda_grid_trace=tuple((l, v) for l, v in obj["lambda_grid_trace"]),
        converged=obj["converged"],
        n_obj_evals=obj["n_obj_evals"],
        diagnostics=dict(obj.get("diagnostics", {})),
    )


def bootstrap_result_to_dict(res: BootstrapResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "bootstrap_result",
        "point": fit_result_to_dict(res.point),
        "param_names": list(res.param_names),
        "bsd": [float(v) for v in res.bsd],
        "bci": [[lo, hi] for lo, hi in res.bci],
        "b": res.b,
        "failures": res.failures,
        "level": res.level,
        "seed": res.seed,
        "quantile_rule": QUANTILE_RULE,
    }


def mc_summary_to_dict(summary: McSummary) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "mc_summary",
        "model_id": summary.spec.model_id,
        "error_dist": summary.spec.error_dist,
        "n": summary.spec.n,
        "reps": summary.spec.reps,
        "seed": summary.spec.seed,
        "mse_scale": summary.mse_scale,
        "reps_done": summary.reps_done,
        "redraws": summary.redraws,
        "wall_time_s": summary.wall_time,
        "rows": [
            {"method": m, "parameter": param,
             "bias": cell["bias"], "mse_scaled": cell["mse_scaled"]}
            for m in summary.methods
            for param, cell in summary.stats[m].items()
        ],
    }


def to_canonical_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _result_to_dict(result) -> dict:
    if isinstance(result, FitResult):
        return fit_result_to_dict(result)
    if isinstance(result, BootstrapResult):
        return bootstrap_result_to_dict(result)
    if isinstance(result, McSummary):
        return mc_summary_to_dict(result)
    raise TypeError(f"cannot serialize {type(result).__name__}")


def _write_csv_rows(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_results(result, path, format: str = "json") -> Path:
    """Serialize a fit, bootstrap, or simulation summary to disk."""
    path = Path(path)
    if format == "json":
        path.write_text(to_canonical_json(_result_to_dict(result)))
        return path
    if format != "csv":
        raise ValueError(f"format must be 'json' or 'csv', got {format!r}")

    if isinstance(result, FitResult):
        names = ["lambda"] + [f"beta{j + 1}" for j in range(len(result.theta_hat.beta))]
        values = [result.theta_hat.lam, *result.theta_hat.beta, result.gamma_hat]
        rows = [(n, repr(float(v))) for n, v in zip(names + ["gamma"], values)]
        _write_csv_rows(path, ["parameter", "estimate"], rows)
    elif isinstance(result, BootstrapResult):
        est = [result.point.theta_hat.lam, *result.point.theta_hat.beta]
        rows = [(name, repr(float(e)), repr(float(sd)), repr(lo), repr(hi))
                for name, e, sd, (lo, hi)
                in zip(result.param_names, est, result.bsd, result.bci)]
        _write_csv_rows(path, ["parameter", "est", "bsd", "bci_lo", "bci_hi"], rows)
    elif isinstance(result, McSummary):
        rows = [(r["method"], r["parameter"], repr(r["bias"]), repr(r["mse_scaled"]))
                for r in mc_summary_to_dict(result)["rows"]]
        _write_csv_rows(path, ["method", "parameter", "bias", "mse_scaled"], rows)
    else:
        raise TypeError(f"cannot serialize {type(result).__name__}")
    return path
