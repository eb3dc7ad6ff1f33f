"""Hot numeric kernels: numba-compiled with a pure-numpy fallback.

Backend selection happens once at import. Set ``MPBL_BACKEND=numpy`` to
force the fallback, ``MPBL_BACKEND=numba`` to require the compiled path
(import error if numba is missing); unset, the compiled path is used
whenever numba imports. Both implementations are always importable for
side-by-side testing and benchmarking; the flag only picks the default
aliases used by the estimators.

The kernels:

- pairwise profile binomial log-likelihood of the transformation model,
  evaluated in O(n^2) per call via a sorted-merge over residuals and a
  precomputed table of clamped log-CDF values,
- Jaeckel rank dispersion (Wilcoxon scores) for the rank-based start,
- a Nelder-Mead simplex driver specialized to those two objectives so the
  whole inner optimization runs without leaving compiled code,
- the minimum-distance criterion S_n of the Foster-style baseline.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "HAVE_NUMBA", "USE_NUMBA", "BACKEND",
    "log_cdf_tables", "pair_tables", "wilcoxon_scores",
    "loglik", "rank_dispersion", "foster_sn", "minimize_payload",
    "OBJ_NEG_LOGLIK", "OBJ_RANK_DISPERSION",
]

_choice = os.environ.get("MPBL_BACKEND", "").strip().lower()
if _choice not in ("", "numba", "numpy"):
    raise ValueError(f"MPBL_BACKEND must be 'numba' or 'numpy', got {_choice!r}")

try:
    from numba import njit as _njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False
    if _choice == "numba":
        raise

    def _njit(**_kwargs):
        def wrap(func):
            return func
        return wrap

USE_NUMBA = HAVE_NUMBA and _choice != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"

OBJ_NEG_LOGLIK = 0
OBJ_RANK_DISPERSION = 1

# Initial simplex: perturb each coordinate by 5% (or an absolute step at 0).
_SIMPLEX_REL = 0.05
_SIMPLEX_ABS = 0.00025


# ---------------------------------------------------------------------------
# shared precomputations (plain numpy, used by both backends)

def log_cdf_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """log F and log(1-F) for every reachable ECDF value c/n, c = 0..n.

    F is the count/n clamped into [n^-2, 1 - n^-2]; tabulating both logs
    turns each likelihood term into a table lookup.
    """
    lo = 1.0 / (n * n)
    f = np.minimum(np.maximum(np.arange(n + 1) / n, lo), 1.0 - lo)
    return np.log(f), np.log1p(-f)


def pair_tables(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort permutation of y and, per row i, the first sorted slot with
    y_sorted >= y_i.

    The indicator I(y_i <= y_j) is 1 exactly for the sorted slots at or past
    that position, and the permutation also sorts y^(lam) for every lam since
    the transform is increasing.
    """
    order = np.argsort(y, kind="stable")
    y_sorted = y[order]
    first_ge = np.searchsorted(y_sorted, y, side="left").astype(np.int64)
    return order, first_ge


def wilcoxon_scores(n: int) -> np.ndarray:
    """Centered Wilcoxon scores sqrt(12) * (k/(n+1) - 1/2), k = 1..n."""
    k = np.arange(1, n + 1)
    return math.sqrt(12.0) * (k / (n + 1.0) - 0.5)


# ---------------------------------------------------------------------------
# profile binomial log-likelihood

@_njit(cache=True, nogil=True)
def _loglik_nb(yl, yl_sorted, first_ge, x, beta, log_f, log_1mf):
    n = yl.shape[0]
    xb = np.dot(x, beta)
    v = np.empty(n)
    for i in range(n):
        v[i] = yl[i] - xb[i]
    vs = np.sort(v)
    total = 0.0
    comp = 0.0  # Kahan carry
    for i in range(n):
        b = xb[i]
        fg = first_ge[i]
        k = 0
        for jj in range(n):
            q = yl_sorted[jj] - b
            while k < n and vs[k] <= q:
                k += 1
            if jj >= fg:
                term = log_f[k]
            else:
                term = log_1mf[k]
            t = term - comp
            s = total + t
            comp = (s - total) - t
            total = s
    return total


def _loglik_np(yl, yl_sorted, first_ge, x, beta, log_f, log_1mf):
    n = yl.shape[0]
    xb = x @ beta
    vs = np.sort(yl - xb)
    # query grid t[i, jj] = yl_sorted[jj] - xb[i]; counts by one batched search
    q = yl_sorted[None, :] - xb[:, None]
    c = np.searchsorted(vs, q.ravel(), side="right").reshape(n, n)
    success = np.arange(n)[None, :] >= first_ge[:, None]
    terms = np.where(success, log_f[c], log_1mf[c])
    return float(terms.sum())


# ---------------------------------------------------------------------------
# Jaeckel rank dispersion

@_njit(cache=True, nogil=True)
def _dispersion_nb(yl, x, beta, scores):
    n = yl.shape[0]
    e = np.empty(n)
    xb = np.dot(x, beta)
    for i in range(n):
        e[i] = yl[i] - xb[i]
    idx = np.argsort(e)
    total = 0.0
    for k in range(n):
        total += scores[k] * e[idx[k]]
    return total


def _dispersion_np(yl, x, beta, scores):
    e = yl - x @ beta
    return float(scores @ np.sort(e))


# ---------------------------------------------------------------------------
# Nelder-Mead, specialized to the two objectives above so the numba path
# never crosses back into the interpreter mid-optimization

@_njit(cache=True, nogil=True)
def _objective_nb(code, beta, yl, yl_sorted, first_ge, x, log_f, log_1mf, scores):
    if code == OBJ_NEG_LOGLIK:
        r = -_loglik_nb(yl, yl_sorted, first_ge, x, beta, log_f, log_1mf)
    else:
        r = _dispersion_nb(yl, x, beta, scores)
    if not math.isfinite(r):
        return 1e300  # steer the simplex away from overflow regions
    return r


@_njit(cache=True, nogil=True)
def _nm_payload_nb(code, x0, xtol, ftol, max_iter, restarts,
                   yl, yl_sorted, first_ge, x, log_f, log_1mf, scores):
    p = x0.shape[0]
    nv = p + 1
    xbest = x0.copy()
    fbest = _objective_nb(code, xbest, yl, yl_sorted, first_ge, x, log_f, log_1mf, scores)
    nevals = 1
    converged = False

    for _run in range(restarts + 1):
        sim = np.empty((nv, p))
        fsim = np.empty(nv)
        sim[0] = xbest
        fsim[0] = fbest
        for kk in range(p):
            for j in range(p):
                sim[kk + 1, j] = xbest[j]
            if sim[kk + 1, kk] != 0.0:
                sim[kk + 1, kk] *= 1.0 + _SIMPLEX_REL
            else:
                sim[kk + 1, kk] = _SIMPLEX_ABS
            fsim[kk + 1] = _objective_nb(code, sim[kk + 1].copy(), yl, yl_sorted,
                                         first_ge, x, log_f, log_1mf, scores)
            nevals += 1

        run_converged = False
        xtmp = np.empty(p)
        for _it in range(max_iter):
            # stable insertion sort keeps tie handling deterministic
            for i in range(1, nv):
                fi = fsim[i]
                for j in range(p):
                    xtmp[j] = sim[i, j]
                j2 = i - 1
                while j2 >= 0 and fsim[j2] > fi:
                    fsim[j2 + 1] = fsim[j2]
                    sim[j2 + 1] = sim[j2]
                    j2 -= 1
                fsim[j2 + 1] = fi
                for j in range(p):
                    sim[j2 + 1, j] = xtmp[j]

            diam = 0.0
            fspread = 0.0
            for i in range(1, nv):
                for j in range(p):
                    d = abs(sim[i, j] - sim[0, j])
                    if d > diam:
                        diam = d
                df = abs(fsim[i] - fsim[0])
                if df > fspread:
                    fspread = df
            if diam <= xtol or fspread <= ftol:
                run_converged = True
                break

            xbar = np.zeros(p)
            for i in range(p):
                for j in range(p):
                    xbar[j] += sim[i, j]
            for j in range(p):
                xbar[j] /= p

            xr = np.empty(p)
            for j in range(p):
                xr[j] = 2.0 * xbar[j] - sim[nv - 1, j]
            fr = _objective_nb(code, xr, yl, yl_sorted, first_ge, x, log_f, log_1mf, scores)
            nevals += 1

            if fr < fsim[0]:
                xe = np.empty(p)
                for j in range(p):
                    xe[j] = 3.0 * xbar[j] - 2.0 * sim[nv - 1, j]
                fe = _objective_nb(code, xe, yl, yl_sorted, first_ge, x,
                                   log_f, log_1mf, scores)
                nevals += 1
                if fe < fr:
                    sim[nv - 1] = xe
                    fsim[nv - 1] = fe
                else:
                    sim[nv - 1] = xr
                    fsim[nv - 1] = fr
            elif fr < fsim[nv - 2]:
                sim[nv - 1] = xr
                fsim[nv - 1] = fr
            else:
                shrink = False
                if fr < fsim[nv - 1]:
                    xc = np.empty(p)
                    for j in range(p):
                        xc[j] = 1.5 * xbar[j] - 0.5 * sim[nv - 1, j]
                    fc = _objective_nb(code, xc, yl, yl_sorted, first_ge, x,
                                       log_f, log_1mf, scores)
                    nevals += 1
                    if fc <= fr:
                        sim[nv - 1] = xc
                        fsim[nv - 1] = fc
                    else:
                        shrink = True
                else:
                    xcc = np.empty(p)
                    for j in range(p):
                        xcc[j] = 0.5 * xbar[j] + 0.5 * sim[nv - 1, j]
                    fcc = _objective_nb(code, xcc, yl, yl_sorted, first_ge, x,
                                        log_f, log_1mf, scores)
                    nevals += 1
                    if fcc < fsim[nv - 1]:
                        sim[nv - 1] = xcc
                        fsim[nv - 1] = fcc
                    else:
                        shrink = True
                if shrink:
                    for i in range(1, nv):
                        for j in range(p):
                            sim[i, j] = sim[0, j] + 0.5 * (sim[i, j] - sim[0, j])
                        fsim[i] = _objective_nb(code, sim[i].copy(), yl, yl_sorted,
                                                first_ge, x, log_f, log_1mf, scores)
                        nevals += 1

        # final ordering of this run
        best_i = 0
        for i in range(1, nv):
            if fsim[i] < fsim[best_i]:
                best_i = i
        if fsim[best_i] <= fbest:
            fbest = fsim[best_i]
            xbest = sim[best_i].copy()
        converged = run_converged

    return xbest, fbest, nevals, converged


def _nm_generic_py(fun, x0, xtol, ftol, max_iter, restarts):
    """Mirror of the compiled simplex driver for arbitrary callables."""
    p = x0.shape[0]
    nv = p + 1
    xbest = np.array(x0, dtype=np.float64)
    fbest = fun(xbest)
    nevals = 1
    converged = False

    for _run in range(restarts + 1):
        sim = np.empty((nv, p))
        fsim = np.empty(nv)
        sim[0] = xbest
        fsim[0] = fbest
        for kk in range(p):
            sim[kk + 1] = xbest
            if sim[kk + 1, kk] != 0.0:
                sim[kk + 1, kk] *= 1.0 + _SIMPLEX_REL
            else:
                sim[kk + 1, kk] = _SIMPLEX_ABS
            fsim[kk + 1] = fun(sim[kk + 1])
            nevals += 1

        run_converged = False
        for _it in range(max_iter):
            order = np.argsort(fsim, kind="stable")
            sim = sim[order]
            fsim = fsim[order]

            diam = np.max(np.abs(sim[1:] - sim[0])) if p else 0.0
            fspread = np.max(np.abs(fsim[1:] - fsim[0]))
            if diam <= xtol or fspread <= ftol:
                run_converged = True
                break

            xbar = sim[:-1].mean(axis=0)
            xr = 2.0 * xbar - sim[-1]
            fr = fun(xr)
            nevals += 1
            if fr < fsim[0]:
                xe = 3.0 * xbar - 2.0 * sim[-1]
                fe = fun(xe)
                nevals += 1
                if fe < fr:
                    sim[-1], fsim[-1] = xe, fe
                else:
                    sim[-1], fsim[-1] = xr, fr
            elif fr < fsim[-2]:
                sim[-1], fsim[-1] = xr, fr
            else:
                shrink = False
                if fr < fsim[-1]:
                    xc = 1.5 * xbar - 0.5 * sim[-1]
                    fc = fun(xc)
                    nevals += 1
                    if fc <= fr:
                        sim[-1], fsim[-1] = xc, fc
                    else:
                        shrink = True
                else:
                    xcc = 0.5 * xbar + 0.5 * sim[-1]
                    fcc = fun(xcc)
                    nevals += 1
                    if fcc < fsim[-1]:
                        sim[-1], fsim[-1] = xcc, fcc
                    else:
                        shrink = True
                if shrink:
                    for i in range(1, nv):
                        sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
                        fsim[i] = fun(sim[i])
                        nevals += 1

        best_i = int(np.argmin(fsim))
        if fsim[best_i] <= fbest:
            fbest = float(fsim[best_i])
            xbest = sim[best_i].copy()
        converged = run_converged

    return xbest, fbest, nevals, converged


def _nm_payload_np(code, x0, xtol, ftol, max_iter, restarts,
                   yl, yl_sorted, first_ge, x, log_f, log_1mf, scores):
    if code == OBJ_NEG_LOGLIK:
        def raw(beta):
            return -_loglik_np(yl, yl_sorted, first_ge, x, beta, log_f, log_1mf)
    else:
        def raw(beta):
            return _dispersion_np(yl, x, beta, scores)

    def fun(beta):
        r = raw(beta)
        return r if math.isfinite(r) else 1e300

    return _nm_generic_py(fun, x0, xtol, ftol, max_iter, restarts)


# ---------------------------------------------------------------------------
# Foster minimum-distance criterion

@_njit(cache=True, nogil=True)
def _foster_sn_nb(y, nodes, tl_minus_gamma, xb, resid_sorted, weights):
    n = y.shape[0]
    m = nodes.shape[0]
    total = 0.0
    for i in range(n):
        yi = y[i]
        bi = xb[i]
        acc = 0.0
        for k in range(m):
            g = np.searchsorted(resid_sorted, tl_minus_gamma[k] - bi, side="right") / n
            ind = 1.0 if yi <= nodes[k] else 0.0
            d = ind - g
            acc += weights[k] * d * d
        total += acc
    return total / n


def _foster_sn_np(y, nodes, tl_minus_gamma, xb, resid_sorted, weights):
    n = y.shape[0]
    u = tl_minus_gamma[None, :] - xb[:, None]
    g = np.searchsorted(resid_sorted, u.ravel(), side="right").reshape(u.shape) / n
    ind = (y[:, None] <= nodes[None, :]).astype(np.float64)
    return float(((ind - g) ** 2 @ weights).sum() / n)


# ---------------------------------------------------------------------------
# default aliases

if USE_NUMBA:
    loglik = _loglik_nb
    rank_dispersion = _dispersion_nb
    foster_sn = _foster_sn_nb
    _nm_payload = _nm_payload_nb
else:
    loglik = _loglik_np
    rank_dispersion = _dispersion_np
    foster_sn = _foster_sn_np
    _nm_payload = _nm_payload_np


def minimize_payload(code, x0, xtol, ftol, max_iter, restarts, payload):
    """Run the specialized simplex minimizer on the selected backend.

    payload is (yl, yl_sorted, first_ge, x, log_f, log_1mf, scores);
    returns (x_min, f_min, n_evals, converged).
    """
    x_min, f_min, n_evals, converged = _nm_payload(
        code, np.ascontiguousarray(x0, dtype=np.float64),
        xtol, ftol, max_iter, restarts, *payload)
    return x_min, float(f_min), int(n_evals), bool(converged)
