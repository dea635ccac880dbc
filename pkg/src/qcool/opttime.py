"""Optimal cycle times.

The protocol works best when the vacuum stays put: the cycle time should
maximise |lambda_{0,d}^k(t)|, the modulus of the effective-operator entry
that multiplies the vacuum.  For k <= 2 the maximum is exact and known in
closed form; for larger k it is found numerically on a search window.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from numpy.polynomial import hermite_e
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import minimize_scalar

from .errors import CheckFailedError, SearchFailureError

ANALYTIC_TOPT = {
    0: np.pi / 2,
    1: np.pi,
    2: 2 * np.pi / np.sqrt(3),
}


@dataclass
class OptTimeResult:
    t_opt: float
    residual: float            # 1 - |lambda_0| at t_opt
    search_window: Tuple[float, float]
    method: str                # "analytic" or "numeric"


@lru_cache(maxsize=64)
def _vacuum_modes(k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenfrequencies w_j and weights c_j with
    lambda_0(t) = exp(-i k t) * sum_j c_j exp(-i w_j t).

    The excitation block containing |0>|k> is tridiagonal with zero
    diagonal and off-diagonal sqrt(k), ..., sqrt(1); the weights are the
    squared |k>-components of its eigenvectors."""
    if k == 0:
        return np.zeros(1), np.ones(1)
    off = np.sqrt(k - np.arange(k))
    w, v = eigh_tridiagonal(np.zeros(k + 1), off)
    return w, v[k] ** 2


def vacuum_lambda(d: int, k: int, t) -> np.ndarray:
    """|lambda_{0,d}^k(t)|, vectorised over t.  Independent of d for
    0 <= k <= d-1 (the block only reaches regulator level k)."""
    if not (0 <= k <= d - 1):
        raise ValueError(f"need 0 <= k <= d-1, got k={k}, d={d}")
    t = np.asarray(t, dtype=float)
    w, c = _vacuum_modes(k)
    return np.abs(np.exp(-1j * np.outer(t, w)) @ c).reshape(t.shape)


def analytic_topt(k: int) -> OptTimeResult:
    """Closed-form optimum, available for k <= 2."""
    if k not in ANALYTIC_TOPT:
        raise ValueError(f"no closed-form optimal time for k={k}")
    t = ANALYTIC_TOPT[k]
    res = float(1.0 - vacuum_lambda(k + 1, k, np.array([t]))[0])
    return OptTimeResult(t, res, (t, t), "analytic")


def local_optima(d: int, k: int, window: Tuple[float, float] = (0.0, 250.0),
                 grid_step: float = 1e-3) -> List[Tuple[float, float]]:
    """(t, residual) at every refined local maximum of |lambda_0| in the
    window, in increasing t order."""
    lo, hi = window
    if not (hi > lo >= 0.0):
        raise ValueError("bad search window")
    t = np.arange(lo, hi + grid_step, grid_step)
    mag = vacuum_lambda(d, k, t)
    peaks = np.nonzero((mag[1:-1] >= mag[:-2]) & (mag[1:-1] > mag[2:]))[0] + 1
    out = []
    for p in peaks:
        a, b = t[p - 1], t[p + 1]
        r = minimize_scalar(lambda x: 1.0 - float(vacuum_lambda(d, k, np.array([x]))[0]),
                            bounds=(a, b), method="bounded",
                            options={"xatol": 1e-12})
        out.append((float(r.x), float(r.fun)))
    return out


def solve_topt(d: int, k: int, window: Tuple[float, float] = (0.0, 250.0),
               residual_tol: float = 1e-4,
               grid_step: float = 1e-3) -> OptTimeResult:
    """Smallest in-window time with 1 - |lambda_0| below residual_tol.

    Raises SearchFailureError carrying the best optimum found when no
    candidate is admissible."""
    cands = local_optima(d, k, window, grid_step)
    if not cands:
        raise SearchFailureError(
            f"no local optimum of |lambda_0| in window {window}",
            best_t=None, best_residual=None)
    for t, res in cands:
        if res <= residual_tol:
            return OptTimeResult(t, res, window, "numeric")
    best = min(cands, key=lambda c: c[1])
    raise SearchFailureError(
        f"no optimum with residual <= {residual_tol:g} in window {window}; "
        f"best residual {best[1]:.3e} at t = {best[0]:.6f}",
        best_t=best[0], best_residual=best[1])


def hermite_structure_check(d: int, residual_tol: float = 1e-6,
                            t_max: float = 20.0, n_samples: int = 4001) -> float:
    """Verify that exp(i(d-1)t) * lambda_{0,d}^{d-1}(t) is a real weighted
    sum of d cosines at the roots of the probabilists' Hermite polynomial
    He_d.  Returns the relative fit residual; raises CheckFailedError when
    it exceeds residual_tol."""
    if not (2 <= d <= 8):
        raise ValueError("supported for 2 <= d <= 8")
    t = np.linspace(0.0, t_max, n_samples)
    y = np.exp(1j * (d - 1) * t) * _vacuum_series(d - 1, t)
    if np.max(np.abs(y.imag)) > 1e-9:
        raise CheckFailedError("phase-corrected vacuum amplitude is not real",
                               residual=float(np.max(np.abs(y.imag))))
    roots = hermite_e.hermegauss(d)[0]
    a = np.cos(np.outer(t, roots))
    coef, *_ = np.linalg.lstsq(a, y.real, rcond=None)
    res = float(np.linalg.norm(y.real - a @ coef) / np.linalg.norm(y.real))
    if res > residual_tol:
        raise CheckFailedError(
            f"cosine fit residual {res:.3e} above {residual_tol:g}",
            residual=res)
    return res


def _vacuum_series(k: int, t: np.ndarray) -> np.ndarray:
    w, c = _vacuum_modes(k)
    return (np.exp(-1j * np.outer(t, w)) @ c) * np.exp(-1j * k * t)
