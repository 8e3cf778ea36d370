"""Seeded multistart Nelder-Mead search.

Every start gets a cheap simplex run; the best few are polished with tight
tolerances and repeated simplex restarts (a simplex that collapses early in
high dimension usually moves again once rebuilt around its best vertex).
"""

from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import OptimizerWarning

log = logging.getLogger(__name__)

THREADS_ENV = "WGHZ_THREADS"


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SearchResult:
    x: np.ndarray
    fun: float
    converged: bool
    nfev: int
    n_starts: int


def _run(fun, x0, opts):
    res = minimize(fun, x0, method="Nelder-Mead", options=dict(adaptive=True, **opts))
    return res


def multistart_minimize(
    fun: Callable[[np.ndarray], float],
    starts: Sequence[np.ndarray],
    *,
    coarse_fev: int = 1500,
    coarse_xatol: float = 1e-4,
    coarse_fatol: float = 1e-8,
    n_polish: int = 3,
    polish_rounds: int = 4,
    polish_fev: int = 20000,
    fatol: float = 1e-9,
    label: str = "search",
) -> SearchResult:
    """Minimize ``fun`` from every start; ties keep the earliest start so results are replayable."""
    starts = [np.asarray(s, dtype=float) for s in starts]
    coarse = dict(maxfev=coarse_fev, xatol=coarse_xatol, fatol=coarse_fatol)
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(lambda s: _run(fun, s, coarse), starts))
    else:
        results = []
        for i, s in enumerate(starts):
            results.append(_run(fun, s, coarse))
            if (i + 1) % 25 == 0:
                log.info("%s: %d/%d starts, best %.9g", label, i + 1, len(starts), min(r.fun for r in results))
    nfev = sum(r.nfev for r in results)
    order = sorted(range(len(results)), key=lambda i: (results[i].fun, i))

    best_x, best_f, converged = None, np.inf, False
    fine = dict(maxfev=polish_fev, xatol=1e-10, fatol=fatol)
    for i in order[:n_polish]:
        x, f = results[i].x, results[i].fun
        ok = False
        for _ in range(polish_rounds):
            r = _run(fun, x, fine)
            nfev += r.nfev
            improved = f - r.fun
            if r.fun < f:
                x, f = r.x, r.fun
            if r.success and improved <= fatol:
                ok = True
                break
        if f < best_f:
            best_x, best_f, converged = x, f, ok
    if not converged:
        warnings.warn(f"{label}: polish did not converge within budget; reporting best found", OptimizerWarning)
    log.info("%s: best %.12g after %d evaluations", label, best_f, nfev)
    return SearchResult(np.asarray(best_x), float(best_f), converged, nfev, len(starts))


def random_sphere_angles(rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` uniformly distributed points on S^2 as ``(theta, phi)`` rows."""
    theta = np.arccos(rng.uniform(-1.0, 1.0, count))
    phi = rng.uniform(0.0, 2 * np.pi, count)
    return np.column_stack([theta, phi])
