"""Box-constrained Nelder-Mead simplex minimisation.

Every trial point is clipped into ``[lo, hi]`` before it is evaluated, so
the returned minimiser always lies inside the box.  Iteration stops once
the spread of objective values across the simplex drops below ``tol``
(converged) or after ``max_iter`` iterations in total (not converged).

Clipping can flatten the simplex against a face of the box, where it
"converges" away from the constrained minimum.  A converged run that
clipped any trial point is therefore restarted from its best vertex with
a fresh simplex until a restart no longer improves the value by ``tol``.
"""

from __future__ import annotations

from collections.abc import Callable
from typing import NamedTuple

import numpy as np

__all__ = ["SimplexResult", "minimize"]

REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5


class SimplexResult(NamedTuple):
    x: np.ndarray
    fun: float
    n_iter: int
    n_eval: int
    converged: bool


def minimize(
    f: Callable[[np.ndarray], float],
    x0,
    step,
    lo,
    hi,
    max_iter: int = 2000,
    tol: float = 1e-9,
    xtol: float = 1e-13,
    max_restarts: int = 5,
) -> SimplexResult:
    """Minimise ``f`` starting from ``x0``.

    Parameters
    ----------
    f : callable
        Objective; may return ``inf`` for infeasible points.
    x0 : array_like
        Starting vertex, clipped into the box.
    step : array_like
        Per-coordinate offsets used to build the initial simplex.  A
        vertex that would leave the box steps the other way instead.
    lo, hi : array_like
        Box bounds.
    max_iter : int
        Iteration cap; ``0`` returns the evaluated starting point with
        ``converged=False``.
    tol : float
        Convergence threshold on ``max(f) - min(f)`` over the simplex.
    xtol : float
        A simplex whose vertices all lie within ``xtol`` of the best one
        has collapsed and counts as converged.
    max_restarts : int
        Cap on restarts after convergence.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,))
    step = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    if np.any(lo > hi):
        raise ValueError("simplex box needs lo <= hi")
    x0 = np.clip(x0, lo, hi)
    n_eval = 0

    def call(x):
        nonlocal n_eval
        n_eval += 1
        return float(f(x))

    f0 = call(x0)
    if max_iter <= 0:
        return SimplexResult(x0, f0, 0, n_eval, False)

    x, fx, used, converged, clipped = _run(call, x0, f0, step, lo, hi, max_iter, tol, xtol)
    for _ in range(max_restarts):
        if not (converged and clipped) or used >= max_iter:
            break
        x1, f1, it, converged, clipped = _run(call, x, fx, step, lo, hi, max_iter - used, tol, xtol)
        used += it
        improved = f1 < fx - tol
        if f1 < fx:
            x, fx = x1, f1
        if not improved:
            break
    return SimplexResult(x, fx, used, n_eval, converged)


def _run(call, x0, f0, step, lo, hi, max_iter, tol, xtol):
    n = x0.size
    clipped = False

    def clip(v):
        nonlocal clipped
        c = np.clip(v, lo, hi)
        clipped = clipped or not np.array_equal(c, v)
        return c

    sim = np.empty((n + 1, n))
    fs = np.empty(n + 1)
    sim[0], fs[0] = x0, f0
    for i in range(n):
        v = x0.copy()
        v[i] += step[i]
        if v[i] > hi[i]:
            v[i] = x0[i] - step[i]
        v = np.clip(v, lo, hi)
        sim[i + 1], fs[i + 1] = v, call(v)

    converged = False
    it = 0
    while it < max_iter:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        if np.isfinite(fs[-1]) and fs[-1] - fs[0] < tol:
            converged = True
            break
        if np.max(np.abs(sim[1:] - sim[0])) < xtol:
            converged = bool(np.isfinite(fs[0]))
            break
        it += 1
        centroid = sim[:-1].mean(axis=0)
        xr = clip(centroid + REFLECT * (centroid - sim[-1]))
        fr = call(xr)
        if fr < fs[0]:
            xe = clip(centroid + EXPAND * (xr - centroid))
            fe = call(xe)
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = clip(centroid + CONTRACT * (xr - centroid))
            fc = call(xc)
            if fc <= fr:
                sim[-1], fs[-1] = xc, fc
                continue
        else:
            xc = clip(centroid + CONTRACT * (sim[-1] - centroid))
            fc = call(xc)
            if fc < fs[-1]:
                sim[-1], fs[-1] = xc, fc
                continue
        for i in range(1, n + 1):
            sim[i] = sim[0] + SHRINK * (sim[i] - sim[0])
            fs[i] = call(sim[i])

    best = int(np.argmin(fs))
    return sim[best].copy(), float(fs[best]), it, converged, clipped
