"""Single-window calibration of the LPPL variants.

For fixed nonlinear parameters (``tc, m, omega`` plus ``delta_t,
delta_omega`` for Landau) every variant is linear in its remaining
coefficients once the oscillation is expanded as
``C cos(x + phi) = C1 cos x + C2 sin x``.  Those coefficients are solved
exactly by least squares ("slaved"), which leaves a 3- or 5-dimensional
search.  The search is a grid multistart followed by box-constrained
simplex refinement of the best grid cells.

Back-mapping of the oscillation coefficients (simple and Landau)::

    C   = sqrt(C1**2 + C2**2) / |B|
    phi = atan2(-C2 * sign(B), C1 * sign(B))

so ``C >= 0`` always and the sign of ``B`` is absorbed into ``phi``.  For
the Weierstrass harmonics ``C_n = sqrt(a_n**2 + b_n**2)`` and
``phi_n = atan2(-b_n, a_n)``.

Three boxes are involved.  ``FitConfig.bounds`` are the qualification
bounds (literature ranges).  ``GridSpec.box`` is spanned by the
multistart grid and defaults to the same ranges; it is kept separate so
that tightening the qualification bounds never changes the candidates.
``FitConfig.search`` is a wider box that confines refinement, so a fit
that wanders out of the literature ranges is reported as such instead of
being pinned to the edge.  All ``tc`` intervals are offsets in years
after the last observation of the window.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from . import simplex
from .errors import DegenerateDesignError, InsufficientDataError, NoCandidateError
from .models import (
    KINDS,
    LandauParams,
    Params,
    SimpleParams,
    WeierstrassParams,
    residuals,
)
from .timeseries import (
    DAYS_PER_YEAR,
    PriceSeries,
    TimeWindow,
    decimal_year,
    slice_window,
    to_log_price,
)

__all__ = [
    "QUALIFICATION_BOUNDS",
    "SEARCH_BOUNDS",
    "Bounds",
    "Candidate",
    "FitConfig",
    "FitResult",
    "GridSpec",
    "LinearSolution",
    "Qualification",
    "fit_arrays",
    "fit_window",
    "grid_multistart",
    "local_refine",
    "objective_rmse",
    "qualify_fit",
    "slave_linear_params",
]

MAX_CONDITION = 1e12
B_ZERO = 1e-9


@dataclass(frozen=True)
class Bounds:
    m: tuple[float, float] = (0.1, 0.9)
    omega: tuple[float, float] = (4.0, 15.0)
    tc: tuple[float, float] = (0.0, 1.0)
    delta_t: tuple[float, float] = (0.25, 16.0)
    delta_omega: tuple[float, float] = (-5.0, 5.0)

    def __post_init__(self):
        for f in fields(self):
            lo, hi = getattr(self, f.name)
            if not lo < hi:
                raise ValueError(f"bounds for {f.name} must satisfy lo < hi, got {(lo, hi)}")
            object.__setattr__(self, f.name, (float(lo), float(hi)))


QUALIFICATION_BOUNDS = Bounds()
SEARCH_BOUNDS = Bounds(
    m=(0.01, 0.99),
    omega=(1.0, 30.0),
    tc=(0.001, 2.0),
    delta_t=(0.05, 100.0),
    delta_omega=(-15.0, 15.0),
)


@dataclass(frozen=True)
class GridSpec:
    """Multistart grid: point counts per axis over the box ``box``."""

    n_tc: int = 20
    n_m: int = 8
    n_omega: int = 12
    n_delta_t: int = 5
    n_delta_omega: int = 5
    box: Bounds = QUALIFICATION_BOUNDS


@dataclass(frozen=True)
class FitConfig:
    bounds: Bounds = QUALIFICATION_BOUNDS
    search: Bounds = SEARCH_BOUNDS
    grid: GridSpec = GridSpec()
    top_k: int = 10
    max_iter: int = 2000
    tol: float = 1e-9
    min_points: int = 30
    harmonics: int = 3

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.top_k < 1 or self.harmonics < 1 or self.max_iter < 0:
            raise ValueError("top_k and harmonics must be >= 1, max_iter >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> FitConfig:
        d = dict(d)
        base = cls()

        def merge(obj, upd):
            out = {}
            for k, v in upd.items():
                cur = getattr(obj, k)
                if isinstance(v, dict):
                    out[k] = merge(cur, v)
                else:
                    out[k] = tuple(v) if isinstance(v, list) else v
            return replace(obj, **out)

        return merge(base, d)


# -- variants -------------------------------------------------------------


class _Variant:
    kind: str
    names: tuple[str, ...] = ("tc", "m", "omega")
    log_scaled: tuple[str, ...] = ()

    def n_linear(self) -> int:
        raise NotImplementedError

    def design(self, t, theta):
        """Design matrix; theta entries may carry leading batch axes."""
        raise NotImplementedError

    def build(self, theta, beta) -> Params:
        raise NotImplementedError

    def theta_of(self, p: Params) -> np.ndarray:
        return np.array([getattr(p, n) for n in self.names], dtype=float)


def _osc(B, c1, c2):
    r = math.hypot(c1, c2)
    if r == 0.0:
        return 0.0, 0.0
    if B == 0.0:
        return math.inf, math.atan2(-c2, c1)
    s = 1.0 if B > 0 else -1.0
    return r / abs(B), math.atan2(-c2 * s, c1 * s)


def _base(t, tc, m):
    tau = tc - t
    ln_tau = np.log(tau)
    return ln_tau, np.exp(m * ln_tau)


class _Simple(_Variant):
    kind = "simple"

    def n_linear(self):
        return 4

    def design(self, t, theta):
        tc, m, omega = theta[:3]
        ln_tau, f = _base(t, tc, m)
        w = omega * ln_tau
        return np.stack([np.ones_like(f), f, f * np.cos(w), f * np.sin(w)], axis=-1)

    def build(self, theta, beta):
        tc, m, omega = map(float, theta[:3])
        A, B, c1, c2 = map(float, beta)
        C, phi = _osc(B, c1, c2)
        return SimpleParams(tc, m, omega, phi, A, B, C)


class _Weierstrass(_Variant):
    kind = "weierstrass"

    def __init__(self, harmonics: int = 3):
        self.harmonics = harmonics

    def n_linear(self):
        return 2 + 2 * self.harmonics

    def design(self, t, theta):
        tc, m, omega = theta[:3]
        ln_tau, f = _base(t, tc, m)
        cols = [np.ones_like(f), f]
        for n in range(1, self.harmonics + 1):
            w = n * omega * ln_tau
            cols += [f * np.cos(w), f * np.sin(w)]
        return np.stack(cols, axis=-1)

    def build(self, theta, beta):
        tc, m, omega = map(float, theta[:3])
        A, B = float(beta[0]), float(beta[1])
        harmonics = []
        for a, b in np.asarray(beta[2:], dtype=float).reshape(-1, 2):
            harmonics.append((math.hypot(a, b), math.atan2(-b, a)))
        return WeierstrassParams(tc, m, omega, A, B, tuple(harmonics))


class _Landau(_Variant):
    kind = "landau"
    names = ("tc", "m", "omega", "delta_t", "delta_omega")
    log_scaled = ("delta_t",)

    def n_linear(self):
        return 4

    def design(self, t, theta):
        tc, m, omega, delta_t, delta_omega = theta
        tau = tc - t
        ln_tau = np.log(tau)
        crossover = np.log1p(np.exp(2.0 * m * (ln_tau - np.log(delta_t))))
        f = np.exp(m * ln_tau - 0.5 * crossover)
        w = omega * ln_tau + delta_omega / (2.0 * m) * crossover
        return np.stack([np.ones_like(f), f, f * np.cos(w), f * np.sin(w)], axis=-1)

    def build(self, theta, beta):
        tc, m, omega, delta_t, delta_omega = map(float, theta)
        A, B, c1, c2 = map(float, beta)
        C, phi = _osc(B, c1, c2)
        return LandauParams(tc, m, omega, phi, A, B, C, delta_t, delta_omega)


def _variant(kind: str, harmonics: int = 3) -> _Variant:
    if kind == "simple":
        return _Simple()
    if kind == "weierstrass":
        return _Weierstrass(harmonics)
    if kind == "landau":
        return _Landau()
    raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")


# -- linear sub-problem ---------------------------------------------------


class LinearSolution(NamedTuple):
    """Slaved coefficients in design order, the rmse and the mapped params.

    ``coef`` is ``(A, B, C1, C2)`` for simple/Landau and
    ``(A, B, a_1, b_1, ..., a_N, b_N)`` for Weierstrass.
    """

    coef: np.ndarray
    rmse: float
    params: Params


def _solve(X, y):
    n, p = X.shape
    if n < p:
        raise DegenerateDesignError(f"{n} observations cannot determine {p} linear parameters")
    if not np.all(np.isfinite(X)):
        raise DegenerateDesignError("non-finite design matrix")
    norms = np.sqrt(np.einsum("ij,ij->j", X, X))
    if np.any(norms == 0):
        raise DegenerateDesignError("design matrix has an all-zero column")
    Xs = X / norms
    beta, _, rank, sv = np.linalg.lstsq(Xs, y, rcond=None)
    if rank < p or sv[0] > MAX_CONDITION * sv[-1]:
        raise DegenerateDesignError(f"design condition number {sv[0] / sv[-1]:.3g} exceeds {MAX_CONDITION:g}")
    beta = beta / norms
    r = y - X @ beta
    return beta, math.sqrt(float(r @ r) / n)


def slave_linear_params(nonlinear, t, y, kind: str = "simple", harmonics: int = 3) -> LinearSolution:
    """Exact least-squares linear coefficients for fixed nonlinear ones.

    ``nonlinear`` is ``(tc, m, omega)`` or, for Landau,
    ``(tc, m, omega, delta_t, delta_omega)``.  Raises
    :class:`DegenerateDesignError` when the design condition number
    exceeds 1e12 or there are fewer points than coefficients.
    """
    var = _variant(kind, harmonics)
    theta = np.asarray(nonlinear, dtype=float)
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size and not theta[0] > t.max():
        raise DegenerateDesignError(f"tc = {theta[0]} must exceed the last time {t.max()}")
    beta, rmse = _solve(var.design(t, theta), y)
    return LinearSolution(beta, rmse, var.build(theta, beta))


def objective_rmse(params: Params, t, y) -> float:
    """Root-mean-square log-price residual."""
    r = residuals(params, t, y)
    return math.sqrt(float(np.mean(r * r)))


def _gram_rmse(G, rhs, yy, n):
    """rmse of many normal-equation systems ``G beta = rhs``; inf if degenerate.

    ``yy`` is the squared norm of the (centred) target, so the residual sum
    of squares is ``yy - beta . rhs``.
    """
    p = G.shape[-1]
    d = np.sqrt(np.einsum("...ii->...i", G))
    ok = np.all(np.isfinite(G), axis=(-2, -1)) & np.all(d > 0, axis=-1)
    d = np.where(ok[..., None], d, 1.0)
    Gs = G / (d[..., :, None] * d[..., None, :])
    rs = rhs / d
    Gs[~ok] = np.eye(p)
    ev = np.linalg.eigvalsh(Gs)
    # eigenvalues of the Gram matrix are squared singular values of the design
    ok &= ev[..., 0] * MAX_CONDITION**2 > ev[..., -1]
    ok &= ev[..., 0] > 64 * np.finfo(float).eps * ev[..., -1]
    Gs[~ok] = np.eye(p)
    beta = np.linalg.solve(Gs, rs[..., None])[..., 0]
    sse = np.maximum(yy - np.einsum("...p,...p->...", beta, rs), 0.0)
    return np.where(ok, np.sqrt(sse / n), np.inf)


def _separable_grid_rmse(t, y, tcs, ms, omegas, harmonics: int) -> np.ndarray:
    """Slaved rmse on the (tc, m, omega) grid for simple/Weierstrass models.

    ``tau^m`` depends on (tc, m) only and the oscillations on (tc, omega)
    only, so every Gram entry is a small matrix product per ``tc``.
    Returns an array of shape ``(len(tcs), len(ms), len(omegas))``.
    """
    n = t.size
    yc = y - y.mean()
    yy = float(yc @ yc)
    k = 2 * harmonics
    p = 2 + k
    out = np.empty((len(tcs), len(ms), len(omegas)))
    for i, tc in enumerate(tcs):
        ln_tau = np.log(tc - t)
        F = np.exp(np.outer(ms, ln_tau))  # (M, n)
        F2 = F * F
        W = np.outer(omegas, ln_tau)  # (K, n)
        osc = []
        for h in range(1, harmonics + 1):
            osc += [np.cos(h * W), np.sin(h * W)]
        G = np.empty((len(ms), len(omegas), p, p))
        rhs = np.empty((len(ms), len(omegas), p))
        G[..., 0, 0] = n
        G[..., 0, 1] = G[..., 1, 0] = F.sum(axis=1)[:, None]
        G[..., 1, 1] = F2.sum(axis=1)[:, None]
        rhs[..., 0] = yc.sum()
        rhs[..., 1] = (F @ yc)[:, None]
        Fy = F * yc
        for a in range(k):
            G[..., 0, 2 + a] = G[..., 2 + a, 0] = F @ osc[a].T
            G[..., 1, 2 + a] = G[..., 2 + a, 1] = F2 @ osc[a].T
            rhs[..., 2 + a] = Fy @ osc[a].T
            for b in range(a, k):
                G[..., 2 + a, 2 + b] = G[..., 2 + b, 2 + a] = F2 @ (osc[a] * osc[b]).T
        out[i] = _gram_rmse(G, rhs, yy, n)
    return out


def _landau_grid_rmse(t, y, tcs, ms, omegas, delta_ts, delta_omegas) -> np.ndarray:
    """Slaved rmse on the full Landau grid without explicit design matrices.

    For fixed ``(tc, m, delta_t)`` the envelope is fixed and the phase is
    linear in ``(omega, delta_omega)``.  Returns shape
    ``(len(tcs), len(ms), len(omegas), len(delta_ts), len(delta_omegas))``.
    """
    n = t.size
    yc = y - y.mean()
    yy = float(yc @ yc)
    ms = np.asarray(ms, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    delta_omegas = np.asarray(delta_omegas, dtype=float)
    out = np.empty((len(tcs), len(ms), len(delta_ts), len(omegas), len(delta_omegas)))
    for i, tc in enumerate(tcs):
        ln_tau = np.log(tc - t)
        # (M, D, n) crossover term and envelope
        cross = np.log1p(np.exp(2.0 * ms[:, None, None] * (ln_tau - np.log(delta_ts)[:, None])))
        F = np.exp(ms[:, None, None] * ln_tau - 0.5 * cross)
        # (M, D, K, E, n) phase
        W = omegas[:, None, None] * ln_tau + (delta_omegas[:, None] / (2.0 * ms[:, None, None, None, None])) * cross[:, :, None, None, :]
        c, s = np.cos(W), np.sin(W)
        F2 = F * F
        Fy = F * yc
        G = np.empty(out.shape[1:] + (4, 4))
        rhs = np.empty(out.shape[1:] + (4,))
        G[..., 0, 0] = n
        G[..., 0, 1] = G[..., 1, 0] = F.sum(axis=-1)[:, :, None, None]
        G[..., 1, 1] = F2.sum(axis=-1)[:, :, None, None]
        G[..., 0, 2] = G[..., 2, 0] = np.einsum("mdn,mdken->mdke", F, c)
        G[..., 0, 3] = G[..., 3, 0] = np.einsum("mdn,mdken->mdke", F, s)
        G[..., 1, 2] = G[..., 2, 1] = np.einsum("mdn,mdken->mdke", F2, c)
        G[..., 1, 3] = G[..., 3, 1] = np.einsum("mdn,mdken->mdke", F2, s)
        G[..., 2, 2] = np.einsum("mdn,mdken->mdke", F2, c * c)
        G[..., 2, 3] = G[..., 3, 2] = np.einsum("mdn,mdken->mdke", F2, c * s)
        G[..., 3, 3] = np.einsum("mdn,mdken->mdke", F2, s * s)
        rhs[..., 0] = yc.sum()
        rhs[..., 1] = (F @ yc)[:, :, None, None]
        rhs[..., 2] = np.einsum("mdn,mdken->mdke", Fy, c)
        rhs[..., 3] = np.einsum("mdn,mdken->mdke", Fy, s)
        out[i] = _gram_rmse(G, rhs, yy, n)
    # reorder to (tc, m, omega, delta_t, delta_omega)
    return out.transpose(0, 1, 3, 2, 4)


def _batch_rmse(var: _Variant, t, y, thetas, chunk_elems: int = 4_000_000) -> np.ndarray:
    """Slaved rmse for arbitrary nonlinear points; degenerate points get inf.

    Builds every design matrix explicitly.  Slow, but independent of the
    structured grid routines, which it cross-checks.
    """
    n = t.size
    p = var.n_linear()
    yc = y - y.mean()
    yy = float(yc @ yc)
    out = np.full(len(thetas), np.inf)
    size = max(1, chunk_elems // (n * p))
    for s in range(0, len(thetas), size):
        th = thetas[s : s + size]
        X = var.design(t, tuple(th[:, j, None] for j in range(th.shape[1])))
        G = np.einsum("gip,giq->gpq", X, X)
        rhs = np.einsum("gip,i->gp", X, yc)
        out[s : s + size] = _gram_rmse(G, rhs, yy, n)
    return out


def _fast_rmse(X, y) -> float:
    """Slaved rmse via normal equations; inf when the solve fails."""
    d = np.sqrt(np.einsum("ij,ij->j", X, X))
    Xs = X / d
    try:
        beta = np.linalg.solve(Xs.T @ Xs, Xs.T @ y)
    except np.linalg.LinAlgError:
        return math.inf
    r = y - Xs @ beta
    v = math.sqrt(float(r @ r) / y.size)
    return v if math.isfinite(v) else math.inf


# -- search ---------------------------------------------------------------


class Candidate(NamedTuple):
    theta: tuple[float, ...]
    rmse: float
    grid_index: int


def _grid(var: _Variant, t_last: float, config: FitConfig) -> np.ndarray:
    g = config.grid
    b = g.box
    lo, hi = b.tc
    # the tc interval is open at its lower end
    axes = [
        t_last + lo + (hi - lo) * np.arange(1, g.n_tc + 1) / g.n_tc,
        np.linspace(*b.m, g.n_m),
        np.linspace(*b.omega, g.n_omega),
    ]
    if var.kind == "landau":
        axes.append(np.geomspace(*b.delta_t, g.n_delta_t))
        axes.append(np.linspace(*b.delta_omega, g.n_delta_omega))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([a.ravel() for a in mesh], axis=1)


def grid_multistart(
    t, y, config: FitConfig = FitConfig(), kind: str = "simple", top_k: int | None = None
) -> list[Candidate]:
    """Rank the nonlinear grid by slaved rmse and keep the best ``top_k``.

    The grid is the Cartesian product over ``tc`` (``n_tc`` points on
    ``(t_last + lo, t_last + hi]``), ``m`` and ``omega`` (``linspace`` over
    the bounds) and, for Landau, ``delta_t`` (``geomspace``) and
    ``delta_omega``, enumerated in C order with ``tc`` slowest.  Equal
    rmse values keep that enumeration order.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < config.min_points:
        raise InsufficientDataError(f"{t.size} points, need {config.min_points}")
    var = _variant(kind, config.harmonics)
    thetas = _grid(var, float(t.max()), config)
    if var.kind == "landau":
        axes = (np.unique(thetas[:, j]) for j in range(5))
        with np.errstate(over="ignore"):
            rmse = _landau_grid_rmse(t, y, *axes).ravel()
    else:
        tcs, ms, omegas = (np.unique(thetas[:, j]) for j in range(3))
        rmse = _separable_grid_rmse(t, y, tcs, ms, omegas, config.harmonics if var.kind == "weierstrass" else 1).ravel()
    valid = np.flatnonzero(np.isfinite(rmse))
    if valid.size == 0:
        raise NoCandidateError("every grid point gave a degenerate linear problem")
    order = valid[np.argsort(rmse[valid], kind="stable")]
    k = config.top_k if top_k is None else top_k
    return [Candidate(tuple(map(float, thetas[i])), float(rmse[i]), int(i)) for i in order[:k]]


@dataclass(frozen=True)
class Qualification:
    qualified: bool
    reasons: tuple[str, ...]
    b_sign: int


@dataclass(frozen=True)
class FitResult:
    """Outcome of calibrating one variant on one window.

    Times in ``params`` are decimal years measured from ``origin`` (the
    first observation of the window); ``t_end`` is the last observation
    on that axis.
    """

    params: Params
    rmse: float
    n_points: int
    converged: bool
    qualified: bool
    reasons: tuple[str, ...] = ()
    b_sign: int = 0
    t_end: float = 0.0
    origin: dt.date | None = None
    window: TimeWindow | None = None
    n_iter: int = 0

    def __post_init__(self):
        if self.qualified and not self.converged:
            raise ValueError("a fit cannot be qualified without converging")

    @property
    def kind(self) -> str:
        return self.params.kind

    @property
    def tc_datetime(self) -> dt.datetime | None:
        if self.origin is None:
            return None
        o = dt.datetime(self.origin.year, self.origin.month, self.origin.day)
        return o + dt.timedelta(days=self.params.tc * DAYS_PER_YEAR)

    @property
    def tc_year(self) -> float | None:
        """Critical time as a calendar decimal year."""
        when = self.tc_datetime
        return None if when is None else decimal_year(when)

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "params": self.params.to_dict(),
            "rmse": self.rmse,
            "n_points": self.n_points,
            "converged": self.converged,
            "qualified": self.qualified,
            "reasons": list(self.reasons),
            "b_sign": self.b_sign,
            "t_end": self.t_end,
            "n_iter": self.n_iter,
            "origin": None if self.origin is None else self.origin.isoformat(),
            "window": None
            if self.window is None
            else {"t_start": self.window.t_start.isoformat(), "t_last": self.window.t_last.isoformat()},
            "tc_date": None if self.tc_datetime is None else self.tc_datetime.date().isoformat(),
            "tc_year": self.tc_year,
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    CSV_COLUMNS = ("kind", "t_start", "t_last", "n_points", "tc", "tc_year", "m", "omega", "A", "B", "C", "rmse", "converged", "qualified", "reasons")

    def csv_row(self) -> dict:
        p = self.params
        return {
            "kind": self.kind,
            "t_start": "" if self.window is None else self.window.t_start.isoformat(),
            "t_last": "" if self.window is None else self.window.t_last.isoformat(),
            "n_points": self.n_points,
            "tc": repr(float(p.tc)),
            "tc_year": "" if self.tc_year is None else repr(float(self.tc_year)),
            "m": repr(float(p.m)),
            "omega": repr(float(p.omega)),
            "A": repr(float(p.A)),
            "B": repr(float(p.B)),
            "C": repr(float(p.C)),
            "rmse": repr(float(self.rmse)),
            "converged": int(self.converged),
            "qualified": int(self.qualified),
            "reasons": ";".join(self.reasons),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerow(self.csv_row())
        return buf.getvalue()


def qualify_fit(result: FitResult, bounds: Bounds = QUALIFICATION_BOUNDS) -> Qualification:
    """Check a fit against the literature ranges.

    ``B < 0`` is not required; its sign is only recorded.
    """
    p = result.params
    reasons = []
    if not result.converged:
        reasons.append("not converged")
    if not bounds.m[0] <= p.m <= bounds.m[1]:
        reasons.append("m out of bounds")
    if not bounds.omega[0] <= p.omega <= bounds.omega[1]:
        reasons.append("omega out of bounds")
    offset = p.tc - result.t_end
    if offset <= bounds.tc[0]:
        reasons.append("tc too early")
    elif offset > bounds.tc[1]:
        reasons.append("tc too far")
    if abs(p.B) < B_ZERO:
        reasons.append("B zero")
    elif not abs(p.C) < 1.0:
        reasons.append("|C| >= 1")
    b_sign = int(np.sign(p.B)) if abs(p.B) >= B_ZERO else 0
    return Qualification(not reasons, tuple(reasons), b_sign)


def _unit_map(var: _Variant, box: Bounds, t_last: float):
    lo, hi = [], []
    for name in var.names:
        a, b = getattr(box, name)
        if name == "tc":
            a, b = t_last + a, t_last + b
        if name in var.log_scaled:
            a, b = math.log(a), math.log(b)
        lo.append(a)
        hi.append(b)
    lo, hi = np.array(lo), np.array(hi)
    logs = np.array([n in var.log_scaled for n in var.names])

    def to_theta(u):
        v = lo + u * (hi - lo)
        v[logs] = np.exp(v[logs])
        return v

    def to_unit(theta):
        v = np.array(theta, dtype=float)
        v[logs] = np.log(v[logs])
        return (v - lo) / (hi - lo)

    return to_theta, to_unit


SIMPLEX_STEP = 0.02


def local_refine(seed, t, y, config: FitConfig = FitConfig(), kind: str = "simple") -> FitResult:
    """Simplex refinement of one seed with the linear part re-slaved.

    Works in unit coordinates of the search box (``delta_t`` on a log
    scale); trial points outside the box are clipped onto it.  The
    result is qualified against ``config.bounds`` but carries no window;
    :func:`fit_window` attaches it.
    """
    var = _variant(kind, config.harmonics)
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    t_last = float(t.max())
    to_theta, to_unit = _unit_map(var, config.search, t_last)

    def f(u):
        with np.errstate(all="ignore"):
            return _fast_rmse(var.design(t, to_theta(u)), y)

    u0 = np.clip(to_unit(np.asarray(seed, dtype=float)), 0.0, 1.0)
    res = simplex.minimize(
        f, u0, np.full(u0.size, SIMPLEX_STEP), 0.0, 1.0, max_iter=config.max_iter, tol=config.tol
    )
    theta = to_theta(res.x)
    try:
        sol = slave_linear_params(theta, t, y, kind, config.harmonics)
    except DegenerateDesignError:
        # the seed itself was degenerate; report it unconverged
        nan = float("nan")
        params = var.build(theta, np.full(var.n_linear(), nan))
        return FitResult(params, math.inf, t.size, False, False, ("degenerate design",), 0, t_last)
    result = FitResult(sol.params, sol.rmse, t.size, res.converged, False, (), 0, t_last, n_iter=res.n_iter)
    q = qualify_fit(result, config.bounds)
    return replace(result, qualified=q.qualified, reasons=q.reasons, b_sign=q.b_sign)


def fit_arrays(t, y, config: FitConfig = FitConfig(), kind: str = "simple") -> FitResult:
    """Multistart + refine on raw ``(t, y)`` arrays; see :func:`fit_window`."""
    candidates = grid_multistart(t, y, config, kind)
    results = [local_refine(c.theta, t, y, config, kind) for c in candidates]
    qualified = [r for r in results if r.qualified]
    pool = qualified or results
    # min() keeps the first of equal rmse values, i.e. grid rank order
    return min(pool, key=lambda r: r.rmse)


def fit_window(
    series: PriceSeries, window: TimeWindow, config: FitConfig = FitConfig(), kind: str = "simple"
) -> FitResult:
    """Calibrate ``kind`` on the slice of ``series`` inside ``window``.

    Returns the lowest-rmse qualified refinement among the top-K grid
    seeds, or the lowest-rmse one overall (unqualified) when none
    qualifies.
    """
    sub = slice_window(series, window, config.min_points)
    t, y = to_log_price(sub)
    best = fit_arrays(t, y, config, kind)
    return replace(best, origin=sub.first_date, window=window)
