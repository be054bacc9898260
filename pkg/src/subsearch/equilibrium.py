"""Construction of step-increasing-step subsidy equilibria.

The refined outcome has three regions: types below a participation cutoff
offer nothing and are never inspected; intermediate types separate with a
strictly increasing schedule; top types pool at the full subsidy c. The
separating branch comes from integrating the truth-telling first-order
condition, which admits the closed solution

    sigma_sep(t; t0) = t/p - (int_{t0}^t q_sep(x; t0) dx) / (p * q_sep(t; t0)),

equivalently the envelope identity q_sep(t) * (t - p*sigma(t)) = int_{t0}^t q_sep.
The pooling cutoff t1 is the unique root of the boundary-indifference gap

    H(x; t0) = q_pool(x) * (x - p*c) - int_{t0}^x q_sep(y; t0) dy,

bracketed inside (p*c, t_cap) where t_cap solves sigma_sep(t_cap) = c. All
integrals are cached on a dense grid per (t0, params, distribution) triple, so
repeated schedule/welfare evaluations cost one array lookup plus a single
in-cell Gauss-Legendre panel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import quadrature
from .attention import MarketParams, q_pool, q_sep
from .distributions import TypeDistribution
from .errors import BracketError, CutoffRangeError, InvalidParamsError, PriceZeroError

BRANCH_CELLS = 2048
SCHEDULE_GRID_POINTS = 4096
GL_ORDER = 12
ROOT_TOL = 1e-10
_EDGE = 1e-9


class _SeparatingBranch:
    """Cached q_sep and its cumulative integral on [t0, 1]."""

    def __init__(self, t0: float, params: MarketParams, d: TypeDistribution):
        self.t0 = float(t0)
        self.params = params
        self.d = d
        base = np.linspace(self.t0, 1.0, BRANCH_CELLS + 1)
        cuts = [b for b in d.breakpoints() if self.t0 < b < 1.0]
        grid = np.unique(np.concatenate([base, np.asarray(cuts)])) if cuts else base
        self.grid = grid
        self.q = q_sep(grid, self.t0, params, d)
        self.cum = quadrature.cumulative_on_grid(
            lambda x: q_sep(x, self.t0, params, d), grid, order=GL_ORDER
        )

    def attention(self, t):
        return q_sep(t, self.t0, self.params, self.d)

    def integral(self, t):
        """int_{t0}^t q_sep, exact cumulative plus one in-cell panel."""
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr).astype(float)
        flat = np.clip(flat, self.t0, 1.0)
        idx = np.clip(np.searchsorted(self.grid, flat, side="right") - 1, 0, len(self.grid) - 2)
        lo = self.grid[idx]
        x, w = quadrature._gl_nodes(GL_ORDER)
        half = 0.5 * (flat - lo)
        mid = 0.5 * (flat + lo)
        pts = mid[:, None] + half[:, None] * x[None, :]
        vals = self.attention(pts.ravel()).reshape(pts.shape)
        out = self.cum[idx] + (vals * w[None, :]).sum(axis=1) * half
        return float(out[0]) if scalar else out.reshape(arr.shape)

    def sigma(self, t):
        """Separating subsidy at t >= t0 (undefined below)."""
        p = self.params.p
        arr = np.asarray(t, dtype=float)
        return arr / p - self.integral(arr) / (p * self.attention(arr))


@lru_cache(maxsize=128)
def _branch_for(t0: float, params: MarketParams, d: TypeDistribution) -> _SeparatingBranch:
    return _SeparatingBranch(t0, params, d)


@dataclass
class SubsidySchedule:
    """Piecewise policy: 0 below t0, separating grid on [t0, t1], cap above t1.

    ``grid`` holds (t, sigma) rows densely sampling the separating branch;
    between grid points values interpolate with a monotone piecewise cubic.
    ``kinks`` marks interior abscissae where the schedule's slope jumps
    (density kinks of the prior); interpolation is stitched there so each
    piece sees a smooth function. Treat instances as immutable after
    construction.
    """

    t0: float
    t1: float
    cap: float
    grid: np.ndarray  # shape (m, 2)
    kinks: tuple = ()
    _pieces: list = field(default_factory=list, repr=False, compare=False)
    _inv_pieces: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        ts = self.grid[:, 0]
        ss = self.grid[:, 1]
        if len(ts) < 2:
            return
        cut_idx = [0]
        for kink in self.kinks:
            j = int(np.searchsorted(ts, kink))
            if 0 < j < len(ts) - 1 and ts[j] == kink:
                cut_idx.append(j)
        cut_idx.append(len(ts) - 1)
        strictly_increasing = bool(np.all(np.diff(ss) > 0.0))
        for lo, hi in zip(cut_idx[:-1], cut_idx[1:]):
            seg_t, seg_s = ts[lo:hi + 1], ss[lo:hi + 1]
            self._pieces.append((ts[hi], PchipInterpolator(seg_t, seg_s, extrapolate=True)))
            if strictly_increasing:
                self._inv_pieces.append(
                    (ss[hi], PchipInterpolator(seg_s, seg_t, extrapolate=True))
                )

    @property
    def strictly_increasing_branch(self) -> bool:
        return bool(self._inv_pieces)

    def _eval_pieces(self, pieces, x: np.ndarray) -> np.ndarray:
        uppers = np.array([up for up, _ in pieces])
        idx = np.minimum(np.searchsorted(uppers, x), len(pieces) - 1)
        out = np.empty_like(x)
        for i, (_, interp) in enumerate(pieces):
            mask = idx == i
            if np.any(mask):
                out[mask] = interp(x[mask])
        return out

    def value(self, t):
        """sigma*(t); vectorized."""
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr).astype(float)
        out = np.zeros_like(flat)
        pooled = flat > self.t1 if self.t1 > self.t0 else flat >= self.t1
        out[pooled] = self.cap
        on_branch = (~pooled) & (flat >= self.t0)
        if np.any(on_branch):
            if not self._pieces:
                out[on_branch] = self.grid[0, 1] if len(self.grid) else self.cap
            else:
                out[on_branch] = np.clip(
                    self._eval_pieces(self._pieces, flat[on_branch]), 0.0, self.cap
                )
        return float(out[0]) if scalar else out.reshape(arr.shape)

    def inverse(self, s):
        """Type revealed by an on-branch subsidy; requires a strictly increasing branch."""
        if not self._inv_pieces:
            raise InvalidParamsError("schedule branch is not strictly increasing; no inverse")
        arr = np.asarray(s, dtype=float)
        lo, hi = self.grid[0, 1], self.grid[-1, 1]
        clipped = np.atleast_1d(np.clip(arr, lo, hi)).astype(float)
        out = self._eval_pieces(self._inv_pieces, clipped)
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def to_dict(self) -> dict:
        return {
            "t0": self.t0,
            "t1": self.t1,
            "cap": self.cap,
            "grid_t": self.grid[:, 0].tolist(),
            "grid_sigma": self.grid[:, 1].tolist(),
        }


@dataclass
class EquilibriumSolution:
    """A solved SIS equilibrium: cutoffs, schedule, attention, diagnostics."""

    params: MarketParams
    schedule: SubsidySchedule
    t_lower: float
    t_upper: float
    t_cap: float | None
    pool_attention: float
    pooling_active: bool
    diagnostics: dict

    def attention(self, t, d: TypeDistribution):
        """Equilibrium attention q*(t): 0 below t_lower, q_sep on the branch,
        the pooled level above t_upper."""
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr).astype(float)
        out = np.zeros_like(flat)
        if self.pooling_active and self.t_upper <= self.t_lower:
            out[flat >= self.t_lower] = self.pool_attention
        else:
            branch = flat >= self.t_lower
            out[branch] = q_sep(flat[branch], self.t_lower, self.params, d)
            if self.pooling_active:
                out[flat > self.t_upper] = self.pool_attention
        return float(out[0]) if scalar else out.reshape(arr.shape)

    def profit(self, t, d: TypeDistribution):
        """Equilibrium firm profit (t - p*sigma*(t)) * q*(t)."""
        arr = np.asarray(t, dtype=float)
        return (arr - self.params.p * self.schedule.value(arr)) * self.attention(arr, d)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "t_lower": self.t_lower,
            "t_upper": self.t_upper,
            "t_cap": self.t_cap,
            "pool_attention": self.pool_attention,
            "pooling_active": self.pooling_active,
            "diagnostics": self.diagnostics,
            "schedule": self.schedule.to_dict(),
        }


def lower_cutoff(params: MarketParams) -> tuple[float, float]:
    """Participation cutoff and its subsidy: t = p*c/(1 + u*p), s = t/p.

    The cutoff is where break-even (s = t/p) meets inspect-worthiness
    (s = c - u*t); p = 0 degenerates to (0, 0), everything participates free.
    """
    if params.p == 0.0:
        return 0.0, 0.0
    t = params.p * params.c / (1.0 + params.u * params.p)
    return t, t / params.p


def sigma_sep(t: float, t0: float, params: MarketParams, d: TypeDistribution) -> float:
    """Separating subsidy at type t for the branch anchored at t0."""
    if params.p == 0.0:
        raise PriceZeroError("separating schedule undefined at p = 0 (subsidies are free)")
    if t < t0:
        raise CutoffRangeError(f"t={t} below branch anchor t0={t0}")
    return float(_branch_for(float(t0), params, d).sigma(float(t)))


def boundary_gap(x: float, t0: float, params: MarketParams, d: TypeDistribution) -> float:
    """Pooling-minus-separating payoff gap H(x; t0) for the marginal type x."""
    branch = _branch_for(float(t0), params, d)
    return float(
        q_pool(x, params, d) * (x - params.p * params.c) - branch.integral(x)
    )


def _t_cap(branch: _SeparatingBranch) -> float:
    c = branch.params.c
    return quadrature.bisect(
        lambda t: float(branch.sigma(t)) - c,
        branch.t0,
        1.0,
        xtol=1e-12,
    )


def upper_cutoff(
    t0: float, params: MarketParams, d: TypeDistribution
) -> tuple[float, bool]:
    """Pooling cutoff t1 and whether the cap binds.

    Returns (1, False) when the uncapped schedule stays feasible; otherwise the
    unique boundary-indifference root inside (p*c, t_cap), by bisection.
    """
    if params.p == 0.0:
        return 0.0, True
    branch = _branch_for(float(t0), params, d)
    if float(branch.sigma(1.0)) <= params.c:
        return 1.0, False
    tcap = _t_cap(branch)
    pc = params.p * params.c
    lo = max(pc, t0) + _EDGE
    hi = min(tcap, 1.0 - _EDGE)
    if lo >= hi:
        # Separating sliver numerically empty (t0 at the cap corner): pool at once.
        return max(pc, t0), True
    f = lambda x: boundary_gap(x, t0, params, d)
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo < 0.0 < f_hi):
        raise BracketError(
            f"boundary-indifference bracket [{lo:.6g}, {hi:.6g}] signs "
            f"({f_lo:.3e}, {f_hi:.3e}) invalid; quadrature tolerance too loose?"
        )
    t1 = quadrature.bisect(f, lo, hi, xtol=ROOT_TOL, f_lo=f_lo, f_hi=f_hi)
    return t1, True


def _pool_everything_solution(params: MarketParams, d: TypeDistribution) -> EquilibriumSolution:
    # p = 0: every subsidy is free, all types pool at the cap from type 0 on.
    qp = float(q_pool(0.0, params, d))
    grid = np.array([[0.0, params.c]])
    schedule = SubsidySchedule(t0=0.0, t1=0.0, cap=params.c, grid=grid)
    diagnostics = {
        "boundary_residual": 0.0,
        "envelope_max_error": 0.0,
        "interp_max_error": 0.0,
        "ic_max_violation": 0.0,
    }
    return EquilibriumSolution(
        params=params,
        schedule=schedule,
        t_lower=0.0,
        t_upper=0.0,
        t_cap=None,
        pool_attention=qp,
        pooling_active=True,
        diagnostics=diagnostics,
    )


def _assemble(
    t0: float,
    params: MarketParams,
    d: TypeDistribution,
    grid_points: int,
    ic_grid: int,
) -> EquilibriumSolution:
    branch = _branch_for(float(t0), params, d)
    t1, active = upper_cutoff(t0, params, d)
    tcap = None
    if active:
        tcap = _t_cap(branch)
        pool_attention = float(q_pool(t1, params, d))
        boundary_residual = abs(boundary_gap(t1, t0, params, d))
    else:
        pool_attention = 1.0  # limit value; no positive-mass pool exists
        boundary_residual = 0.0

    kinks: list[float] = []
    if t1 - t0 < 1e-12:
        grid = np.array([[t0, min(t0 / params.p, params.c)]])
        ts = grid[:, 0]
    else:
        ts = np.linspace(t0, t1, grid_points)
        kinks = [float(b) for b in d.breakpoints() if t0 < b < t1]
        if kinks:
            # the schedule's slope jumps at density kinks; grid points land on
            # them and interpolation is stitched there
            ts = np.unique(np.concatenate([ts, np.asarray(kinks)]))
        sigmas = np.asarray(branch.sigma(ts), dtype=float)
        sigmas[0] = t0 / params.p  # exact boundary value
        grid = np.column_stack([ts, sigmas])
    schedule = SubsidySchedule(t0=t0, t1=t1, cap=params.c, grid=grid, kinks=tuple(kinks))

    # Interpolation accuracy at cell midpoints, against the exact branch formula.
    mids = 0.5 * (ts[:-1] + ts[1:])
    interp_err = float(np.max(np.abs(schedule.value(mids) - branch.sigma(mids)))) if len(mids) else 0.0

    # Envelope identity q*(t - p*sigma) = int q, with sigma from the interpolant.
    chk = np.linspace(t0, t1, 200)
    env = branch.attention(chk) * (chk - params.p * schedule.value(chk)) - branch.integral(chk)
    envelope_err = float(np.max(np.abs(env)))

    sol = EquilibriumSolution(
        params=params,
        schedule=schedule,
        t_lower=t0,
        t_upper=t1,
        t_cap=tcap,
        pool_attention=pool_attention,
        pooling_active=active,
        diagnostics={
            "boundary_residual": boundary_residual,
            "envelope_max_error": envelope_err,
            "interp_max_error": interp_err,
        },
    )
    if ic_grid >= 2:
        sol.diagnostics["ic_max_violation"] = check_incentive_compatibility(sol, d, ic_grid, ic_grid)
    else:
        sol.diagnostics["ic_max_violation"] = None
    return sol


def solve_reasonable_equilibrium(
    params: MarketParams,
    d: TypeDistribution,
    *,
    grid_points: int = SCHEDULE_GRID_POINTS,
    ic_grid: int = 200,
) -> EquilibriumSolution:
    """The refined equilibrium: SIS schedule anchored at the participation cutoff."""
    if params.p == 0.0:
        return _pool_everything_solution(params, d)
    t0, _ = lower_cutoff(params)
    return _assemble(t0, params, d, grid_points, ic_grid)


def sis_schedule(
    t0: float,
    params: MarketParams,
    d: TypeDistribution,
    *,
    grid_points: int = SCHEDULE_GRID_POINTS,
    ic_grid: int = 200,
) -> EquilibriumSolution:
    """General family member anchored at t0 >= participation cutoff.

    The anchor must satisfy t0 <= min(p*c, 1): its boundary subsidy t0/p may
    not exceed the cap.
    """
    if params.p == 0.0:
        raise PriceZeroError("SIS family undefined at p = 0; use solve_reasonable_equilibrium")
    t_low, _ = lower_cutoff(params)
    hi = min(params.p * params.c, 1.0)
    if t0 < t_low - 1e-12 or t0 > hi + 1e-12:
        raise CutoffRangeError(
            f"t0={t0} outside the family range [{t_low:.6g}, {hi:.6g}]"
        )
    return _assemble(float(min(max(t0, t_low), hi)), params, d, grid_points, ic_grid)


def check_incentive_compatibility(
    sol: EquilibriumSolution,
    d: TypeDistribution,
    type_grid_size: int = 500,
    deviation_grid_size: int = 500,
) -> float:
    """Largest (deviation - equilibrium) payoff gap over a type x deviation grid.

    Deviations range over the on-path subsidy set plus zero: branch subsidies
    earn the revealed type's separating attention, the cap earns the pooled
    attention, zero earns nothing. Nonpositive values certify optimality.
    """
    params = sol.params
    p = params.p
    types = np.linspace(0.0, 1.0, type_grid_size)
    eq_payoff = (types - p * sol.schedule.value(types)) * sol.attention(types, d)

    devs: list[tuple[float, float]] = [(0.0, 0.0)]
    if sol.t_upper > sol.t_lower and p > 0.0:
        branch = _branch_for(sol.t_lower, params, d)
        xs = np.linspace(sol.t_lower, sol.t_upper, max(deviation_grid_size - 2, 2))
        s_dev = np.asarray(branch.sigma(xs), dtype=float)
        q_dev = branch.attention(xs)
        devs.extend(zip(s_dev.tolist(), np.asarray(q_dev, dtype=float).tolist()))
    if sol.pooling_active and (sol.t_upper < 1.0 or sol.t_upper == sol.t_lower):
        devs.append((params.c, sol.pool_attention))

    s_arr = np.array([s for s, _ in devs])
    q_arr = np.array([q for _, q in devs])
    dev_payoff = (types[:, None] - p * s_arr[None, :]) * q_arr[None, :]
    best_dev = dev_payoff.max(axis=1)
    return float(np.max(best_dev - eq_payoff))
