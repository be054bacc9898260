"""Analytic welfare accounting for a solved equilibrium.

Per-firm quantities: Q is the average inspection probability E[q*(t)], D the
expected subsidy flow E[sigma*(t) q*(t)], phi = p*D the expected transfer cost,
m the market match probability, C = c*Q - D the consumer's expected net
inspection cost. Consumer surplus is u*m - n*C, producer surplus
n*E[(t - p*sigma*)q*], and total welfare their sum. C is assembled from Q and
D (never integrated separately), so the identity C = c*Q - phi/p is exact by
construction and survives p = 0.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .attention import MarketParams
from .distributions import TypeDistribution
from .equilibrium import EquilibriumSolution, _branch_for, solve_reasonable_equilibrium
from .errors import SubsearchError

_PANELS = 192
_ORDER = 12


@dataclass(frozen=True)
class WelfareReport:
    Q: float
    phi: float
    m: float
    C: float
    CS: float
    PS: float
    W: float
    D: float  # per-firm subsidy flow E[sigma q*]; equals phi/p for p > 0
    t_lower: float
    t_upper: float
    pooling_active: bool

    def to_dict(self) -> dict:
        return {
            "Q": self.Q,
            "phi": self.phi,
            "m": self.m,
            "C": self.C,
            "CS": self.CS,
            "PS": self.PS,
            "W": self.W,
            "D": self.D,
            "t_lower": self.t_lower,
            "t_upper": self.t_upper,
            "pooling_active": self.pooling_active,
        }


def _branch_integrals(sol: EquilibriumSolution, d: TypeDistribution):
    """(Q_sep, D_sep, Etq_sep) integrated over the separating branch."""
    t0, t1 = sol.t_lower, sol.t_upper
    if t1 - t0 < 1e-14 or sol.params.p == 0.0:
        return 0.0, 0.0, 0.0
    branch = _branch_for(t0, sol.params, d)
    cuts = d.breakpoints()

    def q_f(t):
        return branch.attention(t) * np.asarray(d.density(t))

    def sq_f(t):
        return np.asarray(branch.sigma(t)) * branch.attention(t) * np.asarray(d.density(t))

    def tq_f(t):
        return t * branch.attention(t) * np.asarray(d.density(t))

    kw = dict(panels=_PANELS, order=_ORDER)
    return (
        quadrature.integrate_segmented(q_f, t0, t1, cuts, **kw),
        quadrature.integrate_segmented(sq_f, t0, t1, cuts, **kw),
        quadrature.integrate_segmented(tq_f, t0, t1, cuts, **kw),
    )


def welfare_report(sol: EquilibriumSolution, d: TypeDistribution) -> WelfareReport:
    """Full welfare decomposition for a solved equilibrium."""
    params = sol.params
    n, c, p, u = params.n, params.c, params.p, params.u
    t0, t1 = sol.t_lower, sol.t_upper

    Q_sep, D_sep, Etq_sep = _branch_integrals(sol, d)
    Q, D, Etq = Q_sep, D_sep, Etq_sep
    if sol.pooling_active:
        tail = float(d.survival(t1))
        qp = sol.pool_attention
        Q += qp * tail
        D += c * qp * tail
        Etq += qp * float(d.partial_moment(t1))

    m = 1.0 - (1.0 - float(d.partial_moment(t0))) ** n
    phi = p * D
    C = c * Q - D
    CS = u * m - n * C
    PS = n * (Etq - phi)
    return WelfareReport(
        Q=Q, phi=phi, m=m, C=C, CS=CS, PS=PS, W=CS + PS, D=D,
        t_lower=t0, t_upper=t1, pooling_active=sol.pooling_active,
    )


def producer_surplus_identity_check(sol: EquilibriumSolution, d: TypeDistribution) -> float:
    """|direct PS - survival-weighted form|, where PS/n = int_{t0}^1 (1-F(t)) q*(t) dt."""
    params = sol.params
    t0, t1 = sol.t_lower, sol.t_upper
    direct = welfare_report(sol, d).PS
    cuts = d.breakpoints()
    kw = dict(panels=_PANELS + 64, order=_ORDER - 2)

    total = 0.0
    if t1 - t0 > 1e-14 and params.p > 0.0:
        branch = _branch_for(t0, params, d)
        total += quadrature.integrate_segmented(
            lambda t: np.asarray(d.survival(t)) * branch.attention(t), t0, t1, cuts, **kw
        )
    if sol.pooling_active:
        total += sol.pool_attention * quadrature.integrate_segmented(
            lambda t: np.asarray(d.survival(t)), t1, 1.0, cuts, **kw
        )
    return abs(direct - params.n * total)


def transfer_virtual_value_check(sol: EquilibriumSolution, d: TypeDistribution) -> float:
    """|phi - virtual-value form|: phi should equal
    int_{t0}^{t1} psi(t) q_sep(t) dF(t) + (1 - F(t1)) * t1 * q_pool(t1)."""
    params = sol.params
    t0, t1 = sol.t_lower, sol.t_upper
    phi = welfare_report(sol, d).phi
    cuts = d.breakpoints()

    total = 0.0
    if t1 - t0 > 1e-14 and params.p > 0.0:
        branch = _branch_for(t0, params, d)
        total += quadrature.integrate_segmented(
            lambda t: np.asarray(d.virtual_value(t)) * branch.attention(t) * np.asarray(d.density(t)),
            t0, t1, cuts, panels=_PANELS, order=_ORDER,
        )
    if sol.pooling_active:
        total += float(d.survival(t1)) * t1 * sol.pool_attention
    return abs(phi - total)


_SWEEP_QUANTITIES = ("search_intensity", "match_probability", "consumer_surplus",
                     "producer_surplus", "producer_surplus_per_firm")

# Directions asserted by the comparative-statics theorem, by sweep axis.
# search_intensity is the aggregate n*Q; the per-firm average moves the other
# way in n and is reported alongside but not judged. On the firms axis only
# the per-firm producer surplus carries a claim (total PS has no asserted
# direction there and in fact falls at the uniform baseline).
_EXPECTED = {
    "price": dict.fromkeys(_SWEEP_QUANTITIES, "decreasing"),
    "cost": dict.fromkeys(_SWEEP_QUANTITIES, "decreasing"),
    "firms": {
        "search_intensity": "increasing",
        "match_probability": "increasing",
        "consumer_surplus": "increasing",
        "producer_surplus_per_firm": "decreasing",
    },
}

_AXES = ("price", "cost", "firms")


@dataclass
class SweepResult:
    axis: str
    values: list
    rows: list[dict] = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "values": list(self.values),
            "rows": self.rows,
            "verdicts": self.verdicts,
            "errors": {str(k): v for k, v in self.errors.items()},
        }


def _params_on_axis(base: MarketParams, axis: str, value) -> MarketParams:
    if axis == "price":
        return MarketParams(base.n, base.c, float(value), base.u)
    if axis == "cost":
        return MarketParams(base.n, float(value), base.p, base.u)
    if axis == "firms":
        return MarketParams(int(value), base.c, base.p, base.u)
    raise SubsearchError(f"unknown sweep axis {axis!r}; expected one of {_AXES}")


def _is_monotone(xs: list[float], direction: str, tol: float = 1e-12) -> bool:
    diffs = np.diff(np.asarray(xs, dtype=float))
    if direction == "decreasing":
        return bool(np.all(diffs <= tol))
    return bool(np.all(diffs >= -tol))


def comparative_statics_sweep(
    base: MarketParams,
    d: TypeDistribution,
    axis: str,
    grid,
    *,
    workers: int = 1,
) -> SweepResult:
    """Solve the equilibrium along one parameter axis and judge monotonicity.

    Per-point failures are recorded in ``errors`` and excluded from verdicts
    rather than aborting the sweep.
    """
    if axis not in _AXES:
        raise SubsearchError(f"unknown sweep axis {axis!r}; expected one of {_AXES}")
    values = list(grid)

    def solve_one(value):
        params = _params_on_axis(base, axis, value)
        sol = solve_reasonable_equilibrium(params, d)
        rep = welfare_report(sol, d)
        return {
            "axis_value": float(value),
            "n": params.n, "c": params.c, "p": params.p, "u": params.u,
            "t_lower": sol.t_lower,
            "t_upper": sol.t_upper,
            "pooling_active": sol.pooling_active,
            "Q": rep.Q,
            "search_intensity": params.n * rep.Q,
            "match_probability": rep.m,
            "phi": rep.phi,
            "C": rep.C,
            "consumer_surplus": rep.CS,
            "producer_surplus": rep.PS,
            "producer_surplus_per_firm": rep.PS / params.n,
            "total_welfare": rep.W,
        }

    result = SweepResult(axis=axis, values=values)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_safe(solve_one), values))
    else:
        outcomes = [_safe(solve_one)(v) for v in values]

    ok_rows = []
    for value, out in zip(values, outcomes):
        if isinstance(out, dict):
            result.rows.append(out)
            ok_rows.append(out)
        else:
            result.errors[value] = out

    for name, direction in _EXPECTED[axis].items():
        observed = [row[name] for row in ok_rows]
        result.verdicts[name] = {
            "expected": direction,
            "monotone": _is_monotone(observed, direction) if len(observed) >= 2 else True,
            "observed": observed,
        }
    return result


def _safe(fn):
    def wrapped(value):
        try:
            return fn(value)
        except Exception as exc:  # recorded, not fatal
            return f"{type(exc).__name__}: {exc}"

    return wrapped
