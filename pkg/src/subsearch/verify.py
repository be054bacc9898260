"""Runtime invariant suite backing the `verify` CLI command.

Each check re-derives a structural property of the solved equilibrium from an
independent route (enumeration, simulation, alternative quadrature) and
compares at a fixed tolerance. The CLI prints one line per check and exits
nonzero if any fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .attention import MarketParams, q_pool
from .distributions import TypeDistribution
from .equilibrium import check_incentive_compatibility, solve_reasonable_equilibrium
from .search import brute_force_consumer_value, dsir_order, plan_value, simulate_market
from .welfare import (
    comparative_statics_sweep,
    producer_surplus_identity_check,
    transfer_virtual_value_check,
    welfare_report,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        self.passed = bool(self.passed)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail}"


def q_pool_enumeration(x: float, params: MarketParams, d: TypeDistribution) -> float:
    """Pooled attention by exhaustive enumeration over rival pool compositions
    and uniform positions; independent of the binomial/geometric closed form."""
    n = params.n
    Fx = float(d.cdf(x))
    tau = float(d.truncated_mean(x))
    rivals = range(n - 1)
    total = 0.0
    for k in range(n):
        weight = sum((1.0 - Fx) ** k * Fx ** (n - 1 - k) for _ in combinations(rivals, k))
        positions = [(1.0 - tau) ** j for j in range(k + 1)]
        total += weight * sum(positions) / (k + 1)
    return total


def _schedule_checks(sol, d) -> list[CheckResult]:
    out = []
    grid = sol.schedule.grid
    ts, ss = grid[:, 0], grid[:, 1]
    params = sol.params
    mono = bool(np.all(np.diff(ss) >= -1e-12))
    strict = bool(np.all(np.diff(ss) > 0)) if params.n >= 2 and len(ss) > 1 else True
    out.append(CheckResult(
        "schedule_monotone", mono and strict,
        f"nondecreasing={mono}, strictly_increasing_branch={strict}",
    ))
    if params.p > 0.0 and len(ts) > 1:
        upper = np.minimum(params.c, ts / params.p) + 1e-9
        corridor = bool(np.all(ss >= -1e-12) and np.all(ss <= upper))
        s0_exact = abs(ss[0] - sol.t_lower / params.p) < 1e-12
        out.append(CheckResult(
            "schedule_corridor", corridor and s0_exact,
            f"0 <= sigma <= min(c, t/p) holds={corridor}, sigma(t0)=t0/p exact={s0_exact}",
        ))
    env = sol.diagnostics.get("envelope_max_error", 0.0)
    out.append(CheckResult("envelope_identity", env <= 1e-8, f"max residual {env:.3e} <= 1e-8"))
    bnd = sol.diagnostics.get("boundary_residual", 0.0)
    out.append(CheckResult("boundary_indifference", bnd <= 1e-8, f"|H(t1)| = {bnd:.3e} <= 1e-8"))
    return out


def run_verification(
    params: MarketParams,
    d: TypeDistribution,
    seed: int = 42,
    replications: int = 100_000,
) -> list[CheckResult]:
    checks: list[CheckResult] = []
    sol = solve_reasonable_equilibrium(params, d)
    checks.extend(_schedule_checks(sol, d))

    ic = check_incentive_compatibility(sol, d, 300, 300)
    checks.append(CheckResult("incentive_compatibility", ic <= 1e-6,
                              f"max deviation gain {ic:.3e} <= 1e-6"))

    rep = welfare_report(sol, d)
    if params.p > 0.0:
        c_resid = abs(rep.C - (params.c * rep.Q - rep.phi / params.p))
    else:
        c_resid = abs(rep.C - (params.c * rep.Q - rep.D))
    checks.append(CheckResult("consumer_cost_identity", c_resid <= 1e-12,
                              f"|C - (cQ - phi/p)| = {c_resid:.3e}"))
    w_resid = abs(rep.W - (rep.CS + rep.PS))
    checks.append(CheckResult("welfare_sum", w_resid <= 1e-8, f"|W - CS - PS| = {w_resid:.3e}"))
    ps_resid = producer_surplus_identity_check(sol, d)
    checks.append(CheckResult("producer_surplus_identity", ps_resid <= 1e-6,
                              f"residual {ps_resid:.3e} <= 1e-6"))
    vv_resid = transfer_virtual_value_check(sol, d)
    checks.append(CheckResult("transfer_virtual_value_identity", vv_resid <= 1e-6,
                              f"residual {vv_resid:.3e} <= 1e-6"))

    sim = simulate_market(sol, d, replications, seed)
    m_pred = rep.m
    m_gap = abs(sim.match_rate - m_pred)
    m_tol = 3.0 * max(sim.match_rate_se, 1e-9)
    checks.append(CheckResult("match_rate_vs_closed_form", m_gap <= m_tol,
                              f"|{sim.match_rate:.5f} - {m_pred:.5f}| <= 3se={m_tol:.5f}"))
    worst = 0.0
    ok = True
    for (center, freq, se), cf, cnt in zip(
        sim.attention_by_type_bin, sim.closed_form_attention, sim.bin_counts
    ):
        if cnt == 0:
            continue
        gap = abs(freq - cf)
        slack = 3.0 * max(se, 1e-9)
        worst = max(worst, gap - slack)
        if gap > slack:
            ok = False
    checks.append(CheckResult("attention_bins_vs_closed_form", ok,
                              f"worst (gap - 3se) = {worst:.3e}"))

    rng = np.random.default_rng(seed)
    worst_gap = 0.0
    for _ in range(100):
        n_small = int(rng.integers(1, 6))
        tau = rng.random(n_small)
        tau[rng.random(n_small) < 0.1] = 0.0
        c_small = float(rng.uniform(0.1, 1.0))
        small = MarketParams(n=n_small, c=c_small, p=1.0, u=1.0)
        s = rng.uniform(0.0, c_small, n_small)
        plan = dsir_order(s, tau, small)
        val = plan_value(plan, s, tau, small)
        best, _ = brute_force_consumer_value(s, tau, small)
        worst_gap = max(worst_gap, abs(best - val))
    checks.append(CheckResult("dsir_vs_brute_force", worst_gap <= 1e-12,
                              f"max |best - dsir| = {worst_gap:.3e} over 100 instances"))

    if params.n <= 6:
        worst_enum = max(
            abs(q_pool_enumeration(x, params, d) - float(q_pool(x, params, d)))
            for x in (0.0, 0.25, 0.5, 0.75)
        )
        checks.append(CheckResult("q_pool_enumeration", worst_enum <= 1e-12,
                                  f"max gap {worst_enum:.3e}"))

    if params.p > 0.0:
        grid = [params.p * f for f in (0.8, 1.0, 1.2)]
        sweep = comparative_statics_sweep(params, d, "price", grid)
        mono_ok = all(v["monotone"] for k, v in sweep.verdicts.items()
                      if k in ("search_intensity", "match_probability", "consumer_surplus"))
        checks.append(CheckResult("price_monotonicity_quick", mono_ok and not sweep.errors,
                                  "n*Q, m, CS decreasing on local price grid"))
    return checks
