"""Welfare decomposition and comparative statics.

Frozen baseline values (Uniform, n=10, c=0.5, p=1, u=1) from the pre-build
adaptive-quadrature oracle:

    Q  = 0.13333091   phi = 0.06631098   m  = 0.99820944
    C  = 0.00035448   CS  = 0.99466464   PS = 0.33509968   W = 1.32976432

and for n=1 (step schedule at 0.25): m = 0.46875, phi = 0.1875, PS = 0.28125.
"""

import numpy as np
import pytest
from scipy import integrate

from subsearch import (
    MarketParams,
    comparative_statics_sweep,
    producer_surplus_identity_check,
    solve_reasonable_equilibrium,
    transfer_virtual_value_check,
    welfare_report,
)
from subsearch.equilibrium import _branch_for


def quad_welfare(sol, d):
    """Fully independent welfare computation via scipy adaptive quadrature."""
    params = sol.params
    n, c, p, u = params.n, params.c, params.p, params.u
    t0, t1 = sol.t_lower, sol.t_upper
    branch = _branch_for(t0, params, d) if t1 > t0 and p > 0 else None

    def q(t):
        return float(branch.attention(t)) if branch is not None else 0.0

    def sig(t):
        return float(branch.sigma(t)) if branch is not None else 0.0

    pts = sorted(b for b in d.breakpoints() if t0 < b < t1)
    kw = dict(epsabs=1e-12, limit=400, points=pts or None)
    Q = integrate.quad(lambda t: q(t) * d.density(t), t0, t1, **kw)[0] if branch else 0.0
    D = integrate.quad(lambda t: sig(t) * q(t) * d.density(t), t0, t1, **kw)[0] if branch else 0.0
    Etq = integrate.quad(lambda t: t * q(t) * d.density(t), t0, t1, **kw)[0] if branch else 0.0
    if sol.pooling_active:
        tail = 1.0 - d.cdf(t1)
        Q += sol.pool_attention * tail
        D += c * sol.pool_attention * tail
        Etq += sol.pool_attention * d.partial_moment(t1)
    m = 1.0 - (1.0 - d.partial_moment(t0)) ** n
    phi = p * D
    C = c * Q - D
    CS = u * m - n * C
    PS = n * (Etq - phi)
    return dict(Q=Q, phi=phi, m=m, C=C, CS=CS, PS=PS, W=CS + PS)


class TestBaselineValues:
    FROZEN = dict(
        Q=0.13333091, phi=0.06631098, m=0.99820944, C=0.00035448,
        CS=0.99466464, PS=0.33509968, W=1.32976432,
    )

    def test_frozen_oracle_values(self, baseline_solution, uniform):
        rep = welfare_report(baseline_solution, uniform)
        for key, expected in self.FROZEN.items():
            assert getattr(rep, key) == pytest.approx(expected, abs=5e-8), key

    def test_fields_internally_consistent(self, baseline_solution, uniform):
        rep = welfare_report(baseline_solution, uniform)
        params = baseline_solution.params
        assert rep.C == params.c * rep.Q - rep.phi / params.p  # exact assembly
        assert rep.W == rep.CS + rep.PS
        assert 0.0 <= rep.m <= 1.0
        assert 0.0 <= rep.Q <= 1.0
        assert rep.PS >= 0.0

    def test_against_independent_quadrature(self, baseline_solution, no_pool_solution, uniform):
        for sol in (baseline_solution, no_pool_solution):
            rep = welfare_report(sol, uniform)
            oracle = quad_welfare(sol, uniform)
            for key, val in oracle.items():
                assert getattr(rep, key) == pytest.approx(val, abs=1e-8), key

    def test_beta_prior(self, beta22):
        sol = solve_reasonable_equilibrium(MarketParams(10, 0.5, 1.0, 1.0), beta22)
        rep = welfare_report(sol, beta22)
        oracle = quad_welfare(sol, beta22)
        for key, val in oracle.items():
            assert getattr(rep, key) == pytest.approx(val, abs=1e-8), key


class TestSingleFirm:
    def test_closed_forms(self, uniform):
        sol = solve_reasonable_equilibrium(MarketParams(1, 0.5, 1.0, 1.0), uniform)
        rep = welfare_report(sol, uniform)
        assert rep.m == pytest.approx(0.46875, abs=1e-12)
        assert rep.phi == pytest.approx(0.1875, abs=1e-10)
        assert rep.PS == pytest.approx(0.28125, abs=1e-10)
        assert rep.Q == pytest.approx(0.75, abs=1e-10)
        # step schedule: PS = int_{t0}^1 (1 - F) dt = (1 - t0)^2 / 2
        assert rep.PS == pytest.approx((1 - 0.25) ** 2 / 2, abs=1e-10)


class TestDegenerateParticipation:
    def test_cost_near_admissibility_bound(self, uniform):
        # c close to (1+p)/p = 2 pushes the cutoff toward 1: market shuts down
        sol = solve_reasonable_equilibrium(MarketParams(10, 1.9998, 1.0, 1.0), uniform)
        rep = welfare_report(sol, uniform)
        assert rep.m < 0.01
        assert rep.Q < 0.01


class TestIdentities:
    def test_producer_surplus_identity(self, baseline_solution, no_pool_solution, uniform):
        assert producer_surplus_identity_check(baseline_solution, uniform) <= 1e-6
        assert producer_surplus_identity_check(no_pool_solution, uniform) <= 1e-6

    def test_producer_surplus_identity_single_firm(self, uniform):
        sol = solve_reasonable_equilibrium(MarketParams(1, 0.5, 1.0, 1.0), uniform)
        assert producer_surplus_identity_check(sol, uniform) <= 1e-6

    def test_transfer_virtual_value_identity(self, baseline_solution, no_pool_solution, uniform):
        assert transfer_virtual_value_check(baseline_solution, uniform) <= 1e-6
        assert transfer_virtual_value_check(no_pool_solution, uniform) <= 1e-6

    def test_transfer_virtual_value_identity_beta(self, beta22):
        sol = solve_reasonable_equilibrium(MarketParams(10, 0.5, 1.0, 1.0), beta22)
        assert transfer_virtual_value_check(sol, beta22) <= 1e-6

    def test_identities_piecewise_prior(self):
        from subsearch import PiecewiseLinearCdf

        d = PiecewiseLinearCdf(((0.0, 0.0), (0.3, 0.45), (0.7, 0.8), (1.0, 1.0)))
        sol = solve_reasonable_equilibrium(MarketParams(8, 0.5, 1.0, 1.0), d)
        assert producer_surplus_identity_check(sol, d) <= 1e-6
        assert transfer_virtual_value_check(sol, d) <= 1e-6

    def test_single_firm_transfer(self, uniform):
        # phi = p * (t0/p) * (1 - F(t0)) = 0.25 * 0.75
        sol = solve_reasonable_equilibrium(MarketParams(1, 0.5, 1.0, 1.0), uniform)
        assert welfare_report(sol, uniform).phi == pytest.approx(0.1875, abs=1e-10)
        assert transfer_virtual_value_check(sol, uniform) <= 1e-6

    def test_unit_price_welfare_collapses(self, baseline_solution, uniform):
        # at p = 1 transfers net out: W = u*m - n*E[(c - t) q*(t)]
        sol = baseline_solution
        rep = welfare_report(sol, uniform)
        branch = _branch_for(sol.t_lower, sol.params, uniform)
        val, _ = integrate.quad(
            lambda t: (sol.params.c - t) * float(branch.attention(t)),
            sol.t_lower, sol.t_upper, epsabs=1e-12,
        )
        tail, _ = integrate.quad(
            lambda t: (sol.params.c - t) * sol.pool_attention, sol.t_upper, 1.0, epsabs=1e-12
        )
        expected = sol.params.u * rep.m - sol.params.n * (val + tail)
        assert rep.W == pytest.approx(expected, abs=1e-8)

    def test_free_subsidy_report(self, uniform):
        sol = solve_reasonable_equilibrium(MarketParams(10, 0.5, 0.0, 1.0), uniform)
        rep = welfare_report(sol, uniform)
        assert rep.phi == 0.0
        assert rep.C == pytest.approx(0.0, abs=1e-15)
        assert rep.Q == pytest.approx(sol.pool_attention, abs=1e-12)


class TestComparativeStatics:
    def test_price_sweep(self, uniform):
        base = MarketParams(10, 0.5, 1.0, 1.0)
        res = comparative_statics_sweep(base, uniform, "price", [0.6, 0.8, 1.0, 1.2, 1.4])
        assert not res.errors
        for name in ("search_intensity", "match_probability", "consumer_surplus",
                     "producer_surplus"):
            assert res.verdicts[name]["monotone"], name

    def test_cost_sweep(self, uniform):
        base = MarketParams(10, 0.5, 1.0, 1.0)
        res = comparative_statics_sweep(base, uniform, "cost", [0.3, 0.4, 0.5, 0.6, 0.7])
        assert not res.errors
        for name in ("search_intensity", "match_probability", "consumer_surplus",
                     "producer_surplus"):
            assert res.verdicts[name]["monotone"], name

    def test_firms_sweep(self, uniform):
        base = MarketParams(10, 0.5, 1.0, 1.0)
        res = comparative_statics_sweep(base, uniform, "firms", list(range(2, 13)))
        assert not res.errors
        for name in ("search_intensity", "match_probability", "consumer_surplus",
                     "producer_surplus_per_firm"):
            assert res.verdicts[name]["monotone"], name
        # total producer surplus carries no asserted direction in n
        assert "producer_surplus" not in res.verdicts
        assert all("producer_surplus" in row for row in res.rows)

    def test_per_firm_average_attention_falls_with_n(self, uniform):
        # the per-firm average E[q*] decreases even as total intensity rises
        base = MarketParams(10, 0.5, 1.0, 1.0)
        res = comparative_statics_sweep(base, uniform, "firms", [2, 4, 8, 12])
        avg = [row["Q"] for row in res.rows]
        assert np.all(np.diff(avg) < 0)

    def test_failed_points_recorded_not_fatal(self, uniform):
        base = MarketParams(10, 0.5, 1.0, 1.0)
        # c = 2.5 violates admissibility at p = 1; others are fine
        res = comparative_statics_sweep(base, uniform, "cost", [0.4, 0.5, 2.5])
        assert len(res.rows) == 2
        assert 2.5 in res.errors
        assert "InvalidParamsError" in res.errors[2.5]

    def test_parallel_matches_serial(self, uniform):
        base = MarketParams(6, 0.5, 1.0, 1.0)
        grid = [0.8, 1.0, 1.2]
        serial = comparative_statics_sweep(base, uniform, "price", grid, workers=1)
        parallel = comparative_statics_sweep(base, uniform, "price", grid, workers=3)
        assert serial.to_dict() == parallel.to_dict()

    def test_unknown_axis_rejected(self, uniform):
        from subsearch.errors import SubsearchError

        with pytest.raises(SubsearchError):
            comparative_statics_sweep(MarketParams(2, 0.5, 1.0, 1.0), uniform, "utility", [1.0])
