"""Consumer search: the descending-index rule, a market simulator, and a
brute-force policy oracle.

The consumer inspects firms in descending order of the reservation index
u - (c - s)/tau, breaking ties uniformly at random, and stops at the first
match or when the next index is nonpositive (indifference at exactly zero
stops: the outside option wins). On the equilibrium path this is descending
subsidy order with the top pool shuffled.

The simulator draws full markets, applies the solved schedule, forms
Bayes-consistent posteriors (schedule inversion on the separating branch, the
conditional mean at the cap), runs the rule, and accumulates attention,
match, cost, and transfer statistics. Replications are generated in fixed-size
chunks whose RNG streams are spawned from the seed, so results are
bit-identical regardless of chunking or execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attention import MarketParams, reservation_indices
from .distributions import TRUNCATION_FLOOR, TypeDistribution
from .equilibrium import EquilibriumSolution
from .errors import EnumerationSizeError
from .quadrature import integrate_segmented

_CHUNK = 4096
_MAX_BRUTE_FORCE = 8


@dataclass
class SearchOutcome:
    """Realized inspection path for one market."""

    inspected: list[int]
    matched_firm: int | None
    consumer_net_cost: float
    transfers_paid: list[tuple[int, float]]


@dataclass
class SimulationReport:
    replications: int
    rng_seed: int
    bin_edges: list[float]
    bin_counts: list[int]
    attention_by_type_bin: list[tuple[float, float, float]]  # (center, freq, se)
    closed_form_attention: list[float]
    match_rate: float
    match_rate_se: float
    mean_consumer_cost: float
    mean_consumer_cost_se: float
    mean_transfer_per_firm: float
    mean_transfer_per_firm_se: float

    def to_dict(self) -> dict:
        return {
            "replications": self.replications,
            "rng_seed": self.rng_seed,
            "bin_edges": self.bin_edges,
            "bin_counts": self.bin_counts,
            "attention_by_type_bin": [list(row) for row in self.attention_by_type_bin],
            "closed_form_attention": self.closed_form_attention,
            "match_rate": self.match_rate,
            "match_rate_se": self.match_rate_se,
            "mean_consumer_cost": self.mean_consumer_cost,
            "mean_consumer_cost_se": self.mean_consumer_cost_se,
            "mean_transfer_per_firm": self.mean_transfer_per_firm,
            "mean_transfer_per_firm_se": self.mean_transfer_per_firm_se,
        }

    def attention_csv_rows(self):
        """(bin_center, empirical, closed_form, stderr) per type bin."""
        for (center, freq, se), cf in zip(self.attention_by_type_bin, self.closed_form_attention):
            yield center, freq, cf, se


def dsir_order(
    subsidies,
    posteriors,
    params: MarketParams,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Inspection plan: firm indices in descending reservation-index order.

    Firms with index <= 0 are excluded (the outside option beats them). Ties
    are permuted uniformly at random when an rng is supplied, otherwise broken
    by firm index.
    """
    s = np.asarray(subsidies, dtype=float)
    tau = np.asarray(posteriors, dtype=float)
    if s.shape != tau.shape:
        raise ValueError("subsidies and posteriors must have equal length")
    r = reservation_indices(tau, params.c - s, params.u)
    tie = rng.permutation(len(s)) if rng is not None else np.arange(len(s))
    order = np.lexsort((tie, -r))
    return order[r[order] > 0.0]


def plan_value(plan, subsidies, posteriors, params: MarketParams) -> float:
    """Exact expected utility of inspecting the given sequence then stopping:
    u*(1 - prod(1-tau)) - sum_j (c - s_j) * prod_{i before j} (1 - tau_i)."""
    plan = np.asarray(plan, dtype=int)
    if len(plan) == 0:
        return 0.0
    s = np.asarray(subsidies, dtype=float)[plan]
    tau = np.asarray(posteriors, dtype=float)[plan]
    reach = np.concatenate([[1.0], np.cumprod(1.0 - tau)[:-1]])
    benefit = params.u * (1.0 - np.prod(1.0 - tau))
    cost = float(np.dot(params.c - s, reach))
    return benefit - cost


def brute_force_consumer_value(
    subsidies, posteriors, params: MarketParams
) -> tuple[float, tuple[int, ...]]:
    """Exhaustive maximum of expected utility over every ordered inspection set.

    Enumerates all permutations with every stopping prefix; factorial cost
    limits this to n <= 8.
    """
    from itertools import permutations

    s = np.asarray(subsidies, dtype=float)
    tau = np.asarray(posteriors, dtype=float)
    n = len(s)
    if n > _MAX_BRUTE_FORCE:
        raise EnumerationSizeError(f"brute force limited to n <= {_MAX_BRUTE_FORCE}, got {n}")
    best_value, best_plan = 0.0, ()
    for perm in permutations(range(n)):
        tau_p = tau[list(perm)]
        s_p = s[list(perm)]
        reach = np.concatenate([[1.0], np.cumprod(1.0 - tau_p)])
        # value of stopping after the first k inspections, k = 0..n
        benefit = params.u * (1.0 - reach[1:])
        step_cost = (params.c - s_p) * reach[:-1]
        values = np.concatenate([[0.0], benefit - np.cumsum(step_cost)])
        k = int(np.argmax(values))
        if values[k] > best_value:
            best_value, best_plan = float(values[k]), tuple(perm[:k])
    return best_value, best_plan


def _posteriors(sol: EquilibriumSolution, d: TypeDistribution, types: np.ndarray) -> np.ndarray:
    """Bayes-consistent posterior match probability for each firm's subsidy."""
    params = sol.params
    t0, t1 = sol.t_lower, sol.t_upper
    out = np.empty_like(types)

    below = types < t0
    if np.any(below):
        # zero-subsidy pool reveals t < t0; its index is negative whenever the
        # market is admissible, so these firms are never inspected
        if float(d.cdf(t0)) > TRUNCATION_FLOOR:
            out[below] = d.lower_truncated_mean(t0)
        else:
            out[below] = 0.0

    pooled = types > t1 if t1 > t0 else types >= t1
    if sol.pooling_active and np.any(pooled):
        out[pooled] = d.truncated_mean(t1)
    else:
        pooled = np.zeros_like(below)

    branch = ~below & ~pooled
    if np.any(branch):
        if sol.schedule.strictly_increasing_branch:
            sigma = sol.schedule.value(types[branch])
            out[branch] = sol.schedule.inverse(sigma)
        else:
            # step branch (n = 1): the subsidy reveals only t >= t0
            out[branch] = d.truncated_mean(t0)
    return out


def run_single_market(
    types,
    sol: EquilibriumSolution,
    d: TypeDistribution,
    rng: np.random.Generator,
) -> SearchOutcome:
    """Reference single-market run; the vectorized simulator must agree with it."""
    types = np.asarray(types, dtype=float)
    params = sol.params
    subsidies = np.asarray(sol.schedule.value(types), dtype=float)
    posteriors = _posteriors(sol, d, types)
    plan = dsir_order(subsidies, posteriors, params, rng)
    inspected: list[int] = []
    transfers: list[tuple[int, float]] = []
    net_cost = 0.0
    matched: int | None = None
    for j in plan:
        inspected.append(int(j))
        net_cost += float(params.c - subsidies[j])
        transfers.append((int(j), float(params.p * subsidies[j])))
        if rng.random() < types[j]:
            matched = int(j)
            break
    return SearchOutcome(inspected, matched, net_cost, transfers)


def bin_average_attention(
    sol: EquilibriumSolution, d: TypeDistribution, edges: np.ndarray
) -> np.ndarray:
    """Closed-form attention averaged over each type bin, E[q*(t) | t in bin]."""
    cuts = set(d.breakpoints()) | {sol.t_lower, sol.t_upper}
    out = np.zeros(len(edges) - 1)
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        mass = float(d.cdf(hi)) - float(d.cdf(lo))
        if mass <= 0.0:
            out[i] = 0.0
            continue
        val = integrate_segmented(
            lambda t: sol.attention(t, d) * np.asarray(d.density(t)),
            float(lo), float(hi), cuts, panels=16, order=12,
        )
        out[i] = val / mass
    return out


def simulate_market(
    sol: EquilibriumSolution,
    d: TypeDistribution,
    replications: int,
    seed: int,
    *,
    bins: int = 50,
) -> SimulationReport:
    """Monte Carlo market simulation under the solved equilibrium.

    Returns empirical attention by type bin (with per-bin Bernoulli standard
    errors and the bin-averaged closed form), the match rate, and mean consumer
    cost / transfer statistics. Deterministic for a fixed seed.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    params = sol.params
    n = params.n
    edges = np.linspace(0.0, 1.0, bins + 1)

    bin_total = np.zeros(bins, dtype=np.int64)
    bin_inspected = np.zeros(bins, dtype=np.int64)
    match_count = 0
    cost_sum = cost_sq = 0.0
    transfer_sum = transfer_sq = 0.0

    n_chunks = (replications + _CHUNK - 1) // _CHUNK
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    done = 0
    for chunk_idx in range(n_chunks):
        m = min(_CHUNK, replications - done)
        done += m
        rng = np.random.Generator(np.random.Philox(streams[chunk_idx]))

        types = np.asarray(d.sample(rng, (m, n)), dtype=float)
        subsidies = np.asarray(sol.schedule.value(types.ravel()), dtype=float).reshape(m, n)
        posteriors = _posteriors(sol, d, types.ravel()).reshape(m, n)
        r = reservation_indices(posteriors, params.c - subsidies, params.u)
        tie = rng.random((m, n))
        order = np.lexsort((tie, -r), axis=-1)

        r_sorted = np.take_along_axis(r, order, axis=1)
        eligible = r_sorted > 0.0
        types_sorted = np.take_along_axis(types, order, axis=1)
        match_draw = rng.random((m, n)) < types_sorted
        no_prior_match = np.ones((m, n), dtype=bool)
        no_prior_match[:, 1:] = np.logical_and.accumulate(~match_draw[:, :-1], axis=1)
        inspected_sorted = eligible & no_prior_match
        hit = inspected_sorted & match_draw

        # stopping sanity: at most one match per market, none after stopping
        assert np.all(hit.sum(axis=1) <= 1)

        inspected = np.zeros((m, n), dtype=bool)
        np.put_along_axis(inspected, order, inspected_sorted, axis=1)

        bin_idx = np.minimum((types * bins).astype(np.int64), bins - 1)
        bin_total += np.bincount(bin_idx.ravel(), minlength=bins)
        bin_inspected += np.bincount(bin_idx.ravel(), weights=inspected.ravel(),
                                     minlength=bins).astype(np.int64)

        match_count += int(hit.any(axis=1).sum())
        net_costs = ((params.c - subsidies) * inspected).sum(axis=1)
        cost_sum += float(net_costs.sum())
        cost_sq += float((net_costs**2).sum())
        transfers = (params.p * subsidies * inspected).sum(axis=1) / n
        transfer_sum += float(transfers.sum())
        transfer_sq += float((transfers**2).sum())

    freq = np.divide(bin_inspected, bin_total, out=np.zeros(bins), where=bin_total > 0)
    with np.errstate(invalid="ignore"):
        freq_se = np.sqrt(
            np.divide(freq * (1.0 - freq), bin_total, out=np.zeros(bins), where=bin_total > 0)
        )
    centers = 0.5 * (edges[:-1] + edges[1:])
    closed = bin_average_attention(sol, d, edges)

    R = replications
    match_rate = match_count / R
    match_se = float(np.sqrt(match_rate * (1.0 - match_rate) / R))
    cost_mean = cost_sum / R
    cost_var = max(cost_sq / R - cost_mean**2, 0.0)
    cost_se = float(np.sqrt(cost_var / R))
    tr_mean = transfer_sum / R
    tr_var = max(transfer_sq / R - tr_mean**2, 0.0)
    tr_se = float(np.sqrt(tr_var / R))

    return SimulationReport(
        replications=R,
        rng_seed=int(seed),
        bin_edges=edges.tolist(),
        bin_counts=bin_total.tolist(),
        attention_by_type_bin=[
            (float(c), float(f), float(se)) for c, f, se in zip(centers, freq, freq_se)
        ],
        closed_form_attention=[float(v) for v in closed],
        match_rate=float(match_rate),
        match_rate_se=match_se,
        mean_consumer_cost=float(cost_mean),
        mean_consumer_cost_se=cost_se,
        mean_transfer_per_firm=float(tr_mean),
        mean_transfer_per_firm_se=tr_se,
    )
