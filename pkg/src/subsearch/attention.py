"""Market primitives and the two closed-form attention functions.

A firm's attention is the ex ante probability the consumer inspects it. On a
strictly separating branch anchored at participation cutoff t0,

    q_sep(t; t0) = (1 - int_t^1 x dF(x))^(n-1) * 1{t >= t0},

and for a firm pooled at the full subsidy together with every type above x,

    q_pool(x) = E_K[ (1 - (1 - tau)^(K+1)) / ((K+1) tau) ],

with K ~ Binomial(n-1, 1 - F(x)) rivals in the pool and tau = E[t | t >= x].
Both are exact finite expressions; q_pool is summed term by term (never
sampled) so tests are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .distributions import TypeDistribution
from .errors import InvalidParamsError

NEG_INF = float("-inf")

# Below this truncated mean the pooled tie-break factor switches to its series
# limit (1 - (1-tau)^m)/(m tau) -> 1 - (m-1) tau / 2 to avoid 0/0.
_TAU_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class MarketParams:
    """Primitives of the subsidized-inspection game: n firms, inspection cost c,
    per-unit subsidy price p, match benefit u."""

    n: int
    c: float
    p: float
    u: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParamsError(f"n must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not self.c > 0.0:
            raise InvalidParamsError(f"inspection cost c must be positive, got {self.c!r}")
        if not self.u > 0.0:
            raise InvalidParamsError(f"match benefit u must be positive, got {self.u!r}")
        if self.p < 0.0:
            raise InvalidParamsError(f"subsidy price p must be nonnegative, got {self.p!r}")
        if self.p > 0.0 and not self.c < (1.0 + self.p * self.u) / self.p:
            raise InvalidParamsError(
                f"need c < (1 + p*u)/p so some types can profitably subsidize; "
                f"got c={self.c}, bound={(1.0 + self.p * self.u) / self.p:.6g}"
            )

    def with_price(self, p: float) -> "MarketParams":
        return MarketParams(self.n, self.c, p, self.u)

    def to_dict(self) -> dict:
        return {"n": self.n, "c": self.c, "p": self.p, "u": self.u}


def q_sep(t, t0: float, params: MarketParams, d: TypeDistribution):
    """Separating-branch attention; 0 below the cutoff, (1 - pm(t))^(n-1) above."""
    arr = np.asarray(t, dtype=float)
    base = (1.0 - np.asarray(d.partial_moment(arr))) ** (params.n - 1)
    out = np.where(arr >= t0, base, 0.0)
    return float(out) if arr.ndim == 0 else out


def pooled_tie_break(m, tau):
    """Average reach probability over a uniform position in a pool of size m:
    (1 - (1 - tau)^m) / (m * tau), with a series branch for tiny tau."""
    scalar = np.asarray(m).ndim == 0 and np.asarray(tau).ndim == 0
    m_arr, tau_arr = np.broadcast_arrays(
        np.asarray(m, dtype=float), np.asarray(tau, dtype=float)
    )
    safe = np.where(tau_arr > _TAU_SERIES_CUTOFF, tau_arr, 1.0)
    exact = (1.0 - (1.0 - safe) ** m_arr) / (m_arr * safe)
    series = 1.0 - (m_arr - 1.0) * tau_arr / 2.0
    out = np.where(tau_arr > _TAU_SERIES_CUTOFF, exact, series)
    return float(out) if scalar else out


def q_pool(x, params: MarketParams, d: TypeDistribution):
    """Attention of a firm pooled at the cap when all types in [x, 1] pool.

    Exact expectation over the binomial pool-size law; requires F(x) < 1 so the
    conditional mean tau is defined (degenerate-truncation error otherwise).
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr)
    tau = np.atleast_1d(np.asarray(d.truncated_mean(flat)))
    tail = np.atleast_1d(np.asarray(d.survival(flat)))
    k = np.arange(params.n)
    pmf = stats.binom.pmf(k[None, :], params.n - 1, tail[:, None])
    reach = pooled_tie_break(k[None, :] + 1.0, tau[:, None])
    out = (pmf * reach).sum(axis=1)
    return float(out[0]) if scalar else out.reshape(arr.shape)


def reservation_index(tau: float, kappa: float, u: float) -> float:
    """Weitzman-style index u - kappa/tau for a Bernoulli prize; -inf when tau = 0.

    kappa = c - s is the net inspection cost and must be nonnegative.
    """
    if kappa < 0.0:
        raise InvalidParamsError(f"net inspection cost must be nonnegative, got {kappa!r}")
    if tau <= 0.0:
        return NEG_INF
    return u - kappa / tau


def reservation_indices(tau, kappa, u: float):
    """Vectorized reservation index; -inf entries where tau = 0."""
    tau_arr = np.asarray(tau, dtype=float)
    kappa_arr = np.asarray(kappa, dtype=float)
    if np.any(kappa_arr < 0.0):
        raise InvalidParamsError("net inspection costs must be nonnegative")
    safe = np.where(tau_arr > 0.0, tau_arr, 1.0)
    return np.where(tau_arr > 0.0, u - kappa_arr / safe, NEG_INF)
