"""Type priors on [0, 1] and their integral building blocks.

Every distribution exposes the same small surface: the CDF F, the density f,
the upper partial first moment ``partial_moment(t) = int_t^1 x dF(x)``, and the
conditional mean ``truncated_mean(t) = E[t' | t' >= t]``. Everything downstream
(attention functions, schedules, welfare integrals) is built from these.

All three families admit closed forms, so no quadrature runs in the product
path; the test suite cross-checks each closed form against an independent
adaptive-quadrature oracle.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import (
    DegenerateTruncationError,
    DensityUndefinedError,
    DomainError,
    InvalidParamsError,
)

TRUNCATION_FLOOR = 1e-12
DENSITY_FLOOR = 1e-12


def _as_unit_array(t, name: str = "t") -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or np.any(np.isnan(arr)):
        raise DomainError(f"{name} must lie in [0, 1], got {t!r}")
    return arr, arr.ndim == 0


def _maybe_scalar(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


class TypeDistribution(abc.ABC):
    """Prior over firm match probabilities, with full support on (0, 1)."""

    quadrature_tolerance: float = 1e-10

    @property
    @abc.abstractmethod
    def kind(self) -> str: ...

    @abc.abstractmethod
    def cdf(self, t): ...

    @abc.abstractmethod
    def density(self, t): ...

    @abc.abstractmethod
    def partial_moment(self, t):
        """Upper partial first moment int_t^1 x dF(x)."""

    def survival(self, t):
        """1 - F(t), computed without cancellation where a closed form allows."""
        arr, scalar = _as_unit_array(t)
        return _maybe_scalar(1.0 - np.asarray(self.cdf(arr)), scalar)

    @abc.abstractmethod
    def sample(self, rng: np.random.Generator, size): ...

    def breakpoints(self) -> tuple[float, ...]:
        """Interior density kinks; quadrature panels split here."""
        return ()

    @property
    def mean(self) -> float:
        return float(self.partial_moment(0.0))

    def truncated_mean(self, t):
        """E[t' | t' >= t]; requires F(t) < 1."""
        arr, scalar = _as_unit_array(t)
        tail = np.asarray(self.survival(arr))
        if np.any(tail < TRUNCATION_FLOOR):
            raise DegenerateTruncationError(
                f"1 - F(t) below {TRUNCATION_FLOOR:g}; truncated mean degenerate at t={t!r}"
            )
        out = np.asarray(self.partial_moment(arr)) / tail
        return _maybe_scalar(out, scalar)

    def lower_truncated_mean(self, t):
        """E[t' | t' < t]; requires F(t) > 0."""
        arr, scalar = _as_unit_array(t)
        mass = np.asarray(self.cdf(arr))
        if np.any(mass < TRUNCATION_FLOOR):
            raise DegenerateTruncationError(
                f"F(t) below {TRUNCATION_FLOOR:g}; lower truncation degenerate at t={t!r}"
            )
        out = (self.mean - np.asarray(self.partial_moment(arr))) / mass
        return _maybe_scalar(out, scalar)

    def virtual_value(self, t):
        """psi(t) = t - (1 - F(t)) / f(t), with the density floored at 1e-12."""
        arr, scalar = _as_unit_array(t)
        f = np.maximum(np.asarray(self.density(arr), dtype=float), DENSITY_FLOOR)
        out = arr - (1.0 - np.asarray(self.cdf(arr))) / f
        return _maybe_scalar(out, scalar)

    @abc.abstractmethod
    def to_spec(self) -> dict: ...


@dataclass(frozen=True)
class Uniform(TypeDistribution):
    quadrature_tolerance: float = 1e-10

    @property
    def kind(self) -> str:
        return "uniform"

    def cdf(self, t):
        arr, scalar = _as_unit_array(t)
        return _maybe_scalar(arr.copy(), scalar)

    def density(self, t):
        arr, scalar = _as_unit_array(t)
        return _maybe_scalar(np.ones_like(arr), scalar)

    def partial_moment(self, t):
        arr, scalar = _as_unit_array(t)
        return _maybe_scalar((1.0 - arr * arr) / 2.0, scalar)

    def sample(self, rng, size):
        return rng.random(size)

    def to_spec(self) -> dict:
        return {"kind": "uniform"}


@dataclass(frozen=True)
class Beta(TypeDistribution):
    alpha: float = 2.0
    beta: float = 2.0
    quadrature_tolerance: float = 1e-10

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise InvalidParamsError("Beta shape parameters must be positive")

    @property
    def kind(self) -> str:
        return "beta"

    def cdf(self, t):
        arr, scalar = _as_unit_array(t)
        return _maybe_scalar(special.betainc(self.alpha, self.beta, arr), scalar)

    def survival(self, t):
        # I_t(a, b) = 1 - I_{1-t}(b, a); the complement form avoids cancellation near 1
        arr, scalar = _as_unit_array(t)
        return _maybe_scalar(special.betainc(self.beta, self.alpha, 1.0 - arr), scalar)

    def density(self, t):
        arr, scalar = _as_unit_array(t)
        with np.errstate(divide="ignore"):
            logpdf = (
                special.xlogy(self.alpha - 1.0, arr)
                + special.xlog1py(self.beta - 1.0, -arr)
                - special.betaln(self.alpha, self.beta)
            )
        return _maybe_scalar(np.exp(logpdf), scalar)

    def partial_moment(self, t):
        # x * f_{a,b}(x) = mean * f_{a+1,b}(x), so the tail integral is a Beta
        # survival function (complement form, stable near 1).
        arr, scalar = _as_unit_array(t)
        mean = self.alpha / (self.alpha + self.beta)
        out = mean * special.betainc(self.beta, self.alpha + 1.0, 1.0 - arr)
        return _maybe_scalar(out, scalar)

    def sample(self, rng, size):
        return rng.beta(self.alpha, self.beta, size)

    def to_spec(self) -> dict:
        return {"kind": "beta", "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class PiecewiseLinearCdf(TypeDistribution):
    """CDF given by linear interpolation of knots [(t, F(t)), ...].

    Knots must start at (0, 0), end at (1, 1), and be strictly increasing in
    both coordinates (strict F guarantees full support). The density is the
    per-segment slope; at interior knots the right-hand slope is used.
    """

    knots: tuple[tuple[float, float], ...] = ((0.0, 0.0), (1.0, 1.0))
    quadrature_tolerance: float = 1e-10
    _kt: np.ndarray = field(init=False, repr=False, compare=False)
    _kf: np.ndarray = field(init=False, repr=False, compare=False)
    _slopes: np.ndarray = field(init=False, repr=False, compare=False)
    _pm_suffix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.knots, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise InvalidParamsError("knots must be a list of at least two (t, F) pairs")
        kt, kf = pts[:, 0], pts[:, 1]
        if kt[0] != 0.0 or kf[0] != 0.0 or kt[-1] != 1.0 or kf[-1] != 1.0:
            raise InvalidParamsError("knots must run from (0, 0) to (1, 1)")
        if np.any(np.diff(kt) <= 0.0):
            raise InvalidParamsError("knot abscissae must be strictly increasing")
        if np.any(np.diff(kf) <= 0.0):
            raise InvalidParamsError(
                "knot CDF values must be strictly increasing (full support, no atoms)"
            )
        slopes = np.diff(kf) / np.diff(kt)
        # Exact per-segment int x f dx via 2-point Gauss-Legendre (linear integrand).
        node = 1.0 / np.sqrt(3.0)
        half = np.diff(kt) / 2.0
        mid = (kt[:-1] + kt[1:]) / 2.0
        seg = half * slopes * ((mid - half * node) + (mid + half * node))
        suffix = np.zeros(len(kt))
        suffix[:-1] = np.cumsum(seg[::-1])[::-1]
        object.__setattr__(self, "_kt", kt)
        object.__setattr__(self, "_kf", kf)
        object.__setattr__(self, "_slopes", slopes)
        object.__setattr__(self, "_pm_suffix", suffix)

    @property
    def kind(self) -> str:
        return "piecewise"

    def _segment(self, arr: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._kt, arr, side="right") - 1
        return np.clip(idx, 0, len(self._slopes) - 1)

    def cdf(self, t):
        arr, scalar = _as_unit_array(t)
        return _maybe_scalar(np.interp(arr, self._kt, self._kf), scalar)

    def density(self, t):
        arr, scalar = _as_unit_array(t)
        return _maybe_scalar(self._slopes[self._segment(arr)], scalar)

    def partial_moment(self, t):
        arr, scalar = _as_unit_array(t)
        i = self._segment(arr)
        hi = self._kt[i + 1]
        rest = self._slopes[i] * (hi * hi - arr * arr) / 2.0
        out = rest + self._pm_suffix[i + 1]
        return _maybe_scalar(out, scalar)

    def virtual_value(self, t):
        arr, scalar = _as_unit_array(t)
        interior = self._kt[1:-1]
        if interior.size and np.any(np.isin(arr, interior)):
            raise DensityUndefinedError(
                "one-sided density at an interior knot; virtual value undefined there"
            )
        return super().virtual_value(t)

    def sample(self, rng, size):
        return np.interp(rng.random(size), self._kf, self._kt)

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(self._kt[1:-1])

    def to_spec(self) -> dict:
        return {"kind": "piecewise", "knots": [[float(a), float(b)] for a, b in self.knots]}


def from_spec(spec: dict) -> TypeDistribution:
    """Build a distribution from its JSON specification.

    Accepted forms: {"kind": "uniform"} | {"kind": "beta", "alpha": a, "beta": b}
    | {"kind": "piecewise", "knots": [[t, F], ...]}.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidParamsError(f"distribution spec must be a dict with a 'kind': {spec!r}")
    kind = spec["kind"]
    tol = float(spec.get("quadrature_tolerance", 1e-10))
    if tol <= 0.0:
        raise InvalidParamsError("quadrature_tolerance must be positive")
    if kind == "uniform":
        return Uniform(quadrature_tolerance=tol)
    if kind == "beta":
        try:
            return Beta(float(spec["alpha"]), float(spec["beta"]), quadrature_tolerance=tol)
        except KeyError as exc:
            raise InvalidParamsError("beta spec requires 'alpha' and 'beta'") from exc
    if kind == "piecewise":
        try:
            knots = tuple((float(a), float(b)) for a, b in spec["knots"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParamsError("piecewise spec requires 'knots': [[t, F], ...]") from exc
        return PiecewiseLinearCdf(knots, quadrature_tolerance=tol)
    raise InvalidParamsError(f"unknown distribution kind {kind!r}")
