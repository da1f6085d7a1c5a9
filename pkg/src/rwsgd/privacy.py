"""Local differential privacy for the shared smoothness constants.

The Gamma mechanism releases R(L) ~ Gamma(L/theta, theta), whose mean is the
true constant L and whose variance L*theta grows with the noise scale theta.
The accountant evaluates, for a sensitivity range [inf_l, sup_l], the
smallest certifiable delta at a given (epsilon, theta):

    delta >= max( 1 - P(a, t1),  P(b, t2) ),     a = sup_l/theta, b = inf_l/theta,
    t1 = (e^eps  * Gamma(a)/Gamma(b))^(theta/(sup_l-inf_l)),
    t2 = (e^-eps * Gamma(a)/Gamma(b))^(theta/(sup_l-inf_l)),

where P is the regularized lower incomplete gamma function. Both branches
are exact tail probabilities of the privacy-loss random variable (one per
ordering of the worst-case pair), which is what the Monte-Carlo oracle in
the test suite checks them against.

A truncated variant clamps the released value into [l_min, l_max]; by
post-processing immunity it keeps the (epsilon, delta) guarantee of the
unclamped mechanism. A Laplace baseline adds zero-mean noise matched to the
Gamma mechanism's per-node variance, clamped below to stay usable in
Metropolis-Hastings ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import lgamma

import numpy as np

from .errors import ConfigurationError, NumericalError

MECHANISMS = ("gamma", "truncated-gamma", "laplace")

LAPLACE_FLOOR_FACTOR = 1e-3
_SERIES_MAX_TERMS = 10_000
_CF_MAX_ITER = 10_000
_EPS = 1e-16


@dataclass(frozen=True)
class PrivacySpec:
    """Noise scale, truncation bounds, and the (epsilon, delta) target."""

    theta: float
    l_min: float = 1e-6
    l_max: float = 1e9
    epsilon: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if not self.theta > 0.0:
            raise ConfigurationError(f"theta must be positive, got {self.theta}")
        if not 0.0 < self.l_min < self.l_max:
            raise ConfigurationError(
                f"need 0 < l_min < l_max, got l_min={self.l_min}, l_max={self.l_max}"
            )
        if self.epsilon < 0.0:
            raise ConfigurationError(f"epsilon must be nonnegative, got {self.epsilon}")
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigurationError(f"delta must lie in [0, 1], got {self.delta}")


@dataclass(frozen=True)
class NoisyLipschitz:
    """Privatized constants, drawn once before the walk and fixed for the run."""

    values: np.ndarray

    def __post_init__(self):
        if np.any(self.values <= 0.0) or not np.all(np.isfinite(self.values)):
            raise NumericalError("privatized constants must be strictly positive and finite")


# ---------------------------------------------------------------------------
# incomplete gamma


def _regularized_pq(s: float, log_t: float) -> tuple[float, float]:
    """(P(s, t), Q(s, t)) evaluated from log(t).

    Taking log_t rather than t keeps the series usable when t itself
    under- or overflows a float: only s*log_t has to be finite. Series
    expansion below t < s+1, Lentz continued fraction for the complement
    above it.
    """
    if log_t == -math.inf:
        return 0.0, 1.0
    t = math.exp(log_t) if log_t < 700.0 else math.inf
    if t == math.inf:
        return 1.0, 0.0
    log_prefactor = s * log_t - t - lgamma(s)
    if t < s + 1.0:
        term = 1.0 / s
        total = term
        denom = s
        for _ in range(_SERIES_MAX_TERMS):
            denom += 1.0
            term *= t / denom
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        else:
            raise NumericalError(f"incomplete gamma series failed to converge at s={s}, t={t}")
        p = total * math.exp(log_prefactor)
        p = min(p, 1.0)
        return p, 1.0 - p
    tiny = 1e-300
    b = t + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise NumericalError(f"incomplete gamma fraction failed to converge at s={s}, t={t}")
    q = math.exp(log_prefactor) * h
    q = min(q, 1.0)
    return 1.0 - q, q


def regularized_lower_incomplete_gamma(s: float, t: float) -> float:
    """P(s, t) = IG(s, t) / Gamma(s) for s > 0, t >= 0."""
    if not s > 0.0:
        raise ConfigurationError(f"shape must be positive, got s={s}")
    if t < 0.0:
        raise ConfigurationError(f"upper limit must be nonnegative, got t={t}")
    return _regularized_pq(s, math.log(t) if t > 0.0 else -math.inf)[0]


def lower_incomplete_gamma(s: float, t: float) -> float:
    """Unregularized IG(s, t) = integral of u^(s-1) e^-u over (0, t)."""
    p = regularized_lower_incomplete_gamma(s, t)
    if s < 170.0:
        return p * math.gamma(s)
    if p == 0.0:
        return 0.0
    return math.exp(math.log(p) + lgamma(s))


# ---------------------------------------------------------------------------
# mechanisms


def gamma_mechanism(l_value: float, theta: float, rng: np.random.Generator) -> float:
    """One release R(L) ~ Gamma(shape=L/theta, scale=theta); mean L, variance L*theta."""
    if not (l_value > 0.0 and theta > 0.0):
        raise ConfigurationError("gamma mechanism needs L > 0 and theta > 0")
    return float(rng.gamma(l_value / theta, theta))


def truncated_gamma_mechanism(
    l_value: float, theta: float, l_min: float, l_max: float, rng: np.random.Generator
) -> float:
    """Gamma release clamped into [l_min, l_max] (post-processing keeps the guarantee)."""
    if not 0.0 < l_min < l_max:
        raise ConfigurationError(f"need 0 < l_min < l_max, got ({l_min}, {l_max})")
    return float(min(max(gamma_mechanism(l_value, theta, rng), l_min), l_max))


def laplace_mechanism(
    l_value: float, variance: float, floor: float, rng: np.random.Generator
) -> float:
    """L + Laplace noise of the given variance, clamped below at ``floor``.

    The clamp keeps the released constant positive so Metropolis-Hastings
    ratios stay well defined.
    """
    if not variance > 0.0:
        raise ConfigurationError(f"variance must be positive, got {variance}")
    b = math.sqrt(variance / 2.0)
    return float(max(l_value + rng.laplace(0.0, b), floor))


def privatize_all(
    lipschitz, spec: PrivacySpec, mechanism: str, rng: np.random.Generator
) -> NoisyLipschitz:
    """One independent release per node, fixed for the lifetime of the run.

    Drawing once (rather than per activation) blocks the averaging attack a
    neighbour could otherwise mount. The laplace baseline matches the Gamma
    mechanism's per-node variance L_i * theta and clamps below at
    LAPLACE_FLOOR_FACTOR * min(L).
    """
    lipschitz = np.asarray(lipschitz, dtype=float)
    if np.any(lipschitz <= 0.0):
        raise ConfigurationError("Lipschitz constants must be positive")
    if mechanism == "gamma":
        values = rng.gamma(lipschitz / spec.theta, spec.theta)
    elif mechanism == "truncated-gamma":
        values = np.clip(rng.gamma(lipschitz / spec.theta, spec.theta), spec.l_min, spec.l_max)
    elif mechanism == "laplace":
        scales = np.sqrt(lipschitz * spec.theta / 2.0)
        floor = LAPLACE_FLOOR_FACTOR * float(lipschitz.min())
        values = np.maximum(lipschitz + rng.laplace(0.0, scales), floor)
    else:
        raise ConfigurationError(f"unknown mechanism {mechanism!r}; expected one of {MECHANISMS}")
    return NoisyLipschitz(values)


# ---------------------------------------------------------------------------
# accountant


def _check_range(sup_l: float, inf_l: float) -> None:
    if not inf_l > 0.0:
        raise ConfigurationError(f"inf_l must be positive, got {inf_l}")
    if not sup_l > inf_l:
        raise ConfigurationError(
            f"degenerate sensitivity range: sup_l={sup_l} <= inf_l={inf_l}"
        )


def delta_bound_branches(
    epsilon: float, theta: float, sup_l: float, inf_l: float
) -> tuple[float, float]:
    """The two tail probabilities behind the certified delta.

    The first branch is the loss tail when the released constant is sup_l
    against inf_l; the second is the reverse ordering.
    """
    _check_range(sup_l, inf_l)
    if epsilon < 0.0:
        raise ConfigurationError(f"epsilon must be nonnegative, got {epsilon}")
    if not theta > 0.0:
        raise ConfigurationError(f"theta must be positive, got {theta}")
    a = sup_l / theta
    b = inf_l / theta
    coef = theta / (sup_l - inf_l)
    log_ratio = lgamma(a) - lgamma(b)
    branch1 = _regularized_pq(a, coef * (epsilon + log_ratio))[1]
    branch2 = _regularized_pq(b, coef * (-epsilon + log_ratio))[0]
    return branch1, branch2


def delta_bound(epsilon: float, theta: float, sup_l: float, inf_l: float) -> float:
    """Smallest certifiable delta at (epsilon, theta), clamped to [0, 1]."""
    b1, b2 = delta_bound_branches(epsilon, theta, sup_l, inf_l)
    return min(max(max(b1, b2), 0.0), 1.0)


def delta_infimum(epsilon: float, sup_l: float, inf_l: float) -> float:
    """Limit of the certified delta as theta grows without bound.

    The second branch does not vanish with more noise: it tends to
    exp(-inf_l * (epsilon + log(sup_l/inf_l)) / (sup_l - inf_l)). Targets
    below this floor are unreachable at any noise scale.
    """
    _check_range(sup_l, inf_l)
    return math.exp(-inf_l * (epsilon + math.log(sup_l / inf_l)) / (sup_l - inf_l))


def solve_noise_scale(
    epsilon: float,
    delta: float,
    sup_l: float,
    inf_l: float,
    rel_tol: float = 1e-6,
) -> float:
    """Smallest noise scale whose certified delta meets the target.

    The certified delta decreases from 1 (theta -> 0) towards the positive
    floor of :func:`delta_infimum` as theta grows, so the achievable set of
    noise scales is an upper ray; bisection returns its boundary to the
    requested relative precision. Raises when the target is below the floor.
    """
    _check_range(sup_l, inf_l)
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"delta target must lie in (0, 1), got {delta}")
    lo = 1e-6 * inf_l
    if delta_bound(epsilon, lo, sup_l, inf_l) <= delta:
        return lo
    hi = lo
    for _ in range(200):
        hi *= 2.0
        if delta_bound(epsilon, hi, sup_l, inf_l) <= delta:
            break
    else:
        floor = delta_infimum(epsilon, sup_l, inf_l)
        raise ConfigurationError(
            "privacy target unachievable: "
            f"certified delta cannot go below {floor:.6g} at epsilon={epsilon} "
            f"for sensitivity range [{inf_l:.6g}, {sup_l:.6g}], requested delta={delta}"
        )
    lo = hi / 2.0
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if delta_bound(epsilon, mid, sup_l, inf_l) <= delta:
            hi = mid
        else:
            lo = mid
    return hi
