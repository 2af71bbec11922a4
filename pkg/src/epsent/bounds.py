"""Analytic envelopes for the scale-dependent entropy of a noisy system.

All values are in bits.  The upper bounds combine the noise-free entropy
estimate h(eps) with the one-step cell-mismatch probability p: a perturbed
symbol stream can be described by flagging mismatched symbols (a p-coin,
H(p) bits each) plus, per mismatch, which of the 2*ceil(sigma/scale) reachable
cells the noise chose.  The lower bound is Kifer's density bound
-log2(eps) - log2(K) for transition densities bounded by K; uniform noise on
[-sigma, sigma] has K = 1/(2*sigma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .estimators import bernoulli_entropy

_CEIL_REL_TOL = 1e-9


def _ceil_cells(sigma: float, scale: float) -> int:
    """ceil(sigma/scale), snapping ratios within 1e-9 of an integer down.

    Floating division can land an exact ratio like 0.02/0.004 a hair above 5;
    the snap keeps the bound piecewise constant exactly between multiples.
    """
    q = sigma / scale
    k = math.ceil(q - _CEIL_REL_TOL * max(1.0, q))
    return max(1, k)


def _validate_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0,1]")


def output_noise_upper(h_eps: float, p: float, sigma: float, eps: float) -> float:
    """Upper bound on the perturbed entropy under output noise."""
    _validate_p(p)
    if eps <= 0.0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        if p > 0.0:
            raise ValueError("sigma = 0 is inconsistent with p > 0")
        return h_eps
    return h_eps + p * math.log2(2 * _ceil_cells(sigma, eps)) + bernoulli_entropy(p)


def dynamical_noise_upper(
    h_eps: float, delta: float, p: float, sigma: float, eps_n0: float
) -> float:
    """Upper bound under dynamical noise, at the refined-partition scale."""
    _validate_p(p)
    if delta < 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if eps_n0 <= 0.0:
        raise ValueError(f"eps_n0 must be > 0, got {eps_n0}")
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        if p > 0.0:
            raise ValueError("sigma = 0 is inconsistent with p > 0")
        return h_eps + delta
    return (
        h_eps
        + delta
        + p * math.log2(2 * _ceil_cells(sigma, eps_n0))
        + bernoulli_entropy(p)
    )


def kifer_lower(eps: float, density_bound: float) -> float:
    """Lower bound -log2(eps) - log2(K) for transition densities <= K."""
    if eps <= 0.0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if not density_bound > 0.0:
        raise ValueError(f"density bound must be > 0, got {density_bound}")
    if math.isinf(density_bound):
        return -math.inf
    return -math.log2(eps) - math.log2(density_bound)


@dataclass(frozen=True)
class BoundSet:
    """Every analytic bound for one (sigma, eps) cell, plus the inputs."""

    pure_noise_line: float
    kifer_lower: float
    output_upper: float
    dynamical_upper: float
    envelope_low: float
    envelope_high: float
    inputs_echo: tuple[float, float, float, float, float, float, float]


def envelope(
    h_eps: float,
    delta: float,
    p: float,
    sigma: float,
    eps: float,
    eps_n0: float,
    density_bound: float,
) -> BoundSet:
    """Assemble the two-regime envelope for one grid cell.

    Coarse regime (eps >= sigma and eps_n0 > sigma): the dynamical upper
    bound, whose cell factor collapses to log2(2).  Fine regime: the same
    bound capped by the pure-noise line -log2(eps).  The lower edge is always
    Kifer's bound.  Regime violations are the caller's to flag, not errors.
    """
    pure = -math.log2(eps)
    low = kifer_lower(eps, density_bound)
    out_up = output_noise_upper(h_eps, p, sigma, eps)
    dyn_up = dynamical_noise_upper(h_eps, delta, p, sigma, eps_n0)
    if sigma == 0.0 or (eps >= sigma and eps_n0 > sigma):
        high = dyn_up
    else:
        high = min(pure, dyn_up)
    return BoundSet(
        pure_noise_line=pure,
        kifer_lower=low,
        output_upper=out_up,
        dynamical_upper=dyn_up,
        envelope_low=low,
        envelope_high=high,
        inputs_echo=(h_eps, p, sigma, eps, eps_n0, delta, density_bound),
    )
