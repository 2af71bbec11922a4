"""Plug-in entropy estimators for symbolic sequences.

All entropies are in bits.  Block entropies use the maximum-likelihood
(plug-in) estimator over sliding windows; an optional Miller-Madow correction
is available but off by default.  The conditional entropy of depth n is the
increment H_{n+1} - H_n, which converges to the per-symbol entropy rate much
faster than H_n / n.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .dynamics import (
    MapSpec,
    NoiseSpec,
    apply_boundary_array,
    iterate_map_array,
    sample_invariant_orbit,
)
from .partition import Partition, SymbolicSequence, word_counts
from .seeds import PROBE_NOISE_STREAM, PROBE_ORBIT_STREAM, mix

_NORMALIZATION_TOL = 1e-9


def partition_entropy(freqs: Mapping[object, float] | Iterable[float]) -> float:
    """Shannon entropy -sum(p * log2 p) of a normalized frequency table."""
    if isinstance(freqs, Mapping):
        p = np.asarray(list(freqs.values()), dtype=float)
    else:
        p = np.asarray(list(freqs), dtype=float)
    if p.size == 0:
        raise ValueError("empty frequency table")
    if p.min() < 0.0:
        raise ValueError("negative frequency")
    total = p.sum()
    if abs(total - 1.0) > _NORMALIZATION_TOL:
        raise ValueError(f"frequencies sum to {total}, not 1")
    nz = p[p > 0.0]
    return float(-(nz * np.log2(nz)).sum())


def _entropy_from_counts(counts: np.ndarray, miller_madow: bool = False) -> float:
    total = counts.sum()
    p = counts / total
    h = float(-(p * np.log2(p)).sum())
    if miller_madow:
        h += (len(counts) - 1) / (2.0 * total * math.log(2.0))
    return h


def block_entropy(seq: SymbolicSequence, n: int, miller_madow: bool = False) -> float:
    """Plug-in entropy H_n of the sliding length-n word distribution."""
    if n < 1:
        raise ValueError(f"block length must be >= 1, got {n}")
    _warn_if_undersampled(seq, n)
    _, counts = word_counts(seq, n)
    return _entropy_from_counts(counts, miller_madow)


def block_entropy_rate(seq: SymbolicSequence, n: int, miller_madow: bool = False) -> float:
    """H_n / n, the depth-n block estimate of the entropy rate."""
    return block_entropy(seq, n, miller_madow) / n


def conditional_entropy(seq: SymbolicSequence, n: int, miller_madow: bool = False) -> float:
    """Entropy increment H_{n+1} - H_n, clipped into [0, log2 N].

    This is the entropy of the next symbol conditioned on the previous n,
    under the empirical sliding-window measure.
    """
    if n < 1:
        raise ValueError(f"depth must be >= 1, got {n}")
    h_hi = block_entropy(seq, n + 1, miller_madow)
    h_lo = block_entropy(seq, n, miller_madow)
    return min(max(h_hi - h_lo, 0.0), math.log2(seq.alphabet_size))


def _warn_if_undersampled(seq: SymbolicSequence, n: int) -> None:
    need = 10 * seq.alphabet_size**n
    if len(seq) < need:
        warnings.warn(
            f"length {len(seq)} below recommended {need} for {n}-blocks over "
            f"{seq.alphabet_size} symbols; estimate may be biased",
            stacklevel=3,
        )


def bernoulli_entropy(p: float) -> float:
    """Entropy of a coin with bias p, in bits; H(0) = H(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0,1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def default_max_block(length: int, alphabet_size: int) -> int:
    """Deepest block length with >= 50 expected samples per word (min 2)."""
    if length < 2:
        return 2
    b = int(math.floor(math.log(length / 50.0) / math.log(alphabet_size))) if length > 50 else 1
    return max(2, b)


@dataclass(frozen=True)
class DepthSelection:
    """Result of scanning conditional entropies for convergence."""

    n0: int
    gap: float
    converged: bool
    cond_entropies: tuple[float, ...]

    @property
    def deepest(self) -> float:
        """Deepest conditional entropy: the working proxy for the rate limit."""
        return self.cond_entropies[-1]


def choose_n0(
    seq: SymbolicSequence,
    delta: float,
    max_depth: int | None = None,
    miller_madow: bool = False,
) -> DepthSelection:
    """Smallest depth whose conditional entropy sits within ``delta`` of the
    deepest estimable one.

    The true entropy rate is the limit of the conditional entropies; the
    deepest estimable value stands in for it.  If no depth qualifies, the
    maximum depth is returned with ``converged=False``.
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if max_depth is None:
        max_depth = default_max_block(len(seq), seq.alphabet_size) - 1
    max_depth = max(1, max_depth)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ces = [conditional_entropy(seq, d, miller_madow) for d in range(1, max_depth + 1)]
    target = ces[-1]
    for depth, ce in enumerate(ces, start=1):
        if abs(ce - target) <= delta:
            return DepthSelection(depth, abs(ce - target), True, tuple(ces))
    return DepthSelection(max_depth, abs(ces[-1] - target), False, tuple(ces))


def estimate_p(
    spec: MapSpec,
    partition: Partition,
    noise: NoiseSpec,
    samples: int,
    burn_in: int = 1000,
) -> tuple[float, float]:
    """Monte-Carlo one-step cell-mismatch probability and 95% half-width.

    Estimates P{ cell(policy(f(x) + w)) != cell(f(x)) } with x drawn from a
    burned-in orbit of the system and w drawn fresh from the noise law.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if noise.sigma == 0.0 or noise.mode == "none":
        return 0.0, 0.0

    base_sigma = noise.sigma if noise.mode == "dynamical" else 0.0
    base = NoiseSpec(
        sigma=base_sigma,
        mode="dynamical" if base_sigma > 0.0 else "none",
        boundary=noise.boundary,
        seed=mix(noise.seed, PROBE_ORBIT_STREAM),
    )
    orbit = sample_invariant_orbit(spec, base, samples, burn_in)
    fx = iterate_map_array(spec, orbit.points)

    w_rng = np.random.default_rng(mix(noise.seed, PROBE_NOISE_STREAM))
    w = w_rng.uniform(-noise.sigma, noise.sigma, size=samples)
    moved = apply_boundary_array(fx + w, noise.boundary)

    n = partition.n_cells
    before = np.minimum(np.floor(fx * n).astype(np.int64), n - 1)
    after = np.minimum(np.floor(moved * n).astype(np.int64), n - 1)
    p_hat = float(np.mean(before != after))
    halfwidth = 1.96 * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / samples)
    return p_hat, halfwidth
