"""Orbits of one-dimensional interval maps under i.i.d. bounded noise.

Three map families on [0,1] are supported: the logistic family
``x -> lam*x*(1-x)``, the doubling map ``x -> 2x mod 1`` and the tent map
``x -> 1 - |1 - 2x|``.  Noise is uniform on [-sigma, sigma] and acts either on
the observations only (``output``) or inside the recurrence (``dynamical``).
A boundary policy (clamp or reflect) keeps every emitted point in [0,1].

Precision note: for the doubling and tent maps the recurrence is exact in
binary floating point, so a double-precision orbit runs out of mantissa bits
after ~52 steps and collapses onto a fixed point.  Orbit generation for those
maps therefore tracks the state as a 64-bit integer window onto the binary
expansion of the initial condition, appending one seeded random bit per step.
This samples the initial condition lazily to unbounded precision and is
statistically exact for Lebesgue-random starting points; emitted points are
the rounded doubles.  The logistic map has no such degeneracy and is iterated
directly in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .seeds import BITS_STREAM, INIT_STREAM, NOISE_STREAM, mix

MapKind = Literal["logistic", "doubling", "tent"]
NoiseMode = Literal["none", "output", "dynamical"]
BoundaryPolicy = Literal["clamp", "reflect"]

_MASK64 = (1 << 64) - 1
_SCALE64 = float(2**64)


@dataclass(frozen=True)
class MapSpec:
    """A piecewise monotone map of [0,1] with its branch structure."""

    kind: MapKind
    lam: float = 4.0

    def __post_init__(self) -> None:
        if self.kind not in ("logistic", "doubling", "tent"):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.kind == "logistic" and not 0.0 < self.lam <= 4.0:
            raise ValueError(f"logistic parameter must be in (0, 4], got {self.lam}")

    @property
    def branch_points(self) -> tuple[float, ...]:
        """Monotonicity breakpoints strictly inside (0,1)."""
        return (0.5,)


@dataclass(frozen=True)
class NoiseSpec:
    """i.i.d. uniform noise on [-sigma, sigma] plus how it enters the system."""

    sigma: float = 0.0
    mode: NoiseMode = "none"
    boundary: BoundaryPolicy = "reflect"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.mode not in ("none", "output", "dynamical"):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if self.boundary not in ("clamp", "reflect"):
            raise ValueError(f"unknown boundary policy {self.boundary!r}")

    @property
    def effective_mode(self) -> NoiseMode:
        """sigma == 0 behaves exactly like mode 'none' regardless of mode."""
        return "none" if self.sigma == 0.0 else self.mode


@dataclass
class RealOrbit:
    """A finite orbit; a pure function of (map, noise incl. seed, x0, length)."""

    points: np.ndarray
    map: MapSpec
    noise: NoiseSpec
    x0: float

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class MapBranch:
    """One monotone branch: domain, range and the inverse on that range."""

    lo: float
    hi: float
    range_lo: float
    range_hi: float
    increasing: bool
    inverse: Callable[[float], float] = field(compare=False)


def iterate_map(spec: MapSpec, x: float) -> float:
    """Apply the map once to a point of [0,1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"point {x} outside [0,1]")
    if spec.kind == "logistic":
        return spec.lam * x * (1.0 - x)
    if spec.kind == "doubling":
        y = 2.0 * x
        return y - math.floor(y) if x < 1.0 else 0.0
    return 1.0 - abs(1.0 - 2.0 * x)


def iterate_map_array(spec: MapSpec, x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`iterate_map` (no per-point domain check)."""
    if spec.kind == "logistic":
        return spec.lam * x * (1.0 - x)
    if spec.kind == "doubling":
        y = 2.0 * x
        out = y - np.floor(y)
        return np.where(x >= 1.0, 0.0, out)
    return 1.0 - np.abs(1.0 - 2.0 * x)


def map_branches(spec: MapSpec) -> tuple[MapBranch, ...]:
    """Monotone branch decomposition used by cylinder refinement."""
    if spec.kind == "logistic":
        lam = spec.lam
        top = lam / 4.0

        def inv_left(y: float, lam: float = lam) -> float:
            arg = max(0.0, 1.0 - 4.0 * y / lam)
            return 0.5 * (1.0 - math.sqrt(arg))

        def inv_right(y: float, lam: float = lam) -> float:
            arg = max(0.0, 1.0 - 4.0 * y / lam)
            return 0.5 * (1.0 + math.sqrt(arg))

        return (
            MapBranch(0.0, 0.5, 0.0, top, True, inv_left),
            MapBranch(0.5, 1.0, 0.0, top, False, inv_right),
        )
    if spec.kind == "doubling":
        return (
            MapBranch(0.0, 0.5, 0.0, 1.0, True, lambda y: 0.5 * y),
            MapBranch(0.5, 1.0, 0.0, 1.0, True, lambda y: 0.5 * (1.0 + y)),
        )
    return (
        MapBranch(0.0, 0.5, 0.0, 1.0, True, lambda y: 0.5 * y),
        MapBranch(0.5, 1.0, 0.0, 1.0, False, lambda y: 1.0 - 0.5 * y),
    )


def sample_noise(noise: NoiseSpec, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. uniform values in [-sigma, sigma], seeded.

    sigma == 0 returns zeros without consuming any generator state.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if noise.sigma == 0.0:
        return np.zeros(count)
    rng = np.random.default_rng(mix(noise.seed, NOISE_STREAM))
    return rng.uniform(-noise.sigma, noise.sigma, size=count)


def apply_boundary(y: float, policy: BoundaryPolicy) -> float:
    """Map an arbitrary real back into [0,1] by clamping or reflection."""
    if policy == "clamp":
        return 0.0 if y < 0.0 else 1.0 if y > 1.0 else y
    if 0.0 <= y <= 1.0:
        return y
    y = y % 2.0
    return 2.0 - y if y > 1.0 else y


def apply_boundary_array(y: np.ndarray, policy: BoundaryPolicy) -> np.ndarray:
    if policy == "clamp":
        return np.clip(y, 0.0, 1.0)
    y = np.mod(y, 2.0)
    return np.where(y > 1.0, 2.0 - y, y)


def _lazy_bits(noise: NoiseSpec, count: int) -> np.ndarray:
    rng = np.random.default_rng(mix(noise.seed, BITS_STREAM))
    return rng.integers(0, 2, size=count, dtype=np.uint8)


def _shift_state(kind: MapKind, state: int, bit: int) -> int:
    """Exact map step on the 64-bit binary-expansion window."""
    top = state >> 63
    state = ((state << 1) | bit) & _MASK64
    if kind == "tent" and top:
        state = _MASK64 - state
    return state


def generate_orbit(spec: MapSpec, x0: float, length: int, noise: NoiseSpec) -> RealOrbit:
    """Generate an orbit of ``length`` points starting from ``x0``.

    mode 'none':      x_{n+1} = f(x_n), emits x_n.
    mode 'output':    internal orbit unperturbed, emits policy(x_n + w_n).
    mode 'dynamical': x_{n+1} = policy(f(x_n) + w_{n+1}), emits x_n.

    The first emitted point is x0 (policy(x0 + w_0) for output noise).
    """
    if not 0.0 <= x0 <= 1.0:
        raise ValueError(f"x0 {x0} outside [0,1]")
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")

    mode = noise.effective_mode
    policy = noise.boundary
    w = sample_noise(noise, length) if mode != "none" else None

    points = np.empty(length)
    if spec.kind == "logistic":
        lam = spec.lam
        x = x0
        if mode == "dynamical":
            wl = w.tolist()
            for n in range(length):
                points[n] = x
                if n + 1 < length:
                    x = apply_boundary(lam * x * (1.0 - x) + wl[n + 1], policy)
        else:
            for n in range(length):
                points[n] = x
                x = lam * x * (1.0 - x)
    else:
        bits = _lazy_bits(noise, length).tolist()
        state = min(int(x0 * _SCALE64), _MASK64)
        kind = spec.kind
        if mode == "dynamical":
            wl = w.tolist()
            for n in range(length):
                points[n] = state / _SCALE64
                if n + 1 < length:
                    state = _shift_state(kind, state, bits[n])
                    y = apply_boundary(state / _SCALE64 + wl[n + 1], policy)
                    state = min(int(y * _SCALE64), _MASK64)
        else:
            for n in range(length):
                points[n] = state / _SCALE64
                state = _shift_state(kind, state, bits[n])

    if mode == "output":
        points = apply_boundary_array(points + w, policy)
    return RealOrbit(points=points, map=spec, noise=noise, x0=x0)


def sample_invariant_orbit(
    spec: MapSpec,
    noise: NoiseSpec,
    length: int,
    burn_in: int = 1000,
) -> RealOrbit:
    """Orbit whose start is relaxed onto the (empirical) invariant measure.

    Draws x0 from the seed's init stream, runs ``burn_in`` discarded iterates
    under the same noise action, then emits ``length`` points.
    """
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    rng = np.random.default_rng(mix(noise.seed, INIT_STREAM))
    x0 = float(rng.uniform(0.0, 1.0))
    full = generate_orbit(spec, x0, burn_in + length, noise)
    pts = full.points[burn_in:]
    return RealOrbit(points=pts, map=spec, noise=noise, x0=float(pts[0]))


def dump_orbit(orbit: RealOrbit, path: str) -> None:
    """Debug dump: one point per line, 17 significant digits."""
    with open(path, "w") as fh:
        for x in orbit.points:
            fh.write(f"{x:.17g}\n")
