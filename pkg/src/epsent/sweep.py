"""The (sigma, eps) grid experiment: run, detect, export.

Each grid cell generates one noisy orbit, codes it symbolically and measures
its compression rate, block-entropy rate and conditional entropy, alongside
the one-step mismatch probability and the analytic bound set.  Cell seeds are
pure functions of (master seed, sigma index, eps index) on the sorted grid,
so results are independent of execution order and worker count; re-running a
sweep reproduces the output byte for byte.

The noise-free quantities the bounds need (entropy proxy, convergence depth,
refined-partition diameter) come from one companion run with sigma = 0,
encoded against each partition of the grid.  A failed cell is logged and
dropped from its curve rather than aborting the sweep.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .bounds import BoundSet, envelope
from .compressor import castore_encode, lz78_encode
from .config import RunConfig
from .dynamics import MapSpec, NoiseSpec, sample_invariant_orbit
from .estimators import (
    block_entropy_rate,
    choose_n0,
    conditional_entropy,
    default_max_block,
    estimate_p,
)
from .partition import Partition, encode, refine_cylinders
from .seeds import cell_seed, companion_seed

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "sigma",
    "eps",
    "n_cells",
    "orbit_len",
    "compression_rate_bits",
    "block_rate_bits",
    "cond_entropy_bits",
    "n0",
    "p_hat",
    "p_halfwidth",
    "pure_noise_line",
    "kifer_lower",
    "upper_bound",
    "envelope_low",
    "envelope_high",
    "cell_seed",
)


@dataclass(frozen=True)
class CompanionStats:
    """Noise-free reference quantities for one partition of the grid."""

    n_cells: int
    h_eps: float
    delta_gap: float
    n0: int
    eps_n0: float
    converged: bool


@dataclass(frozen=True)
class CurvePoint:
    eps: float
    n_cells: int
    compression_rate: float
    block_rate: float
    cond_entropy: float
    n0: int
    p_hat: float
    p_halfwidth: float
    bounds: BoundSet
    upper_bound: float
    cell_seed: int


@dataclass
class EntropyCurve:
    """Measured h(eps) curve for one noise amplitude, eps decreasing."""

    sigma: float
    points: list[CurvePoint]
    orbit_len: int
    map: MapSpec
    noise_mode: str
    master_seed: int


@dataclass(frozen=True)
class SigmaDetection:
    """Edges of the flat and pure-noise regimes of one curve."""

    eps1: float
    eps2: float
    status: str  # detected | plateau_only | noise_only | undetermined

    @property
    def sigma_estimate(self) -> float:
        if self.status != "detected":
            return math.nan
        return math.sqrt(self.eps1 * self.eps2)


def _sorted_grid(config: RunConfig) -> tuple[tuple[float, ...], tuple[int, ...]]:
    return (
        tuple(sorted(set(config.sigma), reverse=True)),
        tuple(sorted(set(config.n_list))),
    )


def companion_stats(config: RunConfig, spec: MapSpec | None = None) -> list[CompanionStats]:
    """Noise-free run of the configured system, summarized per partition."""
    spec = spec or MapSpec(config.map, config.lam)
    _, cells = _sorted_grid(config)
    noise0 = NoiseSpec(
        sigma=0.0, mode="none", boundary=config.boundary, seed=companion_seed(config.seed)
    )
    orbit = sample_invariant_orbit(spec, noise0, config.length, config.burn_in)
    out = []
    for n in cells:
        part = Partition(n)
        seq = encode(orbit, part)
        max_depth = None if config.max_block is None else config.max_block - 1
        sel = choose_n0(
            seq, config.delta, max_depth=max_depth, miller_madow=config.miller_madow
        )
        cyl = refine_cylinders(spec, part, sel.n0)
        out.append(
            CompanionStats(
                n_cells=n,
                h_eps=sel.deepest,
                delta_gap=sel.gap,
                n0=sel.n0,
                eps_n0=cyl.min_diameter,
                converged=sel.converged,
            )
        )
    return out


def _cell_task(
    args: tuple[RunConfig, float, int, int, int, CompanionStats],
) -> CurvePoint | None:
    config, sigma, n, si, ei, comp = args
    try:
        spec = MapSpec(config.map, config.lam)
        part = Partition(n)
        eps = part.diameter
        seed = cell_seed(config.seed, si, ei)
        noise = NoiseSpec(
            sigma=sigma, mode=config.noise_mode, boundary=config.boundary, seed=seed
        )

        orbit = sample_invariant_orbit(spec, noise, config.length, config.burn_in)
        seq = encode(orbit, part)

        encoder = lz78_encode if config.algorithm == "lz78" else castore_encode
        _, report = encoder(seq)

        block_depth = (
            config.max_block
            if config.max_block is not None
            else default_max_block(config.length, n)
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            block_rate = block_entropy_rate(seq, block_depth, config.miller_madow)
            cond_e = conditional_entropy(seq, comp.n0, config.miller_madow)

        p_hat, p_half = estimate_p(spec, part, noise, config.p_samples)
        density_bound = 1.0 / (2.0 * sigma) if sigma > 0.0 else math.inf
        bset = envelope(
            comp.h_eps, comp.delta_gap, p_hat, sigma, eps, comp.eps_n0, density_bound
        )
        upper = bset.output_upper if config.noise_mode == "output" else bset.dynamical_upper
        return CurvePoint(
            eps=eps,
            n_cells=n,
            compression_rate=report.rate,
            block_rate=block_rate,
            cond_entropy=cond_e,
            n0=comp.n0,
            p_hat=p_hat,
            p_halfwidth=p_half,
            bounds=bset,
            upper_bound=upper,
            cell_seed=seed,
        )
    except Exception:
        log.exception("grid cell sigma=%s n_cells=%s failed", sigma, n)
        return None


def run_grid(config: RunConfig) -> list[EntropyCurve]:
    """Run the full grid and return one curve per sigma, largest sigma first."""
    config = config.validate()
    spec = MapSpec(config.map, config.lam)
    sigmas, cells = _sorted_grid(config)
    comps = companion_stats(config, spec)

    tasks = [
        (config, sigma, n, si, ei, comps[ei])
        for si, sigma in enumerate(sigmas)
        for ei, n in enumerate(cells)
    ]
    if config.workers == 1:
        results = [_cell_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_cell_task, tasks))

    curves = []
    per_sigma = len(cells)
    for si, sigma in enumerate(sigmas):
        points = [
            p for p in results[si * per_sigma : (si + 1) * per_sigma] if p is not None
        ]
        points.sort(key=lambda p: -p.eps)
        curves.append(
            EntropyCurve(
                sigma=sigma,
                points=points,
                orbit_len=config.length,
                map=spec,
                noise_mode=config.noise_mode,
                master_seed=config.seed,
            )
        )
    return curves


def detect_sigma(
    curve: EntropyCurve | Sequence[tuple[float, float]],
    flat_slope: float = 0.15,
    noise_slope: float = 0.85,
) -> SigmaDetection:
    """Locate the flat-regime edge eps1 and the noise-regime edge eps2.

    All slopes are taken against log2(1/eps) on the grid sorted by
    decreasing eps.  eps1 is the smallest eps whose whole trailing window
    (every coarser scale) has mean slope below ``flat_slope``: down to that
    scale the entropy estimate has not started growing.  eps2 is the largest
    eps whose whole leading window (every finer scale) has local slope above
    ``noise_slope``: from that scale on the curve climbs like -log2(eps).
    When both edges exist with eps2 < eps1, the interval (eps2, eps1)
    brackets the noise amplitude.

    On a full :class:`EntropyCurve` the plateau edge is judged on the
    conditional-entropy estimates, which stay flat where the dictionary
    coder's size-dependent redundancy already slopes upward, while the noise
    edge is judged on the compression rate, whose climb in the noise regime
    is steep and monotone.  A bare (eps, rate) sequence uses the one series
    for both edges; (eps, rate, plateau_value) triples split them the same
    way the full curve does.
    """
    if isinstance(curve, EntropyCurve):
        pts = sorted(curve.points, key=lambda p: -p.eps)
        eps = [p.eps for p in pts]
        plateau_series = [p.cond_entropy for p in pts]
        noise_series = [p.compression_rate for p in pts]
    else:
        rows = sorted((tuple(map(float, row)) for row in curve), key=lambda t: -t[0])
        eps = [r[0] for r in rows]
        noise_series = [r[1] for r in rows]
        plateau_series = [r[2] if len(r) > 2 else r[1] for r in rows]
    m = len(eps)
    if m < 4:
        return SigmaDetection(math.nan, math.nan, "undetermined")

    t = [math.log2(1.0 / e) for e in eps]

    eps1 = math.nan
    for i in range(1, m):
        mean_slope = (plateau_series[i] - plateau_series[0]) / (t[i] - t[0])
        if mean_slope < flat_slope:
            eps1 = eps[i]
        else:
            break

    local = []
    for i in range(m):
        lo = max(0, i - 1)
        hi = min(m - 1, i + 1)
        local.append((noise_series[hi] - noise_series[lo]) / (t[hi] - t[lo]))
    eps2 = math.nan
    for i in range(m - 1, -1, -1):
        if local[i] > noise_slope:
            eps2 = eps[i]
        else:
            break

    have1 = not math.isnan(eps1)
    have2 = not math.isnan(eps2)
    if have1 and have2:
        status = "detected" if eps2 < eps1 else "undetermined"
    elif have1:
        status = "plateau_only"
    elif have2:
        status = "noise_only"
    else:
        status = "undetermined"
    return SigmaDetection(eps1=eps1, eps2=eps2, status=status)


def _fmt(value: float | int) -> str:
    if isinstance(value, (int,)):
        return str(value)
    return f"{value:.9g}"


def curves_to_rows(curves: Sequence[EntropyCurve]) -> list[list[str]]:
    """CSV body rows (sigma desc, eps desc), formatted at 9 significant digits."""
    ordered = sorted(curves, key=lambda c: -c.sigma)
    rows = []
    for curve in ordered:
        for p in sorted(curve.points, key=lambda p: -p.eps):
            rows.append(
                [
                    _fmt(curve.sigma),
                    _fmt(p.eps),
                    str(p.n_cells),
                    str(curve.orbit_len),
                    _fmt(p.compression_rate),
                    _fmt(p.block_rate),
                    _fmt(p.cond_entropy),
                    str(p.n0),
                    _fmt(p.p_hat),
                    _fmt(p.p_halfwidth),
                    _fmt(p.bounds.pure_noise_line),
                    _fmt(p.bounds.kifer_lower),
                    _fmt(p.upper_bound),
                    _fmt(p.bounds.envelope_low),
                    _fmt(p.bounds.envelope_high),
                    str(p.cell_seed),
                ]
            )
    return rows


def emit_csv(curves: Sequence[EntropyCurve], path: str) -> None:
    """Write the curves as CSV; identical inputs produce identical bytes."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for row in curves_to_rows(curves):
                fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def emit_plot_data(curves: Sequence[EntropyCurve], path: str) -> None:
    """Whitespace table for gnuplot: one block per sigma, x = eps, y = rate."""
    ordered = sorted(curves, key=lambda c: -c.sigma)
    try:
        with open(path, "w") as fh:
            for i, curve in enumerate(ordered):
                if i:
                    fh.write("\n\n")
                fh.write(f"# sigma = {_fmt(curve.sigma)}\n")
                for p in sorted(curve.points, key=lambda p: -p.eps):
                    fh.write(f"{_fmt(p.eps)} {_fmt(p.compression_rate)}\n")
    except OSError as exc:
        raise OSError(f"cannot write plot data to {path}: {exc}") from exc
