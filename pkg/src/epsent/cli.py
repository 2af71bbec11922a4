"""Command-line front door.

Subcommands: ``sweep`` (grid experiment -> CSV / plot data), ``simulate``
(single orbit dump), ``compress`` / ``decompress`` (standalone symbol files),
``detect`` (read a sweep CSV, locate the noise scale per curve) and
``selftest`` (run the built-in analytic oracles).

Exit codes: 0 success, 1 runtime failure, 2 configuration error.  Warnings go
to stderr; bulk data goes to files only.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from collections import defaultdict

import numpy as np

from . import bounds, compressor, estimators
from .config import ConfigError, load_config
from .dynamics import MapSpec, NoiseSpec, dump_orbit, generate_orbit, iterate_map, sample_invariant_orbit, sample_noise
from .partition import Partition, empirical_cell_frequencies, encode, refine_cylinders
from .sweep import detect_sigma, emit_csv, emit_plot_data, run_grid

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epsent",
        description="Scale-dependent entropy estimation for noisy one-dimensional maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run the (sigma, eps) grid and write CSV/plot data")
    sweep.add_argument("--config", help="JSON config file; flags override it")
    sweep.add_argument("--map", choices=["logistic", "doubling", "tent"])
    sweep.add_argument("--lambda", dest="lam", type=float, help="logistic parameter in (0,4]")
    sweep.add_argument("--noise-mode", choices=["none", "output", "dynamical"])
    sweep.add_argument("--boundary", choices=["clamp", "reflect"])
    sweep.add_argument("--sigma", action="append", type=float, help="noise amplitude (repeatable)")
    sweep.add_argument("--cells", action="append", type=int, help="partition cell count (repeatable)")
    sweep.add_argument("--length", type=int, help="orbit length in symbols")
    sweep.add_argument("--burn-in", type=int, help="discarded start iterates")
    sweep.add_argument("--seed", type=int, help="master seed")
    sweep.add_argument("--workers", type=int, help="parallel worker processes")
    sweep.add_argument("--algorithm", choices=["lz78", "castore"])
    sweep.add_argument("--p-samples", type=int, help="Monte-Carlo samples for the mismatch probability")
    sweep.add_argument("--delta", type=float, help="conditional-entropy flatness tolerance")
    sweep.add_argument("--flat-slope", type=float)
    sweep.add_argument("--noise-slope", type=float)
    sweep.add_argument("--max-block", type=int, help="override the deepest block length")
    sweep.add_argument("--miller-madow", action="store_const", const=True, default=None)
    sweep.add_argument("--out-csv", help="CSV output path (default sweep.csv)")
    sweep.add_argument("--out-plot", help="gnuplot data output path")

    sim = sub.add_parser("simulate", help="dump one orbit, one point per line")
    sim.add_argument("--map", default="logistic", choices=["logistic", "doubling", "tent"])
    sim.add_argument("--lambda", dest="lam", type=float, default=4.0)
    sim.add_argument("--noise-mode", default="none", choices=["none", "output", "dynamical"])
    sim.add_argument("--boundary", default="clamp", choices=["clamp", "reflect"])
    sim.add_argument("--sigma", type=float, default=0.0)
    sim.add_argument("--length", type=int, default=1000)
    sim.add_argument("--burn-in", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--x0", type=float, help="explicit start point (skips burn-in)")
    sim.add_argument("--out", required=True)

    comp = sub.add_parser("compress", help="compress a whitespace-separated symbol file")
    comp.add_argument("--cells", type=int, required=True, help="alphabet size N")
    comp.add_argument("--algorithm", default="lz78", choices=["lz78", "castore"])
    comp.add_argument("input")
    comp.add_argument("output")

    dec = sub.add_parser("decompress", help="decompress a bitstream back to symbols")
    dec.add_argument("input")
    dec.add_argument("output")

    det = sub.add_parser("detect", help="locate the noise scale from a sweep CSV")
    det.add_argument("csv")
    det.add_argument("--flat-slope", type=float, default=0.15)
    det.add_argument("--noise-slope", type=float, default=0.85)

    sub.add_parser("selftest", help="run the built-in analytic oracles")
    return parser


def _cmd_sweep(args: argparse.Namespace) -> int:
    overrides = {
        "map": args.map,
        "lambda": args.lam,
        "noise_mode": args.noise_mode,
        "boundary": args.boundary,
        "sigma": args.sigma,
        "n_list": args.cells,
        "length": args.length,
        "burn_in": args.burn_in,
        "seed": args.seed,
        "workers": args.workers,
        "algorithm": args.algorithm,
        "p_samples": args.p_samples,
        "delta": args.delta,
        "flat_slope": args.flat_slope,
        "noise_slope": args.noise_slope,
        "max_block": args.max_block,
        "miller_madow": args.miller_madow,
        "out_csv": args.out_csv,
        "out_plot": args.out_plot,
    }
    cfg = load_config(args.config, overrides)
    curves = run_grid(cfg)
    out_csv = cfg.out_csv or "sweep.csv"
    emit_csv(curves, out_csv)
    print(f"wrote {out_csv}", file=sys.stderr)
    if cfg.out_plot:
        emit_plot_data(curves, cfg.out_plot)
        print(f"wrote {cfg.out_plot}", file=sys.stderr)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    spec = MapSpec(args.map, args.lam)
    noise = NoiseSpec(sigma=args.sigma, mode=args.noise_mode, boundary=args.boundary, seed=args.seed)
    if args.x0 is not None:
        orbit = generate_orbit(spec, args.x0, args.length, noise)
    else:
        orbit = sample_invariant_orbit(spec, noise, args.length, args.burn_in)
    dump_orbit(orbit, args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_compress(args: argparse.Namespace) -> int:
    with open(args.input) as fh:
        symbols = [int(tok) for tok in fh.read().split()]
    arr = np.asarray(symbols, dtype=np.int32)
    encoder = compressor.lz78_encode if args.algorithm == "lz78" else compressor.castore_encode
    stream, report = encoder(arr, alphabet_size=args.cells)
    with open(args.output, "wb") as fh:
        fh.write(stream)
    print(
        f"{report.algorithm}: {report.input_len} symbols -> {report.encoded_bits} bits "
        f"({report.rate:.4f} bits/symbol, {report.phrase_count} phrases)",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_decompress(args: argparse.Namespace) -> int:
    with open(args.input, "rb") as fh:
        stream = fh.read()
    seq, algorithm = compressor.decode(stream)
    with open(args.output, "w") as fh:
        for s in seq.symbols.tolist():
            fh.write(f"{s}\n")
    print(f"{algorithm}: recovered {len(seq)} symbols", file=sys.stderr)
    return EXIT_OK


def _cmd_detect(args: argparse.Namespace) -> int:
    by_sigma: dict[float, list[tuple[float, float, float]]] = defaultdict(list)
    with open(args.csv, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "sigma" not in reader.fieldnames:
            print(f"{args.csv}: not a sweep CSV", file=sys.stderr)
            return EXIT_RUNTIME
        for row in reader:
            by_sigma[float(row["sigma"])].append(
                (
                    float(row["eps"]),
                    float(row["compression_rate_bits"]),
                    float(row["cond_entropy_bits"]),
                )
            )
    for sigma in sorted(by_sigma, reverse=True):
        det = detect_sigma(by_sigma[sigma], args.flat_slope, args.noise_slope)
        est = f" sigma_estimate={det.sigma_estimate:.6g}" if det.status == "detected" else ""
        print(
            f"sigma={sigma:g} status={det.status} eps2={det.eps2:.6g} eps1={det.eps1:.6g}{est}"
        )
    return EXIT_OK


def _selftest_checks() -> list[tuple[str, str]]:
    """Run every oracle; returns (name, 'PASS'|'FAIL: why') pairs."""
    results: list[tuple[str, str]] = []

    def check(name: str, fn) -> None:
        try:
            fn()
            results.append((name, "PASS"))
        except Exception as exc:
            results.append((name, f"FAIL: {exc}"))

    def map_arithmetic() -> None:
        logistic = MapSpec("logistic", 4.0)
        assert iterate_map(logistic, 0.5) == 1.0
        assert iterate_map(logistic, 0.0) == 0.0
        assert abs(iterate_map(MapSpec("doubling"), 0.3) - 0.6) < 1e-12
        assert abs(iterate_map(MapSpec("tent"), 0.75) - 0.5) < 1e-12

    def noise_statistics() -> None:
        noise = NoiseSpec(sigma=0.1, mode="dynamical", seed=7)
        draws = sample_noise(noise, 100_000)
        assert abs(float(draws.mean())) < 3 * (0.1 / math.sqrt(3)) / math.sqrt(100_000)
        assert float(np.abs(draws).max()) <= 0.1

    def orbit_determinism() -> None:
        spec = MapSpec("logistic", 4.0)
        noise = NoiseSpec(sigma=0.01, mode="dynamical", seed=11)
        a = generate_orbit(spec, 0.2, 5000, noise).points
        b = generate_orbit(spec, 0.2, 5000, noise).points
        assert np.array_equal(a, b)
        assert float(a.min()) >= 0.0 and float(a.max()) <= 1.0

    def doubling_rate_oracle() -> None:
        spec = MapSpec("doubling")
        noise = NoiseSpec(sigma=0.0, mode="none", seed=23)
        orbit = sample_invariant_orbit(spec, noise, 200_000)
        seq = encode(orbit, Partition(2))
        _, report = compressor.lz78_encode(seq)
        assert 0.85 <= report.rate <= 1.2, f"rate {report.rate:.4f}"
        rate10 = estimators.block_entropy_rate(seq, 10)
        assert 0.9 <= rate10 <= 1.1, f"block rate {rate10:.4f}"

    def iid_rate_oracle() -> None:
        rng = np.random.default_rng(2)
        symbols = rng.integers(0, 4, size=200_000, dtype=np.int32)
        _, report = compressor.lz78_encode(symbols, alphabet_size=4)
        assert 0.9 * 2.0 <= report.rate <= 1.3 * 2.0, f"rate {report.rate:.4f}"

    def bound_arithmetic() -> None:
        assert abs(bounds.output_noise_upper(1.0, 0.1, 0.1, 0.5) - 1.5690) < 1e-3
        assert abs(bounds.output_noise_upper(1.0, 0.5, 0.02, 0.004) - 3.66096) < 1e-3
        assert abs(bounds.kifer_lower(1.0 / 250.0, 1.0) - math.log2(250)) < 1e-9
        assert abs(bounds.dynamical_noise_upper(1.0, 0.05, 0.1, 0.02, 0.125) - 1.6190) < 1e-3

    def round_trips() -> None:
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(2, 17))
            length = int(rng.integers(0, 400))
            symbols = rng.integers(0, n, size=length, dtype=np.int32)
            for enc in (compressor.lz78_encode, compressor.castore_encode):
                stream, report = enc(symbols, alphabet_size=n)
                seq, _ = compressor.decode(stream)
                assert np.array_equal(seq.symbols, symbols)
                assert compressor.content_hash(seq.symbols) == report.content_hash

    def cylinder_geometry() -> None:
        cyl = refine_cylinders(MapSpec("logistic", 4.0), Partition(2), 2)
        lo = 0.5 * (1.0 - math.sqrt(0.5))
        assert abs(cyl.min_diameter - lo) < 1e-12
        assert len(cyl.intervals) == 4
        dy = refine_cylinders(MapSpec("doubling"), Partition(2), 3)
        assert len(dy.intervals) == 8
        assert abs(dy.min_diameter - 0.125) < 1e-12

    def periodic_estimators() -> None:
        # odd length keeps the sliding-window word counts exactly balanced
        seq = encode(np.tile([0.25, 0.75], 500)[:-1], Partition(2))
        assert abs(estimators.block_entropy_rate(seq, 4) - 0.25) < 1e-9
        assert estimators.conditional_entropy(seq, 2) < 1e-9
        freqs = empirical_cell_frequencies(seq, 2)
        assert abs(sum(freqs.values()) - 1.0) < 1e-12

    def mismatch_probability() -> None:
        part = Partition(2)
        silent = NoiseSpec(sigma=0.0, mode="dynamical", seed=5)
        p0, _ = estimators.estimate_p(MapSpec("logistic", 4.0), part, silent, 10_000)
        assert p0 == 0.0
        loud = NoiseSpec(sigma=1.0, mode="dynamical", seed=5)
        p1, _ = estimators.estimate_p(MapSpec("logistic", 4.0), part, loud, 50_000)
        assert p1 >= 0.25, f"p_hat {p1:.4f}"

    def sweep_determinism() -> None:
        from .config import RunConfig
        from .sweep import curves_to_rows

        cfg = RunConfig(sigma=(0.05,), n_list=(2, 4), length=2000, p_samples=1000)
        assert curves_to_rows(run_grid(cfg)) == curves_to_rows(run_grid(cfg))

    def knee_detection() -> None:
        eps = [2 ** (-k / 4) for k in range(2, 40)]
        knee = detect_sigma([(e, max(1.0, -math.log2(e))) for e in eps])
        assert knee.status == "detected"
        assert 0.3 <= knee.sigma_estimate <= 0.8, f"estimate {knee.sigma_estimate:.3f}"
        assert detect_sigma([(e, 1.0) for e in eps]).status == "plateau_only"
        assert detect_sigma([(e, -math.log2(e)) for e in eps]).status == "noise_only"

    check("map arithmetic", map_arithmetic)
    check("noise statistics", noise_statistics)
    check("orbit determinism", orbit_determinism)
    check("doubling-map rate oracle", doubling_rate_oracle)
    check("iid source rate oracle", iid_rate_oracle)
    check("bound arithmetic", bound_arithmetic)
    check("compressor round trips", round_trips)
    check("cylinder geometry", cylinder_geometry)
    check("periodic-sequence estimators", periodic_estimators)
    check("mismatch probability", mismatch_probability)
    check("sweep determinism", sweep_determinism)
    check("knee detection", knee_detection)
    return results


def _cmd_selftest(_args: argparse.Namespace) -> int:
    results = _selftest_checks()
    width = max(len(name) for name, _ in results)
    failures = 0
    for name, status in results:
        print(f"{name:<{width}}  {status}")
        if status != "PASS":
            failures += 1
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_RUNTIME


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "sweep": _cmd_sweep,
        "simulate": _cmd_simulate,
        "compress": _cmd_compress,
        "decompress": _cmd_decompress,
        "detect": _cmd_detect,
        "selftest": _cmd_selftest,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failures map to exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
