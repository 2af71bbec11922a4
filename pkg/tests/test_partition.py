import math

import numpy as np
import pytest

from epsent.dynamics import MapSpec, NoiseSpec, generate_orbit, iterate_map
from epsent.partition import (
    Partition,
    ResourceLimitError,
    SymbolicSequence,
    empirical_cell_frequencies,
    encode,
    refine_cylinders,
    sliding_word_ids,
)


class TestEncode:
    def test_binary_threshold(self):
        seq = encode(np.array([0.3, 0.6, 0.2]), Partition(2))
        assert seq.symbols.tolist() == [0, 1, 0]

    def test_right_endpoint_in_last_cell(self):
        seq = encode(np.array([1.0]), Partition(4))
        assert seq.symbols.tolist() == [3]

    def test_half_open_cells(self):
        seq = encode(np.array([0.49999, 0.5]), Partition(2))
        assert seq.symbols.tolist() == [0, 1]

    def test_orbit_carries_meta(self):
        orbit = generate_orbit(MapSpec("doubling"), 0.3, 5, NoiseSpec(seed=0))
        seq = encode(orbit, Partition(8))
        assert seq.alphabet_size == 8
        assert seq.source_meta is not None
        assert seq.source_meta[2] == pytest.approx(0.125)

    def test_partition_validation(self):
        with pytest.raises(ValueError):
            Partition(1)


class TestRefineCylinders:
    def test_depth_one_is_the_partition(self):
        for kind in ("logistic", "doubling", "tent"):
            cyl = refine_cylinders(MapSpec(kind, 4.0), Partition(5), 1)
            assert len(cyl.intervals) == 5
            assert cyl.min_diameter == pytest.approx(0.2)
            assert [w for _, _, w in cyl.intervals] == [(i,) for i in range(5)]

    def test_doubling_depth_three_dyadic(self):
        cyl = refine_cylinders(MapSpec("doubling"), Partition(2), 3)
        assert len(cyl.intervals) == 8
        assert cyl.min_diameter == pytest.approx(0.125, abs=1e-12)
        # cylinder k is [k/8, (k+1)/8] with word = binary digits of k
        for k, (lo, hi, word) in enumerate(sorted(cyl.intervals)):
            assert lo == pytest.approx(k / 8, abs=1e-12)
            assert hi == pytest.approx((k + 1) / 8, abs=1e-12)
            assert word == ((k >> 2) & 1, (k >> 1) & 1, k & 1)

    def test_logistic_depth_two_breakpoints(self):
        cyl = refine_cylinders(MapSpec("logistic", 4.0), Partition(2), 2)
        lo_break = 0.5 * (1.0 - math.sqrt(0.5))
        hi_break = 0.5 * (1.0 + math.sqrt(0.5))
        edges = sorted({round(x, 12) for iv in cyl.intervals for x in iv[:2]})
        assert edges == pytest.approx([0.0, lo_break, 0.5, hi_break, 1.0], abs=1e-9)
        assert len(cyl.intervals) == 4
        assert cyl.min_diameter == pytest.approx(lo_break, abs=1e-12)
        words = [w for _, _, w in sorted(cyl.intervals)]
        assert words == [(0, 0), (0, 1), (1, 1), (1, 0)]

    @pytest.mark.parametrize(
        "kind,n_cells,depth",
        [("logistic", 3, 4), ("tent", 2, 5), ("doubling", 4, 3), ("logistic", 2, 6)],
    )
    def test_intervals_tile_unit_interval(self, kind, n_cells, depth):
        cyl = refine_cylinders(MapSpec(kind, 4.0), Partition(n_cells), depth)
        total = sum(hi - lo for lo, hi, _ in cyl.intervals)
        assert total == pytest.approx(1.0, abs=1e-9)
        ivs = sorted(cyl.intervals)
        for (al, ah, _), (bl, bh, _) in zip(ivs, ivs[1:]):
            assert bl >= ah - 1e-9

    @pytest.mark.parametrize("kind,n_cells,depth", [("logistic", 3, 4), ("tent", 3, 4)])
    def test_words_round_trip_through_midpoints(self, kind, n_cells, depth):
        spec = MapSpec(kind, 4.0)
        part = Partition(n_cells)
        cyl = refine_cylinders(spec, part, depth)
        for lo, hi, word in cyl.intervals:
            x = 0.5 * (lo + hi)
            itinerary = []
            for _ in range(depth):
                itinerary.append(part.cell_of(x))
                x = iterate_map(spec, x)
            assert tuple(itinerary) == word, f"cylinder [{lo},{hi}]"

    def test_odd_cell_count_merges_pieces_across_branch_point(self):
        # the middle cell of an odd partition straddles x=0.5; its preimage
        # pieces from the two branches must not double-count cylinders
        cyl = refine_cylinders(MapSpec("tent"), Partition(3), 2)
        total = sum(hi - lo for lo, hi, _ in cyl.intervals)
        assert total == pytest.approx(1.0, abs=1e-12)
        mid = [iv for iv in cyl.intervals if iv[0] < 0.5 < iv[1]]
        assert len(mid) <= 1

    def test_cap_enforced(self):
        with pytest.raises(ResourceLimitError, match="cap"):
            refine_cylinders(MapSpec("doubling"), Partition(2), 25, cap=1000)

    def test_depth_validation(self):
        with pytest.raises(ValueError):
            refine_cylinders(MapSpec("doubling"), Partition(2), 0)

    def test_dump_format(self, tmp_path):
        from epsent.partition import dump_cylinders

        cyl = refine_cylinders(MapSpec("doubling"), Partition(2), 2)
        path = tmp_path / "cyl.csv"
        dump_cylinders(cyl, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "left,right,word"
        assert len(lines) == 5
        left, right, word = lines[1].split(",")
        assert float(left) == 0.0 and float(right) == 0.25
        assert word == "0-0"


class TestNoisyWordInclusion:
    def test_unperturbed_words_survive_small_noise(self):
        # words realizable without noise stay realizable with noise: every
        # 6-word seen in a long quiet run must appear in a perturbed run too
        from epsent.dynamics import sample_invariant_orbit
        from epsent.partition import sliding_word_ids

        spec = MapSpec("doubling")
        part = Partition(2)
        quiet = sample_invariant_orbit(spec, NoiseSpec(sigma=0.0, mode="none", seed=47), 200_000)
        noisy = sample_invariant_orbit(
            spec, NoiseSpec(sigma=0.01, mode="dynamical", seed=48), 200_000
        )
        for depth in range(1, 7):
            quiet_words = set(sliding_word_ids(encode(quiet, part).symbols, depth, 2).tolist())
            noisy_words = set(sliding_word_ids(encode(noisy, part).symbols, depth, 2).tolist())
            assert quiet_words <= noisy_words


class TestFrequencies:
    def test_alternating_pairs(self):
        seq = SymbolicSequence(np.array([0, 1, 0, 1, 0]), 2)
        freqs = empirical_cell_frequencies(seq, 2)
        assert freqs == {(0, 1): 0.5, (1, 0): 0.5}

    def test_constant_singletons(self):
        seq = SymbolicSequence(np.array([0, 0, 0, 0]), 2)
        assert empirical_cell_frequencies(seq, 1) == {(0,): 1.0}

    def test_iid_triples_near_uniform(self):
        rng = np.random.default_rng(41)
        seq = SymbolicSequence(rng.integers(0, 2, size=200_000), 2)
        freqs = empirical_cell_frequencies(seq, 3)
        assert len(freqs) == 8
        for word, f in freqs.items():
            assert abs(f - 0.125) < 0.01, word

    def test_normalization(self):
        rng = np.random.default_rng(43)
        seq = SymbolicSequence(rng.integers(0, 5, size=3000), 5)
        freqs = empirical_cell_frequencies(seq, 2)
        assert min(freqs.values()) >= 0.0
        assert abs(sum(freqs.values()) - 1.0) < 1e-12

    def test_too_short(self):
        seq = SymbolicSequence(np.array([0, 1]), 2)
        with pytest.raises(ValueError):
            empirical_cell_frequencies(seq, 3)

    def test_word_id_space_cap(self):
        seq = SymbolicSequence(np.zeros(100, dtype=np.int32), 250)
        with pytest.raises(ResourceLimitError):
            sliding_word_ids(seq.symbols, 10, 250)

    def test_symbol_range_validation(self):
        with pytest.raises(ValueError):
            SymbolicSequence(np.array([0, 3]), 2)
