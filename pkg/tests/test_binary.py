import numpy as np
import pytest

from ssimuse import (BINARY, BParams, LengthMismatch, ShapeMismatch, WrongFlavor,
                     Clip, PianoRoll, density_l, fold_pitch_classes, shift_search_s,
                     ssimuse_b, weighted_window_s, window_jaccard)

from .conftest import make_clip, random_clip
from .oracles import brute_jaccard, brute_shift_search


def binary_clip_with_count(active_cells, steps=80, seed=0):
    """Binary clip with exactly ``active_cells`` onsets, uniformly placed."""
    rng = np.random.default_rng(seed)
    flat = rng.choice(steps * 128, size=active_cells, replace=False)
    grid = np.zeros((steps * 128,), dtype=np.uint8)
    grid[flat] = 1
    roll = PianoRoll(grid=grid.reshape(steps, 128), flavor=BINARY, steps_per_bar=16)
    return Clip(roll=roll, origin=("count", 0))


def shifted_clip(clip, dt=0, dp=0):
    grid = np.roll(clip.roll.grid, dt, axis=0)
    if dp:
        out = np.zeros_like(grid)
        if dp > 0:
            out[:, dp:] = grid[:, :-dp]
        else:
            out[:, :dp] = grid[:, -dp:]
        grid = out
    roll = PianoRoll(grid=grid.copy(), flavor=BINARY,
                     steps_per_bar=clip.roll.steps_per_bar, source_id="shifted")
    return Clip(roll=roll, origin=("shifted", 0))


class TestDensity:
    def test_equal_density_scores_one(self):
        x = binary_clip_with_count(500, seed=1)
        y = binary_clip_with_count(500, seed=2)
        assert density_l(x, y) == pytest.approx(1.0, abs=1e-12)

    def test_one_tenth_vs_one_fifth(self):
        # 80 steps x 128 pitches = 10240 cells: means exactly 0.1 and 0.2
        x = binary_clip_with_count(1024, seed=3)
        y = binary_clip_with_count(2048, seed=4)
        expected = (2 * 0.1 * 0.2 + 1e-4) / (0.1**2 + 0.2**2 + 1e-4)
        assert expected == pytest.approx(0.8003992015968064, abs=1e-15)
        assert density_l(x, y) == pytest.approx(expected, abs=1e-12)

    def test_both_empty_is_one(self):
        x = make_clip([], flavor=BINARY, source="a")
        y = make_clip([], flavor=BINARY, source="b")
        assert density_l(x, y) == 1.0

    def test_arbitrary_counts_match_formula(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            nx, ny = int(rng.integers(1, 4000)), int(rng.integers(1, 4000))
            x = binary_clip_with_count(nx, seed=int(rng.integers(1 << 30)))
            y = binary_clip_with_count(ny, seed=int(rng.integers(1 << 30)))
            mx, my = nx / 10240, ny / 10240
            expected = (2 * mx * my + 1e-4) / (mx * mx + my * my + 1e-4)
            assert density_l(x, y) == pytest.approx(expected, abs=1e-12)

    def test_length_mismatch(self):
        x = binary_clip_with_count(10, steps=80)
        y = binary_clip_with_count(10, steps=96)
        with pytest.raises(LengthMismatch):
            density_l(x, y)

    def test_rejects_velocity_flavor(self):
        x = make_clip([(0, 60, 90)], steps=16)
        y = make_clip([(0, 60, 90)], steps=16)
        with pytest.raises(WrongFlavor):
            density_l(x, y)


class TestWindowJaccard:
    def test_identical_windows(self):
        w = np.zeros((16, 12), dtype=np.int16)
        w[0, 0] = w[4, 4] = 1
        assert window_jaccard(w, w.copy()) == 1.0

    def test_disjoint_windows(self):
        x = np.zeros((16, 12), dtype=np.int16)
        y = np.zeros((16, 12), dtype=np.int16)
        x[0, 0] = x[1, 1] = x[2, 2] = 1
        y[3, 3] = y[4, 4] = 1
        assert window_jaccard(x, y) == 0.0

    def test_half_overlap(self):
        x = np.zeros((16, 12), dtype=np.int16)
        y = np.zeros((16, 12), dtype=np.int16)
        x[0, 0] = x[4, 4] = 1
        y[0, 0] = 1
        assert window_jaccard(x, y) == 0.5

    def test_counts_are_binarized(self):
        x = np.zeros((16, 12), dtype=np.int16)
        y = np.zeros((16, 12), dtype=np.int16)
        x[0, 0] = 3  # folded count > 1 still one active cell
        y[0, 0] = 1
        assert window_jaccard(x, y) == 1.0

    def test_both_silent_is_one(self):
        w = np.zeros((16, 12), dtype=np.int16)
        assert window_jaccard(w, w.copy()) == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            window_jaccard(np.zeros((16, 12)), np.zeros((8, 12)))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            x = (rng.random((16, 12)) < 0.2).astype(np.int16)
            y = (rng.random((16, 12)) < 0.2).astype(np.int16)
            assert window_jaccard(x, y) == pytest.approx(brute_jaccard(x, y), abs=1e-15)


class TestWeightedWindows:
    def folded(self, clip):
        return fold_pitch_classes(clip.roll)

    def test_identical_clips_score_one(self):
        rng = np.random.default_rng(30)
        clip = random_clip(rng, steps=64, flavor=BINARY)
        assert weighted_window_s(self.folded(clip), self.folded(clip), BParams()) == 1.0

    def test_two_window_example(self):
        # window 0: x={(0,0),(4,4)}, y={(0,0)} -> 0.5; window 1 identical -> 1.0
        x = make_clip([(0, 60, 1), (4, 64, 1), (16, 62, 1)], steps=32, flavor=BINARY)
        y = make_clip([(0, 60, 1), (16, 62, 1)], steps=32, flavor=BINARY)
        value = weighted_window_s(self.folded(x), self.folded(y), BParams())
        assert value == pytest.approx((0.5**2 + 1.0) / 1.5, abs=1e-12)
        assert value == pytest.approx(5.0 / 6.0, abs=1e-12)

    def test_zero_similarity_window_carries_zero_weight(self):
        x = make_clip([(0, 60, 1), (16, 62, 1)], steps=32, flavor=BINARY)
        y = make_clip([(0, 60, 1), (16, 63, 1)], steps=32, flavor=BINARY)
        assert weighted_window_s(self.folded(x), self.folded(y), BParams()) == 1.0

    def test_all_windows_dissimilar_scores_zero(self):
        x = make_clip([(0, 60, 1), (16, 62, 1)], steps=32, flavor=BINARY)
        y = make_clip([(0, 61, 1), (16, 63, 1)], steps=32, flavor=BINARY)
        assert weighted_window_s(self.folded(x), self.folded(y), BParams()) == 0.0

    def test_exponent_zero_is_plain_mean(self):
        rng = np.random.default_rng(31)
        x = random_clip(rng, steps=64, flavor=BINARY)
        y = random_clip(rng, steps=64, flavor=BINARY)
        params = BParams(weight_exponent=0.0)
        xf, yf = self.folded(x), self.folded(y)
        scores = [window_jaccard(xf.grid[o:o + 16], yf.grid[o:o + 16])
                  for o in range(0, 64 - 15, 16)]
        assert weighted_window_s(xf, yf, params) == pytest.approx(np.mean(scores), abs=1e-12)

    def test_single_window_equals_brute_jaccard(self):
        rng = np.random.default_rng(32)
        for _ in range(25):
            x = random_clip(rng, steps=32, density=0.4, flavor=BINARY)
            y = random_clip(rng, steps=32, density=0.4, flavor=BINARY)
            xf, yf = self.folded(x), self.folded(y)
            got = weighted_window_s(xf, yf, BParams(window_steps=32, hop_steps=32))
            want = brute_jaccard(xf.grid, yf.grid)
            assert got == pytest.approx(want, abs=1e-12)


class TestShiftSearch:
    def folded(self, clip):
        return fold_pitch_classes(clip.roll)

    def test_identity(self):
        rng = np.random.default_rng(40)
        clip = random_clip(rng, flavor=BINARY)
        f = self.folded(clip)
        s, shift = shift_search_s(f, f, BParams())
        assert s == 1.0
        assert shift == (0, 0)

    def test_time_shift_sixteen(self, corpus_clips):
        from ssimuse import binarize
        x = binarize(corpus_clips[0])
        y = shifted_clip(x, dt=16)
        s, shift = shift_search_s(self.folded(x), self.folded(y), BParams())
        assert s == pytest.approx(0.96875, abs=1e-12)
        assert abs(shift[0]) == 16 and shift[1] == 0

    def test_transposition_is_free(self, corpus_clips):
        from ssimuse import binarize
        x = binarize(corpus_clips[1])
        y = shifted_clip(x, dp=-3)  # transpose down three semitones
        s, shift = shift_search_s(self.folded(x), self.folded(y), BParams())
        assert s == 1.0
        assert shift[0] == 0
        assert shift[1] in (3, 9)

    def test_matches_brute_force_on_small_clips(self):
        rng = np.random.default_rng(41)
        params = BParams()
        for _ in range(12):
            x = random_clip(rng, steps=32, density=0.4, flavor=BINARY)
            y = random_clip(rng, steps=32, density=0.4, flavor=BINARY)
            xf, yf = self.folded(x), self.folded(y)
            got_s, got_shift = shift_search_s(xf, yf, params)
            want_s, want_shift = brute_shift_search(xf.grid, yf.grid, 16, 16, 1.0, 0.5)
            assert got_s == pytest.approx(want_s, abs=1e-12)
            assert got_shift == want_shift

    def test_matches_brute_force_overlapping_hops(self):
        rng = np.random.default_rng(42)
        params = BParams(window_steps=8, hop_steps=4)
        for _ in range(6):
            x = random_clip(rng, steps=32, density=0.4, flavor=BINARY)
            y = random_clip(rng, steps=32, density=0.4, flavor=BINARY)
            xf, yf = self.folded(x), self.folded(y)
            got_s, got_shift = shift_search_s(xf, yf, params)
            want_s, want_shift = brute_shift_search(xf.grid, yf.grid, 8, 4, 1.0, 0.5)
            assert got_s == pytest.approx(want_s, abs=1e-12)
            assert got_shift == want_shift


class TestCombined:
    def test_self_similarity_is_exactly_one(self):
        rng = np.random.default_rng(50)
        for _ in range(5):
            clip = random_clip(rng, flavor=BINARY)
            report = ssimuse_b(clip, clip)
            assert report.l == 1.0
            assert report.s == 1.0
            assert report.ssimuse_b == 1.0
            assert report.best_shift == (0, 0)

    def test_empty_vs_dense_scores_near_zero(self):
        rng = np.random.default_rng(51)
        empty = make_clip([], flavor=BINARY, source="empty")
        dense = random_clip(rng, density=2.0, flavor=BINARY)
        assert all(dense.roll.grid[o:o + 16].any() for o in range(0, 256, 16))
        report = ssimuse_b(empty, dense)
        assert report.s == 0.0
        assert report.ssimuse_b == 0.0
        mu = float(dense.roll.grid.mean())
        assert report.l == pytest.approx(1e-4 / (mu * mu + 1e-4), abs=1e-12)

    def test_symmetry_is_exact(self):
        rng = np.random.default_rng(52)
        for _ in range(6):
            x = random_clip(rng, flavor=BINARY, source="x")
            y = random_clip(rng, flavor=BINARY, source="y")
            fwd = ssimuse_b(x, y)
            rev = ssimuse_b(y, x)
            assert fwd.ssimuse_b == rev.ssimuse_b
            assert fwd.l == rev.l and fwd.s == rev.s
            assert fwd.per_window_s == rev.per_window_s

    def test_scores_within_unit_range(self, corpus_clips):
        from ssimuse import binarize
        rng = np.random.default_rng(53)
        for _ in range(10):
            i, j = rng.integers(0, len(corpus_clips), size=2)
            report = ssimuse_b(binarize(corpus_clips[int(i)]),
                               binarize(corpus_clips[int(j)]))
            assert 0.0 <= report.l <= 1.0
            assert 0.0 <= report.s <= 1.0
            assert 0.0 <= report.ssimuse_b <= 1.0
            assert all(0.0 <= v <= 1.0 for v in report.per_window_s)

    def test_penalty_decreases_with_shift_distance(self):
        # random clips have no repeating structure, so no spurious shift can
        # beat the exact match and the penalty line is observed directly
        rng = np.random.default_rng(56)
        x = random_clip(rng, density=0.5, flavor=BINARY)
        previous = 1.0
        for delta in (16, 32, 48, 64, 96, 128):
            y = shifted_clip(x, dt=delta)
            report = ssimuse_b(x, y)
            assert report.s == pytest.approx(1.0 - 0.5 * delta / 256, abs=1e-12)
            assert report.s < previous
            previous = report.s

    def test_transposition_invariance_of_structure(self, corpus_clips):
        from ssimuse import binarize
        x = binarize(corpus_clips[3])
        for semitones in (1, 5, 11):
            y = shifted_clip(x, dp=-semitones)
            assert ssimuse_b(x, y).s == 1.0

    def test_report_serialization(self):
        rng = np.random.default_rng(54)
        report = ssimuse_b(random_clip(rng, flavor=BINARY),
                           random_clip(rng, flavor=BINARY))
        doc = report.to_dict()
        assert set(doc) == {"l", "s", "ssimuse_b", "best_shift", "per_window_s"}
        assert len(doc["best_shift"]) == 2
        row = report.csv_row()
        assert len(row.split(",")) == 5

    def test_consistency_of_report_fields(self):
        rng = np.random.default_rng(55)
        x = random_clip(rng, flavor=BINARY, source="x")
        y = random_clip(rng, flavor=BINARY, source="y")
        report = ssimuse_b(x, y)
        assert report.ssimuse_b == report.l * report.s
        # the windowed scores at the best shift aggregate back to s
        scores = np.array(report.per_window_s)
        weights = scores**1.0
        shat = (weights * scores).sum() / weights.sum()
        penalty = 1.0 - 0.5 * abs(report.best_shift[0]) / 256
        assert report.s == pytest.approx(shat * penalty, abs=1e-12)
