import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_max_min, dtw_exhaustive
from tss.core import Window
from tss.diversity import (
    DistanceCache,
    critic_diversity_pick,
    critic_objective,
    distance_matrix,
    dtw_distance,
    tw_diversity_pick,
    znormalize,
)


def win(values, anchor=0, sid="s"):
    values = np.asarray(values, dtype=float)
    return Window(sid, anchor, anchor, anchor + values.size - 1, values)


class TestDTW:
    def test_identity(self):
        assert dtw_distance([1, 2, 3], [1, 2, 3]) == 0.0

    def test_time_shift_is_free(self):
        assert dtw_distance([0, 0, 1, 0], [0, 1, 0, 0]) == 0.0

    def test_derived_pair(self):
        assert dtw_exhaustive([1, 3], [2, 2]) == 2.0
        assert dtw_distance([1, 3], [2, 2]) == 2.0

    def test_unequal_lengths(self):
        assert dtw_distance([0.0], [1.0, 2.0, 3.0]) == 1 + 4 + 9
        assert dtw_distance([1, 2, 3], [0.0]) == dtw_exhaustive([1, 2, 3], [0.0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            dtw_distance([], [1.0])
        with pytest.raises(ValueError):
            dtw_distance([1.0], [])

    vec = st.lists(st.floats(-100, 100), min_size=1, max_size=8)

    @given(vec, vec)
    def test_matches_exhaustive_oracle(self, a, b):
        assert dtw_distance(a, b) == pytest.approx(dtw_exhaustive(a, b), abs=1e-9)

    @given(vec, vec)
    def test_symmetric_and_reflexive(self, a, b):
        assert dtw_distance(a, a) == 0.0
        assert dtw_distance(a, b) == dtw_distance(b, a)
        assert dtw_distance(a, b) >= 0.0

    @given(st.integers(1, 12).flatmap(lambda n: st.tuples(
        st.lists(st.floats(-50, 50), min_size=n, max_size=n), st.lists(st.floats(-50, 50), min_size=n, max_size=n))))
    def test_never_worse_than_lockstep(self, pair):
        a, b = pair
        lockstep = sum((x - y) ** 2 for x, y in zip(a, b))
        assert dtw_distance(a, b) <= lockstep + 1e-9


def test_znormalize():
    z = znormalize(np.array([1.0, 2.0, 3.0]))
    assert z.mean() == pytest.approx(0.0)
    assert z.std() == pytest.approx(1.0)
    assert znormalize(np.array([4.0, 4.0])).tolist() == [0.0, 0.0]


class TestTWPick:
    def test_surge_beats_flat(self):
        flat = win(np.zeros(6), 0)
        surge = win([0, 0, 5, 9, 5, 0], 20)
        other_flat = win(np.zeros(6), 40)
        pick = tw_diversity_pick([flat], [other_flat, surge])
        assert pick.window is surge

    def test_singleton_identical_candidate(self):
        v = win([1, 2, 3], 0)
        c = win([1, 2, 3], 10)
        pick = tw_diversity_pick([v], [c])
        assert pick.window is c and pick.score == 0.0

    def test_hand_built_matrix(self):
        V = [win([0.0], 0), win([10.0], 1)]
        C = [win([1.0], 2), win([4.0], 3), win([8.0], 4)]
        M = distance_matrix(C, V)
        assert M.tolist() == [[1, 81], [16, 36], [64, 4]]
        i, v = brute_max_min(M.tolist())
        pick = tw_diversity_pick(V, C)
        assert (pick.index, pick.score) == (i, v) == (1, 16.0)

    def test_ties_go_to_smallest_key(self):
        V = [win([0.0], 0, "a")]
        C = [win([3.0], 9, "b"), win([-3.0], 5, "b"), win([3.0], 7, "c")]
        assert tw_diversity_pick(V, C).window.key == ("b", 5)

    def test_needs_inputs(self):
        with pytest.raises(ValueError):
            tw_diversity_pick([], [win([1.0])])
        with pytest.raises(ValueError):
            tw_diversity_pick([win([1.0])], [])

    @settings(deadline=None)
    @given(st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3), min_size=1, max_size=6),
           st.randoms(use_true_random=False))
    def test_reorder_invariant(self, cands, rnd):
        V = [win([0, 1, 0], 0, "v"), win([2, 2, 2], 5, "v")]
        C = [win(v, 10 * (i + 1), "c") for i, v in enumerate(cands)]
        shuffled = list(C)
        rnd.shuffle(shuffled)
        a = tw_diversity_pick(V, C)
        b = tw_diversity_pick(V, shuffled)
        assert a.window.key == b.window.key and a.score == b.score
        assert tw_diversity_pick(V, C).window.key == a.window.key

    def test_cache_holds_transformed_distances(self):
        cache = DistanceCache(transform=lambda v: v * 2)
        v, c = win([0.0, 1.0], 0), win([1.0, 1.0], 5)
        cache.fill([(c, v)])
        assert cache.get(c, v) == dtw_distance(c.values * 2, v.values * 2)

    def test_threads_agree(self):
        rng = np.random.default_rng(3)
        V = [win(rng.normal(size=8), 20 * i, "v") for i in range(3)]
        C = [win(rng.normal(size=8), 20 * i, "c") for i in range(12)]
        assert distance_matrix(C, V, threads=1).tobytes() == distance_matrix(C, V, threads=4).tobytes()


class TestCriticPick:
    def test_mean_shift(self):
        assert critic_objective([5.0], 9.0) == 2.0
        pick = critic_diversity_pick([5.0], [win([0.0], 0), win([0.0], 3)], [5.0, 9.0])
        assert pick.index == 1 and pick.score == 2.0

    def test_mean_unchanged(self):
        assert critic_objective([2.0, 4.0], 3.0) == 0.0

    def test_equidistant_tie(self):
        C = [win([0.0], 8, "b"), win([0.0], 2, "b")]
        pick = critic_diversity_pick([5.0], C, [7.0, 3.0])
        assert pick.window.key == ("b", 2)

    def test_score_count_must_match(self):
        with pytest.raises(ValueError):
            critic_diversity_pick([1.0], [win([0.0])], [1.0, 2.0])
