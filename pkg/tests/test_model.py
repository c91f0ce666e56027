"""Model types and coordinate conversions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from atlas_sim import (
    InvalidInputError,
    InvalidModelError,
    ModelSpec,
    make_atlas,
    positions_from_spacings,
    rank,
    spacings,
)

finite_positions = hnp.arrays(
    np.float64,
    st.integers(min_value=2, max_value=12),
    elements=st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
)


class TestModelSpec:
    def test_make_atlas_shape(self):
        spec = make_atlas(4, 1.5)
        assert spec.m == 4
        assert spec.drift == (1.5, 0.0, 0.0, 0.0)
        assert spec.diffusion == (1.0,) * 4
        assert spec.n_gaps == 3
        assert not spec.right_anchored

    def test_make_atlas_anchored_flag(self):
        assert make_atlas(3, 1.0, right_anchored=True).right_anchored

    def test_rejects_single_particle(self):
        with pytest.raises(InvalidModelError):
            make_atlas(1, 1.0)
        with pytest.raises(InvalidModelError):
            ModelSpec(m=1, drift=(1.0,), diffusion=(1.0,))

    def test_rejects_negative_drift(self):
        with pytest.raises(InvalidModelError):
            make_atlas(3, -0.5)

    def test_rejects_bad_lengths(self):
        with pytest.raises(InvalidModelError):
            ModelSpec(m=3, drift=(1.0, 0.0), diffusion=(1.0, 1.0, 1.0))

    def test_rejects_nonpositive_diffusion(self):
        with pytest.raises(InvalidModelError):
            ModelSpec(m=2, drift=(1.0, 0.0), diffusion=(1.0, 0.0))

    def test_zero_drift_allowed(self):
        assert make_atlas(2, 0.0).drift == (0.0, 0.0)


class TestRank:
    def test_simple(self):
        ranked, ranks = rank([3.0, 1.0, 2.0])
        assert np.array_equal(ranked, [1.0, 2.0, 3.0])
        assert np.array_equal(ranks, [2, 0, 1])

    def test_ties_break_by_index(self):
        ranked, ranks = rank([0.0, 0.0, -1.0])
        assert np.array_equal(ranked, [-1.0, 0.0, 0.0])
        # equal positions: the lower named index takes the lower rank
        assert np.array_equal(ranks, [1, 2, 0])

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            rank([0.0, np.nan])
        with pytest.raises(InvalidInputError):
            rank([[0.0, 1.0]])

    @settings(max_examples=200)
    @given(finite_positions)
    def test_rank_is_consistent_permutation(self, y):
        ranked, ranks = rank(y)
        assert np.all(np.diff(ranked) >= 0)
        assert sorted(ranks.tolist()) == list(range(y.size))
        assert np.array_equal(ranked[ranks], y)

    @settings(max_examples=100)
    @given(finite_positions)
    def test_rank_idempotent_on_sorted(self, y):
        ranked, _ = rank(y)
        again, ranks = rank(ranked)
        assert np.array_equal(again, ranked)
        assert np.array_equal(ranks, np.arange(y.size))


class TestSpacings:
    def test_diff(self):
        assert np.array_equal(spacings([0.0, 0.5, 2.0]), [0.5, 1.5])

    def test_rejects_decreasing(self):
        with pytest.raises(InvalidInputError):
            spacings([0.0, 1.0, 0.5])

    def test_positions_rebuild(self):
        x = positions_from_spacings(-1.0, [0.5, 1.5])
        assert np.allclose(x, [-1.0, -0.5, 1.0], atol=0, rtol=0)

    def test_rejects_negative_spacings(self):
        with pytest.raises(InvalidInputError):
            positions_from_spacings(0.0, [0.1, -0.2])

    @settings(max_examples=200)
    @given(
        st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
        hnp.arrays(
            np.float64,
            st.integers(min_value=1, max_value=12),
            elements=st.floats(min_value=0.0, max_value=1e3, allow_nan=False),
        ),
    )
    def test_roundtrip(self, x1, z):
        x = positions_from_spacings(x1, z)
        assert x[0] == x1
        z_back = spacings(x)
        # diff-of-cumsum is exact to a few ulps of the position scale
        tol = 8 * np.finfo(np.float64).eps * max(1.0, float(np.abs(x).max()))
        assert np.all(np.abs(z_back - z) <= tol)

    @settings(max_examples=100)
    @given(finite_positions)
    def test_ranked_roundtrip(self, y):
        ranked, _ = rank(y)
        x = positions_from_spacings(ranked[0], spacings(ranked))
        tol = 8 * np.finfo(np.float64).eps * max(1.0, float(np.abs(ranked).max()))
        assert np.all(np.abs(x - ranked) <= tol)
