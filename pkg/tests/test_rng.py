"""Per-replica increment streams: reproducibility and chunk invariance."""

import numpy as np
import pytest

from atlas_sim import InvalidInputError, PathBundle


class TestStreams:
    def test_same_seed_same_stream(self):
        a = PathBundle(seed=123).noise_rng(4).standard_normal(32)
        b = PathBundle(seed=123).noise_rng(4).standard_normal(32)
        assert np.array_equal(a, b)

    def test_replicas_differ(self):
        bundle = PathBundle(seed=123)
        a = bundle.noise_rng(0).standard_normal(32)
        b = bundle.noise_rng(1).standard_normal(32)
        assert not np.array_equal(a, b)

    def test_seeds_differ(self):
        a = PathBundle(seed=1).noise_rng(0).standard_normal(32)
        b = PathBundle(seed=2).noise_rng(0).standard_normal(32)
        assert not np.array_equal(a, b)

    def test_init_stream_separate_from_noise(self):
        bundle = PathBundle(seed=9)
        a = bundle.noise_rng(3).standard_normal(32)
        b = bundle.init_rng(3).standard_normal(32)
        assert not np.array_equal(a, b)

    def test_init_stream_reproducible(self):
        bundle = PathBundle(seed=9)
        assert np.array_equal(
            bundle.init_rng(2).standard_normal(8),
            bundle.init_rng(2).standard_normal(8),
        )

    def test_rejects_negative_replica(self):
        bundle = PathBundle(seed=1)
        with pytest.raises(InvalidInputError):
            bundle.noise_rng(-1)
        with pytest.raises(InvalidInputError):
            bundle.init_rng(-1)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(InvalidInputError):
            PathBundle(seed=1, dt=0.0)


class TestChunkInvariance:
    def test_chunked_draws_concatenate(self):
        """Drawing (5, w) then (7, w) equals one (12, w) draw byte-for-byte."""
        bundle = PathBundle(seed=77)
        g = bundle.noise_rng(0)
        a = g.standard_normal((5, 3))
        b = g.standard_normal((7, 3))
        whole = bundle.noise_rng(0).standard_normal((12, 3))
        assert np.array_equal(np.vstack([a, b]), whole)

    def test_normal_block_matches_sequential(self):
        bundle = PathBundle(seed=5)
        g = bundle.noise_rng(2)
        g.standard_normal((4, 6))  # consume steps 0..3
        live = g.standard_normal((3, 6))
        block = bundle.normal_block(2, step_lo=4, n_steps=3, width=6)
        assert np.array_equal(live, block)

    def test_variate_indexes_block(self):
        bundle = PathBundle(seed=5)
        block = bundle.normal_block(1, step_lo=0, n_steps=10, width=4)
        for step in (0, 3, 9):
            for particle in (0, 2, 3):
                assert bundle.variate(1, particle, step, width=4) == block[step, particle]

    def test_variate_rejects_out_of_width(self):
        with pytest.raises(InvalidInputError):
            PathBundle(seed=5).variate(0, particle=4, step=0, width=4)

    def test_block_rejects_bad_args(self):
        bundle = PathBundle(seed=5)
        with pytest.raises(InvalidInputError):
            bundle.normal_block(0, step_lo=-1, n_steps=1, width=2)
        with pytest.raises(InvalidInputError):
            bundle.normal_block(0, step_lo=0, n_steps=1, width=0)
