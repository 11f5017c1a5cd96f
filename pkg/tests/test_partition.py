"""Partitions: tiling invariants, flat indexing, and point routing."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairnet.datasets import Dataset
from pairnet.partition import (
    Interval,
    Partition,
    PartitionSamplingError,
    locate,
    locate_many,
    random_partition,
    route,
    uniform_partition,
)

BOX = (Interval(0.0, 10.0), Interval(-2.0, 2.0), Interval(1.0, 20.0))


class TestInterval:
    def test_width_and_mid(self):
        iv = Interval(2.0, 5.0)
        assert iv.width == 3.0
        assert iv.mid == 3.5

    @pytest.mark.parametrize("lo,hi", [(1.0, 1.0), (2.0, 1.0)])
    def test_degenerate_rejected(self, lo, hi):
        with pytest.raises(ValueError, match="degenerate"):
            Interval(lo, hi)


class TestPartitionStructure:
    def test_uniform_edges_are_linspace(self):
        part = uniform_partition(BOX, (2, 4, 1))
        assert part.counts == (2, 4, 1)
        assert part.size == 8
        np.testing.assert_allclose(part.edges[0], [0.0, 5.0, 10.0])
        np.testing.assert_allclose(part.edges[1], [-2.0, -1.0, 0.0, 1.0, 2.0])
        np.testing.assert_allclose(part.edges[2], [1.0, 20.0])
        assert part.domain == BOX

    def test_intervals_tile_each_dimension(self):
        part = uniform_partition(BOX, (3, 2, 5))
        for d in range(3):
            ivs = part.intervals(d)
            assert ivs[0].lo == BOX[d].lo
            assert ivs[-1].hi == BOX[d].hi
            for a, b in zip(ivs, ivs[1:]):
                assert a.hi == b.lo

    def test_counts_label(self):
        assert uniform_partition(BOX, (6, 6, 6)).counts_label() == "6,6,6"

    def test_rejects_bad_edges(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            Partition(((0.0, 1.0, 1.0),))
        with pytest.raises(ValueError, match="at least 2"):
            Partition(((0.0,),))
        with pytest.raises(ValueError, match="at least one dimension"):
            Partition(())


class TestFlatIndexing:
    """Dimension 0 is the most significant mixed-radix digit."""

    def test_worked_example(self):
        part = uniform_partition(BOX[:2], (2, 3))
        assert part.encode((1, 2)) == 1 * 3 + 2 == 5
        assert part.decode(5) == (1, 2)
        assert part.encode((0, 0)) == 0
        assert part.decode(part.size - 1) == (1, 2)

    @given(st.tuples(st.integers(1, 4), st.integers(1, 3), st.integers(1, 5)),
           st.integers(0, 10**6))
    def test_encode_decode_roundtrip(self, counts, raw):
        part = uniform_partition(BOX, counts)
        flat = raw % part.size
        assert part.encode(part.decode(flat)) == flat

    def test_cell_matches_decode(self):
        part = uniform_partition(BOX, (2, 2, 2))
        idx = part.decode(5)
        assert part.cell(5) == tuple(part.intervals(d)[i] for d, i in enumerate(idx))

    def test_out_of_range_rejected(self):
        part = uniform_partition(BOX, (2, 2, 2))
        with pytest.raises(ValueError):
            part.decode(8)
        with pytest.raises(ValueError):
            part.encode((2, 0, 0))


class TestLocate:
    def test_interior_breakpoint_goes_to_upper_cell(self):
        part = uniform_partition((Interval(0.0, 10.0),), (2,))
        assert locate(part, (4.999,)) == 0
        assert locate(part, (5.0,)) == 1

    def test_domain_endpoints(self):
        part = uniform_partition((Interval(0.0, 10.0),), (4,))
        assert locate(part, (0.0,)) == 0
        assert locate(part, (10.0,)) == 3  # last interval is closed

    def test_out_of_domain_clamps(self):
        part = uniform_partition((Interval(0.0, 10.0),), (4,))
        assert locate(part, (-3.0,)) == 0
        assert locate(part, (11.0,)) == 3

    def test_matches_linear_scan_oracle(self, rng):
        part = random_partition(BOX, (2, 5), rng)
        points = np.column_stack([rng.uniform(iv.lo - 1, iv.hi + 1, 300) for iv in BOX])
        for x in points:
            expected = []
            for d in range(3):
                ivs = part.intervals(d)
                hit = 0 if x[d] < ivs[0].lo else len(ivs) - 1
                for i, iv in enumerate(ivs):
                    last = i == len(ivs) - 1
                    if iv.lo <= x[d] < iv.hi or (last and x[d] >= iv.lo):
                        hit = i
                        break
                expected.append(hit)
            assert locate(part, x) == part.encode(expected)

    def test_locate_many_matches_per_point(self, rng):
        part = random_partition(BOX, (2, 6), rng)
        points = np.column_stack([rng.uniform(iv.lo - 1, iv.hi + 1, 500) for iv in BOX])
        flat = locate_many(part, points)
        assert flat.tolist() == [locate(part, x) for x in points]

    def test_dimension_mismatch(self):
        part = uniform_partition(BOX, (2, 2, 2))
        with pytest.raises(ValueError):
            locate(part, (1.0, 2.0))
        with pytest.raises(ValueError):
            locate_many(part, np.zeros((4, 2)))


class TestRoute:
    def test_groups_cover_rows_and_agree_with_locate(self, rng):
        part = random_partition(BOX, (2, 4), rng)
        X = np.column_stack([rng.uniform(iv.lo, iv.hi, 400) for iv in BOX])
        ds = Dataset(X, np.zeros(400), BOX)
        groups = route(part, ds)
        assert len(groups) == part.size
        seen = np.concatenate(groups)
        assert sorted(seen.tolist()) == list(range(400))
        for j, idx in enumerate(groups):
            assert np.all(np.diff(idx) > 0)  # ascending row order
            for i in idx:
                assert locate(part, X[i]) == j


class TestRandomPartition:
    def test_seed_sweep_tiling_invariant(self):
        """Every draw tiles the box: monotone edges, exact domain ends,
        counts within range, and no interval under 1% of the width."""
        for seed in range(1000):
            part = random_partition(BOX, (2, 6), seed)
            for d, iv in enumerate(BOX):
                e = np.asarray(part.edges[d])
                assert e[0] == iv.lo and e[-1] == iv.hi
                assert 2 <= len(e) - 1 <= 6
                widths = np.diff(e)
                assert np.all(widths > 0)
                assert widths.min() >= 0.01 * iv.width

    def test_deterministic_given_seed(self):
        assert random_partition(BOX, (2, 6), 77) == random_partition(BOX, (2, 6), 77)

    def test_per_dimension_ranges(self, rng):
        part = random_partition(BOX, [(1, 1), (3, 3), (2, 2)], rng)
        assert part.counts == (1, 3, 2)

    def test_unsatisfiable_width_floor_raises(self):
        # 100 intervals each at least 1% of the width must tile it exactly,
        # a measure-zero event for uniform cuts.
        with pytest.raises(PartitionSamplingError):
            random_partition((Interval(0.0, 1.0),), (100, 100), 0)

    def test_bad_count_range(self, rng):
        with pytest.raises(ValueError):
            random_partition(BOX, (0, 3), rng)
        with pytest.raises(ValueError):
            random_partition(BOX, (4, 2), rng)
