from itertools import combinations

import numpy as np
import pytest

from soris.errors import ConfigError, SelectionInfeasibleError
from soris.geometry import GridSpec, correlation_matrix
from soris.selection import (ActiveSet, PRESETS, preset_set, select_diagonal,
                             select_min_correlation)


@pytest.fixture(scope="module")
def grid8():
    return GridSpec.from_spacing_frac(8, 8, 0.25)


class TestActiveSet:
    def test_invariants(self, grid8):
        with pytest.raises(ConfigError):
            ActiveSet((), grid8)
        with pytest.raises(ConfigError):
            ActiveSet(((1, 1), (1, 1)), grid8)
        with pytest.raises(IndexError):
            ActiveSet(((0, 1),), grid8)
        with pytest.raises(ConfigError):
            ActiveSet(tuple(grid8.all_elements()), grid8)  # size == N

    def test_flat_indices_order(self, grid8):
        aset = ActiveSet(((2, 1), (1, 2)), grid8)
        assert list(aset.flat_indices()) == [9, 2]


class TestPresets:
    def test_golden_listings(self, grid8):
        assert preset_set("p4-set1", grid8).elements == (
            (1, 1), (1, 8), (8, 1), (8, 8))
        assert preset_set("p4-set2", grid8).elements == (
            (1, 4), (4, 1), (4, 8), (8, 4))
        assert preset_set("p4-set3", grid8).elements == (
            (4, 4), (4, 5), (5, 4), (5, 5))
        assert preset_set("p4-set4", grid8).elements == (
            (2, 2), (2, 7), (7, 2), (7, 7))
        assert preset_set("p8-fig10", grid8).elements == (
            (1, 1), (1, 8), (3, 3), (3, 6), (6, 3), (6, 6), (8, 1), (8, 8))

    def test_sizes(self, grid8):
        for count in (4, 8, 16, 32):
            assert len(preset_set(f"p{count}-fig10", grid8)) == count
        for i in range(1, 5):
            assert len(preset_set(f"p4-set{i}", grid8)) == 4
            assert len(preset_set(f"p8-set{i}", grid8)) == 8

    def test_all_presets_valid(self, grid8):
        for name in PRESETS:
            aset = preset_set(name, grid8)
            assert len(set(aset.elements)) == len(aset)

    def test_unknown_and_wrong_grid(self, grid8):
        with pytest.raises(ConfigError):
            preset_set("nope", grid8)
        with pytest.raises(ConfigError):
            preset_set("p4-set1", GridSpec.from_spacing_frac(4, 4, 0.25))


class TestMinCorrelation:
    def test_tie_break_on_symmetric_2x2(self):
        corr = correlation_matrix(GridSpec.from_spacing_frac(2, 2, 0.5))
        aset = select_min_correlation(corr, 1)
        assert aset.elements == ((1, 1),)

    def test_cardinality_contract(self, grid8):
        corr = correlation_matrix(grid8)
        aset = select_min_correlation(corr, 63)
        assert len(aset) == 63
        assert len(set(aset.elements)) == 63

    def test_bounds_validation(self, grid8):
        corr = correlation_matrix(grid8)
        with pytest.raises(ConfigError):
            select_min_correlation(corr, 0)
        with pytest.raises(ConfigError):
            select_min_correlation(corr, 64)

    def test_deterministic(self, grid8):
        corr = correlation_matrix(grid8)
        assert (select_min_correlation(corr, 6).elements
                == select_min_correlation(corr, 6).elements)

    def test_greedy_within_factor_of_exhaustive(self):
        # desk-scale exhaustive oracle: all C(16,4) quadruples on a 4x4 grid
        grid = GridSpec.from_spacing_frac(4, 4, 0.25)
        corr = correlation_matrix(grid)
        abs_c = np.abs(corr.matrix)

        def max_pair(idx):
            return max(abs_c[a, b] for a, b in combinations(idx, 2))

        best = min(max_pair(q) for q in combinations(range(16), 4))
        greedy = select_min_correlation(corr, 4)
        flats = [f - 1 for f in greedy.flat_indices()]
        assert max_pair(flats) <= 1.5 * best

    def test_greedy_within_factor_of_exhaustive_8x8(self):
        # the full C(64,4) sweep from the contract, on the lambda/4 grid
        grid = GridSpec.from_spacing_frac(8, 8, 0.25)
        corr = correlation_matrix(grid)
        abs_c = np.abs(corr.matrix)
        best = min_score_exhaustive(abs_c)
        greedy = select_min_correlation(corr, 4)
        flats = [f - 1 for f in greedy.flat_indices()]
        score = max(abs_c[a, b] for a, b in combinations(flats, 2))
        assert score <= 1.5 * best


def min_score_exhaustive(abs_c):
    """Exact minimum over all quadruples of the max pairwise |c|.

    Equivalent to the smallest threshold t such that the graph with edges
    {|c| <= t} contains a 4-clique; binary-searched over the sorted pair
    scores instead of enumerating all C(64,4) quadruples directly.
    """
    n = abs_c.shape[0]
    iu = np.triu_indices(n, 1)
    thresholds = np.unique(abs_c[iu])

    def has_clique(t):
        adj = (abs_c <= t)
        np.fill_diagonal(adj, False)
        nodes = np.arange(n)
        for a in nodes:
            na = nodes[adj[a]]
            na = na[na > a]
            for b in na:
                nb = na[adj[b][na]]
                nb = nb[nb > b]
                for c in nb:
                    if np.any(adj[c][nb[nb > c]]):
                        return True
        return False

    lo, hi = 0, len(thresholds) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if has_clique(thresholds[mid]):
            hi = mid
        else:
            lo = mid + 1
    return thresholds[lo]


class TestDiagonal:
    def test_step_quarter_wavelength(self):
        # |sinc(1/2)| = 2/pi >= 0.1 but sinc(1) = 0 < 0.1 -> K = 2
        grid = GridSpec.from_spacing_frac(8, 8, 0.25)
        corr = correlation_matrix(grid)
        aset = select_diagonal(grid, corr, 2)
        assert aset.elements[0] == (2, 2)
        # lattice neighbor (2, 4) shares row 2 and is nudged down to (3, 4)
        assert aset.elements[1] == (3, 4)

    def test_step_half_wavelength(self):
        grid = GridSpec.from_spacing_frac(8, 8, 0.5)
        corr = correlation_matrix(grid)
        aset = select_diagonal(grid, corr, 3)
        assert aset.elements[0] == (2, 2)
        # K = 1: next lattice points at manhattan order, nudged on shared axes
        assert len(aset) == 3

    def test_single_element(self):
        grid = GridSpec.from_spacing_frac(8, 8, 0.25)
        corr = correlation_matrix(grid)
        assert select_diagonal(grid, corr, 1).elements == ((2, 2),)

    def test_adjacent_lattice_decorrelated(self):
        from soris.geometry import correlation
        grid = GridSpec.from_spacing_frac(8, 8, 0.25)
        corr = correlation_matrix(grid)
        aset = select_diagonal(grid, corr, 4)
        # generating lattice step decorrelates below 0.1 by construction
        assert abs(correlation(grid, (2, 2), (2, 4))) < 0.1

    def test_infeasible_raises(self):
        # lambda/16 spacing on a small grid: no in-grid step decorrelates
        grid = GridSpec.from_spacing_frac(3, 3, 0.0625)
        corr = correlation_matrix(grid)
        with pytest.raises(SelectionInfeasibleError):
            select_diagonal(grid, corr, 2)
