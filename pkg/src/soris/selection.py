"""Selection of the transmit-mode element set.

Three routes: the fixed sets used by the reference experiments, a greedy
minimum-absolute-correlation search, and a diagonal-lattice heuristic keyed to
the spacing-dependent decorrelation distance.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SelectionInfeasibleError
from .geometry import CorrelationModel, GridSpec


@dataclass(frozen=True)
class ActiveSet:
    elements: tuple
    grid: GridSpec

    def __post_init__(self):
        if not (1 <= len(self.elements) < self.grid.n):
            raise ConfigError("active set size must satisfy 1 <= size < N")
        if len(set(self.elements)) != len(self.elements):
            raise ConfigError("active set contains duplicate elements")
        for element in self.elements:
            self.grid.check_index(element)

    def __len__(self):
        return len(self.elements)

    def flat_indices(self) -> np.ndarray:
        """1-based flat indices in set order."""
        return np.array([self.grid.flat_index(e) for e in self.elements])


# Fixed 8x8 sets from the reference experiments.
PRESETS = {
    "p4-set1": ((1, 1), (1, 8), (8, 1), (8, 8)),
    "p4-set2": ((1, 4), (4, 1), (4, 8), (8, 4)),
    "p4-set3": ((4, 4), (4, 5), (5, 4), (5, 5)),
    "p4-set4": ((2, 2), (2, 7), (7, 2), (7, 7)),
    "p8-set1": ((1, 1), (1, 8), (4, 4), (4, 5), (5, 4), (5, 5), (8, 1), (8, 8)),
    "p8-set2": ((1, 1), (1, 4), (1, 8), (4, 1), (4, 8), (8, 1), (8, 4), (8, 8)),
    "p8-set3": ((2, 2), (2, 4), (2, 7), (4, 2), (5, 7), (7, 2), (7, 5), (7, 7)),
    "p8-set4": ((2, 2), (2, 7), (4, 4), (4, 5), (5, 4), (5, 5), (7, 2), (7, 7)),
    "p4-fig10": ((1, 1), (1, 8), (8, 1), (8, 8)),
    "p8-fig10": ((1, 1), (1, 8), (3, 3), (3, 6), (6, 3), (6, 6), (8, 1), (8, 8)),
    "p16-fig10": ((2, 2), (2, 4), (2, 6), (2, 8), (4, 2), (4, 4), (4, 6), (4, 8),
                  (6, 2), (6, 4), (6, 6), (6, 8), (8, 2), (8, 4), (8, 6), (8, 8)),
    "p32-fig10": ((1, 2), (1, 4), (1, 6), (1, 8), (2, 1), (2, 3), (2, 5), (2, 7),
                  (3, 2), (3, 4), (3, 6), (3, 8), (4, 1), (4, 3), (4, 5), (4, 7),
                  (5, 2), (5, 4), (5, 6), (5, 8), (6, 1), (6, 3), (6, 5), (6, 7),
                  (7, 2), (7, 4), (7, 6), (7, 8), (8, 1), (8, 3), (8, 5), (8, 7)),
}


def preset_set(name: str, grid: GridSpec) -> ActiveSet:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    if (grid.rows, grid.cols) != (8, 8):
        raise ConfigError(f"preset {name!r} is defined for an 8x8 grid only")
    return ActiveSet(PRESETS[name], grid)


def select_min_correlation(corr: CorrelationModel, n_f: int) -> ActiveSet:
    """Greedy min-max decorrelation.

    Seed with the element whose |correlation| row sum is minimal, then
    repeatedly add the element minimizing the maximum |correlation| to the
    already-selected ones.  Ties break on the smallest flat index.
    """
    n = corr.n
    if not (1 <= n_f < n):
        raise ConfigError("n_f must satisfy 1 <= n_f < N")
    abs_c = np.abs(corr.matrix)
    row_sums = abs_c.sum(axis=1)
    selected = [int(np.argmin(row_sums))]
    remaining = set(range(n)) - set(selected)
    while len(selected) < n_f:
        best, best_score = None, None
        for cand in sorted(remaining):
            score = abs_c[cand, selected].max()
            if best_score is None or score < best_score:
                best, best_score = cand, score
        selected.append(best)
        remaining.remove(best)
    elements = tuple(corr.grid.from_flat(i + 1) for i in selected)
    return ActiveSet(elements, corr.grid)


def _lattice_step(grid: GridSpec, corr: CorrelationModel, start: int) -> int:
    """Smallest K with |corr((k,k),(k,k+K))| < 0.1 and k+K within the grid."""
    from .geometry import correlation
    for step in range(1, grid.cols - start + 1):
        if abs(correlation(grid, (start, start), (start, start + step))) < 0.1:
            return step
    raise SelectionInfeasibleError(
        "no lattice step decorrelates below 0.1 inside the grid; "
        "use a larger grid or denser spacing")


def select_diagonal(grid: GridSpec, corr: CorrelationModel, n_f: int,
                    start: int | None = None) -> ActiveSet:
    """Diagonal-lattice heuristic.

    Starts at (k, k) with k = ceil(min(rows, cols) / 4) unless overridden, then
    walks the lattice (k + nv*K, k + nh*K) in increasing (nv + nh, nv) order.
    Pairs sharing a row or column have the later element nudged by +1 in the
    shared coordinate when that stays in bounds.
    """
    if not (1 <= n_f < grid.n):
        raise ConfigError("n_f must satisfy 1 <= n_f < N")
    k = start if start is not None else int(np.ceil(min(grid.rows, grid.cols) / 4))
    step = _lattice_step(grid, corr, k)

    candidates = []
    for nv in range((grid.rows - k) // step + 1):
        for nh in range((grid.cols - k) // step + 1):
            candidates.append((nv + nh, nv, (k + nv * step, k + nh * step)))
    candidates.sort()

    selected = []
    for _, _, (row, col) in candidates:
        for prev_row, prev_col in selected:
            if row == prev_row and row + 1 <= grid.rows:
                row += 1
            elif col == prev_col and col + 1 <= grid.cols:
                col += 1
        if (row, col) not in selected:
            selected.append((row, col))
        if len(selected) == n_f:
            return ActiveSet(tuple(selected), grid)
    raise SelectionInfeasibleError(
        f"diagonal lattice yields only {len(selected)} elements; "
        f"requested {n_f} (reduce n_f or use a denser lattice)")
