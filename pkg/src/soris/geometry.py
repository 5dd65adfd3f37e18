"""Metasurface grid geometry and the spatial correlation model.

Elements are addressed by 1-based (row, col) pairs, with (1, 1) the upper-left
element.  Vectors and matrices across the package use row-major flat order:
flat = (row - 1) * cols + col, flat in [1, N].

The correlation between two elements separated by a distance d is the
isotropic-scattering kernel sinc(2 d / wavelength) with the normalized sinc
(sinc(0) = 1, so the diagonal of the correlation matrix is exactly 1).
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Rectangular element grid: rows x cols, spacing and wavelength in meters."""

    rows: int
    cols: int
    spacing: float
    wavelength: float

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must have at least one row and one column")
        if self.spacing <= 0 or self.wavelength <= 0:
            raise ValueError("spacing and wavelength must be positive")

    @classmethod
    def from_spacing_frac(cls, rows, cols, spacing_frac, wavelength=0.01):
        """Build a grid whose element spacing is a fraction of the wavelength."""
        return cls(rows, cols, spacing_frac * wavelength, wavelength)

    @property
    def n(self) -> int:
        return self.rows * self.cols

    @property
    def spacing_frac(self) -> float:
        return self.spacing / self.wavelength

    def check_index(self, idx):
        row, col = idx
        if not (1 <= row <= self.rows and 1 <= col <= self.cols):
            raise IndexError(f"element {idx} outside {self.rows}x{self.cols} grid")
        return row, col

    def flat_index(self, idx) -> int:
        """1-based row-major flat index."""
        row, col = self.check_index(idx)
        return (row - 1) * self.cols + col

    def from_flat(self, flat: int):
        if not (1 <= flat <= self.n):
            raise IndexError(f"flat index {flat} outside [1, {self.n}]")
        return (flat - 1) // self.cols + 1, (flat - 1) % self.cols + 1

    def all_elements(self):
        """All (row, col) pairs in flat order."""
        return [(r, c) for r in range(1, self.rows + 1) for c in range(1, self.cols + 1)]


def element_position(grid: GridSpec, idx):
    """(x, y) position in meters; origin at element (1, 1), x along columns."""
    row, col = grid.check_index(idx)
    return (col - 1) * grid.spacing, (row - 1) * grid.spacing


def positions(grid: GridSpec) -> np.ndarray:
    """N x 2 array of element positions in flat order."""
    cols = np.arange(grid.cols)
    rows = np.arange(grid.rows)
    x = np.tile(cols, grid.rows) * grid.spacing
    y = np.repeat(rows, grid.cols) * grid.spacing
    return np.column_stack([x, y])


def pairwise_distance(grid: GridSpec, a, b) -> float:
    xa, ya = element_position(grid, a)
    xb, yb = element_position(grid, b)
    return float(np.hypot(xa - xb, ya - yb))


def correlation(grid: GridSpec, a, b) -> float:
    """Correlation sinc(2 d / wavelength) between two elements."""
    d = pairwise_distance(grid, a, b)
    return float(np.sinc(2.0 * d / grid.wavelength))


@dataclass(frozen=True)
class CorrelationModel:
    """N x N spatial correlation matrix and a factor L with L @ L.T == C."""

    grid: GridSpec
    matrix: np.ndarray
    sqrt_factor: np.ndarray
    clamped_magnitude: float = 0.0  # sum of |negative eigenvalues| absorbed

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def correlation_matrix(grid: GridSpec) -> CorrelationModel:
    """Fill the correlation matrix and compute its symmetric square-root factor.

    The sinc kernel is PSD in exact arithmetic; eigenvalues that come out
    slightly negative from round-off are clamped to zero before taking the
    square root.
    """
    pos = positions(grid)
    dx = pos[:, 0][:, None] - pos[:, 0][None, :]
    dy = pos[:, 1][:, None] - pos[:, 1][None, :]
    dist = np.hypot(dx, dy)
    c = np.sinc(2.0 * dist / grid.wavelength)
    # symmetrize bit-exactly (hypot of negated differences is already equal,
    # but make the contract explicit)
    c = np.triu(c) + np.triu(c, 1).T
    np.fill_diagonal(c, 1.0)

    eigvals, eigvecs = np.linalg.eigh(c)
    if not np.all(np.isfinite(eigvals)):
        raise np.linalg.LinAlgError(
            f"eigendecomposition failed; matrix condition ~{np.linalg.cond(c):.3e}"
        )
    clamped = float(np.abs(eigvals[eigvals < 0]).sum())
    factor = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
    return CorrelationModel(grid=grid, matrix=c, sqrt_factor=factor,
                            clamped_magnitude=clamped)
