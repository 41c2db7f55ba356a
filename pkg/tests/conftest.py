"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from bivirial.grids import ComplexField, Grid


@pytest.fixture
def grid_1d() -> Grid:
    return Grid(dim=1, points_per_axis=128, half_length=8.0)


@pytest.fixture
def grid_2d() -> Grid:
    return Grid(dim=2, points_per_axis=64, half_length=8.0)


def gaussian_on(grid: Grid, width: float = 1.0, center=None, phase=None) -> ComplexField:
    """Plain spatial Gaussian without the engine's datum helpers."""
    center = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)
    r2 = np.zeros(grid.shape)
    for a, x in enumerate(grid.coords()):
        r2 = r2 + (x - center[a]) ** 2
    vals = np.exp(-r2 / (2.0 * width**2)).astype(complex)
    if phase is not None:
        ph = np.zeros(grid.shape)
        for a, x in enumerate(grid.coords()):
            ph = ph + phase[a] * x
        vals = vals * np.exp(2j * np.pi * ph)
    return ComplexField(grid, vals)


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)
