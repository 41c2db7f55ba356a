"""Fourier multipliers, derivatives, Sobolev norms, dyadic projections."""

import numpy as np
import pytest

from bivirial.grids import ComplexField, Direction, Grid
from bivirial.spectral import (
    apply_multiplier,
    directional_derivative,
    fractional_derivative,
    gradient,
    homogeneous_sobolev_sq,
    lp_low_block,
    lp_project,
    shift_frequency,
    translate,
)

from conftest import gaussian_on


def plane_wave(grid: Grid, mode) -> ComplexField:
    mode = np.atleast_1d(mode)
    vals = np.ones(grid.shape, dtype=complex)
    for a, x in enumerate(grid.coords()):
        vals = vals * np.exp(2j * np.pi * mode[a] * grid.freq_spacing * x)
    return ComplexField(grid, vals)


class TestDerivatives:
    def test_gradient_of_plane_wave(self):
        g = Grid(dim=2, points_per_axis=32, half_length=2.0)
        u = plane_wave(g, (3, -2))
        gx, gy = gradient(u)
        xi = np.array([3, -2]) * g.freq_spacing
        assert np.allclose(gx, 2j * np.pi * xi[0] * u.values, atol=1e-12)
        assert np.allclose(gy, 2j * np.pi * xi[1] * u.values, atol=1e-12)

    def test_gradient_of_gaussian_matches_analytic(self, grid_1d):
        u = gaussian_on(grid_1d, width=1.0)
        (gx,) = gradient(u)
        x = grid_1d.axis_coords
        assert np.allclose(gx, -x * u.values, atol=1e-10)

    def test_directional_derivative_diagonal(self):
        g = Grid(dim=2, points_per_axis=32, half_length=2.0)
        u = plane_wave(g, (2, 2))
        om = Direction.diagonal(1, 1)
        du = directional_derivative(u, om)
        xi = 2 * g.freq_spacing
        expected = 2j * np.pi * (xi + xi) / np.sqrt(2.0) * u.values
        assert np.allclose(du, expected, atol=1e-12)

    def test_laplacian_symbol(self):
        # multiplier -4 pi^2 |xi|^2 realizes the Laplacian of a lattice wave
        g = Grid(dim=1, points_per_axis=32, half_length=2.0)
        u = plane_wave(g, 5)
        xi = 5 * g.freq_spacing
        lap = apply_multiplier(u, lambda f: -4.0 * np.pi**2 * f**2)
        assert np.allclose(lap.values, -4.0 * np.pi**2 * xi**2 * u.values, atol=1e-10)


class TestFractional:
    def test_half_derivative_of_plane_wave(self):
        g = Grid(dim=1, points_per_axis=64, half_length=4.0)
        u = plane_wave(g, 6)
        xi = 6 * g.freq_spacing
        d = fractional_derivative(u, 0.5)
        assert np.allclose(np.abs(d.values), (2 * np.pi * xi) ** 0.5, atol=1e-10)

    def test_composition_matches_full_order(self, grid_1d):
        u = gaussian_on(grid_1d)
        twice = fractional_derivative(fractional_derivative(u, 0.5), 0.5)
        once = fractional_derivative(u, 1.0)
        assert np.allclose(twice.values, once.values, atol=1e-12)

    def test_first_order_norm_matches_gradient_energy(self, grid_1d):
        # |2 pi xi| and 2 pi i xi share magnitudes bin by bin
        u = gaussian_on(grid_1d, width=0.8)
        (gx,) = gradient(u)
        grad_energy = float(np.sum(np.abs(gx) ** 2) * grid_1d.cell_volume)
        assert homogeneous_sobolev_sq(u, 1.0) == pytest.approx(grad_energy, rel=1e-12)

    def test_sobolev_norm_of_plane_wave(self):
        g = Grid(dim=1, points_per_axis=64, half_length=4.0)
        u = plane_wave(g, 8)
        xi = 8 * g.freq_spacing
        want = (2 * np.pi * xi) * u.mass()
        assert homogeneous_sobolev_sq(u, 0.5) == pytest.approx(want, rel=1e-12)


class TestLittlewoodPaley:
    def test_sharp_support(self):
        g = Grid(dim=1, points_per_axis=256, half_length=8.0)
        u = gaussian_on(g, width=0.3)
        j = 2
        pj = lp_project(u, j)
        hat = np.fft.fft(pj.values)  # support check only needs locations
        q = np.abs(g.axis_freqs)
        inside = (q >= 2.0**j) & (q < 2.0 ** (j + 1))
        assert np.all(np.abs(hat[~inside]) < 1e-12)

    def test_blocks_partition_identity(self):
        # low block below 1 plus annuli up through [8, 16) cover every bin:
        # the most negative lattice frequency sits at exactly -8
        g = Grid(dim=1, points_per_axis=256, half_length=8.0)
        u = gaussian_on(g, width=0.3)
        total = lp_low_block(u, 0).values.copy()
        for j in range(0, 4):
            total = total + lp_project(u, j).values
        assert np.allclose(total, u.values, atol=1e-12)

    def test_projection_idempotent(self):
        g = Grid(dim=1, points_per_axis=128, half_length=8.0)
        u = gaussian_on(g, width=0.5)
        once = lp_project(u, 1)
        twice = lp_project(once, 1)
        assert np.allclose(once.values, twice.values, atol=1e-14)


class TestShifts:
    def test_frequency_shift_moves_spectrum(self):
        g = Grid(dim=1, points_per_axis=64, half_length=4.0)
        u = plane_wave(g, 2)
        v = shift_frequency(u, 3 * g.freq_spacing)
        w = plane_wave(g, 5)
        assert np.allclose(v.values, w.values, atol=1e-12)

    def test_frequency_shift_preserves_mass(self, grid_1d):
        u = gaussian_on(grid_1d)
        v = shift_frequency(u, 5 * grid_1d.freq_spacing)
        assert v.mass() == pytest.approx(u.mass(), rel=1e-12)

    def test_translate_matches_rolled_samples(self):
        g = Grid(dim=1, points_per_axis=64, half_length=4.0)
        u = gaussian_on(g, width=0.7)
        v = translate(u, 4 * g.spacing)
        assert np.allclose(v.values, np.roll(u.values, 4), atol=1e-10)
