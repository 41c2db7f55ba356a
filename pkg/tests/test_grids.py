"""Grid geometry, field containers, directions, wrap guard, field I/O."""

import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bivirial.grids import (
    ComplexField,
    Direction,
    Grid,
    WrapGuardError,
    check_wrap,
    from_fourier,
    read_field,
    to_fourier,
    wrap_fraction,
    wrap_mass,
    write_field,
)

from conftest import gaussian_on


class TestGrid:
    def test_coordinates_span_half_open_box(self):
        g = Grid(dim=1, points_per_axis=8, half_length=2.0)
        assert g.axis_coords[0] == -2.0
        assert g.axis_coords[-1] == pytest.approx(2.0 - g.spacing)
        assert g.spacing == pytest.approx(0.5)
        assert g.cell_volume == pytest.approx(0.5)

    def test_frequencies_match_fft_layout(self):
        g = Grid(dim=1, points_per_axis=16, half_length=4.0)
        assert np.allclose(g.axis_freqs, np.fft.fftfreq(16, d=g.spacing))
        assert g.freq_spacing == pytest.approx(1.0 / 8.0)
        assert g.nyquist == pytest.approx(1.0)

    def test_2d_cell_volume_and_shape(self):
        g = Grid(dim=2, points_per_axis=32, half_length=1.0)
        assert g.shape == (32, 32)
        assert g.cell_volume == pytest.approx(g.spacing**2)

    def test_odd_point_count_rejected(self):
        with pytest.raises(ValueError):
            Grid(dim=1, points_per_axis=15, half_length=1.0)

    def test_bad_dimension_rejected(self):
        with pytest.raises(ValueError):
            Grid(dim=3, points_per_axis=16, half_length=1.0)


class TestComplexField:
    def test_mass_of_unit_gaussian(self, grid_1d):
        u = gaussian_on(grid_1d)
        # int exp(-x^2/w^2) = w sqrt(pi) for w = 1
        assert u.mass() == pytest.approx(np.sqrt(np.pi), rel=1e-12)

    def test_shape_mismatch_rejected(self, grid_1d):
        with pytest.raises(ValueError):
            ComplexField(grid_1d, np.zeros(7, dtype=complex))

    def test_with_values_keeps_grid(self, grid_1d):
        u = gaussian_on(grid_1d)
        v = u.with_values(2.0 * u.values)
        assert v.grid is u.grid
        assert v.mass() == pytest.approx(4.0 * u.mass())

    def test_fourier_round_trip(self, grid_2d):
        u = gaussian_on(grid_2d, width=1.3)
        back = from_fourier(grid_2d, to_fourier(u))
        assert np.allclose(back.values, u.values, atol=1e-14)

    def test_fourier_convention_plane_wave_single_bin(self):
        # exp(2 pi i xi0 x) with lattice xi0 must land in exactly one bin
        # with unit amplitude: hat f(xi) = int exp(-2 pi i x xi) f dx.
        g = Grid(dim=1, points_per_axis=32, half_length=2.0)
        xi0 = 3.0 * g.freq_spacing
        u = ComplexField(g, np.exp(2j * np.pi * xi0 * g.axis_coords))
        uhat = to_fourier(u)
        k = np.argmin(np.abs(g.axis_freqs - xi0))
        assert abs(uhat[k] - 2.0 * g.half_length) < 1e-10
        rest = np.abs(np.delete(uhat, k)).max()
        assert rest < 1e-10


class TestDirection:
    def test_axis_direction_exact(self):
        d = Direction.axis(2, 0)
        assert d.exact_kind() == "axis"
        assert np.allclose(d.as_array(), [1.0, 0.0])

    def test_negative_axis(self):
        d = Direction.axis(2, 1, -1)
        assert np.allclose(d.as_array(), [0.0, -1.0])
        assert d.exact_kind() == "axis"

    def test_diagonal_normalized(self):
        d = Direction.diagonal(1, -1)
        assert d.exact_kind() == "diagonal"
        assert np.allclose(d.as_array(), [1 / np.sqrt(2), -1 / np.sqrt(2)])
        assert d.axis_signs() == (1, -1)

    def test_generic_direction_not_exact(self):
        d = Direction((0.6, 0.8))
        assert d.exact_kind() is None
        assert np.linalg.norm(d.as_array()) == pytest.approx(1.0)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            Direction((0.0, 0.0))


class TestWrapGuard:
    def test_centered_gaussian_below_limit(self, grid_1d):
        u = gaussian_on(grid_1d)
        assert wrap_fraction(u) < 1e-10
        check_wrap(u)

    def test_edge_mass_detected(self, grid_1d):
        u = gaussian_on(grid_1d, center=[grid_1d.half_length - 0.5])
        assert wrap_fraction(u) > 0.1
        with pytest.raises(WrapGuardError):
            check_wrap(u)

    def test_wrap_mass_counts_margin_cells(self):
        g = Grid(dim=1, points_per_axis=64, half_length=8.0)
        vals = np.zeros(64, dtype=complex)
        vals[0] = 1.0  # in the margin band
        u = ComplexField(g, vals)
        assert wrap_mass(u) == pytest.approx(g.cell_volume)


class TestFieldIO:
    def test_round_trip(self, tmp_path, grid_2d):
        u = gaussian_on(grid_2d, width=0.8, phase=[0.3, -0.2])
        path = str(tmp_path / "field.bin")
        write_field(u, path)
        v = read_field(path)
        assert v.grid == u.grid
        assert np.array_equal(v.values, u.values)

    @given(
        n=st.sampled_from([8, 16]),
        half=st.floats(min_value=0.5, max_value=16.0, allow_nan=False),
        seed=st.integers(min_value=0, max_value=2**31 - 1),
    )
    @settings(max_examples=25, deadline=None)
    def test_round_trip_random(self, n, half, seed):
        g = Grid(dim=1, points_per_axis=n, half_length=half)
        rng = np.random.default_rng(seed)
        u = ComplexField(g, rng.standard_normal(n) + 1j * rng.standard_normal(n))
        with tempfile.TemporaryDirectory() as tmp:
            path = str(Path(tmp) / f"f{seed}.bin")
            write_field(u, path)
            v = read_field(path)
        assert v.grid == g
        assert np.array_equal(v.values, u.values)
