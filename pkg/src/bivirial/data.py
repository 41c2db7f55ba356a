"""Seeded deterministic test data: random smooth fields, frequency bumps, plane waves.

The generator algorithm name is part of the reproducibility contract: configs
record (generator, seed) and the same pair must regenerate bit-identical data
on one machine.
"""

from __future__ import annotations

import numpy as np

from .grids import ComplexField, Grid, from_fourier

__all__ = [
    "GENERATOR_NAME",
    "make_rng",
    "random_smooth_datum",
    "random_localized_datum",
    "plane_wave_datum",
    "low_ball_datum",
]

GENERATOR_NAME = "numpy-pcg64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_smooth_datum(
    grid: Grid,
    seed: int,
    freq_width: float | None = None,
    amplitude: float = 1.0,
) -> ComplexField:
    """Schwartz-like random field: Gaussian-decaying random spectrum.

    uhat picks independent standard complex normals per lattice mode, damped
    by exp(-|xi|^2/(2 w^2)); the result is rescaled to mass amplitude^2.
    Default w keeps the spectrum well clear of Nyquist (w = nyquist/6).
    """
    rng = make_rng(seed)
    w = grid.nyquist / 6.0 if freq_width is None else float(freq_width)
    if w <= 0:
        raise ValueError("freq_width must be positive")
    coeff = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    u = from_fourier(
        grid,
        coeff * np.exp(-grid.freq_norm_sq() / (2.0 * w * w)),
        meta=(f"random_smooth(seed={seed}, w={w:g})",),
    )
    m = u.mass()
    if m <= 0:
        raise ValueError("degenerate random datum")
    return u.with_values(u.values * (amplitude / np.sqrt(m)))


def random_localized_datum(
    grid: Grid,
    seed: int,
    freq_width: float | None = None,
    amplitude: float = 1.0,
    envelope_fraction: float = 0.2,
) -> ComplexField:
    """Spatially decaying random field: random smooth spectrum times a
    centered Gaussian envelope of width envelope_fraction * half_length.

    The default fraction leaves ~4e-6 relative amplitude at the box edge, so
    estimates whose hypotheses require decay (not mere periodicity) apply.
    Mass is rescaled to amplitude^2 after windowing.
    """
    if not 0 < envelope_fraction < 0.5:
        raise ValueError("envelope_fraction must sit in (0, 0.5)")
    u = random_smooth_datum(grid, seed, freq_width=freq_width, amplitude=1.0)
    w = envelope_fraction * grid.half_length
    r2 = np.zeros(grid.shape)
    for x in grid.coords():
        r2 = r2 + x * x
    vals = u.values * np.exp(-r2 / (2.0 * w * w))
    m = np.sum(np.abs(vals) ** 2) * grid.cell_volume
    if m <= 0:
        raise ValueError("degenerate localized datum")
    return ComplexField(
        grid,
        vals * (amplitude / np.sqrt(m)),
        meta=(f"random_localized(seed={seed}, envelope={envelope_fraction:g})",),
    )


def plane_wave_datum(grid: Grid, mode, amplitude: complex = 1.0) -> ComplexField:
    """A exp(2 pi i xi.x) with xi = mode * freq_spacing (exact lattice wave)."""
    mode = np.broadcast_to(np.atleast_1d(np.asarray(mode, dtype=int)), (grid.dim,))
    vals = np.full(grid.shape, complex(amplitude), dtype=complex)
    for a, x in enumerate(grid.coords()):
        vals = vals * np.exp(2j * np.pi * (mode[a] * grid.freq_spacing) * x)
    return ComplexField(grid, vals, meta=(f"plane_wave(mode={tuple(int(m) for m in mode)})",))


def low_ball_datum(grid: Grid, radius: float, width: float | None = None) -> ComplexField:
    """Unit-mass bump with spectrum supported in the ball |xi| <= radius.

    uhat = exp(-|xi|^2/(2 sigma^2)) hard-cut at |xi| = radius (sigma =
    radius/3 by default), so the support statement is exact, not just decay.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if radius >= grid.nyquist:
        raise ValueError(f"ball radius {radius} reaches Nyquist {grid.nyquist}")
    sigma = radius / 3.0 if width is None else float(width)
    q = grid.freq_norm_sq()
    uhat = np.exp(-q / (2.0 * sigma * sigma)) * (q <= radius * radius)
    u = from_fourier(grid, uhat, meta=(f"low_ball(radius={radius:g})",))
    return u.with_values(u.values / np.sqrt(u.mass()))
