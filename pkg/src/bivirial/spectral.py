"""Fourier multiplier operations: derivatives, projections, frequency shifts."""

from __future__ import annotations

import warnings
from typing import Callable

import numpy as np

from .grids import ComplexField, Grid, from_fourier, to_fourier

__all__ = [
    "MultiplierDomainError",
    "EmptyProjectionWarning",
    "multiplier_array",
    "apply_multiplier",
    "gradient",
    "directional_derivative",
    "fractional_derivative",
    "homogeneous_sobolev_sq",
    "lp_project",
    "lp_low_block",
    "shift_frequency",
    "translate",
]


class MultiplierDomainError(ValueError):
    """A multiplier evaluated to a non-finite value on the frequency lattice."""


class EmptyProjectionWarning(UserWarning):
    """A dyadic annulus contains no lattice frequency."""


def multiplier_array(grid: Grid, m: Callable[..., np.ndarray] | np.ndarray) -> np.ndarray:
    """Evaluate a multiplier on the frequency lattice and validate finiteness."""
    if callable(m):
        arr = np.asarray(m(*grid.freqs()))
        arr = np.broadcast_to(arr, grid.shape)
    else:
        arr = np.asarray(m)
        if arr.shape != grid.shape:
            raise ValueError(f"multiplier shape {arr.shape} does not match lattice {grid.shape}")
    if not np.all(np.isfinite(arr)):
        raise MultiplierDomainError("multiplier is not finite on the frequency lattice")
    return arr


def apply_multiplier(u: ComplexField, m: Callable[..., np.ndarray] | np.ndarray) -> ComplexField:
    """Return the field with Fourier coefficients multiplied by m(xi)."""
    arr = multiplier_array(u.grid, m)
    return from_fourier(u.grid, arr * to_fourier(u), u.meta)


def gradient(u: ComplexField) -> list[np.ndarray]:
    """Spectral gradient; one complex array per axis."""
    uhat = to_fourier(u)
    out = []
    for f in u.grid.freqs():
        out.append(from_fourier(u.grid, (2j * np.pi) * f * uhat).values)
    return out


def directional_derivative(u: ComplexField, omega) -> np.ndarray:
    """Spectral omega . grad u as a plain complex array."""
    comp = np.asarray(getattr(omega, "components", omega), dtype=float)
    uhat = to_fourier(u)
    sym = np.zeros(u.grid.shape, dtype=complex)
    for c, f in zip(comp, u.grid.freqs()):
        if c != 0.0:
            sym = sym + (2j * np.pi * c) * f
    return from_fourier(u.grid, sym * uhat).values


def fractional_derivative(u: ComplexField, s: float) -> ComplexField:
    """|grad|^s u via the multiplier (2*pi*|xi|)^s.

    For s < 0 the zero mode is annihilated rather than divided by zero; the
    drop is recorded in the field metadata.
    """
    r = np.sqrt(u.grid.freq_norm_sq())
    with np.errstate(divide="ignore"):
        sym = np.where(r > 0, (2.0 * np.pi * np.maximum(r, 1e-300)) ** s, 0.0)
    if s == 0:
        sym = np.ones_like(sym)
    uhat = to_fourier(u)
    meta = u.meta
    if s < 0 and abs(uhat.flat[0]) > 0:
        meta = meta + (f"zero-mode-dropped:s={s}",)
    return from_fourier(u.grid, sym * uhat, meta)


def homogeneous_sobolev_sq(u: ComplexField, s: float) -> float:
    """Squared homogeneous Sobolev norm: sum (2*pi*|xi|)^(2s) |uhat|^2 dxi^dim.

    The zero mode is excluded for s != 0 (it carries no |xi| weight for s > 0
    and would be infinite for s < 0).
    """
    g = u.grid
    uhat = to_fourier(u)
    r = np.sqrt(g.freq_norm_sq())
    w = np.zeros_like(r)
    pos = r > 0
    w[pos] = (2.0 * np.pi * r[pos]) ** (2.0 * s)
    if s == 0:
        w[...] = 1.0
    return float(np.sum(w * np.abs(uhat) ** 2) * g.freq_spacing**g.dim)


def lp_project(u: ComplexField, j: int) -> ComplexField:
    """Sharp Littlewood-Paley projection onto 2^j <= |xi| < 2^(j+1).

    Annuli that contain no lattice point trigger EmptyProjectionWarning and
    return the zero field.  The zero mode belongs to no annulus; summing all
    annuli that meet the lattice plus the zero mode reproduces u exactly.
    """
    r = np.sqrt(u.grid.freq_norm_sq())
    lo, hi = 2.0**j, 2.0 ** (j + 1)
    mask = (r >= lo) & (r < hi)
    if not mask.any():
        warnings.warn(
            f"annulus [2^{j}, 2^{j + 1}) contains no lattice frequency",
            EmptyProjectionWarning,
            stacklevel=2,
        )
        return u.with_values(np.zeros(u.grid.shape, dtype=complex))
    return from_fourier(u.grid, mask * to_fourier(u), u.meta)


def lp_low_block(u: ComplexField, j: int) -> ComplexField:
    """Projection onto |xi| < 2^j including the zero mode."""
    r = np.sqrt(u.grid.freq_norm_sq())
    mask = r < 2.0**j
    return from_fourier(u.grid, mask * to_fourier(u), u.meta)


def _lattice_vector(grid: Grid, xi0) -> np.ndarray:
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    if xi0.size != grid.dim:
        raise ValueError(f"frequency shift needs {grid.dim} components, got {xi0.size}")
    steps = xi0 / grid.freq_spacing
    if np.max(np.abs(steps - np.rint(steps))) > 1e-9:
        raise ValueError(f"shift {tuple(xi0)} is not on the frequency lattice (spacing {grid.freq_spacing})")
    return xi0


def shift_frequency(u: ComplexField, xi0) -> ComplexField:
    """Modulate by exp(2*pi*i x.xi0) for a lattice vector xi0.

    Pointwise modulation preserves |u| exactly, hence the mass, and shifts
    the Fourier support by xi0 on the periodic lattice.
    """
    xi0 = _lattice_vector(u.grid, xi0)
    phase = np.zeros(u.grid.shape)
    for c, x in zip(xi0, u.grid.coords()):
        phase = phase + c * x
    return u.with_values(u.values * np.exp(2j * np.pi * phase))


def translate(u: ComplexField, x0) -> ComplexField:
    """Shift the field by x0 (any real vector) via Fourier modulation."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size != u.grid.dim:
        raise ValueError(f"translation needs {u.grid.dim} components, got {x0.size}")
    uhat = to_fourier(u)
    phase = np.zeros(u.grid.shape)
    for c, f in zip(x0, u.grid.freqs()):
        phase = phase + c * f
    return from_fourier(u.grid, uhat * np.exp(-2j * np.pi * phase), u.meta)
