"""Periodic grids, complex fields, directions, and the shared Fourier convention.

Every module in the package works on the torus [-L, L)^dim sampled with N
points per axis.  The continuum transform pair is

    fhat(xi) = integral exp(-2*pi*i x.xi) f(x) dx,
    f(x)     = integral exp(+2*pi*i x.xi) fhat(xi) dxi,

so the discrete frequency lattice is ``numpy.fft.fftfreq(N, d=spacing)``
(= k/(2L) for integer k), the Laplacian is the multiplier -4*pi^2*|xi|^2,
and Parseval holds with cell volumes spacing**dim and (1/(2L))**dim.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Grid",
    "ComplexField",
    "Direction",
    "WrapGuardError",
    "to_fourier",
    "from_fourier",
    "wrap_mass",
    "wrap_fraction",
    "check_wrap",
    "write_field",
    "read_field",
]


class WrapGuardError(RuntimeError):
    """Raised when too much mass sits near the box boundary for an identity check."""


def _valid_axis_count(n: int) -> bool:
    # even so the frequency lattice is {-N/2, ..., N/2-1}/(2L) exactly
    return n >= 2 and n % 2 == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-half_length, half_length)^dim.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    points_per_axis : int
        Number of samples per axis; must be even.
    half_length : float
        Half side length L of the box [-L, L)^dim.
    """

    dim: int
    points_per_axis: int
    half_length: float

    # Precomputed per-axis arrays, filled in __post_init__.
    axis_coords: np.ndarray = field(init=False, repr=False, compare=False)
    axis_freqs: np.ndarray = field(init=False, repr=False, compare=False)
    axis_phase: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not _valid_axis_count(self.points_per_axis):
            raise ValueError(f"points_per_axis must be an even integer >= 2, got {self.points_per_axis}")
        if not (self.half_length > 0):
            raise ValueError(f"half_length must be positive, got {self.half_length}")
        n = self.points_per_axis
        dx = 2.0 * self.half_length / n
        x = -self.half_length + dx * np.arange(n)
        xi = np.fft.fftfreq(n, d=dx)
        # exp(2*pi*i*L*xi_k) = (-1)^k accounts for the box starting at -L.
        k = np.rint(xi * 2.0 * self.half_length).astype(np.int64)
        phase = np.where(k % 2 == 0, 1.0, -1.0)
        object.__setattr__(self, "axis_coords", x)
        object.__setattr__(self, "axis_freqs", xi)
        object.__setattr__(self, "axis_phase", phase)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.points_per_axis

    @property
    def freq_spacing(self) -> float:
        return 1.0 / (2.0 * self.half_length)

    @property
    def nyquist(self) -> float:
        """Largest resolved axis frequency magnitude, N/(4L)."""
        return self.points_per_axis / (4.0 * self.half_length)

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    def coords(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        return list(np.meshgrid(*([self.axis_coords] * self.dim), indexing="ij", sparse=True))

    def freqs(self) -> list[np.ndarray]:
        """Broadcastable frequency arrays, one per axis (fft ordering)."""
        return list(np.meshgrid(*([self.axis_freqs] * self.dim), indexing="ij", sparse=True))

    def freq_norm_sq(self) -> np.ndarray:
        """|xi|^2 on the full lattice (fft ordering)."""
        out = np.zeros(self.shape)
        for f in self.freqs():
            out = out + f**2
        return out

    def phase_nd(self) -> np.ndarray:
        """Product of per-axis (-1)^k phases (fft ordering)."""
        out = np.ones(self.shape)
        for p in np.meshgrid(*([self.axis_phase] * self.dim), indexing="ij", sparse=True):
            out = out * p
        return out


@dataclass(frozen=True)
class ComplexField:
    """A complex-valued sample field on a Grid.

    Values are stored row-major with index order matching ``Grid.coords()``.
    Fields are treated as immutable: operations return new instances.
    """

    grid: Grid
    values: np.ndarray
    meta: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def mass(self) -> float:
        """integral |u|^2 dx as a cell-volume weighted sum."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def with_values(self, values: np.ndarray, note: str | None = None) -> "ComplexField":
        meta = self.meta if note is None else self.meta + (note,)
        return ComplexField(self.grid, values, meta)


@dataclass(frozen=True)
class Direction:
    """A unit direction omega used by Radon transforms and virial weights."""

    components: tuple[float, ...]

    def __post_init__(self) -> None:
        comp = tuple(float(c) for c in self.components)
        norm = float(np.sqrt(sum(c * c for c in comp)))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"direction must be a unit vector, |omega| = {norm}")
        object.__setattr__(self, "components", comp)

    @property
    def dim(self) -> int:
        return len(self.components)

    def as_array(self) -> np.ndarray:
        return np.array(self.components)

    def exact_kind(self) -> str | None:
        """Classify against the exactly marginalizable lattice directions.

        Returns 'axis' for +-e_i, 'diagonal' for (+-1, +-1)/sqrt(2) in 2D,
        and None for anything else.
        """
        c = np.array(self.components)
        tol = 1e-12
        axes = np.abs(np.abs(c) - 1.0) < tol
        zeros = np.abs(c) < tol
        if axes.sum() == 1 and zeros.sum() == self.dim - 1:
            return "axis"
        if self.dim == 2 and np.all(np.abs(np.abs(c) - 1.0 / np.sqrt(2.0)) < 1e-12):
            return "diagonal"
        return None

    def axis_signs(self) -> tuple[int, ...]:
        """Integer signs of the components of an exact direction."""
        kind = self.exact_kind()
        if kind is None:
            raise ValueError(f"direction {self.components} is not an exact lattice direction")
        return tuple(int(np.sign(c)) if abs(c) > 1e-12 else 0 for c in self.components)

    @staticmethod
    def axis(dim: int, axis: int, sign: int = 1) -> "Direction":
        comp = [0.0] * dim
        comp[axis] = float(np.sign(sign))
        return Direction(tuple(comp))

    @staticmethod
    def diagonal(sign0: int = 1, sign1: int = 1) -> "Direction":
        r = 1.0 / np.sqrt(2.0)
        return Direction((np.sign(sign0) * r, np.sign(sign1) * r))


def to_fourier(u: ComplexField) -> np.ndarray:
    """Discrete approximation of fhat on the frequency lattice (fft ordering).

    Implements fhat(xi_k) = spacing**dim * (-1)^k * FFT(u), which is the
    Riemann sum of the continuum transform over the box starting at -L.
    """
    g = u.grid
    return g.spacing**g.dim * g.phase_nd() * np.fft.fftn(u.values)


def from_fourier(grid: Grid, uhat: np.ndarray, meta: tuple[str, ...] = ()) -> ComplexField:
    """Inverse of :func:`to_fourier`."""
    values = np.fft.ifftn(grid.phase_nd() * np.asarray(uhat, dtype=np.complex128)) / grid.spacing**grid.dim
    return ComplexField(grid, values, meta)


def wrap_mass(u: ComplexField, margin_cells: int = 8) -> float:
    """Mass |u|^2 within ``margin_cells`` grid cells of the box boundary."""
    g = u.grid
    band = margin_cells * g.spacing
    lo = -g.half_length + band
    hi = g.half_length - band
    mask = np.zeros(g.shape, dtype=bool)
    for x in g.coords():
        mask = mask | (x < lo) | (x >= hi)
    return float(np.sum(np.abs(u.values[mask]) ** 2) * g.cell_volume)


def wrap_fraction(u: ComplexField, margin_cells: int = 8) -> float:
    total = u.mass()
    if total == 0.0:
        return 0.0
    return wrap_mass(u, margin_cells) / total


def check_wrap(u: ComplexField, limit: float = 1e-6, margin_cells: int = 8) -> None:
    """Abort identity checks when boundary mass exceeds ``limit`` of the total."""
    frac = wrap_fraction(u, margin_cells)
    if frac > limit:
        raise WrapGuardError(
            f"boundary band holds {frac:.3e} of the field mass (limit {limit:.1e}); "
            "the periodic box no longer approximates free space"
        )


_HEADER = struct.Struct("<qqd")  # dim, points_per_axis, half_length


def write_field(u: ComplexField, path: str) -> None:
    """Write a field as a flat binary record plus a text metadata sidecar.

    Layout: little-endian int64 dim, int64 points_per_axis, float64
    half_length, then interleaved re/im float64 pairs in row-major order.
    """
    g = u.grid
    flat = np.empty(u.values.size * 2, dtype="<f8")
    flat[0::2] = u.values.real.ravel(order="C")
    flat[1::2] = u.values.imag.ravel(order="C")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(g.dim, g.points_per_axis, g.half_length))
        fh.write(flat.tobytes())
    lines = [
        "format=bivirial-field-v1",
        f"dim={g.dim}",
        f"points_per_axis={g.points_per_axis}",
        f"half_length={g.half_length!r}",
        f"mass={u.mass()!r}",
    ]
    for note in u.meta:
        lines.append(f"note={note}")
    with open(path + ".meta.txt", "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field(path: str) -> ComplexField:
    """Read a field written by :func:`write_field`."""
    with open(path, "rb") as fh:
        dim, n, half_length = _HEADER.unpack(fh.read(_HEADER.size))
        flat = np.frombuffer(fh.read(), dtype="<f8")
    expected = 2 * n**dim
    if flat.size != expected:
        raise ValueError(f"field payload has {flat.size} floats, expected {expected}")
    values = (flat[0::2] + 1j * flat[1::2]).reshape((n,) * dim)
    return ComplexField(Grid(dim, n, half_length), values)
