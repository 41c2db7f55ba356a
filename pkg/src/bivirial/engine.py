"""Split-step pseudospectral evolution for i u_t + Lap u = eps |u|^(p-1) u.

The sign convention: eps = +1 defocusing, eps = -1 focusing, eps = 0 free.
Invariants: mass integral |u|^2 dx (exactly conserved by Strang splitting,
both substeps preserve |uhat| resp. |u| pointwise) and the energy
E = 1/2 integral |grad u|^2 + eps/(p+1) integral |u|^(p+1).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grids import ComplexField, Grid, from_fourier, to_fourier, write_field
from .reporting import DiagnosticSeries, format_float

__all__ = [
    "BlowUpError",
    "EvolutionConfig",
    "Trajectory",
    "mass",
    "energy",
    "default_dt",
    "kinetic_factor",
    "free_propagate",
    "step_strang",
    "evolve",
    "free_gaussian_exact",
    "gaussian_datum",
    "local_conservation",
    "conservation_residuals",
]


class BlowUpError(RuntimeError):
    """Non-finite values appeared during evolution."""

    def __init__(self, t: float):
        super().__init__(f"non-finite field values at t = {t}")
        self.t = t


@dataclass(frozen=True)
class EvolutionConfig:
    """Parameters of one evolution run.

    sample_stride controls how often fields are retained: every
    ``sample_stride`` steps (plus the initial and final states).
    """

    epsilon: int
    p: float
    dt: float
    t_final: float
    sample_stride: int = 1

    def __post_init__(self) -> None:
        if self.epsilon not in (-1, 0, 1):
            raise ValueError(f"epsilon must be -1, 0 or 1, got {self.epsilon}")
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        n = self.t_final / self.dt
        if abs(n - round(n)) > 1e-9:
            raise ValueError(f"t_final = {self.t_final} is not an integer multiple of dt = {self.dt}")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return abs(int(round(self.t_final / self.dt)))

    def nyquist_phase(self, grid: Grid) -> float:
        """Linear phase advance per step at the Nyquist frequency."""
        return 4.0 * np.pi**2 * grid.nyquist**2 * self.dt


def default_dt(grid: Grid) -> float:
    """Largest dt keeping the Nyquist linear phase below pi/4 per step."""
    return grid.spacing**2 / (4.0 * np.pi)


@dataclass
class Trajectory:
    """Sampled states of one evolution, uniformly spaced in time."""

    grid: Grid
    config: EvolutionConfig
    times: list[float]
    fields: list[ComplexField]
    blowup_time: float | None = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def sample_spacing(self) -> float:
        return self.config.sample_stride * self.config.dt * np.sign(self.config.t_final or 1.0)

    def export(self, out_dir: str, series: DiagnosticSeries | None = None) -> str:
        """Write all samples as field records plus a text index; returns index path.

        When a probe series aligned with the samples is given, its values are
        appended as extra columns on each index line.
        """
        os.makedirs(out_dir, exist_ok=True)
        col_names: list[str] = []
        if series is not None:
            if len(series.times) != len(self.times):
                raise ValueError("probe series is not aligned with trajectory samples")
            col_names = sorted(series.columns)
        index_lines = ["# t,filename" + "".join("," + c for c in col_names)]
        for i, (t, u) in enumerate(zip(self.times, self.fields)):
            name = f"field_{i:05d}.bin"
            write_field(u, os.path.join(out_dir, name))
            extra = "".join(
                "," + format_float(float(series.columns[c][i])) for c in col_names
            )
            index_lines.append(f"{format_float(t)},{name}{extra}")
        index_path = os.path.join(out_dir, "index.txt")
        with open(index_path, "w") as fh:
            fh.write("\n".join(index_lines) + "\n")
        return index_path


def mass(u: ComplexField) -> float:
    return u.mass()


def energy(u: ComplexField, epsilon: int, p: float) -> float:
    """E = 1/2 integral |grad u|^2 + eps/(p+1) integral |u|^(p+1)."""
    g = u.grid
    uhat = to_fourier(u)
    kinetic = 0.5 * float(
        np.sum(4.0 * np.pi**2 * g.freq_norm_sq() * np.abs(uhat) ** 2) * g.freq_spacing**g.dim
    )
    potential = float(np.sum(np.abs(u.values) ** (p + 1)) * g.cell_volume)
    return kinetic + epsilon / (p + 1.0) * potential


def kinetic_factor(grid: Grid, tau: float) -> np.ndarray:
    """Multiplier of the free flow over time tau: exp(-4*pi^2*i*|xi|^2*tau)."""
    return np.exp(-4j * np.pi**2 * grid.freq_norm_sq() * tau)


def free_propagate(u: ComplexField, t: float) -> ComplexField:
    """Exact free evolution by time t (any sign)."""
    return from_fourier(u.grid, kinetic_factor(u.grid, t) * to_fourier(u), u.meta)


def step_strang(u: ComplexField, cfg: EvolutionConfig, tau: float | None = None) -> ComplexField:
    """One Strang step: half kinetic, full potential, half kinetic.

    Both substeps are exact flows of their split Hamiltonians, so the step
    conserves mass to rounding regardless of dt.
    """
    dt = cfg.dt if tau is None else tau
    g = u.grid
    half = kinetic_factor(g, dt / 2.0)
    v = np.fft.ifftn(half * np.fft.fftn(u.values))
    if cfg.epsilon != 0:
        v = v * np.exp(-1j * cfg.epsilon * dt * np.abs(v) ** (cfg.p - 1.0))
    v = np.fft.ifftn(half * np.fft.fftn(v))
    if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
        raise BlowUpError(float("nan"))
    return u.with_values(v)


def evolve(
    u0: ComplexField,
    cfg: EvolutionConfig,
    probes: dict[str, Callable[[float, ComplexField], float]] | None = None,
) -> tuple[Trajectory, DiagnosticSeries]:
    """Run Strang splitting from u0, sampling fields and probe values.

    On blow-up the partial trajectory is returned with ``blowup_time`` set;
    probe series cover the samples actually reached.
    """
    probes = probes or {}
    signed_dt = cfg.dt * (1.0 if cfg.t_final >= 0 else -1.0)
    times = [0.0]
    fields = [u0]
    probe_times = [0.0]
    probe_vals = {name: [fn(0.0, u0)] for name, fn in probes.items()}
    u, t = u0, 0.0
    blowup: float | None = None
    for k in range(1, cfg.n_steps + 1):
        try:
            u = step_strang(u, cfg, tau=signed_dt)
        except BlowUpError:
            blowup = t + signed_dt
            break
        t = k * signed_dt
        if k % cfg.sample_stride == 0 or k == cfg.n_steps:
            times.append(t)
            fields.append(u)
            probe_times.append(t)
            for name, fn in probes.items():
                probe_vals[name].append(fn(t, u))
    if signed_dt < 0:
        # keep the trajectory's times strictly increasing for backward runs
        times.reverse()
        fields.reverse()
        probe_times.reverse()
        for vals in probe_vals.values():
            vals.reverse()
    series = DiagnosticSeries(
        times=np.array(probe_times),
        columns={name: np.array(vals) for name, vals in probe_vals.items()},
        meta={
            "epsilon": cfg.epsilon,
            "p": cfg.p,
            "dt": cfg.dt,
            "nyquist_phase_per_step": cfg.nyquist_phase(u0.grid),
        },
    )
    traj = Trajectory(u0.grid, cfg, times, fields, blowup_time=blowup)
    return traj, series


def gaussian_datum(
    grid: Grid,
    center=0.0,
    frequency=0.0,
    width: float = 1.0,
    amplitude: complex = 1.0,
) -> ComplexField:
    """u0(x) = A exp(-|x-c|^2/(2 sigma^2)) exp(2*pi*i xi0.(x-c))."""
    c = np.broadcast_to(np.atleast_1d(np.asarray(center, dtype=float)), (grid.dim,))
    xi0 = np.broadcast_to(np.atleast_1d(np.asarray(frequency, dtype=float)), (grid.dim,))
    vals = np.full(grid.shape, complex(amplitude), dtype=complex)
    for a, x in enumerate(grid.coords()):
        y = x - c[a]
        vals = vals * np.exp(-(y**2) / (2.0 * width**2) + 2j * np.pi * xi0[a] * y)
    return ComplexField(grid, vals)


def free_gaussian_exact(
    grid: Grid,
    center=0.0,
    frequency=0.0,
    width: float = 1.0,
    t: float = 0.0,
    amplitude: complex = 1.0,
) -> ComplexField:
    """Closed-form free evolution of :func:`gaussian_datum` at time t.

    Per axis, exp(-y^2/(2 sigma^2)) evolves to
    (sigma^2/(sigma^2 + 2it))^(1/2) exp(-y^2/(2(sigma^2 + 2it))), and the
    frequency xi0 boosts the packet with group velocity 4*pi*xi0.
    """
    c = np.broadcast_to(np.atleast_1d(np.asarray(center, dtype=float)), (grid.dim,))
    xi0 = np.broadcast_to(np.atleast_1d(np.asarray(frequency, dtype=float)), (grid.dim,))
    s = width**2 + 2j * t
    vals = np.full(grid.shape, complex(amplitude), dtype=complex)
    vals = vals * np.exp(-4j * np.pi**2 * float(np.dot(xi0, xi0)) * t)
    for a, x in enumerate(grid.coords()):
        y = x - c[a]
        moving = y - 4.0 * np.pi * xi0[a] * t
        vals = vals * np.sqrt(width**2 / s) * np.exp(-(moving**2) / (2.0 * s) + 2j * np.pi * xi0[a] * y)
    return ComplexField(grid, vals)


def local_conservation(u: ComplexField, epsilon: int, p: float):
    """Pointwise densities (N, J, T) of the local conservation laws.

    N = |u|^2, J = 2 Im(conj(u) grad u) (one array per axis), and in 1D
    T = 4|u_x|^2 - N_xx + eps(2 - 4/(p+1)) N^((p+1)/2), satisfying
    N_t + div J = 0 and (1D) J_t + T_x = 0 along solutions.
    """
    from .spectral import gradient

    g = u.grid
    n_density = np.abs(u.values) ** 2
    grads = gradient(u)
    current = [2.0 * np.imag(np.conj(u.values) * gu) for gu in grads]
    stress = None
    if g.dim == 1:
        nf = ComplexField(g, n_density.astype(complex))
        n_xx = from_fourier(g, -4.0 * np.pi**2 * g.freq_norm_sq() * to_fourier(nf)).values.real
        stress = (
            4.0 * np.abs(grads[0]) ** 2
            - n_xx
            + epsilon * (2.0 - 4.0 / (p + 1.0)) * n_density ** ((p + 1.0) / 2.0)
        )
    return n_density, current, stress


def conservation_residuals(traj: Trajectory, i: int, epsilon: int, p: float) -> dict[str, float]:
    """L2 residuals of the local conservation laws at interior sample i.

    Time derivatives use central differences across adjacent samples; space
    derivatives are spectral.  Returns relative L2 residual norms.
    """
    from .spectral import gradient

    if not (0 < i < len(traj) - 1):
        raise ValueError("need an interior sample index")
    h = traj.times[i + 1] - traj.times[i]
    if not np.isclose(traj.times[i] - traj.times[i - 1], h):
        raise ValueError("samples are not uniformly spaced")
    g = traj.grid
    u_prev, u_mid, u_next = traj.fields[i - 1], traj.fields[i], traj.fields[i + 1]
    n_prev, _, t_prev = local_conservation(u_prev, epsilon, p)
    n_mid, j_mid, _ = local_conservation(u_mid, epsilon, p)
    n_next, _, t_next = local_conservation(u_next, epsilon, p)

    def _ddx(values: np.ndarray, axis: int) -> np.ndarray:
        f = ComplexField(g, np.asarray(values, dtype=complex))
        hat = to_fourier(f)
        freq = g.freqs()[axis]
        return from_fourier(g, (2j * np.pi) * freq * hat).values.real

    dn_dt = (n_next - n_prev) / (2.0 * h)
    div_j = np.zeros(g.shape)
    for a in range(g.dim):
        div_j += _ddx(j_mid[a], a)
    r1 = dn_dt + div_j
    scale1 = float(np.sqrt(np.sum(dn_dt**2) * g.cell_volume)) + 1e-300
    out = {"mass_law": float(np.sqrt(np.sum(r1**2) * g.cell_volume)) / scale1}
    if g.dim == 1:
        _, j_prev, _ = local_conservation(u_prev, epsilon, p)
        _, j_next, _ = local_conservation(u_next, epsilon, p)
        dj_dt = (j_next[0] - j_prev[0]) / (2.0 * h)
        _, _, t_mid = local_conservation(u_mid, epsilon, p)
        r2 = dj_dt + _ddx(t_mid, 0)
        scale2 = float(np.sqrt(np.sum(dj_dt**2) * g.cell_volume)) + 1e-300
        out["momentum_law"] = float(np.sqrt(np.sum(r2**2) * g.cell_volume)) / scale2
    return out
