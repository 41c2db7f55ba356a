"""Config-driven experiment registry over the verifiers and domain diagnostics.

One experiment is one INI file: fixed sections ([experiment], [grid], [datum],
[datum2], [evolution], [direction], [obstacle], [weight], [ladder], [options])
with key=value entries.  ExperimentConfig round-trips through that text form
losslessly (floats are written with 17 significant digits), and every
randomized runner derives its generator from the config seed, so a fixed
config file reproduces its CSV series bit for bit.

Experiment kinds are registered in a fixed order with a one-line summary;
``list_experiments`` renders that table for the command line.
"""

from __future__ import annotations

import configparser
import io
import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .data import (
    low_ball_datum,
    plane_wave_datum,
    random_localized_datum,
    random_smooth_datum,
)
from .domain import (
    DomainGrid,
    DomainTrajectory,
    ObstacleSpec,
    VirialWeight,
    cross_engine_convergence,
    domain_virial_residual,
    evolve_domain,
    frequency_localized_l4,
    trace_control_measurement,
    verify_obstacle_identity,
)
from .engine import EvolutionConfig, Trajectory, evolve, gaussian_datum
from .grids import ComplexField, Direction, Grid
from .manifest import tolerance
from .reporting import DiagnosticSeries, VerificationReport
from .verify import (
    apriori_bound_check,
    bilinear_pair_1d,
    bilinear_radon_bound,
    bourgain_scaling,
    convexity_sweep,
    directional_pair,
    momentum_bound_suite,
    ozawa_tsutsumi_check,
    plancherel_study,
    scattering_diagnostic,
    smoothing_check_1d,
    verify_identity,
    weighted_form_consistency,
)

__all__ = [
    "ConfigError",
    "DatumSpec",
    "DirectionSpec",
    "EvolutionSpec",
    "ExperimentConfig",
    "GridSpec",
    "LadderSpec",
    "WeightSpec",
    "REGISTRY",
    "build_datum",
    "config_from_ini",
    "config_to_ini",
    "ladder_levels",
    "list_experiments",
    "read_config",
    "run_experiment",
    "write_config",
]


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


# ---------------------------------------------------------------------------
# config sections


@dataclass(frozen=True)
class GridSpec:
    dim: int = 2
    points_per_axis: int = 128
    half_length: float = 8.0

    def build(self) -> Grid:
        return Grid(dim=self.dim, points_per_axis=self.points_per_axis, half_length=self.half_length)


@dataclass(frozen=True)
class DatumSpec:
    """Initial-datum recipe; ``kind`` selects which other fields apply.

    kinds: gaussian (center, frequency, width, amplitude), plane-wave (mode,
    amplitude), eigenmode (mode, amplitude: Dirichlet sine product, zero on
    the outer ring), random-smooth / random-localized (seed_offset, amplitude,
    envelope_fraction), low-ball (radius, width; width 0 means the preset),
    zero, file (path to a .npy complex array).
    """

    kind: str = "gaussian"
    center: tuple[float, ...] = ()
    frequency: tuple[float, ...] = ()
    width: float = 1.0
    amplitude: float = 1.0
    mode: tuple[int, ...] = ()
    radius: float = 1.0
    seed_offset: int = 0
    envelope_fraction: float = 0.2
    path: str = ""


@dataclass(frozen=True)
class EvolutionSpec:
    epsilon: int = 0
    p: float = 3.0
    dt: float = 1.0e-3
    t_final: float = 0.5
    sample_stride: int = 1

    def build(self) -> EvolutionConfig:
        return EvolutionConfig(
            epsilon=self.epsilon,
            p=self.p,
            dt=self.dt,
            t_final=self.t_final,
            sample_stride=self.sample_stride,
        )


@dataclass(frozen=True)
class DirectionSpec:
    kind: str = "axis"
    axis: int = 0
    sign: int = 1
    signs: tuple[int, int] = (1, 1)

    def build(self, dim: int) -> Direction:
        if self.kind == "axis":
            return Direction.axis(dim, self.axis, self.sign)
        if self.kind == "diagonal":
            if dim != 2:
                raise ConfigError("diagonal directions are two-dimensional")
            return Direction.diagonal(*self.signs)
        raise ConfigError(f"unknown direction kind {self.kind!r}")


@dataclass(frozen=True)
class WeightSpec:
    preset: str = "distance"
    origin: tuple[float, float] = (0.0, 0.0)

    def build(self) -> VirialWeight:
        if self.preset == "distance":
            return VirialWeight.distance_to_point(self.origin)
        if self.preset == "sqrt":
            return VirialWeight.sqrt_one_plus_sq(self.origin)
        raise ConfigError(f"unknown weight preset {self.preset!r}")


@dataclass(frozen=True)
class LadderSpec:
    """Refinement ladder: parallel lists of grid sizes and time steps.

    Either list may be omitted (the base value repeats); when both are given
    they must have equal length.  Empty ladder means a single run at the base
    configuration.
    """

    points_per_axis: tuple[int, ...] = ()
    dt: tuple[float, ...] = ()

    def __len__(self) -> int:
        return max(len(self.points_per_axis), len(self.dt))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    label: str = ""
    seed: int = 0
    grid: GridSpec = GridSpec()
    datum: DatumSpec = DatumSpec()
    datum2: DatumSpec | None = None
    evolution: EvolutionSpec = EvolutionSpec()
    direction: DirectionSpec = DirectionSpec()
    obstacle: ObstacleSpec | None = None
    weight: WeightSpec | None = None
    ladder: LadderSpec = LadderSpec()
    options: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        # Canonical option order keeps the INI round trip lossless.
        object.__setattr__(self, "options", tuple(sorted(self.options)))

    def option(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.options:
            if k == key:
                return v
        return default

    @property
    def name(self) -> str:
        return self.label or self.kind


def _opt_float(cfg: ExperimentConfig, key: str, default: float) -> float:
    raw = cfg.option(key)
    return default if raw is None else float(raw)


def _opt_int(cfg: ExperimentConfig, key: str, default: int) -> int:
    raw = cfg.option(key)
    return default if raw is None else int(raw)


def _opt_ints(cfg: ExperimentConfig, key: str, default: tuple[int, ...]) -> tuple[int, ...]:
    raw = cfg.option(key)
    return default if raw is None else _parse_ints(raw)


def _opt_floats(cfg: ExperimentConfig, key: str, default: tuple[float, ...]) -> tuple[float, ...]:
    raw = cfg.option(key)
    return default if raw is None else _parse_floats(raw)


# ---------------------------------------------------------------------------
# INI serialization

_FMT = "%.17g"


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return _FMT % v
    if isinstance(v, tuple):
        return ",".join(_fmt_value(x) for x in v)
    return str(v)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _section_from(obj) -> dict[str, str]:
    out = {}
    for name in obj.__dataclass_fields__:
        out[name] = _fmt_value(getattr(obj, name))
    return out


def _obstacle_section(spec: ObstacleSpec) -> dict[str, str]:
    out = {"shape": spec.shape, "center": _fmt_value(tuple(spec.center))}
    if spec.shape == "disk":
        out["radius"] = _fmt_value(float(spec.radius))
    else:
        out["vertices"] = ";".join(_fmt_value(tuple(v)) for v in spec.vertices)
    return out


def _obstacle_from_section(sec: dict[str, str]) -> ObstacleSpec:
    shape = sec.get("shape", "")
    center = _parse_floats(sec.get("center", "0,0"))
    if len(center) != 2:
        raise ConfigError("obstacle center needs two coordinates")
    if shape == "disk":
        return ObstacleSpec("disk", (center[0], center[1]), radius=float(sec["radius"]))
    if shape == "polygon":
        verts = []
        for chunk in sec.get("vertices", "").split(";"):
            if not chunk.strip():
                continue
            xy = _parse_floats(chunk)
            if len(xy) != 2:
                raise ConfigError(f"bad polygon vertex {chunk!r}")
            verts.append((xy[0], xy[1]))
        return ObstacleSpec("polygon", (center[0], center[1]), vertices=tuple(verts))
    raise ConfigError(f"unknown obstacle shape {shape!r}")


_DATUM_FIELDS = {f: t for f, t in DatumSpec.__dataclass_fields__.items()}


def _datum_from_section(sec: dict[str, str]) -> DatumSpec:
    kwargs = {}
    for key, raw in sec.items():
        if key not in _DATUM_FIELDS:
            raise ConfigError(f"unknown datum key {key!r}")
        if key in ("kind", "path"):
            kwargs[key] = raw
        elif key in ("center", "frequency"):
            kwargs[key] = _parse_floats(raw)
        elif key == "mode":
            kwargs[key] = _parse_ints(raw)
        elif key == "seed_offset":
            kwargs[key] = int(raw)
        else:
            kwargs[key] = float(raw)
    return DatumSpec(**kwargs)


def config_to_ini(cfg: ExperimentConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["experiment"] = {"kind": cfg.kind, "label": cfg.label, "seed": str(cfg.seed)}
    cp["grid"] = _section_from(cfg.grid)
    cp["datum"] = _section_from(cfg.datum)
    if cfg.datum2 is not None:
        cp["datum2"] = _section_from(cfg.datum2)
    cp["evolution"] = _section_from(cfg.evolution)
    cp["direction"] = _section_from(cfg.direction)
    if cfg.obstacle is not None:
        cp["obstacle"] = _obstacle_section(cfg.obstacle)
    if cfg.weight is not None:
        cp["weight"] = _section_from(cfg.weight)
    if len(cfg.ladder):
        cp["ladder"] = {
            k: v
            for k, v in _section_from(cfg.ladder).items()
            if v  # omit the list the ladder leaves at the base value
        }
    if cfg.options:
        cp["options"] = dict(cfg.options)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


_KNOWN_SECTIONS = (
    "experiment",
    "grid",
    "datum",
    "datum2",
    "evolution",
    "direction",
    "obstacle",
    "weight",
    "ladder",
    "options",
)


def config_from_ini(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc
    for sec in cp.sections():
        if sec not in _KNOWN_SECTIONS:
            raise ConfigError(f"unknown config section [{sec}]")
    if "experiment" not in cp or "kind" not in cp["experiment"]:
        raise ConfigError("config needs [experiment] kind = <registered kind>")
    exp = cp["experiment"]
    kind = exp["kind"]
    if kind not in REGISTRY:
        raise ConfigError(f"unknown experiment kind {kind!r}; see list-experiments")
    for key in exp:
        if key not in ("kind", "label", "seed"):
            raise ConfigError(f"unknown experiment key {key!r}")

    def typed(section: str, builder, caster) -> dict:
        if section not in cp:
            return {}
        out = {}
        fields = builder.__dataclass_fields__
        for key, raw in cp[section].items():
            if key not in fields:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            out[key] = caster(key, raw)
        return out

    def cast_grid(key, raw):
        return float(raw) if key == "half_length" else int(raw)

    def cast_evolution(key, raw):
        return int(raw) if key in ("epsilon", "sample_stride") else float(raw)

    def cast_direction(key, raw):
        if key == "kind":
            return raw
        if key == "signs":
            return _parse_ints(raw)
        return int(raw)

    def cast_weight(key, raw):
        return raw if key == "preset" else _parse_floats(raw)

    def cast_ladder(key, raw):
        return _parse_ints(raw) if key == "points_per_axis" else _parse_floats(raw)

    try:
        grid = GridSpec(**typed("grid", GridSpec, cast_grid))
        datum = _datum_from_section(dict(cp["datum"])) if "datum" in cp else DatumSpec()
        datum2 = _datum_from_section(dict(cp["datum2"])) if "datum2" in cp else None
        evolution = EvolutionSpec(**typed("evolution", EvolutionSpec, cast_evolution))
        direction = DirectionSpec(**typed("direction", DirectionSpec, cast_direction))
        obstacle = _obstacle_from_section(dict(cp["obstacle"])) if "obstacle" in cp else None
        weight = WeightSpec(**typed("weight", WeightSpec, cast_weight)) if "weight" in cp else None
        ladder = LadderSpec(**typed("ladder", LadderSpec, cast_ladder))
        options = tuple(sorted(cp["options"].items())) if "options" in cp else ()
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config value: {exc}") from exc
    ladder_n = (len(ladder.points_per_axis), len(ladder.dt))
    if all(ladder_n) and ladder_n[0] != ladder_n[1]:
        raise ConfigError("ladder lists must have equal length")
    return ExperimentConfig(
        kind=kind,
        label=exp.get("label", ""),
        seed=int(exp.get("seed", "0")),
        grid=grid,
        datum=datum,
        datum2=datum2,
        evolution=evolution,
        direction=direction,
        obstacle=obstacle,
        weight=weight,
        ladder=ladder,
        options=options,
    )


def read_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return config_from_ini(text)


def write_config(cfg: ExperimentConfig, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(config_to_ini(cfg))


# ---------------------------------------------------------------------------
# datum construction


def _sine_eigenmode(grid: Grid, mode: tuple[int, ...], amplitude: float) -> ComplexField:
    """Product of box sine modes, exactly zero on the outermost ring.

    Matches the Dirichlet convention of DomainGrid: unknowns live on indices
    1 .. n-2, so mode j has n-1 half-waves across the ring-to-ring span.
    """
    n = grid.points_per_axis
    i = np.arange(n, dtype=float)
    vals = np.full(grid.shape, complex(amplitude))
    for a in range(grid.dim):
        line = np.sin(np.pi * mode[a] * i / (n - 1))
        shape = [1] * grid.dim
        shape[a] = n
        vals = vals * line.reshape(shape)
    return ComplexField(grid, vals, meta=(f"sine_eigenmode(mode={tuple(mode)})",))


def build_datum(spec: DatumSpec, grid: Grid, seed: int = 0) -> ComplexField:
    """Materialize a datum recipe on a grid; random kinds mix in ``seed``."""
    kind = spec.kind
    if kind == "gaussian":
        center = spec.center if spec.center else 0.0
        frequency = spec.frequency if spec.frequency else 0.0
        return gaussian_datum(
            grid, center=center, frequency=frequency, width=spec.width, amplitude=spec.amplitude
        )
    if kind == "plane-wave":
        mode = spec.mode if spec.mode else (0,) * grid.dim
        return plane_wave_datum(grid, mode, amplitude=spec.amplitude)
    if kind == "eigenmode":
        mode = spec.mode if spec.mode else (1,) * grid.dim
        if len(mode) != grid.dim:
            raise ConfigError("eigenmode needs one mode index per axis")
        return _sine_eigenmode(grid, mode, spec.amplitude)
    if kind == "random-smooth":
        return random_smooth_datum(grid, seed + spec.seed_offset, amplitude=spec.amplitude)
    if kind == "random-localized":
        return random_localized_datum(
            grid,
            seed + spec.seed_offset,
            amplitude=spec.amplitude,
            envelope_fraction=spec.envelope_fraction,
        )
    if kind == "low-ball":
        return low_ball_datum(grid, spec.radius, width=spec.width if spec.width > 0 else None)
    if kind == "zero":
        return ComplexField(grid, np.zeros(grid.shape, dtype=complex), meta=("zero",))
    if kind == "file":
        try:
            vals = np.load(spec.path)
        except OSError as exc:
            raise ConfigError(f"cannot load datum file {spec.path!r}: {exc}") from exc
        if vals.shape != grid.shape:
            raise ConfigError(f"datum file shape {vals.shape} does not match grid {grid.shape}")
        return ComplexField(grid, vals.astype(complex), meta=(f"file({spec.path})",))
    raise ConfigError(f"unknown datum kind {kind!r}")


# ---------------------------------------------------------------------------
# runners


def ladder_levels(cfg: ExperimentConfig) -> list[tuple[GridSpec, EvolutionSpec]]:
    """Expand the refinement ladder to (grid, evolution) pairs, coarse first."""
    lad = cfg.ladder
    if not len(lad):
        return [(cfg.grid, cfg.evolution)]
    n_levels = len(lad)
    ns = lad.points_per_axis or (cfg.grid.points_per_axis,) * n_levels
    dts = lad.dt or (cfg.evolution.dt,) * n_levels
    return [
        (replace(cfg.grid, points_per_axis=n), replace(cfg.evolution, dt=d))
        for n, d in zip(ns, dts)
    ]


def _evolve_levels(cfg: ExperimentConfig) -> list[Trajectory]:
    trajs = []
    for gspec, espec in ladder_levels(cfg):
        u0 = build_datum(cfg.datum, gspec.build(), cfg.seed)
        traj, _ = evolve(u0, espec.build())
        trajs.append(traj)
    return trajs


def _evolve_domain_levels(cfg: ExperimentConfig) -> list[DomainTrajectory]:
    trajs = []
    for gspec, espec in ladder_levels(cfg):
        dom = DomainGrid(gspec.build(), cfg.obstacle)
        u0 = build_datum(cfg.datum, dom.base, cfg.seed)
        trajs.append(evolve_domain(dom, u0, espec.build()))
    return trajs


def _aggregate_domain_ladder(
    reports: list[VerificationReport], kind: str, residual_key: str = "max_residual"
) -> VerificationReport:
    """Fold per-level domain reports into one: finest verdict + no growth."""
    if len(reports) == 1:
        return reports[0]
    resids = [r.summary[residual_key] for r in reports]
    shrinks = all(nxt <= prev * 1.05 for prev, nxt in zip(resids, resids[1:]))
    finest = reports[-1]
    verdict = finest.verdict
    if verdict == "PASS" and not shrinks:
        verdict = "FAIL"
    return VerificationReport(
        experiment=kind,
        params=finest.params,
        verdict=verdict,
        tolerances=finest.tolerances,
        runtime_s=sum(r.runtime_s for r in reports),
        series=finest.series,
        convergence=[
            {"level": i, **{residual_key: r.summary[residual_key]}, "params": r.params}
            for i, r in enumerate(reports)
        ],
        summary={**finest.summary, "ladder_residuals": resids, "residual_nonincreasing": shrinks},
        notes=finest.notes,
    )


def _diagnostic_report(
    kind: str, params: dict, series: DiagnosticSeries, runtime_s: float, summary: dict | None = None
) -> VerificationReport:
    return VerificationReport(
        experiment=kind,
        params=params,
        verdict="DIAGNOSTIC",
        tolerances={},
        runtime_s=runtime_s,
        series=series,
        summary=summary or {},
    )


@dataclass(frozen=True)
class ExperimentKind:
    kind: str
    summary: str
    runner: Callable[[ExperimentConfig], VerificationReport]


REGISTRY: dict[str, ExperimentKind] = {}


def _register(kind: str, summary: str):
    def deco(fn):
        REGISTRY[kind] = ExperimentKind(kind=kind, summary=summary, runner=fn)
        return fn

    return deco


def run_experiment(cfg: ExperimentConfig) -> VerificationReport:
    if cfg.kind not in REGISTRY:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}")
    return REGISTRY[cfg.kind].runner(cfg)


def list_experiments() -> str:
    width = max(len(k) for k in REGISTRY)
    lines = [f"{entry.kind:<{width}}  {entry.summary}" for entry in REGISTRY.values()]
    return "\n".join(lines)


@_register(
    "verify-directional",
    "second time derivative of the one-sided directional interaction vs its identity terms",
)
def _run_verify_directional(cfg: ExperimentConfig) -> VerificationReport:
    trajs = _evolve_levels(cfg)
    pair = directional_pair(
        cfg.direction.build(cfg.grid.dim), cfg.evolution.epsilon, cfg.evolution.p
    )
    return verify_identity(
        trajs,
        pair,
        tol=tolerance("directional_identity_residual"),
        experiment="verify-directional",
    )


@_register(
    "verify-pair-1d",
    "1D two-solution ordering functional vs its gradient/nonlinear identity terms",
)
def _run_verify_pair_1d(cfg: ExperimentConfig) -> VerificationReport:
    if cfg.grid.dim != 1:
        raise ConfigError("verify-pair-1d needs a one-dimensional grid")
    trajs = _evolve_levels(cfg)
    pair = bilinear_pair_1d(cfg.evolution.epsilon, cfg.evolution.p)
    return verify_identity(
        trajs, pair, tol=tolerance("pair_identity_residual"), experiment="verify-pair-1d"
    )


@_register(
    "ozawa-tsutsumi",
    "space-time mass of d_x(u conj v) against 4 pi times the frequency-separation sum",
)
def _run_ozawa_tsutsumi(cfg: ExperimentConfig) -> VerificationReport:
    g = cfg.grid.build()
    u0 = build_datum(cfg.datum, g, cfg.seed)
    v0 = u0 if cfg.datum2 is None else build_datum(cfg.datum2, g, cfg.seed)
    return ozawa_tsutsumi_check(
        u0, v0, T=_opt_float(cfg, "T", 8.0), n_times=_opt_int(cfg, "n_times", 1601)
    )


@_register(
    "apriori-bound",
    "defocusing space-time smoothing quotient, stability under refinement",
)
def _run_apriori_bound(cfg: ExperimentConfig) -> VerificationReport:
    return apriori_bound_check(_evolve_levels(cfg), p=cfg.evolution.p)


@_register(
    "bourgain-scaling",
    "bilinear space-time mass vs 2^(k-j) frequency-separation scaling",
)
def _run_bourgain_scaling(cfg: ExperimentConfig) -> VerificationReport:
    return bourgain_scaling(
        k=_opt_int(cfg, "k", 2),
        j_list=_opt_ints(cfg, "j_list", (4, 5, 6)),
        grid=cfg.grid.build(),
        n_times=_opt_int(cfg, "n_times", 65),
    )


@_register(
    "bilinear-radon-bound",
    "time-integrated squared marginal derivative under the interaction envelope",
)
def _run_bilinear_radon_bound(cfg: ExperimentConfig) -> VerificationReport:
    g = cfg.grid.build()
    u0 = build_datum(cfg.datum, g, cfg.seed)
    v0 = u0 if cfg.datum2 is None else build_datum(cfg.datum2, g, cfg.seed)
    return bilinear_radon_bound(
        u0,
        v0,
        T=_opt_float(cfg, "T", 1.0),
        omega=cfg.direction.build(g.dim),
        n_times=_opt_int(cfg, "n_times", 129),
    )


@_register(
    "smoothing-1d",
    "time-integrated |d_x u|^2 at fixed points against the half-derivative norm",
)
def _run_smoothing_1d(cfg: ExperimentConfig) -> VerificationReport:
    if cfg.grid.dim != 1:
        raise ConfigError("smoothing-1d needs a one-dimensional grid")
    g = cfg.grid.build()
    probes = _opt_int(cfg, "x_probe_count", 8)
    T = _opt_float(cfg, "T", 4.0)
    n_times = _opt_int(cfg, "n_times", 1601)
    first = smoothing_check_1d(build_datum(cfg.datum, g, cfg.seed), probes, T, n_times)
    if cfg.datum2 is None:
        return first
    # Two-datum form: the measured constant must be data-independent.
    second = smoothing_check_1d(build_datum(cfg.datum2, g, cfg.seed), probes, T, n_times)
    band = tolerance("smoothing_data_independence")
    c1, c2 = first.summary["constant_sup"], second.summary["constant_sup"]
    spread = abs(c1 - c2) / max(c1, c2)
    return VerificationReport(
        experiment="smoothing-1d",
        params={**first.params, "data": 2},
        verdict="PASS" if spread <= band else "FAIL",
        tolerances={"smoothing_data_independence": band},
        runtime_s=first.runtime_s + second.runtime_s,
        series=first.series,
        summary={
            "constant_first": c1,
            "constant_second": c2,
            "relative_spread": spread,
        },
    )


@_register(
    "scattering-diagnostic",
    "Cauchy decrement of the undone-free-flow profile (trend only, no verdict)",
)
def _run_scattering_diagnostic(cfg: ExperimentConfig) -> VerificationReport:
    t0 = time.perf_counter()
    (traj,) = _evolve_levels(cfg)
    series = scattering_diagnostic(traj)
    return _diagnostic_report(
        "scattering-diagnostic",
        {"epsilon": cfg.evolution.epsilon, "p": cfg.evolution.p, "t_final": cfg.evolution.t_final},
        series,
        time.perf_counter() - t0,
        summary=dict(series.meta),
    )


@_register(
    "convexity-sweep",
    "randomized nonnegativity of the directional interaction's second difference",
)
def _run_convexity_sweep(cfg: ExperimentConfig) -> VerificationReport:
    return convexity_sweep(
        n_data=_opt_int(cfg, "n_data", 50),
        grid=cfg.grid.build(),
        epsilons=_opt_ints(cfg, "epsilons", (0, 1)),
        p=cfg.evolution.p,
        n_steps=_opt_int(cfg, "n_steps", 24),
        seed0=cfg.seed,
    )


@_register(
    "momentum-bound",
    "randomized audit of |dI/dt| <= C (mass x half-derivative norm) in 1D and 2D",
)
def _run_momentum_bound(cfg: ExperimentConfig) -> VerificationReport:
    return momentum_bound_suite(n_trials=_opt_int(cfg, "n_trials", 200), seed0=cfg.seed)


@_register(
    "weighted-forms",
    "algebraic equality of the two Hessian forms of the weighted pair identity",
)
def _run_weighted_forms(cfg: ExperimentConfig) -> VerificationReport:
    return weighted_form_consistency(
        n_pairs=_opt_int(cfg, "n_pairs", 20),
        grid=cfg.grid.build(),
        epsilon=cfg.evolution.epsilon,
        p=cfg.evolution.p,
        seed0=cfg.seed,
    )


@_register(
    "radon-plancherel",
    "marginal Plancherel residual for a radial Gaussian, angle and padding ladders",
)
def _run_radon_plancherel(cfg: ExperimentConfig) -> VerificationReport:
    return plancherel_study(
        points_per_axis=cfg.grid.points_per_axis,
        half_length=cfg.grid.half_length,
        width=cfg.datum.width,
        n_angles=_opt_int(cfg, "n_angles", 64),
        angle_doublings=_opt_int(cfg, "angle_doublings", 1),
        pad_levels=_opt_ints(cfg, "pad_levels", (2, 4, 8)),
    )


@_register(
    "verify-obstacle-directional",
    "two-sided directional interaction identity with Dirichlet boundary flux",
)
def _run_verify_obstacle(cfg: ExperimentConfig) -> VerificationReport:
    omega = cfg.direction.build(cfg.grid.dim)
    reports = [
        verify_obstacle_identity(traj, omega, tol=tolerance("obstacle_identity_residual"))
        for traj in _evolve_domain_levels(cfg)
    ]
    return _aggregate_domain_ladder(reports, "verify-obstacle-directional")


@_register(
    "domain-virial",
    "weighted-mass virial identity on the obstacle domain with boundary flux",
)
def _run_domain_virial(cfg: ExperimentConfig) -> VerificationReport:
    weight_spec = cfg.weight or WeightSpec()
    weight = weight_spec.build()
    reports = [
        domain_virial_residual(traj, weight) for traj in _evolve_domain_levels(cfg)
    ]
    return _aggregate_domain_ladder(reports, "domain-virial")


@_register(
    "trace-control",
    "cumulative boundary-trace and window-energy ratios (measured, no verdict)",
)
def _run_trace_control(cfg: ExperimentConfig) -> VerificationReport:
    t0 = time.perf_counter()
    (traj,) = _evolve_domain_levels(cfg)
    center = _opt_floats(cfg, "window_center", (0.0, 0.0))
    radius = _opt_float(cfg, "window_radius", 1.0)
    series = trace_control_measurement(traj, (center[0], center[1]), radius)
    summary = {
        "flux_over_reference_final": float(series.columns["flux_over_reference"][-1]),
        "window_over_reference_final": float(series.columns["window_over_reference"][-1]),
    }
    return _diagnostic_report(
        "trace-control",
        {"window_center": list(center), "window_radius": radius},
        series,
        time.perf_counter() - t0,
        summary=summary,
    )


@_register(
    "frequency-l4",
    "half-derivative size of |u|^2 for spectrally localized Dirichlet data across dyadic bands",
)
def _run_frequency_l4(cfg: ExperimentConfig) -> VerificationReport:
    t0 = time.perf_counter()
    g = cfg.grid.build()
    modes = _opt_ints(cfg, "mode_numbers", (8, 16, 32))
    series = frequency_localized_l4(
        g, modes, bundle_width=_opt_int(cfg, "bundle_width", 3), seed=cfg.seed
    )
    spread_tol = tolerance("frequency_ratio_spread")
    spread = float(series.meta["ratio_spread"])
    return VerificationReport(
        experiment="frequency-l4",
        params={"mode_numbers": list(modes), "points_per_axis": g.points_per_axis},
        verdict="PASS" if spread < spread_tol else "FAIL",
        tolerances={"frequency_ratio_spread": spread_tol},
        runtime_s=time.perf_counter() - t0,
        series=series,
        summary={"ratio_spread": spread},
    )


@_register(
    "cross-engine",
    "obstacle-free implicit stepper vs spectral engine, joint space-time order",
)
def _run_cross_engine(cfg: ExperimentConfig) -> VerificationReport:
    return cross_engine_convergence(
        resolutions=_opt_ints(cfg, "resolutions", (64, 128, 256)),
        half_length=cfg.grid.half_length,
        t_final=cfg.evolution.t_final,
        dt_coarse=cfg.evolution.dt,
        epsilon=cfg.evolution.epsilon,
        p=cfg.evolution.p,
    )
