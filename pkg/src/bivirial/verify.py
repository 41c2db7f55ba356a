"""Verification harness: identity residuals, constant recovery, scaling laws.

Every check compares two independently computed routes and returns a
VerificationReport whose verdict encodes only what the run can certify:

* PASS / FAIL for budgeted assertions (residual below tolerance, slope in
  band, zero violations, ...);
* INCONCLUSIVE when the measurement floor of the second difference exceeds
  the target tolerance (an under-resolved run is not evidence of failure);
* DIAGNOSTIC for measured-constant studies that have no pinned reference.

Identities stated over all of time are checked on [-T, T] with an explicit
tail budget from the t^-3 dispersive decay of the integrand; the budget is
part of the report, never silently dropped.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import low_ball_datum, random_localized_datum, random_smooth_datum
from .engine import EvolutionConfig, Trajectory, default_dt, evolve, free_propagate, gaussian_datum
from .grids import ComplexField, Direction, Grid, to_fourier, wrap_fraction
from .manifest import constant, tolerance
from .radon import profile_derivative, radon, radon_plancherel_residual
from .reporting import DiagnosticSeries, VerificationReport
from .spectral import gradient, homogeneous_sobolev_sq, shift_frequency, translate
from .virial import (
    Weight,
    d_dt_interaction_directional,
    interaction_directional,
    momentum_bound_residual,
    rhs_directional_identity,
    rhs_pair_identity_1d,
    rhs_weighted_identity,
)

__all__ = [
    "FunctionalPair",
    "directional_pair",
    "bilinear_pair_1d",
    "second_differences",
    "fit_order",
    "verify_identity",
    "ozawa_tsutsumi_check",
    "apriori_bound_check",
    "bourgain_scaling",
    "bilinear_radon_bound",
    "smoothing_check_1d",
    "scattering_diagnostic",
    "convexity_sweep",
    "momentum_bound_suite",
    "weighted_form_consistency",
    "plancherel_study",
]

# Fraction of the target tolerance the roundoff floor of a second difference
# may occupy before the run is declared under-resolved.
_FLOOR_FRACTION = 0.25
# Per-refinement slack on "residual decreases": flat-at-roundoff is not FAIL.
_REFINEMENT_SLACK = 1.10


@dataclass(frozen=True)
class FunctionalPair:
    """An interaction functional and the identity RHS claiming its d^2/dt^2."""

    name: str
    interaction: Callable[[ComplexField], float]
    rhs: Callable[[ComplexField, float], float]


def directional_pair(omega: Direction, epsilon: int, p: float) -> FunctionalPair:
    """One-sided directional pair functional of a single field (u = v)."""

    def inter(u: ComplexField) -> float:
        return interaction_directional(u, u, omega)

    def rhs(u: ComplexField, t: float) -> float:
        return rhs_directional_identity(u, omega, epsilon, p, t, method="marginal").second_derivative_claim

    return FunctionalPair("directional", inter, rhs)


def bilinear_pair_1d(epsilon: int, p: float) -> FunctionalPair:
    """1D one-sided pair functional of a single field against its identity RHS."""
    omega = Direction.axis(1, 0)

    def inter(u: ComplexField) -> float:
        return interaction_directional(u, u, omega)

    def rhs(u: ComplexField, t: float) -> float:
        return rhs_pair_identity_1d(u, u, epsilon, p, t).second_derivative_claim

    return FunctionalPair("bilinear-1d", inter, rhs)


def second_differences(times: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Central second differences on uniform samples: (interior times, d2/dt^2)."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(t) < 3:
        raise ValueError("need at least three samples for a second difference")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * max(abs(dt[0]), 1e-300):
        raise ValueError("second differences need uniformly spaced samples")
    d2 = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / dt[0] ** 2
    return t[1:-1], d2


def fit_order(spacings: Sequence[float], residuals: Sequence[float]) -> float:
    """Least-squares convergence order: residual ~ C h^order."""
    h = np.asarray(spacings, dtype=float)
    r = np.maximum(np.asarray(residuals, dtype=float), 1e-300)
    if len(h) < 2:
        raise ValueError("order fit needs at least two levels")
    return float(np.polyfit(np.log(h), np.log(r), 1)[0])


def _identity_level(traj: Trajectory, pair: FunctionalPair):
    """Residual series of one trajectory against the claimed second derivative."""
    times = np.asarray(traj.times)
    i_vals = np.array([pair.interaction(u) for u in traj.fields])
    t_mid, d2 = second_differences(times, i_vals)
    rhs = np.array([pair.rhs(traj.fields[k + 1], t_mid[k]) for k in range(len(t_mid))])
    resid = np.abs(d2 - rhs) / (1.0 + np.abs(rhs))
    dt_s = abs(times[1] - times[0])
    floor = 16.0 * np.finfo(float).eps * float(np.max(np.abs(i_vals))) / dt_s**2
    floor_rel = floor / float(np.median(1.0 + np.abs(rhs)))
    return t_mid, d2, rhs, resid, dt_s, floor_rel


def verify_identity(
    trajectories: Trajectory | Sequence[Trajectory],
    pair: FunctionalPair,
    tol: float = 1.0e-3,
    experiment: str | None = None,
) -> VerificationReport:
    """Check d^2/dt^2 of the pair functional against the identity RHS.

    Accepts a single trajectory or a refinement ladder ordered coarse to
    fine.  The LHS is always the central second difference of the sampled
    functional along the trajectory; the RHS is the instantaneous identity
    claim.  Verdict: PASS iff the finest max residual is below tol and the
    ladder residuals do not grow under refinement; INCONCLUSIVE when the
    roundoff floor of the second difference eats the tolerance.
    """
    t0 = time.perf_counter()
    if isinstance(trajectories, Trajectory):
        trajectories = [trajectories]
    if not trajectories:
        raise ValueError("no trajectories given")
    levels = []
    finest = None
    for traj in trajectories:
        t_mid, d2, rhs, resid, dt_s, floor_rel = _identity_level(traj, pair)
        levels.append(
            {
                "points_per_axis": traj.grid.points_per_axis,
                "dt": traj.config.dt,
                "sample_dt": dt_s,
                "max_residual": float(resid.max()),
                "floor_rel": floor_rel,
            }
        )
        finest = (t_mid, d2, rhs, resid)
    for prev, cur in zip(levels, levels[1:]):
        cur["ratio_vs_previous"] = prev["max_residual"] / max(cur["max_residual"], 1e-300)
    if len(levels) >= 2 and len({lv["points_per_axis"] for lv in levels}) == 1:
        order = fit_order([lv["sample_dt"] for lv in levels], [lv["max_residual"] for lv in levels])
    else:
        order = None

    t_mid, d2, rhs, resid = finest
    max_resid = float(resid.max())
    under_resolved = levels[-1]["floor_rel"] > _FLOOR_FRACTION * tol
    monotone = all(
        nxt["max_residual"] <= prv["max_residual"] * _REFINEMENT_SLACK
        for prv, nxt in zip(levels, levels[1:])
    )
    if under_resolved and max_resid > tol:
        verdict = "INCONCLUSIVE"
    elif max_resid <= tol and monotone:
        verdict = "PASS"
    else:
        verdict = "FAIL"
    series = DiagnosticSeries(
        times=t_mid,
        columns={"lhs_d2": d2, "rhs_claim": rhs, "residual": resid},
        meta={"pair": pair.name},
    )
    summary = {"max_residual": max_resid, "monotone_under_refinement": monotone}
    if order is not None:
        summary["order_vs_dt"] = order
    return VerificationReport(
        experiment=experiment or f"verify-{pair.name}",
        params={
            "pair": pair.name,
            "levels": len(levels),
            "epsilon": trajectories[-1].config.epsilon,
            "p": trajectories[-1].config.p,
        },
        verdict=verdict,
        tolerances={"residual": tol, "refinement_slack": _REFINEMENT_SLACK},
        runtime_s=time.perf_counter() - t0,
        series=series,
        convergence=levels,
        summary=summary,
    )


def _abs_pair_sum(s: np.ndarray, f: np.ndarray, g: np.ndarray) -> float:
    """sum_{i,j} |s_i - s_j| f_i g_j on a sorted coordinate array, via prefix sums."""
    cf = np.concatenate(([0.0], np.cumsum(f)[:-1]))
    scf = np.concatenate(([0.0], np.cumsum(s * f)[:-1]))
    cg = np.concatenate(([0.0], np.cumsum(g)[:-1]))
    scg = np.concatenate(([0.0], np.cumsum(s * g)[:-1]))
    one_sided_fg = float(np.sum(f * (s * cg - scg)))
    one_sided_gf = float(np.sum(g * (s * cf - scf)))
    return one_sided_fg + one_sided_gf


def ozawa_tsutsumi_check(
    u0: ComplexField,
    v0: ComplexField,
    T: float,
    n_times: int = 1601,
    experiment: str = "ozawa-tsutsumi",
) -> VerificationReport:
    """Space-time bilinear identity on [-T, T] with a dispersive tail budget.

    LHS: time quadrature of Q(t) = int |d_x (u conj v)|^2 dx along the free
    flow, symmetric in t, plus Q(T) T / 2 per end (the integrand decays like
    t^-3 for localized data).  RHS: the manifest constant times the lattice
    double sum  sum |xi - eta| |uhat0|^2(xi) |vhat0|^2(eta) (dxi)^2.
    Verdict: PASS iff LHS/RHS sits within the manifest ratio band; a tripped
    wrap guard aborts to INCONCLUSIVE with the partial quadrature reported.
    """
    t0 = time.perf_counter()
    g = u0.grid
    if g.dim != 1:
        raise ValueError("the space-time bilinear identity check is one-dimensional")
    same = v0 is u0
    wrap_limit = tolerance("wrap_mass_fraction")
    wrap_worst = 0.0
    for w0 in (u0,) if same else (u0, v0):
        for tt in (-T, T):
            wrap_worst = max(wrap_worst, wrap_fraction(free_propagate(w0, tt)))
    tripped = wrap_worst > wrap_limit

    times = np.linspace(-T, T, n_times)
    q = np.empty(n_times)
    for i, t in enumerate(times):
        ut = free_propagate(u0, t)
        vt = ut if same else free_propagate(v0, t)
        prod = ut.with_values(ut.values * np.conj(vt.values))
        q[i] = float(np.sum(np.abs(gradient(prod)[0]) ** 2) * g.cell_volume)
    lhs_window = float(np.trapezoid(q, times))
    tail = (q[0] + q[-1]) * T / 2.0
    lhs = lhs_window + tail

    xi = np.sort(g.freqs()[0])
    order = np.argsort(g.freqs()[0])
    fu = (np.abs(to_fourier(u0)) ** 2).ravel()[order]
    fv = fu if same else (np.abs(to_fourier(v0)) ** 2).ravel()[order]
    rhs_sum = _abs_pair_sum(xi, fu, fv) * g.freq_spacing**2
    c = constant("spacetime_bilinear_constant")
    rhs = c * rhs_sum
    ratio = lhs / rhs if rhs != 0 else np.nan
    band = tolerance("spacetime_bilinear_ratio_band")
    if tripped:
        verdict = "INCONCLUSIVE"
    elif rhs == 0 and lhs == 0:
        verdict = "PASS"
    else:
        verdict = "PASS" if abs(ratio - 1.0) <= band else "FAIL"
    return VerificationReport(
        experiment=experiment,
        params={"T": T, "n_times": n_times, "points_per_axis": g.points_per_axis, "half_length": g.half_length},
        verdict=verdict,
        tolerances={"ratio_band": band, "wrap_mass_fraction": wrap_limit},
        runtime_s=time.perf_counter() - t0,
        series=DiagnosticSeries(times=times, columns={"bilinear_gradient_mass": q}),
        summary={
            "ratio": float(ratio),
            "lhs": lhs,
            "rhs": float(rhs),
            "constant": c,
            "tail_budget": float(tail),
            "tail_fraction": float(tail / lhs) if lhs else 0.0,
            "wrap_fraction": wrap_worst,
            "wrap_guard_tripped": tripped,
        },
        notes=("wrap guard tripped: quadrature window leaks mass around the torus",) if tripped else (),
    )


def _apriori_constant(traj: Trajectory, p: float) -> dict:
    n = traj.grid.dim
    s_density = (3.0 - n) / 2.0
    s_power = (1.0 - n) / 2.0
    a_vals = np.empty(len(traj))
    b_vals = np.empty(len(traj))
    mass_vals = np.empty(len(traj))
    half_vals = np.empty(len(traj))
    for i, u in enumerate(traj.fields):
        dens = u.with_values((np.abs(u.values) ** 2).astype(complex))
        powr = u.with_values((np.abs(u.values) ** ((p + 3.0) / 2.0)).astype(complex))
        a_vals[i] = homogeneous_sobolev_sq(dens, s_density)
        b_vals[i] = homogeneous_sobolev_sq(powr, s_power)
        mass_vals[i] = u.mass()
        half_vals[i] = homogeneous_sobolev_sq(u, 0.5)
    times = np.asarray(traj.times)
    lhs_density = float(np.trapezoid(a_vals, times))
    lhs_power = float(np.trapezoid(b_vals, times))
    rhs = float(mass_vals.max() * half_vals.max())
    return {
        "points_per_axis": traj.grid.points_per_axis,
        "dt": traj.config.dt,
        "lhs_density": lhs_density,
        "lhs_power": lhs_power,
        "rhs": rhs,
        "constant": (lhs_density + lhs_power) / rhs if rhs else np.nan,
    }


def apriori_bound_check(
    trajectories: Trajectory | Sequence[Trajectory],
    p: float,
    experiment: str = "apriori-bound",
) -> VerificationReport:
    """Empirical constant of the defocusing space-time a priori bound.

    LHS: time quadratures of the half-gradient mass of |u|^2 (order
    (3-n)/2) and of |u|^((p+3)/2) (order (1-n)/2); RHS: sup_t mass times
    sup_t squared half-derivative norm.  The bound gives no constant, so the
    check records C = LHS/RHS per refinement level and passes iff C is
    stable across levels within the manifest band; a single level is
    DIAGNOSTIC by construction.
    """
    t0 = time.perf_counter()
    if isinstance(trajectories, Trajectory):
        trajectories = [trajectories]
    for traj in trajectories:
        if traj.config.epsilon != 1:
            raise ValueError("the a priori bound is defocusing-only (epsilon = 1)")
        if traj.grid.dim not in (1, 2):
            raise ValueError("supported dimensions: 1 and 2")
    levels = [_apriori_constant(traj, p) for traj in trajectories]
    consts = np.array([lv["constant"] for lv in levels])
    stability = tolerance("apriori_constant_stability")
    if len(levels) == 1:
        verdict = "DIAGNOSTIC"
        spread = 0.0
    else:
        spread = float(np.max(np.abs(consts - consts[-1])) / abs(consts[-1]))
        verdict = "PASS" if spread <= stability else "FAIL"
    return VerificationReport(
        experiment=experiment,
        params={"p": p, "levels": len(levels)},
        verdict=verdict,
        tolerances={"constant_stability": stability},
        runtime_s=time.perf_counter() - t0,
        convergence=levels,
        summary={"constant": float(consts[-1]), "relative_spread": spread},
    )


def _product_mass_integral(u0: ComplexField, v0: ComplexField, t_window: float, n_times: int) -> float:
    """int_0^T int |u|^2 |v|^2 dx dt along the free flow (trapezoid in t)."""
    g = u0.grid
    times = np.linspace(0.0, t_window, n_times)
    vals = np.empty(n_times)
    for i, t in enumerate(times):
        ut = free_propagate(u0, t)
        vt = free_propagate(v0, t)
        vals[i] = float(np.sum((np.abs(ut.values) * np.abs(vt.values)) ** 2) * g.cell_volume)
    return float(np.trapezoid(vals, times))


def bourgain_scaling(
    k: int,
    j_list: Sequence[int],
    grid: Grid | None = None,
    t_window: float | None = None,
    n_times: int = 65,
    galilean_modes: tuple[int, ...] = (2, -1),
    experiment: str = "bourgain-scaling",
) -> VerificationReport:
    """Frequency-separation scaling of the bilinear space-time mass (2D, free).

    u0 is a bump with spectrum in the ball |xi| <= 2^k; v0 shifts the same
    bump to |xi0| = 2^j and is pre-displaced so its packet sweeps through u0
    at mid-window (group velocity 4 pi 2^j).  Q(j) = iint |u|^2|v|^2 dx dt
    over the fixed window, normalized by both masses, should scale like
    2^(k-j): the fitted slope of log2 Q against j is checked against the
    manifest, and a common lattice frequency shift of both data must leave
    every Q(j) unchanged (Galilean invariance).
    """
    t0 = time.perf_counter()
    if grid is None:
        grid = Grid(dim=2, points_per_axis=640, half_length=2.0)
    if grid.dim != 2:
        raise ValueError("the separation scaling law is checked in 2D")
    if t_window is None:
        t_window = constant("separation_scaling_window")
    j_list = list(j_list)
    if len(j_list) < 2:
        raise ValueError("need at least two separation exponents for a slope")
    r = 2.0**k
    for j in j_list:
        if 2.0**j <= 2.0 ** (k + 1):
            raise ValueError(
                f"separation hypothesis unmet: 2^{j} does not dominate the low ball 2^{k + 1}"
            )
        if 2.0**j + 2.0 ** (k + 1) >= grid.nyquist:
            raise ValueError(
                f"Nyquist violation: 2^{j} + 2^{k + 1} = {2.0 ** j + 2.0 ** (k + 1)} "
                f"reaches the lattice limit {grid.nyquist}"
            )
    u0 = low_ball_datum(grid, r)
    mass_u = u0.mass()
    xi_c = np.asarray(galilean_modes, dtype=float) * grid.freq_spacing

    q = np.empty(len(j_list))
    q_boost = np.empty(len(j_list))
    u0_boost = shift_frequency(u0, xi_c)
    for i, j in enumerate(j_list):
        xi0 = np.zeros(grid.dim)
        xi0[0] = 2.0**j
        offset = np.zeros(grid.dim)
        offset[0] = -4.0 * np.pi * (2.0**j) * (t_window / 2.0)
        v0 = translate(shift_frequency(u0, xi0), offset)
        q[i] = _product_mass_integral(u0, v0, t_window, n_times) / (mass_u * v0.mass())
        v0_boost = shift_frequency(v0, xi_c)
        q_boost[i] = _product_mass_integral(u0_boost, v0_boost, t_window, n_times) / (
            u0_boost.mass() * v0_boost.mass()
        )

    jarr = np.asarray(j_list, dtype=float)
    slope = float(np.polyfit(jarr, np.log2(q), 1)[0])
    expected = constant("separation_scaling_expected_slope")
    band = tolerance("separation_slope_band")
    gal_rel = float(np.max(np.abs(q_boost - q) / q))
    gal_tol = tolerance("separation_galilean_rel")
    verdict = "PASS" if (abs(slope - expected) <= band and gal_rel <= gal_tol) else "FAIL"
    series = DiagnosticSeries(
        times=jarr,
        columns={
            "q": q,
            "log2_q": np.log2(q),
            "ratio_to_scaling": q / 2.0 ** (k - jarr),
            "q_boosted": q_boost,
        },
        meta={"k": k, "t_window": t_window},
    )
    return VerificationReport(
        experiment=experiment,
        params={
            "k": k,
            "j_list": j_list,
            "points_per_axis": grid.points_per_axis,
            "half_length": grid.half_length,
            "t_window": t_window,
            "n_times": n_times,
            "galilean_modes": list(galilean_modes),
        },
        verdict=verdict,
        tolerances={"slope_band": band, "galilean_rel": gal_tol},
        runtime_s=time.perf_counter() - t0,
        series=series,
        summary={
            "slope": slope,
            "expected_slope": expected,
            "galilean_max_rel_change": gal_rel,
        },
    )


def _frequency_half_grid(grid: Grid) -> Grid:
    """A spatial-grid stand-in whose coordinate lattice equals the frequency lattice."""
    return Grid(dim=grid.dim, points_per_axis=grid.points_per_axis, half_length=grid.nyquist)


def _sqrt_density_field(grid: Grid, density: np.ndarray) -> ComplexField:
    """Field whose |.|^2 equals the given nonnegative density (for marginal reuse)."""
    fg = _frequency_half_grid(grid)
    return ComplexField(fg, np.sqrt(np.maximum(density, 0.0)).astype(complex))


def frequency_interaction(u0: ComplexField, v0: ComplexField, omega: Direction) -> float:
    """Two-sided directional interaction of the spectral densities |uhat0|^2, |vhat0|^2.

    Evaluated on the fftshifted frequency lattice by the same marginal prefix
    sums as the spatial interaction (the lattice is itself a uniform grid).
    """
    g = u0.grid
    fu = np.fft.fftshift(np.abs(to_fourier(u0)) ** 2)
    fv = np.fft.fftshift(np.abs(to_fourier(v0)) ** 2)
    a = _sqrt_density_field(g, fu)
    b = _sqrt_density_field(g, fv)
    return interaction_directional(a, b, omega) + interaction_directional(b, a, omega)


def bilinear_radon_bound(
    u0: ComplexField,
    v0: ComplexField,
    T: float,
    omega: Direction,
    n_times: int = 129,
    experiment: str = "bilinear-radon-bound",
) -> VerificationReport:
    """Marginal-derivative space-time bound for a pair of free 2D solutions.

    LHS: quadrature over [0, T] of int |d_s R_omega(u conj v)|^2 ds.  RHS:
    the manifest envelope constant times the sum of the three two-sided
    frequency-side interactions (u,u), (v,v), (u,v).  A truncated window can
    only shrink the LHS, so slack >= 0 is required at any T.
    """
    t0 = time.perf_counter()
    g = u0.grid
    if g.dim != 2:
        raise ValueError("the marginal bilinear bound is checked in 2D")
    if omega.exact_kind() is None:
        raise ValueError("needs an exact lattice direction")
    times = np.linspace(0.0, T, n_times)
    vals = np.empty(n_times)
    for i, t in enumerate(times):
        ut = free_propagate(u0, t)
        vt = ut if v0 is u0 else free_propagate(v0, t)
        prod = ut.with_values(ut.values * np.conj(vt.values))
        prof = profile_derivative(radon(prod, omega))
        vals[i] = float(np.sum(np.abs(prof.values) ** 2) * prof.step)
    lhs = float(np.trapezoid(vals, times))
    d_uu = frequency_interaction(u0, u0, omega)
    d_vv = d_uu if v0 is u0 else frequency_interaction(v0, v0, omega)
    d_uv = d_uu if v0 is u0 else frequency_interaction(u0, v0, omega)
    envelope = constant("bilinear_marginal_envelope")
    rhs = envelope * (d_uu + d_vv + d_uv)
    slack = rhs - lhs
    rel = slack / rhs if rhs else 0.0
    verdict = "PASS" if slack >= -1e-12 * max(rhs, 1.0) else "FAIL"
    return VerificationReport(
        experiment=experiment,
        params={"T": T, "n_times": n_times, "points_per_axis": g.points_per_axis},
        verdict=verdict,
        tolerances={"slack_nonnegative": 0.0},
        runtime_s=time.perf_counter() - t0,
        series=DiagnosticSeries(times=times, columns={"marginal_derivative_mass": vals}),
        summary={
            "lhs": lhs,
            "rhs": float(rhs),
            "slack": float(slack),
            "relative_slack": float(rel),
            "envelope_constant": envelope,
            "freq_interaction_uu": d_uu,
            "freq_interaction_vv": d_vv,
            "freq_interaction_uv": d_uv,
        },
    )


def smoothing_check_1d(
    u0: ComplexField,
    x_probe_count: int = 8,
    T: float = 4.0,
    n_times: int = 1601,
    experiment: str = "smoothing-1d",
) -> VerificationReport:
    """Measured constant of the 1D gain-of-derivative smoothing estimate.

    Integrates |d_x u|^2 in time at fixed probe points over [-T, T] (plus a
    t^-3 tail budget per end) and reports sup over probes divided by the
    squared half-derivative norm of the datum.  The estimate fixes no
    constant, so the verdict is DIAGNOSTIC; stability across data is
    asserted by the calling suite.
    """
    t0 = time.perf_counter()
    g = u0.grid
    if g.dim != 1:
        raise ValueError("this smoothing check is one-dimensional")
    n = g.points_per_axis
    idx = np.unique(np.linspace(n // 4, 3 * n // 4, x_probe_count, dtype=int))
    times = np.linspace(-T, T, n_times)
    acc = np.zeros((len(times), len(idx)))
    for i, t in enumerate(times):
        du = gradient(free_propagate(u0, t))[0]
        acc[i] = np.abs(du[idx]) ** 2
    integrals = np.trapezoid(acc, times, axis=0) + (acc[0] + acc[-1]) * T / 2.0
    denom = homogeneous_sobolev_sq(u0, 0.5)
    ratios = integrals / denom
    probes = g.coords()[0][idx]
    return VerificationReport(
        experiment=experiment,
        params={"T": T, "n_times": n_times, "x_probe_count": int(len(idx))},
        verdict="DIAGNOSTIC",
        tolerances={},
        runtime_s=time.perf_counter() - t0,
        series=DiagnosticSeries(times=probes, columns={"time_integrated_gradient_sq": integrals, "ratio": ratios}),
        summary={
            "constant_sup": float(ratios.max()),
            "constant_min": float(ratios.min()),
            "denominator_half_norm_sq": denom,
        },
    )


def scattering_diagnostic(traj: Trajectory) -> DiagnosticSeries:
    """Cauchy decrement of the undone-free-flow profile w(t) = U(-t) u(t).

    For a scattering solution w(t) converges in H^1, so the increment norms
    between consecutive samples should trend down.  Diagnostic only: no
    verdict is attached.
    """
    cfg = traj.config
    if cfg.epsilon == -1:
        raise ValueError("scattering diagnostics are for free or defocusing runs")
    dim = traj.grid.dim
    if cfg.epsilon == 1 and cfg.p <= 1.0 + 4.0 / dim:
        raise ValueError(
            f"p = {cfg.p} is not mass-supercritical in dimension {dim} (needs p > {1.0 + 4.0 / dim})"
        )
    profiles = [free_propagate(u, -t) for t, u in zip(traj.times, traj.fields)]
    inc = np.zeros(len(profiles))
    for i in range(1, len(profiles)):
        diff = profiles[i].with_values(profiles[i].values - profiles[i - 1].values)
        inc[i] = np.sqrt(diff.mass() + homogeneous_sobolev_sq(diff, 1.0))
    masses = np.array([w.mass() for w in profiles])
    return DiagnosticSeries(
        times=np.asarray(traj.times),
        columns={"h1_increment": inc, "profile_mass": masses},
        meta={"epsilon": cfg.epsilon, "p": cfg.p},
    )


def convexity_sweep(
    n_data: int = 50,
    grid: Grid | None = None,
    epsilons: tuple[int, ...] = (0, 1),
    p: float = 3.0,
    n_steps: int = 24,
    seed0: int = 100,
    experiment: str = "convexity-sweep",
) -> VerificationReport:
    """Time-convexity audit of the one-sided directional functional (2D).

    For seeded random smooth decaying data and both axis directions, every
    central second difference of I_omega along the free or defocusing flow
    must be nonnegative up to the manifest relative slack (scaled by the
    largest curvature seen on that run).  Data are envelope-windowed: the
    convexity argument integrates by parts in the ordering variable, so mass
    crossing the periodic seam (where the one-sided weight jumps by the box
    width) genuinely breaks it for unwindowed fields.
    """
    t0 = time.perf_counter()
    if grid is None:
        grid = Grid(dim=2, points_per_axis=96, half_length=8.0)
    dt = default_dt(grid)
    directions = [Direction.axis(grid.dim, a) for a in range(grid.dim)]
    slack = tolerance("convexity_relative_slack")
    worst = np.inf
    worst_case = None
    count = 0
    per_run_min = []
    for di in range(n_data):
        u0 = random_localized_datum(grid, seed0 + di)
        for eps in epsilons:
            cfg = EvolutionConfig(epsilon=eps, p=p, dt=dt, t_final=n_steps * dt)
            traj, _ = evolve(u0, cfg)
            for om in directions:
                i_vals = [interaction_directional(u, u, om) for u in traj.fields]
                _, d2 = second_differences(np.asarray(traj.times), np.asarray(i_vals))
                scale = float(np.max(np.abs(d2)))
                rel = float(d2.min() / scale) if scale > 0 else 0.0
                per_run_min.append(rel)
                count += 1
                if rel < worst:
                    worst = rel
                    worst_case = {"seed": seed0 + di, "epsilon": eps, "axis": int(np.argmax(np.abs(om.as_array())))}
    violations = int(np.sum(np.asarray(per_run_min) < -slack))
    verdict = "PASS" if violations == 0 else "FAIL"
    return VerificationReport(
        experiment=experiment,
        params={
            "n_data": n_data,
            "epsilons": list(epsilons),
            "p": p,
            "points_per_axis": grid.points_per_axis,
            "dt": dt,
            "n_steps": n_steps,
            "seed0": seed0,
        },
        verdict=verdict,
        tolerances={"relative_slack": slack},
        runtime_s=time.perf_counter() - t0,
        series=DiagnosticSeries(
            times=np.arange(len(per_run_min), dtype=float),
            columns={"min_relative_curvature": np.asarray(per_run_min)},
        ),
        summary={
            "runs": count,
            "violations": violations,
            "worst_relative_curvature": worst,
            "worst_case": worst_case,
        },
    )


def momentum_bound_suite(
    n_trials: int = 200,
    seed0: int = 0,
    experiment: str = "momentum-bound",
) -> VerificationReport:
    """Randomized audit of |dI/dt| <= C*(M(u)|v|^2_(1/2) + M(v)|u|^2_(1/2)).

    Alternates 1D and 2D seeded random smooth decaying data and cycles through
    the exact directions; a trial fails when the slack is below the negative
    manifest tolerance relative to the RHS.  Data are envelope-windowed
    because the estimate assumes decay: unwindowed periodic fields carry mass
    across the box seam, where the one-sided weight jumps, and genuinely
    exceed the decaying-data bound.  C is the manifest constant pinned by the
    separating-packet saturation family (see momentum_bound_residual).
    """
    t0 = time.perf_counter()
    g1 = Grid(dim=1, points_per_axis=128, half_length=8.0)
    g2 = Grid(dim=2, points_per_axis=48, half_length=6.0)
    dirs_1d = [Direction.axis(1, 0, 1), Direction.axis(1, 0, -1)]
    dirs_2d = [
        Direction.axis(2, 0, 1),
        Direction.axis(2, 1, 1),
        Direction.diagonal(1, 1),
        Direction.diagonal(1, -1),
    ]
    rel_tol = tolerance("momentum_bound_relative_slack")
    bound_factor = constant("momentum_bound_constant")
    rel_slacks = np.empty(n_trials)
    violations = 0
    for trial in range(n_trials):
        dim2 = trial % 2 == 1
        g = g2 if dim2 else g1
        u = random_localized_datum(g, seed0 + 2 * trial + 1)
        v = random_localized_datum(g, seed0 + 2 * trial + 2)
        omega = (dirs_2d if dim2 else dirs_1d)[trial % (4 if dim2 else 2)]
        slack = momentum_bound_residual(u, v, omega)
        rhs = bound_factor * (
            u.mass() * homogeneous_sobolev_sq(v, 0.5) + v.mass() * homogeneous_sobolev_sq(u, 0.5)
        )
        rel = slack / rhs
        rel_slacks[trial] = rel
        if rel < -rel_tol:
            violations += 1
    verdict = "PASS" if violations == 0 else "FAIL"
    return VerificationReport(
        experiment=experiment,
        params={"n_trials": n_trials, "seed0": seed0},
        verdict=verdict,
        tolerances={"relative_slack": rel_tol},
        runtime_s=time.perf_counter() - t0,
        series=DiagnosticSeries(
            times=np.arange(n_trials, dtype=float),
            columns={"relative_slack": rel_slacks},
        ),
        summary={"violations": violations, "min_relative_slack": float(rel_slacks.min())},
    )


def _custom_sqrt_weight(dim: int, a: float = 2.0) -> Weight:
    """Smooth convex custom weight rho(z) = sqrt(a^2 + |z|^2)."""

    def rho(z):
        return np.sqrt(a * a + np.sum(np.asarray(z) ** 2, axis=-1))

    def grad(z):
        z = np.asarray(z)
        return z / rho(z)[..., None]

    def hess(z):
        z = np.asarray(z)
        r = rho(z)
        return np.eye(dim) / r[..., None, None] - (
            z[..., :, None] * z[..., None, :] / (r**3)[..., None, None]
        )

    def lap(z):
        z = np.asarray(z)
        r2 = np.sum(z**2, axis=-1)
        return (dim * a * a + (dim - 1) * r2) / (a * a + r2) ** 1.5

    return Weight.custom(dim, rho, grad, hess, lap, convex=True)


def weighted_form_consistency(
    n_pairs: int = 20,
    grid: Grid | None = None,
    epsilon: int = 1,
    p: float = 3.0,
    seed0: int = 500,
    experiment: str = "weighted-forms",
) -> VerificationReport:
    """Algebraic audit of the two Hessian forms of the weighted pair identity.

    For random field pairs and two smooth convex weights (|z|^2 and a custom
    sqrt weight), the F-form must equal the G-form plus the gradient
    coupling term exactly (the difference is antisymmetric against the
    symmetric Hessian), to the manifest identity tolerance.
    """
    t0 = time.perf_counter()
    if grid is None:
        grid = Grid(dim=2, points_per_axis=48, half_length=6.0)
    weights = {"quadratic": Weight.quadratic(grid.dim), "custom_sqrt": _custom_sqrt_weight(grid.dim)}
    tol = tolerance("weight_form_identity")
    resid = []
    for pair_i in range(n_pairs):
        u = random_smooth_datum(grid, seed0 + 2 * pair_i)
        v = random_smooth_datum(grid, seed0 + 2 * pair_i + 1)
        for wname, w in weights.items():
            rec = rhs_weighted_identity(u, v, w, epsilon, p)
            f_term = rec.rhs_terms["hessian_F_term"]
            g_term = rec.rhs_terms["hessian_G_term"]
            c_term = rec.rhs_terms["grad_coupling_term"]
            resid.append(abs(f_term - g_term - c_term) / (1.0 + abs(f_term)))
    resid = np.asarray(resid)
    worst = float(resid.max())
    verdict = "PASS" if worst <= tol else "FAIL"
    return VerificationReport(
        experiment=experiment,
        params={
            "n_pairs": n_pairs,
            "points_per_axis": grid.points_per_axis,
            "epsilon": epsilon,
            "p": p,
            "seed0": seed0,
            "weights": list(weights),
        },
        verdict=verdict,
        tolerances={"identity_residual": tol},
        runtime_s=time.perf_counter() - t0,
        series=DiagnosticSeries(times=np.arange(len(resid), dtype=float), columns={"residual": resid}),
        summary={"max_residual": worst},
    )


def plancherel_study(
    points_per_axis: int = 256,
    half_length: float = 8.0,
    width: float = 1.0,
    n_angles: int = 64,
    angle_doublings: int = 1,
    pad_levels: tuple[int, ...] = (2, 4, 8),
    experiment: str = "radon-plancherel",
) -> VerificationReport:
    """Marginal Plancherel residual for a radial Gaussian, with two ladders.

    The angle ladder doubles the quadrature count: for radial data the
    angular error is zero by symmetry, so the residual must not grow beyond
    a small floor slack.  The pad ladder refines the spectral interpolation,
    the error source that actually dominates, and must decrease strictly.
    """
    t0 = time.perf_counter()
    grid = Grid(dim=2, points_per_axis=points_per_axis, half_length=half_length)
    f = gaussian_datum(grid, width=width)
    tol = tolerance("radon_plancherel_residual")
    angle_counts = [n_angles * 2**i for i in range(angle_doublings + 1)]
    angle_resid = [radon_plancherel_residual(f, n_angles=m) for m in angle_counts]
    pad_resid = [radon_plancherel_residual(f, n_angles=n_angles, pad=pad) for pad in pad_levels]
    base_ok = angle_resid[0] <= tol
    angle_ok = all(
        nxt <= prev * 1.05 for prev, nxt in zip(angle_resid, angle_resid[1:])
    )
    pad_ok = all(nxt < prev for prev, nxt in zip(pad_resid, pad_resid[1:]))
    verdict = "PASS" if (base_ok and angle_ok and pad_ok) else "FAIL"
    return VerificationReport(
        experiment=experiment,
        params={
            "points_per_axis": points_per_axis,
            "half_length": half_length,
            "width": width,
            "angle_counts": angle_counts,
            "pad_levels": list(pad_levels),
        },
        verdict=verdict,
        tolerances={"residual": tol, "angle_floor_slack": 0.05},
        runtime_s=time.perf_counter() - t0,
        convergence=[
            {"n_angles": m, "residual": r} for m, r in zip(angle_counts, angle_resid)
        ]
        + [{"pad": pad, "residual": r} for pad, r in zip(pad_levels, pad_resid)],
        summary={
            "residual": angle_resid[0],
            "angle_residuals": angle_resid,
            "pad_residuals": pad_resid,
        },
    )
