"""Two-point interaction functionals and the identity right-hand sides.

The central objects are the pair functionals

    I_omega(u, v) = iint_{x.w > y.w} ((x-y).w) |u|^2(x) |v|^2(y) dx dy   (one-sided)
    I_rho(u, v)   = iint rho(x-y) |u|^2(x) |v|^2(y) dx dy               (general weight)

For grid-exact directions every directional quantity reduces to 1D marginals
(radon profiles), making I_omega and its instantaneous time derivative
computable by prefix sums in O(N log N) instead of O(N^(2 dim)).

Factor conventions (pinned in the constants manifest, verified numerically):
the one-sided second-derivative identity reads

    d^2/dt^2 I_omega(u, u) = 4 * (term1 + term2 + term3)

with term1 = int |d_s R(|u|^2)|^2 ds, term2 = eps (p-1)/(p+1) int R(|u|^2)
R(|u|^(p+1)) ds, and term3 the slice antisymmetry triple integral; the
general-weight identity reads

    d^2/dt^2 I_rho(u, v) = 4 iint H_rho(F, conj F)
        + 2 eps (p-1)/(p+1) iint (lap rho) (|u|^(p+1)(x)|v|^2(y) + |u|^2(x)|v|^(p+1)(y))

and the F-form / G-form rewrite exchanges 4 iint H_rho(F, conj F) for
4 iint H_rho(G, conj G) + 4 iint (lap rho) grad|u|^2(x) . grad|v|^2(y).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grids import ComplexField, Direction, Grid
from .manifest import constant
from .radon import Profile1D, profile_derivative, radon
from .reporting import format_float
from .spectral import directional_derivative, gradient, homogeneous_sobolev_sq

__all__ = [
    "CostBudgetError",
    "Weight",
    "VirialRecord",
    "PAIR_BUDGET",
    "PAIRSUM_MAX_POINTS_PER_AXIS",
    "interaction_directional",
    "d_dt_interaction_directional",
    "interaction_general",
    "rhs_pair_identity_1d",
    "rhs_directional_identity",
    "t1_gradient_marginal_term",
    "rhs_weighted_identity",
    "momentum_bound_residual",
    "records_to_csv",
]

PAIR_BUDGET = 2**26
PAIRSUM_MAX_POINTS_PER_AXIS = 256
_SYMMETRY_SAMPLES = 64
_SYMMETRY_TOL = 1e-10
_CONVEXITY_TOL = 1e-10


class CostBudgetError(RuntimeError):
    """A quadrature was requested whose pair count exceeds the configured budget."""


@dataclass(frozen=True)
class Weight:
    """Symmetric interaction weight rho(z) with derivative evaluators.

    Callables take displacement arrays of shape (..., dim).  The directional
    kind rho(z) = |z . omega| has a distributional Hessian and therefore no
    pointwise hessian/laplacian evaluators; directional computations must go
    through the marginal code path instead.
    """

    kind: str
    dim: int
    rho: Callable[[np.ndarray], np.ndarray]
    grad_rho: Callable[[np.ndarray], np.ndarray] | None = None
    hessian_rho: Callable[[np.ndarray], np.ndarray] | None = None
    laplacian_rho: Callable[[np.ndarray], np.ndarray] | None = None
    omega: Direction | None = None
    convex: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("directional", "smooth", "custom"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "directional" and self.omega is None:
            raise ValueError("directional weights need a direction")
        rng = np.random.default_rng(0)
        z = rng.standard_normal((_SYMMETRY_SAMPLES, self.dim))
        fwd = np.asarray(self.rho(z), dtype=float)
        bwd = np.asarray(self.rho(-z), dtype=float)
        scale = 1.0 + np.max(np.abs(fwd))
        if np.max(np.abs(fwd - bwd)) > _SYMMETRY_TOL * scale:
            raise ValueError("weight is not symmetric: rho(z) != rho(-z) on samples")
        if self.convex:
            if self.hessian_rho is None:
                raise ValueError("declared convex but no Hessian evaluator")
            h = np.asarray(self.hessian_rho(z), dtype=float)
            eigs = np.linalg.eigvalsh(h)
            if float(eigs.min()) < -_CONVEXITY_TOL:
                raise ValueError(f"declared convex but sampled Hessian eigenvalue {eigs.min()}")

    @staticmethod
    def directional(omega: Direction) -> "Weight":
        w = omega.as_array()

        def rho(z):
            return np.abs(np.asarray(z) @ w)

        def grad(z):
            return np.sign(np.asarray(z) @ w)[..., None] * w

        return Weight("directional", omega.dim, rho, grad_rho=grad, omega=omega)

    @staticmethod
    def quadratic(dim: int) -> "Weight":
        def rho(z):
            return np.sum(np.asarray(z) ** 2, axis=-1)

        def grad(z):
            return 2.0 * np.asarray(z)

        def hess(z):
            z = np.asarray(z)
            return np.broadcast_to(2.0 * np.eye(dim), z.shape[:-1] + (dim, dim)).copy()

        def lap(z):
            z = np.asarray(z)
            return np.full(z.shape[:-1], 2.0 * dim)

        return Weight("smooth", dim, rho, grad, hess, lap, convex=True)

    @staticmethod
    def smooth_sqrt(dim: int) -> "Weight":
        """rho(z) = sqrt(1 + |z|^2): smooth, convex, linear growth."""

        def rho(z):
            return np.sqrt(1.0 + np.sum(np.asarray(z) ** 2, axis=-1))

        def grad(z):
            z = np.asarray(z)
            return z / rho(z)[..., None]

        def hess(z):
            z = np.asarray(z)
            r = rho(z)
            eye = np.eye(dim)
            return eye / r[..., None, None] - (
                z[..., :, None] * z[..., None, :] / (r**3)[..., None, None]
            )

        def lap(z):
            z = np.asarray(z)
            r2 = np.sum(z**2, axis=-1)
            return (dim + (dim - 1) * r2) / (1.0 + r2) ** 1.5

        return Weight("smooth", dim, rho, grad, hess, lap, convex=True)

    @staticmethod
    def custom(
        dim: int,
        rho: Callable,
        grad_rho: Callable | None = None,
        hessian_rho: Callable | None = None,
        laplacian_rho: Callable | None = None,
        convex: bool = False,
    ) -> "Weight":
        return Weight("custom", dim, rho, grad_rho, hessian_rho, laplacian_rho, convex=convex)


@dataclass
class VirialRecord:
    """One time sample of an interaction functional and an identity RHS."""

    t: float
    rhs_terms: dict[str, float]
    second_derivative_claim: float
    interaction: float | None = None
    d_dt_interaction: float | None = None

    def terms_total(self) -> float:
        return float(sum(self.rhs_terms.values()))


def _strict_prefix_sums(values: np.ndarray, s: np.ndarray):
    """(sum_{m' < m} v, sum_{m' < m} s v) for each m."""
    c = np.concatenate(([0.0], np.cumsum(values)[:-1]))
    sc = np.concatenate(([0.0], np.cumsum(s * values)[:-1]))
    return c, sc


def _mass_marginal(u: ComplexField, omega: Direction) -> Profile1D:
    return radon(u.with_values(np.abs(u.values) ** 2 + 0j), omega)


def _current_marginal(u: ComplexField, omega: Direction) -> Profile1D:
    cur = np.imag(np.conj(u.values) * directional_derivative(u, omega))
    return radon(u.with_values(cur.astype(complex)), omega)


def interaction_directional(u: ComplexField, v: ComplexField, omega: Direction) -> float:
    """One-sided pair functional via marginal prefix sums.

    Triangle part: sum over bin pairs s > s' of (s - s') m_u(s) m_v(s') ds^2.
    The (ds^3/12) diagonal term is the Euler-Maclaurin correction for the
    kernel kink at s = s'; without it the quadrature drifts from the continuum
    functional at O(ds^2), which a second time difference amplifies.
    """
    if omega.exact_kind() is None:
        raise ValueError("interaction_directional needs an exact lattice direction")
    mu = _mass_marginal(u, omega)
    mv = _mass_marginal(v, omega)
    s = mu.samples
    mu_vals = mu.values.real
    mv_vals = mv.values.real
    c, sc = _strict_prefix_sums(mv_vals, s)
    triangle = np.sum(mu_vals * (s * c - sc)) * mu.step**2
    cut = np.sum(mu_vals * mv_vals) * mu.step**3 / 12.0
    return float(triangle + cut)


def d_dt_interaction_directional(u: ComplexField, v: ComplexField, omega: Direction) -> float:
    """Instantaneous d/dt of interaction_directional, via current marginals.

    Continuum form: dI/dt = 2 int int_{s > s'} [ j_u(s) m_v(s') - j_v(s') m_u(s) ]
    with j = radon(Im(conj(u) d_omega u), omega).  Evaluated with the s
    derivative moved back onto the currents (mdot = -2 d/ds j, the projected
    continuity law), so the value is the exact time derivative of the binned
    pair functional rather than an O(ds) quadrature of the boundary form.
    No time differencing involved.
    """
    if omega.exact_kind() is None:
        raise ValueError("d_dt_interaction_directional needs an exact lattice direction")
    prof = _mass_marginal(u, omega)
    mu = prof.values.real
    mv = _mass_marginal(v, omega).values.real
    mdot_u = -2.0 * profile_derivative(_current_marginal(u, omega)).values.real
    mdot_v = -2.0 * profile_derivative(_current_marginal(v, omega)).values.real
    s = prof.samples
    c_mv, sc_mv = _strict_prefix_sums(mv, s)
    c_md, sc_md = _strict_prefix_sums(mdot_v, s)
    total = np.sum(mdot_u * (s * c_mv - sc_mv)) + np.sum(mu * (s * c_md - sc_md))
    cut = np.sum(mdot_u * mv + mu * mdot_v) * prof.step / 12.0
    return float((total + cut) * prof.step**2)


def _flat_coords(grid: Grid) -> np.ndarray:
    axes = [grid.axis_coords] * grid.dim
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _check_pair_budget(n_points: int) -> None:
    if n_points * n_points > PAIR_BUDGET:
        raise CostBudgetError(
            f"{n_points}^2 = {n_points * n_points} pairs exceeds the budget {PAIR_BUDGET}; "
            "use a directional weight (marginal path) or a smaller grid"
        )


def interaction_general(u: ComplexField, v: ComplexField, w: Weight) -> float:
    """I_rho(u, v) = iint rho(x-y) |u|^2(x) |v|^2(y) dx dy.

    Directional weights use the exact marginal path (one-sided value plus its
    mirror); other kinds run the full midpoint double quadrature under the
    pair budget.
    """
    g = u.grid
    if w.dim != g.dim:
        raise ValueError("weight dimension does not match the grid")
    if w.kind == "directional":
        return interaction_directional(u, v, w.omega) + interaction_directional(v, u, w.omega)
    coords = _flat_coords(g)
    n_pts = coords.shape[0]
    _check_pair_budget(n_pts)
    nu = (np.abs(u.values) ** 2).ravel()
    mv = (np.abs(v.values) ** 2).ravel()
    total = 0.0
    chunk = max(1, 2**20 // n_pts)
    for lo in range(0, n_pts, chunk):
        hi = min(lo + chunk, n_pts)
        z = coords[lo:hi, None, :] - coords[None, :, :]
        total += float(nu[lo:hi] @ (np.asarray(w.rho(z), dtype=float) @ mv))
    return total * g.cell_volume**2


def rhs_pair_identity_1d(u: ComplexField, v: ComplexField, epsilon: int, p: float, t: float = 0.0) -> VirialRecord:
    """RHS of the 1D pair identity: claims d^2/dt^2 of the one-sided I.

    Terms: 4 int |d_x(u conj v)|^2 and 2 eps (p-1)/(p+1) int (|u|^(p+1)|v|^2
    + |u|^2 |v|^(p+1)).
    """
    g = u.grid
    if g.dim != 1:
        raise ValueError("this identity is one-dimensional")
    product = u.with_values(u.values * np.conj(v.values))
    dx_prod = gradient(product)[0]
    grad_term = 4.0 * float(np.sum(np.abs(dx_prod) ** 2) * g.cell_volume)
    coeff = 2.0 * epsilon * (p - 1.0) / (p + 1.0)
    nl_x = coeff * float(np.sum(np.abs(u.values) ** (p + 1.0) * np.abs(v.values) ** 2) * g.cell_volume)
    nl_y = coeff * float(np.sum(np.abs(u.values) ** 2 * np.abs(v.values) ** (p + 1.0)) * g.cell_volume)
    terms = {
        "gradient_pair_term": grad_term,
        "nonlinear_term_x": nl_x,
        "nonlinear_term_y": nl_y,
    }
    return VirialRecord(t, terms, grad_term + nl_x + nl_y)


def _slice_groups(grid: Grid, omega: Direction):
    """Grouped flat indices of the hyperplane slices for an exact direction.

    Returns (groups, point_weight, ds): per-bin index arrays into the
    flattened field, the induced measure element per sample point, and the
    spacing of the bin coordinate.
    """
    n = grid.points_per_axis
    kind = omega.exact_kind()
    comp = omega.as_array()
    if kind == "axis":
        axis = int(np.argmax(np.abs(comp)))
        sign = 1 if comp[axis] > 0 else -1
        i = np.arange(n)
        b = i if sign > 0 else (n - i) % n
        if grid.dim == 1:
            bins = b
        else:
            bins = b[:, None] if axis == 0 else b[None, :]
            bins = np.broadcast_to(bins, (n, n))
        n_bins = n
        weight = grid.spacing if grid.dim == 2 else 1.0
        ds = grid.spacing
    elif kind == "diagonal":
        signs = omega.axis_signs()
        idx = []
        for sgn in signs:
            i = np.arange(n)
            idx.append(i if sgn > 0 else n - i)
        bins = (idx[0][:, None] + idx[1][None, :]) % (2 * n)
        n_bins = 2 * n
        weight = grid.spacing * np.sqrt(2.0)
        ds = grid.spacing / np.sqrt(2.0)
    else:
        raise ValueError("slice groups exist only for exact lattice directions")
    flat = np.asarray(bins).ravel()
    order = np.argsort(flat, kind="stable")
    sorted_bins = flat[order]
    bounds = np.searchsorted(sorted_bins, np.arange(n_bins + 1))
    groups = [order[bounds[k] : bounds[k + 1]] for k in range(n_bins)]
    return groups, weight, ds


def t1_gradient_marginal_term(u: ComplexField, omega: Direction) -> float:
    """term1 of the directional identity: int |d_s R(|u|^2)|^2 ds."""
    m = _mass_marginal(u, omega)
    dm = profile_derivative(m.with_values(m.values.real))
    return float(np.sum(dm.values**2) * m.step)


def rhs_directional_identity(
    u: ComplexField,
    omega: Direction,
    epsilon: int,
    p: float,
    t: float = 0.0,
    method: str = "pairsum",
) -> VirialRecord:
    """Directional identity RHS; claims d^2/dt^2 I_omega(u, u) = 4 * total.

    term3 (the slice antisymmetry integral iiint |u(x) d_w u(y) -
    u(y) d_w u(x)|^2 over hyperplane pairs) is evaluated per slice by the
    O(per-slice^2) double sum (``method="pairsum"``, points_per_axis <= 256,
    about a second at 256), or by its algebraically contracted marginal form
    (``method="marginal"``, O(N^dim)); the two agree to rounding.
    """
    g = u.grid
    kind = omega.exact_kind()
    if kind is None:
        raise ValueError("the directional identity needs an exact lattice direction")
    term1 = t1_gradient_marginal_term(u, omega)

    coeff = epsilon * (p - 1.0) / (p + 1.0)
    m2 = _mass_marginal(u, omega)
    mp = radon(u.with_values((np.abs(u.values) ** (p + 1.0)).astype(complex)), omega)
    term2 = coeff * float(np.sum(m2.values.real * mp.values.real) * m2.step)

    du = directional_derivative(u, omega)
    if method == "pairsum":
        if g.points_per_axis > PAIRSUM_MAX_POINTS_PER_AXIS:
            raise CostBudgetError(
                f"pairsum slice term capped at {PAIRSUM_MAX_POINTS_PER_AXIS} points per axis; "
                "pass method='marginal'"
            )
        groups, weight, ds = _slice_groups(g, omega)
        uf = u.values.ravel()
        df = du.ravel()
        term3 = 0.0
        for idx in groups:
            if idx.size < 2:
                continue
            a = uf[idx]
            b = df[idx]
            outer = a[:, None] * b[None, :]
            term3 += float(np.sum(np.abs(outer - outer.T) ** 2))
        term3 *= weight**2 * ds
    elif method == "marginal":
        md = radon(u.with_values((np.abs(du) ** 2).astype(complex)), omega)
        mx = radon(u.with_values(u.values * np.conj(du)), omega)
        dens = m2.values.real * md.values.real - np.abs(mx.values) ** 2
        term3 = 2.0 * float(np.sum(dens) * m2.step)
    else:
        raise ValueError(f"unknown method {method!r}")

    terms = {
        "gradient_marginal_term": term1,
        "nonlinear_radon_term": term2,
        "slice_antisymmetry_term": term3,
    }
    total = term1 + term2 + term3
    return VirialRecord(t, terms, 4.0 * total)


def rhs_weighted_identity(
    u: ComplexField,
    v: ComplexField,
    w: Weight,
    epsilon: int,
    p: float,
    t: float = 0.0,
) -> VirialRecord:
    """General-weight identity RHS in both the F-form and the G-form.

    rhs_terms carries hessian_F_term, hessian_G_term, grad_coupling_term and
    the two nonlinear terms; hessian_F_term = hessian_G_term +
    grad_coupling_term holds pointwise in (x, y) (antisymmetric residual
    against the symmetric Hessian), so it is exact on arbitrary grid data.
    grad_coupling contracts the Hessian with grad|u|^2 (x) grad|v|^2; the
    Laplacian-contracted variant (equal in the continuum after moving
    derivatives, for decaying fields) is reported as laplacian_coupling_term.
    The claim (F-form) is hessian_F_term + nonlinear terms.
    """
    g = u.grid
    if w.hessian_rho is None or w.laplacian_rho is None:
        raise ValueError("this identity needs a weight with Hessian and Laplacian evaluators")
    coords = _flat_coords(g)
    n_pts = coords.shape[0]
    _check_pair_budget(n_pts)

    uf = u.values.ravel()
    vf = v.values.ravel()
    gu = np.stack([a.ravel() for a in gradient(u)], axis=-1)
    gv = np.stack([a.ravel() for a in gradient(v)], axis=-1)
    nu = np.abs(uf) ** 2
    mv = np.abs(vf) ** 2
    grad_nu = 2.0 * np.real(np.conj(uf)[:, None] * gu)
    grad_mv = 2.0 * np.real(np.conj(vf)[:, None] * gv)
    pu = np.abs(uf) ** (p + 1.0)
    qv = np.abs(vf) ** (p + 1.0)

    hess_f = 0.0
    hess_g = 0.0
    coupling = 0.0
    lap_coupling = 0.0
    nl_x = 0.0
    nl_y = 0.0
    chunk = max(1, 2**19 // n_pts)
    for lo in range(0, n_pts, chunk):
        hi = min(lo + chunk, n_pts)
        z = coords[lo:hi, None, :] - coords[None, :, :]
        hess = np.asarray(w.hessian_rho(z), dtype=float)
        lap = np.asarray(w.laplacian_rho(z), dtype=float)
        f_vec = np.conj(vf)[None, :, None] * gu[lo:hi, None, :] + uf[lo:hi, None, None] * np.conj(gv)[None, :, :]
        hess_f += float(np.real(np.einsum("xyab,xya,xyb->", hess, f_vec, np.conj(f_vec))))
        g_vec = vf[None, :, None] * gu[lo:hi, None, :] - uf[lo:hi, None, None] * gv[None, :, :]
        hess_g += float(np.real(np.einsum("xyab,xya,xyb->", hess, g_vec, np.conj(g_vec))))
        coupling += float(np.einsum("xyab,xa,yb->", hess, grad_nu[lo:hi], grad_mv))
        lap_coupling += float(np.einsum("xy,xa,ya->", lap, grad_nu[lo:hi], grad_mv))
        nl_x += float(pu[lo:hi] @ lap @ mv)
        nl_y += float(nu[lo:hi] @ lap @ qv)

    vol2 = g.cell_volume**2
    coeff = 2.0 * epsilon * (p - 1.0) / (p + 1.0)
    terms = {
        "hessian_F_term": 4.0 * hess_f * vol2,
        "hessian_G_term": 4.0 * hess_g * vol2,
        "grad_coupling_term": 4.0 * coupling * vol2,
        "laplacian_coupling_term": 4.0 * lap_coupling * vol2,
        "nonlinear_term_x": coeff * nl_x * vol2,
        "nonlinear_term_y": coeff * nl_y * vol2,
    }
    claim = terms["hessian_F_term"] + terms["nonlinear_term_x"] + terms["nonlinear_term_y"]
    return VirialRecord(t, terms, claim)


def momentum_bound_residual(u: ComplexField, v: ComplexField, omega: Direction) -> float:
    """Slack of |dI_omega/dt| <= C*(M(u) |v|_{H^1/2}^2 + M(v) |u|_{H^1/2}^2).

    C is the pinned manifest constant ("momentum_bound_constant"): boosted
    separating packets saturate the symmetric mass/half-derivative sum at
    exactly twice its value, so the bound only closes with the doubled
    constant.  The estimate assumes decaying data; periodic fields with mass
    at the box edge sit outside its hypothesis class.

    Returns RHS - |LHS| (nonnegative up to rounding when the bound holds).
    """
    lhs = abs(d_dt_interaction_directional(u, v, omega))
    rhs = constant("momentum_bound_constant") * (
        u.mass() * homogeneous_sobolev_sq(v, 0.5) + v.mass() * homogeneous_sobolev_sq(u, 0.5)
    )
    return float(rhs - lhs)


def records_to_csv(records: list[VirialRecord], path: str, residuals: list[float] | None = None) -> str:
    """Append-style CSV of records: t, I, dI_dt, each term, total, residual."""
    import os

    if not records:
        raise ValueError("no records to write")
    names = sorted(records[0].rhs_terms)
    header = ["t", "I", "dI_dt", *names, "total", "residual"]
    lines = [",".join(header)]
    for i, r in enumerate(records):
        row = [
            format_float(r.t),
            "" if r.interaction is None else format_float(r.interaction),
            "" if r.d_dt_interaction is None else format_float(r.d_dt_interaction),
            *(format_float(r.rhs_terms[k]) for k in names),
            format_float(r.second_derivative_claim),
            "" if residuals is None else format_float(residuals[i]),
        ]
        lines.append(",".join(row))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
