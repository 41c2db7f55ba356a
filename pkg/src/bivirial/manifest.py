"""Versioned constants manifest: pinned identity factors and acceptance tolerances.

Every report embeds the SHA-256 hash of this manifest so results are traceable
to the exact convention and tolerance set that produced them.  The identity
factors were pinned by high-resolution factor trials (see the repository
decision log): with the transform fhat(xi) = integral exp(-2*pi*i x.xi) f dx,

* the one-sided directional interaction I_omega(u,v) integrates
  (x.omega - y.omega) over {x.omega > y.omega};
* the two-sided interaction uses the weight |(x-y).omega| and equals
  I_omega(u,v) + I_omega(v,u);
* d^2/dt^2 of the one-sided I_omega equals 4*(marginal-gradient term
  + nonlinear Radon term + slice antisymmetry term);
* the pair-weight second-derivative identity carries nonlinear coefficient
  2*eps*(p-1)/(p+1) on each of its two density terms;
* the space-time bilinear identity constant is pi (not 4*pi);
* the squared Radon-Plancherel constant is 4*pi for the unnormalized circle
  measure and the (2*pi*|rho|)^(1/2) half-derivative symbol.
"""

from __future__ import annotations

import hashlib
import json
import math

__all__ = ["MANIFEST", "manifest_hash", "constant", "tolerance"]

MANIFEST: dict = {
    "schema": "bivirial-constants",
    "version": 1,
    "fourier": {
        "transform": "fhat(xi) = integral exp(-2*pi*i*x.xi) f(x) dx",
        "laplacian_symbol": "-4*pi^2*|xi|^2",
        "free_propagator": "exp(-4*pi^2*i*t*|xi|^2)",
        "group_velocity": "4*pi*xi0",
        "default_dt_rule": "dx^2/(4*pi), quarter-pi linear phase at Nyquist",
    },
    "constants": {
        # d^2/dt^2 I_omega(one-sided, u=v) = 4 * (term1 + term2 + term3).
        "directional_identity_factor": 4.0,
        # 1D bilinear identity: d^2/dt^2 I(one-sided) = 4*grad term + nl term.
        "pair_identity_gradient_factor": 4.0,
        # Nonlinear coefficient multiplying eps*(p-1)/(p+1) in the pair-weight
        # identity (each of the two density terms).  Pinned by the factor
        # trial: the value 1 printed in the source derivation fails by 2x.
        "pair_weight_nonlinear_coefficient": 2.0,
        # Hessian term coefficient in the pair-weight identity.
        "pair_weight_hessian_coefficient": 4.0,
        # Obstacle identity, two-sided interaction I_{|z.omega|}:
        # d^2/dt^2 I = 8*(terms) - 4*boundary, boundary flux signed with the
        # outward normal.  8 = 2 x the one-sided factor (|.| doubles the
        # one-sided weight); the -4 closes both in the continuum derivation
        # (the Delta-m and stress boundary layers contribute +4 and -8) and
        # on disk-scattering runs, where the exact lattice generator pins
        # (d2I - 8*terms)/boundary at -4 within discretization error.
        "obstacle_terms_factor": 8.0,
        "obstacle_boundary_factor": 4.0,
        # Space-time bilinear constant: LHS = pi * double frequency sum.
        # The 4*pi printed in the source is inconsistent with the stated
        # 2*pi Fourier convention; both the direct computation and the
        # virial asymptotics give pi, confirmed numerically.
        "spacetime_bilinear_constant": math.pi,
        # Squared Radon-Plancherel constant with unnormalized S^1 measure.
        "radon_plancherel_constant": 4.0 * math.pi,
        # Time-integrated directional marginal identity (linear flow):
        # integral |d_s R(|u|^2)|^2 + trace term = pi * D(f,f), with D the
        # two-sided frequency interaction of f = |uhat0|^2.
        "time_integrated_marginal_constant": math.pi,
        # Envelope constant for the bilinear marginal bound, derived by
        # polarization from the linear identity (crude but rigorous).
        "bilinear_marginal_envelope": 12.0 * math.pi,
        # Momentum bound |dI_omega/dt| <= C*(M(u)|v|_{H^1/2}^2 + M(v)|u|_{H^1/2}^2).
        # C = 1 printed in the source derivation fails: a half-Nyquist boosted
        # packet passing a resting one drives the ratio to 2 from below
        # (1.9146 at xi0=2, 1.9564 at xi0=4 on N=512), and direct alternating
        # maximization over localized fields finds nothing above 2.  Same
        # one-sided-versus-two-sided doubling ambiguity as the pair-weight
        # coefficient; pinned at the observed saturation value.
        "momentum_bound_constant": 2.0,
        # Fixed measurement window for the frequency-separation scaling law.
        "separation_scaling_window": 0.004,
        "separation_scaling_expected_slope": -1.0,
    },
    "tolerances": {
        "spacetime_bilinear_ratio_band": 0.03,
        "pair_identity_residual": 1.0e-3,
        "pair_identity_halving_band": 0.25,
        "directional_identity_residual": 1.0e-2,
        "smoothing_data_independence": 0.05,
        "frequency_ratio_spread": 2.0,
        "convexity_relative_slack": 1.0e-8,
        "weight_form_identity": 1.0e-8,
        "separation_slope_band": 0.2,
        "separation_galilean_rel": 1.0e-6,
        "radon_plancherel_residual": 1.0e-2,
        "momentum_bound_relative_slack": 1.0e-8,
        "obstacle_identity_residual": 5.0e-2,
        "bruteforce_equivalence_rel": 1.0e-12,
        "cross_engine_min_order": 1.9,
        "apriori_constant_stability": 0.10,
        "wrap_mass_fraction": 1.0e-6,
        "exact_free_step_error": 1.0e-12,
        "gaussian_oracle_sup_error": 1.0e-8,
    },
}


def _canonical_bytes() -> bytes:
    return json.dumps(MANIFEST, sort_keys=True, separators=(",", ":")).encode()


def manifest_hash() -> str:
    """Hex SHA-256 of the canonical manifest serialization."""
    return hashlib.sha256(_canonical_bytes()).hexdigest()


def constant(name: str) -> float:
    return MANIFEST["constants"][name]


def tolerance(name: str) -> float:
    return MANIFEST["tolerances"][name]
