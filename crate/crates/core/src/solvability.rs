//! Admissible-radius certificates for an equation (and a system).
//!
//! With `κ = c₂c₃ ρ^{-γ/k} (T^ρ - 1)^{γ/k} / (γ Γ_k(γ))` the operator is a
//! contraction-type map on the ball of radius `r₀` when
//! `c₁ + κ r₀ < 1`, and maps that ball into itself when
//! `c₁ r₀ + κ r₀² ≤ r₀`. Both conditions are reported.

use crate::equation::{estimate_lipschitz, EquationSpec, SystemSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvabilityOptions {
    /// replaces `Γ_k(γ)` in `κ`
    pub gamma_k_override: Option<f64>,
    /// replaces `(T^ρ - 1)^{γ/k}` in `κ`; only for reproducing hand arithmetic
    pub endpoint_factor_override: Option<f64>,
    /// boundary band around 1 for the strict inequality
    pub slack: f64,
    /// half-width of the `a`-box on which declared constants are validated
    pub validation_radius: f64,
    pub probes: usize,
}

impl Default for SolvabilityOptions {
    fn default() -> Self {
        Self {
            gamma_k_override: None,
            endpoint_factor_override: None,
            slack: 1e-9,
            validation_radius: 1.0,
            probes: 4096,
        }
    }
}

impl SolvabilityOptions {
    pub fn with_gamma_k(mut self, value: Option<f64>) -> Self {
        self.gamma_k_override = value;
        self
    }
}

/// Where a radius sits relative to the strict inequality `factor < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    Admitted,
    /// `|factor - 1| ≤ slack`
    Boundary,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusCertificate {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub kappa: f64,
    /// sup of `r₀` with `c₁ + κ r₀ < 1`; `0` when `c₁ ≥ 1`, `∞` when `κ = 0`
    pub r0_max_contraction: f64,
    /// `(0, hi]` with `c₁ r₀ + κ r₀² ≤ r₀`; `None` when empty
    pub r0_selfmap_interval: Option<(f64, f64)>,
    pub gamma_k_used: f64,
    pub gamma_k_overridden: bool,
    pub endpoint_factor_used: f64,
    pub endpoint_factor_overridden: bool,
    pub slack: f64,
}

impl RadiusCertificate {
    pub fn contraction_factor(&self, r0: f64) -> f64 {
        self.c1 + self.kappa * r0
    }

    pub fn passes(&self) -> bool {
        self.r0_max_contraction > 0.0 && self.r0_selfmap_interval.is_some()
    }

    pub fn admissibility(&self, r0: f64) -> Admissibility {
        let f = self.contraction_factor(r0);
        if (f - 1.0).abs() <= self.slack {
            Admissibility::Boundary
        } else if f < 1.0 {
            Admissibility::Admitted
        } else {
            Admissibility::Rejected
        }
    }

    /// `c₁ r₀ + κ r₀² ≤ r₀`, the self-map bound.
    pub fn maps_ball_into_itself(&self, r0: f64) -> bool {
        self.c1 * r0 + self.kappa * r0 * r0 <= r0 * (1.0 + self.slack)
    }
}

/// `(T^ρ - 1)^{γ/k}`
pub fn endpoint_factor(eq: &EquationSpec) -> f64 {
    let p = &eq.params;
    (p.t_max().powf(p.rho()) - 1.0).powf(p.exponent())
}

pub fn kappa(eq: &EquationSpec, opts: &SolvabilityOptions) -> f64 {
    let p = &eq.params;
    let gamma_k = opts.gamma_k_override.unwrap_or(p.gamma_k());
    let endpoint = opts
        .endpoint_factor_override
        .unwrap_or_else(|| endpoint_factor(eq));
    eq.psi.lipschitz * eq.g.lipschitz * p.rho().powf(-p.exponent()) * endpoint
        / (p.gamma() * gamma_k)
}

/// `c₁ + κ r₀`, with `Γ_k(γ)` optionally replaced.
pub fn contraction_factor(eq: &EquationSpec, r0: f64, gamma_k_override: Option<f64>) -> f64 {
    let opts = SolvabilityOptions::default().with_gamma_k(gamma_k_override);
    contraction_factor_with(eq, r0, &opts)
}

pub fn contraction_factor_with(eq: &EquationSpec, r0: f64, opts: &SolvabilityOptions) -> f64 {
    eq.f.lipschitz + kappa(eq, opts) * r0
}

/// Validates the declared constants by sampling, then fills the certificate.
pub fn certify(eq: &EquationSpec, opts: &SolvabilityOptions) -> Result<RadiusCertificate> {
    let t_max = eq.params.t_max();
    for (name, n) in [("F", &eq.f), ("Ψ", &eq.psi), ("G", &eq.g)] {
        let est = estimate_lipschitz(n, t_max, opts.validation_radius, opts.probes)?;
        if est > n.lipschitz + 1e-9 {
            return Err(Error::Validation(format!(
                "{name}: sampled Lipschitz quotient {est} exceeds the declared constant {} on |a| <= {}",
                n.lipschitz, opts.validation_radius
            )));
        }
    }
    Ok(certificate_unchecked(eq, opts))
}

/// The certificate without the sampling validation of the declared constants.
pub fn certificate_unchecked(eq: &EquationSpec, opts: &SolvabilityOptions) -> RadiusCertificate {
    let c1 = eq.f.lipschitz;
    let kappa = kappa(eq, opts);
    let (r0_max_contraction, selfmap) = if c1 >= 1.0 {
        (0.0, None)
    } else if kappa == 0.0 {
        (f64::INFINITY, Some((0.0, f64::INFINITY)))
    } else {
        let hi = (1.0 - c1) / kappa;
        (hi, Some((0.0, hi)))
    };
    RadiusCertificate {
        c1,
        c2: eq.psi.lipschitz,
        c3: eq.g.lipschitz,
        kappa,
        r0_max_contraction,
        r0_selfmap_interval: selfmap,
        gamma_k_used: opts.gamma_k_override.unwrap_or(eq.params.gamma_k()),
        gamma_k_overridden: opts.gamma_k_override.is_some() || eq.params.gamma_k_overridden(),
        endpoint_factor_used: opts
            .endpoint_factor_override
            .unwrap_or_else(|| endpoint_factor(eq)),
        endpoint_factor_overridden: opts.endpoint_factor_override.is_some(),
        slack: opts.slack,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemCertificate {
    pub alpha: RadiusCertificate,
    pub beta: RadiusCertificate,
    pub r0: f64,
    /// `max` of the two contraction factors at `r0`
    pub epsilon: f64,
}

impl SystemCertificate {
    pub fn passes(&self) -> bool {
        self.epsilon < 1.0 - self.alpha.slack.max(self.beta.slack)
            && self.alpha.passes()
            && self.beta.passes()
    }
}

pub fn certify_system(
    sys: &SystemSpec,
    r0: f64,
    opts: &SolvabilityOptions,
) -> Result<SystemCertificate> {
    if !(r0 >= 0.0) {
        return Err(Error::domain(format!("r0 must be nonnegative, got {r0}")));
    }
    let alpha = certify(&sys.eq_alpha, opts)?;
    let beta = certify(&sys.eq_beta, opts)?;
    let epsilon = alpha
        .contraction_factor(r0)
        .max(beta.contraction_factor(r0));
    Ok(SystemCertificate {
        alpha,
        beta,
        r0,
        epsilon,
    })
}
