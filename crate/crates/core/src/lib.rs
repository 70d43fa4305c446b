//! Numerical toolkit for systems of `(k, ρ)`-fractional Hilfer integral equations
//!
//! ```text
//! α(x) = F(x, α(x)) + Ψ(x, α(x)) · (ρ^{1-γ/k} / (k Γ_k(γ))) ∫₁ˣ t^{ρ-1} (x^ρ - t^ρ)^{γ/k-1} G(t, α(t)) dt
//! ```
//!
//! on `[1, T]`. The crate evaluates the fractional integral by product
//! integration, checks the Lipschitz/radius hypotheses that guarantee a
//! solution, solves by Picard iteration, and measures how the modulus-of-continuity
//! measure of noncompactness contracts along a sampled Darbo iteration.
//!
//! Module map:
//! - [`special`]: gamma, k-gamma and beta functions (plus an integral oracle for k-gamma)
//! - [`frac_integral`]: [`FracParams`], [`GridFunction`] and the product-integration rule
//! - [`expr`]: the small expression language used for `F`, `Ψ`, `G`
//! - [`equation`]: nonlinearities, equations and the operator `𝒟`
//! - [`solvability`]: contraction factor and admissible radius certificates
//! - [`mnc`]: modulus of continuity, `μ₀` estimation, Darbo iteration
//! - [`solver`]: Picard iteration with convergence diagnostics

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equation;
pub mod error;
pub mod expr;
pub mod frac_integral;
pub mod mnc;
pub mod solvability;
pub mod solver;
pub mod special;

pub use equation::{EquationOperator, EquationSpec, Nonlinearity, SystemSpec};
pub use error::{Error, Result};
pub use expr::Expr;
pub use frac_integral::{FracParams, GridFunction, Integrand, Mesh, Quadrature};
pub use mnc::{ContractionCertificate, FunctionEnsemble, MncEstimate};
pub use solvability::{RadiusCertificate, SolvabilityOptions, SystemCertificate};
pub use solver::{SolveOptions, SolveReport};
