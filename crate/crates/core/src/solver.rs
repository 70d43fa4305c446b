//! Picard iteration `α_{p+1} = 𝒟α_p` on a fixed node set.

use crate::equation::{EquationOperator, EquationSpec, SystemSpec};
use crate::error::Result;
use crate::frac_integral::{GridFunction, Quadrature};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// certified radius; when set, a seed outside the ball produces a warning
    pub radius: Option<f64>,
    pub quadrature: Quadrature,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            radius: None,
            quadrature: Quadrature::default(),
        }
    }
}

/// One Picard step: `step_sup = ‖α_{p+1} - α_p‖∞`, `residual = ‖α_{p+1} - 𝒟α_{p+1}‖∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub p: usize,
    pub step_sup: f64,
    pub residual: f64,
    pub sup_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub sup_distances: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    /// `‖α - 𝒟α‖∞` at exit
    pub residual: f64,
    /// largest `sup_distances[p+1] / sup_distances[p]` for `p ≥ 1`
    pub measured_rate: f64,
    pub solution: GridFunction,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Solves `α = 𝒟α` from `alpha0`, on `alpha0`'s nodes.
pub fn solve(eq: &EquationSpec, alpha0: &GridFunction, opts: &SolveOptions) -> Result<SolveReport> {
    let op = EquationOperator::new(eq, alpha0.nodes(), &opts.quadrature)?;
    solve_with(&op, alpha0, opts)
}

/// [`solve`] with a prebuilt operator.
///
/// Stops once the residual `‖α_p - 𝒟α_p‖∞` is within `tol`, whatever the
/// last step size was, so `converged` implies `residual ≤ tol`. Hitting
/// `max_iter` is reported, not raised.
pub fn solve_with(
    op: &EquationOperator,
    alpha0: &GridFunction,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let mut warnings = Vec::new();
    match opts.radius {
        None => warnings
            .push("no certified radius supplied; seed not checked against a ball".to_string()),
        Some(r) if alpha0.sup_norm() > r => warnings.push(format!(
            "seed norm {} exceeds the certified radius {r}",
            alpha0.sup_norm()
        )),
        Some(_) => {}
    }

    let mut current = alpha0.clone();
    let mut image = op.apply(&current)?;
    let mut sup_distances = Vec::new();
    let mut trace = Vec::new();
    let mut residual;
    let mut converged = false;
    let mut iterations = 0;
    // at least one step, so a fixed-point seed reports a single iteration
    while !converged && iterations < opts.max_iter.max(1) {
        let next = image;
        let step = next.sup_distance(&current);
        let raw = op.apply_values(&next)?;
        iterations += 1;
        current = next;
        sup_distances.push(step);
        if raw.iter().any(|v| !v.is_finite()) {
            residual = f64::INFINITY;
            trace.push(IterationRecord {
                p: iterations,
                step_sup: step,
                residual,
                sup_norm: current.sup_norm(),
            });
            warnings.push(format!("the image of iterate {iterations} overflowed"));
            break;
        }
        image = current.with_values(raw)?;
        residual = image.sup_distance(&current);
        trace.push(IterationRecord {
            p: iterations,
            step_sup: step,
            residual,
            sup_norm: current.sup_norm(),
        });
        converged = residual <= opts.tol;
    }
    let residual = trace.last().map_or(f64::INFINITY, |r| r.residual);
    if !converged {
        warnings.push(format!(
            "no convergence after {iterations} iterations (residual {residual:e})"
        ));
    }
    Ok(SolveReport {
        iterations,
        measured_rate: measured_rate(&sup_distances),
        sup_distances,
        trace,
        residual,
        solution: current,
        converged,
        warnings,
    })
}

fn measured_rate(d: &[f64]) -> f64 {
    d.windows(2)
        .skip(1)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max)
}

/// Both equations of an (uncoupled) system, one report each.
pub fn solve_system(
    sys: &SystemSpec,
    alpha0: &GridFunction,
    beta0: &GridFunction,
    opts: &SolveOptions,
) -> Result<(SolveReport, SolveReport)> {
    let a = solve(&sys.eq_alpha, alpha0, opts)?;
    let b = solve(&sys.eq_beta, beta0, opts)?;
    Ok((a, b))
}
