//! Modulus-of-continuity measure of noncompactness on `C[1, T]` and a
//! sampled Darbo iteration.
//!
//! For a bounded family `𝓕`, `μ(𝓕, δ) = sup_{f ∈ 𝓕} sup_{|z₁-z₂| ≤ δ} |f(z₁) - f(z₂)|`,
//! `μ₀(𝓕) = lim_{δ→0} μ(𝓕, δ)` and the Hausdorff measure is `μ₀/2`.
//! Finite ensembles stand in for bounded sets. `μ₀` is extrapolated from a
//! ladder of `δ` values, so an ensemble that oscillates at scales below the
//! finest `δ` looks equicontinuous to the estimator.
//!
//! Only the finitely checkable axioms are tested here: monotonicity under
//! inclusion and convexity, both on the `δ` ladder. Axioms quantifying over
//! all bounded sets or over nested set sequences are not checked.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frac_integral::GridFunction;

/// A nonempty family of grid functions on one node set.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionEnsemble {
    members: Vec<GridFunction>,
}

impl FunctionEnsemble {
    pub fn new(members: Vec<GridFunction>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::domain("an ensemble needs at least one member"));
        };
        if members.iter().any(|m| m.nodes() != first.nodes()) {
            return Err(Error::domain("ensemble members must share one node set"));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[GridFunction] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        self.members[0].nodes()
    }

    pub fn sup_norm(&self) -> f64 {
        self.members
            .iter()
            .map(GridFunction::sup_norm)
            .fold(0.0, f64::max)
    }

    /// True if every member of `self` also occurs in `other`.
    pub fn is_sub_list_of(&self, other: &FunctionEnsemble) -> bool {
        self.members.iter().all(|m| other.members.contains(m))
    }
}

/// `n` random piecewise-linear functions with `‖f‖ ≤ radius`.
///
/// With `lipschitz = Some(L)` the node values follow a clipped random walk
/// with slopes bounded by `L`; otherwise every node value is drawn
/// independently, which gives rough members with a large modulus at the
/// grid scale.
pub fn random_ensemble(
    nodes: &[f64],
    n: usize,
    radius: f64,
    lipschitz: Option<f64>,
    rng: &mut impl Rng,
) -> Result<FunctionEnsemble> {
    let members = (0..n.max(1))
        .map(|_| {
            let values = match lipschitz {
                None => nodes
                    .iter()
                    .map(|_| rng.gen_range(-radius..=radius))
                    .collect(),
                Some(l) => {
                    let mut v = Vec::with_capacity(nodes.len());
                    let mut cur = rng.gen_range(-radius..=radius);
                    v.push(cur);
                    for w in nodes.windows(2) {
                        let step = l * (w[1] - w[0]);
                        cur = (cur + rng.gen_range(-step..=step)).clamp(-radius, radius);
                        v.push(cur);
                    }
                    v
                }
            };
            GridFunction::new(nodes.to_vec(), values)
        })
        .collect::<Result<Vec<_>>>()?;
    FunctionEnsemble::new(members)
}

/// `μ(f, δ)`, exact for piecewise-linear `f`.
///
/// The oscillation over a window `[z, z+δ]` is convex in `z` between the
/// positions where a window edge crosses a node, so it suffices to look at
/// windows starting at a node or ending at one. Node extrema inside the
/// sliding window are tracked with monotone deques.
pub fn modulus_of_continuity(f: &GridFunction, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let nodes = f.nodes();
    let values = f.values();
    let start = f.start();
    let end = f.end();
    if delta >= end - start {
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        return Ok(hi - lo);
    }
    let last_start = end - delta;
    let mut starts: Vec<f64> = nodes
        .iter()
        .flat_map(|&t| [t, t - delta])
        .filter(|&z| z >= start && z <= last_start)
        .chain([start, last_start])
        .collect();
    starts.sort_by(f64::total_cmp);
    starts.dedup();

    let mut max_q: VecDeque<usize> = VecDeque::new();
    let mut min_q: VecDeque<usize> = VecDeque::new();
    let mut next = 0usize;
    let mut best = 0.0f64;
    for z in starts {
        let w_end = z + delta;
        while next < nodes.len() && nodes[next] <= w_end {
            while max_q.back().is_some_and(|&j| values[j] <= values[next]) {
                max_q.pop_back();
            }
            max_q.push_back(next);
            while min_q.back().is_some_and(|&j| values[j] >= values[next]) {
                min_q.pop_back();
            }
            min_q.push_back(next);
            next += 1;
        }
        while max_q.front().is_some_and(|&j| nodes[j] < z) {
            max_q.pop_front();
        }
        while min_q.front().is_some_and(|&j| nodes[j] < z) {
            min_q.pop_front();
        }
        let a = f.eval(z);
        let b = f.eval(w_end);
        let mut hi = a.max(b);
        let mut lo = a.min(b);
        if let Some(&j) = max_q.front() {
            hi = hi.max(values[j]);
        }
        if let Some(&j) = min_q.front() {
            lo = lo.min(values[j]);
        }
        best = best.max(hi - lo);
    }
    Ok(best)
}

/// `μ(𝓕, δ) = max_f μ(f, δ)`.
pub fn ensemble_modulus(e: &FunctionEnsemble, delta: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for m in e.members() {
        best = best.max(modulus_of_continuity(m, delta)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MncEstimate {
    pub deltas: Vec<f64>,
    pub moduli: Vec<f64>,
    /// extrapolated `lim_{δ→0} μ(𝓕, δ)`, clamped at 0
    pub mu0: f64,
    /// `mu0 / 2`
    pub hausdorff: f64,
    /// size of the extrapolation error, estimated as four times the largest
    /// residual of the line fit (for a pure `δ²` term the intercept error is
    /// about four times the largest residual on a halving ladder)
    pub resolution: f64,
}

fn check_ladder(deltas: &[f64]) -> Result<()> {
    if deltas.len() < 3 {
        return Err(Error::domain(
            "the delta ladder needs at least three entries",
        ));
    }
    if deltas.iter().any(|&d| !(d > 0.0)) || deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::domain(
            "deltas must be positive and strictly decreasing",
        ));
    }
    Ok(())
}

/// Moduli on the ladder and `μ₀` from a straight-line fit through the
/// three smallest `δ`, evaluated at `δ = 0`.
pub fn mnc_estimate(e: &FunctionEnsemble, deltas: &[f64]) -> Result<MncEstimate> {
    check_ladder(deltas)?;
    let moduli = deltas
        .iter()
        .map(|&d| ensemble_modulus(e, d))
        .collect::<Result<Vec<_>>>()?;
    let (c, slope) = fit_line(&deltas[deltas.len() - 3..], &moduli[moduli.len() - 3..]);
    let worst_residual = deltas[deltas.len() - 3..]
        .iter()
        .zip(&moduli[moduli.len() - 3..])
        .map(|(d, m)| (m - c - slope * d).abs())
        .fold(0.0, f64::max);
    let mu0 = c.max(0.0);
    Ok(MncEstimate {
        deltas: deltas.to_vec(),
        moduli,
        mu0,
        hausdorff: mu0 / 2.0,
        resolution: 4.0 * worst_residual,
    })
}

/// Least-squares `(intercept, slope)`.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomCheck {
    pub passed: bool,
    /// smallest `rhs - lhs` over the ladder; negative means violated
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomReport {
    /// `None` when `e1` is not a sub-list of `e2`
    pub monotonicity: Option<AxiomCheck>,
    pub convexity: AxiomCheck,
}

/// Monotonicity (`e1 ⊆ e2 ⇒ μ(e1, δ) ≤ μ(e2, δ)`) and convexity
/// (`μ(L e1 + (1-L) e2, δ) ≤ L μ(e1, δ) + (1-L) μ(e2, δ)`, combinations
/// formed over all member pairs) at every `δ` of the ladder.
///
/// The checks run on the ladder moduli rather than on the extrapolated
/// `μ₀`: the straight-line fit has weights of both signs, so it does not
/// preserve these inequalities.
pub fn mnc_axiom_checks(
    e1: &FunctionEnsemble,
    e2: &FunctionEnsemble,
    mix: f64,
    deltas: &[f64],
    tol: f64,
) -> Result<AxiomReport> {
    if !(0.0..=1.0).contains(&mix) {
        return Err(Error::domain(format!(
            "mixing weight must lie in [0, 1], got {mix}"
        )));
    }
    if e1.nodes() != e2.nodes() {
        return Err(Error::domain("ensembles must share one node set"));
    }
    check_ladder(deltas)?;

    let monotonicity = if e1.is_sub_list_of(e2) {
        let mut slack = f64::INFINITY;
        for &d in deltas {
            slack = slack.min(ensemble_modulus(e2, d)? - ensemble_modulus(e1, d)?);
        }
        Some(AxiomCheck {
            passed: slack >= -tol,
            slack,
        })
    } else {
        None
    };

    let mut combos = Vec::with_capacity(e1.len() * e2.len());
    for f in e1.members() {
        for g in e2.members() {
            let v = f
                .values()
                .iter()
                .zip(g.values())
                .map(|(a, b)| mix * a + (1.0 - mix) * b)
                .collect();
            combos.push(f.with_values(v)?);
        }
    }
    let combined = FunctionEnsemble::new(combos)?;
    let mut slack = f64::INFINITY;
    for &d in deltas {
        let lhs = ensemble_modulus(&combined, d)?;
        let rhs = mix * ensemble_modulus(e1, d)? + (1.0 - mix) * ensemble_modulus(e2, d)?;
        slack = slack.min(rhs - lhs);
    }
    Ok(AxiomReport {
        monotonicity,
        convexity: AxiomCheck {
            passed: slack >= -tol,
            slack,
        },
    })
}

type Binary = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Unary = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The functions `(𝓗, υ, γ, φ)` of a Darbo-type contraction condition
/// `υ(𝓗(Q', φ(Q'))) ≤ υ(𝓗(Q, φ(Q))) - γ(𝓗(Q, φ(Q)))`.
#[derive(Clone)]
pub struct ContractionCertificate {
    pub h: Binary,
    pub upsilon: Unary,
    pub gamma_cmp: Unary,
    pub phi: Unary,
    /// `𝒢` of the linear comparison function, when built-in
    pub g_const: Option<f64>,
}

impl std::fmt::Debug for ContractionCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContractionCertificate")
            .field("g_const", &self.g_const)
            .finish_non_exhaustive()
    }
}

impl ContractionCertificate {
    /// `𝓗 = sum`, `υ(x) = x/2`, `γ(x) = 𝒢x`, `φ = identity`.
    pub fn builtin(g_const: f64) -> Result<Self> {
        if !(g_const > 0.0 && g_const < 1.0) {
            return Err(Error::domain(format!(
                "𝒢 must lie in (0, 1), got {g_const}"
            )));
        }
        Ok(Self {
            h: Arc::new(|a, b| a + b),
            upsilon: Arc::new(|x| x / 2.0),
            gamma_cmp: Arc::new(move |x| g_const * x),
            phi: Arc::new(|x| x),
            g_const: Some(g_const),
        })
    }

    /// Built-in certificate with `𝒢 = (1 - factor)/2`, so `1 - 2𝒢 = factor`.
    pub fn from_factor(factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor < 1.0) {
            return Err(Error::domain(format!(
                "factor must lie in (0, 1), got {factor}"
            )));
        }
        Self::builtin((1.0 - factor) / 2.0)
    }

    pub fn with_phi(mut self, phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.phi = Arc::new(phi);
        self
    }

    /// `1 - 2𝒢`, the Darbo constant `m` the built-in certificate reduces to.
    pub fn darbo_constant(&self) -> Option<f64> {
        self.g_const.map(|g| 1.0 - 2.0 * g)
    }

    fn combined(&self, q: f64) -> f64 {
        (self.h)(q, (self.phi)(q))
    }

    /// Sampled checks of the class properties of `𝓗`, `υ` and `γ`.
    pub fn class_report(&self, samples: usize, seed: u64) -> ClassReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = ClassReport {
            h_dominates_max: true,
            h_subadditive: true,
            upsilon_vanishes_only_at_zero: (self.upsilon)(0.0) == 0.0,
            upsilon_nondecreasing: true,
            gamma_comparison: (self.gamma_cmp)(0.0) == 0.0,
            phi_nondecreasing: true,
        };
        let mut pts: Vec<f64> = (0..samples).map(|_| rng.gen_range(0.0..10.0)).collect();
        for _ in 0..samples {
            let (z1, z2, x1, x2) = (
                rng.gen_range(0.0..10.0),
                rng.gen_range(0.0..10.0),
                rng.gen_range(0.0..10.0),
                rng.gen_range(0.0..10.0),
            );
            if (self.h)(z1, z2) < z1.max(z2) {
                report.h_dominates_max = false;
            }
            if (self.h)(z1 + z2, x1 + x2) > (self.h)(z1, x1) + (self.h)(z2, x2) + 1e-12 {
                report.h_subadditive = false;
            }
        }
        pts.sort_by(f64::total_cmp);
        for w in pts.windows(2) {
            if (self.upsilon)(w[1]) < (self.upsilon)(w[0]) {
                report.upsilon_nondecreasing = false;
            }
            if (self.phi)(w[1]) < (self.phi)(w[0]) {
                report.phi_nondecreasing = false;
            }
        }
        for &p in &pts {
            if p > 0.0 && (self.upsilon)(p) <= 0.0 {
                report.upsilon_vanishes_only_at_zero = false;
            }
            if p > 0.0 && (self.gamma_cmp)(p) <= 0.0 {
                report.gamma_comparison = false;
            }
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassReport {
    pub h_dominates_max: bool,
    pub h_subadditive: bool,
    pub upsilon_vanishes_only_at_zero: bool,
    pub upsilon_nondecreasing: bool,
    pub gamma_comparison: bool,
    pub phi_nondecreasing: bool,
}

impl ClassReport {
    pub fn all(&self) -> bool {
        self.h_dominates_max
            && self.h_subadditive
            && self.upsilon_vanishes_only_at_zero
            && self.upsilon_nondecreasing
            && self.gamma_comparison
            && self.phi_nondecreasing
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarboConfig {
    pub p_max: usize,
    pub convex_samples: usize,
    pub deltas: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarboTrace {
    /// estimate of `A_p` for `p = 0..=p_max`
    pub estimates: Vec<MncEstimate>,
    pub sizes: Vec<usize>,
    pub sup_norms: Vec<f64>,
}

impl DarboTrace {
    pub fn mu0(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.mu0).collect()
    }

    /// `μ₀(A_{p+1}) / μ₀(A_p)`; `None` when `μ₀(A_p) = 0`.
    pub fn ratios(&self) -> Vec<Option<f64>> {
        self.estimates
            .windows(2)
            .map(|w| (w[0].mu0 > 0.0).then(|| w[1].mu0 / w[0].mu0))
            .collect()
    }
}

/// `A₀ = seed`, `A_{p+1}` = images of `A_p` plus `convex_samples` random
/// convex combinations of those images. A sampled hull only lower-bounds
/// the measure of the true convex hull.
///
/// Images are computed in parallel; all random draws happen sequentially
/// afterwards, so the trace depends on the seed only.
pub fn darbo_iterate<F>(op: F, seed: &FunctionEnsemble, cfg: &DarboConfig) -> Result<DarboTrace>
where
    F: Fn(&GridFunction) -> Result<GridFunction> + Sync,
{
    if cfg.p_max < 1 {
        return Err(Error::domain("p_max must be at least 1"));
    }
    check_ladder(&cfg.deltas)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = seed.clone();
    let mut estimates = vec![mnc_estimate(&current, &cfg.deltas)?];
    let mut sizes = vec![current.len()];
    let mut sup_norms = vec![current.sup_norm()];
    for _ in 0..cfg.p_max {
        let images: Vec<GridFunction> = current
            .members()
            .par_iter()
            .map(&op)
            .collect::<Result<_>>()?;
        let mut next = images.clone();
        for _ in 0..cfg.convex_samples {
            let picks = images.len().min(3);
            let idx: Vec<usize> = (0..picks).map(|_| rng.gen_range(0..images.len())).collect();
            let raw: Vec<f64> = (0..picks).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            let mut values = vec![0.0; images[0].len()];
            for (&i, &w) in idx.iter().zip(&raw) {
                for (acc, v) in values.iter_mut().zip(images[i].values()) {
                    *acc += w / total * v;
                }
            }
            next.push(images[0].with_values(values)?);
        }
        current = FunctionEnsemble::new(next)?;
        estimates.push(mnc_estimate(&current, &cfg.deltas)?);
        sizes.push(current.len());
        sup_norms.push(current.sup_norm());
    }
    Ok(DarboTrace {
        estimates,
        sizes,
        sup_norms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCheck {
    pub p: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

/// How the left side of a step check treats extrapolation error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tolerance {
    /// compare the estimates as they are
    #[default]
    Strict,
    /// lower the new estimate by its [`MncEstimate::resolution`] before comparing
    EstimatorResolution,
}

impl Tolerance {
    fn mu0(self, e: &MncEstimate) -> f64 {
        match self {
            Tolerance::Strict => e.mu0,
            Tolerance::EstimatorResolution => (e.mu0 - e.resolution).max(0.0),
        }
    }
}

/// `μ₀(A_{p+1}) ≤ (factor + slack) μ₀(A_p)` for every step.
pub fn contraction_steps(
    trace: &DarboTrace,
    factor: f64,
    slack: f64,
    tolerance: Tolerance,
) -> Vec<StepCheck> {
    trace
        .estimates
        .windows(2)
        .enumerate()
        .map(|(p, w)| {
            let lhs = tolerance.mu0(&w[1]);
            let rhs = (factor + slack) * w[0].mu0;
            StepCheck {
                p,
                lhs,
                rhs,
                passed: lhs <= rhs,
            }
        })
        .collect()
}

/// `υ(𝓗(Q_{p+1}, φ(Q_{p+1}))) ≤ υ(𝓗_p) - γ(𝓗_p) + slack_fraction·υ(𝓗_p)`
/// along the trace, with `Q_p` the Hausdorff measure of `A_p` and
/// `𝓗_p = 𝓗(Q_p, φ(Q_p))`. For the built-in certificate this is
/// `𝓗_{p+1} ≤ (1 - 2𝒢 + slack_fraction) 𝓗_p`.
pub fn certificate_inequality_check(
    cert: &ContractionCertificate,
    trace: &DarboTrace,
    slack_fraction: f64,
    tolerance: Tolerance,
) -> Vec<StepCheck> {
    trace
        .estimates
        .windows(2)
        .enumerate()
        .map(|(p, w)| {
            let now = cert.combined(w[0].hausdorff);
            let next = cert.combined(tolerance.mu0(&w[1]) / 2.0);
            let lhs = (cert.upsilon)(next);
            let rhs =
                (cert.upsilon)(now) - (cert.gamma_cmp)(now) + slack_fraction * (cert.upsilon)(now);
            StepCheck {
                p,
                lhs,
                rhs,
                passed: lhs <= rhs,
            }
        })
        .collect()
}
