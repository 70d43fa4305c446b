//! The `(k, ρ)`-fractional Hilfer left integral on `[1, T]`
//!
//! ```text
//! J φ(x) = ρ^{1-γ/k} / (k Γ_k(γ)) ∫₁ˣ t^{ρ-1} (x^ρ - t^ρ)^{γ/k-1} φ(t) dt
//! ```
//!
//! With `s = t^ρ` and `a = γ/k` this is
//! `ρ^{-a} / (k Γ_k(γ)) ∫₁^{x^ρ} (x^ρ - s)^{a-1} φ(s^{1/ρ}) ds`.
//! The smooth factor `φ(s^{1/ρ})` is interpolated piecewise-linearly on a
//! mesh in `s` and every panel is integrated against `(x^ρ - s)^{a-1}` in
//! closed form, so the endpoint singularity is never sampled.

use crate::error::{Error, Result};
use crate::special::k_gamma;

/// `(k, ρ, γ, T)` plus an optional replacement for `Γ_k(γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    k: f64,
    rho: f64,
    gamma: f64,
    t_max: f64,
    gamma_k: f64,
    gamma_k_overridden: bool,
}

impl FracParams {
    pub fn new(k: f64, rho: f64, gamma: f64, t_max: f64) -> Result<Self> {
        for (name, v) in [("k", k), ("rho", rho), ("gamma", gamma)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::domain(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(t_max > 1.0) || !t_max.is_finite() {
            return Err(Error::domain(format!(
                "T must be finite and > 1, got {t_max}"
            )));
        }
        let gamma_k = k_gamma(k, gamma)?.value;
        Ok(Self {
            k,
            rho,
            gamma,
            t_max,
            gamma_k,
            gamma_k_overridden: false,
        })
    }

    /// Replace `Γ_k(γ)` in the normalisation by a fixed value.
    pub fn with_gamma_k_override(mut self, value: Option<f64>) -> Result<Self> {
        match value {
            Some(v) if !(v > 0.0) || !v.is_finite() => Err(Error::domain(format!(
                "Γ_k override must be positive, got {v}"
            ))),
            Some(v) => {
                self.gamma_k = v;
                self.gamma_k_overridden = true;
                Ok(self)
            }
            None => {
                self.gamma_k = k_gamma(self.k, self.gamma)?.value;
                self.gamma_k_overridden = false;
                Ok(self)
            }
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// `a = γ/k`
    pub fn exponent(&self) -> f64 {
        self.gamma / self.k
    }

    pub fn gamma_k(&self) -> f64 {
        self.gamma_k
    }

    pub fn gamma_k_overridden(&self) -> bool {
        self.gamma_k_overridden
    }

    /// `ρ^{-a} / (k Γ_k(γ))`, the constant in front of the `s`-integral.
    pub fn prefactor(&self) -> f64 {
        self.rho.powf(-self.exponent()) / (self.k * self.gamma_k)
    }

    /// `ρ^{-a} (x^ρ - 1)^a / (γ Γ_k(γ))`: the integral of `φ ≡ 1`.
    pub fn unit_integral(&self, x: f64) -> f64 {
        let a = self.exponent();
        self.rho.powf(-a) * (x.powf(self.rho) - 1.0).powf(a) / (self.gamma * self.gamma_k)
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(x >= 1.0 && x <= self.t_max) {
            return Err(Error::domain(format!(
                "x = {x} outside the domain [1, {}]",
                self.t_max
            )));
        }
        Ok(())
    }
}

/// A continuous function on `[1, T]`: node values with linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::domain("a grid function needs at least two nodes"));
        }
        if nodes.len() != values.len() {
            return Err(Error::domain(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("nodes must be strictly increasing"));
        }
        if nodes.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("nodes and values must be finite"));
        }
        Ok(Self { nodes, values })
    }

    /// `n` equally spaced nodes on `[1, t_max]`.
    pub fn uniform_nodes(t_max: f64, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let h = (t_max - 1.0) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| 1.0 + h * i as f64).collect();
        nodes[n - 1] = t_max;
        nodes
    }

    pub fn from_fn(nodes: Vec<f64>, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let values = nodes.iter().map(|&t| f(t)).collect();
        Self::new(nodes, values)
    }

    pub fn constant(nodes: Vec<f64>, c: f64) -> Result<Self> {
        let values = vec![c; nodes.len()];
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Same nodes, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.nodes.clone(), values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖self - other‖∞` over the shared node set.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        debug_assert_eq!(self.nodes.len(), other.nodes.len());
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Index `i` of the interval `[nodes[i], nodes[i+1]]` containing `t`
    /// and the interpolation weight of `nodes[i+1]`. Clamps outside the range.
    pub(crate) fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.nodes.len();
        if t <= self.nodes[0] {
            return (0, 0.0);
        }
        if t >= self.nodes[n - 1] {
            return (n - 2, 1.0);
        }
        let i = self.nodes.partition_point(|&v| v <= t) - 1;
        let i = i.min(n - 2);
        let theta = (t - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
        (i, theta)
    }

    /// Linear interpolation; constant extension outside `[start, end]`.
    pub fn eval(&self, t: f64) -> f64 {
        let (i, theta) = self.locate(t);
        let (l, r) = (self.values[i], self.values[i + 1]);
        l + (r - l) * theta
    }

    /// Resample onto another node set by interpolation.
    pub fn resample(&self, nodes: Vec<f64>) -> Result<GridFunction> {
        let values = nodes.iter().map(|&t| self.eval(t)).collect();
        GridFunction::new(nodes, values)
    }
}

/// Anything that can be sampled on `[1, T]`.
pub trait Integrand {
    fn value_at(&self, t: f64) -> f64;
}

impl Integrand for GridFunction {
    fn value_at(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

impl<F: Fn(f64) -> f64> Integrand for F {
    fn value_at(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Placement of the mesh points in `s = t^ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mesh {
    Uniform,
    /// `s_j = 1 + (x^ρ - 1)(j/n)^q`, clustered towards `t = 1`.
    Graded {
        exponent: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub panels: usize,
    pub mesh: Mesh,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            panels: 1024,
            mesh: Mesh::Uniform,
        }
    }
}

impl Quadrature {
    pub fn uniform(panels: usize) -> Self {
        Self {
            panels,
            mesh: Mesh::Uniform,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.panels == 0 {
            return Err(Error::domain("quadrature needs at least one panel"));
        }
        if let Mesh::Graded { exponent } = self.mesh {
            if !(exponent >= 1.0) || !exponent.is_finite() {
                return Err(Error::domain(format!(
                    "graded mesh exponent must be >= 1, got {exponent}"
                )));
            }
        }
        Ok(())
    }
}

/// Sample points `t_m` and weights `w_m` with `J φ(x) ≈ Σ w_m φ(t_m)`.
#[derive(Debug, Clone)]
pub struct ProductRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ProductRule {
    pub fn new(params: &FracParams, x: f64, quad: &Quadrature) -> Result<Self> {
        params.check_x(x)?;
        quad.validate()?;
        if x == 1.0 {
            return Ok(Self {
                points: Vec::new(),
                weights: Vec::new(),
            });
        }
        let a = params.exponent();
        let rho = params.rho();
        let upper = x.powf(rho);
        let n = quad.panels;
        let span = upper - 1.0;
        let s: Vec<f64> = (0..=n)
            .map(|j| {
                let frac = j as f64 / n as f64;
                match quad.mesh {
                    Mesh::Uniform => 1.0 + span * frac,
                    Mesh::Graded { exponent } => 1.0 + span * frac.powf(exponent),
                }
            })
            .collect();

        let mut weights = vec![0.0; n + 1];
        for j in 0..n {
            let h = s[j + 1] - s[j];
            if h <= 0.0 {
                continue;
            }
            let u_far = upper - s[j];
            let u_near = if j + 1 == n { 0.0 } else { upper - s[j + 1] };
            let (m0, m1) = panel_moments(a, u_far, u_near, h);
            // ψ(s) = ψ_j (u - u_near)/h + ψ_{j+1} (u_far - u)/h with u = X - s
            weights[j] += (m1 - u_near * m0) / h;
            weights[j + 1] += (u_far * m0 - m1) / h;
        }
        let pre = params.prefactor();
        let inv_rho = 1.0 / rho;
        let t_max = params.t_max();
        let points = s
            .iter()
            .enumerate()
            .map(|(j, &sj)| {
                if j == 0 {
                    1.0
                } else if j == n {
                    x
                } else {
                    sj.powf(inv_rho).min(t_max)
                }
            })
            .collect();
        for w in &mut weights {
            *w *= pre;
        }
        Ok(Self { points, weights })
    }

    /// `Σ w_m f(t_m)` in a fixed order.
    pub fn apply<I: Integrand + ?Sized>(&self, f: &I) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f.value_at(t))
            .sum()
    }

    pub fn try_apply<E>(
        &self,
        mut f: impl FnMut(f64) -> std::result::Result<f64, E>,
    ) -> std::result::Result<f64, E> {
        let mut acc = 0.0;
        for (&t, &w) in self.points.iter().zip(&self.weights) {
            acc += w * f(t)?;
        }
        Ok(acc)
    }
}

/// Zeroth and first moments of `u^{a-1}` over `[u_near, u_far]`:
/// `M0 = ∫ u^{a-1} du`, `M1 = ∫ u^a du`, where `h = u_far - u_near`.
fn panel_moments(a: f64, u_far: f64, u_near: f64, h: f64) -> (f64, f64) {
    if u_near <= 0.0 {
        return (u_far.powf(a) / a, u_far.powf(a + 1.0) / (a + 1.0));
    }
    // u_far^p - u_near^p = -u_far^p · expm1(p · ln(1 - h/u_far)), no cancellation
    let log_ratio = (-h / u_far).ln_1p();
    let m0 = -u_far.powf(a) * (a * log_ratio).exp_m1() / a;
    let m1 = -u_far.powf(a + 1.0) * ((a + 1.0) * log_ratio).exp_m1() / (a + 1.0);
    (m0, m1)
}

/// `J φ(x)` with the default quadrature (1024 uniform panels in `s`).
pub fn hilfer_integral<I: Integrand + ?Sized>(params: &FracParams, phi: &I, x: f64) -> Result<f64> {
    product_quadrature(params, phi, x, &Quadrature::default())
}

/// `J φ(x)` by product integration on the given mesh. Exactly 0 at `x = 1`.
pub fn product_quadrature<I: Integrand + ?Sized>(
    params: &FracParams,
    phi: &I,
    x: f64,
    quad: &Quadrature,
) -> Result<f64> {
    let rule = ProductRule::new(params, x, quad)?;
    Ok(rule.apply(phi))
}

/// Empirical convergence order of [`product_quadrature`] in the panel count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceOrder {
    /// every error fell below `1e-13` relative to the reference value:
    /// the rule is exact for this integrand up to rounding
    Exact,
    Order(f64),
}

const EXACT_THRESHOLD: f64 = 1e-13;

/// Fits `log |I(n) - I(4 n_max)|` against `log(1/n)` by least squares.
pub fn measure_convergence_order<I: Integrand + ?Sized>(
    params: &FracParams,
    phi: &I,
    x: f64,
    mesh_sizes: &[usize],
) -> Result<ConvergenceOrder> {
    if mesh_sizes.len() < 3 {
        return Err(Error::domain("need at least three mesh sizes"));
    }
    if mesh_sizes.windows(2).any(|w| w[1] <= w[0]) || mesh_sizes[0] == 0 {
        return Err(Error::domain(
            "mesh sizes must be positive and strictly increasing",
        ));
    }
    let n_max = *mesh_sizes.last().unwrap();
    let reference = product_quadrature(params, phi, x, &Quadrature::uniform(4 * n_max))?;
    let floor = EXACT_THRESHOLD * reference.abs().max(f64::MIN_POSITIVE);
    let mut pts = Vec::new();
    for &n in mesh_sizes {
        let v = product_quadrature(params, phi, x, &Quadrature::uniform(n))?;
        let err = (v - reference).abs();
        if err > floor {
            pts.push(((1.0 / n as f64).ln(), err.ln()));
        }
    }
    if pts.is_empty() {
        return Ok(ConvergenceOrder::Exact);
    }
    if pts.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "only {} of {} errors above the rounding floor {floor:e}",
            pts.len(),
            mesh_sizes.len()
        )));
    }
    Ok(ConvergenceOrder::Order(least_squares_slope(&pts)))
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// The product rule composed with the interpolation of a [`GridFunction`]
/// on a fixed node set: a dense `N × N` matrix `W` with
/// `J φ(nodes[i]) = Σ_j W[i][j] φ(nodes[j])`.
#[derive(Debug, Clone)]
pub struct HilferMatrix {
    nodes: Vec<f64>,
    entries: Vec<f64>,
}

impl HilferMatrix {
    pub fn new(params: &FracParams, nodes: &[f64], quad: &Quadrature) -> Result<Self> {
        use rayon::prelude::*;

        let n = nodes.len();
        let probe = GridFunction::new(nodes.to_vec(), vec![0.0; n])?;
        if (probe.start() - 1.0).abs() > 1e-12 || (probe.end() - params.t_max()).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "nodes must span [1, {}], got [{}, {}]",
                params.t_max(),
                probe.start(),
                probe.end()
            )));
        }
        let rows: Vec<Vec<f64>> = nodes
            .par_iter()
            .map(|&x| -> Result<Vec<f64>> {
                let rule = ProductRule::new(params, x.clamp(1.0, params.t_max()), quad)?;
                let mut row = vec![0.0; n];
                for (&t, &w) in rule.points.iter().zip(&rule.weights) {
                    let (i, theta) = probe.locate(t);
                    row[i] += w * (1.0 - theta);
                    row[i + 1] += w * theta;
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            nodes: nodes.to_vec(),
            entries: rows.concat(),
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.nodes.len();
        &self.entries[i * n..(i + 1) * n]
    }

    /// `W v` with a fixed summation order per row.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let n = self.nodes.len();
        assert_eq!(values.len(), n, "value vector does not match the node set");
        (0..n)
            .map(|i| self.row(i).iter().zip(values).map(|(w, v)| w * v).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::beta;
    use proptest::prelude::*;

    fn example_params() -> FracParams {
        FracParams::new(1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 3.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(FracParams::new(1.0, 0.5, 0.5, 2.0).is_err());
        assert!(FracParams::new(0.5, 0.0, 0.5, 2.0).is_err());
        assert!(FracParams::new(0.5, 0.5, 1.2, 2.0).is_err());
        assert!(FracParams::new(0.5, 0.5, 0.5, 1.0).is_err());
        let p = example_params();
        assert!((p.exponent() - 2.0).abs() < 1e-15);
        assert!((p.gamma_k() - 1.0 / 3.0).abs() < 1e-14);
        let o = p.with_gamma_k_override(Some(2.4047)).unwrap();
        assert!(o.gamma_k_overridden());
        assert_eq!(o.gamma_k(), 2.4047);
        assert!(p.with_gamma_k_override(Some(-1.0)).is_err());
    }

    #[test]
    fn grid_function_contract() {
        assert!(GridFunction::new(vec![1.0], vec![0.0]).is_err());
        assert!(GridFunction::new(vec![1.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(GridFunction::new(vec![1.0, 2.0], vec![0.0]).is_err());
        let g = GridFunction::new(vec![1.0, 2.0, 3.0], vec![0.0, 2.0, -1.0]).unwrap();
        assert_eq!(g.eval(1.5), 1.0);
        assert_eq!(g.eval(2.5), 0.5);
        assert_eq!(g.eval(3.0), -1.0);
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.sup_norm(), 2.0);
    }

    #[test]
    fn zero_at_left_endpoint() {
        let p = example_params();
        let v = hilfer_integral(&p, &|t: f64| t.sin() + 5.0, 1.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn x_outside_domain() {
        let p = example_params();
        assert!(hilfer_integral(&p, &|_t: f64| 1.0, 0.99).is_err());
        assert!(hilfer_integral(&p, &|_t: f64| 1.0, 3.01).is_err());
    }

    #[test]
    fn constants_are_exact() {
        let p = FracParams::new(0.6, 0.4, 0.3, 4.0).unwrap();
        for x in [1.01, 1.5, 2.0, 3.3, 4.0] {
            let v = hilfer_integral(&p, &|_t: f64| 2.5, x).unwrap();
            let exact = 2.5 * p.unit_integral(x);
            assert!(((v - exact) / exact).abs() < 1e-12, "x={x}: {v} vs {exact}");
        }
    }

    #[test]
    fn linear_in_s_is_exact() {
        let p = FracParams::new(0.6, 0.4, 0.3, 4.0).unwrap();
        let a = p.exponent();
        let rho = p.rho();
        for x in [1.2, 2.7, 4.0] {
            let v =
                product_quadrature(&p, &|t: f64| t.powf(rho) - 1.0, x, &Quadrature::uniform(37))
                    .unwrap();
            let span = x.powf(rho) - 1.0;
            let exact = p.prefactor() * beta(2.0, a).unwrap() * span.powf(1.0 + a);
            assert!(((v - exact) / exact).abs() < 1e-11, "x={x}: {v} vs {exact}");
        }
    }

    #[test]
    fn graded_mesh_also_exact_on_constants() {
        let p = FracParams::new(0.5, 0.7, 0.2, 2.0).unwrap();
        let q = Quadrature {
            panels: 64,
            mesh: Mesh::Graded { exponent: 2.0 },
        };
        let v = product_quadrature(&p, &|_t: f64| 1.0, 2.0, &q).unwrap();
        assert!((v / p.unit_integral(2.0) - 1.0).abs() < 1e-12);
        let bad = Quadrature {
            panels: 8,
            mesh: Mesh::Graded { exponent: 0.5 },
        };
        assert!(product_quadrature(&p, &|_t: f64| 1.0, 2.0, &bad).is_err());
    }

    #[test]
    fn convergence_order_exact_sentinel() {
        let p = example_params();
        let rho = p.rho();
        let order =
            measure_convergence_order(&p, &|t: f64| 3.0 * t.powf(rho) + 1.0, 2.5, &[8, 16, 32])
                .unwrap();
        assert_eq!(order, ConvergenceOrder::Exact);
        assert!(measure_convergence_order(&p, &|t: f64| t, 2.5, &[8, 16]).is_err());
        assert!(measure_convergence_order(&p, &|t: f64| t, 2.5, &[16, 8, 32]).is_err());
    }

    #[test]
    fn convergence_order_smooth_and_kinked() {
        let p = example_params();
        let sizes = [128, 256, 512, 1024, 2048];
        match measure_convergence_order(&p, &|t: f64| t.sin(), 3.0, &sizes).unwrap() {
            ConvergenceOrder::Order(o) => assert!(o >= 1.9, "order {o}"),
            ConvergenceOrder::Exact => panic!("sin is not reproduced exactly"),
        }
        match measure_convergence_order(&p, &|t: f64| (t - 2.0).abs(), 3.0, &sizes).unwrap() {
            ConvergenceOrder::Order(o) => assert!(o >= 0.9, "order {o}"),
            ConvergenceOrder::Exact => panic!("|t-2| is not reproduced exactly"),
        }
    }

    #[test]
    fn matrix_matches_direct_rule() {
        let p = FracParams::new(0.4, 0.6, 0.5, 2.5).unwrap();
        let nodes = GridFunction::uniform_nodes(2.5, 41);
        let phi = GridFunction::from_fn(nodes.clone(), |t| (3.0 * t).cos() + t).unwrap();
        let quad = Quadrature::uniform(300);
        let m = HilferMatrix::new(&p, &nodes, &quad).unwrap();
        let via_matrix = m.apply(phi.values());
        for (i, &x) in nodes.iter().enumerate() {
            let direct = product_quadrature(&p, &phi, x, &quad).unwrap();
            assert!((direct - via_matrix[i]).abs() <= 1e-13 * (1.0 + direct.abs()));
        }
        assert!(m.row(0).iter().all(|&w| w == 0.0));
    }

    proptest! {
        #[test]
        fn linearity(ca in -3.0f64..3.0, cb in -3.0f64..3.0, seed in 0u64..1000, x in 1.0f64..3.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let nodes = GridFunction::uniform_nodes(3.0, 17);
            let f = GridFunction::from_fn(nodes.clone(), |_| rng.gen_range(-1.0..1.0)).unwrap();
            let g = GridFunction::from_fn(nodes.clone(), |_| rng.gen_range(-1.0..1.0)).unwrap();
            let combo = f.with_values(f.values().iter().zip(g.values()).map(|(a, b)| ca * a + cb * b).collect()).unwrap();
            let p = example_params();
            let lhs = hilfer_integral(&p, &combo, x).unwrap();
            let rhs = ca * hilfer_integral(&p, &f, x).unwrap() + cb * hilfer_integral(&p, &g, x).unwrap();
            let scale = (ca.abs() + cb.abs()) * p.unit_integral(x) + 1e-300;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn positivity_and_bound(seed in 0u64..1000, x in 1.0f64..3.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let nodes = GridFunction::uniform_nodes(3.0, 23);
            let f = GridFunction::from_fn(nodes.clone(), |_| rng.gen_range(0.0..2.0)).unwrap();
            let p = FracParams::new(0.7, 0.5, 0.4, 3.0).unwrap();
            let v = hilfer_integral(&p, &f, x).unwrap();
            prop_assert!(v >= 0.0);
            prop_assert!(v <= f.sup_norm() * p.unit_integral(x) * (1.0 + 1e-12));
        }
    }
}
