//! One Hilfer integral equation `α = F(x, α) + Ψ(x, α) · J[G(·, α(·))]`,
//! the uncoupled two-equation system, and the operator `𝒟`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::frac_integral::{FracParams, GridFunction, HilferMatrix, Quadrature};

/// A nonlinearity `f(x, a)` with its declared Lipschitz constant in `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub expr: Expr,
    pub lipschitz: f64,
    pub zero_at_zero: bool,
}

impl Nonlinearity {
    pub fn new(expr: Expr, lipschitz: f64, zero_at_zero: bool) -> Result<Self> {
        if !(lipschitz >= 0.0) || !lipschitz.is_finite() {
            return Err(Error::Validation(format!(
                "Lipschitz constant must be finite and >= 0, got {lipschitz}"
            )));
        }
        Ok(Self {
            expr,
            lipschitz,
            zero_at_zero,
        })
    }

    pub fn parse(src: &str, lipschitz: f64, zero_at_zero: bool) -> Result<Self> {
        Self::new(Expr::parse(src)?, lipschitz, zero_at_zero)
    }

    pub fn eval(&self, x: f64, a: f64) -> std::result::Result<f64, crate::expr::ExprError> {
        self.expr.eval(x, a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationSpec {
    pub params: FracParams,
    /// additive term `F`
    pub f: Nonlinearity,
    /// multiplier `Ψ`
    pub psi: Nonlinearity,
    /// integrand `G`
    pub g: Nonlinearity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub eq_alpha: EquationSpec,
    pub eq_beta: EquationSpec,
}

impl SystemSpec {
    pub fn new(eq_alpha: EquationSpec, eq_beta: EquationSpec) -> Result<Self> {
        if eq_alpha.params != eq_beta.params {
            return Err(Error::Validation(
                "both equations of a system must share the same parameters".into(),
            ));
        }
        Ok(Self { eq_alpha, eq_beta })
    }
}

/// `𝒟` on a fixed node set, with the product-integration weights precomputed.
#[derive(Debug, Clone)]
pub struct EquationOperator {
    eq: EquationSpec,
    matrix: HilferMatrix,
}

impl EquationOperator {
    pub fn new(eq: &EquationSpec, nodes: &[f64], quad: &Quadrature) -> Result<Self> {
        let matrix = HilferMatrix::new(&eq.params, nodes, quad)?;
        Ok(Self {
            eq: eq.clone(),
            matrix,
        })
    }

    pub fn equation(&self) -> &EquationSpec {
        &self.eq
    }

    pub fn nodes(&self) -> &[f64] {
        self.matrix.nodes()
    }

    /// `(𝒟α)(x_i) = F(x_i, α_i) + Ψ(x_i, α_i) · J[G(·, α(·))](x_i)`.
    pub fn apply(&self, alpha: &GridFunction) -> Result<GridFunction> {
        let out = self.apply_values(alpha)?;
        alpha.with_values(out)
    }

    /// [`apply`](Self::apply) as raw node values, which may overflow to
    /// non-finite numbers.
    pub fn apply_values(&self, alpha: &GridFunction) -> Result<Vec<f64>> {
        let nodes = self.matrix.nodes();
        if alpha.nodes() != nodes {
            return Err(Error::domain(
                "operator and argument use different node sets",
            ));
        }
        let g_values = eval_on_nodes(&self.eq.g, "G", nodes, alpha.values())?;
        let integral = self.matrix.apply(&g_values);
        let mut out = Vec::with_capacity(nodes.len());
        for ((&x, &a), j) in nodes.iter().zip(alpha.values()).zip(integral) {
            let f = self.eq.f.eval(x, a).map_err(|source| Error::Evaluation {
                what: "F",
                x,
                source,
            })?;
            let psi = self.eq.psi.eval(x, a).map_err(|source| Error::Evaluation {
                what: "Ψ",
                x,
                source,
            })?;
            out.push(f + psi * j);
        }
        Ok(out)
    }

    /// Applies the operator to every member; order of the output follows the input.
    pub fn apply_all(&self, members: &[GridFunction]) -> Result<Vec<GridFunction>> {
        members.par_iter().map(|m| self.apply(m)).collect()
    }
}

fn eval_on_nodes(
    n: &Nonlinearity,
    what: &'static str,
    nodes: &[f64],
    values: &[f64],
) -> Result<Vec<f64>> {
    nodes
        .iter()
        .zip(values)
        .map(|(&x, &a)| {
            n.eval(x, a)
                .map_err(|source| Error::Evaluation { what, x, source })
        })
        .collect()
}

/// `𝒟α` sampled on `alpha`'s nodes with the default quadrature.
pub fn apply_operator(eq: &EquationSpec, alpha: &GridFunction) -> Result<GridFunction> {
    apply_operator_with(eq, alpha, &Quadrature::default())
}

pub fn apply_operator_with(
    eq: &EquationSpec,
    alpha: &GridFunction,
    quad: &Quadrature,
) -> Result<GridFunction> {
    EquationOperator::new(eq, alpha.nodes(), quad)?.apply(alpha)
}

/// Largest sampled difference quotient `|f(x,u) - f(x,v)| / |u - v|` over
/// `x ∈ [1, t_max]`, `u, v ∈ [-r0, r0]`. About `probes` evaluations are spent:
/// a `√probes × √probes` lattice, quotients between neighbouring `u` values.
/// A lower bound for the true constant on that box.
pub fn estimate_lipschitz(n: &Nonlinearity, t_max: f64, r0: f64, probes: usize) -> Result<f64> {
    if !(r0 > 0.0) {
        return Err(Error::domain(format!("r0 must be positive, got {r0}")));
    }
    if probes < 2 {
        return Err(Error::domain("need at least two probes"));
    }
    let nx = ((probes as f64).sqrt().floor() as usize).max(1);
    let nu = (probes / nx).max(2);
    let xs: Vec<f64> = if nx == 1 {
        vec![1.0]
    } else {
        (0..nx)
            .map(|i| 1.0 + (t_max - 1.0) * i as f64 / (nx - 1) as f64)
            .collect()
    };
    let us: Vec<f64> = (0..nu)
        .map(|j| -r0 + 2.0 * r0 * j as f64 / (nu - 1) as f64)
        .collect();
    let mut best = 0.0f64;
    for &x in &xs {
        let mut prev: Option<(f64, f64)> = None;
        for &u in &us {
            let v = n.eval(x, u).map_err(|source| Error::Evaluation {
                what: "nonlinearity",
                x,
                source,
            })?;
            if let Some((pu, pv)) = prev {
                best = best.max(((v - pv) / (u - pu)).abs());
            }
            prev = Some((u, v));
        }
    }
    Ok(best)
}

/// True iff `|F(x,0)|, |Ψ(x,0)|, |G(x,0)| ≤ 1e-12` at `probes` points of `[1, T]`.
/// Evaluation failures count as violations.
pub fn check_zero_conditions(eq: &EquationSpec, probes: usize) -> bool {
    let probes = probes.max(2);
    let t_max = eq.params.t_max();
    (0..probes).all(|i| {
        let x = 1.0 + (t_max - 1.0) * i as f64 / (probes - 1) as f64;
        [&eq.f, &eq.psi, &eq.g]
            .iter()
            .all(|n| matches!(n.eval(x, 0.0), Ok(v) if v.abs() <= 1e-12))
    })
}

/// The α-equation of the worked example on `[1, 3]`:
/// `F = |a|/6`, `Ψ = |a|`, `G = a/(3 + log x)`, `k = ρ = 1/3`, `γ = 2/3`.
pub fn example_alpha_equation(gamma_k_override: Option<f64>) -> Result<EquationSpec> {
    example_equation("a/(3+log(x))", gamma_k_override)
}

/// The β-equation of the worked example: as the α-equation with `G = a/(2 + x)`.
pub fn example_beta_equation(gamma_k_override: Option<f64>) -> Result<EquationSpec> {
    example_equation("a/(2+x)", gamma_k_override)
}

pub fn example_system(gamma_k_override: Option<f64>) -> Result<SystemSpec> {
    SystemSpec::new(
        example_alpha_equation(gamma_k_override)?,
        example_beta_equation(gamma_k_override)?,
    )
}

fn example_equation(g: &str, gamma_k_override: Option<f64>) -> Result<EquationSpec> {
    let params = FracParams::new(1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 3.0)?
        .with_gamma_k_override(gamma_k_override)?;
    Ok(EquationSpec {
        params,
        f: Nonlinearity::parse("abs(a)/6", 1.0 / 6.0, true)?,
        psi: Nonlinearity::parse("abs(a)", 1.0, true)?,
        g: Nonlinearity::parse(g, 1.0 / 3.0, true)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_mapped_to_zero() {
        let eq = example_alpha_equation(None).unwrap();
        let zero = GridFunction::constant(GridFunction::uniform_nodes(3.0, 31), 0.0).unwrap();
        let img = apply_operator(&eq, &zero).unwrap();
        assert!(img.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reduces_to_unit_integral() {
        let params = FracParams::new(0.4, 0.7, 0.3, 2.0).unwrap();
        let eq = EquationSpec {
            params,
            f: Nonlinearity::parse("0", 0.0, true).unwrap(),
            psi: Nonlinearity::parse("1", 0.0, false).unwrap(),
            g: Nonlinearity::parse("1", 0.0, false).unwrap(),
        };
        let alpha = GridFunction::constant(GridFunction::uniform_nodes(2.0, 21), 0.3).unwrap();
        let img = apply_operator(&eq, &alpha).unwrap();
        for (&x, &v) in img.nodes().iter().zip(img.values()) {
            let exact = params.unit_integral(x);
            assert!((v - exact).abs() <= 1e-12 * exact.max(1e-300), "x={x}");
        }
    }

    #[test]
    fn evaluation_errors_carry_position() {
        let params = FracParams::new(0.5, 0.5, 0.5, 2.0).unwrap();
        let eq = EquationSpec {
            params,
            f: Nonlinearity::parse("log(a)", 1.0, false).unwrap(),
            psi: Nonlinearity::parse("0", 0.0, true).unwrap(),
            g: Nonlinearity::parse("0", 0.0, true).unwrap(),
        };
        let nodes = GridFunction::uniform_nodes(2.0, 5);
        let alpha = GridFunction::new(nodes, vec![1.0, 1.0, -1.0, 1.0, 1.0]).unwrap();
        match apply_operator(&eq, &alpha) {
            Err(Error::Evaluation { what, x, .. }) => {
                assert_eq!(what, "F");
                assert_eq!(x, 1.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lipschitz_estimates() {
        let n = Nonlinearity::parse("a/6", 1.0 / 6.0, true).unwrap();
        let est = estimate_lipschitz(&n, 3.0, 1.0, 400).unwrap();
        assert!(est <= 1.0 / 6.0 + 1e-12 && est > 1.0 / 6.0 - 1e-9);

        let n = Nonlinearity::parse("a/(3+log(x))", 1.0 / 3.0, true).unwrap();
        let est = estimate_lipschitz(&n, 3.0, 1.0, 400).unwrap();
        assert!(est <= 1.0 / 3.0 + 1e-12 && est > 1.0 / 3.0 - 1e-9);

        let n = Nonlinearity::parse("x^2 + 4", 0.0, false).unwrap();
        assert_eq!(estimate_lipschitz(&n, 3.0, 1.0, 100).unwrap(), 0.0);

        assert!(estimate_lipschitz(&n, 3.0, 0.0, 100).is_err());
        assert!(estimate_lipschitz(&n, 3.0, 1.0, 1).is_err());
    }

    #[test]
    fn zero_conditions() {
        assert!(check_zero_conditions(
            &example_alpha_equation(None).unwrap(),
            50
        ));
        assert!(check_zero_conditions(
            &example_beta_equation(None).unwrap(),
            50
        ));
        let mut eq = example_alpha_equation(None).unwrap();
        eq.f = Nonlinearity::parse("a+1", 1.0, false).unwrap();
        assert!(!check_zero_conditions(&eq, 10));
        eq.f = Nonlinearity::parse("x*a", 3.0, true).unwrap();
        assert!(check_zero_conditions(&eq, 10));
        eq.f = Nonlinearity::parse("log(a)", 3.0, true).unwrap();
        assert!(!check_zero_conditions(&eq, 10));
    }

    #[test]
    fn system_requires_shared_params() {
        let a = example_alpha_equation(None).unwrap();
        let b = example_beta_equation(Some(2.4047)).unwrap();
        assert!(SystemSpec::new(a, b).is_err());
    }
}
