//! TOML run configuration.

use std::fmt;
use std::ops::Range;

use hilfer::equation::EquationSpec;
use hilfer::expr::ExprError;
use hilfer::mnc::DarboConfig;
use hilfer::{
    Error as CoreError, Expr, FracParams, Mesh, Nonlinearity, Quadrature, SolvabilityOptions,
    SolveOptions,
};
use serde::{Deserialize, Serialize};
use toml::Spanned;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// replaces the standard `Γ_k(γ)` in the operator and the certificate
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_k_override: Option<f64>,
    pub params: ParamsSection,
    pub equations: Vec<EquationSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub mnc: MncSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub k: f64,
    pub rho: f64,
    pub gamma: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSection {
    pub name: String,
    pub f: TermSection,
    pub psi: TermSection,
    pub g: TermSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    pub expr: Spanned<String>,
    pub lipschitz: f64,
    #[serde(default = "yes")]
    pub zero_at_zero: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub nodes: usize,
    pub seed_value: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            nodes: 101,
            seed_value: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshKind {
    Uniform,
    Graded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    pub panels: usize,
    pub mesh: MeshKind,
    pub grading_exponent: f64,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            panels: 1024,
            mesh: MeshKind::Uniform,
            grading_exponent: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSection {
    /// radius whose admissibility is reported
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    /// replaces `(T^ρ - 1)^{γ/k}` in `κ`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint_factor_override: Option<f64>,
    pub slack: f64,
    pub probes: usize,
    pub validation_radius: f64,
}

impl Default for CheckSection {
    fn default() -> Self {
        let d = SolvabilityOptions::default();
        Self {
            r0: None,
            endpoint_factor_override: None,
            slack: d.slack,
            probes: d.probes,
            validation_radius: d.validation_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedKind {
    /// clipped random walks with slope at most `seed_lipschitz`
    Lipschitz,
    /// independent uniform node values
    Rough,
    /// constant functions
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MncSection {
    pub deltas: Vec<f64>,
    pub ensemble_size: usize,
    pub p_max: usize,
    pub seed: u64,
    pub convex_samples: usize,
    pub seed_kind: SeedKind,
    pub seed_radius: f64,
    pub seed_lipschitz: f64,
    /// mixing weight of the convexity axiom check
    pub mix: f64,
    /// allowance on the per-step contraction inequality
    pub slack: f64,
}

impl Default for MncSection {
    fn default() -> Self {
        Self {
            deltas: vec![0.4, 0.2, 0.1, 0.05],
            ensemble_size: 30,
            p_max: 8,
            seed: 42,
            convex_samples: 10,
            seed_kind: SeedKind::Lipschitz,
            seed_radius: 0.1,
            seed_lipschitz: 1.0,
            mix: 0.5,
            slack: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub format: Format,
    /// directory for trace files; traces go to stdout when unset
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// A load or validation failure, located by field path and, when the
/// source text is known, by line and column.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub line_col: Option<(usize, usize)>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`", self.path)?;
        if let Some((l, c)) = self.line_col {
            write!(f, " (line {l}, column {c})")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn line_col(src: &str, byte: usize) -> (usize, usize) {
    let before = &src[..byte.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Everything a command needs, validated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub equations: Vec<(String, EquationSpec)>,
    pub quadrature: Quadrature,
    pub solve: SolveOptions,
    pub solvability: SolvabilityOptions,
    pub nodes: usize,
    pub seed_value: f64,
    pub r0: Option<f64>,
    pub darbo: DarboConfig,
    pub mnc: MncSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Parses and validates; errors carry the position of the offending field.
    pub fn from_toml(src: &str) -> Result<(Self, Scenario), ConfigError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| ConfigError {
            path: "<document>".into(),
            line_col: e.span().map(|s| line_col(src, s.start)),
            message: e.message().trim().to_string(),
        })?;
        let scenario = cfg.validate(Some(src))?;
        Ok((cfg, scenario))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("RunConfig always serializes")
    }

    /// The worked example: `F = |a|/6`, `Ψ = |a|`, `G = a/(3 + ln x)` and
    /// `G = a/(2 + x)`, with `k = ρ = 1/3`, `γ = 2/3`, `T = 3`, `r₀ = 0.83`.
    pub fn paper_example() -> Self {
        let term = |e: &str, l: f64| TermSection {
            expr: Spanned::new(0..0, e.to_string()),
            lipschitz: l,
            zero_at_zero: true,
        };
        let eq = |name: &str, g: &str| EquationSection {
            name: name.into(),
            f: term("abs(a)/6", 1.0 / 6.0),
            psi: term("abs(a)", 1.0),
            g: term(g, 1.0 / 3.0),
        };
        Self {
            gamma_k_override: None,
            params: ParamsSection {
                k: 1.0 / 3.0,
                rho: 1.0 / 3.0,
                gamma: 2.0 / 3.0,
                t_max: 3.0,
            },
            equations: vec![eq("alpha", "a/(3+log(x))"), eq("beta", "a/(2+x)")],
            solver: SolverSection::default(),
            quadrature: QuadratureSection::default(),
            check: CheckSection {
                r0: Some(0.83),
                ..CheckSection::default()
            },
            mnc: MncSection::default(),
            output: OutputSection::default(),
        }
    }

    /// Checks every field against the preconditions of the module it feeds.
    pub fn validate(&self, src: Option<&str>) -> Result<Scenario, ConfigError> {
        let err = |path: &str, message: String| ConfigError {
            path: path.into(),
            line_col: None,
            message,
        };
        let core = |path: &str, e: CoreError| err(path, e.to_string());

        let p = &self.params;
        let params = FracParams::new(p.k, p.rho, p.gamma, p.t_max)
            .map_err(|e| core("params", e))?
            .with_gamma_k_override(self.gamma_k_override)
            .map_err(|e| core("gamma_k_override", e))?;

        if self.equations.is_empty() || self.equations.len() > 2 {
            return Err(err(
                "equations",
                format!(
                    "expected one or two equations, found {}",
                    self.equations.len()
                ),
            ));
        }
        let mut equations = Vec::new();
        for (i, eq) in self.equations.iter().enumerate() {
            if equations
                .iter()
                .any(|(n, _): &(String, EquationSpec)| n == &eq.name)
            {
                return Err(err(
                    &format!("equations[{i}].name"),
                    format!("duplicate name {:?}", eq.name),
                ));
            }
            let term = |name: &str, t: &TermSection| -> Result<Nonlinearity, ConfigError> {
                let path = format!("equations[{i}].{name}");
                let expr = Expr::parse(t.expr.get_ref()).map_err(|e| {
                    let offset = match &e {
                        ExprError::Syntax { offset, .. }
                        | ExprError::UnknownIdentifier { offset, .. } => Some(*offset),
                        _ => None,
                    };
                    expr_error(&path, src, t.expr.span(), offset, &e)
                })?;
                Nonlinearity::new(expr, t.lipschitz, t.zero_at_zero)
                    .map_err(|e| core(&format!("{path}.lipschitz"), e))
            };
            let spec = EquationSpec {
                params,
                f: term("f", &eq.f)?,
                psi: term("psi", &eq.psi)?,
                g: term("g", &eq.g)?,
            };
            equations.push((eq.name.clone(), spec));
        }

        let s = &self.solver;
        if !(s.tol > 0.0) {
            return Err(err(
                "solver.tol",
                format!("must be positive, got {}", s.tol),
            ));
        }
        if s.nodes < 2 {
            return Err(err(
                "solver.nodes",
                format!("need at least 2 nodes, got {}", s.nodes),
            ));
        }
        if !s.seed_value.is_finite() {
            return Err(err("solver.seed_value", "must be finite".into()));
        }

        let q = &self.quadrature;
        if q.panels == 0 {
            return Err(err("quadrature.panels", "must be positive".into()));
        }
        let mesh = match q.mesh {
            MeshKind::Uniform => Mesh::Uniform,
            MeshKind::Graded if q.grading_exponent >= 1.0 && q.grading_exponent.is_finite() => {
                Mesh::Graded {
                    exponent: q.grading_exponent,
                }
            }
            MeshKind::Graded => {
                return Err(err(
                    "quadrature.grading_exponent",
                    format!("must be at least 1, got {}", q.grading_exponent),
                ))
            }
        };
        let quadrature = Quadrature {
            panels: q.panels,
            mesh,
        };

        let c = &self.check;
        if let Some(r0) = c.r0 {
            if !(r0 > 0.0) {
                return Err(err("check.r0", format!("must be positive, got {r0}")));
            }
        }
        if let Some(e) = c.endpoint_factor_override {
            if !(e > 0.0) {
                return Err(err(
                    "check.endpoint_factor_override",
                    format!("must be positive, got {e}"),
                ));
            }
        }
        if !(c.slack >= 0.0) {
            return Err(err(
                "check.slack",
                format!("must be nonnegative, got {}", c.slack),
            ));
        }
        if c.probes < 4 {
            return Err(err(
                "check.probes",
                format!("need at least 4 probes, got {}", c.probes),
            ));
        }
        if !(c.validation_radius > 0.0) {
            return Err(err("check.validation_radius", "must be positive".into()));
        }

        let m = &self.mnc;
        if m.deltas.len() < 3 {
            return Err(err("mnc.deltas", "need at least three entries".into()));
        }
        if m.deltas.iter().any(|&d| !(d > 0.0)) || m.deltas.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(err(
                "mnc.deltas",
                "must be positive and strictly decreasing".into(),
            ));
        }
        if m.deltas[0] > p.t_max - 1.0 {
            return Err(err(
                "mnc.deltas",
                format!("largest delta exceeds T - 1 = {}", p.t_max - 1.0),
            ));
        }
        if m.ensemble_size == 0 {
            return Err(err("mnc.ensemble_size", "must be positive".into()));
        }
        if m.p_max == 0 {
            return Err(err("mnc.p_max", "must be at least 1".into()));
        }
        if !(m.seed_radius >= 0.0) || !(m.seed_lipschitz > 0.0) {
            return Err(err(
                "mnc.seed_radius",
                "radius must be nonnegative and slope bound positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&m.mix) {
            return Err(err("mnc.mix", format!("must lie in [0, 1], got {}", m.mix)));
        }
        if !(m.slack >= 0.0) {
            return Err(err("mnc.slack", "must be nonnegative".into()));
        }

        Ok(Scenario {
            equations,
            quadrature,
            solve: SolveOptions {
                tol: s.tol,
                max_iter: s.max_iter,
                radius: c.r0,
                quadrature,
            },
            solvability: SolvabilityOptions {
                gamma_k_override: self.gamma_k_override,
                endpoint_factor_override: c.endpoint_factor_override,
                slack: c.slack,
                validation_radius: c.validation_radius,
                probes: c.probes,
            },
            nodes: s.nodes,
            seed_value: s.seed_value,
            r0: c.r0,
            darbo: DarboConfig {
                p_max: m.p_max,
                convex_samples: m.convex_samples,
                deltas: m.deltas.clone(),
                seed: m.seed,
            },
            mnc: m.clone(),
            output: self.output.clone(),
        })
    }
}

fn expr_error(
    path: &str,
    src: Option<&str>,
    span: Range<usize>,
    offset: Option<usize>,
    e: &ExprError,
) -> ConfigError {
    let path = format!("{path}.expr");
    let line_col = src.filter(|_| span.end > span.start).map(|s| {
        // `+ 1` skips the opening quote of the string literal
        let at = span.start + offset.map_or(0, |o| o + 1);
        line_col(s, at.min(span.end))
    });
    ConfigError {
        path,
        line_col,
        message: e.to_string(),
    }
}
