use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hilfer::equation::EquationSpec;
use hilfer::frac_integral::ProductRule;
use hilfer::mnc::{
    certificate_inequality_check, contraction_steps, darbo_iterate, mnc_axiom_checks,
    random_ensemble, DarboTrace, Tolerance,
};
use hilfer::solvability::{certify, Admissibility, RadiusCertificate};
use hilfer::solver::{solve_with, SolveReport};
use hilfer::special::{k_gamma, k_gamma_integral};
use hilfer::{
    ContractionCertificate, EquationOperator, Expr, FracParams, FunctionEnsemble, GridFunction,
    Quadrature,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig, Scenario, SeedKind};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 2;
pub const EXIT_CERTIFICATE: u8 = 3;
pub const EXIT_NONCONVERGENCE: u8 = 4;

/// Where a scenario comes from and the flag overrides applied on top.
#[derive(Debug, Clone, Default)]
pub struct ScenarioSource {
    pub config: Option<PathBuf>,
    pub paper_example: bool,
    pub gamma_k_override: Option<f64>,
    pub endpoint_factor_override: Option<f64>,
    pub r0: Option<f64>,
    pub seed_value: Option<f64>,
    pub rng_seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl ScenarioSource {
    pub fn load(&self) -> Result<(RunConfig, Scenario)> {
        let mut cfg = match (&self.config, self.paper_example) {
            (Some(_), true) => bail!("give either a config file or --paper-example, not both"),
            (None, false) => bail!("no scenario: pass a config file or --paper-example"),
            (None, true) => RunConfig::paper_example(),
            (Some(path), false) => {
                let src = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                RunConfig::from_toml(&src)
                    .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?
                    .0
            }
        };
        if self.gamma_k_override.is_some() {
            cfg.gamma_k_override = self.gamma_k_override;
        }
        if self.endpoint_factor_override.is_some() {
            cfg.check.endpoint_factor_override = self.endpoint_factor_override;
        }
        if self.r0.is_some() {
            cfg.check.r0 = self.r0;
        }
        if let Some(v) = self.seed_value {
            cfg.solver.seed_value = v;
        }
        if let Some(s) = self.rng_seed {
            cfg.mnc.seed = s;
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        if let Some(o) = &self.out {
            cfg.output.path = Some(o.display().to_string());
        }
        let scenario = cfg.validate(None).map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok((cfg, scenario))
    }
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string(value)?)?;
    Ok(())
}

pub fn gamma_k(
    out: &mut dyn Write,
    k: f64,
    z: f64,
    integral_primary: bool,
    tol: f64,
) -> Result<u8> {
    let id = k_gamma(k, z)?;
    let int = k_gamma_integral(k, z, tol)?;
    let diff = (id.value - int.value).abs();
    writeln!(out, "identity  {:.15e}", id.value)?;
    writeln!(
        out,
        "integral  {:.15e}  (estimated error {:.1e})",
        int.value, int.estimated_abs_error
    )?;
    writeln!(out, "difference {diff:.3e}")?;
    let primary = if integral_primary { &int } else { &id };
    emit_json(
        out,
        &json!({
            "record": "gamma_k",
            "k": k,
            "z": z,
            "value": primary.value,
            "method": if integral_primary { "integral" } else { "identity" },
            "identity": id.value,
            "integral": int.value,
            "integral_estimated_abs_error": int.estimated_abs_error,
            "difference": diff,
        }),
    )?;
    Ok(EXIT_OK)
}

pub fn frac_int(
    out: &mut dyn Write,
    params: &FracParams,
    expr: &str,
    xs: &[f64],
    quad: &Quadrature,
) -> Result<u8> {
    let e = Expr::parse(expr).with_context(|| format!("parsing {expr:?}"))?;
    if !e.is_free_of_a() {
        bail!("the integrand is a function of x only; `a` is not available here");
    }
    writeln!(out, "x,value")?;
    let mut rows = Vec::new();
    for &x in xs {
        if !(1.0..=params.t_max()).contains(&x) {
            bail!("x = {x} lies outside [1, {}]", params.t_max());
        }
        let v = ProductRule::new(params, x, quad)?.try_apply(|t| {
            e.eval(t, 0.0)
                .map_err(|err| anyhow::anyhow!("evaluating the integrand at t = {t}: {err}"))
        })?;
        writeln!(out, "{x:?},{v:?}")?;
        rows.push(json!({"x": x, "value": v}));
    }
    emit_json(
        out,
        &json!({"record": "frac_int", "expr": expr, "values": rows}),
    )?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateRecord {
    pub record: &'static str,
    pub equation: String,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub kappa: f64,
    pub threshold: f64,
    pub selfmap_interval: Option<(f64, f64)>,
    pub gamma_k_used: f64,
    pub gamma_k_standard: f64,
    pub gamma_k_overridden: bool,
    pub endpoint_factor_used: f64,
    pub endpoint_factor_standard: f64,
    pub endpoint_factor_overridden: bool,
    pub passes: bool,
    pub r0: Option<f64>,
    pub factor_at_r0: Option<f64>,
    pub admissibility: Option<&'static str>,
    pub maps_ball_into_itself: Option<bool>,
}

fn admissibility_name(a: Admissibility) -> &'static str {
    match a {
        Admissibility::Admitted => "admitted",
        Admissibility::Boundary => "boundary",
        Admissibility::Rejected => "rejected",
    }
}

fn certificate_record(
    name: &str,
    eq: &EquationSpec,
    cert: &RadiusCertificate,
    r0: Option<f64>,
) -> Result<CertificateRecord> {
    let p = &eq.params;
    let standard = k_gamma(p.k(), p.gamma())?.value;
    let endpoint = (p.t_max().powf(p.rho()) - 1.0).powf(p.exponent());
    Ok(CertificateRecord {
        record: "certificate",
        equation: name.to_string(),
        c1: cert.c1,
        c2: cert.c2,
        c3: cert.c3,
        kappa: cert.kappa,
        threshold: cert.r0_max_contraction,
        selfmap_interval: cert.r0_selfmap_interval,
        gamma_k_used: cert.gamma_k_used,
        gamma_k_standard: standard,
        gamma_k_overridden: cert.gamma_k_overridden,
        endpoint_factor_used: cert.endpoint_factor_used,
        endpoint_factor_standard: endpoint,
        endpoint_factor_overridden: cert.endpoint_factor_overridden,
        passes: cert.passes(),
        r0,
        factor_at_r0: r0.map(|r| cert.contraction_factor(r)),
        admissibility: r0.map(|r| admissibility_name(cert.admissibility(r))),
        maps_ball_into_itself: r0.map(|r| cert.maps_ball_into_itself(r)),
    })
}

/// Certificates of every equation in the scenario.
pub fn certificates(sc: &Scenario) -> Result<Vec<(CertificateRecord, RadiusCertificate)>> {
    sc.equations
        .iter()
        .map(|(name, eq)| {
            let cert = certify(eq, &sc.solvability).with_context(|| format!("equation {name}"))?;
            Ok((certificate_record(name, eq, &cert, sc.r0)?, cert))
        })
        .collect()
}

/// True when the certificate passes and, if a radius is set, the radius is
/// strictly admitted and the ball is mapped into itself.
pub fn record_ok(r: &CertificateRecord) -> bool {
    r.passes
        && r.admissibility.is_none_or(|a| a == "admitted")
        && r.maps_ball_into_itself.unwrap_or(true)
}

pub fn check(out: &mut dyn Write, sc: &Scenario) -> Result<u8> {
    let certs = certificates(sc)?;
    let mut all_ok = true;
    for (rec, _) in &certs {
        writeln!(out, "equation {}", rec.equation)?;
        writeln!(
            out,
            "  c1, c2, c3            {}, {}, {}",
            rec.c1, rec.c2, rec.c3
        )?;
        writeln!(out, "  kappa                 {:.8}", rec.kappa)?;
        writeln!(out, "  threshold  r0 <       {:.6}", rec.threshold)?;
        match rec.selfmap_interval {
            Some((lo, hi)) => writeln!(out, "  self-map interval     ({lo}, {hi:.6}]")?,
            None => writeln!(out, "  self-map interval     empty")?,
        }
        if rec.gamma_k_overridden {
            writeln!(
                out,
                "  Gamma_k               {} (override; the standard value is {:.10})",
                rec.gamma_k_used, rec.gamma_k_standard
            )?;
        } else {
            writeln!(out, "  Gamma_k               {:.10}", rec.gamma_k_used)?;
        }
        if rec.endpoint_factor_overridden {
            writeln!(
                out,
                "  (T^rho-1)^(gamma/k)   {} (override; the computed value is {:.10})",
                rec.endpoint_factor_used, rec.endpoint_factor_standard
            )?;
        }
        if let (Some(r0), Some(f), Some(a)) = (rec.r0, rec.factor_at_r0, rec.admissibility) {
            writeln!(out, "  r0 = {r0}             factor {f:.6}, {a}")?;
        }
        writeln!(
            out,
            "  certificate           {}",
            if record_ok(rec) { "passes" } else { "FAILS" }
        )?;
        all_ok &= record_ok(rec);
    }
    if let Some(r0) = sc.r0 {
        let eps = certs
            .iter()
            .map(|(_, c)| c.contraction_factor(r0))
            .fold(f64::NEG_INFINITY, f64::max);
        writeln!(out, "epsilon (largest factor at r0) {eps:.6}")?;
    }
    for (rec, _) in &certs {
        emit_json(out, rec)?;
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_CERTIFICATE })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub record: &'static str,
    pub equation: String,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub measured_rate: f64,
    pub solution_sup_norm: f64,
    pub warnings: Vec<String>,
}

/// Trace sink: a directory of files, or stdout with a header per block.
fn trace_writer<'a>(
    sc: &Scenario,
    out: &'a mut dyn Write,
    stem: &str,
) -> Result<Box<dyn Write + 'a>> {
    match &sc.output.path {
        Some(dir) => {
            let ext = match sc.output.format {
                Format::Csv => "csv",
                Format::JsonLines => "jsonl",
            };
            fs::create_dir_all(dir).with_context(|| format!("creating {dir}"))?;
            let path = Path::new(dir).join(format!("{stem}.{ext}"));
            let file =
                fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            Ok(Box::new(std::io::BufWriter::new(file)))
        }
        None => {
            writeln!(out, "# {stem}")?;
            Ok(Box::new(out))
        }
    }
}

/// Rows keyed by the step `p`; missing cells are empty in CSV and `null` in JSON.
fn write_rows(
    w: &mut dyn Write,
    format: Format,
    columns: &[&str],
    rows: &[(usize, Vec<Option<f64>>)],
) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "p,{}", columns.join(","))?;
            for (p, row) in rows {
                let cells: Vec<String> = row
                    .iter()
                    .map(|c| c.map_or(String::new(), |v| format!("{v:?}")))
                    .collect();
                writeln!(w, "{p},{}", cells.join(","))?;
            }
        }
        Format::JsonLines => {
            for (p, row) in rows {
                let mut obj = serde_json::Map::new();
                obj.insert("p".into(), json!(p));
                obj.extend(
                    columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), json!(v))),
                );
                writeln!(w, "{}", serde_json::Value::Object(obj))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run_solve(sc: &Scenario) -> Result<Vec<(String, SolveReport)>> {
    let nodes = GridFunction::uniform_nodes(sc.equations[0].1.params.t_max(), sc.nodes);
    let seed = GridFunction::constant(nodes.clone(), sc.seed_value)?;
    sc.equations
        .iter()
        .map(|(name, eq)| {
            let op = EquationOperator::new(eq, &nodes, &sc.quadrature)?;
            Ok((name.clone(), solve_with(&op, &seed, &sc.solve)?))
        })
        .collect()
}

pub fn solve(out: &mut dyn Write, sc: &Scenario) -> Result<u8> {
    let reports = run_solve(sc)?;
    let mut all = true;
    for (name, r) in &reports {
        let rows: Vec<(usize, Vec<Option<f64>>)> =
            std::iter::once((0, vec![None, None, Some(sc.seed_value.abs())]))
                .chain(r.trace.iter().map(|t| {
                    (
                        t.p,
                        vec![Some(t.step_sup), Some(t.residual), Some(t.sup_norm)],
                    )
                }))
                .collect();
        let mut w = trace_writer(sc, out, &format!("solve_{name}"))?;
        write_rows(
            &mut *w,
            sc.output.format,
            &["step_sup", "residual", "sup_norm"],
            &rows,
        )?;
        drop(w);
        all &= r.converged;
    }
    for (name, r) in &reports {
        emit_json(
            out,
            &SolveSummary {
                record: "solve",
                equation: name.clone(),
                converged: r.converged,
                iterations: r.iterations,
                residual: r.residual,
                measured_rate: r.measured_rate,
                solution_sup_norm: r.solution.sup_norm(),
                warnings: r.warnings.clone(),
            },
        )?;
    }
    Ok(if all { EXIT_OK } else { EXIT_NONCONVERGENCE })
}

pub fn seed_ensemble(sc: &Scenario, nodes: &[f64]) -> Result<FunctionEnsemble> {
    let m = &sc.mnc;
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
    Ok(match m.seed_kind {
        SeedKind::Lipschitz => random_ensemble(
            nodes,
            m.ensemble_size,
            m.seed_radius,
            Some(m.seed_lipschitz),
            &mut rng,
        )?,
        SeedKind::Rough => random_ensemble(nodes, m.ensemble_size, m.seed_radius, None, &mut rng)?,
        SeedKind::Constant => {
            let members = (0..m.ensemble_size)
                .map(|i| {
                    let c = if m.ensemble_size == 1 {
                        0.0
                    } else {
                        m.seed_radius * (2.0 * i as f64 / (m.ensemble_size - 1) as f64 - 1.0)
                    };
                    GridFunction::constant(nodes.to_vec(), c)
                })
                .collect::<hilfer::Result<Vec<_>>>()?;
            FunctionEnsemble::new(members)?
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MncSummary {
    pub record: &'static str,
    pub equation: String,
    pub factor: Option<f64>,
    pub certified: bool,
    pub max_ratio: Option<f64>,
    pub step3_pass: Option<bool>,
    pub certificate_inequality_pass: Option<bool>,
    pub monotonicity_slack: f64,
    pub convexity_slack: f64,
    pub axioms_pass: bool,
}

pub fn run_mnc(sc: &Scenario) -> Result<Vec<(MncSummary, DarboTrace)>> {
    let t_max = sc.equations[0].1.params.t_max();
    let nodes = GridFunction::uniform_nodes(t_max, sc.nodes);
    let seed = seed_ensemble(sc, &nodes)?;
    let certs = certificates(sc)?;

    // axiom checks on the seed: a prefix against the whole ensemble
    let half = FunctionEnsemble::new(seed.members()[..seed.len().div_ceil(2)].to_vec())?;
    let axioms = mnc_axiom_checks(&half, &seed, sc.mnc.mix, &sc.darbo.deltas, 1e-12)?;
    let mono = axioms.monotonicity.expect("a prefix is a sub-list");

    let mut results = Vec::new();
    for ((name, eq), (rec, cert)) in sc.equations.iter().zip(&certs) {
        let op = EquationOperator::new(eq, &nodes, &sc.quadrature)?;
        let trace = darbo_iterate(|f: &GridFunction| op.apply(f), &seed, &sc.darbo)?;
        let certified = record_ok(rec) && sc.r0.is_some();
        let factor = sc.r0.map(|r| cert.contraction_factor(r));
        let (step3, ineq) = match factor {
            Some(f) if certified && f > 0.0 && f < 1.0 => {
                let steps =
                    contraction_steps(&trace, f, sc.mnc.slack, Tolerance::EstimatorResolution);
                let cc = ContractionCertificate::from_factor(f)?;
                let ineq = certificate_inequality_check(
                    &cc,
                    &trace,
                    sc.mnc.slack,
                    Tolerance::EstimatorResolution,
                );
                (
                    Some(steps.iter().all(|s| s.passed)),
                    Some(ineq.iter().all(|s| s.passed)),
                )
            }
            _ => (None, None),
        };
        let max_ratio = trace.ratios().into_iter().flatten().reduce(f64::max);
        results.push((
            MncSummary {
                record: "mnc",
                equation: name.clone(),
                factor,
                certified,
                max_ratio,
                step3_pass: step3,
                certificate_inequality_pass: ineq,
                monotonicity_slack: mono.slack,
                convexity_slack: axioms.convexity.slack,
                axioms_pass: mono.passed && axioms.convexity.passed,
            },
            trace,
        ));
    }
    Ok(results)
}

pub fn mnc_demo(out: &mut dyn Write, sc: &Scenario) -> Result<u8> {
    let results = run_mnc(sc)?;
    let mut ok = true;
    for (summary, trace) in &results {
        let ratios = trace.ratios();
        let rows: Vec<(usize, Vec<Option<f64>>)> = trace
            .estimates
            .iter()
            .enumerate()
            .map(|(p, e)| {
                let ratio = if p == 0 { None } else { ratios[p - 1] };
                (p, vec![Some(e.mu0), Some(e.hausdorff), ratio])
            })
            .collect();
        let mut w = trace_writer(sc, out, &format!("mnc_{}", summary.equation))?;
        write_rows(
            &mut *w,
            sc.output.format,
            &["mu0", "hausdorff", "ratio"],
            &rows,
        )?;
        drop(w);
        ok &= summary.step3_pass != Some(false)
            && summary.certificate_inequality_pass != Some(false)
            && summary.axioms_pass;
    }
    for (summary, _) in &results {
        if !summary.certified {
            writeln!(
                out,
                "# {}: no certified radius, trace is diagnostic only",
                summary.equation
            )?;
        }
        emit_json(out, summary)?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_CERTIFICATE })
}

/// `check`, `solve` and `mnc-demo` in sequence; the first nonzero exit code wins.
pub fn paper_example(out: &mut dyn Write, sc: &Scenario) -> Result<u8> {
    let mut code = EXIT_OK;
    for step in [check, solve, mnc_demo] {
        let c = step(out, sc)?;
        if code == EXIT_OK {
            code = c;
        }
    }
    Ok(code)
}
