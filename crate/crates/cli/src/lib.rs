//! Command-line front end for the `hilfer` crate: config loading, the
//! built-in worked example, and report emission.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hilfer::{FracParams, Mesh, Quadrature};

use crate::commands::{ScenarioSource, EXIT_ERROR, EXIT_OK};
use crate::config::Format;

#[derive(Debug, Parser)]
#[command(
    name = "hilfer",
    version,
    about = "Fractional Hilfer integral equations: quadrature, solvability checks, Picard solves and MNC diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    JsonLines,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::JsonLines => Format::JsonLines,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// TOML run configuration
    pub config: Option<PathBuf>,
    /// use the built-in worked example instead of a config file
    #[arg(long)]
    pub paper_example: bool,
    /// replace the standard Γ_k(γ)
    #[arg(long, value_name = "VALUE")]
    pub gamma_k_override: Option<f64>,
    /// replace (T^ρ - 1)^(γ/k) in κ
    #[arg(long, value_name = "VALUE")]
    pub endpoint_factor_override: Option<f64>,
    /// radius whose admissibility is checked
    #[arg(long)]
    pub r0: Option<f64>,
    /// trace format
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// directory for trace files (default: traces go to stdout)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// print the effective configuration as TOML and exit
    #[arg(long)]
    pub dump_config: bool,
}

impl ScenarioArgs {
    fn source(&self) -> ScenarioSource {
        ScenarioSource {
            config: self.config.clone(),
            paper_example: self.paper_example,
            gamma_k_override: self.gamma_k_override,
            endpoint_factor_override: self.endpoint_factor_override,
            r0: self.r0,
            format: self.format.map(Into::into),
            out: self.out.clone(),
            ..ScenarioSource::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Γ_k(z) by the identity and by the defining integral
    GammaK {
        /// deformation parameter, 0 < k ≤ 1
        #[arg(allow_negative_numbers = true)]
        k: f64,
        /// argument, z > 0
        #[arg(allow_negative_numbers = true)]
        z: f64,
        /// report the integral value as the primary value
        #[arg(long)]
        integral: bool,
        /// tolerance of the integral method
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// the fractional integral of an expression in `x`
    FracInt {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// deformation parameter, 0 < k < 1
        #[arg(long, required_unless_present_any = ["config", "paper_example"])]
        k: Option<f64>,
        /// power in the kernel, 0 < ρ < 1
        #[arg(long, required_unless_present_any = ["config", "paper_example"])]
        rho: Option<f64>,
        /// order, 0 < γ < 1
        #[arg(long, required_unless_present_any = ["config", "paper_example"])]
        gamma: Option<f64>,
        /// right end T of the interval [1, T]
        #[arg(long, required_unless_present_any = ["config", "paper_example"])]
        t_max: Option<f64>,
        /// integrand, a function of `x`
        #[arg(long)]
        expr: String,
        /// evaluation points
        #[arg(long = "x", value_delimiter = ',', required = true)]
        xs: Vec<f64>,
        /// quadrature panels (default: from the config, else 1024)
        #[arg(long)]
        panels: Option<usize>,
    },
    /// solvability certificates
    Check {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Picard iteration from a constant seed
    Solve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// constant value of the starting function
        #[arg(long, allow_negative_numbers = true)]
        seed_value: Option<f64>,
    },
    /// sampled Darbo iteration and MNC contraction checks
    MncDemo {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// RNG seed of the ensemble and the convex combinations
        #[arg(long)]
        rng_seed: Option<u64>,
    },
    /// check, solve and mnc-demo on the built-in example
    PaperExample {
        /// replace the standard Γ_k(γ)
        #[arg(long, value_name = "VALUE")]
        gamma_k_override: Option<f64>,
        /// replace (T^ρ - 1)^(γ/k) in κ
        #[arg(long, value_name = "VALUE")]
        endpoint_factor_override: Option<f64>,
        /// constant value of the starting function
        #[arg(long, allow_negative_numbers = true)]
        seed_value: Option<f64>,
        /// trace format
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// directory for trace files (default: traces go to stdout)
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

/// Runs one command, writing everything to `out`; returns the exit code.
/// Errors are reported on `err` with exit code 2.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn with_scenario(
    args: &ScenarioArgs,
    source: ScenarioSource,
    out: &mut dyn Write,
    f: fn(&mut dyn Write, &config::Scenario) -> anyhow::Result<u8>,
) -> anyhow::Result<u8> {
    let (cfg, sc) = source.load()?;
    if args.dump_config {
        write!(out, "{}", cfg.to_toml())?;
        return Ok(EXIT_OK);
    }
    f(out, &sc)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<u8> {
    match &cli.command {
        Command::GammaK {
            k,
            z,
            integral,
            tol,
        } => commands::gamma_k(out, *k, *z, *integral, *tol),
        Command::FracInt {
            scenario,
            k,
            rho,
            gamma,
            t_max,
            expr,
            xs,
            panels,
        } => {
            let (params, mut quad) = if scenario.config.is_some() || scenario.paper_example {
                let (_, sc) = scenario.source().load()?;
                (sc.equations[0].1.params, sc.quadrature)
            } else {
                let p = FracParams::new(k.unwrap(), rho.unwrap(), gamma.unwrap(), t_max.unwrap())?
                    .with_gamma_k_override(scenario.gamma_k_override)?;
                (p, Quadrature::default())
            };
            if let Some(n) = panels {
                quad = Quadrature {
                    panels: *n,
                    mesh: Mesh::Uniform,
                };
            }
            commands::frac_int(out, &params, expr, xs, &quad)
        }
        Command::Check { scenario } => {
            with_scenario(scenario, scenario.source(), out, commands::check)
        }
        Command::Solve {
            scenario,
            seed_value,
        } => {
            let source = ScenarioSource {
                seed_value: *seed_value,
                ..scenario.source()
            };
            with_scenario(scenario, source, out, commands::solve)
        }
        Command::MncDemo { scenario, rng_seed } => {
            let source = ScenarioSource {
                rng_seed: *rng_seed,
                ..scenario.source()
            };
            with_scenario(scenario, source, out, commands::mnc_demo)
        }
        Command::PaperExample {
            gamma_k_override,
            endpoint_factor_override,
            seed_value,
            format,
            out: dir,
        } => {
            let source = ScenarioSource {
                paper_example: true,
                gamma_k_override: *gamma_k_override,
                endpoint_factor_override: *endpoint_factor_override,
                seed_value: *seed_value,
                format: format.map(Into::into),
                out: dir.clone(),
                ..ScenarioSource::default()
            };
            let (_, sc) = source.load()?;
            commands::paper_example(out, &sc)
        }
    }
}
