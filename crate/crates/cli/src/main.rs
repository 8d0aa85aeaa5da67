//! `cone-ext`: closed extensions of elliptic cone operators from their indicial data.

use clap::{Parser, Subcommand, ValueEnum};
use cone_cli::acceptance::SuiteOptions;
use cone_cli::commands::{self, Coords};
use cone_cli::config::{self, TolOverrides};
use cone_cli::error::EXIT_USAGE;
use cone_cli::{models, CliError, Report};
use cone_ext::{Tolerances, C64};
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "cone-ext", version, about = "Extension calculus for cone operators with finite-dimensional cross sections")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Output::Text, global = true)]
    output: Output,
    #[command(flatten)]
    tol: TolOverrides,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, clap::Args)]
struct DomainArgs {
    /// Model file or bundled model name.
    model: String,
    /// Domain file with a "vectors" array.
    #[arg(long, conflicts_with = "vector")]
    domain: Option<String>,
    /// One spanning vector as comma-separated complex numbers, e.g. "1,1+2i".
    #[arg(long, allow_hyphen_values = true)]
    vector: Vec<String>,
    /// Coordinate system of the vectors.
    #[arg(long, value_enum)]
    coords: Option<Coords>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Boundary spectrum with partial multiplicities.
    Spectrum {
        model: String,
        /// Strip lo < Im sigma < hi instead of the weight strip.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        strip: Option<Vec<f64>>,
    },
    /// Singular chains at every point of the weight strip.
    Chains { model: String },
    /// Gram matrix of the adjoint pairing.
    Pairing {
        model: String,
        /// Also write the Gram matrix as CSV.
        #[arg(long)]
        csv: Option<String>,
    },
    /// Adjoint domain of a subspace of E(A).
    Adjoint(DomainArgs),
    /// Whether a subspace of E(A) is a selfadjoint domain.
    SelfadjointCheck(DomainArgs),
    /// Friedrichs domain of a symmetric semibounded model.
    Friedrichs { model: String },
    /// Closed-form Gram against the contour and x-space routes.
    Verify { model: String },
    /// Whether two models have the same maximal and Friedrichs domains.
    Stability { model: String, other: String },
    /// Runs the acceptance criteria.
    ReproducePaper {
        /// Seed of the randomized criteria.
        #[arg(long, default_value_t = SuiteOptions::default().seed)]
        seed: u64,
        /// Machine-readable results (same as --output json).
        #[arg(long)]
        json: bool,
        /// Flip the sign of the residue prefactor (mutation check).
        #[arg(long, hide = true)]
        mutate_sign: bool,
    },
}

fn vectors(a: &DomainArgs) -> Result<(Coords, Vec<Vec<C64>>), CliError> {
    let (file_coords, vecs) = match &a.domain {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
            commands::parse_domain_file(&text)?
        }
        None => (None, a.vector.iter().map(|s| commands::parse_vector(s)).collect::<Result<_, _>>()?),
    };
    Ok((a.coords.or(file_coords).unwrap_or(Coords::Raw), vecs))
}

/// The report to print (`None` when already printed) and overall success.
fn run(cli: &Cli, tol: &Tolerances) -> Result<(Option<Report>, bool), CliError> {
    let load = |s: &str| models::load(s, tol);
    let report = match &cli.cmd {
        Cmd::Spectrum { model, strip } => {
            let strip = strip.as_ref().map(|s| (s[0], s[1]));
            commands::spectrum(&load(model)?, strip, tol)?
        }
        Cmd::Chains { model } => commands::chains(&load(model)?, tol)?,
        Cmd::Pairing { model, csv } => commands::pairing(&load(model)?, csv.as_deref(), tol)?,
        Cmd::Adjoint(a) => {
            let (c, v) = vectors(a)?;
            commands::adjoint(&load(&a.model)?, &v, c, tol)?
        }
        Cmd::SelfadjointCheck(a) => {
            let (c, v) = vectors(a)?;
            commands::selfadjoint_check(&load(&a.model)?, &v, c, tol)?
        }
        Cmd::Friedrichs { model } => commands::friedrichs(&load(model)?, tol)?,
        Cmd::Verify { model } => commands::verify(&load(model)?, tol)?,
        Cmd::Stability { model, other } => commands::stability(&load(model)?, &load(other)?, tol)?,
        Cmd::ReproducePaper { seed, json, mutate_sign } => {
            let factor = if *mutate_sign { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) };
            let opts = SuiteOptions { seed: *seed, pairing_factor: factor, tol: tol.clone() };
            let (report, outcomes) = commands::reproduce_paper(&opts);
            let ok = outcomes.iter().all(|o| o.passed);
            if !*json && cli.output == Output::Text {
                for o in &outcomes {
                    println!("{}", o.line());
                }
                let failed = outcomes.iter().filter(|o| !o.passed).count();
                println!("{} passed, {failed} failed", outcomes.len() - failed);
                return Ok((None, ok));
            }
            return Ok((Some(report), ok));
        }
    };
    Ok((Some(report), true))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = config::from_env(&cli.tol).and_then(|tol| run(&cli, &tol));
    let json = cli.output == Output::Json || matches!(cli.cmd, Cmd::ReproducePaper { json: true, .. });
    match result {
        Ok((report, ok)) => {
            if let Some(report) = report {
                print!("{}", if json { report.to_json() } else { report.to_text() });
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if json {
                let v = serde_json::json!({"error": {"kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()}});
                println!("{}", serde_json::to_string_pretty(&v).expect("error serializes"));
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
