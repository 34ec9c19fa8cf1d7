//! `qps` — command-line front end for the discrete phase-space library.
//!
//! Subcommands: `field` (tables and bases), `state` (build and export
//! states), `grid` (quasiprobability grids, with figure presets), and
//! `verify` (invariant suite; exit code reflects the outcome).

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qps_core::Result;

mod cmd_field;
mod cmd_grid;
mod cmd_state;
mod cmd_verify;
mod config;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "qps",
    version,
    about = "Discrete phase-space tools for n-qudit systems over GF(d^n)"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print field tables: modulus, generator, dual and selfdual bases.
    Field(FieldArgs),
    /// Build a reference / coherent / squeezed state and export it as JSON.
    State(StateArgs),
    /// Evaluate a P/W/Q grid for a state and export it as JSON or CSV.
    Grid(GridArgs),
    /// Run the invariant verification suite (exit 0 iff clean).
    Verify(VerifyArgs),
}

#[derive(Args)]
struct FieldArgs {
    /// Characteristic (prime).
    #[arg(long)]
    d: u64,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Irreducible modulus, e.g. "x^3+2x^2+1" (default: built-in table).
    #[arg(long)]
    poly: Option<String>,
    /// Force the selfdual-basis search even above the size guard.
    #[arg(long)]
    selfdual: bool,
}

#[derive(Args)]
struct StateArgs {
    /// Characteristic (prime).
    #[arg(long)]
    d: u64,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Irreducible modulus (default: built-in table).
    #[arg(long)]
    poly: Option<String>,
    /// Fiducial construction: selfdual | polynomial | normal | custom:<labels>.
    #[arg(long, default_value = "selfdual")]
    basis: String,
    /// Displacement "mu,nu" applied after any squeeze (labels like s^4, 0, 2).
    #[arg(long)]
    point: Option<String>,
    /// Squeeze parameter ς (a nonzero field-element label).
    #[arg(long)]
    squeeze: Option<String>,
    /// Axis ordering: lex | dlog | file:<path>.
    #[arg(long, default_value = "lex")]
    ordering: String,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct GridArgs {
    /// Figure preset: fig1 | fig2 | fig3 (pins d, n, poly, s, state, ordering).
    #[arg(long)]
    preset: Option<String>,
    /// Load the full run configuration from this JSON file (see --emit-config).
    #[arg(long, conflicts_with = "preset")]
    config: Option<String>,
    /// Write the resolved run configuration to this JSON file for reruns.
    #[arg(long)]
    emit_config: Option<String>,
    /// Characteristic (prime); required unless --preset is given.
    #[arg(long)]
    d: Option<u64>,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Irreducible modulus (default: built-in table).
    #[arg(long)]
    poly: Option<String>,
    /// Quasidistribution order: +1 (P), 0 (Wigner), -1 (Q).
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    s: i32,
    /// State selector: reference | mixed | <state-file.json>.
    #[arg(long, default_value = "reference")]
    state: String,
    /// Fiducial construction for the reference state.
    #[arg(long, default_value = "selfdual")]
    basis: String,
    /// Displacement "mu,nu" applied to the reference state.
    #[arg(long)]
    point: Option<String>,
    /// Squeeze parameter ς applied to the reference state.
    #[arg(long)]
    squeeze: Option<String>,
    /// Axis ordering: lex | dlog | file:<path>.
    #[arg(long, default_value = "lex")]
    ordering: String,
    /// Output format: json | csv.
    #[arg(long, default_value = "json")]
    format: String,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated dimensions, entries "d" or "d^n" (e.g. "3^3,5,31").
    /// Default: every prime power d^n ≤ 27 with d ≤ 7.
    #[arg(long)]
    dims: Option<String>,
    /// Also validate this exported state file.
    #[arg(long)]
    state_file: Option<String>,
    /// Emit the machine-readable JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<String>,
    /// Override the default matrix-identity tolerance (1e-10).
    #[arg(long)]
    tol: Option<f64>,
}

fn write_output(text: &str, out: Option<&str>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn run_field(args: &FieldArgs) -> Result<()> {
    let cfg = RunConfig {
        d: args.d,
        n: args.n,
        poly: args.poly.clone(),
        ..RunConfig::default()
    };
    let text = cmd_field::cmd_field(&cfg, args.selfdual)?;
    write_output(&text, None)
}

fn run_state(args: &StateArgs) -> Result<()> {
    let cfg = RunConfig {
        d: args.d,
        n: args.n,
        poly: args.poly.clone(),
        basis: args.basis.clone(),
        point: args.point.clone(),
        squeeze: args.squeeze.clone(),
        ordering: args.ordering.clone(),
        out: args.out.clone(),
        ..RunConfig::default()
    };
    let text = cmd_state::cmd_state(&cfg)?;
    write_output(&text, args.out.as_deref())
}

fn run_grid(args: &GridArgs) -> Result<()> {
    let (cfg, state, embedded) = if let Some(name) = &args.preset {
        let preset = cmd_grid::Preset::parse(name)?;
        let mut cfg = preset.config();
        cfg.format = args.format.clone();
        cfg.out = args.out.clone();
        let embedded = match preset {
            cmd_grid::Preset::Fig1 => None,
            _ => Some(cmd_grid::FIG_ORDERING_27),
        };
        (cfg, "reference".to_string(), embedded)
    } else if let Some(path) = &args.config {
        let mut cfg = RunConfig::from_text(&std::fs::read_to_string(path)?)?;
        if args.out.is_some() {
            cfg.out = args.out.clone();
        }
        (cfg, args.state.clone(), None)
    } else {
        let d = args.d.ok_or_else(|| {
            qps_core::QpsError::Format("--d is required unless --preset or --config is given".into())
        })?;
        let cfg = RunConfig {
            d,
            n: args.n,
            poly: args.poly.clone(),
            basis: args.basis.clone(),
            s: args.s,
            point: args.point.clone(),
            squeeze: args.squeeze.clone(),
            ordering: args.ordering.clone(),
            format: args.format.clone(),
            out: args.out.clone(),
            ..RunConfig::default()
        };
        (cfg, args.state.clone(), None)
    };
    if let Some(path) = &args.emit_config {
        std::fs::write(path, cfg.to_text())?;
    }
    let text = cmd_grid::cmd_grid(&cfg, &state, embedded)?;
    write_output(&text, cfg.out.as_deref())
}

fn run_verify(args: &VerifyArgs) -> Result<bool> {
    let dims = match &args.dims {
        Some(text) => Some(cmd_verify::parse_dims(text)?),
        None => None,
    };
    let opts = cmd_verify::VerifyOptions {
        dims,
        state_file: args.state_file.clone(),
        tol: args.tol,
    };
    let report = cmd_verify::run_verify(&opts);
    let text = if args.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        cmd_verify::render_text(&report)
    };
    write_output(&text, args.out.as_deref())?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Field(a) => run_field(a).map(|()| true),
        Cmd::State(a) => run_state(a).map(|()| true),
        Cmd::Grid(a) => run_grid(a).map(|()| true),
        Cmd::Verify(a) => run_verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
