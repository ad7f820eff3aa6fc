//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage errors (bad flags or arguments
//! rejected by the library), 1 for numerical failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{set_thread_count, Execution};
use crate::experiments::{
    emit_report, family_gram, format_real, grid_parameters, run_sweep, Format,
};
use crate::greedy::{strong_greedy, GreedyTrace};
use crate::manifold::{weak_residual, BumpTestFunction, Family, FrozenInitialData, WaveSnapshot};
use crate::widths::{chain_check, packing_chain, MinimaxConfig};

#[derive(Debug, Parser)]
#[command(
    name = "nwidth",
    version,
    about = "N-width bounds for wave-equation solution manifolds"
)]
pub struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the Gram matrix of a uniform snapshot grid.
    Gram(GramArgs),
    /// Tabulate the packing lower bound 1/(4 sqrt(N)).
    BoundCheck(BoundCheckArgs),
    /// Two-sided width bounds for N = 1..nmax.
    Sweep(SweepArgs),
    /// Strong greedy selection and its error sequence.
    Greedy(GreedyArgs),
    /// Weak-form residuals of wave snapshots against random bump functions.
    Residual(ResidualArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Wave,
    Smooth,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Wave => Family::Wave,
            FamilyArg::Smooth => Family::Smooth,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Wave)]
    pub family: FamilyArg,
    /// Number of uniformly spaced parameters in [0, 1].
    #[arg(long, default_value_t = 33, value_parser = clap::value_parser!(u64).range(1..))]
    pub grid: u64,
}

#[derive(Debug, Clone, Args)]
pub struct GramArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BoundCheckArgs {
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub nmax: u64,
    /// Also run the numerical chain check on Φ_{2N}, Ψ_{2N} for N up to this value.
    #[arg(long, default_value_t = 4)]
    pub numeric_max: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MinimaxArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Convergence tolerance of the minimax iteration.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    /// Multiplicative-weights learning rate.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
}

impl MinimaxArgs {
    fn config(&self) -> MinimaxConfig {
        MinimaxConfig {
            restarts: self.restarts,
            max_iterations: self.max_iterations,
            weight_learning_rate: self.rate,
            convergence_tol: self.tol,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 8)]
    pub nmax: usize,
    /// Explicit list of N values, overriding --nmax.
    #[arg(long = "n", value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[command(flatten)]
    pub minimax: MinimaxArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GreedyArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 8)]
    pub nmax: usize,
    /// Stop once the worst residual drops below this value.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ResidualArgs {
    /// Wave speed; drawn at random per bump when omitted.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub bumps: usize,
    /// Gauss–Legendre points per axis per piece.
    #[arg(long, default_value_t = 64)]
    pub quad: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Speed at which the frozen initial data is tested as a non-solution.
pub const FROZEN_CONTROL_MU: f64 = 0.5;

#[derive(Serialize)]
struct GramOut<'a> {
    labels: &'a [String],
    matrix: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct BoundRow {
    #[serde(rename = "N")]
    n: usize,
    packing_bound: f64,
    chain_verified: bool,
}

#[derive(Serialize)]
struct GreedyOut<'a> {
    family: Family,
    grid_size: usize,
    parameters: Vec<f64>,
    #[serde(flatten)]
    trace: &'a GreedyTrace,
}

#[derive(Serialize)]
pub struct ResidualRow {
    pub bump: usize,
    pub mu: f64,
    pub center_t: f64,
    pub center_x: f64,
    pub radius_t: f64,
    pub radius_x: f64,
    pub residual: f64,
    pub frozen_residual: f64,
}

fn write_output(output: &OutputArgs, bytes: &[u8]) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn json_line<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

fn cmd_gram(args: &GramArgs) -> Result<Vec<u8>> {
    let grid = args.grid.grid as usize;
    let gram = family_gram(args.grid.family.into(), grid, Execution::default())?;
    let m = gram.matrix();
    match Format::from(args.output.format) {
        Format::Json => json_line(&GramOut {
            labels: gram.labels(),
            matrix: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }),
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "label,{}", gram.labels().join(","))?;
            for (i, label) in gram.labels().iter().enumerate() {
                let row: Vec<String> = m.row(i).iter().map(|&v| format_real(v)).collect();
                writeln!(out, "{label},{}", row.join(","))?;
            }
            Ok(out)
        }
    }
}

fn cmd_bound_check(args: &BoundCheckArgs) -> Result<Vec<u8>> {
    let cfg = MinimaxConfig {
        seed: args.seed,
        ..MinimaxConfig::default()
    };
    let mut rows = Vec::new();
    for n in 1..=args.nmax as usize {
        let chain = packing_chain(n)?;
        let mut verified = chain.verified;
        if n as u64 <= args.numeric_max {
            verified &= chain_check(2 * n, n, &cfg)?.holds;
        }
        rows.push(BoundRow {
            n,
            packing_bound: chain.bound,
            chain_verified: verified,
        });
    }
    match Format::from(args.output.format) {
        Format::Json => json_line(&rows),
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "N,packing_bound,chain_verified")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{}",
                    r.n,
                    format_real(r.packing_bound),
                    r.chain_verified
                )?;
            }
            Ok(out)
        }
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<Vec<u8>> {
    let n_list = args
        .n_list
        .clone()
        .unwrap_or_else(|| (1..=args.nmax).collect());
    let report = run_sweep(
        args.grid.family.into(),
        args.grid.grid as usize,
        &n_list,
        &args.minimax.config(),
    )?;
    let mut out = Vec::new();
    emit_report(&report, args.output.format.into(), &mut out)?;
    Ok(out)
}

fn cmd_greedy(args: &GreedyArgs) -> Result<Vec<u8>> {
    let grid = args.grid.grid as usize;
    let family: Family = args.grid.family.into();
    let gram = family_gram(family, grid, Execution::default())?;
    let trace = strong_greedy(&gram, args.nmax, args.tol)?;
    let params = grid_parameters(grid);
    match Format::from(args.output.format) {
        Format::Json => json_line(&GreedyOut {
            family,
            grid_size: grid,
            parameters: trace.selected_indices.iter().map(|&i| params[i]).collect(),
            trace: &trace,
        }),
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "N,selected_index,parameter,error")?;
            for (n, err) in trace.errors.iter().enumerate() {
                let (idx, p) = match n.checked_sub(1).and_then(|j| trace.selected_indices.get(j)) {
                    Some(&i) => (i.to_string(), format_real(params[i])),
                    None => (String::new(), String::new()),
                };
                writeln!(out, "{n},{idx},{p},{}", format_real(*err))?;
            }
            Ok(out)
        }
    }
}

/// Residual table for `bumps` seeded random bumps.
pub fn residual_table(
    mu: Option<f64>,
    bumps: usize,
    quad: usize,
    seed: u64,
) -> Result<Vec<ResidualRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(bumps);
    for bump in 0..bumps {
        let m = match mu {
            Some(m) => m,
            None => rng.random_range(0.0..=1.0),
        };
        let phi = BumpTestFunction::random(&mut rng);
        let snapshot = WaveSnapshot::new(m)?;
        rows.push(ResidualRow {
            bump,
            mu: m,
            center_t: phi.center.t,
            center_x: phi.center.x,
            radius_t: phi.radius_t,
            radius_x: phi.radius_x,
            residual: weak_residual(&snapshot, &phi, m, quad)?,
            frozen_residual: weak_residual(&FrozenInitialData, &phi, FROZEN_CONTROL_MU, quad)?,
        });
    }
    Ok(rows)
}

fn cmd_residual(args: &ResidualArgs) -> Result<Vec<u8>> {
    let rows = residual_table(args.mu, args.bumps, args.quad, args.seed)?;
    match Format::from(args.output.format) {
        Format::Json => json_line(&rows),
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(
                out,
                "bump,mu,center_t,center_x,radius_t,radius_x,residual,frozen_residual"
            )?;
            for r in &rows {
                let reals: Vec<String> = [
                    r.mu,
                    r.center_t,
                    r.center_x,
                    r.radius_t,
                    r.radius_x,
                    r.residual,
                    r.frozen_residual,
                ]
                .iter()
                .map(|&v| format_real(v))
                .collect();
                writeln!(out, "{},{}", r.bump, reals.join(","))?;
            }
            Ok(out)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::InvalidParameter("--threads must be positive".into()));
        }
        set_thread_count(t);
    }
    let (bytes, output) = match &cli.command {
        Command::Gram(a) => (cmd_gram(a)?, &a.output),
        Command::BoundCheck(a) => (cmd_bound_check(a)?, &a.output),
        Command::Sweep(a) => (cmd_sweep(a)?, &a.output),
        Command::Greedy(a) => (cmd_greedy(a)?, &a.output),
        Command::Residual(a) => (cmd_residual(a)?, &a.output),
    };
    write_output(output, &bytes)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn defaults() {
        let cli = Cli::try_parse_from(["nwidth", "sweep"]).unwrap();
        let Command::Sweep(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.grid.grid, 33);
        assert_eq!(a.nmax, 8);
        assert_eq!(a.minimax.seed, 42);
        assert_eq!(a.minimax.tol, 1e-8);
        assert_eq!(a.output.format, FormatArg::Csv);
        assert!(a.output.out.is_none());
    }

    #[test]
    fn zero_grid_is_rejected() {
        assert!(Cli::try_parse_from(["nwidth", "gram", "--grid", "0"]).is_err());
        assert_eq!(main_from(["nwidth", "gram", "--grid", "0"]), 2);
    }

    #[test]
    fn gram_wave_three() {
        let cli = Cli::try_parse_from(["nwidth", "gram", "--grid", "3"]).unwrap();
        let Command::Gram(a) = cli.command else {
            panic!()
        };
        let text = String::from_utf8(cmd_gram(&a).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "label,phi(0),phi(0.5),phi(1)");
        assert_eq!(lines[1], "phi(0),2e0,1.5e0,1e0");
        assert_eq!(lines[3], "phi(1),1e0,1e0,1e0");
    }

    #[test]
    fn bound_check_rows() {
        let cli = Cli::try_parse_from(["nwidth", "bound-check", "--nmax", "4"]).unwrap();
        let Command::BoundCheck(a) = cli.command else {
            panic!()
        };
        let text = String::from_utf8(cmd_bound_check(&a).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "1,2.5e-1,true");
        assert_eq!(lines[4], "4,1.25e-1,true");
    }
}
