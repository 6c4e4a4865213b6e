//! `lss` — stability analysis of linear switched systems with a common
//! quadratic Lyapunov function.

mod formats;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use lss_core::analysis::normalize_system;
use lss_core::criteria::full_report;
use lss_core::linalg::op_norm;
use lss_core::signal::classify;
use lss_core::sim::{estimate_su, record_flow};
use lss_core::{Tolerances, Vector};

use formats::{parse_x0, SignalSpec, SystemFile};
use report::{
    to_json_bytes, trajectory_csv, write_atomic, ClassificationJson, CombinedReportJson,
    StabilityReportJson, SuEstimateJson,
};

#[derive(Parser)]
#[command(
    name = "lss",
    about = "Asymptotic stability of linear switched systems sharing a common \
             (possibly non-strict) quadratic Lyapunov function",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalOpts,
}

#[derive(Args)]
struct GlobalOpts {
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Operator-norm tolerance for Gram-matrix convergence.
    #[arg(long, global = true)]
    tol_conv: Option<f64>,
    /// Time horizon (simulation grid end / estimation cap / classification
    /// prefix).
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Overrides the seed stored in generator-type signal files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (JSON report or CSV trajectory). Written atomically.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl GlobalOpts {
    fn tolerances(&self) -> Result<Tolerances> {
        let mut tol = Tolerances::default();
        if let Some(r) = self.tol_rank {
            if !(r > 0.0 && r < 1.0) {
                bail!("--tol-rank: must lie in (0, 1)");
            }
            tol.rank_rel = r;
        }
        if let Some(c) = self.tol_conv {
            if !(c > 0.0 && c < 1.0) {
                bail!("--tol-conv: must lie in (0, 1)");
            }
            tol.convergence = c;
        }
        if let Some(h) = self.horizon {
            if !(h >= 0.0 && h.is_finite()) {
                bail!("--horizon: must be a finite nonnegative number");
            }
        }
        Ok(tol)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Runs the Lyapunov check and every geometric stability certificate.
    ///
    /// Exit code 0 on success, 2 when the common-Lyapunov hypothesis fails,
    /// 1 on malformed input.
    Analyze {
        /// System JSON file.
        system: PathBuf,
        /// Restrict Theorem 6 to this infinite-occupancy index set
        /// (comma-separated, 0-based). Defaults to all modes.
        #[arg(long, value_delimiter = ',')]
        j: Option<Vec<usize>>,
    },
    /// Simulates the switched flow and writes a trajectory CSV.
    Simulate {
        system: PathBuf,
        signal: PathBuf,
        /// Initial state, comma-separated reals (e.g. "1,1,1").
        #[arg(long)]
        x0: String,
        /// Number of grid intervals.
        #[arg(long, default_value_t = 400)]
        steps: usize,
    },
    /// Estimates the limit matrix S_u along geometric checkpoints.
    ///
    /// Exit code 0 when converged, 3 when the horizon cap was hit first.
    EstimateSu { system: PathBuf, signal: PathBuf },
    /// Classifies a switching signal (chaotic / H(i) / regular).
    CheckSignal {
        signal: PathBuf,
        /// Mode count for generator specs that omit one.
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Combined analyze + check-signal + estimate-su report.
    Report { system: PathBuf, signal: PathBuf },
}

fn emit(global: &GlobalOpts, bytes: &[u8]) -> Result<()> {
    match &global.out {
        Some(path) => write_atomic(path, bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn cmd_analyze(global: &GlobalOpts, system: &PathBuf, j: Option<&[usize]>) -> Result<u8> {
    let tol = global.tolerances()?;
    let system = SystemFile::load(system)?.to_system()?;
    let rep = full_report(&system, &tol, j)?;
    let json = StabilityReportJson::from(&rep);
    print!("{}", json.render_text());
    if global.out.is_some() {
        emit(global, &to_json_bytes(&json)?)?;
    }
    Ok(if rep.lyapunov_ok { 0 } else { 2 })
}

fn cmd_simulate(
    global: &GlobalOpts,
    system: &PathBuf,
    signal: &PathBuf,
    x0: &str,
    steps: usize,
) -> Result<u8> {
    global.tolerances()?;
    let system_file = SystemFile::load(system)?;
    let system = normalize_system(&system_file.to_system()?)?;
    let x0 = parse_x0(x0)?;
    if x0.len() != system.dim() {
        bail!(
            "x0: has {} entries, system dimension is {}",
            x0.len(),
            system.dim()
        );
    }
    let x0 = Vector::from_column_slice(&x0);
    let mut sig = SignalSpec::load(signal)?.to_signal(Some(system.num_modes()), global.seed)?;
    sig.check_compatible(system.num_modes())
        .map_err(|e| anyhow::anyhow!("signal file: {e}"))?;
    let horizon = global.horizon.unwrap_or(10.0);
    let rec = record_flow(&system, &mut sig, horizon, steps, &[x0.clone()])?;

    let csv = trajectory_csv(&rec, system.dim());
    let out = global
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("trajectory.csv"));
    write_atomic(&out, csv.as_bytes())?;

    let final_norm = rec.norms[0].last().copied().unwrap_or(x0.norm());
    let mut eigs: Vec<f64> = rec
        .grams
        .last()
        .unwrap()
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Loewner monotonicity of the Gram along the grid, checked via the
    // top eigenvalue of G(t_{k+1}) − G(t_k).
    let mut monotone = true;
    for w in rec.grams.windows(2) {
        let diff = &w[1] - &w[0];
        let top = diff
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if top > 1e-8 {
            monotone = false;
            break;
        }
    }
    println!("final |Phi(T) x0| = {final_norm:.6e}  (T = {horizon})");
    println!(
        "final Gram eigenvalues = [{}]",
        eigs.iter()
            .map(|e| format!("{e:.6e}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!(
        "Gram Loewner-monotone along grid: {}",
        if monotone { "yes" } else { "NO" }
    );
    println!("trajectory written to {}", out.display());
    Ok(0)
}

fn cmd_estimate_su(global: &GlobalOpts, system: &PathBuf, signal: &PathBuf) -> Result<u8> {
    let tol = global.tolerances()?;
    let system_file = SystemFile::load(system)?;
    let system = normalize_system(&system_file.to_system()?)?;
    let mut sig = SignalSpec::load(signal)?.to_signal(Some(system.num_modes()), global.seed)?;
    sig.check_compatible(system.num_modes())
        .map_err(|e| anyhow::anyhow!("signal file: {e}"))?;
    let horizon = global.horizon.unwrap_or(tol.horizon_cap);
    let est = estimate_su(&system, &mut sig, horizon, &tol)?;
    let json = SuEstimateJson::from(&est);
    emit(global, &to_json_bytes(&json)?)?;
    if global.out.is_some() {
        println!(
            "S_u estimate: rank {}, |S_u| = {:.6e}, converged = {} (horizon used {})",
            est.rank,
            op_norm(&est.matrix),
            est.converged,
            est.horizon_used
        );
    }
    Ok(if est.converged { 0 } else { 3 })
}

fn cmd_check_signal(global: &GlobalOpts, signal: &PathBuf, modes: Option<usize>) -> Result<u8> {
    global.tolerances()?;
    let mut sig = SignalSpec::load(signal)?.to_signal(modes, global.seed)?;
    let horizon = global.horizon.unwrap_or(100.0);
    sig.ensure_horizon(horizon)?;
    let class = classify(&sig, horizon)?;
    let json = ClassificationJson::from(&class);
    emit(global, &to_json_bytes(&json)?)?;
    Ok(0)
}

fn cmd_report(global: &GlobalOpts, system: &PathBuf, signal: &PathBuf) -> Result<u8> {
    let tol = global.tolerances()?;
    let system = SystemFile::load(system)?.to_system()?;
    let rep = full_report(&system, &tol, None)?;
    let analysis = StabilityReportJson::from(&rep);
    print!("{}", analysis.render_text());

    let (signal_json, su_json, code) = if rep.lyapunov_ok {
        let normalized = normalize_system(&system)?;
        let mut sig =
            SignalSpec::load(signal)?.to_signal(Some(normalized.num_modes()), global.seed)?;
        sig.check_compatible(normalized.num_modes())
            .map_err(|e| anyhow::anyhow!("signal file: {e}"))?;
        let horizon = global.horizon.unwrap_or(tol.horizon_cap);
        let est = estimate_su(&normalized, &mut sig, horizon, &tol)?;
        let class = classify(&sig, est.horizon_used)?;
        println!(
            "S_u estimate: rank {}, converged = {} (horizon used {})",
            est.rank, est.converged, est.horizon_used
        );
        let code = if est.converged { 0 } else { 3 };
        (
            Some(ClassificationJson::from(&class)),
            Some(SuEstimateJson::from(&est)),
            code,
        )
    } else {
        (None, None, 2)
    };

    let combined = CombinedReportJson {
        analysis,
        signal: signal_json,
        su: su_json,
    };
    if global.out.is_some() {
        emit(global, &to_json_bytes(&combined)?)?;
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { system, j } => cmd_analyze(&cli.global, system, j.as_deref()),
        Command::Simulate {
            system,
            signal,
            x0,
            steps,
        } => cmd_simulate(&cli.global, system, signal, x0, *steps),
        Command::EstimateSu { system, signal } => cmd_estimate_su(&cli.global, system, signal),
        Command::CheckSignal { signal, modes } => cmd_check_signal(&cli.global, signal, *modes),
        Command::Report { system, signal } => cmd_report(&cli.global, system, signal),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
