use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hmle::classical::{
    classical_hedged_log_likelihood, classical_log_likelihood, classical_mle,
    excess_predictive_cost, kl_divergence, lidstone_estimate, unseen_letter_likelihood_ratio,
    CountVector, ProbabilityVector,
};
use hmle::estimators::{hmle, linear_inversion, mle, SolverConfig};
use hmle::io::{self, MatrixJson};
use hmle::likelihood::{hedged_log_likelihood, log_likelihood};
use hmle::montecarlo::{
    bin_by_mixedness, format_real, pure_state_beta_scan, report_csv, run_sweep,
    simulate_pauli_data, EstimatorKind, ExperimentConfig, MetricKind, MixednessAxis, ScanConfig,
    StateSampling,
};
use hmle::verification::{run_verification, VerifyConfig};
use hmle::{BlochVector, DensityMatrix, HedgingParameter};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_USAGE: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "hedge",
    version,
    about = "Hedged maximum likelihood quantum state estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a state from a measurement record.
    Estimate(EstimateArgs),
    /// Simulate Pauli measurements of a qubit and write a record.
    Simulate(SimulateArgs),
    /// Run an estimator sweep over random qubit states.
    Sweep(SweepArgs),
    /// Find the best hedging strength for pure states.
    ScanBeta(ScanArgs),
    /// Run the self-check suite.
    Verify(VerifyArgs),
    /// Classical add-β estimation and related quantities.
    #[command(subcommand)]
    Classical(ClassicalCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Mle,
    Hmle,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    /// 1 − r² with r² = (1 + Tr ρ²)/2.
    Radial,
    /// 1 − |b|² with b the Bloch vector.
    Bloch,
}

fn parse_beta(s: &str) -> Result<f64, String> {
    let b: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    HedgingParameter::new(b)
        .map(HedgingParameter::value)
        .map_err(|e| e.to_string())
}

fn parse_positive_real(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

fn parse_bloch(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        })
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|v| format!("expected x,y,z, got {} components", v.len()))
}

fn parse_estimator(s: &str) -> Result<EstimatorKind, String> {
    EstimatorKind::parse(s).map_err(|e| e.to_string())
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    MetricKind::parse(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct EstimateArgs {
    /// Measurement record JSON file.
    record: PathBuf,
    #[arg(long, value_enum, default_value = "hmle")]
    method: Method,
    /// Hedging strength; also used to report the hedged log-likelihood.
    #[arg(long, default_value = "0.5", value_parser = parse_beta)]
    beta: f64,
    #[arg(long, value_parser = parse_positive_real)]
    tol: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: Option<u64>,
    /// Estimate JSON; diagnostics go next to it as `<stem>.diagnostics.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Bloch vector `x,y,z` of the true state.
    #[arg(long, value_parser = parse_bloch, allow_hyphen_values = true, conflicts_with = "state", required_unless_present = "state")]
    bloch: Option<[f64; 3]>,
    /// Density matrix JSON file of the true state.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Shots per Pauli axis.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config JSON (the sidecar format); replaces the other flags.
    #[arg(long, conflicts_with_all = ["n_states", "n_datasets", "shots_per_basis", "betas", "estimators", "metrics", "seed"])]
    config: Option<PathBuf>,
    #[arg(long, default_value = "100")]
    n_states: usize,
    #[arg(long, default_value = "200")]
    n_datasets: usize,
    #[arg(long, default_value = "100")]
    shots_per_basis: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,0.5", value_parser = parse_beta)]
    betas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "mle,hmle", value_parser = parse_estimator)]
    estimators: Vec<EstimatorKind>,
    #[arg(long, value_delimiter = ',', default_value = "kl", value_parser = parse_metric)]
    metrics: Vec<MetricKind>,
    #[arg(long, required_unless_present = "config")]
    seed: Option<u64>,
    /// Draw pure true states instead of Hilbert-Schmidt ones.
    #[arg(long)]
    pure: bool,
    /// CSV output; the config is written next to it as `<stem>.config.json`.
    #[arg(long)]
    out: PathBuf,
    /// Number of mixedness bins in the printed summary.
    #[arg(long, default_value = "8")]
    bins: usize,
    #[arg(long, value_enum, default_value = "radial")]
    axis: Axis,
}

#[derive(Args)]
struct ScanArgs {
    /// Shots per Pauli axis, one scan each.
    #[arg(long, value_delimiter = ',', default_value = "100,400")]
    shots: Vec<u64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.005,0.01,0.02,0.03,0.05,0.07,0.1,0.15,0.2,0.3,0.4",
        value_parser = parse_beta
    )]
    betas: Vec<f64>,
    #[arg(long, default_value = "50")]
    n_states: usize,
    #[arg(long, default_value = "200")]
    n_datasets: usize,
    #[arg(long)]
    seed: u64,
    /// CSV output with columns `N,beta,mean_kl,n_trials`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "1000")]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "0.5", value_parser = parse_beta)]
    beta: f64,
}

#[derive(Subcommand)]
enum ClassicalCommand {
    /// Maximum likelihood and add-β estimates from counts.
    Estimate {
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<u64>,
        #[arg(long, default_value = "0.5", value_parser = parse_beta)]
        beta: f64,
    },
    /// Relative entropy D(p‖q) in nats.
    Kl {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
    },
    /// Expected excess code length per letter of coding with q when p is true.
    Excess {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
    },
    /// Likelihood ratio of add-β to maximum likelihood on the counts.
    Unseen {
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<u64>,
        #[arg(long, default_value = "0.5", value_parser = parse_beta)]
        beta: f64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<hmle::Error> for Failure {
    fn from(e: hmle::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn read_context(path: &Path, e: hmle::Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: format!("{}: {e}", path.display()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::ScanBeta(a) => scan(a),
        Command::Verify(a) => verify(a),
        Command::Classical(c) => classical(c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn real(x: f64) -> String {
    format_real(x)
}

fn estimate(a: EstimateArgs) -> CmdResult {
    let rec = io::read_record(&a.record).map_err(|e| read_context(&a.record, e))?;
    let beta = HedgingParameter::new(a.beta)?;
    let defaults = SolverConfig::default();
    let cfg = SolverConfig {
        tol: a.tol.unwrap_or(defaults.tol),
        max_iter: a.max_iter.map_or(defaults.max_iter, |m| m as usize),
        ..defaults
    };

    let (estimate, diagnostics) = match a.method {
        Method::Mle => {
            let (rho, d) = mle(&rec, &cfg)?;
            (MatrixJson::from_matrix(rho.matrix()), Some((rho, d)))
        }
        Method::Hmle => {
            let (rho, d) = hmle(&rec, beta, &cfg)?;
            (MatrixJson::from_matrix(rho.matrix()), Some((rho, d)))
        }
        Method::Linear => {
            let lin = linear_inversion(&rec)?;
            println!("residual: {}", real(lin.residual));
            println!("min_eigenvalue: {}", real(lin.min_eigenvalue()));
            match lin.to_density_matrix() {
                Ok(rho) if lin.min_eigenvalue() >= 0.0 => print_likelihoods(&rho, &rec, beta)?,
                _ => println!("estimate is not positive semidefinite; likelihoods undefined"),
            }
            (MatrixJson::from_matrix(&lin.matrix), None)
        }
    };

    let mut code = 0;
    if let Some((rho, d)) = &diagnostics {
        print_likelihoods(rho, &rec, beta)?;
        println!("min_eigenvalue: {}", real(d.min_eigenvalue));
        println!("iterations: {}", d.iterations);
        println!("converged: {}", d.converged);
        if !d.converged {
            eprintln!(
                "solver did not converge within {} iterations (stationarity {})",
                cfg.max_iter,
                real(d.stationarity)
            );
            code = EXIT_NOT_CONVERGED;
        }
    }
    if let Some(out) = &a.out {
        io::write_json(out, &estimate)?;
        if let Some((_, d)) = &diagnostics {
            io::write_diagnostics(&io::diagnostics_path(out), d)?;
        }
    }
    Ok(code)
}

fn print_likelihoods(
    rho: &DensityMatrix,
    rec: &hmle::MeasurementRecord,
    beta: HedgingParameter,
) -> Result<(), Failure> {
    println!("log_likelihood: {}", real(log_likelihood(rho, rec)?));
    println!(
        "hedged_log_likelihood (beta = {}): {}",
        beta.value(),
        real(hedged_log_likelihood(rho, rec, beta)?)
    );
    Ok(())
}

fn simulate(a: SimulateArgs) -> CmdResult {
    let truth = match (&a.bloch, &a.state) {
        (Some(b), _) => BlochVector::new(b[0], b[1], b[2]).to_state()?,
        (None, Some(p)) => io::read_density_matrix(p).map_err(|e| read_context(p, e))?,
        (None, None) => unreachable!("clap requires one of --bloch and --state"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let rec = simulate_pauli_data(&truth, a.shots, &mut rng)?;
    io::write_record(&a.out, &rec)?;
    let counts: Vec<String> = rec.items().iter().map(|i| i.count.to_string()).collect();
    println!("counts (x+, x-, y+, y-, z+, z-): {}", counts.join(","));
    Ok(0)
}

fn config_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.config.json"))
}

fn sweep(a: SweepArgs) -> CmdResult {
    let cfg = match &a.config {
        Some(p) => io::read_json::<ExperimentConfig>(p).map_err(|e| read_context(p, e))?,
        None => ExperimentConfig {
            n_states: a.n_states,
            n_datasets: a.n_datasets,
            shots_per_basis: a.shots_per_basis,
            betas: a.betas.clone(),
            estimators: a.estimators.clone(),
            metrics: a.metrics.clone(),
            master_seed: a.seed.expect("clap requires --seed without --config"),
            sampling: if a.pure {
                StateSampling::Pure
            } else {
                StateSampling::HilbertSchmidt
            },
            tol: SolverConfig::default().tol,
            max_iter: SolverConfig::default().max_iter,
        },
    };
    let report = run_sweep(&cfg)?;
    fs::write(&a.out, report_csv(&report)).map_err(|e| Failure::from(hmle::Error::from(e)))?;
    io::write_json(&config_path(&a.out), &cfg)?;

    let axis = match a.axis {
        Axis::Radial => MixednessAxis::RadialCoordinate,
        Axis::Bloch => MixednessAxis::BlochRadius,
    };
    let binned = bin_by_mixedness(&report, a.bins.max(1), axis)?;
    println!(
        "regime boundary sqrt(3/N): {}",
        real(binned.regime_boundary)
    );
    println!(
        "bin edges: {}",
        binned
            .edges
            .iter()
            .map(|&e| real(e))
            .collect::<Vec<_>>()
            .join(",")
    );
    println!(
        "states per bin: {}",
        binned
            .counts
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    for c in &binned.curves {
        let means: Vec<String> = c
            .means
            .iter()
            .map(|m| m.map_or_else(|| "-".to_string(), real))
            .collect();
        println!(
            "{} beta={} {}: {}",
            c.estimator.as_str(),
            c.beta,
            c.metric.as_str(),
            means.join(",")
        );
    }

    let violations = report.bound_violations().count() + report.rank_violations().count();
    let unconverged = report.unconverged().count();
    println!(
        "trials: {}, failures: {}, unconverged: {}, invariant violations: {}",
        report.trials.len(),
        report.failures.len(),
        unconverged,
        violations
    );
    for f in &report.failures {
        eprintln!(
            "failure: state {} dataset {} {} beta={} seed {}: {}",
            f.state_id,
            f.dataset_id,
            f.estimator.as_str(),
            f.beta,
            f.seed,
            f.message
        );
    }
    if !report.failures.is_empty() || unconverged > 0 {
        return Ok(EXIT_NOT_CONVERGED);
    }
    if violations > 0 {
        return Ok(EXIT_VIOLATION);
    }
    Ok(0)
}

fn scan(a: ScanArgs) -> CmdResult {
    let cfg = ScanConfig {
        shots: a.shots,
        betas: a.betas,
        n_states: a.n_states,
        n_datasets: a.n_datasets,
        master_seed: a.seed,
    };
    let report = pure_state_beta_scan(&cfg)?;
    let mut csv = String::from("N,beta,mean_kl,n_trials\n");
    for r in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.shots_per_basis,
            real(r.beta),
            real(r.mean_kl),
            r.n_trials
        ));
    }
    match &a.out {
        Some(out) => fs::write(out, &csv).map_err(|e| Failure::from(hmle::Error::from(e)))?,
        None => print!("{csv}"),
    }
    for o in &report.optima {
        println!(
            "N = {}: best beta {} (mean KL {}), 1/(2 sqrt N) = {}{}",
            o.shots_per_basis,
            o.beta,
            real(o.mean_kl),
            real(o.reference),
            if o.grid_spans_range {
                ""
            } else {
                " [grid does not span 1/(8 sqrt N)..4/sqrt N]"
            }
        );
    }
    if report.n_failures > 0 {
        eprintln!("{} solves failed", report.n_failures);
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

fn verify(a: VerifyArgs) -> CmdResult {
    let mut cfg = VerifyConfig::new(a.trials, a.seed);
    cfg.beta = HedgingParameter::new(a.beta)?;
    let reports = run_verification(&cfg);
    let mut ok = true;
    for r in &reports {
        if r.passed() {
            println!("PASS {} ({} trials)", r.name, r.trials);
        } else {
            ok = false;
            println!(
                "FAIL {} ({} of {} trials)",
                r.name,
                r.failures.len(),
                r.trials
            );
            for f in r.failures.iter().take(5) {
                println!("  seed {}: {}", f.seed, f.detail);
            }
        }
    }
    Ok(if ok { 0 } else { EXIT_VIOLATION })
}

fn probs(v: &[f64]) -> String {
    v.iter().map(|&x| real(x)).collect::<Vec<_>>().join(",")
}

fn classical(c: ClassicalCommand) -> CmdResult {
    match c {
        ClassicalCommand::Estimate { counts, beta } => {
            let c = CountVector::new(counts)?;
            let lid = lidstone_estimate(&c, beta)?;
            match classical_mle(&c) {
                Ok(m) => {
                    println!("mle: {}", probs(m.probs()));
                    println!(
                        "mle_log_likelihood: {}",
                        real(classical_log_likelihood(&m, &c)?)
                    );
                }
                Err(e) => println!("mle: undefined ({e})"),
            }
            println!("add_beta: {}", probs(lid.probs()));
            println!(
                "add_beta_log_likelihood: {}",
                real(classical_log_likelihood(&lid, &c)?)
            );
            println!(
                "add_beta_hedged_log_likelihood: {}",
                real(classical_hedged_log_likelihood(&lid, &c, beta)?)
            );
        }
        ClassicalCommand::Kl { p, q } => {
            let d = kl_divergence(&ProbabilityVector::new(p)?, &ProbabilityVector::new(q)?)?;
            println!("{}", real(d));
        }
        ClassicalCommand::Excess { p, q } => {
            let d =
                excess_predictive_cost(&ProbabilityVector::new(p)?, &ProbabilityVector::new(q)?)?;
            println!("{}", real(d));
        }
        ClassicalCommand::Unseen { counts, beta } => {
            let r = unseen_letter_likelihood_ratio(&CountVector::new(counts)?, beta)?;
            println!("{}", real(r));
        }
    }
    Ok(0)
}
