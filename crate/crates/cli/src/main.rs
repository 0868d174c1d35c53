//! `rmps`: exact Weingarten calculus and Monte Carlo checks for random
//! translation-invariant matrix product states.
//!
//! Exit status is 0 on success, 1 when an asserted check fails and 2 on a
//! usage or input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rmps::ensembles::{stream_rng, EnsembleParams, MpsSample, OmegaDist};
use rmps::experiments::{default_r_grid, LipschitzOptions, MeanTraceOptions, RunOptions};
use rmps::io::{self, RunSummary};
use rmps::mps::{self, oracle};
use rmps::run::{self, Records, RunConfig, RunOutcome};
use rmps::symgroup::{self, Permutation};
use rmps::weingarten::{self, TraceExpression, WeingartenCache};

#[derive(Parser)]
#[command(name = "rmps", version, about = "Random matrix product states: Weingarten calculus and Monte Carlo checks")]
struct Cli {
    /// Weingarten cache file. Defaults to $RMPS_CACHE_DIR/weingarten.cache.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Wg(n, σ) as a reduced fraction.
    Wg {
        #[arg(long)]
        n: u64,
        /// Permutation in cycle notation, e.g. "(1 2)(3 4 5)"; "()" is the identity.
        #[arg(long)]
        sigma: String,
        /// Degree of the symmetric group; defaults to the largest point named.
        #[arg(long)]
        p: Option<usize>,
    },
    /// Tabulate max_σ |Wg(n, σ)|·n^{p+|σ|(1−2/k)} and fit log-log slopes.
    WgBound {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: u32,
        #[arg(long = "n-grid", value_delimiter = ',', required = true)]
        n_grid: Vec<u64>,
    },
    /// Haar integral of a monomial in U and Ū, or of a trace expression.
    Moment {
        #[arg(long, required_unless_present = "expr")]
        n: Option<u64>,
        #[arg(long, value_delimiter = ',', requires = "n")]
        i: Vec<usize>,
        #[arg(long, value_delimiter = ',', requires = "n")]
        j: Vec<usize>,
        #[arg(long = "i-prime", value_delimiter = ',', requires = "n")]
        i_prime: Vec<usize>,
        #[arg(long = "j-prime", value_delimiter = ',', requires = "n")]
        j_prime: Vec<usize>,
        /// JSON trace expression file.
        #[arg(long, conflicts_with = "n")]
        expr: Option<PathBuf>,
    },
    /// Draw one MPS and print its window observables.
    Sample {
        #[command(flatten)]
        ensemble: SampleArgs,
        /// Write the sample itself as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the unnormalized reduced density matrix as JSON.
        #[arg(long = "dump-state")]
        dump_state: Option<PathBuf>,
        /// Write the eigenvalues of the normalized window state, one per line.
        #[arg(long)]
        eigenvalues: Option<PathBuf>,
    },
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Exhaustive or sampled combinatorial checks.
    #[command(subcommand)]
    Check(Check),
    /// Re-run the configuration embedded in a summary file and compare.
    Replay {
        #[arg(value_name = "SUMMARY")]
        saved: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long = "D", default_value_t = 16)]
    bond_dim: usize,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    l: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "omega-dist", default_value = "dirichlet")]
    omega_dist: OmegaDist,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Bond dimension, or a comma-separated grid for purity and tails.
    #[arg(long = "D", value_delimiter = ',')]
    bond_dims: Vec<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    l: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long = "omega-dist", default_value = "dirichlet")]
    omega_dist: OmegaDist,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct OutputArgs {
    /// Per-sample CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON; defaults to <out>.summary.json when --out is given.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Experiment {
    /// Mean of tr ρ_l against 1/2 with U and Ω held fixed by default.
    MeanTrace {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Draw a fresh U per sample.
        #[arg(long = "resample-u")]
        resample_u: bool,
        /// Draw a fresh Ω per sample.
        #[arg(long = "resample-omega")]
        resample_omega: bool,
    },
    /// Purity and distance to the maximally mixed state across a D grid.
    Purity {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Boundary-matrix trace averages against exact values.
    Averages {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Finite-difference Lipschitz ratios of (tr ρ)² and tr ρ².
    Lipschitz {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, value_delimiter = ',')]
        scales: Vec<f64>,
    },
    /// Empirical deviation tails across a D grid.
    Tails {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long = "r-grid", value_delimiter = ',')]
        r_grid: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum Check {
    /// Parity and injectivity of the γ map. Exhaustive when the search space
    /// has fewer than 10^7 pairs (n ≤ 2), sampled otherwise; n ≤ 6.
    LemmaGamma {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = symgroup::DEFAULT_SAMPLES)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Character orthogonality (p ≤ 8) and Σ dim² = p! for p = 1..=p-max.
    Characters {
        #[arg(long = "p-max", default_value_t = 6)]
        p_max: usize,
    },
    /// Contraction engine against the dense d^n construction, all windows.
    Oracle {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "D", value_delimiter = ',', default_values_t = [1, 2, 3])]
        bond_dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 4, 6])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    let cache_path = cli.cache.clone().or_else(io::default_cache_path);
    match cli.command {
        Command::Wg { n, sigma, p } => with_cache(cache_path.as_deref(), || {
            let perm = Permutation::parse_cycles(&sigma, p)?;
            println!("{}", weingarten::wg(n, &perm)?);
            Ok(true)
        }),
        Command::WgBound { p, k, n_grid } => with_cache(cache_path.as_deref(), || {
            let report = weingarten::wg_bound_ratio(p, k, &n_grid)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.bounded && report.slopes_ok())
        }),
        Command::Moment { n, i, j, i_prime, j_prime, expr } => with_cache(cache_path.as_deref(), || {
            if let Some(path) = expr {
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let expr = TraceExpression::from_json(&text).with_context(|| path.display().to_string())?;
                println!("{}", weingarten::evaluate_trace_expression(&expr)?);
            } else {
                let n = n.expect("clap enforces --n");
                println!("{}", weingarten::integrate_monomial(n, &i, &j, &i_prime, &j_prime)?);
            }
            Ok(true)
        }),
        Command::Sample { ensemble, out, dump_state, eigenvalues } => sample(ensemble, out, dump_state, eigenvalues),
        Command::Experiment(experiment) => {
            let (config, output) = experiment_config(experiment)?;
            run_config(config, &output, None)
        }
        Command::Check(check) => run_check(check),
        Command::Replay { saved, output } => {
            let saved = io::read_summary(&saved)?;
            run_config(saved.config.clone(), &output, Some(&saved))
        }
    }
}

/// Loads the cache file into the process-wide table before `f` and writes the
/// table back afterwards.
fn with_cache(path: Option<&Path>, f: impl FnOnce() -> Result<bool>) -> Result<bool> {
    let global = WeingartenCache::global();
    if let Some(path) = path.filter(|p| p.exists()) {
        global.merge(&io::load_cache(path)?);
    }
    let status = f()?;
    if let Some(path) = path {
        io::save_cache(global, path)?;
    }
    Ok(status)
}

fn sample(
    args: SampleArgs,
    out: Option<PathBuf>,
    dump_state: Option<PathBuf>,
    eigenvalues: Option<PathBuf>,
) -> Result<bool> {
    let params = EnsembleParams::new(args.d, args.bond_dim, args.n, args.l, args.seed)?;
    let draw = MpsSample::draw(&params, args.omega_dist, &mut stream_rng(args.seed, 0));
    let record = rmps::experiments::observe(&params, 0, &draw)?;
    if let Some(path) = &out {
        write_text(path, &draw.to_json())?;
    }
    let rho = mps::reduced_density(&draw, &params)?;
    if let Some(path) = &dump_state {
        write_text(path, &rho.to_json())?;
    }
    if let Some(path) = &eigenvalues {
        write_text(path, &rho.normalize()?.eigenvalue_text())?;
    }
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(true)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn experiment_config(experiment: Experiment) -> Result<(RunConfig, OutputArgs)> {
    Ok(match experiment {
        Experiment::MeanTrace { ensemble, output, resample_u, resample_omega } => {
            let params = ensemble.params(32, 12)?;
            let mut options = MeanTraceOptions::new(ensemble.run(500));
            options.fixed_u = !resample_u;
            options.fixed_omega = !resample_omega;
            (RunConfig::MeanTrace { params, options }, output)
        }
        Experiment::Purity { ensemble, output } => {
            let (base, bond_dims) = ensemble.grid(16)?;
            (RunConfig::Purity { base, bond_dims, run: ensemble.run(100) }, output)
        }
        Experiment::Averages { ensemble, output } => {
            let bond_dim = ensemble.single_bond_dim(32)?;
            (RunConfig::Averages { bond_dim, seed: ensemble.seed, run: ensemble.run(10_000) }, output)
        }
        Experiment::Lipschitz { ensemble, output, pairs, scales } => {
            let params = ensemble.params(16, 8)?;
            let mut options = LipschitzOptions::new(pairs);
            if !scales.is_empty() {
                options.scales = scales;
            }
            options.omega_dist = ensemble.omega_dist;
            options.workers = ensemble.workers;
            (RunConfig::Lipschitz { params, options }, output)
        }
        Experiment::Tails { ensemble, output, r_grid } => {
            let (base, bond_dims) = ensemble.grid(16)?;
            let r_grid = if r_grid.is_empty() { default_r_grid() } else { r_grid };
            (RunConfig::Tails { base, bond_dims, run: ensemble.run(2000), r_grid }, output)
        }
    })
}

const DEFAULT_GRID: [usize; 4] = [16, 32, 64, 128];

impl EnsembleArgs {
    fn run(&self, default_samples: usize) -> RunOptions {
        RunOptions::new(self.samples.unwrap_or(default_samples))
            .with_omega(self.omega_dist)
            .with_workers(self.workers)
    }

    fn single_bond_dim(&self, default: usize) -> Result<usize> {
        match self.bond_dims[..] {
            [] => Ok(default),
            [b] => Ok(b),
            _ => bail!("this experiment takes a single --D value"),
        }
    }

    fn params(&self, default_bond_dim: usize, default_n: usize) -> Result<EnsembleParams> {
        let bond_dim = self.single_bond_dim(default_bond_dim)?;
        Ok(EnsembleParams::new(self.d, bond_dim, self.n.unwrap_or(default_n), self.l, self.seed)?)
    }

    fn grid(&self, default_n: usize) -> Result<(EnsembleParams, Vec<usize>)> {
        let bond_dims = if self.bond_dims.is_empty() { DEFAULT_GRID.to_vec() } else { self.bond_dims.clone() };
        let base = EnsembleParams::new(self.d, bond_dims[0], self.n.unwrap_or(default_n), self.l, self.seed)?;
        Ok((base, bond_dims))
    }
}

#[derive(Serialize)]
struct AverageCsvRow<'a> {
    quantity: &'a str,
    count: usize,
    mean: f64,
    stderr: f64,
    oracle: Option<f64>,
    oracle_ok: Option<bool>,
    stated_value: Option<f64>,
    stated_text: Option<&'a str>,
    stated_ok: Option<bool>,
    discrepancy: bool,
}

const AVERAGE_HEADER: [&str; 10] = [
    "quantity", "count", "mean", "stderr", "oracle", "oracle_ok", "stated_value", "stated_text", "stated_ok",
    "discrepancy",
];

fn run_config(config: RunConfig, output: &OutputArgs, saved: Option<&RunSummary>) -> Result<bool> {
    let RunOutcome { passed, result, records } = run::execute(&config)?;
    if let Some(path) = &output.out {
        match &records {
            Records::Samples(rows) => io::persist_records(rows, path)?,
            Records::Pairs(rows) => io::write_csv(path, &rmps::experiments::LipschitzPair::HEADER, rows)?,
            Records::None => {
                let report: rmps::experiments::AveragesReport = serde_json::from_value(result.clone())?;
                let rows: Vec<AverageCsvRow> = report
                    .rows
                    .iter()
                    .map(|r| AverageCsvRow {
                        quantity: &r.quantity,
                        count: r.estimate.count,
                        mean: r.estimate.mean,
                        stderr: r.estimate.stderr,
                        oracle: r.oracle,
                        oracle_ok: r.oracle_ok,
                        stated_value: r.stated_value,
                        stated_text: r.stated_text.as_deref(),
                        stated_ok: r.stated_ok,
                        discrepancy: r.discrepancy,
                    })
                    .collect();
                io::write_csv(path, &AVERAGE_HEADER, &rows)?;
            }
        }
    }
    let summary = RunSummary::new(config, passed, result);
    let summary_path =
        output.summary.clone().or_else(|| output.out.as_ref().map(|p| p.with_extension("summary.json")));
    match &summary_path {
        Some(path) => io::write_summary(&summary, path)?,
        None => print!("{}", summary.to_json()),
    }
    let name = summary.config.name();
    if let Some(saved) = saved {
        let same = saved.result == summary.result && saved.passed == summary.passed;
        println!("{name}: replay {}", if same { "matches" } else { "DIFFERS" });
        return Ok(same && passed);
    }
    println!("{name}: {}", if passed { "passed" } else { "FAILED" });
    Ok(passed)
}

fn run_check(check: Check) -> Result<bool> {
    match check {
        Check::LemmaGamma { n, samples, seed } => {
            let report = symgroup::lemma_gamma_check(n, samples, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.passed())
        }
        Check::Characters { p_max } => {
            let mut all = true;
            for p in 1..=p_max {
                let report = symgroup::character_check(p)?;
                println!(
                    "p={p}: orthogonality {}, sum of dim^2 {}",
                    verdict(report.orthogonality_ok),
                    verdict(report.dimension_sum_ok)
                );
                for failure in &report.failures {
                    println!("  {failure}");
                }
                all &= report.passed();
            }
            Ok(all)
        }
        Check::Oracle { d, bond_dims, n, instances, seed } => {
            let report = oracle::oracle_sweep(d, &bond_dims, &n, instances, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.passed)
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        super::Cli::command().debug_assert();
    }
}
