//! Command-line front end: sample graphs, measure them, run sweeps, fit
//! scaling laws, census the hierarchy event, and run the oracle self-tests.
//!
//! Exit codes: 0 on success, 1 when the oracle suite finds a mismatch, 2 on
//! configuration or usage errors.

use clap::{Args, Parser, Subcommand};
use lrp::harness::fit::{
    classify_regime, fit_scaling, regime_evidence, FitModel, RegimeThresholds, YColumn,
};
use lrp::harness::{
    collect_report, read_rows_csv_file, resolve_workers, run_sweep, write_rows_csv_file,
    ReportOptions, SweepConfig,
};
use lrp::hierarchy::{nu_diameter_bound, nu_failure_census, nu_prob_lower_bound, HierarchySpec};
use lrp::metrics::diameter_exact;
use lrp::model::{sample, sample_cycle_naive, sample_cycle_stratified, ModelParams, Topology};
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lrp", version, about = "Long-range percolation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct LawArgs {
    /// Vertex layout: cycle | path | box1 | box2
    #[arg(long)]
    topology: Topology,
    /// Side length (vertex count for cycle/path/box1, grid side for box2)
    #[arg(long)]
    n: u32,
    /// Decay exponent
    #[arg(long)]
    s: f64,
    /// Intensity (ignored by the box law)
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trial index within the seed
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

impl LawArgs {
    fn params(&self) -> Result<ModelParams, lrp::model::ModelError> {
        ModelParams::new(self.topology, self.n, self.s, self.beta, self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample one graph and emit its edge list as CSV (`u,v`)
    Sample {
        #[command(flatten)]
        law: LawArgs,
        /// Force a cycle sampler: auto | naive | stratified
        #[arg(long, default_value = "auto")]
        sampler: String,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
    /// Sample one graph and print its full metrics report as JSON
    Stats {
        #[command(flatten)]
        law: LawArgs,
        /// Skip the effective-resistance probes
        #[arg(long)]
        no_resistance: bool,
        /// Skip the mixing-time evolution
        #[arg(long)]
        no_mixing: bool,
        /// Total-variation threshold for the mixing time
        #[arg(long, default_value_t = lrp::harness::MIXING_THRESHOLD)]
        mixing_threshold: f64,
    },
    /// Run a sweep described by a JSON config and write the CSV
    Sweep {
        /// Path to the JSON sweep config
        #[arg(long)]
        config: String,
        /// Override the config's output path
        #[arg(long)]
        out: Option<String>,
        /// Worker threads (beats the LRP_WORKERS environment variable)
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Fit scaling laws to a sweep CSV and classify the regime
    Fit {
        /// Path to a sweep CSV
        #[arg(long)]
        input: String,
        /// Column to fit
        #[arg(long, default_value = "diameter")]
        y: String,
        #[arg(long, default_value_t = 0.9)]
        linear_slope_min: f64,
        #[arg(long, default_value_t = 0.98)]
        linear_r2_min: f64,
        #[arg(long, default_value_t = 0.9)]
        polylog_r2_min: f64,
    },
    /// Monte Carlo census of the hierarchy attachment event on path samples
    Hierarchy {
        /// Comma-separated branching factors, e.g. 4,4,4
        #[arg(long, value_delimiter = ',')]
        levels: Vec<u32>,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Lowest sub-component degree checked
        #[arg(long, default_value_t = 0)]
        lo: usize,
        /// Highest sub-component degree checked (depth - 1 when omitted)
        #[arg(long)]
        hi: Option<usize>,
    },
    /// Run the brute-force cross-check suite; exits 1 on any mismatch
    Oracle {
        #[arg(long, default_value_t = 0xC0FF_EE)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            if let Some(io_err) = err.downcast_ref::<std::io::Error>() {
                if io_err.kind() == std::io::ErrorKind::BrokenPipe {
                    return ExitCode::SUCCESS;
                }
            }
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Sample { law, sampler, out } => {
            let params = law.params()?;
            let graph = match sampler.as_str() {
                "auto" => sample(&params, law.trial)?,
                "naive" => sample_cycle_naive(&params, law.trial)?,
                "stratified" => sample_cycle_stratified(&params, law.trial)?,
                other => return Err(format!("unknown sampler `{other}`").into()),
            };
            match out {
                Some(path) => graph.write_edge_csv(std::fs::File::create(path)?)?,
                None => graph.write_edge_csv(std::io::stdout().lock())?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats {
            law,
            no_resistance,
            no_mixing,
            mixing_threshold,
        } => {
            let params = law.params()?;
            let graph = sample(&params, law.trial)?;
            let report = collect_report(
                &graph,
                &ReportOptions {
                    resistance: !no_resistance,
                    mixing: !no_mixing,
                    mixing_threshold,
                    trial: law.trial,
                },
            )?;
            let mut out = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            out,
            workers,
        } => {
            let config_doc = SweepConfig::from_json_file(&config)?;
            let output = out.unwrap_or_else(|| config_doc.output.clone());
            let rows = match resolve_workers(workers) {
                Some(threads) => rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()?
                    .install(|| run_sweep(&config_doc)),
                None => run_sweep(&config_doc),
            }?;
            write_rows_csv_file(&rows, &output)?;
            eprintln!("wrote {} rows to {output}", rows.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Fit {
            input,
            y,
            linear_slope_min,
            linear_r2_min,
            polylog_r2_min,
        } => {
            let rows = read_rows_csv_file(&input)?;
            let column: YColumn = y.parse()?;
            println!(
                "{:<10} {:>10} {:>12} {:>8} {:>8}",
                "model", "slope", "intercept", "r2", "points"
            );
            for model in [FitModel::PowerLaw, FitModel::PolyLog, FitModel::Constant] {
                let fit = fit_scaling(&rows, column, model)?;
                println!(
                    "{:<10} {:>10.4} {:>12.4} {:>8.4} {:>8}",
                    format!("{model:?}"),
                    fit.slope,
                    fit.intercept,
                    fit.r_squared,
                    fit.n_points
                );
            }
            let evidence = regime_evidence(&rows, column)?;
            let thresholds = RegimeThresholds {
                linear_slope_min,
                linear_r2_min,
                polylog_r2_min,
            };
            println!(
                "window slopes: lower {:.4}, upper {:.4}",
                evidence.lower_window_slope, evidence.upper_window_slope
            );
            println!("regime: {}", classify_regime(&evidence, &thresholds));
            Ok(ExitCode::SUCCESS)
        }
        Command::Hierarchy {
            levels,
            s,
            beta,
            seed,
            trials,
            lo,
            hi,
        } => {
            let spec = HierarchySpec::explicit(levels)?;
            let hi = hi.unwrap_or(spec.depth() - 1);
            let n = u32::try_from(spec.total_length())?;
            let params = ModelParams::new(Topology::Path, n, s, beta, seed)?;
            let degrees = hi - lo + 1;
            let mut failed = vec![0u64; degrees];
            let mut components = vec![0usize; degrees];
            let mut pairs = vec![0usize; degrees];
            let mut nu_holds = 0u64;
            let mut worst_conditioned_diameter = 0u32;
            let bound = nu_diameter_bound(&spec, lo, hi)?;
            for trial in 0..trials {
                let graph = sample(&params, trial)?;
                let census = nu_failure_census(&graph, &spec, lo, hi)?;
                let mut all_ok = true;
                for (slot, row) in census.iter().enumerate() {
                    failed[slot] += row.failed_pairs as u64;
                    components[slot] = row.components;
                    pairs[slot] = row.pairs_per_component;
                    all_ok &= row.failed_pairs == 0;
                }
                if all_ok {
                    nu_holds += 1;
                    worst_conditioned_diameter =
                        worst_conditioned_diameter.max(diameter_exact(&graph)?);
                }
            }
            println!(
                "{:<8} {:>12} {:>12} {:>14} {:>16}",
                "degree", "components", "pairs/comp", "failed-pairs", "p(degree clean)"
            );
            for slot in 0..degrees {
                let total = components[slot] as u64 * pairs[slot] as u64 * trials;
                println!(
                    "{:<8} {:>12} {:>12} {:>14} {:>16.4}",
                    lo + slot,
                    components[slot],
                    pairs[slot],
                    failed[slot],
                    1.0 - failed[slot] as f64 / total as f64
                );
            }
            let p_nu = nu_holds as f64 / trials as f64;
            println!("empirical P(nu) = {p_nu:.4} over {trials} trials");
            println!(
                "union-bound lower bound = {:.4}",
                nu_prob_lower_bound(&spec, lo, hi, s, beta)?
            );
            if nu_holds > 0 {
                println!(
                    "max diameter over nu-trials = {worst_conditioned_diameter} (bound {bound})"
                );
            } else {
                println!("nu never held; diameter bound {bound} unexercised");
            }
            // self-check: the recursive bound must hold whenever nu does
            if nu_holds > 0 && worst_conditioned_diameter as u64 > bound {
                return Err(format!(
                    "diameter {worst_conditioned_diameter} exceeded the nu bound {bound}"
                )
                .into());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { seed } => {
            let results = lrp::oracle::run_suite(seed);
            let mut all_ok = true;
            for check in &results {
                let status = if check.passed { "PASS" } else { "FAIL" };
                println!("{status} {:<36} {}", check.name, check.detail);
                all_ok &= check.passed;
            }
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
