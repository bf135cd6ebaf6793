use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collabtop::{
    build_instance, emit_csv, ingest_ratings, run_one, run_trials, summarize, verify, write_csv, Algo,
    ExperimentConfig, HarnessError, Ingested, Mode, Point, Result,
};

#[derive(Parser)]
#[command(name = "collabtop", version, about = "Collaborative top-m arm identification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-phase algorithm on IID data.
    RunIid(Opts),
    /// Coordinator-driven algorithm on agent-specific data.
    RunNoniid(Opts),
    /// One-round uniform sampling on agent-specific data.
    RunUniform(Opts),
    /// Sweep T or K for the algorithm given by --algo.
    Sweep(Opts),
    /// Print the instance a ratings file produces.
    Ingest(Opts),
    /// Run the oracle-equivalence suites.
    Verify {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Default)]
struct Opts {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Ratings CSV with header `user_id,item_id,rating`.
    #[arg(long)]
    ratings: Option<PathBuf>,
    #[arg(long)]
    min_count: Option<u64>,
    /// `T` or `K`.
    #[arg(long)]
    sweep_axis: Option<String>,
    /// Comma-separated values for the sweep axis.
    #[arg(long)]
    sweep_values: Option<String>,
    /// Comma-separated arm means for a synthetic instance.
    #[arg(long)]
    means: Option<String>,
    /// Spread of local means around the global mean, in [0, 1].
    #[arg(long)]
    heterogeneity: Option<f64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the message log of trial 0 at the first point as TSV.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

impl Opts {
    fn config(&self, algo: Option<Algo>) -> Result<ExperimentConfig> {
        let mut map = match &self.config {
            Some(path) => collabtop::config::read_kv_file(path)?,
            None => BTreeMap::new(),
        };
        let mut set = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                map.insert(key.to_string(), v);
            }
        };
        set("algo", self.algo.clone());
        set("n", self.n.map(|v| v.to_string()));
        set("m", self.m.map(|v| v.to_string()));
        set("agents", self.agents.map(|v| v.to_string()));
        set("horizon", self.horizon.map(|v| v.to_string()));
        set("trials", self.trials.map(|v| v.to_string()));
        set("seed", self.seed.map(|v| v.to_string()));
        set("ratings", self.ratings.as_ref().map(|p| p.display().to_string()));
        set("min_count", self.min_count.map(|v| v.to_string()));
        set("sweep_axis", self.sweep_axis.clone());
        set("sweep_values", self.sweep_values.clone());
        set("means", self.means.clone());
        set("heterogeneity", self.heterogeneity.map(|v| v.to_string()));
        if let Some(algo) = algo {
            map.insert("algo".into(), algo.to_string());
        }
        ExperimentConfig::from_map(&map)
    }
}

fn run(opts: &Opts, algo: Option<Algo>, need_sweep: bool) -> Result<()> {
    let config = opts.config(algo)?;
    if need_sweep && config.sweep.is_none() {
        return Err(HarnessError::Config("sweep needs --sweep-axis and --sweep-values".into()));
    }
    let records = run_trials(&config)?;
    match &opts.out {
        Some(path) => emit_csv(&records, path)?,
        None => write_csv(&records, std::io::stdout().lock())?,
    }
    for s in summarize(&records) {
        eprintln!(
            "{} n={} m={} K={} T={}: error rate {:.4} over {} trials, mean words {:.1}",
            s.algorithm, s.n, s.m, s.agents, s.horizon, s.error_rate, s.trials, s.mean_words
        );
    }
    if let Some(path) = &opts.transcript {
        let point: Point = config.points()[0];
        let instance = build_instance(&config, point.agents)?;
        let out = run_one(config.algo, &instance, config.m, point, collabtop_core::trial_seed(config.seed, 0))?;
        let mut tsv = String::new();
        out.transcript.dump_tsv(&mut tsv).expect("writing to a String cannot fail");
        std::fs::write(path, tsv).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
    }
    Ok(())
}

fn ingest(opts: &Opts) -> Result<()> {
    let config = opts.config(None)?;
    let collabtop::Source::Ratings { path, min_count } = &config.source else {
        return Err(HarnessError::Config("ingest needs --ratings".into()));
    };
    let mode = if config.algo == Algo::Iid { Mode::Iid } else { Mode::NonIid { agents: config.agents } };
    let mut out = std::io::stdout().lock();
    let line = |out: &mut std::io::StdoutLock, text: String| {
        writeln!(out, "{text}").map_err(|source| HarnessError::Io { path: "<stdout>".into(), source })
    };
    match ingest_ratings(path, mode, *min_count)? {
        Ingested::Iid { items, instance } => {
            line(&mut out, "arm,item_id,mean".into())?;
            for (i, (item, mu)) in items.iter().zip(instance.means()).enumerate() {
                line(&mut out, format!("{},{item},{mu}", i + 1))?;
            }
        }
        Ingested::NonIid { items, instance } => {
            let groups: Vec<String> = (0..instance.agents()).map(|g| format!("group{g}")).collect();
            line(&mut out, format!("arm,item_id,global,{}", groups.join(",")))?;
            let global = instance.global_means();
            for (i, item) in items.iter().enumerate() {
                let locals: Vec<String> =
                    (0..instance.agents()).map(|g| instance.local_mean(g, i).to_string()).collect();
                line(&mut out, format!("{},{item},{},{}", i + 1, global[i], locals.join(",")))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::RunIid(o) => run(o, Some(Algo::Iid), false),
        Command::RunNoniid(o) => run(o, Some(Algo::NonIid), false),
        Command::RunUniform(o) => run(o, Some(Algo::Uniform), false),
        Command::Sweep(o) => run(o, None, true),
        Command::Ingest(o) => ingest(o),
        Command::Verify { cases, seed } => {
            let checks = verify::run_all(*cases, *seed);
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                return ExitCode::FAILURE;
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
