//! Command-line entry point: simulate datasets, score SNP sets, run
//! exhaustive scans, train the search agent, and orchestrate experiments.
//! Results are JSON on stdout (or `--out`); failures exit nonzero with a
//! `{"error": {kind, message}}` line on stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use episcan::action::ActionSet;
use episcan::agent::{train_with, StepRecord};
use episcan::config::{load_sim_config, load_train_config};
use episcan::data::{load_dataset, render_dataset, simulate_dataset, write_dataset, GenotypeMatrix};
use episcan::error::{Error, Result};
use episcan::exhaustive::exhaustive_topk;
use episcan::harness::{compare_baseline, recall_at_k, run_trials, trials_csv, RecallBackend};
use episcan::reward::reward;
use episcan::{Scalar, SearchResult, TrainConfig};

#[derive(Parser)]
#[command(
    name = "episcan",
    version,
    about = "Epistatic SNP-set detection: MDR reward scoring, exhaustive scans, and a policy-gradient search agent"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file: the simulator schema for `simulate`, the training
    /// schema everywhere else
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel scans and trial batches (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the primary result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a case/control dataset from a penetrance-table model
    Simulate {
        /// Override the number of case rows (default 300)
        #[arg(long)]
        n_case: Option<usize>,
        /// Override the number of control rows (default 300)
        #[arg(long)]
        n_control: Option<usize>,
        /// Also write the planted interaction as JSON
        #[arg(long)]
        truth_out: Option<PathBuf>,
    },
    /// Score one SNP set: CCR, rule utility and their sum
    Reward {
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated SNP names or column indices
        #[arg(long)]
        snps: String,
    },
    /// Score every k-combination and rank the best
    Exhaustive {
        #[arg(long)]
        data: PathBuf,
        /// Interaction order k
        #[arg(long)]
        order: usize,
        /// How many top sets to keep
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// One agent training run
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Override the iteration cap
        #[arg(long)]
        max_iter: Option<u64>,
        /// Stop at the first iteration selecting exactly this set
        /// (comma-separated names or indices)
        #[arg(long)]
        ground_truth: Option<String>,
        /// Stream per-iteration step records to this file as JSON lines
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Omit wall-clock fields so the report is byte-reproducible
        #[arg(long)]
        no_timing: bool,
    },
    /// Independent training runs over a seed list, with a summary
    Trials {
        #[arg(long)]
        data: PathBuf,
        /// Number of trials; seeds are seed, seed+1, ...
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Explicit comma-separated seed list (overrides --trials)
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        ground_truth: Option<String>,
        #[arg(long)]
        max_iter: Option<u64>,
        /// Omit wall-clock fields so the report is byte-reproducible
        #[arg(long)]
        no_timing: bool,
    },
    /// Recall at K over a manifest of datasets with known truths
    Recall {
        /// JSON manifest: [{"data": "path.tsv", "truth": [i, j]}, ...]
        #[arg(long)]
        manifest: PathBuf,
        /// K: how many top sets to search for the truth in
        #[arg(long)]
        top_k: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Agent)]
        backend: BackendArg,
        /// Interaction order (exhaustive backend only)
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        max_iter: Option<u64>,
    },
    /// Wall-clock comparison: agent time-to-find vs exhaustive scan
    Compare {
        #[arg(long)]
        data: PathBuf,
        /// Interaction order k
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        max_iter: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Agent,
    Exhaustive,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            e.exit()
        }
        Err(e) => {
            let payload = serde_json::json!({
                "error": { "kind": "usage", "message": e.to_string() }
            });
            eprintln!("{payload}");
            std::process::exit(2);
        }
    };
    if let Err(e) = run(cli) {
        let payload = serde_json::json!({
            "error": { "kind": e.kind(), "message": e.to_string() }
        });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Simulate {
            n_case,
            n_control,
            truth_out,
        } => simulate_cmd(&cli, *n_case, *n_control, truth_out.as_deref()),
        Command::Reward { data, snps } => {
            let data = load_dataset(data)?;
            let set = parse_snp_set(&data, snps)?;
            let reward = reward::<Scalar>(&data, &set)?;
            emit(
                &cli.out,
                &serde_json::json!({
                    "snps": set_view(&data, &set),
                    "ccr": reward.ccr,
                    "utility": reward.utility,
                    "total": reward.total,
                }),
            )
        }
        Command::Exhaustive { data, order, top } => {
            let data = load_dataset(data)?;
            let result: SearchResult = exhaustive_topk(&data, *order, *top)?;
            emit(&cli.out, &exhaustive_view(&data, *order, &result))
        }
        Command::Train {
            data,
            max_iter,
            ground_truth,
            trajectory,
            no_timing,
        } => {
            let data = load_dataset(data)?;
            let cfg = train_config(&cli, *max_iter)?;
            let truth = ground_truth
                .as_deref()
                .map(|s| parse_snp_set(&data, s))
                .transpose()?;
            let mut report = match trajectory {
                None => train_with(&data, &cfg, truth.as_ref(), |_| Ok(()))?,
                Some(path) => {
                    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
                    let mut sink = std::io::BufWriter::new(file);
                    let report = train_with(&data, &cfg, truth.as_ref(), |rec: &StepRecord<Scalar>| {
                        let line = serde_json::to_string(rec)?;
                        writeln!(sink, "{line}").map_err(|e| Error::io(path, e))
                    })?;
                    sink.flush().map_err(|e| Error::io(path, e))?;
                    report
                }
            };
            if *no_timing {
                report.elapsed_seconds = None;
            }
            emit(&cli.out, &report)
        }
        Command::Trials {
            data,
            trials,
            seeds,
            ground_truth,
            max_iter,
            no_timing,
        } => {
            let data = load_dataset(data)?;
            let cfg = train_config(&cli, *max_iter)?;
            let seed_list = seed_list(seeds.as_deref(), cfg.seed, *trials)?;
            let truth = ground_truth
                .as_deref()
                .map(|s| parse_snp_set(&data, s))
                .transpose()?;
            let mut report = run_trials(&data, &cfg, &seed_list, truth.as_ref())?;
            if *no_timing {
                report.strip_timing();
            }
            if let Some(out) = &cli.out {
                let csv_path = out.with_extension("csv");
                fs::write(&csv_path, trials_csv(&report))
                    .map_err(|e| Error::io(&csv_path, e))?;
            }
            emit(&cli.out, &report)
        }
        Command::Recall {
            manifest,
            top_k,
            backend,
            order,
            max_iter,
        } => {
            let cfg = train_config(&cli, *max_iter)?;
            let entries = load_manifest(manifest)?;
            let mut datasets = Vec::with_capacity(entries.len());
            let mut truths = Vec::with_capacity(entries.len());
            for entry in &entries {
                let data = load_dataset(&entry.data)?;
                let truth = ActionSet::new(entry.truth.clone())?;
                datasets.push(data);
                truths.push(truth);
            }
            let backend = match backend {
                BackendArg::Agent => RecallBackend::Agent,
                BackendArg::Exhaustive => RecallBackend::Exhaustive {
                    order: order.ok_or_else(|| {
                        Error::config("--order is required with the exhaustive backend")
                    })?,
                },
            };
            let report = recall_at_k(&datasets, &truths, &cfg, *top_k, backend)?;
            let paths: Vec<&Path> = entries.iter().map(|e| e.data.as_path()).collect();
            emit(
                &cli.out,
                &serde_json::json!({ "datasets": paths, "report": report }),
            )
        }
        Command::Compare {
            data,
            order,
            trials,
            seeds,
            max_iter,
        } => {
            let data = load_dataset(data)?;
            let cfg = train_config(&cli, *max_iter)?;
            let seed_list = seed_list(seeds.as_deref(), cfg.seed, *trials)?;
            let report = compare_baseline(&data, &cfg, *order, &seed_list)?;
            emit(&cli.out, &report)
        }
    }
}

fn simulate_cmd(
    cli: &Cli,
    n_case: Option<usize>,
    n_control: Option<usize>,
    truth_out: Option<&Path>,
) -> Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::config("simulate requires --config with a simulator config"))?;
    let mut sim = load_sim_config(path)?;
    if let Some(seed) = cli.seed {
        sim.model.seed = seed;
    }
    let data = simulate_dataset(
        &sim.model,
        n_case.unwrap_or(sim.n_case),
        n_control.unwrap_or(sim.n_control),
    )?;
    match &cli.out {
        Some(out) => write_dataset(out, &data)?,
        None => print!("{}", render_dataset(&data)),
    }
    if let Some(truth_path) = truth_out {
        let names: Vec<&str> = sim
            .model
            .interacting_snps
            .iter()
            .map(|&i| data.snp_names()[i].as_str())
            .collect();
        let truth = serde_json::json!({
            "indices": sim.model.interacting_snps,
            "names": names,
        });
        fs::write(truth_path, format!("{:#}\n", truth)).map_err(|e| Error::io(truth_path, e))?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct ManifestEntry {
    data: PathBuf,
    truth: Vec<usize>,
}

fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)?;
    if entries.is_empty() {
        return Err(Error::precondition("manifest lists no datasets"));
    }
    Ok(entries)
}

/// Training config from --config (or defaults) with CLI overrides applied.
fn train_config(cli: &Cli, max_iter: Option<u64>) -> Result<TrainConfig> {
    let mut cfg = match &cli.config {
        Some(path) => load_train_config::<Scalar>(path)?,
        None => TrainConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(iters) = max_iter {
        cfg.max_iterations = iters;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn seed_list(explicit: Option<&str>, base: u64, count: usize) -> Result<Vec<u64>> {
    match explicit {
        Some(text) => text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::config(format!("bad seed {s:?}")))
            })
            .collect(),
        None => {
            if count == 0 {
                return Err(Error::precondition("at least one trial is required"));
            }
            Ok((base..base + count as u64).collect())
        }
    }
}

/// Accepts SNP names or plain column indices, comma-separated.
fn parse_snp_set(data: &GenotypeMatrix, text: &str) -> Result<ActionSet> {
    let mut indices = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let index = match data.snp_index(token) {
            Some(i) => i,
            None => token.parse::<usize>().map_err(|_| {
                Error::config(format!("{token:?} is neither a SNP name nor an index"))
            })?,
        };
        if index >= data.n_snps() {
            return Err(Error::precondition(format!(
                "SNP index {index} out of bounds for {} SNPs",
                data.n_snps()
            )));
        }
        indices.push(index);
    }
    ActionSet::new(indices)
}

#[derive(Serialize)]
struct SetView {
    indices: Vec<usize>,
    names: Vec<String>,
}

fn set_view(data: &GenotypeMatrix, set: &ActionSet) -> SetView {
    SetView {
        indices: set.indices().to_vec(),
        names: set
            .indices()
            .iter()
            .map(|&i| data.snp_names()[i].clone())
            .collect(),
    }
}

fn exhaustive_view(data: &GenotypeMatrix, order: usize, result: &SearchResult) -> serde_json::Value {
    let entries: Vec<serde_json::Value> = result
        .entries
        .iter()
        .map(|e| {
            serde_json::json!({
                "set": set_view(data, &e.set),
                "ccr": e.reward.ccr,
                "utility": e.reward.utility,
                "total": e.reward.total,
            })
        })
        .collect();
    serde_json::json!({
        "order": order,
        "evaluated": result.evaluated,
        "elapsed_seconds": result.elapsed_seconds,
        "entries": entries,
    })
}

fn emit(out: &Option<PathBuf>, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
        }
        None => println!("{text}"),
    }
    Ok(())
}
