use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patchrecall::config::{parse_list, Overrides, ProviderChoice, RunConfig};
use patchrecall::fixtures::{write_hybrid_fixture, write_semantic_fixture, HybridFixtureSpec};
use patchrecall::pipeline::{
    cmd_eval, cmd_index, cmd_retrieve, cmd_stats, cmd_sweep, Engine, MethodName,
};
use patchrecall::report;
use patchrecall::{Error, Result};
use patchrecall_core::corpus::Split;

/// Hybrid file localization: BM25, TF-IDF, dense and history retrieval,
/// alpha fusion and recall@k evaluation.
///
/// Settings resolve as built-in defaults, then --config, then flags.
/// PATCHRECALL_ENDPOINT supplies the remote endpoint when none is set.
/// Exit status: 0 ok, 2 usage or configuration, 3 data resolution, 4 pipeline.
#[derive(Debug, Parser)]
#[command(name = "patchrecall", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Files-per-patch histogram of the evaluation split.
    Stats(RunArgs),
    /// Persist the sparse index of each snapshot.
    Index {
        #[command(flatten)]
        run: RunArgs,
        /// Only index this instance's snapshot.
        #[arg(long)]
        instance: Option<String>,
    },
    /// Print the top-k files of one instance as "rank docid score".
    Retrieve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        instance: String,
        /// bm25, tfidf, dense, history or hybrid.
        #[arg(long, value_parser = parse_method)]
        method: MethodName,
        /// A sparse index written by `index`, used instead of re-indexing.
        #[arg(long)]
        index: Option<PathBuf>,
    },
    /// Recall@k of single methods over the evaluation split.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated methods.
        #[arg(long, default_value = "bm25,tfidf,history", value_parser = parse_methods)]
        methods: MethodList,
    },
    /// Recall over the alpha-by-k grid plus qualitative checks.
    Sweep(RunArgs),
    /// Generate a synthetic benchmark suite.
    Fixture {
        #[arg(long, value_enum, default_value = "hybrid")]
        kind: FixtureKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FixtureKind {
    Hybrid,
    Semantic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProviderArg {
    Remote,
    Precomputed,
    Fallback,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitArg {
    Verified,
    Unverified,
}

/// A comma-separated flag value.
#[derive(Debug, Clone)]
struct List<T>(Vec<T>);

#[derive(Debug, Clone)]
struct MethodList(Vec<MethodName>);

fn parse_alphas(s: &str) -> std::result::Result<List<f64>, String> {
    parse_list(s).map(List)
}

fn parse_ks(s: &str) -> std::result::Result<List<usize>, String> {
    parse_list(s).map(List)
}

fn parse_method(s: &str) -> std::result::Result<MethodName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_methods(s: &str) -> std::result::Result<MethodList, String> {
    s.split(',')
        .map(|m| parse_method(m.trim()))
        .collect::<std::result::Result<_, _>>()
        .map(MethodList)
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Line-delimited JSON dataset.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Snapshot manifest, or a directory with one checkout per instance id.
    #[arg(long)]
    snapshots: Option<PathBuf>,
    /// File listing verified instance ids, one per line.
    #[arg(long)]
    verified_ids: Option<PathBuf>,
    /// Split to evaluate.
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
    /// Embedding provider for dense and history retrieval.
    #[arg(long, value_enum)]
    provider: Option<ProviderArg>,
    /// Base URL of the remote embedding service.
    #[arg(long)]
    endpoint: Option<String>,
    /// JSONL file of precomputed vectors.
    #[arg(long)]
    embeddings_file: Option<PathBuf>,
    /// Embedding model name sent to the remote provider.
    #[arg(long)]
    model: Option<String>,
    /// Weight of the dense stream in hybrid retrieval.
    #[arg(long)]
    alpha: Option<f64>,
    /// Files printed by retrieve.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated alpha grid.
    #[arg(long, value_parser = parse_alphas)]
    alphas: Option<List<f64>>,
    /// Comma-separated cutoffs.
    #[arg(long, value_parser = parse_ks)]
    ks: Option<List<usize>>,
    /// Past issues consulted by history retrieval.
    #[arg(long)]
    n_issues: Option<usize>,
    /// Restrict history to past issues of the same repository.
    #[arg(long)]
    same_repo_only: Option<bool>,
    /// Candidates per stream before fusion (0: the largest k).
    #[arg(long)]
    depth: Option<usize>,
    /// Worker threads (0: one per core).
    #[arg(long)]
    jobs: Option<usize>,
    /// Include glob for snapshot files; repeatable.
    #[arg(long)]
    include: Option<Vec<String>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::from_file(self.config.as_deref())?;
        cfg.apply(&Overrides {
            dataset: self.dataset.clone(),
            snapshots: self.snapshots.clone(),
            verified_ids: self.verified_ids.clone(),
            output_dir: self.out.clone(),
            split: self.split.map(|s| match s {
                SplitArg::Verified => Split::Verified,
                SplitArg::Unverified => Split::Unverified,
            }),
            provider: self.provider.map(|p| match p {
                ProviderArg::Remote => ProviderChoice::Remote,
                ProviderArg::Precomputed => ProviderChoice::Precomputed,
                ProviderArg::Fallback => ProviderChoice::Fallback,
            }),
            endpoint: self.endpoint.clone(),
            embeddings_file: self.embeddings_file.clone(),
            model: self.model.clone(),
            alpha: self.alpha,
            k: self.k,
            alphas: self.alphas.clone().map(|l| l.0),
            ks: self.ks.clone().map(|l| l.0),
            n_issues: self.n_issues,
            same_repo_only: self.same_repo_only,
            depth: self.depth,
            jobs: self.jobs,
            include: self.include.clone(),
            seed: None,
        });
        cfg.apply_env();
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats(args) => {
            let engine = Engine::open(args.resolve()?, false)?;
            let hist = cmd_stats(&engine)?;
            print!("{}", report::histogram_csv(&hist));
            println!("single_file_fraction {}", hist.single_file_fraction());
        }
        Command::Index { run, instance } => {
            let engine = Engine::open(run.resolve()?, true)?;
            for p in cmd_index(&engine, instance.as_deref())? {
                println!("{}", p.display());
            }
        }
        Command::Retrieve {
            run,
            instance,
            method,
            index,
        } => {
            let engine = Engine::open(run.resolve()?, true)?;
            let k = engine.config().fusion.k;
            let out = cmd_retrieve(&engine, &instance, method, k, index.as_deref())?;
            for line in out.lines {
                println!("{line}");
            }
        }
        Command::Eval { run, methods } => {
            let engine = Engine::open(run.resolve()?, true)?;
            let reports = cmd_eval(&engine, &methods.0)?;
            print!("{}", report::method_csv(&reports));
        }
        Command::Sweep(args) => {
            let engine = Engine::open(args.resolve()?, true)?;
            let out = cmd_sweep(&engine)?;
            print!("{}", report::grid_csv(&out.grid));
            println!(
                "flags baseline_ordering={} alpha_peak_in_band={} curves_monotone={} argmax_alphas={:?}",
                out.flags.baseline_ordering,
                out.flags.alpha_peak_in_band,
                out.flags.curves_monotone,
                out.flags.argmax_alphas
            );
        }
        Command::Fixture {
            kind,
            out,
            instances,
            seed,
        } => {
            report::ensure_dir(&out)?;
            let layout = match kind {
                FixtureKind::Hybrid => {
                    let mut spec = HybridFixtureSpec {
                        seed,
                        ..HybridFixtureSpec::default()
                    };
                    if let Some(n) = instances {
                        spec.instances = n;
                    }
                    write_hybrid_fixture(&out, &spec)?
                }
                FixtureKind::Semantic => {
                    write_semantic_fixture(&out, instances.unwrap_or(5), seed)?
                }
            };
            println!("dataset {}", layout.dataset.display());
            println!("snapshots {}", layout.snapshots.display());
            if let Some(e) = layout.embeddings {
                println!("embeddings {}", e.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("patchrecall: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
