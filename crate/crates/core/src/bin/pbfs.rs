use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pbfs::bench::{
    cmd_generate, cmd_run, cmd_stats, cmd_verify, exit_code, select_sources, BenchPlan,
    CorruptVertex, GraphInput, SourcePolicy, DEFAULT_SOURCE_COUNT, THREADS_ENV,
};
use pbfs::graph::{GeneratorSpec, IndexBase, DEFAULT_CLASSIFIER_THRESHOLD};
use pbfs::kernels::{
    KernelConfig, Variant, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_FLUSH_CAPACITY,
    DEFAULT_HYBRID_THRESHOLD,
};
use pbfs::{Error, Result};

#[derive(Parser)]
#[command(
    name = "pbfs",
    version,
    about = "Parallel BFS kernels and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print vertex/edge counts, degrees and the diameter category.
    Stats {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = DEFAULT_CLASSIFIER_THRESHOLD)]
        classifier_threshold: f64,
    },
    /// Check every variant against the serial oracle.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        select: SelectArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        /// Flip the low bit of this vertex's distance in every result.
        #[arg(long, hide = true)]
        corrupt_vertex: Option<u32>,
    },
    /// Time the variant x source x thread-count matrix and write CSV reports.
    Run {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        select: SelectArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value = "conventional")]
        baseline: Variant,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        warmups: usize,
        /// Directory receiving results.csv and traces.csv.
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
    /// Generate a synthetic graph and save it as binary CSR.
    Generate {
        /// KIND:SCALE:EDGE_FACTOR:SEED, e.g. kron:16:16:1
        #[arg(long = "gen")]
        spec: GeneratorSpec,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "input")]
struct InputChoice {
    /// Edge list or binary CSR file.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Synthetic graph KIND:SCALE:EDGE_FACTOR:SEED.
    #[arg(long = "gen")]
    spec: Option<GeneratorSpec>,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    input: InputChoice,
    /// Edge list vertex ids start at 1.
    #[arg(long)]
    one_based: bool,
    /// Keep edge lists directed instead of symmetrizing them.
    #[arg(long)]
    directed: bool,
}

impl GraphArgs {
    fn input(&self) -> GraphInput {
        match (&self.input.graph, &self.input.spec) {
            (Some(path), _) => GraphInput::File {
                path: path.clone(),
                base: if self.one_based {
                    IndexBase::One
                } else {
                    IndexBase::Zero
                },
                symmetrize: !self.directed,
            },
            (None, Some(spec)) => GraphInput::Generated(*spec),
            (None, None) => unreachable!("clap enforces one input"),
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    /// Comma-separated variants, or "all" for every parallel kernel.
    #[arg(long, default_value = "all")]
    variants: String,
    /// Number of random non-isolated sources.
    #[arg(long, default_value_t = DEFAULT_SOURCE_COUNT, conflicts_with = "source_list")]
    sources: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Explicit comma-separated source vertices.
    #[arg(long, value_delimiter = ',')]
    source_list: Option<Vec<u32>>,
}

impl SelectArgs {
    fn variants(&self) -> Result<Vec<Variant>> {
        if self.variants.trim().eq_ignore_ascii_case("all") {
            return Ok(Variant::PARALLEL.to_vec());
        }
        self.variants
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<Variant>()
                    .map_err(|e| Error::Config(e.to_string()))
            })
            .collect()
    }

    fn policy(&self) -> SourcePolicy {
        match &self.source_list {
            Some(list) => SourcePolicy::Explicit(list.clone()),
            None => SourcePolicy::RandomNonZeroDegree {
                count: self.sources,
                seed: self.seed,
            },
        }
    }
}

#[derive(Args)]
struct KernelArgs {
    /// Comma-separated worker counts.
    #[arg(long, env = THREADS_ENV, value_delimiter = ',')]
    threads: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_HYBRID_THRESHOLD)]
    hybrid_threshold: f64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = DEFAULT_FLUSH_CAPACITY)]
    flush_capacity: usize,
    #[arg(long, default_value_t = DEFAULT_CLASSIFIER_THRESHOLD)]
    classifier_threshold: f64,
    /// Pin worker i to CPU i (Linux only).
    #[arg(long)]
    pin: bool,
    /// Count non-atomic stores that overwrite a different distance.
    #[arg(long)]
    check_races: bool,
}

impl KernelArgs {
    fn worker_counts(&self) -> Vec<usize> {
        self.threads
            .clone()
            .unwrap_or_else(|| vec![std::thread::available_parallelism().map_or(1, |n| n.get())])
    }

    fn template(&self) -> Result<KernelConfig> {
        let config = KernelConfig {
            hybrid_threshold_fraction: self.hybrid_threshold,
            alpha: self.alpha,
            beta: self.beta,
            flush_capacity: self.flush_capacity,
            pin_workers: self.pin,
            check_races: self.check_races,
            ..KernelConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Stats {
            graph,
            classifier_threshold,
        } => {
            let g = graph.input().load()?;
            cmd_stats(&g, classifier_threshold, &mut out)?;
        }
        Command::Verify {
            graph,
            select,
            kernel,
            corrupt_vertex,
        } => {
            let variants = select.variants()?;
            let template = kernel.template()?;
            let workers = kernel.worker_counts();
            let g = graph.input().load()?;
            let sources = select_sources(&g, &select.policy())?;
            let report = cmd_verify(
                &g,
                &variants,
                &sources,
                &workers,
                &template,
                kernel.classifier_threshold,
                corrupt_vertex.map(CorruptVertex),
                &mut out,
            )?;
            out.flush().map_err(|e| Error::io("<stdout>", e))?;
            if let Some(f) = report.failures.first() {
                eprintln!(
                    "pbfs: mismatch: variant={} threads={} source={} vertex={} got={} want={}",
                    f.variant, f.worker_count, f.source, f.vertex, f.got, f.want
                );
                return Ok(ExitCode::from(1));
            }
        }
        Command::Run {
            graph,
            select,
            kernel,
            baseline,
            trials,
            warmups,
            out: output_path,
        } => {
            let plan = BenchPlan {
                graph: graph.input(),
                variants: select.variants()?,
                baseline,
                sources: select.policy(),
                trials,
                warmups,
                worker_counts: kernel.worker_counts(),
                output_path,
                kernel: kernel.template()?,
                classifier_threshold: kernel.classifier_threshold,
            };
            plan.validate()?;
            let g = plan.graph.load()?;
            let report = cmd_run(&plan, &g, &mut out)?;
            writeln!(
                out,
                "\nwrote {} and {}",
                report.results_path.display(),
                report.traces_path.display()
            )
            .map_err(|e| Error::io("<stdout>", e))?;
        }
        Command::Generate { spec, out: path } => {
            let g = cmd_generate(&spec, &path)?;
            writeln!(
                out,
                "wrote {} ({} vertices, {} edges)",
                path.display(),
                g.vertex_count(),
                g.edge_count()
            )
            .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pbfs: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
