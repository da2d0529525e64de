//! Benchmark harness behind the `pbfs` command line: graph acquisition,
//! source selection, oracle verification and the timed kernel matrix with
//! CSV reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    compute_stats, generate, load_graph, CsrGraph, GeneratorSpec, GraphStats, IndexBase, VertexId,
};
use crate::instrumentation::{average_duplicate_percentage, time_against, write_trace_rows, Phase};
use crate::kernels::{bfs_serial, run_bfs, KernelConfig, Variant};

/// Default number of random sources per graph.
pub const DEFAULT_SOURCE_COUNT: usize = 64;

/// Environment variable consulted for the worker count list.
pub const THREADS_ENV: &str = "BFS_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum GraphInput {
    File {
        path: PathBuf,
        base: IndexBase,
        symmetrize: bool,
    },
    Generated(GeneratorSpec),
}

impl GraphInput {
    pub fn load(&self) -> Result<CsrGraph> {
        match self {
            GraphInput::File {
                path,
                base,
                symmetrize,
            } => load_graph(path, *base, *symmetrize),
            GraphInput::Generated(spec) => generate(spec),
        }
    }

    /// Short name used in the `graph` column of results.csv.
    pub fn label(&self) -> String {
        match self {
            GraphInput::File { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            GraphInput::Generated(spec) => spec.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourcePolicy {
    RandomNonZeroDegree { count: usize, seed: u64 },
    Explicit(Vec<VertexId>),
}

impl Default for SourcePolicy {
    fn default() -> Self {
        SourcePolicy::RandomNonZeroDegree {
            count: DEFAULT_SOURCE_COUNT,
            seed: 1,
        }
    }
}

/// Resolves a source policy on `graph`.
///
/// Random selection samples distinct non-isolated vertices; when the graph
/// has fewer than `count` of them all are used. A graph without any edge
/// has no eligible vertex, and vertex 0 is used instead.
pub fn select_sources(graph: &CsrGraph, policy: &SourcePolicy) -> Result<Vec<VertexId>> {
    match policy {
        SourcePolicy::Explicit(list) => {
            if list.is_empty() {
                return Err(Error::Config("explicit source list is empty".into()));
            }
            if let Some(&bad) = list.iter().find(|&&s| s as usize >= graph.vertex_count()) {
                return Err(Error::Config(format!(
                    "source {bad} out of range for {} vertices",
                    graph.vertex_count()
                )));
            }
            Ok(list.clone())
        }
        SourcePolicy::RandomNonZeroDegree { count, seed } => {
            if *count == 0 {
                return Err(Error::Config("source count must be >= 1".into()));
            }
            if graph.vertex_count() == 0 {
                return Err(Error::Input("graph has no vertices".into()));
            }
            let eligible: Vec<VertexId> = graph.non_isolated().collect();
            if eligible.is_empty() {
                return Ok(vec![0]);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let k = (*count).min(eligible.len());
            Ok(sample(&mut rng, eligible.len(), k)
                .into_iter()
                .map(|i| eligible[i])
                .collect())
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub graph: GraphInput,
    pub variants: Vec<Variant>,
    pub baseline: Variant,
    pub sources: SourcePolicy,
    pub trials: usize,
    pub warmups: usize,
    pub worker_counts: Vec<usize>,
    pub output_path: PathBuf,
    /// Thresholds and policy knobs shared by every run; `variant` and
    /// `worker_count` are overwritten per run.
    pub kernel: KernelConfig,
    pub classifier_threshold: f64,
}

impl BenchPlan {
    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::Config("no variants selected".into()));
        }
        if !self.variants.contains(&self.baseline) {
            return Err(Error::Config(format!(
                "baseline {} is not among the selected variants",
                self.baseline
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.worker_counts.is_empty() || self.worker_counts.contains(&0) {
            return Err(Error::Config("worker counts must be >= 1".into()));
        }
        self.kernel.validate()
    }
}

/// Prints the characterization of `graph` and returns it.
pub fn cmd_stats<W: Write>(graph: &CsrGraph, threshold: f64, out: &mut W) -> Result<GraphStats> {
    let stats = compute_stats(graph, threshold)?;
    let io = |e| Error::io("<stdout>", e);
    writeln!(out, "vertex_count   {}", stats.vertex_count).map_err(io)?;
    writeln!(out, "edge_count     {}", stats.edge_count).map_err(io)?;
    writeln!(out, "average_degree {:.2}", stats.average_degree).map_err(io)?;
    writeln!(out, "max_degree     {}", stats.max_degree).map_err(io)?;
    writeln!(out, "category       {}", stats.category).map_err(io)?;
    Ok(stats)
}

/// Test hook: overwrite one output distance before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorruptVertex(pub VertexId);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    pub variant: Variant,
    pub worker_count: usize,
    pub source: VertexId,
    pub vertex: VertexId,
    pub got: u32,
    pub want: u32,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub runs: usize,
    pub failures: Vec<VerifyFailure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares every variant × worker count × source against the serial
/// oracle and prints a pass/fail line per variant.
#[allow(clippy::too_many_arguments)]
pub fn cmd_verify<W: Write>(
    graph: &CsrGraph,
    variants: &[Variant],
    sources: &[VertexId],
    worker_counts: &[usize],
    template: &KernelConfig,
    classifier_threshold: f64,
    corrupt: Option<CorruptVertex>,
    out: &mut W,
) -> Result<VerifyReport> {
    let stats = compute_stats(graph, classifier_threshold)?;
    let io = |e| Error::io("<stdout>", e);
    let oracles = sources
        .iter()
        .map(|&s| bfs_serial(graph, s))
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerifyReport::default();
    writeln!(
        out,
        "verifying {} variant(s) x {} source(s) x threads {:?} ({})",
        variants.len(),
        sources.len(),
        worker_counts,
        stats.category
    )
    .map_err(io)?;
    for &variant in variants {
        let mut first: Option<VerifyFailure> = None;
        let mut failed = 0usize;
        for &workers in worker_counts {
            let config = KernelConfig {
                variant,
                worker_count: workers,
                ..template.clone()
            };
            for (&source, oracle) in sources.iter().zip(&oracles) {
                let (dist, _) = run_bfs(graph, source, &config, &stats)?;
                let mut dist = dist.into_vec();
                if let Some(CorruptVertex(v)) = corrupt {
                    if let Some(d) = dist.get_mut(v as usize) {
                        *d ^= 1;
                    }
                }
                report.runs += 1;
                let dist = crate::kernels::DistanceArray::from(dist);
                if let Some((vertex, got, want)) = dist.first_mismatch(oracle) {
                    failed += 1;
                    let f = VerifyFailure {
                        variant,
                        worker_count: workers,
                        source,
                        vertex,
                        got,
                        want,
                    };
                    first.get_or_insert(f.clone());
                    report.failures.push(f);
                }
            }
        }
        match first {
            None => writeln!(out, "{:<26} PASS", variant.name()).map_err(io)?,
            Some(f) => writeln!(
                out,
                "{:<26} FAIL ({failed} run(s)); first: variant={} threads={} source={} vertex={} got={} want={}",
                variant.name(),
                f.variant,
                f.worker_count,
                f.source,
                f.vertex,
                f.got,
                f.want
            )
            .map_err(io)?,
        }
    }
    Ok(report)
}

/// One row of results.csv.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub graph: String,
    pub variant: String,
    pub worker_count: usize,
    pub source: VertexId,
    pub trials: usize,
    pub median_ns: u128,
    pub min_ns: u128,
    pub max_ns: u128,
    pub total_edges_examined: u64,
    pub avg_duplicate_pct: f64,
    pub bu_levels: usize,
    pub td_levels: usize,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub rows: Vec<ResultRow>,
    /// `(variant, worker_count) -> geometric mean over sources of
    /// baseline_median / variant_median`.
    pub speedups: BTreeMap<(Variant, usize), f64>,
    pub results_path: PathBuf,
    pub traces_path: PathBuf,
}

fn geometric_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    (xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64).exp()
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Runs the timed variant × source × worker-count matrix on an already
/// loaded graph, writing `results.csv` and `traces.csv` under
/// `plan.output_path` and printing the speedup table to `out`.
pub fn cmd_run<W: Write>(plan: &BenchPlan, graph: &CsrGraph, out: &mut W) -> Result<RunReport> {
    plan.validate()?;
    let stats = compute_stats(graph, plan.classifier_threshold)?;
    let sources = select_sources(graph, &plan.sources)?;
    fs::create_dir_all(&plan.output_path).map_err(|e| Error::io(&plan.output_path, e))?;
    let results_path = plan.output_path.join("results.csv");
    let traces_path = plan.output_path.join("traces.csv");
    let mut results = csv::Writer::from_path(&results_path).map_err(csv_err(&results_path))?;
    let mut traces = csv::Writer::from_path(&traces_path).map_err(csv_err(&traces_path))?;
    let label = plan.graph.label();
    let io = |e| Error::io("<stdout>", e);

    writeln!(
        out,
        "graph {label}: N={} M={} avg_degree={:.2} {}; {} source(s), trials={}, warmups={}",
        stats.vertex_count,
        stats.edge_count,
        stats.average_degree,
        stats.category,
        sources.len(),
        plan.trials,
        plan.warmups
    )
    .map_err(io)?;

    let oracles = sources
        .iter()
        .map(|&s| bfs_serial(graph, s))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut medians: BTreeMap<(Variant, usize, VertexId), u128> = BTreeMap::new();
    let mut run_id = 0usize;
    for &workers in &plan.worker_counts {
        for &variant in &plan.variants {
            let config = KernelConfig {
                variant,
                worker_count: workers,
                ..plan.kernel.clone()
            };
            for (&source, oracle) in sources.iter().zip(&oracles) {
                let timing =
                    time_against(oracle, variant, source, plan.trials, plan.warmups, || {
                        run_bfs(graph, source, &config, &stats)
                    })?;
                let trace = &timing.trace;
                write_trace_rows(&mut traces, run_id, trace).map_err(csv_err(&traces_path))?;
                let row = ResultRow {
                    graph: label.clone(),
                    variant: variant.to_string(),
                    worker_count: workers,
                    source,
                    trials: plan.trials,
                    median_ns: timing.median.as_nanos(),
                    min_ns: timing.min().as_nanos(),
                    max_ns: timing.max().as_nanos(),
                    total_edges_examined: trace.total_edges_examined(),
                    avg_duplicate_pct: average_duplicate_percentage(trace).unwrap_or(0.0),
                    bu_levels: trace.levels_in(Phase::BottomUp),
                    td_levels: trace.levels_in(Phase::TopDown),
                };
                results.serialize(&row).map_err(csv_err(&results_path))?;
                medians.insert((variant, workers, source), row.median_ns.max(1));
                rows.push(row);
                run_id += 1;
            }
        }
    }
    results.flush().map_err(|e| Error::io(&results_path, e))?;
    traces.flush().map_err(|e| Error::io(&traces_path, e))?;

    let mut speedups = BTreeMap::new();
    writeln!(
        out,
        "\nspeedup vs {} (geometric mean over sources)",
        plan.baseline
    )
    .map_err(io)?;
    write!(out, "{:<26}", "variant").map_err(io)?;
    for w in &plan.worker_counts {
        write!(out, " {:>10}", format!("t={w}")).map_err(io)?;
    }
    writeln!(out).map_err(io)?;
    for &variant in &plan.variants {
        write!(out, "{:<26}", variant.name()).map_err(io)?;
        for &w in &plan.worker_counts {
            let ratios: Vec<f64> = sources
                .iter()
                .map(|&s| medians[&(plan.baseline, w, s)] as f64 / medians[&(variant, w, s)] as f64)
                .collect();
            let g = geometric_mean(&ratios);
            speedups.insert((variant, w), g);
            write!(out, " {:>10.3}", g).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }

    Ok(RunReport {
        rows,
        speedups,
        results_path,
        traces_path,
    })
}

pub fn cmd_generate(spec: &GeneratorSpec, path: &Path) -> Result<CsrGraph> {
    let graph = generate(spec)?;
    crate::graph::save_binary_csr(&graph, path)?;
    Ok(graph)
}

/// Process exit code for an error: 1 correctness, 3 I/O or file format,
/// 2 everything else (usage and configuration).
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Mismatch { .. } => 1,
        Error::Io { .. } | Error::Format { .. } | Error::Parse { .. } => 3,
        _ => 2,
    }
}
