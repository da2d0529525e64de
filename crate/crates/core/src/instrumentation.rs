//! Per-level traversal traces, duplicate metrics and wall-clock timing.

use std::fmt;
use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{CsrGraph, VertexId};
use crate::kernels::{bfs_serial, run_kernel, DistanceArray, KernelConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    TopDown,
    BottomUp,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::TopDown => "TD",
            Phase::BottomUp => "BU",
        })
    }
}

/// One BFS level. Size fields describe the frontier at `depth` as it was
/// produced (duplicates included); work fields describe expanding it into
/// the frontier at `depth + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelRecord {
    pub depth: u32,
    pub phase: Phase,
    pub frontier_size: usize,
    pub distinct_size: usize,
    pub duplicate_count: usize,
    pub edges_examined: u64,
    pub flush_events: u64,
    pub elapsed: Duration,
}

impl LevelRecord {
    pub fn duplicate_fraction(&self) -> Option<f64> {
        (self.frontier_size > 0).then(|| self.duplicate_count as f64 / self.frontier_size as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraversalTrace {
    pub records: Vec<LevelRecord>,
    pub total_elapsed: Duration,
    pub variant: Variant,
    pub worker_count: usize,
    pub source: VertexId,
    /// Non-atomic distance stores that overwrote a value other than the
    /// sentinel or the value being written. Only counted when
    /// `KernelConfig::check_races` is set.
    pub race_violations: u64,
    /// Deferred-mode distance writes that were not ascending within a
    /// worker's batch. Only counted with `check_races`.
    pub deferred_order_violations: u64,
    /// Sorted distinct vertex set of every level, when
    /// `KernelConfig::capture_frontiers` is set.
    pub frontiers: Option<Vec<Vec<VertexId>>>,
}

impl TraversalTrace {
    pub fn new(variant: Variant, worker_count: usize, source: VertexId) -> Self {
        TraversalTrace {
            records: Vec::new(),
            total_elapsed: Duration::ZERO,
            variant,
            worker_count,
            source,
            race_violations: 0,
            deferred_order_violations: 0,
            frontiers: None,
        }
    }

    pub fn total_edges_examined(&self) -> u64 {
        self.records.iter().map(|r| r.edges_examined).sum()
    }

    pub fn levels_in(&self, phase: Phase) -> usize {
        self.records.iter().filter(|r| r.phase == phase).count()
    }

    pub fn phases(&self) -> Vec<Phase> {
        self.records.iter().map(|r| r.phase).collect()
    }

    pub fn total_flush_events(&self) -> u64 {
        self.records.iter().map(|r| r.flush_events).sum()
    }
}

/// Mean over levels of `100 * duplicates / frontier_size`, skipping empty
/// levels. Level 0 (the source) is included.
pub fn average_duplicate_percentage(trace: &TraversalTrace) -> Result<f64> {
    let fractions: Vec<f64> = trace
        .records
        .iter()
        .filter_map(LevelRecord::duplicate_fraction)
        .collect();
    if fractions.is_empty() {
        return Err(Error::UndefinedMetric(
            "average duplicate percentage of a trace without non-empty levels".into(),
        ));
    }
    Ok(100.0 * fractions.iter().sum::<f64>() / fractions.len() as f64)
}

pub fn frontier_size_series(trace: &TraversalTrace) -> Vec<(u32, usize)> {
    trace
        .records
        .iter()
        .map(|r| (r.depth, r.frontier_size))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Timing {
    pub median: Duration,
    pub samples: Vec<Duration>,
    pub trace: TraversalTrace,
}

impl Timing {
    pub fn min(&self) -> Duration {
        self.samples.iter().copied().min().unwrap_or_default()
    }

    pub fn max(&self) -> Duration {
        self.samples.iter().copied().max().unwrap_or_default()
    }
}

/// Times `config` on `graph` from `source`: `warmups` untimed runs, then
/// `trials` timed runs. Every run is checked against the serial oracle.
pub fn time_run(
    graph: &CsrGraph,
    source: VertexId,
    config: &KernelConfig,
    trials: usize,
    warmups: usize,
) -> Result<Timing> {
    let oracle = bfs_serial(graph, source)?;
    time_against(&oracle, config.variant, source, trials, warmups, || {
        run_kernel(graph, source, config)
    })
}

/// Timing loop over an arbitrary runner; `time_run` wraps this. Aborts with
/// [`Error::Mismatch`] on the first run that disagrees with `oracle`.
pub fn time_against<F>(
    oracle: &DistanceArray,
    variant: Variant,
    source: VertexId,
    trials: usize,
    warmups: usize,
    mut run: F,
) -> Result<Timing>
where
    F: FnMut() -> Result<(DistanceArray, TraversalTrace)>,
{
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let check = |dist: &DistanceArray| -> Result<()> {
        match dist.first_mismatch(oracle) {
            None => Ok(()),
            Some((vertex, got, want)) => Err(Error::Mismatch {
                variant: variant.to_string(),
                source_vertex: source,
                vertex,
                got,
                want,
            }),
        }
    };
    for _ in 0..warmups {
        let (dist, _) = run()?;
        check(&dist)?;
    }
    let mut runs = Vec::with_capacity(trials);
    for _ in 0..trials {
        let start = Instant::now();
        let (dist, trace) = run()?;
        let elapsed = start.elapsed();
        check(&dist)?;
        runs.push((elapsed, trace));
    }
    let samples: Vec<Duration> = runs.iter().map(|r| r.0).collect();
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by_key(|&i| runs[i].0);
    // Lower median for even counts, so the median is always a real sample.
    let mid = order[(order.len() - 1) / 2];
    let (median, trace) = runs.swap_remove(mid);
    Ok(Timing {
        median,
        samples,
        trace,
    })
}

#[derive(Debug, Serialize)]
struct TraceRow<'a> {
    run_id: usize,
    variant: &'a str,
    source: VertexId,
    depth: u32,
    phase: String,
    frontier_size: usize,
    distinct_size: usize,
    duplicate_count: usize,
    edges_examined: u64,
    flush_events: u64,
    elapsed_ns: u128,
}

/// Header line of the trace CSV.
pub const TRACE_CSV_HEADER: [&str; 11] = [
    "run_id",
    "variant",
    "source",
    "depth",
    "phase",
    "frontier_size",
    "distinct_size",
    "duplicate_count",
    "edges_examined",
    "flush_events",
    "elapsed_ns",
];

/// Appends one row per level of `trace`. The writer must have been created
/// with headers enabled, or [`TRACE_CSV_HEADER`] written by hand.
pub fn write_trace_rows<W: Write>(
    out: &mut csv::Writer<W>,
    run_id: usize,
    trace: &TraversalTrace,
) -> csv::Result<()> {
    let variant = trace.variant.to_string();
    for r in &trace.records {
        out.serialize(TraceRow {
            run_id,
            variant: &variant,
            source: trace.source,
            depth: r.depth,
            phase: r.phase.to_string(),
            frontier_size: r.frontier_size,
            distinct_size: r.distinct_size,
            duplicate_count: r.duplicate_count,
            edges_examined: r.edges_examined,
            flush_events: r.flush_events,
            elapsed_ns: r.elapsed.as_nanos(),
        })?;
    }
    Ok(())
}
