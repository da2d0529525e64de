//! BFS kernels: the serial oracle and the parallel level-synchronous family.
//!
//! Every parallel kernel runs on the same bulk-synchronous engine. They
//! differ in how a top-down step claims a neighbor, whether bottom-up steps
//! are allowed, and which rule picks the direction of the next level.

mod engine;
mod serial;

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{CsrGraph, GraphCategory, GraphStats, VertexId};
use crate::instrumentation::TraversalTrace;

pub use serial::{bfs_serial, bfs_serial_traced};

use engine::{ClaimMode, DirectionPolicy, Plan};

/// Distance sentinel for vertices not reached from the source.
pub const UNREACHED: u32 = u32::MAX;

/// Per-vertex hop counts from the source; [`UNREACHED`] where unreachable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceArray(Vec<u32>);

impl DistanceArray {
    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }

    pub fn reached_count(&self) -> usize {
        self.0.iter().filter(|&&d| d != UNREACHED).count()
    }

    /// First vertex where `self` differs from `want`, as
    /// `(vertex, got, want)`. A length mismatch reports the first index past
    /// the shorter array.
    pub fn first_mismatch(&self, want: &DistanceArray) -> Option<(VertexId, u32, u32)> {
        let common = self.0.len().min(want.0.len());
        if let Some(i) = (0..common).find(|&i| self.0[i] != want.0[i]) {
            return Some((i as VertexId, self.0[i], want.0[i]));
        }
        if self.0.len() != want.0.len() {
            let get = |a: &[u32]| a.get(common).copied().unwrap_or(UNREACHED);
            return Some((common as VertexId, get(&self.0), get(&want.0)));
        }
        None
    }
}

impl Deref for DistanceArray {
    type Target = [u32];

    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for DistanceArray {
    fn from(v: Vec<u32>) -> Self {
        DistanceArray(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Serial,
    Conventional,
    NonAtomic,
    Hybrid,
    HybridBeamer,
    VisitedBitmapInline,
    VisitedBitmapDeferred,
    TopDownPeriodicFlush,
}

impl Variant {
    /// Every variant except the serial oracle.
    pub const PARALLEL: [Variant; 7] = [
        Variant::Conventional,
        Variant::NonAtomic,
        Variant::Hybrid,
        Variant::HybridBeamer,
        Variant::VisitedBitmapInline,
        Variant::VisitedBitmapDeferred,
        Variant::TopDownPeriodicFlush,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Serial => "serial",
            Variant::Conventional => "conventional",
            Variant::NonAtomic => "non-atomic",
            Variant::Hybrid => "hybrid",
            Variant::HybridBeamer => "hybrid-beamer",
            Variant::VisitedBitmapInline => "visited-bitmap",
            Variant::VisitedBitmapDeferred => "visited-bitmap-deferred",
            Variant::TopDownPeriodicFlush => "periodic-flush",
        }
    }

    /// Whether the variant may run bottom-up levels (and so needs a
    /// symmetric graph unless forced top-down).
    pub fn is_hybrid(self) -> bool {
        matches!(
            self,
            Variant::Hybrid
                | Variant::HybridBeamer
                | Variant::VisitedBitmapInline
                | Variant::VisitedBitmapDeferred
        )
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let key = key.strip_prefix("bfs").unwrap_or(&key);
        Ok(match key {
            "serial" => Variant::Serial,
            "conventional" | "atomic" => Variant::Conventional,
            "nonatomic" => Variant::NonAtomic,
            "hybrid" => Variant::Hybrid,
            "hybridbeamer" | "beamer" => Variant::HybridBeamer,
            "visitedbitmap" | "visitedbitmapinline" | "vb" => Variant::VisitedBitmapInline,
            "visitedbitmapdeferred" | "vbdeferred" => Variant::VisitedBitmapDeferred,
            "periodicflush" | "topdownperiodicflush" | "flush" => Variant::TopDownPeriodicFlush,
            _ => return Err(Error::Input(format!("unknown kernel variant {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub variant: Variant,
    pub worker_count: usize,
    /// Run the next level top-down iff its frontier holds fewer than this
    /// fraction of all vertices.
    pub hybrid_threshold_fraction: f64,
    /// Top-down to bottom-up when `m_f > m_u / alpha` (Beamer policy).
    pub alpha: f64,
    /// Bottom-up to top-down when `f_next < N / beta` and the frontier shrank.
    pub beta: f64,
    /// Local frontier size that triggers a flush in the periodic-flush kernel.
    pub flush_capacity: usize,
    pub force_top_down_only: bool,
    /// Count non-atomic stores that overwrite an unexpected value, and
    /// deferred writes out of ascending order. Costs an exchange per store.
    pub check_races: bool,
    /// Visited-bitmap top-down uses the plain test-then-set flag protocol
    /// instead of a byte exchange. Admits duplicates.
    pub racy_visited_claim: bool,
    /// Record the distinct vertex set of every level in the trace.
    pub capture_frontiers: bool,
    /// Pin worker `i` to CPU `i % available` where supported.
    pub pin_workers: bool,
}

pub const DEFAULT_HYBRID_THRESHOLD: f64 = 0.05;
pub const DEFAULT_ALPHA: f64 = 15.0;
pub const DEFAULT_BETA: f64 = 18.0;
pub const DEFAULT_FLUSH_CAPACITY: usize = 4096;

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            variant: Variant::Hybrid,
            worker_count: 1,
            hybrid_threshold_fraction: DEFAULT_HYBRID_THRESHOLD,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            flush_capacity: DEFAULT_FLUSH_CAPACITY,
            force_top_down_only: false,
            check_races: false,
            racy_visited_claim: false,
            capture_frontiers: false,
            pin_workers: false,
        }
    }
}

impl KernelConfig {
    pub fn new(variant: Variant, worker_count: usize) -> Self {
        KernelConfig {
            variant,
            worker_count,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.worker_count == 0 {
            return Err(Error::Config("worker_count must be >= 1".into()));
        }
        let t = self.hybrid_threshold_fraction;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Config(format!(
                "hybrid threshold fraction {t} not in (0, 1]"
            )));
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 || self.beta.is_nan() || self.beta <= 0.0 {
            return Err(Error::Config(format!(
                "alpha and beta must be > 0 (got {}, {})",
                self.alpha, self.beta
            )));
        }
        if self.flush_capacity == 0 {
            return Err(Error::Config("flush_capacity must be >= 1".into()));
        }
        Ok(())
    }
}

fn check_source(graph: &CsrGraph, source: VertexId) -> Result<()> {
    if (source as usize) < graph.vertex_count() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "source {source} out of range for {} vertices",
            graph.vertex_count()
        )))
    }
}

fn run_plan(
    graph: &CsrGraph,
    source: VertexId,
    config: &KernelConfig,
    variant: Variant,
    claim: ClaimMode,
    policy: DirectionPolicy,
    flush_capacity: Option<usize>,
) -> Result<(DistanceArray, TraversalTrace)> {
    config.validate()?;
    check_source(graph, source)?;
    let policy = if config.force_top_down_only {
        DirectionPolicy::TopDownOnly
    } else {
        policy
    };
    if policy != DirectionPolicy::TopDownOnly && !graph.is_symmetric() {
        return Err(Error::Input(format!(
            "{variant} scans adjacency as in-edges during bottom-up levels and needs a \
             symmetric graph; symmetrize the input or force top-down-only traversal"
        )));
    }
    engine::run(
        graph,
        source,
        config,
        Plan {
            variant,
            claim,
            policy,
            flush_capacity,
        },
    )
}

/// Top-down only; neighbors are claimed with a compare-exchange from
/// [`UNREACHED`], so no vertex enters a frontier twice.
pub fn bfs_conventional(
    graph: &CsrGraph,
    source: VertexId,
    config: &KernelConfig,
) -> Result<(DistanceArray, TraversalTrace)> {
    run_plan(
        graph,
        source,
        config,
        Variant::Conventional,
        ClaimMode::Atomic,
        DirectionPolicy::TopDownOnly,
        None,
    )
}

/// Top-down only with plain (relaxed) distance stores and no claim step.
/// Racing stores within a level all write the same value; the cost is that
/// a vertex can be appended to the next frontier more than once.
pub fn bfs_nonatomic(
    graph: &CsrGraph,
    source: VertexId,
    config: &KernelConfig,
) -> Result<(DistanceArray, TraversalTrace)> {
    run_plan(
        graph,
        source,
        config,
        Variant::NonAtomic,
        ClaimMode::NonAtomic,
        DirectionPolicy::TopDownOnly,
        None,
    )
}

/// Direction-optimizing BFS with the frontier-size rule: a level runs
/// top-down iff its frontier is smaller than
/// `hybrid_threshold_fraction * vertex_count`.
pub fn bfs_hybrid(
    graph: &CsrGraph,
    source: VertexId,
    config: &KernelConfig,
) -> Result<(DistanceArray, TraversalTrace)> {
    run_plan(
        graph,
        source,
        config,
        Variant::Hybrid,
        ClaimMode::NonAtomic,
        DirectionPolicy::FrontierFraction(config.hybrid_threshold_fraction),
        None,
    )
}

/// Direction-optimizing BFS with the edge-count rule (`alpha`, `beta`).
pub fn bfs_hybrid_beamer(
    graph: &CsrGraph,
    source: VertexId,
    config: &KernelConfig,
) -> Result<(DistanceArray, TraversalTrace)> {
    run_plan(
        graph,
        source,
        config,
        Variant::HybridBeamer,
        ClaimMode::NonAtomic,
        DirectionPolicy::EdgeCount {
            alpha: config.alpha,
            beta: config.beta,
        },
        None,
    )
}

/// Hybrid traversal that tests visitation through a byte-per-vertex flag
/// array instead of the distance array. With `deferred`, the top-down inner
/// loop touches only the flags; each worker sorts its discoveries and writes
/// their distances afterwards.
pub fn bfs_visited_bitmap(
    graph: &CsrGraph,
    source: VertexId,
    config: &KernelConfig,
    deferred: bool,
) -> Result<(DistanceArray, TraversalTrace)> {
    let (variant, claim) = if deferred {
        (Variant::VisitedBitmapDeferred, ClaimMode::VisitedDeferred)
    } else {
        (Variant::VisitedBitmapInline, ClaimMode::VisitedInline)
    };
    run_plan(
        graph,
        source,
        config,
        variant,
        claim,
        DirectionPolicy::FrontierFraction(config.hybrid_threshold_fraction),
        None,
    )
}

/// Non-atomic top-down traversal that flushes a worker's local frontier
/// whenever it reaches `flush_capacity` entries.
pub fn bfs_topdown_periodic_flush(
    graph: &CsrGraph,
    source: VertexId,
    config: &KernelConfig,
) -> Result<(DistanceArray, TraversalTrace)> {
    run_plan(
        graph,
        source,
        config,
        Variant::TopDownPeriodicFlush,
        ClaimMode::NonAtomic,
        DirectionPolicy::TopDownOnly,
        Some(config.flush_capacity),
    )
}

/// Runs `config.variant`.
pub fn run_kernel(
    graph: &CsrGraph,
    source: VertexId,
    config: &KernelConfig,
) -> Result<(DistanceArray, TraversalTrace)> {
    match config.variant {
        Variant::Serial => {
            check_source(graph, source)?;
            Ok(bfs_serial_traced(graph, source))
        }
        Variant::Conventional => bfs_conventional(graph, source, config),
        Variant::NonAtomic => bfs_nonatomic(graph, source, config),
        Variant::Hybrid => bfs_hybrid(graph, source, config),
        Variant::HybridBeamer => bfs_hybrid_beamer(graph, source, config),
        Variant::VisitedBitmapInline => bfs_visited_bitmap(graph, source, config, false),
        Variant::VisitedBitmapDeferred => bfs_visited_bitmap(graph, source, config, true),
        Variant::TopDownPeriodicFlush => bfs_topdown_periodic_flush(graph, source, config),
    }
}

/// Category dispatch: large-diameter graphs run only the top-down path of
/// the selected variant, small-diameter graphs the hybrid path.
pub fn run_bfs(
    graph: &CsrGraph,
    source: VertexId,
    config: &KernelConfig,
    stats: &GraphStats,
) -> Result<(DistanceArray, TraversalTrace)> {
    let mut config = config.clone();
    if stats.category == GraphCategory::LargeDiameter {
        config.force_top_down_only = true;
    }
    run_kernel(graph, source, &config)
}
