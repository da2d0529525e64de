//! C ABI over the `pbfs` kernels.
//!
//! Graphs and traces cross the boundary as opaque heap handles that the
//! caller releases with the matching `*_free` function. Every fallible entry
//! point returns a [`PbfsStatus`]; on failure a message for the calling
//! thread is available from [`pbfs_last_error`] until the next failing call.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use pbfs::graph::{
    build_csr, compute_stats, generate, load_graph, save_binary_csr, CsrGraph, GeneratorKind,
    GeneratorSpec, GraphCategory, IndexBase,
};
use pbfs::instrumentation::{Phase, TraversalTrace};
use pbfs::kernels::{run_bfs, run_kernel, KernelConfig, Variant};
use pbfs::Error;

/// Opaque CSR graph handle.
pub struct PbfsGraph {
    inner: CsrGraph,
}

/// Opaque per-level trace of one traversal.
pub struct PbfsTrace {
    inner: TraversalTrace,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbfsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Parse = 5,
    Capacity = 6,
    Config = 7,
    Mismatch = 8,
    UndefinedMetric = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbfsVariant {
    Serial = 0,
    Conventional = 1,
    NonAtomic = 2,
    Hybrid = 3,
    HybridBeamer = 4,
    VisitedBitmapInline = 5,
    VisitedBitmapDeferred = 6,
    TopDownPeriodicFlush = 7,
}

impl From<PbfsVariant> for Variant {
    fn from(v: PbfsVariant) -> Self {
        match v {
            PbfsVariant::Serial => Variant::Serial,
            PbfsVariant::Conventional => Variant::Conventional,
            PbfsVariant::NonAtomic => Variant::NonAtomic,
            PbfsVariant::Hybrid => Variant::Hybrid,
            PbfsVariant::HybridBeamer => Variant::HybridBeamer,
            PbfsVariant::VisitedBitmapInline => Variant::VisitedBitmapInline,
            PbfsVariant::VisitedBitmapDeferred => Variant::VisitedBitmapDeferred,
            PbfsVariant::TopDownPeriodicFlush => Variant::TopDownPeriodicFlush,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbfsGeneratorKind {
    UniformRandom = 0,
    Kronecker = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbfsCategory {
    SmallDiameter = 0,
    LargeDiameter = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbfsPhase {
    TopDown = 0,
    BottomUp = 1,
}

/// Kernel configuration. Obtain defaults from [`pbfs_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PbfsConfig {
    pub variant: PbfsVariant,
    pub worker_count: usize,
    pub hybrid_threshold_fraction: f64,
    pub alpha: f64,
    pub beta: f64,
    pub flush_capacity: usize,
    pub force_top_down_only: bool,
    pub check_races: bool,
    pub pin_workers: bool,
    /// Route through the diameter classifier (large-diameter graphs run
    /// top-down only).
    pub dispatch: bool,
    pub classifier_threshold: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PbfsGraphStats {
    pub vertex_count: u64,
    pub edge_count: u64,
    pub average_degree: f64,
    pub max_degree: u64,
    pub category: PbfsCategory,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PbfsLevelRecord {
    pub depth: u32,
    pub phase: PbfsPhase,
    pub frontier_size: u64,
    pub distinct_size: u64,
    pub duplicate_count: u64,
    pub edges_examined: u64,
    pub flush_events: u64,
    pub elapsed_ns: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> PbfsStatus {
    match err {
        Error::EndpointOutOfRange { .. } | Error::Input(_) => PbfsStatus::InvalidArgument,
        Error::Parse { .. } => PbfsStatus::Parse,
        Error::Format { .. } => PbfsStatus::Format,
        Error::Capacity(_) => PbfsStatus::Capacity,
        Error::Config(_) => PbfsStatus::Config,
        Error::UndefinedMetric(_) => PbfsStatus::UndefinedMetric,
        Error::Mismatch { .. } => PbfsStatus::Mismatch,
        Error::Io { .. } => PbfsStatus::Io,
    }
}

struct Failure(PbfsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PbfsStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PbfsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PbfsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            PbfsStatus::Panic
        }
    }
}

unsafe fn c_path(path: *const c_char) -> Result<PathBuf, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(path)
        .to_str()
        .map_err(|_| Failure(PbfsStatus::InvalidArgument, "path is not UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

unsafe fn emit_graph(out: *mut *mut PbfsGraph, graph: CsrGraph) -> Result<(), Failure> {
    *out = Box::into_raw(Box::new(PbfsGraph { inner: graph }));
    Ok(())
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pbfs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a graph from `edge_count` pairs `(sources[i], targets[i])`.
#[no_mangle]
pub unsafe extern "C" fn pbfs_graph_from_edges(
    sources: *const u32,
    targets: *const u32,
    edge_count: usize,
    vertex_count: usize,
    symmetrize: bool,
    out: *mut *mut PbfsGraph,
) -> PbfsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let pairs: Vec<(u32, u32)> = if edge_count == 0 {
            Vec::new()
        } else {
            if sources.is_null() || targets.is_null() {
                return Err(null("edge arrays"));
            }
            let s = std::slice::from_raw_parts(sources, edge_count);
            let t = std::slice::from_raw_parts(targets, edge_count);
            s.iter().copied().zip(t.iter().copied()).collect()
        };
        emit_graph(out, build_csr(&pairs, vertex_count, symmetrize)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn pbfs_graph_generate(
    kind: PbfsGeneratorKind,
    scale: u32,
    edge_factor: u32,
    seed: u64,
    out: *mut *mut PbfsGraph,
) -> PbfsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = GeneratorSpec {
            kind: match kind {
                PbfsGeneratorKind::UniformRandom => GeneratorKind::UniformRandom,
                PbfsGeneratorKind::Kronecker => GeneratorKind::Kronecker,
            },
            scale,
            edge_factor,
            seed,
        };
        emit_graph(out, generate(&spec)?)
    })
}

/// Loads an edge list or binary CSR file; the format is detected from the
/// file header.
#[no_mangle]
pub unsafe extern "C" fn pbfs_graph_load(
    path: *const c_char,
    one_based: bool,
    symmetrize: bool,
    out: *mut *mut PbfsGraph,
) -> PbfsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = c_path(path)?;
        let base = if one_based {
            IndexBase::One
        } else {
            IndexBase::Zero
        };
        emit_graph(out, load_graph(&path, base, symmetrize)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn pbfs_graph_save(
    graph: *const PbfsGraph,
    path: *const c_char,
) -> PbfsStatus {
    guard(|| {
        let graph = graph.as_ref().ok_or_else(|| null("graph"))?;
        save_binary_csr(&graph.inner, &c_path(path)?)?;
        Ok(())
    })
}

/// Returns 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pbfs_graph_vertex_count(graph: *const PbfsGraph) -> u64 {
    graph.as_ref().map_or(0, |g| g.inner.vertex_count() as u64)
}

/// Number of directed adjacency entries. Returns 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pbfs_graph_edge_count(graph: *const PbfsGraph) -> u64 {
    graph.as_ref().map_or(0, |g| g.inner.edge_count() as u64)
}

#[no_mangle]
pub unsafe extern "C" fn pbfs_graph_stats(
    graph: *const PbfsGraph,
    classifier_threshold: f64,
    out: *mut PbfsGraphStats,
) -> PbfsStatus {
    guard(|| {
        let graph = graph.as_ref().ok_or_else(|| null("graph"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = compute_stats(&graph.inner, classifier_threshold)?;
        *out = PbfsGraphStats {
            vertex_count: s.vertex_count as u64,
            edge_count: s.edge_count as u64,
            average_degree: s.average_degree,
            max_degree: s.max_degree as u64,
            category: match s.category {
                GraphCategory::SmallDiameter => PbfsCategory::SmallDiameter,
                GraphCategory::LargeDiameter => PbfsCategory::LargeDiameter,
            },
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pbfs_graph_free(graph: *mut PbfsGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

#[no_mangle]
pub extern "C" fn pbfs_config_default(variant: PbfsVariant) -> PbfsConfig {
    let d = KernelConfig::default();
    PbfsConfig {
        variant,
        worker_count: d.worker_count,
        hybrid_threshold_fraction: d.hybrid_threshold_fraction,
        alpha: d.alpha,
        beta: d.beta,
        flush_capacity: d.flush_capacity,
        force_top_down_only: d.force_top_down_only,
        check_races: d.check_races,
        pin_workers: d.pin_workers,
        dispatch: false,
        classifier_threshold: pbfs::graph::DEFAULT_CLASSIFIER_THRESHOLD,
    }
}

fn kernel_config(c: &PbfsConfig) -> KernelConfig {
    KernelConfig {
        variant: c.variant.into(),
        worker_count: c.worker_count,
        hybrid_threshold_fraction: c.hybrid_threshold_fraction,
        alpha: c.alpha,
        beta: c.beta,
        flush_capacity: c.flush_capacity,
        force_top_down_only: c.force_top_down_only,
        check_races: c.check_races,
        pin_workers: c.pin_workers,
        ..KernelConfig::default()
    }
}

/// Runs one traversal from `source`, writing `vertex_count` distances into
/// `distances` (`UINT32_MAX` marks unreachable vertices). `trace_out` may be
/// null; otherwise it receives a trace handle owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn pbfs_run(
    graph: *const PbfsGraph,
    source: u32,
    config: *const PbfsConfig,
    distances: *mut u32,
    distances_len: usize,
    trace_out: *mut *mut PbfsTrace,
) -> PbfsStatus {
    guard(|| {
        let graph = graph.as_ref().ok_or_else(|| null("graph"))?;
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        if distances.is_null() {
            return Err(null("distances"));
        }
        let n = graph.inner.vertex_count();
        if distances_len < n {
            return Err(Failure(
                PbfsStatus::BufferTooSmall,
                format!("distance buffer holds {distances_len}, graph has {n} vertices"),
            ));
        }
        let kc = kernel_config(config);
        let (dist, trace) = if config.dispatch {
            let stats = compute_stats(&graph.inner, config.classifier_threshold)?;
            run_bfs(&graph.inner, source, &kc, &stats)?
        } else {
            run_kernel(&graph.inner, source, &kc)?
        };
        std::slice::from_raw_parts_mut(distances, n).copy_from_slice(&dist);
        if !trace_out.is_null() {
            *trace_out = Box::into_raw(Box::new(PbfsTrace { inner: trace }));
        }
        Ok(())
    })
}

/// Returns 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pbfs_trace_level_count(trace: *const PbfsTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.inner.records.len())
}

#[no_mangle]
pub unsafe extern "C" fn pbfs_trace_total_ns(trace: *const PbfsTrace) -> u64 {
    trace
        .as_ref()
        .map_or(0, |t| t.inner.total_elapsed.as_nanos() as u64)
}

#[no_mangle]
pub unsafe extern "C" fn pbfs_trace_level(
    trace: *const PbfsTrace,
    index: usize,
    out: *mut PbfsLevelRecord,
) -> PbfsStatus {
    guard(|| {
        let trace = trace.as_ref().ok_or_else(|| null("trace"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = trace.inner.records.get(index).ok_or_else(|| {
            Failure(
                PbfsStatus::InvalidArgument,
                format!(
                    "level {index} out of range ({} levels)",
                    trace.inner.records.len()
                ),
            )
        })?;
        *out = PbfsLevelRecord {
            depth: r.depth,
            phase: match r.phase {
                Phase::TopDown => PbfsPhase::TopDown,
                Phase::BottomUp => PbfsPhase::BottomUp,
            },
            frontier_size: r.frontier_size as u64,
            distinct_size: r.distinct_size as u64,
            duplicate_count: r.duplicate_count as u64,
            edges_examined: r.edges_examined,
            flush_events: r.flush_events,
            elapsed_ns: r.elapsed.as_nanos() as u64,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pbfs_trace_average_duplicate_percentage(
    trace: *const PbfsTrace,
    out: *mut f64,
) -> PbfsStatus {
    guard(|| {
        let trace = trace.as_ref().ok_or_else(|| null("trace"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = pbfs::instrumentation::average_duplicate_percentage(&trace.inner)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pbfs_trace_free(trace: *mut PbfsTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}
