//! Bulk-synchronous worker pool shared by the parallel kernels.
//!
//! Each run spawns `worker_count - 1` scoped threads; the calling thread is
//! worker 0 and also executes the single-worker section between levels.
//! One level is:
//!
//! 1. expand the current frontier (top-down or bottom-up), barrier;
//! 2. count distinct entries of a top-down-produced frontier, barrier;
//! 3. worker 0 records the level, picks the next direction, swaps buffers,
//!    barrier;
//! 4. representation conversion / bitmap clearing when required, barrier.
//!
//! Frontier vertices (top-down) and the vertex range (bottom-up) are split
//! into static contiguous blocks.

use std::sync::atomic::{
    AtomicBool, AtomicU32, AtomicU64, AtomicU8, AtomicUsize, Ordering::Relaxed,
};
use std::sync::{Barrier, Mutex};
use std::time::Instant;

use crossbeam_utils::CachePadded;

use super::{DistanceArray, KernelConfig, Variant, UNREACHED};
use crate::error::{Error, Result};
use crate::frontier::{static_range, BitmapFrontier, DenseFrontier, LocalFrontier};
use crate::graph::{CsrGraph, VertexId};
use crate::instrumentation::{LevelRecord, Phase, TraversalTrace};

/// How a top-down step decides that it owns a newly seen neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum ClaimMode {
    /// Compare-exchange the distance from the sentinel.
    Atomic,
    /// Plain store of the (level-uniform) distance, no claim.
    NonAtomic,
    /// Claim via the visited flag, write the distance immediately.
    VisitedInline,
    /// Claim via the visited flag, write distances after sorting the
    /// worker's discoveries.
    VisitedDeferred,
}

impl ClaimMode {
    fn uses_visited(self) -> bool {
        matches!(self, ClaimMode::VisitedInline | ClaimMode::VisitedDeferred)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) enum DirectionPolicy {
    TopDownOnly,
    /// Top-down iff the next frontier is below this fraction of vertices.
    FrontierFraction(f64),
    /// `m_f > m_u / alpha` switches to bottom-up; `f_next < N / beta` with a
    /// shrinking frontier switches back.
    EdgeCount {
        alpha: f64,
        beta: f64,
    },
}

#[derive(Debug, Clone, Copy)]
pub(super) struct Plan {
    pub variant: Variant,
    pub claim: ClaimMode,
    pub policy: DirectionPolicy,
    pub flush_capacity: Option<usize>,
}

#[derive(Default)]
struct WorkerSlot {
    edges: AtomicU64,
    flushes: AtomicU64,
    /// Distinct vertices of the produced frontier found by this worker.
    found: AtomicU64,
    /// Degree sum over `found`.
    degree_sum: AtomicU64,
    /// Scratch for the bitmap-to-array prefix sum.
    count: AtomicU64,
    race_violations: AtomicU64,
    order_violations: AtomicU64,
}

const CONVERT_NONE: u8 = 0;
const CONVERT_TO_BOTTOM_UP: u8 = 1;
const CONVERT_TO_TOP_DOWN: u8 = 2;

struct LeaderState {
    trace: TraversalTrace,
    frontier_size: usize,
    frontier_distinct: usize,
    unvisited_edges: u64,
    level_start: Instant,
}

struct Shared<'a> {
    graph: &'a CsrGraph,
    config: &'a KernelConfig,
    plan: Plan,
    workers: usize,
    dist: Box<[AtomicU32]>,
    visited: Option<BitmapFrontier>,
    dense: [DenseFrontier; 2],
    bitmaps: Option<[BitmapFrontier; 2]>,
    stamp: Box<[AtomicU32]>,
    cur: AtomicUsize,
    top_down: AtomicBool,
    convert: AtomicU8,
    depth: AtomicU32,
    done: AtomicBool,
    fault: Mutex<Option<Error>>,
    slots: Box<[CachePadded<WorkerSlot>]>,
    barrier: Barrier,
    leader: Mutex<LeaderState>,
}

pub(super) fn run(
    graph: &CsrGraph,
    source: VertexId,
    config: &KernelConfig,
    plan: Plan,
) -> Result<(DistanceArray, TraversalTrace)> {
    let started = Instant::now();
    let n = graph.vertex_count();
    let workers = config.worker_count;
    // Non-atomic claiming may append a vertex more than once per level.
    let dense_capacity = n + graph.max_degree() + 1;

    let dist: Box<[AtomicU32]> = (0..n).map(|_| AtomicU32::new(UNREACHED)).collect();
    dist[source as usize].store(0, Relaxed);
    let visited = plan.claim.uses_visited().then(|| {
        let v = BitmapFrontier::new(n);
        v.set(source);
        v
    });
    let bitmaps = (plan.policy != DirectionPolicy::TopDownOnly)
        .then(|| [BitmapFrontier::new(n), BitmapFrontier::new(n)]);

    let mut trace = TraversalTrace::new(plan.variant, workers, source);
    if config.capture_frontiers {
        trace.frontiers = Some(vec![vec![source]]);
    }

    let shared = Shared {
        graph,
        config,
        plan,
        workers,
        dist,
        visited,
        dense: [
            DenseFrontier::from_slice(&[source], dense_capacity),
            DenseFrontier::with_capacity(dense_capacity),
        ],
        bitmaps,
        stamp: (0..n).map(|_| AtomicU32::new(0)).collect(),
        cur: AtomicUsize::new(0),
        top_down: AtomicBool::new(true),
        convert: AtomicU8::new(CONVERT_NONE),
        depth: AtomicU32::new(0),
        done: AtomicBool::new(false),
        fault: Mutex::new(None),
        slots: (0..workers)
            .map(|_| CachePadded::new(WorkerSlot::default()))
            .collect(),
        barrier: Barrier::new(workers),
        leader: Mutex::new(LeaderState {
            trace,
            frontier_size: 1,
            frontier_distinct: 1,
            unvisited_edges: (graph.edge_count() - graph.degree(source)) as u64,
            level_start: Instant::now(),
        }),
    };

    std::thread::scope(|s| {
        for id in 1..workers {
            let shared = &shared;
            s.spawn(move || shared.worker(id));
        }
        shared.worker(0);
    });

    if let Some(err) = shared.fault.into_inner().unwrap_or_else(|p| p.into_inner()) {
        return Err(err);
    }
    let mut trace = shared
        .leader
        .into_inner()
        .unwrap_or_else(|p| p.into_inner())
        .trace;
    trace.total_elapsed = started.elapsed();
    let dist: Vec<u32> = shared
        .dist
        .into_vec()
        .into_iter()
        .map(AtomicU32::into_inner)
        .collect();
    Ok((DistanceArray::from(dist), trace))
}

impl Shared<'_> {
    fn worker(&self, id: usize) {
        if self.config.pin_workers {
            pin_current_thread(id);
        }
        let local_capacity = self.graph.edge_count().div_ceil(self.workers);
        let mut local = LocalFrontier::with_capacity(local_capacity);
        loop {
            let depth = self.depth.load(Relaxed);
            let cur = self.cur.load(Relaxed);
            let top_down = self.top_down.load(Relaxed);
            if top_down {
                self.top_down_step(id, depth, cur, &mut local);
            } else {
                self.bottom_up_step(id, depth, cur);
            }
            self.barrier.wait();
            if top_down {
                self.count_distinct(id, depth, 1 - cur);
            }
            self.barrier.wait();
            if id == 0 {
                self.end_level(top_down);
            }
            self.barrier.wait();
            if self.done.load(Relaxed) {
                break;
            }
            self.convert(id);
        }
    }

    fn fail(&self, err: Error) {
        let mut slot = self.fault.lock().unwrap_or_else(|p| p.into_inner());
        slot.get_or_insert(err);
    }

    fn flush(&self, local: &mut LocalFrontier, next: &DenseFrontier, flushes: &mut u64) {
        if local.is_empty() {
            return;
        }
        *flushes += 1;
        if let Err(e) = next.reserve_and_flush(local) {
            self.fail(e);
        }
    }

    fn top_down_step(&self, id: usize, depth: u32, cur: usize, local: &mut LocalFrontier) {
        let frontier = &self.dense[cur];
        let next = &self.dense[1 - cur];
        let next_dist = depth + 1;
        let check = self.config.check_races;
        let racy_flags = self.config.racy_visited_claim;
        let flush_at = self.plan.flush_capacity;
        let mut edges = 0u64;
        let mut flushes = 0u64;
        let mut races = 0u64;
        let mut unordered = 0u64;

        for i in static_range(frontier.len(), self.workers, id) {
            let src = frontier.get(i);
            let nbrs = self.graph.neighbors(src);
            edges += nbrs.len() as u64;
            match self.plan.claim {
                ClaimMode::Atomic => {
                    for &dst in nbrs {
                        let slot = &self.dist[dst as usize];
                        if next_dist < slot.load(Relaxed)
                            && slot
                                .compare_exchange(UNREACHED, next_dist, Relaxed, Relaxed)
                                .is_ok()
                        {
                            local.push(dst);
                        }
                    }
                }
                ClaimMode::NonAtomic => {
                    for &dst in nbrs {
                        let slot = &self.dist[dst as usize];
                        if next_dist < slot.load(Relaxed) {
                            if check {
                                let prev = slot.swap(next_dist, Relaxed);
                                if prev != UNREACHED && prev != next_dist {
                                    races += 1;
                                }
                            } else {
                                slot.store(next_dist, Relaxed);
                            }
                            local.push(dst);
                            if let Some(cap) = flush_at {
                                if local.len() >= cap {
                                    self.flush(local, next, &mut flushes);
                                }
                            }
                        }
                    }
                }
                ClaimMode::VisitedInline => {
                    let visited = self.visited.as_ref().expect("visited flags");
                    for &dst in nbrs {
                        if visited.test(dst) {
                            continue;
                        }
                        if racy_flags {
                            self.dist[dst as usize].store(next_dist, Relaxed);
                            local.push(dst);
                            visited.set(dst);
                        } else if visited.test_and_set(dst) {
                            self.dist[dst as usize].store(next_dist, Relaxed);
                            local.push(dst);
                        }
                    }
                }
                ClaimMode::VisitedDeferred => {
                    let visited = self.visited.as_ref().expect("visited flags");
                    for &dst in nbrs {
                        if visited.test(dst) {
                            continue;
                        }
                        let claimed = if racy_flags {
                            visited.set(dst);
                            true
                        } else {
                            visited.test_and_set(dst)
                        };
                        if claimed {
                            local.push(dst);
                        }
                    }
                }
            }
        }

        if self.plan.claim == ClaimMode::VisitedDeferred {
            local.sort();
            let mut prev: Option<VertexId> = None;
            for &v in local.as_slice() {
                if check && prev.is_some_and(|p| p >= v) {
                    unordered += 1;
                }
                prev = Some(v);
                self.dist[v as usize].store(next_dist, Relaxed);
            }
        }
        self.flush(local, next, &mut flushes);

        let slot = &self.slots[id];
        slot.edges.store(edges, Relaxed);
        slot.flushes.store(flushes, Relaxed);
        slot.race_violations.fetch_add(races, Relaxed);
        slot.order_violations.fetch_add(unordered, Relaxed);
    }

    fn bottom_up_step(&self, id: usize, depth: u32, cur: usize) {
        let bitmaps = self.bitmaps.as_ref().expect("bottom-up needs bitmaps");
        let frontier = &bitmaps[cur];
        let next = &bitmaps[1 - cur];
        let next_dist = depth + 1;
        let mut edges = 0u64;
        let mut found = 0u64;
        let mut degree_sum = 0u64;

        for v in static_range(self.graph.vertex_count(), self.workers, id) {
            let v = v as VertexId;
            let unvisited = match &self.visited {
                Some(flags) => !flags.test(v),
                None => self.dist[v as usize].load(Relaxed) == UNREACHED,
            };
            if !unvisited {
                continue;
            }
            let nbrs = self.graph.neighbors(v);
            for &u in nbrs {
                edges += 1;
                if frontier.test(u) {
                    self.dist[v as usize].store(next_dist, Relaxed);
                    next.set(v);
                    if let Some(flags) = &self.visited {
                        flags.set(v);
                    }
                    found += 1;
                    degree_sum += nbrs.len() as u64;
                    break;
                }
            }
        }

        let slot = &self.slots[id];
        slot.edges.store(edges, Relaxed);
        slot.flushes.store(0, Relaxed);
        slot.found.store(found, Relaxed);
        slot.degree_sum.store(degree_sum, Relaxed);
    }

    /// First-occurrence count over this worker's block of the produced
    /// frontier. `stamp[v] == depth + 1` marks "already seen this level".
    fn count_distinct(&self, id: usize, depth: u32, produced: usize) {
        let next = &self.dense[produced];
        let tag = depth + 1;
        let mut found = 0u64;
        let mut degree_sum = 0u64;
        for i in static_range(next.len().min(next.capacity()), self.workers, id) {
            let v = next.get(i);
            if self.stamp[v as usize].swap(tag, Relaxed) != tag {
                found += 1;
                degree_sum += self.graph.degree(v) as u64;
            }
        }
        let slot = &self.slots[id];
        slot.found.store(found, Relaxed);
        slot.degree_sum.store(degree_sum, Relaxed);
    }

    fn end_level(&self, top_down: bool) {
        let mut st = self.leader.lock().unwrap_or_else(|p| p.into_inner());
        let depth = self.depth.load(Relaxed);
        let cur = self.cur.load(Relaxed);
        let produced = 1 - cur;

        let sum = |f: fn(&WorkerSlot) -> &AtomicU64| -> u64 {
            self.slots.iter().map(|s| f(s).load(Relaxed)).sum()
        };
        let edges = sum(|s| &s.edges);
        let flushes = sum(|s| &s.flushes);
        let found = sum(|s| &s.found) as usize;
        let degree_sum = sum(|s| &s.degree_sum);

        let now = Instant::now();
        let record = LevelRecord {
            depth,
            phase: if top_down {
                Phase::TopDown
            } else {
                Phase::BottomUp
            },
            frontier_size: st.frontier_size,
            distinct_size: st.frontier_distinct,
            duplicate_count: st.frontier_size - st.frontier_distinct,
            edges_examined: edges,
            flush_events: flushes,
            elapsed: now - st.level_start,
        };
        st.level_start = now;
        st.trace.records.push(record);

        let faulted = self
            .fault
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .is_some();
        let next_size = if top_down {
            self.dense[produced].len()
        } else {
            found
        };
        if faulted || next_size == 0 {
            st.trace.race_violations = sum(|s| &s.race_violations);
            st.trace.deferred_order_violations = sum(|s| &s.order_violations);
            self.done.store(true, Relaxed);
            return;
        }

        if let Some(frontiers) = st.trace.frontiers.as_mut() {
            let mut set = if top_down {
                self.dense[produced].to_vec()
            } else {
                let bm = &self.bitmaps.as_ref().expect("bitmaps")[produced];
                (0..self.graph.vertex_count() as VertexId)
                    .filter(|&v| bm.test(v))
                    .collect()
            };
            set.sort_unstable();
            set.dedup();
            frontiers.push(set);
        }

        st.unvisited_edges = st.unvisited_edges.saturating_sub(degree_sum);
        let n = self.graph.vertex_count() as f64;
        let next_top_down = match self.plan.policy {
            DirectionPolicy::TopDownOnly => true,
            DirectionPolicy::FrontierFraction(fraction) => (next_size as f64) < fraction * n,
            DirectionPolicy::EdgeCount { alpha, beta } => {
                if top_down {
                    (degree_sum as f64) <= st.unvisited_edges as f64 / alpha
                } else {
                    (found as f64) < n / beta && found < st.frontier_distinct
                }
            }
        };

        let convert = match (top_down, next_top_down) {
            (true, false) => CONVERT_TO_BOTTOM_UP,
            (false, true) => CONVERT_TO_TOP_DOWN,
            _ => CONVERT_NONE,
        };
        if let Some(bitmaps) = &self.bitmaps {
            if !next_top_down {
                bitmaps[produced].set_population(found);
                bitmaps[cur].set_population(0);
            }
        }
        st.frontier_size = next_size;
        st.frontier_distinct = found;
        self.convert.store(convert, Relaxed);
        self.top_down.store(next_top_down, Relaxed);
        self.dense[cur].clear();
        self.cur.store(produced, Relaxed);
        self.depth.store(depth + 1, Relaxed);
    }

    fn convert(&self, id: usize) {
        let convert = self.convert.load(Relaxed);
        let top_down = self.top_down.load(Relaxed);
        let Some(bitmaps) = &self.bitmaps else {
            return;
        };
        let cur = self.cur.load(Relaxed);
        let vertices = static_range(self.graph.vertex_count(), self.workers, id);
        match convert {
            CONVERT_TO_BOTTOM_UP => {
                bitmaps[0].clear_range(vertices.clone());
                bitmaps[1].clear_range(vertices);
                self.barrier.wait();
                let frontier = &self.dense[cur];
                bitmaps[cur].mark_range(frontier, static_range(frontier.len(), self.workers, id));
                self.barrier.wait();
            }
            CONVERT_TO_TOP_DOWN => {
                let bm = &bitmaps[cur];
                self.slots[id]
                    .count
                    .store(bm.count_range(vertices.clone()) as u64, Relaxed);
                self.barrier.wait();
                let offset: u64 = self.slots[..id].iter().map(|s| s.count.load(Relaxed)).sum();
                bm.emit_range(vertices, &self.dense[cur], offset as usize);
                if id == 0 {
                    let total: u64 = self.slots.iter().map(|s| s.count.load(Relaxed)).sum();
                    self.dense[cur].set_len(total as usize);
                }
                self.barrier.wait();
            }
            _ if !top_down => {
                bitmaps[1 - cur].clear_range(vertices);
                self.barrier.wait();
            }
            _ => {}
        }
    }
}

#[cfg(target_os = "linux")]
fn pin_current_thread(worker: usize) {
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cpu = worker % cpus.min(libc::CPU_SETSIZE as usize);
    // SAFETY: cpu_set_t is plain data and `cpu` < CPU_SETSIZE.
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(cpu, &mut set);
        // Pinning is best effort; failure leaves the thread unpinned.
        let _ = libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set);
    }
}

#[cfg(not(target_os = "linux"))]
fn pin_current_thread(_worker: usize) {}
