use std::time::Instant;

use super::{check_source, DistanceArray, Variant, UNREACHED};
use crate::error::Result;
use crate::graph::{CsrGraph, VertexId};
use crate::instrumentation::{LevelRecord, Phase, TraversalTrace};

/// Single-threaded level-order BFS. The correctness oracle for every
/// parallel kernel.
pub fn bfs_serial(graph: &CsrGraph, source: VertexId) -> Result<DistanceArray> {
    check_source(graph, source)?;
    let n = graph.vertex_count();
    let mut dist = vec![UNREACHED; n];
    let mut queue: Vec<VertexId> = Vec::with_capacity(n);
    dist[source as usize] = 0;
    queue.push(source);
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        let next = dist[u as usize] + 1;
        for &v in graph.neighbors(u) {
            if dist[v as usize] == UNREACHED {
                dist[v as usize] = next;
                queue.push(v);
            }
        }
    }
    Ok(DistanceArray::from(dist))
}

/// Serial BFS that also records one [`LevelRecord`] per level. The caller
/// must have validated `source`.
pub fn bfs_serial_traced(graph: &CsrGraph, source: VertexId) -> (DistanceArray, TraversalTrace) {
    let started = Instant::now();
    let mut trace = TraversalTrace::new(Variant::Serial, 1, source);
    let mut dist = vec![UNREACHED; graph.vertex_count()];
    dist[source as usize] = 0;
    let mut current = vec![source];
    let mut next = Vec::new();
    let mut depth = 0u32;
    while !current.is_empty() {
        let level_start = Instant::now();
        let mut edges = 0u64;
        for &u in &current {
            let nbrs = graph.neighbors(u);
            edges += nbrs.len() as u64;
            for &v in nbrs {
                if dist[v as usize] == UNREACHED {
                    dist[v as usize] = depth + 1;
                    next.push(v);
                }
            }
        }
        trace.records.push(LevelRecord {
            depth,
            phase: Phase::TopDown,
            frontier_size: current.len(),
            distinct_size: current.len(),
            duplicate_count: 0,
            edges_examined: edges,
            flush_events: 0,
            elapsed: level_start.elapsed(),
        });
        std::mem::swap(&mut current, &mut next);
        next.clear();
        depth += 1;
    }
    trace.total_elapsed = started.elapsed();
    (DistanceArray::from(dist), trace)
}
