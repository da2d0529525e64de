//! Compressed sparse row graphs.
//!
//! A [`CsrGraph`] is immutable once built and is shared read-only by every
//! kernel worker. Adjacency slices are kept in canonical form: sorted
//! ascending with parallel edges removed. Self-loops are retained.

mod generate;
mod io;
mod stats;

use std::sync::OnceLock;

pub use generate::{generate, GeneratorKind, GeneratorSpec, KRONECKER_PROBABILITIES};
pub use io::{
    load_binary_csr, load_edge_list, load_edge_list_sized, load_graph, save_binary_csr, IndexBase,
    BINARY_MAGIC,
};
pub use stats::{classify, compute_stats, GraphCategory, GraphStats, DEFAULT_CLASSIFIER_THRESHOLD};

use crate::error::{Error, Result};

/// Vertex identifier. Kernels index the distance array with these directly.
pub type VertexId = u32;

/// Largest supported vertex count (ids must fit in 31 bits).
pub const MAX_VERTICES: usize = (1 << 31) - 1;

#[derive(Debug, Clone)]
pub struct CsrGraph {
    vertex_count: usize,
    row_offsets: Vec<u64>,
    column_indices: Vec<VertexId>,
    symmetric: OnceLock<bool>,
    max_degree: OnceLock<usize>,
}

impl PartialEq for CsrGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count
            && self.row_offsets == other.row_offsets
            && self.column_indices == other.column_indices
    }
}

impl Eq for CsrGraph {}

impl CsrGraph {
    /// Assembles a graph from raw CSR arrays, checking every structural
    /// invariant (offset bounds, monotonicity, index range, sorted and
    /// duplicate-free adjacency).
    pub fn from_parts(
        vertex_count: usize,
        row_offsets: Vec<u64>,
        column_indices: Vec<VertexId>,
    ) -> Result<Self> {
        if vertex_count > MAX_VERTICES {
            return Err(Error::Capacity(format!(
                "vertex_count {vertex_count} exceeds {MAX_VERTICES}"
            )));
        }
        if row_offsets.len() != vertex_count + 1 {
            return Err(Error::Input(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                vertex_count + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::Input("row_offsets[0] must be 0".into()));
        }
        if row_offsets[vertex_count] != column_indices.len() as u64 {
            return Err(Error::Input(format!(
                "row_offsets[{vertex_count}] = {} but edge_count = {}",
                row_offsets[vertex_count],
                column_indices.len()
            )));
        }
        for v in 0..vertex_count {
            let (lo, hi) = (row_offsets[v], row_offsets[v + 1]);
            if hi < lo {
                return Err(Error::Input(format!("row_offsets decreases at vertex {v}")));
            }
            let adj = &column_indices[lo as usize..hi as usize];
            for (k, &w) in adj.iter().enumerate() {
                if w as usize >= vertex_count {
                    return Err(Error::Input(format!(
                        "column index {w} of vertex {v} out of range"
                    )));
                }
                if k > 0 && adj[k - 1] >= w {
                    return Err(Error::Input(format!(
                        "adjacency of vertex {v} is not strictly ascending"
                    )));
                }
            }
        }
        Ok(Self::from_canonical(
            vertex_count,
            row_offsets,
            column_indices,
        ))
    }

    fn from_canonical(
        vertex_count: usize,
        row_offsets: Vec<u64>,
        column_indices: Vec<VertexId>,
    ) -> Self {
        CsrGraph {
            vertex_count,
            row_offsets,
            column_indices,
            symmetric: OnceLock::new(),
            max_degree: OnceLock::new(),
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Number of directed edge slots.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.column_indices.len()
    }

    pub fn row_offsets(&self) -> &[u64] {
        &self.row_offsets
    }

    pub fn column_indices(&self) -> &[VertexId] {
        &self.column_indices
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        let lo = self.row_offsets[v] as usize;
        let hi = self.row_offsets[v + 1] as usize;
        &self.column_indices[lo..hi]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        (self.row_offsets[v + 1] - self.row_offsets[v]) as usize
    }

    pub fn max_degree(&self) -> usize {
        *self.max_degree.get_or_init(|| {
            self.row_offsets
                .windows(2)
                .map(|w| (w[1] - w[0]) as usize)
                .max()
                .unwrap_or(0)
        })
    }

    /// True when `v ∈ adj(u) ⇔ u ∈ adj(v)` for every pair. Computed once and
    /// cached.
    pub fn is_symmetric(&self) -> bool {
        *self.symmetric.get_or_init(|| {
            (0..self.vertex_count as VertexId).all(|u| {
                self.neighbors(u)
                    .iter()
                    .all(|&v| self.neighbors(v).binary_search(&u).is_ok())
            })
        })
    }

    /// Iterates vertices with at least one neighbor.
    pub fn non_isolated(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count as VertexId).filter(move |&v| self.degree(v) > 0)
    }
}

/// Builds a canonical CSR graph from an edge list.
///
/// Adjacency slices come out sorted with parallel edges removed. With
/// `symmetrize`, every `(u, v)` also inserts `(v, u)`.
pub fn build_csr(
    edges: &[(VertexId, VertexId)],
    vertex_count: usize,
    symmetrize: bool,
) -> Result<CsrGraph> {
    if vertex_count > MAX_VERTICES {
        return Err(Error::Capacity(format!(
            "vertex_count {vertex_count} exceeds {MAX_VERTICES}"
        )));
    }
    let mut counts = vec![0u64; vertex_count + 1];
    for (pair, &(u, v)) in edges.iter().enumerate() {
        for endpoint in [u, v] {
            if endpoint as usize >= vertex_count {
                return Err(Error::EndpointOutOfRange {
                    pair,
                    index: endpoint as u64,
                    vertex_count: vertex_count as u64,
                });
            }
        }
        counts[u as usize + 1] += 1;
        if symmetrize && u != v {
            counts[v as usize + 1] += 1;
        }
    }
    for v in 0..vertex_count {
        counts[v + 1] += counts[v];
    }
    let mut offsets = counts;
    let total = offsets[vertex_count] as usize;

    let mut cols: Vec<VertexId> = vec![0; total];
    let mut cursor: Vec<u64> = offsets[..vertex_count].to_vec();
    let mut place = |from: VertexId, to: VertexId| {
        let slot = &mut cursor[from as usize];
        cols[*slot as usize] = to;
        *slot += 1;
    };
    for &(u, v) in edges {
        place(u, v);
        if symmetrize && u != v {
            place(v, u);
        }
    }

    // Sort and dedup each slice, compacting in place.
    let mut write = 0usize;
    for v in 0..vertex_count {
        let lo = offsets[v] as usize;
        let hi = offsets[v + 1] as usize;
        offsets[v] = write as u64;
        let slice = &mut cols[lo..hi];
        slice.sort_unstable();
        let mut last: Option<VertexId> = None;
        for k in lo..hi {
            let w = cols[k];
            if last != Some(w) {
                cols[write] = w;
                write += 1;
                last = Some(w);
            }
        }
    }
    offsets[vertex_count] = write as u64;
    cols.truncate(write);
    cols.shrink_to_fit();

    let graph = CsrGraph::from_canonical(vertex_count, offsets, cols);
    if symmetrize {
        let _ = graph.symmetric.set(true);
    }
    Ok(graph)
}
