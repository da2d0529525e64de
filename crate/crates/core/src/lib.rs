//! Shared-memory parallel breadth-first search.
//!
//! The crate provides canonical CSR graphs ([`graph`]), frontier containers
//! ([`frontier`]), a family of level-synchronous BFS kernels plus a serial
//! oracle ([`kernels`]), per-level traversal traces ([`instrumentation`]),
//! and the benchmark harness used by the `pbfs` binary ([`bench`]).
//!
//! ```
//! use pbfs::graph::{build_csr, compute_stats};
//! use pbfs::kernels::{bfs_serial, run_bfs, KernelConfig, Variant};
//!
//! let g = build_csr(&[(0, 1), (1, 2), (2, 3)], 4, true).unwrap();
//! let stats = compute_stats(&g, 7.0).unwrap();
//! let config = KernelConfig::new(Variant::Hybrid, 2);
//! let (dist, trace) = run_bfs(&g, 0, &config, &stats).unwrap();
//! assert_eq!(&dist[..], &[0, 1, 2, 3]);
//! assert_eq!(dist, bfs_serial(&g, 0).unwrap());
//! assert_eq!(trace.records.len(), 4);
//! ```

pub mod bench;
pub mod error;
pub mod frontier;
pub mod graph;
pub mod instrumentation;
pub mod kernels;

pub use error::{Error, Result};
