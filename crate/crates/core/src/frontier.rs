//! Frontier containers for level-synchronous traversal.
//!
//! Workers collect discoveries in a private [`LocalFrontier`] and publish
//! them to the shared [`DenseFrontier`] with [`DenseFrontier::reserve_and_flush`]:
//! one fetch-and-add claims a disjoint slot range, then plain stores fill it.
//! [`BitmapFrontier`] holds one byte per vertex so that concurrent
//! same-value flag stores never need a read-modify-write.
//!
//! Shared containers are only read after a level barrier; the barrier
//! supplies the happens-before edge, so every store here is `Relaxed`.

use std::ops::Range;
use std::sync::atomic::{AtomicU32, AtomicU8, AtomicUsize, Ordering::Relaxed};

use crate::error::{Error, Result};
use crate::graph::VertexId;

/// Contiguous block `id` of `len` items split across `workers`.
pub fn static_range(len: usize, workers: usize, id: usize) -> Range<usize> {
    let base = len / workers;
    let extra = len % workers;
    let start = id * base + id.min(extra);
    let end = start + base + usize::from(id < extra);
    start..end
}

/// Global frontier array with an atomic size counter.
#[derive(Debug)]
pub struct DenseFrontier {
    slots: Box<[AtomicU32]>,
    len: AtomicUsize,
}

impl DenseFrontier {
    pub fn with_capacity(capacity: usize) -> Self {
        DenseFrontier {
            slots: (0..capacity).map(|_| AtomicU32::new(0)).collect(),
            len: AtomicUsize::new(0),
        }
    }

    pub fn from_slice(vertices: &[VertexId], capacity: usize) -> Self {
        let f = Self::with_capacity(capacity.max(vertices.len()));
        for (slot, &v) in f.slots.iter().zip(vertices) {
            slot.store(v, Relaxed);
        }
        f.len.store(vertices.len(), Relaxed);
        f
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len.load(Relaxed)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> VertexId {
        self.slots[i].load(Relaxed)
    }

    /// Single-worker section only.
    pub fn clear(&self) {
        self.len.store(0, Relaxed);
    }

    /// Single-worker section only.
    pub(crate) fn set_len(&self, len: usize) {
        assert!(len <= self.capacity());
        self.len.store(len, Relaxed);
    }

    #[inline]
    pub(crate) fn put(&self, i: usize, v: VertexId) {
        self.slots[i].store(v, Relaxed);
    }

    pub fn to_vec(&self) -> Vec<VertexId> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    /// Advances the shared size by `local.len()` and copies the local entries
    /// into the reserved range, then empties `local`. Returns the start
    /// offset, or `None` when `local` was empty and nothing happened.
    ///
    /// Concurrent callers always receive disjoint ranges. Overrunning the
    /// pre-sized capacity is reported as [`Error::Capacity`].
    pub fn reserve_and_flush(&self, local: &mut LocalFrontier) -> Result<Option<usize>> {
        let n = local.len();
        if n == 0 {
            return Ok(None);
        }
        let start = self.len.fetch_add(n, Relaxed);
        let end = start + n;
        if end > self.capacity() {
            local.clear();
            return Err(Error::Capacity(format!(
                "global frontier overflow: range {start}..{end} exceeds capacity {}",
                self.capacity()
            )));
        }
        for (slot, &v) in self.slots[start..end].iter().zip(local.as_slice()) {
            slot.store(v, Relaxed);
        }
        local.clear();
        Ok(Some(start))
    }
}

/// A single worker's private discovery buffer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocalFrontier {
    vertices: Vec<VertexId>,
}

impl LocalFrontier {
    pub fn with_capacity(capacity: usize) -> Self {
        LocalFrontier {
            vertices: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub fn push(&mut self, v: VertexId) {
        self.vertices.push(v);
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn clear(&mut self) {
        self.vertices.clear();
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn sort(&mut self) {
        self.vertices.sort_unstable();
    }
}

impl From<Vec<VertexId>> for LocalFrontier {
    fn from(vertices: Vec<VertexId>) -> Self {
        LocalFrontier { vertices }
    }
}

/// Byte-per-vertex frontier flags.
#[derive(Debug)]
pub struct BitmapFrontier {
    flags: Box<[AtomicU8]>,
    population: AtomicUsize,
}

impl BitmapFrontier {
    pub fn new(vertex_count: usize) -> Self {
        BitmapFrontier {
            flags: (0..vertex_count).map(|_| AtomicU8::new(0)).collect(),
            population: AtomicUsize::new(0),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.flags.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    #[inline]
    pub fn test(&self, v: VertexId) -> bool {
        self.flags[v as usize].load(Relaxed) != 0
    }

    /// Same-value store; safe to race with other `set` calls.
    #[inline]
    pub fn set(&self, v: VertexId) {
        self.flags[v as usize].store(1, Relaxed);
    }

    /// Sets the flag and reports whether it was previously clear.
    #[inline]
    pub fn test_and_set(&self, v: VertexId) -> bool {
        self.flags[v as usize].swap(1, Relaxed) == 0
    }

    /// Cached count of set flags. Maintained by whoever last rebuilt the
    /// bitmap; see [`BitmapFrontier::recount`].
    #[inline]
    pub fn population(&self) -> usize {
        self.population.load(Relaxed)
    }

    pub(crate) fn set_population(&self, n: usize) {
        self.population.store(n, Relaxed);
    }

    pub fn recount(&self) -> usize {
        let n = self.count_range(0..self.len());
        self.set_population(n);
        n
    }

    pub fn clear(&self) {
        self.clear_range(0..self.len());
        self.set_population(0);
    }

    pub(crate) fn clear_range(&self, range: Range<usize>) {
        for f in &self.flags[range] {
            f.store(0, Relaxed);
        }
    }

    pub(crate) fn count_range(&self, range: Range<usize>) -> usize {
        self.flags[range]
            .iter()
            .filter(|f| f.load(Relaxed) != 0)
            .count()
    }

    /// Writes the set vertices of `range` in ascending order to `out`
    /// starting at slot `offset`; returns how many were written.
    pub(crate) fn emit_range(
        &self,
        range: Range<usize>,
        out: &DenseFrontier,
        offset: usize,
    ) -> usize {
        let mut k = offset;
        for v in range {
            if self.flags[v].load(Relaxed) != 0 {
                out.put(k, v as VertexId);
                k += 1;
            }
        }
        k - offset
    }

    /// Sets flags for `dense[range]`; returns how many entries found their
    /// flag already set (duplicates within the batch or from other workers).
    pub(crate) fn mark_range(&self, dense: &DenseFrontier, range: Range<usize>) -> usize {
        range.filter(|&i| !self.test_and_set(dense.get(i))).count()
    }
}

/// Rebuilds `out` so that exactly the vertices in `dense` are flagged.
/// Duplicates collapse; the population becomes the distinct count.
pub fn array_to_bitmap(dense: &DenseFrontier, out: &BitmapFrontier) {
    out.clear();
    let dups = out.mark_range(dense, 0..dense.len());
    out.set_population(dense.len() - dups);
}

/// Replaces the contents of `out` with the flagged vertex ids, ascending.
pub fn bitmap_to_array(bm: &BitmapFrontier, out: &DenseFrontier) -> Result<()> {
    let population = bm.count_range(0..bm.len());
    if out.capacity() < population {
        return Err(Error::Capacity(format!(
            "dense frontier capacity {} < bitmap population {population}",
            out.capacity()
        )));
    }
    let written = bm.emit_range(0..bm.len(), out, 0);
    out.set_len(written);
    bm.set_population(population);
    Ok(())
}

/// `size - distinct(size)`; the frontier is left untouched.
pub fn count_duplicates(dense: &DenseFrontier) -> usize {
    let mut v = dense.to_vec();
    let size = v.len();
    v.sort_unstable();
    v.dedup();
    size - v.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(v: &[u32]) -> DenseFrontier {
        DenseFrontier::from_slice(v, v.len().max(16))
    }

    #[test]
    fn static_ranges_tile() {
        for len in [0, 1, 7, 8, 9, 100] {
            for workers in 1..10 {
                let mut next = 0;
                for id in 0..workers {
                    let r = static_range(len, workers, id);
                    assert_eq!(r.start, next);
                    next = r.end;
                }
                assert_eq!(next, len);
            }
        }
    }

    #[test]
    fn single_flush_into_empty() {
        let g = DenseFrontier::with_capacity(4);
        let mut lf = LocalFrontier::from(vec![4, 7]);
        assert_eq!(g.reserve_and_flush(&mut lf).unwrap(), Some(0));
        assert_eq!(g.to_vec(), vec![4, 7]);
        assert!(lf.is_empty());
    }

    #[test]
    fn empty_flush_is_skipped() {
        let g = DenseFrontier::with_capacity(2);
        let mut lf = LocalFrontier::default();
        assert_eq!(g.reserve_and_flush(&mut lf).unwrap(), None);
        assert_eq!(g.len(), 0);
    }

    #[test]
    fn overflow_is_a_capacity_fault() {
        let g = DenseFrontier::with_capacity(2);
        let mut lf = LocalFrontier::from(vec![1, 2, 3]);
        assert!(matches!(
            g.reserve_and_flush(&mut lf),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn two_workers_flush_concurrently() {
        let g = DenseFrontier::with_capacity(8);
        std::thread::scope(|s| {
            s.spawn(|| {
                let mut lf = LocalFrontier::from(vec![1, 2, 3]);
                g.reserve_and_flush(&mut lf).unwrap();
            });
            s.spawn(|| {
                let mut lf = LocalFrontier::from(vec![10, 11, 12, 13, 14]);
                g.reserve_and_flush(&mut lf).unwrap();
            });
        });
        let mut got = g.to_vec();
        got.sort();
        assert_eq!(got, vec![1, 2, 3, 10, 11, 12, 13, 14]);
    }

    #[test]
    fn array_to_bitmap_collapses_duplicates() {
        let bm = BitmapFrontier::new(5);
        array_to_bitmap(&dense(&[1, 3, 3]), &bm);
        assert_eq!(bm.population(), 2);
        assert!(bm.test(1) && bm.test(3) && !bm.test(0));
        array_to_bitmap(&dense(&[]), &bm);
        assert_eq!(bm.population(), 0);
        assert!((0..5).all(|v| !bm.test(v)));
    }

    #[test]
    fn bitmap_to_array_ascending() {
        let bm = BitmapFrontier::new(6);
        bm.set(5);
        bm.set(0);
        let out = DenseFrontier::with_capacity(6);
        bitmap_to_array(&bm, &out).unwrap();
        assert_eq!(out.to_vec(), vec![0, 5]);

        let bm = BitmapFrontier::new(4);
        (0..4).for_each(|v| bm.set(v));
        bitmap_to_array(&bm, &out).unwrap();
        assert_eq!(out.to_vec(), vec![0, 1, 2, 3]);

        let small = DenseFrontier::with_capacity(2);
        assert!(bitmap_to_array(&bm, &small).is_err());
    }

    #[test]
    fn duplicate_counts() {
        assert_eq!(count_duplicates(&dense(&[1, 2, 3])), 0);
        assert_eq!(count_duplicates(&dense(&[1, 1, 2, 2, 2])), 3);
        let f = dense(&[1, 1, 2]);
        count_duplicates(&f);
        assert_eq!(f.to_vec(), vec![1, 1, 2]);
    }

    proptest! {
        #[test]
        fn array_bitmap_array_is_sorted_distinct(v in proptest::collection::vec(0u32..1000, 0..300)) {
            let bm = BitmapFrontier::new(1000);
            let d = DenseFrontier::from_slice(&v, 1000);
            array_to_bitmap(&d, &bm);
            let out = DenseFrontier::with_capacity(1000);
            bitmap_to_array(&bm, &out).unwrap();
            let mut expect = v.clone();
            expect.sort();
            expect.dedup();
            prop_assert_eq!(bm.population(), expect.len());
            prop_assert_eq!(out.to_vec(), expect);
        }

        #[test]
        fn bitmap_array_bitmap_is_identity(flags in proptest::collection::vec(any::<bool>(), 0..500)) {
            let bm = BitmapFrontier::new(flags.len());
            for (v, &f) in flags.iter().enumerate() {
                if f { bm.set(v as u32); }
            }
            let out = DenseFrontier::with_capacity(flags.len());
            bitmap_to_array(&bm, &out).unwrap();
            let back = BitmapFrontier::new(flags.len());
            array_to_bitmap(&out, &back);
            for v in 0..flags.len() as u32 {
                prop_assert_eq!(back.test(v), bm.test(v));
            }
        }
    }
}
