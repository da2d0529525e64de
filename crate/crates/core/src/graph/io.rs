use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{build_csr, CsrGraph, VertexId, MAX_VERTICES};
use crate::error::{Error, Result};

/// Leading bytes of the binary CSR format.
pub const BINARY_MAGIC: &[u8; 4] = b"CSR1";

/// Numbering base of vertex ids in a text edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexBase {
    #[default]
    Zero,
    One,
}

/// Loads a whitespace-separated `u v` edge list. Lines starting with `%` or
/// `#` are comments, so MatrixMarket bodies load as well. Tokens past the
/// second on a line (weights, values) are ignored.
pub fn load_edge_list(path: &Path, base: IndexBase, symmetrize: bool) -> Result<CsrGraph> {
    load_edge_list_sized(path, base, symmetrize, None)
}

/// Like [`load_edge_list`] with an explicit vertex count. Without one the
/// count is inferred as the largest id plus one.
pub fn load_edge_list_sized(
    path: &Path,
    base: IndexBase,
    symmetrize: bool,
    vertex_count: Option<usize>,
) -> Result<CsrGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    let mut max_id: Option<u64> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut endpoint = || -> Result<u64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                token: String::new(),
            })?;
            let bad = || Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                token: tok.to_string(),
            };
            let raw: u64 = tok.parse().map_err(|_| bad())?;
            let id = match base {
                IndexBase::Zero => raw,
                IndexBase::One => raw.checked_sub(1).ok_or_else(bad)?,
            };
            if id >= MAX_VERTICES as u64 {
                return Err(bad());
            }
            Ok(id)
        };
        let u = endpoint()?;
        let v = endpoint()?;
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u as VertexId, v as VertexId));
    }

    let n = vertex_count.unwrap_or_else(|| max_id.map_or(0, |m| m as usize + 1));
    build_csr(&edges, n, symmetrize)
}

/// Writes the little-endian binary CSR format: magic, `u64` vertex count,
/// `u64` edge count, `u64` row offsets, `u32` column indices.
pub fn save_binary_csr(graph: &CsrGraph, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(graph.vertex_count() as u64).to_le_bytes())?;
        w.write_all(&(graph.edge_count() as u64).to_le_bytes())?;
        for &off in graph.row_offsets() {
            w.write_all(&off.to_le_bytes())?;
        }
        for &c in graph.column_indices() {
            w.write_all(&c.to_le_bytes())?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Error::io(path, e))
}

fn read_field<R: Read>(r: &mut R, buf: &mut [u8], field: &'static str) -> Result<()> {
    r.read_exact(buf).map_err(|e| Error::Format {
        field,
        reason: if e.kind() == std::io::ErrorKind::UnexpectedEof {
            "truncated file".to_string()
        } else {
            e.to_string()
        },
    })
}

fn read_u64<R: Read>(r: &mut R, field: &'static str) -> Result<u64> {
    let mut b = [0u8; 8];
    read_field(r, &mut b, field)?;
    Ok(u64::from_le_bytes(b))
}

pub fn load_binary_csr(path: &Path) -> Result<CsrGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_field(&mut r, &mut magic, "magic")?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Format {
            field: "magic",
            reason: format!("expected {BINARY_MAGIC:?}, found {magic:?}"),
        });
    }
    let n = read_u64(&mut r, "vertex_count")?;
    let m = read_u64(&mut r, "edge_count")?;
    if n > MAX_VERTICES as u64 {
        return Err(Error::Format {
            field: "vertex_count",
            reason: format!("{n} exceeds {MAX_VERTICES}"),
        });
    }
    let n = n as usize;
    let m = usize::try_from(m).map_err(|_| Error::Format {
        field: "edge_count",
        reason: format!("{m} does not fit in memory"),
    })?;

    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(read_u64(&mut r, "row_offsets")?);
    }
    // Offsets are checked before allocating the column array so a corrupt
    // edge_count cannot trigger a huge allocation on its own.
    if offsets[n] != m as u64 {
        return Err(Error::Format {
            field: "row_offsets",
            reason: format!("final offset {} != edge_count {m}", offsets[n]),
        });
    }
    let mut cols = Vec::with_capacity(m);
    let mut b = [0u8; 4];
    for _ in 0..m {
        read_field(&mut r, &mut b, "column_indices")?;
        cols.push(u32::from_le_bytes(b));
    }
    if r.read(&mut b).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::Format {
            field: "column_indices",
            reason: "trailing bytes after last column index".into(),
        });
    }
    CsrGraph::from_parts(n, offsets, cols).map_err(|e| Error::Format {
        field: "column_indices",
        reason: e.to_string(),
    })
}

/// Loads either format, sniffing the binary magic.
pub fn load_graph(path: &Path, base: IndexBase, symmetrize: bool) -> Result<CsrGraph> {
    let mut head = [0u8; 4];
    let is_binary = File::open(path)
        .and_then(|mut f| f.read_exact(&mut head))
        .map(|_| &head == BINARY_MAGIC)
        .unwrap_or(false);
    if is_binary {
        load_binary_csr(path)
    } else {
        load_edge_list(path, base, symmetrize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorKind, GeneratorSpec};

    fn write_tmp(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        p
    }

    #[test]
    fn zero_based_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "p.el", "0 1\n1 2\n");
        let g = load_edge_list(&p, IndexBase::Zero, true).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn one_based_shift() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "p.el", "1 2\n");
        let g = load_edge_list(&p, IndexBase::One, false).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn matrix_market_header_is_comment() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            &dir,
            "m.mtx",
            "%%MatrixMarket matrix coordinate pattern general\n% generated\n1 2\n",
        );
        let g = load_edge_list(&p, IndexBase::One, false).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn parse_error_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "bad.el", "0 1\n# ok\n2 x\n");
        match load_edge_list(&p, IndexBase::Zero, false).unwrap_err() {
            Error::Parse { line, token, .. } => {
                assert_eq!(line, 3);
                assert_eq!(token, "x");
            }
            e => panic!("unexpected {e:?}"),
        }
        let p = write_tmp(&dir, "zero.el", "0 1\n");
        assert!(matches!(
            load_edge_list(&p, IndexBase::One, false),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn empty_file_uses_declared_or_inferred_size() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "empty.el", "% nothing\n");
        assert_eq!(
            load_edge_list(&p, IndexBase::Zero, true)
                .unwrap()
                .vertex_count(),
            0
        );
        assert_eq!(
            load_edge_list_sized(&p, IndexBase::Zero, true, Some(5))
                .unwrap()
                .vertex_count(),
            5
        );
    }

    #[test]
    fn binary_roundtrip_small_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        for g in [
            build_csr(&[(0, 1), (1, 2)], 3, true).unwrap(),
            build_csr(&[], 0, false).unwrap(),
            build_csr(&[], 4, false).unwrap(),
        ] {
            let p = dir.path().join("g.csr");
            save_binary_csr(&g, &p).unwrap();
            let back = load_binary_csr(&p).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn kronecker_second_save_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let g = generate(&GeneratorSpec {
            kind: GeneratorKind::Kronecker,
            scale: 10,
            edge_factor: 8,
            seed: 3,
        })
        .unwrap();
        let a = dir.path().join("a.csr");
        let b = dir.path().join("b.csr");
        save_binary_csr(&g, &a).unwrap();
        save_binary_csr(&load_binary_csr(&a).unwrap(), &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn binary_errors_name_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let g = build_csr(&[(0, 1), (1, 2)], 3, true).unwrap();
        let p = dir.path().join("g.csr");
        save_binary_csr(&g, &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();

        let bad_magic = dir.path().join("m.csr");
        let mut b = bytes.clone();
        b[0] = b'X';
        std::fs::write(&bad_magic, &b).unwrap();
        assert!(matches!(
            load_binary_csr(&bad_magic),
            Err(Error::Format { field: "magic", .. })
        ));

        let cases = [
            (2usize, "magic"),
            (10, "vertex_count"),
            (18, "edge_count"),
            (30, "row_offsets"),
            (bytes.len() - 1, "column_indices"),
        ];
        for (len, field) in cases {
            let t = dir.path().join("t.csr");
            std::fs::write(&t, &bytes[..len]).unwrap();
            match load_binary_csr(&t) {
                Err(Error::Format { field: f, .. }) => assert_eq!(f, field, "len {len}"),
                other => panic!("len {len}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn load_graph_sniffs_format() {
        let dir = tempfile::tempdir().unwrap();
        let g = build_csr(&[(0, 1), (1, 2)], 3, true).unwrap();
        let bin = dir.path().join("g.csr");
        save_binary_csr(&g, &bin).unwrap();
        let txt = write_tmp(&dir, "g.el", "0 1\n1 2\n");
        assert_eq!(load_graph(&bin, IndexBase::Zero, true).unwrap(), g);
        assert_eq!(load_graph(&txt, IndexBase::Zero, true).unwrap(), g);
    }
}
