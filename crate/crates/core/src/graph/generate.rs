use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_csr, CsrGraph, VertexId, MAX_VERTICES};
use crate::error::{Error, Result};

/// Recursive-matrix quadrant probabilities `(a, b, c, d)` for the Kronecker
/// generator.
pub const KRONECKER_PROBABILITIES: [f64; 4] = [0.57, 0.19, 0.19, 0.05];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    UniformRandom,
    Kronecker,
}

/// Parameters of a synthetic graph. `vertex_count = 2^scale`, and
/// `edge_factor * 2^scale` endpoint pairs are drawn before symmetrizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub scale: u32,
    pub edge_factor: u32,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn vertex_count(&self) -> Result<usize> {
        if self.scale == 0 || self.edge_factor == 0 {
            return Err(Error::Input(format!(
                "scale and edge_factor must be >= 1 (got {}, {})",
                self.scale, self.edge_factor
            )));
        }
        1usize
            .checked_shl(self.scale)
            .filter(|&n| n <= MAX_VERTICES && self.scale < usize::BITS)
            .ok_or_else(|| Error::Capacity(format!("scale {} too large", self.scale)))
    }

    fn pair_count(&self) -> Result<usize> {
        self.vertex_count()?
            .checked_mul(self.edge_factor as usize)
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "edge_factor {} x 2^{} overflows",
                    self.edge_factor, self.scale
                ))
            })
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            GeneratorKind::UniformRandom => "uniform",
            GeneratorKind::Kronecker => "kron",
        };
        write!(
            f,
            "{kind}:{}:{}:{}",
            self.scale, self.edge_factor, self.seed
        )
    }
}

/// Parses `KIND:SCALE:EF:SEED`, e.g. `kron:16:16:1` or `uniform:12:4:7`.
impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::Input(format!(
                "generator spec {s:?} is not KIND:SCALE:EF:SEED"
            )));
        }
        let kind = match parts[0].to_ascii_lowercase().as_str() {
            "uniform" | "urand" | "random" => GeneratorKind::UniformRandom,
            "kron" | "kronecker" | "rmat" => GeneratorKind::Kronecker,
            other => return Err(Error::Input(format!("unknown generator kind {other:?}"))),
        };
        let num = |i: usize, what: &str| -> Result<u64> {
            parts[i]
                .parse()
                .map_err(|_| Error::Input(format!("bad {what} {:?} in {s:?}", parts[i])))
        };
        let spec = GeneratorSpec {
            kind,
            scale: num(1, "scale")? as u32,
            edge_factor: num(2, "edge factor")? as u32,
            seed: num(3, "seed")?,
        };
        spec.vertex_count()?;
        Ok(spec)
    }
}

/// Generates a symmetric, canonical graph from `spec`. The output is a pure
/// function of the spec.
pub fn generate(spec: &GeneratorSpec) -> Result<CsrGraph> {
    let n = spec.vertex_count()?;
    let pairs = spec.pair_count()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let edges = match spec.kind {
        GeneratorKind::UniformRandom => {
            let mut edges = Vec::with_capacity(pairs);
            for _ in 0..pairs {
                let u = rng.gen_range(0..n as VertexId);
                let v = rng.gen_range(0..n as VertexId);
                edges.push((u, v));
            }
            edges
        }
        GeneratorKind::Kronecker => kronecker_edges(spec.scale, pairs, &mut rng),
    };
    build_csr(&edges, n, true)
}

fn kronecker_edges(scale: u32, pairs: usize, rng: &mut ChaCha8Rng) -> Vec<(VertexId, VertexId)> {
    let [a, b, c, _] = KRONECKER_PROBABILITIES;
    let ab = a + b;
    let abc = a + b + c;
    let mut edges = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let (mut u, mut v) = (0 as VertexId, 0 as VertexId);
        for _ in 0..scale {
            let r: f64 = rng.gen();
            let (du, dv) = if r < a {
                (0, 0)
            } else if r < ab {
                (0, 1)
            } else if r < abc {
                (1, 0)
            } else {
                (1, 1)
            };
            u = (u << 1) | du;
            v = (v << 1) | dv;
        }
        edges.push((u, v));
    }
    // Scramble labels so high-degree vertices are not clustered at low ids.
    let mut perm: Vec<VertexId> = (0..(1 as VertexId) << scale).collect();
    perm.shuffle(rng);
    for e in &mut edges {
        *e = (perm[e.0 as usize], perm[e.1 as usize]);
    }
    edges
}
