use std::fmt;

use serde::Serialize;

use super::CsrGraph;
use crate::error::{Error, Result};

/// Average degree below which a graph is treated as large-diameter.
pub const DEFAULT_CLASSIFIER_THRESHOLD: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GraphCategory {
    SmallDiameter,
    LargeDiameter,
}

impl fmt::Display for GraphCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphCategory::SmallDiameter => "SmallDiameter",
            GraphCategory::LargeDiameter => "LargeDiameter",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub average_degree: f64,
    pub max_degree: usize,
    pub category: GraphCategory,
}

/// Average degree is the diameter proxy: sparse graphs tend to have long
/// shortest paths.
pub fn classify(average_degree: f64, threshold: f64) -> GraphCategory {
    if average_degree < threshold {
        GraphCategory::LargeDiameter
    } else {
        GraphCategory::SmallDiameter
    }
}

pub fn compute_stats(graph: &CsrGraph, threshold: f64) -> Result<GraphStats> {
    if graph.vertex_count() == 0 {
        return Err(Error::Input(
            "cannot compute stats of an empty graph".into(),
        ));
    }
    let average_degree = graph.edge_count() as f64 / graph.vertex_count() as f64;
    Ok(GraphStats {
        vertex_count: graph.vertex_count(),
        edge_count: graph.edge_count(),
        average_degree,
        max_degree: graph.max_degree(),
        category: classify(average_degree, threshold),
    })
}
