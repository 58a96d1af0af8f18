//! The percolation law and its reproducible graph samples.
//!
//! Vertices live on a cycle, a path, or a 1- or 2-dimensional box. Nearest
//! neighbours are always connected; every other pair is open independently
//! with a probability that decays polynomially in the distance between the
//! endpoints.

mod sampling;

pub use sampling::{
    sample, sample_box, sample_coupled, sample_cycle_naive, sample_cycle_stratified, sample_path,
};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("distance must be at least 1")]
    ZeroDistance,
    #[error("box decay exponent s={s} must satisfy 0 < s < dim={dim}")]
    BoxDecayOutOfRange { s: f64, dim: u32 },
    #[error("sampler expects topology {expected}, got {got}")]
    WrongTopology { expected: Topology, got: Topology },
    #[error("coupled sampling requires params differing only in beta: {0}")]
    CoupledMismatch(String),
    #[error("coupled sampling requires betas sorted ascending")]
    BetasNotSorted,
    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge {
        u: u32,
        v: u32,
        reason: &'static str,
    },
}

/// Vertex layout of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// `n` vertices on a ring, cyclic distance.
    Cycle,
    /// `n` vertices on a line segment, linear distance.
    Path,
    /// `n` vertices on a line segment with the box law (no intensity).
    Box1,
    /// `n x n` grid, L1 graph distance, box law.
    Box2,
}

impl Topology {
    /// Box dimension, if this is a box topology.
    pub fn box_dim(self) -> Option<u32> {
        match self {
            Topology::Box1 => Some(1),
            Topology::Box2 => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Topology::Cycle => "cycle",
            Topology::Path => "path",
            Topology::Box1 => "box1",
            Topology::Box2 => "box2",
        };
        f.write_str(name)
    }
}

impl FromStr for Topology {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cycle" => Ok(Topology::Cycle),
            "path" => Ok(Topology::Path),
            "box1" => Ok(Topology::Box1),
            "box2" => Ok(Topology::Box2),
            other => Err(ModelError::InvalidParams(format!(
                "unknown topology `{other}` (expected cycle|path|box1|box2)"
            ))),
        }
    }
}

/// Full description of one random graph law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub topology: Topology,
    /// Side length: the vertex count for cycle/path/box1, the grid side for box2.
    pub n: u32,
    /// Polynomial decay exponent of the long-edge probability.
    pub s: f64,
    /// Intensity multiplier; ignored by the box law.
    pub beta: f64,
    /// Master seed all streams for this law are derived from.
    pub seed: u64,
}

impl ModelParams {
    pub fn new(
        topology: Topology,
        n: u32,
        s: f64,
        beta: f64,
        seed: u64,
    ) -> Result<Self, ModelError> {
        let params = ModelParams {
            topology,
            n,
            s,
            beta,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n < 1 {
            return Err(ModelError::InvalidParams("n must be at least 1".into()));
        }
        if !self.s.is_finite() || self.s <= 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "s must be a positive finite real, got {}",
                self.s
            )));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "beta must be a non-negative finite real, got {}",
                self.beta
            )));
        }
        if self.topology == Topology::Box2 && self.n as u64 * self.n as u64 > u32::MAX as u64 {
            return Err(ModelError::InvalidParams(format!(
                "box2 side {} overflows the vertex id range",
                self.n
            )));
        }
        Ok(())
    }

    /// Number of vertices the sampled graph will have.
    pub fn vertex_count(&self) -> usize {
        match self.topology {
            Topology::Box2 => self.n as usize * self.n as usize,
            _ => self.n as usize,
        }
    }
}

/// Cyclic distance `min(|x-y|, n-|x-y|)` between vertex ids on the ring.
///
/// Total on valid ids; callers guarantee `x, y < n`.
#[inline]
pub fn ring_distance(x: u32, y: u32, n: u32) -> u32 {
    debug_assert!(x < n && y < n);
    let diff = x.abs_diff(y);
    diff.min(n - diff)
}

/// Probability that a pair at distance `d` is open under the cycle/path law:
/// 1 at distance 1, `1 - exp(-beta * d^-s)` beyond.
pub fn edge_probability(d: u64, s: f64, beta: f64) -> Result<f64, ModelError> {
    if d == 0 {
        return Err(ModelError::ZeroDistance);
    }
    if d == 1 {
        return Ok(1.0);
    }
    Ok(-f64::exp_m1(-beta * (d as f64).powf(-s)))
}

/// Probability that a pair at graph distance `d` is open under the box law:
/// `min(1, d^-s)`.
pub fn box_edge_probability(d: u64, s: f64) -> Result<f64, ModelError> {
    if d == 0 {
        return Err(ModelError::ZeroDistance);
    }
    Ok((d as f64).powf(-s).min(1.0))
}

/// A sampled graph: immutable, symmetric adjacency lists plus its law.
#[derive(Debug, Clone, PartialEq)]
pub struct PercGraph {
    params: ModelParams,
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
}

impl PercGraph {
    /// Builds a graph from an explicit undirected edge list. Rejects
    /// self-loops, duplicates, and out-of-range endpoints.
    pub fn from_edges(
        params: ModelParams,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, ModelError> {
        params.validate()?;
        let n = params.vertex_count();
        let mut adjacency = vec![Vec::new(); n];
        let mut edge_count = 0usize;
        for (u, v) in edges {
            if u == v {
                return Err(ModelError::InvalidEdge {
                    u,
                    v,
                    reason: "self-loop",
                });
            }
            if u as usize >= n || v as usize >= n {
                return Err(ModelError::InvalidEdge {
                    u,
                    v,
                    reason: "endpoint out of range",
                });
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
            edge_count += 1;
        }
        for list in &mut adjacency {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(ModelError::InvalidEdge {
                    u: 0,
                    v: 0,
                    reason: "duplicate edge",
                });
            }
        }
        Ok(PercGraph {
            params,
            adjacency,
            edge_count,
        })
    }

    pub(crate) fn from_builder(
        params: ModelParams,
        mut adjacency: Vec<Vec<u32>>,
        edge_count: usize,
    ) -> Self {
        for list in &mut adjacency {
            list.sort_unstable();
        }
        PercGraph {
            params,
            adjacency,
            edge_count,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.adjacency.is_empty() {
            return 0.0;
        }
        2.0 * self.edge_count as f64 / self.adjacency.len() as f64
    }

    /// Undirected edges as `(u, v)` with `u < v`, in vertex order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = u as u32;
            list.iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Checks the structural invariants: symmetry, no self-loops, no
    /// duplicates, edge count consistent with list lengths, and the
    /// deterministic spine of the topology.
    pub fn check_invariants(&self) -> Result<(), ModelError> {
        let n = self.vertex_count();
        let mut half_sum = 0usize;
        for (u, list) in self.adjacency.iter().enumerate() {
            half_sum += list.len();
            let mut prev: Option<u32> = None;
            for &v in list {
                if v as usize >= n {
                    return Err(ModelError::InvalidEdge {
                        u: u as u32,
                        v,
                        reason: "endpoint out of range",
                    });
                }
                if v as usize == u {
                    return Err(ModelError::InvalidEdge {
                        u: u as u32,
                        v,
                        reason: "self-loop",
                    });
                }
                if prev == Some(v) {
                    return Err(ModelError::InvalidEdge {
                        u: u as u32,
                        v,
                        reason: "duplicate entry",
                    });
                }
                if prev.is_some_and(|p| p > v) {
                    return Err(ModelError::InvalidEdge {
                        u: u as u32,
                        v,
                        reason: "unsorted adjacency",
                    });
                }
                prev = Some(v);
                if !self.adjacency[v as usize]
                    .binary_search(&(u as u32))
                    .is_ok()
                {
                    return Err(ModelError::InvalidEdge {
                        u: u as u32,
                        v,
                        reason: "asymmetric adjacency",
                    });
                }
            }
        }
        if half_sum != 2 * self.edge_count {
            return Err(ModelError::InvalidParams(format!(
                "edge_count {} does not match half the adjacency mass {}",
                self.edge_count, half_sum
            )));
        }
        for (u, v) in self.spine_edges() {
            if !self.adjacency[u as usize].binary_search(&v).is_ok() {
                return Err(ModelError::InvalidEdge {
                    u,
                    v,
                    reason: "missing spine edge",
                });
            }
        }
        Ok(())
    }

    /// Deterministic nearest-neighbour edges demanded by the topology.
    pub(crate) fn spine_edges(&self) -> Vec<(u32, u32)> {
        spine_edges(&self.params)
    }

    /// Writes the edge list as CSV with header `u,v`, one edge per row,
    /// `u < v`.
    pub fn write_edge_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "u,v")?;
        for (u, v) in self.edges() {
            writeln!(out, "{u},{v}")?;
        }
        Ok(())
    }
}

pub(crate) fn spine_edges(params: &ModelParams) -> Vec<(u32, u32)> {
    let n = params.n;
    match params.topology {
        Topology::Cycle => {
            let mut edges: Vec<(u32, u32)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
            if n >= 3 {
                edges.push((0, n - 1));
            }
            edges
        }
        Topology::Path | Topology::Box1 => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        Topology::Box2 => {
            let mut edges = Vec::new();
            for r in 0..n {
                for c in 0..n {
                    let id = r * n + c;
                    if c + 1 < n {
                        edges.push((id, id + 1));
                    }
                    if r + 1 < n {
                        edges.push((id, id + n));
                    }
                }
            }
            edges
        }
    }
}
