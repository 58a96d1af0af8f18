//! Graph samplers for the percolation laws.
//!
//! Every sampler is a pure function of `(params, trial)`: randomness comes
//! from streams derived in [`crate::rng`], and pairs are visited in a fixed
//! order, so repeated calls agree byte for byte regardless of scheduling.

use super::{
    box_edge_probability, edge_probability, ring_distance, spine_edges, ModelError, ModelParams,
    PercGraph, Topology,
};
use crate::rng::{derive_stream, pair_key, pair_uniform, StreamTag};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Samples with the default sampler for the params' topology.
pub fn sample(params: &ModelParams, trial: u64) -> Result<PercGraph, ModelError> {
    match params.topology {
        Topology::Cycle => sample_cycle_stratified(params, trial),
        Topology::Path => sample_path(params, trial),
        Topology::Box1 | Topology::Box2 => sample_box(params, trial),
    }
}

struct Builder {
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder {
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    #[inline]
    fn add(&mut self, u: u32, v: u32) {
        self.adjacency[u as usize].push(v);
        self.adjacency[v as usize].push(u);
        self.edge_count += 1;
    }

    fn add_spine(&mut self, params: &ModelParams) {
        for (u, v) in spine_edges(params) {
            self.add(u, v);
        }
    }

    fn finish(self, params: ModelParams) -> PercGraph {
        PercGraph::from_builder(params, self.adjacency, self.edge_count)
    }
}

fn expect_topology(params: &ModelParams, expected: Topology) -> Result<(), ModelError> {
    if params.topology != expected {
        return Err(ModelError::WrongTopology {
            expected,
            got: params.topology,
        });
    }
    Ok(())
}

/// Per-pair Bernoulli sampler over all `O(n^2)` cycle pairs in lexicographic
/// order. The reference implementation the stratified sampler is checked
/// against.
pub fn sample_cycle_naive(params: &ModelParams, trial: u64) -> Result<PercGraph, ModelError> {
    params.validate()?;
    expect_topology(params, Topology::Cycle)?;
    let n = params.n;
    let probs = cycle_class_probs(params)?;
    let mut rng = derive_stream(params.seed, trial, StreamTag::CycleEdges);
    let mut builder = Builder::new(n as usize);
    for x in 0..n {
        for y in (x + 1)..n {
            let d = ring_distance(x, y, n);
            // short-circuit: spine pairs must not consume a draw
            let open = d == 1 || rng.random::<f64>() < probs[d as usize];
            if open {
                builder.add(x, y);
            }
        }
    }
    Ok(builder.finish(*params))
}

/// Open-edge probability per cycle distance class, indexed by distance.
fn cycle_class_probs(params: &ModelParams) -> Result<Vec<f64>, ModelError> {
    let half = (params.n / 2) as usize;
    let mut probs = vec![0.0; half + 1];
    for (d, slot) in probs.iter_mut().enumerate().skip(2) {
        *slot = edge_probability(d as u64, params.s, params.beta)?;
    }
    Ok(probs)
}

/// Stratified cycle sampler: identical law to the naive sampler, but draws
/// the open-edge count of each distance class from the binomial and then
/// places that many distinct pairs. Expected cost `O(n + edges)` for `s > 1`.
pub fn sample_cycle_stratified(params: &ModelParams, trial: u64) -> Result<PercGraph, ModelError> {
    params.validate()?;
    expect_topology(params, Topology::Cycle)?;
    let n = params.n;
    let probs = cycle_class_probs(params)?;
    let mut rng = derive_stream(params.seed, trial, StreamTag::CycleEdges);
    let mut builder = Builder::new(n as usize);
    builder.add_spine(params);
    let mut picker = DistinctPicker::new(n as usize);
    for d in 2..=n / 2 {
        let class_size = if 2 * d == n { n / 2 } else { n } as usize;
        let p = probs[d as usize];
        if p == 0.0 {
            continue;
        }
        let open = Binomial::new(class_size as u64, p)
            .expect("probability is in [0,1]")
            .sample(&mut rng) as usize;
        picker.pick(class_size, open, d, &mut rng, |i| {
            let x = i as u32;
            let y = (x + d) % n;
            builder.add(x.min(y), x.max(y));
        });
    }
    Ok(builder.finish(*params))
}

/// Path sampler: deterministic consecutive edges, linear distance for every
/// other pair, stratified by distance class.
pub fn sample_path(params: &ModelParams, trial: u64) -> Result<PercGraph, ModelError> {
    params.validate()?;
    expect_topology(params, Topology::Path)?;
    line_sample(params, trial, StreamTag::PathEdges, |d| {
        edge_probability(d, params.s, params.beta)
    })
}

/// Box sampler: every non-lattice pair is open with probability
/// `min(1, d^-s)` in the L1 graph metric; the decay must satisfy `s < dim`.
pub fn sample_box(params: &ModelParams, trial: u64) -> Result<PercGraph, ModelError> {
    params.validate()?;
    let dim = match params.topology.box_dim() {
        Some(dim) => dim,
        None => {
            return Err(ModelError::WrongTopology {
                expected: Topology::Box1,
                got: params.topology,
            })
        }
    };
    if params.s >= dim as f64 {
        return Err(ModelError::BoxDecayOutOfRange { s: params.s, dim });
    }
    match dim {
        1 => line_sample(params, trial, StreamTag::BoxEdges, |d| {
            box_edge_probability(d, params.s)
        }),
        _ => sample_box2(params, trial),
    }
}

/// Shared stratified sampler for line-shaped vertex sets (path and 1-d box):
/// distance class `d` holds the `n - d` pairs `(i, i + d)`.
fn line_sample(
    params: &ModelParams,
    trial: u64,
    tag: StreamTag,
    prob: impl Fn(u64) -> Result<f64, ModelError>,
) -> Result<PercGraph, ModelError> {
    let n = params.n as usize;
    let mut rng = derive_stream(params.seed, trial, tag);
    let mut builder = Builder::new(n);
    builder.add_spine(params);
    let mut picker = DistinctPicker::new(n);
    for d in 2..n {
        let class_size = n - d;
        let p = prob(d as u64)?;
        if p == 0.0 {
            continue;
        }
        let open = Binomial::new(class_size as u64, p)
            .expect("probability is in [0,1]")
            .sample(&mut rng) as usize;
        picker.pick(class_size, open, d as u32, &mut rng, |i| {
            builder.add(i as u32, (i + d) as u32);
        });
    }
    Ok(builder.finish(*params))
}

/// 2-d box sampler. Pair enumeration is quadratic in the vertex count, which
/// is fine for the grid sides the box law is probed at.
fn sample_box2(params: &ModelParams, trial: u64) -> Result<PercGraph, ModelError> {
    let side = params.n as usize;
    let verts = side * side;
    let max_d = 2 * (side.saturating_sub(1));
    let mut probs = vec![0.0; max_d + 1];
    for (d, slot) in probs.iter_mut().enumerate().skip(2) {
        *slot = box_edge_probability(d as u64, params.s)?;
    }
    let mut rng = derive_stream(params.seed, trial, StreamTag::BoxEdges);
    let mut builder = Builder::new(verts);
    builder.add_spine(params);
    for u in 0..verts {
        let (ur, uc) = (u / side, u % side);
        for v in (u + 1)..verts {
            let (vr, vc) = (v / side, v % side);
            let d = ur.abs_diff(vr) + uc.abs_diff(vc);
            if d >= 2 && rng.random::<f64>() < probs[d] {
                builder.add(u as u32, v as u32);
            }
        }
    }
    Ok(builder.finish(*params))
}

/// Coupled sampler: one shared uniform per pair, hashed from
/// `(seed, trial, pair)`, reused across all betas. Edge sets are nested along
/// the (ascending) beta list by construction.
pub fn sample_coupled(
    params_list: &[ModelParams],
    trial: u64,
) -> Result<Vec<PercGraph>, ModelError> {
    let first = params_list
        .first()
        .ok_or_else(|| ModelError::CoupledMismatch("empty params list".into()))?;
    first.validate()?;
    if !matches!(first.topology, Topology::Cycle | Topology::Path) {
        return Err(ModelError::CoupledMismatch(
            "coupling is defined for the cycle and path laws only".into(),
        ));
    }
    for p in params_list {
        p.validate()?;
        if p.topology != first.topology || p.n != first.n || p.s != first.s || p.seed != first.seed
        {
            return Err(ModelError::CoupledMismatch(
                "topology, n, s and seed must be shared".into(),
            ));
        }
    }
    if params_list.windows(2).any(|w| w[0].beta > w[1].beta) {
        return Err(ModelError::BetasNotSorted);
    }

    let n = first.n;
    let max_d = match first.topology {
        Topology::Cycle => n / 2,
        _ => n.saturating_sub(1),
    } as usize;
    let mut probs = vec![vec![0.0; max_d + 1]; params_list.len()];
    for (pi, p) in params_list.iter().enumerate() {
        for (d, slot) in probs[pi].iter_mut().enumerate().skip(2) {
            *slot = edge_probability(d as u64, p.s, p.beta)?;
        }
    }

    let key = pair_key(first.seed, trial, StreamTag::CoupledPairs);
    let mut builders: Vec<Builder> = params_list
        .iter()
        .map(|_| Builder::new(n as usize))
        .collect();
    for x in 0..n {
        for y in (x + 1)..n {
            let d = match first.topology {
                Topology::Cycle => ring_distance(x, y, n),
                _ => y - x,
            };
            if d == 1 {
                for b in &mut builders {
                    b.add(x, y);
                }
                continue;
            }
            let u = pair_uniform(key, x, y);
            for (b, pr) in builders.iter_mut().zip(&probs) {
                if u < pr[d as usize] {
                    b.add(x, y);
                }
            }
        }
    }
    // the cycle wrap edge (0, n-1) at distance 1 is already covered by the
    // pair loop; paths of length 1 have no long pairs at all
    Ok(builders
        .into_iter()
        .zip(params_list)
        .map(|(b, p)| b.finish(*p))
        .collect())
}

/// Draws `k` distinct indices from `0..m` by Floyd's algorithm, with a
/// generation-stamped membership array so no per-class clearing or hashing
/// is needed.
struct DistinctPicker {
    stamp: Vec<u32>,
}

impl DistinctPicker {
    fn new(capacity: usize) -> Self {
        DistinctPicker {
            stamp: vec![0; capacity],
        }
    }

    fn pick(
        &mut self,
        m: usize,
        k: usize,
        generation: u32,
        rng: &mut impl Rng,
        mut emit: impl FnMut(usize),
    ) {
        debug_assert!(k <= m && m <= self.stamp.len());
        for j in (m - k)..m {
            let t = rng.random_range(0..=j);
            let chosen = if self.stamp[t] == generation { j } else { t };
            self.stamp[chosen] = generation;
            emit(chosen);
        }
    }
}
