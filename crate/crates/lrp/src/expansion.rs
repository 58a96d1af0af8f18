//! Expansion and transport measurements: half-cut boundary, Cheeger constant
//! (exhaustive and arc-restricted), effective resistance, and total-variation
//! mixing time of the lazy simple random walk.

use crate::csr::Csr;
use crate::model::{edge_probability, ModelParams, PercGraph, Topology};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExpansionError {
    #[error("operation requires topology {expected}, got {got}")]
    WrongTopology { expected: Topology, got: Topology },
    #[error("half-cut requires an even vertex count of at least 4, got {0}")]
    HalfCutNeedsEvenN(usize),
    #[error("exhaustive Cheeger enumeration is limited to 2 <= n <= {limit}, got {n}")]
    ExhaustiveLimit { n: usize, limit: usize },
    #[error("arc scan requires at least 3 vertices, got {0}")]
    ArcScanTooSmall(usize),
    #[error("resistance endpoints must be distinct")]
    SameVertex,
    #[error("vertex {0} out of range")]
    VertexOutOfRange(u32),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("conjugate gradient failed to reach residual {target} within {iters} iterations")]
    SolverStalled { target: f64, iters: usize },
    #[error("mixing threshold must lie strictly between 0 and 1")]
    InvalidThreshold,
    #[error("total-variation distance increased during evolution (step {step})")]
    NonMonotoneTv { step: u64 },
}

/// Exhaustive Cheeger enumeration is kept below a second by capping the
/// vertex count at 20 (about a million subsets).
pub const CHEEGER_EXHAUSTIVE_LIMIT: usize = 20;

/// One measured resistance: the probed pair and its potential difference.
pub type ResistanceProbe = ((u32, u32), f64);

/// Which family of candidate sets produced a cut witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CutFamily {
    AllSubsets,
    Arcs,
    Half,
}

/// A vertex set achieving some boundary-to-size ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutWitness {
    pub set_size: u32,
    pub boundary_size: u64,
    pub ratio: f64,
    pub family: CutFamily,
}

impl CutWitness {
    fn new(boundary_size: u64, set_size: u32, family: CutFamily) -> Self {
        CutWitness {
            set_size,
            boundary_size,
            ratio: boundary_size as f64 / set_size as f64,
            family,
        }
    }
}

/// Number of edges crossing between the arcs `[0, n/2)` and `[n/2, n)`.
pub fn half_boundary(graph: &PercGraph) -> Result<u64, ExpansionError> {
    let topology = graph.params().topology;
    if topology != Topology::Cycle {
        return Err(ExpansionError::WrongTopology {
            expected: Topology::Cycle,
            got: topology,
        });
    }
    let n = graph.vertex_count();
    if n < 4 || !n.is_multiple_of(2) {
        return Err(ExpansionError::HalfCutNeedsEvenN(n));
    }
    let half = (n / 2) as u32;
    let mut crossing = 0u64;
    for u in 0..half {
        for &v in graph.neighbors(u) {
            if v >= half {
                crossing += 1;
            }
        }
    }
    Ok(crossing)
}

/// Analytic expectation of [`half_boundary`] by distance-class counting:
/// `2d` crossing pairs at cyclic distance `d < n/2` and `n/2` pairs at the
/// antipodal distance. `O(n)`.
pub fn expected_half_boundary(params: &ModelParams) -> Result<f64, ExpansionError> {
    check_half_params(params)?;
    let n = params.n as u64;
    let mut total = 0.0;
    for d in 1..n / 2 {
        total += 2.0 * d as f64 * edge_probability(d, params.s, params.beta).expect("d >= 1");
    }
    total += (n / 2) as f64 * edge_probability(n / 2, params.s, params.beta).expect("d >= 1");
    Ok(total)
}

/// The same expectation by brute-force enumeration of all crossing pairs,
/// `O(n^2)`. Kept as an independent route for cross-checks.
pub fn expected_half_boundary_enumerated(params: &ModelParams) -> Result<f64, ExpansionError> {
    check_half_params(params)?;
    let n = params.n;
    let half = n / 2;
    let mut probs = vec![0.0; (half + 1) as usize];
    for (d, p) in probs.iter_mut().enumerate().skip(1) {
        *p = edge_probability(d as u64, params.s, params.beta).expect("d >= 1");
    }
    let mut total = 0.0;
    for i in 0..half {
        for j in half..n {
            total += probs[crate::model::ring_distance(i, j, n) as usize];
        }
    }
    Ok(total)
}

fn check_half_params(params: &ModelParams) -> Result<(), ExpansionError> {
    if params.topology != Topology::Cycle {
        return Err(ExpansionError::WrongTopology {
            expected: Topology::Cycle,
            got: params.topology,
        });
    }
    if params.n < 4 || !params.n.is_multiple_of(2) {
        return Err(ExpansionError::HalfCutNeedsEvenN(params.n as usize));
    }
    Ok(())
}

/// Exact Cheeger constant by Gray-code enumeration of all non-empty vertex
/// sets with `|A| <= n/2`; each step flips one vertex and updates the
/// boundary from the adjacency bitmask in O(1).
pub fn cheeger_exact(graph: &PercGraph) -> Result<CutWitness, ExpansionError> {
    let n = graph.vertex_count();
    if !(2..=CHEEGER_EXHAUSTIVE_LIMIT).contains(&n) {
        return Err(ExpansionError::ExhaustiveLimit {
            n,
            limit: CHEEGER_EXHAUSTIVE_LIMIT,
        });
    }
    let adj_mask: Vec<u32> = (0..n)
        .map(|v| {
            graph
                .neighbors(v as u32)
                .iter()
                .fold(0u32, |m, &w| m | (1 << w))
        })
        .collect();
    let degrees: Vec<i64> = (0..n).map(|v| graph.degree(v as u32) as i64).collect();
    let max_size = (n / 2) as u32;

    let mut mask = 0u32;
    let mut boundary = 0i64;
    let mut size = 0u32;
    let mut best: Option<(u64, u32)> = None;
    for i in 1u64..(1u64 << n) {
        let b = i.trailing_zeros() as usize;
        let bit = 1u32 << b;
        let inside = (adj_mask[b] & (mask & !bit)).count_ones() as i64;
        if mask & bit == 0 {
            mask |= bit;
            boundary += degrees[b] - 2 * inside;
            size += 1;
        } else {
            mask &= !bit;
            boundary -= degrees[b] - 2 * inside;
            size -= 1;
        }
        if size >= 1 && size <= max_size {
            let cand = (boundary as u64, size);
            let better = match best {
                None => true,
                Some((bb, bs)) => cand.0 * (bs as u64) < bb * (cand.1 as u64),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    let (boundary, size) = best.expect("n >= 2 guarantees candidate sets");
    Ok(CutWitness::new(boundary, size, CutFamily::AllSubsets))
}

/// Minimum boundary-to-size ratio over contiguous arcs of length up to
/// `n/2`: an upper bound on the Cheeger constant, computed with incremental
/// boundary bookkeeping in `O(n * edges / n)` per start, `O(n + E)` amortized
/// per arc extension.
pub fn cheeger_arc_upper(graph: &PercGraph) -> Result<CutWitness, ExpansionError> {
    let topology = graph.params().topology;
    if topology != Topology::Cycle {
        return Err(ExpansionError::WrongTopology {
            expected: Topology::Cycle,
            got: topology,
        });
    }
    let n = graph.vertex_count();
    if n < 3 {
        return Err(ExpansionError::ArcScanTooSmall(n));
    }
    let max_len = (n / 2).max(1);
    let mut stamp = vec![0u32; n];
    let mut best: Option<(u64, u32)> = None;
    for start in 0..n {
        let generation = start as u32 + 1;
        let mut boundary = 0i64;
        for len in 1..=max_len {
            let v = ((start + len - 1) % n) as u32;
            let mut inside = 0i64;
            for &w in graph.neighbors(v) {
                if stamp[w as usize] == generation {
                    inside += 1;
                }
            }
            boundary += graph.degree(v) as i64 - 2 * inside;
            stamp[v as usize] = generation;
            let cand = (boundary as u64, len as u32);
            let better = match best {
                None => true,
                Some((bb, bs)) => cand.0 * (bs as u64) < bb * (cand.1 as u64),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    let (boundary, size) = best.expect("n >= 3 guarantees candidate arcs");
    Ok(CutWitness::new(boundary, size, CutFamily::Arcs))
}

/// Half-cut ratio as a [`CutWitness`]: `|boundary| / (n/2)`.
pub fn half_cut_witness(graph: &PercGraph) -> Result<CutWitness, ExpansionError> {
    let boundary = half_boundary(graph)?;
    Ok(CutWitness::new(
        boundary,
        (graph.vertex_count() / 2) as u32,
        CutFamily::Half,
    ))
}

/// Effective resistance solver with unit conductance per edge. One instance
/// factors (or preconditions) the Laplacian once and serves many pairs.
///
/// Dense Cholesky is used up to [`ResistanceSolver::DENSE_LIMIT`] vertices;
/// beyond that a Jacobi-preconditioned conjugate gradient drives the residual
/// below `1e-10 * |b|`, well under the 1e-8 contract.
pub struct ResistanceSolver<'g> {
    graph: &'g PercGraph,
    /// Grounded vertex: always the last one.
    ground: usize,
    dense: Option<DenseCholesky>,
}

impl<'g> ResistanceSolver<'g> {
    pub const DENSE_LIMIT: usize = 512;
    const CG_RELATIVE_TOL: f64 = 1e-11;

    pub fn new(graph: &'g PercGraph) -> Result<Self, ExpansionError> {
        let n = graph.vertex_count();
        if n < 2 {
            return Err(ExpansionError::Disconnected);
        }
        let ground = n - 1;
        let dense = if n <= Self::DENSE_LIMIT {
            Some(DenseCholesky::factor_laplacian(graph)?)
        } else {
            None
        };
        Ok(ResistanceSolver {
            graph,
            ground,
            dense,
        })
    }

    /// Potential difference between `u` and `v` under a unit current from
    /// `u` to `v`.
    pub fn resistance(&self, u: u32, v: u32) -> Result<f64, ExpansionError> {
        let n = self.graph.vertex_count();
        if u == v {
            return Err(ExpansionError::SameVertex);
        }
        for w in [u, v] {
            if w as usize >= n {
                return Err(ExpansionError::VertexOutOfRange(w));
            }
        }
        // Solve L x = e_u - e_v with x[ground] pinned to 0; the difference
        // x[u] - x[v] does not depend on the grounding choice.
        let mut b = vec![0.0; n];
        b[u as usize] += 1.0;
        b[v as usize] -= 1.0;
        let x = match &self.dense {
            Some(chol) => chol.solve(&b),
            None => cg_solve_grounded(self.graph, self.ground, &b)?,
        };
        Ok(x[u as usize] - x[v as usize])
    }
}

/// One-shot convenience wrapper around [`ResistanceSolver`].
pub fn effective_resistance(graph: &PercGraph, u: u32, v: u32) -> Result<f64, ExpansionError> {
    ResistanceSolver::new(graph)?.resistance(u, v)
}

/// In-place Cholesky factor of the Laplacian with the last vertex grounded,
/// so reduced indices coincide with vertex ids `0..n-1`.
struct DenseCholesky {
    n: usize,
    factor: Vec<f64>,
}

impl DenseCholesky {
    fn factor_laplacian(graph: &PercGraph) -> Result<Self, ExpansionError> {
        let n = graph.vertex_count();
        let m = n - 1;
        let mut a = vec![0.0f64; m * m];
        for v in 0..m {
            a[v * m + v] = graph.degree(v as u32) as f64;
            for &w in graph.neighbors(v as u32) {
                if (w as usize) < m {
                    a[v * m + w as usize] = -1.0;
                }
            }
        }
        // standard left-looking Cholesky; the grounded Laplacian of a
        // connected graph is positive definite
        for k in 0..m {
            let mut diag = a[k * m + k];
            for t in 0..k {
                diag -= a[k * m + t] * a[k * m + t];
            }
            if diag <= 0.0 {
                return Err(ExpansionError::Disconnected);
            }
            let diag = diag.sqrt();
            a[k * m + k] = diag;
            for i in (k + 1)..m {
                let mut val = a[i * m + k];
                for t in 0..k {
                    val -= a[i * m + t] * a[k * m + t];
                }
                a[i * m + k] = val / diag;
            }
        }
        Ok(DenseCholesky { n, factor: a })
    }

    fn solve(&self, b_full: &[f64]) -> Vec<f64> {
        let m = self.n - 1;
        let mut y = b_full[..m].to_vec();
        // forward substitution L z = y, row-oriented
        for i in 0..m {
            let row = &self.factor[i * m..i * m + i];
            let dot: f64 = row.iter().zip(&y[..i]).map(|(f, z)| f * z).sum();
            y[i] = (y[i] - dot) / self.factor[i * m + i];
        }
        // back substitution L^T x = z, column-oriented so access stays on
        // the contiguous rows of L
        for i in (0..m).rev() {
            y[i] /= self.factor[i * m + i];
            let yi = y[i];
            let (head, _) = y.split_at_mut(i);
            for (yt, f) in head.iter_mut().zip(&self.factor[i * m..i * m + i]) {
                *yt -= f * yi;
            }
        }
        y.push(0.0); // grounded vertex
        y
    }
}

/// Jacobi-preconditioned conjugate gradient on the grounded Laplacian.
fn cg_solve_grounded(
    graph: &PercGraph,
    ground: usize,
    b: &[f64],
) -> Result<Vec<f64>, ExpansionError> {
    let n = graph.vertex_count();
    let apply = |x: &[f64], out: &mut [f64]| {
        for v in 0..n {
            if v == ground {
                out[v] = 0.0;
                continue;
            }
            let mut acc = graph.degree(v as u32) as f64 * x[v];
            for &w in graph.neighbors(v as u32) {
                if w as usize != ground {
                    acc -= x[w as usize];
                }
            }
            out[v] = acc;
        }
    };
    let inv_diag: Vec<f64> = (0..n)
        .map(|v| {
            if v == ground {
                0.0
            } else {
                1.0 / graph.degree(v as u32) as f64
            }
        })
        .collect();

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    r[ground] = 0.0;
    let b_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let target = ResistanceSolver::CG_RELATIVE_TOL * b_norm;
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let max_iters = 40 * (n as f64).sqrt() as usize + 2000;
    for _ in 0..max_iters {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= target {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(ExpansionError::SolverStalled {
        target,
        iters: max_iters,
    })
}

/// Steps of the lazy simple random walk from vertex 0 until the exact
/// distribution is within `threshold` total-variation distance of the
/// degree-proportional stationary law. Evolution is exact (sparse
/// matrix-vector products), TV is asserted non-increasing at every step, and
/// runs longer than `10 n^2` steps are reported as censored (`None`).
pub fn mixing_time_tv(graph: &PercGraph, threshold: f64) -> Result<Option<u64>, ExpansionError> {
    if threshold.is_nan() || threshold <= 0.0 || threshold >= 1.0 {
        return Err(ExpansionError::InvalidThreshold);
    }
    let n = graph.vertex_count();
    if n == 1 {
        return Ok(Some(0));
    }
    let csr = Csr::from_graph(graph);
    let two_e = 2.0 * graph.edge_count() as f64;
    let pi: Vec<f64> = (0..n)
        .map(|v| graph.degree(v as u32) as f64 / two_e)
        .collect();
    if pi.contains(&0.0) {
        return Err(ExpansionError::Disconnected);
    }
    let half_inv_deg: Vec<f64> = (0..n)
        .map(|v| 0.5 / graph.degree(v as u32) as f64)
        .collect();

    let mut mu = vec![0.0; n];
    mu[0] = 1.0;
    let mut next = vec![0.0; n];
    let mut weighted = vec![0.0; n];
    let cap = 10 * (n as u64) * (n as u64);
    let tv = |mu: &[f64]| 0.5 * mu.iter().zip(&pi).map(|(m, p)| (m - p).abs()).sum::<f64>();

    let mut prev_tv = f64::INFINITY;
    for t in 0..=cap {
        let d = tv(&mu);
        if d > prev_tv + 1e-12 {
            return Err(ExpansionError::NonMonotoneTv { step: t });
        }
        prev_tv = d;
        if d < threshold {
            return Ok(Some(t));
        }
        if t == cap {
            break;
        }
        for v in 0..n {
            weighted[v] = mu[v] * half_inv_deg[v];
        }
        for v in 0..n {
            let mut acc = 0.5 * mu[v];
            for &w in csr.neighbors(v as u32) {
                acc += weighted[w as usize];
            }
            next[v] = acc;
        }
        std::mem::swap(&mut mu, &mut next);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ring_distance, sample, sample_coupled, sample_cycle_stratified, ModelParams, PercGraph,
        Topology,
    };

    fn bare_cycle(n: u32) -> PercGraph {
        sample(
            &ModelParams::new(Topology::Cycle, n, 1.0, 0.0, 0).unwrap(),
            0,
        )
        .unwrap()
    }

    fn complete_graph(n: u32) -> PercGraph {
        let params = ModelParams::new(Topology::Cycle, n, 1.0, 1.0, 0).unwrap();
        let edges = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v)));
        PercGraph::from_edges(params, edges).unwrap()
    }

    #[test]
    fn half_boundary_closed_forms() {
        assert_eq!(half_boundary(&bare_cycle(8)).unwrap(), 2);
        assert_eq!(half_boundary(&bare_cycle(4)).unwrap(), 2);
        assert!(half_boundary(&bare_cycle(7)).is_err());
    }

    #[test]
    fn expected_half_boundary_closed_forms() {
        let p0 = ModelParams::new(Topology::Cycle, 64, 1.5, 0.0, 0).unwrap();
        assert_eq!(expected_half_boundary(&p0).unwrap(), 2.0);

        let p4 = ModelParams::new(Topology::Cycle, 4, 1.0, 1.0, 0).unwrap();
        let expected = 2.0 + 2.0 * (1.0 - (-0.5f64).exp());
        assert!((expected_half_boundary_enumerated(&p4).unwrap() - expected).abs() < 1e-12);
        assert!((expected_half_boundary(&p4).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn half_boundary_routes_agree() {
        for n in [4u32, 8, 16, 64, 256, 1024] {
            for (s, beta) in [(1.5, 1.0), (2.0, 0.7), (3.0, 2.0)] {
                let p = ModelParams::new(Topology::Cycle, n, s, beta, 0).unwrap();
                let a = expected_half_boundary(&p).unwrap();
                let b = expected_half_boundary_enumerated(&p).unwrap();
                assert!(
                    (a - b).abs() <= 1e-9 * b.abs(),
                    "n={n} s={s} beta={beta}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn monte_carlo_half_boundary_matches_expectation() {
        let params = ModelParams::new(Topology::Cycle, 256, 1.5, 1.0, 17).unwrap();
        let expected = expected_half_boundary(&params).unwrap();
        let trials = 100;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for t in 0..trials {
            let hb = half_boundary(&sample_cycle_stratified(&params, t).unwrap()).unwrap() as f64;
            sum += hb;
            sumsq += hb * hb;
        }
        let mean = sum / trials as f64;
        let var = (sumsq / trials as f64 - mean * mean).max(0.0);
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 4.0 * se,
            "mean {mean} vs {expected}"
        );
    }

    #[test]
    fn expected_half_boundary_scales_like_sqrt_n_at_s_three_halves() {
        // Scaling check: the analytic crossing mass grows like n^{1/2},
        // so the normalized value stays inside a fixed window.
        for exp in 8..=14 {
            let n = 1u32 << exp;
            let p = ModelParams::new(Topology::Cycle, n, 1.5, 1.0, 0).unwrap();
            let normalized = expected_half_boundary(&p).unwrap() / (n as f64).sqrt();
            assert!((1.0..4.0).contains(&normalized), "n={n}: {normalized}");
        }
    }

    #[test]
    fn cheeger_exact_closed_forms() {
        let w = cheeger_exact(&bare_cycle(8)).unwrap();
        assert_eq!((w.boundary_size, w.set_size), (2, 4));
        assert!((w.ratio - 0.5).abs() < 1e-15);

        let w = cheeger_exact(&complete_graph(4)).unwrap();
        assert!((w.ratio - 2.0).abs() < 1e-15);

        let single = sample(
            &ModelParams::new(Topology::Cycle, 2, 1.0, 0.0, 0).unwrap(),
            0,
        )
        .unwrap();
        let w = cheeger_exact(&single).unwrap();
        assert!((w.ratio - 1.0).abs() < 1e-15);

        assert!(cheeger_exact(&bare_cycle(21)).is_err());
    }

    #[test]
    fn arc_upper_matches_exact_on_bare_cycle() {
        let w = cheeger_arc_upper(&bare_cycle(8)).unwrap();
        assert!((w.ratio - 0.5).abs() < 1e-15);
        assert_eq!(w.family, CutFamily::Arcs);
    }

    #[test]
    fn arc_upper_dominates_exact_and_half_dominates_arc() {
        for trial in 0..200 {
            let n = 8 + (trial % 7) as u32 * 2; // 8..20 even
            let params = ModelParams::new(Topology::Cycle, n, 1.5, 0.8, 23).unwrap();
            let g = sample_cycle_stratified(&params, trial).unwrap();
            let exact = cheeger_exact(&g).unwrap();
            let arc = cheeger_arc_upper(&g).unwrap();
            let half = half_cut_witness(&g).unwrap();
            // compare as integer cross-products to dodge float ties
            assert!(
                exact.boundary_size * arc.set_size as u64
                    <= arc.boundary_size * exact.set_size as u64,
                "trial {trial}: exact {exact:?} > arc {arc:?}"
            );
            assert!(
                arc.boundary_size * half.set_size as u64
                    <= half.boundary_size * arc.set_size as u64,
                "trial {trial}: arc {arc:?} > half {half:?}"
            );
        }
    }

    #[test]
    fn arc_ratio_is_monotone_under_beta_coupling() {
        let cold = ModelParams::new(Topology::Cycle, 64, 1.5, 0.5, 3).unwrap();
        let hot = ModelParams { beta: 2.0, ..cold };
        for trial in 0..50 {
            let graphs = sample_coupled(&[cold, hot], trial).unwrap();
            let a = cheeger_arc_upper(&graphs[0]).unwrap();
            let b = cheeger_arc_upper(&graphs[1]).unwrap();
            assert!(b.ratio >= a.ratio - 1e-12, "trial {trial}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn resistance_closed_forms() {
        let params = ModelParams::new(Topology::Path, 2, 1.0, 0.0, 0).unwrap();
        let single = PercGraph::from_edges(params, [(0, 1)]).unwrap();
        assert!((effective_resistance(&single, 0, 1).unwrap() - 1.0).abs() < 1e-12);

        let triangle = complete_graph(3);
        assert!((effective_resistance(&triangle, 0, 1).unwrap() - 2.0 / 3.0).abs() < 1e-9);

        let cyc = bare_cycle(64);
        let solver = ResistanceSolver::new(&cyc).unwrap();
        for (u, v) in [(0u32, 1u32), (0, 16), (3, 35), (10, 42)] {
            let k = ring_distance(u, v, 64) as f64;
            let expected = k * (64.0 - k) / 64.0;
            let r = solver.resistance(u, v).unwrap();
            assert!((r - expected).abs() < 1e-6, "({u},{v}): {r} vs {expected}");
        }

        assert!(effective_resistance(&cyc, 3, 3).is_err());
        assert!(effective_resistance(&cyc, 0, 99).is_err());
    }

    #[test]
    fn cg_route_agrees_with_dense_route() {
        // a graph over the dense limit solved by CG vs. the same graph
        // (manually) solved densely is overkill; instead check CG on a graph
        // below the limit against the dense factorization.
        let params = ModelParams::new(Topology::Cycle, 200, 1.5, 1.0, 5).unwrap();
        let g = sample_cycle_stratified(&params, 0).unwrap();
        let solver = ResistanceSolver::new(&g).unwrap();
        for (u, v) in [(0u32, 100u32), (7, 42), (13, 180)] {
            let dense = solver.resistance(u, v).unwrap();
            let b = {
                let mut b = vec![0.0; 200];
                b[u as usize] = 1.0;
                b[v as usize] = -1.0;
                b
            };
            let x = cg_solve_grounded(&g, 199, &b).unwrap();
            let iterative = x[u as usize] - x[v as usize];
            assert!(
                (dense - iterative).abs() < 1e-8,
                "({u},{v}): {dense} vs {iterative}"
            );
        }
    }

    #[test]
    fn resistance_invariants_on_samples() {
        let params = ModelParams::new(Topology::Cycle, 128, 1.5, 1.0, 29).unwrap();
        for trial in 0..5 {
            let g = sample_cycle_stratified(&params, trial).unwrap();
            let solver = ResistanceSolver::new(&g).unwrap();
            for (u, v) in [(0u32, 64u32), (5, 40), (17, 90)] {
                let r = solver.resistance(u, v).unwrap();
                let r_rev = solver.resistance(v, u).unwrap();
                assert!((r - r_rev).abs() < 1e-9, "asymmetric resistance");
                assert!(
                    r <= ring_distance(u, v, 128) as f64 + 1e-9,
                    "ring series bound violated"
                );
                let floor = (1.0 / g.degree(u) as f64).max(1.0 / g.degree(v) as f64);
                assert!(r >= floor - 1e-9, "conductance floor violated");
            }
        }
    }

    #[test]
    fn mixing_closed_forms() {
        let tau = mixing_time_tv(&complete_graph(3), 0.25).unwrap().unwrap();
        assert!(tau <= 4, "triangle mixed in {tau}");

        let params = ModelParams::new(Topology::Path, 2, 1.0, 0.0, 0).unwrap();
        let single = PercGraph::from_edges(params, [(0, 1)]).unwrap();
        let tau = mixing_time_tv(&single, 0.25).unwrap().unwrap();
        assert!(tau <= 3, "two-state chain mixed in {tau}");

        assert!(mixing_time_tv(&complete_graph(3), 0.0).is_err());
        assert!(mixing_time_tv(&complete_graph(3), 1.0).is_err());
    }

    #[test]
    fn bare_cycle_mixing_is_diffusive() {
        let t64 = mixing_time_tv(&bare_cycle(64), 0.25).unwrap().unwrap() as f64;
        let t128 = mixing_time_tv(&bare_cycle(128), 0.25).unwrap().unwrap() as f64;
        let ratio = t128 / t64;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn mixing_censors_at_the_step_cap() {
        // f64 rounding floors TV around 1e-16, so an absurd threshold can
        // never be reached and the cap must fire.
        let out = mixing_time_tv(&bare_cycle(24), 1e-300).unwrap();
        assert_eq!(out, None);
    }

    #[test]
    fn mixing_lower_bound_against_exact_cheeger() {
        for trial in 0..20 {
            let n = 12 + (trial % 5) as u32 * 2;
            let params = ModelParams::new(Topology::Cycle, n, 1.5, 0.7, 41).unwrap();
            let g = sample_cycle_stratified(&params, trial).unwrap();
            let tau = mixing_time_tv(&g, 0.25).unwrap().unwrap() as f64;
            let cheeger = cheeger_exact(&g).unwrap().ratio;
            assert!(
                tau >= 0.25 / cheeger,
                "trial {trial}: tau {tau} vs cheeger {cheeger}"
            );
        }
    }
}
