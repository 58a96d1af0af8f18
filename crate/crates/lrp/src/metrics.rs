//! Distance-based measurements: eccentricity, exact and bounded diameter,
//! cut points of the path model, the analytic cut density, and degree
//! statistics.

use crate::csr::{bfs, Csr, UNREACHED};
use crate::model::{edge_probability, ModelParams, PercGraph, Topology};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("graph is disconnected; distance metrics are undefined")]
    Disconnected,
    #[error("operation requires topology {expected}, got {got}")]
    WrongTopology { expected: Topology, got: Topology },
    #[error("cut density series diverges for s = {s} (requires s > 2)")]
    PsiDiverges { s: f64 },
    #[error("tolerance must be positive and finite")]
    InvalidTolerance,
    #[error("at least one sweep is required")]
    NoSweeps,
    #[error("vertex {0} out of range")]
    VertexOutOfRange(u32),
}

/// Max graph distance from `v` to any other vertex.
pub fn eccentricity(graph: &PercGraph, v: u32) -> Result<u32, MetricsError> {
    let n = graph.vertex_count();
    if v as usize >= n {
        return Err(MetricsError::VertexOutOfRange(v));
    }
    let csr = Csr::from_graph(graph);
    let mut dist = vec![UNREACHED; n];
    let mut queue = Vec::with_capacity(n);
    let out = bfs(&csr, v, &mut dist, &mut queue);
    if out.reached != n {
        return Err(MetricsError::Disconnected);
    }
    Ok(out.max_dist)
}

/// Exact diameter by all-pairs BFS, `O(n (n + edges))`.
pub fn diameter_exact(graph: &PercGraph) -> Result<u32, MetricsError> {
    let n = graph.vertex_count();
    let csr = Csr::from_graph(graph);
    let mut dist = vec![UNREACHED; n];
    let mut queue = Vec::with_capacity(n);
    let mut diameter = 0;
    for v in 0..n {
        let out = bfs(&csr, v as u32, &mut dist, &mut queue);
        if out.reached != n {
            return Err(MetricsError::Disconnected);
        }
        diameter = diameter.max(out.max_dist);
    }
    Ok(diameter)
}

/// Certified sandwich `lower <= diameter <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiameterBounds {
    pub lower: u32,
    pub upper: u32,
}

/// Bounds the diameter with `sweeps` rounds of double-sweep BFS: the lower
/// bound is the largest eccentricity observed, the upper bound twice the
/// smallest. Ties for the farthest vertex break to the lowest id, so the
/// result is deterministic.
pub fn diameter_bounds(graph: &PercGraph, sweeps: usize) -> Result<DiameterBounds, MetricsError> {
    if sweeps == 0 {
        return Err(MetricsError::NoSweeps);
    }
    let n = graph.vertex_count();
    let csr = Csr::from_graph(graph);
    let mut dist = vec![UNREACHED; n];
    let mut queue = Vec::with_capacity(n);
    let mut lower = 0u32;
    let mut upper = u32::MAX;
    let mut start = 0u32;
    for _ in 0..sweeps {
        let first = bfs(&csr, start, &mut dist, &mut queue);
        if first.reached != n {
            return Err(MetricsError::Disconnected);
        }
        lower = lower.max(first.max_dist);
        upper = upper.min(2 * first.max_dist);
        let second = bfs(&csr, first.farthest, &mut dist, &mut queue);
        lower = lower.max(second.max_dist);
        upper = upper.min(2 * second.max_dist);
        // restart the next sweep from the endpoint just found
        start = second.farthest;
    }
    Ok(DiameterBounds {
        lower,
        upper: upper.max(lower),
    })
}

/// Interior vertices of a path sample with no sampled edge strictly spanning
/// them, found by a prefix max-reach scan in `O(n + edges)`.
pub fn cut_points(graph: &PercGraph) -> Result<Vec<u32>, MetricsError> {
    let topology = graph.params().topology;
    if topology != Topology::Path {
        return Err(MetricsError::WrongTopology {
            expected: Topology::Path,
            got: topology,
        });
    }
    let n = graph.vertex_count() as u32;
    let mut cuts = Vec::new();
    if n < 3 {
        return Ok(cuts);
    }
    let mut reach = 0u32;
    for x0 in 1..n - 1 {
        // adjacency is sorted, so the last neighbour is the farthest right
        let prev = x0 - 1;
        if let Some(&far) = graph.neighbors(prev).last() {
            reach = reach.max(far);
        }
        if reach <= x0 {
            cuts.push(x0);
        }
    }
    Ok(cuts)
}

/// Cut density of the infinite-line law together with a cruder lower bound,
/// both with a certified truncation error below the requested tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiDensity {
    /// `exp(-beta * sum_{k>=2} (k-1) k^-s)`: exactly `k-1` ordered pairs at
    /// span `k` strictly straddle a fixed interior point, and span-1 pairs
    /// never do.
    pub exact: f64,
    /// `exp(-beta * sum_{k>=1} k^{1-s})`: a lower bound that over-counts the
    /// straddling pairs at every span.
    pub crude_bound: f64,
    /// Guaranteed bound on the absolute truncation error of both fields.
    pub tail_bound: f64,
}

/// Probability that a fixed interior point of the line has no strictly
/// spanning open pair. Converges only for `s > 2`.
pub fn psi_cut_density(s: f64, beta: f64, tol: f64) -> Result<PsiDensity, MetricsError> {
    if s.is_nan() || s <= 2.0 {
        return Err(MetricsError::PsiDiverges { s });
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(MetricsError::InvalidTolerance);
    }
    if beta == 0.0 {
        return Ok(PsiDensity {
            exact: 1.0,
            crude_bound: 1.0,
            tail_bound: 0.0,
        });
    }

    // Truncation point: Euler-Maclaurin tails for the power sums k^a keep the
    // remainder below |a| t^{a-1} / 12, so K grows like tol^{-1/(s+1)}.
    let mut cutoff = 16u64;
    let err = |k: u64| -> f64 {
        let t = (k + 1) as f64;
        beta * (em_remainder(1.0 - s, t) + em_remainder(-s, t))
    };
    while err(cutoff) >= tol && cutoff < (1 << 34) {
        cutoff *= 2;
    }

    // Kahan-compensated partial sums of both series.
    let mut exact_sum = KahanSum::default();
    let mut crude_sum = KahanSum::default();
    crude_sum.add(1.0); // k = 1 term of sum k^{1-s}
    for k in 2..=cutoff {
        let kf = k as f64;
        let span = kf.powf(-s);
        exact_sum.add((kf - 1.0) * span);
        crude_sum.add(kf * span);
    }
    let t = (cutoff + 1) as f64;
    // sum_{k > K} (k^{1-s} - k^{-s}) and sum_{k > K} k^{1-s}
    let tail_main = em_tail(1.0 - s, t);
    exact_sum.add(tail_main - em_tail(-s, t));
    crude_sum.add(tail_main);

    Ok(PsiDensity {
        exact: (-beta * exact_sum.value()).exp(),
        crude_bound: (-beta * crude_sum.value()).exp(),
        tail_bound: err(cutoff),
    })
}

/// Euler-Maclaurin estimate of `sum_{k >= t} k^a` for `a < -1`, with `t`
/// integer-valued: integral + half-term + first correction.
fn em_tail(a: f64, t: f64) -> f64 {
    t.powf(a + 1.0) / (-(a + 1.0)) + 0.5 * t.powf(a) - a * t.powf(a - 1.0) / 12.0
}

/// Safe bound on the error of [`em_tail`]: the Euler-Maclaurin remainder
/// after the B2 term is at most `|f'(t)| / 12`.
fn em_remainder(a: f64, t: f64) -> f64 {
    a.abs() * t.powf(a - 1.0) / 12.0
}

#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Analytic mean degree of the cycle law: both ring neighbours plus the
/// per-class open probabilities.
pub fn expected_degree(params: &ModelParams) -> Result<f64, MetricsError> {
    if params.topology != Topology::Cycle {
        return Err(MetricsError::WrongTopology {
            expected: Topology::Cycle,
            got: params.topology,
        });
    }
    let n = params.n;
    match n {
        1 => return Ok(0.0),
        2 => return Ok(1.0),
        _ => {}
    }
    let mut total = 2.0;
    for d in 2..=n / 2 {
        let weight = if 2 * d == n { 1.0 } else { 2.0 };
        total += weight
            * edge_probability(d as u64, params.s, params.beta).expect("d >= 2 is always valid");
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeStats {
    pub mean: f64,
    pub max: u32,
    /// `histogram[d]` counts vertices of degree `d`.
    pub histogram: Vec<u64>,
}

pub fn degree_stats(graph: &PercGraph) -> DegreeStats {
    let n = graph.vertex_count();
    let max = (0..n).map(|v| graph.degree(v as u32)).max().unwrap_or(0);
    let mut histogram = vec![0u64; max + 1];
    for v in 0..n {
        histogram[graph.degree(v as u32)] += 1;
    }
    DegreeStats {
        mean: graph.mean_degree(),
        max: max as u32,
        histogram,
    }
}

/// Diameter with the policy used by the sweep harness: exact all-pairs BFS
/// when affordable, otherwise certified double-sweep bounds with the lower
/// bound reported as the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiameterEstimate {
    pub value: u32,
    pub is_exact: bool,
    /// Largest eccentricity observed (equals `value` when exact).
    pub ecc_lower: u32,
    pub upper: u32,
}

pub fn diameter_auto(
    graph: &PercGraph,
    exact_vertex_limit: usize,
    exact_cost_cap: u64,
    sweeps: usize,
) -> Result<DiameterEstimate, MetricsError> {
    let n = graph.vertex_count() as u64;
    let cost = n * (n + 2 * graph.edge_count() as u64);
    if graph.vertex_count() <= exact_vertex_limit && cost <= exact_cost_cap {
        let d = diameter_exact(graph)?;
        Ok(DiameterEstimate {
            value: d,
            is_exact: true,
            ecc_lower: d,
            upper: d,
        })
    } else {
        let b = diameter_bounds(graph, sweeps)?;
        Ok(DiameterEstimate {
            value: b.lower,
            is_exact: false,
            ecc_lower: b.lower,
            upper: b.upper,
        })
    }
}

/// Per-sample measurement record; every optional field is present only when
/// the metric applies to the topology and was requested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub diameter: u32,
    pub diameter_is_exact: bool,
    pub ecc_lower: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_cut_points: Option<u32>,
    pub mean_degree: f64,
    pub max_degree: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_boundary: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cheeger_arc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cheeger_exact: Option<f64>,
    /// `((u, v), resistance)` probes; the final entry is the antipodal probe.
    pub resistance_samples: Vec<crate::expansion::ResistanceProbe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_tv: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample, sample_cycle_stratified, sample_path, ModelParams};

    fn bare_cycle(n: u32) -> PercGraph {
        sample(
            &ModelParams::new(Topology::Cycle, n, 1.0, 0.0, 0).unwrap(),
            0,
        )
        .unwrap()
    }

    fn bare_path(n: u32) -> PercGraph {
        sample(
            &ModelParams::new(Topology::Path, n, 1.0, 0.0, 0).unwrap(),
            0,
        )
        .unwrap()
    }

    #[test]
    fn eccentricity_closed_forms() {
        assert_eq!(eccentricity(&bare_cycle(10), 0).unwrap(), 5);
        assert_eq!(eccentricity(&bare_cycle(10), 7).unwrap(), 5);
        assert_eq!(eccentricity(&bare_cycle(3), 1).unwrap(), 1);
        assert_eq!(eccentricity(&bare_path(10), 0).unwrap(), 9);
        assert_eq!(eccentricity(&bare_path(10), 5).unwrap(), 5);
    }

    #[test]
    fn diameter_exact_closed_forms() {
        assert_eq!(diameter_exact(&bare_cycle(10)).unwrap(), 5);
        assert_eq!(diameter_exact(&bare_cycle(3)).unwrap(), 1);
        for n in 3..=64 {
            assert_eq!(diameter_exact(&bare_cycle(n)).unwrap(), n / 2);
        }
    }

    #[test]
    fn diameter_detects_disconnected_input() {
        let params = ModelParams::new(Topology::Path, 4, 1.0, 0.0, 0).unwrap();
        let g = PercGraph::from_edges(params, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(diameter_exact(&g), Err(MetricsError::Disconnected));
        assert_eq!(eccentricity(&g, 0), Err(MetricsError::Disconnected));
    }

    #[test]
    fn double_sweep_is_exact_on_the_bare_cycle() {
        let b = diameter_bounds(&bare_cycle(100), 1).unwrap();
        assert_eq!(b.lower, 50);
        assert!(b.upper <= 100);
        assert!(diameter_bounds(&bare_cycle(100), 0).is_err());
    }

    #[test]
    fn double_sweep_on_complete_graph() {
        let params = ModelParams::new(Topology::Cycle, 4, 1.0, 0.0, 0).unwrap();
        let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let g = PercGraph::from_edges(params, edges).unwrap();
        let b = diameter_bounds(&g, 2).unwrap();
        assert_eq!(b.lower, 1);
        assert!(b.upper <= 2);
    }

    #[test]
    fn bounds_sandwich_exact_diameter() {
        for trial in 0..100 {
            let params = ModelParams::new(Topology::Cycle, 256, 1.5, 1.0, 7).unwrap();
            let g = sample_cycle_stratified(&params, trial).unwrap();
            let exact = diameter_exact(&g).unwrap();
            let b = diameter_bounds(&g, 2).unwrap();
            assert!(
                b.lower <= exact && exact <= b.upper,
                "trial {trial}: {b:?} vs {exact}"
            );
        }
    }

    #[test]
    fn cut_points_closed_forms() {
        let bare = bare_path(10);
        assert_eq!(cut_points(&bare).unwrap().len(), 8);

        let params = *bare.params();
        let mut edges: Vec<(u32, u32)> = (0..9).map(|i| (i, i + 1)).collect();
        edges.push((0, 9));
        let bridged = PercGraph::from_edges(params, edges).unwrap();
        assert!(cut_points(&bridged).unwrap().is_empty());

        assert!(cut_points(&bare_cycle(10)).is_err());
    }

    #[test]
    fn cut_count_decreases_under_beta_coupling() {
        use crate::model::sample_coupled;
        let base = ModelParams::new(Topology::Path, 128, 2.5, 0.4, 13).unwrap();
        let hot = ModelParams { beta: 2.0, ..base };
        for trial in 0..20 {
            let graphs = sample_coupled(&[base, hot], trial).unwrap();
            let cold_cuts = cut_points(&graphs[0]).unwrap().len();
            let hot_cuts = cut_points(&graphs[1]).unwrap().len();
            assert!(hot_cuts <= cold_cuts);
        }
    }

    #[test]
    fn psi_cut_density_closed_forms() {
        let psi = psi_cut_density(3.0, 0.0, 1e-12).unwrap();
        assert_eq!(psi.exact, 1.0);
        assert_eq!(psi.crude_bound, 1.0);

        // frozen from the zeta identity: exp(-(zeta(2) - zeta(3)))
        let psi = psi_cut_density(3.0, 1.0, 1e-12).unwrap();
        assert!(
            (psi.exact - 0.642186086013116).abs() < 1e-10,
            "exact = {}",
            psi.exact
        );
        // crude bound is exp(-zeta(2))
        assert!((psi.crude_bound - 0.19302528913989804).abs() < 1e-10);

        // s large: all terms vanish
        let psi = psi_cut_density(40.0, 1.0, 1e-12).unwrap();
        assert!(psi.exact > 0.999_999);

        assert!(psi_cut_density(2.0, 1.0, 1e-6).is_err());
        assert!(psi_cut_density(3.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn psi_exact_dominates_crude_bound() {
        for s in [2.2, 2.5, 3.0, 4.0, 8.0] {
            for beta in [0.0, 0.3, 1.0, 5.0] {
                let psi = psi_cut_density(s, beta, 1e-10).unwrap();
                assert!(psi.exact >= psi.crude_bound, "s={s} beta={beta}: {psi:?}");
            }
        }
    }

    #[test]
    fn psi_tolerance_halving_stays_within_tail_bound() {
        for tol in [1e-6, 1e-8, 1e-10] {
            let coarse = psi_cut_density(2.5, 1.5, tol).unwrap();
            let fine = psi_cut_density(2.5, 1.5, tol / 2.0).unwrap();
            assert!((coarse.exact - fine.exact).abs() <= coarse.tail_bound + f64::EPSILON);
        }
    }

    #[test]
    fn expected_degree_closed_forms() {
        let p0 = ModelParams::new(Topology::Cycle, 100, 1.5, 0.0, 0).unwrap();
        assert_eq!(expected_degree(&p0).unwrap(), 2.0);

        let p5 = ModelParams::new(Topology::Cycle, 5, 1.0, 1.0, 0).unwrap();
        assert!((expected_degree(&p5).unwrap() - 2.786938680574733).abs() < 1e-12);

        let degenerate = ModelParams::new(Topology::Cycle, 2, 1.0, 1.0, 0).unwrap();
        assert_eq!(expected_degree(&degenerate).unwrap(), 1.0);

        let path = ModelParams::new(Topology::Path, 5, 1.0, 1.0, 0).unwrap();
        assert!(expected_degree(&path).is_err());
    }

    #[test]
    fn sampled_mean_degree_matches_expected_degree() {
        let params = ModelParams::new(Topology::Cycle, 512, 1.5, 1.0, 97).unwrap();
        let expected = expected_degree(&params).unwrap();
        let trials = 200;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for t in 0..trials {
            let m = sample_cycle_stratified(&params, t).unwrap().mean_degree();
            sum += m;
            sumsq += m * m;
        }
        let mean = sum / trials as f64;
        let var = (sumsq / trials as f64 - mean * mean).max(0.0);
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "mean {mean} vs {expected}"
        );
    }

    #[test]
    fn degree_stats_closed_forms() {
        let stats = degree_stats(&bare_cycle(12));
        assert_eq!(stats.mean, 2.0);
        assert_eq!(stats.max, 2);
        assert_eq!(stats.histogram, vec![0, 0, 12]);

        let stats = degree_stats(&bare_cycle(3));
        assert_eq!((stats.mean, stats.max), (2.0, 2));
    }

    #[test]
    fn diameter_auto_switches_to_bounds_past_the_cost_cap() {
        let g = bare_cycle(64);
        let exact = diameter_auto(&g, 4096, u64::MAX, 8).unwrap();
        assert!(exact.is_exact);
        assert_eq!(exact.value, 32);

        let bounded = diameter_auto(&g, 32, u64::MAX, 8).unwrap();
        assert!(!bounded.is_exact);
        assert!(bounded.value <= 32 && bounded.upper >= 32);

        let capped = diameter_auto(&g, 4096, 10, 8).unwrap();
        assert!(!capped.is_exact);
    }

    #[test]
    fn path_sample_distance_metrics_agree_with_line_distance() {
        // sanity: path diameters are exact path lengths when beta = 0
        let g = sample_path(
            &ModelParams::new(Topology::Path, 33, 2.0, 0.0, 1).unwrap(),
            0,
        )
        .unwrap();
        assert_eq!(diameter_exact(&g).unwrap(), 32);
    }
}
