//! Independent cross-checks of the core measurements against brute-force
//! reference implementations. The references here deliberately share no code
//! with the paths they verify: Floyd-Warshall against BFS diameters, plain
//! subset enumeration against the Gray-code Cheeger scan, and per-class edge
//! statistics against the stratified sampler.

use crate::expansion::{cheeger_arc_upper, cheeger_exact, effective_resistance};
use crate::metrics::diameter_exact;
use crate::model::{
    edge_probability, ring_distance, sample, sample_cycle_naive, sample_cycle_stratified,
    ModelParams, PercGraph, Topology,
};
use crate::rng::{derive_stream, mix3, StreamTag};
use rand::Rng;

/// Outcome of one oracle check.
#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl OracleCheck {
    fn pass(name: &'static str, detail: String) -> Self {
        OracleCheck {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        OracleCheck {
            name,
            passed: false,
            detail,
        }
    }
}

/// Runs the whole cross-check suite. Every check is deterministic in `seed`.
pub fn run_suite(seed: u64) -> Vec<OracleCheck> {
    vec![
        check_diameter_vs_floyd_warshall(seed),
        check_cheeger_vs_enumeration(seed),
        check_stratified_vs_naive_class_means(seed),
        check_resistance_closed_forms(seed),
        check_half_boundary_routes(),
    ]
}

/// All-pairs shortest paths by Floyd-Warshall; O(n^3), reference only.
fn floyd_warshall_diameter(graph: &PercGraph) -> Option<u32> {
    let n = graph.vertex_count();
    const INF: u32 = u32::MAX / 2;
    let mut dist = vec![INF; n * n];
    for v in 0..n {
        dist[v * n + v] = 0;
        for &w in graph.neighbors(v as u32) {
            dist[v * n + w as usize] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = dist[i * n + k];
            if dik == INF {
                continue;
            }
            for j in 0..n {
                let through = dik + dist[k * n + j];
                if through < dist[i * n + j] {
                    dist[i * n + j] = through;
                }
            }
        }
    }
    let max = *dist.iter().max().unwrap();
    (max < INF).then_some(max)
}

fn check_diameter_vs_floyd_warshall(seed: u64) -> OracleCheck {
    const NAME: &str = "diameter-vs-floyd-warshall";
    let laws = [(3.0, 1.0), (1.5, 1.0), (0.8, 2.0), (2.0, 0.5)];
    for trial in 0..100u64 {
        let (s, beta) = laws[(trial % laws.len() as u64) as usize];
        let params = ModelParams::new(Topology::Cycle, 64, s, beta, mix3(seed, 1, trial)).unwrap();
        let g = sample(&params, 0).unwrap();
        let bfs_diam = diameter_exact(&g).unwrap();
        let fw_diam = floyd_warshall_diameter(&g).unwrap();
        if bfs_diam != fw_diam {
            return OracleCheck::fail(
                NAME,
                format!("trial {trial} (s={s}, beta={beta}): BFS {bfs_diam} != FW {fw_diam}"),
            );
        }
    }
    OracleCheck::pass(NAME, "100 samples at n=64 agree".into())
}

/// Minimum boundary/size over all subsets by plain binary enumeration,
/// recomputed from scratch for every subset.
fn cheeger_bruteforce(graph: &PercGraph) -> (u64, u32) {
    let n = graph.vertex_count();
    let adj_mask: Vec<u32> = (0..n)
        .map(|v| {
            graph
                .neighbors(v as u32)
                .iter()
                .fold(0u32, |m, &w| m | (1 << w))
        })
        .collect();
    let mut best = (u64::MAX, 1u32);
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones();
        if size == 0 || size > (n / 2) as u32 {
            continue;
        }
        let mut boundary = 0u64;
        let mut bits = mask;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            boundary += (adj_mask[v] & !mask).count_ones() as u64;
        }
        if boundary * (best.1 as u64) < best.0 * (size as u64) {
            best = (boundary, size);
        }
    }
    best
}

fn check_cheeger_vs_enumeration(seed: u64) -> OracleCheck {
    const NAME: &str = "cheeger-exact-vs-enumeration";
    let sizes = [8u32, 10, 12, 14, 16];
    let laws = [(1.5, 0.8), (1.2, 1.5), (2.5, 0.4), (0.9, 1.0)];
    for trial in 0..200u64 {
        let n = sizes[(trial % sizes.len() as u64) as usize];
        let (s, beta) = laws[(trial % laws.len() as u64) as usize];
        let params = ModelParams::new(Topology::Cycle, n, s, beta, mix3(seed, 2, trial)).unwrap();
        let g = sample(&params, 0).unwrap();
        let fast = cheeger_exact(&g).unwrap();
        let (bf_boundary, bf_size) = cheeger_bruteforce(&g);
        if fast.boundary_size * bf_size as u64 != bf_boundary * fast.set_size as u64 {
            return OracleCheck::fail(
                NAME,
                format!(
                    "trial {trial} (n={n}): gray-code {} / {} != brute-force {bf_boundary} / {bf_size}",
                    fast.boundary_size, fast.set_size
                ),
            );
        }
        let arc = cheeger_arc_upper(&g).unwrap();
        if arc.boundary_size * (fast.set_size as u64) < fast.boundary_size * (arc.set_size as u64) {
            return OracleCheck::fail(
                NAME,
                format!("trial {trial} (n={n}): arc upper bound {arc:?} below exact {fast:?}"),
            );
        }
    }
    OracleCheck::pass(
        NAME,
        "200 samples at n <= 16 agree; arc bound dominates".into(),
    )
}

fn check_stratified_vs_naive_class_means(seed: u64) -> OracleCheck {
    const NAME: &str = "stratified-vs-naive-class-means";
    let trials = 10_000u64;
    let n = 32u32;
    let (s, beta) = (1.5, 1.0);
    let mut counts = [[0u64; 17]; 2];
    for trial in 0..trials {
        let params = ModelParams::new(Topology::Cycle, n, s, beta, mix3(seed, 3, trial)).unwrap();
        for (which, g) in [
            sample_cycle_naive(&params, 0).unwrap(),
            sample_cycle_stratified(&params, 0).unwrap(),
        ]
        .iter()
        .enumerate()
        {
            for (u, v) in g.edges() {
                let d = ring_distance(u, v, n);
                if d >= 2 {
                    counts[which][d as usize] += 1;
                }
            }
        }
    }
    for d in 2..=16u32 {
        let class = if d == 16 { 16.0 } else { 32.0 };
        let p = edge_probability(d as u64, s, beta).unwrap();
        let sigma = (class * p * (1.0 - p) / trials as f64).sqrt();
        for (which, label) in ["naive", "stratified"].iter().enumerate() {
            let mean = counts[which][d as usize] as f64 / trials as f64;
            if (mean - class * p).abs() > 4.0 * sigma {
                return OracleCheck::fail(
                    NAME,
                    format!(
                        "{label} class d={d}: mean {mean:.4} vs {:.4} (4 sigma = {:.4})",
                        class * p,
                        4.0 * sigma
                    ),
                );
            }
        }
    }
    OracleCheck::pass(
        NAME,
        format!("per-class means within 4 sigma over {trials} trials"),
    )
}

fn check_resistance_closed_forms(seed: u64) -> OracleCheck {
    const NAME: &str = "resistance-closed-forms";
    let tri_params = ModelParams::new(Topology::Cycle, 3, 1.0, 1.0, 0).unwrap();
    let triangle = PercGraph::from_edges(tri_params, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let r = effective_resistance(&triangle, 0, 1).unwrap();
    if (r - 2.0 / 3.0).abs() > 1e-9 {
        return OracleCheck::fail(NAME, format!("triangle resistance {r} != 2/3"));
    }

    let n = 64u32;
    let cycle = sample(
        &ModelParams::new(Topology::Cycle, n, 1.0, 0.0, 0).unwrap(),
        0,
    )
    .unwrap();
    let solver = crate::expansion::ResistanceSolver::new(&cycle).unwrap();
    let mut rng = derive_stream(seed, 4, StreamTag::ResistancePairs);
    for probe in 0..32 {
        let u = rng.random_range(0..n);
        let mut v = rng.random_range(0..n);
        while v == u {
            v = rng.random_range(0..n);
        }
        let k = ring_distance(u, v, n) as f64;
        let expected = k * (n as f64 - k) / n as f64;
        let r = solver.resistance(u, v).unwrap();
        if (r - expected).abs() > 1e-6 {
            return OracleCheck::fail(
                NAME,
                format!("probe {probe} ({u},{v}): {r} vs series-parallel {expected}"),
            );
        }
    }
    OracleCheck::pass(
        NAME,
        "triangle and 32 bare-cycle pairs match series-parallel forms".into(),
    )
}

fn check_half_boundary_routes() -> OracleCheck {
    const NAME: &str = "half-boundary-two-routes";
    let mut n = 4u32;
    while n <= 2048 {
        for (s, beta) in [(1.5, 1.0), (2.0, 1.0), (3.0, 0.5)] {
            let params = ModelParams::new(Topology::Cycle, n, s, beta, 0).unwrap();
            let fast = crate::expansion::expected_half_boundary(&params).unwrap();
            let slow = crate::expansion::expected_half_boundary_enumerated(&params).unwrap();
            if (fast - slow).abs() > 1e-9 * slow.abs() {
                return OracleCheck::fail(
                    NAME,
                    format!("n={n} s={s} beta={beta}: class method {fast} vs enumeration {slow}"),
                );
            }
        }
        n *= 2;
    }
    OracleCheck::pass(
        NAME,
        "class counting and pair enumeration agree to 1e-9 relative".into(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_passes() {
        let results = run_suite(0xC0FFEE);
        for check in &results {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
        assert_eq!(results.len(), 5);
    }

    #[test]
    fn floyd_warshall_handles_disconnection() {
        let params = ModelParams::new(Topology::Path, 4, 1.0, 0.0, 0).unwrap();
        let g = PercGraph::from_edges(params, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(floyd_warshall_diameter(&g), None);
    }
}
