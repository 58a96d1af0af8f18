//! Renormalization hierarchy over the path model: interval tilings by
//! degree, pairwise attachment of sub-components, and the recursive event
//! that yields an explicit diameter bound when it holds.
//!
//! Degrees index interval lengths: degree 0 intervals are single vertices,
//! and a degree-`j` interval has length `N_j`, the product of the first `j`
//! branching factors. A degree range `(lo, hi)` always refers to
//! *sub-component* degrees: for each `j` in the range, every degree-`(j+1)`
//! component must have its degree-`j` children pairwise attached.

use crate::model::{PercGraph, Topology};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HierarchyError {
    #[error("branching factors must all be at least 2, got {0}")]
    BranchingTooSmall(u64),
    #[error("hierarchy needs at least one level")]
    Empty,
    #[error("total length overflows the addressable vertex range")]
    Overflow,
    #[error("exponential mode requires alpha > 1, got {0}")]
    InvalidAlpha(f64),
    #[error("graph has {got} vertices but the hierarchy tiles {expected}")]
    LengthMismatch { expected: u64, got: usize },
    #[error("operation requires the path topology, got {0}")]
    NotPath(Topology),
    #[error("intervals overlap or are empty")]
    BadIntervals,
    #[error("degree range ({lo}, {hi}) invalid for a depth-{depth} hierarchy")]
    BadDegreeRange { lo: usize, hi: usize, depth: usize },
    #[error("attachment bound requires 1 < s < 2, got {0}")]
    DecayOutOfRange(f64),
    #[error("attachment bound requires L >= 1 and l >= 1")]
    BadBoundArgs,
}

/// Half-open interval of vertex ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub start: u32,
    pub end: u32,
}

impl Interval {
    pub fn new(start: u32, end: u32) -> Self {
        Interval { start, end }
    }

    pub fn len(&self) -> u32 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    fn disjoint(&self, other: &Interval) -> bool {
        self.end <= other.start || other.end <= self.start
    }
}

/// Branching factors `C_1..C_k` of a renormalization tiling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HierarchySpec {
    level_sizes: Vec<u32>,
}

impl HierarchySpec {
    /// Explicit branching vector.
    pub fn explicit(level_sizes: Vec<u32>) -> Result<Self, HierarchyError> {
        if level_sizes.is_empty() {
            return Err(HierarchyError::Empty);
        }
        let mut total: u64 = 1;
        for &c in &level_sizes {
            if c < 2 {
                return Err(HierarchyError::BranchingTooSmall(c as u64));
            }
            total = total
                .checked_mul(c as u64)
                .ok_or(HierarchyError::Overflow)?;
            if total > u32::MAX as u64 {
                return Err(HierarchyError::Overflow);
            }
        }
        Ok(HierarchySpec { level_sizes })
    }

    /// Exponentially growing branching factors `C_i = round(exp(alpha^i))`.
    pub fn exponential(alpha: f64, depth: usize) -> Result<Self, HierarchyError> {
        if !alpha.is_finite() || alpha <= 1.0 {
            return Err(HierarchyError::InvalidAlpha(alpha));
        }
        let sizes = (1..=depth)
            .map(|i| alpha.powi(i as i32).exp().round() as u32)
            .collect();
        Self::explicit(sizes)
    }

    pub fn level_sizes(&self) -> &[u32] {
        &self.level_sizes
    }

    /// Number of levels `k`.
    pub fn depth(&self) -> usize {
        self.level_sizes.len()
    }

    /// Interval length `N_j` at degree `j` (with `N_0 = 1`).
    pub fn interval_length(&self, degree: usize) -> u64 {
        self.level_sizes[..degree]
            .iter()
            .map(|&c| c as u64)
            .product()
    }

    /// Total tiled length `N_k`.
    pub fn total_length(&self) -> u64 {
        self.interval_length(self.depth())
    }
}

/// The resolved tiling: for each degree `j` the `N_k / N_j` disjoint
/// intervals of length `N_j` covering `[0, N_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Levels {
    pub degrees: Vec<Vec<Interval>>,
}

/// Materializes the tiling of `[0, N_k)` for every degree `0..=k`.
pub fn build_levels(spec: &HierarchySpec) -> Levels {
    let total = spec.total_length() as u32;
    let degrees = (0..=spec.depth())
        .map(|j| {
            let len = spec.interval_length(j) as u32;
            (0..total / len)
                .map(|i| Interval::new(i * len, (i + 1) * len))
                .collect()
        })
        .collect();
    Levels { degrees }
}

/// True iff some sampled edge joins a vertex of `i` to a vertex of `j`.
pub fn intervals_attached(
    graph: &PercGraph,
    i: Interval,
    j: Interval,
) -> Result<bool, HierarchyError> {
    if i.is_empty() || j.is_empty() || !i.disjoint(&j) {
        return Err(HierarchyError::BadIntervals);
    }
    // scan the smaller side's adjacency lists
    let (small, big) = if i.len() <= j.len() { (i, j) } else { (j, i) };
    for v in small.start..small.end {
        for &w in graph.neighbors(v) {
            if w >= big.start && w < big.end {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// The proof-style lower bound on the probability that two intervals of
/// length `L` at scaled distance `l` are attached:
/// `1 - exp(-(beta L^{2-s} / 2) l^{-s})`. Valid in the regime `1 < s < 2`.
pub fn attachment_prob_bound(
    l_len: u64,
    l_gap: f64,
    s: f64,
    beta: f64,
) -> Result<f64, HierarchyError> {
    if s.is_nan() || s <= 1.0 || s >= 2.0 {
        return Err(HierarchyError::DecayOutOfRange(s));
    }
    if l_len < 1 || l_gap.is_nan() || l_gap < 1.0 {
        return Err(HierarchyError::BadBoundArgs);
    }
    let beta_l = 0.5 * beta * (l_len as f64).powf(2.0 - s);
    Ok(-f64::exp_m1(-beta_l * l_gap.powf(-s)))
}

/// Pairwise attachment flags among the sub-components of one component:
/// symmetric, with reflexive entries unused.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttachmentMatrix {
    branching: usize,
    flags: Vec<bool>,
}

impl AttachmentMatrix {
    pub fn branching(&self) -> usize {
        self.branching
    }

    /// Whether sub-components `a` and `b` are attached. Symmetric; `a == b`
    /// is outside the relation and reported as unattached.
    pub fn attached(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        self.flags[lo * self.branching + hi]
    }

    pub fn fully_attached(&self) -> bool {
        (0..self.branching)
            .flat_map(|a| ((a + 1)..self.branching).map(move |b| (a, b)))
            .all(|(a, b)| self.attached(a, b))
    }
}

/// Materializes the attachment flags among the degree-`degree` children of
/// the given degree-`(degree + 1)` component.
pub fn attachment_matrix(
    graph: &PercGraph,
    spec: &HierarchySpec,
    degree: usize,
    component: usize,
) -> Result<AttachmentMatrix, HierarchyError> {
    validate_nu_args(graph, spec, degree, degree)?;
    let child_len = spec.interval_length(degree) as u32;
    let parent_len = spec.interval_length(degree + 1) as u32;
    let branching = (parent_len / child_len) as usize;
    let parents = (spec.total_length() as u32 / parent_len) as usize;
    if component >= parents {
        return Err(HierarchyError::BadDegreeRange {
            lo: degree,
            hi: degree,
            depth: spec.depth(),
        });
    }
    let base = component as u32 * parent_len;
    let child = |i: usize| {
        Interval::new(
            base + i as u32 * child_len,
            base + (i as u32 + 1) * child_len,
        )
    };
    let mut flags = vec![false; branching * branching];
    for a in 0..branching {
        for b in (a + 1)..branching {
            let attached = intervals_attached(graph, child(a), child(b))?;
            flags[a * branching + b] = attached;
        }
    }
    Ok(AttachmentMatrix { branching, flags })
}

/// Lowest-degree witness of a failed attachment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NuFailure {
    /// Sub-component degree at which the failure occurred.
    pub degree: usize,
    /// Index of the degree-`(degree + 1)` component containing the pair.
    pub component: usize,
    /// Indices of the unattached sub-component pair within the component.
    pub pair: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NuOutcome {
    pub holds: bool,
    pub first_failure: Option<NuFailure>,
}

/// Checks the recursive attachment event: for every sub-component degree `j`
/// in `lo..=hi`, within every degree-`(j+1)` component, all pairs of its
/// degree-`j` children are attached. Scans degrees upward and reports the
/// lowest-degree failure.
pub fn check_nu_event(
    graph: &PercGraph,
    spec: &HierarchySpec,
    lo: usize,
    hi: usize,
) -> Result<NuOutcome, HierarchyError> {
    validate_nu_args(graph, spec, lo, hi)?;
    for degree in lo..=hi {
        let child_len = spec.interval_length(degree) as u32;
        let parent_len = spec.interval_length(degree + 1) as u32;
        let branching = (parent_len / child_len) as usize;
        let parents = (spec.total_length() as u32 / parent_len) as usize;
        for component in 0..parents {
            let base = component as u32 * parent_len;
            for a in 0..branching {
                for b in (a + 1)..branching {
                    let ia = Interval::new(
                        base + a as u32 * child_len,
                        base + (a as u32 + 1) * child_len,
                    );
                    let ib = Interval::new(
                        base + b as u32 * child_len,
                        base + (b as u32 + 1) * child_len,
                    );
                    if !intervals_attached(graph, ia, ib)? {
                        return Ok(NuOutcome {
                            holds: false,
                            first_failure: Some(NuFailure {
                                degree,
                                component,
                                pair: (a, b),
                            }),
                        });
                    }
                }
            }
        }
    }
    Ok(NuOutcome {
        holds: true,
        first_failure: None,
    })
}

/// Per-degree failure counts over the same scan, for census-style reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NuCensusRow {
    pub degree: usize,
    pub components: usize,
    pub pairs_per_component: usize,
    pub failed_pairs: usize,
}

pub fn nu_failure_census(
    graph: &PercGraph,
    spec: &HierarchySpec,
    lo: usize,
    hi: usize,
) -> Result<Vec<NuCensusRow>, HierarchyError> {
    validate_nu_args(graph, spec, lo, hi)?;
    let mut rows = Vec::new();
    for degree in lo..=hi {
        let child_len = spec.interval_length(degree) as u32;
        let parent_len = spec.interval_length(degree + 1) as u32;
        let branching = (parent_len / child_len) as usize;
        let parents = (spec.total_length() as u32 / parent_len) as usize;
        let mut failed = 0usize;
        for component in 0..parents {
            let base = component as u32 * parent_len;
            for a in 0..branching {
                for b in (a + 1)..branching {
                    let ia = Interval::new(
                        base + a as u32 * child_len,
                        base + (a as u32 + 1) * child_len,
                    );
                    let ib = Interval::new(
                        base + b as u32 * child_len,
                        base + (b as u32 + 1) * child_len,
                    );
                    if !intervals_attached(graph, ia, ib)? {
                        failed += 1;
                    }
                }
            }
        }
        rows.push(NuCensusRow {
            degree,
            components: parents,
            pairs_per_component: branching * (branching - 1) / 2,
            failed_pairs: failed,
        });
    }
    Ok(rows)
}

fn validate_nu_args(
    graph: &PercGraph,
    spec: &HierarchySpec,
    lo: usize,
    hi: usize,
) -> Result<(), HierarchyError> {
    if graph.params().topology != Topology::Path {
        return Err(HierarchyError::NotPath(graph.params().topology));
    }
    if graph.vertex_count() as u64 != spec.total_length() {
        return Err(HierarchyError::LengthMismatch {
            expected: spec.total_length(),
            got: graph.vertex_count(),
        });
    }
    if lo > hi || hi + 1 > spec.depth() {
        return Err(HierarchyError::BadDegreeRange {
            lo,
            hi,
            depth: spec.depth(),
        });
    }
    Ok(())
}

/// Diameter bound implied by the attachment event on sub-degrees `lo..=hi`:
/// routing through an attached pair doubles the hop budget per level, and a
/// degree-`lo` interval has diameter below its length along the path spine,
/// giving `2^{hi - lo + 1} * N_lo`.
pub fn nu_diameter_bound(
    spec: &HierarchySpec,
    lo: usize,
    hi: usize,
) -> Result<u64, HierarchyError> {
    if lo > hi || hi + 1 > spec.depth() {
        return Err(HierarchyError::BadDegreeRange {
            lo,
            hi,
            depth: spec.depth(),
        });
    }
    let levels = (hi - lo + 1) as u32;
    spec.interval_length(lo)
        .checked_shl(levels)
        .ok_or(HierarchyError::Overflow)
}

/// Union-bound lower bound on `P(nu)` built from [`attachment_prob_bound`]
/// with the coarse per-pair distance `l = C_{j+1}`:
/// `1 - sum_j #components * C(C_{j+1}, 2) * exp(-beta_j C_{j+1}^{-s})`.
/// Can be negative when the bound is vacuous at small scale.
pub fn nu_prob_lower_bound(
    spec: &HierarchySpec,
    lo: usize,
    hi: usize,
    s: f64,
    beta: f64,
) -> Result<f64, HierarchyError> {
    if s.is_nan() || s <= 1.0 || s >= 2.0 {
        return Err(HierarchyError::DecayOutOfRange(s));
    }
    if lo > hi || hi + 1 > spec.depth() {
        return Err(HierarchyError::BadDegreeRange {
            lo,
            hi,
            depth: spec.depth(),
        });
    }
    let mut mass = 0.0;
    for degree in lo..=hi {
        let branching = spec.level_sizes()[degree] as f64;
        let components = (spec.total_length() / spec.interval_length(degree + 1)) as f64;
        let pairs = branching * (branching - 1.0) / 2.0;
        let beta_j = 0.5 * beta * (spec.interval_length(degree) as f64).powf(2.0 - s);
        mass += components * pairs * (-beta_j * branching.powf(-s)).exp();
    }
    Ok(1.0 - mass)
}
