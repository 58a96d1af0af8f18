//! Flat adjacency (CSR) view of a graph plus the BFS kernel shared by the
//! distance-based metrics. Scratch buffers are owned by the caller so
//! repeated traversals do not reallocate.

use crate::model::PercGraph;

pub(crate) struct Csr {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Csr {
    pub fn from_graph(graph: &PercGraph) -> Self {
        let n = graph.vertex_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(2 * graph.edge_count());
        offsets.push(0);
        for v in 0..n {
            neighbors.extend_from_slice(graph.neighbors(v as u32));
            offsets.push(neighbors.len());
        }
        Csr { offsets, neighbors }
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }
}

pub(crate) const UNREACHED: u32 = u32::MAX;

/// Outcome of one BFS: farthest distance, the lowest-id vertex attaining it,
/// and how many vertices were reached.
pub(crate) struct BfsOutcome {
    pub max_dist: u32,
    pub farthest: u32,
    pub reached: usize,
}

/// Fills `dist` with BFS distances from `src`; `UNREACHED` marks vertices in
/// other components. `queue` is reused scratch. Ties for the farthest vertex
/// break towards the lowest id.
pub(crate) fn bfs(csr: &Csr, src: u32, dist: &mut [u32], queue: &mut Vec<u32>) -> BfsOutcome {
    dist.fill(UNREACHED);
    queue.clear();
    dist[src as usize] = 0;
    queue.push(src);
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        let dv = dist[v as usize];
        for &w in csr.neighbors(v) {
            if dist[w as usize] == UNREACHED {
                dist[w as usize] = dv + 1;
                queue.push(w);
            }
        }
    }
    let mut max_dist = 0;
    let mut farthest = src;
    for (i, &d) in dist.iter().enumerate() {
        if d != UNREACHED && d > max_dist {
            max_dist = d;
            farthest = i as u32;
        }
    }
    BfsOutcome {
        max_dist,
        farthest,
        reached: queue.len(),
    }
}
