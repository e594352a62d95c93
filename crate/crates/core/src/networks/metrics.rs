use std::collections::BTreeMap;

use super::{Graph, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub struct GraphMetrics {
    pub mean_degree: f64,
    pub max_degree: usize,
    pub mean_local_clustering: f64,
    /// degree -> number of nodes with that degree
    pub degree_histogram: BTreeMap<usize, usize>,
}

/// Triangles through `node` over the `k(k-1)/2` possible neighbour pairs;
/// 0 for degree below 2.
pub fn local_clustering(g: &Graph, node: NodeId) -> f64 {
    let neighbors = g.neighbors(node);
    let k = neighbors.len();
    if k < 2 {
        return 0.0;
    }
    let mut triangles = 0usize;
    for (i, &u) in neighbors.iter().enumerate() {
        triangles += sorted_intersection_count(&neighbors[i + 1..], g.neighbors(u));
    }
    triangles as f64 / (k * (k - 1) / 2) as f64
}

fn sorted_intersection_count(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

pub fn graph_metrics(g: &Graph) -> GraphMetrics {
    let n = g.node_count();
    let mut degree_histogram = BTreeMap::new();
    for node in 0..n as NodeId {
        *degree_histogram.entry(g.degree(node)).or_insert(0) += 1;
    }
    let clustering_sum: f64 = (0..n as NodeId).map(|v| local_clustering(g, v)).sum();
    GraphMetrics {
        mean_degree: g.mean_degree(),
        max_degree: g.max_degree(),
        mean_local_clustering: clustering_sum / n as f64,
        degree_histogram,
    }
}
