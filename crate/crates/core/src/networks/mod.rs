//! Interaction structures: undirected simple connected graphs with dense
//! node ids and a record of how they were generated.

mod edge_list;
mod generators;
mod metrics;

use std::fmt;
use std::str::FromStr;

pub use edge_list::{load_edge_list, parse_edge_list, save_edge_list, write_edge_list};
pub use generators::{barabasi_albert, complete, dms, lattice, Neighborhood};
pub use metrics::{graph_metrics, local_clustering, GraphMetrics};

use crate::error::{Error, Result};

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorTag {
    Complete,
    Lattice4,
    Lattice8,
    BarabasiAlbert,
    Dms,
}

impl GeneratorTag {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorTag::Complete => "complete",
            GeneratorTag::Lattice4 => "lattice4",
            GeneratorTag::Lattice8 => "lattice8",
            GeneratorTag::BarabasiAlbert => "ba",
            GeneratorTag::Dms => "dms",
        }
    }

    /// Whether the generator consumes a random seed.
    pub fn is_random(self) -> bool {
        matches!(self, GeneratorTag::BarabasiAlbert | GeneratorTag::Dms)
    }
}

impl fmt::Display for GeneratorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "complete" => GeneratorTag::Complete,
            "lattice4" => GeneratorTag::Lattice4,
            "lattice8" => GeneratorTag::Lattice8,
            "ba" => GeneratorTag::BarabasiAlbert,
            "dms" => GeneratorTag::Dms,
            other => {
                return Err(Error::invalid("generator", format!("unknown generator `{other}`")))
            }
        })
    }
}

/// How a graph came to be. `m` holds edges-per-node for the growth models,
/// the side length for lattices and 0 for complete graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub generator: GeneratorTag,
    pub seed: u64,
    pub nodes: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
    provenance: Provenance,
}

impl Graph {
    /// Builds a graph from an edge list, checking that the result is simple,
    /// connected and free of isolated nodes.
    pub fn from_edges(
        provenance: Provenance,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Graph> {
        let n = provenance.nodes;
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut adjacency: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        let mut degree_sum = 0;
        for (node, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("duplicate edge at node {node}")));
            }
            if list.is_empty() {
                return Err(Error::InvalidGraph(format!("node {node} is isolated")));
            }
            degree_sum += list.len();
        }
        let graph = Graph {
            adjacency,
            edge_count: degree_sum / 2,
            provenance,
        };
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node as usize]
    }

    #[inline]
    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node as usize].len()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edge_count as f64 / self.node_count() as f64
    }

    /// Edges as `(u, v)` with `u < v`, in ascending lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = u as NodeId;
            list.iter().copied().filter(move |&v| v > u).map(move |v| (u, v))
        })
    }

    /// Average connectivity `z` used for degree classes: the nominal `2m`
    /// for the scale-free growth models, the measured mean degree otherwise.
    pub fn nominal_connectivity(&self) -> f64 {
        match self.provenance.generator {
            GeneratorTag::BarabasiAlbert | GeneratorTag::Dms => 2.0 * self.provenance.m as f64,
            _ => self.mean_degree(),
        }
    }

    fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0 as NodeId];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        reached == n
    }
}

/// Connectivity class of a node relative to the average connectivity `z`
/// and the largest degree in the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DegreeClass {
    Low,
    Medium,
    High,
}

impl DegreeClass {
    pub const ALL: [DegreeClass; 3] = [DegreeClass::Low, DegreeClass::Medium, DegreeClass::High];

    /// `Low` when `k < z`; otherwise `High` when `k >= k_max / 3`; otherwise
    /// `Medium`.
    pub fn classify(degree: usize, z: f64, max_degree: usize) -> DegreeClass {
        let k = degree as f64;
        if k < z {
            DegreeClass::Low
        } else if k >= max_degree as f64 / 3.0 {
            DegreeClass::High
        } else {
            DegreeClass::Medium
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

pub fn degree_class(g: &Graph, node: NodeId, z: f64) -> DegreeClass {
    DegreeClass::classify(g.degree(node), z, g.max_degree())
}

/// Class of every node, computed against a single `k_max`.
pub fn degree_classes(g: &Graph, z: f64) -> Vec<DegreeClass> {
    let k_max = g.max_degree();
    (0..g.node_count())
        .map(|i| DegreeClass::classify(g.degree(i as NodeId), z, k_max))
        .collect()
}

/// Nodes by degree, highest first; equal degrees keep ascending id order.
pub fn rank_by_degree(g: &Graph) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..g.node_count() as NodeId).collect();
    order.sort_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b)));
    order
}
