use rand::Rng;

use super::{GeneratorTag, Graph, NodeId, Provenance};
use crate::error::{Error, Result};
use crate::seeding::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Neighborhood {
    /// Von Neumann: the four edge neighbours.
    Edge4,
    /// Moore: edge and corner neighbours.
    Moore8,
}

impl Neighborhood {
    pub fn size(self) -> usize {
        match self {
            Neighborhood::Edge4 => 4,
            Neighborhood::Moore8 => 8,
        }
    }

    pub fn from_size(size: usize) -> Result<Self> {
        match size {
            4 => Ok(Neighborhood::Edge4),
            8 => Ok(Neighborhood::Moore8),
            other => Err(Error::invalid("neighborhood", format!("expected 4 or 8, got {other}"))),
        }
    }
}

/// Well-mixed population: every pair of nodes is linked.
pub fn complete(nodes: usize) -> Result<Graph> {
    if nodes < 2 {
        return Err(Error::invalid("nodes", format!("complete graph needs Z >= 2, got {nodes}")));
    }
    let provenance = Provenance {
        generator: GeneratorTag::Complete,
        seed: 0,
        nodes,
        m: 0,
    };
    let n = nodes as NodeId;
    Graph::from_edges(
        provenance,
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))),
    )
}

/// Square `side x side` lattice with periodic boundaries.
pub fn lattice(side: usize, neighborhood: Neighborhood) -> Result<Graph> {
    if side < 3 {
        return Err(Error::invalid("side", format!("periodic lattice needs L >= 3, got {side}")));
    }
    let generator = match neighborhood {
        Neighborhood::Edge4 => GeneratorTag::Lattice4,
        Neighborhood::Moore8 => GeneratorTag::Lattice8,
    };
    let provenance = Provenance {
        generator,
        seed: 0,
        nodes: side * side,
        m: side,
    };
    // Half of each neighbourhood; the other half arrives from the neighbours.
    let offsets: &[(usize, usize)] = match neighborhood {
        Neighborhood::Edge4 => &[(0, 1), (1, 0)],
        Neighborhood::Moore8 => &[(0, 1), (1, 0), (1, 1), (1, side - 1)],
    };
    let id = |r: usize, c: usize| (r * side + c) as NodeId;
    let mut edges = Vec::with_capacity(side * side * offsets.len());
    for r in 0..side {
        for c in 0..side {
            for &(dr, dc) in offsets {
                edges.push((id(r, c), id((r + dr) % side, (c + dc) % side)));
            }
        }
    }
    Graph::from_edges(provenance, edges)
}

/// Below this size a growth model is still dominated by its seed graph and
/// may legitimately lack hubs.
const HUB_CHECK_MIN_NODES: usize = 100;

/// Scale-free instances must contain at least one High-class node, which
/// needs the largest degree to reach the nominal connectivity `2m`.
fn check_hub(g: Graph) -> Result<Graph> {
    let z = g.nominal_connectivity();
    if g.node_count() >= HUB_CHECK_MIN_NODES && (g.max_degree() as f64) < z {
        let p = g.provenance();
        return Err(Error::InvalidGraph(format!(
            "{} instance with seed {} has no High-degree node (k_max = {}, z = {z})",
            p.generator,
            p.seed,
            g.max_degree()
        )));
    }
    Ok(g)
}

fn seed_clique(size: usize) -> Vec<(NodeId, NodeId)> {
    let n = size as NodeId;
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
}

/// Barabási–Albert growth: start from a clique on `m + 1` nodes, then each
/// new node links to `m` distinct existing nodes chosen with probability
/// proportional to degree (duplicates are redrawn).
pub fn barabasi_albert(nodes: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 1 {
        return Err(Error::invalid("m", "BA growth needs m >= 1"));
    }
    if nodes <= m + 1 {
        return Err(Error::invalid(
            "nodes",
            format!("BA growth needs Z > m + 1, got Z = {nodes}, m = {m}"),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = seed_clique(m + 1);
    // Every edge endpoint once: uniform draws from here are degree-weighted.
    let mut endpoints: Vec<NodeId> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut targets: Vec<NodeId> = Vec::with_capacity(m);
    for v in (m + 1)..nodes {
        let v = v as NodeId;
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    let provenance = Provenance {
        generator: GeneratorTag::BarabasiAlbert,
        seed,
        nodes,
        m,
    };
    check_hub(Graph::from_edges(provenance, edges)?)
}

/// Dorogovtsev–Mendes–Samukhin edge lottery: each new node picks `m / 2`
/// uniformly random existing edges with pairwise disjoint endpoints and links
/// to both ends of each, closing a triangle per edge.
///
/// Growth starts from a triangle for `m = 2` and from a clique on `m + 1`
/// nodes for larger `m`, since a triangle holds no two disjoint edges.
pub fn dms(nodes: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::invalid("m", format!("DMS growth needs an even m >= 2, got {m}")));
    }
    let seed_size = (m + 1).max(3);
    if nodes <= seed_size {
        return Err(Error::invalid(
            "nodes",
            format!("DMS growth needs Z > {seed_size} for m = {m}, got {nodes}"),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = seed_clique(seed_size);
    let mut targets: Vec<NodeId> = Vec::with_capacity(m);
    for v in seed_size..nodes {
        let v = v as NodeId;
        targets.clear();
        while targets.len() < m {
            let (a, b) = edges[rng.gen_range(0..edges.len())];
            if !targets.contains(&a) && !targets.contains(&b) {
                targets.push(a);
                targets.push(b);
            }
        }
        for &t in &targets {
            edges.push((t, v));
        }
    }
    let provenance = Provenance {
        generator: GeneratorTag::Dms,
        seed,
        nodes,
        m,
    };
    check_hub(Graph::from_edges(provenance, edges)?)
}
