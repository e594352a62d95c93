use std::collections::HashSet;

use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

use race_core::networks::{
    barabasi_albert, complete, dms, graph_metrics, lattice, load_edge_list, parse_edge_list,
    save_edge_list, write_edge_list, Graph, Neighborhood,
};
use race_core::seeding::instance_seed;

fn check_simple_connected(g: &Graph) -> Result<(), String> {
    let mut seen = HashSet::new();
    let mut degree_sum = 0;
    for u in 0..g.node_count() as u32 {
        let nbrs = g.neighbors(u);
        if nbrs.is_empty() {
            return Err(format!("isolated node {u}"));
        }
        degree_sum += nbrs.len();
        for &v in nbrs {
            if v == u {
                return Err(format!("self loop at {u}"));
            }
            if !g.neighbors(v).contains(&u) {
                return Err(format!("asymmetric edge {u}-{v}"));
            }
            seen.insert((u.min(v), u.max(v)));
        }
    }
    if seen.len() != g.edge_count() || degree_sum != 2 * g.edge_count() {
        return Err("edge count disagrees with adjacency".into());
    }
    // connectivity by BFS
    let mut reached = vec![false; g.node_count()];
    let mut queue = std::collections::VecDeque::from([0u32]);
    reached[0] = true;
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if !reached[v as usize] {
                reached[v as usize] = true;
                queue.push_back(v);
            }
        }
    }
    if reached.iter().any(|r| !r) {
        return Err("disconnected".into());
    }
    Ok(())
}

fn round_trip(g: &Graph) -> Graph {
    let mut buf = Vec::new();
    write_edge_list(g, &mut buf).unwrap();
    parse_edge_list(std::str::from_utf8(&buf).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ba_invariants(nodes in 4usize..400, m in 1usize..5, seed in any::<u64>()) {
        if nodes > m + 1 {
            let g = barabasi_albert(nodes, m, seed).unwrap();
            prop_assert_eq!(g.node_count(), nodes);
            prop_assert_eq!(g.edge_count(), m * (m + 1) / 2 + m * (nodes - m - 1));
            prop_assert!(check_simple_connected(&g).is_ok());
            prop_assert!((0..nodes as u32).all(|v| g.degree(v) >= m));
            prop_assert_eq!(&round_trip(&g), &g);
        }
    }

    #[test]
    fn dms_invariants(nodes in 6usize..400, half_m in 1usize..3, seed in any::<u64>()) {
        let m = 2 * half_m;
        let seed_size = (m + 1).max(3);
        if nodes > seed_size {
            let g = dms(nodes, m, seed).unwrap();
            prop_assert_eq!(
                g.edge_count(),
                seed_size * (seed_size - 1) / 2 + m * (nodes - seed_size)
            );
            prop_assert!(check_simple_connected(&g).is_ok());
            prop_assert_eq!(&round_trip(&g), &g);
        }
    }

    #[test]
    fn lattice_invariants(side in 3usize..20, moore in any::<bool>()) {
        let nbhd = if moore { Neighborhood::Moore8 } else { Neighborhood::Edge4 };
        let g = lattice(side, nbhd).unwrap();
        let k = nbhd.size();
        prop_assert_eq!(g.edge_count(), side * side * k / 2);
        prop_assert!((0..g.node_count() as u32).all(|v| g.degree(v) == k));
        prop_assert!(check_simple_connected(&g).is_ok());
        prop_assert_eq!(&round_trip(&g), &g);
    }

    #[test]
    fn complete_invariants(nodes in 2usize..80) {
        let g = complete(nodes).unwrap();
        prop_assert_eq!(g.edge_count(), nodes * (nodes - 1) / 2);
        prop_assert!(check_simple_connected(&g).is_ok());
    }
}

#[test]
fn saved_files_load_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    for g in [
        dms(500, 2, 3).unwrap(),
        barabasi_albert(500, 3, 4).unwrap(),
        lattice(10, Neighborhood::Moore8).unwrap(),
        complete(20).unwrap(),
    ] {
        let path = dir.path().join("g.edges");
        save_edge_list(&g, &path).unwrap();
        let loaded = load_edge_list(&path).unwrap();
        assert_eq!(loaded, g);
        assert_eq!(loaded.provenance(), g.provenance());
    }
}

#[test]
fn dms_is_far_more_clustered_than_ba() {
    let (mut dms_c, mut ba_c) = (0.0, 0.0);
    for i in 0..10 {
        let seed = instance_seed(99, i);
        dms_c += graph_metrics(&dms(1000, 2, seed).unwrap()).mean_local_clustering;
        ba_c += graph_metrics(&barabasi_albert(1000, 2, seed).unwrap()).mean_local_clustering;
    }
    assert!(dms_c > 2.0 * ba_c, "dms {dms_c} vs ba {ba_c}");
}

#[test]
fn scale_free_graphs_grow_hubs() {
    for i in 0..10 {
        let seed = instance_seed(5, i);
        let ba = barabasi_albert(1000, 2, seed).unwrap();
        let dms = dms(1000, 2, seed).unwrap();
        // a Poisson graph of the same mean degree would stay below ~15
        assert!(ba.max_degree() >= 30, "ba seed {seed}: {}", ba.max_degree());
        assert!(dms.max_degree() >= 30, "dms seed {seed}: {}", dms.max_degree());
        assert!((ba.mean_degree() - 3.994).abs() < 1e-12);
        assert!((dms.mean_degree() - 3.994).abs() < 1e-12);
    }
}
