//! Partitioner checks against brute-force and BFS oracles, plus the
//! partition invariants as property tests.

mod common;

use common::*;
use ddg_core::partition::{
    expand_overlap, graph_partition, inertial_partition, subdomain_adjacency, Partition,
};
use ddg_core::sparse::CsrMatrix;
use proptest::prelude::*;
use std::collections::VecDeque;

fn is_connected(a: &CsrMatrix, nodes: &[usize]) -> bool {
    if nodes.is_empty() {
        return false;
    }
    let member: std::collections::HashSet<usize> = nodes.iter().copied().collect();
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(nodes[0]);
    queue.push_back(nodes[0]);
    while let Some(u) = queue.pop_front() {
        for &v in a.row(u).0 {
            if v != u && member.contains(&v) && seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen.len() == nodes.len()
}

fn edge_cut(a: &CsrMatrix, part: &Partition) -> usize {
    let mut cut = 0;
    for i in 0..a.nrows() {
        for &j in a.row(i).0 {
            if j > i && part.part_of(i) != part.part_of(j) {
                cut += 1;
            }
        }
    }
    cut
}

#[test]
fn path_two_parts_matches_contiguous_split_oracle() {
    // brute force over contiguous split points: any 5/5 split has cut 1,
    // which is the minimum for a balanced bisection of a path
    let (a, _) = laplacian_1d(10);
    let mut best_cut = usize::MAX;
    for split in 1..10 {
        let assignment: Vec<usize> = (0..10).map(|i| usize::from(i >= split)).collect();
        let p = Partition::new(assignment, 2).unwrap();
        let sizes = p.part_sizes();
        if sizes.iter().all(|&s| s <= 5) {
            best_cut = best_cut.min(edge_cut(&a, &p));
        }
    }
    assert_eq!(best_cut, 1);

    let p = graph_partition(&a, 2, 3).unwrap();
    let sizes = p.part_sizes();
    assert!(*sizes.iter().max().unwrap() <= 5);
    assert_eq!(edge_cut(&a, &p), best_cut);
}

#[test]
fn grid_16x16_four_parts_balanced_and_connected() {
    let (a, _) = grid_laplacian_2d(16, 16);
    let p = graph_partition(&a, 4, 0).unwrap();
    let sizes = p.part_sizes();
    assert_eq!(sizes.iter().sum::<usize>(), 256);
    let bound = (1.3 * 256.0 / 4.0) as usize;
    for (id, parts) in p.parts().iter().enumerate() {
        assert!(parts.len() <= bound, "part {id} has {} nodes", parts.len());
        assert!(is_connected(&a, parts), "part {id} is disconnected");
    }
}

#[test]
fn inertial_quadrants_on_lattice() {
    // 8x8 unit-square lattice, 4 parts, no randomization: the two median
    // splits must produce the four quadrants
    let mut coords = Vec::new();
    for j in 0..8 {
        for i in 0..8 {
            coords.push(i as f64 / 7.0);
            coords.push(j as f64 / 7.0);
        }
    }
    let p = inertial_partition(&coords, 2, 4, 0, false).unwrap();
    // oracle: quadrant of each node
    let quadrant: Vec<usize> = (0..64)
        .map(|n| {
            let (i, j) = (n % 8, n / 8);
            usize::from(i >= 4) + 2 * usize::from(j >= 4)
        })
        .collect();
    // parts must match quadrants as sets (part ids may be permuted)
    let mut mapping = std::collections::HashMap::new();
    for n in 0..64 {
        let part = p.part_of(n);
        let q = quadrant[n];
        let entry = mapping.entry(part).or_insert(q);
        assert_eq!(*entry, q, "part {part} spans multiple quadrants");
    }
    assert_eq!(mapping.len(), 4);
}

#[test]
fn expand_overlap_matches_bfs_closure_oracle() {
    let (a, _) = grid_laplacian_2d(8, 8);
    let quadrants: Vec<usize> = (0..64)
        .map(|n| {
            let (i, j) = (n % 8, n / 8);
            usize::from(i >= 4) + 2 * usize::from(j >= 4)
        })
        .collect();
    let part = Partition::new(quadrants, 4).unwrap();
    let ov = expand_overlap(&a, &part, 2);

    for (pi, nodes) in part.parts().iter().enumerate() {
        // BFS closure of depth 2 from the part
        let mut dist: Vec<Option<usize>> = vec![None; 64];
        let mut queue = VecDeque::new();
        for &v in nodes {
            dist[v] = Some(0);
            queue.push_back(v);
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            if du == 2 {
                continue;
            }
            for &v in a.row(u).0 {
                if v != u && dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        let oracle: Vec<usize> = (0..64).filter(|&v| dist[v].is_some()).collect();
        assert_eq!(ov.subdomains[pi], oracle, "subdomain {pi}");
    }
}

#[test]
fn subdomain_adjacency_matches_edge_scan_oracle() {
    let (a, _) = grid_laplacian_2d(8, 8);
    let quadrants: Vec<usize> = (0..64)
        .map(|n| {
            let (i, j) = (n % 8, n / 8);
            usize::from(i >= 4) + 2 * usize::from(j >= 4)
        })
        .collect();
    let part = Partition::new(quadrants, 4).unwrap();
    let adj = subdomain_adjacency(&part, &a).unwrap();

    let mut oracle = vec![vec![false; 4]; 4];
    for p in 0..4 {
        oracle[p][p] = true;
    }
    for i in 0..64 {
        for &j in a.row(i).0 {
            if j != i {
                oracle[part.part_of(i)][part.part_of(j)] = true;
            }
        }
    }
    for pi in 0..4 {
        for pj in 0..4 {
            let got = adj.get(pi, pj) != 0.0;
            assert_eq!(got, oracle[pi][pj], "pair ({pi},{pj})");
        }
    }
}

#[test]
fn graph_partition_deterministic_per_seed() {
    let (a, _) = grid_laplacian_2d(12, 12);
    let p1 = graph_partition(&a, 6, 5).unwrap();
    let p2 = graph_partition(&a, 6, 5).unwrap();
    assert_eq!(p1.assignment(), p2.assignment());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partition_invariants_on_grids(nx in 3usize..=12, ny in 3usize..=12, parts in 1usize..=6, seed in 0u64..1000) {
        let (a, _) = grid_laplacian_2d(nx, ny);
        prop_assume!(parts <= nx * ny);
        let p = graph_partition(&a, parts, seed).unwrap();
        // full coverage with valid ids is enforced by the Partition type;
        // re-check non-emptiness and totals here
        let sizes = p.part_sizes();
        prop_assert_eq!(sizes.iter().sum::<usize>(), nx * ny);
        prop_assert!(sizes.iter().all(|&s| s > 0));
    }

    #[test]
    fn overlap_monotone_in_delta(nx in 3usize..=10, ny in 3usize..=10, parts in 1usize..=4, delta in 0usize..3, seed in 0u64..1000) {
        let (a, _) = grid_laplacian_2d(nx, ny);
        prop_assume!(parts <= nx * ny);
        let p = graph_partition(&a, parts, seed).unwrap();
        let small = expand_overlap(&a, &p, delta);
        let large = expand_overlap(&a, &p, delta + 1);
        for (s, l) in small.subdomains.iter().zip(&large.subdomains) {
            let lset: std::collections::HashSet<usize> = l.iter().copied().collect();
            prop_assert!(s.iter().all(|v| lset.contains(v)));
        }
        // delta-expanded subdomains cover everything the parts covered
        let mut covered = vec![false; nx * ny];
        for s in &small.subdomains {
            for &v in s {
                covered[v] = true;
            }
        }
        prop_assert!(covered.iter().all(|&c| c));
    }
}

#[test]
fn many_parts_on_annulus_stay_balanced_and_connected() {
    use ddg_core::problems::{annulus_mesh, fem_poisson_p1};
    let mesh = annulus_mesh(48, 215).unwrap();
    let prob = fem_poisson_p1(&mesh, &|_, _| 1.0, None).unwrap();
    let n = prob.a.nrows();
    for parts in [40usize, 100] {
        let p = graph_partition(&prob.a, parts, 1).unwrap();
        let bound = 1.3 * n as f64 / parts as f64;
        for (id, nodes) in p.parts().iter().enumerate() {
            assert!(
                (nodes.len() as f64) <= bound,
                "part {id} has {} nodes (bound {bound:.1})",
                nodes.len()
            );
            assert!(is_connected(&prob.a, nodes), "part {id} is disconnected");
        }
    }
}
