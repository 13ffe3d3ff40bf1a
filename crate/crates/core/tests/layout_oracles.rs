use causeloom_core::hypergraph::{aggregate, DirectedHypergraph, Provenance};
use causeloom_core::layout::{
    communities_louvain, k_shortest_paths, modularity, order_columns, order_rows, propagation_path, ColumnStrategy,
    PathResult, Partition, RowStrategy, SignedDigraph,
};
use causeloom_core::rpp::{CausalEdge, CausalGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_digraph(rng: &mut ChaCha8Rng) -> SignedDigraph {
    let n = rng.gen_range(1..=8);
    let mut g = SignedDigraph::new((0..n).map(|i| format!("n{i}")).collect());
    let density = rng.gen_range(0.1..0.6);
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(density) {
                let s: f64 = rng.gen_range(0.1..1.0);
                // coarse grid so that equal-distance ties actually occur
                let s = (s * 10.0).round() / 10.0;
                g.add_edge(a, b, if rng.gen_bool(0.3) { -s } else { s });
            }
        }
    }
    g
}

/// Every simple path, compared by (distance, hops, node sequence).
fn brute_force(g: &SignedDigraph, s: usize, t: usize) -> Option<(Vec<usize>, f64)> {
    fn walk(g: &SignedDigraph, t: usize, path: &mut Vec<usize>, dist: f64, best: &mut Option<(Vec<usize>, f64)>) {
        let v = *path.last().unwrap();
        if v == t {
            let better = match best {
                None => true,
                Some((bp, bd)) => dist
                    .total_cmp(bd)
                    .then(path.len().cmp(&bp.len()))
                    .then_with(|| path.as_slice().cmp(bp.as_slice()))
                    .is_lt(),
            };
            if better {
                *best = Some((path.clone(), dist));
            }
            return;
        }
        for &(to, s) in &g.adjacency[v] {
            if !path.contains(&to) {
                path.push(to);
                walk(g, t, path, dist + (1.0 - s.abs()), best);
                path.pop();
            }
        }
    }
    let mut best = None;
    walk(g, t, &mut vec![s], 0.0, &mut best);
    best
}

#[test]
fn dijkstra_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for trial in 0..500 {
        let g = random_digraph(&mut rng);
        let s = rng.gen_range(0..g.len());
        let t = rng.gen_range(0..g.len());
        let got = propagation_path(&g, s, t).unwrap();
        match (brute_force(&g, s, t), got) {
            (None, PathResult::Unreachable) => {}
            (Some((nodes, dist)), PathResult::Reachable(p)) => {
                assert_eq!(p.nodes, nodes, "trial {trial}");
                assert_eq!(p.distance, dist, "trial {trial}");
                let hops: Vec<f64> = p.nodes.windows(2).map(|w| g.strength(w[0], w[1]).unwrap()).collect();
                assert_eq!(p.strengths, hops);
            }
            (want, got) => panic!("trial {trial}: expected {want:?}, got {got:?}"),
        }
    }
}

#[test]
fn yen_paths_are_simple_distinct_and_sorted() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let g = random_digraph(&mut rng);
        let s = rng.gen_range(0..g.len());
        let t = rng.gen_range(0..g.len());
        let paths = k_shortest_paths(&g, s, t, 3).unwrap();
        if let Some(first) = propagation_path(&g, s, t).unwrap().path() {
            assert_eq!(&paths[0], first);
        } else {
            assert!(paths.is_empty());
        }
        for (i, p) in paths.iter().enumerate() {
            let mut seen = p.nodes.clone();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), p.nodes.len());
            assert!(paths[..i].iter().all(|q| q.nodes != p.nodes));
        }
        assert!(paths.windows(2).all(|w| w[0].distance <= w[1].distance + 1e-12));
    }
}

fn graph(n: usize, edges: &[(usize, usize, f64)]) -> CausalGraph {
    CausalGraph::new(
        n,
        edges
            .iter()
            .map(|&(cause, effect, strength)| CausalEdge {
                cause,
                effect,
                strength,
            })
            .collect(),
        0.1,
    )
}

#[test]
fn two_cliques_split_in_two() {
    let mut edges = Vec::new();
    for block in [0usize, 4] {
        for a in 0..4 {
            for b in 0..4 {
                if a < b {
                    edges.push((block + a, block + b, 0.9));
                }
            }
        }
    }
    edges.push((3, 4, 0.1));
    let g = graph(8, &edges);

    // exhaustive search over every two-block partition
    let mut best = f64::NEG_INFINITY;
    let mut best_split = Vec::new();
    for mask in 1u32..(1 << 7) {
        let labels: Vec<usize> = (0..8).map(|v| if v == 7 { 0 } else { ((mask >> v) & 1) as usize }).collect();
        let q = modularity(&g, &labels);
        if q > best {
            best = q;
            best_split = labels;
        }
    }
    assert_eq!(best_split, vec![1, 1, 1, 1, 0, 0, 0, 0]);

    for seed in 0..5 {
        let p = communities_louvain(&g, seed);
        assert_eq!(p.num_communities(), 2);
        assert_eq!(p.community, vec![0, 0, 0, 0, 1, 1, 1, 1]);
        assert!(p.modularity > 0.3);
        assert!((p.modularity - best).abs() < 1e-9);
    }
}

#[test]
fn louvain_passes_never_lose_modularity() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let n = rng.gen_range(1..25);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if rng.gen_bool(0.15) {
                    edges.push((a, b, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        let g = graph(n, &edges);
        let p = communities_louvain(&g, rng.gen());
        assert!(p.history.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{:?}", p.history);
        assert!((p.modularity - modularity(&g, &p.community)).abs() < 1e-9);
        assert!((-0.5..=1.0).contains(&p.modularity));
        assert_eq!(p.community.len(), n);
    }
}

fn random_hypergraph(rng: &mut ChaCha8Rng, n: usize) -> DirectedHypergraph {
    let mut hg = DirectedHypergraph::new((0..n).map(|i| format!("v{i}")).collect());
    for _ in 0..rng.gen_range(0..25) {
        let effect = rng.gen_range(0..n);
        let size = rng.gen_range(1..=3);
        let causes: Vec<usize> = (0..size).map(|_| rng.gen_range(0..n)).filter(|&c| c != effect).collect();
        if causes.is_empty() {
            continue;
        }
        let s: f64 = rng.gen_range(-1.0..1.0);
        if s != 0.0 {
            let _ = hg.insert(causes, effect, s, Provenance::default());
        }
    }
    hg
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    let mut v = p.to_vec();
    v.sort_unstable();
    v == (0..n).collect::<Vec<_>>()
}

#[test]
fn column_orders_hold_their_contracts() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for _ in 0..200 {
        let n = rng.gen_range(2..10);
        let groups = aggregate(&random_hypergraph(&mut rng, n));
        let focus = rng.gen_range(0..n);
        let manual: Vec<usize> = (0..groups.len()).rev().collect();
        for strategy in [
            ColumnStrategy::Direction,
            ColumnStrategy::Strength,
            ColumnStrategy::Degree,
            ColumnStrategy::Topology { focus },
            ColumnStrategy::Manual(&manual),
        ] {
            let o = order_columns(&groups, n, strategy).unwrap();
            assert!(is_permutation(&o.permutation, groups.len()));
        }
        let strength = order_columns(&groups, n, ColumnStrategy::Strength).unwrap().permutation;
        assert!(strength
            .windows(2)
            .all(|w| groups[w[0]].max_strength() >= groups[w[1]].max_strength()));
        let degree = order_columns(&groups, n, ColumnStrategy::Degree).unwrap().permutation;
        assert!(degree.windows(2).all(|w| groups[w[0]].degree() <= groups[w[1]].degree()));
        let direction = order_columns(&groups, n, ColumnStrategy::Direction).unwrap().permutation;
        assert!(direction.windows(2).all(|w| groups[w[0]].effect <= groups[w[1]].effect));

        let topo = order_columns(&groups, n, ColumnStrategy::Topology { focus }).unwrap().permutation;
        let touches = |i: usize| groups[i].touches_as_cause(focus) || groups[i].effect == focus;
        let prefix = topo.iter().take_while(|&&i| touches(i)).count();
        assert!(topo[prefix..].iter().all(|&i| !touches(i)), "focus groups must form a prefix");
        let as_cause = topo.iter().take_while(|&&i| groups[i].touches_as_cause(focus)).count();
        assert!(topo[as_cause..prefix].iter().all(|&i| !groups[i].touches_as_cause(focus)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn row_orders_are_permutations(
        raw in proptest::collection::vec("[a-z]{1,6}", 1..12),
        labels in proptest::collection::vec(0usize..4, 12),
    ) {
        let mut names = raw;
        names.sort();
        names.dedup();
        let n = names.len();
        let community = {
            let mut map = std::collections::HashMap::new();
            labels[..n].iter().map(|&l| { let k = map.len(); *map.entry(l).or_insert(k) }).collect::<Vec<_>>()
        };
        let partition = Partition { community, modularity: 0.0, history: vec![] };
        let manual: Vec<usize> = (0..n).rev().collect();
        for strategy in [
            RowStrategy::Base,
            RowStrategy::Alphabetical,
            RowStrategy::Groups { partition: &partition, embeddings: None },
            RowStrategy::Manual(&manual),
        ] {
            let o = order_rows(&names, strategy).unwrap();
            prop_assert!(is_permutation(&o.permutation, n));
        }
        let groups = order_rows(&names, RowStrategy::Groups { partition: &partition, embeddings: None }).unwrap();
        let sizes = partition.sizes();
        let size_of = |v: usize| sizes[partition.community[v]];
        let descending = groups.permutation.windows(2).all(|w| size_of(w[0]) >= size_of(w[1]));
        prop_assert!(descending);
    }
}
