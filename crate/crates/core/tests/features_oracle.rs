mod common;

use common::{bool_grid, history_of, random_history, to_grid};
use crewpair::features::{
    assemble_features, build_adjacency, enhanced_degrees, enhanced_dual, enhanced_primal, partition_edges,
    strict_upper_pairs, superimpose, AdjacencyMatrix, Normalization,
};
use crewpair_oracle::graph;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weighted_adjacency_matches(n in 2usize..50, t in 1usize..7, seed: u64) {
        let h = random_history(n, t, seed);
        for ps in &h.pairings {
            let (a, w) = build_adjacency(n, ps.iter().map(|(s, x)| (s.as_slice(), *x))).unwrap();
            prop_assert_eq!(to_grid(&w), graph::weighted_adjacency(n, ps));
            for ((i, j), &v) in a.as_array().indexed_iter() {
                let used = ps.iter().any(|(s, _)| s.windows(2).any(|c| c[0] == i && c[1] == j));
                prop_assert_eq!(v, used);
                prop_assert!(!v || i < j);
            }
        }
    }

    #[test]
    fn union_and_blocks_match(n in 2usize..50, t in 1usize..7, seed: u64) {
        let h = random_history(n, t, seed);
        let hist = history_of(&h);
        let recs = hist.records();
        let mats: Vec<AdjacencyMatrix> = recs.iter().map(|r| r.adjacency.clone()).collect();
        let g = superimpose(&mats).unwrap();
        let bools: Vec<Vec<Vec<bool>>> = mats.iter().map(bool_grid).collect();
        prop_assert_eq!(bool_grid(&g.matrix), graph::or_union(&bools));
        prop_assert_eq!(&hist.global().matrix, &g.matrix);

        let weighted: Vec<graph::Grid> = recs.iter().map(|r| to_grid(&r.weighted)).collect();
        prop_assert_eq!(to_grid(&enhanced_primal(recs).unwrap()), graph::enhanced_primal(&h.costs, &weighted));
        prop_assert_eq!(to_grid(&enhanced_dual(recs).unwrap()), graph::enhanced_dual(&h.costs, &h.duals));
        let (i, o) = enhanced_degrees(recs).unwrap();
        let (oi, oo) = graph::enhanced_degrees(&h.costs, &weighted);
        prop_assert_eq!(i.to_vec(), oi);
        prop_assert_eq!(o.to_vec(), oo);

        let f = assemble_features(recs, Normalization::PerBlock).unwrap();
        prop_assert_eq!(f.data.dim(), (n, n + t + 2));
        prop_assert!(f.data.iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert_eq!(to_grid(&f.data), graph::assemble(&h.costs, &weighted, &h.duals));

        // X support equals the union support.
        let x = enhanced_primal(recs).unwrap();
        for ((i, j), &v) in x.indexed_iter() {
            let positive_weight = recs.iter().any(|r| r.weighted[[i, j]] > 0.0);
            if positive_weight {
                prop_assert!(v > 0.0 && g.matrix.get(i, j));
            }
        }

        let dom = strict_upper_pairs(n);
        let (pos, neg) = partition_edges(&g, &dom).unwrap();
        let (opos, oneg) = graph::split_pairs(&bool_grid(&g.matrix), &dom);
        prop_assert_eq!(pos.len() + neg.len(), dom.len());
        prop_assert_eq!(pos, opos);
        prop_assert_eq!(neg, oneg);
    }

    #[test]
    fn union_is_monotone(n in 2usize..30, t in 2usize..7, seed: u64) {
        let h = random_history(n, t, seed);
        let hist = history_of(&h);
        let mats: Vec<AdjacencyMatrix> = hist.records().iter().map(|r| r.adjacency.clone()).collect();
        let before = superimpose(&mats[..t - 1]).unwrap();
        let after = superimpose(&mats).unwrap();
        for (i, j) in before.matrix.edges() {
            prop_assert!(after.matrix.get(i, j));
        }
    }
}

#[test]
fn normalization_is_idempotent() {
    let h = random_history(20, 4, 7);
    let hist = history_of(&h);
    let f = assemble_features(hist.records(), Normalization::PerBlock).unwrap();
    let mut x = f.primal_block().to_owned();
    let before = x.clone();
    crewpair::features::min_max_normalize(&mut x);
    assert_eq!(x, before);
}
