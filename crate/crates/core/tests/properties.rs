mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use vinecop::deptools::average_ranks;
use vinecop::union_find::DisjointSet;
use vinecop::{kendall_tau, to_pseudo_obs, VarSet};

use common::tau_brute;

fn column(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![(-50i32..50).prop_map(f64::from), -1e3..1e3f64], n)
}

fn paired() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..60).prop_flat_map(|n| (column(n), column(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tau_matches_pairwise_count((x, y) in paired()) {
        let brute = tau_brute(&x, &y);
        match kendall_tau(&x, &y) {
            Ok(t) => prop_assert!((t - brute).abs() < 1e-12, "{t} vs {brute}"),
            Err(_) => prop_assert!(!brute.is_finite()),
        }
    }

    #[test]
    fn tau_is_symmetric_and_bounded((x, y) in paired()) {
        if let (Ok(a), Ok(b)) = (kendall_tau(&x, &y), kendall_tau(&y, &x)) {
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn tau_ignores_increasing_maps((x, y) in paired()) {
        let fx: Vec<f64> = x.iter().map(|v| (v / 100.0).exp()).collect();
        let gy: Vec<f64> = y.iter().map(|v| v * v * v + 2.0 * v).collect();
        if let (Ok(a), Ok(b)) = (kendall_tau(&x, &y), kendall_tau(&fx, &gy)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tau_flips_sign_under_reflection((x, y) in paired()) {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        if let (Ok(a), Ok(b)) = (kendall_tau(&x, &y), kendall_tau(&neg, &y)) {
            prop_assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn pseudo_obs_lie_inside_unit_interval(rows in (1usize..5).prop_flat_map(|d| prop::collection::vec(column(d), 2..40))) {
        let obs = to_pseudo_obs(&rows).unwrap();
        let n = rows.len() as f64;
        for c in obs.columns() {
            for &u in c {
                prop_assert!(u > 0.0 && u < 1.0);
            }
            let mean = c.iter().sum::<f64>() / n;
            prop_assert!((mean - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn pseudo_obs_ignore_increasing_maps(x in (2usize..50).prop_flat_map(column)) {
        let rows: Vec<Vec<f64>> = x.iter().map(|&v| vec![v]).collect();
        let mapped: Vec<Vec<f64>> = x.iter().map(|&v| vec![(v / 1e3).atan()]).collect();
        prop_assert_eq!(to_pseudo_obs(&rows).unwrap().into_columns(), to_pseudo_obs(&mapped).unwrap().into_columns());
    }

    #[test]
    fn average_ranks_sum_to_triangle(x in (1usize..50).prop_flat_map(column)) {
        let r = average_ranks(&x);
        let n = x.len() as f64;
        prop_assert!((r.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
        for i in 0..x.len() {
            for j in 0..x.len() {
                if x[i] < x[j] {
                    prop_assert!(r[i] < r[j]);
                }
                if x[i] == x[j] {
                    prop_assert_eq!(r[i], r[j]);
                }
            }
        }
    }

    #[test]
    fn disjoint_set_matches_graph_search(n in 1usize..25, edges in prop::collection::vec((0usize..25, 0usize..25), 0..40)) {
        let edges: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let mut ds = DisjointSet::new();
        for i in 0..n {
            ds.insert(i);
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &edges {
            let fresh = !reachable(&adj, a).contains(&b);
            prop_assert_eq!(ds.union(&a, &b), fresh);
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = BTreeSet::new();
        let mut comps = 0;
        for i in 0..n {
            if seen.insert(i) {
                comps += 1;
                seen.extend(reachable(&adj, i));
            }
            for j in 0..n {
                prop_assert_eq!(ds.connected(&i, &j), reachable(&adj, i).contains(&j));
            }
        }
        prop_assert_eq!(ds.components(), comps);
    }

    #[test]
    fn varset_agrees_with_btreeset(a in prop::collection::btree_set(0usize..64, 0..20), b in prop::collection::btree_set(0usize..64, 0..20)) {
        let sa = a.iter().fold(VarSet::EMPTY, |s, &i| s.with(i));
        let sb = b.iter().fold(VarSet::EMPTY, |s, &i| s.with(i));
        prop_assert_eq!(sa.to_vec(), a.iter().copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.len(), a.len());
        prop_assert_eq!(sa.difference(sb).to_vec(), a.difference(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.is_subset(sb), a.is_subset(&b));
        prop_assert_eq!(sa.is_disjoint(sb), a.is_disjoint(&b));
    }
}

fn reachable(adj: &[Vec<usize>], from: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([from]);
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}
