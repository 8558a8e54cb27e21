mod common;

use std::sync::Arc;

use common::*;
use fairprobe::data::{
    read_csv, split, standardize, write_csv_to, Dataset, FeatureKind, Schema, SplitSpec,
};
use fairprobe::discovery::{enumerate_dags, Cpdag};
use fairprobe::fairness::{group_rates_from, TprDenominator};
use fairprobe::hp::{top4_rank_check, ImportanceVector};
use fairprobe::interventions::{select_features, Intervention};
use fairprobe::report::scott_knott;
use proptest::prelude::*;

fn three_col() -> Arc<Schema> {
    schema(
        &[
            ("S", FeatureKind::Boolean),
            ("X", FeatureKind::Continuous),
            ("K", FeatureKind::Count),
        ],
        "S",
        "Y",
    )
}

prop_compose! {
    fn dataset(min_n: usize, max_n: usize)(rows in prop::collection::vec(
        (any::<bool>(), -1e6f64..1e6, 0u32..500, any::<bool>()), min_n..max_n)) -> Dataset {
        let (r, y): (Vec<Vec<f64>>, Vec<u8>) = rows
            .into_iter()
            .map(|(s, x, k, y)| (vec![s as u8 as f64, x, k as f64], y as u8))
            .unzip();
        Dataset::new(three_col(), r, y).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_roundtrip_is_exact(d in dataset(1, 60)) {
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &d).unwrap();
        let back = read_csv(buf.as_slice(), three_col()).unwrap();
        prop_assert_eq!(back.values(), d.values());
        prop_assert_eq!(back.labels(), d.labels());
    }

    #[test]
    fn split_partitions_rows(d in dataset(10, 80), seed in any::<u64>()) {
        let s = split(&d, &SplitSpec::with_seed(seed)).unwrap();
        let mut all: Vec<usize> = s.indices.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..d.n()).collect::<Vec<_>>());
        for (part, idx) in [&s.train, &s.validation, &s.test].into_iter().zip(&s.indices) {
            prop_assert_eq!(part.n(), idx.len());
            for (k, &i) in idx.iter().enumerate() {
                prop_assert_eq!(part.row(k), d.row(i));
            }
        }
    }

    #[test]
    fn standardize_inverts(d in dataset(2, 40)) {
        let (z, params) = standardize(&d);
        let back = params.inverse(&z).unwrap();
        for (a, b) in back.values().iter().zip(d.values()) {
            prop_assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0));
        }
    }

    #[test]
    fn eod_matches_counting(rows in prop::collection::vec((0u8..2, 0u8..2, 0u8..2), 1..200)) {
        let labels: Vec<u8> = rows.iter().map(|r| r.0).collect();
        let preds: Vec<u8> = rows.iter().map(|r| r.1).collect();
        let groups: Vec<u8> = rows.iter().map(|r| r.2).collect();
        let tpr = |g: u8| {
            let pos = rows.iter().filter(|r| r.2 == g && r.0 == 1).count();
            let tp = rows.iter().filter(|r| r.2 == g && r.0 == 1 && r.1 == 1).count();
            (pos > 0).then(|| tp as f64 / pos as f64)
        };
        match (tpr(0), tpr(1), group_rates_from(&labels, &preds, &groups, TprDenominator::Positives)) {
            (Some(a), Some(b), Ok(r)) => prop_assert_eq!(r.eod, (b - a).abs()),
            (Some(_), Some(_), Err(e)) => prop_assert!(false, "unexpected error {e}"),
            (_, _, r) => prop_assert!(r.is_err()),
        }
    }

    #[test]
    fn top4_check_is_symmetric(a in Just(hp_names()).prop_shuffle(), b in Just(hp_names()).prop_shuffle()) {
        let va = ImportanceVector::from_ranking(&a);
        let vb = ImportanceVector::from_ranking(&b);
        prop_assert_eq!(top4_rank_check(&va, &vb).violated, top4_rank_check(&vb, &va).violated);
        prop_assert!(!top4_rank_check(&va, &va).violated);
    }

    #[test]
    fn scott_knott_ignores_group_order(
        means in prop::collection::vec(-5.0f64..5.0, 2..6),
        shift in 0usize..6,
    ) {
        let groups: Vec<(String, Vec<f64>)> = means
            .iter()
            .enumerate()
            .map(|(i, m)| (format!("g{i}"), (0..12).map(|k| m + (k as f64 - 5.5) * 0.05).collect()))
            .collect();
        let mut rotated = groups.clone();
        rotated.rotate_left(shift % groups.len());
        prop_assert_eq!(scott_knott(&groups, 0.05).unwrap(), scott_knott(&rotated, 0.05).unwrap());
    }
}

fn hp_names() -> Vec<String> {
    (0..8).map(|i| format!("h{i}")).collect()
}

#[test]
fn kbest_selections_are_nested() {
    let d = multi_feature(2000, 8);
    let mut prev: Vec<String> = Vec::new();
    for k in 1..=d.d() {
        let sel = select_features(&d, &Intervention::SelectKBest { k: Some(k) }).unwrap();
        assert_eq!(sel.features.len(), k);
        assert!(prev.iter().all(|f| sel.features.contains(f)));
        prev = sel.features;
    }
}

#[test]
fn enumeration_matches_brute_force_on_all_skeletons() {
    // Undirected skeletons on 4 nodes: the class of a fully undirected CPDAG
    // is every acyclic orientation without a v-structure.
    let names: Vec<String> = (0..4).map(|i| format!("V{i}")).collect();
    let pairs: Vec<(usize, usize)> = (0..4)
        .flat_map(|a| (a + 1..4).map(move |b| (a, b)))
        .collect();
    for mask in 0u32..1 << pairs.len() {
        let und: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let g = Cpdag::new(names.clone(), [], und.iter().copied()).unwrap();
        // A chordless cycle has no extension; brute force must find none either.
        let found = enumerate_dags(&g).map(|d| d.len()).unwrap_or(0);
        let mut count = 0;
        for o in 0u32..1 << und.len() {
            let edges: Vec<(usize, usize)> = und
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| if o >> k & 1 == 0 { (a, b) } else { (b, a) })
                .collect();
            if let Ok(d) = fairprobe::discovery::Dag::new(names.clone(), edges.iter().copied()) {
                if d.v_structures().is_empty() {
                    count += 1;
                }
            }
        }
        assert_eq!(found, count, "skeleton {und:?}");
    }
}
