mod common;

use common::*;
use fairprobe::data::{split, SplitSpec};
use fairprobe::discovery::DiscoveryAlgorithm;
use fairprobe::fairness::{group_rates_from, TprDenominator};
use fairprobe::interventions::Intervention;
use fairprobe::learners::{train, HpConfig, LearnerKind, ParamConfig};
use fairprobe::search::{
    eval_property, search, PropertySpec, SearchFlag, SearchOptions, VerdictStatus,
};

fn drop_sens(d: &fairprobe::data::Dataset) -> PropertySpec {
    PropertySpec::new(
        Intervention::DropSens,
        LearnerKind::LogisticRegression,
        d.schema(),
    )
}

#[test]
fn same_seed_same_verdict() {
    let input = planted(2000, 3);
    let prop = drop_sens(&input);
    let opts = SearchOptions {
        seed: 5,
        ..SearchOptions::default()
    };
    let a = search(&input, &prop, DiscoveryAlgorithm::Pc, &opts).unwrap();
    let b = search(&input, &prop, DiscoveryAlgorithm::Pc, &opts).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn diff_history_is_a_running_maximum() {
    let input = multi_feature(2000, 5);
    let prop = PropertySpec::new(
        Intervention::SelectKBest { k: None },
        LearnerKind::LogisticRegression,
        input.schema(),
    );
    let opts = SearchOptions {
        seed: 2,
        n_posterior_models: 30,
        ..SearchOptions::default()
    };
    let v = search(&input, &prop, DiscoveryAlgorithm::Ges, &opts).unwrap();
    assert!(v.diff_history.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(
        v.diff_history.last().copied().unwrap_or(0.0),
        v.max_observed_eod_diff
    );
    assert_eq!(v.witness.is_some(), v.status == VerdictStatus::Violation);
    if let Some(w) = &v.witness {
        assert!(w.side_a.eval.prop.holds && !w.side_b.eval.prop.holds);
        assert!(w.side_a.eval.prop.perf_ok && w.side_b.eval.prop.perf_ok);
    }
}

#[test]
fn single_dag_class_searches_weights_only() {
    let input = null_fixture(2000, 4);
    let prop = drop_sens(&input);
    let v = search(
        &input,
        &prop,
        DiscoveryAlgorithm::Pc,
        &SearchOptions::default(),
    )
    .unwrap();
    assert_eq!(v.n_dags, 1);
    assert!(v.flags.contains(&SearchFlag::WeightsOnlyNeighborhood));
    assert_eq!(v.status, VerdictStatus::RobustWithinBudget);
}

#[test]
fn property_matches_two_direct_trainings() {
    let d = planted(3000, 11);
    let s = split(&d, &SplitSpec::with_seed(4)).unwrap();
    let e = eval_property(&drop_sens(&d), &s.train, &s.test, 9).unwrap();
    let eod = |features: Vec<String>| {
        let cfg = ParamConfig {
            hp: HpConfig::default_for(LearnerKind::LogisticRegression),
            features,
        };
        let preds = train(&cfg, &s.train, 9)
            .unwrap()
            .predict(&s.test)
            .unwrap()
            .labels;
        group_rates_from(
            s.test.labels(),
            &preds,
            &s.test.groups(),
            TprDenominator::Positives,
        )
        .unwrap()
        .eod
    };
    let base = eod(vec!["S".into(), "M".into()]);
    let treated = eod(vec!["M".into()]);
    assert_eq!(e.eod_base, base);
    assert_eq!(e.eod_treated, treated);
    assert_eq!(e.holds, base > treated);
}
