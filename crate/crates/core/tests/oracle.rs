mod common;

use causalprobe::engine::{find_minimal_ablation_sets, GraphProbe, SearchMode};

#[test]
fn exhaustive_search_matches_brute_force() {
    for seed in 0..50 {
        let scm = common::random_scm(seed, 8);
        let probe = GraphProbe::new(&scm.graph, &scm.context, &scm.candidates, &scm.effect, &[]).unwrap();
        let k_max = scm.candidates.len();
        let report = find_minimal_ablation_sets(&probe, 0.5, k_max, SearchMode::Exhaustive).unwrap();
        let mut got: Vec<Vec<String>> = report.minimal_sets.iter().map(|s| s.members.clone()).collect();
        got.sort();
        assert_eq!(got, common::naive_minimal_sets(&scm, 0.5, k_max), "seed {seed}");
    }
}

#[test]
fn greedy_sets_qualify() {
    for seed in 100..130 {
        let scm = common::random_scm(seed, 6);
        let probe = GraphProbe::new(&scm.graph, &scm.context, &scm.candidates, &scm.effect, &[]).unwrap();
        let report = find_minimal_ablation_sets(&probe, 0.5, 3, SearchMode::Greedy).unwrap();
        for s in &report.minimal_sets {
            assert!(s.effect_delta.abs() > 0.5);
            assert!(s.members.len() <= 3);
        }
    }
}
