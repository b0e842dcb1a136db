use std::collections::BTreeSet;

use linecast::bounds::ceil_log2;
use linecast::json::ScheduleDoc;
use linecast::oracle::optimal_cost;
use linecast::procedures::{from_level, to_level};
use linecast::{lbckt, Algorithm, CompleteKTree, Coverage, VertexRef};
use proptest::prelude::*;

// (k, r) pairs small enough to run every algorithm quickly.
fn small_tree() -> impl Strategy<Value = CompleteKTree> {
    (2u64..=6, 1u32..=4)
        .prop_filter("at most a few hundred vertices", |&(k, r)| {
            CompleteKTree::new(k, r).is_ok_and(|t| t.n() <= 400)
        })
        .prop_map(|(k, r)| CompleteKTree::new(k, r).unwrap())
}

fn tree_and_vertex() -> impl Strategy<Value = (CompleteKTree, VertexRef)> {
    small_tree().prop_flat_map(|t| {
        let n = t.n();
        (Just(t), 1..=n).prop_map(|(t, id)| {
            let v = t.vertex_by_id(id).unwrap();
            (t, v)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_algorithm_informs_everyone((tree, u) in tree_and_vertex()) {
        for a in Algorithm::ALL {
            let s = a.run(&tree, u);
            let report = s.validate(None);
            prop_assert!(report.ok, "{a} k={} r={} u={}: {:?}", tree.k(), tree.r(), u.id(), report.violations);
            prop_assert!(s.total_cost() >= tree.n() - 1);
        }
    }

    #[test]
    fn dispatcher_meets_the_deadline_from_the_root(tree in small_tree()) {
        let (s, case) = lbckt(&tree, tree.root());
        let report = s.validate(None);
        prop_assert!(report.ok);
        // the only overrun allowed is one flagged extra step
        if s.total_time() > case.time_limit {
            prop_assert_eq!(s.total_time(), case.time_limit + 1);
            prop_assert!(s.deviations().iter().any(|d| d.adds_time()));
        }
    }

    #[test]
    fn level_broadcast_doubles((tree, u) in tree_and_vertex(), pick in 0u32..4) {
        let j = 1 + pick % tree.r();
        let frag = to_level(&tree, j, u, 1).unwrap();
        let s = frag.to_schedule(&tree, u, "tolevel");
        let mut target: BTreeSet<u64> = tree.level_vertices(j).unwrap().iter().map(|v| v.id()).collect();
        target.insert(u.id());
        let size = target.len() as u64;
        let report = s.validate_with(Some(ceil_log2(u128::from(size))), Coverage::Exactly(&target));
        prop_assert!(report.ok, "{:?}", report.violations);
        for &(t, count) in &report.informed_timeline {
            prop_assert_eq!(count, size.min(1 << t));
        }
    }

    #[test]
    fn upcalls_reach_everything_above(tree in small_tree(), pick in 0u32..4) {
        let j = 1 + pick % tree.r();
        let mut informed: BTreeSet<u64> = tree.level_vertices(j).unwrap().iter().map(|v| v.id()).collect();
        informed.insert(1);
        let up = from_level(&tree, j, 1, &informed).unwrap();
        prop_assert_eq!(up.steps.len(), 1);
        let above: u64 = (0..j).map(|l| tree.level_size(l)).sum();
        prop_assert_eq!(up.steps[0].calls.len() as u64, above - 1);
        for c in &up.steps[0].calls {
            prop_assert_eq!(c.source().level(), j);
            prop_assert!(c.dest().level() < j);
        }
    }

    #[test]
    fn json_round_trip((tree, u) in tree_and_vertex(), which in 0usize..3) {
        let s = Algorithm::ALL[which].run(&tree, u);
        let report = s.validate(None);
        let text = ScheduleDoc::new(&s, report.ok).to_json();
        let back = ScheduleDoc::from_json(&text).unwrap().to_schedule().unwrap();
        let ok = report.ok;
        prop_assert_eq!(back.validate(None), report);
        prop_assert_eq!(ScheduleDoc::new(&back, ok).to_json(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn optimum_falls_as_the_budget_grows(k in 2u64..=3, id in 1u64..=4, extra in 0u32..3) {
        let tree = CompleteKTree::new(k, 1).unwrap();
        let u = tree.vertex_by_id(id.min(tree.n())).unwrap();
        let tight = optimal_cost(&tree, u, None).unwrap();
        let loose = optimal_cost(&tree, u, Some(tight.time_budget + extra)).unwrap();
        prop_assert!(loose.cost <= tight.cost);
        prop_assert!(loose.cost >= tree.n() - 1);
    }
}
