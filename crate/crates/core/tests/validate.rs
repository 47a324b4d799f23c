mod common;

use common::six_node;
use eon_rsa::validate::ViolationKind;
use eon_rsa::{
    generate_demands, run_plan, validate_plan, DemandOrder, Error, ImpairmentParams, PlanSettings, Policy, RhoSpec,
    StateDump,
};

fn planned_dump(impairments: bool, seed: u64) -> StateDump {
    let t = six_node();
    let d = generate_demands(&t, 10, RhoSpec::Uniform { min: 1, max: 5 }, seed).unwrap();
    let s = PlanSettings { slots: 20, impairments, ordering: DemandOrder::Mcdf, policy: Policy::Proposed, ..Default::default() };
    let r = run_plan(&t, &d, &ImpairmentParams::default(), &s).unwrap();
    StateDump::from_state(&t, &r.state)
}

/// Indices of two assignments that share a directed hop.
fn sharing_pair(dump: &StateDump) -> (usize, usize) {
    let hops = |i: usize| -> Vec<(String, String)> {
        dump.assignments[i].path.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
    };
    for i in 0..dump.assignments.len() {
        for j in i + 1..dump.assignments.len() {
            if hops(i).iter().any(|h| hops(j).contains(h)) {
                return (i, j);
            }
        }
    }
    panic!("fixture has no shared hop");
}

#[test]
fn planner_dump_is_clean_after_round_trip() {
    let dump = planned_dump(true, 4);
    let text = serde_json::to_string_pretty(&dump).unwrap();
    let back = StateDump::from_json(&text).unwrap();
    assert_eq!(back, dump);
    let rep = validate_plan(&back, &ImpairmentParams::default()).unwrap();
    assert!(rep.is_sound());
    assert!(rep.sinr_checked);
    assert_eq!(rep.assigned, dump.assignments.len());
}

#[test]
fn injected_overlap_is_flagged_once() {
    for seed in 0..5 {
        let mut dump = planned_dump(false, seed);
        let (i, j) = sharing_pair(&dump);
        let target = dump.assignments[i].first_slot;
        let a = &mut dump.assignments[j];
        a.first_slot = target;
        if a.first_slot + a.width - 1 > dump.slots {
            continue;
        }
        let (di, dj) = (dump.assignments[i].demand, dump.assignments[j].demand);
        // Keep every other pair disjoint so only the injected clash remains.
        let others_clash = dump.assignments.iter().enumerate().any(|(k, b)| {
            k != i && k != j && {
                let a = &dump.assignments[j];
                let hk: Vec<_> = b.path.windows(2).collect();
                let shares = a.path.windows(2).any(|h| hk.contains(&h));
                shares && !(a.first_slot + a.width <= b.first_slot || b.first_slot + b.width <= a.first_slot)
            }
        });
        if others_clash {
            continue;
        }
        let rep = validate_plan(&dump, &ImpairmentParams::default()).unwrap();
        assert_eq!(rep.violations.len(), 1, "{:?}", rep.violations);
        assert_eq!(rep.violations[0].kind, ViolationKind::Overlap);
        let mut pair = rep.violations[0].demands.clone();
        pair.sort();
        let mut want = vec![di, dj];
        want.sort();
        assert_eq!(pair, want);
        assert!(!rep.sinr_checked);
        assert!(rep.occupancy_mismatches > 0);
        return;
    }
    panic!("no seed produced a clean single-overlap fixture");
}

#[test]
fn each_corruption_kind_is_detected() {
    let base = planned_dump(true, 2);
    let params = ImpairmentParams::default();

    let mut d = base.clone();
    d.assignments[0].first_slot = d.slots;
    d.assignments[0].width = 2;
    assert_eq!(validate_plan(&d, &params).unwrap().count(ViolationKind::Capacity), 1);

    let mut d = base.clone();
    let hops = d.assignments[0].path.len() - 1;
    let f = d.assignments[0].first_slot;
    let mut per = vec![f; hops];
    per[0] = f + 1;
    d.assignments[0].link_first_slots = Some(per);
    assert_eq!(validate_plan(&d, &params).unwrap().count(ViolationKind::Continuity), 1);

    let mut d = base.clone();
    d.assignments[0].width = d.assignments[0].rho - 1;
    assert_eq!(validate_plan(&d, &params).unwrap().count(ViolationKind::Contiguity), 1);

    let mut d = base.clone();
    d.assignments.push(d.assignments[0].clone());
    assert_eq!(validate_plan(&d, &params).unwrap().count(ViolationKind::Duplicate), 1);

    let mut d = base.clone();
    d.assignments[0].path.reverse();
    assert_eq!(validate_plan(&d, &params).unwrap().count(ViolationKind::Route), 1);
}

#[test]
fn malformed_dumps_are_errors() {
    assert!(matches!(StateDump::from_json("{"), Err(Error::Dump(_))));
    let mut v = serde_json::to_value(planned_dump(true, 1)).unwrap();
    v["schema"] = "something/else".into();
    assert!(matches!(StateDump::from_json(&v.to_string()), Err(Error::Dump(_))));
    let mut v = serde_json::to_value(planned_dump(true, 1)).unwrap();
    v["surprise"] = 1.into();
    assert!(StateDump::from_json(&v.to_string()).is_err());
}

#[test]
fn impairment_free_plans_are_rechecked_for_sinr() {
    let params = ImpairmentParams::default();
    let mut total = 0usize;
    for seed in 0..10 {
        let rep = validate_plan(&planned_dump(false, seed), &params).unwrap();
        assert!(rep.violations.is_empty());
        assert!(rep.sinr_checked);
        assert_eq!(rep.sinr_violations, rep.sinr.iter().filter(|s| !s.meets_threshold).count());
        total += rep.sinr_violations;
    }
    assert!(total > 0);
}
