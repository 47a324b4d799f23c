mod common;

use common::{demand, golden_params, nsfnet, six_node, topo};
use eon_rsa::planner::{sa_select, BlockReason};
use eon_rsa::net::candidate_paths;
use eon_rsa::{
    generate_demands, run_plan, Assignment, DemandOrder, ImpairmentParams, PlanSettings, Policy, RhoSpec,
    SpectrumState, StateDump,
};

fn settings(slots: usize, k: usize, ordering: DemandOrder, policy: Policy, impairments: bool) -> PlanSettings {
    PlanSettings { slots, k_paths: k, ordering, policy, impairments, ..Default::default() }
}

#[test]
fn lone_demand_takes_rank_one_at_slot_one() {
    let t = six_node();
    let d = vec![demand(&t, 0, "1", "4", 5)];
    let r = run_plan(&t, &d, &ImpairmentParams::default(), &PlanSettings::default()).unwrap();
    let o = &r.outcomes[0];
    assert_eq!(o.path_rank, Some(1));
    assert_eq!(o.first_slot, Some(1));
    assert!(r.all_assigned());
}

// Three demands drop at A on slots 1..=5. The A->B demand sees crosstalk
// at A on every start slot up to 5 and is admitted at 6.
#[test]
fn admission_skips_positions_with_crosstalk() {
    let t = topo(
        &["A", "B", "C", "D", "E"],
        &[("A", "B", 90.0), ("C", "A", 80.0), ("D", "A", 70.0), ("E", "A", 60.0)],
    );
    let params = ImpairmentParams { guard_slots_per_wss: 0, ..golden_params() };
    let d = vec![
        demand(&t, 0, "C", "A", 5),
        demand(&t, 1, "D", "A", 5),
        demand(&t, 2, "E", "A", 5),
        demand(&t, 3, "A", "B", 5),
    ];
    let s = settings(20, 1, DemandOrder::Msf, Policy::Proposed, true);
    let r = run_plan(&t, &d, &params, &s).unwrap();
    let last = r.outcomes.iter().find(|o| o.demand == 3).unwrap();
    assert_eq!(last.first_slot, Some(6));
    assert_eq!(last.path_rank, Some(1));
    for o in r.outcomes.iter().filter(|o| o.demand != 3) {
        assert_eq!(o.first_slot, Some(1));
    }

    // Without the SINR check the first free position wins.
    let off = run_plan(&t, &d, &params, &PlanSettings { impairments: false, ..s }).unwrap();
    assert_eq!(off.outcomes.iter().find(|o| o.demand == 3).unwrap().first_slot, Some(1));
    assert!(off.final_sinr_violations >= 1);
}

#[test]
fn oversized_demand_is_blocked() {
    let t = six_node();
    let d = vec![demand(&t, 0, "1", "2", 11), demand(&t, 1, "2", "3", 4)];
    let r = run_plan(&t, &d, &ImpairmentParams::default(), &settings(10, 3, DemandOrder::Msf, Policy::Proposed, true))
        .unwrap();
    let big = r.outcomes.iter().find(|o| o.demand == 0).unwrap();
    assert_eq!(big.blocked, Some(BlockReason::WidthExceedsCapacity));
    assert_eq!(r.metrics.blocked_count, 1);
    assert!(r.state.blocked().contains(&0));
    assert!(r.outcomes.iter().find(|o| o.demand == 1).unwrap().is_assigned());
}

#[test]
fn full_link_blocks_with_no_spectrum() {
    let t = topo(&["A", "B"], &[("A", "B", 50.0)]);
    let d = vec![demand(&t, 0, "A", "B", 6), demand(&t, 1, "A", "B", 6)];
    let r = run_plan(&t, &d, &ImpairmentParams::default(), &settings(10, 3, DemandOrder::Msf, Policy::Proposed, true))
        .unwrap();
    assert_eq!(r.outcomes[1].blocked, Some(BlockReason::NoSpectrum));
    assert!((r.metrics.blocking_probability - 0.5).abs() < 1e-12);
}

#[test]
fn empty_demand_set() {
    let t = six_node();
    let r = run_plan(&t, &[], &ImpairmentParams::default(), &PlanSettings::default()).unwrap();
    assert!(r.outcomes.is_empty());
    assert_eq!(r.objective, 0.0);
    assert_eq!(r.metrics.dbp, 0.0);
    assert_eq!(r.metrics.ms, 0);
}

#[test]
fn identical_runs_are_byte_identical() {
    let t = nsfnet();
    let d = generate_demands(&t, 30, RhoSpec::Uniform { min: 1, max: 5 }, 11).unwrap();
    for policy in Policy::ALL {
        let s = settings(40, 3, DemandOrder::Mcdf, policy, true);
        let a = run_plan(&t, &d, &ImpairmentParams::default(), &s).unwrap();
        let b = run_plan(&t, &d, &ImpairmentParams::default(), &s).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn dbp_only_uses_shortest_path_on_empty_network() {
    let t = six_node();
    let d = generate_demands(&t, 1, RhoSpec::Fixed(3), 5).unwrap();
    let r = run_plan(&t, &d, &ImpairmentParams::default(), &settings(40, 3, DemandOrder::Msf, Policy::DbpOnly, true))
        .unwrap();
    assert_eq!(r.outcomes[0].path_rank, Some(1));
}

#[test]
fn proposed_prefers_unloaded_path() {
    // Square A-B-C-D-A: A->C has two equal 2-hop routes.
    let t = topo(
        &["A", "B", "C", "D"],
        &[("A", "B", 100.0), ("B", "C", 100.0), ("C", "D", 100.0), ("D", "A", 100.0)],
    );
    let mut state = SpectrumState::new(t.link_count(), t.node_count(), 20);
    let load = demand(&t, 9, "A", "B", 3);
    let lp = candidate_paths(&t, &load, 1, 100.0).remove(0);
    state.occupy(Assignment { demand: load, path: lp, first_slot: 1, width: 3 }).unwrap();

    let probe = demand(&t, 0, "A", "C", 2);
    let paths = candidate_paths(&t, &probe, 2, 100.0);
    let ranked = sa_select(&paths, &state, &t);
    assert!(!ranked[0].nodes.contains(&t.node_id("B").unwrap()));

    // Zero load: ties fall back to rank order.
    let empty = SpectrumState::new(t.link_count(), t.node_count(), 20);
    let ranked = sa_select(&paths, &empty, &t);
    assert_eq!(ranked.iter().map(|p| p.rank).collect::<Vec<_>>(), vec![1, 2]);
}

#[test]
fn every_policy_produces_a_sound_plan() {
    for (t, n) in [(six_node(), 20), (nsfnet(), 40)] {
        let d = generate_demands(&t, 25, RhoSpec::Uniform { min: 1, max: 5 }, 3).unwrap();
        for ordering in DemandOrder::ALL {
            for policy in Policy::ALL {
                for imp in [true, false] {
                    let r = run_plan(&t, &d, &ImpairmentParams::default(), &settings(n, 3, ordering, policy, imp))
                        .unwrap();
                    let dump = StateDump::from_state(&t, &r.state);
                    let rep = eon_rsa::validate_plan(&dump, &ImpairmentParams::default()).unwrap();
                    assert!(rep.violations.is_empty(), "{ordering} {policy} {imp}: {:?}", rep.violations);
                    assert_eq!(rep.occupancy_mismatches, 0);
                    assert_eq!(r.assigned_count() + r.metrics.blocked_count, d.len());
                    if imp {
                        for o in r.outcomes.iter().filter(|o| o.is_assigned()) {
                            assert!(o.admission_sinr.as_ref().unwrap().sinr >= ImpairmentParams::default().sinr_threshold);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn processing_order_ignores_impairment_mode() {
    let t = nsfnet();
    let params = ImpairmentParams::default();
    for seed in 0..5 {
        let d = generate_demands(&t, 60, RhoSpec::Fixed(5), seed).unwrap();
        let on = run_plan(&t, &d, &params, &settings(40, 3, DemandOrder::Mcdf, Policy::Proposed, true)).unwrap();
        let off = run_plan(&t, &d, &params, &settings(40, 3, DemandOrder::Mcdf, Policy::Proposed, false)).unwrap();
        assert_eq!(on.processing_order, off.processing_order);
    }
}
