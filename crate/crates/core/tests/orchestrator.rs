mod common;

use crewpair::lp::{solve_lp, CoverColumn, SetCoverInstance};
use crewpair::netgen::{generate_network, NetGenConfig};
use crewpair::network::{CostRules, FlightNetwork, FlightSpec, LegalityRules};
use crewpair::orchestrator::{initial_solution, run, LearningSchedule, RunConfig, RunTrace};
use crewpair::pairing::PairingEngine;

fn small_network(seed: u64) -> FlightNetwork {
    let cfg = NetGenConfig {
        num_hubs: 2,
        num_spokes: 4,
        num_bases: 1,
        flights_per_day: 30,
        num_days: 1,
        seed,
        ..Default::default()
    };
    generate_network(&cfg, &LegalityRules::default(), &CostRules::default())
        .unwrap()
        .network
}

fn check_trace(t: &RunTrace) {
    for w in t.iterations.windows(2) {
        if w[0].loop_index == w[1].loop_index {
            assert!(
                w[1].lp_cost <= w[0].lp_cost * (1.0 + 1e-9),
                "LP rose from {} to {}",
                w[0].lp_cost,
                w[1].lp_cost
            );
        }
    }
    for l in &t.loops {
        assert!(l.ip_cost >= l.root_lp * (1.0 - 1e-9));
    }
}

/// LP optimum over every legal pairing, with the same artificial columns the
/// run starts from.
fn full_enumeration_lp(net: &FlightNetwork, rules: &LegalityRules, costs: &CostRules) -> f64 {
    let engine = PairingEngine::new(net, *rules, *costs);
    let all: Vec<usize> = (0..net.len()).collect();
    let mut cols: Vec<CoverColumn> = engine
        .enumerate_pairings(&all)
        .iter()
        .map(|p| CoverColumn::new(p.flight_sequence(), p.cost()))
        .collect();
    let init = initial_solution(&engine, usize::MAX);
    cols.extend(
        init.columns
            .iter()
            .filter(|c| c.artificial)
            .map(|c| CoverColumn::new(c.flights.clone(), c.cost)),
    );
    solve_lp(&SetCoverInstance::new(net.len(), cols)).unwrap().cost
}

fn toy_config(learning: bool, seed: u64) -> RunConfig {
    RunConfig {
        learning_enabled: learning,
        schedule: LearningSchedule::Fixed {
            iterations: (2..200).step_by(2).collect(),
        },
        cg_max_iters: 500,
        cg_patience: 500,
        param1: Some(4),
        max_columns: 3,
        seed,
        ..Default::default()
    }
}

#[test]
fn toy_runs_reach_the_full_enumeration_lp() {
    let rules = LegalityRules::default();
    let costs = CostRules::default();
    let mut learnt = 0;
    for seed in 0..6 {
        let net = common::random_network(12, seed);
        let reference = full_enumeration_lp(&net, &rules, &costs);
        for learning in [true, false] {
            let t = run(&net, &rules, &costs, &toy_config(learning, seed)).unwrap();
            check_trace(&t);
            learnt += t.learning.len();
            let lp = t.loops[0].lp_cost;
            assert!(
                (lp - reference).abs() <= 1e-6 * reference.abs(),
                "seed {seed} learning {learning}: {lp} vs {reference}"
            );
        }
    }
    assert!(learnt > 0);
}

#[test]
fn zero_reopt_loops_means_one_loop() {
    let net = small_network(1);
    let cfg = RunConfig {
        reopt_max_loops: 0,
        learning_enabled: false,
        ..Default::default()
    };
    let t = run(&net, &LegalityRules::default(), &CostRules::default(), &cfg).unwrap();
    assert_eq!(t.loops.len(), 1);
    check_trace(&t);
}

#[test]
fn integral_instance_stops_after_first_loop() {
    // Two disjoint out-and-backs: the LP optimum is already integral.
    let specs = [
        FlightSpec {
            origin: "A".into(),
            destination: "X".into(),
            dep: 600,
            arr: 700,
        },
        FlightSpec {
            origin: "X".into(),
            destination: "A".into(),
            dep: 760,
            arr: 860,
        },
        FlightSpec {
            origin: "A".into(),
            destination: "Y".into(),
            dep: 620,
            arr: 720,
        },
        FlightSpec {
            origin: "Y".into(),
            destination: "A".into(),
            dep: 800,
            arr: 900,
        },
    ];
    let net = FlightNetwork::new(&specs, &["A".to_string()]).unwrap();
    let cfg = RunConfig {
        learning_enabled: false,
        param1: Some(2),
        ..Default::default()
    };
    let t = run(&net, &LegalityRules::default(), &CostRules::default(), &cfg).unwrap();
    assert_eq!(t.loops.len(), 1);
    assert_eq!(t.loops[0].ip_cost, t.loops[0].root_lp);
    assert_eq!(t.loops[0].artificial_selected, 0);
}

#[test]
fn paired_runs_share_the_initial_solution_and_repeat_exactly() {
    let net = small_network(3);
    let rules = LegalityRules::default();
    let costs = CostRules::default();
    let with = RunConfig {
        seed: 11,
        cg_patience: 10,
        schedule: LearningSchedule::Fixed {
            iterations: vec![2, 3, 4],
        },
        ..Default::default()
    };
    let without = RunConfig {
        learning_enabled: false,
        ..with.clone()
    };
    let a = run(&net, &rules, &costs, &with).unwrap();
    let b = run(&net, &rules, &costs, &without).unwrap();
    assert_eq!(a.initial_cost, b.initial_cost);
    assert!(!a.learning.is_empty());
    assert!(b.learning.is_empty());
    assert!(b.iterations.iter().all(|r| !r.learnt && r.roc.is_none()));

    let again = run(&net, &rules, &costs, &with).unwrap();
    let costs_of = |t: &RunTrace| t.iterations.iter().map(|r| r.lp_cost).collect::<Vec<_>>();
    assert_eq!(costs_of(&a), costs_of(&again));
    assert_eq!(a.final_cost(), again.final_cost());
    for l in a.loops.iter().chain(&b.loops) {
        assert_eq!(l.artificial_selected, 0);
    }
}

#[test]
fn generated_runs_are_monotone() {
    let rules = LegalityRules::default();
    let costs = CostRules::default();
    for seed in 0..3 {
        let net = small_network(seed);
        let t = run(
            &net,
            &rules,
            &costs,
            &RunConfig {
                seed,
                cg_patience: 10,
                ..Default::default()
            },
        )
        .unwrap();
        check_trace(&t);
        assert_eq!(t.final_cost(), t.loops.last().unwrap().ip_cost);
        assert!(t.final_cost() <= t.initial_cost);
    }
}

#[test]
fn trace_csv_has_one_row_per_iteration_and_phase() {
    let net = small_network(2);
    let t = run(
        &net,
        &LegalityRules::default(),
        &CostRules::default(),
        &RunConfig {
            cg_patience: 10,
            ..Default::default()
        },
    )
    .unwrap();
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iteration,phase,cost,columns_added,learnt_flag,roc");
    assert!(lines[1].starts_with("0,init,"));
    assert_eq!(lines.len(), 2 + t.iterations.len() + t.loops.len());
    assert!(lines.last().unwrap().contains("-ip,"));
    let learnt_rows = lines
        .iter()
        .filter(|l| l.contains("-cg,") && l.split(',').nth(4) == Some("1"))
        .count();
    assert_eq!(learnt_rows, t.learning.len());
}
