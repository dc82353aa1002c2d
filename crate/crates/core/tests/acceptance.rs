//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the lines always show up.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{
    bool_grid, gradient_check, history_of, oracle_columns, planted_communities, random_cover, random_history,
    random_network, raw_bases, raw_flights, raw_rules, to_grid,
};
use crewpair::combiner::{learnt_budget, select_flights, CombinerConfig};
use crewpair::experiment::{run_experiment, ExperimentConfig, RunSelection};
use crewpair::features::{
    assemble_features, enhanced_degrees, enhanced_dual, enhanced_primal, strict_upper_pairs, superimpose,
    AdjacencyMatrix, Normalization,
};
use crewpair::lp::{solve_ip, solve_lp, CoverColumn, SetCoverInstance, DEFAULT_NODE_BUDGET};
use crewpair::netgen::{generate_network, NetGenConfig};
use crewpair::network::{CostRules, FlightNetwork, LegalityRules};
use crewpair::orchestrator::{initial_solution, run, LearningSchedule, RunConfig};
use crewpair::pairing::PairingEngine;
use crewpair::vgae::{train, PredictionSet, VgaeConfig};
use crewpair_oracle::cover::{ip_exhaustive, lp_vertex_optimum};
use crewpair_oracle::crew::all_pairings;
use crewpair_oracle::graph;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

fn desk_config() -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    ExperimentConfig::load(&path).expect("desk config")
}

const COVER_SEEDS: u64 = 30;

fn lp_oracle() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for seed in 0..COVER_SEEDS {
        let inst = random_cover(seed);
        let lp = solve_lp(&inst).unwrap();
        let reference = lp_vertex_optimum(inst.num_flights, &oracle_columns(&inst)).unwrap();
        let y = lp.duals.values();
        let dual_feasible = y.iter().all(|&v| v >= -1e-9)
            && inst
                .columns
                .iter()
                .all(|c| c.rows.iter().map(|&r| y[r]).sum::<f64>() <= c.cost + 1e-7);
        if !rel_close(lp.cost, reference, 1e-6) || !rel_close(lp.duals.sum(), lp.cost, 1e-6) || !dual_feasible {
            bad.push(seed);
        }
    }
    let t = start.elapsed();
    Outcome::new(
        bad.is_empty() && within(t, 10),
        format!("{COVER_SEEDS} instances, mismatches {bad:?}, {:.2}s", t.as_secs_f64()),
    )
}

fn ip_oracle() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for seed in 0..COVER_SEEDS {
        let inst = random_cover(seed);
        let ip = solve_ip(&inst, DEFAULT_NODE_BUDGET).unwrap();
        let (best, _) = ip_exhaustive(inst.num_flights, &oracle_columns(&inst)).unwrap();
        if ip.cost != best || !ip.proven {
            bad.push(seed);
        }
    }
    let t = start.elapsed();
    Outcome::new(
        bad.is_empty() && within(t, 30),
        format!("{COVER_SEEDS} instances, mismatches {bad:?}, {:.2}s", t.as_secs_f64()),
    )
}

fn enumeration_oracle() -> Outcome {
    let mut bad = Vec::new();
    let mut total = 0;
    for seed in 0..12 {
        let net = random_network(12, seed);
        let rules = LegalityRules::default();
        let engine = PairingEngine::new(&net, rules, CostRules::default());
        let all: Vec<usize> = (0..net.len()).collect();
        let got: Vec<Vec<usize>> = engine
            .enumerate_pairings(&all)
            .iter()
            .map(|p| p.flight_sequence())
            .collect();
        let want = all_pairings(&raw_flights(&net), &all, &raw_bases(&net), &raw_rules(&rules));
        total += want.len();
        if got != want {
            bad.push(seed);
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!("12 networks, {total} pairings, mismatches {bad:?}"),
    )
}

fn features_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = 0;
    let cases = 300;
    for _ in 0..cases {
        let n = rng.random_range(2..=50);
        let t = rng.random_range(1..=6);
        let h = random_history(n, t, rng.random());
        let hist = history_of(&h);
        let recs = hist.records();
        let mats: Vec<AdjacencyMatrix> = recs.iter().map(|r| r.adjacency.clone()).collect();
        let bools: Vec<Vec<Vec<bool>>> = mats.iter().map(bool_grid).collect();
        let weighted: Vec<graph::Grid> = recs.iter().map(|r| to_grid(&r.weighted)).collect();
        let union_ok = bool_grid(&superimpose(&mats).unwrap().matrix) == graph::or_union(&bools);
        let primal_ok = to_grid(&enhanced_primal(recs).unwrap()) == graph::enhanced_primal(&h.costs, &weighted);
        let dual_ok = to_grid(&enhanced_dual(recs).unwrap()) == graph::enhanced_dual(&h.costs, &h.duals);
        let (i, o) = enhanced_degrees(recs).unwrap();
        let (oi, oo) = graph::enhanced_degrees(&h.costs, &weighted);
        let degrees_ok = i.to_vec() == oi && o.to_vec() == oo;
        let f = assemble_features(recs, Normalization::PerBlock).unwrap();
        let assembled_ok = to_grid(&f.data) == graph::assemble(&h.costs, &weighted, &h.duals);
        let shape_ok = f.data.dim() == (n, n + t + 2);
        let range_ok = f.data.iter().all(|&v| (0.0..=1.0).contains(&v));
        if !(union_ok && primal_ok && dual_ok && degrees_ok && assembled_ok && shape_ok && range_ok) {
            failures += 1;
        }
    }
    Outcome::new(failures == 0, format!("{cases} random histories, {failures} failures"))
}

fn gradient() -> Outcome {
    let start = Instant::now();
    let worst = (0..3)
        .map(gradient_check)
        .fold([0.0f64; 3], |a, b| [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])]);
    let t = start.elapsed();
    Outcome::new(
        worst.iter().all(|&w| w <= 1e-4) && within(t, 5),
        format!(
            "max relative gap W0 {:.1e}, W_mu {:.1e}, W_sigma {:.1e}, {:.2}s",
            worst[0],
            worst[1],
            worst[2],
            t.as_secs_f64()
        ),
    )
}

fn learnability() -> Outcome {
    let start = Instant::now();
    let mut rocs = Vec::new();
    for seed in 0..5 {
        let g = planted_communities(60, 0.8, 0.02, seed);
        let negatives: Vec<(usize, usize)> = strict_upper_pairs(60)
            .into_iter()
            .filter(|&(i, j)| !g.get(i, j))
            .collect();
        let cfg = VgaeConfig {
            seed,
            epochs: 100,
            learning_rate: 0.03,
            ..Default::default()
        };
        let model = train(&cfg, &g, &Array2::eye(60), &negatives).unwrap();
        rocs.push(model.roc);
    }
    let t = start.elapsed();
    let min = rocs.iter().copied().fold(1.0, f64::min);
    Outcome::new(
        min >= 0.85 && within(t, 60),
        format!("5 planted graphs, worst roc {min:.3}, {:.2}s", t.as_secs_f64()),
    )
}

fn combiner_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    let calls = 1000;
    for _ in 0..calls {
        let n = rng.random_range(3..120);
        let max_param = (n - 1) / 2;
        let param1 = rng.random_range(1..=max_param);
        let roc = rng.random_range(0.0..=1.0);
        let pairs: Vec<((usize, usize), f64)> = (0..rng.random_range(0..80))
            .filter_map(|_| {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                (a != b).then(|| ((a.min(b), a.max(b)), rng.random_range(0.0001..0.9999)))
            })
            .collect();
        let preds = PredictionSet { pairs };
        let cfg = CombinerConfig {
            param1,
            seed: rng.random(),
        };
        let sel = select_flights(&preds, roc, n, &cfg).unwrap();
        let flights = sel.flights();
        let distinct: BTreeSet<usize> = flights.iter().copied().collect();

        let mut ranked = preds.pairs.clone();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let ends = |m: usize| -> BTreeSet<usize> { ranked[..m].iter().flat_map(|&((i, j), _)| [i, j]).collect() };
        let learnt: BTreeSet<usize> = sel.learnt.iter().copied().collect();
        let k = sel.pairs_consumed;
        let prefix = learnt.is_subset(&ends(k)) && (k == 0 || ends(k - 1).is_subset(&learnt));

        let ok = flights.len() == param1
            && distinct.len() == param1
            && sel.learnt_count() <= learnt_budget(param1, roc)
            && prefix
            && select_flights(&preds, roc, n, &cfg).unwrap() == sel;
        if !ok {
            failures += 1;
        }
    }
    let rejected = [(10, 5), (11, 6), (120, 60)].iter().all(|&(n, p)| {
        select_flights(
            &PredictionSet::default(),
            0.5,
            n,
            &CombinerConfig { param1: p, seed: 0 },
        )
        .is_err()
    });
    Outcome::new(
        failures == 0 && rejected,
        format!("{calls} calls, {failures} contract failures, oversized subsets rejected: {rejected}"),
    )
}

fn cg_monotonicity() -> Outcome {
    let desk = desk_config();
    let rules = desk.rules;
    let cost = desk.cost;
    let mut violations = Vec::new();
    let mut flights = Vec::new();
    let start = Instant::now();
    for seed in 0..10 {
        let gen = NetGenConfig {
            seed,
            ..desk.netgen.clone()
        };
        let net = generate_network(&gen, &rules, &cost).unwrap().network;
        flights.push(net.len());
        let cfg = RunConfig {
            seed,
            ..desk.run.clone()
        };
        let t = run(&net, &rules, &cost, &cfg).unwrap();
        let lp_ok = t
            .iterations
            .windows(2)
            .filter(|w| w[0].loop_index == w[1].loop_index)
            .all(|w| w[1].lp_cost <= w[0].lp_cost * (1.0 + 1e-9));
        let ip_ok = t.loops.iter().all(|l| l.ip_cost >= l.root_lp * (1.0 - 1e-9));
        if !(lp_ok && ip_ok) {
            violations.push(seed);
        }
    }
    let lo = flights.iter().min().unwrap();
    let hi = flights.iter().max().unwrap();
    Outcome::new(
        violations.is_empty(),
        format!(
            "10 runs of {lo}-{hi} flights, violations {violations:?}, {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    )
}

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

fn end_to_end() -> Outcome {
    let rules = LegalityRules::default();
    let costs = CostRules::default();
    let mut bad = Vec::new();
    let mut learning_events = 0;
    for seed in 0..8 {
        let net = random_network(12, seed);
        let reference = full_enumeration_lp(&net, &rules, &costs);
        for learning in [true, false] {
            let cfg = RunConfig {
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
            };
            let t = run(&net, &rules, &costs, &cfg).unwrap();
            learning_events += t.learning.len();
            if !rel_close(t.loops[0].lp_cost, reference, 1e-6) {
                bad.push((seed, learning));
            }
        }
    }
    Outcome::new(
        bad.is_empty() && learning_events > 0,
        format!("8 toy networks x 2 modes, {learning_events} learning iterations, mismatches {bad:?}"),
    )
}

fn protocol() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let report = run_experiment(&desk_config(), RunSelection::default(), dir.path()).unwrap();
    let t = start.elapsed();
    let (Some(with), Some(without)) = (&report.with_learning, &report.without_learning) else {
        return Outcome::new(false, "a run is missing");
    };
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let curves = std::fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    let loops = with.loops.len().max(without.loops.len());
    let shaped = summary.lines().count() == loops + 2
        && summary.starts_with("loop,phase,lp_with,ip_with,z_with,lp_without,ip_without,z_without,delta_lp,delta_ip")
        && curves.lines().count() == 1 + with.total_iterations().max(without.total_iterations());
    Outcome::new(
        shaped && within(t, 900),
        format!(
            "{} flights, final with {:.2} (z {}) vs without {:.2} (z {}), delta {:+.2}, {:.1}s",
            report.network.flights.len(),
            with.final_cost(),
            with.total_iterations(),
            without.final_cost(),
            without.total_iterations(),
            with.final_cost() - without.final_cost(),
            t.as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("LP matches vertex enumeration", lp_oracle),
        ("IP matches exhaustive search", ip_oracle),
        ("pairing enumeration matches filtering", enumeration_oracle),
        ("graph features match oracles", features_oracle),
        ("VGAE gradient check", gradient),
        ("VGAE learns planted communities", learnability),
        ("flight selection contract", combiner_contract),
        ("CG monotonicity on desk runs", cg_monotonicity),
        ("CG reaches the full-enumeration LP", end_to_end),
        ("paired experiment protocol", protocol),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({})",
            k + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            name,
            outcome.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
