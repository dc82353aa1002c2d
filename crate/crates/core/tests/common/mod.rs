#![allow(dead_code)]

use crewpair::features::{build_adjacency, AdjacencyMatrix, History};
use crewpair::lp::{CoverColumn, SetCoverInstance};
use crewpair::network::{FlightNetwork, FlightSpec, LegalityRules};
use crewpair_oracle::crew::{RawFlight, RawRules};
use crewpair_oracle::graph;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small random network: `n` flights among four airports, two of which
/// are bases. Departures cluster so that sits and rests both occur.
pub fn random_network(n: usize, seed: u64) -> FlightNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let airports = ["A", "B", "X", "Y"];
    let mut specs = Vec::with_capacity(n);
    let mut here = [0usize, 1usize];
    let mut clock = [300i64, 360i64];
    for k in 0..n {
        let crew = k % 2;
        let from = here[crew];
        let mut to = rng.random_range(0..airports.len());
        if to == from {
            to = (to + 1) % airports.len();
        }
        let dep = clock[crew] + rng.random_range(20..200);
        let dep = if rng.random_bool(0.2) { dep + 700 } else { dep };
        let arr = dep + rng.random_range(40..150);
        specs.push(FlightSpec {
            origin: airports[from].into(),
            destination: airports[to].into(),
            dep,
            arr,
        });
        here[crew] = to;
        clock[crew] = arr;
    }
    FlightNetwork::new(&specs, &["A".to_string(), "B".to_string()]).unwrap()
}

pub fn raw_flights(net: &FlightNetwork) -> Vec<RawFlight> {
    net.flights()
        .iter()
        .map(|f| RawFlight {
            origin: f.origin.0,
            destination: f.destination.0,
            dep: f.dep_time,
            arr: f.arr_time,
        })
        .collect()
}

pub fn raw_bases(net: &FlightNetwork) -> Vec<u32> {
    net.bases().iter().map(|b| b.airport.0).collect()
}

pub fn raw_rules(r: &LegalityRules) -> RawRules {
    RawRules {
        sit_min: r.sit_min,
        sit_max: r.sit_max,
        duty_max_flying: r.duty_max_flying,
        duty_max_elapsed: r.duty_max_elapsed,
        duty_max_flights: r.duty_max_flights,
        rest_min: r.rest_min,
        rest_max: r.rest_max,
        pairing_max_duties: r.pairing_max_duties,
        tafb_max: r.tafb_max,
        brief: r.brief,
        debrief: r.debrief,
    }
}

/// Two communities of `n / 2` nodes each (low ids and high ids): pairs
/// inside a community are linked with probability `p_in`, across with
/// `p_out`.
pub fn planted_communities(n: usize, p_in: f64, p_out: f64, seed: u64) -> crewpair::features::AdjacencyMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = n / 2;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if (i < half) == (j < half) { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    crewpair::features::AdjacencyMatrix::from_edges(n, &edges).unwrap()
}

/// Largest relative gap between analytic and central-difference gradients,
/// one value per weight block (`W0`, `W_mu`, `W_sigma`).
pub fn gradient_check(seed: u64) -> [f64; 3] {
    use crewpair::features::AdjacencyMatrix;
    use crewpair::vgae::{loss_and_gradients, Problem, Weights};
    use ndarray::Array2;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = AdjacencyMatrix::from_edges(5, &[(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap();
    let features = Array2::from_shape_simple_fn((5, 4), || rng.random_range(0.0..1.0));
    let problem = Problem::new(graph, &features).unwrap();
    let mut w = Weights::glorot(4, 6, 3, &mut rng);
    let eps = Array2::from_shape_simple_fn((5, 3), || rng.random_range(-1.0..1.0));
    let (_, grads) = loss_and_gradients(&problem, &w, &eps).unwrap();
    let h = 1e-6;
    let mut worst = [0.0; 3];
    for b in 0..3 {
        let dim = w.blocks()[b].dim();
        let mut num = Array2::<f64>::zeros(dim);
        for idx in ndarray::indices(dim) {
            let orig = w.blocks()[b][idx];
            w.blocks_mut()[b][idx] = orig + h;
            let up = loss_and_gradients(&problem, &w, &eps).unwrap().0.total();
            w.blocks_mut()[b][idx] = orig - h;
            let down = loss_and_gradients(&problem, &w, &eps).unwrap().0.total();
            w.blocks_mut()[b][idx] = orig;
            num[idx] = (up - down) / (2.0 * h);
        }
        let diff = (&num - grads.blocks()[b])
            .mapv(f64::abs)
            .fold(0.0_f64, |a, &v| a.max(v));
        let scale = num.mapv(f64::abs).fold(0.0_f64, |a, &v| a.max(v));
        worst[b] = diff / scale.max(1e-12);
    }
    worst
}

/// A feasible random set-cover instance with at most 8 rows and 25 columns.
/// Costs are integers so ties between optima are common.
pub fn random_cover(seed: u64) -> SetCoverInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: usize = rng.random_range(1..=8);
    let ncols = rng.random_range(rows.div_ceil(2)..=25);
    let mut cols = Vec::with_capacity(ncols);
    for _ in 0..ncols {
        let k = rng.random_range(1..=rows.min(4));
        let picked = rand::seq::index::sample(&mut rng, rows, k).into_vec();
        cols.push(CoverColumn::new(picked, rng.random_range(1..=20) as f64));
    }
    for r in 0..rows {
        if !cols.iter().any(|c| c.rows.contains(&r)) {
            let k = rng.random_range(0..cols.len());
            let mut covered = cols[k].rows.clone();
            covered.push(r);
            cols[k] = CoverColumn::new(covered, cols[k].cost);
        }
    }
    SetCoverInstance::new(rows, cols)
}

pub fn oracle_columns(inst: &SetCoverInstance) -> Vec<(Vec<usize>, f64)> {
    inst.columns.iter().map(|c| (c.rows.clone(), c.cost)).collect()
}

/// Random CG history: per-iteration costs, support pairings and duals.
pub struct RandomHistory {
    pub n: usize,
    pub costs: Vec<f64>,
    pub pairings: Vec<Vec<(Vec<usize>, f64)>>,
    pub duals: Vec<Vec<f64>>,
}

pub fn random_history(n: usize, t: usize, seed: u64) -> RandomHistory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cost = rng.random_range(5_000.0..10_000.0);
    let mut out = RandomHistory {
        n,
        costs: Vec::new(),
        pairings: Vec::new(),
        duals: Vec::new(),
    };
    for _ in 0..t {
        cost *= rng.random_range(0.9..1.0);
        out.costs.push(cost);
        let k = rng.random_range(0..8);
        let mut ps = Vec::new();
        for _ in 0..k {
            let len = rng.random_range(1..5).min(n);
            let mut seq: Vec<usize> = (0..len).map(|_| rng.random_range(0..n)).collect();
            seq.sort_unstable();
            seq.dedup();
            ps.push((seq, rng.random_range(0.0..1.0)));
        }
        out.pairings.push(ps);
        out.duals.push(
            (0..n)
                .map(|_| {
                    if rng.random_bool(0.3) {
                        0.0
                    } else {
                        rng.random_range(0.0..500.0)
                    }
                })
                .collect(),
        );
    }
    out
}

pub fn to_grid(a: &Array2<f64>) -> graph::Grid {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub fn bool_grid(a: &AdjacencyMatrix) -> Vec<Vec<bool>> {
    a.as_array().rows().into_iter().map(|r| r.to_vec()).collect()
}

pub fn history_of(h: &RandomHistory) -> History {
    let mut hist = History::new(h.n);
    for k in 0..h.costs.len() {
        let (a, w) = build_adjacency(h.n, h.pairings[k].iter().map(|(s, x)| (s.as_slice(), *x))).unwrap();
        hist.push(h.costs[k], h.duals[k].clone(), a, w).unwrap();
    }
    hist
}
