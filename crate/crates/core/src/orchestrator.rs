//! The optimisation driver: an initial cover, column generation with
//! baseline or learning-guided pricing, the integer phase, and
//! re-optimisation loops over the growing column pool.

use std::collections::HashMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combiner::{combine, CombinerConfig, CombinerError, Selection};
use crate::features::{
    assemble_features, build_adjacency, partition_edges, strict_upper_pairs, FeatureError, History, Normalization,
};
use crate::lp::{costs_match, solve_ip_with_incumbent, solve_lp, CoverColumn, DualVector, LpError, SetCoverInstance};
use crate::network::{connection_universe, CostRules, FlightNetwork, LegalityRules, Pairing};
use crate::pairing::{PairingEngine, PricedPairing, PricingError, PricingRequest};
use crate::vgae::{predict_negatives, train, EpochLog, VgaeConfig, VgaeError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid run config: {0}")]
    Config(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Vgae(#[from] VgaeError),
    #[error(transparent)]
    Combiner(#[from] CombinerError),
}

/// When learning iterations happen within a CG phase (1-based iteration
/// numbers, restarting every phase).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LearningSchedule {
    /// First at `first`, then every `gap` iterations; the gap halves (down
    /// to `min_gap`) whenever the LP improved by less than `slowdown`
    /// (relative) since the previous learning iteration.
    Adaptive {
        first: usize,
        initial_gap: usize,
        min_gap: usize,
        slowdown: f64,
    },
    Fixed {
        iterations: Vec<usize>,
    },
}

impl Default for LearningSchedule {
    fn default() -> Self {
        LearningSchedule::Adaptive {
            first: 8,
            initial_gap: 8,
            min_gap: 2,
            slowdown: 0.01,
        }
    }
}

/// Which pairs count as candidate non-edges for prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeDomain {
    /// Every pair `i < j` absent from the global adjacency.
    #[default]
    AllPairs,
    /// Only legal connections absent from the global adjacency.
    LegalConnections,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub learning_enabled: bool,
    pub schedule: LearningSchedule,
    pub cg_max_iters: usize,
    pub cg_rel_threshold: f64,
    pub cg_patience: usize,
    pub reopt_max_loops: usize,
    /// Pricing subset size for both learning and baseline iterations;
    /// a quarter of the flights when unset.
    pub param1: Option<usize>,
    pub max_columns: usize,
    pub node_budget: usize,
    /// Pairings enumerated for the initial cover.
    pub initial_enumeration_limit: usize,
    /// Price over every pairing when the subset yields nothing.
    pub full_pricing: bool,
    pub full_pricing_limit: usize,
    /// Clear the learning history at the start of every loop.
    pub reset_history_each_loop: bool,
    pub negative_domain: NegativeDomain,
    pub normalization: Normalization,
    pub vgae: VgaeConfig,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            learning_enabled: true,
            schedule: LearningSchedule::default(),
            cg_max_iters: 50,
            cg_rel_threshold: 1e-4,
            cg_patience: 3,
            reopt_max_loops: 3,
            param1: None,
            max_columns: 25,
            node_budget: 2_000,
            initial_enumeration_limit: 200_000,
            full_pricing: true,
            full_pricing_limit: 2_000_000,
            reset_history_each_loop: false,
            negative_domain: NegativeDomain::AllPairs,
            normalization: Normalization::PerBlock,
            vgae: VgaeConfig::default(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn subset_size(&self, num_flights: usize) -> usize {
        self.param1.unwrap_or((num_flights / 4).max(1))
    }

    pub fn validate(&self, num_flights: usize) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        if self.cg_max_iters == 0 || self.cg_patience == 0 || self.max_columns == 0 {
            return bad("cg_max_iters, cg_patience and max_columns must be positive".into());
        }
        if self.cg_rel_threshold.is_nan() || self.cg_rel_threshold <= 0.0 {
            return bad("cg_rel_threshold must be positive".into());
        }
        if self.node_budget == 0 {
            return bad("node_budget must be positive".into());
        }
        match &self.schedule {
            LearningSchedule::Adaptive {
                first,
                initial_gap,
                min_gap,
                slowdown,
            } => {
                if *first == 0 || *initial_gap == 0 || *min_gap == 0 || slowdown.is_nan() || *slowdown <= 0.0 {
                    return bad("adaptive schedule values must be positive".into());
                }
            }
            LearningSchedule::Fixed { iterations } => {
                if iterations.first() == Some(&0) || iterations.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("fixed schedule must be strictly increasing from 1".into());
                }
            }
        }
        if self.learning_enabled {
            self.vgae.validate()?;
            CombinerConfig {
                param1: self.subset_size(num_flights),
                seed: 0,
            }
            .validate(num_flights)?;
        } else {
            let p = self.subset_size(num_flights);
            if p == 0 || p > num_flights {
                return bad(format!("pricing subset size {p} outside 1..={num_flights}"));
            }
        }
        Ok(())
    }
}

/// Tracks which iterations of one CG phase are learning iterations.
#[derive(Debug, Clone)]
pub struct ScheduleState {
    schedule: LearningSchedule,
    next: usize,
    gap: usize,
    last_cost: Option<f64>,
}

impl ScheduleState {
    pub fn new(schedule: &LearningSchedule) -> Self {
        let (next, gap) = match schedule {
            LearningSchedule::Adaptive { first, initial_gap, .. } => (*first, *initial_gap),
            LearningSchedule::Fixed { .. } => (0, 0),
        };
        Self {
            schedule: schedule.clone(),
            next,
            gap,
            last_cost: None,
        }
    }

    pub fn is_learning(&self, t: usize) -> bool {
        match &self.schedule {
            LearningSchedule::Adaptive { .. } => t == self.next,
            LearningSchedule::Fixed { iterations } => iterations.binary_search(&t).is_ok(),
        }
    }

    /// Feeds the LP cost of iteration `t`; moves the adaptive schedule on
    /// after a learning iteration.
    pub fn observe(&mut self, t: usize, cost: f64) {
        let LearningSchedule::Adaptive { min_gap, slowdown, .. } = self.schedule else {
            return;
        };
        if t == 1 && self.last_cost.is_none() {
            self.last_cost = Some(cost);
        }
        if t != self.next {
            return;
        }
        if let Some(prev) = self.last_cost {
            if prev > 0.0 && (prev - cost) / prev < slowdown {
                self.gap = (self.gap / 2).max(min_gap);
            }
        }
        self.last_cost = Some(cost);
        self.next = t + self.gap;
    }

    pub fn gap(&self) -> usize {
        self.gap
    }
}

/// Half the subset from the highest duals (ties in random order), the rest
/// uniformly at random from the remaining flights. Ascending.
pub fn baseline_pricing_subset<R: Rng>(duals: &DualVector, size: usize, rng: &mut R) -> Vec<usize> {
    let n = duals.len();
    let size = size.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
    let y = duals.values();
    order.sort_by(|&a, &b| y[b].total_cmp(&y[a]));
    let top = size.div_ceil(2);
    let mut chosen: Vec<usize> = order[..top].to_vec();
    let rest = &order[top..];
    chosen.extend(
        rand::seq::index::sample(rng, rest.len(), size - top)
            .into_iter()
            .map(|k| rest[k]),
    );
    chosen.sort_unstable();
    chosen
}

/// A column of the restricted master problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub flights: Vec<usize>,
    pub cost: f64,
    pub artificial: bool,
}

/// Columns deduplicated by flight sequence.
#[derive(Debug, Clone, Default)]
pub struct ColumnPool {
    columns: Vec<Column>,
    index: HashMap<Vec<usize>, usize>,
}

impl ColumnPool {
    pub fn add(&mut self, column: Column) -> bool {
        if self.index.contains_key(&column.flights) {
            return false;
        }
        self.index.insert(column.flights.clone(), self.columns.len());
        self.columns.push(column);
        true
    }

    pub fn add_pairing(&mut self, p: &Pairing) -> bool {
        self.add(Column {
            flights: p.flight_sequence(),
            cost: p.cost(),
            artificial: false,
        })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn instance(&self, num_flights: usize) -> SetCoverInstance {
        SetCoverInstance::new(
            num_flights,
            self.columns
                .iter()
                .map(|c| CoverColumn::new(c.flights.clone(), c.cost))
                .collect(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct InitialSolution {
    /// The greedy cover, artificial columns last.
    pub columns: Vec<Column>,
    pub artificial: usize,
    pub penalty_cost: f64,
    /// Whether the enumeration feeding the greedy cover was exhaustive.
    pub complete: bool,
}

impl InitialSolution {
    pub fn cost(&self) -> f64 {
        self.columns.iter().map(|c| c.cost).sum()
    }
}

/// Greedy cover from (bounded) full enumeration; flights left uncovered
/// get a single-flight column at ten times the costliest pairing seen.
pub fn initial_solution(engine: &PairingEngine<'_>, enumeration_limit: usize) -> InitialSolution {
    let net = engine.network();
    let n = net.len();
    let all: Vec<usize> = (0..n).collect();
    let mut cols: Vec<(Vec<usize>, f64)> = Vec::new();
    let complete = engine.for_each_pairing(&all, |p| {
        if cols.len() >= enumeration_limit {
            return false;
        }
        cols.push((p.flight_sequence(), p.cost()));
        true
    });
    let max_cost = cols.iter().map(|c| c.1).fold(0.0_f64, f64::max);
    let penalty_cost = if max_cost > 0.0 {
        10.0 * max_cost
    } else {
        let c = engine.costs();
        let r = engine.rules();
        10.0 * (c.fixed_cost + (c.rate_flying + c.rate_tafb) * r.tafb_max as f64)
    };

    let mut covered = vec![false; n];
    let mut alive = vec![true; cols.len()];
    let mut chosen = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (k, (seq, cost)) in cols.iter().enumerate() {
            if !alive[k] {
                continue;
            }
            let gain = seq.iter().filter(|&&f| !covered[f]).count();
            if gain == 0 {
                alive[k] = false;
                continue;
            }
            let ratio = cost / gain as f64;
            if best.is_none_or(|(_, r)| ratio < r) {
                best = Some((k, ratio));
            }
        }
        let Some((k, _)) = best else { break };
        alive[k] = false;
        for &f in &cols[k].0 {
            covered[f] = true;
        }
        chosen.push(k);
    }
    let mut columns: Vec<Column> = chosen
        .into_iter()
        .map(|k| Column {
            flights: cols[k].0.clone(),
            cost: cols[k].1,
            artificial: false,
        })
        .collect();
    let mut artificial = 0;
    for f in (0..n).filter(|&f| !covered[f]) {
        columns.push(Column {
            flights: vec![f],
            cost: penalty_cost,
            artificial: true,
        });
        artificial += 1;
    }
    InitialSolution {
        columns,
        artificial,
        penalty_cost,
        complete,
    }
}

/// One CG iteration as it appears in the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// Loop index: 0 for the main optimisation, k for re-optimisation k.
    pub loop_index: usize,
    /// Iteration within the CG phase, from 1.
    pub iteration: usize,
    /// Iterations since the start of the run, from 1.
    pub cumulative: usize,
    pub lp_cost: f64,
    pub support: usize,
    pub columns_added: usize,
    pub learnt: bool,
    pub roc: Option<f64>,
    pub full_pricing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopSummary {
    pub loop_index: usize,
    pub cg_iterations: usize,
    pub lp_cost: f64,
    pub root_lp: f64,
    pub ip_cost: f64,
    pub ip_proven: bool,
    pub ip_nodes: usize,
    pub columns_added: usize,
    pub pool_size: usize,
    pub artificial_selected: usize,
    pub cg_time: Duration,
    pub ip_time: Duration,
    /// Flight sequences of the chosen pairings.
    pub solution: Vec<Vec<usize>>,
}

/// What one learning iteration did.
#[derive(Debug, Clone)]
pub struct LearningEvent {
    pub loop_index: usize,
    pub iteration: usize,
    pub cumulative: usize,
    pub roc: f64,
    pub epochs: Vec<EpochLog>,
    pub selection: Selection,
    pub columns_found: usize,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub learning_enabled: bool,
    pub initial_cost: f64,
    pub initial_columns: usize,
    pub initial_artificial: usize,
    pub iterations: Vec<IterationTrace>,
    pub loops: Vec<LoopSummary>,
    pub learning: Vec<LearningEvent>,
    pub wall_time: Duration,
}

impl RunTrace {
    pub fn final_cost(&self) -> f64 {
        self.loops.last().map_or(self.initial_cost, |l| l.ip_cost)
    }

    pub fn total_iterations(&self) -> usize {
        self.iterations.len()
    }

    pub fn phase_label(loop_index: usize) -> String {
        if loop_index == 0 {
            "main".to_string()
        } else {
            format!("reopt{loop_index}")
        }
    }

    /// `iteration,phase,cost,columns_added,learnt_flag,roc`; one `init` row,
    /// one row per CG iteration and one per integer phase.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "phase", "cost", "columns_added", "learnt_flag", "roc"])?;
        w.write_record([
            "0",
            "init",
            &self.initial_cost.to_string(),
            &self.initial_columns.to_string(),
            "0",
            "",
        ])?;
        let mut it = self.iterations.iter().peekable();
        for l in &self.loops {
            let label = Self::phase_label(l.loop_index);
            let mut last = 0;
            while let Some(rec) = it.next_if(|r| r.loop_index == l.loop_index) {
                last = rec.cumulative;
                w.write_record([
                    rec.cumulative.to_string(),
                    format!("{label}-cg"),
                    rec.lp_cost.to_string(),
                    rec.columns_added.to_string(),
                    u8::from(rec.learnt).to_string(),
                    rec.roc.map(|r| r.to_string()).unwrap_or_default(),
                ])?;
            }
            w.write_record([
                last.to_string(),
                format!("{label}-ip"),
                l.ip_cost.to_string(),
                "0".to_string(),
                "0".to_string(),
                String::new(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Phase {
    lp_cost: f64,
    iterations: usize,
    added: usize,
}

/// Mutable state of one run.
struct Runner<'a> {
    engine: PairingEngine<'a>,
    config: &'a RunConfig,
    pool: ColumnPool,
    history: Option<History>,
    negative_domain: Vec<(usize, usize)>,
    rng: ChaCha8Rng,
    trace: RunTrace,
}

impl Runner<'_> {
    fn num_flights(&self) -> usize {
        self.engine.network().len()
    }

    fn cg_phase(&mut self, loop_index: usize) -> Result<Phase, RunError> {
        let n = self.num_flights();
        let size = self.config.subset_size(n);
        let mut schedule = ScheduleState::new(&self.config.schedule);
        let mut stalled = 0;
        let mut prev: Option<f64> = None;
        let mut added_total = 0;
        let mut t = 0;
        loop {
            t += 1;
            let cumulative = self.trace.iterations.len() + 1;
            let inst = self.pool.instance(n);
            let lp = solve_lp(&inst)?;
            let support: Vec<(usize, f64)> = lp.support().collect();
            if let Some(h) = self.history.as_mut() {
                let cols = self.pool.columns();
                let (a, w) = build_adjacency(n, support.iter().map(|&(k, x)| (cols[k].flights.as_slice(), x)))?;
                h.push(lp.cost, lp.duals.values().to_vec(), a, w)?;
            }

            let mut learnt = false;
            let mut roc = None;
            let mut priced = None;
            if self.config.learning_enabled && schedule.is_learning(t) {
                if let Some((r, p)) = self.learning_pricing(&lp.duals, loop_index, t, cumulative)? {
                    learnt = true;
                    roc = Some(r);
                    priced = Some(p);
                }
            }
            let priced = match priced {
                Some(p) => p,
                None => self.baseline_pricing(&lp.duals, size)?,
            };
            schedule.observe(t, lp.cost);

            let mut added = priced.iter().filter(|p| self.pool.add_pairing(&p.pairing)).count();
            let mut full = false;
            if added == 0 && self.config.full_pricing {
                full = true;
                let all: Vec<usize> = (0..n).collect();
                let req = PricingRequest::new(all, lp.duals.clone(), self.config.max_columns);
                let (extra, complete) = self.engine.price_bounded(&req, self.config.full_pricing_limit)?;
                if !complete {
                    log::warn!("full pricing stopped after {} pairings", self.config.full_pricing_limit);
                }
                added = extra.iter().filter(|p| self.pool.add_pairing(&p.pairing)).count();
            }
            added_total += added;
            self.trace.iterations.push(IterationTrace {
                loop_index,
                iteration: t,
                cumulative,
                lp_cost: lp.cost,
                support: support.len(),
                columns_added: added,
                learnt,
                roc,
                full_pricing: full,
            });
            log::debug!(
                "{} cg {t}: lp {:.3} support {} added {added}{}",
                RunTrace::phase_label(loop_index),
                lp.cost,
                support.len(),
                if learnt { " (learnt)" } else { "" }
            );

            if let Some(p) = prev {
                if (p - lp.cost) / p.abs().max(1e-12) < self.config.cg_rel_threshold {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
            }
            prev = Some(lp.cost);
            if added == 0 || stalled >= self.config.cg_patience || t >= self.config.cg_max_iters {
                return Ok(Phase {
                    lp_cost: lp.cost,
                    iterations: t,
                    added: added_total,
                });
            }
        }
    }

    fn baseline_pricing(&mut self, duals: &DualVector, size: usize) -> Result<Vec<PricedPairing>, RunError> {
        let subset = baseline_pricing_subset(duals, size, &mut self.rng);
        let req = PricingRequest::new(subset, duals.clone(), self.config.max_columns);
        Ok(self.engine.price(&req)?)
    }

    /// `None` when the graph is still too sparse (or too dense) to learn from.
    fn learning_pricing(
        &mut self,
        duals: &DualVector,
        loop_index: usize,
        t: usize,
        cumulative: usize,
    ) -> Result<Option<(f64, Vec<PricedPairing>)>, RunError> {
        let history = self.history.as_ref().expect("learning runs keep a history");
        let features = assemble_features(history.records(), self.config.normalization)?;
        let global = history.global();
        let (_, negatives) = partition_edges(&global, &self.negative_domain)?;
        let vgae = VgaeConfig {
            seed: self.config.seed.wrapping_mul(1_000_003).wrapping_add(cumulative as u64),
            ..self.config.vgae.clone()
        };
        let model = match train(&vgae, &global.matrix, &features.data, &negatives) {
            Ok(m) => m,
            Err(e @ (VgaeError::TooFewEdges(_) | VgaeError::NoNegatives | VgaeError::DegenerateTarget { .. })) => {
                log::info!("skipping learning at iteration {cumulative}: {e}");
                return Ok(None);
            }
            Err(e) => return Err(e.into()),
        };
        let predictions = predict_negatives(&model, &negatives);
        let comb = CombinerConfig {
            param1: self.config.subset_size(self.num_flights()),
            seed: self.rng.random(),
        };
        let outcome = combine(
            &self.engine,
            &predictions,
            model.roc,
            duals,
            &comb,
            self.config.max_columns,
        )?;
        log::debug!(
            "learning at {cumulative}: roc {:.3} after {} epochs, {} learnt + {} random flights, {} columns",
            model.roc,
            model.log.len(),
            outcome.selection.learnt_count(),
            outcome.selection.random_count(),
            outcome.pairings.len()
        );
        self.trace.learning.push(LearningEvent {
            loop_index,
            iteration: t,
            cumulative,
            roc: model.roc,
            epochs: model.log,
            selection: outcome.selection,
            columns_found: outcome.pairings.len(),
        });
        Ok(Some((model.roc, outcome.pairings)))
    }
}

/// Runs the main optimisation and the re-optimisation loops.
pub fn run(
    network: &FlightNetwork,
    rules: &LegalityRules,
    costs: &CostRules,
    config: &RunConfig,
) -> Result<RunTrace, RunError> {
    let start = Instant::now();
    let n = network.len();
    config.validate(n)?;
    let engine = PairingEngine::new(network, *rules, *costs);
    let init = initial_solution(&engine, config.initial_enumeration_limit);
    if !init.complete {
        log::info!(
            "initial cover built from the first {} pairings",
            config.initial_enumeration_limit
        );
    }
    let mut pool = ColumnPool::default();
    for c in &init.columns {
        pool.add(c.clone());
    }
    let negative_domain = if config.learning_enabled {
        match config.negative_domain {
            NegativeDomain::AllPairs => strict_upper_pairs(n),
            NegativeDomain::LegalConnections => connection_universe(network, rules),
        }
    } else {
        Vec::new()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(10);
    let mut runner = Runner {
        engine,
        config,
        pool,
        history: config.learning_enabled.then(|| History::new(n)),
        negative_domain,
        rng,
        trace: RunTrace {
            learning_enabled: config.learning_enabled,
            initial_cost: init.cost(),
            initial_columns: init.columns.len(),
            initial_artificial: init.artificial,
            iterations: Vec::new(),
            loops: Vec::new(),
            learning: Vec::new(),
            wall_time: Duration::ZERO,
        },
    };

    let mut incumbent: Vec<usize> = (0..init.columns.len()).collect();
    for loop_index in 0..=config.reopt_max_loops {
        if loop_index > 0 && config.reset_history_each_loop {
            if let Some(h) = runner.history.as_mut() {
                h.clear();
            }
        }
        let cg_start = Instant::now();
        let phase = runner.cg_phase(loop_index)?;
        let cg_time = cg_start.elapsed();

        let ip_start = Instant::now();
        let inst = runner.pool.instance(n);
        let ip = solve_ip_with_incumbent(&inst, config.node_budget, Some(&incumbent))?;
        let ip_time = ip_start.elapsed();
        incumbent = ip.selected.clone();
        let cols = runner.pool.columns();
        let summary = LoopSummary {
            loop_index,
            cg_iterations: phase.iterations,
            lp_cost: phase.lp_cost,
            root_lp: ip.root_lp,
            ip_cost: ip.cost,
            ip_proven: ip.proven,
            ip_nodes: ip.nodes,
            columns_added: phase.added,
            pool_size: cols.len(),
            artificial_selected: ip.selected.iter().filter(|&&k| cols[k].artificial).count(),
            cg_time,
            ip_time,
            solution: ip.selected.iter().map(|&k| cols[k].flights.clone()).collect(),
        };
        log::info!(
            "{}: {} CG iterations, LP {:.3}, IP {:.3} (root {:.3}, {} nodes{})",
            RunTrace::phase_label(loop_index),
            summary.cg_iterations,
            summary.lp_cost,
            summary.ip_cost,
            summary.root_lp,
            summary.ip_nodes,
            if summary.ip_proven { "" } else { ", budget hit" }
        );
        let gap_closed = costs_match(summary.ip_cost, summary.root_lp);
        let stalled = loop_index > 0 && summary.columns_added == 0;
        runner.trace.loops.push(summary);
        if gap_closed || stalled {
            break;
        }
    }
    runner.trace.wall_time = start.elapsed();
    Ok(runner.trace)
}
