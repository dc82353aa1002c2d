//! Variational graph auto-encoder for link prediction on the global
//! connection graph.
//!
//! A two-layer graph convolution maps node features to a Gaussian latent
//! code per flight; edges are scored by the logistic of latent inner
//! products. Training holds out a tenth of the known edges together with as
//! many sampled non-edges and reports the ROC area on them.

mod model;

use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{write_grid, AdjacencyMatrix};

pub use model::{
    decode, encode, encode_propagated, kl_divergence, loss, loss_and_gradients, normalize_adjacency, sigmoid, Encoding,
    LossTerms, Problem, Weights,
};

#[derive(Debug, Error)]
pub enum VgaeError {
    #[error("invalid VGAE config: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("training target has {positives} edges out of {domain_size} pairs; need some of each")]
    DegenerateTarget { positives: usize, domain_size: usize },
    #[error("need at least 2 known edges to hold one out, got {0}")]
    TooFewEdges(usize),
    #[error("no candidate non-edges to evaluate against")]
    NoNegatives,
    #[error("ROC needs non-empty positive and negative sets")]
    EmptyEvaluationSet,
    #[error("loss became non-finite at epoch {epoch} ({loss})")]
    NonFiniteLoss { epoch: usize, loss: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    #[default]
    Adam,
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VgaeConfig {
    pub hidden_dim: usize,
    pub latent_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub early_stop_roc: f64,
    pub holdout_fraction: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for VgaeConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 32,
            latent_dim: 16,
            epochs: 100,
            learning_rate: 0.03,
            early_stop_roc: 0.9,
            holdout_fraction: 0.1,
            optimizer: Optimizer::Adam,
            seed: 0,
        }
    }
}

impl VgaeConfig {
    pub fn validate(&self) -> Result<(), VgaeError> {
        let bad = |m: &str| Err(VgaeError::Config(m.to_string()));
        if self.hidden_dim == 0 || self.latent_dim == 0 {
            return bad("layer sizes must be positive");
        }
        if !(0.0..1.0).contains(&self.learning_rate) {
            return bad("learning_rate must lie in [0, 1)");
        }
        if !(self.early_stop_roc > 0.0 && self.early_stop_roc <= 1.0) {
            return bad("early_stop_roc must lie in (0, 1]");
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return bad("holdout_fraction must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Area under the ROC curve by the rank-sum statistic; ties count one half.
pub fn roc_auc(positives: &[f64], negatives: &[f64]) -> Result<f64, VgaeError> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(VgaeError::EmptyEvaluationSet);
    }
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pos_rank_sum = 0.0;
    let mut k = 0;
    while k < all.len() {
        let mut end = k + 1;
        while end < all.len() && all[end].0 == all[k].0 {
            end += 1;
        }
        // 1-based ranks k+1..=end share their mean.
        let mean_rank = (k + 1 + end) as f64 / 2.0;
        pos_rank_sum += mean_rank * all[k..end].iter().filter(|e| e.1).count() as f64;
        k = end;
    }
    let np = positives.len() as f64;
    let nn = negatives.len() as f64;
    Ok(((pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub roc: f64,
}

#[derive(Debug, Clone)]
pub struct VgaeModel {
    pub weights: Weights,
    pub a_bar: Array2<f64>,
    pub mu: Array2<f64>,
    pub log_sigma: Array2<f64>,
    pub roc: f64,
    pub log: Vec<EpochLog>,
    pub held_out: Vec<(usize, usize)>,
    pub sampled_negatives: Vec<(usize, usize)>,
}

impl VgaeModel {
    /// Logit `mu_i . mu_j`.
    pub fn logit(&self, i: usize, j: usize) -> f64 {
        self.mu.row(i).dot(&self.mu.row(j))
    }

    pub fn score(&self, i: usize, j: usize) -> f64 {
        sigmoid(self.logit(i, j))
    }

    pub fn evaluate_roc(&self, positives: &[(usize, usize)], negatives: &[(usize, usize)]) -> Result<f64, VgaeError> {
        let p: Vec<f64> = positives.iter().map(|&(i, j)| self.logit(i, j)).collect();
        let n: Vec<f64> = negatives.iter().map(|&(i, j)| self.logit(i, j)).collect();
        roc_auc(&p, &n)
    }

    /// Scores every pair, highest first. Ties are broken by pair order.
    pub fn predict(&self, pairs: &[(usize, usize)]) -> PredictionSet {
        let mut scored: Vec<((usize, usize), f64)> = pairs.iter().map(|&(i, j)| ((i, j), self.logit(i, j))).collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let open = |p: f64| p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        PredictionSet {
            pairs: scored.into_iter().map(|(pair, s)| (pair, open(sigmoid(s)))).collect(),
        }
    }

    /// Writes `w0.txt`, `w_mu.txt` and `w_sigma.txt` under `dir`.
    pub fn dump_weights(&self, dir: &Path) -> Result<(), VgaeError> {
        std::fs::create_dir_all(dir)?;
        for (name, m) in [
            ("w0", &self.weights.w0),
            ("w_mu", &self.weights.w_mu),
            ("w_sigma", &self.weights.w_sigma),
        ] {
            let f = std::fs::File::create(dir.join(format!("{name}.txt")))?;
            write_grid(m, std::io::BufWriter::new(f))?;
        }
        Ok(())
    }

    pub fn write_epoch_log<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "epoch,loss,roc")?;
        for e in &self.log {
            writeln!(out, "{},{},{}", e.epoch, e.loss, e.roc)?;
        }
        Ok(())
    }
}

/// Candidate pairs ranked by predicted edge probability.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionSet {
    pub pairs: Vec<((usize, usize), f64)>,
}

impl PredictionSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

pub fn predict_negatives(model: &VgaeModel, negatives: &[(usize, usize)]) -> PredictionSet {
    model.predict(negatives)
}

struct Adam {
    m: Weights,
    v: Weights,
    step: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(like: &Weights) -> Self {
        let z = |a: &Array2<f64>| Array2::zeros(a.dim());
        let zeros = Weights {
            w0: z(&like.w0),
            w_mu: z(&like.w_mu),
            w_sigma: z(&like.w_sigma),
        };
        Self {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    fn update(&mut self, w: &mut Weights, g: &Weights, lr: f64) {
        self.step += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.step);
        let c2 = 1.0 - Self::BETA2.powi(self.step);
        let blocks = w
            .blocks_mut()
            .into_iter()
            .zip(g.blocks())
            .zip(self.m.blocks_mut())
            .zip(self.v.blocks_mut());
        for (((w, g), m), v) in blocks {
            ndarray::Zip::from(w).and(g).and(m).and(v).for_each(|w, &g, m, v| {
                *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
                *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
                *w -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
            });
        }
    }
}

/// Independent random streams derived from the config seed.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// The initial weights [`train`] starts from for this config.
pub fn initial_weights(config: &VgaeConfig, input_dim: usize) -> Weights {
    Weights::glorot(
        input_dim,
        config.hidden_dim,
        config.latent_dim,
        &mut stream(config.seed, 0),
    )
}

/// Trains a fresh model on the global adjacency `graph` with node
/// `features`, holding out edges for the ROC score. Non-edges for the
/// evaluation sample are drawn from `negative_pool` (pairs absent from
/// `graph`).
pub fn train(
    config: &VgaeConfig,
    graph: &AdjacencyMatrix,
    features: &Array2<f64>,
    negative_pool: &[(usize, usize)],
) -> Result<VgaeModel, VgaeError> {
    config.validate()?;
    let n = graph.size();
    if features.nrows() != n {
        return Err(VgaeError::Shape(format!(
            "{n} nodes but {} feature rows",
            features.nrows()
        )));
    }
    let mut edges = graph.edges();
    if edges.len() < 2 {
        return Err(VgaeError::TooFewEdges(edges.len()));
    }
    if negative_pool.is_empty() {
        return Err(VgaeError::NoNegatives);
    }

    let mut split_rng = stream(config.seed, 1);
    edges.shuffle(&mut split_rng);
    let hold = ((edges.len() as f64 * config.holdout_fraction).round() as usize).clamp(1, edges.len() - 1);
    let mut held_out = edges.split_off(edges.len() - hold);
    held_out.sort_unstable();
    let neg_count = hold.min(negative_pool.len());
    let mut sampled_negatives: Vec<(usize, usize)> =
        rand::seq::index::sample(&mut split_rng, negative_pool.len(), neg_count)
            .into_iter()
            .map(|k| negative_pool[k])
            .collect();
    sampled_negatives.sort_unstable();

    let training = AdjacencyMatrix::from_edges(n, &edges).map_err(|e| VgaeError::Shape(e.to_string()))?;
    let problem = Problem::new(training, features)?;
    let mut weights = initial_weights(config, features.ncols());
    let mut noise_rng = stream(config.seed, 2);
    let mut adam = Adam::new(&weights);
    let mut log = Vec::new();

    let eval = |w: &Weights| -> Result<(Encoding, f64), VgaeError> {
        let enc = encode_propagated(&problem.a_bar, &problem.propagated_features, w)?;
        let score = |&(i, j): &(usize, usize)| enc.mu.row(i).dot(&enc.mu.row(j));
        let p: Vec<f64> = held_out.iter().map(score).collect();
        let q: Vec<f64> = sampled_negatives.iter().map(score).collect();
        let roc = roc_auc(&p, &q)?;
        Ok((enc, roc))
    };

    let (mut enc, mut roc) = eval(&weights)?;
    for epoch in 1..=config.epochs {
        let eps = Array2::from_shape_simple_fn((n, config.latent_dim), || noise_rng.sample::<f64, _>(StandardNormal));
        let (terms, grads) = loss_and_gradients(&problem, &weights, &eps)?;
        let total = terms.total();
        if !total.is_finite() {
            return Err(VgaeError::NonFiniteLoss { epoch, loss: total });
        }
        match config.optimizer {
            Optimizer::Adam => adam.update(&mut weights, &grads, config.learning_rate),
            Optimizer::GradientDescent => {
                for (w, g) in weights.blocks_mut().into_iter().zip(grads.blocks()) {
                    w.scaled_add(-config.learning_rate, g);
                }
            }
        }
        if !weights.is_finite() {
            return Err(VgaeError::NonFiniteLoss { epoch, loss: total });
        }
        (enc, roc) = eval(&weights)?;
        log.push(EpochLog {
            epoch,
            loss: total,
            roc,
        });
        log::trace!("vgae epoch {epoch}: loss {total:.6} roc {roc:.4}");
        if roc >= config.early_stop_roc {
            break;
        }
    }

    Ok(VgaeModel {
        weights,
        a_bar: problem.a_bar,
        mu: enc.mu,
        log_sigma: enc.log_sigma,
        roc,
        log,
        held_out,
        sampled_negatives,
    })
}
