//! Forward pass, loss and hand-written backward pass of the graph
//! auto-encoder.

use ndarray::{Array2, Zip};
use rand::Rng;

use super::VgaeError;
use crate::features::AdjacencyMatrix;

/// `D^-1/2 (A + A^T + I) D^-1/2` with `D` the row sums of `A + A^T + I`.
pub fn normalize_adjacency(a: &AdjacencyMatrix) -> Array2<f64> {
    let n = a.size();
    let mut s = a.to_f64();
    s = &s + &s.t();
    for i in 0..n {
        s[[i, i]] += 1.0;
    }
    let inv_sqrt: Vec<f64> = s.rows().into_iter().map(|r| 1.0 / r.sum().sqrt()).collect();
    for ((i, j), v) in s.indexed_iter_mut() {
        *v *= inv_sqrt[i] * inv_sqrt[j];
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub w0: Array2<f64>,
    pub w_mu: Array2<f64>,
    pub w_sigma: Array2<f64>,
}

impl Weights {
    pub fn zeros(input: usize, hidden: usize, latent: usize) -> Self {
        Self {
            w0: Array2::zeros((input, hidden)),
            w_mu: Array2::zeros((hidden, latent)),
            w_sigma: Array2::zeros((hidden, latent)),
        }
    }

    /// Glorot-uniform initialisation.
    pub fn glorot<R: Rng>(input: usize, hidden: usize, latent: usize, rng: &mut R) -> Self {
        let mut draw = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..=limit))
        };
        let w0 = draw(input, hidden);
        let w_mu = draw(hidden, latent);
        let w_sigma = draw(hidden, latent);
        Self { w0, w_mu, w_sigma }
    }

    pub fn blocks(&self) -> [&Array2<f64>; 3] {
        [&self.w0, &self.w_mu, &self.w_sigma]
    }

    pub fn blocks_mut(&mut self) -> [&mut Array2<f64>; 3] {
        [&mut self.w0, &mut self.w_mu, &mut self.w_sigma]
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub pre_hidden: Array2<f64>,
    pub hidden: Array2<f64>,
    pub propagated_hidden: Array2<f64>,
    pub mu: Array2<f64>,
    pub log_sigma: Array2<f64>,
}

/// `H = relu(A F W0)`, `mu = A H W_mu`, `log_sigma = A H W_sigma`.
///
/// `propagated_features` is `A F`, which stays fixed during training.
pub fn encode_propagated(
    a_bar: &Array2<f64>,
    propagated_features: &Array2<f64>,
    w: &Weights,
) -> Result<Encoding, VgaeError> {
    if propagated_features.ncols() != w.w0.nrows() {
        return Err(VgaeError::Shape(format!(
            "feature width {} but W0 has {} rows",
            propagated_features.ncols(),
            w.w0.nrows()
        )));
    }
    if a_bar.nrows() != propagated_features.nrows() {
        return Err(VgaeError::Shape(format!(
            "{} nodes but {} feature rows",
            a_bar.nrows(),
            propagated_features.nrows()
        )));
    }
    let pre_hidden = propagated_features.dot(&w.w0);
    let hidden = pre_hidden.mapv(|v| v.max(0.0));
    let propagated_hidden = a_bar.dot(&hidden);
    let mu = propagated_hidden.dot(&w.w_mu);
    let log_sigma = propagated_hidden.dot(&w.w_sigma);
    Ok(Encoding {
        pre_hidden,
        hidden,
        propagated_hidden,
        mu,
        log_sigma,
    })
}

pub fn encode(a_bar: &Array2<f64>, features: &Array2<f64>, w: &Weights) -> Result<Encoding, VgaeError> {
    if a_bar.ncols() != features.nrows() {
        return Err(VgaeError::Shape(format!(
            "{} nodes but {} feature rows",
            a_bar.ncols(),
            features.nrows()
        )));
    }
    encode_propagated(a_bar, &a_bar.dot(features), w)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Edge probabilities `sigmoid(z_i . z_j)` for every pair.
pub fn decode(z: &Array2<f64>) -> Array2<f64> {
    z.dot(&z.t()).mapv(sigmoid)
}

/// Training target and weighting over the strict upper triangle.
#[derive(Debug, Clone)]
pub struct Problem {
    pub a_bar: Array2<f64>,
    pub propagated_features: Array2<f64>,
    /// Upper-triangular training positives.
    pub target: AdjacencyMatrix,
    pub pos_weight: f64,
    pub domain_size: usize,
}

impl Problem {
    /// The propagation matrix is built from `target` itself.
    pub fn new(target: AdjacencyMatrix, features: &Array2<f64>) -> Result<Self, VgaeError> {
        let n = target.size();
        if features.nrows() != n {
            return Err(VgaeError::Shape(format!(
                "{n} nodes but {} feature rows",
                features.nrows()
            )));
        }
        let domain_size = n * n.saturating_sub(1) / 2;
        let positives = target.num_edges();
        if positives == 0 || positives == domain_size {
            return Err(VgaeError::DegenerateTarget { positives, domain_size });
        }
        let a_bar = normalize_adjacency(&target);
        let propagated_features = a_bar.dot(features);
        Ok(Self {
            a_bar,
            propagated_features,
            pos_weight: (domain_size - positives) as f64 / positives as f64,
            target,
            domain_size,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.target.size()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms {
    pub reconstruction: f64,
    pub kl: f64,
}

impl LossTerms {
    pub fn total(&self) -> f64 {
        self.reconstruction + self.kl
    }
}

/// Weighted cross-entropy of `sigmoid(z_i . z_j)` against the target over
/// pairs `i < j`, divided by the number of such pairs, plus the Gaussian
/// KL divergence divided by the squared node count.
pub fn loss(problem: &Problem, mu: &Array2<f64>, log_sigma: &Array2<f64>, z: &Array2<f64>) -> LossTerms {
    let n = problem.num_nodes();
    let logits = z.dot(&z.t());
    let mut bce = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let s = logits[[i, j]];
            bce += if problem.target.get(i, j) {
                problem.pos_weight * softplus(-s)
            } else {
                softplus(s)
            };
        }
    }
    LossTerms {
        reconstruction: bce / problem.domain_size as f64,
        kl: kl_divergence(mu, log_sigma) / (n * n) as f64,
    }
}

/// `sum 1/2 (mu^2 + sigma^2 - 1 - 2 log sigma)` over all entries.
pub fn kl_divergence(mu: &Array2<f64>, log_sigma: &Array2<f64>) -> f64 {
    Zip::from(mu).and(log_sigma).fold(0.0, |acc, &m, &ls| {
        acc + 0.5 * (m * m + (2.0 * ls).exp() - 1.0 - 2.0 * ls)
    })
}

/// Loss at `w` for fixed noise `eps`, and its gradient with respect to
/// every weight block.
pub fn loss_and_gradients(
    problem: &Problem,
    w: &Weights,
    eps: &Array2<f64>,
) -> Result<(LossTerms, Weights), VgaeError> {
    let enc = encode_propagated(&problem.a_bar, &problem.propagated_features, w)?;
    if eps.dim() != enc.mu.dim() {
        return Err(VgaeError::Shape(format!(
            "noise {:?} vs latent {:?}",
            eps.dim(),
            enc.mu.dim()
        )));
    }
    let sigma = enc.log_sigma.mapv(f64::exp);
    let z = &enc.mu + &(eps * &sigma);
    let terms = loss(problem, &enc.mu, &enc.log_sigma, &z);

    let n = problem.num_nodes();
    let scale = 1.0 / problem.domain_size as f64;
    let logits = z.dot(&z.t());
    // g[i][j] = dL/ds_ij for i < j, mirrored so dZ = g Z.
    let mut g = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let p = sigmoid(logits[[i, j]]);
            let d = if problem.target.get(i, j) {
                -problem.pos_weight * (1.0 - p)
            } else {
                p
            } * scale;
            g[[i, j]] = d;
            g[[j, i]] = d;
        }
    }
    let dz = g.dot(&z);
    let kappa = 1.0 / (n * n) as f64;
    let d_mu = &dz + &(&enc.mu * kappa);
    let d_log_sigma = Zip::from(&dz)
        .and(eps)
        .and(&sigma)
        .map_collect(|&d, &e, &s| d * e * s + kappa * (s * s - 1.0));
    let ah_t = enc.propagated_hidden.t();
    let g_mu = ah_t.dot(&d_mu);
    let g_sigma = ah_t.dot(&d_log_sigma);
    let d_ah = d_mu.dot(&w.w_mu.t()) + d_log_sigma.dot(&w.w_sigma.t());
    let mut d_pre = problem.a_bar.t().dot(&d_ah);
    Zip::from(&mut d_pre).and(&enc.pre_hidden).for_each(|d, &p| {
        if p <= 0.0 {
            *d = 0.0;
        }
    });
    let g0 = problem.propagated_features.t().dot(&d_pre);
    Ok((
        terms,
        Weights {
            w0: g0,
            w_mu: g_mu,
            w_sigma: g_sigma,
        },
    ))
}
