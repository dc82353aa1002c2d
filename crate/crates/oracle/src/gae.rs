//! Entry-wise formulas for the graph auto-encoder pieces.

/// `(S + I)_ij / sqrt(d_i d_j)` with `S` the symmetrised 0/1 matrix.
pub fn normalized_adjacency(upper: &[Vec<bool>]) -> Vec<Vec<f64>> {
    let n = upper.len();
    let s = |i: usize, j: usize| -> f64 {
        if i == j || upper[i][j] || upper[j][i] {
            1.0
        } else {
            0.0
        }
    };
    let deg: Vec<f64> = (0..n).map(|i| (0..n).map(|j| s(i, j)).sum()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| s(i, j) / (deg[i] * deg[j]).sqrt()).collect())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn edge_probability(z: &[Vec<f64>], i: usize, j: usize) -> f64 {
    1.0 / (1.0 + (-dot(&z[i], &z[j])).exp())
}

/// Reconstruction and KL terms of the training loss, summed one pair and one
/// entry at a time with the textbook cross-entropy.
pub fn loss_terms(upper: &[Vec<bool>], mu: &[Vec<f64>], log_sigma: &[Vec<f64>], z: &[Vec<f64>]) -> (f64, f64) {
    let n = upper.len();
    let pairs = n * (n - 1) / 2;
    let positives = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| upper[i][j])
        .count();
    let w = (pairs - positives) as f64 / positives as f64;
    let mut bce = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let p = edge_probability(z, i, j);
            bce -= if upper[i][j] { w * p.ln() } else { (1.0 - p).ln() };
        }
    }
    let mut kl = 0.0;
    for i in 0..n {
        for k in 0..mu[i].len() {
            let s2 = (2.0 * log_sigma[i][k]).exp();
            kl += 0.5 * (mu[i][k] * mu[i][k] + s2 - 1.0 - 2.0 * log_sigma[i][k]);
        }
    }
    (bce / pairs as f64, kl / (n * n) as f64)
}
