//! Element-by-element versions of the connection-graph features, on nested
//! `Vec`s. Matrices are row-major `m[i][j]`.

pub type Grid = Vec<Vec<f64>>;

/// Summed primal value per connection over `(flight sequence, x)` pairs.
pub fn weighted_adjacency(n: usize, pairings: &[(Vec<usize>, f64)]) -> Grid {
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            for (seq, x) in pairings {
                if seq.windows(2).any(|c| c[0] == i && c[1] == j) {
                    w[i][j] += x;
                }
            }
        }
    }
    w
}

pub fn or_union(mats: &[Vec<Vec<bool>>]) -> Vec<Vec<bool>> {
    let n = mats[0].len();
    let mut out = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = mats.iter().any(|m| m[i][j]);
        }
    }
    out
}

/// Previous cost over current cost, starting at 1.
pub fn cost_ratios(costs: &[f64]) -> Vec<f64> {
    (0..costs.len())
        .map(|k| if k == 0 { 1.0 } else { costs[k - 1] / costs[k] })
        .collect()
}

pub fn enhanced_primal(costs: &[f64], weighted: &[Grid]) -> Grid {
    let cr = cost_ratios(costs);
    let n = weighted[0].len();
    let mut x = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..costs.len() {
                x[i][j] += cr[k] * weighted[k][i][j];
            }
        }
    }
    x
}

pub fn enhanced_dual(costs: &[f64], duals: &[Vec<f64>]) -> Grid {
    let cr = cost_ratios(costs);
    let n = duals[0].len();
    (0..n)
        .map(|f| (0..costs.len()).map(|k| cr[k] / costs[k] * duals[k][f]).collect())
        .collect()
}

/// (in-degree, out-degree) per flight.
pub fn enhanced_degrees(costs: &[f64], weighted: &[Grid]) -> (Vec<f64>, Vec<f64>) {
    let cr = cost_ratios(costs);
    let n = weighted[0].len();
    let mut inc = vec![0.0; n];
    let mut out = vec![0.0; n];
    for k in 0..costs.len() {
        for f in 0..n {
            let col: f64 = (0..n).map(|i| weighted[k][i][f]).sum();
            let row: f64 = (0..n).map(|j| weighted[k][f][j]).sum();
            inc[f] += cr[k] * col;
            out[f] += cr[k] * row;
        }
    }
    (inc, out)
}

/// Scales all entries by one min and max; constant grids become zero.
pub fn min_max(grid: &Grid) -> Grid {
    let all: Vec<f64> = grid.iter().flatten().copied().collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    grid.iter()
        .map(|row| {
            row.iter()
                .map(|&v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
                .collect()
        })
        .collect()
}

/// `[X | Y | I | O]` with each block scaled separately.
pub fn assemble(costs: &[f64], weighted: &[Grid], duals: &[Vec<f64>]) -> Grid {
    let x = min_max(&enhanced_primal(costs, weighted));
    let y = min_max(&enhanced_dual(costs, duals));
    let (inc, out) = enhanced_degrees(costs, weighted);
    let inc = min_max(&inc.into_iter().map(|v| vec![v]).collect());
    let out = min_max(&out.into_iter().map(|v| vec![v]).collect());
    (0..x.len())
        .map(|f| {
            let mut row = x[f].clone();
            row.extend(&y[f]);
            row.push(inc[f][0]);
            row.push(out[f][0]);
            row
        })
        .collect()
}

/// (pairs with a one, pairs with a zero) among `domain`.
pub fn split_pairs(g: &[Vec<bool>], domain: &[(usize, usize)]) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let pos = domain.iter().copied().filter(|&(i, j)| g[i][j]).collect();
    let neg = domain.iter().copied().filter(|&(i, j)| !g[i][j]).collect();
    (pos, neg)
}
