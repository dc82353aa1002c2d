//! Set covering: `min c'x  s.t.  A x >= 1, x >= 0` (LP) or `x` binary (IP).

/// A column is the list of rows it covers plus its cost.
pub type Column = (Vec<usize>, f64);

/// Optimal LP objective by enumerating every basic solution of
/// `[A | -I] (x, s) = 1`, `(x, s) >= 0`. Returns `None` when infeasible.
///
/// Bases are grown one column at a time with incremental elimination, so a
/// dependent prefix skips every basis containing it.
pub fn lp_vertex_optimum(num_rows: usize, columns: &[Column]) -> Option<f64> {
    let m = num_rows;
    assert!(m <= MAX_ROWS, "vertex oracle limited to {MAX_ROWS} rows");
    let n = columns.len();
    if m == 0 {
        return Some(0.0);
    }
    let mut dense = vec![[0.0; MAX_ROWS]; n + m];
    let mut cost = vec![0.0; n + m];
    for (k, (rows, c)) in columns.iter().enumerate() {
        for &r in rows {
            dense[k][r] = 1.0;
        }
        cost[k] = *c;
    }
    for r in 0..m {
        dense[n + r][r] = -1.0;
    }
    let mut search = VertexSearch {
        m,
        dense: &dense,
        cost: &cost,
        basis: Vec::with_capacity(m),
        frames: Vec::with_capacity(m),
        best: None,
    };
    search.grow(0);
    search.best
}

const MAX_ROWS: usize = 12;

/// A basis column reduced against the earlier ones, with its expression in
/// terms of the original basis columns.
struct Frame {
    vec: [f64; MAX_ROWS],
    coef: [f64; MAX_ROWS],
    pivot: usize,
}

struct VertexSearch<'a> {
    m: usize,
    dense: &'a [[f64; MAX_ROWS]],
    cost: &'a [f64],
    basis: Vec<usize>,
    frames: Vec<Frame>,
    best: Option<f64>,
}

impl VertexSearch<'_> {
    fn reduce(&self, mut vec: [f64; MAX_ROWS], mut coef: [f64; MAX_ROWS]) -> ([f64; MAX_ROWS], [f64; MAX_ROWS]) {
        for f in &self.frames {
            let t = vec[f.pivot] / f.vec[f.pivot];
            if t != 0.0 {
                for r in 0..self.m {
                    vec[r] -= t * f.vec[r];
                }
                for (c, fc) in coef.iter_mut().zip(&f.coef).take(self.frames.len()) {
                    *c -= t * fc;
                }
            }
        }
        (vec, coef)
    }

    fn grow(&mut self, from: usize) {
        let depth = self.basis.len();
        if depth == self.m {
            self.evaluate();
            return;
        }
        let total = self.dense.len();
        for k in from..=total - (self.m - depth) {
            let mut coef = [0.0; MAX_ROWS];
            coef[depth] = 1.0;
            let (vec, coef) = self.reduce(self.dense[k], coef);
            let pivot = (0..self.m)
                .max_by(|&a, &b| vec[a].abs().total_cmp(&vec[b].abs()))
                .unwrap();
            if vec[pivot].abs() < 1e-10 {
                continue;
            }
            self.basis.push(k);
            self.frames.push(Frame { vec, coef, pivot });
            self.grow(k + 1);
            self.frames.pop();
            self.basis.pop();
        }
    }

    /// Expresses the all-ones right-hand side in the current basis.
    fn evaluate(&mut self) {
        let mut x = [0.0; MAX_ROWS];
        let mut rhs = [1.0; MAX_ROWS];
        for f in &self.frames {
            let t = rhs[f.pivot] / f.vec[f.pivot];
            for r in 0..self.m {
                rhs[r] -= t * f.vec[r];
            }
            for (xj, c) in x.iter_mut().zip(&f.coef).take(self.m) {
                *xj += t * c;
            }
        }
        if x[..self.m].iter().any(|&v| v < -1e-9) {
            return;
        }
        let obj: f64 = self.basis.iter().zip(&x).map(|(&k, v)| self.cost[k] * v).sum();
        self.best = Some(self.best.map_or(obj, |b| b.min(obj)));
    }
}

/// Optimal integer cover by trying every subset of columns. Returns the cost
/// and the chosen column indices (lowest cost; among ties, the first subset
/// met in include-first depth-first order).
pub fn ip_exhaustive(num_rows: usize, columns: &[Column]) -> Option<(f64, Vec<usize>)> {
    assert!(columns.len() <= 25, "exhaustive IP oracle limited to 25 columns");
    assert!(num_rows <= 64);
    let full: u64 = if num_rows == 64 {
        u64::MAX
    } else {
        (1u64 << num_rows) - 1
    };
    let masks: Vec<u64> = columns
        .iter()
        .map(|(rows, _)| rows.iter().fold(0u64, |m, &r| m | (1 << r)))
        .collect();
    let costs: Vec<f64> = columns.iter().map(|c| c.1).collect();
    let mut best: Option<(f64, u32)> = None;
    subsets(&masks, &costs, full, 0, 0, 0.0, 0, &mut best);
    best.map(|(cost, subset)| {
        let chosen = (0..columns.len()).filter(|k| subset & (1 << k) != 0).collect();
        (cost, chosen)
    })
}

#[allow(clippy::too_many_arguments)]
fn subsets(
    masks: &[u64],
    costs: &[f64],
    full: u64,
    k: usize,
    covered: u64,
    cost: f64,
    subset: u32,
    best: &mut Option<(f64, u32)>,
) {
    if k == masks.len() {
        if covered == full && best.is_none_or(|(b, _)| cost < b) {
            *best = Some((cost, subset));
        }
        return;
    }
    subsets(
        masks,
        costs,
        full,
        k + 1,
        covered | masks[k],
        cost + costs[k],
        subset | (1 << k),
        best,
    );
    subsets(masks, costs, full, k + 1, covered, cost, subset, best);
}
