//! Dense revised simplex for `min c'x  s.t.  A x - s = 1,  x, s >= 0`.
//!
//! Variables are laid out as `[structural 0..n | surplus n..n+m | artificial
//! n+m..n+2m]`. Phase one starts from the all-artificial basis and minimises
//! their sum; remaining zero-valued artificials are pivoted out before phase
//! two. The basis inverse is kept explicitly and refactorised periodically.
//! Dantzig pricing switches to Bland's rule after a run of degenerate pivots.

use super::{DualVector, LpError, LpSolution, SetCoverInstance};

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 30;

pub fn solve_lp(instance: &SetCoverInstance) -> Result<LpSolution, LpError> {
    instance.validate()?;
    let mut s = Simplex::new(instance);
    s.run_phase(Phase::One)?;
    let infeasibility: f64 = s
        .basis
        .iter()
        .zip(&s.xb)
        .filter(|(&k, _)| s.is_artificial(k))
        .map(|(_, v)| v)
        .sum();
    if infeasibility > 1e-7 * s.m as f64 {
        return Err(LpError::Numerical(format!(
            "phase one ended with artificial mass {infeasibility:.3e} on a coverable instance"
        )));
    }
    s.drive_out_artificials()?;
    s.run_phase(Phase::Two)?;
    s.refactor()?;
    Ok(s.solution())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct Simplex<'a> {
    inst: &'a SetCoverInstance,
    m: usize,
    n: usize,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Row-major `m x m` basis inverse.
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,
    dual_tol: f64,
}

impl<'a> Simplex<'a> {
    fn new(inst: &'a SetCoverInstance) -> Self {
        let m = inst.num_flights;
        let n = inst.columns.len();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let mut is_basic = vec![false; n + 2 * m];
        let basis: Vec<usize> = (0..m).map(|i| n + m + i).collect();
        for &k in &basis {
            is_basic[k] = true;
        }
        let scale = inst.columns.iter().map(|c| c.cost).fold(1.0_f64, f64::max);
        Self {
            inst,
            m,
            n,
            basis,
            is_basic,
            binv,
            xb: vec![1.0; m],
            iterations: 0,
            since_refactor: 0,
            degenerate_run: 0,
            dual_tol: 1e-9 * scale,
        }
    }

    fn is_artificial(&self, k: usize) -> bool {
        k >= self.n + self.m
    }

    fn cost(&self, k: usize, phase: Phase) -> f64 {
        match phase {
            Phase::One => {
                if self.is_artificial(k) {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if k < self.n {
                    self.inst.columns[k].cost
                } else {
                    0.0
                }
            }
        }
    }

    /// `y' = c_B' B^-1`.
    fn duals(&self, phase: Phase) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &k) in self.basis.iter().enumerate() {
            let c = self.cost(k, phase);
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yr, b) in y.iter_mut().zip(row) {
                    *yr += c * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, k: usize, y: &[f64], phase: Phase) -> f64 {
        if k < self.n {
            self.cost(k, phase) - self.inst.columns[k].rows.iter().map(|&r| y[r]).sum::<f64>()
        } else if k < self.n + self.m {
            y[k - self.n]
        } else {
            self.cost(k, phase) - y[k - self.n - self.m]
        }
    }

    /// `B^-1 a_k`.
    fn ftran(&self, k: usize) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        if k < self.n {
            for &r in &self.inst.columns[k].rows {
                for (i, ui) in u.iter_mut().enumerate() {
                    *ui += self.binv[i * m + r];
                }
            }
        } else {
            let (r, sign) = if k < self.n + m {
                (k - self.n, -1.0)
            } else {
                (k - self.n - m, 1.0)
            };
            for (i, ui) in u.iter_mut().enumerate() {
                *ui = sign * self.binv[i * m + r];
            }
        }
        u
    }

    fn choose_entering(&self, y: &[f64], phase: Phase, bland: bool) -> Option<usize> {
        let limit = match phase {
            Phase::One => self.n + 2 * self.m,
            Phase::Two => self.n + self.m,
        };
        let tol = match phase {
            Phase::One => 1e-9,
            Phase::Two => self.dual_tol,
        };
        let mut best: Option<(usize, f64)> = None;
        for k in 0..limit {
            if self.is_basic[k] {
                continue;
            }
            let d = self.reduced_cost(k, y, phase);
            if d < -tol {
                if bland {
                    return Some(k);
                }
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((k, d));
                }
            }
        }
        best.map(|(k, _)| k)
    }

    fn choose_leaving(&self, u: &[f64], bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &ui) in u.iter().enumerate() {
            if ui <= PIVOT_TOL {
                continue;
            }
            let ratio = self.xb[i].max(0.0) / ui;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br - 1e-12 {
                        Some((i, ratio))
                    } else if ratio <= br + 1e-12 {
                        let better = if bland {
                            self.basis[i] < self.basis[bi]
                        } else {
                            // Prefer evicting artificials, then the larger pivot.
                            let (ai, ab) = (self.is_artificial(self.basis[i]), self.is_artificial(self.basis[bi]));
                            (ai && !ab) || (ai == ab && ui > u[bi])
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, entering: usize, u: &[f64]) -> Result<(), LpError> {
        let m = self.m;
        let theta = self.xb[row].max(0.0) / u[row];
        for i in 0..m {
            if i != row {
                self.xb[i] = (self.xb[i] - theta * u[i]).max(0.0);
            }
        }
        self.xb[row] = theta;

        let pr = u[row];
        for c in 0..m {
            self.binv[row * m + c] /= pr;
        }
        let pivot_row: Vec<f64> = self.binv[row * m..(row + 1) * m].to_vec();
        for i in 0..m {
            if i != row && u[i] != 0.0 {
                let f = u[i];
                for (b, p) in self.binv[i * m..(i + 1) * m].iter_mut().zip(&pivot_row) {
                    *b -= f * p;
                }
            }
        }

        self.is_basic[self.basis[row]] = false;
        self.is_basic[entering] = true;
        self.basis[row] = entering;
        self.iterations += 1;
        self.since_refactor += 1;
        if theta < 1e-12 {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        Ok(())
    }

    fn run_phase(&mut self, phase: Phase) -> Result<(), LpError> {
        let max_iters = 100 * (self.n + self.m) + 1000;
        self.degenerate_run = 0;
        loop {
            if self.iterations > max_iters {
                return Err(LpError::Numerical(format!(
                    "iteration limit {max_iters} exceeded (cycling safeguard)"
                )));
            }
            let bland = self.degenerate_run > DEGENERATE_RUN_BEFORE_BLAND;
            let y = self.duals(phase);
            let Some(entering) = self.choose_entering(&y, phase, bland) else {
                return Ok(());
            };
            let u = self.ftran(entering);
            let Some(row) = self.choose_leaving(&u, bland) else {
                return Err(LpError::Numerical("unbounded direction in a bounded LP".into()));
            };
            self.pivot(row, entering, &u)?;
        }
    }

    /// Swaps zero-valued artificials out of the basis for surplus or
    /// structural columns. `[A | -I]` has full row rank, so a replacement
    /// always exists.
    fn drive_out_artificials(&mut self) -> Result<(), LpError> {
        let m = self.m;
        for row in 0..m {
            if !self.is_artificial(self.basis[row]) {
                continue;
            }
            let binv_row: Vec<f64> = self.binv[row * m..(row + 1) * m].to_vec();
            let candidate = (0..self.n + m).filter(|&k| !self.is_basic[k]).find(|&k| {
                let v = if k < self.n {
                    self.inst.columns[k].rows.iter().map(|&r| binv_row[r]).sum::<f64>()
                } else {
                    -binv_row[k - self.n]
                };
                v.abs() > 1e-7
            });
            let Some(k) = candidate else {
                return Err(LpError::Numerical("cannot remove artificial from basis".into()));
            };
            let u = self.ftran(k);
            self.pivot(row, k, &u)?;
        }
        self.refactor()
    }

    /// Recomputes `B^-1` from the basis columns by Gauss-Jordan elimination
    /// and resets `x_B = B^-1 1`.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut b = vec![0.0_f64; m * m];
        for (c, &k) in self.basis.iter().enumerate() {
            if k < self.n {
                for &r in &self.inst.columns[k].rows {
                    b[r * m + c] = 1.0;
                }
            } else if k < self.n + m {
                b[(k - self.n) * m + c] = -1.0;
            } else {
                b[(k - self.n - m) * m + c] = 1.0;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let p = (col..m)
                .max_by(|&x, &y| b[x * m + col].abs().total_cmp(&b[y * m + col].abs()))
                .unwrap_or(col);
            if b[p * m + col].abs() < 1e-11 {
                return Err(LpError::Numerical("singular basis on refactorisation".into()));
            }
            if p != col {
                for c in 0..m {
                    b.swap(p * m + c, col * m + c);
                    inv.swap(p * m + c, col * m + c);
                }
            }
            let d = b[col * m + col];
            for c in 0..m {
                b[col * m + c] /= d;
                inv[col * m + c] /= d;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = b[r * m + col];
                if f != 0.0 {
                    for c in 0..m {
                        b[r * m + c] -= f * b[col * m + c];
                        inv[r * m + c] -= f * inv[col * m + c];
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            self.xb[i] = self.binv[i * m..(i + 1) * m].iter().sum::<f64>().max(0.0);
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn solution(&self) -> LpSolution {
        let mut primal = vec![0.0; self.n];
        for (i, &k) in self.basis.iter().enumerate() {
            if k < self.n {
                primal[k] = self.xb[i].clamp(0.0, 1.0);
            }
        }
        let cost = primal.iter().zip(&self.inst.columns).map(|(x, c)| x * c.cost).sum();
        LpSolution {
            primal,
            duals: DualVector::new(self.duals(Phase::Two)),
            cost,
            iterations: self.iterations,
        }
    }
}
