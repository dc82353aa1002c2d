//! Best-first branch-and-bound over binary column selections.
//!
//! Each node fixes some columns to one or zero. Its LP is the residual set
//! cover: rows covered by fixed-in columns are dropped, fixed-out columns are
//! removed. Branching is on the most fractional column; a greedy rounding of
//! every node LP feeds the incumbent. After the root, columns whose reduced
//! cost alone closes the gap to the incumbent are fixed out for good.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{solve_lp, CoverColumn, LpError, SetCoverInstance, FEASIBILITY_TOL};

pub const DEFAULT_NODE_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct IpSolution {
    /// Chosen column indices, ascending.
    pub selected: Vec<usize>,
    pub cost: f64,
    /// `false` when the node budget ran out before the tree was exhausted.
    pub proven: bool,
    pub nodes: usize,
    pub root_lp: f64,
}

pub fn solve_ip(instance: &SetCoverInstance, node_budget: usize) -> Result<IpSolution, LpError> {
    solve_ip_with_incumbent(instance, node_budget, None)
}

/// Like [`solve_ip`], seeded with a known cover as the initial incumbent.
/// A seed that does not cover every row is ignored.
pub fn solve_ip_with_incumbent(
    instance: &SetCoverInstance,
    node_budget: usize,
    incumbent: Option<&[usize]>,
) -> Result<IpSolution, LpError> {
    instance.validate()?;
    let root = solve_lp(instance)?;
    let mut best = greedy_round(instance, &[], &root.primal);
    if let Some(seed) = incumbent {
        let (cost, covers) = instance.evaluate(seed);
        if covers && cost < best.0 {
            best = (cost, normalized(seed));
        }
    }

    let scale = instance.columns.iter().map(|c| c.cost).fold(1.0_f64, f64::max);
    let gap_tol = 1e-9 * scale;

    // Reduced-cost fixing: any cover using column k costs at least root + d_k.
    let mut alive = vec![true; instance.columns.len()];
    for (k, col) in instance.columns.iter().enumerate() {
        let d = col.cost - col.rows.iter().map(|&r| root.duals.values()[r]).sum::<f64>();
        if root.cost + d > best.0 + gap_tol {
            alive[k] = false;
        }
    }

    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    heap.push(Node {
        bound: root.cost,
        id: next_id,
        fixed: Vec::new(),
    });
    next_id += 1;

    let mut nodes = 0usize;
    let mut proven = true;
    while let Some(node) = heap.pop() {
        if node.bound >= best.0 - gap_tol {
            continue;
        }
        if nodes >= node_budget {
            proven = false;
            break;
        }
        nodes += 1;

        let Some(relax) = NodeLp::solve(instance, &alive, &node.fixed)? else {
            continue;
        };
        if relax.bound >= best.0 - gap_tol {
            continue;
        }
        let rounded = greedy_round(instance, &relax.ones, &relax.values);
        if rounded.0 < best.0 {
            best = rounded;
        }
        let Some(branch_col) = most_fractional(&relax.values, &relax.ones) else {
            // Integral relaxation: its support plus the fixed-in columns is a cover.
            continue;
        };
        for value in [true, false] {
            let mut fixed = node.fixed.clone();
            fixed.push((branch_col, value));
            heap.push(Node {
                bound: relax.bound,
                id: next_id,
                fixed,
            });
            next_id += 1;
        }
    }

    Ok(IpSolution {
        selected: best.1,
        cost: best.0,
        proven,
        nodes,
        root_lp: root.cost,
    })
}

struct Node {
    bound: f64,
    id: usize,
    fixed: Vec<(usize, bool)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

struct NodeLp {
    bound: f64,
    /// Primal value per original column (fixed-in columns read 1).
    values: Vec<f64>,
    ones: Vec<usize>,
}

impl NodeLp {
    /// `None` when the node is infeasible.
    fn solve(inst: &SetCoverInstance, alive: &[bool], fixed: &[(usize, bool)]) -> Result<Option<Self>, LpError> {
        let n = inst.columns.len();
        let mut state: Vec<Option<bool>> = vec![None; n];
        for &(k, v) in fixed {
            state[k] = Some(v);
        }
        let ones: Vec<usize> = (0..n).filter(|&k| state[k] == Some(true)).collect();
        let mut covered = vec![false; inst.num_flights];
        let mut fixed_cost = 0.0;
        for &k in &ones {
            fixed_cost += inst.columns[k].cost;
            for &r in &inst.columns[k].rows {
                covered[r] = true;
            }
        }
        let mut row_map = vec![usize::MAX; inst.num_flights];
        let mut m = 0;
        for r in 0..inst.num_flights {
            if !covered[r] {
                row_map[r] = m;
                m += 1;
            }
        }
        let mut values = vec![0.0; n];
        for &k in &ones {
            values[k] = 1.0;
        }
        if m == 0 {
            return Ok(Some(Self {
                bound: fixed_cost,
                values,
                ones,
            }));
        }
        let mut free = Vec::new();
        let mut cols = Vec::new();
        for k in 0..n {
            if state[k].is_some() || !alive[k] {
                continue;
            }
            let rows: Vec<usize> = inst.columns[k]
                .rows
                .iter()
                .filter(|&&r| !covered[r])
                .map(|&r| row_map[r])
                .collect();
            if !rows.is_empty() {
                free.push(k);
                cols.push(CoverColumn {
                    rows,
                    cost: inst.columns[k].cost,
                });
            }
        }
        let sub = SetCoverInstance::new(m, cols);
        let lp = match solve_lp(&sub) {
            Ok(lp) => lp,
            Err(LpError::Infeasible { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        for (j, &k) in free.iter().enumerate() {
            values[k] = lp.primal[j];
        }
        Ok(Some(Self {
            bound: fixed_cost + lp.cost,
            values,
            ones,
        }))
    }
}

fn most_fractional(values: &[f64], ones: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &x) in values.iter().enumerate() {
        if x <= FEASIBILITY_TOL || x >= 1.0 - FEASIBILITY_TOL || ones.contains(&k) {
            continue;
        }
        let dist = (x - 0.5).abs();
        if best.is_none_or(|(_, d)| dist < d) {
            best = Some((k, dist));
        }
    }
    best.map(|(k, _)| k)
}

/// Rounds an LP point to a cover: keep the fixed-in and (near) one-valued
/// columns, add the cheapest column per newly covered row until every row is
/// covered (breaking ties by larger LP value), then drop redundant columns,
/// most expensive first.
fn greedy_round(inst: &SetCoverInstance, ones: &[usize], values: &[f64]) -> (f64, Vec<usize>) {
    let n = inst.columns.len();
    let mut chosen = vec![false; n];
    let mut cover_count = vec![0usize; inst.num_flights];
    let mut uncovered = inst.num_flights;
    let take = |k: usize, chosen: &mut Vec<bool>, cover_count: &mut Vec<usize>, uncovered: &mut usize| {
        chosen[k] = true;
        for &r in &inst.columns[k].rows {
            if cover_count[r] == 0 {
                *uncovered -= 1;
            }
            cover_count[r] += 1;
        }
    };
    for k in 0..n {
        if ones.contains(&k) || values[k] >= 1.0 - FEASIBILITY_TOL {
            take(k, &mut chosen, &mut cover_count, &mut uncovered);
        }
    }
    while uncovered > 0 {
        let mut best: Option<(usize, f64, f64)> = None;
        for k in 0..n {
            if chosen[k] {
                continue;
            }
            let gain = inst.columns[k].rows.iter().filter(|&&r| cover_count[r] == 0).count();
            if gain == 0 {
                continue;
            }
            let ratio = inst.columns[k].cost / gain as f64;
            let better = match best {
                None => true,
                Some((_, br, bx)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && values[k] > bx),
            };
            if better {
                best = Some((k, ratio, values[k]));
            }
        }
        let (k, _, _) = best.expect("validated instance is coverable");
        take(k, &mut chosen, &mut cover_count, &mut uncovered);
    }
    let mut by_cost: Vec<usize> = (0..n).filter(|&k| chosen[k]).collect();
    by_cost.sort_by(|&a, &b| inst.columns[b].cost.total_cmp(&inst.columns[a].cost).then(b.cmp(&a)));
    for k in by_cost {
        if inst.columns[k].rows.iter().all(|&r| cover_count[r] > 1) {
            chosen[k] = false;
            for &r in &inst.columns[k].rows {
                cover_count[r] -= 1;
            }
        }
    }
    let selected: Vec<usize> = (0..n).filter(|&k| chosen[k]).collect();
    (inst.evaluate(&selected).0, selected)
}

fn normalized(sel: &[usize]) -> Vec<usize> {
    let mut v = sel.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}
