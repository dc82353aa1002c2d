//! Flight-connection graphs accumulated over column-generation iterations
//! and the node feature matrix built from them.
//!
//! Every iteration contributes a binary adjacency (connections used by the
//! LP support) and a weighted one (the same connections weighted by the
//! summed primal values). The feature matrix is `[X | Y | I | O]`: the
//! cost-ratio weighted sum of weighted adjacencies, the scaled dual vectors
//! one column per iteration, and the weighted in- and out-degrees.

use std::io::Write;

use ndarray::{concatenate, s, Array1, Array2, Axis};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("connection ({0}, {1}) does not go forward in time")]
    NotForward(usize, usize),
    #[error("flight {flight} outside a graph of {size} flights")]
    FlightOutOfRange { flight: usize, size: usize },
    #[error("matrix sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("iteration {0} has a zero or non-finite LP cost")]
    DegenerateCost(usize),
    #[error("dual vector of iteration {iteration} has {len} entries, expected {expected}")]
    DualLength {
        iteration: usize,
        len: usize,
        expected: usize,
    },
    #[error("no iteration records")]
    Empty,
}

/// Binary, strictly upper-triangular connection matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix(Array2<bool>);

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self(Array2::from_elem((n, n), false))
    }

    /// Builds from a list of pairs; each must satisfy `i < j < n`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, FeatureError> {
        let mut a = Self::empty(n);
        for &(i, j) in edges {
            a.set(i, j)?;
        }
        Ok(a)
    }

    fn set(&mut self, i: usize, j: usize) -> Result<(), FeatureError> {
        let n = self.size();
        if i >= j {
            return Err(FeatureError::NotForward(i, j));
        }
        if j >= n {
            return Err(FeatureError::FlightOutOfRange { flight: j, size: n });
        }
        self.0[[i, j]] = true;
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.0[[i, j]]
    }

    /// Edges in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.0
            .indexed_iter()
            .filter(|(_, &v)| v)
            .map(|((i, j), _)| (i, j))
            .collect()
    }

    pub fn num_edges(&self) -> usize {
        self.0.iter().filter(|&&v| v).count()
    }

    pub fn to_f64(&self) -> Array2<f64> {
        self.0.mapv(|v| if v { 1.0 } else { 0.0 })
    }

    pub fn as_array(&self) -> &Array2<bool> {
        &self.0
    }
}

/// Union of the adjacencies of every recorded iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalAdjacency {
    pub matrix: AdjacencyMatrix,
    pub iterations: usize,
}

/// The per-iteration adjacency and its primal-weighted counterpart.
///
/// `pairings` yields each support pairing's flight sequence with its primal
/// value; consecutive flights form the connections.
pub fn build_adjacency<'p>(
    num_flights: usize,
    pairings: impl IntoIterator<Item = (&'p [usize], f64)>,
) -> Result<(AdjacencyMatrix, Array2<f64>), FeatureError> {
    let mut a = AdjacencyMatrix::empty(num_flights);
    let mut w = Array2::zeros((num_flights, num_flights));
    for (seq, x) in pairings {
        if let Some(&f) = seq.iter().find(|&&f| f >= num_flights) {
            return Err(FeatureError::FlightOutOfRange {
                flight: f,
                size: num_flights,
            });
        }
        for pair in seq.windows(2) {
            a.set(pair[0], pair[1])?;
            w[[pair[0], pair[1]]] += x;
        }
    }
    Ok((a, w))
}

/// Element-wise OR of same-sized adjacencies.
pub fn superimpose(history: &[AdjacencyMatrix]) -> Result<GlobalAdjacency, FeatureError> {
    let first = history.first().ok_or(FeatureError::Empty)?;
    let mut acc = first.clone();
    for a in &history[1..] {
        if a.size() != acc.size() {
            return Err(FeatureError::SizeMismatch(acc.size(), a.size()));
        }
        acc.0.zip_mut_with(&a.0, |x, &y| *x |= y);
    }
    Ok(GlobalAdjacency {
        matrix: acc,
        iterations: history.len(),
    })
}

/// Everything kept from one CG iteration for learning.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub lp_cost: f64,
    pub duals: Vec<f64>,
    pub adjacency: AdjacencyMatrix,
    pub weighted: Array2<f64>,
    /// Previous LP cost over this one; 1 for the first record.
    pub cost_ratio: f64,
}

/// Iteration records in order, with the running union of adjacencies.
#[derive(Debug, Clone)]
pub struct History {
    num_flights: usize,
    records: Vec<IterationRecord>,
    global: AdjacencyMatrix,
}

impl History {
    pub fn new(num_flights: usize) -> Self {
        Self {
            num_flights,
            records: Vec::new(),
            global: AdjacencyMatrix::empty(num_flights),
        }
    }

    pub fn push(
        &mut self,
        lp_cost: f64,
        duals: Vec<f64>,
        adjacency: AdjacencyMatrix,
        weighted: Array2<f64>,
    ) -> Result<(), FeatureError> {
        let t = self.records.len() + 1;
        if !(lp_cost.is_finite() && lp_cost != 0.0) {
            return Err(FeatureError::DegenerateCost(t));
        }
        if adjacency.size() != self.num_flights {
            return Err(FeatureError::SizeMismatch(self.num_flights, adjacency.size()));
        }
        if weighted.dim() != (self.num_flights, self.num_flights) {
            return Err(FeatureError::SizeMismatch(self.num_flights, weighted.nrows()));
        }
        if duals.len() != self.num_flights {
            return Err(FeatureError::DualLength {
                iteration: t,
                len: duals.len(),
                expected: self.num_flights,
            });
        }
        let cost_ratio = self.records.last().map_or(1.0, |r| r.lp_cost / lp_cost);
        self.global.0.zip_mut_with(&adjacency.0, |x, &y| *x |= y);
        self.records.push(IterationRecord {
            lp_cost,
            duals,
            adjacency,
            weighted,
            cost_ratio,
        });
        Ok(())
    }

    pub fn clear(&mut self) {
        *self = Self::new(self.num_flights);
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn num_flights(&self) -> usize {
        self.num_flights
    }

    pub fn global(&self) -> GlobalAdjacency {
        GlobalAdjacency {
            matrix: self.global.clone(),
            iterations: self.records.len(),
        }
    }
}

fn check_records(records: &[IterationRecord]) -> Result<usize, FeatureError> {
    let n = records.first().ok_or(FeatureError::Empty)?.adjacency.size();
    for r in records {
        if r.weighted.dim() != (n, n) {
            return Err(FeatureError::SizeMismatch(n, r.weighted.nrows()));
        }
    }
    Ok(n)
}

/// `X = sum_k CR(k) * W(k)` over the weighted adjacencies.
pub fn enhanced_primal(records: &[IterationRecord]) -> Result<Array2<f64>, FeatureError> {
    let n = check_records(records)?;
    let mut x = Array2::zeros((n, n));
    for r in records {
        x.scaled_add(r.cost_ratio, &r.weighted);
    }
    Ok(x)
}

/// Column `k` is `CR(k) / C(k) * y(k)`.
pub fn enhanced_dual(records: &[IterationRecord]) -> Result<Array2<f64>, FeatureError> {
    let n = check_records(records)?;
    let mut y = Array2::zeros((n, records.len()));
    for (k, r) in records.iter().enumerate() {
        if !(r.lp_cost.is_finite() && r.lp_cost != 0.0) {
            return Err(FeatureError::DegenerateCost(k + 1));
        }
        if r.duals.len() != n {
            return Err(FeatureError::DualLength {
                iteration: k + 1,
                len: r.duals.len(),
                expected: n,
            });
        }
        let scale = r.cost_ratio / r.lp_cost;
        for (f, &d) in r.duals.iter().enumerate() {
            y[[f, k]] = scale * d;
        }
    }
    Ok(y)
}

/// Cost-ratio weighted in-degrees (column sums) and out-degrees (row sums).
pub fn enhanced_degrees(records: &[IterationRecord]) -> Result<(Array1<f64>, Array1<f64>), FeatureError> {
    let n = check_records(records)?;
    let mut incoming = Array1::zeros(n);
    let mut outgoing = Array1::zeros(n);
    for r in records {
        let w = &r.weighted;
        for f in 0..n {
            let col: f64 = (0..n).map(|i| w[[i, f]]).sum();
            let row: f64 = (0..n).map(|j| w[[f, j]]).sum();
            incoming[f] += r.cost_ratio * col;
            outgoing[f] += r.cost_ratio * row;
        }
    }
    Ok((incoming, outgoing))
}

/// How min-max scaling is scoped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// One min and max over each whole block.
    #[default]
    PerBlock,
    /// One min and max per column.
    PerColumn,
}

/// Min-max scales in place to `[0, 1]`; a constant block becomes zeros.
pub fn min_max_normalize(block: &mut Array2<f64>) {
    let (lo, hi) = block.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if block.is_empty() {
        return;
    }
    let range = hi - lo;
    if range > 0.0 {
        block.mapv_inplace(|v| ((v - lo) / range).clamp(0.0, 1.0));
    } else {
        block.fill(0.0);
    }
}

fn normalize(block: &mut Array2<f64>, mode: Normalization) {
    match mode {
        Normalization::PerBlock => min_max_normalize(block),
        Normalization::PerColumn => {
            for mut col in block.columns_mut() {
                let mut owned = col.to_owned().insert_axis(Axis(1));
                min_max_normalize(&mut owned);
                col.assign(&owned.column(0));
            }
        }
    }
}

/// Node features `[X | Y | I | O]`, each block scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub data: Array2<f64>,
    pub iterations: usize,
}

impl FeatureMatrix {
    pub fn num_flights(&self) -> usize {
        self.data.nrows()
    }

    pub fn width(&self) -> usize {
        self.data.ncols()
    }

    pub fn primal_block(&self) -> ndarray::ArrayView2<'_, f64> {
        let n = self.num_flights();
        self.data.slice(s![.., 0..n])
    }

    pub fn dual_block(&self) -> ndarray::ArrayView2<'_, f64> {
        let n = self.num_flights();
        self.data.slice(s![.., n..n + self.iterations])
    }

    pub fn in_degree(&self) -> ndarray::ArrayView1<'_, f64> {
        self.data.column(self.num_flights() + self.iterations)
    }

    pub fn out_degree(&self) -> ndarray::ArrayView1<'_, f64> {
        self.data.column(self.num_flights() + self.iterations + 1)
    }
}

pub fn assemble_features(records: &[IterationRecord], mode: Normalization) -> Result<FeatureMatrix, FeatureError> {
    let mut x = enhanced_primal(records)?;
    let mut y = enhanced_dual(records)?;
    let (i, o) = enhanced_degrees(records)?;
    let mut i = i.insert_axis(Axis(1));
    let mut o = o.insert_axis(Axis(1));
    for block in [&mut x, &mut y, &mut i, &mut o] {
        normalize(block, mode);
    }
    let data = concatenate(Axis(1), &[x.view(), y.view(), i.view(), o.view()]).expect("blocks share the row count");
    Ok(FeatureMatrix {
        data,
        iterations: records.len(),
    })
}

/// Every pair `(i, j)` with `i < j < n`, row-major.
pub fn strict_upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Splits `domain` into pairs present in the global adjacency and pairs
/// absent from it, both in domain order.
pub fn partition_edges(
    g: &GlobalAdjacency,
    domain: &[(usize, usize)],
) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>), FeatureError> {
    let n = g.matrix.size();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for &(i, j) in domain {
        if i >= j {
            return Err(FeatureError::NotForward(i, j));
        }
        if j >= n {
            return Err(FeatureError::FlightOutOfRange { flight: j, size: n });
        }
        if g.matrix.get(i, j) {
            pos.push((i, j));
        } else {
            neg.push((i, j));
        }
    }
    Ok((pos, neg))
}

/// Writes a matrix as whitespace-separated rows.
pub fn write_grid<W: Write>(m: &Array2<f64>, mut out: W) -> std::io::Result<()> {
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn record(n: usize, cost: f64, edges: &[(usize, usize, f64)], duals: Vec<f64>, history: &mut History) {
        let seqs: Vec<(Vec<usize>, f64)> = edges.iter().map(|&(i, j, x)| (vec![i, j], x)).collect();
        let (a, w) = build_adjacency(n, seqs.iter().map(|(s, x)| (s.as_slice(), *x))).unwrap();
        history.push(cost, duals, a, w).unwrap();
    }

    #[test]
    fn one_pairing_one_edge() {
        let (a, w) = build_adjacency(2, [(&[0usize, 1][..], 1.0)]).unwrap();
        assert!(a.get(0, 1));
        assert_eq!(w[[0, 1]], 1.0);
    }

    #[test]
    fn shared_edge_sums_primals() {
        let p1 = [2usize, 5];
        let p2 = [1usize, 2, 5];
        let (a, w) = build_adjacency(6, [(&p1[..], 0.25), (&p2[..], 0.5)]).unwrap();
        assert_eq!(w[[2, 5]], 0.75);
        assert_eq!(w[[1, 2]], 0.5);
        assert_eq!(a.num_edges(), 2);
    }

    #[test]
    fn backward_connection_is_rejected() {
        assert_eq!(
            build_adjacency(3, [(&[2usize, 1][..], 1.0)]),
            Err(FeatureError::NotForward(2, 1))
        );
        assert!(matches!(
            build_adjacency(3, [(&[0usize, 4][..], 1.0)]),
            Err(FeatureError::FlightOutOfRange { .. })
        ));
    }

    #[test]
    fn superimpose_unions() {
        let a1 = AdjacencyMatrix::from_edges(3, &[(0, 1)]).unwrap();
        let a2 = AdjacencyMatrix::from_edges(3, &[(1, 2)]).unwrap();
        assert_eq!(superimpose(std::slice::from_ref(&a1)).unwrap().matrix, a1);
        let g = superimpose(&[a1, a2]).unwrap();
        assert_eq!(g.matrix.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(g.iterations, 2);
        let bad = superimpose(&[AdjacencyMatrix::empty(2), AdjacencyMatrix::empty(3)]);
        assert_eq!(bad, Err(FeatureError::SizeMismatch(2, 3)));
    }

    #[test]
    fn cost_ratio_weights_primal() {
        let mut h = History::new(3);
        record(3, 200.0, &[(0, 1, 1.0)], vec![0.0; 3], &mut h);
        assert_eq!(enhanced_primal(h.records()).unwrap(), h.records()[0].weighted);
        record(3, 100.0, &[(0, 1, 0.5), (1, 2, 1.0)], vec![0.0; 3], &mut h);
        assert_eq!(h.records()[1].cost_ratio, 2.0);
        let x = enhanced_primal(h.records()).unwrap();
        assert_eq!(x[[0, 1]], 2.0);
        assert_eq!(x[[1, 2]], 2.0);
    }

    #[test]
    fn dual_columns_scaled_by_cost() {
        let mut h = History::new(2);
        record(2, 100.0, &[], vec![50.0, 20.0], &mut h);
        let y = enhanced_dual(h.records()).unwrap();
        assert_eq!(y, array![[0.5], [0.2]]);
        record(2, 50.0, &[], vec![0.0, 0.0], &mut h);
        let y = enhanced_dual(h.records()).unwrap();
        assert_eq!(y.column(1).to_vec(), vec![0.0, 0.0]);
    }

    #[test]
    fn degenerate_cost_rejected() {
        let mut h = History::new(2);
        let r = h.push(0.0, vec![0.0; 2], AdjacencyMatrix::empty(2), Array2::zeros((2, 2)));
        assert_eq!(r, Err(FeatureError::DegenerateCost(1)));
    }

    #[test]
    fn degrees_of_single_edge() {
        let mut h = History::new(3);
        record(3, 10.0, &[(0, 1, 1.0)], vec![0.0; 3], &mut h);
        let (i, o) = enhanced_degrees(h.records()).unwrap();
        assert_eq!(i.to_vec(), vec![0.0, 1.0, 0.0]);
        assert_eq!(o.to_vec(), vec![1.0, 0.0, 0.0]);
        let mut empty = History::new(3);
        record(3, 10.0, &[], vec![0.0; 3], &mut empty);
        let (i, o) = enhanced_degrees(empty.records()).unwrap();
        assert!(i.iter().chain(o.iter()).all(|&v| v == 0.0));
    }

    #[test]
    fn features_shape_and_constant_blocks() {
        let mut h = History::new(4);
        record(4, 10.0, &[(0, 1, 1.0), (1, 3, 0.5)], vec![1.0; 4], &mut h);
        record(4, 8.0, &[(2, 3, 1.0)], vec![1.0; 4], &mut h);
        let f = assemble_features(h.records(), Normalization::PerBlock).unwrap();
        assert_eq!(f.data.dim(), (4, 4 + 2 + 2));
        assert!(f.data.iter().all(|&v| (0.0..=1.0).contains(&v)));
        // duals constant per column but not over the block
        assert_eq!(f.dual_block().column(0).to_vec(), vec![0.0; 4]);
        assert_eq!(f.dual_block().column(1).to_vec(), vec![1.0; 4]);
        let c = assemble_features(h.records(), Normalization::PerColumn).unwrap();
        assert!(c.dual_block().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn partition_edges_cases() {
        let g = GlobalAdjacency {
            matrix: AdjacencyMatrix::empty(3),
            iterations: 1,
        };
        let dom = strict_upper_pairs(3);
        assert_eq!(partition_edges(&g, &dom).unwrap(), (vec![], dom.clone()));
        let full = GlobalAdjacency {
            matrix: AdjacencyMatrix::from_edges(3, &dom).unwrap(),
            iterations: 1,
        };
        assert_eq!(partition_edges(&full, &dom).unwrap(), (dom.clone(), vec![]));
    }

    #[test]
    fn grid_export() {
        let mut buf = Vec::new();
        write_grid(&array![[1.0, 0.5], [0.0, 2.0]], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1 0.5\n0 2\n");
    }
}
