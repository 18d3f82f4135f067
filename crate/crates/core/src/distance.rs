//! Closed-form Cramér–von Mises distance with Lebesgue integration.
//!
//! For `H(x) = x` the distance collapses to a double sum over observation
//! pairs,
//!
//! ```text
//! L(b) = sum_i sum_j dstar_ij * ( |y+_ij - b'x+_ij| - |y-_ij - b'x-_ij| )
//! ```
//!
//! with `dstar_ij = sum_k d_ik d_jk`, `y±_ij = y_i ± y_j` and
//! `x±_ij = x_i ± x_j`. [`PairTables`] holds those pair quantities for all
//! `n^2` ordered pairs, so evaluating the distance costs `O(n^2 p)` and the
//! tables take `O(n^2 p)` memory.

use crate::error::{MdeError, Result};
use crate::exec::Executor;
use crate::model::{RegressionData, WeightMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct PairTables {
    n: usize,
    p: usize,
    dstar: Vec<f64>,
    yplus: Vec<f64>,
    yminus: Vec<f64>,
    xplus: Vec<f64>,
    xminus: Vec<f64>,
}

impl PairTables {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Flat index of the ordered pair `(i, j)`.
    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub fn pair_count(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn dstar(&self, pair: usize) -> f64 {
        self.dstar[pair]
    }

    #[inline]
    pub fn yplus(&self, pair: usize) -> f64 {
        self.yplus[pair]
    }

    #[inline]
    pub fn yminus(&self, pair: usize) -> f64 {
        self.yminus[pair]
    }

    /// `x_i + x_j` for the given pair, a slice of length `p`.
    #[inline]
    pub fn xplus(&self, pair: usize) -> &[f64] {
        &self.xplus[pair * self.p..(pair + 1) * self.p]
    }

    #[inline]
    pub fn xminus(&self, pair: usize) -> &[f64] {
        &self.xminus[pair * self.p..(pair + 1) * self.p]
    }

    /// Sum over the pairs `(i, j)` and `(j, i)` with `j >= i`, in
    /// increasing `j`. Both orders give the same summand, so off-diagonal
    /// pairs are counted once with weight two; on the diagonal the minus
    /// residual vanishes.
    fn row_loss(&self, i: usize, b: &[f64]) -> f64 {
        let pair = self.pair(i, i);
        let mut acc = self.dstar[pair] * (self.yplus[pair] - dot(self.xplus(pair), b)).abs();
        for j in i + 1..self.n {
            let pair = self.pair(i, j);
            let plus = self.yplus[pair] - dot(self.xplus(pair), b);
            let minus = self.yminus[pair] - dot(self.xminus(pair), b);
            acc += 2.0 * self.dstar[pair] * (plus.abs() - minus.abs());
        }
        acc
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn build_pair_tables(data: &RegressionData, weights: &WeightMatrix) -> Result<PairTables> {
    weights.check_matches(data)?;
    let (n, p) = (data.n(), data.p());
    let mut dstar = Vec::with_capacity(n * n);
    let mut yplus = Vec::with_capacity(n * n);
    let mut yminus = Vec::with_capacity(n * n);
    let mut xplus = Vec::with_capacity(n * n * p);
    let mut xminus = Vec::with_capacity(n * n * p);
    let y = data.y();
    for i in 0..n {
        let (xi, di) = (data.row(i), weights.row(i));
        for j in 0..n {
            let (xj, dj) = (data.row(j), weights.row(j));
            dstar.push(dot(di, dj));
            yplus.push(y[i] + y[j]);
            yminus.push(y[i] - y[j]);
            xplus.extend(xi.iter().zip(xj).map(|(a, b)| a + b));
            xminus.extend(xi.iter().zip(xj).map(|(a, b)| a - b));
        }
    }
    Ok(PairTables {
        n,
        p,
        dstar,
        yplus,
        yminus,
        xplus,
        xminus,
    })
}

/// Distance at `b`, accumulated row by row in increasing `i` and then `j`.
pub fn loss(tables: &PairTables, b: &[f64]) -> Result<f64> {
    loss_with(&Executor::Sequential, tables, b)
}

/// Same value as [`loss`] bit for bit; rows may be spread over workers.
pub fn loss_with(exec: &Executor, tables: &PairTables, b: &[f64]) -> Result<f64> {
    if b.len() != tables.p {
        return Err(MdeError::Shape(format!(
            "parameter vector has length {}, expected {}",
            b.len(),
            tables.p
        )));
    }
    let rows = exec.map_indexed(tables.n, |i| tables.row_loss(i, b));
    Ok(rows.into_iter().fold(0.0, |acc, r| acc + r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{default_weights, simulate, ErrorDist, ParameterVector};

    fn two_point() -> PairTables {
        let data = RegressionData::from_rows(&[vec![1.0], vec![1.0]], vec![1.0, 3.0]).unwrap();
        build_pair_tables(&data, &default_weights(&data)).unwrap()
    }

    #[test]
    fn two_point_tables_by_hand() {
        let t = two_point();
        let all = |f: &dyn Fn(usize) -> f64| (0..4).map(f).collect::<Vec<_>>();
        assert_eq!(all(&|k| t.dstar(k)), vec![1.0; 4]);
        assert_eq!(all(&|k| t.yplus(k)), vec![2.0, 4.0, 4.0, 6.0]);
        assert_eq!(all(&|k| t.yminus(k)), vec![0.0, -2.0, 2.0, 0.0]);
        assert_eq!(all(&|k| t.xplus(k)[0]), vec![2.0; 4]);
        assert_eq!(all(&|k| t.xminus(k)[0]), vec![0.0; 4]);
    }

    #[test]
    fn single_observation_tables() {
        let data = RegressionData::from_rows(&[vec![1.0]], vec![5.0]).unwrap();
        let t = build_pair_tables(&data, &default_weights(&data)).unwrap();
        assert_eq!(t.pair_count(), 1);
        assert_eq!(t.yminus(0), 0.0);
        assert_eq!(t.xminus(0), &[0.0]);
        // L(b) = 2|5 - b|
        assert_eq!(loss(&t, &[5.0]).unwrap(), 0.0);
        assert_eq!(loss(&t, &[0.0]).unwrap(), 10.0);
    }

    #[test]
    fn pair_table_symmetries() {
        let beta = ParameterVector::new(vec![1.0, -1.0, 2.0]).unwrap();
        let data = simulate(5, 3, &beta, ErrorDist::Normal { sigma: 1.0 }, 99).unwrap();
        let t = build_pair_tables(&data, &default_weights(&data)).unwrap();
        for i in 0..5 {
            assert_eq!(t.yminus(t.pair(i, i)), 0.0);
            assert!(t.xminus(t.pair(i, i)).iter().all(|&v| v == 0.0));
            for j in 0..5 {
                let (ij, ji) = (t.pair(i, j), t.pair(j, i));
                assert_eq!(t.dstar(ij), t.dstar(ji));
                assert_eq!(t.yplus(ij), t.yplus(ji));
                assert_eq!(t.yminus(ij), -t.yminus(ji));
                assert_eq!(t.xplus(ij), t.xplus(ji));
            }
        }
    }

    #[test]
    fn two_point_loss_values() {
        let t = two_point();
        // L(b) = 2|1-b| + 4|2-b| + 2|3-b| - 4
        let closed = |b: f64| 2.0 * (1.0 - b).abs() + 4.0 * (2.0 - b).abs() + 2.0 * (3.0 - b).abs() - 4.0;
        for (b, want) in [(2.0, 0.0), (0.0, 12.0), (1.0, 4.0), (3.0, 4.0)] {
            assert_eq!(loss(&t, &[b]).unwrap(), want);
            assert_eq!(closed(b), want);
        }
        for b in [-3.7, 0.4, 1.9, 2.6, 10.0] {
            assert!((loss(&t, &[b]).unwrap() - closed(b)).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_rejects_wrong_length() {
        assert!(matches!(loss(&two_point(), &[1.0, 2.0]), Err(MdeError::Shape(_))));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let data = RegressionData::from_rows(&[vec![1.0], vec![1.0]], vec![1.0, 3.0]).unwrap();
        let w = crate::model::WeightMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(build_pair_tables(&data, &w).is_err());
    }

    #[test]
    fn parallel_loss_is_bit_identical() {
        let beta = ParameterVector::new(vec![0.5, 1.5, -2.0, 1.0]).unwrap();
        let data = simulate(60, 4, &beta, ErrorDist::Normal { sigma: 1.0 }, 5).unwrap();
        let t = build_pair_tables(&data, &default_weights(&data)).unwrap();
        let b = [0.4, 1.2, -1.9, 0.8];
        let seq = loss(&t, &b).unwrap();
        for threads in [1, 2, 3, 7] {
            let exec = Executor::new(threads).unwrap();
            assert_eq!(loss_with(&exec, &t, &b).unwrap().to_bits(), seq.to_bits());
        }
    }

    #[test]
    fn zero_at_truth_for_noiseless_data() {
        let beta = ParameterVector::new(vec![2.0, -0.5]).unwrap();
        let data = simulate(25, 2, &beta, ErrorDist::Normal { sigma: 0.0 }, 4).unwrap();
        let t = build_pair_tables(&data, &default_weights(&data)).unwrap();
        // pair sums round, so the residual terms vanish only up to ulps
        assert!(loss(&t, &beta).unwrap().abs() < 1e-12);
    }
}
