#![allow(dead_code)]

use mde_core::{PairTables, RegressionData, WeightMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub data: RegressionData,
    pub weights: WeightMatrix,
    pub tables: PairTables,
    pub b: Vec<f64>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn draw(rng: &mut ChaCha8Rng, integer: bool) -> f64 {
    if integer {
        rng.random_range(-3i32..=3) as f64
    } else {
        rng.random_range(-2.0..2.0)
    }
}

/// Random design, response, weights and point. With `ties`, some rows are
/// copies of earlier rows and some instances use small integers, which
/// produces coincident kinks.
pub fn random_instance(seed: u64, max_n: usize, max_p: usize, ties: bool) -> Instance {
    let mut rng = rng(seed);
    let n = rng.random_range(1..=max_n);
    let p = rng.random_range(1..=max_p);
    let integer = ties && rng.random_bool(0.3);
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| draw(&mut rng, integer)).collect())
        .collect();
    let mut y: Vec<f64> = (0..n).map(|_| draw(&mut rng, integer)).collect();
    if ties && n > 1 {
        for i in 1..n {
            if rng.random_bool(0.3) {
                let src = rng.random_range(0..i);
                rows[i] = rows[src].clone();
                y[i] = y[src];
            }
        }
    }
    let data = RegressionData::from_rows(&rows, y).unwrap();
    let weights = if rng.random_bool(0.5) {
        mde_core::default_weights(&data)
    } else {
        let d: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| draw(&mut rng, integer)).collect())
            .collect();
        WeightMatrix::from_rows(&d).unwrap()
    };
    let b = (0..p).map(|_| draw(&mut rng, integer)).collect();
    let tables = mde_core::build_pair_tables(&data, &weights).unwrap();
    Instance {
        data,
        weights,
        tables,
        b,
    }
}

/// g'(q) - h'(q) summed term by term with the sign convention
/// sgn(0) = 0.
pub fn direct_slope(slice: &mde_core::CoordinateSlice, q: f64) -> f64 {
    let sgn = |v: f64| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    let g: f64 = slice.plus_terms.iter().map(|t| t.weight * sgn(q - t.zero)).sum();
    let h: f64 = slice.minus_terms.iter().map(|t| t.weight * sgn(q - t.zero)).sum();
    g - h
}

pub fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * (1.0 + a.abs().max(b.abs()))
}
