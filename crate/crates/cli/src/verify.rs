//! Randomized comparison of the fast paths against the oracles.

use mde_core::oracle::{self, MeasureSpec, BRUTE_FORCE_MAX_N};
use mde_core::{
    build_pair_tables, coordinate_update, loss, MdeError, RegressionData, Result, WeightMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Options {
    pub trials: usize,
    pub max_n: usize,
    pub max_p: usize,
    pub seed: u64,
    pub inject_fault: bool,
}

pub struct Failure {
    pub trial: usize,
    /// Seed that regenerates this instance as trial 0.
    pub seed: u64,
    pub what: &'static str,
}

pub struct Summary {
    pub trials: usize,
    pub loss_passed: usize,
    pub update_passed: usize,
    pub first_failure: Option<Failure>,
}

struct Instance {
    data: RegressionData,
    weights: WeightMatrix,
    b: Vec<f64>,
}

/// Instances mix continuous and small-integer data; about a third of the
/// rows repeat an earlier row so that kinks coincide.
fn instance(seed: u64, max_n: usize, max_p: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_n);
    let p = rng.random_range(1..=max_p);
    let integer = rng.random_bool(0.3);
    let draw = |rng: &mut ChaCha8Rng| {
        if integer {
            rng.random_range(-3i32..=3) as f64
        } else {
            rng.random_range(-2.0..2.0)
        }
    };
    let mut rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| draw(&mut rng)).collect()).collect();
    let mut y: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
    for i in 1..n {
        if rng.random_bool(0.3) {
            let src = rng.random_range(0..i);
            rows[i] = rows[src].clone();
            y[i] = y[src];
        }
    }
    let d: Vec<Vec<f64>> = if rng.random_bool(0.5) {
        rows.clone()
    } else {
        (0..n).map(|_| (0..p).map(|_| draw(&mut rng)).collect()).collect()
    };
    let b = (0..p).map(|_| draw(&mut rng)).collect();
    Instance {
        data: RegressionData::from_rows(&rows, y).expect("finite by construction"),
        weights: WeightMatrix::from_rows(&d).expect("finite by construction"),
        b,
    }
}

pub fn run(opts: &Options) -> Result<Summary> {
    if opts.max_n == 0 || opts.max_p == 0 {
        return Err(MdeError::InvalidConfig("--max-n and --max-p must be at least 1".into()));
    }
    if opts.max_n > BRUTE_FORCE_MAX_N {
        return Err(MdeError::CapExceeded {
            what: "verify --max-n (brute-force oracle)",
            limit: BRUTE_FORCE_MAX_N,
            got: opts.max_n,
        });
    }
    let mut summary = Summary {
        trials: opts.trials,
        loss_passed: 0,
        update_passed: 0,
        first_failure: None,
    };
    for trial in 0..opts.trials {
        let seed = opts.seed.wrapping_add(trial as u64);
        let inst = instance(seed, opts.max_n, opts.max_p);
        let tables = build_pair_tables(&inst.data, &inst.weights)?;

        let closed = loss(&tables, &inst.b)?;
        let integral =
            oracle::loss_by_integration(&inst.data, &inst.weights, &inst.b, MeasureSpec::Lebesgue)?;
        let loss_ok = (closed - integral).abs() <= 1e-8 * closed.abs().max(integral.abs());

        let mut update_ok = true;
        for l in 0..inst.data.p() {
            let mut z = coordinate_update(&tables, &inst.b, l)?;
            if opts.inject_fault {
                z = z.next_up();
            }
            let (expected, _) = oracle::brute_force_coordinate_min(&tables, &inst.b, l)?;
            update_ok &= z.to_bits() == expected.to_bits();
        }

        summary.loss_passed += usize::from(loss_ok);
        summary.update_passed += usize::from(update_ok);
        if summary.first_failure.is_none() && !(loss_ok && update_ok) {
            let what = if loss_ok { "coordinate update" } else { "distance" };
            summary.first_failure = Some(Failure { trial, seed, what });
        }
    }
    Ok(summary)
}
