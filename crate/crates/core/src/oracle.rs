//! Slow reference implementations for verification.
//!
//! Nothing here is used by the solver. Each routine refuses inputs above a
//! hard size cap so that it cannot leak into a production path.

use crate::distance::{self, PairTables};
use crate::error::{MdeError, Result};
use crate::model::{ParameterVector, RegressionData, WeightMatrix};
use crate::solver::pick_minimizer;

pub const INTEGRATION_MAX_N: usize = 50;
pub const BRUTE_FORCE_MAX_N: usize = 30;
pub const GRID_MAX_P: usize = 3;
pub const GRID_MAX_STEPS: usize = 1001;
pub const GRID_MAX_POINTS: usize = 10_000_000;

/// Integrating measure `dH`. Only Lebesgue measure (`H(x) = x`) exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasureSpec {
    #[default]
    Lebesgue,
}

/// Evaluates the defining integral
///
/// ```text
/// sum_k ∫ [ sum_i d_ik { I(r_i <= t) - I(-r_i < t) } ]^2 dH(t),   r_i = y_i - x_i'b
/// ```
///
/// exactly. The bracket is a step function of `t` that only jumps at the
/// `2n` points `±r_i` and vanishes outside them, so the integral is a finite
/// sum of (height² × width) over the open gaps between sorted breakpoints.
pub fn loss_by_integration(
    data: &RegressionData,
    weights: &WeightMatrix,
    b: &[f64],
    measure: MeasureSpec,
) -> Result<f64> {
    loss_by_integration_capped(data, weights, b, measure, INTEGRATION_MAX_N)
}

pub fn loss_by_integration_capped(
    data: &RegressionData,
    weights: &WeightMatrix,
    b: &[f64],
    measure: MeasureSpec,
    cap: usize,
) -> Result<f64> {
    let MeasureSpec::Lebesgue = measure;
    if data.n() > cap {
        return Err(MdeError::CapExceeded {
            what: "integration oracle n",
            limit: cap,
            got: data.n(),
        });
    }
    weights.check_matches(data)?;
    if b.len() != data.p() {
        return Err(MdeError::Shape(format!(
            "parameter vector has length {}, expected {}",
            b.len(),
            data.p()
        )));
    }

    let residuals: Vec<f64> = (0..data.n()).map(|i| data.residual(i, b)).collect();
    let mut breaks: Vec<f64> = residuals.iter().flat_map(|&r| [r, -r]).collect();
    breaks.sort_by(f64::total_cmp);

    let mut total = 0.0;
    for k in 0..data.p() {
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let t = 0.5 * (lo + hi);
            let bracket: f64 = residuals
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let up = if r <= t { 1.0 } else { 0.0 };
                    let down = if -r < t { 1.0 } else { 0.0 };
                    weights.row(i)[k] * (up - down)
                })
                .sum();
            total += bracket * bracket * (hi - lo);
        }
    }
    Ok(total)
}

/// Minimizes the distance along coordinate `l` by evaluating the coordinate
/// objective at every kink, without any slope information. `O(n^4)`.
///
/// Returns `(z, f(z))`; ties within rounding go to the smallest `z`, the
/// same rule the solver applies to its candidates. A coordinate whose
/// column is identically zero has no kinks and returns `(b[l], 0)`.
pub fn brute_force_coordinate_min(tables: &PairTables, b: &[f64], l: usize) -> Result<(f64, f64)> {
    brute_force_coordinate_min_capped(tables, b, l, BRUTE_FORCE_MAX_N)
}

pub fn brute_force_coordinate_min_capped(
    tables: &PairTables,
    b: &[f64],
    l: usize,
    cap: usize,
) -> Result<(f64, f64)> {
    if tables.n() > cap {
        return Err(MdeError::CapExceeded {
            what: "brute-force oracle n",
            limit: cap,
            got: tables.n(),
        });
    }
    if b.len() != tables.p() || l >= tables.p() {
        return Err(MdeError::Shape(format!(
            "coordinate {l} / parameter length {} do not fit p = {}",
            b.len(),
            tables.p()
        )));
    }

    // (zero, signed weight): plus-family weights enter positively, minus
    // family negatively.
    let mut kinks: Vec<(f64, f64)> = Vec::new();
    for pair in 0..tables.pair_count() {
        for (yv, xv, sign) in [
            (tables.yplus(pair), tables.xplus(pair), 1.0),
            (tables.yminus(pair), tables.xminus(pair), -1.0),
        ] {
            let a = xv[l];
            if a == 0.0 {
                continue;
            }
            let mut others = 0.0;
            for (k, (&xk, &bk)) in xv.iter().zip(b).enumerate() {
                if k != l {
                    others += xk * bk;
                }
            }
            let zero = (yv - others) / a;
            kinks.push((zero, sign * tables.dstar(pair) * a.abs()));
        }
    }
    if kinks.is_empty() {
        return Ok((b[l], 0.0));
    }

    let evaluated = kinks.iter().map(|&(z, _)| {
        let mut value = 0.0;
        let mut magnitude = 0.0;
        for &(e, w) in &kinks {
            value += w * (z - e).abs();
            magnitude += w.abs() * (z.abs() + e.abs());
        }
        (z, value, magnitude)
    });
    let (z, f) = pick_minimizer(evaluated).expect("nonempty kink set");
    Ok((z, f))
}

/// Exhaustive evaluation of the distance on a regular grid over the box
/// `[lo, hi]` with `steps` points per axis. The grid argmin is returned even
/// when it lies on the boundary of the box.
pub fn brute_force_grid_min(
    data: &RegressionData,
    weights: &WeightMatrix,
    lo: &ParameterVector,
    hi: &ParameterVector,
    steps: usize,
) -> Result<(ParameterVector, f64)> {
    let p = data.p();
    if p > GRID_MAX_P {
        return Err(MdeError::CapExceeded {
            what: "grid oracle p",
            limit: GRID_MAX_P,
            got: p,
        });
    }
    if steps == 0 || steps > GRID_MAX_STEPS {
        return Err(MdeError::CapExceeded {
            what: "grid oracle steps per axis",
            limit: GRID_MAX_STEPS,
            got: steps,
        });
    }
    let points = steps.pow(p as u32);
    if points > GRID_MAX_POINTS {
        return Err(MdeError::CapExceeded {
            what: "grid oracle points",
            limit: GRID_MAX_POINTS,
            got: points,
        });
    }
    lo.check_len(p)?;
    hi.check_len(p)?;
    let tables = distance::build_pair_tables(data, weights)?;

    let axis = |k: usize, s: usize| {
        if steps == 1 {
            lo[k]
        } else {
            lo[k] + (hi[k] - lo[k]) * s as f64 / (steps - 1) as f64
        }
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut b = vec![0.0; p];
    for flat in 0..points {
        let mut rest = flat;
        for k in (0..p).rev() {
            b[k] = axis(k, rest % steps);
            rest /= steps;
        }
        let value = distance::loss(&tables, &b)?;
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((b.clone(), value));
        }
    }
    let (b, value) = best.expect("grid has at least one point");
    Ok((ParameterVector::new(b)?, value))
}
