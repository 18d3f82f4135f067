//! Coordinate-wise minimization of the distance.
//!
//! Holding every coordinate but `l` fixed, the distance is
//! `f_l(z) + C` where
//!
//! ```text
//! f_l(z) = sum_k w+_k |z - e+_k|  -  sum_k w-_k |z - e-_k|
//! ```
//!
//! is continuous and piecewise linear. The kinks `e±` are the zeros of the
//! individual absolute-value summands and the weights are
//! `w± = dstar_ij |(x±_ij)_l|`. Because the minus family enters with a
//! negative sign `f_l` need not be convex, but its global minimum is always
//! attained at a kink where the slope turns from nonpositive to
//! nonnegative. The update therefore:
//!
//! 1. collects and sorts the kinks of both families ([`coordinate_slice`]);
//! 2. builds prefix-sum slope sequences for each family ([`slope_profile`]);
//! 3. reads the slope of `f_l` at the midpoint of every gap between
//!    consecutive kinks and keeps the kinks where the slope changes sign
//!    from negative to positive ([`candidate_zeros`]);
//! 4. evaluates `f_l` at those candidates only and keeps the smallest
//!    ([`coordinate_update`]).
//!
//! [`fit`] cycles this update over `l = 0..p` until the estimate settles.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::distance::{self, PairTables};
use crate::error::{MdeError, Result};
use crate::exec::Executor;
use crate::model::{FitResult, ParameterVector, RegressionData, WeightMatrix};

/// Kinks closer than this (relative) are merged into one.
pub const MERGE_RTOL: f64 = 1e-12;
/// Objective values within this (relative to the term magnitudes) of the
/// minimum are treated as ties.
pub const TIE_RTOL: f64 = 1e-12;
/// Midpoint slopes within this (relative to the total weight) of zero are
/// treated as flat.
pub const SLOPE_RTOL: f64 = 1e-12;

/// One absolute-value summand `weight * |z - zero|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub zero: f64,
    pub weight: f64,
}

/// The one-dimensional objective along coordinate `coord` at a fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateSlice {
    /// 0-based coordinate index.
    pub coord: usize,
    /// Sorted strictly ascending by zero, duplicates merged.
    pub plus_terms: Vec<Term>,
    pub minus_terms: Vec<Term>,
    /// Flat pair indices (`i * n + j`) whose `(x+_ij)_l` is zero.
    pub excluded_plus: Vec<usize>,
    pub excluded_minus: Vec<usize>,
}

impl CoordinateSlice {
    pub fn is_empty(&self) -> bool {
        self.plus_terms.is_empty() && self.minus_terms.is_empty()
    }

    fn total_abs_weight(&self) -> f64 {
        self.plus_terms
            .iter()
            .chain(&self.minus_terms)
            .map(|t| t.weight.abs())
            .sum()
    }
}

/// Prefix slopes: `zeta[i]` is the slope of the plus sum left of the
/// `i`-th plus kink (0-based), `zeta[len]` the slope right of all of them.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeProfile {
    pub zeta: Vec<f64>,
    pub eta: Vec<f64>,
}

/// Merged kinks of both families padded by one sentinel on each side, the
/// midpoints of the gaps between consecutive entries, and the slope of the
/// coordinate objective at each midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    pub zeros: Vec<f64>,
    pub midpoints: Vec<f64>,
    pub slopes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Least squares, falling back to zeros for a rank-deficient design.
    Ols,
    Zeros,
    User(ParameterVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol_param: f64,
    pub tol_loss: f64,
    pub max_sweeps: usize,
    pub init: Init,
    /// Worker threads for the pair loops; 0 runs everything on the caller.
    pub threads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_param: 1e-8,
            tol_loss: 1e-10,
            max_sweeps: 100,
            init: Init::Ols,
            threads: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_param > 0.0 && self.tol_param.is_finite()) {
            return Err(MdeError::InvalidConfig(format!(
                "tol_param must be positive, got {}",
                self.tol_param
            )));
        }
        if !(self.tol_loss > 0.0 && self.tol_loss.is_finite()) {
            return Err(MdeError::InvalidConfig(format!(
                "tol_loss must be positive, got {}",
                self.tol_loss
            )));
        }
        if self.max_sweeps == 0 {
            return Err(MdeError::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of minimizing one coordinate slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateStep {
    pub value: f64,
    /// `f_l(value)`; 0 for a degenerate slice.
    pub objective: f64,
    pub candidates: usize,
    /// The coordinate's column vanishes, so the value was left unchanged.
    pub degenerate: bool,
}

// ---------------------------------------------------------------------------
// slices
// ---------------------------------------------------------------------------

/// Unmerged `(zero, weight)` kinks of each family.
#[derive(Default)]
struct RawSlice {
    plus: Vec<(f64, f64)>,
    minus: Vec<(f64, f64)>,
    excluded_plus: Vec<usize>,
    excluded_minus: Vec<usize>,
}

impl RawSlice {
    fn push(&mut self, pair: usize, partial: f64, a: f64, dstar: f64, minus: bool) {
        if a == 0.0 {
            if minus {
                self.excluded_minus.push(pair);
            } else {
                self.excluded_plus.push(pair);
            }
        } else if minus {
            self.minus.push((partial / a, dstar * a.abs()));
        } else {
            self.plus.push((partial / a, dstar * a.abs()));
        }
    }
}

#[inline]
fn near(rep: f64, z: f64) -> bool {
    z == rep || z - rep <= MERGE_RTOL * rep.abs().max(z.abs())
}

/// Sorts each family by zero and merges runs of (near-)equal zeros onto
/// the run's smallest zero, summing weights per family. Runs are formed
/// over both families together, so plus and minus kinks in one run share
/// the same representative.
fn assemble(coord: usize, raw: RawSlice) -> CoordinateSlice {
    let RawSlice {
        mut plus,
        mut minus,
        excluded_plus,
        excluded_minus,
    } = raw;
    radsort::sort_by_key(&mut plus, |k| k.0);
    radsort::sort_by_key(&mut minus, |k| k.0);

    let mut plus_terms = Vec::new();
    let mut minus_terms = Vec::new();
    let (mut i, mut j) = (0, 0);
    loop {
        let rep = match (plus.get(i), minus.get(j)) {
            (Some(a), Some(b)) if a.0.total_cmp(&b.0).is_le() => a.0,
            (Some(a), None) => a.0,
            (_, Some(b)) => b.0,
            (None, None) => break,
        };
        let run = |kinks: &[(f64, f64)], idx: &mut usize, out: &mut Vec<Term>| {
            let mut weight = None::<f64>;
            while *idx < kinks.len() && near(rep, kinks[*idx].0) {
                weight = Some(weight.unwrap_or(0.0) + kinks[*idx].1);
                *idx += 1;
            }
            if let Some(weight) = weight {
                out.push(Term { zero: rep, weight });
            }
        };
        run(&plus, &mut i, &mut plus_terms);
        run(&minus, &mut j, &mut minus_terms);
    }
    CoordinateSlice {
        coord,
        plus_terms,
        minus_terms,
        excluded_plus,
        excluded_minus,
    }
}

fn check_coord(tables: &PairTables, b: &[f64], l: usize) -> Result<()> {
    if b.len() != tables.p() {
        return Err(MdeError::Shape(format!(
            "parameter vector has length {}, expected {}",
            b.len(),
            tables.p()
        )));
    }
    if l >= tables.p() {
        return Err(MdeError::Shape(format!(
            "coordinate {l} out of range for p = {}",
            tables.p()
        )));
    }
    Ok(())
}

/// `y - sum_{k != l} x_k b_k`, accumulated in increasing `k`.
#[inline]
fn partial_residual(yv: f64, xv: &[f64], b: &[f64], l: usize) -> f64 {
    let mut others = 0.0;
    for (k, (&xk, &bk)) in xv.iter().zip(b).enumerate() {
        if k != l {
            others += xk * bk;
        }
    }
    yv - others
}

/// Kinks of the coordinate objective along `l` at the point `b`.
///
/// Every ordered pair contributes one plus and one minus kink at
/// `e± = (y±_ij - sum_{k != l} (x±_ij)_k b_k) / (x±_ij)_l` with weight
/// `dstar_ij |(x±_ij)_l|`, unless `(x±_ij)_l = 0`, in which case the pair
/// only shifts the constant and is listed as excluded.
pub fn coordinate_slice(tables: &PairTables, b: &[f64], l: usize) -> Result<CoordinateSlice> {
    check_coord(tables, b, l)?;
    let mut raw = RawSlice::default();
    for pair in 0..tables.pair_count() {
        let xp = tables.xplus(pair);
        let partial = partial_residual(tables.yplus(pair), xp, b, l);
        raw.push(pair, partial, xp[l], tables.dstar(pair), false);
        let xm = tables.xminus(pair);
        let partial = partial_residual(tables.yminus(pair), xm, b, l);
        raw.push(pair, partial, xm[l], tables.dstar(pair), true);
    }
    Ok(assemble(l, raw))
}

pub fn slope_profile(slice: &CoordinateSlice) -> SlopeProfile {
    fn prefix(terms: &[Term]) -> Vec<f64> {
        let mut out = Vec::with_capacity(terms.len() + 1);
        let mut slope = -terms.iter().map(|t| t.weight).sum::<f64>();
        out.push(slope);
        for t in terms {
            slope += 2.0 * t.weight;
            out.push(slope);
        }
        out
    }
    SlopeProfile {
        zeta: prefix(&slice.plus_terms),
        eta: prefix(&slice.minus_terms),
    }
}

/// Slope of the coordinate objective at `q`, located by binary search in
/// each family. `q` must not be a kink.
pub fn derivative_at(slice: &CoordinateSlice, profile: &SlopeProfile, q: f64) -> Result<f64> {
    let locate = |terms: &[Term]| {
        let idx = terms.partition_point(|t| t.zero < q);
        match terms.get(idx) {
            Some(t) if t.zero == q => Err(MdeError::OnKink(q)),
            _ => Ok(idx),
        }
    };
    let i1 = locate(&slice.plus_terms)?;
    let i2 = locate(&slice.minus_terms)?;
    Ok(profile.zeta[i1] - profile.eta[i2])
}

/// Distance from a kink to its sentinel pad: 1, widened for huge zeros so
/// the pad stays distinct in floating point.
fn sentinel_pad(e: f64) -> f64 {
    1.0f64.max(e.abs() * 1e-8)
}

pub fn candidate_grid(slice: &CoordinateSlice, profile: &SlopeProfile) -> CandidateGrid {
    // union of the two sorted families; shared kinks are bit-identical
    let (plus, minus) = (&slice.plus_terms, &slice.minus_terms);
    let mut kinks = Vec::with_capacity(plus.len() + minus.len() + 2);
    let (mut i, mut j) = (0, 0);
    while i < plus.len() || j < minus.len() {
        let next = match (plus.get(i), minus.get(j)) {
            (Some(a), Some(b)) if a.zero == b.zero => {
                i += 1;
                j += 1;
                a.zero
            }
            (Some(a), Some(b)) if a.zero < b.zero => {
                i += 1;
                a.zero
            }
            (Some(a), None) => {
                i += 1;
                a.zero
            }
            (_, Some(b)) => {
                j += 1;
                b.zero
            }
            (None, None) => unreachable!(),
        };
        kinks.push(next);
    }
    if kinks.is_empty() {
        return CandidateGrid {
            zeros: Vec::new(),
            midpoints: Vec::new(),
            slopes: Vec::new(),
        };
    }

    let first = kinks[0];
    let last = kinks[kinks.len() - 1];
    let mut zeros = Vec::with_capacity(kinks.len() + 2);
    zeros.push(first - sentinel_pad(first));
    zeros.extend(kinks);
    zeros.push(last + sentinel_pad(last));

    let midpoints: Vec<f64> = zeros.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

    // midpoints ascend, so each family index only moves forward
    let (mut i1, mut i2) = (0, 0);
    let slopes = midpoints
        .iter()
        .map(|&q| {
            while i1 < plus.len() && plus[i1].zero < q {
                i1 += 1;
            }
            while i2 < minus.len() && minus[i2].zero < q {
                i2 += 1;
            }
            profile.zeta[i1] - profile.eta[i2]
        })
        .collect();

    CandidateGrid {
        zeros,
        midpoints,
        slopes,
    }
}

/// Kinks where the slope turns from negative to positive: the local minima
/// of the coordinate objective. A flat gap counts as both nonpositive and
/// nonnegative, so a flat valley contributes its left end.
///
/// Walks the union of both families once. Each gap slope is the same
/// `zeta[i1] - eta[i2]` difference [`candidate_grid`] reports at the gap's
/// midpoint, so the two agree bit for bit.
pub fn candidate_zeros(slice: &CoordinateSlice, profile: &SlopeProfile) -> Vec<f64> {
    let (plus, minus) = (&slice.plus_terms, &slice.minus_terms);
    if slice.is_empty() {
        return Vec::new();
    }
    let total = slice.total_abs_weight();
    let eps = SLOPE_RTOL * total;
    let (zeta, eta) = (&profile.zeta, &profile.eta);
    debug_assert!(
        plus.is_empty()
            || minus.is_empty()
            || (zeta[0] - eta[0] <= 1e-9 * total
                && zeta[plus.len()] - eta[minus.len()] >= -1e-9 * total),
        "coordinate objective unbounded below"
    );

    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut left = zeta[0] - eta[0];
    while i < plus.len() || j < minus.len() {
        let zero = match (plus.get(i), minus.get(j)) {
            (Some(a), Some(b)) if a.zero == b.zero => {
                i += 1;
                j += 1;
                a.zero
            }
            (Some(a), Some(b)) if a.zero < b.zero => {
                i += 1;
                a.zero
            }
            (Some(a), None) => {
                i += 1;
                a.zero
            }
            (_, Some(b)) => {
                j += 1;
                b.zero
            }
            (None, None) => unreachable!(),
        };
        let right = zeta[i] - eta[j];
        if left <= eps && right >= -eps {
            out.push(zero);
        }
        left = right;
    }
    if out.is_empty() {
        // only reachable through rounding; fall back to every kink
        let mut zeros = candidate_grid(slice, profile).zeros;
        zeros.pop();
        zeros.remove(0);
        out = zeros;
    }
    out
}

fn objective_and_magnitude(slice: &CoordinateSlice, z: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for t in &slice.plus_terms {
        value += t.weight * (z - t.zero).abs();
        magnitude += t.weight.abs() * (z.abs() + t.zero.abs());
    }
    for t in &slice.minus_terms {
        value -= t.weight * (z - t.zero).abs();
        magnitude += t.weight.abs() * (z.abs() + t.zero.abs());
    }
    (value, magnitude)
}

/// `f_l(z)`, the distance along the slice's coordinate minus the constant
/// contributed by the other coordinates and the excluded pairs.
pub fn coordinate_objective(slice: &CoordinateSlice, z: f64) -> f64 {
    objective_and_magnitude(slice, z).0
}

/// Picks the smallest `z` whose value is within rounding of the minimum.
///
/// Input items are `(z, value, magnitude)` where `magnitude` bounds the sum
/// of absolute summands behind `value`.
pub fn pick_minimizer(points: impl Iterator<Item = (f64, f64, f64)>) -> Option<(f64, f64)> {
    let points: Vec<(f64, f64, f64)> = points.collect();
    let &(_, best, magnitude) = points.iter().min_by(|a, b| a.1.total_cmp(&b.1))?;
    let cutoff = best + TIE_RTOL * (1.0 + magnitude);
    points
        .iter()
        .filter(|p| p.1 <= cutoff)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|&(z, v, _)| (z, v))
}

/// Exact minimization of a slice; `current` is returned for a slice
/// without kinks.
pub fn minimize_slice(slice: &CoordinateSlice, current: f64) -> CoordinateStep {
    if slice.is_empty() {
        return CoordinateStep {
            value: current,
            objective: 0.0,
            candidates: 0,
            degenerate: true,
        };
    }
    let profile = slope_profile(slice);
    let candidates = candidate_zeros(slice, &profile);
    let evaluated = candidates.iter().map(|&z| {
        let (v, m) = objective_and_magnitude(slice, z);
        (z, v, m)
    });
    let (value, objective) = pick_minimizer(evaluated).expect("nonempty slice has candidates");
    CoordinateStep {
        value,
        objective,
        candidates: candidates.len(),
        degenerate: false,
    }
}

/// Minimizer of the distance along coordinate `l` from the point `b`.
pub fn coordinate_update(tables: &PairTables, b: &[f64], l: usize) -> Result<f64> {
    let slice = coordinate_slice(tables, b, l)?;
    Ok(minimize_slice(&slice, b[l]).value)
}

// ---------------------------------------------------------------------------
// outer loop
// ---------------------------------------------------------------------------

/// Least squares via the normal equations, or `None` when `X'X` is not
/// numerically positive definite.
pub fn ols(data: &RegressionData) -> Option<ParameterVector> {
    let (n, p) = (data.n(), data.p());
    if n < p {
        return None;
    }
    let x = DMatrix::from_row_slice(n, p, data.x());
    let y = DVector::from_column_slice(data.y());
    let gram = x.tr_mul(&x);
    let scale = gram.diagonal().max();
    let chol = gram.cholesky()?;
    // reject near-singular systems the factorization still accepts
    let l = chol.l_dirty();
    let min_pivot = (0..p).map(|k| l[(k, k)] * l[(k, k)]).fold(f64::INFINITY, f64::min);
    if !(min_pivot > 1e-12 * scale) {
        return None;
    }
    let beta = chol.solve(&x.tr_mul(&y));
    ParameterVector::new(beta.iter().copied().collect()).ok()
}

/// Unordered pairs `i <= j` with the residuals `y± - b'x±`, kept in step
/// with `b`.
///
/// Swapping `i` and `j` leaves the plus quantities unchanged and negates
/// the minus ones, so both ordered pairs give the same kink. Off-diagonal
/// pairs are stored once with doubled weight; the diagonal has no minus
/// kink since `x_i - x_i = 0`.
struct Folded {
    /// Start of each row `i` (pairs `(i, i..n)`), plus a final end marker.
    row_start: Vec<usize>,
    weight: Vec<f64>,
    yplus: Vec<f64>,
    yminus: Vec<f64>,
    /// Column-major: coordinate `k` occupies `k * len..(k + 1) * len`.
    xplus: Vec<f64>,
    xminus: Vec<f64>,
    rplus: Vec<f64>,
    rminus: Vec<f64>,
}

impl Folded {
    fn new(tables: &PairTables) -> Self {
        let (n, p) = (tables.n(), tables.p());
        let len = n * (n + 1) / 2;
        let mut row_start = Vec::with_capacity(n + 1);
        let mut weight = Vec::with_capacity(len);
        let mut yplus = Vec::with_capacity(len);
        let mut yminus = Vec::with_capacity(len);
        let mut xplus = vec![0.0; len * p];
        let mut xminus = vec![0.0; len * p];
        let mut idx = 0;
        for i in 0..n {
            row_start.push(idx);
            for j in i..n {
                let pair = tables.pair(i, j);
                let mult = if i == j { 1.0 } else { 2.0 };
                weight.push(mult * tables.dstar(pair));
                yplus.push(tables.yplus(pair));
                yminus.push(tables.yminus(pair));
                for k in 0..p {
                    xplus[k * len + idx] = tables.xplus(pair)[k];
                    xminus[k * len + idx] = tables.xminus(pair)[k];
                }
                idx += 1;
            }
        }
        row_start.push(idx);
        Self {
            row_start,
            weight,
            yplus,
            yminus,
            xplus,
            xminus,
            rplus: vec![0.0; len],
            rminus: vec![0.0; len],
        }
    }

    fn len(&self) -> usize {
        self.weight.len()
    }

    fn column<'a>(&self, x: &'a [f64], l: usize) -> &'a [f64] {
        &x[l * self.len()..(l + 1) * self.len()]
    }

    fn rows(&self) -> usize {
        self.row_start.len() - 1
    }

    fn refresh(&mut self, b: &[f64]) {
        self.rplus.copy_from_slice(&self.yplus);
        self.rminus.copy_from_slice(&self.yminus);
        let len = self.len();
        for (k, &bk) in b.iter().enumerate() {
            let cols = k * len..(k + 1) * len;
            for (r, &x) in self.rplus.iter_mut().zip(&self.xplus[cols.clone()]) {
                *r -= x * bk;
            }
            for (r, &x) in self.rminus.iter_mut().zip(&self.xminus[cols]) {
                *r -= x * bk;
            }
        }
    }

    fn loss(&self, exec: &Executor) -> f64 {
        let rows = exec.map_indexed(self.rows(), |i| {
            let mut acc = 0.0;
            for k in self.row_start[i]..self.row_start[i + 1] {
                acc += self.weight[k] * (self.rplus[k].abs() - self.rminus[k].abs());
            }
            acc
        });
        rows.into_iter().fold(0.0, |acc, r| acc + r)
    }

    /// Slice along `l` with partial residuals `r + (x±)_l b_l`. Excluded
    /// pairs are not tracked.
    fn slice(&self, exec: &Executor, bl: f64, l: usize) -> CoordinateSlice {
        let (ap, am) = (self.column(&self.xplus, l), self.column(&self.xminus, l));
        let rows = exec.map_indexed(self.rows(), |i| {
            let range = self.row_start[i]..self.row_start[i + 1];
            let mut plus = Vec::with_capacity(range.len());
            let mut minus = Vec::with_capacity(range.len());
            for k in range {
                let w = self.weight[k];
                let a = ap[k];
                if a != 0.0 {
                    plus.push(((self.rplus[k] + a * bl) / a, w * a.abs()));
                }
                let a = am[k];
                if a != 0.0 {
                    minus.push(((self.rminus[k] + a * bl) / a, w * a.abs()));
                }
            }
            (plus, minus)
        });
        let mut raw = RawSlice::default();
        raw.plus.reserve(self.len());
        raw.minus.reserve(self.len());
        for (plus, minus) in rows {
            raw.plus.extend(plus);
            raw.minus.extend(minus);
        }
        assemble(l, raw)
    }

    fn shift(&mut self, l: usize, delta: f64) {
        let len = self.len();
        let cols = l * len..(l + 1) * len;
        for (r, &x) in self.rplus.iter_mut().zip(&self.xplus[cols.clone()]) {
            *r -= x * delta;
        }
        for (r, &x) in self.rminus.iter_mut().zip(&self.xminus[cols]) {
            *r -= x * delta;
        }
    }
}

fn initial_point(data: &RegressionData, init: &Init) -> Result<ParameterVector> {
    match init {
        Init::Ols => Ok(ols(data).unwrap_or_else(|| {
            log::info!("design is rank deficient; starting from zeros");
            ParameterVector::zeros(data.p())
        })),
        Init::Zeros => Ok(ParameterVector::zeros(data.p())),
        Init::User(b) => {
            b.check_len(data.p())?;
            Ok(b.clone())
        }
    }
}

/// Cyclic coordinate descent over `l = 0..p`, each step an exact line
/// minimum. Stops when a sweep moves no coordinate by more than
/// `tol_param`, lowers the distance by at most `tol_loss`, or after
/// `max_sweeps` sweeps (reported as not converged).
pub fn fit(data: &RegressionData, weights: &WeightMatrix, config: &SolverConfig) -> Result<FitResult> {
    let start = Instant::now();
    config.validate()?;
    weights.check_matches(data)?;
    let exec = Executor::new(config.threads)?;
    let tables = distance::build_pair_tables(data, weights)?;
    let mut b = initial_point(data, &config.init)?;
    let p = data.p();

    let mut folded = Folded::new(&tables);
    folded.refresh(&b);
    let mut loss_trace = vec![folded.loss(&exec)];
    let mut candidate_counts = Vec::new();
    let mut warned = vec![false; p];
    let mut sweeps = 0;
    let mut converged = false;

    while sweeps < config.max_sweeps {
        sweeps += 1;
        if sweeps > 1 {
            // drop accumulated rounding from incremental updates
            folded.refresh(&b);
        }
        let before = *loss_trace.last().expect("trace starts nonempty");
        let mut max_change = 0.0f64;
        for l in 0..p {
            let slice = folded.slice(&exec, b[l], l);
            let step = minimize_slice(&slice, b[l]);
            candidate_counts.push(step.candidates);
            if step.degenerate {
                if !warned[l] {
                    log::warn!("coordinate {l} has an all-zero column; leaving it at {}", b[l]);
                    warned[l] = true;
                }
                loss_trace.push(*loss_trace.last().unwrap());
                continue;
            }
            let delta = step.value - b[l];
            if delta != 0.0 {
                folded.shift(l, delta);
                b.as_mut_slice()[l] = step.value;
            }
            max_change = max_change.max(delta.abs());
            loss_trace.push(folded.loss(&exec));
        }
        let after = *loss_trace.last().unwrap();
        if max_change <= config.tol_param || before - after <= config.tol_loss {
            converged = true;
            break;
        }
    }

    let loss = distance::loss_with(&exec, &tables, &b)?;
    Ok(FitResult {
        estimate: b,
        loss,
        sweeps,
        converged,
        elapsed: start.elapsed(),
        loss_trace,
        candidate_counts,
    })
}
