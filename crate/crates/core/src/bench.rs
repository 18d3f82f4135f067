//! Timing harness: growth of fit time with `n` and `p`, and a head-to-head
//! against a derivative-free Nelder–Mead baseline on identical instances.
//!
//! Timings are wall-clock and machine dependent; everything else in a
//! report is a deterministic function of the seed and sizes.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::distance;
use crate::error::{MdeError, Result};
use crate::model::{
    default_weights, simulate, ErrorDist, FitResult, ParameterVector, RegressionData, WeightMatrix,
};
use crate::solver::{self, SolverConfig};

pub const CSV_HEADER: [&str; 8] = [
    "n",
    "p",
    "repeats",
    "method",
    "mean_seconds",
    "mean_sweeps",
    "mean_candidates",
    "final_loss",
];

pub const MIN_REPEATS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Coordinate,
    NelderMead,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Coordinate => "coordinate",
            Method::NelderMead => "nelder_mead",
        }
    }
}

/// One simulated instance solved by one method.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRecord {
    pub n: usize,
    pub p: usize,
    pub repeat: usize,
    pub seed: u64,
    pub method: Method,
    pub seconds: f64,
    pub sweeps: usize,
    pub candidates: f64,
    pub loss: f64,
    pub estimate: Vec<f64>,
}

/// Averages over the repeats of one `(n, p, method)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub p: usize,
    pub repeats: usize,
    pub method: Method,
    pub mean_seconds: f64,
    pub mean_sweeps: f64,
    pub mean_candidates: f64,
    pub final_loss: f64,
}

impl BenchRow {
    /// `mean_seconds / n^k`.
    pub fn time_per_n_pow(&self, k: i32) -> f64 {
        self.mean_seconds / (self.n as f64).powi(k)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub instances: Vec<InstanceRecord>,
}

impl BenchReport {
    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(CSV_HEADER)?;
        for r in &self.rows {
            wtr.write_record([
                r.n.to_string(),
                r.p.to_string(),
                r.repeats.to_string(),
                r.method.as_str().to_string(),
                format!("{:?}", r.mean_seconds),
                format!("{:?}", r.mean_sweeps),
                format!("{:?}", r.mean_candidates),
                format!("{:?}", r.final_loss),
            ])?;
        }
        wtr.flush().map_err(|e| MdeError::Csv(e.into()))?;
        Ok(())
    }

    /// Human-readable table with the `time / n^k` columns.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{:>6} {:>4} {:>12} {:>12} {:>10} {:>10} {:>10} {:>10} {:>8} {:>9}\n",
            "n", "p", "method", "seconds", "t/n e3", "t/n^2 e4", "t/n^3 e5", "t/n^4 e6", "sweeps", "C_n"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:>6} {:>4} {:>12} {:>12.6} {:>10.4} {:>10.4} {:>10.4} {:>10.5} {:>8.2} {:>9.2}\n",
                r.n,
                r.p,
                r.method.as_str(),
                r.mean_seconds,
                r.time_per_n_pow(1) * 1e3,
                r.time_per_n_pow(2) * 1e4,
                r.time_per_n_pow(3) * 1e5,
                r.time_per_n_pow(4) * 1e6,
                r.mean_sweeps,
                r.mean_candidates,
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub error: ErrorDist,
    /// Nelder–Mead evaluation budget per instance; `None` uses
    /// [`default_nm_budget`].
    pub nm_max_evals: Option<usize>,
    /// Run instances concurrently. Each timed fit stays single-threaded.
    pub parallel_instances: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            error: ErrorDist::Normal { sigma: 1.0 },
            nm_max_evals: None,
            parallel_instances: false,
        }
    }
}

pub fn default_nm_budget(p: usize) -> usize {
    1000 * p
}

/// Coefficients used for every simulated benchmark instance.
pub fn bench_beta(p: usize) -> ParameterVector {
    let values = (0..p)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + 0.5 * k as f64))
        .collect();
    ParameterVector::new(values).expect("finite")
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of repeat `rep` at size `(n, p)`.
pub fn instance_seed(seed: u64, n: usize, p: usize, rep: usize) -> u64 {
    splitmix64(seed ^ splitmix64((n as u64) ^ ((p as u64) << 24) ^ ((rep as u64) << 44)))
}

fn validate(n_list: &[usize], p: usize, repeats: usize) -> Result<()> {
    if repeats < MIN_REPEATS {
        return Err(MdeError::InvalidConfig(format!(
            "repeats must be at least {MIN_REPEATS}, got {repeats}"
        )));
    }
    if p == 0 {
        return Err(MdeError::InvalidConfig("p must be at least 1".into()));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(MdeError::InvalidConfig("n list must be nonempty and positive".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MdeError::InvalidConfig(format!(
            "n list must be strictly ascending, got {n_list:?}"
        )));
    }
    Ok(())
}

fn record(n: usize, p: usize, repeat: usize, seed: u64, method: Method, res: &FitResult) -> InstanceRecord {
    InstanceRecord {
        n,
        p,
        repeat,
        seed,
        method,
        seconds: res.elapsed.as_secs_f64(),
        sweeps: res.sweeps,
        candidates: res.mean_candidates(),
        loss: res.loss,
        estimate: res.estimate.to_vec(),
    }
}

fn run(
    n_list: &[usize],
    p: usize,
    repeats: usize,
    seed: u64,
    methods: &[Method],
    options: &BenchOptions,
) -> Result<BenchReport> {
    validate(n_list, p, repeats)?;
    let beta = bench_beta(p);
    let jobs: Vec<(usize, usize)> = n_list
        .iter()
        .flat_map(|&n| (0..repeats).map(move |rep| (n, rep)))
        .collect();

    let solve = |&(n, rep): &(usize, usize)| -> Result<Vec<InstanceRecord>> {
        let s = instance_seed(seed, n, p, rep);
        let data = simulate(n, p, &beta, options.error, s)?;
        let weights = default_weights(&data);
        let mut out = Vec::with_capacity(methods.len());
        for &method in methods {
            let res = match method {
                Method::Coordinate => solver::fit(&data, &weights, &SolverConfig::default())?,
                Method::NelderMead => {
                    let init = solver::ols(&data).unwrap_or_else(|| ParameterVector::zeros(p));
                    let budget = options.nm_max_evals.unwrap_or_else(|| default_nm_budget(p));
                    nelder_mead_fit(&data, &weights, &init, budget)?
                }
            };
            out.push(record(n, p, rep, s, method, &res));
        }
        Ok(out)
    };

    let per_job: Vec<Vec<InstanceRecord>> = if options.parallel_instances {
        jobs.par_iter().map(solve).collect::<Result<_>>()?
    } else {
        jobs.iter().map(solve).collect::<Result<_>>()?
    };
    let instances: Vec<InstanceRecord> = per_job.into_iter().flatten().collect();

    let mut rows = Vec::new();
    for &n in n_list {
        for &method in methods {
            let cell: Vec<&InstanceRecord> = instances
                .iter()
                .filter(|r| r.n == n && r.method == method)
                .collect();
            let mean = |f: &dyn Fn(&InstanceRecord) -> f64| {
                cell.iter().map(|r| f(r)).sum::<f64>() / cell.len() as f64
            };
            rows.push(BenchRow {
                n,
                p,
                repeats,
                method,
                mean_seconds: mean(&|r| r.seconds),
                mean_sweeps: mean(&|r| r.sweeps as f64),
                mean_candidates: mean(&|r| r.candidates),
                final_loss: mean(&|r| r.loss),
            });
        }
    }
    Ok(BenchReport { rows, instances })
}

/// Fit time of the coordinate solver on fresh simulated instances.
pub fn scaling_run(n_list: &[usize], p: usize, repeats: usize, seed: u64) -> Result<BenchReport> {
    scaling_run_with(n_list, p, repeats, seed, &BenchOptions::default())
}

pub fn scaling_run_with(
    n_list: &[usize],
    p: usize,
    repeats: usize,
    seed: u64,
    options: &BenchOptions,
) -> Result<BenchReport> {
    run(n_list, p, repeats, seed, &[Method::Coordinate], options)
}

/// Coordinate solver and Nelder–Mead on identical instances, both started
/// from least squares.
pub fn compare_run(n_list: &[usize], p: usize, repeats: usize, seed: u64) -> Result<BenchReport> {
    compare_run_with(n_list, p, repeats, seed, &BenchOptions::default())
}

pub fn compare_run_with(
    n_list: &[usize],
    p: usize,
    repeats: usize,
    seed: u64,
    options: &BenchOptions,
) -> Result<BenchReport> {
    run(
        n_list,
        p,
        repeats,
        seed,
        &[Method::Coordinate, Method::NelderMead],
        options,
    )
}

// ---------------------------------------------------------------------------
// Nelder–Mead
// ---------------------------------------------------------------------------

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const XATOL: f64 = 1e-8;
const FATOL_REL: f64 = 1e-10;

/// Nelder–Mead simplex search on the distance, starting from `init`.
///
/// The initial simplex perturbs each coordinate by 5% (or 0.00025 when it
/// is zero). Stops when every vertex is within `1e-8` of the best one in
/// every coordinate and the objective spread is below `1e-10 (1 + |f|)`,
/// or after `max_evals` distance evaluations. `sweeps` in the result counts
/// simplex iterations.
pub fn nelder_mead_fit(
    data: &RegressionData,
    weights: &WeightMatrix,
    init: &ParameterVector,
    max_evals: usize,
) -> Result<FitResult> {
    let start = Instant::now();
    let tables = distance::build_pair_tables(data, weights)?;
    let p = data.p();
    init.check_len(p)?;

    let mut counter = Counted {
        tables: &tables,
        evals: 0,
    };

    let finish = |x: Vec<f64>, f: f64, iters: usize, converged: bool, trace: Vec<f64>| {
        Ok(FitResult {
            estimate: ParameterVector::new(x)?,
            loss: f,
            sweeps: iters,
            converged,
            elapsed: start.elapsed(),
            loss_trace: trace,
            candidate_counts: Vec::new(),
        })
    };

    if max_evals == 0 {
        let f = distance::loss(&tables, init)?;
        return finish(init.to_vec(), f, 0, false, vec![f]);
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p + 1);
    let x0 = init.to_vec();
    let f0 = counter.eval(&x0);
    simplex.push((x0.clone(), f0));
    for k in 0..p {
        if counter.evals >= max_evals {
            break;
        }
        let mut x = x0.clone();
        x[k] = if x[k] != 0.0 { 1.05 * x[k] } else { 0.00025 };
        let f = counter.eval(&x);
        simplex.push((x, f));
    }
    if simplex.len() < p + 1 {
        let (x, f) = best_of(simplex);
        return finish(x, f, 0, false, vec![f]);
    }

    let mut iters = 0;
    let mut trace = Vec::new();
    let mut converged = false;
    while counter.evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        trace.push(simplex[0].1);
        let (best_x, best_f) = (&simplex[0].0, simplex[0].1);
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(best_x).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let f_spread = simplex[1..]
            .iter()
            .map(|(_, f)| (f - best_f).abs())
            .fold(0.0f64, f64::max);
        if x_spread <= XATOL && f_spread <= FATOL_REL * (1.0 + best_f.abs()) {
            converged = true;
            break;
        }
        iters += 1;

        let worst = simplex[p].clone();
        let centroid: Vec<f64> = (0..p)
            .map(|k| simplex[..p].iter().map(|(x, _)| x[k]).sum::<f64>() / p as f64)
            .collect();
        let toward = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = toward(REFLECT);
        let fr = counter.eval(&xr);
        if fr < simplex[0].1 {
            let xe = toward(REFLECT * EXPAND);
            let fe = counter.eval(&xe);
            simplex[p] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[p - 1].1 {
            simplex[p] = (xr, fr);
            continue;
        }
        // contraction, outside if the reflection beat the worst vertex
        let (xc, fc) = if fr < worst.1 {
            let xc = toward(REFLECT * CONTRACT);
            let fc = counter.eval(&xc);
            (xc, fc)
        } else {
            let xc = toward(-CONTRACT);
            let fc = counter.eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[p] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            if counter.evals >= max_evals {
                break;
            }
            let x: Vec<f64> = anchor
                .iter()
                .zip(&vertex.0)
                .map(|(a, v)| a + SHRINK * (v - a))
                .collect();
            let f = counter.eval(&x);
            *vertex = (x, f);
        }
    }
    let (x, f) = best_of(simplex);
    finish(x, f, iters, converged, trace)
}

struct Counted<'a> {
    tables: &'a distance::PairTables,
    evals: usize,
}

impl Counted<'_> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        distance::loss(self.tables, x).expect("length checked")
    }
}

fn best_of(simplex: Vec<(Vec<f64>, f64)>) -> (Vec<f64>, f64) {
    simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("simplex has a vertex")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> (RegressionData, WeightMatrix) {
        let data = RegressionData::from_rows(&[vec![1.0], vec![1.0]], vec![1.0, 3.0]).unwrap();
        let w = default_weights(&data);
        (data, w)
    }

    #[test]
    fn nelder_mead_two_point() {
        let (data, w) = two_point();
        for start in [0.0, 0.7, 5.0, -3.0] {
            let init = ParameterVector::new(vec![start]).unwrap();
            let res = nelder_mead_fit(&data, &w, &init, 500).unwrap();
            assert!((res.estimate[0] - 2.0).abs() < 1e-3, "start {start}: {:?}", res.estimate);
        }
    }

    #[test]
    fn nelder_mead_zero_budget_returns_init() {
        let (data, w) = two_point();
        let init = ParameterVector::new(vec![0.3]).unwrap();
        let res = nelder_mead_fit(&data, &w, &init, 0).unwrap();
        assert_eq!(res.estimate, init);
        assert_eq!(res.loss, distance::loss(&distance::build_pair_tables(&data, &w).unwrap(), &[0.3]).unwrap());
    }

    #[test]
    fn nelder_mead_respects_budget() {
        let beta = bench_beta(3);
        let data = simulate(20, 3, &beta, ErrorDist::Normal { sigma: 1.0 }, 1).unwrap();
        let w = default_weights(&data);
        let init = ParameterVector::zeros(3);
        let small = nelder_mead_fit(&data, &w, &init, 10).unwrap();
        assert!(!small.converged);
        let big = nelder_mead_fit(&data, &w, &init, 5000).unwrap();
        assert!(big.loss <= small.loss);
    }

    #[test]
    fn repeats_below_minimum_rejected() {
        assert!(matches!(scaling_run(&[10], 2, 1, 0), Err(MdeError::InvalidConfig(_))));
        assert!(scaling_run(&[20, 10], 2, 3, 0).is_err());
        assert!(scaling_run(&[10], 0, 3, 0).is_err());
    }

    #[test]
    fn scaling_report_shape_and_determinism() {
        let a = scaling_run(&[10, 20], 2, 3, 42).unwrap();
        let b = scaling_run(&[10, 20], 2, 3, 42).unwrap();
        assert_eq!(a.rows.len(), 2);
        assert_eq!(a.instances.len(), 6);
        let strip = |r: &BenchReport| {
            r.instances
                .iter()
                .map(|i| (i.n, i.seed, i.sweeps, i.loss.to_bits(), i.estimate.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
        let row = &a.rows[1];
        assert_eq!(row.time_per_n_pow(2), row.mean_seconds / 400.0);
    }

    #[test]
    fn parallel_instances_match_sequential() {
        let opts = BenchOptions {
            parallel_instances: true,
            ..BenchOptions::default()
        };
        let seq = compare_run(&[12], 2, 3, 9).unwrap();
        let par = compare_run_with(&[12], 2, 3, 9, &opts).unwrap();
        let losses = |r: &BenchReport| r.instances.iter().map(|i| i.loss.to_bits()).collect::<Vec<_>>();
        assert_eq!(losses(&seq), losses(&par));
    }

    #[test]
    fn csv_has_the_documented_header() {
        let report = compare_run(&[10], 2, 3, 1).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "n,p,repeats,method,mean_seconds,mean_sweeps,mean_candidates,final_loss"
        );
        let methods: Vec<&str> = lines.map(|l| l.split(',').nth(3).unwrap()).collect();
        assert_eq!(methods, vec!["coordinate", "nelder_mead"]);
    }
}
