//! Domain types, CSV ingestion and synthetic data.
//!
//! Matrices are stored row-major: row `i` of the design is `x_i'`, the
//! covariate vector of observation `i`.

use std::fs::File;
use std::io::{Read, Write};
use std::ops::Deref;
use std::path::Path;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{MdeError, Result};

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(MdeError::NonFinite { what, index }),
        None => Ok(()),
    }
}

/// Observed sample: an `n x p` design matrix and `n` responses.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    n: usize,
    p: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl RegressionData {
    /// Builds data from a row-major design buffer of length `n * p`.
    pub fn from_row_major(n: usize, p: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(MdeError::Shape(format!(
                "need n >= 1 and p >= 1, got n={n}, p={p}"
            )));
        }
        if x.len() != n * p {
            return Err(MdeError::Shape(format!(
                "design buffer has {} entries, expected {n}x{p}",
                x.len()
            )));
        }
        if y.len() != n {
            return Err(MdeError::Shape(format!(
                "response has {} entries but design has {n} rows",
                y.len()
            )));
        }
        check_finite(&x, "design matrix")?;
        check_finite(&y, "response")?;
        Ok(Self { n, p, x, y })
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(MdeError::Shape(format!(
                "row {bad} has {} columns, expected {p}",
                rows[bad].len()
            )));
        }
        let x = rows.iter().flatten().copied().collect();
        Self::from_row_major(rows.len(), p, x, y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Row-major design buffer.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn residual(&self, i: usize, b: &[f64]) -> f64 {
        let fitted: f64 = self.row(i).iter().zip(b).map(|(x, b)| x * b).sum();
        self.y[i] - fitted
    }
}

/// The `d_ik` coefficients defining the distance, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    p: usize,
    d: Vec<f64>,
}

impl WeightMatrix {
    pub fn from_row_major(n: usize, p: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * p {
            return Err(MdeError::Shape(format!(
                "weight buffer has {} entries, expected {n}x{p}",
                d.len()
            )));
        }
        check_finite(&d, "weight matrix")?;
        Ok(Self { n, p, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(MdeError::Shape(format!(
                "weight row {bad} has {} columns, expected {p}",
                rows[bad].len()
            )));
        }
        Self::from_row_major(rows.len(), p, rows.iter().flatten().copied().collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.p..(i + 1) * self.p]
    }

    pub fn check_matches(&self, data: &RegressionData) -> Result<()> {
        if self.n != data.n() || self.p != data.p() {
            return Err(MdeError::Shape(format!(
                "weights are {}x{} but the design is {}x{}",
                self.n,
                self.p,
                data.n(),
                data.p()
            )));
        }
        Ok(())
    }
}

/// `d_ik = x_ik`.
pub fn default_weights(data: &RegressionData) -> WeightMatrix {
    WeightMatrix {
        n: data.n,
        p: data.p,
        d: data.x.clone(),
    }
}

/// A candidate coefficient vector `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_finite(&values, "parameter vector")?;
        Ok(Self(values))
    }

    pub fn zeros(p: usize) -> Self {
        Self(vec![0.0; p])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn check_len(&self, p: usize) -> Result<()> {
        if self.0.len() != p {
            return Err(MdeError::Shape(format!(
                "parameter vector has length {}, expected {p}",
                self.0.len()
            )));
        }
        Ok(())
    }
}

impl Deref for ParameterVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub estimate: ParameterVector,
    pub loss: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub elapsed: Duration,
    /// Distance after initialization and after every coordinate update.
    pub loss_trace: Vec<f64>,
    /// Number of candidate zeros examined by each coordinate update, in
    /// sweep order.
    pub candidate_counts: Vec<usize>,
}

impl FitResult {
    pub fn mean_candidates(&self) -> f64 {
        if self.candidate_counts.is_empty() {
            return 0.0;
        }
        self.candidate_counts.iter().sum::<usize>() as f64 / self.candidate_counts.len() as f64
    }
}

/// How the response column of a CSV file is identified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl ColumnRef {
    /// Header names win over numeric indices when both would match.
    fn resolve(&self, headers: &[String]) -> Result<usize> {
        match self {
            ColumnRef::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .or_else(|| name.parse::<usize>().ok().filter(|&i| i < headers.len()))
                .ok_or_else(|| MdeError::MissingColumn(name.clone())),
            ColumnRef::Index(i) if *i < headers.len() => Ok(*i),
            ColumnRef::Index(i) => Err(MdeError::MissingColumn(i.to_string())),
        }
    }
}

impl From<&str> for ColumnRef {
    fn from(s: &str) -> Self {
        ColumnRef::Name(s.to_string())
    }
}

struct NumericTable {
    headers: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_numeric_table<R: Read>(reader: R, source: &str) -> Result<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(MdeError::EmptyFile(source.to_string()));
    }
    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .zip(&headers)
            .map(|(cell, column)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| MdeError::Parse {
                        row: idx + 1,
                        column: column.clone(),
                        value: cell.to_string(),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(MdeError::EmptyFile(source.to_string()));
    }
    Ok(NumericTable { headers, rows })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| MdeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a headed CSV file; the response column becomes `y` and every
/// other column, in file order, becomes a column of the design.
pub fn load_csv(path: impl AsRef<Path>, response: impl Into<ColumnRef>) -> Result<RegressionData> {
    let path = path.as_ref();
    read_csv(open(path)?, response, &path.display().to_string())
}

pub fn read_csv<R: Read>(
    reader: R,
    response: impl Into<ColumnRef>,
    source: &str,
) -> Result<RegressionData> {
    let table = read_numeric_table(reader, source)?;
    let response = response.into().resolve(&table.headers)?;
    if table.headers.len() < 2 {
        return Err(MdeError::InvalidData(format!(
            "{source}: need at least one covariate column besides the response"
        )));
    }
    let n = table.rows.len();
    let p = table.headers.len() - 1;
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for row in &table.rows {
        for (j, &v) in row.iter().enumerate() {
            if j == response {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    RegressionData::from_row_major(n, p, x, y)
}

/// Reads an `n x p` weight matrix from a headed CSV file (every column is
/// a weight column).
pub fn load_weights(path: impl AsRef<Path>) -> Result<WeightMatrix> {
    let path = path.as_ref();
    let table = read_numeric_table(open(path)?, &path.display().to_string())?;
    WeightMatrix::from_rows(&table.rows)
}

/// Writes `x1..xp,y` with shortest round-trip float formatting.
pub fn write_csv<W: Write>(data: &RegressionData, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=data.p()).map(|k| format!("x{k}")).collect();
    header.push("y".to_string());
    wtr.write_record(&header)?;
    for i in 0..data.n() {
        let record: Vec<String> = data
            .row(i)
            .iter()
            .chain(std::iter::once(&data.y()[i]))
            .map(|v| format!("{v:?}"))
            .collect();
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| MdeError::Csv(e.into()))?;
    Ok(())
}

/// Zero-symmetric error laws offered by the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorDist {
    Normal { sigma: f64 },
    Laplace { scale: f64 },
    /// Uniform on `(-half_width, half_width)`.
    Uniform { half_width: f64 },
}

impl ErrorDist {
    fn spread(&self) -> f64 {
        match *self {
            ErrorDist::Normal { sigma } => sigma,
            ErrorDist::Laplace { scale } => scale,
            ErrorDist::Uniform { half_width } => half_width,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let spread = self.spread();
        if spread == 0.0 {
            return 0.0;
        }
        match *self {
            ErrorDist::Normal { sigma } => Normal::new(0.0, sigma)
                .expect("sigma validated")
                .sample(rng),
            ErrorDist::Laplace { scale } => {
                // inverse CDF on u in (-1/2, 1/2)
                let u: f64 = rng.random::<f64>() - 0.5;
                -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            ErrorDist::Uniform { half_width } => rng.random_range(-half_width..half_width),
        }
    }
}

/// Draws `x_ik ~ N(0, 1)` i.i.d. and `y_i = x_i' beta + e_i`.
pub fn simulate(
    n: usize,
    p: usize,
    beta: &ParameterVector,
    error: ErrorDist,
    seed: u64,
) -> Result<RegressionData> {
    if n == 0 || p == 0 {
        return Err(MdeError::InvalidConfig(format!(
            "simulate needs n >= 1 and p >= 1, got n={n}, p={p}"
        )));
    }
    beta.check_len(p)?;
    let spread = error.spread();
    if !(spread.is_finite() && spread >= 0.0) {
        return Err(MdeError::InvalidConfig(format!(
            "error spread must be finite and nonnegative, got {spread}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let mean: f64 = row.iter().zip(beta.iter()).map(|(x, b)| x * b).sum();
        y.push(mean + error.sample(&mut rng));
        x.extend(row);
    }
    RegressionData::from_row_major(n, p, x, y)
}
