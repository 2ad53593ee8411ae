//! Core data containers, CSV ingestion and deterministic splitting.
//!
//! A [`Dataset`] is immutable after construction and validated on every
//! public construction path: finite entries only, strictly binary treatment,
//! matching lengths. Splits are stratified by treatment arm so that both
//! arms are represented in the calibration set.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::RcpError;
use crate::seeding::{stream_rng, tag};
use crate::Result;

/// Dense row-major matrix of covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(RcpError::Validation("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(RcpError::Validation("matrix needs at least one column".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(RcpError::Validation(format!(
                    "row {} has {} columns, expected {cols}",
                    i + 1,
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            data,
            rows: rows.len(),
            cols,
        })
    }

    pub fn from_flat(data: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(RcpError::Validation("flat matrix shape mismatch".into()));
        }
        Ok(Self { data, rows, cols })
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Rows selected by index, as a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            data,
            rows: idx.len(),
            cols: self.cols,
        }
    }
}

/// One observational study: covariates, binary treatment, factual outcome,
/// and (for synthetic data only) the ground-truth counterfactual outcome.
#[derive(Debug, Clone)]
pub struct Dataset {
    covariates: Matrix,
    treatment: Vec<u8>,
    outcome: Vec<f64>,
    counterfactual_truth: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(
        covariates: Matrix,
        treatment: Vec<u8>,
        outcome: Vec<f64>,
        counterfactual_truth: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = covariates.nrows();
        if treatment.len() != n || outcome.len() != n {
            return Err(RcpError::Validation(format!(
                "length mismatch: {n} covariate rows, {} treatments, {} outcomes",
                treatment.len(),
                outcome.len()
            )));
        }
        if let Some(cf) = &counterfactual_truth {
            if cf.len() != n {
                return Err(RcpError::Validation(format!(
                    "counterfactual_truth has length {}, expected {n}",
                    cf.len()
                )));
            }
            if let Some(i) = cf.iter().position(|v| !v.is_finite()) {
                return Err(RcpError::Validation(format!(
                    "non-finite counterfactual at row {}",
                    i + 1
                )));
            }
        }
        if let Some(i) = outcome.iter().position(|v| !v.is_finite()) {
            return Err(RcpError::Validation(format!("non-finite outcome at row {}", i + 1)));
        }
        if let Some(i) = covariates.data.iter().position(|v| !v.is_finite()) {
            return Err(RcpError::Validation(format!(
                "non-finite covariate at row {}",
                i / covariates.cols + 1
            )));
        }
        if let Some(i) = treatment.iter().position(|&t| t > 1) {
            return Err(RcpError::Validation(format!(
                "treatment must be 0 or 1, found {} at row {}",
                treatment[i],
                i + 1
            )));
        }
        Ok(Self {
            covariates,
            treatment,
            outcome,
            counterfactual_truth,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.treatment.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.covariates.ncols()
    }

    #[inline]
    pub fn covariates(&self) -> &Matrix {
        &self.covariates
    }

    #[inline]
    pub fn treatment(&self) -> &[u8] {
        &self.treatment
    }

    #[inline]
    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    #[inline]
    pub fn counterfactual_truth(&self) -> Option<&[f64]> {
        self.counterfactual_truth.as_deref()
    }

    /// Row as a query unit.
    pub fn unit(&self, i: usize) -> Unit {
        Unit {
            x: self.covariates.row(i).to_vec(),
            y_obs: self.outcome[i],
            t: self.treatment[i],
        }
    }

    /// Indices of rows in treatment arm `t`.
    pub fn arm_indices(&self, t: u8) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.treatment[i] == t).collect()
    }
}

/// A single query point: covariates, the observed outcome, and which arm
/// the unit actually received.
#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub x: Vec<f64>,
    pub y_obs: f64,
    pub t: u8,
}

impl Unit {
    pub fn new(x: Vec<f64>, y_obs: f64, t: u8) -> Result<Self> {
        if t > 1 {
            return Err(RcpError::Validation(format!("unit treatment must be 0 or 1, got {t}")));
        }
        if !y_obs.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(RcpError::Validation("unit has non-finite entries".into()));
        }
        Ok(Self { x, y_obs, t })
    }
}

/// Deterministic train/calibration split, stratified by treatment arm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub train_indices: Vec<usize>,
    pub calib_indices: Vec<usize>,
    pub seed: u64,
}

/// Stratified split: per arm, `floor(fraction * arm size)` units go to
/// calibration (the remainder to train), shuffled by a stream derived from
/// `seed`. Index lists come back sorted ascending.
pub fn split(ds: &Dataset, calib_fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(0.0 < calib_fraction && calib_fraction < 1.0) {
        return Err(RcpError::InvalidParam(format!(
            "calib_fraction must be in (0,1), got {calib_fraction}"
        )));
    }
    let mut train = Vec::new();
    let mut calib = Vec::new();
    for arm in [0u8, 1u8] {
        let mut idx = ds.arm_indices(arm);
        if idx.len() < 2 {
            return Err(RcpError::ArmTooSmall {
                arm,
                n: idx.len(),
                need: 2,
            });
        }
        let n_cal = (calib_fraction * idx.len() as f64).floor() as usize;
        if n_cal == 0 {
            return Err(RcpError::ArmTooSmall {
                arm,
                n: idx.len(),
                need: (1.0 / calib_fraction).ceil() as usize,
            });
        }
        let mut rng = stream_rng(seed, &[tag::SPLIT, arm as u64]);
        idx.shuffle(&mut rng);
        calib.extend_from_slice(&idx[..n_cal]);
        train.extend_from_slice(&idx[n_cal..]);
    }
    train.sort_unstable();
    calib.sort_unstable();
    Ok(SplitPlan {
        train_indices: train,
        calib_indices: calib,
        seed,
    })
}

/// Maps CSV column names to dataset roles.
#[derive(Debug, Clone)]
pub struct ColumnSchema {
    pub x_cols: Vec<String>,
    pub t_col: String,
    pub y_col: String,
    pub cf_col: Option<String>,
}

impl ColumnSchema {
    pub fn new(x_cols: Vec<String>, t_col: &str, y_col: &str, cf_col: Option<&str>) -> Result<Self> {
        if x_cols.is_empty() {
            return Err(RcpError::Config("schema needs at least one covariate column".into()));
        }
        Ok(Self {
            x_cols,
            t_col: t_col.to_string(),
            y_col: y_col.to_string(),
            cf_col: cf_col.map(str::to_string),
        })
    }

    /// Default names used by the CSV writer: x1..xd, t, y [, y_cf].
    pub fn default_names(d: usize, with_cf: bool) -> Self {
        Self {
            x_cols: (1..=d).map(|j| format!("x{j}")).collect(),
            t_col: "t".into(),
            y_col: "y".into(),
            cf_col: with_cf.then(|| "y_cf".into()),
        }
    }
}

impl fmt::Display for ColumnSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x=[{}] t={} y={}{}",
            self.x_cols.join(","),
            self.t_col,
            self.y_col,
            self.cf_col
                .as_deref()
                .map(|c| format!(" cf={c}"))
                .unwrap_or_default()
        )
    }
}

/// Load a comma-delimited file with a header row. Rows are numbered from 1
/// (excluding the header) in error messages.
pub fn load_csv(path: &Path, schema: &ColumnSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => RcpError::Io {
                path: path.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            },
            _ => RcpError::Csv {
                path: path.display().to_string(),
                message: e.to_string(),
            },
        })?;
    let headers = reader
        .headers()
        .map_err(|e| RcpError::Csv {
            path: path.display().to_string(),
            message: e.to_string(),
        })?
        .clone();
    let col_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| RcpError::Config(format!("column '{name}' not found in {}", path.display())))
    };
    let x_idx: Vec<usize> = schema
        .x_cols
        .iter()
        .map(|c| col_index(c))
        .collect::<Result<_>>()?;
    let t_idx = col_index(&schema.t_col)?;
    let y_idx = col_index(&schema.y_col)?;
    let cf_idx = schema.cf_col.as_deref().map(col_index).transpose()?;

    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut ts: Vec<u8> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut cfs: Vec<f64> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 1;
        let record = record.map_err(|e| RcpError::Csv {
            path: path.display().to_string(),
            message: format!("row {row}: {e}"),
        })?;
        let cell = |idx: usize, name: &str| -> Result<f64> {
            let raw = record.get(idx).ok_or_else(|| RcpError::Cell {
                row,
                column: name.to_string(),
                message: "missing cell".into(),
            })?;
            let v: f64 = raw.parse().map_err(|_| RcpError::Cell {
                row,
                column: name.to_string(),
                message: format!("non-numeric value '{raw}'"),
            })?;
            if !v.is_finite() {
                return Err(RcpError::Cell {
                    row,
                    column: name.to_string(),
                    message: format!("non-finite value '{raw}'"),
                });
            }
            Ok(v)
        };
        let mut x = Vec::with_capacity(x_idx.len());
        for (j, &idx) in x_idx.iter().enumerate() {
            x.push(cell(idx, &schema.x_cols[j])?);
        }
        let t_raw = cell(t_idx, &schema.t_col)?;
        let t = if t_raw == 0.0 {
            0u8
        } else if t_raw == 1.0 {
            1u8
        } else {
            return Err(RcpError::Cell {
                row,
                column: schema.t_col.clone(),
                message: format!("treatment must be 0 or 1, got '{t_raw}'"),
            });
        };
        xs.push(x);
        ts.push(t);
        ys.push(cell(y_idx, &schema.y_col)?);
        if let Some(idx) = cf_idx {
            cfs.push(cell(idx, schema.cf_col.as_deref().unwrap())?);
        }
    }
    if xs.is_empty() {
        return Err(RcpError::Validation(format!("{} contains no data rows", path.display())));
    }
    Dataset::new(
        Matrix::from_rows(xs)?,
        ts,
        ys,
        cf_idx.map(|_| cfs),
    )
}

/// Write a dataset using the schema's column names. Floats use shortest
/// round-trip formatting, so load(write(ds)) reproduces values exactly.
pub fn write_csv(ds: &Dataset, path: &Path, schema: &ColumnSchema) -> Result<()> {
    if schema.x_cols.len() != ds.dim() {
        return Err(RcpError::Config(format!(
            "schema has {} covariate names, dataset has {}",
            schema.x_cols.len(),
            ds.dim()
        )));
    }
    let mut out = String::new();
    out.push_str(&schema.x_cols.join(","));
    out.push(',');
    out.push_str(&schema.t_col);
    out.push(',');
    out.push_str(&schema.y_col);
    if let (Some(name), Some(_)) = (&schema.cf_col, ds.counterfactual_truth()) {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..ds.n() {
        for v in ds.covariates().row(i) {
            out.push_str(&format!("{v}"));
            out.push(',');
        }
        out.push_str(&format!("{}", ds.treatment()[i]));
        out.push(',');
        out.push_str(&format!("{}", ds.outcome()[i]));
        if let (Some(_), Some(cf)) = (&schema.cf_col, ds.counterfactual_truth()) {
            out.push(',');
            out.push_str(&format!("{}", cf[i]));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| RcpError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
