use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ShapeBuilder};
use serde::{Deserialize, Serialize};

use super::SiteError;

/// Outcome column name in site CSV files.
pub const OUTCOME_COLUMN: &str = "y";

/// One cohort's covariates and outcome.
///
/// The covariate matrix is kept column-major so per-covariate sums touch
/// contiguous memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteDataset {
    x: Array2<f64>,
    y: Array1<f64>,
    names: Vec<String>,
}

impl SiteDataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self, SiteError> {
        let names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_names(x, y, names)
    }

    pub fn with_names(x: Array2<f64>, y: Array1<f64>, names: Vec<String>) -> Result<Self, SiteError> {
        if x.nrows() != y.len() {
            return Err(SiteError::LengthMismatch {
                expected: x.nrows(),
                actual: y.len(),
            });
        }
        if names.len() != x.ncols() {
            return Err(SiteError::LengthMismatch {
                expected: x.ncols(),
                actual: names.len(),
            });
        }
        if x.nrows() == 0 {
            return Err(SiteError::InvalidData("site has no individuals".into()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(SiteError::InvalidData("missing or non-finite values".into()));
        }
        let mut xf = Array2::<f64>::zeros(x.raw_dim().f());
        xf.assign(&x);
        Ok(Self { x: xf, y, names })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Reads a CSV file with a header row. The column named `y` is the
    /// outcome; every other column is a covariate, in file order.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, SiteError> {
        let mut reader = csv::Reader::from_path(path)?;
        let header = reader.headers()?.clone();
        let y_col = header
            .iter()
            .position(|h| h == OUTCOME_COLUMN)
            .ok_or_else(|| SiteError::InvalidData("no outcome column `y`".into()))?;
        let names: Vec<String> = header
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != y_col)
            .map(|(_, h)| h.to_string())
            .collect();
        let p = names.len();
        let mut values = Vec::new();
        let mut y = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            for (i, field) in record.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| SiteError::InvalidData(format!("row {}: cannot parse `{field}`", row + 1)))?;
                if i == y_col {
                    y.push(v);
                } else {
                    values.push(v);
                }
            }
        }
        let n = y.len();
        let x = Array2::from_shape_vec((n, p), values).map_err(|e| SiteError::InvalidData(e.to_string()))?;
        Self::with_names(x, Array1::from(y), names)
    }

    /// Writes covariates followed by the outcome column.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), SiteError> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = self.names.clone();
        header.push(OUTCOME_COLUMN.to_string());
        writer.write_record(&header)?;
        let mut line = Vec::with_capacity(self.p() + 1);
        for (row, &y) in self.x.rows().into_iter().zip(self.y.iter()) {
            line.clear();
            line.extend(row.iter().map(|v| v.to_string()));
            line.push(y.to_string());
            writer.write_record(&line)?;
        }
        writer.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StandardizationMode {
    Local,
    Global,
}

impl StandardizationMode {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "local" => Some(Self::Local),
            "global" => Some(Self::Global),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams {
    pub mode: StandardizationMode,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub y_mean: f64,
}

/// A dataset after centering and scaling, together with the parameters used.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedSite {
    pub data: SiteDataset,
    pub params: StandardizationParams,
}
