//! Bundled UCI datasets (Iris, Wine, Boston Housing) and their loader.
//!
//! Files are CSV with a header row; the last column is the target. A
//! directory given explicitly or through `SPARSE_PD_DATA` takes precedence
//! over the copies compiled into the crate.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::DatasetError;

pub const DATA_ENV: &str = "SPARSE_PD_DATA";
/// Columns whose variance falls below this are mapped to zeros.
pub const VARIANCE_FLOOR: f64 = 1e-12;

const IRIS: &str = include_str!("../../data/iris.csv");
const WINE: &str = include_str!("../../data/wine.csv");
const BOSTON: &str = include_str!("../../data/boston.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    Iris,
    Wine,
    Boston,
}

impl DatasetName {
    pub const ALL: [DatasetName; 3] = [DatasetName::Iris, DatasetName::Wine, DatasetName::Boston];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetName::Iris => "iris",
            DatasetName::Wine => "wine",
            DatasetName::Boston => "boston",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.as_str())
    }

    pub fn bundled(self) -> &'static str {
        match self {
            DatasetName::Iris => IRIS,
            DatasetName::Wine => WINE,
            DatasetName::Boston => BOSTON,
        }
    }

    /// SHA-256 of the bundled snapshot.
    pub fn bundled_sha256(self) -> &'static str {
        match self {
            DatasetName::Iris => "81269defbe7c559bfe8c9c79a46698e32ef1dd3dbdf9d9c91a42a039bf85df2d",
            DatasetName::Wine => "7ab4bfea28aa2b962a6d5554dc25111c278c99dae4af27edd4922d802ff3a8da",
            DatasetName::Boston => "24ec814c9b6c5bb1cae0f6d203636413195ade13a34b62920787599f63eefd7e",
        }
    }

    /// Raw file in the UCI repository.
    pub fn source_url(self) -> &'static str {
        match self {
            DatasetName::Iris => "https://archive.ics.uci.edu/ml/machine-learning-databases/iris/iris.data",
            DatasetName::Wine => "https://archive.ics.uci.edu/ml/machine-learning-databases/wine/wine.data",
            DatasetName::Boston => "https://archive.ics.uci.edu/ml/machine-learning-databases/housing/housing.data",
        }
    }

    fn header(self) -> &'static str {
        self.bundled().lines().next().unwrap_or_default()
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.trim().to_ascii_lowercase();
        DatasetName::ALL
            .into_iter()
            .find(|d| d.as_str() == key)
            .ok_or_else(|| format!("unknown dataset `{s}`"))
    }
}

/// Standardised design matrix and target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: DatasetName,
    pub columns: Vec<String>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn data_dir(explicit: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
}

/// Loads `name` from `dir` (or `SPARSE_PD_DATA`) when the file exists there,
/// otherwise from the bundled copy.
pub fn load_dataset(name: DatasetName, dir: Option<&Path>) -> Result<Dataset, DatasetError> {
    if let Some(dir) = data_dir(dir) {
        let path = dir.join(name.file_name());
        if path.is_file() {
            let text = std::fs::read_to_string(&path).map_err(|source| DatasetError::Io { path, source })?;
            return parse_dataset(name, &text);
        }
    }
    parse_dataset(name, name.bundled())
}

fn missing(field: &str) -> bool {
    matches!(field.trim(), "" | "?" | "NA" | "na" | "NaN" | "nan")
}

/// Parses CSV text with a header. Rows with a missing value are dropped.
pub fn parse_dataset(name: DatasetName, text: &str) -> Result<Dataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if columns.len() < 2 {
        return Err(DatasetError::Empty);
    }
    let width = columns.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        // Header is row 1.
        let row = k + 2;
        if rec.len() != width {
            return Err(DatasetError::Ragged {
                row,
                expected: width,
                found: rec.len(),
            });
        }
        if rec.iter().any(missing) {
            continue;
        }
        let mut vals = Vec::with_capacity(width);
        for (c, field) in rec.iter().enumerate() {
            let v = if c + 1 == width && name == DatasetName::Iris {
                iris_label(field)
            } else {
                field.parse::<f64>().ok()
            };
            vals.push(v.ok_or_else(|| DatasetError::Parse {
                row,
                column: c + 1,
                value: field.to_string(),
            })?);
        }
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(DatasetError::Empty);
    }
    let m = rows.len();
    let nf = width - 1;
    let mut a = DMatrix::from_fn(m, nf, |i, j| rows[i][j]);
    standardize_columns(&mut a);
    let b = DVector::from_fn(m, |i, _| rows[i][nf]);
    Ok(Dataset {
        name,
        columns,
        a,
        b,
    })
}

/// `+1` for setosa (class 0), `-1` otherwise.
fn iris_label(field: &str) -> Option<f64> {
    let f = field.trim();
    if f.to_ascii_lowercase().contains("setosa") {
        return Some(1.0);
    }
    if f.starts_with("Iris-") {
        return Some(-1.0);
    }
    f.parse::<f64>().ok().map(|c| if c == 0.0 { 1.0 } else { -1.0 })
}

/// Zero mean, unit (population) variance per column.
pub fn standardize_columns(a: &mut DMatrix<f64>) {
    let m = a.nrows() as f64;
    for mut col in a.column_iter_mut() {
        let mean = col.sum() / m;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
        if var < VARIANCE_FLOOR {
            col.fill(0.0);
        } else {
            let sd = var.sqrt();
            col.apply(|v| *v = (*v - mean) / sd);
        }
    }
}

/// Converts a raw UCI file into the bundled CSV layout.
pub fn convert_uci(name: DatasetName, raw: &str) -> Result<String, DatasetError> {
    let mut out = String::from(name.header());
    out.push('\n');
    for line in raw.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let fields: Vec<&str> = match name {
            DatasetName::Boston => line.split_whitespace().collect(),
            _ => line.split(',').map(str::trim).collect(),
        };
        let row: Vec<String> = match name {
            DatasetName::Iris => {
                let class = match fields.last().copied().unwrap_or_default() {
                    "Iris-setosa" => "0",
                    "Iris-versicolor" => "1",
                    "Iris-virginica" => "2",
                    other => return Err(DatasetError::Fetch(format!("unexpected iris class `{other}`"))),
                };
                fields[..fields.len() - 1].iter().map(|s| s.to_string()).chain([class.to_string()]).collect()
            }
            DatasetName::Wine => {
                // Class leads in the UCI file and is 1-based.
                let class: u32 = fields[0]
                    .parse()
                    .map_err(|_| DatasetError::Fetch(format!("bad wine class `{}`", fields[0])))?;
                fields[1..].iter().map(|s| s.to_string()).chain([(class - 1).to_string()]).collect()
            }
            DatasetName::Boston => fields.iter().map(|s| s.to_string()).collect(),
        };
        out.push_str(&row.join(","));
        out.push('\n');
    }
    parse_dataset(name, &out)?;
    Ok(out)
}

/// Downloads `name` from the UCI repository into `dir` in the bundled layout.
/// Returns the written path and its SHA-256.
pub fn fetch_dataset(name: DatasetName, dir: &Path) -> Result<(PathBuf, String), DatasetError> {
    let raw = ureq::get(name.source_url())
        .call()
        .map_err(|e| DatasetError::Fetch(e.to_string()))?
        .into_string()
        .map_err(|e| DatasetError::Fetch(e.to_string()))?;
    let text = convert_uci(name, &raw)?;
    std::fs::create_dir_all(dir).map_err(|source| DatasetError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name.file_name());
    std::fs::write(&path, &text).map_err(|source| DatasetError::Io {
        path: path.clone(),
        source,
    })?;
    Ok((path, sha256_hex(text.as_bytes())))
}
