//! CSV ingestion of experimental runs.
//!
//! The header row must use the exact column names in [`COLUMNS`]. A time
//! column is required, plus at least one of concentration or percent removal.

use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Contaminant, ObservationSeries, Sample, REMOVAL_TOLERANCE};

pub const TIME_COLUMN: &str = "time_min";
pub const CONCENTRATION_COLUMN: &str = "concentration_mg_l";
pub const REMOVAL_COLUMN: &str = "removal_pct";
pub const THICKNESS_COLUMN: &str = "thickness_cm";
pub const PH_COLUMN: &str = "ph";

pub const COLUMNS: [&str; 5] = [
    TIME_COLUMN,
    CONCENTRATION_COLUMN,
    REMOVAL_COLUMN,
    THICKNESS_COLUMN,
    PH_COLUMN,
];

/// Influent concentration of the bundled experiments, mg/L.
pub const DEFAULT_C0: f64 = 50.0;

/// Thickness of the bundled experiments' barrier, cm.
pub const DEFAULT_THICKNESS_CM: f64 = 3.0;

/// What to do with header columns outside [`COLUMNS`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownColumns {
    /// Ignore them and list them in [`LoadedSeries::ignored_columns`].
    #[default]
    Warn,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub path: PathBuf,
    pub contaminant: Contaminant,
    pub c0: f64,
    /// Defaults to the file stem.
    pub run_label: Option<String>,
    /// Used when the thickness column is absent or a cell is empty.
    pub default_thickness: f64,
    pub unknown_columns: UnknownColumns,
}

impl DatasetFile {
    pub fn new(path: impl Into<PathBuf>, contaminant: Contaminant) -> Self {
        Self {
            path: path.into(),
            contaminant,
            c0: DEFAULT_C0,
            run_label: None,
            default_thickness: DEFAULT_THICKNESS_CM,
            unknown_columns: UnknownColumns::Warn,
        }
    }

    fn label(&self) -> String {
        self.run_label.clone().unwrap_or_else(|| {
            self.path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
    }
}

/// Header positions of the recognised columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub time_min: usize,
    pub concentration_mg_l: Option<usize>,
    pub removal_pct: Option<usize>,
    pub thickness_cm: Option<usize>,
    pub ph: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSeries {
    pub series: ObservationSeries,
    pub schema: ColumnMapping,
    pub ignored_columns: Vec<String>,
}

pub fn load_series(f: &DatasetFile) -> Result<LoadedSeries> {
    let file = std::fs::File::open(&f.path).map_err(|e| Error::io(&f.path, e))?;
    parse_series(file, f)
}

/// Parses CSV text from any reader; `f.path` is only used for the run label.
pub fn parse_series<R: Read>(reader: R, f: &DatasetFile) -> Result<LoadedSeries> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| parse_err(0, "header", e.to_string()))?
        .clone();

    let position = |name: &str| headers.iter().position(|h| h == name);
    let schema = ColumnMapping {
        time_min: position(TIME_COLUMN)
            .ok_or_else(|| parse_err(0, TIME_COLUMN, "required column missing".into()))?,
        concentration_mg_l: position(CONCENTRATION_COLUMN),
        removal_pct: position(REMOVAL_COLUMN),
        thickness_cm: position(THICKNESS_COLUMN),
        ph: position(PH_COLUMN),
    };
    if schema.concentration_mg_l.is_none() && schema.removal_pct.is_none() {
        return Err(parse_err(
            0,
            "header",
            format!("need '{CONCENTRATION_COLUMN}' or '{REMOVAL_COLUMN}'"),
        ));
    }
    let ignored_columns: Vec<String> = headers
        .iter()
        .filter(|h| !COLUMNS.contains(h))
        .map(str::to_owned)
        .collect();
    if f.unknown_columns == UnknownColumns::Error && !ignored_columns.is_empty() {
        return Err(parse_err(
            0,
            &ignored_columns[0],
            "unknown column".into(),
        ));
    }

    let mut samples = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| parse_err(row, "record", e.to_string()))?;
        let cell = |idx: Option<usize>, name: &str| -> Result<Option<f64>> {
            let Some(idx) = idx else { return Ok(None) };
            match record.get(idx).unwrap_or("") {
                "" => Ok(None),
                text => match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(Some(v)),
                    _ => Err(parse_err(row, name, format!("'{text}' is not a finite number"))),
                },
            }
        };

        let t = cell(Some(schema.time_min), TIME_COLUMN)?
            .ok_or_else(|| parse_err(row, TIME_COLUMN, "missing time".into()))?;
        if t <= 1.0 {
            return Err(validation(row, format!("time {t} min must exceed 1 min")));
        }
        if let Some(prev) = samples.last().map(|s: &Sample| s.t_raw) {
            if t <= prev {
                return Err(validation(row, format!("time {t} is not after previous time {prev}")));
            }
        }
        let concentration = cell(schema.concentration_mg_l, CONCENTRATION_COLUMN)?;
        let removal_fraction = match cell(schema.removal_pct, REMOVAL_COLUMN)? {
            Some(pct) if !(0.0..=100.0).contains(&pct) => {
                return Err(validation(row, format!("removal {pct}% outside [0, 100]")))
            }
            pct => pct.map(|p| p / 100.0),
        };
        if concentration.is_none() && removal_fraction.is_none() {
            return Err(validation(row, "neither concentration nor removal present".into()));
        }
        if let Some(c) = concentration {
            if c < 0.0 {
                return Err(validation(row, format!("negative concentration {c}")));
            }
            if c > f.c0 * (1.0 + REMOVAL_TOLERANCE) {
                return Err(validation(
                    row,
                    format!("concentration {c} exceeds initial concentration {}", f.c0),
                ));
            }
        }
        let thickness = cell(schema.thickness_cm, THICKNESS_COLUMN)?.unwrap_or(f.default_thickness);
        samples.push(Sample {
            t_raw: t,
            concentration,
            removal_fraction,
            thickness_w: thickness,
            ph: cell(schema.ph, PH_COLUMN)?,
        });
    }

    let series = ObservationSeries::new(f.contaminant, f.label(), f.c0, samples).map_err(|e| match e {
        Error::InconsistentSample { index, detail } => validation(index + 1, detail),
        Error::InvalidTime { index, t } => validation(index + 1, format!("invalid time {t}")),
        Error::InsufficientData { needed, found } => {
            validation(found, format!("need at least {needed} rows, found {found}"))
        }
        other => other,
    })?;
    Ok(LoadedSeries {
        series,
        schema,
        ignored_columns,
    })
}

fn parse_err(row: usize, column: &str, message: String) -> Error {
    Error::Parse {
        row,
        column: column.to_owned(),
        message,
    }
}

fn validation(row: usize, message: String) -> Error {
    Error::Validation { row, message }
}

/// Percent value whose division by 100 reproduces `fraction` exactly, so
/// that writing and re-reading a series is lossless.
fn percent_for(fraction: f64) -> f64 {
    let mut up = fraction * 100.0;
    let mut down = up;
    for _ in 0..8 {
        if up / 100.0 == fraction {
            return up;
        }
        if down / 100.0 == fraction {
            return down;
        }
        up = up.next_up();
        down = down.next_down();
    }
    fraction * 100.0
}

/// Renders a series in the input CSV format. Optional columns appear only
/// when at least one sample has a value.
pub fn series_to_csv(series: &ObservationSeries) -> String {
    let samples = series.samples();
    let has_c = samples.iter().any(|s| s.concentration.is_some());
    let has_r = samples.iter().any(|s| s.removal_fraction.is_some());
    let has_ph = samples.iter().any(|s| s.ph.is_some());
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();

    let mut header = vec![TIME_COLUMN];
    if has_c {
        header.push(CONCENTRATION_COLUMN);
    }
    if has_r {
        header.push(REMOVAL_COLUMN);
    }
    header.push(THICKNESS_COLUMN);
    if has_ph {
        header.push(PH_COLUMN);
    }
    let mut out = header.join(",");
    out.push('\n');
    for s in samples {
        let mut cells = vec![s.t_raw.to_string()];
        if has_c {
            cells.push(opt(s.concentration));
        }
        if has_r {
            cells.push(opt(s.removal_fraction.map(percent_for)));
        }
        cells.push(s.thickness_w.to_string());
        if has_ph {
            cells.push(opt(s.ph));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_series(series: &ObservationSeries, path: &Path) -> Result<()> {
    write_atomic(path, series_to_csv(series).as_bytes())
}
