//! Fit reports: JSON with a flat CSV sidecar for plotting.
//!
//! Every floating-point number is written with 17 significant digits, so a
//! reloaded report reproduces its parameters bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::dataset::write_atomic;
use crate::error::{Error, Result};
use crate::metrics::FitMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    FirstOrder,
    Exponential,
    GaussianProcess,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::FirstOrder => "FirstOrder",
            ModelKind::Exponential => "Exponential",
            ModelKind::GaussianProcess => "GaussianProcess",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Scalar(f64),
    Vector(Vec<f64>),
    Text(String),
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Scalar(v)
    }
}

impl From<Vec<f64>> for ParamValue {
    fn from(v: Vec<f64>) -> Self {
        ParamValue::Vector(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_owned())
    }
}

impl From<String> for ParamValue {
    fn from(v: String) -> Self {
        ParamValue::Text(v)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub inputs: Vec<f64>,
    pub predicted: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    /// Lower and upper predictive quantiles, when a band was requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<(f64, f64)>,
}

impl PredictionRow {
    pub fn new(inputs: Vec<f64>, predicted: f64) -> Self {
        Self {
            inputs,
            predicted,
            ..Self::default()
        }
    }

    pub fn observed(mut self, value: f64) -> Self {
        self.observed = Some(value);
        self
    }

    pub fn variance(mut self, value: f64) -> Self {
        self.variance = Some(value);
        self
    }

    pub fn band(mut self, lower: f64, upper: f64) -> Self {
        self.band = Some((lower, upper));
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictionTable {
    pub input_columns: Vec<String>,
    pub rows: Vec<PredictionRow>,
}

impl PredictionTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            input_columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: PredictionRow) -> Result<()> {
        if row.inputs.len() != self.input_columns.len() {
            return Err(Error::DimensionMismatch {
                what: "prediction row inputs",
                expected: self.input_columns.len(),
                found: row.inputs.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn observed_predicted(&self) -> (Vec<f64>, Vec<f64>) {
        self.rows
            .iter()
            .filter_map(|r| r.observed.map(|o| (o, r.predicted)))
            .unzip()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model_kind: ModelKind,
    pub parameters: BTreeMap<String, ParamValue>,
    pub metrics: Option<FitMetrics>,
    pub predictions: PredictionTable,
    pub provenance: BTreeMap<String, String>,
}

impl FitReport {
    pub fn new(model_kind: ModelKind) -> Self {
        Self {
            model_kind,
            parameters: BTreeMap::new(),
            metrics: None,
            predictions: PredictionTable::default(),
            provenance: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, name: &str, value: impl Into<ParamValue>) {
        self.parameters.insert(name.to_owned(), value.into());
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.provenance.insert(key.to_owned(), value.into());
    }

    fn param(&self, name: &str) -> Result<&ParamValue> {
        self.parameters
            .get(name)
            .ok_or_else(|| Error::Report(format!("missing parameter '{name}'")))
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        match self.param(name)? {
            ParamValue::Scalar(v) => Ok(*v),
            _ => Err(Error::Report(format!("parameter '{name}' is not a number"))),
        }
    }

    pub fn vector(&self, name: &str) -> Result<&[f64]> {
        match self.param(name)? {
            ParamValue::Vector(v) => Ok(v),
            _ => Err(Error::Report(format!("parameter '{name}' is not a list"))),
        }
    }

    pub fn text(&self, name: &str) -> Result<&str> {
        match self.param(name)? {
            ParamValue::Text(v) => Ok(v),
            _ => Err(Error::Report(format!("parameter '{name}' is not text"))),
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        to_json_pretty(self)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Report(e.to_string()))
    }

    /// Header is the input columns, then `observed`, `predicted`, and
    /// `variance`/`lower`/`upper` when any row carries them. Missing cells
    /// are left empty.
    pub fn to_csv_string(&self) -> String {
        let table = &self.predictions;
        let with_var = table.rows.iter().any(|r| r.variance.is_some());
        let with_band = table.rows.iter().any(|r| r.band.is_some());
        let mut out = String::new();
        let mut header: Vec<&str> = table.input_columns.iter().map(String::as_str).collect();
        header.extend(["observed", "predicted"]);
        if with_var {
            header.push("variance");
        }
        if with_band {
            header.extend(["lower", "upper"]);
        }
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &table.rows {
            let mut cells: Vec<String> = row.inputs.iter().map(|v| fmt17(*v)).collect();
            cells.push(row.observed.map(fmt17).unwrap_or_default());
            cells.push(fmt17(row.predicted));
            if with_var {
                cells.push(row.variance.map(fmt17).unwrap_or_default());
            }
            if with_band {
                let (lo, hi) = row.band.map(|(l, u)| (fmt17(l), fmt17(u))).unwrap_or_default();
                cells.extend([lo, hi]);
            }
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Pretty JSON with every float written to 17 significant digits.
pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision::default());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Report(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Report(e.to_string()))
}

/// 17 significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// `path` with its extension replaced by `csv`.
pub fn csv_sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("csv")
}

pub fn write_report(report: &FitReport, path: &Path) -> Result<()> {
    let json = report.to_json_string()?;
    let csv = report.to_csv_string();
    let sidecar = csv_sidecar_path(path);
    if sidecar == path {
        return Err(Error::InvalidInput(format!(
            "report path {} collides with its CSV sidecar",
            path.display()
        )));
    }
    write_atomic(path, json.as_bytes())?;
    write_atomic(&sidecar, csv.as_bytes())
}

pub fn read_report(path: &Path) -> Result<FitReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FitReport::from_json_str(&text)
}

#[derive(Default)]
struct FullPrecision(PrettyFormatter<'static>);

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> FitReport {
        let mut r = FitReport::new(ModelKind::GaussianProcess);
        r.set("v", 0.3852);
        r.set("w", vec![0.7839, 2.8869, 2.859e-9]);
        r.set("contaminant", "pb");
        r.note("ph", "assumed 7");
        r.predictions = PredictionTable::new(["t_norm", "ph", "w"]);
        r.predictions
            .push(PredictionRow::new(vec![0.5, 7.0, 3.0], 0.61).observed(0.6).variance(1e-6).band(0.6, 0.62))
            .unwrap();
        r.predictions
            .push(PredictionRow::new(vec![1.0, 7.0, 3.0], 0.72))
            .unwrap();
        r
    }

    #[test]
    fn json_round_trip_and_top_level_keys() {
        let r = sample();
        let json = r.to_json_string().unwrap();
        let back = FitReport::from_json_str(&json).unwrap();
        assert_eq!(back, r);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
        for k in ["model_kind", "parameters", "metrics", "predictions", "provenance"] {
            assert!(keys.iter().any(|x| *x == k), "missing {k}");
        }
        assert!(json.contains("3.8519999999999999e-1"), "{json}");
    }

    #[test]
    fn csv_has_header_plus_rows() {
        let csv = sample().to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "t_norm,ph,w,observed,predicted,variance,lower,upper");
        assert!(lines[2].ends_with(",,,"), "{}", lines[2]);
    }

    #[test]
    fn typed_getters() {
        let r = sample();
        assert_eq!(r.scalar("v").unwrap(), 0.3852);
        assert_eq!(r.vector("w").unwrap()[2], 2.859e-9);
        assert_eq!(r.text("contaminant").unwrap(), "pb");
        assert!(matches!(r.scalar("w"), Err(Error::Report(_))));
        assert!(r.scalar("nope").is_err());
    }

    #[test]
    fn row_width_checked() {
        let mut t = PredictionTable::new(["t"]);
        let row = PredictionRow::new(vec![1.0, 2.0], 0.0);
        assert!(t.push(row).is_err());
    }

    #[test]
    fn write_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fit.json");
        write_report(&sample(), &path).unwrap();
        assert_eq!(read_report(&path).unwrap(), sample());
        assert!(dir.path().join("fit.csv").exists());
        assert!(write_report(&sample(), &dir.path().join("fit.csv")).is_err());
    }

    proptest! {
        #[test]
        fn scalars_round_trip_bit_exact(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let mut r = FitReport::new(ModelKind::FirstOrder);
            r.set("x", v);
            r.set("xs", vec![v, -v]);
            let back = FitReport::from_json_str(&r.to_json_string().unwrap()).unwrap();
            prop_assert_eq!(back.scalar("x").unwrap().to_bits(), v.to_bits());
            prop_assert_eq!(back.vector("xs").unwrap()[1].to_bits(), (-v).to_bits());
        }
    }
}
