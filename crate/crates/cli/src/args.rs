use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pab_core::{Contaminant, ExponentForm, GpHyperParams, GpObjective};

#[derive(Debug, Parser)]
#[command(name = "pab", version, about = "Fit and compare removal models for permeable adsorptive barriers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pseudo-first-order fit of ln(c) against time for one run.
    FitKinetics(FitKineticsArgs),
    /// Fit the exponential removal model to one or more runs.
    FitExp(FitExpArgs),
    /// Gaussian process regression with fixed or optimized hyperparameters.
    FitGp(FitGpArgs),
    /// Evaluate a saved model on a time and thickness grid.
    Predict(PredictArgs),
    /// Merge fit reports into a comparison table with a thickness scan.
    Report(ReportArgs),
    /// Generate a synthetic run as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Contaminant of the input runs. Bundled fixtures carry their own.
    #[arg(long)]
    pub contaminant: Option<Contaminant>,
    /// Initial concentration in mg/L.
    #[arg(long, default_value_t = pab_core::dataset::DEFAULT_C0)]
    pub c0: f64,
    /// Thickness in cm for rows without a thickness_cm value.
    #[arg(long, default_value_t = pab_core::dataset::DEFAULT_THICKNESS_CM)]
    pub thickness: f64,
    /// Fail on unrecognised CSV columns instead of warning.
    #[arg(long)]
    pub strict_columns: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Report path. A CSV sidecar is written next to it. Prints JSON to
    /// stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitKineticsArgs {
    /// CSV path or bundled fixture name.
    #[arg(long)]
    pub input: String,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FitExpArgs {
    /// CSV paths or bundled fixture names; runs are pooled.
    #[arg(long = "input", required = true, num_args = 1..)]
    pub inputs: Vec<String>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = ExponentForm::Literal)]
    pub exponent_form: ExponentForm,
    /// Starting point `a,b`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "1,1")]
    pub x0: (f64, f64),
    #[arg(long, default_value_t = 50_000)]
    pub max_iters: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FitGpArgs {
    #[arg(long = "input", required = true, num_args = 1..)]
    pub inputs: Vec<String>,
    #[command(flatten)]
    pub data: DataArgs,
    /// `v=..,w=..,..[,eps=..]`. Defaults to the published values for the
    /// contaminant.
    #[arg(long)]
    pub hyper: Option<GpHyperParams>,
    /// Optimize the hyperparameters starting from `--hyper`.
    #[arg(long)]
    pub optimize: bool,
    #[arg(long, default_value = "nlml")]
    pub objective: GpObjective,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// pH for samples without one.
    #[arg(long, default_value_t = pab_core::DEFAULT_PH)]
    pub ph: f64,
    /// Central predictive band to report, e.g. 0.95.
    #[arg(long)]
    pub band: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// Report written by one of the fit commands.
    #[arg(long)]
    pub model: PathBuf,
    /// Times in minutes.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub t_grid: Vec<f64>,
    /// Thicknesses in cm. Required for models that depend on thickness.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub w_grid: Vec<f64>,
    #[arg(long, default_value_t = pab_core::DEFAULT_PH)]
    pub ph: f64,
    #[arg(long)]
    pub band: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Fit reports to merge.
    #[arg(long = "input", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Thickness grid for the optimum scan, in cm.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])]
    pub w_grid: Vec<f64>,
    /// Time at which removal is compared, in minutes.
    #[arg(long, default_value_t = 3600.0)]
    pub t_fixed: f64,
    #[arg(long, default_value_t = pab_core::DEFAULT_PH)]
    pub ph: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    FirstOrder,
    ExpModel,
    GpDraw,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub generator: GeneratorKind,
    /// Signed rate constant for `first-order`, 1/min.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Exponential model parameters; default to the published set.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = ExponentForm::Literal)]
    pub exponent_form: ExponentForm,
    /// GP hyperparameters for `gp-draw`; default to the published set.
    #[arg(long)]
    pub hyper: Option<GpHyperParams>,
    /// Constant removal added to the GP draw.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub mean: f64,
    #[arg(long, default_value_t = Contaminant::Pb)]
    pub contaminant: Contaminant,
    #[arg(long, default_value_t = pab_core::dataset::DEFAULT_C0)]
    pub c0: f64,
    #[arg(long, default_value_t = pab_core::dataset::DEFAULT_THICKNESS_CM)]
    pub thickness: f64,
    #[arg(long)]
    pub ph: Option<f64>,
    /// Sampling times in minutes; defaults to 10-min then hourly samples.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub schedule: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "synthetic")]
    pub label: String,
    /// CSV path; prints to stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(format!("'{s}' is not a pair of numbers")),
        },
        _ => Err(format!("expected 'a,b', got '{s}'")),
    }
}
