//! Removal modelling for permeable adsorptive barriers.
//!
//! Three model families are fitted to breakthrough time series:
//! pseudo-first-order kinetics ([`kinetics`]), a closed-form exponential
//! removal law in time and barrier thickness ([`exponential`]), and Gaussian
//! process regression with an ARD squared-exponential kernel ([`gp`]).

// `!(x > 0.0)` is used on purpose so NaN fails validation; index loops
// mirror the textbook form of the dense factorizations.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dataset;
pub mod error;
pub mod exponential;
pub mod fixtures;
pub mod gp;
pub mod inputs;
pub mod kinetics;
pub mod linalg;
pub mod metrics;
pub mod optimize;
pub mod report;
pub mod rng;
pub mod scan;
pub mod series;
pub mod synthetic;

pub use dataset::{load_series, parse_series, write_series, DatasetFile, LoadedSeries, UnknownColumns};
pub use error::{Error, ErrorKind, Result};
pub use exponential::{
    exp_model_eval, exp_model_grid, fit_exp_model, ExpDatum, ExpFitOptions, ExpModelParams,
    ExponentForm,
};
pub use gp::{
    gp_fit, gp_nlml, gp_optimize_hyperparams, gp_predict, gp_prior_draw, kernel, GpHyperParams,
    GpModel, GpObjective, GpOptimization, GpPrediction,
};
pub use inputs::{RegressionSet, DEFAULT_PH};
pub use kinetics::{fit_first_order, predict_first_order, KineticFitResult};
pub use linalg::{cholesky, solve, CholeskyFactor, SymMatrix};
pub use metrics::FitMetrics;
pub use optimize::{gradient_descent, DescentConfig, DescentResult};
pub use report::{read_report, write_report, FitReport, ModelKind, ParamValue, PredictionRow, PredictionTable};
pub use scan::{optimum_thickness_scan, ThicknessOptimum};
pub use series::{Contaminant, ObservationSeries, RemovalPoint, Sample, TransformedInputs};
pub use synthetic::{generate_synthetic, Generator, SyntheticSpec};
