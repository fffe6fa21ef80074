//! Workloads shared by the benchmarks in `benches/`.

use pab_core::fixtures::FIXTURES;
use pab_core::{Contaminant, ObservationSeries, RegressionSet, SymMatrix, DEFAULT_PH};

/// All four bundled lead runs pooled into one regression set (260 rows).
pub fn pooled_lead() -> RegressionSet {
    let runs: Vec<ObservationSeries> = FIXTURES
        .iter()
        .filter(|f| f.contaminant == Contaminant::Pb)
        .map(|f| f.load().expect("bundled fixture loads"))
        .collect();
    RegressionSet::from_series(&runs, DEFAULT_PH).expect("fixtures pool")
}

pub fn methylene_blue() -> RegressionSet {
    let f = pab_core::fixtures::fixture("mb_w1").expect("bundled fixture");
    RegressionSet::from_series(&[f.load().expect("bundled fixture loads")], DEFAULT_PH).expect("fixture pools")
}

/// Squared-exponential Gram matrix on `n` evenly spaced points, plus `ridge`
/// on the diagonal.
pub fn gram(n: usize, ridge: f64) -> SymMatrix {
    SymMatrix::from_fn(n, |i, j| {
        let d = (i as f64 - j as f64) / n as f64;
        (-10.0 * d * d).exp() + if i == j { ridge } else { 0.0 }
    })
}
