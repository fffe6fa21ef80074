use pab_core::report::csv_sidecar_path;
use pab_core::{
    fit_exp_model, generate_synthetic, gp_fit, optimum_thickness_scan, read_report, write_report,
    Contaminant, ExpFitOptions, ExpModelParams, ExponentForm, FitReport, Generator, GpHyperParams,
    ModelKind, ObservationSeries, PredictionRow, PredictionTable, RegressionSet, SyntheticSpec, DEFAULT_PH,
};

fn exp_runs(truth: &ExpModelParams, widths: &[f64]) -> Vec<ObservationSeries> {
    widths
        .iter()
        .map(|&w| {
            let mut spec = SyntheticSpec::new(Generator::ExpModel {
                a: truth.a,
                b: truth.b,
                form: ExponentForm::Literal,
            });
            spec.contaminant = truth.contaminant;
            spec.thickness_w = w;
            generate_synthetic(&spec).unwrap()
        })
        .collect()
}

#[test]
fn synthetic_lead_runs_refit_to_generating_parameters() {
    let truth = ExpModelParams::lead();
    let set = RegressionSet::from_series(&exp_runs(&truth, &[0.5, 1.0, 2.0]), DEFAULT_PH).unwrap();
    let options = ExpFitOptions {
        x0: (truth.a + 0.4, truth.b - 0.3),
        ..ExpFitOptions::default()
    };
    let fit = fit_exp_model(&set.exp_data(), Contaminant::Pb, &options).unwrap();
    assert!((fit.a - truth.a).abs() < 1e-3 && (fit.b - truth.b).abs() < 1e-3, "{fit:?}");
    assert!(fit.sse < 1e-12);
}

#[test]
fn gp_scan_recovers_the_planted_optimum() {
    // Removal peaks at W = 0.5 and falls off either side.
    let widths = [0.0, 0.5, 1.0, 1.5];
    let peak = |w: f64| 0.9 - 0.3 * (w - 0.5f64).abs();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for &w in &widths {
        for i in 1..=10 {
            let t = i as f64 / 10.0;
            x.push(vec![t, w]);
            y.push(peak(w) * t);
        }
    }
    let model = gp_fit(&GpHyperParams::methylene_blue(), &x, &y).unwrap();
    let best = optimum_thickness_scan(&widths, |w| Ok(model.predict(&[vec![1.0, w]])?.mean[0])).unwrap();
    assert_eq!(best.w, 0.5);
    assert!((best.removal - 0.9).abs() < 1e-3);
}

#[test]
fn lead_gp_report_round_trips_with_published_block() {
    let hp = GpHyperParams::lead();
    let mut r = FitReport::new(ModelKind::GaussianProcess);
    r.set("v", hp.v);
    r.set("w", hp.w.clone());
    r.set("epsilon", hp.epsilon);
    r.predictions = PredictionTable::new(["t_norm", "ph", "w"]);
    for t in [0.5, 1.0] {
        r.predictions.push(PredictionRow::new(vec![t, 7.0, 3.0], t * 0.8).observed(t * 0.8)).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gp.json");
    write_report(&r, &path).unwrap();

    let back = read_report(&path).unwrap();
    assert_eq!(back.scalar("v").unwrap(), 0.3852);
    assert_eq!(back.vector("w").unwrap(), &[0.7839, 2.8869, 2.859e-9]);
    assert_eq!(back, r);

    let csv = std::fs::read_to_string(csv_sidecar_path(&path)).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn synthetic_generation_is_reproducible_across_calls() {
    let mut spec = SyntheticSpec::new(Generator::GpDraw {
        hp: GpHyperParams::lead(),
        mean: 0.4,
    });
    spec.seed = 99;
    spec.noise_sd = 0.02;
    spec.ph = Some(6.5);
    let a = pab_core::dataset::series_to_csv(&generate_synthetic(&spec).unwrap());
    let b = pab_core::dataset::series_to_csv(&generate_synthetic(&spec).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with("time_min,removal_pct,thickness_cm,ph\n"), "{a}");
}
