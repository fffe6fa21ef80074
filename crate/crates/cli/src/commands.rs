use std::io::Write as _;
use std::path::{Path, PathBuf};

use pab_core::dataset::{parse_series, series_to_csv, write_atomic, DatasetFile, UnknownColumns};
use pab_core::fixtures::fixture;
use pab_core::gp::{default_gp_descent, standard_normal_quantile};
use pab_core::report::{csv_sidecar_path, fmt17, to_json_pretty};
use pab_core::series::format_percent;
use pab_core::synthetic::default_schedule;
use pab_core::{
    fit_exp_model, fit_first_order, generate_synthetic, gp_fit, gp_nlml, gp_optimize_hyperparams,
    optimum_thickness_scan, read_report, write_report, DescentConfig, Error,
    ExpFitOptions, ExpModelParams, FitMetrics, FitReport, Generator, GpHyperParams, ModelKind,
    ObservationSeries, PredictionRow, PredictionTable, RegressionSet, SyntheticSpec,
};
use serde::Serialize;

use crate::args::*;
use crate::model::{keys, FittedModel};
use crate::CliError;

/// Directory searched for inputs that are not existing paths.
pub const FIXTURE_DIR_ENV: &str = "PAB_FIXTURE_DIR";

type CliResult<T> = std::result::Result<T, CliError>;

fn at(stage: &'static str) -> impl Fn(Error) -> CliError {
    move |error| CliError { stage, error }
}

fn provenance(report: &mut FitReport, command: &str, inputs: &[String]) {
    report.note("tool", concat!("pab ", env!("CARGO_PKG_VERSION")));
    report.note("command", command);
    report.note("inputs", inputs.join(";"));
}

/// Resolves a CLI input to a loaded series. Existing paths win, then
/// `$PAB_FIXTURE_DIR/<name>`, then the fixtures bundled with the library.
pub fn load_input(name: &str, data: &DataArgs) -> CliResult<ObservationSeries> {
    let bundled = fixture(name);
    let mut path = PathBuf::from(name);
    if !path.exists() {
        if let Some(dir) = std::env::var_os(FIXTURE_DIR_ENV) {
            let candidate = Path::new(&dir).join(name);
            if candidate.exists() {
                path = candidate;
            }
        }
    }
    let on_disk = path.exists();
    if !on_disk && bundled.is_none() {
        return Err(CliError {
            stage: "input",
            error: Error::Io {
                path,
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled fixture"),
            },
        });
    }
    let contaminant = data
        .contaminant
        .or(bundled.map(|f| f.contaminant))
        .ok_or_else(|| CliError {
            stage: "input",
            error: Error::InvalidInput(format!("--contaminant is required for '{name}'")),
        })?;
    let mut spec = DatasetFile::new(&path, contaminant);
    spec.c0 = data.c0;
    spec.default_thickness = data.thickness;
    if data.strict_columns {
        spec.unknown_columns = UnknownColumns::Error;
    }
    let loaded = match bundled {
        Some(f) if !on_disk => parse_series(f.csv.as_bytes(), &spec),
        _ => {
            let bytes = std::fs::read(&path).map_err(|e| CliError {
                stage: "input",
                error: Error::Io { path: path.clone(), source: e },
            })?;
            parse_series(bytes.as_slice(), &spec)
        }
    }
    .map_err(at("input"))?;
    for col in &loaded.ignored_columns {
        eprintln!("pab: warning: ignoring column '{col}' in {name}");
    }
    Ok(loaded.series)
}

fn load_all(names: &[String], data: &DataArgs) -> CliResult<Vec<ObservationSeries>> {
    names.iter().map(|n| load_input(n, data)).collect()
}

fn emit(report: &FitReport, out: &OutputArgs) -> CliResult<()> {
    match &out.output {
        Some(path) => write_report(report, path).map_err(at("output")),
        None => {
            let json = report.to_json_string().map_err(at("output"))?;
            print_stdout(&json)
        }
    }
}

fn print_stdout(text: &str) -> CliResult<()> {
    std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError {
        stage: "output",
        error: Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        },
    })
}

fn central_band(level: f64) -> CliResult<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(CliError {
            stage: "input",
            error: Error::InvalidInput(format!("--band must be in (0, 1), got {level}")),
        });
    }
    Ok(((1.0 - level) / 2.0, (1.0 + level) / 2.0))
}

pub fn fit_kinetics(args: &FitKineticsArgs) -> CliResult<FitReport> {
    let series = load_input(&args.input, &args.data)?;
    let fit = fit_first_order(&series).map_err(at("fit"))?;
    let t = series.times();
    let c = series.concentrations();
    let observed: Vec<f64> = c.iter().map(|v| v.ln()).collect();
    let fitted: Vec<f64> = t.iter().map(|ti| fit.k * ti + fit.ln_c0_fit).collect();

    let mut r = FitReport::new(ModelKind::FirstOrder);
    r.set(keys::CONTAMINANT, series.contaminant().as_str());
    r.set(keys::K, fit.k);
    r.set(keys::LN_C0_FIT, fit.ln_c0_fit);
    r.set("c0", series.c0());
    r.set("r2", fit.r2);
    r.set("n_points", fit.n_points as f64);
    r.set("final_removal", fit.final_removal);
    r.set("max_removal", fit.max_removal);
    r.metrics = Some(FitMetrics::compute(&observed, &fitted).map_err(at("fit"))?);
    r.predictions = PredictionTable::new(["t_min"]);
    for i in 0..t.len() {
        let row = PredictionRow::new(vec![t[i]], fitted[i].exp()).observed(c[i]);
        r.predictions.push(row).map_err(at("fit"))?;
    }
    provenance(&mut r, "fit-kinetics", std::slice::from_ref(&args.input));
    r.note("metrics_space", "ln concentration");
    r.note("predictions_unit", "mg/L");
    r.note("decay_rate", format!("|k| = {} 1/min (k is the signed slope)", fmt17(fit.k.abs())));
    r.note("final_removal_pct", format_percent(fit.final_removal));
    if fit.degenerate {
        r.note("warning", "constant ln c: R² is reported as 0");
    }
    emit(&r, &args.out)?;
    Ok(r)
}

fn distinct(values: &[f64]) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

pub fn fit_exp(args: &FitExpArgs) -> CliResult<FitReport> {
    let series = load_all(&args.inputs, &args.data)?;
    let set = RegressionSet::from_series(&series, pab_core::DEFAULT_PH).map_err(at("input"))?;
    let options = ExpFitOptions {
        x0: args.x0,
        exponent_form: args.exponent_form,
        descent: DescentConfig {
            max_iters: args.max_iters,
            ..ExpFitOptions::default().descent
        },
    };
    let params = fit_exp_model(&set.exp_data(), set.contaminant, &options).map_err(at("fit"))?;
    let predicted: Vec<f64> = (0..set.len())
        .map(|i| pab_core::exp_model_eval(&params, set.t_norm[i], set.w[i]))
        .collect();

    let mut r = FitReport::new(ModelKind::Exponential);
    r.set(keys::CONTAMINANT, set.contaminant.as_str());
    r.set(keys::A, params.a);
    r.set(keys::B, params.b);
    r.set(keys::EXPONENT_FORM, params.exponent_form.as_str());
    r.set(keys::T_LOG_MAX, set.denominator);
    r.set("sse", params.sse);
    r.metrics = Some(FitMetrics::compute(&set.y, &predicted).map_err(at("fit"))?);
    r.predictions = PredictionTable::new(["t_min", "t_norm", "w"]);
    for (i, &p) in predicted.iter().enumerate() {
        let row = PredictionRow::new(vec![set.t_raw[i], set.t_norm[i], set.w[i]], p).observed(set.y[i]);
        r.predictions.push(row).map_err(at("fit"))?;
    }
    provenance(&mut r, "fit-exp", &args.inputs);
    r.note("converged", params.converged.to_string());
    if params.has_negative_parameter() {
        r.note("warning", "negative model parameter");
    }
    if distinct(&set.w) < 2 {
        r.note("identifiability", "single thickness: a and b are only jointly determined");
    }
    emit(&r, &args.out)?;
    Ok(r)
}

pub fn fit_gp(args: &FitGpArgs) -> CliResult<FitReport> {
    let series = load_all(&args.inputs, &args.data)?;
    let set = RegressionSet::from_series(&series, args.ph).map_err(at("input"))?;
    let hp0 = args.hyper.clone().unwrap_or_else(|| GpHyperParams::published(set.contaminant));
    if hp0.dims() != set.contaminant.gp_dims() {
        return Err(CliError {
            stage: "input",
            error: Error::DimensionMismatch {
                what: "kernel weights",
                expected: set.contaminant.gp_dims(),
                found: hp0.dims(),
            },
        });
    }
    let band = args.band.map(central_band).transpose()?;
    let x = set.gp_inputs();
    let optimization = if args.optimize {
        let config = DescentConfig {
            max_iters: args.max_iters,
            ..default_gp_descent()
        };
        Some(gp_optimize_hyperparams(&x, &set.y, &hp0, args.objective, &config).map_err(at("optimize"))?)
    } else {
        None
    };
    let hp = optimization.as_ref().map_or(hp0, |o| o.hp.clone());
    let model = gp_fit(&hp, &x, &set.y).map_err(at("fit"))?;
    let pred = model.predict(&x).map_err(at("predict"))?;

    let mut r = FitReport::new(ModelKind::GaussianProcess);
    r.set(keys::CONTAMINANT, set.contaminant.as_str());
    r.set(keys::V, hp.v);
    r.set(keys::W, hp.w.clone());
    r.set(keys::EPSILON, hp.epsilon);
    r.set(keys::T_LOG_MAX, set.denominator);
    r.set(keys::TRAIN_T_NORM, set.t_norm.clone());
    r.set(keys::TRAIN_PH, set.ph.clone());
    r.set(keys::TRAIN_W, set.w.clone());
    r.set(keys::TRAIN_Y, set.y.clone());
    r.set("jitter_used", model.jitter_used());
    r.set("nlml", gp_nlml(&model));
    if let Some(o) = &optimization {
        r.set("objective", o.objective.as_str());
        r.set("objective_initial", o.initial_value);
        r.set("objective_final", o.value);
        r.set("iterations", o.iterations as f64);
    }
    r.metrics = Some(FitMetrics::compute(&set.y, &pred.mean).map_err(at("fit"))?);
    r.predictions = gp_table(&set);
    let quantiles = match band {
        Some((lo, hi)) => Some((pred.quantile(lo).map_err(at("predict"))?, pred.quantile(hi).map_err(at("predict"))?)),
        None => None,
    };
    for i in 0..set.len() {
        let mut inputs = vec![set.t_raw[i], set.t_norm[i]];
        if set.contaminant.uses_ph() {
            inputs.push(set.ph[i]);
        }
        inputs.push(set.w[i]);
        let mut row = PredictionRow::new(inputs, pred.mean[i])
            .observed(set.y[i])
            .variance(pred.variance[i]);
        if let Some((lo, hi)) = &quantiles {
            row = row.band(lo[i], hi[i]);
        }
        r.predictions.push(row).map_err(at("fit"))?;
    }
    provenance(&mut r, "fit-gp", &args.inputs);
    if set.contaminant.uses_ph() && set.ph_assumed {
        r.note("ph_assumed", format!("samples without pH use {}", args.ph));
    }
    if let Some(o) = &optimization {
        r.note("converged", o.converged.to_string());
    }
    if let Some(level) = args.band {
        r.note("band", format!("central {level} predictive interval"));
    }
    emit(&r, &args.out)?;
    Ok(r)
}

fn gp_table(set: &RegressionSet) -> PredictionTable {
    if set.contaminant.uses_ph() {
        PredictionTable::new(["t_min", "t_norm", "ph", "w"])
    } else {
        PredictionTable::new(["t_min", "t_norm", "w"])
    }
}

pub fn predict(args: &PredictArgs) -> CliResult<FitReport> {
    let source = read_report(&args.model).map_err(at("input"))?;
    let model = FittedModel::from_report(&source).map_err(at("input"))?;
    let band = args.band.map(central_band).transpose()?;
    let w_grid: Vec<f64> = if model.uses_thickness() {
        if args.w_grid.is_empty() {
            return Err(CliError {
                stage: "input",
                error: Error::InvalidInput("--w-grid is required for this model".into()),
            });
        }
        args.w_grid.clone()
    } else {
        vec![f64::NAN]
    };
    let queries: Vec<(f64, f64)> = args
        .t_grid
        .iter()
        .flat_map(|&t| w_grid.iter().map(move |&w| (t, w)))
        .collect();
    let points = model.predict(&queries, args.ph).map_err(at("predict"))?;

    let mut r = FitReport::new(source.model_kind);
    r.parameters = source.parameters.clone();
    let ph_column = matches!(&model, FittedModel::Gaussian { contaminant, .. } if contaminant.uses_ph());
    r.predictions = match (&model, ph_column) {
        (FittedModel::FirstOrder(_), _) => PredictionTable::new(["t_min"]),
        (_, true) => PredictionTable::new(["t_min", "t_norm", "ph", "w"]),
        (_, false) => PredictionTable::new(["t_min", "t_norm", "w"]),
    };
    let denominator = model.time_denominator();
    let z = match band {
        Some((lo, hi)) => Some((
            standard_normal_quantile(lo).map_err(at("predict"))?,
            standard_normal_quantile(hi).map_err(at("predict"))?,
        )),
        None => None,
    };
    for (&(t, w), p) in queries.iter().zip(&points) {
        let inputs = match denominator {
            None => vec![t],
            Some(d) if ph_column => vec![t, pab_core::series::normalize_time(t, d), args.ph, w],
            Some(d) => vec![t, pab_core::series::normalize_time(t, d), w],
        };
        let mut row = PredictionRow::new(inputs, p.mean);
        if let Some(v) = p.variance {
            row = row.variance(v);
            if let Some((zl, zh)) = z {
                row = row.band(p.mean + v.sqrt() * zl, p.mean + v.sqrt() * zh);
            }
        }
        r.predictions.push(row).map_err(at("predict"))?;
    }
    provenance(&mut r, "predict", &[args.model.display().to_string()]);
    if ph_column {
        r.note("ph", args.ph.to_string());
    }
    emit(&r, &args.out)?;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonEntry {
    pub source: String,
    pub model_kind: ModelKind,
    pub contaminant: Option<String>,
    pub r2: Option<f64>,
    pub rmse: Option<f64>,
    pub obs_pred_slope: Option<f64>,
    /// Thickness with the highest predicted removal at `t_fixed_min`.
    pub optimum_w: Option<f64>,
    pub removal_at_optimum: Option<f64>,
    pub removal_at_optimum_pct: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub t_fixed_min: f64,
    pub w_grid: Vec<f64>,
    pub ph: f64,
    pub entries: Vec<ComparisonEntry>,
}

impl Comparison {
    pub fn to_csv_string(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        let mut out = String::from("source,model_kind,contaminant,r2,rmse,obs_pred_slope,optimum_w,removal_at_optimum\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                e.source,
                e.model_kind.as_str(),
                e.contaminant.as_deref().unwrap_or(""),
                opt(e.r2),
                opt(e.rmse),
                opt(e.obs_pred_slope),
                opt(e.optimum_w),
                opt(e.removal_at_optimum)
            ));
        }
        out
    }
}

pub fn report(args: &ReportArgs) -> CliResult<Comparison> {
    let mut entries = Vec::new();
    for path in &args.inputs {
        let r = read_report(path).map_err(at("input"))?;
        let model = FittedModel::from_report(&r).map_err(at("input"))?;
        let scan = if model.uses_thickness() {
            let t = args.t_fixed;
            let ph = args.ph;
            Some(
                optimum_thickness_scan(&args.w_grid, |w| Ok(model.predict(&[(t, w)], ph)?[0].mean))
                    .map_err(at("report"))?,
            )
        } else {
            None
        };
        entries.push(ComparisonEntry {
            source: path.display().to_string(),
            model_kind: r.model_kind,
            contaminant: r.text(keys::CONTAMINANT).ok().map(str::to_owned),
            r2: r.metrics.map(|m| m.r2),
            rmse: r.metrics.map(|m| m.rmse),
            obs_pred_slope: r.metrics.and_then(|m| m.obs_pred_slope),
            optimum_w: scan.map(|s| s.w),
            removal_at_optimum: scan.map(|s| s.removal),
            removal_at_optimum_pct: scan.map(|s| format_percent(s.removal)),
        });
    }
    let comparison = Comparison {
        t_fixed_min: args.t_fixed,
        w_grid: args.w_grid.clone(),
        ph: args.ph,
        entries,
    };
    let json = to_json_pretty(&comparison).map_err(at("output"))?;
    match &args.out.output {
        Some(path) => {
            write_atomic(path, json.as_bytes()).map_err(at("output"))?;
            write_atomic(&csv_sidecar_path(path), comparison.to_csv_string().as_bytes()).map_err(at("output"))?;
        }
        None => print_stdout(&json)?,
    }
    Ok(comparison)
}

pub fn synth(args: &SynthArgs) -> CliResult<ObservationSeries> {
    let missing = |flag: &str| CliError {
        stage: "input",
        error: Error::InvalidSpec(format!("{flag} is required for this generator")),
    };
    let generator = match args.generator {
        GeneratorKind::FirstOrder => Generator::FirstOrder {
            k: args.k.ok_or_else(|| missing("--k"))?,
        },
        GeneratorKind::ExpModel => {
            let p = ExpModelParams::published(args.contaminant);
            Generator::ExpModel {
                a: args.a.unwrap_or(p.a),
                b: args.b.unwrap_or(p.b),
                form: args.exponent_form,
            }
        }
        GeneratorKind::GpDraw => Generator::GpDraw {
            hp: args.hyper.clone().unwrap_or_else(|| GpHyperParams::published(args.contaminant)),
            mean: args.mean,
        },
    };
    let spec = SyntheticSpec {
        generator,
        contaminant: args.contaminant,
        run_label: args.label.clone(),
        c0: args.c0,
        thickness_w: args.thickness,
        ph: args.ph,
        time_schedule: if args.schedule.is_empty() {
            default_schedule()
        } else {
            args.schedule.clone()
        },
        noise_sd: args.noise_sd,
        seed: args.seed,
    };
    let series = generate_synthetic(&spec).map_err(at("synth"))?;
    let csv = series_to_csv(&series);
    match &args.output {
        Some(path) => write_atomic(path, csv.as_bytes()).map_err(at("output"))?,
        None => print_stdout(&csv)?,
    }
    Ok(series)
}
