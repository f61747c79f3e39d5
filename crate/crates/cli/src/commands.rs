use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use infoproc_core::cluster::{complete_linkage, export_dendrogram, ExportFormat};
use infoproc_core::eca::rule_table;
use infoproc_core::features::{feature_matrix, summary_vector, EnumerationMode, SummaryTriple};
use infoproc_core::lambda::{lambda_predictive_power, lambda_table_csv};
use infoproc_core::predict::{
    load_class_table, nonlocality_from_curve, prediction_report, BaselineConfig, ClassTable, FeaturePool,
    PowerPoint, SearchMode, Symbolization,
};
use infoproc_core::stationary::{attractor_ensemble, stationary_features, transient_csv, transient_features};
use infoproc_series::panel::load_panel;
use infoproc_series::pipeline::{trajectory, OutputUnit, PipelineConfig};
use infoproc_series::synth::{synth_regime, Regime, SynthParams};

use crate::args::*;
use crate::error::CliError;
use crate::output::RunOutput;

fn mode(m: ModeArg) -> EnumerationMode {
    match m {
        ModeArg::PerStep => EnumerationMode::PerStep,
        ModeArg::Cumulative => EnumerationMode::Cumulative,
    }
}

pub fn eca_features(a: &EcaFeaturesArgs) -> Result<RunOutput, CliError> {
    let m = feature_matrix(a.t, mode(a.mode))?;
    Ok(RunOutput::file(&a.output, m.to_csv()))
}

pub fn predict(a: &PredictArgs) -> Result<RunOutput, CliError> {
    if a.t_max == 0 || a.n_max == 0 {
        return Err(CliError::Usage("--t-max and --n-max must be at least 1".into()));
    }
    if a.permutations > 0 && a.permutations < 100 {
        return Err(CliError::Usage("--permutations must be 0 or at least 100".into()));
    }
    let (classes, source, inputs) = match &a.classes {
        Some(p) => (load_class_table(p)?, p.display().to_string(), vec![p.clone()]),
        None => (ClassTable::bundled(), "bundled".to_string(), Vec::new()),
    };
    let symbolization = Symbolization::new(a.precision)?;
    let search = match a.search {
        SearchArg::Auto => SearchMode::Auto,
        SearchArg::Exhaustive => SearchMode::Exhaustive,
        SearchArg::Beam => SearchMode::Beam { width: a.beam_width },
    };
    let baseline = (a.permutations > 0).then_some(BaselineConfig {
        permutations: a.permutations,
        seed: a.seed,
        reselect: a.reselect,
    });
    let mut reports = Vec::new();
    let mut curve = Vec::new();
    for t in 1..=a.t_max {
        let pool = FeaturePool::new(t, mode(a.mode), symbolization)?;
        let report = prediction_report(&pool, &classes, a.n_max, search, baseline)?;
        curve.push(PowerPoint {
            t,
            power: report.full_power,
        });
        reports.push(report);
    }
    let nonlocality = if a.t_max >= 2 {
        Some(nonlocality_from_curve(curve)?)
    } else {
        None
    };
    let doc = json!({
        "classes": source,
        "class_counts": classes.counts(),
        "class_entropy_bits": classes.entropy_bits(),
        "precision": symbolization.precision(),
        "lambda_power": lambda_predictive_power(&classes)?,
        "reports": reports,
        "nonlocality": nonlocality,
    });
    let mut out = RunOutput::file(&a.output, serde_json::to_string_pretty(&doc)? + "\n");
    out.inputs = inputs;
    if baseline.is_some() {
        out.seeds.insert("permutation".into(), a.seed);
    }
    Ok(out)
}

pub fn cluster(a: &ClusterArgs) -> Result<RunOutput, CliError> {
    if a.t == 0 {
        return Err(CliError::Usage("-t must be at least 1".into()));
    }
    let items: Vec<(u8, Vec<f64>)> = match (a.source, a.vector) {
        (SourceArg::Iid, VectorArg::Summary) => (0..=255u8)
            .into_par_iter()
            .map(|r| summary_vector(r, a.t).map(|v| (r, v)))
            .collect::<Result<_, _>>()?,
        (SourceArg::Iid, VectorArg::Full) => {
            let m = feature_matrix(a.t, EnumerationMode::PerStep)?;
            (0..=255u8).map(|r| (r, m.row(r).to_vec())).collect()
        }
        (SourceArg::Stationary, vector) => (0..=255u8)
            .into_par_iter()
            .map(|r| {
                let e = attractor_ensemble(&rule_table(r.into())?, a.n)?;
                let f = stationary_features(&e)?;
                let v = match vector {
                    VectorArg::Summary => SummaryTriple::from_one_step(&f)?.to_vec(),
                    VectorArg::Full => f.values(),
                };
                Ok((r, v))
            })
            .collect::<Result<_, infoproc_core::Error>>()?,
    };
    let d = complete_linkage(items)?;
    let format = match a.format {
        FormatArg::Json => ExportFormat::Json,
        FormatArg::Newick => ExportFormat::Newick,
    };
    let mut text = export_dendrogram(&d, format)?;
    text.push('\n');
    Ok(RunOutput::file(&a.output, text))
}

pub fn lambda(a: &LambdaArgs) -> Result<RunOutput, CliError> {
    Ok(RunOutput::file(&a.output, lambda_table_csv()?))
}

pub fn transient(a: &TransientArgs) -> Result<RunOutput, CliError> {
    let rule = rule_table(a.rule)?;
    let steps = transient_features(&rule, a.n, a.t_max, a.samples, a.seed)?;
    let mut out = RunOutput::file(&a.output, transient_csv(&steps));
    out.seeds.insert("sampling".into(), a.seed);
    Ok(out)
}

/// `base` with `.w<window>` inserted before the extension.
fn windowed(base: &Path, window: usize, ext: Option<&str>) -> PathBuf {
    let stem = base.file_stem().unwrap_or_default().to_string_lossy();
    let ext = ext
        .map(str::to_string)
        .or_else(|| base.extension().map(|e| e.to_string_lossy().into_owned()));
    let name = match ext {
        Some(e) => format!("{stem}.w{window}.{e}"),
        None => format!("{stem}.w{window}"),
    };
    base.with_file_name(name)
}

pub fn ts(a: &TsArgs) -> Result<RunOutput, CliError> {
    if a.window.is_empty() {
        return Err(CliError::Usage("at least one window is required".into()));
    }
    let order = (!a.chain.is_empty()).then_some(a.chain.as_slice());
    let (panel, report) = load_panel(&a.input, order)?;
    if !report.forward_filled.is_empty() || report.leading_rows_dropped > 0 {
        log::info!(
            "{}: {} cells forward-filled, {} leading rows dropped",
            a.input.display(),
            report.forward_filled.len(),
            report.leading_rows_dropped
        );
    }
    let sigma = if a.no_detrend { None } else { a.sigma };
    let mut out = RunOutput {
        inputs: vec![a.input.clone()],
        ..RunOutput::default()
    };
    out.seeds.insert("jitter".into(), a.seed);
    let mut kappas = serde_json::Map::new();
    for &w in &a.window {
        let cfg = PipelineConfig {
            window: w,
            sigma,
            delay: a.delay,
            k: a.k,
            stride: a.stride,
            jitter_seed: a.seed,
            unit: match a.unit {
                UnitArg::Nats => OutputUnit::Nats,
                UnitArg::Bits => OutputUnit::Bits,
            },
            ..PipelineConfig::default()
        };
        let t = trajectory(&panel, &cfg)?;
        kappas.insert(w.to_string(), json!(t.kappa));
        let csv_path = if a.window.len() == 1 {
            a.output.clone()
        } else {
            windowed(&a.output, w, None)
        };
        if a.json {
            let doc = json!({
                "config": cfg,
                "variables": panel.names(),
                "load_report": report,
                "kappa": t.kappa,
                "points": t.points,
            });
            let json_path = if a.window.len() == 1 {
                a.output.with_extension("json")
            } else {
                windowed(&a.output, w, Some("json"))
            };
            out.files.push((
                json_path,
                (serde_json::to_string_pretty(&doc)? + "\n").into_bytes(),
            ));
        }
        out.files.push((csv_path, t.to_csv().into_bytes()));
    }
    out.notes = json!({ "kappa": kappas, "load_report": report });
    Ok(out)
}

pub fn synth(a: &SynthArgs) -> Result<RunOutput, CliError> {
    let params = SynthParams {
        variables: a.variables,
        length: a.length,
        split: a.split,
        pre: Regime {
            ar: a.pre_ar,
            coupling: a.pre_coupling,
        },
        post: Regime {
            ar: a.post_ar,
            coupling: a.post_coupling,
        },
        ..SynthParams::default()
    };
    let panel = synth_regime(a.seed, &params)?;
    let mut out = RunOutput::file(&a.output, panel.to_csv());
    out.seeds.insert("noise".into(), a.seed);
    out.notes = json!({ "params": params });
    Ok(out)
}
