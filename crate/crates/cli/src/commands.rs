use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use singtrace::asymptotics::{GridSpec, MeanProfile};
use singtrace::estimators::{
    cesaro_trace, dixmier_value_range, heat_samples, heat_trace, lidskii_trace, measurability_details, p_power_trace,
    tail_cut_profile, zeta_residue_trace, zeta_samples, CesaroConfig, HeatConfig, LidskiiConfig, Method, TraceReport,
    Weights, ZetaConfig,
};
use singtrace::models::{
    gallery, lesch_pairing, make_model, spectral_flow_crossings, spectral_flow_integral, toeplitz_dixmier_index,
    toeplitz_truncated_index, write_values_file, DenseMatrix, HermitianPath, Model, ToeplitzProblem,
};
use singtrace::props::{partition_flow_refining, properties, run_suite};

use crate::config::{thread_count, Cli, Command, MeasurableArgs, MethodSel, RangeArgs, RunConfig, SpecflowArgs, ToeplitzArgs, TraceArgs};
use crate::output::{emit, series_csv, to_json};
use crate::{defaults, CliError};

/// Top-level JSON document shared by every subcommand.
#[derive(Serialize)]
struct Document<'a> {
    schema_version: u32,
    config: &'a RunConfig,
    reports: Vec<Value>,
    /// Pairwise `|a - b|` between route values (`trace` only).
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_route_deltas: Option<Vec<Value>>,
    provenance: Value,
}

impl<'a> Document<'a> {
    fn new(config: &'a RunConfig, reports: Vec<Value>, provenance: Value) -> Self {
        Self {
            schema_version: defaults::SCHEMA_VERSION,
            config,
            reports,
            cross_route_deltas: None,
            provenance,
        }
    }

    fn write(&self) -> Result<(), CliError> {
        emit(self.config.out.as_deref(), &to_json(self)?)
    }
}

fn write_document(cfg: &RunConfig, reports: Vec<Value>, provenance: Value) -> Result<(), CliError> {
    Document::new(cfg, reports, provenance).write()
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(format!("serializing the report: {e}")))
}

fn model_provenance(m: &Model) -> Value {
    json!({ "model": m.spec, "target": m.target })
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let threads = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Internal(format!("starting the thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Trace(a) => trace(a),
        Command::Measurable(a) => measurable(a),
        Command::Range(a) => range(a),
        Command::Toeplitz(a) => toeplitz(a),
        Command::Specflow(a) => specflow(a),
        Command::Props(a) => props(&a.only, a.out.out),
        Command::Gallery(a) => gallery_cmd(a),
        Command::Export(a) => {
            let m = make_model(&a.model)?;
            write_values_file(&a.out, &m.seq, a.n_max)?;
            Ok(())
        }
    })
}

fn selected(method: MethodSel) -> Vec<Method> {
    match method {
        MethodSel::Cesaro => vec![Method::Cesaro],
        MethodSel::Zeta => vec![Method::Zeta],
        MethodSel::Heat => vec![Method::Heat],
        MethodSel::Lidskii => vec![Method::Lidskii],
        MethodSel::All => vec![Method::Cesaro, Method::Zeta, Method::Heat, Method::Lidskii],
    }
}

fn series_path(a: &TraceArgs) -> Result<Option<PathBuf>, CliError> {
    if !a.emit_series {
        if a.series.is_some() {
            return Err(CliError::Config("--series needs --emit-series".into()));
        }
        return Ok(None);
    }
    match (&a.series, &a.out.out) {
        (Some(p), _) => Ok(Some(p.clone())),
        (None, Some(out)) => Ok(Some(out.with_extension("csv"))),
        (None, None) => Err(CliError::Config("--emit-series needs --series or --out".into())),
    }
}

fn trace(a: TraceArgs) -> Result<(), CliError> {
    if !(a.p >= 1.0 && a.p.is_finite()) {
        return Err(CliError::Config(format!("--p must be >= 1, got {}", a.p)));
    }
    if a.n_max == 0 {
        return Err(CliError::Config("--nmax must be positive".into()));
    }
    let p = a.p;
    let methods = selected(a.method);
    if p != 1.0 {
        if let Some(m) = methods.iter().find(|m| matches!(m, Method::Cesaro | Method::Lidskii)) {
            if a.method != MethodSel::All {
                return Err(CliError::Config(format!("method {} needs p = 1", m.name())));
            }
        }
    }
    let methods: Vec<Method> = methods
        .into_iter()
        .filter(|m| p == 1.0 || matches!(m, Method::Zeta | Method::Heat))
        .collect();
    let grid = a.grid.resolve()?.unwrap_or_else(|| GridSpec::geometric(defaults::T_MAX));
    let series = series_path(&a)?;
    let model = make_model(&a.model)?;
    let cesaro_cfg = CesaroConfig {
        grid,
        tol: a.grid.tol,
        ..CesaroConfig::default()
    };
    let lidskii_cfg = LidskiiConfig {
        tol: a.grid.tol,
        ..LidskiiConfig::default()
    };
    let cfg = RunConfig {
        command: "trace",
        model: Some(a.model.clone()),
        method: Some(a.method),
        p: Some(p),
        t_max: (grid.kind == singtrace::asymptotics::GridKind::Geometric).then(|| a.grid.t_max.unwrap_or(defaults::T_MAX)),
        n_max: methods.contains(&Method::Lidskii).then_some(a.n_max),
        grid: Some(grid),
        tol: Some(a.grid.tol),
        out: a.out.out.clone(),
        series: series.clone(),
        emit_series: a.emit_series,
        extra: Default::default(),
    };

    let one = |m: Method| -> singtrace::Result<TraceReport> {
        match m {
            Method::Cesaro => cesaro_trace(&model.seq, &cesaro_cfg),
            Method::Zeta if p == 1.0 => zeta_residue_trace(&model.seq, None, &ZetaConfig::default()),
            Method::Zeta | Method::PPower => p_power_trace(&model.seq, p, &ZetaConfig::default()),
            Method::Heat => heat_trace(&model.seq, p, None, &HeatConfig::default()),
            Method::Lidskii => lidskii_trace(&model.eig_list(a.n_max)?, &lidskii_cfg),
        }
    };
    // Independent routes run in parallel; collection keeps the method order.
    let results: Vec<singtrace::Result<TraceReport>> = methods.par_iter().map(|&m| one(m)).collect();
    let reports = results.into_iter().collect::<singtrace::Result<Vec<_>>>()?;

    let mut deltas = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let d = (reports[i].value.as_complex() - reports[j].value.as_complex()).norm();
            deltas.push(json!({ "a": reports[i].method, "b": reports[j].method, "delta": d }));
        }
    }
    let values = reports.iter().map(to_value).collect::<Result<Vec<_>, _>>()?;

    if let Some(path) = &series {
        let profile = MeanProfile::cesaro(&model.seq, &grid)?;
        let cut = tail_cut_profile(&model.seq, &grid).ok();
        let heat = heat_samples(&model.seq, p, &Weights::unit(), &HeatConfig::default()).ok();
        let zeta = zeta_samples(&model.seq, &Weights::unit(), p, &ZetaConfig::default()).ok();
        emit(Some(path), &series_csv(&profile, cut.as_ref(), heat.as_ref(), zeta.as_ref()))?;
    }
    let mut doc = Document::new(&cfg, values, model_provenance(&model));
    doc.cross_route_deltas = Some(deltas);
    doc.write()
}

fn measurable(a: MeasurableArgs) -> Result<(), CliError> {
    let explicit = a.grid.resolve()?;
    let model = make_model(&a.model)?;
    let mut cesaro_cfg = match explicit {
        Some(grid) => CesaroConfig {
            grid,
            ..CesaroConfig::default()
        },
        None => CesaroConfig::for_measurability(&model.seq),
    };
    cesaro_cfg.tol = a.grid.tol;
    let report = cesaro_trace(&model.seq, &cesaro_cfg)?;
    let profile = MeanProfile::cesaro(&model.seq, &cesaro_cfg.grid)?;
    let details = measurability_details(&profile, cesaro_cfg.tol)?;
    let cfg = RunConfig {
        command: "measurable",
        model: Some(a.model),
        grid: Some(cesaro_cfg.grid),
        tol: Some(cesaro_cfg.tol),
        out: a.out.out,
        ..RunConfig::default()
    };
    let summary = json!({
        "measurable": report.measurable,
        "interval": [report.interval.0, report.interval.1],
        "value": report.value,
        "details": to_value(&details)?,
    });
    write_document(&cfg, vec![summary, to_value(&report)?], model_provenance(&model))
}

fn range(a: RangeArgs) -> Result<(), CliError> {
    if a.n_max < 64 {
        return Err(CliError::Config(format!("--nmax must be at least 64, got {}", a.n_max)));
    }
    let model = make_model(&a.model)?;
    let r = dixmier_value_range(&model.seq, a.n_max as usize)?;
    let cfg = RunConfig {
        command: "range",
        model: Some(a.model),
        n_max: Some(a.n_max),
        out: a.out.out,
        ..RunConfig::default()
    };
    let report = json!({
        "lower": r.lower,
        "upper": r.upper,
        "n_max": r.n_max,
        "burn_in": r.burn_in,
        "windows": r.envelope.windows,
    });
    write_document(&cfg, vec![report], model_provenance(&model))
}

fn toeplitz(a: ToeplitzArgs) -> Result<(), CliError> {
    let prob = ToeplitzProblem::new(a.w, a.n);
    let truncated = toeplitz_truncated_index(&prob)?;
    let dixmier = toeplitz_dixmier_index(a.w, a.r, &CesaroConfig::default())?;
    let lesch = lesch_pairing(prob.xi);
    let mut cfg = RunConfig {
        command: "toeplitz",
        out: a.out.out,
        ..RunConfig::default()
    };
    cfg.extra.insert("w", json!(a.w));
    cfg.extra.insert("R", json!(a.r));
    cfg.extra.insert("N", json!(a.n));
    let summary = json!({
        "truncated": truncated,
        "dixmier": dixmier.value.re(),
        "lesch": lesch,
        "expected": -a.w,
    });
    let provenance = json!({ "expected": { "value": -a.w, "provenance": "exact" } });
    write_document(&cfg, vec![summary, to_value(&dixmier)?], provenance)
}

/// Path file for `specflow`: Hermitian nodes as rows of `[re, im]` pairs.
#[derive(Debug, Deserialize)]
struct PathFile {
    nodes: Vec<Vec<Vec<Complex64>>>,
    times: Option<Vec<f64>>,
}

fn read_path(path: &Path) -> Result<HermitianPath, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| singtrace::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: PathFile = serde_json::from_str(&text).map_err(|source| singtrace::Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let nodes = file
        .nodes
        .iter()
        .map(|rows| DenseMatrix::from_rows(rows)?.into_hermitian())
        .collect::<singtrace::Result<Vec<_>>>()?;
    Ok(match file.times {
        Some(t) => HermitianPath::with_times(nodes, t)?,
        None => HermitianPath::new(nodes)?,
    })
}

fn specflow(a: SpecflowArgs) -> Result<(), CliError> {
    if a.steps == 0 || a.partition == 0 {
        return Err(CliError::Config("--steps and --partition must be positive".into()));
    }
    let path = read_path(&a.path)?;
    let segments = path.nodes().len() - 1;
    let crossings = spectral_flow_crossings(&path, a.steps)?;
    let partition = partition_flow_refining(&path, a.partition * segments)?;
    // The integral formula applies to conjugation-type paths only.
    let integral = match spectral_flow_integral(&path, a.n, a.quad) {
        Ok(v) => json!({ "value": v, "applies": true }),
        Err(singtrace::Error::Validation(msg)) => json!({ "value": null, "applies": false, "reason": msg }),
        Err(e) => return Err(e.into()),
    };
    let mut cfg = RunConfig {
        command: "specflow",
        out: a.out.out,
        ..RunConfig::default()
    };
    cfg.extra.insert("path", json!(a.path));
    cfg.extra.insert("steps", json!(a.steps));
    cfg.extra.insert("partition", json!(a.partition));
    cfg.extra.insert("n", json!(a.n));
    cfg.extra.insert("quad", json!(a.quad));
    let summary = json!({
        "crossings": crossings,
        "partition": partition,
        "integral": integral,
        "agree": crossings == partition,
    });
    write_document(&cfg, vec![summary], Value::Null)
}

fn props(only: &[String], out: Option<PathBuf>) -> Result<(), CliError> {
    let known: Vec<&str> = properties().iter().map(|p| p.name).collect();
    if let Some(bad) = only.iter().find(|n| !known.contains(&n.as_str())) {
        return Err(CliError::Config(format!("unknown property {bad:?}; known: {}", known.join(", "))));
    }
    let names: Vec<&str> = only.iter().map(String::as_str).collect();
    let results = run_suite((!names.is_empty()).then_some(&names[..]));
    let failed = results.iter().filter(|r| !r.passed).count();
    let mut cfg = RunConfig {
        command: "props",
        out,
        ..RunConfig::default()
    };
    if !names.is_empty() {
        cfg.extra.insert("only", json!(names));
    }
    let reports = results.iter().map(to_value).collect::<Result<Vec<_>, _>>()?;
    write_document(&cfg, reports, Value::Null)?;
    if failed > 0 {
        return Err(CliError::PropsFailed(failed));
    }
    Ok(())
}

fn gallery_cmd(a: crate::config::OutArgs) -> Result<(), CliError> {
    let cfg = RunConfig {
        command: "gallery",
        out: a.out,
        ..RunConfig::default()
    };
    let entries = gallery().iter().map(to_value).collect::<Result<Vec<_>, _>>()?;
    let provenance = json!({
        "exact": "forced by a closed form",
        "oracle": "computed by an independent numerical oracle",
        "literature": "a published residue or trace formula",
    });
    write_document(&cfg, entries, provenance)
}
