//! Per-method analysis: cache, graph, model, solve, plan.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use ccreduce_core::extraction::{build_cache, RefactoringCache};
use ccreduce_core::frontend::{list_methods, parse, CompilationUnit, MethodDecl, SourceFile};
use ccreduce_core::graph::{build_graph, ConflictGraph};
use ccreduce_core::ilp::build_model;
use ccreduce_core::metrics::annotate_method;
use ccreduce_core::oracle::{solve_exhaustive, DEFAULT_MAX_NODES};
use ccreduce_core::refactor::{make_plan, ExtractionPlan, MethodId};
use ccreduce_core::solver::{self, evaluate, SolveResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

#[derive(Debug, Clone)]
pub struct Settings {
    pub tau: u32,
    pub time_limit: Duration,
    pub use_oracle: bool,
    pub jobs: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { tau: 15, time_limit: Duration::from_secs(300), use_oracle: false, jobs: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowStatus {
    Compliant,
    Optimal,
    Feasible,
    Infeasible,
    Unknown,
    Error,
}

impl From<solver::Status> for RowStatus {
    fn from(s: solver::Status) -> Self {
        match s {
            solver::Status::Optimal => RowStatus::Optimal,
            solver::Status::Feasible => RowStatus::Feasible,
            solver::Status::Infeasible => RowStatus::Infeasible,
            solver::Status::Unknown => RowStatus::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub file: PathBuf,
    pub class: String,
    pub method: String,
    pub ordinal: usize,
    pub status: RowStatus,
    #[serde(rename = "initialCC")]
    pub initial_cc: Option<u32>,
    #[serde(rename = "finalCC")]
    pub final_cc: Option<i64>,
    pub extractions: usize,
    pub ccr: Option<Spread>,
    pub loc: Option<Spread>,
    pub params: Option<Spread>,
    pub model_vars: usize,
    pub model_constraints: usize,
    pub solve_seconds: f64,
    pub cache_seconds: f64,
    pub error: Option<String>,
}

/// Min / mean / max / total of one metric over a method's extractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub min: f64,
    pub avg: f64,
    pub max: f64,
    pub total: f64,
}

impl Spread {
    fn of(values: &[f64]) -> Option<Spread> {
        if values.is_empty() {
            return None;
        }
        let total: f64 = values.iter().sum();
        Some(Spread {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            avg: total / values.len() as f64,
            total,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedExtraction {
    pub start: usize,
    pub end: usize,
    pub ccr: u32,
    pub nmcc: u32,
    pub params: usize,
    pub name: String,
}

/// JSON plan artifact written per non-compliant method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub class: String,
    pub method: String,
    pub status: RowStatus,
    pub objective: Option<usize>,
    pub selected: Vec<SelectedExtraction>,
    pub predicted_final_cc: Option<i64>,
    pub report: MethodReport,
}

#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub report: MethodReport,
    pub plan: Option<ExtractionPlan>,
    pub plan_file: Option<PlanFile>,
}

pub fn java_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(path).sort_by_file_name() {
        let entry = entry.with_context(|| format!("walking {}", path.display()))?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "java") {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

pub struct ParsedFile {
    pub path: PathBuf,
    pub source: SourceFile,
    pub unit: Result<CompilationUnit, String>,
}

pub fn load(path: &Path) -> Result<ParsedFile> {
    let source = SourceFile::read(path).with_context(|| format!("reading {}", path.display()))?;
    let unit = parse(&source).map_err(|e| format!("ParseError: {e}"));
    Ok(ParsedFile { path: path.to_path_buf(), source, unit })
}

fn error_row(file: &Path, id: Option<&MethodId>, message: String) -> MethodReport {
    MethodReport {
        file: file.to_path_buf(),
        class: id.map(|i| i.class.clone()).unwrap_or_default(),
        method: id.map(|i| i.name.clone()).unwrap_or_default(),
        ordinal: id.map_or(0, |i| i.ordinal),
        status: RowStatus::Error,
        initial_cc: None,
        final_cc: None,
        extractions: 0,
        ccr: None,
        loc: None,
        params: None,
        model_vars: 0,
        model_constraints: 0,
        solve_seconds: 0.0,
        cache_seconds: 0.0,
        error: Some(message),
    }
}

/// Everything derived for one method, up to the conflict graph.
pub struct Prepared {
    pub id: MethodId,
    pub annotated: ccreduce_core::metrics::AnnotatedMethod,
    pub cache: RefactoringCache,
    pub graph: ConflictGraph,
    pub cache_seconds: f64,
}

pub fn prepare(file: &ParsedFile, unit: &CompilationUnit, method: &MethodDecl) -> Result<Prepared, String> {
    let id = MethodId::of(unit, method);
    if let Some(u) = &method.unsupported {
        return Err(format!("UnsupportedConstruct: {} at {:?}", u.what, u.span));
    }
    let started = Instant::now();
    let annotated = annotate_method(method);
    let cache = build_cache(&annotated, &file.source);
    let cache_seconds = started.elapsed().as_secs_f64();
    let graph = build_graph(&cache);
    Ok(Prepared { id, annotated, cache, graph, cache_seconds })
}

pub fn process_method(file: &ParsedFile, unit: &CompilationUnit, method: &MethodDecl, settings: &Settings) -> MethodOutcome {
    let id = MethodId::of(unit, method);
    let p = match prepare(file, unit, method) {
        Ok(p) => p,
        Err(e) => return MethodOutcome { report: error_row(&file.path, Some(&id), e), plan: None, plan_file: None },
    };
    let sscc = p.annotated.sscc();
    let mut report = MethodReport {
        file: file.path.clone(),
        class: id.class.clone(),
        method: id.name.clone(),
        ordinal: id.ordinal,
        status: RowStatus::Compliant,
        initial_cc: Some(sscc),
        final_cc: Some(i64::from(sscc)),
        extractions: 0,
        ccr: None,
        loc: None,
        params: None,
        model_vars: 0,
        model_constraints: 0,
        solve_seconds: 0.0,
        cache_seconds: p.cache_seconds,
        error: None,
    };
    if sscc <= settings.tau {
        return MethodOutcome { report, plan: None, plan_file: None };
    }

    let model = build_model(&p.graph, settings.tau);
    report.model_vars = model.vars.len();
    report.model_constraints = model.constraints.len();
    let started = Instant::now();
    let result = if settings.use_oracle {
        match solve_exhaustive(&p.graph, settings.tau, DEFAULT_MAX_NODES) {
            Ok(o) => {
                let mut x = vec![false; model.m() + 1];
                x[0] = true;
                o.selected.iter().for_each(|&k| x[k] = true);
                let has_solution = o.status.has_solution();
                SolveResult {
                    status: o.status,
                    objective: has_solution.then_some(o.selected.len()),
                    limit_lhs: if has_solution { evaluate(&model, &x).limit_lhs } else { Vec::new() },
                    selected: o.selected,
                    nodes_explored: o.subsets_checked,
                    elapsed: started.elapsed(),
                }
            }
            Err(e) => {
                let mut row = error_row(&file.path, Some(&id), format!("TooLarge: {e}"));
                row.initial_cc = Some(sscc);
                return MethodOutcome { report: row, plan: None, plan_file: None };
            }
        }
    } else {
        solver::solve(&model, settings.time_limit)
    };
    report.solve_seconds = started.elapsed().as_secs_f64();
    report.status = result.status.into();
    report.final_cc = None;

    let mut plan_file = PlanFile {
        class: id.class.clone(),
        method: id.name.clone(),
        status: report.status,
        objective: result.objective,
        selected: Vec::new(),
        predicted_final_cc: None,
        report: report.clone(),
    };
    if !result.status.has_solution() {
        return MethodOutcome { report, plan: None, plan_file: Some(plan_file) };
    }

    let plan = make_plan(&p.graph, &result, &p.annotated, unit);
    let entry_of = |span| p.cache.entries.iter().find(|e| e.span() == span).expect("selected node is cached");
    let mut ccrs = Vec::new();
    let mut locs = Vec::new();
    let mut params = Vec::new();
    for e in &plan.entries {
        let cached = entry_of(e.span);
        ccrs.push(f64::from(cached.metrics.ccr));
        locs.push(cached.loc as f64);
        params.push(e.inputs.len() as f64);
        plan_file.selected.push(SelectedExtraction {
            start: e.span.start,
            end: e.span.end,
            ccr: cached.metrics.ccr,
            nmcc: cached.metrics.nmcc,
            params: e.inputs.len(),
            name: e.name.clone(),
        });
    }
    report.extractions = plan.entries.len();
    report.final_cc = Some(plan.predicted_sscc);
    report.ccr = Spread::of(&ccrs);
    report.loc = Spread::of(&locs);
    report.params = Spread::of(&params);
    plan_file.predicted_final_cc = Some(plan.predicted_sscc);
    plan_file.report = report.clone();
    MethodOutcome { report, plan: Some(plan), plan_file: Some(plan_file) }
}

/// Results for one input file, methods in source order.
pub struct FileOutcome {
    pub file: ParsedFile,
    pub methods: Vec<MethodOutcome>,
    pub error: Option<MethodReport>,
}

pub fn run_pipeline(path: &Path, settings: &Settings) -> Result<Vec<FileOutcome>> {
    let files = java_files(path)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs.max(1))
        .build()
        .context("building worker pool")?;
    let parsed: Vec<ParsedFile> = files.iter().map(|f| load(f)).collect::<Result<_>>()?;
    let outcomes = pool.install(|| {
        parsed
            .into_par_iter()
            .map(|file| {
                let unit = match &file.unit {
                    Ok(u) => u.clone(),
                    Err(e) => {
                        let row = error_row(&file.path, None, e.clone());
                        return FileOutcome { file, methods: Vec::new(), error: Some(row) };
                    }
                };
                let methods: Vec<&MethodDecl> = list_methods(&unit);
                let methods = methods.par_iter().map(|m| process_method(&file, &unit, m, settings)).collect();
                FileOutcome { file, methods, error: None }
            })
            .collect()
    });
    Ok(outcomes)
}

pub fn all_reports(outcomes: &[FileOutcome]) -> Vec<MethodReport> {
    outcomes
        .iter()
        .flat_map(|f| f.error.iter().cloned().chain(f.methods.iter().map(|m| m.report.clone())))
        .collect()
}

/// File name for a method's plan artifact.
pub fn plan_file_name(report: &MethodReport) -> String {
    let class: String = report.class.chars().map(|c| if c.is_alphanumeric() || c == '.' { c } else { '_' }).collect();
    format!("{class}#{}@{}.json", report.method, report.ordinal)
}
