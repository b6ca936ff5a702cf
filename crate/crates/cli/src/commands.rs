//! Subcommand bodies. Each returns its stdout text so tests can drive them
//! without spawning the binary.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ccreduce_core::extraction::write_cache_csv;
use ccreduce_core::frontend::{list_methods, parse, CompilationUnit, MethodDecl, SourceFile};
use ccreduce_core::ilp::build_model;
use ccreduce_core::oracle::{generate_class, generate_method};
use ccreduce_core::refactor::{apply_plan, verify, ExtractionPlan, MethodId};
use serde::Serialize;

use crate::pipeline::{self, all_reports, plan_file_name, FileOutcome, MethodReport, PlanFile, RowStatus, Settings};
use crate::report::{aggregate_report, status_counts};

/// `Class#name`, `Class#name@k` or a bare `name`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSelector {
    pub class: Option<String>,
    pub name: String,
    pub ordinal: Option<usize>,
}

impl std::str::FromStr for MethodSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (class, rest) = match s.split_once('#') {
            Some((c, r)) => (Some(c.to_string()), r),
            None => (None, s),
        };
        let (name, ordinal) = match rest.split_once('@') {
            Some((n, k)) => {
                let k: usize = k.parse().map_err(|_| format!("bad overload index in {s:?}"))?;
                if k == 0 {
                    return Err("overload index starts at 1".into());
                }
                (n, Some(k))
            }
            None => (rest, None),
        };
        if name.is_empty() || class.as_deref() == Some("") {
            return Err(format!("expected Class#name[@k], got {s:?}"));
        }
        Ok(MethodSelector { class, name: name.to_string(), ordinal })
    }
}

impl MethodSelector {
    pub fn resolve<'u>(&self, unit: &'u CompilationUnit) -> Result<&'u MethodDecl> {
        let matches: Vec<&MethodDecl> = list_methods(unit)
            .into_iter()
            .filter(|m| m.name.name == self.name && self.class.as_ref().is_none_or(|c| *c == m.owner_class))
            .filter(|m| self.ordinal.is_none_or(|k| MethodId::of(unit, m).ordinal == k))
            .collect();
        match matches.as_slice() {
            [m] => Ok(m),
            [] => bail!("no method matches {}", self.name),
            _ => bail!("{} is ambiguous; use Class#name@k", self.name),
        }
    }
}

fn prepared(file: &Path, selector: &MethodSelector) -> Result<pipeline::Prepared> {
    let parsed = pipeline::load(file)?;
    let unit = parsed.unit.clone().map_err(|e| anyhow!("{}: {e}", file.display()))?;
    let method = selector.resolve(&unit)?;
    pipeline::prepare(&parsed, &unit, method).map_err(|e| anyhow!(e))
}

#[derive(Serialize)]
struct AnalyzeRow {
    file: PathBuf,
    class: String,
    method: String,
    ordinal: usize,
    sscc: Option<u32>,
    exceeds: Option<bool>,
    error: Option<String>,
}

/// SSCC of every method under `path`, as a JSON array.
pub fn analyze(path: &Path, tau: u32) -> Result<(String, bool)> {
    let mut rows = Vec::new();
    for file in pipeline::java_files(path)? {
        let parsed = pipeline::load(&file)?;
        let unit = match &parsed.unit {
            Ok(u) => u,
            Err(e) => {
                rows.push(AnalyzeRow { file, class: String::new(), method: String::new(), ordinal: 0, sscc: None, exceeds: None, error: Some(e.clone()) });
                continue;
            }
        };
        for m in list_methods(unit) {
            let id = MethodId::of(unit, m);
            let (sscc, error) = match pipeline::prepare(&parsed, unit, m) {
                Ok(p) => (Some(p.annotated.sscc()), None),
                Err(e) => (None, Some(e)),
            };
            rows.push(AnalyzeRow {
                file: file.clone(),
                class: id.class,
                method: id.name,
                ordinal: id.ordinal,
                sscc,
                exceeds: sscc.map(|s| s > tau),
                error,
            });
        }
    }
    let clean = rows.iter().all(|r| r.error.is_none());
    Ok((serde_json::to_string_pretty(&rows)? + "\n", clean))
}

pub fn cache(file: &Path, selector: &MethodSelector) -> Result<String> {
    Ok(write_cache_csv(&prepared(file, selector)?.cache))
}

pub fn graph(file: &Path, selector: &MethodSelector, reduced: bool) -> Result<String> {
    Ok(prepared(file, selector)?.graph.to_dot(reduced))
}

pub fn model(file: &Path, selector: &MethodSelector, tau: u32) -> Result<String> {
    Ok(build_model(&prepared(file, selector)?.graph, tau).export_lp())
}

fn write_artifacts(outcomes: &[FileOutcome], reports: &[MethodReport], out: &Path) -> Result<()> {
    let plans = out.join("plans");
    fs::create_dir_all(&plans).with_context(|| format!("creating {}", plans.display()))?;
    for m in outcomes.iter().flat_map(|f| &f.methods) {
        if let Some(plan) = &m.plan_file {
            let path = plans.join(plan_file_name(&m.report));
            fs::write(&path, serde_json::to_string_pretty(plan)? + "\n").with_context(|| format!("writing {}", path.display()))?;
        }
    }
    fs::write(out.join("methods.json"), serde_json::to_string_pretty(reports)? + "\n")?;
    fs::write(out.join("report.csv"), aggregate_report(reports))?;
    Ok(())
}

/// One line per method plus status totals.
pub fn summary(reports: &[MethodReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let cc = |v: Option<i64>| v.map_or("-".to_string(), |v| v.to_string());
        let detail = r.error.as_deref().map(|e| format!("  {e}")).unwrap_or_default();
        let status = format!("{:?}", r.status);
        if r.method.is_empty() {
            out += &format!("{status:<10} {}{detail}\n", r.file.display());
            continue;
        }
        out += &format!(
            "{status:<10} {}#{}@{}  cc {} -> {}  extractions {}{detail}\n",
            r.class,
            r.method,
            r.ordinal,
            cc(r.initial_cc.map(i64::from)),
            cc(r.final_cc),
            r.extractions
        );
    }
    let totals: Vec<String> = status_counts(reports).iter().filter(|(_, n)| *n > 0).map(|(s, n)| format!("{s:?} {n}")).collect();
    out += &format!("{} methods: {}\n", reports.len(), totals.join(", "));
    out
}

fn has_errors(reports: &[MethodReport]) -> bool {
    reports.iter().any(|r| r.status == RowStatus::Error)
}

/// Returns the summary text and whether every row is error-free.
pub fn plan(path: &Path, settings: &Settings, out: &Path) -> Result<(String, bool)> {
    let outcomes = pipeline::run_pipeline(path, settings)?;
    let reports = all_reports(&outcomes);
    write_artifacts(&outcomes, &reports, out)?;
    Ok((summary(&reports), !has_errors(&reports)))
}

/// Gives every entry a name not yet declared in the plan's class.
fn rename_collisions(plan: &mut ExtractionPlan, unit: &CompilationUnit) {
    let mut taken: HashSet<String> = unit
        .classes
        .iter()
        .filter(|c| c.name == plan.method.class)
        .flat_map(|c| c.methods.iter().map(|m| m.name.name.clone()))
        .collect();
    for e in &mut plan.entries {
        if taken.contains(&e.name) {
            let stem = format!("{}_extracted_", plan.method.name);
            e.name = (1..).map(|k| format!("{stem}{k}")).find(|n| !taken.contains(n)).expect("unbounded");
        }
        taken.insert(e.name.clone());
    }
}

/// Applies all plans of one file, last method first so earlier offsets stay
/// valid. Failing methods become error rows and leave the text untouched.
fn rewrite_file(file: &FileOutcome, tau: u32, reports: &mut [MethodReport]) -> String {
    let mut text = file.file.source.text.clone();
    let mut order: Vec<usize> = (0..file.methods.len()).filter(|&k| file.methods[k].plan.is_some()).collect();
    order.sort_by_key(|&k| std::cmp::Reverse(file.methods[k].plan.as_ref().unwrap().entries.first().map_or(0, |e| e.span.start)));
    for k in order {
        let mut plan = file.methods[k].plan.clone().unwrap();
        let source = SourceFile::new(file.file.path.clone(), text.clone());
        let attempt = parse(&source)
            .map_err(|e| e.to_string())
            .and_then(|unit| {
                rename_collisions(&mut plan, &unit);
                apply_plan(&source, &plan).map_err(|e| e.to_string())
            })
            .and_then(|outcome| verify(&outcome, tau).map(|_| outcome).map_err(|e| e.to_string()));
        let row = reports
            .iter_mut()
            .find(|r| r.file == file.file.path && r.class == plan.method.class && r.method == plan.method.name && r.ordinal == plan.method.ordinal)
            .expect("every plan has a report row");
        match attempt {
            Ok(outcome) => text = outcome.text,
            Err(e) => {
                row.status = RowStatus::Error;
                row.error = Some(format!("RefactorError: {e}"));
            }
        }
    }
    text
}

/// Plans, rewrites and verifies every file, mirroring `path` under `out`.
pub fn apply(path: &Path, settings: &Settings, out: &Path) -> Result<(String, bool)> {
    let outcomes = pipeline::run_pipeline(path, settings)?;
    let mut reports = all_reports(&outcomes);
    let root = if path.is_file() { path.parent().unwrap_or(Path::new("")) } else { path };
    for file in &outcomes {
        let text = rewrite_file(file, settings.tau, &mut reports);
        let relative = file.file.path.strip_prefix(root).unwrap_or(&file.file.path);
        let target = out.join(relative);
        if let Some(dir) = target.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(&target, text).with_context(|| format!("writing {}", target.display()))?;
    }
    fs::write(out.join("methods.json"), serde_json::to_string_pretty(&reports)? + "\n")?;
    Ok((summary(&reports), !has_errors(&reports)))
}

/// Aggregate CSV over the plan files in `dir` (searched recursively).
pub fn report(dir: &Path) -> Result<String> {
    let mut reports = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry?;
        let path = entry.path();
        if entry.file_type().is_file() && path.extension().is_some_and(|e| e == "json") && path.file_name() != Some("methods.json".as_ref()) {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let plan: PlanFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            reports.push(plan.report);
        }
    }
    Ok(aggregate_report(&reports))
}

/// Writes `count` generated classes with seeds `seed..seed + count`.
pub fn gen(seed: u64, count: u64, depth: usize, width: usize, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    (seed..seed + count)
        .map(|s| {
            let name = format!("Gen{s}");
            let path = out.join(format!("{name}.java"));
            fs::write(&path, generate_class(&name, &[generate_method(s, depth, width)]))?;
            Ok(path)
        })
        .collect()
}
