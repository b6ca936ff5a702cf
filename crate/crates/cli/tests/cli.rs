use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use ccreduce_cli::commands;
use ccreduce_cli::{run_pipeline, MethodReport, PlanFile, RowStatus, Settings};
use ccreduce_core::frontend::{parse, SourceFile};
use ccreduce_core::metrics::annotate_method;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/EZInjection.java")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ccreduce"))
}

fn reports_for(path: &Path, settings: &Settings) -> Vec<MethodReport> {
    ccreduce_cli::pipeline::all_reports(&run_pipeline(path, settings).unwrap())
}

#[test]
fn hook_fixture_plan() {
    let reports = reports_for(&fixture(), &Settings::default());
    assert_eq!(reports.len(), 1, "{reports:?}");
    let hook = &reports[0];
    assert_eq!((hook.class.as_str(), hook.method.as_str()), ("EZInjection", "hook"));
    assert_eq!(hook.initial_cc, Some(16));
    assert_eq!(hook.status, RowStatus::Optimal);
    assert_eq!(hook.extractions, 1);
    assert_eq!(hook.final_cc, Some(1));
    assert_eq!((hook.model_vars, hook.model_constraints), (50, 54));
    let ccr = hook.ccr.unwrap();
    assert_eq!((ccr.min, ccr.max), (15.0, 15.0));
    assert_eq!(hook.params.unwrap().total, 1.0);
}

#[test]
fn oracle_and_solver_agree_on_the_fixture() {
    let settings = Settings { use_oracle: true, ..Settings::default() };
    let with_oracle = reports_for(&fixture(), &settings);
    let with_solver = reports_for(&fixture(), &Settings::default());
    let key = |r: &MethodReport| (r.status, r.extractions);
    assert_eq!(with_oracle.iter().map(key).collect::<Vec<_>>(), with_solver.iter().map(key).collect::<Vec<_>>());
}

#[test]
fn oracle_refuses_large_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let body: String = (0..25).map(|k| format!("        if (a > {k}) {{ for (int i{k} = 0; i{k} < b; i{k}++) {{ b++; }} }}\n")).collect();
    fs::write(dir.path().join("Big.java"), format!("class Big {{\n    static void big(int a, int b) {{\n{body}    }}\n}}\n")).unwrap();
    let settings = Settings { tau: 5, use_oracle: true, ..Settings::default() };
    let reports = reports_for(dir.path(), &settings);
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].status, RowStatus::Error);
    assert!(reports[0].error.as_deref().unwrap().starts_with("TooLarge"));
}

#[test]
fn parse_errors_and_unsupported_methods_become_error_rows() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("Bad.java"), "class Bad { void f() { if ( }").unwrap();
    fs::write(
        dir.path().join("Lam.java"),
        "class Lam { void f() { Runnable r = () -> {}; } void g(int a) { if (a > 0) { a++; } } }",
    )
    .unwrap();
    let reports = reports_for(dir.path(), &Settings::default());
    let summary: Vec<_> = reports.iter().map(|r| (r.method.as_str(), r.status)).collect();
    assert_eq!(summary, [("", RowStatus::Error), ("f", RowStatus::Error), ("g", RowStatus::Compliant)]);
    assert!(reports[0].error.as_deref().unwrap().starts_with("ParseError"));
    assert!(reports[1].error.as_deref().unwrap().starts_with("UnsupportedConstruct"));
}

#[test]
fn plan_writes_artifacts_and_report_reads_them() {
    let out = tempfile::tempdir().unwrap();
    let (text, clean) = commands::plan(&fixture(), &Settings::default(), out.path()).unwrap();
    assert!(clean);
    assert!(text.contains("Optimal    EZInjection#hook@1  cc 16 -> 1  extractions 1"), "{text}");
    let plan_path = out.path().join("plans/EZInjection#hook@1.json");
    let plan: PlanFile = serde_json::from_str(&fs::read_to_string(&plan_path).unwrap()).unwrap();
    assert_eq!(plan.objective, Some(1));
    assert_eq!(plan.predicted_final_cc, Some(1));
    assert_eq!(plan.selected.len(), 1);
    assert_eq!((plan.selected[0].ccr, plan.selected[0].nmcc, plan.selected[0].params), (15, 15, 1));
    assert_eq!(plan.selected[0].name, "hook_extracted_1");
    let csv = commands::report(out.path()).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "metric,Min,1st Qu.,Median,Mean,3rd Qu.,Max");
    assert!(lines.contains(&"initialCC,16,16,16,16,16,16"), "{csv}");
    assert!(lines.contains(&"finalCC,1,1,1,1,1,1"), "{csv}");
    assert_eq!(fs::read_to_string(out.path().join("report.csv")).unwrap(), csv);
}

#[test]
fn report_of_empty_directory_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(commands::report(dir.path()).unwrap(), "metric,Min,1st Qu.,Median,Mean,3rd Qu.,Max\n");
}

#[test]
fn apply_mirrors_the_tree_and_verifies() {
    let input = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    fs::create_dir_all(input.path().join("pkg")).unwrap();
    fs::copy(fixture(), input.path().join("pkg/EZInjection.java")).unwrap();
    let settings = Settings { jobs: 2, ..Settings::default() };
    let (_, clean) = commands::apply(input.path(), &settings, out.path()).unwrap();
    assert!(clean);
    let text = fs::read_to_string(out.path().join("pkg/EZInjection.java")).unwrap();
    let unit = parse(&SourceFile::new("EZInjection.java", text)).unwrap();
    let sscc: Vec<(String, u32)> = ccreduce_core::frontend::list_methods(&unit)
        .into_iter()
        .map(|m| (m.name.name.clone(), annotate_method(m).sscc()))
        .collect();
    assert_eq!(sscc.iter().find(|(n, _)| n == "hook").unwrap().1, 1);
    assert_eq!(sscc.iter().find(|(n, _)| n == "hook_extracted_1").unwrap().1, 15);
    assert!(sscc.iter().all(|(_, s)| *s <= 15));
}

#[test]
fn apply_handles_several_methods_in_one_file() {
    let input = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    commands::gen(40, 12, 3, 3, input.path()).unwrap();
    let sources: Vec<String> = fs::read_dir(input.path())
        .unwrap()
        .map(|e| fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    // one class holding every generated method
    let methods: Vec<String> = sources
        .iter()
        .map(|s| {
            let start = s.find("    static").unwrap();
            format!("{}\n", s[start..s.rfind('}').unwrap()].trim_end())
        })
        .collect();
    fs::write(input.path().join("All.java"), ccreduce_core::oracle::generate_class("All", &methods)).unwrap();
    let settings = Settings { tau: 8, time_limit: Duration::from_secs(30), ..Settings::default() };
    let (text, _) = commands::apply(&input.path().join("All.java"), &settings, out.path()).unwrap();
    let rewritten = fs::read_to_string(out.path().join("All.java")).unwrap();
    let unit = parse(&SourceFile::new("All.java", rewritten)).unwrap();
    let reports: Vec<MethodReport> = serde_json::from_str(&fs::read_to_string(out.path().join("methods.json")).unwrap()).unwrap();
    for r in reports.iter().filter(|r| matches!(r.status, RowStatus::Optimal | RowStatus::Feasible)) {
        let m = ccreduce_core::frontend::list_methods(&unit).into_iter().find(|m| m.name.name == r.method).unwrap();
        assert_eq!(Some(i64::from(annotate_method(m).sscc())), r.final_cc, "{text}");
        assert!(r.final_cc.unwrap() <= 8);
    }
    assert!(reports.iter().all(|r| r.status != RowStatus::Error), "{text}");
    assert!(reports.iter().filter(|r| r.extractions > 0).count() >= 2, "{text}");
}

#[test]
fn binary_subcommands() {
    let out = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let o = bin().args(args).output().unwrap();
        (o.status.code(), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
    };
    let f = fixture();
    let f = f.to_str().unwrap();

    let (code, json, _) = run(&["analyze", f]);
    assert_eq!(code, Some(0));
    let rows: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(rows[0]["method"], "hook");
    assert_eq!(rows[0]["sscc"], 16);
    assert_eq!(rows[0]["exceeds"], true);

    let (code, csv, _) = run(&["cache", f, "--method", "EZInjection#hook"]);
    assert_eq!(code, Some(0));
    assert_eq!(csv.lines().count(), 17);

    let (_, dot, _) = run(&["graph", f, "--method", "EZInjection#hook@1", "--reduced"]);
    assert!(dot.starts_with("digraph"));
    let (_, lp, _) = run(&["model", f, "--method", "hook", "--threshold", "15"]);
    assert!(lp.starts_with("Minimize"));

    let (code, _, err) = run(&["cache", f, "--method", "EZInjection#nope"]);
    assert_eq!(code, Some(2));
    assert!(err.contains("no method matches nope"));

    let plans = out.path().join("plans");
    let (code, summary, _) = run(&["plan", f, "--out", out.path().to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(code, Some(0), "{summary}");
    let (_, csv, _) = run(&["report", plans.to_str().unwrap()]);
    assert!(csv.contains("extractions,1,1,1,1,1,1"), "{csv}");

    let gen_dir = out.path().join("gen");
    let (code, _, _) = run(&["gen", "--seed", "3", "--count", "4", "--out", gen_dir.to_str().unwrap()]);
    assert_eq!(code, Some(0));
    assert_eq!(fs::read_dir(&gen_dir).unwrap().count(), 4);
}

#[test]
fn error_rows_set_a_failing_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("Bad.java"), "class Bad {").unwrap();
    let out = dir.path().join("out");
    let status = bin().args(["plan", dir.path().to_str().unwrap(), "--out", out.to_str().unwrap()]).output().unwrap().status;
    assert_eq!(status.code(), Some(1));
}

#[test]
fn compliant_project_has_no_issues() {
    let dir = tempfile::tempdir().unwrap();
    commands::gen(0, 5, 1, 1, dir.path()).unwrap();
    let out = dir.path().join("out");
    let (_, clean) = commands::plan(dir.path(), &Settings { tau: 1000, ..Settings::default() }, &out).unwrap();
    assert!(clean);
    assert_eq!(fs::read_dir(out.join("plans")).unwrap().count(), 0);
    let reports: Vec<MethodReport> = serde_json::from_str(&fs::read_to_string(out.join("methods.json")).unwrap()).unwrap();
    assert_eq!(reports.len(), 5);
    assert!(reports.iter().all(|r| r.status == RowStatus::Compliant && r.extractions == 0));
}

#[test]
fn synthetic_corpus_statistics() {
    let dir = tempfile::tempdir().unwrap();
    commands::gen(500, 200, 3, 3, dir.path()).unwrap();
    let out = dir.path().join("out");
    let settings = Settings { time_limit: Duration::from_secs(2), jobs: 4, ..Settings::default() };
    let (summary, clean) = commands::plan(dir.path(), &settings, &out).unwrap();
    assert!(clean, "{summary}");
    let reports: Vec<MethodReport> = serde_json::from_str(&fs::read_to_string(out.join("methods.json")).unwrap()).unwrap();
    assert_eq!(reports.len(), 200);
    for r in &reports {
        let plan = out.join("plans").join(ccreduce_cli::pipeline::plan_file_name(r));
        assert_eq!(plan.exists(), r.status != RowStatus::Compliant);
        if plan.exists() {
            let plan: PlanFile = serde_json::from_str(&fs::read_to_string(plan).unwrap()).unwrap();
            assert_eq!(plan.selected.len(), r.extractions);
        }
    }
    let optimal = reports.iter().filter(|r| r.status == RowStatus::Optimal).count();
    assert!(optimal >= 10, "{summary}");
    let csv = commands::report(&out.join("plans")).unwrap();
    let cells = |metric: &str| -> Vec<f64> {
        let line = csv.lines().find(|l| l.starts_with(&format!("{metric},"))).unwrap();
        line.split(',').skip(1).map(|c| c.parse().unwrap()).collect()
    };
    assert!(cells("extractions")[0] >= 1.0, "{csv}");
    assert!(cells("finalCC")[5] <= 15.0, "{csv}");
    assert!(cells("initialCC")[0] > 15.0, "{csv}");
    for metric in ["extractions", "finalCC", "avgLOC", "totalParams"] {
        let v = cells(metric);
        assert!(v.windows(2).take(2).all(|w| w[0] <= w[1]) && v[2] <= v[4] && v[4] <= v[5], "{metric}: {v:?}");
    }
}
