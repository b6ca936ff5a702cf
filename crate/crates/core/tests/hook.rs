mod common;

use std::time::Duration;

use ccreduce_core::ilp::build_model;
use ccreduce_core::refactor::{apply_plan, make_plan, verify};
use ccreduce_core::solver::{evaluate, SolveResult, Status};

use common::{hook, offset_of, Analysis};

fn forced(a: &Analysis, selected: Vec<usize>) -> SolveResult {
    let model = build_model(&a.graph, 15);
    let mut x = vec![false; model.m() + 1];
    x[0] = true;
    selected.iter().for_each(|&k| x[k] = true);
    let eval = evaluate(&model, &x);
    SolveResult {
        status: if eval.feasible { Status::Feasible } else { Status::Infeasible },
        objective: Some(selected.len()),
        selected,
        nodes_explored: 0,
        elapsed: Duration::ZERO,
        limit_lhs: eval.limit_lhs,
    }
}

#[test]
fn dot_export() {
    let a = hook();
    let dot = a.graph.to_dot(true);
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("(16, 8, 8, 5, 0)\", peripheries=2]"), "{dot}");
    assert!(dot.contains("(15, 7, 8, 5, 0)\"]"), "{dot}");
    assert_eq!(dot.matches("color=red").count(), 3);
    assert_eq!(dot.lines().filter(|l| l.contains("->") && !l.contains("red")).count(), 12);
    assert_eq!(a.graph.to_dot(false).lines().filter(|l| l.contains("->") && !l.contains("red")).count(), 39);
}

#[test]
fn output_variable_is_assigned_at_the_call_site() {
    let a = hook();
    // the `if (!all ...)` statement alone writes `print`, which is read later
    let start = offset_of(&a.source, "if (!all");
    let node = a
        .graph
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.span.start == start)
        .min_by_key(|(_, n)| n.span.end)
        .map(|(k, _)| k)
        .unwrap();
    let result = forced(&a, vec![node]);
    let plan = make_plan(&a.graph, &result, &a.annotated, &a.unit);
    let outcome = apply_plan(&a.source, &plan).unwrap();
    assert!(outcome.text.contains("            print = hook_extracted_1(info, print);\n"), "{}", outcome.text);
    assert!(outcome.text.contains("    private static boolean hook_extracted_1(String info, boolean print) {\n"));
    assert!(outcome.text.contains("        return print;\n    }"));
    let checks = verify(&outcome, 15).unwrap();
    assert_eq!(checks[0].measured, Some(16 - 10));
    assert_eq!(checks[1].measured, Some(7));
}

#[test]
fn nested_selection_is_applied_innermost_first() {
    let a = hook();
    let outer = a.graph.nodes.iter().position(|n| n.span.start == offset_of(&a.source, "if (debugHooks)")).unwrap();
    let inner = a.graph.nodes.iter().position(|n| n.span.start == offset_of(&a.source, "for (String s")).unwrap();
    let result = forced(&a, vec![outer, inner]);
    assert_eq!(result.status, Status::Feasible);
    let plan = make_plan(&a.graph, &result, &a.annotated, &a.unit);
    let order: Vec<usize> = plan.entries.iter().map(|e| e.node).collect();
    assert_eq!(order, [inner, outer]);
    let outcome = apply_plan(&a.source, &plan).unwrap();
    let checks = verify(&outcome, 15).unwrap();
    let measured: Vec<_> = checks.iter().map(|c| (c.name.as_str(), c.measured)).collect();
    // 16 - 15 for hook; the outer region keeps 15 - 7 after losing the loop
    assert_eq!(measured, [("hook", Some(1)), ("hook_extracted_1", Some(3)), ("hook_extracted_2", Some(8))]);
}

#[test]
fn lp_text_for_hook() {
    let lp = build_model(&hook().graph, 15).export_lp();
    assert!(lp.starts_with("Minimize\n obj: x1 + x2 + x3"));
    assert!(lp.contains("\n limit_0: 16 x0 - "));
    assert!(lp.contains("\n root: x0 = 1\n"));
    assert!(lp.ends_with("End\n"));
}
