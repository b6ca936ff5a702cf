mod common;

use std::time::Duration;

use ccreduce_core::extraction::{enumerate_candidates, read_cache_csv, write_cache_csv};
use ccreduce_core::frontend::{parse, parse_statement, SourceFile, Span};
use ccreduce_core::graph::in_conflict;
use ccreduce_core::ilp::{build_model, ConstraintKind, IlpModel, Var};
use ccreduce_core::oracle::{generate_class, generate_method, resulting_sscc, solve_exhaustive};
use ccreduce_core::refactor::{apply_plan, make_plan, verify};
use ccreduce_core::solver::{derive_z, evaluate, solve, SolveResult, Status};
use proptest::prelude::*;

use common::{analyze, Analysis};

fn generated(seed: u64, depth: usize, width: usize) -> Analysis {
    let text = generate_class("P", &[generate_method(seed, depth, width)]);
    analyze(SourceFile::new("P.java", text), &format!("gen{seed}"))
}

/// (seed, depth, width) of a generated method.
fn arb_method() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..=4, 1usize..=4)
}

/// Debug text with every `@start..=end` span marker removed.
fn shape(debug: &str) -> String {
    let mut out = String::new();
    let mut chars = debug.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '@' {
            while chars.peek().is_some_and(|c| c.is_ascii_digit() || *c == '.' || *c == '=') {
                chars.next();
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn selection(model: &IlpModel, subset: &[usize]) -> Vec<bool> {
    let mut x = vec![false; model.m() + 1];
    x[0] = true;
    subset.iter().for_each(|&k| x[k] = true);
    x
}

fn assignment<'a>(model: &'a IlpModel, x: &'a [bool], z: &'a [bool]) -> impl Fn(Var) -> bool + Copy + 'a {
    move |v| match v {
        Var::X(i) => x[i],
        Var::Z(..) => z[model.var_index(v).unwrap()],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn statements_reparse_to_the_same_shape(g in arb_method()) {
        let a = generated(g.0, g.1, g.2);
        let again = parse(&a.source).unwrap();
        prop_assert_eq!(&again, &a.unit);
        let chars = a.source.chars();
        for list in a.annotated.statement_lists() {
            for s in list.stmts {
                prop_assert!(!chars[s.span.start].is_whitespace());
                let closes = matches!(chars[s.span.end], ';' | '}');
                prop_assert!(closes);
                let alone = parse_statement(a.source.slice(s.span)).unwrap();
                prop_assert_eq!(shape(&format!("{:?}", alone.kind)), shape(&format!("{:?}", s.kind)));
            }
        }
    }

    #[test]
    fn region_metric_identities(g in arb_method()) {
        let a = generated(g.0, g.1, g.2);
        let sscc = a.annotated.sscc();
        if let Some(body) = a.annotated.body_span() {
            let m = a.annotated.metrics_at(body, 0);
            prop_assert_eq!((m.nmcc, m.ccr), (sscc, sscc));
        }
        for region in enumerate_candidates(&a.annotated) {
            let m = a.annotated.metrics_at(region.span, region.lambda);
            let parts: Vec<_> = region.statements.iter().map(|s| a.annotated.metrics_at(*s, region.lambda)).collect();
            prop_assert_eq!(m.iota, parts.iter().map(|p| p.iota).sum::<u32>());
            prop_assert_eq!(m.nu, parts.iter().map(|p| p.nu).sum::<u32>());
            prop_assert_eq!(m.mu, parts.iter().map(|p| p.mu).sum::<u32>());
            prop_assert_eq!(m.ccr, m.mu * m.lambda + m.iota + m.nu);
            let deeper = a.annotated.constructs_in(region.span).filter(|c| c.is_penalized() && c.lambda > region.lambda).count();
            prop_assert_eq!(m.nu == 0, deeper == 0);
            prop_assert!(m.mu as usize >= deeper);
        }
    }

    #[test]
    fn cache_csv_round_trips(g in arb_method()) {
        let a = generated(g.0, g.1, g.2);
        let text = write_cache_csv(&a.cache);
        prop_assert_eq!(&read_cache_csv(&text).unwrap().entries, &a.cache.entries);
        let per_list: usize = a.annotated.statement_lists().iter().map(|l| l.stmts.len() * (l.stmts.len() + 1) / 2).sum();
        prop_assert!(a.cache.entries.len() <= per_list);
    }

    #[test]
    fn single_extractions_match_their_metrics(g in arb_method()) {
        let a = generated(g.0, g.1, g.2);
        let model = build_model(&a.graph, u32::MAX / 2);
        for node in 1..=a.graph.m() {
            let lhs = evaluate(&model, &selection(&model, &[node])).limit_lhs;
            prop_assert_eq!(lhs[0], i64::from(a.annotated.sscc()) - i64::from(a.graph.nodes[node].metrics.ccr));
            prop_assert_eq!(lhs[node], i64::from(a.graph.nodes[node].metrics.nmcc));
            let result = SolveResult {
                status: Status::Optimal,
                selected: vec![node],
                objective: Some(1),
                nodes_explored: 0,
                elapsed: Duration::ZERO,
                limit_lhs: lhs,
            };
            let plan = make_plan(&a.graph, &result, &a.annotated, &a.unit);
            let outcome = apply_plan(&a.source, &plan).unwrap();
            let checks = verify(&outcome, u32::MAX);
            prop_assert!(checks.is_ok(), "{:?}\n{}", checks, outcome.text);
            let params: Vec<_> = plan.entries[0].inputs.iter().map(|v| format!("{} {}", v.ty, v.name)).collect();
            let header = format!("{}({})", plan.entries[0].name, params.join(", "));
            prop_assert!(outcome.text.contains(&header));
        }
    }

    #[test]
    fn derived_z_dominates(g in arb_method(), picks in prop::collection::vec(any::<bool>(), 64), noise in prop::collection::vec(any::<bool>(), 256)) {
        let a = generated(g.0, g.1, g.2);
        let model = build_model(&a.graph, 15);
        prop_assert_eq!(model.vars.len(), a.graph.nodes.len() + a.graph.nested.len());
        prop_assert_eq!(model.constraints.len(), a.graph.conflicts.len() + a.graph.nodes.len() + a.graph.nested.len() + 1);
        // a conflict-free selection
        let mut chosen: Vec<usize> = Vec::new();
        for k in 1..=a.graph.m() {
            if picks[k % picks.len()] && !chosen.iter().any(|&c| in_conflict(a.graph.nodes[c].span, a.graph.nodes[k].span)) {
                chosen.push(k);
            }
        }
        let x = selection(&model, &chosen);
        let z = derive_z(&model, &x);
        let zdefs: Vec<_> = model.constraints.iter().filter(|c| matches!(c.kind, ConstraintKind::ZDef(..))).collect();
        prop_assert!(zdefs.iter().all(|c| c.holds(assignment(&model, &x, &z))));
        // any other admissible z gives limit rows at least as large
        let other: Vec<bool> = z.iter().enumerate().map(|(k, b)| *b || noise[k % noise.len()]).collect();
        if zdefs.iter().all(|c| c.holds(assignment(&model, &x, &other))) {
            for c in model.constraints.iter().filter(|c| matches!(c.kind, ConstraintKind::Limit(_))) {
                prop_assert!(c.lhs(assignment(&model, &x, &other)) >= c.lhs(assignment(&model, &x, &z)));
            }
        }
        let oracle_view = resulting_sscc(&a.graph, &chosen);
        let lhs = evaluate(&model, &x).limit_lhs;
        for (node, v) in oracle_view {
            prop_assert_eq!(lhs[node], v);
        }
    }

    #[test]
    fn solver_is_sound_deterministic_and_minimal(g in arb_method(), share in 0u32..=4) {
        let a = generated(g.0, g.1, g.2);
        prop_assume!(a.graph.m() <= 12);
        let tau = a.annotated.sscc() * share / 4;
        let model = build_model(&a.graph, tau);
        let r = solve(&model, Duration::from_secs(30));
        let again = solve(&model, Duration::from_secs(30));
        prop_assert_eq!((r.status, &r.selected), (again.status, &again.selected));
        let oracle = solve_exhaustive(&a.graph, tau, 12).unwrap();
        prop_assert_eq!(r.status, oracle.status);
        if r.status == Status::Optimal {
            prop_assert!(evaluate(&model, &selection(&model, &r.selected)).feasible);
            prop_assert_eq!(r.selected.len(), oracle.selected.len());
        }
    }

    #[test]
    fn oracle_returns_a_smallest_subset(g in arb_method(), share in 0u32..=4) {
        let a = generated(g.0, g.1, g.2);
        prop_assume!(a.graph.m() <= 8);
        let tau = a.annotated.sscc() * share / 4;
        let model = build_model(&a.graph, tau);
        let oracle = solve_exhaustive(&a.graph, tau, 8).unwrap();
        let m = a.graph.m();
        let smallest = (0u32..1 << m)
            .map(|mask| (1..=m).filter(|k| mask & (1 << (k - 1)) != 0).collect::<Vec<_>>())
            .filter(|s| evaluate(&model, &selection(&model, s)).feasible)
            .map(|s| s.len())
            .min();
        match smallest {
            Some(n) => prop_assert_eq!((oracle.status, oracle.selected.len()), (Status::Optimal, n)),
            None => prop_assert_eq!(oracle.status, Status::Infeasible),
        }
    }
}

#[test]
fn spans_of_generated_corpus_are_stable() {
    let a = generated(7, 3, 3);
    let b = generated(7, 3, 3);
    assert_eq!(a.cache, b.cache);
    assert!(a.cache.entries.iter().all(|e| e.span() != Span::default()));
}
