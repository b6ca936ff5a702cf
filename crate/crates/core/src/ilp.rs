//! The 0-1 model: which extractions to apply so that every resulting method
//! stays within the threshold, using as few extractions as possible.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::graph::ConflictGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(usize),
    /// `z_ji`: node `j` is the outermost selected node below `i`.
    Z(usize, usize),
}

impl Var {
    pub fn name(self) -> String {
        match self {
            Var::X(i) => format!("x{i}"),
            Var::Z(j, i) => format!("z_{j}_{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Conflict(usize, usize),
    Limit(usize),
    ZDef(usize, usize),
    Root,
}

impl ConstraintKind {
    pub fn name(self) -> String {
        match self {
            ConstraintKind::Conflict(i, j) => format!("conflict_{i}_{j}"),
            ConstraintKind::Limit(i) => format!("limit_{i}"),
            ConstraintKind::ZDef(j, i) => format!("zdef_{j}_{i}"),
            ConstraintKind::Root => "root".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub terms: Vec<(i64, Var)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Constraint {
    pub fn lhs(&self, value: impl Fn(Var) -> bool) -> i64 {
        self.terms.iter().filter(|(_, v)| value(*v)).map(|(c, _)| c).sum()
    }

    pub fn holds(&self, value: impl Fn(Var) -> bool) -> bool {
        let lhs = self.lhs(value);
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpModel {
    pub graph: ConflictGraph,
    pub tau: u32,
    /// `x0..xm`, then one `z` per nested pair.
    pub vars: Vec<Var>,
    pub objective: Vec<(i64, Var)>,
    /// Conflicts, limits, z definitions, root.
    pub constraints: Vec<Constraint>,
    index: HashMap<Var, usize>,
}

pub fn build_model(graph: &ConflictGraph, tau: u32) -> IlpModel {
    let m = graph.m();
    let mut vars: Vec<Var> = (0..=m).map(Var::X).collect();
    vars.extend(graph.nested.iter().map(|&(j, i)| Var::Z(j, i)));
    let index = vars.iter().enumerate().map(|(k, v)| (*v, k)).collect();

    let nmcc = |k: usize| i64::from(graph.nodes[k].metrics.nmcc);
    let mut constraints = Vec::new();
    for &(i, j) in &graph.conflicts {
        constraints.push(Constraint {
            kind: ConstraintKind::Conflict(i, j),
            terms: vec![(1, Var::X(i)), (1, Var::X(j))],
            sense: Sense::Le,
            rhs: 1,
        });
    }
    let mut limits: Vec<Vec<(i64, Var)>> = (0..=m).map(|i| vec![(nmcc(i), Var::X(i))]).collect();
    for &(j, i) in &graph.nested {
        let mu = i64::from(graph.nodes[j].metrics.mu);
        limits[i].push((-(nmcc(j) + i64::from(graph.distance(j, i)) * mu), Var::Z(j, i)));
    }
    for (i, terms) in limits.into_iter().enumerate() {
        constraints.push(Constraint { kind: ConstraintKind::Limit(i), terms, sense: Sense::Le, rhs: i64::from(tau) });
    }
    for &(j, i) in &graph.nested {
        let between = graph.between(j, i);
        let size = between.len() as i64;
        let mut terms = vec![(1 + size, Var::Z(j, i)), (-1, Var::X(j))];
        terms.extend(between.iter().map(|&l| (1, Var::X(l))));
        constraints.push(Constraint { kind: ConstraintKind::ZDef(j, i), terms, sense: Sense::Le, rhs: size });
    }
    constraints.push(Constraint { kind: ConstraintKind::Root, terms: vec![(1, Var::X(0))], sense: Sense::Eq, rhs: 1 });

    IlpModel {
        graph: graph.clone(),
        tau,
        objective: (1..=m).map(|i| (1, Var::X(i))).collect(),
        vars,
        constraints,
        index,
    }
}

impl IlpModel {
    pub fn m(&self) -> usize {
        self.graph.m()
    }

    pub fn var_index(&self, v: Var) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn export_lp(&self) -> String {
        export_lp(self)
    }
}

const TERMS_PER_LINE: usize = 8;

fn linear_expr(terms: &[(i64, Var)]) -> String {
    let mut out = String::new();
    let nonzero: Vec<_> = terms.iter().filter(|(c, _)| *c != 0).collect();
    if nonzero.is_empty() {
        return "0".to_string();
    }
    for (k, (c, v)) in nonzero.iter().enumerate() {
        let sign = if *c < 0 { "-" } else { "+" };
        if k == 0 {
            if *c < 0 {
                out.push_str("- ");
            }
        } else if k % TERMS_PER_LINE == 0 {
            let _ = write!(out, "\n   {sign} ");
        } else {
            let _ = write!(out, " {sign} ");
        }
        if c.abs() != 1 {
            let _ = write!(out, "{} ", c.abs());
        }
        out.push_str(&v.name());
    }
    out
}

pub fn export_lp(model: &IlpModel) -> String {
    let mut out = String::from("Minimize\n");
    let _ = writeln!(out, " obj: {}", linear_expr(&model.objective));
    out.push_str("Subject To\n");
    for c in &model.constraints {
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {}: {} {op} {}", c.kind.name(), linear_expr(&c.terms), c.rhs);
    }
    out.push_str("Binary\n");
    for chunk in model.vars.chunks(TERMS_PER_LINE) {
        let names: Vec<_> = chunk.iter().map(|v| v.name()).collect();
        let _ = writeln!(out, " {}", names.join(" "));
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;
    use crate::frontend::Span;
    use crate::metrics::SequenceMetrics;
    use std::collections::BTreeSet;

    fn graph(nodes: Vec<(usize, usize, SequenceMetrics)>) -> ConflictGraph {
        let nodes: Vec<Node> = nodes.into_iter().map(|(s, e, metrics)| Node { span: Span::new(s, e), metrics }).collect();
        let mut nested = BTreeSet::new();
        let mut conflicts = BTreeSet::new();
        for j in 1..nodes.len() {
            for i in 0..nodes.len() {
                if i != j && (i == 0 || crate::graph::contains(nodes[j].span, nodes[i].span)) {
                    nested.insert((j, i));
                } else if i > j && crate::graph::in_conflict(nodes[j].span, nodes[i].span) {
                    conflicts.insert((j, i));
                }
            }
        }
        ConflictGraph { nodes, nested, conflicts }
    }

    #[test]
    fn root_only_model_is_forced_infeasible() {
        let g = graph(vec![(0, 9, SequenceMetrics::new(12, 8, 5, 0))]);
        let model = build_model(&g, 15);
        assert_eq!(model.vars.len(), 1);
        let limit = &model.constraints[0];
        assert_eq!(limit.terms, vec![(20, Var::X(0))]);
        assert!(!limit.holds(|_| true));
        let lp = export_lp(&model);
        assert!(lp.contains(" obj: 0\n"), "{lp}");
        assert!(lp.contains(" root: x0 = 1\n"));
    }

    #[test]
    fn single_extraction_zdef() {
        let g = graph(vec![(0, 9, SequenceMetrics::new(3, 1, 1, 0)), (2, 5, SequenceMetrics::new(2, 0, 1, 1))]);
        let model = build_model(&g, 2);
        let zdef = model.constraints.iter().find(|c| matches!(c.kind, ConstraintKind::ZDef(1, 0))).unwrap();
        assert_eq!((zdef.terms.clone(), zdef.rhs), (vec![(1, Var::Z(1, 0)), (-1, Var::X(1))], 0));
        let lp = export_lp(&model);
        assert!(lp.contains(" zdef_1_0: z_1_0 - x1 <= 0\n"), "{lp}");
        assert!(lp.contains(" limit_0: 4 x0 - 3 z_1_0 <= 2\n"), "{lp}");
    }

    #[test]
    fn chain_zdef_uses_intermediate_nodes() {
        let m = |l| SequenceMetrics::new(1, 0, u32::from(l > 0), l);
        let g = graph(vec![(0, 99, m(0)), (10, 90, m(1)), (20, 80, m(2))]);
        let model = build_model(&g, 15);
        let zdef = model.constraints.iter().find(|c| matches!(c.kind, ConstraintKind::ZDef(2, 0))).unwrap();
        assert_eq!(zdef.terms, vec![(2, Var::Z(2, 0)), (-1, Var::X(2)), (1, Var::X(1))]);
        assert_eq!(zdef.rhs, 1);
        let census = model.constraints.len();
        assert_eq!(census, g.conflicts.len() + g.nodes.len() + g.nested.len() + 1);
    }

    #[test]
    fn long_rows_are_wrapped() {
        let mut nodes = vec![(0, 999, SequenceMetrics::new(30, 0, 0, 0))];
        nodes.extend((0..20).map(|k| (k * 10 + 1, k * 10 + 5, SequenceMetrics::new(1, 0, 0, 0))));
        let lp = export_lp(&build_model(&graph(nodes), 15));
        assert!(lp.lines().all(|l| l.len() < 255));
        assert!(lp.lines().any(|l| l.starts_with("   - z_")));
    }
}
