//! Conflict graph over feasible extractions.
//!
//! Node 0 stands for the whole method body; nodes `1..=m` are the feasible
//! cache entries other than the whole body, in cache order.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::extraction::RefactoringCache;
use crate::frontend::Span;
use crate::metrics::SequenceMetrics;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub span: Span,
    pub metrics: SequenceMetrics,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    pub nodes: Vec<Node>,
    /// `(j, i)` with `j` nested in `i`; transitively closed.
    pub nested: BTreeSet<(usize, usize)>,
    /// `(i, j)` with `i < j`.
    pub conflicts: BTreeSet<(usize, usize)>,
}

/// `a` is a proper sub-interval of `b`; shared endpoints are allowed.
pub fn contains(a: Span, b: Span) -> bool {
    a != b && b.start <= a.start && a.end <= b.end
}

pub fn in_conflict(a: Span, b: Span) -> bool {
    let intersect = a.start <= b.end && b.start <= a.end;
    intersect && !contains(a, b) && !contains(b, a) && a != b
}

pub fn build_graph(cache: &RefactoringCache) -> ConflictGraph {
    let whole = cache.whole_body().copied();
    let root = match whole {
        Some(e) => Node { span: e.span(), metrics: e.metrics },
        None => Node { span: Span::default(), metrics: SequenceMetrics::default() },
    };
    let mut nodes = vec![root];
    nodes.extend(
        cache
            .entries
            .iter()
            .filter(|e| e.feasible && Some(e.span()) != whole.map(|w| w.span()))
            .map(|e| Node { span: e.span(), metrics: e.metrics }),
    );
    let mut nested = BTreeSet::new();
    let mut conflicts = BTreeSet::new();
    for j in 1..nodes.len() {
        nested.insert((j, 0));
        for i in 1..nodes.len() {
            if contains(nodes[j].span, nodes[i].span) {
                nested.insert((j, i));
            } else if j < i && in_conflict(nodes[j].span, nodes[i].span) {
                conflicts.insert((j, i));
            }
        }
    }
    ConflictGraph { nodes, nested, conflicts }
}

impl ConflictGraph {
    /// Number of extraction nodes (excluding node 0).
    pub fn m(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Nesting distance `d_ji` for a nested pair.
    pub fn distance(&self, j: usize, i: usize) -> u32 {
        self.nodes[j].metrics.lambda - self.nodes[i].metrics.lambda
    }

    pub fn is_nested(&self, j: usize, i: usize) -> bool {
        self.nested.contains(&(j, i))
    }

    /// Nodes strictly between `j` and `i` in the containment order.
    pub fn between(&self, j: usize, i: usize) -> Vec<usize> {
        let within = |a: usize, b: usize| a != 0 && a != b && (b == 0 || contains(self.nodes[a].span, self.nodes[b].span));
        (1..self.nodes.len()).filter(|&l| within(j, l) && within(l, i)).collect()
    }

    pub fn transitive_reduction(&self) -> BTreeSet<(usize, usize)> {
        self.nested.iter().copied().filter(|&(j, i)| self.between(j, i).is_empty()).collect()
    }

    pub fn to_dot(&self, reduced: bool) -> String {
        let mut out = String::from("digraph conflicts {\n");
        for (k, n) in self.nodes.iter().enumerate() {
            let m = &n.metrics;
            let _ = write!(
                out,
                "  n{k} [label=\"[{}, {}] ({}, {}, {}, {}, {})\"",
                n.span.start, n.span.end, m.ccr, m.iota, m.nu, m.mu, m.lambda
            );
            out.push_str(if k == 0 { ", peripheries=2];\n" } else { "];\n" });
        }
        let edges = if reduced { self.transitive_reduction() } else { self.nested.clone() };
        for (j, i) in edges {
            let _ = writeln!(out, "  n{j} -> n{i};");
        }
        for (i, j) in &self.conflicts {
            let _ = writeln!(out, "  n{i} -> n{j} [dir=none, color=red];");
        }
        out.push_str("}\n");
        out
    }
}
