//! Brute-force reference solver and a synthetic method generator.
//!
//! The reference solver shares nothing with [`crate::solver`] beyond the
//! graph: it recomputes containment from spans and scores every subset in
//! increasing cardinality.

mod generator;

pub use generator::{generate_class, generate_method};

use itertools::Itertools;
use thiserror::Error;

use crate::graph::{contains, in_conflict, ConflictGraph};
use crate::solver::Status;

pub const DEFAULT_MAX_NODES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// `Optimal` or `Infeasible`.
    pub status: Status,
    pub selected: Vec<usize>,
    pub subsets_checked: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{nodes} extraction nodes exceed the enumeration limit of {max}")]
    TooLarge { nodes: usize, max: usize },
}

pub fn solve_exhaustive(graph: &ConflictGraph, tau: u32, max_nodes: usize) -> Result<OracleResult, OracleError> {
    let m = graph.nodes.len() - 1;
    if m > max_nodes {
        return Err(OracleError::TooLarge { nodes: m, max: max_nodes });
    }
    let mut checked = 0;
    for k in 0..=m {
        for subset in (1..=m).combinations(k) {
            checked += 1;
            if subset_is_feasible(graph, tau, &subset) {
                return Ok(OracleResult { status: Status::Optimal, selected: subset, subsets_checked: checked });
            }
        }
    }
    Ok(OracleResult { status: Status::Infeasible, selected: Vec::new(), subsets_checked: checked })
}

/// SSCC each kept method would have after extracting `subset`, keyed by node
/// (node 0 first, then `subset` in order).
pub fn resulting_sscc(graph: &ConflictGraph, subset: &[usize]) -> Vec<(usize, i64)> {
    let span = |k: usize| graph.nodes[k].span;
    // node 0 contains everything regardless of its recorded span
    let inside = |a: usize, b: usize| a != b && (b == 0 || contains(span(a), span(b)));
    std::iter::once(0)
        .chain(subset.iter().copied())
        .map(|owner| {
            let base = &graph.nodes[owner].metrics;
            let mut sscc = i64::from(base.iota + base.nu);
            for &j in subset {
                let outermost = inside(j, owner) && !subset.iter().any(|&l| inside(j, l) && inside(l, owner));
                if outermost {
                    let inner = &graph.nodes[j].metrics;
                    let depth = i64::from(inner.lambda) - i64::from(base.lambda);
                    sscc -= i64::from(inner.iota + inner.nu) + depth * i64::from(inner.mu);
                }
            }
            (owner, sscc)
        })
        .collect()
}

fn subset_is_feasible(graph: &ConflictGraph, tau: u32, subset: &[usize]) -> bool {
    let clash = subset
        .iter()
        .tuple_combinations()
        .any(|(&a, &b)| in_conflict(graph.nodes[a].span, graph.nodes[b].span));
    !clash && resulting_sscc(graph, subset).iter().all(|&(_, v)| v <= i64::from(tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::Span;
    use crate::graph::Node;
    use crate::metrics::SequenceMetrics;
    use std::collections::BTreeSet;

    fn lone_root(iota: u32) -> ConflictGraph {
        ConflictGraph {
            nodes: vec![Node { span: Span::new(0, 9), metrics: SequenceMetrics::new(iota, 0, 0, 0) }],
            nested: BTreeSet::new(),
            conflicts: BTreeSet::new(),
        }
    }

    #[test]
    fn lone_root_cases() {
        let r = solve_exhaustive(&lone_root(20), 15, DEFAULT_MAX_NODES).unwrap();
        assert_eq!((r.status, r.subsets_checked), (Status::Infeasible, 1));
        let r = solve_exhaustive(&lone_root(15), 15, DEFAULT_MAX_NODES).unwrap();
        assert_eq!((r.status, r.selected.len()), (Status::Optimal, 0));
    }

    #[test]
    fn too_large() {
        let mut g = lone_root(30);
        g.nodes.extend((0..3).map(|k| Node { span: Span::new(k * 2, k * 2 + 1), metrics: SequenceMetrics::default() }));
        assert_eq!(solve_exhaustive(&g, 15, 2), Err(OracleError::TooLarge { nodes: 3, max: 2 }));
    }
}
