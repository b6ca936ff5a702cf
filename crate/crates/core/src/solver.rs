//! Implicit-enumeration branch-and-bound over the `x` variables.
//!
//! The `z` variables are never branched on: for a fixed `x` the smallest
//! admissible `z` is the "outermost selected descendant" indicator, which
//! also minimizes every limit row, so checking that choice is exact.

use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::ilp::{IlpModel, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    Unknown,
}

impl Status {
    pub fn has_solution(self) -> bool {
        matches!(self, Status::Optimal | Status::Feasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    /// Selected extraction nodes (ids ≥ 1), ascending.
    pub selected: Vec<usize>,
    pub objective: Option<usize>,
    pub nodes_explored: u64,
    pub elapsed: Duration,
    /// Limit left-hand sides of the returned selection, indexed by node.
    pub limit_lhs: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub feasible: bool,
    pub limit_lhs: Vec<i64>,
}

/// Search nodes between wall-clock checks.
const CLOCK_INTERVAL: u64 = 1024;

/// `z` implied by `x`: `z_ji = 1` iff `j` is selected and nothing strictly
/// between `j` and `i` is. Indexed like `model.vars` (x entries are false).
pub fn derive_z(model: &IlpModel, x: &[bool]) -> Vec<bool> {
    let g = &model.graph;
    model
        .vars
        .iter()
        .map(|v| match *v {
            Var::X(_) => false,
            Var::Z(j, i) => x[j] && g.between(j, i).iter().all(|&l| !x[l]),
        })
        .collect()
}

/// Checks `x` (length `m + 1`) against every constraint of the model using
/// the derived `z`.
pub fn evaluate(model: &IlpModel, x: &[bool]) -> Evaluation {
    let z = derive_z(model, x);
    let value = |v: Var| match v {
        Var::X(i) => x[i],
        Var::Z(..) => z[model.var_index(v).expect("known variable")],
    };
    let mut limit_lhs = vec![0; model.m() + 1];
    let mut feasible = true;
    for c in &model.constraints {
        if let crate::ilp::ConstraintKind::Limit(i) = c.kind {
            limit_lhs[i] = c.lhs(value);
        }
        feasible &= c.holds(value);
    }
    Evaluation { feasible, limit_lhs }
}

pub fn solve(model: &IlpModel, time_limit: Duration) -> SolveResult {
    let started = Instant::now();
    let mut search = Search::new(model, started + time_limit);
    search.descend(0);
    let status = match (search.timed_out, &search.best) {
        (false, Some(_)) => Status::Optimal,
        (false, None) => Status::Infeasible,
        (true, Some(_)) => Status::Feasible,
        (true, None) => Status::Unknown,
    };
    let selected = search.best.clone().unwrap_or_default();
    let limit_lhs = if status.has_solution() {
        let mut x = vec![false; model.m() + 1];
        x[0] = true;
        selected.iter().for_each(|&i| x[i] = true);
        evaluate(model, &x).limit_lhs
    } else {
        Vec::new()
    };
    SolveResult {
        status,
        objective: status.has_solution().then_some(selected.len()),
        selected,
        nodes_explored: search.nodes,
        elapsed: started.elapsed(),
        limit_lhs,
    }
}

struct Search<'a> {
    tau: i64,
    nmcc: Vec<i64>,
    /// `descendants[i]`: `(j, weight of z_ji)` for every `j` nested in `i`.
    descendants: Vec<Vec<(usize, i64)>>,
    /// `between[i][k]` for the `k`-th descendant of `i`.
    between: Vec<Vec<FixedBitSet>>,
    neighbours: Vec<Vec<usize>>,
    order: Vec<usize>,
    selected: FixedBitSet,
    forced_zero: Vec<u32>,
    count: usize,
    best: Option<Vec<usize>>,
    nodes: u64,
    deadline: Instant,
    timed_out: bool,
    _model: &'a IlpModel,
}

impl<'a> Search<'a> {
    fn new(model: &'a IlpModel, deadline: Instant) -> Self {
        let g = &model.graph;
        let n = g.nodes.len();
        let nmcc: Vec<i64> = g.nodes.iter().map(|node| i64::from(node.metrics.nmcc)).collect();
        let mut descendants = vec![Vec::new(); n];
        let mut between = vec![Vec::new(); n];
        for &(j, i) in &g.nested {
            let w = nmcc[j] + i64::from(g.distance(j, i)) * i64::from(g.nodes[j].metrics.mu);
            descendants[i].push((j, w));
            let mut set = FixedBitSet::with_capacity(n);
            g.between(j, i).into_iter().for_each(|l| set.insert(l));
            between[i].push(set);
        }
        let mut neighbours = vec![Vec::new(); n];
        for &(a, b) in &g.conflicts {
            neighbours[a].push(b);
            neighbours[b].push(a);
        }
        let mut order: Vec<usize> = (1..n).collect();
        order.sort_by_key(|&k| (std::cmp::Reverse(g.nodes[k].metrics.ccr), g.nodes[k].span.start));
        let mut selected = FixedBitSet::with_capacity(n);
        selected.insert(0);
        Search {
            tau: i64::from(model.tau),
            nmcc,
            descendants,
            between,
            neighbours,
            order,
            selected,
            forced_zero: vec![0; n],
            count: 0,
            best: None,
            nodes: 0,
            deadline,
            timed_out: false,
            _model: model,
        }
    }

    /// Limit row of `i` when exactly the nodes in `on` are selected.
    fn limit(&self, i: usize, on: &FixedBitSet) -> i64 {
        let removed: i64 = self.descendants[i]
            .iter()
            .zip(&self.between[i])
            .filter(|((j, _), between)| on.contains(*j) && on.is_disjoint(between))
            .map(|((_, w), _)| w)
            .sum();
        self.nmcc[i] - removed
    }

    fn within_limits(&self, rows: &FixedBitSet, on: &FixedBitSet) -> bool {
        rows.ones().all(|i| self.limit(i, on) <= self.tau)
    }

    fn descend(&mut self, depth: usize) {
        if self.timed_out {
            return;
        }
        if self.nodes.is_multiple_of(CLOCK_INTERVAL) && Instant::now() >= self.deadline {
            self.timed_out = true;
            return;
        }
        self.nodes += 1;

        let best = self.best.as_ref().map_or(usize::MAX, Vec::len);
        if self.count >= best {
            return;
        }
        if self.within_limits(&self.selected, &self.selected) {
            self.best = Some(self.selected.ones().filter(|&k| k != 0).collect());
            return;
        }
        if self.count + 1 >= best {
            return;
        }
        let mut optimistic = self.selected.clone();
        for &k in &self.order[depth..] {
            if self.forced_zero[k] == 0 {
                optimistic.insert(k);
            }
        }
        if !self.within_limits(&self.selected, &optimistic) {
            return;
        }

        let Some(offset) = self.order[depth..].iter().position(|&k| self.forced_zero[k] == 0) else {
            return;
        };
        let pos = depth + offset;
        let v = self.order[pos];

        self.selected.insert(v);
        self.count += 1;
        for &u in &self.neighbours[v] {
            self.forced_zero[u] += 1;
        }
        self.descend(pos + 1);
        for &u in &self.neighbours[v] {
            self.forced_zero[u] -= 1;
        }
        self.count -= 1;
        self.selected.set(v, false);

        self.descend(pos + 1);
    }
}
