//! Aggregate statistics over solved methods.

use std::fmt::Write as _;

use crate::pipeline::{MethodReport, RowStatus, Spread};

pub const HEADER: &str = "metric,Min,1st Qu.,Median,Mean,3rd Qu.,Max";

/// Sample quantile by linear interpolation between order statistics
/// (Hyndman and Fan type 7). `sorted` must be non-empty and ascending.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn number(v: f64) -> String {
    let rounded = (v * 100.0).round() / 100.0;
    if rounded.fract() == 0.0 {
        format!("{}", rounded as i64)
    } else {
        format!("{rounded:.2}").trim_end_matches('0').to_string()
    }
}

type Metric = (&'static str, fn(&MethodReport) -> Option<f64>);

fn spread(s: Option<Spread>, pick: fn(&Spread) -> f64) -> Option<f64> {
    s.as_ref().map(pick)
}

const METRICS: [Metric; 14] = [
    ("extractions", |r| Some(r.extractions as f64)),
    ("initialCC", |r| r.initial_cc.map(f64::from)),
    ("finalCC", |r| r.final_cc.map(|v| v as f64)),
    ("minCCR", |r| spread(r.ccr, |s| s.min)),
    ("avgCCR", |r| spread(r.ccr, |s| s.avg)),
    ("maxCCR", |r| spread(r.ccr, |s| s.max)),
    ("minLOC", |r| spread(r.loc, |s| s.min)),
    ("avgLOC", |r| spread(r.loc, |s| s.avg)),
    ("maxLOC", |r| spread(r.loc, |s| s.max)),
    ("totalLOC", |r| spread(r.loc, |s| s.total)),
    ("minParams", |r| spread(r.params, |s| s.min)),
    ("avgParams", |r| spread(r.params, |s| s.avg)),
    ("maxParams", |r| spread(r.params, |s| s.max)),
    ("totalParams", |r| spread(r.params, |s| s.total)),
];

/// One CSV row per metric over the `Optimal` rows; header only when there
/// are none.
pub fn aggregate_report(reports: &[MethodReport]) -> String {
    let optimal: Vec<&MethodReport> = reports.iter().filter(|r| r.status == RowStatus::Optimal).collect();
    let mut out = format!("{HEADER}\n");
    if optimal.is_empty() {
        return out;
    }
    for (name, get) in METRICS {
        let mut values: Vec<f64> = optimal.iter().filter_map(|r| get(r)).collect();
        if values.is_empty() {
            continue;
        }
        values.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let cells = [values[0], quantile(&values, 0.25), quantile(&values, 0.5), mean, quantile(&values, 0.75), values[values.len() - 1]];
        let cells: Vec<String> = cells.iter().map(|v| number(*v)).collect();
        let _ = writeln!(out, "{name},{}", cells.join(","));
    }
    out
}

/// Per-status method counts, in a fixed order.
pub fn status_counts(reports: &[MethodReport]) -> Vec<(RowStatus, usize)> {
    use RowStatus::*;
    [Compliant, Optimal, Feasible, Infeasible, Unknown, Error]
        .into_iter()
        .map(|s| (s, reports.iter().filter(|r| r.status == s).count()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_seven_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.75), 3.25);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
        assert_eq!(quantile(&[1.0, 10.0, 100.0], 0.75), 55.0);
    }

    #[test]
    fn number_format() {
        assert_eq!(number(3.0), "3");
        assert_eq!(number(2.5), "2.5");
        assert_eq!(number(1.0 / 3.0), "0.33");
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(aggregate_report(&[]), format!("{HEADER}\n"));
    }
}
