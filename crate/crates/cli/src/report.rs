//! Plain-text renderings of command results. JSON output serialises the
//! same structs directly.

use std::fmt::Write;

use isect_core::rational::format_rational;
use isect_core::{Estimate, LllReport, PlanSummary, RootReport, SmallnessReport};
use serde::Serialize;

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut line = |cells: Vec<&str>| {
        let text: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        writeln!(out, "  {}", text.join("  ").trim_end()).unwrap();
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
}

pub fn smallness(out: &mut String, report: &SmallnessReport) {
    writeln!(out, "Delta = {}", report.max_degree).unwrap();
    let rows: Vec<Vec<String>> = report
        .events
        .iter()
        .map(|e| {
            vec![
                e.name.clone(),
                format_rational(&e.probability),
                e.support_size.to_string(),
                e.degree.to_string(),
                e.mu.to_string(),
                format_rational(&e.threshold),
                yes_no(e.passes).into(),
            ]
        })
        .collect();
    if !rows.is_empty() {
        table(
            out,
            &["event", "P(A)", "r", "Delta_i", "mu", "threshold", "pass"],
            &rows,
        );
    }
    writeln!(
        out,
        "smallness condition: {}",
        if report.passes { "holds" } else { "violated" }
    )
    .unwrap();
}

pub fn lll(out: &mut String, report: &LllReport) {
    let rows: Vec<Vec<String>> = report
        .events
        .iter()
        .map(|e| {
            vec![
                e.name.clone(),
                format_rational(&e.probability),
                format_rational(&e.bound),
                yes_no(e.passes).into(),
            ]
        })
        .collect();
    if !rows.is_empty() {
        table(out, &["event", "P(A)", "s prod(1-s)", "pass"], &rows);
    }
    writeln!(
        out,
        "local lemma with s = 1/Delta: {} (lower bound {})",
        if report.passes { "holds" } else { "fails" },
        format_rational(&report.lower_bound)
    )
    .unwrap();
}

pub fn plan(out: &mut String, plan: &PlanSummary) {
    writeln!(
        out,
        "plan: {} map, delta = {}, rho = {}, alpha = {}, q = {}, K = {}, tail bound = {:e}, {} boundary samples",
        plan.map, plan.delta_exact, plan.rho_exact, plan.alpha_exact, plan.q, plan.order, plan.tail_bound, plan.validation_samples
    )
    .unwrap();
}

pub fn estimate(est: &Estimate) -> String {
    let mut out = String::new();
    writeln!(out, "value      {:.15e}", est.value).unwrap();
    writeln!(out, "log_value  {:.15e}", est.log_value).unwrap();
    writeln!(out, "epsilon    {:e}", est.epsilon).unwrap();
    writeln!(out, "K_used     {}", est.order).unwrap();
    writeln!(out, "guarantee  {}", json_name(&est.guarantee)).unwrap();
    writeln!(out, "precision  {}", json_name(&est.precision)).unwrap();
    plan(&mut out, &est.plan);
    smallness(&mut out, &est.conditions);
    out
}

pub fn roots(report: &RootReport) -> String {
    let mut out = String::new();
    for [re, im] in &report.roots {
        writeln!(out, "root  {re:.12e} {im:+.12e}i").unwrap();
    }
    writeln!(
        out,
        "min_dist  {:.12e} (+/- {:.3e})",
        report.min_dist, report.min_dist_error
    )
    .unwrap();
    writeln!(out, "delta     {:.12e}", report.delta).unwrap();
    writeln!(out, "zero_free {}", report.zero_free).unwrap();
    out
}

/// The string a unit enum variant serialises to.
pub fn json_name<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}
