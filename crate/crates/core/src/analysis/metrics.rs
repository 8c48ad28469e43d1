//! Metrics CSV shared by TC and evaluation reports.

use std::fmt::Write as _;

use super::eval::EvalReport;
use super::tc::TcReport;

pub const METRICS_VERSION_LINE: &str = "# redi metrics v1";
pub const METRICS_COLUMNS: &str = "kind,t,s,value_nats,method,roots,samples_per_root,seed,steps,tv,kl,coverage";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn metrics_header() -> String {
    format!("{METRICS_VERSION_LINE}\n{METRICS_COLUMNS}\n")
}

pub fn tc_row(r: &TcReport) -> String {
    format!(
        "tc,{},{},{},{},{},{},{},,,,",
        r.t,
        r.s,
        r.value_nats,
        r.method,
        opt(r.roots),
        opt(r.samples_per_root),
        opt(r.seed.as_ref().map(|s| s.seed)),
    )
}

pub fn eval_row(r: &EvalReport, seed: Option<u64>) -> String {
    let mut row = String::from("eval,,,,");
    match seed {
        Some(_) => row.push_str("monte_carlo"),
        None => row.push_str("exact_compose"),
    }
    write!(
        row,
        ",,,{},{},{},{},{}",
        opt(seed),
        r.steps,
        r.tv_to_target,
        r.kl_target_generated,
        r.support_coverage
    )
    .unwrap();
    row
}
