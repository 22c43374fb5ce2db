//! Artifact writers: trajectory CSV (RFC-4180 quoting), JSON summaries with
//! a versioned schema, and binary-free text snapshots. Float formatting goes
//! through Rust's shortest-roundtrip display, so fixed inputs produce
//! byte-identical files.

use krf_core::flow::Trajectory;
use krf_core::functionals::DiagnosticsRecord;
use std::fmt::Write as _;

pub const CSV_HEADER: &str = "t,Y,Y_10,Y_11,Y_20,nu,futaki,lambda_min,sup_gdot,area";
pub const SCHEMA_VERSION: u32 = 1;

/// RFC-4180 quoting for text fields; the numeric columns never need it.
pub fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v == 0.0 {
        "0".to_string()
    } else {
        // shortest-roundtrip scientific notation: deterministic and compact
        format!("{v:e}")
    }
}

pub fn trajectory_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push_str("\r\n");
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{}\r\n",
            fmt(r.t),
            fmt(r.y),
            fmt(r.y),
            fmt(r.y11),
            fmt(r.y20),
            fmt(r.nu),
            fmt(r.futaki),
            fmt(r.lambda_min),
            fmt(r.sup_gdot),
            fmt(r.area),
        );
    }
    out
}

/// Full-state snapshot in a plain text format: commented header, then one
/// line per node with xi, u, h.
pub fn snapshot_text(t: f64, mu: f64, area: f64, xi: &[f64], u: &[f64], h: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# krf snapshot v{SCHEMA_VERSION}");
    let _ = writeln!(out, "# t = {}", fmt(t));
    let _ = writeln!(out, "# n = {}", xi.len());
    let _ = writeln!(out, "# mu = {}", fmt(mu));
    let _ = writeln!(out, "# area = {}", fmt(area));
    let _ = writeln!(out, "# columns: xi u h");
    for i in 0..xi.len() {
        let _ = writeln!(out, "{} {} {}", fmt(xi[i]), fmt(u[i]), fmt(h[i]));
    }
    out
}

/// Index of the record closest to a requested snapshot time.
pub fn nearest_snapshot_index(traj: &Trajectory, t: f64) -> Option<usize> {
    if traj.records.is_empty() {
        return None;
    }
    let mut best = 0;
    let mut dist = f64::INFINITY;
    for (i, r) in traj.records.iter().enumerate() {
        let d = (r.t - t).abs();
        if d < dist {
            dist = d;
            best = i;
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting_rules() {
        assert_eq!(csv_quote("plain"), "plain");
        assert_eq!(csv_quote("a,b"), "\"a,b\"");
        assert_eq!(csv_quote("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn header_is_pinned() {
        // schema stability: the column list is part of the output contract
        assert_eq!(CSV_HEADER, "t,Y,Y_10,Y_11,Y_20,nu,futaki,lambda_min,sup_gdot,area");
    }
}
