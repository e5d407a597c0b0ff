//! Text renderings of a [`MetricReport`].

use std::fmt::Write as _;

use mobiuse_core::MetricReport;

use crate::error::{Error, Result};

/// Column order of the printed table.
pub const COLUMNS: [&str; 5] = ["MRR", "MR", "HIT@10", "HIT@3", "HIT@1"];

fn values(r: &MetricReport) -> [f64; 5] {
    let hit = |m| r.hits_at(m).unwrap_or(0.0);
    [r.mrr, r.mr, hit(10), hit(3), hit(1)]
}

/// Aligned table with one header row and one row per `(label, report)`.
pub fn table(rows: &[(&str, &MetricReport)]) -> String {
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max("Model".len());
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|(_, r)| {
            let v = values(r);
            [
                format!("{:.3}", v[0]),
                format!("{:.2}", v[1]),
                format!("{:.3}", v[2]),
                format!("{:.3}", v[3]),
                format!("{:.3}", v[4]),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..5)
        .map(|i| cells.iter().map(|c| c[i].len()).max().unwrap_or(0).max(COLUMNS[i].len()))
        .collect();
    let mut out = String::new();
    let _ = write!(out, "{:<label_w$}", "Model");
    for (c, w) in COLUMNS.iter().zip(&widths) {
        let _ = write!(out, "  {c:>w$}");
    }
    out.push('\n');
    for ((label, _), row) in rows.iter().zip(&cells) {
        let _ = write!(out, "{label:<label_w$}");
        for (c, w) in row.iter().zip(&widths) {
            let _ = write!(out, "  {c:>w$}");
        }
        out.push('\n');
    }
    out
}

/// `key=value` lines. Floats are written with full precision so that
/// [`parse_key_value`] restores the report exactly.
pub fn key_value(r: &MetricReport) -> String {
    let v = values(r);
    let mut out = String::new();
    let _ = writeln!(out, "count={}", r.count);
    for (k, x) in ["mrr", "mr", "hit@10", "hit@3", "hit@1"].iter().zip(v) {
        let _ = writeln!(out, "{k}={x:?}");
    }
    out
}

pub fn parse_key_value(text: &str) -> Result<MetricReport> {
    let mut count = None;
    let mut fields = [None; 5];
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("expected key=value, got `{line}`")))?;
        let bad = || Error::Usage(format!("bad value for {k}: `{v}`"));
        if k == "count" {
            count = Some(v.parse::<usize>().map_err(|_| bad())?);
            continue;
        }
        let slot = match k {
            "mrr" => 0,
            "mr" => 1,
            "hit@10" => 2,
            "hit@3" => 3,
            "hit@1" => 4,
            _ => continue,
        };
        fields[slot] = Some(v.parse::<f64>().map_err(|_| bad())?);
    }
    let get = |i: usize| fields[i].ok_or_else(|| Error::Usage(format!("missing key {}", COLUMNS[i].to_lowercase())));
    Ok(MetricReport {
        count: count.ok_or_else(|| Error::Usage("missing key count".into()))?,
        mrr: get(0)?,
        mr: get(1)?,
        hits: [(1, get(4)?), (3, get(3)?), (10, get(2)?)],
    })
}
