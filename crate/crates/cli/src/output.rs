//! Output records and their JSON / CSV encodings.

use std::collections::BTreeMap;

use percap_core::mc::{MCEstimate, ThresholdEstimate};
use percap_core::{CapacityResult, LiftLevel};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

/// Column order of capacity rows.
pub const CAPACITY_COLUMNS: [&str; 9] = [
    "kappa",
    "level",
    "alpha_c",
    "p2",
    "q2s",
    "gamma_sq",
    "residual",
    "iterations",
    "quadrature_order",
];

pub const ESTIMATE_COLUMNS: [&str; 11] = [
    "n",
    "m",
    "alpha",
    "kappa",
    "trials",
    "successes",
    "rate",
    "ci_lo",
    "ci_hi",
    "method",
    "restarts",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaCResult {
    pub kappa_c: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// One `(q, q - ψ_q(q))` sample of the fixed-point scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanPoint {
    pub kappa: f64,
    pub q2s: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResultItem {
    Capacity(CapacityResult),
    Estimate(MCEstimate),
    Threshold(ThresholdEstimate),
    KappaC(KappaCResult),
    Scan(ScanPoint),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub schema_version: String,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub results: Vec<ResultItem>,
    pub warnings: Vec<String>,
}

impl OutputRecord {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            results: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }

    pub fn capacities(&self) -> impl Iterator<Item = &CapacityResult> {
        self.results.iter().filter_map(|r| match r {
            ResultItem::Capacity(c) => Some(c),
            _ => None,
        })
    }
}

/// Parses a JSON record produced by any subcommand.
pub fn parse_record(json: &str) -> Result<OutputRecord, serde_json::Error> {
    serde_json::from_str(json)
}

/// `x` with 10 significant digits, `%g` style: fixed notation for decimal
/// exponents in `[-5, 10)`, scientific otherwise, trailing zeros dropped.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

fn table_csv(header: Vec<String>, rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

/// A capacity row as printed, with absent cells as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityRow {
    pub kappa: f64,
    pub level: LiftLevel,
    pub alpha_c: f64,
    pub p2: Option<f64>,
    pub q2s: Option<f64>,
    pub gamma_sq: Option<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub quadrature_order: Option<usize>,
}

impl From<&CapacityResult> for CapacityRow {
    fn from(r: &CapacityResult) -> Self {
        Self {
            kappa: r.kappa,
            level: r.level,
            alpha_c: r.alpha_c,
            p2: r.p2,
            q2s: r.q2s,
            gamma_sq: r.gamma_sq,
            residual: r.residual,
            iterations: r.iterations,
            quadrature_order: r.quadrature_order,
        }
    }
}

impl CapacityRow {
    fn cells(&self) -> Vec<String> {
        vec![
            fmt_num(self.kappa),
            self.level.to_string(),
            fmt_num(self.alpha_c),
            opt_num(self.p2),
            opt_num(self.q2s),
            opt_num(self.gamma_sq),
            fmt_num(self.residual),
            self.iterations.to_string(),
            self.quadrature_order
                .map(|o| o.to_string())
                .unwrap_or_default(),
        ]
    }
}

pub fn capacity_rows_csv(rows: &[CapacityRow]) -> String {
    table_csv(
        CAPACITY_COLUMNS.iter().map(|s| s.to_string()).collect(),
        rows.iter().map(CapacityRow::cells).collect(),
    )
}

pub fn capacity_csv<'a>(results: impl IntoIterator<Item = &'a CapacityResult>) -> String {
    let rows: Vec<CapacityRow> = results.into_iter().map(CapacityRow::from).collect();
    capacity_rows_csv(&rows)
}

fn cell_f64(s: &str, col: &str) -> Result<f64, String> {
    s.parse()
        .map_err(|_| format!("column {col}: not a number: {s:?}"))
}

fn cell_opt<T: std::str::FromStr>(s: &str, col: &str) -> Result<Option<T>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse()
            .map(Some)
            .map_err(|_| format!("column {col}: cannot parse {s:?}"))
    }
}

/// Parses capacity-row CSV (as emitted by `capacity`, `curve` and `table 1`).
pub fn parse_capacity_csv(text: &str) -> Result<Vec<CapacityRow>, String> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(CAPACITY_COLUMNS) {
        return Err(format!("unexpected header {header:?}"));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            let c = |i: usize| rec.get(i).unwrap_or("");
            Ok(CapacityRow {
                kappa: cell_f64(c(0), "kappa")?,
                level: c(1)
                    .parse()
                    .map_err(|e: percap_core::Error| e.to_string())?,
                alpha_c: cell_f64(c(2), "alpha_c")?,
                p2: cell_opt(c(3), "p2")?,
                q2s: cell_opt(c(4), "q2s")?,
                gamma_sq: cell_opt(c(5), "gamma_sq")?,
                residual: cell_f64(c(6), "residual")?,
                iterations: c(7)
                    .parse()
                    .map_err(|_| format!("iterations: {:?}", c(7)))?,
                quadrature_order: cell_opt(c(8), "quadrature_order")?,
            })
        })
        .collect()
}

/// Rows `p2`, `q2s`, `alpha_c` against one column per threshold.
pub fn quantity_table_csv(results: &[CapacityResult]) -> String {
    let mut header = vec!["quantity".to_string()];
    header.extend(results.iter().map(|r| fmt_num(r.kappa)));
    let row = |name: &str, f: &dyn Fn(&CapacityResult) -> String| {
        let mut v = vec![name.to_string()];
        v.extend(results.iter().map(f));
        v
    };
    table_csv(
        header,
        vec![
            row("p2", &|r| opt_num(r.p2)),
            row("q2s", &|r| opt_num(r.q2s)),
            row("alpha_c", &|r| fmt_num(r.alpha_c)),
        ],
    )
}

/// One row of capacities per level against one column per threshold.
pub fn level_table_csv(kappas: &[f64], by_level: &[(LiftLevel, Vec<CapacityResult>)]) -> String {
    let mut header = vec!["level".to_string()];
    header.extend(kappas.iter().map(|&k| fmt_num(k)));
    let rows = by_level
        .iter()
        .map(|(level, res)| {
            let mut v = vec![level.to_string()];
            v.extend(res.iter().map(|r| fmt_num(r.alpha_c)));
            v
        })
        .collect();
    table_csv(header, rows)
}

pub fn estimates_csv(estimates: &[MCEstimate]) -> String {
    let rows = estimates
        .iter()
        .map(|e| {
            let method = serde_json::to_value(e.method)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            vec![
                e.n.to_string(),
                e.m.to_string(),
                fmt_num(e.alpha),
                fmt_num(e.kappa),
                e.trials.to_string(),
                e.successes.to_string(),
                fmt_num(e.rate),
                fmt_num(e.ci_lo),
                fmt_num(e.ci_hi),
                method,
                e.restarts.map(|r| r.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    table_csv(
        ESTIMATE_COLUMNS.iter().map(|s| s.to_string()).collect(),
        rows,
    )
}

pub fn threshold_csv(t: &ThresholdEstimate) -> String {
    table_csv(
        [
            "n",
            "kappa",
            "alpha_hat",
            "uncertainty",
            "m_below",
            "m_above",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        vec![vec![
            t.n.to_string(),
            fmt_num(t.kappa),
            fmt_num(t.alpha_hat),
            fmt_num(t.uncertainty),
            t.m_below.to_string(),
            t.m_above.to_string(),
        ]],
    )
}

pub fn kappa_c_csv(k: &KappaCResult) -> String {
    table_csv(
        vec!["kappa_c".into(), "residual".into(), "iterations".into()],
        vec![vec![
            fmt_num(k.kappa_c),
            fmt_num(k.residual),
            k.iterations.to_string(),
        ]],
    )
}

pub fn scan_csv(points: &[ScanPoint]) -> String {
    table_csv(
        vec!["q2s".into(), "residual".into()],
        points
            .iter()
            .map(|p| vec![fmt_num(p.q2s), fmt_num(p.residual)])
            .collect(),
    )
}
