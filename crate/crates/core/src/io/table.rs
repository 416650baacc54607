//! CSV tables: per-run raw data, grouped summaries and plot-ready columns.
//!
//! All tables have a header row, LF line endings, and floating-point cells
//! written by [`sig6`]. Integer columns (counts, rounds, seeds) are written
//! exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::engine::DelayPolicy;
use crate::error::{Error, FormatError};
use crate::sweep::{aggregate, Dimension, RawRow, SummaryTable, SweepResult, View};

/// Fixed decimal notation with six significant digits: `16.0000`, `0.0781000`,
/// `201.062`. Values of a million or more keep all their integer digits.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp >= 5 {
        let unit = 10f64.powi(exp - 5);
        return format!("{:.0}", (x / unit).round() * unit);
    }
    let decimals = (5 - exp) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit, e.g. 9.999999 -> 10.00000.
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded.abs() >= 10f64.powi(exp + 1) && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

/// A header plus string cells, ready for CSV output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut w = writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are utf-8")
    }
}

fn writer<W: Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(inner)
}

pub const RAW_HEADERS: [&str; 24] = [
    "digest",
    "replication",
    "seed",
    "population",
    "adversaries",
    "delta",
    "epsilon",
    "d",
    "c",
    "r",
    "delay",
    "rounds",
    "status",
    "degenerate_band",
    "percent_access",
    "first_stable_at",
    "activated_at",
    "total_collisions",
    "congestion",
    "band_area",
    "band_area_closed_form",
    "max_gap_arc_length",
    "clamp_events",
    "error",
];

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn raw_cells(r: &RawRow) -> Vec<String> {
    vec![
        r.digest.clone(),
        r.replication.to_string(),
        r.seed.to_string(),
        r.population.to_string(),
        r.adversaries.to_string(),
        sig6(r.delta),
        sig6(r.epsilon),
        sig6(r.d),
        sig6(r.c),
        sig6(r.r),
        r.delay.to_string(),
        r.rounds.to_string(),
        r.status.clone(),
        r.degenerate_band.to_string(),
        opt(r.percent_access, sig6),
        opt(r.first_stable_at, |v| v.to_string()),
        opt(r.activated_at, |v| v.to_string()),
        opt(r.total_collisions, |v| v.to_string()),
        sig6(r.congestion),
        sig6(r.band_area),
        sig6(r.band_area_closed_form),
        opt(r.max_gap_arc_length, sig6),
        opt(r.clamp_events, |v| v.to_string()),
        r.error.clone(),
    ]
}

pub fn raw_table(rows: &[RawRow]) -> Table {
    let mut t = Table::new(RAW_HEADERS);
    t.rows = rows.iter().map(raw_cells).collect();
    t
}

pub fn write_raw_csv(rows: &[RawRow]) -> String {
    raw_table(rows).to_csv()
}

fn csv_err(line: u64, msg: impl std::fmt::Display) -> FormatError {
    FormatError::Csv(format!("line {line}: {msg}"))
}

/// Parses a table produced by [`write_raw_csv`]. Columns are located by header
/// name, so extra columns are ignored.
pub fn parse_raw_csv(text: &str) -> Result<Vec<RawRow>, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; RAW_HEADERS.len()];
    for (slot, name) in idx.iter_mut().zip(RAW_HEADERS) {
        *slot = headers.iter().position(|h| h == name).ok_or_else(|| csv_err(1, format!("missing column `{name}`")))?;
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |i: usize| rec.get(idx[i]).unwrap_or("");
        fn req<T: std::str::FromStr>(line: u64, name: &str, s: &str) -> Result<T, FormatError> {
            s.trim().parse().map_err(|_| csv_err(line, format!("bad `{name}` value {s:?}")))
        }
        fn optional<T: std::str::FromStr>(line: u64, name: &str, s: &str) -> Result<Option<T>, FormatError> {
            if s.trim().is_empty() {
                Ok(None)
            } else {
                req(line, name, s).map(Some)
            }
        }
        let f = |i: usize| req::<f64>(line, RAW_HEADERS[i], cell(i));
        let delay: DelayPolicy = cell(10).parse()?;
        out.push(RawRow {
            digest: cell(0).to_string(),
            replication: req(line, RAW_HEADERS[1], cell(1))?,
            seed: req(line, RAW_HEADERS[2], cell(2))?,
            population: req(line, RAW_HEADERS[3], cell(3))?,
            adversaries: req(line, RAW_HEADERS[4], cell(4))?,
            delta: f(5)?,
            epsilon: f(6)?,
            d: f(7)?,
            c: f(8)?,
            r: f(9)?,
            delay,
            rounds: req(line, RAW_HEADERS[11], cell(11))?,
            status: cell(12).to_string(),
            degenerate_band: req(line, RAW_HEADERS[13], cell(13))?,
            percent_access: optional(line, RAW_HEADERS[14], cell(14))?,
            first_stable_at: optional(line, RAW_HEADERS[15], cell(15))?,
            activated_at: optional(line, RAW_HEADERS[16], cell(16))?,
            total_collisions: optional(line, RAW_HEADERS[17], cell(17))?,
            congestion: f(18)?,
            band_area: f(19)?,
            band_area_closed_form: f(20)?,
            max_gap_arc_length: optional(line, RAW_HEADERS[21], cell(21))?,
            clamp_events: optional(line, RAW_HEADERS[22], cell(22))?,
            error: cell(23).to_string(),
        });
    }
    Ok(out)
}

/// Grouped statistics with percent access expressed in percent.
pub fn summary_table(summary: &SummaryTable) -> Table {
    let mut headers: Vec<String> = summary.dimensions.iter().flat_map(|d| d.headers()).map(String::from).collect();
    headers.extend(["count", "mean_percent", "min_percent", "max_percent", "stddev_percent"].map(String::from));
    let rows = summary
        .rows
        .iter()
        .map(|row| {
            let mut cells: Vec<String> = row.keys.iter().flat_map(|k| k.cells()).collect();
            cells.push(row.count.to_string());
            cells.extend([row.mean, row.min, row.max, row.stddev].map(|v| sig6(100.0 * v)));
            cells
        })
        .collect();
    Table { headers, rows }
}

pub fn write_summary_csv(summary: &SummaryTable) -> String {
    summary_table(summary).to_csv()
}

/// Plot-ready `series`/`x`/`y` columns for one view; `y` is mean percent access in percent.
pub fn plot_data(rows: &[RawRow], view: View) -> Table {
    let (dims, headers): (Vec<Dimension>, &[&str]) = match view {
        View::Fig1 => (view.dimensions(), &["series_population", "x_adversaries", "y_mean_percent"]),
        View::Table2 => (view.dimensions(), &["series_delta", "x_epsilon", "y_mean_percent"]),
        View::Table3 => (view.dimensions(), &["series_d", "x_c", "y_mean_percent"]),
        View::Delay => (view.dimensions(), &["x_delay", "y_mean_percent"]),
        View::Fig4 => (vec![Dimension::Congestion(None)], &["x_congestion", "y_mean_percent"]),
    };
    let summary = aggregate(rows, &dims);
    let mut t = Table::new(headers.iter().copied());
    t.rows = summary
        .rows
        .iter()
        .map(|row| {
            let mut cells: Vec<String> = row.keys.iter().map(|k| k.to_string()).collect();
            cells.push(sig6(100.0 * row.mean));
            cells
        })
        .collect();
    t
}

/// Writes `raw.csv` and one summary file per standard view into `dir`.
pub fn write_sweep_outputs(result: &SweepResult, dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("raw.csv"), write_raw_csv(&result.raw_rows()))?;
    for (view, summary) in &result.aggregates {
        fs::write(dir.join(view.file_name()), write_summary_csv(summary))?;
    }
    Ok(())
}
