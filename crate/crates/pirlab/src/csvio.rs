//! CSV fixtures: joint distributions, subset-entropy tables and audit
//! reports.
//!
//! Distribution files have one column per variable (non-negative integer
//! labels) and a final `probability` column holding either an exact fraction
//! `a/b` or a decimal. Table files have columns `subset,entropy`, where
//! `subset` lists 1-based message numbers separated by spaces (empty for the
//! empty set).

use std::io::{Read, Write};

use pirlab_core::bounds::{JointDistribution, SubsetEntropyTable};
use pirlab_core::{Rational, SchemeParams};

use crate::{Error, Result};

pub const PROBABILITY_COLUMN: &str = "probability";

/// Probability types that can live in the `probability` column.
pub trait CsvProbability: pirlab_core::bounds::Mass {
    fn render(&self) -> String;
    fn parse(cell: &str) -> Option<Self>;
}

impl CsvProbability for f64 {
    fn render(&self) -> String {
        format!("{self:?}")
    }

    fn parse(cell: &str) -> Option<Self> {
        match cell.parse::<Rational>() {
            Ok(r) if cell.contains('/') => Some(r.to_f64()),
            _ => cell.parse().ok(),
        }
    }
}

impl CsvProbability for Rational {
    fn render(&self) -> String {
        self.to_string()
    }

    fn parse(cell: &str) -> Option<Self> {
        cell.parse().ok()
    }
}

pub fn write_distribution<P: CsvProbability, W: Write>(dist: &JointDistribution<P>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = dist.names().iter().map(String::as_str).collect();
    header.push(PROBABILITY_COLUMN);
    w.write_record(&header)?;
    for (values, p) in dist.atoms() {
        let mut row: Vec<String> = values.iter().map(u64::to_string).collect();
        row.push(p.render());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("writing distribution", e))
}

/// Reads a distribution; fractions are kept exact with `P = Rational`.
pub fn read_distribution<P: CsvProbability, R: Read>(input: R) -> Result<JointDistribution<P>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let Some((last, vars)) = header.iter().collect::<Vec<_>>().split_last().map(|(l, v)| (*l, v.to_vec())) else {
        return Err(Error::Input("empty header".into()));
    };
    if last != PROBABILITY_COLUMN || vars.is_empty() {
        return Err(Error::Input(format!("header must be variables followed by `{PROBABILITY_COLUMN}`")));
    }
    let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let mut atoms = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let mut values = Vec::with_capacity(names.len());
        for cell in rec.iter().take(names.len()) {
            let v = cell
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::Input(format!("line {line}: value {cell:?} is not a non-negative integer")))?;
            values.push(v);
        }
        let cell = rec.get(names.len()).unwrap_or("").trim();
        let p = P::parse(cell).ok_or_else(|| Error::Input(format!("line {line}: bad probability {cell:?}")))?;
        atoms.push((values, p));
    }
    Ok(JointDistribution::new(names, atoms)?)
}

fn subset_label(mask: usize, messages: usize) -> String {
    (0..messages)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_table<W: Write>(table: &SubsetEntropyTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["subset", "entropy"])?;
    for (mask, h) in table.values().iter().enumerate() {
        w.write_record([subset_label(mask, table.messages()), format!("{h:?}")])?;
    }
    w.flush().map_err(|e| Error::io("writing table", e))
}

pub fn read_table<R: Read>(input: R) -> Result<SubsetEntropyTable> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().collect::<Vec<_>>() != ["subset", "entropy"] {
        return Err(Error::Input("table header must be `subset,entropy`".into()));
    }
    let mut entries: Vec<(usize, f64)> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let mut mask = 0usize;
        for tok in rec.get(0).unwrap_or("").split_whitespace() {
            let m: usize = tok
                .parse()
                .ok()
                .filter(|&m| (1..=20).contains(&m))
                .ok_or_else(|| Error::Input(format!("line {line}: bad message number {tok:?}")))?;
            mask |= 1 << (m - 1);
        }
        let cell = rec.get(1).unwrap_or("").trim();
        let h: f64 = cell
            .parse()
            .map_err(|_| Error::Input(format!("line {line}: bad entropy {cell:?}")))?;
        entries.push((mask, h));
    }
    let messages = entries.len().trailing_zeros() as usize;
    if entries.is_empty() || !entries.len().is_power_of_two() {
        return Err(Error::Input(format!("{} rows do not cover every subset", entries.len())));
    }
    let mut values = vec![f64::NAN; entries.len()];
    for (mask, h) in entries {
        if mask >= values.len() || !values[mask].is_nan() {
            return Err(Error::Input(format!("subset {{{}}} missing or repeated", subset_label(mask, 20))));
        }
        values[mask] = h;
    }
    Ok(SubsetEntropyTable::new(messages, values)?)
}

/// One line of an audit report.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub suite: String,
    pub params: Option<SchemeParams>,
    pub metric: String,
    pub value: String,
    pub threshold: String,
    pub pass: bool,
}

pub const AUDIT_HEADER: [&str; 10] = ["suite", "N", "K", "p", "q", "m", "metric", "value", "threshold", "pass"];

pub fn write_audit<W: Write>(rows: &[AuditRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AUDIT_HEADER)?;
    for row in rows {
        let inst: [String; 5] = match &row.params {
            Some(p) => [
                p.num_databases(),
                p.num_messages(),
                p.cache_numerator(),
                p.cache_denominator(),
                p.block_multiplier(),
            ]
            .map(|v| v.to_string()),
            None => Default::default(),
        };
        let mut rec: Vec<&str> = vec![&row.suite];
        rec.extend(inst.iter().map(String::as_str));
        rec.extend([row.metric.as_str(), &row.value, &row.threshold, if row.pass { "true" } else { "false" }]);
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("writing audit report", e))
}
