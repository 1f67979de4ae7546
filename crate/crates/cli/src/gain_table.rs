//! Columnar gain tables: one row per pair session.
//!
//! Columns:
//!
//! | column | content |
//! |---|---|
//! | `pair` | pair label, e.g. `AB` (required) |
//! | `session` | integer session number (optional) |
//! | `loss_db` | measured total loss (optional) |
//! | `zz`, `xo`, … | `N_lr·S_lr`, successful announcements of `(l, r)` |
//! | `zz_err`, … | `N_lr·S_lr·E_lr`, erroneous announcements |
//! | `zz_sent`, … | pulses sent; `N·p_l·p_r` from the protocol when absent |
//! | `yo_oy`, `xo_ox`, `xy_yx` | mirrored pairs pooled; split ceil/floor |
//!
//! Empty cells mean "not recorded". Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use qnet_core::model::same_basis_pairs;
use qnet_core::{GainTally, IntensityProtocol, Tag, TallyEntry};

use crate::error::{CliError, Result};
use crate::report::num;

#[derive(Debug, Clone, PartialEq)]
pub struct GainRecord {
    pub pair: String,
    pub session: Option<u32>,
    pub loss_db: Option<f64>,
    pub tally: GainTally,
}

impl GainRecord {
    /// `AB` or `AB#2` when a session is recorded.
    pub fn key(&self) -> String {
        match self.session {
            Some(s) => format!("{}#{}", self.pair, s),
            None => self.pair.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Field {
    Success,
    Error,
    Sent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Column {
    Pair,
    Session,
    Loss,
    Entry(Tag, Tag, Field),
    Pooled(Tag, Tag, Field),
}

fn combo(name: &str) -> Option<(Tag, Tag)> {
    let mut c = name.chars();
    let (l, r) = (Tag::from_char(c.next()?)?, Tag::from_char(c.next()?)?);
    (c.next().is_none() && l.basis() == r.basis() && name.chars().all(|c| c.is_ascii_lowercase())).then_some((l, r))
}

fn parse_column(name: &str) -> Option<Column> {
    match name {
        "pair" => return Some(Column::Pair),
        "session" => return Some(Column::Session),
        "loss_db" => return Some(Column::Loss),
        _ => {}
    }
    let (stem, field) = if let Some(s) = name.strip_suffix("_err") {
        (s, Field::Error)
    } else if let Some(s) = name.strip_suffix("_sent") {
        (s, Field::Sent)
    } else {
        (name, Field::Success)
    };
    if let Some((l, r)) = combo(stem) {
        return Some(Column::Entry(l, r, field));
    }
    let (a, b) = stem.split_once('_')?;
    let (l, r) = combo(a)?;
    (l != r && combo(b) == Some((r, l)) && field != Field::Sent).then_some(Column::Pooled(l, r, field))
}

#[derive(Debug, Default, Clone, Copy)]
struct Partial {
    sent: Option<u64>,
    success: Option<u64>,
    error: Option<u64>,
}

/// Reads a gain table; unrecorded sent counts come from `protocol`.
pub fn ingest_gain_table(path: &Path, protocol: &IntensityProtocol) -> Result<Vec<GainRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_gain_table(&text, protocol).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_gain_table(text: &str, protocol: &IntensityProtocol) -> Result<Vec<GainRecord>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(CliError::data)?.clone();
    let mut columns = Vec::with_capacity(headers.len());
    for (i, h) in headers.iter().enumerate() {
        let c = parse_column(h).ok_or_else(|| CliError::Data(format!("header: unknown column {h:?}")))?;
        if columns.contains(&c) {
            return Err(CliError::Data(format!("header: column {h:?} repeated")));
        }
        if let Column::Pooled(l, r, f) = c {
            if columns.contains(&Column::Entry(l, r, f)) || columns.contains(&Column::Entry(r, l, f)) {
                return Err(CliError::Data(format!("header: {h:?} duplicates its split columns")));
            }
        }
        if let Column::Entry(l, r, f) = c {
            let pooled = |a, b| Column::Pooled(a, b, f);
            if columns.contains(&pooled(l, r)) || columns.contains(&pooled(r, l)) {
                return Err(CliError::Data(format!("header: column {} duplicates a pooled column", &headers[i])));
            }
        }
        columns.push(c);
    }
    if !columns.contains(&Column::Pair) {
        return Err(CliError::Data("header: missing the pair column".into()));
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| match e.position() {
            Some(p) => CliError::Data(format!("line {}: malformed row: {e}", p.line())),
            None => CliError::data(e),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let record =
            parse_row(&row, &headers, &columns, protocol).map_err(|m| CliError::Data(format!("line {line}: {m}")))?;
        if records.iter().any(|r: &GainRecord| r.key() == record.key()) {
            return Err(CliError::Data(format!("line {line}: {} appears twice", record.key())));
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(CliError::Data("gain table has no rows".into()));
    }
    Ok(records)
}

fn parse_row(
    row: &csv::StringRecord,
    headers: &csv::StringRecord,
    columns: &[Column],
    protocol: &IntensityProtocol,
) -> std::result::Result<GainRecord, String> {
    let mut pair = String::new();
    let mut session = None;
    let mut loss_db = None;
    let mut parts: BTreeMap<(Tag, Tag), Partial> = BTreeMap::new();
    for ((cell, col), name) in row.iter().zip(columns).zip(headers) {
        if cell.is_empty() {
            continue;
        }
        let count = || -> std::result::Result<u64, String> {
            cell.parse::<u64>().map_err(|_| {
                if cell.starts_with('-') {
                    format!("column {name}: negative count {cell}")
                } else {
                    format!("column {name}: {cell:?} is not a count")
                }
            })
        };
        let set = |slot: &mut Option<u64>, v| {
            if slot.replace(v).is_some() {
                Err(format!("column {name}: value given twice"))
            } else {
                Ok(())
            }
        };
        match *col {
            Column::Pair => pair = cell.to_string(),
            Column::Session => {
                session = Some(cell.parse().map_err(|_| format!("column session: {cell:?} is not an integer"))?)
            }
            Column::Loss => {
                let v: f64 = cell.parse().map_err(|_| format!("column loss_db: {cell:?} is not a number"))?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(format!("column loss_db: {cell} must be >= 0"));
                }
                loss_db = Some(v);
            }
            Column::Entry(l, r, f) => {
                let p = parts.entry((l, r)).or_default();
                match f {
                    Field::Success => set(&mut p.success, count()?)?,
                    Field::Error => set(&mut p.error, count()?)?,
                    Field::Sent => set(&mut p.sent, count()?)?,
                }
            }
            Column::Pooled(l, r, f) => {
                let v = count()?;
                let halves = [(l, r, v.div_ceil(2)), (r, l, v / 2)];
                for (a, b, h) in halves {
                    let p = parts.entry((a, b)).or_default();
                    match f {
                        Field::Success => set(&mut p.success, h)?,
                        _ => set(&mut p.error, h)?,
                    }
                }
            }
        }
    }
    if pair.is_empty() {
        return Err("empty pair label".into());
    }
    let mut tally = GainTally::new();
    for ((l, r), p) in parts {
        let Some(success) = p.success else {
            if p.error.is_some() || p.sent.is_some() {
                return Err(format!("{pair}: ({l}, {r}) has counts but no success column value"));
            }
            continue;
        };
        let sent = p.sent.unwrap_or_else(|| protocol.sent(l, r));
        if let Some(e) = p.error {
            if e > success {
                return Err(format!("{pair}: ({l}, {r}) error {e} > success {success}"));
            }
        }
        tally.insert(l, r, TallyEntry::new(sent, success, p.error)).map_err(|e| format!("{pair}: {e}"))?;
    }
    if tally.is_empty() {
        return Err(format!("{pair}: no counts"));
    }
    Ok(GainRecord { pair, session, loss_db, tally })
}

/// Writes records in the split-column form with explicit sent counts, so
/// that re-reading gives back the same tallies.
pub fn write_gain_table(out: &mut impl Write, records: &[GainRecord], provenance: &[&str]) -> std::io::Result<()> {
    for line in provenance {
        writeln!(out, "# {line}")?;
    }
    let combos: Vec<(Tag, Tag)> =
        same_basis_pairs().filter(|&(l, r)| records.iter().any(|rec| rec.tally.get(l, r).is_some())).collect();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["pair".to_string(), "session".into(), "loss_db".into()];
    for (l, r) in &combos {
        header.extend([format!("{l}{r}"), format!("{l}{r}_err"), format!("{l}{r}_sent")]);
    }
    w.write_record(&header)?;
    for rec in records {
        let mut row = vec![
            rec.pair.clone(),
            rec.session.map(|s| s.to_string()).unwrap_or_default(),
            rec.loss_db.map(num).unwrap_or_default(),
        ];
        for &(l, r) in &combos {
            match rec.tally.get(l, r) {
                Some(e) => row.extend([
                    e.success.to_string(),
                    e.error.map(|v| v.to_string()).unwrap_or_default(),
                    e.sent.to_string(),
                ]),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()
}
