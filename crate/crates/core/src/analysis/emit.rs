//! Writing `report.json` and `series.csv`.
//!
//! Floats are printed with 17 significant digits so that every value reads
//! back bit-identically; non-finite values become `null` in JSON and `nan`
//! in CSV.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use super::config::Format;
use super::report::{Column, ReportDocument, SeriesTable};

pub const REPORT_FILE: &str = "report.json";
pub const SERIES_FILE: &str = "series.csv";

/// Pretty JSON with round-trip float formatting.
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", format_float(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".to_string()
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, ExactFloats(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("JSON values always serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

pub fn report_json(doc: &ReportDocument) -> String {
    to_json_string(&doc.to_value())
}

/// The report without its `wall_clock` key, for comparing runs.
pub fn report_json_without_clock(doc: &ReportDocument) -> String {
    let mut v = doc.to_value();
    if let Value::Object(m) = &mut v {
        m.remove("wall_clock");
    }
    to_json_string(&v)
}

pub fn series_csv(table: &SeriesTable) -> String {
    let columns = table.columns();
    let mut out = columns
        .iter()
        .map(|(n, _)| *n)
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for i in 0..table.len() {
        let row: Vec<String> = columns
            .iter()
            .map(|(_, c)| match c {
                Column::Real(x) => format_float(x[i]),
                Column::Flag(x) => x[i].to_string(),
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Writes the requested formats into `dir` (created if needed) and returns
/// the paths written. Without a series table no CSV is produced.
pub fn emit(doc: &ReportDocument, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let output = &doc.config.output;
    if output.wants(Format::Json) {
        let p = dir.join(REPORT_FILE);
        fs::write(&p, report_json(doc))?;
        written.push(p);
    }
    if output.wants(Format::Csv) {
        if let Some(table) = &doc.series {
            let p = dir.join(SERIES_FILE);
            fs::write(&p, series_csv(table))?;
            written.push(p);
        }
    }
    Ok(written)
}
