//! JSON and CSV forms of coefficient tables and discrete measures.
//!
//! Every exact value is written as a `"p"` or `"p/q"` string, so reading a
//! written file gives back identical rationals.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::DiscreteMeasure;
use crate::error::{Error, Result};
use crate::inverse::{MultiIndex, NNCoeffsR, NNGridR};
use crate::nearest_neighbor::{MarginalRecurrence, NNCoeffs, NNGrid};
use crate::numerics::{format_rational, parse_rational, sqrt_to_decimal, Rational};
use crate::stepline::StepLineCoeffs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    /// From a file extension, `json` unless it is `csv`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

fn parse_at(text: &str, line: usize, column: &str) -> Result<Rational> {
    parse_rational(text.trim()).map_err(|msg| Error::Parse {
        line,
        msg: format!("column {column}: {msg}"),
    })
}

/// Line number of a JSON error, or 0 when serde cannot tell.
fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

fn write_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Records with the line each one started on.
fn read_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<(usize, T)>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row: T = rec.deserialize(None).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        out.push((line, row));
    }
    Ok(out)
}

/// 1-based line of the `idx`-th element of a top-level JSON `rows` array,
/// found by scanning for the opening braces of row objects.
fn json_row_line(text: &str, idx: usize) -> usize {
    let Some(start) = text.find("\"rows\"") else {
        return 0;
    };
    let mut depth = 0i32;
    let mut seen = 0usize;
    for (offset, ch) in text[start..].char_indices() {
        match ch {
            '[' | '{' => {
                depth += 1;
                if ch == '{' && depth == 2 {
                    if seen == idx {
                        return text[..start + offset].matches('\n').count() + 1;
                    }
                    seen += 1;
                }
            }
            ']' | '}' => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            _ => {}
        }
    }
    0
}

#[derive(Debug, Serialize, Deserialize)]
struct StepLineRow {
    n: usize,
    beta: String,
    gamma: String,
    delta: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct StepLineJson {
    rows: Vec<StepLineRow>,
}

pub fn stepline_to_string(s: &StepLineCoeffs, format: Format) -> Result<String> {
    if s.level() != 0 {
        return Err(Error::Domain("only the unshifted step-line is serialised".into()));
    }
    let top = s.top().ok_or_else(|| Error::Domain("step-line table is empty".into()))?;
    let rows: Vec<StepLineRow> = (0..=top)
        .map(|n| {
            Ok(StepLineRow {
                n,
                beta: format_rational(s.beta(n)?),
                gamma: format_rational(s.gamma(n)?),
                delta: format_rational(s.delta(n)?),
            })
        })
        .collect::<Result<_>>()?;
    match format {
        Format::Csv => write_csv(&rows),
        Format::Json => serde_json::to_string_pretty(&StepLineJson { rows })
            .map_err(|e| Error::Io(e.to_string())),
    }
}

fn rows_with_lines<T: for<'de> Deserialize<'de>>(text: &str, format: Format) -> Result<Vec<(usize, T)>>
where
    JsonRows<T>: for<'de> Deserialize<'de>,
{
    match format {
        Format::Csv => read_csv(text),
        Format::Json => {
            let parsed: JsonRows<T> = serde_json::from_str(text).map_err(json_error)?;
            Ok(parsed
                .rows
                .into_iter()
                .enumerate()
                .map(|(i, row)| (json_row_line(text, i), row))
                .collect())
        }
    }
}

#[derive(Debug, Deserialize)]
struct JsonRows<T> {
    rows: Vec<T>,
}

fn expect_index(found: usize, expected: usize, line: usize) -> Result<()> {
    if found != expected {
        return Err(Error::Parse {
            line,
            msg: format!("expected row index {expected}, found {found}"),
        });
    }
    Ok(())
}

pub fn stepline_from_str(text: &str, format: Format) -> Result<StepLineCoeffs> {
    let rows: Vec<(usize, StepLineRow)> = rows_with_lines(text, format)?;
    let (mut beta, mut gamma, mut delta) = (Vec::new(), Vec::new(), Vec::new());
    for (i, (line, row)) in rows.iter().enumerate() {
        expect_index(row.n, i, *line)?;
        beta.push(parse_at(&row.beta, *line, "beta")?);
        gamma.push(parse_at(&row.gamma, *line, "gamma")?);
        delta.push(parse_at(&row.delta, *line, "delta")?);
    }
    StepLineCoeffs::from_level0(beta, gamma, delta)
}

#[derive(Debug, Serialize, Deserialize)]
struct NNRow {
    n: usize,
    m: usize,
    a: String,
    b: String,
    c: String,
    d: String,
}

#[derive(Debug, Serialize)]
struct NNJson {
    max_len: usize,
    rows: Vec<NNRow>,
}

pub fn nn_grid_to_string(g: &NNGrid, format: Format) -> Result<String> {
    let rows: Vec<NNRow> = g
        .iter()
        .map(|(n, m, e)| NNRow {
            n,
            m,
            a: format_rational(&e.a),
            b: format_rational(&e.b),
            c: format_rational(&e.c),
            d: format_rational(&e.d),
        })
        .collect();
    match format {
        Format::Csv => write_csv(&rows),
        Format::Json => serde_json::to_string_pretty(&NNJson {
            max_len: g.max_len(),
            rows,
        })
        .map_err(|e| Error::Io(e.to_string())),
    }
}

/// The grid length is the largest `n + m` present; every index up to it
/// must appear exactly once.
pub fn nn_grid_from_str(text: &str, format: Format) -> Result<NNGrid> {
    let rows: Vec<(usize, NNRow)> = rows_with_lines(text, format)?;
    let max_len = rows.iter().map(|(_, r)| r.n + r.m).max().unwrap_or(0);
    let mut grid = NNGrid::zeros(max_len);
    let mut seen = vec![false; (max_len + 1) * (max_len + 2) / 2];
    for (line, row) in &rows {
        let s = row.n + row.m;
        let slot = s * (s + 1) / 2 + row.m;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(Error::Parse {
                line: *line,
                msg: format!("duplicate entry ({}, {})", row.n, row.m),
            });
        }
        grid.set(
            row.n,
            row.m,
            NNCoeffs {
                a: parse_at(&row.a, *line, "a")?,
                b: parse_at(&row.b, *line, "b")?,
                c: parse_at(&row.c, *line, "c")?,
                d: parse_at(&row.d, *line, "d")?,
            },
        )?;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        let s = (0..=max_len).rev().find(|s| s * (s + 1) / 2 <= missing).unwrap_or(0);
        let m = missing - s * (s + 1) / 2;
        return Err(Error::Parse {
            line: 0,
            msg: format!("missing entry ({}, {m})", s - m),
        });
    }
    Ok(grid)
}

#[derive(Debug, Serialize, Deserialize)]
struct MarginalRow {
    n: usize,
    b: String,
    a_sq: String,
    #[serde(default)]
    a_decimal: String,
}

#[derive(Debug, Serialize)]
struct MarginalJson {
    measure: usize,
    digits: u32,
    rows: Vec<MarginalRow>,
}

/// `a_decimal` is `sqrt(a_sq)` to `digits` significant digits, for reading
/// only; it is ignored on input.
pub fn marginal_to_string(m: &MarginalRecurrence, digits: u32, format: Format) -> Result<String> {
    let rows: Vec<MarginalRow> = (0..m.len())
        .map(|n| {
            let a_sq = m.a_sq(n)?;
            Ok(MarginalRow {
                n,
                b: format_rational(m.b(n)?),
                a_sq: format_rational(a_sq),
                a_decimal: sqrt_to_decimal(a_sq, digits).unwrap_or_default(),
            })
        })
        .collect::<Result<_>>()?;
    match format {
        Format::Csv => write_csv(&rows),
        Format::Json => serde_json::to_string_pretty(&MarginalJson {
            measure: m.measure(),
            digits,
            rows,
        })
        .map_err(|e| Error::Io(e.to_string())),
    }
}

pub fn marginal_from_str(text: &str, measure: usize, format: Format) -> Result<MarginalRecurrence> {
    let rows: Vec<(usize, MarginalRow)> = rows_with_lines(text, format)?;
    let (mut b, mut a_sq) = (Vec::new(), Vec::new());
    for (i, (line, row)) in rows.iter().enumerate() {
        expect_index(row.n, i, *line)?;
        b.push(parse_at(&row.b, *line, "b")?);
        a_sq.push(parse_at(&row.a_sq, *line, "a_sq")?);
    }
    MarginalRecurrence::new(measure, b, a_sq).map_err(|e| Error::Parse {
        line: rows.first().map_or(0, |(l, _)| *l),
        msg: e.to_string(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct NNRRow {
    index: Vec<usize>,
    a: Vec<String>,
    b: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NNRJson {
    r: usize,
    max_len: usize,
    rows: Vec<NNRRow>,
}

/// JSON only: rows carry vectors.
pub fn nn_grid_r_to_string(g: &NNGridR) -> Result<String> {
    let rows = g
        .iter()
        .map(|(idx, e)| NNRRow {
            index: idx.components().to_vec(),
            a: e.a.iter().map(format_rational).collect(),
            b: e.b.iter().map(format_rational).collect(),
        })
        .collect();
    serde_json::to_string_pretty(&NNRJson {
        r: g.r(),
        max_len: g.max_len(),
        rows,
    })
    .map_err(|e| Error::Io(e.to_string()))
}

pub fn nn_grid_r_from_str(text: &str) -> Result<NNGridR> {
    let parsed: NNRJson = serde_json::from_str(text).map_err(json_error)?;
    let mut g = NNGridR::new(parsed.r, parsed.max_len)?;
    for (i, row) in parsed.rows.iter().enumerate() {
        let line = json_row_line(text, i);
        let parse_all = |v: &[String], col: &str| -> Result<Vec<Rational>> {
            v.iter().map(|t| parse_at(t, line, col)).collect()
        };
        let coeffs = NNCoeffsR {
            a: parse_all(&row.a, "a")?,
            b: parse_all(&row.b, "b")?,
        };
        g.insert(MultiIndex::new(row.index.clone()), coeffs)
            .map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
    }
    Ok(g)
}

#[derive(Debug, Serialize, Deserialize)]
struct AtomRow {
    x: String,
    w: String,
}

/// A discrete measure as rows `(x, w)` of support point and weight.
pub fn measure_to_string(mu: &DiscreteMeasure, format: Format) -> Result<String> {
    let rows: Vec<AtomRow> = mu
        .support()
        .iter()
        .zip(mu.weights())
        .map(|(x, w)| AtomRow {
            x: format_rational(x),
            w: format_rational(w),
        })
        .collect();
    match format {
        Format::Csv => write_csv(&rows),
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                rows: Vec<AtomRow>,
            }
            serde_json::to_string_pretty(&Out { rows }).map_err(|e| Error::Io(e.to_string()))
        }
    }
}

pub fn measure_from_str(text: &str, format: Format) -> Result<DiscreteMeasure> {
    let rows: Vec<(usize, AtomRow)> = rows_with_lines(text, format)?;
    let (mut xs, mut ws) = (Vec::new(), Vec::new());
    for (line, row) in &rows {
        xs.push(parse_at(&row.x, *line, "x")?);
        ws.push(parse_at(&row.w, *line, "w")?);
    }
    DiscreteMeasure::new(xs, ws).map_err(|e| Error::Parse {
        line: 0,
        msg: e.to_string(),
    })
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
