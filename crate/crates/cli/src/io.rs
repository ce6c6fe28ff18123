//! Signal files, matrix listings and atomic output.
//!
//! Numbers are written as shortest round-trip decimals, so
//! read -> write -> read reproduces every value bit for bit.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use cfrht::Complex64;
use nalgebra::DMatrix;
use thiserror::Error;

pub const HEADER_1D: &str = "x,re,im";
pub const HEADER_2D: &str = "eta1,eta2,re,im";
pub const HEADER_MATRIX: &str = "row,col,re,im";

/// Relative tolerance on grid uniformity, in units of the spacing.
pub const UNIFORM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    File(String),
}

/// Shortest round-trip decimal, in plain or exponent notation, whichever is shorter.
pub fn fmt_f64(v: f64) -> String {
    let plain = format!("{v}");
    let exp = format!("{v:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

fn line_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Line { line, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal1D {
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// Samples on a product grid; `values[(i, j)]` sits at `(eta1[i], eta2[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal2D {
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    pub values: DMatrix<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    One(Signal1D),
    Two(Signal2D),
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

/// Non-empty lines with their 1-based line numbers.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(k, l)| (k + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

fn parse_fields<const N: usize>(line: usize, text: &str) -> Result<[f64; N], FormatError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(line_err(line, format!("expected {N} fields, found {}", parts.len())));
    }
    let mut out = [0.0; N];
    for (k, p) in parts.iter().enumerate() {
        let v: f64 = p.parse().map_err(|_| line_err(line, format!("field {} `{p}` is not a number", k + 1)))?;
        if !v.is_finite() {
            return Err(line_err(line, format!("field {} is not finite", k + 1)));
        }
        out[k] = v;
    }
    Ok(out)
}

/// Checks that `axis` is strictly increasing and uniformly spaced.
/// `lines[k]` is the file line holding `axis[k]`, for error messages.
fn check_axis(name: &str, axis: &[f64], lines: &[usize]) -> Result<(), FormatError> {
    if axis.len() < 2 {
        return Err(FormatError::File(format!("{name} axis needs at least 2 points")));
    }
    for k in 1..axis.len() {
        if axis[k] <= axis[k - 1] {
            return Err(line_err(lines[k], format!("{name} is not strictly increasing")));
        }
    }
    let n = axis.len();
    let dx = (axis[n - 1] - axis[0]) / (n - 1) as f64;
    for (k, &x) in axis.iter().enumerate() {
        let expected = axis[0] + k as f64 * dx;
        if (x - expected).abs() > UNIFORM_TOL * dx {
            return Err(line_err(lines[k], format!("{name} spacing is not uniform (deviation {:.3e} of the step)", (x - expected).abs() / dx)));
        }
    }
    Ok(())
}

pub fn parse_signal(text: &str) -> Result<Signal, FormatError> {
    let mut lines = numbered_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| FormatError::File("empty signal file".into()))?;
    let header: String = header.split(',').map(str::trim).collect::<Vec<_>>().join(",");
    match header.as_str() {
        HEADER_1D => parse_1d(lines).map(Signal::One),
        HEADER_2D => parse_2d(lines).map(Signal::Two),
        _ => Err(line_err(hline, format!("header must be `{HEADER_1D}` or `{HEADER_2D}`"))),
    }
}

fn parse_1d<'a>(lines: impl Iterator<Item = (usize, &'a str)>) -> Result<Signal1D, FormatError> {
    let (mut x, mut values, mut at) = (Vec::new(), Vec::new(), Vec::new());
    for (line, text) in lines {
        let [xv, re, im] = parse_fields::<3>(line, text)?;
        x.push(xv);
        values.push(Complex64::new(re, im));
        at.push(line);
    }
    check_axis("x", &x, &at)?;
    Ok(Signal1D { x, values })
}

fn parse_2d<'a>(lines: impl Iterator<Item = (usize, &'a str)>) -> Result<Signal2D, FormatError> {
    let mut rows = Vec::new();
    for (line, text) in lines {
        rows.push((line, parse_fields::<4>(line, text)?));
    }
    if rows.is_empty() {
        return Err(FormatError::File("signal file has no samples".into()));
    }
    let first = rows[0].1[0];
    let n2 = rows.iter().take_while(|(_, r)| r[0] == first).count();
    if rows.len() % n2 != 0 {
        return Err(FormatError::File(format!("{} samples do not fill a grid with {n2} points per eta2 run", rows.len())));
    }
    let n1 = rows.len() / n2;
    let eta2: Vec<f64> = rows[..n2].iter().map(|(_, r)| r[1]).collect();
    let eta2_lines: Vec<usize> = rows[..n2].iter().map(|(l, _)| *l).collect();
    check_axis("eta2", &eta2, &eta2_lines)?;
    let mut eta1 = Vec::with_capacity(n1);
    let mut eta1_lines = Vec::with_capacity(n1);
    let mut values = DMatrix::zeros(n1, n2);
    for i in 0..n1 {
        let block = &rows[i * n2..(i + 1) * n2];
        eta1.push(block[0].1[0]);
        eta1_lines.push(block[0].0);
        for (j, (line, r)) in block.iter().enumerate() {
            if r[0] != block[0].1[0] {
                return Err(line_err(*line, "eta1 changes inside a row; expected row-major order with eta2 varying fastest"));
            }
            if r[1] != eta2[j] {
                return Err(line_err(*line, "eta2 values differ from the first row"));
            }
            values[(i, j)] = Complex64::new(r[2], r[3]);
        }
    }
    check_axis("eta1", &eta1, &eta1_lines)?;
    Ok(Signal2D { eta1, eta2, values })
}

pub fn render_1d(s: &Signal1D) -> String {
    let mut out = String::with_capacity(48 * s.x.len());
    let _ = writeln!(out, "{HEADER_1D}");
    for (x, v) in s.x.iter().zip(&s.values) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(*x), fmt_f64(v.re), fmt_f64(v.im));
    }
    out
}

pub fn render_2d(s: &Signal2D) -> String {
    let mut out = String::with_capacity(64 * s.values.len());
    let _ = writeln!(out, "{HEADER_2D}");
    for (i, a) in s.eta1.iter().enumerate() {
        for (j, b) in s.eta2.iter().enumerate() {
            let v = s.values[(i, j)];
            let _ = writeln!(out, "{},{},{},{}", fmt_f64(*a), fmt_f64(*b), fmt_f64(v.re), fmt_f64(v.im));
        }
    }
    out
}

pub fn render_signal(s: &Signal) -> String {
    match s {
        Signal::One(s) => render_1d(s),
        Signal::Two(s) => render_2d(s),
    }
}

/// Dense matrix with `# key=value` metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixListing {
    pub meta: Vec<(String, String)>,
    pub entries: DMatrix<Complex64>,
}

impl MatrixListing {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// `rows` and `cols` are written first and derived from the matrix; any such
/// keys in `meta` are ignored.
pub fn render_matrix(m: &MatrixListing) -> String {
    let mut out = String::with_capacity(48 * m.entries.len());
    let _ = writeln!(out, "# rows={}", m.entries.nrows());
    let _ = writeln!(out, "# cols={}", m.entries.ncols());
    for (k, v) in m.meta.iter().filter(|(k, _)| k != "rows" && k != "cols") {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "{HEADER_MATRIX}");
    for i in 0..m.entries.nrows() {
        for j in 0..m.entries.ncols() {
            let v = m.entries[(i, j)];
            let _ = writeln!(out, "{i},{j},{},{}", fmt_f64(v.re), fmt_f64(v.im));
        }
    }
    out
}

/// Entries may be listed in any order; each at most once, missing ones are zero.
pub fn parse_matrix(text: &str) -> Result<MatrixListing, FormatError> {
    let mut meta = Vec::new();
    let mut lines = numbered_lines(text).peekable();
    while let Some((line, l)) = lines.peek().copied() {
        let Some(body) = l.strip_prefix('#') else { break };
        let (k, v) = body.split_once('=').ok_or_else(|| line_err(line, "metadata line must be `# key=value`"))?;
        meta.push((k.trim().to_string(), v.trim().to_string()));
        lines.next();
    }
    let get = |key: &str| -> Result<usize, FormatError> {
        let v = meta.iter().find(|(k, _)| k == key).ok_or_else(|| FormatError::File(format!("missing `# {key}=` metadata")))?;
        v.1.parse().map_err(|_| FormatError::File(format!("`{key}` must be a non-negative integer")))
    };
    let (rows, cols) = (get("rows")?, get("cols")?);
    match lines.next() {
        Some((_, h)) if h.split(',').map(str::trim).collect::<Vec<_>>().join(",") == HEADER_MATRIX => {}
        Some((line, _)) => return Err(line_err(line, format!("expected header `{HEADER_MATRIX}`"))),
        None => return Err(FormatError::File("missing matrix header".into())),
    }
    let mut entries = DMatrix::zeros(rows, cols);
    let mut seen = vec![false; rows * cols];
    for (line, text) in lines {
        let [r, c, re, im] = parse_fields::<4>(line, text)?;
        let index = |v: f64, n: usize, name: &str| -> Result<usize, FormatError> {
            if v.fract() != 0.0 || v < 0.0 || v >= n as f64 {
                Err(line_err(line, format!("{name} index {v} outside 0..{n}")))
            } else {
                Ok(v as usize)
            }
        };
        let (i, j) = (index(r, rows, "row")?, index(c, cols, "col")?);
        if std::mem::replace(&mut seen[i * cols + j], true) {
            return Err(line_err(line, format!("entry ({i},{j}) listed twice")));
        }
        entries[(i, j)] = Complex64::new(re, im);
    }
    meta.retain(|(k, _)| k != "rows" && k != "cols");
    Ok(MatrixListing { meta, entries })
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<(), FormatError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out.write_all(contents.as_bytes()).map_err(|source| FormatError::Io { path: "<stdout>".into(), source });
    };
    let io_err = |source| FormatError::Io { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
