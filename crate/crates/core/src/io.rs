//! Line-oriented text formats for matrices and factorizations.
//!
//! Matrices:
//!
//! ```text
//! psdrank-matrix v1 <nrows> <ncols>
//! row <label>            one per row, in order
//! col <label>            one per column, in order
//! <row> <col> <value>    nonzero entries
//! r <target>             optional target rank
//! ```
//!
//! Without declarations the labels of a side default to `1..=n`.
//!
//! Values are `p/q` rationals, or `?` (unknown) and `*` (nonzero unknown)
//! in incomplete matrices, or polynomials under the `psdrank-symbolic`
//! header. Omitted entries are zero.
//!
//! Factorizations:
//!
//! ```text
//! psdrank-factorization v1 <k> <nrows> <ncols> <exact|float>
//! row <label>                                  declarations as above
//! row <label> <offset> <weight> <c1> ... <cn>  one Gram vector
//! ```
//!
//! A Gram vector line adds `weight · v vᵀ` where `v` has `c1..cn` at
//! coordinates `offset..offset+n` and zeros elsewhere.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::Zero;
use thiserror::Error;

use crate::certificates::{GramVector, PsdFactorization, Scalar, Witness};
use crate::gadgets::{Entry, IncompleteMatrix, InstanceMatrix, LabelVector, SymbolicMatrix};
use crate::number::{parse_rational, Number, Rational};
use crate::poly::Polynomial;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {msg}")]
pub struct IoError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> IoError {
    IoError { line, msg: msg.into() }
}

fn fmt_rational(r: &Rational) -> String {
    Number::Exact(r.clone()).to_string()
}

fn write_header(out: &mut String, kind: &str, rows: &[String], cols: &[String]) {
    writeln!(out, "{kind} v1 {} {}", rows.len(), cols.len()).unwrap();
    for l in rows {
        writeln!(out, "row {l}").unwrap();
    }
    for l in cols {
        writeln!(out, "col {l}").unwrap();
    }
}

pub fn write_instance(m: &InstanceMatrix, target: Option<usize>) -> String {
    let mut out = String::new();
    write_header(&mut out, "psdrank-matrix", m.row_labels(), m.col_labels());
    for (i, j, v) in m.nonzeros() {
        writeln!(out, "{} {} {}", m.row_labels()[i], m.col_labels()[j], fmt_rational(v)).unwrap();
    }
    if let Some(r) = target {
        writeln!(out, "r {r}").unwrap();
    }
    out
}

pub fn write_incomplete(m: &IncompleteMatrix) -> String {
    let mut out = String::new();
    write_header(&mut out, "psdrank-matrix", m.row_labels(), m.col_labels());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = match m.get(i, j) {
                Entry::Known(r) if r.is_zero() => continue,
                Entry::Known(r) => fmt_rational(r),
                Entry::Unknown => "?".into(),
                Entry::NonzeroUnknown => "*".into(),
            };
            writeln!(out, "{} {} {v}", m.row_labels()[i], m.col_labels()[j]).unwrap();
        }
    }
    out
}

pub fn write_symbolic(m: &SymbolicMatrix) -> String {
    let rows: Vec<String> = m.rows.iter().map(ToString::to_string).collect();
    let cols: Vec<String> = m.cols.iter().map(ToString::to_string).collect();
    let mut out = String::new();
    write_header(&mut out, "psdrank-symbolic", &rows, &cols);
    for i in 0..rows.len() {
        for j in 0..cols.len() {
            let p = m.get(i, j);
            if !p.is_zero() {
                writeln!(out, "{} {} {p}", rows[i], cols[j]).unwrap();
            }
        }
    }
    out
}

struct Parsed<'a> {
    rows: Vec<String>,
    cols: Vec<String>,
    entries: Vec<(usize, usize, usize, &'a str)>,
    target: Option<usize>,
}

fn parse_grid<'a>(text: &'a str, kind: &str) -> Result<Parsed<'a>, IoError> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != kind || h[1] != "v1" {
        return Err(err(1, format!("expected header `{kind} v1 <nrows> <ncols>`")));
    }
    let nrows: usize = h[2].parse().map_err(|_| err(1, "bad row count"))?;
    let ncols: usize = h[3].parse().map_err(|_| err(1, "bad column count"))?;
    let mut p = Parsed { rows: Vec::new(), cols: Vec::new(), entries: Vec::new(), target: None };
    let mut raw = Vec::new();
    for (n, line) in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.as_slice() {
            ["row", l] => p.rows.push(l.to_string()),
            ["col", l] => p.cols.push(l.to_string()),
            ["r", v] => p.target = Some(v.parse().map_err(|_| err(n, "bad target"))?),
            [r, c, v] => raw.push((n, *r, *c, *v)),
            _ => return Err(err(n, "expected `row <label>`, `col <label>`, `r <target>` or `<row> <col> <value>`")),
        }
    }
    if p.rows.is_empty() {
        p.rows = (1..=nrows).map(|i| i.to_string()).collect();
    }
    if p.cols.is_empty() {
        p.cols = (1..=ncols).map(|i| i.to_string()).collect();
    }
    if p.rows.len() != nrows || p.cols.len() != ncols {
        return Err(err(1, format!("header says {nrows}x{ncols}, found {}x{} labels", p.rows.len(), p.cols.len())));
    }
    let ri: HashMap<&str, usize> = p.rows.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let ci: HashMap<&str, usize> = p.cols.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    if ri.len() != nrows || ci.len() != ncols {
        return Err(err(1, "duplicate label"));
    }
    for (n, r, c, v) in raw {
        let i = *ri.get(r).ok_or_else(|| err(n, format!("unknown row label {r}")))?;
        let j = *ci.get(c).ok_or_else(|| err(n, format!("unknown column label {c}")))?;
        p.entries.push((n, i, j, v));
    }
    Ok(p)
}

fn value(n: usize, v: &str) -> Result<Rational, IoError> {
    parse_rational(v).ok_or_else(|| err(n, format!("bad number {v}")))
}

/// Parses a complete nonnegative matrix and its optional target.
pub fn parse_instance(text: &str) -> Result<(InstanceMatrix, Option<usize>), IoError> {
    let p = parse_grid(text, "psdrank-matrix")?;
    let mut m = InstanceMatrix::new(p.rows, p.cols).map_err(|e| err(1, e.to_string()))?;
    for (n, i, j, v) in p.entries {
        m.set(i, j, value(n, v)?).map_err(|e| err(n, e.to_string()))?;
    }
    Ok((m, p.target))
}

pub fn parse_incomplete(text: &str) -> Result<IncompleteMatrix, IoError> {
    let p = parse_grid(text, "psdrank-matrix")?;
    let mut m = IncompleteMatrix::new(p.rows, p.cols, Entry::Known(Rational::zero()));
    for (n, i, j, v) in p.entries {
        let e = match v {
            "?" => Entry::Unknown,
            "*" => Entry::NonzeroUnknown,
            _ => Entry::Known(value(n, v)?),
        };
        m.set(i, j, e);
    }
    Ok(m)
}

pub fn parse_symbolic(text: &str) -> Result<SymbolicMatrix, IoError> {
    let p = parse_grid(text, "psdrank-symbolic")?;
    let labels = |ls: &[String]| -> Result<Vec<LabelVector>, IoError> {
        ls.iter().map(|l| l.parse().map_err(|e: crate::poly::PolyError| err(1, e.to_string()))).collect()
    };
    let (rows, cols) = (labels(&p.rows)?, labels(&p.cols)?);
    let mut entries = vec![Polynomial::zero(); rows.len() * cols.len()];
    for (n, i, j, v) in p.entries {
        entries[i * cols.len() + j] = v.parse().map_err(|e: crate::poly::PolyError| err(n, e.to_string()))?;
    }
    Ok(SymbolicMatrix::new(rows, cols, entries))
}

trait FileScalar: Scalar {
    fn write(&self) -> String;
    fn read(s: &str) -> Option<Self>;
}

impl FileScalar for Rational {
    fn write(&self) -> String {
        fmt_rational(self)
    }
    fn read(s: &str) -> Option<Self> {
        parse_rational(s)
    }
}

impl FileScalar for f64 {
    fn write(&self) -> String {
        format!("{self:e}")
    }
    fn read(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

fn write_fac<T: FileScalar>(f: &PsdFactorization<T>) -> String {
    let mut out = String::new();
    writeln!(out, "psdrank-factorization v1 {} {} {} {}", f.k, f.row_labels.len(), f.col_labels.len(), T::MODE.name())
        .unwrap();
    for l in &f.row_labels {
        writeln!(out, "row {l}").unwrap();
    }
    for l in &f.col_labels {
        writeln!(out, "col {l}").unwrap();
    }
    for (side, labels, lists) in [("row", &f.row_labels, &f.rows), ("col", &f.col_labels, &f.cols)] {
        for (l, list) in labels.iter().zip(lists) {
            for g in list {
                write!(out, "{side} {l} {} {}", g.offset, g.weight.write()).unwrap();
                for c in &g.coords {
                    write!(out, " {}", c.write()).unwrap();
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn write_factorization_exact(f: &PsdFactorization<Rational>) -> String {
    write_fac(f)
}

pub fn write_factorization_float(f: &PsdFactorization<f64>) -> String {
    write_fac(f)
}

pub fn write_witness(w: &Witness) -> String {
    match w {
        Witness::Exact(f) => write_fac(f),
        Witness::Float(f) => write_fac(f),
    }
}

fn parse_fac<T: FileScalar>(
    k: usize,
    nrows: usize,
    ncols: usize,
    body: &[(usize, Vec<&str>)],
) -> Result<PsdFactorization<T>, IoError> {
    let mut f = PsdFactorization::<T>::new(k, Vec::new(), Vec::new());
    let mut index: [HashMap<String, usize>; 2] = [HashMap::new(), HashMap::new()];
    for (n, t) in body {
        let side = match t[0] {
            "row" => 0,
            "col" => 1,
            other => return Err(err(*n, format!("expected row or col, found {other}"))),
        };
        if t.len() == 2 {
            let (labels, lists) =
                if side == 0 { (&mut f.row_labels, &mut f.rows) } else { (&mut f.col_labels, &mut f.cols) };
            if index[side].insert(t[1].to_string(), labels.len()).is_some() {
                return Err(err(*n, format!("duplicate label {}", t[1])));
            }
            labels.push(t[1].to_string());
            lists.push(Vec::new());
            continue;
        }
        if t.len() < 4 {
            return Err(err(*n, "expected `<side> <label> <offset> <weight> <coords...>`"));
        }
        let idx = *index[side].get(t[1]).ok_or_else(|| err(*n, format!("undeclared label {}", t[1])))?;
        let offset: usize = t[2].parse().map_err(|_| err(*n, "bad offset"))?;
        let num = |s: &str| T::read(s).ok_or_else(|| err(*n, format!("bad number {s}")));
        let weight = num(t[3])?;
        let coords = t[4..].iter().map(|s| num(s)).collect::<Result<Vec<T>, _>>()?;
        let g = GramVector::new(offset, weight, coords);
        let lists = if side == 0 { &mut f.rows } else { &mut f.cols };
        lists[idx].push(g);
    }
    if f.row_labels.len() != nrows || f.col_labels.len() != ncols {
        return Err(err(
            1,
            format!("header says {nrows}x{ncols}, found {}x{} labels", f.row_labels.len(), f.col_labels.len()),
        ));
    }
    f.validate().map_err(|e| err(1, e.to_string()))?;
    Ok(f)
}

pub fn parse_factorization(text: &str) -> Result<Witness, IoError> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 6 || h[0] != "psdrank-factorization" || h[1] != "v1" {
        return Err(err(1, "expected header `psdrank-factorization v1 <k> <nrows> <ncols> <mode>`"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| err(1, format!("bad count {s}")));
    let (k, nrows, ncols) = (num(h[2])?, num(h[3])?, num(h[4])?);
    let body: Vec<(usize, Vec<&str>)> = lines.map(|(n, l)| (n, l.split_whitespace().collect())).collect();
    match h[5] {
        "exact" => parse_fac::<Rational>(k, nrows, ncols, &body).map(Witness::Exact),
        "float" => parse_fac::<f64>(k, nrows, ncols, &body).map(Witness::Float),
        other => Err(err(1, format!("unknown mode {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::p_alpha_factorization;
    use crate::gadgets::{build_a, build_b, build_p, GadgetContext, ZeroTest};
    use crate::number::{int, rational};

    #[test]
    fn instance_round_trip() {
        let m = build_p(&rational(3, 2)).unwrap();
        let text = write_instance(&m, Some(2));
        assert!(text.starts_with("psdrank-matrix v1 3 3\n"));
        assert!(text.contains("1 1 3/2\n"));
        assert_eq!(parse_instance(&text).unwrap(), (m, Some(2)));
    }

    #[test]
    fn incomplete_and_symbolic_round_trip() {
        let ctx = GadgetContext::new(&"x1*x1-1".parse().unwrap()).unwrap();
        let b = build_b(&ctx, ZeroTest::Linear);
        assert_eq!(parse_incomplete(&write_incomplete(&b)).unwrap(), b);
        let small = GadgetContext::new(&"-1".parse().unwrap()).unwrap();
        let a = build_a(&small);
        assert_eq!(parse_symbolic(&write_symbolic(&a)).unwrap(), a);
    }

    #[test]
    fn factorization_round_trip() {
        let f = p_alpha_factorization(&rational(1, 3)).unwrap();
        let text = write_factorization_exact(&f);
        assert!(text.starts_with("psdrank-factorization v1 2 3 3 exact\n"));
        assert_eq!(parse_factorization(&text).unwrap(), Witness::Exact(f.clone()));
        let g = f.to_float();
        assert_eq!(parse_factorization(&write_factorization_float(&g)).unwrap(), Witness::Float(g));
    }

    #[test]
    fn errors_name_lines() {
        let e = parse_instance("psdrank-matrix v1 1 1\nrow a\ncol b\na b -1/2\n").unwrap_err();
        assert_eq!(e.line, 4);
        let e = parse_instance("psdrank-matrix v1 1 1\nrow a\ncol b\na c 1\n").unwrap_err();
        assert!(e.msg.contains("unknown column"));
        assert!(parse_instance("psdrank-matrix v2 1 1\n").is_err());
        let e = parse_factorization("psdrank-factorization v1 1 1 1 exact\nrow a\ncol a\nrow b 0 1 1\n").unwrap_err();
        assert_eq!(e.line, 4);
        let e = parse_factorization("psdrank-factorization v1 1 1 1 exact\nrow a\ncol a\nrow a 0 1 1 1\n").unwrap_err();
        assert!(e.msg.contains("exceeds"));
        assert_eq!(parse_instance("psdrank-matrix v1 1 1\nrow a\ncol b\na b 2\n").unwrap().0.get(0, 0), int(2));
    }
}
