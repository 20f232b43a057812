use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::gadgets::InstanceMatrix;
use crate::number::{rational_to_f64, Number, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertError {
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("vector of length {len} at offset {offset} exceeds size {k}")]
    VectorLength { offset: usize, len: usize, k: usize },
    #[error("negative weight on {0}")]
    NegativeWeight(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("root check failed: {0}")]
    RootCheck(String),
    #[error("p-basis is singular")]
    SingularBasis,
    #[error("coordinate vanishes: {0}")]
    VanishingCoordinate(String),
    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },
    #[error("factor of {label} has numerical rank >= 2 (second eigenvalue {lambda:e})")]
    RankTooHigh { label: String, lambda: f64 },
    #[error("invalid search input: {0}")]
    Search(String),
}

/// Scalars a factorization can be written over.
pub trait Scalar: Clone + fmt::Debug + PartialEq + PartialOrd + Signed + Send + Sync + 'static {
    const MODE: Mode;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn to_number(&self) -> Number;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn to_number(&self) -> Number {
        Number::Exact(self.clone())
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_number(&self) -> Number {
        Number::Float(*self)
    }
}

/// One rank-one term `weight · v vᵀ` of a Gram matrix, with `v` zero
/// outside `offset..offset + coords.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramVector<T> {
    pub offset: usize,
    pub weight: T,
    pub coords: Vec<T>,
}

impl<T: Scalar> GramVector<T> {
    pub fn new(offset: usize, weight: T, coords: Vec<T>) -> Self {
        GramVector { offset, weight, coords }
    }

    pub fn unit(offset: usize, coords: Vec<T>) -> Self {
        GramVector { offset, weight: T::one(), coords }
    }

    fn end(&self) -> usize {
        self.offset + self.coords.len()
    }

    fn dot(&self, other: &GramVector<T>) -> T {
        let lo = self.offset.max(other.offset);
        let hi = self.end().min(other.end());
        let mut acc = T::zero();
        for t in lo..hi {
            acc = acc + self.coords[t - self.offset].clone() * other.coords[t - other.offset].clone();
        }
        acc
    }

    /// Dense copy of `coords` in a length-`k` vector.
    pub fn dense(&self, k: usize) -> Vec<T> {
        let mut v = vec![T::zero(); k];
        for (t, c) in self.coords.iter().enumerate() {
            v[self.offset + t] = c.clone();
        }
        v
    }
}

/// A PSD factorization of size `k`: row label `i` carries
/// `B_i = Σ w vvᵀ` and column label `j` carries `C_j`, so that the
/// represented matrix is `tr(B_i C_j) = Σ w w' (v·v')^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdFactorization<T> {
    pub k: usize,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub rows: Vec<Vec<GramVector<T>>>,
    pub cols: Vec<Vec<GramVector<T>>>,
}

impl<T: Scalar> PsdFactorization<T> {
    pub fn new(k: usize, row_labels: Vec<String>, col_labels: Vec<String>) -> Self {
        let rows = vec![Vec::new(); row_labels.len()];
        let cols = vec![Vec::new(); col_labels.len()];
        PsdFactorization { k, row_labels, col_labels, rows, cols }
    }

    pub fn mode(&self) -> Mode {
        T::MODE
    }

    /// Checks vector bounds and weight signs.
    pub fn validate(&self) -> Result<(), CertError> {
        if self.rows.len() != self.row_labels.len() || self.cols.len() != self.col_labels.len() {
            return Err(CertError::LabelMismatch("vector lists and labels differ in length".into()));
        }
        let sides = [("row", &self.row_labels, &self.rows), ("col", &self.col_labels, &self.cols)];
        for (side, labels, lists) in sides {
            for (label, list) in labels.iter().zip(lists) {
                for g in list {
                    if g.end() > self.k {
                        return Err(CertError::VectorLength { offset: g.offset, len: g.coords.len(), k: self.k });
                    }
                    if g.weight.is_negative() {
                        return Err(CertError::NegativeWeight(format!("{side} {label}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// `tr(B_i C_j)`.
    pub fn entry(&self, i: usize, j: usize) -> T {
        let (ri, cj) = (&self.rows[i], &self.cols[j]);
        if ri.len() * cj.len() <= 64 {
            let mut acc = T::zero();
            for u in ri {
                for v in cj {
                    acc = acc + pair_term(u, v);
                }
            }
            return acc;
        }
        overlap_sum(&by_offset(ri), &by_offset(cj))
    }

    /// Per-label dense Gram matrix `Σ w vvᵀ` (`k × k`, row-major).
    pub fn gram_matrix(&self, row_side: bool, idx: usize) -> Vec<T> {
        let list = if row_side { &self.rows[idx] } else { &self.cols[idx] };
        let k = self.k;
        let mut g = vec![T::zero(); k * k];
        for v in list {
            let d = v.dense(k);
            for a in 0..k {
                for b in 0..k {
                    g[a * k + b] = g[a * k + b].clone() + v.weight.clone() * d[a].clone() * d[b].clone();
                }
            }
        }
        g
    }

    pub fn to_float(&self) -> PsdFactorization<f64> {
        let conv = |l: &Vec<GramVector<T>>| -> Vec<GramVector<f64>> {
            l.iter()
                .map(|g| GramVector::new(g.offset, g.weight.to_f64(), g.coords.iter().map(Scalar::to_f64).collect()))
                .collect()
        };
        PsdFactorization {
            k: self.k,
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            rows: self.rows.iter().map(conv).collect(),
            cols: self.cols.iter().map(conv).collect(),
        }
    }
}

fn pair_term<T: Scalar>(u: &GramVector<T>, v: &GramVector<T>) -> T {
    let d = u.dot(v);
    if d.is_zero() {
        return T::zero();
    }
    u.weight.clone() * v.weight.clone() * d.clone() * d
}

fn by_offset<T>(l: &[GramVector<T>]) -> Vec<&GramVector<T>> {
    let mut v: Vec<&GramVector<T>> = l.iter().collect();
    if !v.is_sorted_by_key(|g| g.offset) {
        v.sort_by_key(|g| g.offset);
    }
    v
}

// Both lists sorted by offset. For each `u`, candidates start after the
// longest prefix of `b` ending before `u` and stop at the first vector
// starting past `u`; both bounds only move forward.
fn overlap_sum<T: Scalar>(a: &[&GramVector<T>], b: &[&GramVector<T>]) -> T {
    let mut prefix_end = Vec::with_capacity(b.len());
    let mut m = 0;
    for g in b {
        m = m.max(g.end());
        prefix_end.push(m);
    }
    let (mut lo, mut hi) = (0, 0);
    let mut acc = T::zero();
    for u in a {
        while lo < b.len() && prefix_end[lo] <= u.offset {
            lo += 1;
        }
        while hi < b.len() && b[hi].offset < u.end() {
            hi += 1;
        }
        for v in &b[lo..hi.max(lo)] {
            if v.end() > u.offset {
                acc = acc + pair_term(u, v);
            }
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Full,
    Sampled { seed: u64, count: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub mode: VerifyMode,
    pub checked: usize,
    /// Exact in exact mode.
    pub max_residual: Number,
    pub worst: Option<(usize, usize)>,
    pub tol: f64,
    pub pass: bool,
}

/// SplitMix64: `state += 0x9E3779B97F4A7C15`, then
/// `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`,
/// `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`, `z ^ (z >> 31)`.
/// Sampled verification draws `(row, col)` as two successive outputs
/// reduced with Lemire's multiply-shift `(x * n) >> 64`.
#[derive(Clone, Debug)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

/// Checks `A(i|j) = tr(B_i C_j)` on every entry or on a seeded sample.
pub fn verify_factorization<T: Scalar>(
    a: &InstanceMatrix,
    f: &PsdFactorization<T>,
    mode: VerifyMode,
    tol: f64,
) -> Result<VerificationReport, CertError> {
    if a.row_labels() != f.row_labels.as_slice() || a.col_labels() != f.col_labels.as_slice() {
        return Err(CertError::LabelMismatch("matrix and factorization labels differ".into()));
    }
    f.validate()?;
    let (n, m) = (a.nrows(), a.ncols());
    let pairs: Vec<(usize, usize)> = match mode {
        VerifyMode::Full => (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect(),
        VerifyMode::Sampled { seed, count } => {
            let mut rng = SplitMix64::new(seed);
            if n == 0 || m == 0 {
                Vec::new()
            } else {
                (0..count).map(|_| (rng.below(n), rng.below(m))).collect()
            }
        }
    };
    let target = |i: usize, j: usize| T::from_rational(&a.get(i, j));
    let mut worst: Option<(T, (usize, usize))> = None;
    for &(i, j) in &pairs {
        let r = (f.entry(i, j) - target(i, j)).abs();
        if worst.as_ref().is_none_or(|(w, _)| &r > w) {
            worst = Some((r, (i, j)));
        }
    }
    let (max_residual, worst) = match worst {
        Some((r, at)) => (r.to_number(), Some(at)),
        None => (T::zero().to_number(), None),
    };
    let pass = match &max_residual {
        Number::Exact(r) => r.is_zero() || rational_to_f64(r) <= tol,
        Number::Float(x) => *x <= tol,
    };
    Ok(VerificationReport { mode, checked: pairs.len(), max_residual, worst, tol, pass })
}

/// Block-diagonal sum: `F1`'s vectors keep their coordinates, `F2`'s are
/// shifted by `F1.k`. Represents `A1 + A2` at size `k1 + k2`.
pub fn direct_sum<T: Scalar>(
    f1: &PsdFactorization<T>,
    f2: &PsdFactorization<T>,
) -> Result<PsdFactorization<T>, CertError> {
    if f1.row_labels != f2.row_labels || f1.col_labels != f2.col_labels {
        return Err(CertError::LabelMismatch("direct sum operands have different labels".into()));
    }
    let shift = |l: &Vec<GramVector<T>>| -> Vec<GramVector<T>> {
        l.iter().map(|g| GramVector::new(g.offset + f1.k, g.weight.clone(), g.coords.clone())).collect()
    };
    let join = |a: &[Vec<GramVector<T>>], b: &[Vec<GramVector<T>>]| -> Vec<Vec<GramVector<T>>> {
        a.iter().zip(b).map(|(x, y)| x.iter().cloned().chain(shift(y)).collect()).collect()
    };
    Ok(PsdFactorization {
        k: f1.k + f2.k,
        row_labels: f1.row_labels.clone(),
        col_labels: f1.col_labels.clone(),
        rows: join(&f1.rows, &f2.rows),
        cols: join(&f1.cols, &f2.cols),
    })
}
