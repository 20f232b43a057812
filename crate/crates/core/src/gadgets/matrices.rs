use std::collections::HashMap;

use num_traits::{One, Zero};

use super::sigma::{index_set_h, LabelVector, SigmaSet};
use crate::number::{int, Rational};
use crate::poly::{is_multiple_of, PolyError, Polynomial};

/// Entry of an incomplete matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Entry {
    Known(Rational),
    /// Any real number may be filled in.
    Unknown,
    /// Any nonzero real number may be filled in.
    NonzeroUnknown,
}

impl Entry {
    pub fn known(&self) -> Option<&Rational> {
        match self {
            Entry::Known(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_known_zero(&self) -> bool {
        matches!(self, Entry::Known(r) if r.is_zero())
    }

    pub fn is_known_one(&self) -> bool {
        matches!(self, Entry::Known(r) if r.is_one())
    }
}

/// Dense labeled matrix of [`Entry`] values.
#[derive(Clone, Debug, PartialEq)]
pub struct IncompleteMatrix {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    entries: Vec<Entry>,
}

impl IncompleteMatrix {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, fill: Entry) -> Self {
        let n = row_labels.len() * col_labels.len();
        IncompleteMatrix { row_labels, col_labels, entries: vec![fill; n] }
    }

    /// Rows of entries with labels `1..=n`.
    pub fn from_rows(rows: Vec<Vec<Entry>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        IncompleteMatrix {
            row_labels: (1..=nrows).map(|i| i.to_string()).collect(),
            col_labels: (1..=ncols).map(|i| i.to_string()).collect(),
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn get(&self, i: usize, j: usize) -> &Entry {
        &self.entries[i * self.ncols() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Entry) {
        let n = self.ncols();
        self.entries[i * n + j] = e;
    }

    pub fn transpose(&self) -> IncompleteMatrix {
        let mut t = IncompleteMatrix::new(self.col_labels.clone(), self.row_labels.clone(), Entry::Unknown);
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn count(&self, pred: impl Fn(&Entry) -> bool) -> usize {
        self.entries.iter().filter(|e| pred(e)).count()
    }

    pub fn unknown_count(&self) -> usize {
        self.count(|e| matches!(e, Entry::Unknown))
    }

    /// Positions of `Unknown` entries in row-major order.
    pub fn unknown_positions(&self) -> Vec<(usize, usize)> {
        let n = self.ncols();
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e, Entry::Unknown))
            .map(|(k, _)| (k / n, k % n))
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.nrows() == self.ncols() && (0..self.nrows()).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn max_known_abs(&self) -> Rational {
        self.entries
            .iter()
            .filter_map(Entry::known)
            .map(|r| if r < &Rational::zero() { -r.clone() } else { r.clone() })
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Matrix over the polynomial ring indexed by label vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicMatrix {
    pub rows: Vec<LabelVector>,
    pub cols: Vec<LabelVector>,
    entries: Vec<Polynomial>,
}

impl SymbolicMatrix {
    /// `entries` is row-major.
    pub fn new(rows: Vec<LabelVector>, cols: Vec<LabelVector>, entries: Vec<Polynomial>) -> Self {
        assert_eq!(entries.len(), rows.len() * cols.len(), "entry count");
        SymbolicMatrix { rows, cols, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols.len() + j]
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows.len()).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// How `B` decides that an entry is forced to zero by `f`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ZeroTest {
    /// `f` divides `u·v`.
    #[default]
    Linear,
    /// `f` divides `(u·v)^2`.
    Square,
}

/// Labels `H(f)` and the shared pieces the matrix builders need.
#[derive(Clone, Debug)]
pub struct GadgetContext {
    pub f: Polynomial,
    pub sigma: SigmaSet,
    pub labels: Vec<LabelVector>,
}

impl GadgetContext {
    pub fn new(f: &Polynomial) -> Result<Self, PolyError> {
        let sigma = SigmaSet::new(f)?;
        let labels = index_set_h(&sigma);
        Ok(GadgetContext { f: f.canonicalize(), sigma, labels })
    }

    pub fn label_strings(&self) -> Vec<String> {
        self.labels.iter().map(ToString::to_string).collect()
    }

    pub fn position(&self, label: &LabelVector) -> Option<usize> {
        self.labels.binary_search_by(|l| self.cmp_labels(l, label)).ok()
    }

    fn cmp_labels(&self, a: &LabelVector, b: &LabelVector) -> std::cmp::Ordering {
        let key = |l: &LabelVector| l.coords.clone().map(|c| self.sigma.position(&c));
        key(a).cmp(&key(b))
    }
}

/// `A(u|v) = (u·v)^2` over `H × H`.
pub fn build_a(ctx: &GadgetContext) -> SymbolicMatrix {
    let n = ctx.labels.len();
    let mut entries = vec![Polynomial::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let e = ctx.labels[i].dot(&ctx.labels[j]).square();
            entries[j * n + i] = e.clone();
            entries[i * n + j] = e;
        }
    }
    SymbolicMatrix { rows: ctx.labels.clone(), cols: ctx.labels.clone(), entries }
}

/// `B(u|v) = b` when `(u·v)^2` is the constant `b`, `0` when `f` divides
/// `u·v` (or its square, per `test`), and unknown otherwise.
pub fn build_b(ctx: &GadgetContext, test: ZeroTest) -> IncompleteMatrix {
    let labels = ctx.label_strings();
    let n = labels.len();
    let mut b = IncompleteMatrix::new(labels.clone(), labels, Entry::Unknown);
    let mut memo: HashMap<Polynomial, Entry> = HashMap::new();
    for i in 0..n {
        for j in i..n {
            let dot = ctx.labels[i].dot(&ctx.labels[j]);
            let entry = memo.entry(dot).or_insert_with_key(|dot| classify(dot, &ctx.f, test)).clone();
            b.set(j, i, entry.clone());
            b.set(i, j, entry);
        }
    }
    b
}

fn classify(dot: &Polynomial, f: &Polynomial, test: ZeroTest) -> Entry {
    if let Some(c) = dot.as_constant() {
        return Entry::Known(int(c * c));
    }
    let target = match test {
        ZeroTest::Linear => dot.clone(),
        ZeroTest::Square => dot.square(),
    };
    // f is nonzero here, so divisibility cannot fail.
    if is_multiple_of(&target, f).unwrap_or(false) {
        Entry::Known(Rational::zero())
    } else {
        Entry::Unknown
    }
}

/// Zero pattern of `B`: `0` stays, nonzero constants become
/// `NonzeroUnknown`, unknowns stay.
pub fn build_c(b: &IncompleteMatrix) -> IncompleteMatrix {
    let mut c = b.clone();
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            if let Entry::Known(r) = b.get(i, j) {
                if !r.is_zero() {
                    c.set(i, j, Entry::NonzeroUnknown);
                }
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    fn ctx(f: &str) -> GadgetContext {
        GadgetContext::new(&p(f)).unwrap()
    }

    fn idx(ctx: &GadgetContext, l: LabelVector) -> usize {
        ctx.position(&l).unwrap_or_else(|| panic!("label {l} not in H"))
    }

    #[test]
    fn unit_labels() {
        let c = ctx("x1*x1-1");
        let a = build_a(&c);
        let b = build_b(&c, ZeroTest::Linear);
        let cm = build_c(&b);
        let e = idx(&c, LabelVector::constant(1, 0, 0));
        assert_eq!(a.get(e, e), &Polynomial::one());
        assert_eq!(b.get(e, e), &Entry::Known(int(1)));
        assert_eq!(cm.get(e, e), &Entry::NonzeroUnknown);
    }

    #[test]
    fn dot_equal_to_f_is_zero() {
        let c = ctx("x1*x1-1");
        let b = build_b(&c, ZeroTest::Linear);
        let cm = build_c(&b);
        let u = idx(&c, LabelVector::constant(0, 0, 1));
        let v = idx(&c, LabelVector::new(p("1"), p("0"), p("x1*x1-1")));
        assert_eq!(b.get(u, v), &Entry::Known(int(0)));
        assert_eq!(cm.get(u, v), &Entry::Known(int(0)));
    }

    #[test]
    fn orthogonal_labels_are_zero() {
        // u = (-f, 1, 0), v = (1, f, g): u·v = 0 identically.
        let c = ctx("x1*x1-1");
        let b = build_b(&c, ZeroTest::Linear);
        let u = idx(&c, LabelVector::new(p("-x1*x1+1"), p("1"), p("0")));
        let v = idx(&c, LabelVector::new(p("1"), p("x1*x1-1"), p("x1")));
        assert_eq!(b.get(u, v), &Entry::Known(int(0)));
    }

    #[test]
    fn position_lookup_agrees_with_scan() {
        let c = ctx("x1*x2-1");
        for (i, l) in c.labels.iter().enumerate() {
            assert_eq!(c.position(l), Some(i));
        }
    }

    #[test]
    fn symmetry_and_patterns() {
        let c = ctx("x1*x1-1");
        let a = build_a(&c);
        let b = build_b(&c, ZeroTest::Linear);
        let cm = build_c(&b);
        assert!(a.is_symmetric() && b.is_symmetric() && cm.is_symmetric());
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                assert_eq!(b.get(i, j).is_known_zero(), cm.get(i, j).is_known_zero());
                let nonzero_const = matches!(b.get(i, j), Entry::Known(r) if !r.is_zero());
                assert_eq!(nonzero_const, cm.get(i, j) == &Entry::NonzeroUnknown);
                let constant = a.get(i, j).as_constant();
                assert_eq!(
                    constant.is_some(),
                    b.get(i, j).known().is_some() && !b.get(i, j).is_known_zero() || constant == Some(0)
                );
            }
        }
    }

    #[test]
    fn square_test_agrees_for_irreducible_f() {
        let c = ctx("x1*x1+x1-1");
        assert_eq!(build_b(&c, ZeroTest::Linear), build_b(&c, ZeroTest::Square));
    }

    #[test]
    fn constant_f_has_no_unknowns() {
        let c = ctx("-1");
        assert_eq!(build_b(&c, ZeroTest::Linear).unknown_count(), 0);
    }
}
