use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::matrices::{Entry, IncompleteMatrix};
use crate::number::{int, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GadgetError {
    #[error("alpha = {0} is outside [0, 4]")]
    AlphaOutOfRange(Rational),
    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("entry ({0}, {1}) is nonzero-unknown")]
    NonzeroUnknown(usize, usize),
    #[error("entry ({row}, {col}) = {value} is outside [0, K = {k}]")]
    EntryOutOfRange { row: usize, col: usize, value: Rational, k: Rational },
    #[error("K must be positive")]
    NonPositiveK,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("duplicate label {0}")]
    DuplicateLabel(String),
    #[error("negative entry at ({0}, {1})")]
    NegativeEntry(usize, usize),
}

/// Sparse nonnegative rational matrix with string labels. Only positive
/// entries are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceMatrix {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    entries: BTreeMap<(usize, usize), Rational>,
}

impl InstanceMatrix {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self, GadgetError> {
        check_unique(&row_labels)?;
        check_unique(&col_labels)?;
        Ok(InstanceMatrix { row_labels, col_labels, entries: BTreeMap::new() })
    }

    /// Dense rows with labels `1..=n`. Negative entries are rejected.
    pub fn from_dense(rows: &[Vec<Rational>]) -> Result<Self, GadgetError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = InstanceMatrix::new(
            (1..=nrows).map(|i| i.to_string()).collect(),
            (1..=ncols).map(|i| i.to_string()).collect(),
        )?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(GadgetError::Dimension(format!("row {} has {} entries", i + 1, row.len())));
            }
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone())?;
            }
        }
        Ok(m)
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self, GadgetError> {
        let rows: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
        InstanceMatrix::from_dense(&rows)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = InstanceMatrix::from_dense(&vec![vec![Rational::zero(); n]; n]).unwrap();
        for i in 0..n {
            m.entries.insert((i, i), Rational::one());
        }
        m
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

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) -> Result<(), GadgetError> {
        if i >= self.nrows() || j >= self.ncols() {
            return Err(GadgetError::Dimension(format!("({i}, {j}) outside {}x{}", self.nrows(), self.ncols())));
        }
        if v.is_negative() {
            return Err(GadgetError::NegativeEntry(i, j));
        }
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
        Ok(())
    }

    /// Positive entries in row-major order.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.entries.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut out = vec![vec![Rational::zero(); self.ncols()]; self.nrows()];
        for (i, j, v) in self.nonzeros() {
            out[i][j] = v.clone();
        }
        out
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols()]; self.nrows()];
        for (i, j, v) in self.nonzeros() {
            out[i][j] = crate::number::rational_to_f64(v);
        }
        out
    }

    pub fn max_entry(&self) -> Rational {
        self.entries.values().max().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn row_index(&self) -> HashMap<&str, usize> {
        self.row_labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
    }

    pub fn col_index(&self) -> HashMap<&str, usize> {
        self.col_labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
    }

    /// Entrywise sum; labels must agree.
    pub fn add(&self, other: &InstanceMatrix) -> Result<InstanceMatrix, GadgetError> {
        if self.row_labels != other.row_labels || self.col_labels != other.col_labels {
            return Err(GadgetError::Dimension("label sets differ".into()));
        }
        let mut out = self.clone();
        for (i, j, v) in other.nonzeros() {
            let s = out.get(i, j) + v;
            out.entries.insert((i, j), s);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> InstanceMatrix {
        let mut out = self.clone();
        if c.is_zero() {
            out.entries.clear();
        } else {
            out.entries.values_mut().for_each(|v| *v = &*v * c);
        }
        out
    }
}

fn check_unique(labels: &[String]) -> Result<(), GadgetError> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(GadgetError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// `P(α) = [[α,1,1],[1,1,0],[1,0,1]]`, PSD rank two for `α ∈ [0,4]`.
pub fn build_p(alpha: &Rational) -> Result<InstanceMatrix, GadgetError> {
    if alpha.is_negative() || alpha > &int(4) {
        return Err(GadgetError::AlphaOutOfRange(alpha.clone()));
    }
    let one = Rational::one();
    let zero = Rational::zero();
    InstanceMatrix::from_dense(&[
        vec![alpha.clone(), one.clone(), one.clone()],
        vec![one.clone(), one.clone(), zero.clone()],
        vec![one.clone(), zero, one],
    ])
}

/// Label of the two auxiliary indices `e¹`, `e²` of an unknown at `(i, j)`.
pub fn unknown_label(which: u8, row: &str, col: &str) -> String {
    format!("E{which}[{row}|{col}]")
}

/// The completion gadget `M(S, K)`.
///
/// Rows and columns are `E¹`, then `E²`, then the `n` labels of `S`. Known
/// entries of `S` are copied; every unknown `e = (i, j)` gets `K·P(1)` on
/// `{i, e¹, e²} × {j, e¹, e²}`.
pub fn build_m(s: &IncompleteMatrix, k: &Rational) -> Result<InstanceMatrix, GadgetError> {
    if s.nrows() != s.ncols() {
        return Err(GadgetError::NotSquare(s.nrows(), s.ncols()));
    }
    if !k.is_positive() {
        return Err(GadgetError::NonPositiveK);
    }
    let n = s.nrows();
    let unknowns = s.unknown_positions();
    let nk = unknowns.len();
    let rl = s.row_labels();
    let cl = s.col_labels();
    let mut rows = Vec::with_capacity(2 * nk + n);
    let mut cols = Vec::with_capacity(2 * nk + n);
    for which in [1u8, 2] {
        for &(i, j) in &unknowns {
            let l = unknown_label(which, &rl[i], &cl[j]);
            rows.push(l.clone());
            cols.push(l);
        }
    }
    rows.extend(rl.iter().cloned());
    cols.extend(cl.iter().cloned());
    let mut m = InstanceMatrix::new(rows, cols)?;
    let base = 2 * nk;
    for i in 0..n {
        for j in 0..n {
            match s.get(i, j) {
                Entry::Known(v) => {
                    if v.is_negative() || v > k {
                        return Err(GadgetError::EntryOutOfRange { row: i, col: j, value: v.clone(), k: k.clone() });
                    }
                    m.set(base + i, base + j, v.clone())?;
                }
                Entry::NonzeroUnknown => return Err(GadgetError::NonzeroUnknown(i, j)),
                Entry::Unknown => {}
            }
        }
    }
    for (idx, &(i, j)) in unknowns.iter().enumerate() {
        let r = [base + i, idx, nk + idx];
        let c = [base + j, idx, nk + idx];
        for (a, &ri) in r.iter().enumerate() {
            for (b, &cj) in c.iter().enumerate() {
                if a == 0 || b == 0 || a == b {
                    m.set(ri, cj, k.clone())?;
                }
            }
        }
    }
    Ok(m)
}

/// The G-gadget
///
/// ```text
/// [ S  b  0  0 ]
/// [ c  N  N  N ]
/// [ 0  N  N  0 ]
/// [ 0  N  0  N ]
/// ```
///
/// with rows `1..n, n+1, nu1, nu2`. That is `n + 3` rows for an `n × n`
/// block `S`.
pub fn build_g(s: &[Vec<Rational>], b: &[Rational], c: &[Rational], big_n: u64) -> Result<InstanceMatrix, GadgetError> {
    let n = s.len();
    if s.iter().any(|r| r.len() != n) || b.len() != n || c.len() != n {
        return Err(GadgetError::Dimension(format!(
            "S must be n x n with b and c of length n (n = {n}, |b| = {}, |c| = {})",
            b.len(),
            c.len()
        )));
    }
    if big_n == 0 {
        return Err(GadgetError::Dimension("N must be positive".into()));
    }
    let nn = Rational::from_integer(big_n.into());
    let mut labels: Vec<String> = (1..=n + 1).map(|i| i.to_string()).collect();
    labels.push("nu1".into());
    labels.push("nu2".into());
    let mut g = InstanceMatrix::new(labels.clone(), labels)?;
    for i in 0..n {
        for j in 0..n {
            g.set(i, j, s[i][j].clone())?;
        }
        g.set(i, n, b[i].clone())?;
        g.set(n, i, c[i].clone())?;
    }
    for (i, j) in [(n, n), (n, n + 1), (n, n + 2), (n + 1, n), (n + 1, n + 1), (n + 2, n), (n + 2, n + 2)] {
        g.set(i, j, nn.clone())?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::rational;

    #[test]
    fn p_alpha_shape() {
        assert_eq!(
            build_p(&int(1)).unwrap(),
            InstanceMatrix::from_ints(&[&[1, 1, 1], &[1, 1, 0], &[1, 0, 1]]).unwrap()
        );
        assert_eq!(build_p(&int(0)).unwrap().get(0, 0), int(0));
        assert_eq!(build_p(&int(4)).unwrap().get(0, 0), int(4));
        assert!(build_p(&rational(9, 2)).is_err());
        assert!(build_p(&int(-1)).is_err());
    }

    #[test]
    fn m_single_unknown() {
        let s = IncompleteMatrix::from_rows(vec![
            vec![Entry::Unknown, Entry::Known(int(0))],
            vec![Entry::Known(int(0)), Entry::Known(int(1))],
        ]);
        let m = build_m(&s, &int(2)).unwrap();
        assert_eq!(m.nrows(), 4);
        assert_eq!(m.row_labels(), &["E1[1|1]", "E2[1|1]", "1", "2"]);
        let dense = m.to_dense();
        let expected: Vec<Vec<Rational>> = [[2, 0, 2, 0], [0, 2, 2, 0], [2, 2, 2, 0], [0, 0, 0, 1]]
            .iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect();
        assert_eq!(dense, expected);
    }

    #[test]
    fn m_dimension_and_known_copy() {
        let mut s = IncompleteMatrix::from_rows(vec![vec![Entry::Known(int(1)); 3]; 3]);
        assert_eq!(build_m(&s, &int(1)).unwrap().to_dense(), vec![vec![int(1); 3]; 3]);
        s.set(0, 2, Entry::Unknown);
        let m = build_m(&s, &int(5)).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (5, 5));
        assert_eq!(m.get(2, 4), int(5));
        assert_eq!(m.get(3, 3), int(1));
    }

    #[test]
    fn m_rejects_bad_input() {
        let s = IncompleteMatrix::from_rows(vec![vec![Entry::Known(int(3))]]);
        assert!(matches!(build_m(&s, &int(2)), Err(GadgetError::EntryOutOfRange { .. })));
        let s = IncompleteMatrix::from_rows(vec![vec![Entry::NonzeroUnknown]]);
        assert!(matches!(build_m(&s, &int(2)), Err(GadgetError::NonzeroUnknown(0, 0))));
        let s = IncompleteMatrix::from_rows(vec![vec![Entry::Unknown, Entry::Unknown]]);
        assert!(matches!(build_m(&s, &int(2)), Err(GadgetError::NotSquare(1, 2))));
    }

    #[test]
    fn g_blocks() {
        let g = build_g(&[vec![int(1)]], &[int(1)], &[int(1)], 1).unwrap();
        assert_eq!(g, {
            let mut e =
                InstanceMatrix::from_ints(&[&[1, 1, 0, 0], &[1, 1, 1, 1], &[0, 1, 1, 0], &[0, 1, 0, 1]]).unwrap();
            e.row_labels = vec!["1".into(), "2".into(), "nu1".into(), "nu2".into()];
            e.col_labels = e.row_labels.clone();
            e
        });
        let g0 = build_g(&[vec![int(0)]], &[int(0)], &[int(0)], 2).unwrap();
        let tail: Vec<Vec<Rational>> = g0.to_dense()[1..].iter().map(|r| r[1..].to_vec()).collect();
        assert_eq!(tail, build_p(&int(1)).unwrap().scale(&int(2)).to_dense());
        assert!(build_g(&[vec![int(0)]], &[], &[int(0)], 1).is_err());
    }
}
