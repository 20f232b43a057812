use crate::gadgets::IncompleteMatrix;

/// Row/column quadruple `(i1, i2, j1, j2)` with
/// `S(i1,i2 | k,j1,j2) = [[0,1,0],[0,0,1]]` on known entries.
pub type SqrtQuad = (usize, usize, usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtWitness {
    /// Per column `k` of `S`.
    pub columns: Vec<Option<SqrtQuad>>,
    /// Per column of `Sᵀ`, that is per row of `S`; the quadruple indexes
    /// `Sᵀ`.
    pub rows: Vec<Option<SqrtQuad>>,
}

impl SqrtWitness {
    pub fn holds(&self) -> bool {
        self.columns.iter().chain(&self.rows).all(Option::is_some)
    }
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and_first(&self, other: &Bits) -> Option<usize> {
        self.0
            .iter()
            .zip(&other.0)
            .enumerate()
            .find(|(_, (a, b))| **a & **b != 0)
            .map(|(w, (a, b))| w * 64 + (a & b).trailing_zeros() as usize)
    }

    fn and_iter<'a>(&'a self, other: &'a Bits) -> impl Iterator<Item = usize> + 'a {
        self.0.iter().zip(&other.0).enumerate().flat_map(|(w, (a, b))| {
            let mut x = a & b;
            std::iter::from_fn(move || {
                (x != 0).then(|| {
                    let t = x.trailing_zeros() as usize;
                    x &= x - 1;
                    w * 64 + t
                })
            })
        })
    }
}

/// Witnesses for every column of `s`, `None` where none exists.
fn column_witnesses(s: &IncompleteMatrix) -> Vec<Option<SqrtQuad>> {
    let (n, m) = (s.nrows(), s.ncols());
    let mut zero: Vec<Bits> = (0..n).map(|_| Bits::new(m)).collect();
    let mut one: Vec<Bits> = (0..n).map(|_| Bits::new(m)).collect();
    for i in 0..n {
        for j in 0..m {
            let e = s.get(i, j);
            if e.is_known_zero() {
                zero[i].set(j);
            } else if e.is_known_one() {
                one[i].set(j);
            }
        }
    }
    let mut out = vec![None; m];
    let mut missing = m;
    'pairs: for i1 in 0..n {
        for i2 in i1 + 1..n {
            let Some(j1) = one[i1].and_first(&zero[i2]) else {
                continue;
            };
            let Some(j2) = zero[i1].and_first(&one[i2]) else {
                continue;
            };
            for k in zero[i1].and_iter(&zero[i2]) {
                if out[k].is_none() {
                    out[k] = Some((i1, i2, j1, j2));
                    missing -= 1;
                    if missing == 0 {
                        break 'pairs;
                    }
                }
            }
        }
    }
    out
}

/// Exhaustive sqrt-condition search on `S` and `Sᵀ`. Row pairs are tried
/// in lexicographic order and the first pair covering a column is kept.
pub fn sqrt_condition_check(s: &IncompleteMatrix) -> SqrtWitness {
    let columns = column_witnesses(s);
    if columns.iter().any(Option::is_none) {
        return SqrtWitness { columns, rows: vec![None; s.nrows()] };
    }
    let rows = column_witnesses(&s.transpose());
    SqrtWitness { columns, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{build_b, Entry, GadgetContext, ZeroTest};
    use crate::number::int;

    fn k(v: i64) -> Entry {
        Entry::Known(int(v))
    }

    fn check_quad(s: &IncompleteMatrix, col: usize, (i1, i2, j1, j2): SqrtQuad) {
        let got: Vec<&Entry> =
            [(i1, col), (i1, j1), (i1, j2), (i2, col), (i2, j1), (i2, j2)].iter().map(|&(i, j)| s.get(i, j)).collect();
        assert_eq!(got, vec![&k(0), &k(1), &k(0), &k(0), &k(0), &k(1)]);
    }

    #[test]
    fn b_satisfies_condition() {
        let f = "x1*x1-1".parse().unwrap();
        let b = build_b(&GadgetContext::new(&f).unwrap(), ZeroTest::Linear);
        let w = sqrt_condition_check(&b);
        assert!(w.holds());
        for (c, q) in w.columns.iter().enumerate() {
            check_quad(&b, c, q.unwrap());
        }
        let bt = b.transpose();
        for (c, q) in w.rows.iter().enumerate() {
            check_quad(&bt, c, q.unwrap());
        }
    }

    #[test]
    fn lone_pattern_fails() {
        let s = IncompleteMatrix::from_rows(vec![vec![k(0), k(1), k(0)], vec![k(0), k(0), k(1)]]);
        let w = sqrt_condition_check(&s);
        assert!(!w.holds());
        assert_eq!(w.columns[0], Some((0, 1, 1, 2)));
    }

    #[test]
    fn unknowns_never_witness() {
        let s = IncompleteMatrix::from_rows(vec![vec![Entry::Unknown; 3]; 3]);
        assert!(!sqrt_condition_check(&s).holds());
    }

    #[test]
    fn identity_block_pattern() {
        // [[0,1,0],[0,0,1]] stacked with its own transpose pattern.
        let rows: Vec<Vec<Entry>> = [[0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0], [0, 0, 0, 1]]
            .iter()
            .map(|r| r.iter().map(|&v| k(v)).collect())
            .collect();
        let s = IncompleteMatrix::from_rows(rows);
        assert!(sqrt_condition_check(&s).holds());
    }
}
