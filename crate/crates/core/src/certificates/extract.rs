use std::collections::HashMap;

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};

use super::factorization::{CertError, PsdFactorization, Scalar};
use crate::gadgets::{GadgetContext, LabelVector};
use crate::number::Number;
use crate::poly::{Assignment, Polynomial, VarId};

/// The leading Gram vector `√λ1 e1` of every row and column factor, after
/// checking that the second eigenvalue is at most `tol`.
pub fn rank_one_vectors<T: Scalar>(
    f: &PsdFactorization<T>,
    tol: f64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), CertError> {
    let f = f.to_float();
    let side = |row: bool| -> Result<Vec<Vec<f64>>, CertError> {
        let (lists, labels) = if row { (&f.rows, &f.row_labels) } else { (&f.cols, &f.col_labels) };
        lists
            .iter()
            .enumerate()
            .map(|(idx, list)| {
                if list.len() <= 1 {
                    return Ok(list.first().map_or(vec![0.0; f.k], |g| {
                        let s = g.weight.sqrt();
                        g.dense(f.k).into_iter().map(|c| c * s).collect()
                    }));
                }
                let g = DMatrix::from_row_slice(f.k, f.k, &f.gram_matrix(row, idx));
                let eig = SymmetricEigen::new(g);
                let mut order: Vec<usize> = (0..f.k).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
                if f.k > 1 && eig.eigenvalues[order[1]] > tol {
                    return Err(CertError::RankTooHigh {
                        label: labels[idx].clone(),
                        lambda: eig.eigenvalues[order[1]],
                    });
                }
                let lambda = eig.eigenvalues[order[0]].max(0.0).sqrt();
                Ok(eig.eigenvectors.column(order[0]).iter().map(|c| c * lambda).collect())
            })
            .collect()
    };
    Ok((side(true)?, side(false)?))
}

/// `Q(i|j) = a_i·b_j` from a factorization whose factors all have rank at
/// most one, so that `Q∘Q` is the factorized matrix.
pub fn hadamard_sqrt_from_rank1<T: Scalar>(f: &PsdFactorization<T>, tol: f64) -> Result<DMatrix<f64>, CertError> {
    let (a, b) = rank_one_vectors(f, tol)?;
    Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| a[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtractOptions {
    /// Minimum magnitude of a coordinate that must not vanish, measured
    /// on unit-normalized vectors.
    pub coord_tol: f64,
    /// Maximum `|f(y)|`.
    pub residual_tol: f64,
    /// Maximum second eigenvalue of a factor.
    pub rank_tol: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { coord_tol: 1e-7, residual_tol: 1e-6, rank_tol: 1e-9 }
    }
}

fn normalized(v: Vector3<f64>) -> Vector3<f64> {
    let n = v.norm();
    if n == 0.0 {
        v
    } else {
        v / n
    }
}

/// Reads a root of `f` off a rank-3 factorization of a completion of `C`,
/// with rows and columns labeled by `H`.
///
/// The row vectors of `(1,0,0)`, `(0,1,0)`, `(0,0,1)` are moved to the
/// standard basis and `(1,1,1)` is rescaled to `(1,1,1)`. Then the column
/// vector of `(1,0,s)` is `(1,0,s(y))` up to scale for each `s ∈ σ`.
/// Variables are recovered along the prefix chains of the monomials of `f`
/// as ratios of consecutive prefix values; variables only reachable
/// through vanishing prefixes are set to 0.
pub fn extract_root<T: Scalar>(
    ctx: &GadgetContext,
    f: &PsdFactorization<T>,
    opts: ExtractOptions,
) -> Result<Assignment, CertError> {
    if f.k != 3 {
        return Err(CertError::OutOfRange(format!("expected size 3, got {}", f.k)));
    }
    let (p, l) = rank_one_vectors(f, opts.rank_tol)?;
    let rows: HashMap<&str, usize> = f.row_labels.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let cols: HashMap<&str, usize> = f.col_labels.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let lookup = |map: &HashMap<&str, usize>, vecs: &[Vec<f64>], label: &LabelVector| {
        map.get(label.to_string().as_str())
            .map(|&i| Vector3::new(vecs[i][0], vecs[i][1], vecs[i][2]))
            .ok_or_else(|| CertError::LabelMismatch(format!("missing label {label}")))
    };
    let pv = |l: LabelVector| lookup(&rows, &p, &l);
    let basis = Matrix3::from_columns(&[
        normalized(pv(LabelVector::constant(1, 0, 0))?),
        normalized(pv(LabelVector::constant(0, 1, 0))?),
        normalized(pv(LabelVector::constant(0, 0, 1))?),
    ]);
    if basis.determinant().abs() < opts.coord_tol {
        return Err(CertError::SingularBasis);
    }
    let inv = basis.try_inverse().ok_or(CertError::SingularBasis)?;
    let diag = normalized(inv * pv(LabelVector::constant(1, 1, 1))?);
    if diag.iter().any(|c| c.abs() < opts.coord_tol) {
        return Err(CertError::VanishingCoordinate("p(1,1,1) in the new basis".into()));
    }
    // p -> D⁻¹ B⁻¹ p and l -> D Bᵀ l keep every p·l.
    let to_l = Matrix3::from_diagonal(&diag) * basis.transpose();
    let one = Polynomial::one();
    let zero = Polynomial::zero();
    let mut values: HashMap<Polynomial, f64> = HashMap::new();
    for s in ctx.sigma.elements() {
        let label = LabelVector::new(one.clone(), zero.clone(), s.clone());
        let v = normalized(to_l * lookup(&cols, &l, &label)?);
        if v[0].abs() < opts.coord_tol {
            return Err(CertError::VanishingCoordinate(format!("first coordinate of l{label}")));
        }
        if v[1].abs() > opts.residual_tol {
            return Err(CertError::RootCheck(format!("l{label} has second coordinate {:e}", v[1])));
        }
        values.insert(s.clone(), v[2] / v[0]);
    }
    let mut y: HashMap<VarId, f64> = HashMap::new();
    for term in ctx.f.terms() {
        let vars = term.vars();
        let mut prev = 1.0f64;
        for len in 1..=vars.len() {
            let prefix =
                Polynomial::from_monomial(crate::poly::Monomial::new(crate::poly::Sign::Plus, vars[..len].to_vec()));
            let cur = values[&prefix];
            if prev.abs() >= opts.coord_tol {
                y.entry(vars[len - 1]).or_insert(cur / prev);
            }
            prev = cur;
        }
    }
    let mut out = Assignment::new();
    for v in ctx.f.variables() {
        out.set(v, Number::Float(y.get(&v).copied().unwrap_or(0.0)));
    }
    let residual = ctx.f.evaluate(&out).map_err(|e| CertError::RootCheck(e.to_string()))?.to_f64().abs();
    if residual > opts.residual_tol {
        return Err(CertError::Residual { residual, tol: opts.residual_tol });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::{completion_from_root, hadamard_square_factorization, GramVector};
    use crate::number::{int, Rational};

    fn ctx(f: &str) -> GadgetContext {
        GadgetContext::new(&f.parse().unwrap()).unwrap()
    }

    fn x(a: &Assignment, i: u32) -> f64 {
        a.get(VarId::x(i)).unwrap().to_f64()
    }

    #[test]
    fn round_trip_square() {
        let c = ctx("x1*x1-1");
        for xi in [1, -1] {
            let w = completion_from_root(&c, &Assignment::from_original(&[int(xi)])).unwrap();
            let y = extract_root(&c, &w.factorization, ExtractOptions::default()).unwrap();
            assert!((x(&y, 1) - xi as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn round_trip_after_basis_change() {
        let c = ctx("x1*x2-1");
        let w = completion_from_root(&c, &Assignment::from_original(&[int(1), int(1)])).unwrap();
        let f = w.factorization.to_float();
        let b = Matrix3::new(2.0, 1.0, 0.5, -1.0, 3.0, 0.0, 0.25, 0.0, 1.5);
        let b_inv = b.try_inverse().unwrap();
        let mut g = f.clone();
        let tweak = |list: &mut Vec<GramVector<f64>>, m: &Matrix3<f64>, s: f64| {
            let v = Vector3::from_column_slice(&list[0].coords);
            list[0].coords = (m * v * s).as_slice().to_vec();
        };
        for (i, list) in g.rows.iter_mut().enumerate() {
            tweak(list, &b.transpose(), if i % 2 == 0 { -1.5 } else { 0.75 });
        }
        for (j, list) in g.cols.iter_mut().enumerate() {
            tweak(list, &b_inv, if j % 3 == 0 { 2.0 } else { -0.5 });
        }
        let y = extract_root(&c, &g, ExtractOptions::default()).unwrap();
        assert!((x(&y, 1) - 1.0).abs() < 1e-9 && (x(&y, 2) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn collinear_basis_is_singular() {
        let c = ctx("x1*x1-1");
        let w = completion_from_root(&c, &Assignment::from_original(&[int(1)])).unwrap();
        let mut f = w.factorization.clone();
        let idx = c.position(&LabelVector::constant(0, 1, 0)).unwrap();
        f.rows[idx][0].coords = vec![int(1), int(0), int(0)];
        assert_eq!(extract_root(&c, &f, ExtractOptions::default()), Err(CertError::SingularBasis));
    }

    #[test]
    fn sqrt_of_hadamard_square() {
        let pr: Vec<Vec<Rational>> = vec![vec![int(1), int(2), int(0)], vec![int(0), int(1), int(-1)]];
        let qc: Vec<Vec<Rational>> = vec![vec![int(1), int(0), int(1)], vec![int(3), int(1), int(1)]];
        let f = hadamard_square_factorization(&pr, &qc).unwrap();
        let q = hadamard_sqrt_from_rank1(&f, 1e-9).unwrap();
        let expect = [[1.0, 5.0], [-1.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((q[(i, j)].abs() - f64::abs(expect[i][j])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_two_factor_rejected() {
        let labels = vec!["1".to_string()];
        let mut f = PsdFactorization::<f64>::new(2, labels.clone(), labels);
        f.rows[0] = vec![GramVector::unit(0, vec![1.0, 0.0]), GramVector::unit(0, vec![0.0, 1.0])];
        f.cols[0] = vec![GramVector::unit(0, vec![1.0, 0.0])];
        assert!(matches!(hadamard_sqrt_from_rank1(&f, 1e-9), Err(CertError::RankTooHigh { .. })));
        let (a, _) = rank_one_vectors(
            &{
                let mut g = f.clone();
                g.rows[0] = vec![GramVector::unit(0, vec![1.0, 1.0]), GramVector::new(0, 3.0, vec![1.0, 1.0])];
                g
            },
            1e-9,
        )
        .unwrap();
        assert!((a[0][0].abs() - 2.0).abs() < 1e-12 && (a[0][1].abs() - 2.0).abs() < 1e-12);
    }
}
