use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::factorization::{CertError, GramVector, PsdFactorization, Scalar};
use crate::gadgets::{GadgetContext, InstanceMatrix, ReductionOutput};
use crate::number::{int, Number, Rational};
use crate::poly::{Assignment, Polynomial};

fn check_alpha(alpha: &Rational) -> Result<(), CertError> {
    if alpha.is_negative() || alpha > &int(4) {
        return Err(CertError::OutOfRange(format!("alpha = {alpha} is outside [0, 4]")));
    }
    Ok(())
}

/// Gram vectors of `scale·P(α)` at size 2 placed at `offset`, as
/// `(rows, cols)` for the labels `(i, e¹, e²)` and `(j, e¹, e²)`.
///
/// Rows are `(1,1)`, `(1,0)`, `(0,1)` with weight `scale`. Column `j`
/// carries `(1,b)(1,b)ᵀ + (1-b²)(0,1)(0,1)ᵀ` with `b = (α-2)/2`, and the
/// other two columns are `(1,0)`, `(0,1)`.
fn p_alpha_blocks(
    alpha: &Rational,
    scale: &Rational,
    offset: usize,
) -> ([GramVector<Rational>; 3], [Vec<GramVector<Rational>>; 3]) {
    let (zero, one) = (Rational::zero(), Rational::one());
    let b = (alpha - int(2)) / int(2);
    let rest = &one - &b * &b;
    let v = |x: &Rational, y: &Rational| vec![x.clone(), y.clone()];
    let rows = [
        GramVector::new(offset, scale.clone(), v(&one, &one)),
        GramVector::new(offset, scale.clone(), v(&one, &zero)),
        GramVector::new(offset, scale.clone(), v(&zero, &one)),
    ];
    let mut first = vec![GramVector::unit(offset, v(&one, &b))];
    if !rest.is_zero() {
        first.push(GramVector::new(offset, rest, v(&zero, &one)));
    }
    let cols = [first, vec![GramVector::unit(offset, v(&one, &zero))], vec![GramVector::unit(offset, v(&zero, &one))]];
    (rows, cols)
}

/// Exact size-2 factorization of `P(α)`, `α ∈ [0, 4]`.
pub fn p_alpha_factorization(alpha: &Rational) -> Result<PsdFactorization<Rational>, CertError> {
    check_alpha(alpha)?;
    let labels: Vec<String> = (1..=3).map(|i| i.to_string()).collect();
    let mut f = PsdFactorization::new(2, labels.clone(), labels);
    let (rows, cols) = p_alpha_blocks(alpha, &Rational::one(), 0);
    for (t, g) in rows.into_iter().enumerate() {
        f.rows[t].push(g);
    }
    for (t, c) in cols.into_iter().enumerate() {
        f.cols[t] = c;
    }
    Ok(f)
}

/// Factorization of `(PQ)∘(PQ)` at size `r`: row `i` gets the single Gram
/// vector `P[i]`, column `j` gets `Q[.., j]` (given as `q_cols[j]`).
pub fn hadamard_square_factorization<T: Scalar>(
    p_rows: &[Vec<T>],
    q_cols: &[Vec<T>],
) -> Result<PsdFactorization<T>, CertError> {
    let r = p_rows.first().or(q_cols.first()).map_or(0, Vec::len);
    if p_rows.iter().chain(q_cols).any(|v| v.len() != r) {
        return Err(CertError::OutOfRange("inner dimensions differ".into()));
    }
    let rl = (1..=p_rows.len()).map(|i| i.to_string()).collect();
    let cl = (1..=q_cols.len()).map(|i| i.to_string()).collect();
    let mut f = PsdFactorization::new(r, rl, cl);
    for (i, p) in p_rows.iter().enumerate() {
        f.rows[i].push(GramVector::unit(0, p.clone()));
    }
    for (j, q) in q_cols.iter().enumerate() {
        f.cols[j].push(GramVector::unit(0, q.clone()));
    }
    Ok(f)
}

/// The rank-3 completion `B'(u|v) = ((u·v)(ξ))^2` of `B` together with
/// its Hadamard-square factorization.
#[derive(Clone, Debug)]
pub struct CompletionWitness {
    pub b_prime: InstanceMatrix,
    pub factorization: PsdFactorization<Rational>,
    /// `u(ξ)` for every label `u ∈ H`.
    pub label_values: Vec<[Rational; 3]>,
}

fn exact_point(xi: &Assignment) -> Result<Assignment, CertError> {
    xi.iter()
        .map(|(&v, n)| match n {
            Number::Exact(_) => Ok((v, n.clone())),
            Number::Float(x) => BigRational::from_float(*x)
                .map(|r| (v, Number::Exact(r)))
                .ok_or_else(|| CertError::OutOfRange(format!("{v} = {x} is not finite"))),
        })
        .collect()
}

pub const ROOT_TOL: f64 = 1e-12;

pub fn completion_from_root(ctx: &GadgetContext, xi: &Assignment) -> Result<CompletionWitness, CertError> {
    let xi = exact_point(xi)?;
    for v in ctx.f.variables() {
        let val = xi.get(v).ok_or_else(|| CertError::RootCheck(format!("{v} is unbound")))?;
        if val.abs().to_f64() > 1.0 {
            return Err(CertError::OutOfRange(format!("{v} = {val} is outside [-1, 1]")));
        }
    }
    let eval = |p: &Polynomial| -> Result<Rational, CertError> {
        match p.evaluate(&xi).map_err(|e| CertError::RootCheck(e.to_string()))? {
            Number::Exact(r) => Ok(r),
            Number::Float(_) => unreachable!("exact point"),
        }
    };
    let fv = eval(&ctx.f)?;
    if crate::number::rational_to_f64(&fv.abs()) > ROOT_TOL {
        return Err(CertError::RootCheck(format!("f(xi) = {fv}")));
    }
    let sigma_vals: Vec<Rational> = ctx.sigma.elements().iter().map(eval).collect::<Result<_, _>>()?;
    let label_values: Vec<[Rational; 3]> = ctx
        .labels
        .iter()
        .map(|l| l.coords.clone().map(|c| sigma_vals[ctx.sigma.position(&c).expect("label over sigma")].clone()))
        .collect();
    let labels = ctx.label_strings();
    let mut b_prime = InstanceMatrix::new(labels.clone(), labels.clone()).expect("H labels are distinct");
    for (i, u) in label_values.iter().enumerate() {
        for (j, v) in label_values.iter().enumerate() {
            let d = &u[0] * &v[0] + &u[1] * &v[1] + &u[2] * &v[2];
            b_prime.set(i, j, &d * &d).expect("square is nonnegative");
        }
    }
    let vecs: Vec<Vec<Rational>> = label_values.iter().map(|v| v.to_vec()).collect();
    let mut factorization = hadamard_square_factorization(&vecs, &vecs)?;
    factorization.row_labels = labels.clone();
    factorization.col_labels = labels;
    Ok(CompletionWitness { b_prime, factorization, label_values })
}

/// Size-`2k+3` factorization of `M(B, K)` from a completion `B'`.
///
/// `M - Ĉ` splits into the blocks `K·P(α_e)` with `α_e = (K - B'(e))/K`;
/// `Ĉ` uses coordinates `0..3` and unknown number `t` uses `3+2t..5+2t`.
pub fn assemble_instance_witness(
    red: &ReductionOutput,
    completion: &CompletionWitness,
) -> Result<PsdFactorization<Rational>, CertError> {
    let n = red.ctx.labels.len();
    let unknowns = red.b.unknown_positions();
    let nk = unknowns.len();
    let base = 2 * nk;
    let big_k = int(red.big_k as i64);
    let mut f = PsdFactorization::new(2 * nk + 3, red.m.row_labels().to_vec(), red.m.col_labels().to_vec());
    for h in 0..n {
        let v = completion.label_values[h].to_vec();
        f.rows[base + h].push(GramVector::unit(0, v.clone()));
        f.cols[base + h].push(GramVector::unit(0, v));
    }
    for (t, &(i, j)) in unknowns.iter().enumerate() {
        let bij = completion.b_prime.get(i, j);
        if bij > big_k {
            return Err(CertError::OutOfRange(format!("B'({i}, {j}) = {bij} exceeds K = {big_k}")));
        }
        let alpha = (&big_k - bij) / &big_k;
        let (rows, cols) = p_alpha_blocks(&alpha, &big_k, 3 + 2 * t);
        let [r0, r1, r2] = rows;
        let [c0, c1, c2] = cols;
        f.rows[base + i].push(r0);
        f.rows[t].push(r1);
        f.rows[nk + t].push(r2);
        f.cols[base + j].extend(c0);
        f.cols[t].extend(c1);
        f.cols[nk + t].extend(c2);
    }
    Ok(f)
}
