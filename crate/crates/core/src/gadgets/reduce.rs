use thiserror::Error;

use super::instance::{build_m, GadgetError, InstanceMatrix};
use super::matrices::{build_b, GadgetContext, IncompleteMatrix, ZeroTest};
use crate::number::{int, Rational};
use crate::poly::{PolyError, Polynomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReduceError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
}

/// `K = 9 s^4` with `s` the number of terms of `f`.
pub fn compute_k(f: &Polynomial) -> Result<u64, PolyError> {
    let s = f.length()? as u64;
    Ok(9 * s.pow(4))
}

#[derive(Clone, Debug)]
pub struct ReductionOutput {
    pub m: InstanceMatrix,
    /// Target PSD rank `2k + 3`.
    pub r: usize,
    /// Number of unknown entries of `B`.
    pub k: usize,
    pub big_k: u64,
    pub ctx: GadgetContext,
    pub b: IncompleteMatrix,
    /// `key=value` records of the intermediate sizes.
    pub trace: Vec<String>,
}

/// `f ↦ (M(B(f), K), 2k + 3)`.
pub fn reduce(f: &Polynomial, test: ZeroTest) -> Result<ReductionOutput, ReduceError> {
    let ctx = GadgetContext::new(f)?;
    let b = build_b(&ctx, test);
    let k = b.unknown_count();
    let big_k = compute_k(f)?;
    let m = build_m(&b, &Rational::from(int(big_k as i64)))?;
    let trace = vec![
        format!("f={}", ctx.f),
        format!("length={}", ctx.f.length()?),
        format!("sigma={}", ctx.sigma.len()),
        format!("H={}", ctx.labels.len()),
        format!(
            "zero_test={}",
            match test {
                ZeroTest::Linear => "linear",
                ZeroTest::Square => "square",
            }
        ),
        format!("unknowns={k}"),
        format!("K={big_k}"),
        format!("dim={}", m.nrows()),
        format!("nnz={}", m.nnz()),
        format!("r={}", 2 * k + 3),
    ];
    Ok(ReductionOutput { m, r: 2 * k + 3, k, big_k, ctx, b, trace })
}
