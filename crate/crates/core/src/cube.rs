//! Cube bounding: turns `f` into a polynomial `phi` whose real zeros all lie
//! in `[-1, 1]^n`, such that `phi = 0` is solvable iff `f = 0` has a root
//! with coordinates below `2^(2^m)` in absolute value.
//!
//! ```text
//! phi = Σ_{j<m} (y_{j+1} - y_j^2)^2 + (2 y_0 - 1)^2
//!     + Σ_i (x_i^2 + z_i^2 - 1)^2 + h^2,      h = y_m^d f(x / y_m)
//! ```
//!
//! The first two groups pin `y_j = 2^(-2^j)`, the third keeps each `x_i` in
//! the cube, and `h` vanishes exactly on rescaled roots of `f`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::number::{Number, Rational};
use crate::poly::{Assignment, Monomial, PolyError, Polynomial, VarClass, VarId, VarKind};

/// Default tower height for desk-scale instances.
pub const DEFAULT_TOWER_HEIGHT: u32 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CubeError {
    #[error("cannot bound the zero polynomial")]
    ZeroPolynomial,
    #[error("tower height must be positive")]
    ZeroHeight,
    #[error("input already uses reserved variable {0}")]
    ReservedVariable(VarId),
    #[error("|{var}| = {value} is not below 2^(2^{m})")]
    OutOfRange { var: VarId, value: f64, m: u32 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub fn tower_var(j: u32) -> VarId {
    VarId::new(VarKind::Homogenization, j)
}

pub fn slack_var(i: u32) -> VarId {
    VarId::new(VarKind::Slack, i)
}

/// `y^d · f(x / y)` with `d = deg f`: every term padded with `hom_var` up to
/// degree `d`.
pub fn homogenize(f: &Polynomial, hom_var: VarId) -> Result<Polynomial, CubeError> {
    let f = f.canonicalize();
    let d = f.degree().ok_or(CubeError::ZeroPolynomial)?;
    let terms = f
        .terms()
        .iter()
        .map(|t| {
            let mut vars = t.vars().to_vec();
            vars.extend(std::iter::repeat_n(hom_var, d - t.degree()));
            Monomial::new(t.sign(), vars)
        })
        .collect();
    Ok(Polynomial::from_terms(terms).canonicalize())
}

/// Output of [`build_phi`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedInstance {
    pub phi: Polynomial,
    /// Tower height.
    pub m: u32,
    /// Degree of the input polynomial.
    pub d: usize,
    /// Variables of `f` in order, each with its slack `z<i>`.
    pub var_map: Vec<(VarId, VarId)>,
    /// `y0..=ym`.
    pub tower: Vec<VarId>,
}

/// Builds `phi` for `f` with tower height `m`, expanded to standard form.
///
/// Every variable of `f` is kept as is and receives a slack variable
/// `z<i>` (1-based, in variable order).
pub fn build_phi(f: &Polynomial, m: u32) -> Result<BoundedInstance, CubeError> {
    if m == 0 {
        return Err(CubeError::ZeroHeight);
    }
    let f = f.canonicalize();
    let d = f.degree().ok_or(CubeError::ZeroPolynomial)?;
    let vars: Vec<VarId> = f.variables().into_iter().collect();
    if let Some(v) = vars.iter().find(|v| matches!(v.class(), VarClass::Homogenization | VarClass::Slack)) {
        return Err(CubeError::ReservedVariable(*v));
    }
    let tower: Vec<VarId> = (0..=m).map(tower_var).collect();
    let one = Polynomial::one();
    let mut phi = Polynomial::zero();
    for j in 0..m as usize {
        let y = Polynomial::var(tower[j]);
        phi = phi.add(&Polynomial::var(tower[j + 1]).sub(&y.square()).square());
    }
    phi = phi.add(&Polynomial::constant(2).mul(&Polynomial::var(tower[0])).sub(&one).square());
    let mut var_map = Vec::with_capacity(vars.len());
    for (i, &x) in vars.iter().enumerate() {
        let z = slack_var(i as u32 + 1);
        var_map.push((x, z));
        let xs = Polynomial::var(x).square();
        let zs = Polynomial::var(z).square();
        phi = phi.add(&xs.add(&zs).sub(&one).square());
    }
    let h = homogenize(&f, tower[m as usize])?;
    phi = phi.add(&h.square());
    Ok(BoundedInstance { phi, m, d, var_map, tower })
}

/// `2^(-2^j)` exactly.
pub fn tower_value(j: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << (1usize << j))
}

/// Scaled witness of a root `xi` of `f`.
///
/// Sets `x_i = 2^(-2^m) xi_i`, `y_j = 2^(-2^j)` exactly, and `z_i =
/// sqrt(1 - x_i^2)` (exact when rational, otherwise `f64`). Use
/// [`exact_slack_squares`] with [`Polynomial::evaluate_with_squares`] to
/// check `phi = 0` exactly even when some `z_i` is irrational.
pub fn scale_root(xi: &Assignment, instance: &BoundedInstance) -> Result<Assignment, CubeError> {
    let m = instance.m;
    let scale = tower_value(m);
    let bound = Rational::from_integer(BigInt::one() << (1usize << m));
    let mut out = Assignment::new();
    for &(x, z) in &instance.var_map {
        let value = xi.get(x).ok_or(PolyError::MissingBinding(x))?;
        let too_big = match value {
            Number::Exact(r) => r.abs() >= bound,
            Number::Float(v) => v.abs() >= crate::number::rational_to_f64(&bound),
        };
        if too_big {
            return Err(CubeError::OutOfRange { var: x, value: value.to_f64(), m });
        }
        let scaled = value * &Number::Exact(scale.clone());
        let z_sq = &Number::one() - &(&scaled * &scaled);
        out.set(x, scaled);
        out.set(z, z_sq.sqrt());
    }
    for (j, &y) in instance.tower.iter().enumerate() {
        out.set(y, tower_value(j as u32));
    }
    Ok(out)
}

/// `z_i^2 = 1 - x_i^2` for every slack variable, computed from the bindings
/// of the `x_i` in `a`.
pub fn exact_slack_squares(a: &Assignment, instance: &BoundedInstance) -> Result<BTreeMap<VarId, Number>, CubeError> {
    let mut out = BTreeMap::new();
    for &(x, z) in &instance.var_map {
        let v = a.get(x).ok_or(PolyError::MissingBinding(x))?;
        out.insert(z, &Number::one() - &(v * v));
    }
    Ok(out)
}
