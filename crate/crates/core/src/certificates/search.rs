//! PSD-rank search: decides `PSD rank(A) <= k` exactly where that is easy
//! and otherwise looks for a witness numerically.

use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::factorization::{CertError, GramVector, PsdFactorization};
use crate::gadgets::InstanceMatrix;
use crate::number::Rational;

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Gradient-descent iterations per restart.
    pub descent_iters: usize,
    /// Levenberg-Marquardt iterations after descent.
    pub polish_iters: usize,
    /// Max-abs entry residual needed for a witness.
    pub success_tol: f64,
    /// Used as the starting point of restart 0, padded with zeros.
    pub init: Option<PsdFactorization<f64>>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { restarts: 32, seed: 1, descent_iters: 400, polish_iters: 200, success_tol: 1e-8, init: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    WitnessFound,
    Failed,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::WitnessFound => "witness-found",
            Verdict::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Exact(PsdFactorization<Rational>),
    Float(PsdFactorization<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport {
    pub k: usize,
    pub strategy: &'static str,
    pub best_residual: f64,
    pub restart: Option<usize>,
    pub iterations: usize,
    pub seed: u64,
    pub verdict: Verdict,
    /// Best factorization seen, also when the search failed.
    pub witness: Option<Witness>,
}

pub trait SearchStrategy: Sync {
    fn name(&self) -> &'static str;
    /// Whether the strategy can answer for this size.
    fn applies(&self, a: &InstanceMatrix, k: usize) -> bool;
    fn search(&self, a: &InstanceMatrix, k: usize, cfg: &SearchConfig) -> Result<SearchReport, CertError>;
}

/// `k = 1`: PSD rank one is nonnegative rank one, so `A` must be an outer
/// product. Decided exactly.
pub struct ExactRankOne;

/// `k >= min(m, n)`: the diagonal witness always exists.
pub struct Trivial;

/// Seeded multi-start gradient descent with backtracking, then a
/// Levenberg-Marquardt polish.
pub struct Gradient;

/// Picks exact strategies when they apply and gradient otherwise.
pub struct Auto;

pub fn strategies() -> Vec<Box<dyn SearchStrategy>> {
    vec![Box::new(Auto), Box::new(ExactRankOne), Box::new(Trivial), Box::new(Gradient)]
}

pub fn strategy(name: &str) -> Option<Box<dyn SearchStrategy>> {
    strategies().into_iter().find(|s| s.name() == name)
}

fn exact_report(
    k: usize,
    name: &'static str,
    cfg: &SearchConfig,
    residual: f64,
    w: PsdFactorization<Rational>,
) -> SearchReport {
    let found = residual == 0.0;
    SearchReport {
        k,
        strategy: name,
        best_residual: residual,
        restart: None,
        iterations: 0,
        seed: cfg.seed,
        verdict: if found { Verdict::WitnessFound } else { Verdict::Failed },
        witness: Some(Witness::Exact(w)),
    }
}

fn check_input(a: &InstanceMatrix, k: usize) -> Result<(), CertError> {
    if k == 0 {
        return Err(CertError::Search("k must be at least 1".into()));
    }
    if a.nonzeros().any(|(_, _, v)| v.is_negative()) {
        return Err(CertError::Search("matrix has a negative entry".into()));
    }
    Ok(())
}

impl SearchStrategy for ExactRankOne {
    fn name(&self) -> &'static str {
        "exact-rank1"
    }

    fn applies(&self, _: &InstanceMatrix, k: usize) -> bool {
        k == 1
    }

    fn search(&self, a: &InstanceMatrix, k: usize, cfg: &SearchConfig) -> Result<SearchReport, CertError> {
        check_input(a, k)?;
        let mut w = PsdFactorization::new(1, a.row_labels().to_vec(), a.col_labels().to_vec());
        let Some((i0, j0, pivot)) = a.nonzeros().max_by(|x, y| x.2.cmp(y.2)).map(|(i, j, v)| (i, j, v.clone())) else {
            return Ok(exact_report(k, self.name(), cfg, 0.0, w));
        };
        let one = Rational::from_integer(1.into());
        for i in 0..a.nrows() {
            let wi = a.get(i, j0) / &pivot;
            if !wi.is_zero() {
                w.rows[i].push(GramVector::new(0, wi, vec![one.clone()]));
            }
        }
        for j in 0..a.ncols() {
            let wj = a.get(i0, j);
            if !wj.is_zero() {
                w.cols[j].push(GramVector::new(0, wj, vec![one.clone()]));
            }
        }
        let mut worst = Rational::zero();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let r = (w.entry(i, j) - a.get(i, j)).abs();
                if r > worst {
                    worst = r;
                }
            }
        }
        Ok(exact_report(k, self.name(), cfg, crate::number::rational_to_f64(&worst), w))
    }
}

impl SearchStrategy for Trivial {
    fn name(&self) -> &'static str {
        "trivial"
    }

    fn applies(&self, a: &InstanceMatrix, k: usize) -> bool {
        k >= a.nrows().min(a.ncols())
    }

    fn search(&self, a: &InstanceMatrix, k: usize, cfg: &SearchConfig) -> Result<SearchReport, CertError> {
        check_input(a, k)?;
        if !self.applies(a, k) {
            return Err(CertError::Search(format!("trivial witness needs k >= {}", a.nrows().min(a.ncols()))));
        }
        let mut w = PsdFactorization::new(k, a.row_labels().to_vec(), a.col_labels().to_vec());
        let one = Rational::from_integer(1.into());
        let by_rows = a.nrows() <= a.ncols();
        for (i, j, v) in a.nonzeros() {
            if by_rows {
                w.cols[j].push(GramVector::new(i, v.clone(), vec![one.clone()]));
            } else {
                w.rows[i].push(GramVector::new(j, v.clone(), vec![one.clone()]));
            }
        }
        if by_rows {
            for i in 0..a.nrows() {
                w.rows[i].push(GramVector::unit(i, vec![one.clone()]));
            }
        } else {
            for j in 0..a.ncols() {
                w.cols[j].push(GramVector::unit(j, vec![one.clone()]));
            }
        }
        Ok(exact_report(k, self.name(), cfg, 0.0, w))
    }
}

impl SearchStrategy for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn applies(&self, _: &InstanceMatrix, _: usize) -> bool {
        true
    }

    fn search(&self, a: &InstanceMatrix, k: usize, cfg: &SearchConfig) -> Result<SearchReport, CertError> {
        for s in [&ExactRankOne as &dyn SearchStrategy, &Trivial] {
            if s.applies(a, k) {
                return s.search(a, k, cfg);
            }
        }
        Gradient.search(a, k, cfg)
    }
}

/// Factor blocks `U_i` (rows) and `V_j` (columns), each `k × k` with the
/// Gram vectors as columns.
#[derive(Clone, Debug)]
struct Point {
    u: Vec<DMatrix<f64>>,
    v: Vec<DMatrix<f64>>,
}

struct Problem {
    a: Vec<Vec<f64>>,
    k: usize,
}

impl Problem {
    fn residuals(&self, x: &Point) -> Vec<f64> {
        let mut r = Vec::with_capacity(x.u.len() * x.v.len());
        for (i, ui) in x.u.iter().enumerate() {
            for (j, vj) in x.v.iter().enumerate() {
                r.push((ui.transpose() * vj).norm_squared() - self.a[i][j]);
            }
        }
        r
    }

    fn loss(&self, x: &Point) -> f64 {
        self.residuals(x).iter().map(|r| r * r).sum()
    }

    fn gradient(&self, x: &Point) -> Point {
        let k = self.k;
        let mut gu = vec![DMatrix::zeros(k, k); x.u.len()];
        let mut gv = vec![DMatrix::zeros(k, k); x.v.len()];
        for (i, ui) in x.u.iter().enumerate() {
            for (j, vj) in x.v.iter().enumerate() {
                let g = ui.transpose() * vj;
                let r = g.norm_squared() - self.a[i][j];
                gu[i] += vj * g.transpose() * (4.0 * r);
                gv[j] += ui * &g * (4.0 * r);
            }
        }
        Point { u: gu, v: gv }
    }

    fn jacobian(&self, x: &Point) -> DMatrix<f64> {
        let (m, n, k2) = (x.u.len(), x.v.len(), self.k * self.k);
        let mut jac = DMatrix::zeros(m * n, (m + n) * k2);
        for (i, ui) in x.u.iter().enumerate() {
            for (j, vj) in x.v.iter().enumerate() {
                let g = ui.transpose() * vj;
                let du = vj * g.transpose() * 2.0;
                let dv = ui * &g * 2.0;
                let row = i * n + j;
                for (t, d) in du.iter().enumerate() {
                    jac[(row, i * k2 + t)] = *d;
                }
                for (t, d) in dv.iter().enumerate() {
                    jac[(row, (m + j) * k2 + t)] = *d;
                }
            }
        }
        jac
    }
}

impl Point {
    fn flat(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.u.len() * self.u[0].len() + self.v.len() * self.v[0].len(),
            self.u.iter().chain(&self.v).flat_map(|b| b.iter().copied()),
        )
    }

    fn from_flat(&self, d: &DVector<f64>) -> Point {
        let k = self.u[0].nrows();
        let k2 = k * k;
        let block = |t: usize| DMatrix::from_column_slice(k, k, &d.as_slice()[t * k2..(t + 1) * k2]);
        Point {
            u: (0..self.u.len()).map(block).collect(),
            v: (self.u.len()..self.u.len() + self.v.len()).map(block).collect(),
        }
    }

    fn axpy(&self, t: f64, d: &Point) -> Point {
        Point {
            u: self.u.iter().zip(&d.u).map(|(a, b)| a + b * t).collect(),
            v: self.v.iter().zip(&d.v).map(|(a, b)| a + b * t).collect(),
        }
    }

    fn norm_squared(&self) -> f64 {
        self.u.iter().chain(&self.v).map(|b| b.norm_squared()).sum()
    }
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Run {
    point: Point,
    residual: f64,
    iterations: usize,
}

fn descend(p: &Problem, mut x: Point, cfg: &SearchConfig) -> Run {
    let mut loss = p.loss(&x);
    let mut step = 1e-2;
    let mut iterations = 0;
    for _ in 0..cfg.descent_iters {
        iterations += 1;
        let g = p.gradient(&x);
        let gn = g.norm_squared();
        if gn < 1e-30 || loss < 1e-24 {
            break;
        }
        step *= 2.0;
        loop {
            let y = x.axpy(-step, &g);
            let ly = p.loss(&y);
            if ly <= loss - 1e-4 * step * gn {
                x = y;
                loss = ly;
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                break;
            }
        }
        if step < 1e-20 {
            break;
        }
    }
    let mut lambda = 1e-3;
    for _ in 0..cfg.polish_iters {
        iterations += 1;
        let r = DVector::from_vec(p.residuals(&x));
        if max_abs(r.as_slice()) < 1e-14 {
            break;
        }
        let j = p.jacobian(&x);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let rhs = -(&jt * &r);
        let n = jtj.nrows();
        let mut improved = false;
        while lambda < 1e12 {
            let sys = &jtj + DMatrix::identity(n, n) * lambda;
            let Some(chol) = sys.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let d = chol.solve(&rhs);
            let y = x.from_flat(&(x.flat() + d));
            let ly = p.loss(&y);
            if ly < loss {
                x = y;
                loss = ly;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    let residual = max_abs(&p.residuals(&x));
    Run { point: x, residual, iterations }
}

fn random_point(m: usize, n: usize, k: usize, scale: f64, seed: u64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut block = || {
        DMatrix::from_fn(k, k, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
    };
    Point { u: (0..m).map(|_| block()).collect(), v: (0..n).map(|_| block()).collect() }
}

fn point_from(f: &PsdFactorization<f64>, k: usize) -> Result<Point, CertError> {
    if f.k > k {
        return Err(CertError::Search(format!("initial witness has size {} > {k}", f.k)));
    }
    let blocks = |lists: &[Vec<GramVector<f64>>]| -> Result<Vec<DMatrix<f64>>, CertError> {
        lists
            .iter()
            .map(|list| {
                if list.len() > k {
                    return Err(CertError::Search("initial witness has too many Gram vectors".into()));
                }
                let mut b = DMatrix::zeros(k, k);
                for (c, g) in list.iter().enumerate() {
                    let s = g.weight.sqrt();
                    for (t, x) in g.coords.iter().enumerate() {
                        b[(g.offset + t, c)] = x * s;
                    }
                }
                Ok(b)
            })
            .collect()
    };
    Ok(Point { u: blocks(&f.rows)?, v: blocks(&f.cols)? })
}

fn to_factorization(x: &Point, a: &InstanceMatrix) -> PsdFactorization<f64> {
    let k = x.u.first().or(x.v.first()).map_or(0, |b| b.nrows());
    let lists = |bs: &[DMatrix<f64>]| -> Vec<Vec<GramVector<f64>>> {
        bs.iter()
            .map(|b| (0..k).map(|c| GramVector::unit(0, b.column(c).iter().copied().collect())).collect())
            .collect()
    };
    PsdFactorization {
        k,
        row_labels: a.row_labels().to_vec(),
        col_labels: a.col_labels().to_vec(),
        rows: lists(&x.u),
        cols: lists(&x.v),
    }
}

impl SearchStrategy for Gradient {
    fn name(&self) -> &'static str {
        "gradient"
    }

    fn applies(&self, _: &InstanceMatrix, _: usize) -> bool {
        true
    }

    fn search(&self, a: &InstanceMatrix, k: usize, cfg: &SearchConfig) -> Result<SearchReport, CertError> {
        check_input(a, k)?;
        let (m, n) = (a.nrows(), a.ncols());
        let dense = a.to_f64();
        let mean = dense.iter().flatten().sum::<f64>() / (m * n).max(1) as f64;
        let scale = mean.sqrt() / k as f64;
        let problem = Problem { a: dense, k };
        let init = cfg.init.as_ref().map(|f| point_from(f, k)).transpose()?;
        let runs: Vec<Run> = (0..cfg.restarts.max(1))
            .into_par_iter()
            .map(|t| {
                let start = match (&init, t) {
                    (Some(p), 0) => p.clone(),
                    _ => random_point(m, n, k, scale, cfg.seed.wrapping_add(t as u64)),
                };
                descend(&problem, start, cfg)
            })
            .collect();
        let (best, run) = runs
            .iter()
            .enumerate()
            .min_by(|(i, x), (j, y)| x.residual.total_cmp(&y.residual).then(i.cmp(j)))
            .expect("at least one restart");
        Ok(SearchReport {
            k,
            strategy: self.name(),
            best_residual: run.residual,
            restart: Some(best),
            iterations: run.iterations,
            seed: cfg.seed,
            verdict: if run.residual <= cfg.success_tol { Verdict::WitnessFound } else { Verdict::Failed },
            witness: Some(Witness::Float(to_factorization(&run.point, a))),
        })
    }
}

/// Runs the named strategy.
pub fn psd_rank_search(
    a: &InstanceMatrix,
    k: usize,
    strategy_name: &str,
    cfg: &SearchConfig,
) -> Result<SearchReport, CertError> {
    let s = strategy(strategy_name).ok_or_else(|| CertError::Search(format!("unknown strategy {strategy_name}")))?;
    s.search(a, k, cfg)
}
