use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{is_atom_normalized, Formula};
use crate::number::Number;
use crate::poly::{Assignment, PolyError, Polynomial, Sign, VarId, VarKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("formula still contains atoms other than `g > 0`")]
    NotNormalized,
    #[error("assignment does not satisfy the formula")]
    Unsatisfied,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
        }
    }
}

/// Bracketed expression over variables and the constants 0 and 1.
///
/// Equations keep this structure until they are flattened, because
/// flattening acts on the bracketing rather than on expanded terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Zero,
    One,
    Var(VarId),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Mul, a, b)
    }

    pub fn square(a: Expr) -> Expr {
        Expr::mul(a.clone(), a)
    }

    /// Builds `((t1 ± t2) ± t3) ...` with each monomial a left-nested
    /// product; a leading negative term is written `0 - t1`.
    pub fn from_polynomial(p: &Polynomial) -> Expr {
        let mut acc: Option<Expr> = None;
        for term in p.terms() {
            let mut product: Option<Expr> = None;
            for &v in term.vars() {
                product = Some(match product {
                    None => Expr::Var(v),
                    Some(e) => Expr::mul(e, Expr::Var(v)),
                });
            }
            let m = product.unwrap_or(Expr::One);
            acc = Some(match (acc, term.sign()) {
                (None, Sign::Plus) => m,
                (None, Sign::Minus) => Expr::sub(Expr::Zero, m),
                (Some(e), Sign::Plus) => Expr::add(e, m),
                (Some(e), Sign::Minus) => Expr::sub(e, m),
            });
        }
        acc.unwrap_or(Expr::Zero)
    }

    pub fn to_polynomial(&self) -> Polynomial {
        match self {
            Expr::Zero => Polynomial::zero(),
            Expr::One => Polynomial::one(),
            Expr::Var(v) => Polynomial::var(*v),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.to_polynomial(), b.to_polynomial());
                match op {
                    BinOp::Add => a.add(&b),
                    BinOp::Sub => a.sub(&b),
                    BinOp::Mul => a.mul(&b),
                }
            }
        }
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<Number, PolyError> {
        Ok(match self {
            Expr::Zero => Number::zero(),
            Expr::One => Number::one(),
            Expr::Var(v) => a.get(*v).cloned().ok_or(PolyError::MissingBinding(*v))?,
            Expr::Bin(op, x, y) => {
                let (x, y) = (x.evaluate(a)?, y.evaluate(a)?);
                match op {
                    BinOp::Add => &x + &y,
                    BinOp::Sub => &x - &y,
                    BinOp::Mul => &x * &y,
                }
            }
        })
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, Expr::Bin(..))
    }

    pub fn op_count(&self) -> usize {
        match self {
            Expr::Bin(_, a, b) => 1 + a.op_count() + b.op_count(),
            _ => 0,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Zero => f.write_str("0"),
            Expr::One => f.write_str("1"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Bin(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connective {
    Not,
    And,
    Or,
}

/// Provenance of the variables and equations of a system, in creation order.
#[derive(Clone, Debug, PartialEq)]
pub enum Rewrite {
    /// Atom `g > 0` encoded with fresh `u`, `v`, `w`.
    AtomGadget { g: Polynomial, u: VarId, v: VarId, w: VarId },
    /// `out` holds the truth value of a connective applied to `inputs`.
    Connective { op: Connective, out: VarId, inputs: Vec<VarId> },
    /// The formula's value variable is forced to 1.
    AssertTrue { var: VarId },
    /// Flattening named a subexpression: `var = expr`.
    Define { var: VarId, expr: Expr },
}

impl fmt::Display for Rewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rewrite::AtomGadget { g, u, v, w } => write!(f, "stage=atom g={g} u={u} v={v} w={w}"),
            Rewrite::Connective { op, out, inputs } => {
                let names: Vec<String> = inputs.iter().map(|v| v.to_string()).collect();
                write!(f, "stage=connective op={op:?} out={out} in={}", names.join(","))
            }
            Rewrite::AssertTrue { var } => write!(f, "stage=assert var={var}"),
            Rewrite::Define { var, expr } => write!(f, "stage=define var={var} expr={expr}"),
        }
    }
}

/// Conjunction of equations `expr = 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EquationSystem {
    pub equations: Vec<Expr>,
    /// Variable carrying the truth value of the encoded formula.
    pub value_var: Option<VarId>,
    pub trace: Vec<Rewrite>,
}

impl EquationSystem {
    pub fn from_equations(equations: Vec<Expr>) -> Self {
        EquationSystem { equations, value_var: None, trace: Vec::new() }
    }

    /// Standard-form polynomial of each equation.
    pub fn polynomials(&self) -> Vec<Polynomial> {
        self.equations.iter().map(Expr::to_polynomial).collect()
    }

    pub fn is_flat(&self) -> bool {
        self.equations.iter().all(|e| e.op_count() <= 2)
    }

    /// Binds every variable named by a `Define` record, in order.
    pub fn extend_witness(&self, a: &mut Assignment) -> Result<(), PolyError> {
        for r in &self.trace {
            if let Rewrite::Define { var, expr } = r {
                let value = expr.evaluate(a)?;
                a.set(*var, value);
            }
        }
        Ok(())
    }
}

/// Atom gadget `((g u^2 - 1)^2 + (w - 1)^2)((g + v^2)^2 + w^2) = 0`:
/// its real solutions have `w = 1, g > 0` or `w = 0, g <= 0`.
pub fn atom_gadget(g: &Polynomial, u: VarId, v: VarId, w: VarId) -> Expr {
    let g = Expr::from_polynomial(g);
    let (u, v, w) = (Expr::Var(u), Expr::Var(v), Expr::Var(w));
    let inv = Expr::sub(Expr::mul(Expr::mul(g.clone(), u.clone()), u), Expr::One);
    let truthy = Expr::add(Expr::square(inv), Expr::square(Expr::sub(w.clone(), Expr::One)));
    let shift = Expr::add(g, Expr::mul(v.clone(), v));
    let falsy = Expr::add(Expr::square(shift), Expr::square(w));
    Expr::mul(truthy, falsy)
}

struct Encoder {
    next: u32,
    system: EquationSystem,
}

impl Encoder {
    fn fresh(&mut self) -> u32 {
        self.next += 1;
        self.next
    }

    /// Post-order: children get their indices before the node itself.
    fn encode(&mut self, f: &Formula) -> VarId {
        match f {
            Formula::Atom { poly, .. } => {
                let i = self.fresh();
                let (u, v, w) =
                    (VarId::new(VarKind::AtomU, i), VarId::new(VarKind::AtomV, i), VarId::new(VarKind::Truth, i));
                self.system.equations.push(atom_gadget(poly, u, v, w));
                self.system.trace.push(Rewrite::AtomGadget { g: poly.clone(), u, v, w });
                w
            }
            Formula::Not(a) => {
                let wa = self.encode(a);
                let out = VarId::new(VarKind::Truth, self.fresh());
                self.system.equations.push(Expr::sub(Expr::Var(out), Expr::sub(Expr::One, Expr::Var(wa))));
                self.system.trace.push(Rewrite::Connective { op: Connective::Not, out, inputs: vec![wa] });
                out
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let wa = self.encode(a);
                let wb = self.encode(b);
                let out = VarId::new(VarKind::Truth, self.fresh());
                let prod = Expr::mul(Expr::Var(wa), Expr::Var(wb));
                let (op, value) = if matches!(f, Formula::And(..)) {
                    (Connective::And, prod)
                } else {
                    (Connective::Or, Expr::sub(Expr::add(Expr::Var(wa), Expr::Var(wb)), prod))
                };
                self.system.equations.push(Expr::sub(Expr::Var(out), value));
                self.system.trace.push(Rewrite::Connective { op, out, inputs: vec![wa, wb] });
                out
            }
        }
    }
}

/// Encodes an atom-normalized formula as a conjunction of equations that is
/// satisfiable over the reals iff the formula is.
///
/// Gadget variables are numbered `1, 2, ...` in post-order of the formula
/// tree; an atom numbered `i` owns `u<i>`, `v<i>`, `w<i>`, a connective owns
/// `w<i>`. The last equation forces the root's value variable to 1.
pub fn to_equation_system(formula: &Formula) -> Result<EquationSystem, SystemError> {
    if !is_atom_normalized(formula) {
        return Err(SystemError::NotNormalized);
    }
    let mut enc = Encoder { next: 0, system: EquationSystem::default() };
    let root = enc.encode(formula);
    enc.system.equations.push(Expr::sub(Expr::Var(root), Expr::One));
    enc.system.trace.push(Rewrite::AssertTrue { var: root });
    enc.system.value_var = Some(root);
    Ok(enc.system)
}

struct Flattener {
    next: u32,
    names: HashMap<Expr, VarId>,
    equations: Vec<Expr>,
    trace: Vec<Rewrite>,
}

impl Flattener {
    /// A leaf standing for `e`, naming `e` (and its inner nodes) if needed.
    /// Structurally equal subexpressions share one name.
    fn leaf(&mut self, e: &Expr) -> Expr {
        let Expr::Bin(op, a, b) = e else {
            return e.clone();
        };
        if let Some(v) = self.names.get(e) {
            return Expr::Var(*v);
        }
        let (la, lb) = (self.leaf(a), self.leaf(b));
        self.next += 1;
        let t = VarId::new(VarKind::Aux, self.next);
        let node = Expr::bin(*op, la, lb);
        self.equations.push(Expr::sub(node.clone(), Expr::Var(t)));
        self.trace.push(Rewrite::Define { var: t, expr: node });
        self.names.insert(e.clone(), t);
        Expr::Var(t)
    }
}

/// A definition `(y ⋆ y) - t` produced by an earlier flattening.
fn is_definition(e: &Expr) -> bool {
    match e {
        Expr::Bin(BinOp::Sub, lhs, t) => {
            matches!(**t, Expr::Var(v) if v.kind == VarKind::Aux)
                && matches!(&**lhs, Expr::Bin(_, a, b) if a.is_leaf() && b.is_leaf())
        }
        _ => false,
    }
}

/// Rewrites the system into three-address form.
///
/// Every inner node of an equation's tree is named by a fresh `t<i>` with the
/// defining equation `(y1 ⋆ y2) - t = 0`; the equation itself becomes
/// `y1 ∗ y2 = 0`. Each output equation has at most two operations, and the
/// output size is linear in the input size. Names are allocated in post-order
/// across the equation list, after any `t` variables already present.
pub fn flatten(system: &EquationSystem) -> EquationSystem {
    let start = system
        .trace
        .iter()
        .filter_map(|r| match r {
            Rewrite::Define { var, .. } => Some(var.index),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let mut fl = Flattener { next: start, names: HashMap::new(), equations: Vec::new(), trace: Vec::new() };
    let mut out = Vec::new();
    for e in &system.equations {
        let flat = match e {
            Expr::Bin(op, a, b) if !is_definition(e) => {
                let (la, lb) = (fl.leaf(a), fl.leaf(b));
                Expr::bin(*op, la, lb)
            }
            _ => e.clone(),
        };
        out.append(&mut fl.equations);
        out.push(flat);
    }
    let mut trace = system.trace.clone();
    trace.extend(fl.trace);
    EquationSystem { equations: out, value_var: system.value_var, trace }
}

/// `f_1^2 + ... + f_k^2` in canonical standard form; its real zeros are the
/// common solutions of the system.
pub fn to_single_polynomial(system: &EquationSystem) -> Polynomial {
    system.equations.iter().fold(Polynomial::zero(), |acc, e| acc.add(&e.to_polynomial().square()))
}

/// Extends a satisfying assignment of the original variables to every
/// variable of `flatten(to_equation_system(normalize_atoms(formula)))`.
///
/// For an atom `g > 0`: if `g(a) > 0` then `u = 1/sqrt(g(a))`, `v = 0`,
/// `w = 1`; otherwise `u = 0`, `v = sqrt(-g(a))`, `w = 0`. Square roots are
/// exact when the radicand is the square of a rational.
pub fn lift_witness(formula: &Formula, a: &Assignment) -> Result<WitnessAssignment, SystemError> {
    if !formula.evaluate(a)? {
        return Err(SystemError::Unsatisfied);
    }
    let normalized = super::normalize_atoms(formula);
    let system = flatten(&to_equation_system(&normalized)?);
    let mut w = a.clone();
    for r in &system.trace {
        match r {
            Rewrite::AtomGadget { g, u, v, w: truth } => {
                let value = g.evaluate(&w)?;
                if value.signum() > 0 {
                    w.set(*u, value.sqrt().recip());
                    w.set(*v, Number::zero());
                    w.set(*truth, Number::one());
                } else {
                    w.set(*u, Number::zero());
                    w.set(*v, (-value).sqrt());
                    w.set(*truth, Number::zero());
                }
            }
            Rewrite::Connective { op, out, inputs } => {
                let get = |i: usize| w.get(inputs[i]).cloned().ok_or(PolyError::MissingBinding(inputs[i]));
                let value = match op {
                    Connective::Not => &Number::one() - &get(0)?,
                    Connective::And => &get(0)? * &get(1)?,
                    Connective::Or => {
                        let (x, y) = (get(0)?, get(1)?);
                        &(&x + &y) - &(&x * &y)
                    }
                };
                w.set(*out, value);
            }
            Rewrite::Define { var, expr } => {
                let value = expr.evaluate(&w)?;
                w.set(*var, value);
            }
            Rewrite::AssertTrue { .. } => {}
        }
    }
    Ok(WitnessAssignment { exact: w.is_exact(), assignment: w, system })
}

/// Witness point for the reduced system, together with that system.
#[derive(Clone, Debug)]
pub struct WitnessAssignment {
    pub assignment: Assignment,
    /// True when no square root had to be approximated.
    pub exact: bool,
    pub system: EquationSystem,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{normalize_atoms, Relation};
    use crate::number::int;

    fn x(i: u32) -> VarId {
        VarId::x(i)
    }

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    #[test]
    fn boolean_encoders_match_truth_tables() {
        for a in 0..=1i64 {
            for b in 0..=1i64 {
                assert_eq!(1 - a, i64::from(a == 0));
                assert_eq!(a * b, i64::from(a == 1 && b == 1));
                assert_eq!(a + b - a * b, i64::from(a == 1 || b == 1));
            }
        }
    }

    #[test]
    fn single_atom_system() {
        let sys = to_equation_system(&Formula::gt(p("x1"))).unwrap();
        assert_eq!(sys.equations.len(), 2);
        let (u, v, w) = (VarId::new(VarKind::AtomU, 1), VarId::new(VarKind::AtomV, 1), VarId::new(VarKind::Truth, 1));
        assert_eq!(sys.equations[0], atom_gadget(&p("x1"), u, v, w));
        assert_eq!(sys.equations[1].to_polynomial(), p("w1-1"));
        assert_eq!(sys.value_var, Some(w));
    }

    #[test]
    fn and_adds_product_encoder() {
        let f = Formula::and(Formula::gt(p("x1")), Formula::gt(p("x2")));
        let sys = to_equation_system(&f).unwrap();
        let polys = sys.polynomials();
        assert_eq!(polys.len(), 4);
        assert_eq!(polys[2], p("w3-w1*w2"));
        assert_eq!(polys[3], p("w3-1"));
    }

    #[test]
    fn or_and_not_encoders() {
        let f = Formula::or(Formula::not(Formula::gt(p("x1"))), Formula::gt(p("x2")));
        let polys = to_equation_system(&f).unwrap().polynomials();
        assert_eq!(polys[1], p("w2-1+w1"));
        assert_eq!(polys[3], p("w4-w2-w3+w2*w3"));
        assert_eq!(polys[4], p("w4-1"));
    }

    #[test]
    fn rejects_unnormalized() {
        let f = Formula::atom(p("x1"), Relation::Eq);
        assert_eq!(to_equation_system(&f), Err(SystemError::NotNormalized));
    }

    #[test]
    fn flatten_names_inner_product() {
        let (a, b, c) = (Expr::Var(x(1)), Expr::Var(x(2)), Expr::Var(x(3)));
        let sys = EquationSystem::from_equations(vec![Expr::mul(Expr::mul(a, b), c)]);
        let flat = flatten(&sys);
        let t = VarId::new(VarKind::Aux, 1);
        assert_eq!(flat.polynomials(), vec![p("x1*x2-t1"), p("x3*t1")]);
        assert_eq!(flat.trace.len(), 1);
        assert!(matches!(&flat.trace[0], Rewrite::Define { var, .. } if *var == t));
    }

    #[test]
    fn flatten_keeps_flat_sum() {
        let sys = EquationSystem::from_equations(vec![Expr::add(Expr::Var(x(1)), Expr::Var(x(2)))]);
        assert_eq!(flatten(&sys), sys);
    }

    #[test]
    fn flatten_two_levels() {
        let (a, b, c, d) = (Expr::Var(x(1)), Expr::Var(x(2)), Expr::Var(x(3)), Expr::Var(x(4)));
        let e = Expr::add(Expr::mul(Expr::add(a, b), c), d);
        let flat = flatten(&EquationSystem::from_equations(vec![e]));
        assert_eq!(flat.equations.len(), 3);
        assert_eq!(flat.polynomials(), vec![p("x1+x2-t1"), p("x3*t1-t2"), p("x4+t2")]);
        assert!(flat.is_flat());
    }

    #[test]
    fn flatten_is_idempotent_and_shares_subterms() {
        let f = normalize_atoms(&"x1*x1 - 2 = 0 & x2 > 0".parse().unwrap());
        let once = flatten(&to_equation_system(&f).unwrap());
        assert!(once.is_flat());
        assert_eq!(flatten(&once), once);
        let names: Vec<_> = once
            .trace
            .iter()
            .filter_map(|r| match r {
                Rewrite::Define { expr, .. } => Some(expr.clone()),
                _ => None,
            })
            .collect();
        let mut dedup = names.clone();
        dedup.sort_by_key(|e| e.to_string());
        dedup.dedup();
        assert_eq!(dedup.len(), names.len());
    }

    #[test]
    fn single_square() {
        let sys = EquationSystem::from_equations(vec![Expr::sub(Expr::Var(x(1)), Expr::One)]);
        let f = to_single_polynomial(&sys);
        assert_eq!(f, p("x1*x1-x1-x1+1"));
        assert_eq!(f.to_string(), "x1*x1-x1-x1+1");
        assert_eq!(to_single_polynomial(&EquationSystem::default()), Polynomial::zero());
        let two = EquationSystem::from_equations(vec![Expr::Var(x(1)), Expr::Var(x(2))]);
        assert_eq!(to_single_polynomial(&two), p("x1*x1+x2*x2"));
    }

    #[test]
    fn lift_true_atom() {
        let f = Formula::gt(p("x1"));
        let a = Assignment::new().with(x(1), int(4));
        let w = lift_witness(&f, &a).unwrap();
        assert!(w.exact);
        let get = |k, i| w.assignment.get(VarId::new(k, i)).cloned().unwrap();
        assert_eq!(get(VarKind::AtomU, 1), Number::Exact(crate::number::rational(1, 2)));
        assert_eq!(get(VarKind::AtomV, 1), Number::zero());
        assert_eq!(get(VarKind::Truth, 1), Number::one());
        let gadget = atom_gadget(
            &p("x1"),
            VarId::new(VarKind::AtomU, 1),
            VarId::new(VarKind::AtomV, 1),
            VarId::new(VarKind::Truth, 1),
        );
        assert_eq!(gadget.to_polynomial().evaluate(&w.assignment).unwrap(), Number::zero());
    }

    #[test]
    fn lift_false_atom() {
        let f = Formula::not(Formula::gt(p("x1")));
        let a = Assignment::new().with(x(1), int(-1));
        let w = lift_witness(&f, &a).unwrap();
        assert_eq!(w.assignment.get(VarId::new(VarKind::AtomU, 1)), Some(&Number::zero()));
        assert_eq!(w.assignment.get(VarId::new(VarKind::AtomV, 1)), Some(&Number::one()));
        assert_eq!(w.assignment.get(VarId::new(VarKind::Truth, 1)), Some(&Number::zero()));
        assert_eq!(to_single_polynomial(&w.system).evaluate(&w.assignment).unwrap(), Number::zero());
    }

    #[test]
    fn lift_conjunction() {
        let f = Formula::and(Formula::gt(p("x1")), Formula::gt(p("x2")));
        let a = Assignment::new().with(x(1), int(1)).with(x(2), int(9));
        let w = lift_witness(&f, &a).unwrap();
        assert_eq!(w.assignment.get(VarId::new(VarKind::Truth, 3)), Some(&Number::one()));
        assert_eq!(to_single_polynomial(&w.system).evaluate(&w.assignment).unwrap(), Number::zero());
    }

    #[test]
    fn lift_rejects_falsifying_point() {
        let f = Formula::gt(p("x1"));
        let a = Assignment::new().with(x(1), int(0));
        assert!(matches!(lift_witness(&f, &a), Err(SystemError::Unsatisfied)));
    }
}
