use std::fmt;
use std::str::FromStr;

/// Broad provenance class of a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarClass {
    Original,
    Gadget,
    Homogenization,
    Slack,
}

/// Concrete kind of a variable; determines its printed prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    /// `x<i>`: variables of the input formula or polynomial.
    Original,
    /// `u<i>`: inverse-square-root witness of an atom `g > 0`.
    AtomU,
    /// `v<i>`: square-root witness of an atom failing `g > 0`.
    AtomV,
    /// `w<i>`: truth value of an atom or connective.
    Truth,
    /// `t<i>`: name of a subexpression introduced by flattening.
    Aux,
    /// `y<i>`: tower and homogenization variables of cube bounding.
    Homogenization,
    /// `z<i>`: slack variables keeping coordinates in `[-1, 1]`.
    Slack,
}

impl VarKind {
    pub const ALL: [VarKind; 7] = [
        VarKind::Original,
        VarKind::AtomU,
        VarKind::AtomV,
        VarKind::Truth,
        VarKind::Aux,
        VarKind::Homogenization,
        VarKind::Slack,
    ];

    pub fn prefix(self) -> char {
        match self {
            VarKind::Original => 'x',
            VarKind::AtomU => 'u',
            VarKind::AtomV => 'v',
            VarKind::Truth => 'w',
            VarKind::Aux => 't',
            VarKind::Homogenization => 'y',
            VarKind::Slack => 'z',
        }
    }

    pub fn from_prefix(c: char) -> Option<VarKind> {
        VarKind::ALL.into_iter().find(|k| k.prefix() == c)
    }

    pub fn class(self) -> VarClass {
        match self {
            VarKind::Original => VarClass::Original,
            VarKind::AtomU | VarKind::AtomV | VarKind::Truth | VarKind::Aux => VarClass::Gadget,
            VarKind::Homogenization => VarClass::Homogenization,
            VarKind::Slack => VarClass::Slack,
        }
    }
}

/// A polynomial variable, identified by kind and a per-kind index.
///
/// The derived order (kind first, then index) is the variable order used by
/// monomial sorting and by the graded-lex division in [`super::is_multiple_of`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId {
    pub kind: VarKind,
    pub index: u32,
}

impl VarId {
    pub const fn new(kind: VarKind, index: u32) -> Self {
        VarId { kind, index }
    }

    pub const fn x(index: u32) -> Self {
        VarId::new(VarKind::Original, index)
    }

    pub fn class(&self) -> VarClass {
        self.kind.class()
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.prefix(), self.index)
    }
}

impl FromStr for VarId {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let kind = chars.next().and_then(VarKind::from_prefix).ok_or(())?;
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(());
        }
        let index = digits.parse().map_err(|_| ())?;
        Ok(VarId::new(kind, index))
    }
}
