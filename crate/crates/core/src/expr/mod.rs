//! Expression trees for the smooth functions of a bilevel program.
//!
//! Variables are named `x1..xn` (upper level) and `y1..ym` (lower level).
//! Trees are immutable once built; [`differentiate`](Expr::differentiate)
//! returns a new tree with light constant folding.

mod diff;
mod display;
mod eval;
mod parse;
#[cfg(test)]
pub(crate) mod proptests;

pub use eval::EvalError;
pub use parse::{parse, ParseError, MAX_DEPTH, MAX_EXPONENT};

/// A variable reference, zero-based within its block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X(usize),
    Y(usize),
}

impl Var {
    /// Position in the joint `(x, y)` vector of an `n`-dimensional upper level.
    pub fn joint_index(self, n: usize) -> usize {
        match self {
            Var::X(i) => i,
            Var::Y(j) => n + j,
        }
    }

    /// Inverse of [`joint_index`](Var::joint_index).
    pub fn from_joint(index: usize, n: usize) -> Var {
        if index < n {
            Var::X(index)
        } else {
            Var::Y(index - n)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// Integer power; the exponent is a literal in `0..=MAX_EXPONENT`.
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn x(i: usize) -> Expr {
        Expr::Var(Var::X(i))
    }

    pub fn y(j: usize) -> Expr {
        Expr::Var(Var::Y(j))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    /// Largest `(x, y)` variable counts referenced, i.e. the minimal `(n, m)`
    /// under which every variable of the tree is declared.
    pub fn required_dims(&self) -> (usize, usize) {
        let mut dims = (0, 0);
        self.visit_vars(&mut |v| match v {
            Var::X(i) => dims.0 = dims.0.max(i + 1),
            Var::Y(j) => dims.1 = dims.1.max(j + 1),
        });
        dims
    }

    /// Whether the tree uses `sin`, `cos` or `exp` (and so cannot be
    /// evaluated exactly over the rationals).
    pub fn is_transcendental(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Unary(op, a) => !matches!(op, UnaryOp::Neg) || a.is_transcendental(),
            Expr::Binary(_, a, b) => a.is_transcendental() || b.is_transcendental(),
            Expr::Pow(a, _) => a.is_transcendental(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) | Expr::Pow(a, _) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.visit_vars(f),
            Expr::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }
}
