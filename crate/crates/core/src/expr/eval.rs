use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{BinaryOp, Expr, UnaryOp, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("non-finite value produced by `{0}`")]
    NonFinite(String),
    #[error("variable {0} is not bound at this point")]
    Unbound(Var),
}

impl Expr {
    /// Evaluate at `(x, y)`. Every intermediate value must stay finite.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(var) => lookup(*var, x, y)?,
            Expr::Unary(op, a) => {
                let a = a.evaluate(x, y)?;
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                    UnaryOp::Exp => a.exp(),
                }
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.evaluate(x, y)?, b.evaluate(x, y)?);
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero(self.to_string()));
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(a, k) => a.evaluate(x, y)?.powi(*k as i32),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite(self.to_string()))
        }
    }

    /// Joint-vector form of [`evaluate`](Expr::evaluate): `point = (x, y)`
    /// with `x` occupying the first `n` entries.
    pub fn evaluate_joint(&self, n: usize, point: &[f64]) -> Result<f64, EvalError> {
        let n = n.min(point.len());
        self.evaluate(&point[..n], &point[n..])
    }

    /// Exact evaluation over the rationals. Returns `Ok(None)` when the tree
    /// contains a transcendental function.
    pub fn evaluate_exact(&self, x: &[BigRational], y: &[BigRational]) -> Result<Option<BigRational>, EvalError> {
        if self.is_transcendental() {
            return Ok(None);
        }
        self.exact(x, y).map(Some)
    }

    fn exact(&self, x: &[BigRational], y: &[BigRational]) -> Result<BigRational, EvalError> {
        Ok(match self {
            Expr::Const(c) => BigRational::from_float(*c).ok_or_else(|| EvalError::NonFinite(self.to_string()))?,
            Expr::Var(var) => match var {
                Var::X(i) => x.get(*i).cloned().ok_or(EvalError::Unbound(*var))?,
                Var::Y(j) => y.get(*j).cloned().ok_or(EvalError::Unbound(*var))?,
            },
            Expr::Unary(UnaryOp::Neg, a) => -a.exact(x, y)?,
            Expr::Unary(..) => unreachable!("transcendental trees are filtered out"),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.exact(x, y)?, b.exact(x, y)?);
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b.is_zero() {
                            return Err(EvalError::DivisionByZero(self.to_string()));
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(a, k) => {
                let base = a.exact(x, y)?;
                let mut acc = BigRational::one();
                for _ in 0..*k {
                    acc *= &base;
                }
                acc
            }
        })
    }
}

fn lookup(var: Var, x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    let slot = match var {
        Var::X(i) => x.get(i),
        Var::Y(j) => y.get(j),
    };
    slot.copied().ok_or(EvalError::Unbound(var))
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn constant_is_point_independent() {
        let e = parse("5", 1, 1).unwrap();
        assert_eq!(e.evaluate(&[3.0], &[-1.0]).unwrap(), 5.0);
    }

    #[test]
    fn product_of_blocks() {
        let e = parse("x1*y1", 1, 1).unwrap();
        assert_eq!(e.evaluate(&[2.0], &[3.0]).unwrap(), 6.0);
        assert_eq!(e.evaluate_joint(1, &[2.0, 3.0]).unwrap(), 6.0);
    }

    #[test]
    fn division_by_zero_is_a_domain_error() {
        let e = parse("1/x1", 1, 0).unwrap();
        assert!(matches!(e.evaluate(&[0.0], &[]), Err(EvalError::DivisionByZero(_))));
    }

    #[test]
    fn overflow_is_reported() {
        let e = parse("exp(x1)", 1, 0).unwrap();
        assert!(matches!(e.evaluate(&[1000.0], &[]), Err(EvalError::NonFinite(_))));
    }

    #[test]
    fn missing_coordinate_is_unbound() {
        let e = parse("y2", 1, 2).unwrap();
        assert!(matches!(e.evaluate(&[0.0], &[1.0]), Err(EvalError::Unbound(Var::Y(1)))));
    }

    #[test]
    fn exact_evaluation_matches_and_skips_transcendentals() {
        let q = |v: f64| BigRational::from_float(v).unwrap();
        let e = parse("(y1 - x1)^2 / 2 + x1*y1", 1, 1).unwrap();
        let exact = e.evaluate_exact(&[q(1.5)], &[q(0.25)]).unwrap().unwrap();
        let float = e.evaluate(&[1.5], &[0.25]).unwrap();
        assert_eq!(exact, q(float));
        let t = parse("sin(x1)", 1, 0).unwrap();
        assert_eq!(t.evaluate_exact(&[q(0.0)], &[]).unwrap(), None);
    }
}
