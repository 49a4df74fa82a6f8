//! Gradients, Hessian blocks and coderivatives of smooth maps.
//!
//! For a smooth single-valued map the regular, mixed and normal
//! coderivatives all reduce to the adjoint Jacobian `y* ↦ ∇h(p)ᵀ y*`, and
//! the singular subdifferential of a locally Lipschitz function is `{0}`.

use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::config::FiniteDifference;
use crate::expr::{EvalError, Expr, Var};
use crate::model::{BilevelProblem, Candidate, SmoothFunction};
use crate::polyhedral::PolyhedralCone;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error("evaluating {block}: {source}")]
    Eval {
        block: &'static str,
        #[source]
        source: EvalError,
    },
    #[error("{what} has length {found}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{block}[{row}][{col}] = {exact} disagrees with finite difference {fd}")]
    FiniteDifference {
        block: &'static str,
        row: usize,
        col: usize,
        exact: f64,
        fd: f64,
    },
}

fn eval_err(block: &'static str) -> impl Fn(EvalError) -> CalculusError {
    move |source| CalculusError::Eval { block, source }
}

fn check_len(what: &'static str, expected: usize, v: &[f64]) -> Result<(), CalculusError> {
    if v.len() != expected {
        return Err(CalculusError::Dimension {
            what,
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

/// First and second derivative data at a candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeBundle {
    /// `∇_x F`
    pub xi1: Vec<f64>,
    /// `∇_y F`
    pub xi2: Vec<f64>,
    pub grad_y_f: Vec<f64>,
    /// `∇_{yx} f`, `m × n`, entry `(i, j) = ∂²f / ∂y_i ∂x_j`.
    pub hess_yx: Vec<Vec<f64>>,
    /// `∇_{yy} f`, `m × m`.
    pub hess_yy: Vec<Vec<f64>>,
    /// The same blocks over the rationals when every tree is polynomial or
    /// rational in the variables.
    #[serde(skip)]
    pub exact: Option<ExactBundle>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactBundle {
    pub xi1: Vec<BigRational>,
    pub xi2: Vec<BigRational>,
    pub grad_y_f: Vec<BigRational>,
    pub hess_yx: Vec<Vec<BigRational>>,
    pub hess_yy: Vec<Vec<BigRational>>,
}

/// Symbolic derivative trees of a bilevel problem, built once per problem.
#[derive(Debug, Clone)]
pub struct DerivativeTrees {
    n: usize,
    m: usize,
    grad_upper: Vec<Expr>,
    grad_y_f: Vec<Expr>,
    hess_yx: Vec<Vec<Expr>>,
    hess_yy: Vec<Vec<Expr>>,
}

impl DerivativeTrees {
    pub fn new(problem: &BilevelProblem) -> Self {
        let (n, m) = (problem.n, problem.m);
        let upper = problem.upper_expr();
        let grad_upper = (0..n + m).map(|j| upper.differentiate(Var::from_joint(j, n))).collect();
        let grad_y_f: Vec<Expr> = problem.lower_gradient_y();
        let hess_yx = grad_y_f
            .iter()
            .map(|g| (0..n).map(|j| g.differentiate(Var::X(j))).collect())
            .collect();
        let hess_yy = grad_y_f
            .iter()
            .map(|g| (0..m).map(|k| g.differentiate(Var::Y(k))).collect())
            .collect();
        Self {
            n,
            m,
            grad_upper,
            grad_y_f,
            hess_yx,
            hess_yy,
        }
    }

    pub fn bundle(&self, x: &[f64], y: &[f64]) -> Result<DerivativeBundle, CalculusError> {
        check_len("x", self.n, x)?;
        check_len("y", self.m, y)?;
        let vec = |trees: &[Expr], block| -> Result<Vec<f64>, CalculusError> {
            trees
                .iter()
                .map(|e| e.evaluate(x, y).map_err(eval_err(block)))
                .collect()
        };
        let mat = |trees: &[Vec<Expr>], block| -> Result<Vec<Vec<f64>>, CalculusError> {
            trees.iter().map(|row| vec(row, block)).collect()
        };
        let grad_upper = vec(&self.grad_upper, "∇F")?;
        Ok(DerivativeBundle {
            xi1: grad_upper[..self.n].to_vec(),
            xi2: grad_upper[self.n..].to_vec(),
            grad_y_f: vec(&self.grad_y_f, "∇_y f")?,
            hess_yx: mat(&self.hess_yx, "∇_yx f")?,
            hess_yy: mat(&self.hess_yy, "∇_yy f")?,
            exact: self.exact(x, y)?,
        })
    }

    fn exact(&self, x: &[f64], y: &[f64]) -> Result<Option<ExactBundle>, CalculusError> {
        let xr: Vec<BigRational> = x.iter().map(|&v| BigRational::from_float(v).expect("finite")).collect();
        let yr: Vec<BigRational> = y.iter().map(|&v| BigRational::from_float(v).expect("finite")).collect();
        let vec = |trees: &[Expr], block| -> Result<Option<Vec<BigRational>>, CalculusError> {
            trees
                .iter()
                .map(|e| e.evaluate_exact(&xr, &yr).map_err(eval_err(block)))
                .collect::<Result<Option<Vec<_>>, _>>()
        };
        let mat = |trees: &[Vec<Expr>], block| -> Result<Option<Vec<Vec<BigRational>>>, CalculusError> {
            trees
                .iter()
                .map(|row| vec(row, block))
                .collect::<Result<Option<Vec<_>>, _>>()
        };
        let Some(grad_upper) = vec(&self.grad_upper, "∇F")? else {
            return Ok(None);
        };
        let (Some(grad_y_f), Some(hess_yx), Some(hess_yy)) = (
            vec(&self.grad_y_f, "∇_y f")?,
            mat(&self.hess_yx, "∇_yx f")?,
            mat(&self.hess_yy, "∇_yy f")?,
        ) else {
            return Ok(None);
        };
        Ok(Some(ExactBundle {
            xi1: grad_upper[..self.n].to_vec(),
            xi2: grad_upper[self.n..].to_vec(),
            grad_y_f,
            hess_yx,
            hess_yy,
        }))
    }
}

/// All derivative blocks at the candidate, symbolic first.
pub fn derivative_bundle(problem: &BilevelProblem, c: &Candidate) -> Result<DerivativeBundle, CalculusError> {
    DerivativeTrees::new(problem).bundle(&c.x, &c.y)
}

/// Cross-check every block of `bundle` against central differences of the
/// next-lower derivative.
pub fn verify_bundle(
    problem: &BilevelProblem,
    c: &Candidate,
    bundle: &DerivativeBundle,
    fd: &FiniteDifference,
) -> Result<(), CalculusError> {
    let (n, m) = (problem.n, problem.m);
    let point: Vec<f64> = c.x.iter().chain(&c.y).copied().collect();
    let check = |block: &'static str, row: usize, col: usize, exact: f64, tree: &Expr| -> Result<(), CalculusError> {
        let approx = FiniteDifference::central(&point, col, |p| tree.evaluate_joint(n, p)).map_err(eval_err(block))?;
        if fd.agrees(exact, approx) {
            Ok(())
        } else {
            Err(CalculusError::FiniteDifference {
                block,
                row,
                col,
                exact,
                fd: approx,
            })
        }
    };
    let grad_upper: Vec<f64> = bundle.xi1.iter().chain(&bundle.xi2).copied().collect();
    for (j, &v) in grad_upper.iter().enumerate() {
        check("∇F", 0, j, v, problem.upper_expr())?;
    }
    for (i, &v) in bundle.grad_y_f.iter().enumerate() {
        check("∇_y f", 0, n + i, v, problem.lower_expr())?;
    }
    let grad_trees = problem.lower_gradient_y();
    for i in 0..m {
        for j in 0..n {
            check("∇_yx f", i, j, bundle.hess_yx[i][j], &grad_trees[i])?;
        }
        for k in 0..m {
            // column index of y_k in the joint point
            let col = n + k;
            check("∇_yy f", i, col, bundle.hess_yy[i][k], &grad_trees[i])?;
        }
    }
    Ok(())
}

/// `∇h(point)` with rows indexed by components of `h`.
pub fn jacobian(h: &SmoothFunction, point: &[f64]) -> Result<Vec<Vec<f64>>, CalculusError> {
    check_len("point", h.joint_dim(), point)?;
    h.jacobian_trees()
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| e.evaluate_joint(h.n(), point).map_err(eval_err("Jacobian")))
                .collect()
        })
        .collect()
}

/// `D*h(point)(y*) = {∇h(point)ᵀ y*}`, returned as its single element.
pub fn coderivative_smooth(h: &SmoothFunction, point: &[f64], y_star: &[f64]) -> Result<Vec<f64>, CalculusError> {
    check_len("y*", h.output_dim(), y_star)?;
    let jac = jacobian(h, point)?;
    let mut out = vec![0.0; h.joint_dim()];
    for (row, &w) in jac.iter().zip(y_star) {
        for (o, &a) in out.iter_mut().zip(row) {
            *o += a * w;
        }
    }
    Ok(out)
}

/// Gradient of the scalar function `⟨z*, h⟩` at `point`, differentiated as
/// one expression tree.
pub fn scalarized_subdifferential(
    h: &SmoothFunction,
    z_star: &[f64],
    point: &[f64],
) -> Result<Vec<f64>, CalculusError> {
    check_len("z*", h.output_dim(), z_star)?;
    check_len("point", h.joint_dim(), point)?;
    scalarized_gradient_trees(h, z_star)
        .iter()
        .map(|t| t.evaluate_joint(h.n(), point).map_err(eval_err("⟨z*, h⟩")))
        .collect()
}

/// Symbolic gradient of `⟨z*, h⟩` with respect to the joint variables.
pub fn scalarized_gradient_trees(h: &SmoothFunction, z_star: &[f64]) -> Vec<Expr> {
    let scalarized = scalarize(h, z_star);
    (0..h.joint_dim())
        .map(|j| scalarized.differentiate(Var::from_joint(j, h.n())))
        .collect()
}

fn scalarize(h: &SmoothFunction, z_star: &[f64]) -> Expr {
    use crate::expr::BinaryOp;
    h.components()
        .iter()
        .zip(z_star)
        .filter(|(_, &w)| w != 0.0)
        .map(|(e, &w)| Expr::Binary(BinaryOp::Mul, Box::new(Expr::Const(w)), Box::new(e.clone())))
        .reduce(|a, b| Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b)))
        .unwrap_or(Expr::Const(0.0))
}

/// `∂^∞ h(point) = {0}` for a smooth, hence locally Lipschitz, function.
pub fn singular_subdifferential_smooth(h: &SmoothFunction, point: &[f64]) -> Result<PolyhedralCone, CalculusError> {
    check_len("point", h.joint_dim(), point)?;
    Ok(PolyhedralCone::zero(h.joint_dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::model::{BoxSet, LowerSet, Polyhedron};

    fn problem(upper: &str, lower: &str, n: usize, m: usize) -> BilevelProblem {
        BilevelProblem {
            n,
            m,
            upper: SmoothFunction::scalar(n, m, parse(upper, n, m).unwrap()),
            lower: SmoothFunction::scalar(n, m, parse(lower, n, m).unwrap()),
            omega: Polyhedron::whole_space(n),
            k: LowerSet::Box(BoxSet::unbounded(m)),
        }
    }

    #[test]
    fn quadratic_bundle() {
        let p = problem("(x1-1)^2 + (y1-2)^2", "(y1-x1)^2/2", 1, 1);
        let c = Candidate::new(&p, vec![1.5], vec![1.5]).unwrap();
        let b = derivative_bundle(&p, &c).unwrap();
        assert_eq!(b.xi1, vec![1.0]);
        assert_eq!(b.xi2, vec![-1.0]);
        assert_eq!(b.grad_y_f, vec![0.0]);
        assert_eq!(b.hess_yx, vec![vec![-1.0]]);
        assert_eq!(b.hess_yy, vec![vec![1.0]]);
        let exact = b.exact.as_ref().unwrap();
        assert_eq!(exact.xi1[0], BigRational::from_integer(1.into()));
        verify_bundle(&p, &c, &b, &FiniteDifference::default()).unwrap();
    }

    #[test]
    fn constant_lower_level_has_zero_blocks() {
        let p = problem("x1*y1", "3", 1, 2);
        let c = Candidate::new(&p, vec![0.0], vec![0.0, 0.0]).unwrap();
        let b = derivative_bundle(&p, &c).unwrap();
        assert_eq!(b.xi1, vec![0.0]);
        assert_eq!(b.xi2, vec![0.0, 0.0]);
        assert!(b
            .hess_yy
            .iter()
            .flatten()
            .chain(b.hess_yx.iter().flatten())
            .all(|&v| v == 0.0));
    }

    #[test]
    fn transcendental_data_has_no_exact_bundle() {
        let p = problem("sin(x1) + y1", "exp(y1)*x1", 1, 1);
        let c = Candidate::new(&p, vec![0.3], vec![0.2]).unwrap();
        let b = derivative_bundle(&p, &c).unwrap();
        assert!(b.exact.is_none());
        verify_bundle(&p, &c, &b, &FiniteDifference::default()).unwrap();
    }

    #[test]
    fn domain_errors_name_the_block() {
        let p = problem("x1", "y1^2/x1", 1, 1);
        let err = Candidate::new(&p, vec![0.0], vec![1.0]).unwrap_err();
        assert!(matches!(
            err,
            crate::model::CandidateError::Eval(EvalError::DivisionByZero(_))
        ));
        let trees = DerivativeTrees::new(&p);
        match trees.bundle(&[0.0], &[1.0]) {
            Err(CalculusError::Eval { block, .. }) => assert_eq!(block, "∇_y f"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coderivative_of_difference_map() {
        let h = SmoothFunction::vector(1, 1, vec![parse("y1 - x1", 1, 1).unwrap()]);
        assert_eq!(coderivative_smooth(&h, &[1.5, 1.5], &[1.0]).unwrap(), vec![-1.0, 1.0]);
        let g = 0.7;
        assert_eq!(scalarized_subdifferential(&h, &[g], &[1.5, 1.5]).unwrap(), vec![-g, g]);
        assert_eq!(
            scalarized_subdifferential(&h, &[0.0], &[1.5, 1.5]).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn coderivative_of_identity_and_linear_maps() {
        let id = SmoothFunction::vector(1, 1, vec![parse("x1", 1, 1).unwrap(), parse("y1", 1, 1).unwrap()]);
        assert_eq!(
            coderivative_smooth(&id, &[3.0, -2.0], &[0.25, -4.0]).unwrap(),
            vec![0.25, -4.0]
        );
        let lin = SmoothFunction::vector(
            1,
            1,
            vec![parse("2*x1 + 3*y1", 1, 1).unwrap(), parse("-x1 + 5*y1", 1, 1).unwrap()],
        );
        // Mᵀ y* with M = [[2, 3], [-1, 5]]
        assert_eq!(
            coderivative_smooth(&lin, &[0.0, 0.0], &[1.0, 2.0]).unwrap(),
            vec![0.0, 13.0]
        );
    }

    #[test]
    fn singular_subdifferential_is_trivial() {
        let h = SmoothFunction::scalar(2, 1, parse("x1^3*y1 + sin(x2)", 2, 1).unwrap());
        let c = singular_subdifferential_smooth(&h, &[0.0, 0.0, 0.0]).unwrap();
        assert!(c.same_as(&PolyhedralCone::zero(3)).unwrap());
        assert!(singular_subdifferential_smooth(&h, &[0.0]).is_err());
    }
}
