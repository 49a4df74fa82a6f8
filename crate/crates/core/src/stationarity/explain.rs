use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::nnls::nnls;
use crate::calculus::DerivativeBundle;
use crate::config::Tolerances;
use crate::model::{BilevelProblem, Candidate, CertificateError, MStationarityCertificate};
use crate::polyhedral::{limiting_normal_cone_gph, ConeForm, Generators, GraphCaps, GraphError, Halfspaces};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExplainError {
    #[error(transparent)]
    Shape(#[from] CertificateError),
    #[error("certificate dimensions do not match the problem")]
    Dimension,
    #[error("certificate lists Omega rows {listed:?} but rows {actual:?} are active")]
    ActiveSet { listed: Vec<usize>, actual: Vec<usize> },
    #[error("branch {0} is not a branch of the graph normal cone at this point")]
    UnknownBranch(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("stale certificate: equation residual {equation:e}, cone margin {cone_margin:e}")]
    Stale { equation: f64, cone_margin: f64 },
}

/// Residuals of a certificate recomputed from the derivative data alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateReport {
    pub branch: String,
    pub description: Vec<String>,
    /// `max_j |ξ₁ + ∇_{yx}fᵀγ + A_actᵀμ|_j`
    pub residual_x: f64,
    /// `max_k |ξ₂ + ∇_{yy}fᵀγ − β|_k`
    pub residual_y: f64,
    /// `max_j |η − A_actᵀμ|_j`
    pub eta_residual: f64,
    /// Distance of `(−β, −γ)` from the branch cone.
    pub cone_margin: f64,
}

impl CertificateReport {
    pub fn equation_residual(&self) -> f64 {
        self.residual_x.max(self.residual_y).max(self.eta_residual)
    }
}

fn halfspace_margin(h: &Halfspaces, v: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (rows, two_sided) in [(&h.inequalities, false), (&h.equalities, true)] {
        for r in rows {
            let norm = r.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let s: f64 = r.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / norm;
            worst = worst.max(if two_sided { s.abs() } else { s });
        }
    }
    worst
}

/// Euclidean distance from `v` to `cone(rays) + span(lines)`.
fn generator_margin(g: &Generators, v: &[f64]) -> f64 {
    let d = v.len();
    let cols: Vec<Vec<f64>> = g
        .rays
        .iter()
        .cloned()
        .chain(g.lines.iter().cloned())
        .chain(g.lines.iter().map(|l| l.iter().map(|x| -x).collect()))
        .collect();
    let b = DVector::from_column_slice(v);
    if cols.is_empty() {
        return b.norm();
    }
    let a = DMatrix::from_fn(d, cols.len(), |i, j| cols[j][i]);
    let lambda = nnls(&a, &b);
    (a * lambda - b).norm()
}

/// Recompute every residual of `cert` without the feasibility solver and
/// describe its branch.
pub fn explain_certificate(
    problem: &BilevelProblem,
    c: &Candidate,
    cert: &MStationarityCertificate,
    bundle: &DerivativeBundle,
    tol: &Tolerances,
    caps: GraphCaps,
) -> Result<CertificateReport, ExplainError> {
    cert.check_shape()?;
    let (n, m) = (problem.n, problem.m);
    if cert.alpha.len() != n || cert.beta.len() != m || bundle.xi1.len() != n || bundle.xi2.len() != m {
        return Err(ExplainError::Dimension);
    }
    let actual: Vec<usize> = (0..problem.omega.num_rows())
        .filter(|&i| problem.omega.row_value(i, &c.x) >= problem.omega.rhs()[i] - tol.active_set)
        .collect();
    if actual != cert.omega_active {
        return Err(ExplainError::ActiveSet {
            listed: cert.omega_active.clone(),
            actual,
        });
    }

    let mut eta = vec![0.0; n];
    for (a, &row) in cert.omega_active.iter().enumerate() {
        for j in 0..n {
            eta[j] += problem.omega.rows()[row][j] * cert.mu[a];
        }
    }
    let eta_residual = eta
        .iter()
        .zip(&cert.eta)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let residual_x = (0..n)
        .map(|j| {
            let s: f64 = (0..m).map(|i| bundle.hess_yx[i][j] * cert.gamma[i]).sum();
            (bundle.xi1[j] + s + eta[j]).abs()
        })
        .fold(0.0, f64::max);
    let residual_y = (0..m)
        .map(|k| {
            let s: f64 = (0..m).map(|i| bundle.hess_yy[i][k] * cert.gamma[i]).sum();
            (bundle.xi2[k] + s - cert.beta[k]).abs()
        })
        .fold(0.0, f64::max);

    let z: Vec<f64> = bundle.grad_y_f.iter().map(|v| -v).collect();
    let graph = limiting_normal_cone_gph(&problem.k, &c.y, &z, tol.active_set, caps)?;
    let branch = graph
        .branch(&cert.branch)
        .ok_or_else(|| ExplainError::UnknownBranch(cert.branch.clone()))?;
    let v: Vec<f64> = cert.beta.iter().chain(&cert.gamma).map(|x| -x).collect();
    let cone_margin = match branch.cone.form() {
        ConeForm::Halfspaces(h) | ConeForm::Both(_, h) => halfspace_margin(h, &v),
        ConeForm::Generators(g) => generator_margin(g, &v),
        ConeForm::Intersection(g, h) => halfspace_margin(h, &v).max(generator_margin(g, &v)),
    };

    let report = CertificateReport {
        branch: branch.label.clone(),
        description: branch.pattern.describe(),
        residual_x,
        residual_y,
        eta_residual,
        cone_margin,
    };
    if report.equation_residual() > tol.equation || cone_margin > tol.cone_margin {
        return Err(ExplainError::Stale {
            equation: report.equation_residual(),
            cone_margin,
        });
    }
    Ok(report)
}
