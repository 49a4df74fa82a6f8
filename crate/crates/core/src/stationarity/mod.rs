//! M-stationarity and qualification checks at a candidate point.
//!
//! With `K` fixed, the multiplier system on a branch `B` of the limiting
//! normal cone to `gph N_K` at `(ȳ, z̄)`, `z̄ = -∇_y f(x̄, ȳ)`, is
//!
//! ```text
//! ξ₁ + ∇_{yx}fᵀγ + A_actᵀμ = 0,   μ ≥ 0
//! ξ₂ + ∇_{yy}fᵀγ − β       = 0
//! (−β, −γ) ∈ B
//! ```
//!
//! with `(ξ₁, ξ₂) = ∇F(x̄, ȳ)` and `η = A_actᵀμ ∈ N(x̄, Ω)`.

mod explain;
mod nnls;
#[cfg(test)]
mod proptests;

use num_rational::BigRational;
use thiserror::Error;

pub use explain::{explain_certificate, CertificateReport, ExplainError};
pub use nnls::nnls;

use crate::calculus::{scalarized_gradient_trees, CalculusError, DerivativeBundle, DerivativeTrees, ExactBundle};
use crate::config::Tolerances;
use crate::expr::EvalError;
use crate::feasibility::{
    cone_nonzero, feasible, min_norm_on_face, ConeVerdict, Feasibility, LinearSystem, LpError, Mode, Scalar,
};
use crate::model::{
    BilevelProblem, Candidate, CandidateError, ExactMultipliers, MStationarityCertificate, MpecProblem, Polyhedron,
    QualificationReport, QualificationWitness, Residuals,
};
use crate::polyhedral::{limiting_normal_cone_gph, Branch, ConeError, GraphCaps, GraphError, GraphNormalCone};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StationarityError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Candidate(#[from] CandidateError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("x is not in Omega (violation {violation:e})")]
    NotInOmega { violation: f64 },
}

impl From<ConeError> for StationarityError {
    fn from(e: ConeError) -> Self {
        match e {
            ConeError::Lp(e) => StationarityError::Lp(e),
            other => unreachable!("{other}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StationarityOptions {
    pub tolerances: Tolerances,
    pub mode: Mode,
    pub caps: GraphCaps,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StationarityOutcome {
    Stationary(MStationarityCertificate),
    NotStationary { branches_checked: usize },
}

impl StationarityOutcome {
    pub fn certificate(&self) -> Option<&MStationarityCertificate> {
        match self {
            StationarityOutcome::Stationary(c) => Some(c),
            StationarityOutcome::NotStationary { .. } => None,
        }
    }
}

/// Gradient of the objective and Jacobian of the equilibrium map `G`
/// (`∇_y f` for a bilevel problem) at the candidate.
#[derive(Debug, Clone, PartialEq)]
struct SystemData<T> {
    n: usize,
    m: usize,
    /// `∇J`, length `n + m`.
    xi: Vec<T>,
    /// Row `i` is `∇G_i`, length `n + m`.
    jg: Vec<Vec<T>>,
}

impl SystemData<f64> {
    fn from_bundle(n: usize, m: usize, b: &DerivativeBundle) -> Self {
        Self {
            n,
            m,
            xi: b.xi1.iter().chain(&b.xi2).copied().collect(),
            jg: (0..m)
                .map(|i| b.hess_yx[i].iter().chain(&b.hess_yy[i]).copied().collect())
                .collect(),
        }
    }

    fn to_rational(&self) -> SystemData<BigRational> {
        let r = |v: &f64| <BigRational as Scalar>::from_f64(*v);
        SystemData {
            n: self.n,
            m: self.m,
            xi: self.xi.iter().map(r).collect(),
            jg: self.jg.iter().map(|row| row.iter().map(r).collect()).collect(),
        }
    }
}

impl SystemData<BigRational> {
    fn from_exact(n: usize, m: usize, b: &ExactBundle) -> Self {
        Self {
            n,
            m,
            xi: b.xi1.iter().chain(&b.xi2).cloned().collect(),
            jg: (0..m)
                .map(|i| b.hess_yx[i].iter().chain(&b.hess_yy[i]).cloned().collect())
                .collect(),
        }
    }
}

/// Rows of `Ω` active at `x̄` together with their indices.
fn omega_active(omega: &Polyhedron, x: &[f64], tol: &Tolerances) -> Result<Vec<usize>, StationarityError> {
    let violation = omega.violation(x);
    if violation > tol.active_set {
        return Err(StationarityError::NotInOmega { violation });
    }
    Ok(omega.active_set(x, tol.active_set).indices().to_vec())
}

fn row_of<T: Scalar>(len: usize) -> Vec<T> {
    vec![T::zero(); len]
}

/// Variables: `β` (0..m), `γ` (m..2m), `μ` (2m..2m+k), then cone auxiliaries.
fn multiplier_system<T: Scalar>(
    d: &SystemData<T>,
    omega: &Polyhedron,
    active: &[usize],
    branch: &Branch,
) -> Result<LinearSystem<T>, StationarityError> {
    let (n, m, k) = (d.n, d.m, active.len());
    let mut sys = LinearSystem::new(2 * m + k);
    for a in 0..k {
        sys.set_nonneg(2 * m + a);
    }
    for j in 0..n {
        let mut row = row_of::<T>(sys.num_vars());
        for i in 0..m {
            row[m + i] = d.jg[i][j].clone();
        }
        for (a, &r) in active.iter().enumerate() {
            row[2 * m + a] = T::from_f64(omega.rows()[r][j]);
        }
        sys.add_eq(row, d.xi[j].neg())?;
    }
    for kk in 0..m {
        let mut row = row_of::<T>(sys.num_vars());
        for i in 0..m {
            row[m + i] = d.jg[i][n + kk].clone();
        }
        row[kk] = row[kk].sub(&T::one());
        sys.add_eq(row, d.xi[n + kk].neg())?;
    }
    let vars: Vec<usize> = (0..2 * m).collect();
    branch.cone.add_membership(&mut sys, &vars, -1.0)?;
    Ok(sys)
}

/// Max-abs residual of both equation blocks, in floating point.
fn equation_residual(
    d: &SystemData<f64>,
    omega: &Polyhedron,
    active: &[usize],
    beta: &[f64],
    gamma: &[f64],
    mu: &[f64],
) -> f64 {
    let (n, m) = (d.n, d.m);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let mut r = d.xi[j];
        for i in 0..m {
            r += d.jg[i][j] * gamma[i];
        }
        for (a, &row) in active.iter().enumerate() {
            r += omega.rows()[row][j] * mu[a];
        }
        worst = worst.max(r.abs());
    }
    for k in 0..m {
        let mut r = d.xi[n + k] - beta[k];
        for i in 0..m {
            r += d.jg[i][n + k] * gamma[i];
        }
        worst = worst.max(r.abs());
    }
    worst
}

fn certificate_from<T: Scalar + std::fmt::Display>(
    point: &[T],
    float_point: &[f64],
    d: &SystemData<f64>,
    omega: &Polyhedron,
    active: &[usize],
    branch: &Branch,
) -> Result<MStationarityCertificate, StationarityError> {
    let (n, m, k) = (d.n, d.m, active.len());
    let beta = float_point[..m].to_vec();
    let gamma = float_point[m..2 * m].to_vec();
    let mu = float_point[2 * m..2 * m + k].to_vec();
    let mut eta = vec![0.0; n];
    for (a, &r) in active.iter().enumerate() {
        for (j, e) in eta.iter_mut().enumerate() {
            *e += omega.rows()[r][j] * mu[a];
        }
    }
    let neg: Vec<f64> = beta.iter().chain(&gamma).map(|v| -v).collect();
    let cone_margin = branch.cone.contains(&neg, f64::INFINITY)?.violation;
    let exact = T::EXACT.then(|| {
        let s = |range: std::ops::Range<usize>| point[range].iter().map(|v| v.to_string()).collect();
        ExactMultipliers {
            beta: s(0..m),
            gamma: s(m..2 * m),
            mu: s(2 * m..2 * m + k),
        }
    });
    Ok(MStationarityCertificate {
        branch: branch.label.clone(),
        alpha: vec![0.0; n],
        residuals: Residuals {
            equation: equation_residual(d, omega, active, &beta, &gamma, &mu),
            cone_margin,
        },
        beta,
        gamma,
        eta,
        omega_active: active.to_vec(),
        mu,
        exact,
    })
}

fn search_branches(
    data: &SystemData<f64>,
    exact: Option<SystemData<BigRational>>,
    omega: &Polyhedron,
    active: &[usize],
    graph: &GraphNormalCone,
    opts: &StationarityOptions,
) -> Result<StationarityOutcome, StationarityError> {
    let tol = &opts.tolerances;
    let mut checked = 0;
    let rational = match opts.mode {
        Mode::Rational => Some(exact.unwrap_or_else(|| data.to_rational())),
        Mode::Float => None,
    };
    for branch in graph.branches() {
        checked += 1;
        let cert = match &rational {
            Some(rd) => {
                let sys = multiplier_system(rd, omega, active, &branch)?;
                match feasible(&sys)? {
                    Feasibility::Infeasible => continue,
                    Feasibility::Feasible(p) => {
                        let fp: Vec<f64> = p.iter().map(Scalar::to_f64).collect();
                        certificate_from(&p, &fp, data, omega, active, &branch)?
                    }
                }
            }
            None => {
                let sys = multiplier_system(data, omega, active, &branch)?;
                match feasible(&sys)? {
                    Feasibility::Infeasible => continue,
                    Feasibility::Feasible(p) => {
                        let refined = min_norm_on_face(&sys, &p, tol.equation);
                        let p = if sys.violation(&refined) <= tol.equation {
                            refined
                        } else {
                            p
                        };
                        certificate_from(&p, &p, data, omega, active, &branch)?
                    }
                }
            }
        };
        if cert.residuals.equation <= tol.equation && cert.residuals.cone_margin <= tol.cone_margin {
            return Ok(StationarityOutcome::Stationary(cert));
        }
    }
    Ok(StationarityOutcome::NotStationary {
        branches_checked: checked,
    })
}

/// Prepared data for one candidate of a bilevel problem.
#[derive(Debug, Clone)]
pub struct CandidateContext {
    pub bundle: DerivativeBundle,
    pub z: Vec<f64>,
    pub omega_active: Vec<usize>,
    pub graph: GraphNormalCone,
}

impl CandidateContext {
    pub fn new(problem: &BilevelProblem, c: &Candidate, opts: &StationarityOptions) -> Result<Self, StationarityError> {
        let bundle = DerivativeTrees::new(problem).bundle(&c.x, &c.y)?;
        let z: Vec<f64> = bundle.grad_y_f.iter().map(|v| -v).collect();
        let omega_active = omega_active(&problem.omega, &c.x, &opts.tolerances)?;
        let graph = limiting_normal_cone_gph(&problem.k, &c.y, &z, opts.tolerances.active_set, opts.caps)?;
        Ok(Self {
            bundle,
            z,
            omega_active,
            graph,
        })
    }
}

/// First certificate in branch order, or `NotStationary` when every branch
/// system is infeasible.
pub fn check_m_stationarity(
    problem: &BilevelProblem,
    c: &Candidate,
    opts: &StationarityOptions,
) -> Result<StationarityOutcome, StationarityError> {
    let ctx = CandidateContext::new(problem, c, opts)?;
    m_stationarity_in(problem, &ctx, opts)
}

pub fn m_stationarity_in(
    problem: &BilevelProblem,
    ctx: &CandidateContext,
    opts: &StationarityOptions,
) -> Result<StationarityOutcome, StationarityError> {
    let data = SystemData::from_bundle(problem.n, problem.m, &ctx.bundle);
    let exact = ctx
        .bundle
        .exact
        .as_ref()
        .map(|e| SystemData::from_exact(problem.n, problem.m, e));
    search_branches(&data, exact, &problem.omega, &ctx.omega_active, &ctx.graph, opts)
}

/// The same multiplier search for `min J` s.t. `0 ∈ G + N_K`, `x ∈ Ω`, with
/// `∂⟨z*, G⟩` taken from the scalarized gradient of `G`.
pub fn check_mpec_stationarity(
    mpec: &MpecProblem,
    c: &Candidate,
    opts: &StationarityOptions,
) -> Result<StationarityOutcome, StationarityError> {
    let (n, m) = (mpec.n, mpec.m);
    let point: Vec<f64> = c.x.iter().chain(&c.y).copied().collect();
    let eval_block = |block: &'static str| move |source: EvalError| CalculusError::Eval { block, source };
    let objective_grad = scalarized_gradient_trees(&mpec.objective, &[1.0]);
    let g_grads: Vec<Vec<crate::expr::Expr>> = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            scalarized_gradient_trees(&mpec.constraint_map, &e)
        })
        .collect();
    let xi: Vec<f64> = objective_grad
        .iter()
        .map(|t| t.evaluate_joint(n, &point).map_err(eval_block("∇J")))
        .collect::<Result<_, _>>()?;
    let jg: Vec<Vec<f64>> = g_grads
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| t.evaluate_joint(n, &point).map_err(eval_block("∇G")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let data = SystemData { n, m, xi, jg };

    let xr: Vec<BigRational> = c.x.iter().map(|&v| Scalar::from_f64(v)).collect();
    let yr: Vec<BigRational> = c.y.iter().map(|&v| Scalar::from_f64(v)).collect();
    let exact_vec =
        |trees: &[crate::expr::Expr], block: &'static str| -> Result<Option<Vec<BigRational>>, CalculusError> {
            trees
                .iter()
                .map(|t| t.evaluate_exact(&xr, &yr).map_err(eval_block(block)))
                .collect()
        };
    let exact = match exact_vec(&objective_grad, "∇J")? {
        Some(xi) => g_grads
            .iter()
            .map(|row| exact_vec(row, "∇G"))
            .collect::<Result<Option<Vec<_>>, _>>()?
            .map(|jg| SystemData { n, m, xi, jg }),
        None => None,
    };

    let g_value = mpec.constraint_map.evaluate(&c.x, &c.y).map_err(eval_block("G"))?;
    let z: Vec<f64> = g_value.iter().map(|v| -v).collect();
    let active = omega_active(&mpec.omega, &c.x, &opts.tolerances)?;
    let graph = limiting_normal_cone_gph(&mpec.k, &c.y, &z, opts.tolerances.active_set, opts.caps)?;
    search_branches(&data, exact, &mpec.omega, &active, &graph, opts)
}

/// Decide whether the homogeneous system
/// `x* = 0`, `x* = ∇_{yx}fᵀz* + A_actᵀμ`, `y* = ∇_{yy}fᵀz*`, `(−y*, −z*) ∈ B`
/// admits only `x* = y* = z* = 0` on every branch `B`.
pub fn check_qualification(
    problem: &BilevelProblem,
    c: &Candidate,
    opts: &StationarityOptions,
) -> Result<QualificationReport, StationarityError> {
    let ctx = CandidateContext::new(problem, c, opts)?;
    qualification_in(problem, &ctx, opts)
}

pub fn qualification_in(
    problem: &BilevelProblem,
    ctx: &CandidateContext,
    opts: &StationarityOptions,
) -> Result<QualificationReport, StationarityError> {
    let data = SystemData::from_bundle(problem.n, problem.m, &ctx.bundle);
    let exact = ctx
        .bundle
        .exact
        .as_ref()
        .map(|e| SystemData::from_exact(problem.n, problem.m, e));
    let rational = match opts.mode {
        Mode::Rational => Some(exact.unwrap_or_else(|| data.to_rational())),
        Mode::Float => None,
    };
    let (n, m) = (problem.n, problem.m);
    let probe: Vec<usize> = (0..n + 2 * m).collect();
    let mut checked = 0;
    for branch in ctx.graph.branches() {
        checked += 1;
        let verdict = match &rational {
            Some(rd) => {
                let sys = homogeneous_system(rd, &problem.omega, &ctx.omega_active, &branch)?;
                cone_nonzero(&sys, Some(&probe))?
            }
            None => {
                let sys = homogeneous_system(&data, &problem.omega, &ctx.omega_active, &branch)?;
                cone_nonzero(&sys, Some(&probe))?
            }
        };
        if let ConeVerdict::Nonzero { witness, .. } = verdict {
            return Ok(QualificationReport {
                holds: false,
                witness: Some(QualificationWitness {
                    branch: branch.label.clone(),
                    x_star: witness[..n].to_vec(),
                    y_star: witness[n..n + m].to_vec(),
                    z_star: witness[n + m..n + 2 * m].to_vec(),
                }),
                branches_checked: checked,
            });
        }
    }
    Ok(QualificationReport {
        holds: true,
        witness: None,
        branches_checked: checked,
    })
}

/// Variables: `x*` (0..n), `y*` (n..n+m), `z*` (n+m..n+2m), `μ ≥ 0`, then
/// cone auxiliaries.
fn homogeneous_system<T: Scalar>(
    d: &SystemData<T>,
    omega: &Polyhedron,
    active: &[usize],
    branch: &Branch,
) -> Result<LinearSystem<T>, StationarityError> {
    let (n, m, k) = (d.n, d.m, active.len());
    let (ys, zs, mus) = (n, n + m, n + 2 * m);
    let mut sys = LinearSystem::new(n + 2 * m + k);
    for a in 0..k {
        sys.set_nonneg(mus + a);
    }
    for j in 0..n {
        // the x-block of the graph normal cone is {0} for fixed K
        let mut row = row_of::<T>(sys.num_vars());
        row[j] = T::one();
        sys.add_eq(row, T::zero())?;

        let mut row = row_of::<T>(sys.num_vars());
        row[j] = T::one();
        for i in 0..m {
            row[zs + i] = d.jg[i][j].neg();
        }
        for (a, &r) in active.iter().enumerate() {
            row[mus + a] = T::from_f64(-omega.rows()[r][j]);
        }
        sys.add_eq(row, T::zero())?;
    }
    for kk in 0..m {
        let mut row = row_of::<T>(sys.num_vars());
        row[ys + kk] = T::one();
        for i in 0..m {
            row[zs + i] = d.jg[i][n + kk].neg();
        }
        sys.add_eq(row, T::zero())?;
    }
    let vars: Vec<usize> = (ys..ys + 2 * m).collect();
    branch.cone.add_membership(&mut sys, &vars, -1.0)?;
    Ok(sys)
}
