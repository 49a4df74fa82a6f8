//! Problem classes, feasible-set geometry and certificate records.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, Var, MAX_EXPONENT};
use crate::feasibility::{feasible, Feasibility, LinearSystem};

/// `{v : A v ≤ b}`; no rows denotes the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyhedron {
    dim: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("row {row} has {found} entries, expected {expected}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("{rows} rows but {rhs} right-hand sides")]
    RhsLength { rows: usize, rhs: usize },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("box coordinate {0} has lower bound above upper bound")]
    InvertedBounds(usize),
    #[error("box bounds have lengths {lower} and {upper}")]
    BoundLength { lower: usize, upper: usize },
}

impl Polyhedron {
    pub fn new(dim: usize, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self, GeometryError> {
        if a.len() != b.len() {
            return Err(GeometryError::RhsLength {
                rows: a.len(),
                rhs: b.len(),
            });
        }
        for (row, r) in a.iter().enumerate() {
            if r.len() != dim {
                return Err(GeometryError::RowLength {
                    row,
                    expected: dim,
                    found: r.len(),
                });
            }
        }
        if a.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite("constraint matrix"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite("right-hand side"));
        }
        Ok(Self { dim, a, b })
    }

    pub fn whole_space(dim: usize) -> Self {
        Self {
            dim,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn row_value(&self, i: usize, v: &[f64]) -> f64 {
        dot(&self.a[i], v)
    }

    /// Largest violation `max_i (a_i·v - b_i)_+`.
    pub fn violation(&self, v: &[f64]) -> f64 {
        (0..self.num_rows())
            .map(|i| self.row_value(i, v) - self.b[i])
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        v.len() == self.dim && self.violation(v) <= tol
    }

    /// Rows with `a_i·v ≥ b_i - tol`, ascending.
    pub fn active_set(&self, v: &[f64], tol: f64) -> ActiveSet {
        ActiveSet(
            (0..self.num_rows())
                .filter(|&i| self.row_value(i, v) >= self.b[i] - tol)
                .collect(),
        )
    }

    /// Decided exactly by a rational phase-one solve.
    pub fn is_empty(&self) -> bool {
        let mut sys = LinearSystem::new(self.dim);
        for (r, b) in self.a.iter().zip(&self.b) {
            sys.add_le(r.clone(), *b).expect("row length checked at construction");
        }
        match feasible(&sys.to_rational()) {
            Ok(Feasibility::Feasible(_)) => false,
            Ok(Feasibility::Infeasible) => true,
            // Cycling guard: treat as undecided-nonempty; rows are tiny in practice.
            Err(_) => false,
        }
    }
}

/// Sorted indices of constraint rows active at a point.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ActiveSet(pub Vec<usize>);

impl ActiveSet {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Interval product `[lower, upper]`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, GeometryError> {
        if lower.len() != upper.len() {
            return Err(GeometryError::BoundLength {
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        if lower.iter().chain(&upper).any(|v| v.is_nan()) {
            return Err(GeometryError::NonFinite("box bounds"));
        }
        if lower.contains(&f64::INFINITY) || upper.contains(&f64::NEG_INFINITY) {
            return Err(GeometryError::NonFinite("box bounds"));
        }
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(GeometryError::InvertedBounds(i));
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        y.len() == self.dim() && (0..self.dim()).all(|i| y[i] >= self.lower[i] - tol && y[i] <= self.upper[i] + tol)
    }

    /// Inequality form: for each coordinate, `y_i ≤ u_i` then `-y_i ≤ -l_i`,
    /// omitting infinite bounds.
    pub fn to_polyhedron(&self) -> Polyhedron {
        let m = self.dim();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for i in 0..m {
            if self.upper[i].is_finite() {
                let mut r = vec![0.0; m];
                r[i] = 1.0;
                a.push(r);
                b.push(self.upper[i]);
            }
            if self.lower[i].is_finite() {
                let mut r = vec![0.0; m];
                r[i] = -1.0;
                a.push(r);
                b.push(-self.lower[i]);
            }
        }
        Polyhedron { dim: m, a, b }
    }
}

/// The fixed lower-level feasible set `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LowerSet {
    Box(BoxSet),
    Polyhedron(Polyhedron),
}

impl LowerSet {
    pub fn dim(&self) -> usize {
        match self {
            LowerSet::Box(b) => b.dim(),
            LowerSet::Polyhedron(p) => p.dim(),
        }
    }

    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        match self {
            LowerSet::Box(b) => b.contains(y, tol),
            LowerSet::Polyhedron(p) => p.contains(y, tol),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            LowerSet::Box(_) => false,
            LowerSet::Polyhedron(p) => p.is_empty(),
        }
    }

    pub fn to_polyhedron(&self) -> Polyhedron {
        match self {
            LowerSet::Box(b) => b.to_polyhedron(),
            LowerSet::Polyhedron(p) => p.clone(),
        }
    }
}

/// A `C²` map on `R^n × R^m` given by one expression per component.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothFunction {
    n: usize,
    m: usize,
    components: Vec<Expr>,
}

impl SmoothFunction {
    pub fn scalar(n: usize, m: usize, e: Expr) -> Self {
        Self {
            n,
            m,
            components: vec![e],
        }
    }

    pub fn vector(n: usize, m: usize, components: Vec<Expr>) -> Self {
        Self { n, m, components }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn joint_dim(&self) -> usize {
        self.n + self.m
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.components.iter().map(|e| e.evaluate(x, y)).collect()
    }

    pub fn evaluate_joint(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        let (x, y) = point.split_at(self.n.min(point.len()));
        self.evaluate(x, y)
    }

    /// Symbolic Jacobian; row `k` holds the partials of component `k`
    /// with respect to `(x1..xn, y1..ym)`.
    pub fn jacobian_trees(&self) -> Vec<Vec<Expr>> {
        self.components
            .iter()
            .map(|e| {
                (0..self.joint_dim())
                    .map(|j| e.differentiate(Var::from_joint(j, self.n)))
                    .collect()
            })
            .collect()
    }

    fn undeclared(&self) -> Option<(usize, usize)> {
        self.components
            .iter()
            .map(Expr::required_dims)
            .find(|&(n, m)| n > self.n || m > self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("{what} has dimension {found}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{what} references an undeclared variable (needs n ≥ {needs_n}, m ≥ {needs_m})")]
    UndeclaredVariable {
        what: &'static str,
        needs_n: usize,
        needs_m: usize,
    },
    #[error("{what} uses an exponent above {MAX_EXPONENT}")]
    Exponent { what: &'static str },
    #[error("empty K")]
    EmptyK,
    #[error("empty Omega")]
    EmptyOmega,
    #[error("{0} must be a scalar function")]
    NotScalar(&'static str),
}

/// Optimistic bilevel program with fixed polyhedral `K`:
/// `min_x F(x, y)` over `x ∈ Ω`, `y ∈ argmin { f(x, ·) on K }`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilevelProblem {
    pub n: usize,
    pub m: usize,
    /// Upper-level objective `F`.
    pub upper: SmoothFunction,
    /// Lower-level objective `f`.
    pub lower: SmoothFunction,
    pub omega: Polyhedron,
    pub k: LowerSet,
}

fn check_function(what: &'static str, h: &SmoothFunction, n: usize, m: usize, errors: &mut Vec<ValidationError>) {
    if h.n != n || h.m != m {
        errors.push(ValidationError::Dimension {
            what,
            expected: n + m,
            found: h.n + h.m,
        });
    }
    if let Some((needs_n, needs_m)) = h.undeclared() {
        errors.push(ValidationError::UndeclaredVariable { what, needs_n, needs_m });
    }
    if h.components.iter().any(|e| max_exponent(e) > MAX_EXPONENT) {
        errors.push(ValidationError::Exponent { what });
    }
}

fn max_exponent(e: &Expr) -> u32 {
    match e {
        Expr::Const(_) | Expr::Var(_) => 0,
        Expr::Unary(_, a) => max_exponent(a),
        Expr::Binary(_, a, b) => max_exponent(a).max(max_exponent(b)),
        Expr::Pow(a, k) => (*k).max(max_exponent(a)),
    }
}

fn check_sets(n: usize, m: usize, omega: &Polyhedron, k: &LowerSet, errors: &mut Vec<ValidationError>) {
    if omega.dim() != n {
        errors.push(ValidationError::Dimension {
            what: "Omega",
            expected: n,
            found: omega.dim(),
        });
    } else if omega.is_empty() {
        errors.push(ValidationError::EmptyOmega);
    }
    if k.dim() != m {
        errors.push(ValidationError::Dimension {
            what: "K",
            expected: m,
            found: k.dim(),
        });
    } else if k.is_empty() {
        errors.push(ValidationError::EmptyK);
    }
}

impl BilevelProblem {
    /// Checks dimensions, declared variables, and non-emptiness of `K` and
    /// `Ω`; every violation is reported.
    pub fn validate(&self) -> Result<(), Vec<ValidationError>> {
        let mut errors = Vec::new();
        for (what, h) in [("F", &self.upper), ("f", &self.lower)] {
            if h.output_dim() != 1 {
                errors.push(ValidationError::NotScalar(what));
            }
            check_function(what, h, self.n, self.m, &mut errors);
        }
        check_sets(self.n, self.m, &self.omega, &self.k, &mut errors);
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    pub fn upper_expr(&self) -> &Expr {
        &self.upper.components[0]
    }

    pub fn lower_expr(&self) -> &Expr {
        &self.lower.components[0]
    }

    /// Symbolic `∇_y f`, one tree per lower-level coordinate.
    pub fn lower_gradient_y(&self) -> Vec<Expr> {
        (0..self.m)
            .map(|j| self.lower_expr().differentiate(Var::Y(j)))
            .collect()
    }

    /// The equilibrium-constrained reformulation
    /// `min F(x, y)` s.t. `0 ∈ ∇_y f(x, y) + N_K(y)`, `x ∈ Ω`.
    pub fn to_mpec(&self) -> MpecProblem {
        MpecProblem {
            n: self.n,
            m: self.m,
            objective: self.upper.clone(),
            constraint_map: SmoothFunction::vector(self.n, self.m, self.lower_gradient_y()),
            omega: self.omega.clone(),
            k: self.k.clone(),
        }
    }
}

/// `min J(x, y)` s.t. `0 ∈ G(x, y) + N_K(y)`, `x ∈ Ω`, with `G: R^{n+m} → R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MpecProblem {
    pub n: usize,
    pub m: usize,
    pub objective: SmoothFunction,
    pub constraint_map: SmoothFunction,
    pub omega: Polyhedron,
    pub k: LowerSet,
}

impl MpecProblem {
    pub fn validate(&self) -> Result<(), Vec<ValidationError>> {
        let mut errors = Vec::new();
        if self.objective.output_dim() != 1 {
            errors.push(ValidationError::NotScalar("objective"));
        }
        check_function("objective", &self.objective, self.n, self.m, &mut errors);
        if self.constraint_map.output_dim() != self.m {
            errors.push(ValidationError::Dimension {
                what: "G",
                expected: self.m,
                found: self.constraint_map.output_dim(),
            });
        }
        check_function("G", &self.constraint_map, self.n, self.m, &mut errors);
        check_sets(self.n, self.m, &self.omega, &self.k, &mut errors);
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

/// A candidate `(x̄, ȳ)` with the cached `z̄ = -∇_y f(x̄, ȳ)` (or `-G(x̄, ȳ)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl Candidate {
    pub fn new(problem: &BilevelProblem, x: Vec<f64>, y: Vec<f64>) -> Result<Self, CandidateError> {
        check_len("x", problem.n, &x)?;
        check_len("y", problem.m, &y)?;
        let z = problem
            .lower_gradient_y()
            .iter()
            .map(|g| g.evaluate(&x, &y).map(|v| 0.0 - v))
            .collect::<Result<_, _>>()?;
        Ok(Self { x, y, z })
    }

    pub fn for_mpec(mpec: &MpecProblem, x: Vec<f64>, y: Vec<f64>) -> Result<Self, CandidateError> {
        check_len("x", mpec.n, &x)?;
        check_len("y", mpec.m, &y)?;
        let z = mpec
            .constraint_map
            .evaluate(&x, &y)?
            .into_iter()
            .map(|v| 0.0 - v)
            .collect();
        Ok(Self { x, y, z })
    }
}

fn check_len(what: &'static str, expected: usize, v: &[f64]) -> Result<(), CandidateError> {
    if v.len() != expected {
        return Err(CandidateError::Dimension {
            what,
            expected,
            found: v.len(),
        });
    }
    if v.iter().any(|t| !t.is_finite()) {
        return Err(CandidateError::NonFinite(what));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CandidateError {
    #[error("candidate {what} has length {found}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("candidate {0} has a non-finite entry")]
    NonFinite(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Residual norms attached to a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Residuals {
    /// Max-abs residual of the two gradient equations.
    pub equation: f64,
    /// Distance of `(-β, -γ)` from the branch cone.
    pub cone_margin: f64,
}

/// Multipliers `(α, β, γ, η)` certifying M-stationarity on one branch of
/// the graph normal cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "CertificateRecord")]
pub struct MStationarityCertificate {
    pub branch: String,
    /// Always zero: `K` does not depend on `x`.
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `η = A_activeᵀ μ ∈ N(x̄, Ω)`.
    pub eta: Vec<f64>,
    /// Rows of `Ω` active at `x̄` (zero-based).
    pub omega_active: Vec<usize>,
    /// Nonnegative multipliers aligned with `omega_active`.
    pub mu: Vec<f64>,
    pub residuals: Residuals,
    /// Rational renderings of `β`, `γ`, `μ` when solved exactly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactMultipliers>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactMultipliers {
    pub beta: Vec<String>,
    pub gamma: Vec<String>,
    pub mu: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateRecord {
    branch: String,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    eta: Vec<f64>,
    omega_active: Vec<usize>,
    mu: Vec<f64>,
    residuals: Residuals,
    #[serde(default)]
    exact: Option<ExactMultipliers>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateError {
    #[error("certificate vectors have inconsistent lengths")]
    Shape,
    #[error("certificate has a negative Omega multiplier")]
    NegativeMu,
    #[error("certificate has a nonzero alpha")]
    NonzeroAlpha,
    #[error("certificate has a non-finite entry")]
    NonFinite,
}

impl TryFrom<CertificateRecord> for MStationarityCertificate {
    type Error = CertificateError;

    fn try_from(r: CertificateRecord) -> Result<Self, Self::Error> {
        let cert = MStationarityCertificate {
            branch: r.branch,
            alpha: r.alpha,
            beta: r.beta,
            gamma: r.gamma,
            eta: r.eta,
            omega_active: r.omega_active,
            mu: r.mu,
            residuals: r.residuals,
            exact: r.exact,
        };
        cert.check_shape()?;
        Ok(cert)
    }
}

impl MStationarityCertificate {
    /// Structural invariants that need no problem data.
    pub fn check_shape(&self) -> Result<(), CertificateError> {
        if self.alpha.len() != self.eta.len()
            || self.beta.len() != self.gamma.len()
            || self.mu.len() != self.omega_active.len()
        {
            return Err(CertificateError::Shape);
        }
        let all = self
            .alpha
            .iter()
            .chain(&self.beta)
            .chain(&self.gamma)
            .chain(&self.eta)
            .chain(&self.mu);
        if all.clone().any(|v| !v.is_finite())
            || !self.residuals.equation.is_finite()
            || !self.residuals.cone_margin.is_finite()
        {
            return Err(CertificateError::NonFinite);
        }
        if self.mu.iter().any(|&v| v < 0.0) {
            return Err(CertificateError::NegativeMu);
        }
        if self.alpha.iter().any(|&v| v != 0.0) {
            return Err(CertificateError::NonzeroAlpha);
        }
        Ok(())
    }
}

/// Nonzero solution of the homogeneous multiplier system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualificationWitness {
    pub branch: String,
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    pub z_star: Vec<f64>,
}

impl QualificationWitness {
    pub fn norm(&self) -> f64 {
        self.x_star
            .iter()
            .chain(&self.y_star)
            .chain(&self.z_star)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Whether the homogeneous system admits only `x* = y* = z* = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualificationReport {
    pub holds: bool,
    pub witness: Option<QualificationWitness>,
    pub branches_checked: usize,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
