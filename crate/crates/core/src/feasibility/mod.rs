//! Small exact linear feasibility engine.
//!
//! Systems are `E v = g`, `M v ≤ h` with a subset of variables constrained
//! to be nonnegative. Phase-one simplex with Bland's rule decides
//! feasibility, either in `f64` or exactly over `BigRational`.

#[cfg(test)]
mod proptests;
mod scalar;
mod simplex;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use scalar::{Scalar, FLOAT_INFEASIBILITY_TOL, FLOAT_PIVOT_TOL};
use simplex::Solved;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("simplex exceeded its pivot budget after {pivots} pivots")]
    CyclingGuard { pivots: usize },
    #[error("row has {found} coefficients, system has {expected} variables")]
    Dimension { expected: usize, found: usize },
}

/// Arithmetic used for a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Float,
    #[default]
    Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem<T = f64> {
    num_vars: usize,
    equalities: Vec<(Vec<T>, T)>,
    inequalities: Vec<(Vec<T>, T)>,
    nonneg: Vec<bool>,
}

impl<T: Scalar> LinearSystem<T> {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            nonneg: vec![false; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn equalities(&self) -> &[(Vec<T>, T)] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[(Vec<T>, T)] {
        &self.inequalities
    }

    pub fn is_nonneg(&self, i: usize) -> bool {
        self.nonneg[i]
    }

    /// Appends a fresh variable and returns its index.
    pub fn add_var(&mut self, nonneg: bool) -> usize {
        self.num_vars += 1;
        self.nonneg.push(nonneg);
        for (row, _) in self.equalities.iter_mut().chain(self.inequalities.iter_mut()) {
            row.push(T::zero());
        }
        self.num_vars - 1
    }

    pub fn set_nonneg(&mut self, i: usize) {
        self.nonneg[i] = true;
    }

    fn check(&self, row: &[T]) -> Result<(), LpError> {
        if row.len() == self.num_vars {
            Ok(())
        } else {
            Err(LpError::Dimension {
                expected: self.num_vars,
                found: row.len(),
            })
        }
    }

    /// `row · v = rhs`
    pub fn add_eq(&mut self, row: Vec<T>, rhs: T) -> Result<(), LpError> {
        self.check(&row)?;
        self.equalities.push((row, rhs));
        Ok(())
    }

    /// `row · v ≤ rhs`
    pub fn add_le(&mut self, row: Vec<T>, rhs: T) -> Result<(), LpError> {
        self.check(&row)?;
        self.inequalities.push((row, rhs));
        Ok(())
    }

    /// `row · v ≥ rhs`
    pub fn add_ge(&mut self, row: Vec<T>, rhs: T) -> Result<(), LpError> {
        let row = row.iter().map(Scalar::neg).collect();
        self.add_le(row, rhs.neg())
    }

    /// Whether every right-hand side is zero.
    pub fn is_homogeneous(&self) -> bool {
        self.equalities
            .iter()
            .chain(&self.inequalities)
            .all(|(_, b)| *b == T::zero())
    }

    /// Largest row violation at `point`, counting sign constraints.
    pub fn violation(&self, point: &[f64]) -> f64 {
        let dot = |row: &[T]| -> f64 { row.iter().zip(point).map(|(a, v)| a.to_f64() * v).sum() };
        let eq = self.equalities.iter().map(|(r, b)| (dot(r) - b.to_f64()).abs());
        let le = self.inequalities.iter().map(|(r, b)| (dot(r) - b.to_f64()).max(0.0));
        let sign = (0..self.num_vars)
            .filter(|&i| self.nonneg[i])
            .map(|i| (-point[i]).max(0.0));
        eq.chain(le).chain(sign).fold(0.0, f64::max)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LinearSystem<U> {
        let conv = |rows: &[(Vec<T>, T)]| -> Vec<(Vec<U>, U)> {
            rows.iter().map(|(r, b)| (r.iter().map(&f).collect(), f(b))).collect()
        };
        LinearSystem {
            num_vars: self.num_vars,
            equalities: conv(&self.equalities),
            inequalities: conv(&self.inequalities),
            nonneg: self.nonneg.clone(),
        }
    }
}

impl LinearSystem<f64> {
    pub fn to_rational(&self) -> LinearSystem<BigRational> {
        self.map(|v| <BigRational as Scalar>::from_f64(*v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<T> {
    Feasible(Vec<T>),
    Infeasible,
}

impl<T> Feasibility<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn point(&self) -> Option<&[T]> {
        match self {
            Feasibility::Feasible(p) => Some(p),
            Feasibility::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { point: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

/// Phase-one feasibility. The returned point is a basic solution.
pub fn feasible<T: Scalar>(sys: &LinearSystem<T>) -> Result<Feasibility<T>, LpError> {
    Ok(match simplex::solve(sys, None)? {
        Solved::Optimal { point, .. } => Feasibility::Feasible(point),
        Solved::Infeasible | Solved::Unbounded => Feasibility::Infeasible,
    })
}

/// Minimize `objective · v` over the system.
pub fn minimize<T: Scalar>(sys: &LinearSystem<T>, objective: &[T]) -> Result<LpOutcome<T>, LpError> {
    if objective.len() != sys.num_vars() {
        return Err(LpError::Dimension {
            expected: sys.num_vars(),
            found: objective.len(),
        });
    }
    Ok(match simplex::solve(sys, Some(objective))? {
        Solved::Optimal { point, value } => LpOutcome::Optimal { point, value },
        Solved::Infeasible => LpOutcome::Infeasible,
        Solved::Unbounded => LpOutcome::Unbounded,
    })
}

/// Feasibility of a floating system decided in the requested arithmetic.
pub fn feasible_with_mode(sys: &LinearSystem<f64>, mode: Mode) -> Result<Feasibility<f64>, LpError> {
    match mode {
        Mode::Float => feasible(sys),
        Mode::Rational => Ok(match feasible(&sys.to_rational())? {
            Feasibility::Feasible(p) => Feasibility::Feasible(p.iter().map(Scalar::to_f64).collect()),
            Feasibility::Infeasible => Feasibility::Infeasible,
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeVerdict {
    OnlyZero,
    /// A solution whose probed coordinates have unit Euclidean norm.
    Nonzero {
        witness: Vec<f64>,
        probe: usize,
        sign: i8,
    },
}

/// Decide whether a homogeneous system has a solution that is nonzero on
/// the `probe` coordinates (all coordinates when `None`).
///
/// For each probed index `i` and sign `s ∈ {+1, -1}` the row `s·v_i = 1` is
/// appended and feasibility tested; the first success is normalized.
pub fn cone_nonzero<T: Scalar>(sys: &LinearSystem<T>, probe: Option<&[usize]>) -> Result<ConeVerdict, LpError> {
    debug_assert!(sys.is_homogeneous());
    let all: Vec<usize> = (0..sys.num_vars()).collect();
    let probe = probe.unwrap_or(&all);
    for &i in probe {
        for sign in [1i8, -1] {
            let mut probed = sys.clone();
            let mut row = vec![T::zero(); sys.num_vars()];
            row[i] = if sign > 0 { T::one() } else { T::one().neg() };
            probed.add_eq(row, T::one())?;
            if let Feasibility::Feasible(p) = feasible(&probed)? {
                let p: Vec<f64> = p.iter().map(Scalar::to_f64).collect();
                let norm = probe.iter().map(|&k| p[k] * p[k]).sum::<f64>().sqrt();
                let witness = p.iter().map(|v| v / norm).collect();
                return Ok(ConeVerdict::Nonzero {
                    witness,
                    probe: i,
                    sign,
                });
            }
        }
    }
    Ok(ConeVerdict::OnlyZero)
}

/// Move a feasible point toward the minimum-norm point of the face it lies
/// on: the face's affine hull is solved in the least-squares sense and the
/// step is cut back so that rows inactive at `point` stay satisfied.
pub fn min_norm_on_face(sys: &LinearSystem<f64>, point: &[f64], active_tol: f64) -> Vec<f64> {
    let d = sys.num_vars();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let dot = |r: &[f64]| r.iter().zip(point).map(|(a, b)| a * b).sum::<f64>();
    for (r, b) in sys.equalities() {
        rows.push(r.clone());
        rhs.push(*b);
    }
    let mut inactive: Vec<(Vec<f64>, f64)> = Vec::new();
    for (r, b) in sys.inequalities() {
        if (dot(r) - b).abs() <= active_tol {
            rows.push(r.clone());
            rhs.push(*b);
        } else {
            inactive.push((r.clone(), *b));
        }
    }
    for i in 0..d {
        if !sys.is_nonneg(i) {
            continue;
        }
        let mut r = vec![0.0; d];
        if point[i].abs() <= active_tol {
            r[i] = 1.0;
            rows.push(r);
            rhs.push(0.0);
        } else {
            r[i] = -1.0;
            inactive.push((r, 0.0));
        }
    }
    if d == 0 {
        return Vec::new();
    }
    let target: Vec<f64> = if rows.is_empty() {
        vec![0.0; d]
    } else {
        let a = DMatrix::from_row_iterator(rows.len(), d, rows.iter().flatten().copied());
        let b = DVector::from_vec(rhs.clone());
        match a.clone().svd(true, true).solve(&b, 1e-12) {
            Ok(x) => {
                let residual = (&a * &x - &b).amax();
                if residual > active_tol {
                    return point.to_vec();
                }
                x.iter().copied().collect()
            }
            Err(_) => return point.to_vec(),
        }
    };
    // Largest step in [0, 1] keeping inactive rows satisfied.
    let dir: Vec<f64> = target.iter().zip(point).map(|(t, p)| t - p).collect();
    let mut step: f64 = 1.0;
    for (r, b) in &inactive {
        let slope: f64 = r.iter().zip(&dir).map(|(a, v)| a * v).sum();
        if slope > 0.0 {
            step = step.min(((b - dot(r)) / slope).max(0.0));
        }
    }
    let mut out: Vec<f64> = point.iter().zip(&dir).map(|(p, v)| p + step * v).collect();
    for (i, v) in out.iter_mut().enumerate() {
        if sys.is_nonneg(i) && point[i].abs() <= active_tol {
            *v = 0.0;
        }
    }
    out
}
