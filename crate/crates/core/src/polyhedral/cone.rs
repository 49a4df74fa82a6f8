use serde::Serialize;
use thiserror::Error;

use super::convert::{generators_of, halfspaces_of};
use crate::feasibility::{feasible, minimize, LinearSystem, LpError, LpOutcome, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    #[error("vector has dimension {found}, cone lives in dimension {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("containment between these representations is not supported")]
    Unsupported,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// `cone(rays) + span(lines)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Generators {
    pub rays: Vec<Vec<f64>>,
    pub lines: Vec<Vec<f64>>,
}

/// `{v : r·v ≤ 0 for r in inequalities, r·v = 0 for r in equalities}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Halfspaces {
    pub inequalities: Vec<Vec<f64>>,
    pub equalities: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeForm {
    Generators(Generators),
    Halfspaces(Halfspaces),
    /// Two descriptions of the same cone.
    Both(Generators, Halfspaces),
    /// The cone is the intersection of the two descriptions.
    Intersection(Generators, Halfspaces),
}

/// Closed convex polyhedral cone in `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyhedralCone {
    dim: usize,
    form: ConeForm,
}

/// Result of a membership query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeMembership {
    pub contained: bool,
    /// Distance-like violation: largest normalized row violation for the
    /// halfspace part, sup-norm distance to the generated cone for the
    /// generator part, the larger of the two for intersections.
    pub violation: f64,
}

impl PolyhedralCone {
    pub fn new(dim: usize, form: ConeForm) -> Self {
        Self { dim, form }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(
            dim,
            ConeForm::Both(
                Generators::default(),
                Halfspaces {
                    inequalities: Vec::new(),
                    equalities: unit_vectors(dim),
                },
            ),
        )
    }

    pub fn whole_space(dim: usize) -> Self {
        Self::new(
            dim,
            ConeForm::Both(
                Generators {
                    rays: Vec::new(),
                    lines: unit_vectors(dim),
                },
                Halfspaces::default(),
            ),
        )
    }

    pub fn from_generators(dim: usize, rays: Vec<Vec<f64>>, lines: Vec<Vec<f64>>) -> Self {
        Self::new(dim, ConeForm::Generators(Generators { rays, lines }))
    }

    pub fn from_halfspaces(dim: usize, inequalities: Vec<Vec<f64>>, equalities: Vec<Vec<f64>>) -> Self {
        Self::new(
            dim,
            ConeForm::Halfspaces(Halfspaces {
                inequalities,
                equalities,
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &ConeForm {
        &self.form
    }

    pub fn generators(&self) -> Option<&Generators> {
        match &self.form {
            ConeForm::Generators(g) | ConeForm::Both(g, _) => Some(g),
            _ => None,
        }
    }

    pub fn halfspaces(&self) -> Option<&Halfspaces> {
        match &self.form {
            ConeForm::Halfspaces(h) | ConeForm::Both(_, h) => Some(h),
            _ => None,
        }
    }

    /// Membership with a tolerance band of width `margin`.
    pub fn contains(&self, v: &[f64], margin: f64) -> Result<ConeMembership, ConeError> {
        if v.len() != self.dim {
            return Err(ConeError::Dimension {
                expected: self.dim,
                found: v.len(),
            });
        }
        let violation = match &self.form {
            ConeForm::Halfspaces(h) | ConeForm::Both(_, h) => halfspace_violation(h, v),
            ConeForm::Generators(g) => generator_distance(g, v)?,
            ConeForm::Intersection(g, h) => halfspace_violation(h, v).max(generator_distance(g, v)?),
        };
        Ok(ConeMembership {
            contained: violation <= margin,
            violation,
        })
    }

    /// Constrain `scale · (v_{vars[0]}, …, v_{vars[d-1]})` to lie in the cone,
    /// adding auxiliary variables for generator multipliers.
    pub fn add_membership<T: Scalar>(
        &self,
        sys: &mut LinearSystem<T>,
        vars: &[usize],
        scale: f64,
    ) -> Result<(), ConeError> {
        if vars.len() != self.dim {
            return Err(ConeError::Dimension {
                expected: self.dim,
                found: vars.len(),
            });
        }
        match &self.form {
            ConeForm::Halfspaces(h) | ConeForm::Both(_, h) => add_halfspaces(h, sys, vars, scale),
            ConeForm::Generators(g) => add_generators(g, sys, vars, scale),
            ConeForm::Intersection(g, h) => {
                add_halfspaces(h, sys, vars, scale)?;
                add_generators(g, sys, vars, scale)
            }
        }
    }

    /// Exact test of `self ⊆ other` by rational linear programs.
    pub fn is_subset_of(&self, other: &PolyhedralCone) -> Result<bool, ConeError> {
        if self.dim != other.dim {
            return Err(ConeError::Dimension {
                expected: other.dim,
                found: self.dim,
            });
        }
        if let Some(h) = other.halfspaces() {
            return self.satisfies_rows(h);
        }
        if let Some(g) = self.generators() {
            for r in &g.rays {
                if !other.contains_exact(r)? {
                    return Ok(false);
                }
            }
            for l in &g.lines {
                let neg: Vec<f64> = l.iter().map(|v| -v).collect();
                if !other.contains_exact(l)? || !other.contains_exact(&neg)? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        let h = other.to_halfspaces().ok_or(ConeError::Unsupported)?;
        self.satisfies_rows(&h)
    }

    /// A pure halfspace description of the cone, converting generators when
    /// needed; `None` when the conversion is too large.
    pub fn to_halfspaces(&self) -> Option<Halfspaces> {
        match &self.form {
            ConeForm::Halfspaces(h) | ConeForm::Both(_, h) => Some(h.clone()),
            ConeForm::Generators(g) => halfspaces_of(g, self.dim),
            ConeForm::Intersection(g, h) => {
                let mut out = halfspaces_of(g, self.dim)?;
                out.inequalities.extend(h.inequalities.iter().cloned());
                out.equalities.extend(h.equalities.iter().cloned());
                Some(out)
            }
        }
    }

    /// A pure generator description of the cone; `None` when the conversion
    /// is too large.
    pub fn to_generators(&self) -> Option<Generators> {
        match &self.form {
            ConeForm::Generators(g) | ConeForm::Both(g, _) => Some(g.clone()),
            _ => generators_of(&self.to_halfspaces()?, self.dim),
        }
    }

    pub fn same_as(&self, other: &PolyhedralCone) -> Result<bool, ConeError> {
        Ok(self.is_subset_of(other)? && other.is_subset_of(self)?)
    }

    /// For a two-form cone, whether both forms describe the same set.
    pub fn forms_agree(&self) -> Result<bool, ConeError> {
        match &self.form {
            ConeForm::Both(g, h) => {
                let gc = PolyhedralCone::new(self.dim, ConeForm::Generators(g.clone()));
                let hc = PolyhedralCone::new(self.dim, ConeForm::Halfspaces(h.clone()));
                gc.same_as(&hc)
            }
            _ => Ok(true),
        }
    }

    /// Exact membership of a point.
    pub fn contains_exact(&self, v: &[f64]) -> Result<bool, ConeError> {
        let d = self.dim;
        let mut sys: LinearSystem<num_rational::BigRational> = LinearSystem::new(d);
        for (j, &vj) in v.iter().enumerate() {
            let mut row = vec![<num_rational::BigRational as Scalar>::zero(); d];
            row[j] = Scalar::one();
            sys.add_eq(row, Scalar::from_f64(vj))?;
        }
        let vars: Vec<usize> = (0..d).collect();
        self.add_membership(&mut sys, &vars, 1.0)?;
        Ok(feasible(&sys)?.is_feasible())
    }

    /// Whether every element of `self` satisfies the rows of `h`.
    fn satisfies_rows(&self, h: &Halfspaces) -> Result<bool, ConeError> {
        let d = self.dim;
        let vars: Vec<usize> = (0..d).collect();
        let mut base: LinearSystem<num_rational::BigRational> = LinearSystem::new(d);
        self.add_membership(&mut base, &vars, 1.0)?;
        let probe = |row: &[f64]| -> Result<bool, ConeError> {
            // exists v in self with row·v ≥ 1?
            let mut sys = base.clone();
            let mut r = vec![<num_rational::BigRational as Scalar>::zero(); sys.num_vars()];
            for (j, &c) in row.iter().enumerate() {
                r[j] = Scalar::from_f64(c);
            }
            sys.add_ge(r, Scalar::one())?;
            Ok(feasible(&sys)?.is_feasible())
        };
        for r in &h.inequalities {
            if probe(r)? {
                return Ok(false);
            }
        }
        for r in &h.equalities {
            let neg: Vec<f64> = r.iter().map(|v| -v).collect();
            if probe(r)? || probe(&neg)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn unit_vectors(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn halfspace_violation(h: &Halfspaces, v: &[f64]) -> f64 {
    let scaled = |r: &Vec<f64>| {
        let n = norm(r);
        if n == 0.0 {
            0.0
        } else {
            dot(r, v) / n
        }
    };
    let ineq = h.inequalities.iter().map(|r| scaled(r).max(0.0));
    let eq = h.equalities.iter().map(|r| scaled(r).abs());
    ineq.chain(eq).fold(0.0, f64::max)
}

/// `min ‖v - g‖_∞` over the generated cone, by a floating LP.
pub(crate) fn generator_distance(g: &Generators, v: &[f64]) -> Result<f64, ConeError> {
    let d = v.len();
    if g.rays.is_empty() && g.lines.is_empty() {
        return Ok(v.iter().fold(0.0, |m, a| m.max(a.abs())));
    }
    // variables: λ (rays, ≥ 0), μ (lines, free), t ≥ 0
    let nr = g.rays.len();
    let nl = g.lines.len();
    let t = nr + nl;
    let mut sys = LinearSystem::new(t + 1);
    for i in 0..nr {
        sys.set_nonneg(i);
    }
    sys.set_nonneg(t);
    for j in 0..d {
        let mut row = vec![0.0; t + 1];
        for (k, r) in g.rays.iter().enumerate() {
            row[k] = r[j];
        }
        for (k, l) in g.lines.iter().enumerate() {
            row[nr + k] = l[j];
        }
        // v_j - Σ ≤ t  and  Σ - v_j ≤ t
        let mut up: Vec<f64> = row.iter().map(|c| -c).collect();
        up[t] = -1.0;
        sys.add_le(up, -v[j])?;
        let mut down = row;
        down[t] = -1.0;
        sys.add_le(down, v[j])?;
    }
    let mut objective = vec![0.0; t + 1];
    objective[t] = 1.0;
    match minimize(&sys, &objective)? {
        LpOutcome::Optimal { value, .. } => Ok(value.max(0.0)),
        // t = max |v_j| with zero multipliers is always feasible and t ≥ 0
        LpOutcome::Infeasible | LpOutcome::Unbounded => Ok(f64::INFINITY),
    }
}

fn add_halfspaces<T: Scalar>(
    h: &Halfspaces,
    sys: &mut LinearSystem<T>,
    vars: &[usize],
    scale: f64,
) -> Result<(), ConeError> {
    let place = |sys: &LinearSystem<T>, r: &[f64]| {
        let mut row = vec![T::zero(); sys.num_vars()];
        for (j, &c) in r.iter().enumerate() {
            if c != 0.0 {
                row[vars[j]] = T::from_f64(c * scale);
            }
        }
        row
    };
    for r in &h.inequalities {
        let row = place(sys, r);
        sys.add_le(row, T::zero())?;
    }
    for r in &h.equalities {
        let row = place(sys, r);
        sys.add_eq(row, T::zero())?;
    }
    Ok(())
}

fn add_generators<T: Scalar>(
    g: &Generators,
    sys: &mut LinearSystem<T>,
    vars: &[usize],
    scale: f64,
) -> Result<(), ConeError> {
    let rays: Vec<usize> = g.rays.iter().map(|_| sys.add_var(true)).collect();
    let lines: Vec<usize> = g.lines.iter().map(|_| sys.add_var(false)).collect();
    for j in 0..vars.len() {
        let mut row = vec![T::zero(); sys.num_vars()];
        row[vars[j]] = T::from_f64(scale);
        for (k, r) in g.rays.iter().enumerate() {
            if r[j] != 0.0 {
                row[rays[k]] = T::from_f64(-r[j]);
            }
        }
        for (k, l) in g.lines.iter().enumerate() {
            if l[j] != 0.0 {
                row[lines[k]] = T::from_f64(-l[j]);
            }
        }
        sys.add_eq(row, T::zero())?;
    }
    Ok(())
}
