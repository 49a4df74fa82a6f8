use thiserror::Error;

use super::cone::{ConeForm, Generators, Halfspaces, PolyhedralCone};
use crate::model::{BoxSet, Polyhedron};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormalConeError {
    #[error("point has dimension {found}, set lives in dimension {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("point is not in the set (violation {violation:e})")]
    NotInSet { violation: f64 },
}

/// `N(v, P) = cone{a_i : i active}`; for convex polyhedra the regular and
/// limiting cones coincide.
pub fn normal_cone_polyhedron(p: &Polyhedron, v: &[f64], tol: f64) -> Result<PolyhedralCone, NormalConeError> {
    if v.len() != p.dim() {
        return Err(NormalConeError::Dimension {
            expected: p.dim(),
            found: v.len(),
        });
    }
    let violation = p.violation(v);
    if violation > tol {
        return Err(NormalConeError::NotInSet { violation });
    }
    let active = p.active_set(v, tol);
    if active.is_empty() {
        return Ok(PolyhedralCone::zero(p.dim()));
    }
    let rays = active.indices().iter().map(|&i| p.rows()[i].clone()).collect();
    Ok(PolyhedralCone::from_generators(p.dim(), rays, Vec::new()))
}

/// Product over coordinates of `R_-` (at a lower bound), `R_+` (at an upper
/// bound), `{0}` (strictly inside) or `R` (fixed coordinate).
pub fn normal_cone_box(b: &BoxSet, y: &[f64], tol: f64) -> Result<PolyhedralCone, NormalConeError> {
    let m = b.dim();
    if y.len() != m {
        return Err(NormalConeError::Dimension {
            expected: m,
            found: y.len(),
        });
    }
    let violation = (0..m)
        .map(|i| (b.lower()[i] - y[i]).max(y[i] - b.upper()[i]).max(0.0))
        .fold(0.0, f64::max);
    if violation > tol {
        return Err(NormalConeError::NotInSet { violation });
    }
    let mut g = Generators::default();
    let mut h = Halfspaces::default();
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        let at_lower = y[i] <= b.lower()[i] + tol;
        let at_upper = y[i] >= b.upper()[i] - tol;
        match (at_lower, at_upper) {
            (true, true) => g.lines.push(e),
            (true, false) => {
                g.rays.push(e.iter().map(|v| -v).collect());
                h.inequalities.push(e);
            }
            (false, true) => {
                g.rays.push(e.clone());
                h.inequalities.push(e.iter().map(|v| -v).collect());
            }
            (false, false) => h.equalities.push(e),
        }
    }
    Ok(PolyhedralCone::new(m, ConeForm::Both(g, h)))
}
