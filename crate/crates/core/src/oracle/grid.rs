use serde::Serialize;

use super::OracleError;
use crate::model::{BilevelProblem, Candidate};

/// Axis-aligned grid over a finite box with one local refinement pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Points per dimension, endpoints included.
    pub resolution: usize,
    /// Subdivisions of one coarse cell in the refinement pass.
    pub refinement: usize,
    /// Points whose value is within `tol` of the minimum are kept.
    pub tol: f64,
}

impl GridSpec {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        resolution: usize,
        refinement: usize,
        tol: f64,
    ) -> Result<Self, OracleError> {
        let ok = lower.len() == upper.len()
            && lower.iter().chain(&upper).all(|v| v.is_finite())
            && lower.iter().zip(&upper).all(|(l, u)| l <= u)
            && resolution >= 2
            && refinement >= 1
            && tol >= 0.0;
        if !ok {
            return Err(OracleError::BadGrid);
        }
        Ok(Self {
            lower,
            upper,
            resolution,
            refinement,
            tol,
        })
    }

    /// The same interval and resolution in every dimension.
    pub fn cube(
        dim: usize,
        lo: f64,
        hi: f64,
        resolution: usize,
        refinement: usize,
        tol: f64,
    ) -> Result<Self, OracleError> {
        Self::new(vec![lo; dim], vec![hi; dim], resolution, refinement, tol)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn spacing(&self, i: usize) -> f64 {
        (self.upper[i] - self.lower[i]) / (self.resolution - 1) as f64
    }

    /// Coarse grid points in lexicographic order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| {
                (0..self.resolution)
                    .map(|k| {
                        if k + 1 == self.resolution {
                            self.upper[i]
                        } else {
                            self.lower[i] + k as f64 * self.spacing(i)
                        }
                    })
                    .collect()
            })
            .collect();
        product(&axes)
    }

    /// Fine grid of half-width one coarse cell around `center`, clipped to the box.
    fn refined_around(&self, center: &[f64]) -> Vec<Vec<f64>> {
        let r = self.refinement as i64;
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| {
                let h = self.spacing(i) / self.refinement as f64;
                (-r..=r)
                    .map(|k| center[i] + k as f64 * h)
                    .filter(|&v| v >= self.lower[i] && v <= self.upper[i])
                    .collect()
            })
            .collect();
        product(&axes)
    }
}

fn product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Approximate lower-level solution set at a fixed `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerSolution {
    /// Near-minimizers in lexicographic order.
    pub points: Vec<Vec<f64>>,
    /// Smallest lower-level value found.
    pub value: f64,
}

/// Keep at most this many coarse minimizers as refinement centers.
const MAX_REFINEMENT_CENTERS: usize = 64;

/// Grid minimization of `f(x, ·)` over `K`, refined once around the coarse
/// minimizers. Points where `f` cannot be evaluated are skipped.
pub fn solve_lower_grid(problem: &BilevelProblem, x: &[f64], g: &GridSpec) -> Result<LowerSolution, OracleError> {
    if g.dim() != problem.m || x.len() != problem.n {
        return Err(OracleError::Dimension);
    }
    let f = problem.lower_expr();
    let evaluate = |pts: Vec<Vec<f64>>| -> Vec<(Vec<f64>, f64)> {
        pts.into_iter()
            .filter(|y| problem.k.contains(y, 0.0))
            .filter_map(|y| f.evaluate(x, &y).ok().map(|v| (y, v)))
            .collect()
    };
    let coarse = evaluate(g.points());
    if coarse.is_empty() {
        return Err(OracleError::EmptyGrid);
    }
    let coarse_min = coarse.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let centers: Vec<&Vec<f64>> = coarse
        .iter()
        .filter(|(_, v)| *v <= coarse_min + g.tol)
        .map(|(y, _)| y)
        .take(MAX_REFINEMENT_CENTERS)
        .collect();
    let mut all = coarse.clone();
    for c in centers {
        all.extend(evaluate(g.refined_around(c)));
    }
    let value = all.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let mut points: Vec<Vec<f64>> = all
        .into_iter()
        .filter(|(_, v)| *v <= value + g.tol)
        .map(|(y, _)| y)
        .collect();
    points.sort_by(|a, b| lex(a, b));
    points.dedup();
    Ok(LowerSolution { points, value })
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Optimistic value `min { F(x, y) : y ∈ S(x) }` and its first minimizer.
pub fn optimistic_response(problem: &BilevelProblem, x: &[f64], g: &GridSpec) -> Result<(f64, Vec<f64>), OracleError> {
    let s = solve_lower_grid(problem, x, g)?;
    let upper = problem.upper_expr();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for y in s.points {
        let Ok(v) = upper.evaluate(x, &y) else {
            continue;
        };
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, y));
        }
    }
    best.ok_or(OracleError::EmptyGrid)
}

pub fn phi0(problem: &BilevelProblem, x: &[f64], g: &GridSpec) -> Result<f64, OracleError> {
    optimistic_response(problem, x, g).map(|(v, _)| v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityVerdict {
    pub locally_optimal: bool,
    /// `|φ0(x̄) − F(x̄, ȳ)| ≤ tol`
    pub value_consistent: bool,
    pub phi0_at_candidate: f64,
    pub upper_at_candidate: f64,
    /// The `x` with the smallest `φ0` when it beats `φ0(x̄) − tol`.
    pub worst_violator: Option<Violator>,
    pub points_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violator {
    pub x: Vec<f64>,
    pub phi0: f64,
}

/// Compare `φ0` at grid points of `Ω ∩ ball(x̄, radius)` with `φ0(x̄)`.
/// The `x`-grid has `g.resolution` points per axis over the bounding cube of
/// the ball, plus `x̄` itself; `g` is used for the lower level.
pub fn verify_optimistic_local(
    problem: &BilevelProblem,
    c: &Candidate,
    radius: f64,
    g: &GridSpec,
    tol: f64,
) -> Result<OptimalityVerdict, OracleError> {
    let n = problem.n;
    let upper_at_candidate = problem.upper_expr().evaluate(&c.x, &c.y).map_err(OracleError::Eval)?;
    let phi_bar = phi0(problem, &c.x, g)?;
    let x_grid = GridSpec::new(
        c.x.iter().map(|v| v - radius).collect(),
        c.x.iter().map(|v| v + radius).collect(),
        g.resolution,
        1,
        0.0,
    )?;
    let mut worst: Option<Violator> = None;
    let mut checked = 0;
    for x in x_grid.points() {
        let dist = x.iter().zip(&c.x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if dist > radius || !problem.omega.contains(&x, 1e-12) {
            continue;
        }
        let Ok(v) = phi0(problem, &x, g) else {
            continue;
        };
        checked += 1;
        if v < phi_bar - tol && worst.as_ref().is_none_or(|w| v < w.phi0) {
            worst = Some(Violator { x: x.clone(), phi0: v });
        }
    }
    debug_assert!(n == c.x.len());
    let value_consistent = (phi_bar - upper_at_candidate).abs() <= tol;
    Ok(OptimalityVerdict {
        locally_optimal: value_consistent && worst.is_none(),
        value_consistent,
        phi0_at_candidate: phi_bar,
        upper_at_candidate,
        worst_violator: worst,
        points_checked: checked,
    })
}
