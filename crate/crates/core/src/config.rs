//! Tolerances and oracle constants shared across modules.

use serde::{Deserialize, Serialize};

/// Numerical tolerances of the stationarity pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// A row `a·v ≤ b` is active when `a·v ≥ b - active_set`.
    pub active_set: f64,
    /// Largest accepted residual of the multiplier equations.
    pub equation: f64,
    /// Largest accepted distance of multipliers from their branch cone.
    pub cone_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            active_set: 1e-8,
            equation: 1e-9,
            cone_margin: 1e-9,
        }
    }
}

/// Default cap on the number of branches of a graph normal cone (3^12).
pub const DEFAULT_BRANCH_CAP: usize = 531_441;

/// Default cap on the number of rows active at a point of a general
/// polyhedral lower-level set; face enumeration is exponential in it.
pub const DEFAULT_ACTIVE_ROW_CAP: usize = 12;

/// Central finite differences used to cross-check symbolic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifference {
    /// Relative tolerance: `|exact - fd| ≤ rel_tol · max(1, |fd|)`.
    pub rel_tol: f64,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        Self { rel_tol: 1e-6 }
    }
}

impl FiniteDifference {
    /// Step `cbrt(eps) · max(1, |t|)`.
    pub fn step(t: f64) -> f64 {
        f64::EPSILON.cbrt() * t.abs().max(1.0)
    }

    /// `(g(t + h) - g(t - h)) / 2h` along coordinate `i` of `point`.
    pub fn central<E>(point: &[f64], i: usize, mut g: impl FnMut(&[f64]) -> Result<f64, E>) -> Result<f64, E> {
        let h = Self::step(point[i]);
        let mut p = point.to_vec();
        p[i] = point[i] + h;
        let up = g(&p)?;
        p[i] = point[i] - h;
        let down = g(&p)?;
        // use the representable step actually taken
        let span = (point[i] + h) - (point[i] - h);
        Ok((up - down) / span)
    }

    pub fn agrees(&self, exact: f64, fd: f64) -> bool {
        (exact - fd).abs() <= self.rel_tol * fd.abs().max(1.0)
    }
}

/// Constants of the sampling oracles. They define the test contract and
/// must not be tuned per test.
pub mod oracle {
    /// A direction is a Fréchet normal when every ratio estimate is at most this.
    pub const RATIO_THRESHOLD: f64 = 1e-4;
    /// Ball radii over which the limsup ratio is estimated.
    pub const RADII: [f64; 3] = [1e-2, 1e-3, 1e-4];
    /// Angular resolution, in degrees, for comparing sampled and exact cones.
    pub const ANGULAR_RESOLUTION_DEG: f64 = 2.0;
    /// Distances at which base points are drawn when sampling a limiting cone.
    /// The largest Fréchet radius must stay below the smallest of these.
    pub const BASE_POINT_DISTANCES: [f64; 3] = [0.2, 0.1, 0.05];
}
