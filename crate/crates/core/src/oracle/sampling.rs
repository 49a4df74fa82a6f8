use rand::rngs::StdRng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::OracleError;
use crate::config::oracle::{BASE_POINT_DISTANCES, RADII, RATIO_THRESHOLD};

/// A closed set that can be queried for membership and sampled locally.
pub trait SampleSet {
    fn dim(&self) -> usize;
    fn contains(&self, p: &[f64]) -> bool;
    /// A point of the set in the closed ball `B(center, radius)`, or `None`
    /// when none was found.
    fn sample_near(&self, center: &[f64], radius: f64, rng: &mut StdRng) -> Option<Vec<f64>>;
}

/// Set given by a membership predicate, sampled by rejection from the ball.
pub struct MembershipSet<F> {
    dim: usize,
    member: F,
    attempts: usize,
}

impl<F: Fn(&[f64]) -> bool> MembershipSet<F> {
    pub fn new(dim: usize, member: F) -> Self {
        Self {
            dim,
            member,
            attempts: 64,
        }
    }
}

impl<F: Fn(&[f64]) -> bool> SampleSet for MembershipSet<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, p: &[f64]) -> bool {
        (self.member)(p)
    }

    fn sample_near(&self, center: &[f64], radius: f64, rng: &mut StdRng) -> Option<Vec<f64>> {
        (0..self.attempts).find_map(|_| {
            let p = uniform_in_ball(center, radius, rng);
            (self.member)(&p).then_some(p)
        })
    }
}

/// Finite union of closed segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentUnion {
    dim: usize,
    segments: Vec<(Vec<f64>, Vec<f64>)>,
}

impl SegmentUnion {
    pub fn new(dim: usize, segments: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self, OracleError> {
        if segments.iter().any(|(a, b)| a.len() != dim || b.len() != dim) {
            return Err(OracleError::Dimension);
        }
        Ok(Self { dim, segments })
    }

    /// Parameter interval of segment `s` inside `B(center, radius)`.
    fn clip(&self, s: usize, center: &[f64], radius: f64) -> Option<(f64, f64)> {
        let (a, b) = &self.segments[s];
        let d: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
        let w: Vec<f64> = a.iter().zip(center).map(|(p, q)| p - q).collect();
        let dd = dot(&d, &d);
        let ww = dot(&w, &w);
        if dd == 0.0 {
            return (ww <= radius * radius).then_some((0.0, 0.0));
        }
        let wd = dot(&w, &d);
        let disc = wd * wd - dd * (ww - radius * radius);
        if disc < 0.0 {
            return None;
        }
        let root = disc.sqrt();
        let lo = ((-wd - root) / dd).max(0.0);
        let hi = ((-wd + root) / dd).min(1.0);
        (lo <= hi).then_some((lo, hi))
    }

    fn distance(&self, p: &[f64]) -> f64 {
        self.segments
            .iter()
            .map(|(a, b)| {
                let d: Vec<f64> = b.iter().zip(a).map(|(u, v)| u - v).collect();
                let w: Vec<f64> = p.iter().zip(a).map(|(u, v)| u - v).collect();
                let dd = dot(&d, &d);
                let t = if dd == 0.0 {
                    0.0
                } else {
                    (dot(&w, &d) / dd).clamp(0.0, 1.0)
                };
                w.iter().zip(&d).map(|(u, v)| (u - t * v).powi(2)).sum::<f64>().sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

impl SampleSet for SegmentUnion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, p: &[f64]) -> bool {
        self.distance(p) <= 1e-12 * (1.0 + norm(p))
    }

    fn sample_near(&self, center: &[f64], radius: f64, rng: &mut StdRng) -> Option<Vec<f64>> {
        let pieces: Vec<(usize, f64, f64)> = (0..self.segments.len())
            .filter_map(|s| self.clip(s, center, radius).map(|(lo, hi)| (s, lo, hi)))
            .collect();
        if pieces.is_empty() {
            return None;
        }
        let (s, lo, hi) = pieces[rng.random_range(0..pieces.len())];
        let t = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let (a, b) = &self.segments[s];
        Some(a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn gaussian(dim: usize, rng: &mut StdRng) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn uniform_in_ball(center: &[f64], radius: f64, rng: &mut StdRng) -> Vec<f64> {
    let d = center.len();
    let u = gaussian(d, rng);
    let scale = radius * rng.random::<f64>().powf(1.0 / d as f64) / norm(&u).max(f64::MIN_POSITIVE);
    center.iter().zip(&u).map(|(c, v)| c + scale * v).collect()
}

/// `count` unit vectors drawn uniformly from the sphere.
pub fn random_directions(dim: usize, count: usize, rng: &mut StdRng) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| loop {
            let g = gaussian(dim, rng);
            let n = norm(&g);
            if n > 1e-8 {
                break g.into_iter().map(|v| v / n).collect();
            }
        })
        .collect()
}

/// Unit vectors at every `step_deg` degrees, starting from `(1, 0)`.
pub fn circle_directions(step_deg: f64) -> Vec<Vec<f64>> {
    let count = (360.0 / step_deg).round() as usize;
    (0..count)
        .map(|k| {
            let t = (k as f64 * step_deg).to_radians();
            vec![t.cos(), t.sin()]
        })
        .collect()
}

/// Sampling effort per radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleBudget {
    /// Set points drawn in each ball.
    pub points: usize,
    /// Local ascent steps spent on a direction that still looks normal.
    pub climb_steps: usize,
    /// Fewer accepted points than this in some ball is an error.
    pub min_points: usize,
}

impl Default for SampleBudget {
    fn default() -> Self {
        Self {
            points: 10_000,
            climb_steps: 200,
            min_points: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedDirection {
    pub direction: Vec<f64>,
    /// Estimated `sup ⟨v, x − x̄⟩ / ‖x − x̄‖` over the set in each ball of
    /// [`RADII`].
    pub ratios: Vec<f64>,
    pub normal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrechetSample {
    pub point: Vec<f64>,
    pub directions: Vec<ClassifiedDirection>,
}

impl FrechetSample {
    pub fn normals(&self) -> impl Iterator<Item = &[f64]> {
        self.directions
            .iter()
            .filter(|d| d.normal)
            .map(|d| d.direction.as_slice())
    }
}

/// Unit vectors `(x − x̄)/‖x − x̄‖` for set points drawn near `point`.
fn sample_secants(
    set: &dyn SampleSet,
    point: &[f64],
    radius: f64,
    budget: &SampleBudget,
    rng: &mut StdRng,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>, OracleError> {
    let mut out = Vec::new();
    for _ in 0..budget.points {
        let Some(x) = set.sample_near(point, radius, rng) else {
            continue;
        };
        let diff: Vec<f64> = x.iter().zip(point).map(|(a, b)| a - b).collect();
        let r = norm(&diff);
        if r > 0.0 && r <= radius {
            out.push((x, diff.into_iter().map(|v| v / r).collect()));
        }
    }
    if out.len() < budget.min_points {
        return Err(OracleError::TooFewSamples {
            radius,
            found: out.len(),
        });
    }
    Ok(out)
}

/// Random local ascent of the ratio starting from `start`, staying in the set
/// and the ball.
#[allow(clippy::too_many_arguments)]
fn climb(
    set: &dyn SampleSet,
    point: &[f64],
    radius: f64,
    v: &[f64],
    start: &[f64],
    mut best: f64,
    steps: usize,
    rng: &mut StdRng,
) -> f64 {
    let ratio = |x: &[f64]| {
        let diff: Vec<f64> = x.iter().zip(point).map(|(a, b)| a - b).collect();
        let r = norm(&diff);
        (r > 0.0 && r <= radius).then(|| dot(v, &diff) / r)
    };
    let mut x = start.to_vec();
    let mut step = 0.25 * radius;
    let mut misses = 0;
    for _ in 0..steps {
        let g = gaussian(x.len(), rng);
        let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
        match ratio(&trial).filter(|_| set.contains(&trial)) {
            Some(r) if r > best => {
                best = r;
                x = trial;
                misses = 0;
            }
            _ => {
                misses += 1;
                if misses >= 8 {
                    step *= 0.5;
                    misses = 0;
                }
            }
        }
    }
    best
}

/// Classify each direction by the limsup ratio test for regular normals.
pub fn sample_frechet_normal_cone(
    set: &dyn SampleSet,
    point: &[f64],
    directions: &[Vec<f64>],
    budget: &SampleBudget,
    rng: &mut StdRng,
) -> Result<FrechetSample, OracleError> {
    if point.len() != set.dim() || directions.iter().any(|d| d.len() != set.dim()) {
        return Err(OracleError::Dimension);
    }
    if !set.contains(point) {
        return Err(OracleError::NotInSet);
    }
    let mut ratios = vec![Vec::with_capacity(RADII.len()); directions.len()];
    for radius in RADII {
        let secants = sample_secants(set, point, radius, budget, rng)?;
        for (k, v) in directions.iter().enumerate() {
            let (arg, best) = secants
                .iter()
                .map(|(x, u)| (x, dot(v, u)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least min_points secants");
            let best = if best <= RATIO_THRESHOLD {
                climb(set, point, radius, v, arg, best, budget.climb_steps, rng)
            } else {
                best
            };
            ratios[k].push(best);
        }
    }
    let directions = directions
        .iter()
        .zip(ratios)
        .map(|(d, ratios)| ClassifiedDirection {
            direction: d.clone(),
            normal: ratios.iter().all(|&r| r <= RATIO_THRESHOLD),
            ratios,
        })
        .collect();
    Ok(FrechetSample {
        point: point.to_vec(),
        directions,
    })
}

/// Base points drawn at each distance of [`BASE_POINT_DISTANCES`].
pub const BASE_POINTS_PER_DISTANCE: usize = 6;

/// Union of regular normal samples at `point` and at nearby set points.
/// Returns the directions classified normal at some base point.
pub fn sample_limiting_normal_cone(
    set: &dyn SampleSet,
    point: &[f64],
    directions: &[Vec<f64>],
    budget: &SampleBudget,
    rng: &mut StdRng,
) -> Result<Vec<Vec<f64>>, OracleError> {
    let mut bases = vec![point.to_vec()];
    for rho in BASE_POINT_DISTANCES {
        let mut found = 0;
        for _ in 0..budget.points {
            if found == BASE_POINTS_PER_DISTANCE {
                break;
            }
            let Some(b) = set.sample_near(point, rho, rng) else {
                continue;
            };
            let d: f64 = b.iter().zip(point).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            if d >= 0.5 * rho {
                bases.push(b);
                found += 1;
            }
        }
    }
    let mut normal = vec![false; directions.len()];
    for b in &bases {
        let s = sample_frechet_normal_cone(set, b, directions, budget, rng)?;
        for (flag, d) in normal.iter_mut().zip(&s.directions) {
            *flag |= d.normal;
        }
    }
    Ok(directions
        .iter()
        .zip(normal)
        .filter(|(_, n)| *n)
        .map(|(d, _)| d.clone())
        .collect())
}

/// Largest angle, in degrees, from a direction of one set to the nearest
/// direction of the other. Infinite when exactly one side is empty.
pub fn angular_hausdorff_deg(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one_sided = |p: &[Vec<f64>], q: &[Vec<f64>]| {
        p.iter()
            .map(|u| {
                q.iter()
                    .map(|v| (dot(u, v) / (norm(u) * norm(v))).clamp(-1.0, 1.0).acos().to_degrees())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    one_sided(a, b).max(one_sided(b, a))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoderivativeSample {
    /// Least-squares `x*` with `⟨x*, δ⟩ ≈ ⟨y*, (h(p+δ) − h(p−δ))/2⟩`.
    pub x_star: Vec<f64>,
    /// Largest `|⟨x*, δ⟩ − ⟨y*, h(p+δ) − h(p)⟩| / ‖(δ, h(p+δ) − h(p))‖` over the
    /// secants used.
    pub max_ratio: f64,
}

/// Regular coderivative `D̂h(p)(y*)` of a single-valued map estimated from
/// central secants of length `radius`.
pub fn sample_frechet_coderivative(
    h: &dyn Fn(&[f64]) -> Result<Vec<f64>, OracleError>,
    point: &[f64],
    y_star: &[f64],
    radius: f64,
    samples: usize,
    rng: &mut StdRng,
) -> Result<CoderivativeSample, OracleError> {
    let d = point.len();
    let h0 = h(point)?;
    if h0.len() != y_star.len() || samples < d {
        return Err(OracleError::Dimension);
    }
    let deltas: Vec<Vec<f64>> = random_directions(d, samples, rng)
        .into_iter()
        .map(|u| u.into_iter().map(|v| v * radius).collect())
        .collect();
    let mut rows = Vec::with_capacity(samples * d);
    let mut rhs = Vec::with_capacity(samples);
    let mut forward = Vec::with_capacity(samples);
    for delta in &deltas {
        let plus: Vec<f64> = point.iter().zip(delta).map(|(p, q)| p + q).collect();
        let minus: Vec<f64> = point.iter().zip(delta).map(|(p, q)| p - q).collect();
        let hp = h(&plus)?;
        let hm = h(&minus)?;
        let central: Vec<f64> = hp.iter().zip(&hm).map(|(a, b)| (a - b) / 2.0).collect();
        rows.extend_from_slice(delta);
        rhs.push(dot(y_star, &central));
        forward.push(hp.iter().zip(&h0).map(|(a, b)| a - b).collect::<Vec<f64>>());
    }
    let a = nalgebra::DMatrix::from_row_slice(samples, d, &rows);
    let b = nalgebra::DVector::from_vec(rhs);
    let x = a.svd(true, true).solve(&b, 1e-14).map_err(|_| OracleError::Dimension)?;
    let x_star: Vec<f64> = x.iter().copied().collect();
    let max_ratio = deltas
        .iter()
        .zip(&forward)
        .map(|(delta, dh)| {
            let len = (dot(delta, delta) + dot(dh, dh)).sqrt();
            (dot(&x_star, delta) - dot(y_star, dh)).abs() / len
        })
        .fold(0.0, f64::max);
    Ok(CoderivativeSample { x_star, max_ratio })
}
