use serde::Serialize;

use super::OracleError;

/// A set-valued map whose values are finite point samples.
pub type SampledMap<'a> = dyn Fn(&[f64]) -> Result<Vec<Vec<f64>>, OracleError> + 'a;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusEstimate {
    /// Largest observed ratio.
    pub modulus: f64,
    /// Pairs that produced a ratio.
    pub pairs: usize,
    /// Sample points whose value had no point in the neighborhood `V`.
    pub empty: usize,
}

/// `x̄ + r·e` for `e = ±e_i` and every radius `r`.
pub fn axis_samples(x_bar: &[f64], radii: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for &r in radii {
        for i in 0..x_bar.len() {
            for s in [1.0, -1.0] {
                let mut x = x_bar.to_vec();
                x[i] += s * r;
                out.push(x);
            }
        }
    }
    out
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

fn set_distance(p: &[f64], set: &[Vec<f64>]) -> f64 {
    set.iter().map(|q| distance(p, q)).fold(f64::INFINITY, f64::min)
}

struct Neighborhood<'a> {
    y_bar: &'a [f64],
    radius: f64,
}

impl Neighborhood<'_> {
    fn restrict(&self, s: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        s.into_iter()
            .filter(|y| distance(y, self.y_bar) <= self.radius)
            .collect()
    }
}

/// `e(S(x1) ∩ V, S(x2)) / ‖x1 − x2‖` accumulated over the given pairs.
fn accumulate(
    values: &[(Vec<f64>, Vec<Vec<f64>>)],
    pairs: impl Iterator<Item = (usize, usize)>,
    v: &Neighborhood,
) -> ModulusEstimate {
    let mut est = ModulusEstimate {
        modulus: 0.0,
        pairs: 0,
        empty: 0,
    };
    for (i, j) in pairs {
        let (x1, s1) = &values[i];
        let (x2, s2) = &values[j];
        let local = v.restrict(s1.clone());
        if local.is_empty() {
            est.empty += 1;
            continue;
        }
        if s2.is_empty() {
            est.modulus = f64::INFINITY;
            est.pairs += 1;
            continue;
        }
        let excess = local.iter().map(|y| set_distance(y, s2)).fold(0.0, f64::max);
        est.modulus = est.modulus.max(excess / distance(x1, x2));
        est.pairs += 1;
    }
    est
}

fn evaluate_all(map: &SampledMap, points: &[Vec<f64>]) -> Result<Vec<(Vec<f64>, Vec<Vec<f64>>)>, OracleError> {
    points.iter().map(|x| Ok((x.clone(), map(x)?))).collect()
}

/// Calmness modulus of `map` at `(x̄, ȳ)` estimated from the sample points
/// `xs`, with neighborhood `V = B(ȳ, v_radius)`.
pub fn estimate_calmness(
    map: &SampledMap,
    x_bar: &[f64],
    y_bar: &[f64],
    xs: &[Vec<f64>],
    v_radius: f64,
) -> Result<ModulusEstimate, OracleError> {
    let mut points = vec![x_bar.to_vec()];
    points.extend(xs.iter().filter(|x| distance(x, x_bar) > 0.0).cloned());
    let values = evaluate_all(map, &points)?;
    let v = Neighborhood {
        y_bar,
        radius: v_radius,
    };
    Ok(accumulate(&values, (1..values.len()).map(|i| (i, 0)), &v))
}

/// Lipschitz-like modulus over all ordered pairs of `{x̄} ∪ xs` at least
/// `min_separation` apart. Pairs `(x, x̄)` are always included, so the result
/// bounds the calmness estimate on the same samples from above.
pub fn estimate_lipschitz_like(
    map: &SampledMap,
    x_bar: &[f64],
    y_bar: &[f64],
    xs: &[Vec<f64>],
    v_radius: f64,
    min_separation: f64,
) -> Result<ModulusEstimate, OracleError> {
    let mut points = vec![x_bar.to_vec()];
    points.extend(xs.iter().filter(|x| distance(x, x_bar) > 0.0).cloned());
    let values = evaluate_all(map, &points)?;
    let v = Neighborhood {
        y_bar,
        radius: v_radius,
    };
    let count = values.len();
    let pairs = (0..count)
        .flat_map(|i| (0..count).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && (j == 0 || distance(&values[i].0, &values[j].0) >= min_separation));
    Ok(accumulate(&values, pairs, &v))
}
