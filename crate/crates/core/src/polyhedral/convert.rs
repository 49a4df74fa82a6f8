//! Exact conversion between halfspace and generator descriptions of small
//! cones, by enumerating rank-deficient row subsets in rational arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::cone::{Generators, Halfspaces};

/// Row subsets are enumerated exhaustively; beyond this many inequality
/// rows the conversion is refused.
pub const MAX_CONVERSION_ROWS: usize = 20;

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite coefficient")
}

fn rows_to_rat(rows: &[Vec<f64>]) -> Vec<Vec<BigRational>> {
    rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect()
}

/// Basis of `{v : row·v = 0 for all rows}`.
fn null_space(rows: &[Vec<BigRational>], d: usize) -> Vec<Vec<BigRational>> {
    let mut a: Vec<Vec<BigRational>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..d {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..d {
                    let delta = &f * &a[r][j];
                    a[i][j] = &a[i][j] - delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    (0..d)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); d];
            v[free] = BigRational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[i][free].clone();
            }
            v
        })
        .collect()
}

/// Scale to the primitive integer vector with the same direction.
fn primitive(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &gcd).collect()
}

fn to_f64(v: &[BigInt]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

/// Minimal generators of `{v ∈ R^d : Hv ≤ 0, Ev = 0}`: a lineality basis
/// plus one ray per extreme ray of the pointed part.
pub fn generators_of(h: &Halfspaces, d: usize) -> Option<Generators> {
    if h.inequalities.len() > MAX_CONVERSION_ROWS {
        return None;
    }
    let ineq = rows_to_rat(&h.inequalities);
    let eq = rows_to_rat(&h.equalities);
    let all: Vec<Vec<BigRational>> = ineq.iter().chain(&eq).cloned().collect();
    let lineality = null_space(&all, d);
    let mut rays: Vec<Vec<BigInt>> = Vec::new();
    let p = ineq.len();
    for mask in 0u32..(1u32 << p) {
        let mut sys: Vec<Vec<BigRational>> = (0..p).filter(|b| mask >> b & 1 == 1).map(|b| ineq[b].clone()).collect();
        sys.extend(eq.iter().cloned());
        sys.extend(lineality.iter().cloned());
        let ns = null_space(&sys, d);
        if ns.len() != 1 {
            continue;
        }
        let r = &ns[0];
        let neg: Vec<BigRational> = r.iter().map(|x| -x).collect();
        for cand in [r, &neg] {
            if ineq.iter().all(|row| !dot(row, cand).is_positive()) {
                let prim = primitive(cand);
                if !rays.contains(&prim) {
                    rays.push(prim);
                }
                break;
            }
        }
    }
    rays.sort();
    Some(Generators {
        rays: rays.iter().map(|r| to_f64(r)).collect(),
        lines: lineality.iter().map(|l| to_f64(&primitive(l))).collect(),
    })
}

/// Halfspace description of `cone(rays) + span(lines)`, via the generators
/// of its polar cone.
pub fn halfspaces_of(g: &Generators, d: usize) -> Option<Halfspaces> {
    let polar = Halfspaces {
        inequalities: g.rays.clone(),
        equalities: g.lines.clone(),
    };
    let dual = generators_of(&polar, d)?;
    Some(Halfspaces {
        inequalities: dual.rays,
        equalities: dual.lines,
    })
}
