use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Field arithmetic used by the simplex tableau.
///
/// `f64` compares against a small pivot tolerance; `BigRational` is exact.
pub trait Scalar: Clone + Debug + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    /// Exact for rationals: every finite `f64` is a dyadic rational.
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn is_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }
    fn lt(&self, o: &Self) -> bool;
    /// Threshold on the phase-one objective above which a system is infeasible.
    fn infeasibility_threshold() -> Self;
    const EXACT: bool;
}

/// Pivot and sign tolerance for floating tableaux.
pub const FLOAT_PIVOT_TOL: f64 = 1e-11;
/// Phase-one optimum above this value certifies infeasibility in float mode.
pub const FLOAT_INFEASIBILITY_TOL: f64 = 1e-9;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_positive(&self) -> bool {
        *self > FLOAT_PIVOT_TOL
    }
    fn is_negative(&self) -> bool {
        *self < -FLOAT_PIVOT_TOL
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn infeasibility_threshold() -> Self {
        FLOAT_INFEASIBILITY_TOL
    }
    const EXACT: bool = false;
}

impl Scalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as num_traits::One>::one()
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite coefficient")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn infeasibility_threshold() -> Self {
        <BigRational as Zero>::zero()
    }
    const EXACT: bool = true;
}
