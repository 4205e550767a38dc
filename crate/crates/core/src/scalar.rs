//! Scalar abstractions shared by the exact (rational) and floating-point code paths.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

/// Complex double, the working scalar of every floating-point path.
pub type C64 = Complex64;

/// Real number as a complex scalar.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A field the linear-algebra and coefficient code is generic over.
///
/// Implemented for [`C64`] (production) and [`BigRational`] (exact checks).
pub trait Field:
    Clone + PartialEq + fmt::Debug + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;

    fn to_c64(&self) -> C64;

    /// Whether the value is zero up to `tol`. Exact fields ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Magnitude used for pivot selection.
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
}

impl Field for C64 {
    fn from_i64(v: i64) -> Self {
        re(v as f64)
    }

    fn to_c64(&self) -> C64 {
        *self
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
}

impl Field for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_c64(&self) -> C64 {
        re(self.to_f64().unwrap_or(f64::NAN))
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

/// Rational `num/den` as an exact scalar.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Distance from `z` to the nearest integer (complex distance).
pub fn distance_to_integer(z: C64) -> f64 {
    let nearest = z.re.round();
    (z - re(nearest)).norm()
}

/// Values the coordinate maps are written over: plain scalars, or dual numbers
/// when a Jacobian-vector product is needed.
pub trait Ring:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + From<C64>
{
}

impl<T> Ring for T where
    T: Clone
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
        + From<C64>
{
}

/// First-order dual number `v + d·ε`, ε² = 0, over complex doubles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub v: C64,
    pub d: C64,
}

impl Dual {
    pub fn new(v: C64, d: C64) -> Self {
        Dual { v, d }
    }

    pub fn constant(v: C64) -> Self {
        Dual { v, d: C64::zero() }
    }
}

impl From<C64> for Dual {
    fn from(v: C64) -> Self {
        Dual::constant(v)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let inv = C64::one() / o.v;
        Dual::new(self.v * inv, (self.d * o.v - self.v * o.d) * inv * inv)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_quotient_rule() {
        // f(x) = x^2 / (1 + x) at x = 2: f' = (x^2 + 2x)/(1+x)^2 = 8/9
        let x = Dual::new(re(2.0), re(1.0));
        let f = x * x / (Dual::from(re(1.0)) + x);
        assert!((f.v - re(4.0 / 3.0)).norm() < 1e-15);
        assert!((f.d - re(8.0 / 9.0)).norm() < 1e-15);
    }

    #[test]
    fn integer_distance() {
        assert!((distance_to_integer(re(2.96)) - 0.04).abs() < 1e-12);
        assert!((distance_to_integer(C64::new(1.0, 0.3)) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rational_negligible_is_exact() {
        assert!(!ratio(1, 1_000_000_000).is_negligible(1.0));
        assert!(BigRational::zero().is_negligible(0.0));
    }
}
