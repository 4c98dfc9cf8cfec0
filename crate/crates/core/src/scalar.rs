//! Scalar abstractions for the two numeric modes.
//!
//! `Scalar` is an ordered field used for hip values and moments: exact
//! rationals or `f64`. `Weight` is what a shift multiplies by when it acts
//! on vectors, so it may also be complex.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_q, sqrt_exact, to_f64, Q};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
{
    fn from_q(value: &Q) -> Self;
    fn to_f64(&self) -> f64;
    /// `self <= bound + tol`; exact types ignore `tol`.
    fn le_tol(&self, bound: &Self, tol: f64) -> bool;
    /// `"p/q"` for rationals, 17 significant digits for floats.
    fn render(&self) -> String;
}

impl Scalar for Q {
    fn from_q(value: &Q) -> Self {
        value.clone()
    }

    fn to_f64(&self) -> f64 {
        to_f64(self)
    }

    fn le_tol(&self, bound: &Self, _tol: f64) -> bool {
        self <= bound
    }

    fn render(&self) -> String {
        format_q(self)
    }
}

impl Scalar for f64 {
    fn from_q(value: &Q) -> Self {
        to_f64(value)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn le_tol(&self, bound: &Self, tol: f64) -> bool {
        *self <= *bound + tol
    }

    fn render(&self) -> String {
        format_f64(*self)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    format!("{x:.16e}")
}

/// A weight a shift multiplies by: `λ_v` recovered from `|λ_v|²`.
pub trait Weight: Clone + Debug + PartialEq + Zero + Add<Output = Self> + Mul<Output = Self> {
    /// The nonnegative square root of a squared weight.
    fn from_sq(sq: &Q) -> Result<Self>;
    fn conj(&self) -> Self;
}

impl Weight for f64 {
    fn from_sq(sq: &Q) -> Result<Self> {
        Ok(to_f64(sq).sqrt())
    }

    fn conj(&self) -> Self {
        *self
    }
}

impl Weight for Q {
    fn from_sq(sq: &Q) -> Result<Self> {
        sqrt_exact(sq).ok_or_else(|| Error::NonSquareWeight(format_q(sq)))
    }

    fn conj(&self) -> Self {
        self.clone()
    }
}

impl Weight for Complex<f64> {
    fn from_sq(sq: &Q) -> Result<Self> {
        Ok(Complex::new(to_f64(sq).sqrt(), 0.0))
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }
}

impl Weight for Complex<Q> {
    fn from_sq(sq: &Q) -> Result<Self> {
        Ok(Complex::new(Q::from_sq(sq)?, Q::zero()))
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn exact_and_float_weights() {
        assert_eq!(Q::from_sq(&q(9, 4)).unwrap(), q(3, 2));
        assert!(matches!(Q::from_sq(&q(2, 1)), Err(Error::NonSquareWeight(_))));
        assert!((f64::from_sq(&q(2, 1)).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let z = Complex::new(q(1, 1), q(2, 1));
        assert_eq!(Weight::conj(&z), Complex::new(q(1, 1), q(-2, 1)));
    }

    #[test]
    fn rendering() {
        assert_eq!(q(10, 9).render(), "10/9");
        let s = (10.0f64 / 9.0).render();
        assert_eq!(s.parse::<f64>().unwrap(), 10.0 / 9.0);
        assert!(1.0f64.le_tol(&(1.0 - 1e-12), 1e-9));
        assert!(!q(10, 9).le_tol(&Q::one(), 1.0));
    }
}
