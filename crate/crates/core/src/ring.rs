//! Coefficient rings for supernumbers and polynomials.
//!
//! Three rings are used throughout the crate: exact Gaussian rationals
//! [`Qi`] for algebraic identities, complex doubles [`C64`] for numeric
//! suites, and polynomials over either (see [`crate::poly::Poly`]).

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact complex rational number, `a + b i` with `a, b ∈ ℚ`.
pub type Qi = Complex<BigRational>;

/// Complex double.
pub type C64 = Complex<f64>;

/// A commutative ring with unit, closed under the operations the graded
/// algebra needs.
pub trait Ring:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;

    /// Embeds an exact scalar.
    fn from_qi(c: &Qi) -> Self;

    /// Multiplicative inverse, when one exists in the ring.
    fn try_inverse(&self) -> Option<Self>;

    /// `exp(self)`, when representable. Every ring can exponentiate zero.
    fn try_exp(&self) -> Option<Self> {
        if self.is_zero() {
            Some(Self::one())
        } else {
            None
        }
    }

    /// Embeds a double. For exact rings the binary value of `x` is used
    /// verbatim, so no rounding happens beyond what `x` already carries.
    fn from_f64(x: f64) -> Self {
        Self::from_qi(&qi_from_f64(x))
    }

    fn from_i64(k: i64) -> Self {
        Self::from_qi(&qi_int(k))
    }
}

impl Ring for Qi {
    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn from_qi(c: &Qi) -> Self {
        c.clone()
    }

    fn try_inverse(&self) -> Option<Self> {
        if Ring::is_zero(self) {
            None
        } else {
            Some(self.inv())
        }
    }
}

impl Ring for C64 {
    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex::new(1.0, 0.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn from_qi(c: &Qi) -> Self {
        qi_to_c64(c)
    }

    fn try_inverse(&self) -> Option<Self> {
        if Ring::is_zero(self) {
            None
        } else {
            Some(self.inv())
        }
    }

    fn try_exp(&self) -> Option<Self> {
        Some(self.exp())
    }

    fn from_f64(x: f64) -> Self {
        Complex::new(x, 0.0)
    }
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact `num/den` as a real Gaussian rational.
pub fn qi(num: i64, den: i64) -> Qi {
    Complex::new(rat(num, den), BigRational::zero())
}

pub fn qi_int(k: i64) -> Qi {
    qi(k, 1)
}

/// The imaginary unit.
pub fn qi_i() -> Qi {
    Complex::new(BigRational::zero(), BigRational::one())
}

pub fn qi_complex(re: BigRational, im: BigRational) -> Qi {
    Complex::new(re, im)
}

pub fn qi_from_f64(x: f64) -> Qi {
    let re = BigRational::from_float(x).expect("finite double");
    Complex::new(re, BigRational::zero())
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator or denominator too large for a direct conversion
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn qi_to_c64(c: &Qi) -> C64 {
    Complex::new(rat_to_f64(&c.re), rat_to_f64(&c.im))
}

/// Magnitude of a ring element used when reporting residuals.
pub trait Magnitude {
    fn magnitude(&self) -> f64;
}

impl Magnitude for Qi {
    fn magnitude(&self) -> f64 {
        qi_to_c64(self).norm()
    }
}

impl Magnitude for C64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}
