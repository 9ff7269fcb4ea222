//! Exact scalars: arbitrary-precision rationals and complex rationals.
//!
//! Every coefficient in the algebraic modules is a `CRat`, a pair of
//! `BigRational`s. No floating point enters the exact pipeline; floats only
//! appear in `matmodel` and when evaluating series at numeric points.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_u64(n: u64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse "p/q" or "p" into an exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rat::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().ok()?;
            Some(Rat::from_integer(p))
        }
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::INFINITY) / r.denom().to_f64().unwrap_or(f64::INFINITY)
}

/// Complex number with exact rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CRat {
    pub re: Rat,
    pub im: Rat,
}

impl CRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        CRat { re, im }
    }

    pub fn zero() -> Self {
        CRat {
            re: Rat::zero(),
            im: Rat::zero(),
        }
    }

    pub fn one() -> Self {
        CRat {
            re: Rat::one(),
            im: Rat::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        CRat {
            re: rat_int(n),
            im: Rat::zero(),
        }
    }

    pub fn from_rat(r: Rat) -> Self {
        CRat {
            re: r,
            im: Rat::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        CRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// The 1-norm |re| + |im|, the modulus surrogate used by every `‖·‖_M`
    /// diagnostic. It is an equivalent norm on C and keeps norm computations
    /// inside the rationals.
    pub fn norm1(&self) -> Rat {
        self.re.abs() + self.im.abs()
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.re)
    }

    pub fn inv(&self) -> Self {
        let den = &self.re * &self.re + &self.im * &self.im;
        assert!(!den.is_zero(), "division by zero CRat");
        CRat {
            re: &self.re / &den,
            im: -&self.im / &den,
        }
    }
}

impl From<Rat> for CRat {
    fn from(r: Rat) -> Self {
        CRat::from_rat(r)
    }
}

impl Add for CRat {
    type Output = CRat;
    fn add(self, rhs: CRat) -> CRat {
        CRat {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl<'a> AddAssign<&'a CRat> for CRat {
    fn add_assign(&mut self, rhs: &'a CRat) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl Sub for CRat {
    type Output = CRat;
    fn sub(self, rhs: CRat) -> CRat {
        CRat {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl<'a> SubAssign<&'a CRat> for CRat {
    fn sub_assign(&mut self, rhs: &'a CRat) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl Neg for CRat {
    type Output = CRat;
    fn neg(self) -> CRat {
        CRat {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl<'b> Mul<&'b CRat> for &CRat {
    type Output = CRat;
    fn mul(self, rhs: &'b CRat) -> CRat {
        // Real-by-real is the hot path in the solver.
        if self.im.is_zero() && rhs.im.is_zero() {
            return CRat {
                re: &self.re * &rhs.re,
                im: Rat::zero(),
            };
        }
        CRat {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Mul for CRat {
    type Output = CRat;
    fn mul(self, rhs: CRat) -> CRat {
        (&self) * (&rhs)
    }
}

impl fmt::Display for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else {
            write!(
                f,
                "{}{}{}i",
                self.re,
                if self.im.is_negative() { "" } else { "+" },
                self.im
            )
        }
    }
}

impl fmt::Debug for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_arith() {
        let a = parse_rat("3/4").unwrap();
        let b = parse_rat("-2").unwrap();
        assert_eq!(&a + &b, rat(-5, 4));
        assert!(parse_rat("1/0").is_none());
    }

    #[test]
    fn complex_mul_and_conj() {
        let z = CRat::new(rat_int(2), rat_int(1));
        let w = z.conj();
        assert_eq!(&z * &w, CRat::from_int(5));
        assert_eq!(z.norm1(), rat_int(3));
    }

    #[test]
    fn inverse() {
        let z = CRat::new(rat_int(1), rat_int(2));
        assert_eq!(&z * &z.inv(), CRat::one());
    }
}
