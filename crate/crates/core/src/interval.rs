//! Outward-rounded interval arithmetic and interval-coefficient polynomials.
//!
//! Every primitive computes the correctly rounded IEEE result for each bound
//! and then nudges it one representable value outward (`next_down` for the
//! lower bound, `next_up` for the upper bound). Since the rounded result is
//! within half an ulp of the exact value, the nudged bounds enclose it. No
//! rounding-mode register is touched, so the code is thread-safe as is.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum IntervalError {
    #[error("division by an interval containing zero [{lo:e}, {hi:e}]")]
    DivisionByZero { lo: f64, hi: f64 },
    #[error("square root of an interval with negative lower bound [{lo:e}, {hi:e}]")]
    NegativeSqrt { lo: f64, hi: f64 },
    #[error("invalid interval bounds [{lo:e}, {hi:e}]")]
    InvalidBounds { lo: f64, hi: f64 },
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

fn down(x: f64) -> f64 {
    x.next_down()
}

fn up(x: f64) -> f64 {
    x.next_up()
}

impl Interval {
    /// Panics unless `lo <= hi` and neither bound is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi).expect("invalid interval")
    }

    pub fn try_new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(IntervalError::InvalidBounds { lo, hi })
        }
    }

    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(self) -> bool {
        self.contains(0.0)
    }

    pub fn encloses(self, other: Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Midpoint bisection; both halves share the midpoint.
    pub fn bisect(self) -> (Interval, Interval) {
        let m = self.mid();
        (
            Interval { lo: self.lo, hi: m },
            Interval { lo: m, hi: self.hi },
        )
    }

    // Fallible, so it cannot be `std::ops::Div`.
    #[allow(clippy::should_implement_trait)]
    pub fn div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::DivisionByZero {
                lo: rhs.lo,
                hi: rhs.hi,
            });
        }
        let q = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        Ok(from_candidates(q))
    }

    pub fn sqrt(self) -> Result<Interval, IntervalError> {
        if !(self.lo >= 0.0) {
            return Err(IntervalError::NegativeSqrt {
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(Interval {
            lo: down(self.lo.sqrt()).max(0.0),
            hi: up(self.hi.sqrt()),
        })
    }

    /// Integer power with even/odd aware bounds, so `[-2, 2]^2 = [0, 4]`.
    pub fn powi(self, n: u32) -> Interval {
        if n == 0 {
            return Interval::point(1.0);
        }
        if n == 1 {
            return self;
        }
        if self.lo >= 0.0 {
            Interval {
                lo: pow_down(self.lo, n),
                hi: pow_up(self.hi, n),
            }
        } else if self.hi <= 0.0 {
            let (l, h) = (pow_down(-self.hi, n), pow_up(-self.lo, n));
            if n.is_multiple_of(2) {
                Interval { lo: l, hi: h }
            } else {
                Interval { lo: -h, hi: -l }
            }
        } else if n.is_multiple_of(2) {
            Interval {
                lo: 0.0,
                hi: pow_up(self.lo.abs().max(self.hi), n),
            }
        } else {
            Interval {
                lo: -pow_up(-self.lo, n),
                hi: pow_up(self.hi, n),
            }
        }
    }
}

fn pow_down(x: f64, n: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut r = x;
    for _ in 1..n {
        r = down(r * x).max(0.0);
    }
    r
}

fn pow_up(x: f64, n: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut r = x;
    for _ in 1..n {
        r = up(r * x);
    }
    r
}

fn from_candidates(v: [f64; 4]) -> Interval {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Interval {
        lo: down(lo),
        hi: up(hi),
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: down(self.lo + rhs.lo),
            hi: up(self.hi + rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: down(self.lo - rhs.hi),
            hi: up(self.hi - rhs.lo),
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        from_candidates([
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ])
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

pub fn iv_add(a: Interval, b: Interval) -> Interval {
    a + b
}

pub fn iv_sub(a: Interval, b: Interval) -> Interval {
    a - b
}

pub fn iv_mul(a: Interval, b: Interval) -> Interval {
    a * b
}

pub fn iv_div(a: Interval, b: Interval) -> Result<Interval, IntervalError> {
    a.div(b)
}

pub fn iv_sqrt(a: Interval) -> Result<Interval, IntervalError> {
    a.sqrt()
}

pub fn iv_powi(a: Interval, n: u32) -> Interval {
    a.powi(n)
}

/// Ring operations shared by scalars, intervals and interval polynomials.
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {}

impl<T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T>> Ring for T {}

/// Field-like operations needed by formulas that run both in floating point
/// and in interval arithmetic.
pub trait Arith: Ring + Copy + Neg<Output = Self> {
    /// `c` must be exactly representable; only small integers and halves are used.
    fn constant(c: f64) -> Self;
    fn try_div(self, rhs: Self) -> Result<Self, IntervalError>;
    fn try_sqrt(self) -> Result<Self, IntervalError>;
    fn pow_n(self, n: u32) -> Self;
}

impl Arith for f64 {
    fn constant(c: f64) -> Self {
        c
    }

    fn try_div(self, rhs: Self) -> Result<Self, IntervalError> {
        if rhs == 0.0 {
            Err(IntervalError::DivisionByZero { lo: 0.0, hi: 0.0 })
        } else {
            Ok(self / rhs)
        }
    }

    fn try_sqrt(self) -> Result<Self, IntervalError> {
        if self < 0.0 {
            Err(IntervalError::NegativeSqrt { lo: self, hi: self })
        } else {
            Ok(self.sqrt())
        }
    }

    fn pow_n(self, n: u32) -> Self {
        self.powi(n as i32)
    }
}

impl Arith for Interval {
    fn constant(c: f64) -> Self {
        Interval::point(c)
    }

    fn try_div(self, rhs: Self) -> Result<Self, IntervalError> {
        self.div(rhs)
    }

    fn try_sqrt(self) -> Result<Self, IntervalError> {
        self.sqrt()
    }

    fn pow_n(self, n: u32) -> Self {
        self.powi(n)
    }
}

/// Polynomial in one variable with interval coefficients, index = degree.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPoly {
    coeffs: Vec<Interval>,
}

impl IntervalPoly {
    /// Trailing exact-zero coefficients are dropped; at least the constant term is kept.
    pub fn new(mut coeffs: Vec<Interval>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == Interval::point(0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Interval::point(0.0));
        }
        IntervalPoly { coeffs }
    }

    pub fn constant(c: Interval) -> Self {
        IntervalPoly { coeffs: vec![c] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Interval] {
        &self.coeffs
    }

    /// Coefficient of `x^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> Interval {
        self.coeffs.get(k).copied().unwrap_or(Interval::point(0.0))
    }

    pub fn eval(&self, x: Interval) -> Interval {
        poly_eval_horner(self, x)
    }
}

pub fn poly_add(p: &IntervalPoly, q: &IntervalPoly) -> IntervalPoly {
    let n = p.coeffs.len().max(q.coeffs.len());
    IntervalPoly::new((0..n).map(|k| p.coeff(k) + q.coeff(k)).collect())
}

pub fn poly_sub(p: &IntervalPoly, q: &IntervalPoly) -> IntervalPoly {
    let n = p.coeffs.len().max(q.coeffs.len());
    IntervalPoly::new((0..n).map(|k| p.coeff(k) - q.coeff(k)).collect())
}

pub fn poly_mul(p: &IntervalPoly, q: &IntervalPoly) -> IntervalPoly {
    let mut out = vec![Interval::point(0.0); p.coeffs.len() + q.coeffs.len() - 1];
    for (i, a) in p.coeffs.iter().enumerate() {
        for (j, b) in q.coeffs.iter().enumerate() {
            out[i + j] = out[i + j] + *a * *b;
        }
    }
    IntervalPoly::new(out)
}

pub fn poly_scale(p: &IntervalPoly, s: Interval) -> IntervalPoly {
    IntervalPoly::new(p.coeffs.iter().map(|c| *c * s).collect())
}

pub fn poly_eval_horner(p: &IntervalPoly, x: Interval) -> Interval {
    let mut acc = *p.coeffs.last().unwrap();
    for c in p.coeffs.iter().rev().skip(1) {
        acc = acc * x + *c;
    }
    acc
}

impl Add for IntervalPoly {
    type Output = IntervalPoly;
    fn add(self, rhs: IntervalPoly) -> IntervalPoly {
        poly_add(&self, &rhs)
    }
}

impl Sub for IntervalPoly {
    type Output = IntervalPoly;
    fn sub(self, rhs: IntervalPoly) -> IntervalPoly {
        poly_sub(&self, &rhs)
    }
}

impl Mul for IntervalPoly {
    type Output = IntervalPoly;
    fn mul(self, rhs: IntervalPoly) -> IntervalPoly {
        poly_mul(&self, &rhs)
    }
}
