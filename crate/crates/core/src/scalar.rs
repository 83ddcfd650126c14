//! Scalar abstraction shared by plain `f64` evaluation and forward-mode
//! differentiation.
//!
//! Field formulas are written once, generic over [`Scalar`]. Evaluating them
//! with `f64` gives values; evaluating with [`Dual3`] seeded on `(x, y, t)`
//! gives values together with all three first partials, exactly.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// False for plain values, where derivative bookkeeping can be skipped.
    const TRACKS_DERIVATIVES: bool;

    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;

    /// Lift a function value through the chain rule: the result has value
    /// `value` and derivative `deriv * d(self)`.
    fn chain(&self, value: f64, deriv: f64) -> Self;

    fn sin(self) -> Self {
        self.chain(self.value().sin(), self.value().cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value().cos(), -self.value().sin())
    }
    fn tan(self) -> Self {
        let c = self.value().cos();
        self.chain(self.value().tan(), 1.0 / (c * c))
    }
    fn exp(self) -> Self {
        let e = self.value().exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.value().ln(), 1.0 / self.value())
    }
    fn sqrt(self) -> Self {
        let s = self.value().sqrt();
        self.chain(s, 0.5 / s)
    }
    fn atan(self) -> Self {
        let v = self.value();
        self.chain(v.atan(), 1.0 / (1.0 + v * v))
    }
    fn powi(self, n: i32) -> Self {
        let v = self.value();
        let d = if n == 0 { 0.0 } else { n as f64 * v.powi(n - 1) };
        self.chain(v.powi(n), d)
    }
    /// `self^p` for a real exponent; caller guarantees the base is in-domain.
    fn powf(self, p: f64) -> Self {
        let v = self.value();
        self.chain(v.powf(p), p * v.powf(p - 1.0))
    }
    fn square(self) -> Self {
        self * self
    }
    /// Full-quadrant arctangent of `self / x`.
    fn atan2(self, x: Self) -> Self;
}

impl Scalar for f64 {
    const TRACKS_DERIVATIVES: bool = false;

    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn chain(&self, value: f64, _deriv: f64) -> Self {
        value
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
}

/// Dual number carrying a value and its gradient with respect to `(x, y, t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual3 {
    pub v: f64,
    pub d: [f64; 3],
}

impl Dual3 {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const T: usize = 2;

    pub fn constant(v: f64) -> Self {
        Dual3 { v, d: [0.0; 3] }
    }

    /// Independent variable number `axis` with value `v`.
    pub fn seed(v: f64, axis: usize) -> Self {
        let mut d = [0.0; 3];
        d[axis] = 1.0;
        Dual3 { v, d }
    }

    pub fn dx(&self) -> f64 {
        self.d[0]
    }
    pub fn dy(&self) -> f64 {
        self.d[1]
    }
    pub fn dt(&self) -> f64 {
        self.d[2]
    }

    fn map(self, value: f64, deriv: f64) -> Self {
        Dual3 {
            v: value,
            d: [self.d[0] * deriv, self.d[1] * deriv, self.d[2] * deriv],
        }
    }
}

impl Add for Dual3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual3 {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1], self.d[2] + o.d[2]],
        }
    }
}

impl Sub for Dual3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual3 {
            v: self.v - o.v,
            d: [self.d[0] - o.d[0], self.d[1] - o.d[1], self.d[2] - o.d[2]],
        }
    }
}

impl Mul for Dual3 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual3 {
            v: self.v * o.v,
            d: [
                self.d[0] * o.v + self.v * o.d[0],
                self.d[1] * o.v + self.v * o.d[1],
                self.d[2] * o.v + self.v * o.d[2],
            ],
        }
    }
}

impl Div for Dual3 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        Dual3 {
            v: q,
            d: [
                (self.d[0] - q * o.d[0]) * inv,
                (self.d[1] - q * o.d[1]) * inv,
                (self.d[2] - q * o.d[2]) * inv,
            ],
        }
    }
}

impl Neg for Dual3 {
    type Output = Self;
    fn neg(self) -> Self {
        Dual3 {
            v: -self.v,
            d: [-self.d[0], -self.d[1], -self.d[2]],
        }
    }
}

impl Scalar for Dual3 {
    const TRACKS_DERIVATIVES: bool = true;

    fn cst(v: f64) -> Self {
        Dual3::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn chain(&self, value: f64, deriv: f64) -> Self {
        self.map(value, deriv)
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = self.v * self.v + x.v * x.v;
        let v = self.v.atan2(x.v);
        let mut d = [0.0; 3];
        for (i, di) in d.iter_mut().enumerate() {
            *di = (x.v * self.d[i] - self.v * x.d[i]) / r2;
        }
        Dual3 { v, d }
    }
}
