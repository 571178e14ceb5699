//! Scalar abstraction so analytic families can be evaluated either as plain
//! `f64` or as forward-mode duals carrying the three spatial partials.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn val(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, e: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;

    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }
    fn sq(self) -> Self {
        self * self
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn val(self) -> f64 {
        self
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
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
}

/// Value plus gradient with respect to the three coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: [f64; 3],
}

impl Dual {
    pub fn var(v: f64, axis: usize) -> Self {
        let mut d = [0.0; 3];
        d[axis] = 1.0;
        Dual { v, d }
    }

    fn chain(self, v: f64, dv: f64) -> Self {
        Dual { v, d: [dv * self.d[0], dv * self.d[1], dv * self.d[2]] }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: [self.d[0] + o.d[0], self.d[1] + o.d[1], self.d[2] + o.d[2]] }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: [self.d[0] - o.d[0], self.d[1] - o.d[1], self.d[2] - o.d[2]] }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        let mut d = [0.0; 3];
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = self.d[k] * o.v + self.v * o.d[k];
        }
        Dual { v: self.v * o.v, d }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        let mut d = [0.0; 3];
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = (self.d[k] - v * o.d[k]) * inv;
        }
        Dual { v, d }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: [-self.d[0], -self.d[1], -self.d[2]] }
    }
}

impl Real for Dual {
    fn cst(v: f64) -> Self {
        Dual { v, d: [0.0; 3] }
    }
    fn val(self) -> f64 {
        self.v
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        // sqrt(|y|^2) at the origin: pick the zero subgradient
        let ds = if s > 0.0 { 0.5 / s } else { 0.0 };
        self.chain(s, ds)
    }
    fn powf(self, e: f64) -> Self {
        if self.v == 0.0 {
            let dv = if e == 1.0 { 1.0 } else { 0.0 };
            return self.chain(0.0f64.powf(e), dv);
        }
        self.chain(self.v.powf(e), e * self.v.powf(e - 1.0))
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = Dual::var(2.0, 0);
        let y = Dual::var(3.0, 1);
        let f = x * y / (x + y);
        assert!((f.v - 1.2).abs() < 1e-15);
        // d/dx xy/(x+y) = y^2/(x+y)^2
        assert!((f.d[0] - 9.0 / 25.0).abs() < 1e-15);
        assert!((f.d[1] - 4.0 / 25.0).abs() < 1e-15);
        assert_eq!(f.d[2], 0.0);
    }

    #[test]
    fn transcendental_derivatives() {
        let x = Dual::var(0.7, 2);
        assert!((x.exp().d[2] - 0.7f64.exp()).abs() < 1e-15);
        assert!((x.ln().d[2] - 1.0 / 0.7).abs() < 1e-15);
        assert!((x.powf(2.5).d[2] - 2.5 * 0.7f64.powf(1.5)).abs() < 1e-14);
        assert!((x.sin().d[2] - 0.7f64.cos()).abs() < 1e-15);
    }
}
