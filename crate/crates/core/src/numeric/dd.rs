//! Double-double ("dd") arithmetic: an unevaluated sum `hi + lo` with
//! `|lo| <= ulp(hi)/2`, giving roughly 32 significant digits.
//!
//! Only the operations needed by the power-series evaluators are provided.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    pub fn prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs_f64(self) -> f64 {
        self.to_f64().abs()
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        // remainder self - q1 * b, computed exactly in the leading part
        let (p, e) = two_prod(q1, b);
        let (s, t) = two_sum(self.hi, -p);
        let t = t - e + self.lo;
        let q2 = (s + t) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexDd {
    pub re: Dd,
    pub im: Dd,
}

impl ComplexDd {
    pub const ZERO: ComplexDd = ComplexDd {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };

    pub fn new(re: Dd, im: Dd) -> Self {
        ComplexDd { re, im }
    }

    pub fn from_c64(z: Complex64) -> Self {
        ComplexDd {
            re: Dd::from_f64(z.re),
            im: Dd::from_f64(z.im),
        }
    }

    /// Square of a double-precision complex number, exact up to dd rounding.
    pub fn square_of(z: Complex64) -> Self {
        let re = Dd::prod(z.re, z.re) - Dd::prod(z.im, z.im);
        let im = Dd::prod(z.re, z.im).mul_f64(2.0);
        ComplexDd { re, im }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn norm_f64(self) -> f64 {
        self.to_c64().norm()
    }

    pub fn scale(self, s: Dd) -> Self {
        ComplexDd {
            re: self.re * s,
            im: self.im * s,
        }
    }

    pub fn div_f64(self, b: f64) -> Self {
        ComplexDd {
            re: self.re.div_f64(b),
            im: self.im.div_f64(b),
        }
    }
}

impl Add for ComplexDd {
    type Output = ComplexDd;
    fn add(self, b: ComplexDd) -> ComplexDd {
        ComplexDd {
            re: self.re + b.re,
            im: self.im + b.im,
        }
    }
}

impl Sub for ComplexDd {
    type Output = ComplexDd;
    fn sub(self, b: ComplexDd) -> ComplexDd {
        ComplexDd {
            re: self.re - b.re,
            im: self.im - b.im,
        }
    }
}

impl Mul for ComplexDd {
    type Output = ComplexDd;
    fn mul(self, b: ComplexDd) -> ComplexDd {
        ComplexDd {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}
