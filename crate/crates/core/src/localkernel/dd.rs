//! Double-double arithmetic (about 106 bits) for quadratures whose answer sits
//! far below `f64` roundoff of the integrand.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };
const TWO_PI: Dd = Dd { hi: 2.0 * std::f64::consts::PI, lo: 2.449_293_598_294_706_4e-16 };
const LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
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

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn pi() -> Self {
        PI
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Exact multiplication by `2^e`.
    pub fn ldexp(self, e: i32) -> Self {
        let s = 2f64.powi(e);
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = Dd::new(self.hi.sqrt());
        // one Newton step doubles the f64 precision
        x + (self - x * x) / (x + x)
    }

    pub fn powi(self, n: u32) -> Self {
        let mut result = Dd::ONE;
        let mut base = self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            e >>= 1;
        }
        result
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
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

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        self * Dd::new(b)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        self / Dd::new(b)
    }
}

/// Complex double-double.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: Cdd = Cdd { re: Dd::ONE, im: Dd::ZERO };

    pub fn new(re: Dd, im: Dd) -> Self {
        Cdd { re, im }
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        Cdd { re: Dd::new(re), im: Dd::new(im) }
    }

    pub fn conj(self) -> Self {
        Cdd { re: self.re, im: -self.im }
    }

    pub fn scale(self, s: Dd) -> Self {
        Cdd { re: self.re * s, im: self.im * s }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re.sqr() + self.im.sqr()
    }

    pub fn norm(self) -> Dd {
        self.norm_sqr().sqrt()
    }

    pub fn powu(self, n: u64) -> Self {
        let mut result = Cdd::ONE;
        let mut base = self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            e >>= 1;
        }
        result
    }

    /// `e^{i theta}`.
    pub fn cis(theta: Dd) -> Self {
        Cdd::new(Dd::ZERO, theta).exp()
    }

    /// `exp(2 pi i j / n)`.
    pub fn root_of_unity(n: u64, j: u64) -> Self {
        let j = j % n;
        if j == 0 {
            return Cdd::ONE;
        }
        if 2 * j == n {
            return Cdd::from_f64(-1.0, 0.0);
        }
        Cdd::cis(TWO_PI * Dd::new(j as f64) / Dd::new(n as f64))
    }

    /// Complex exponential: reduce the real part by `ln 2` and the imaginary
    /// part by `2 pi`, scale down by `2^6`, sum the Taylor series and square back.
    pub fn exp(self) -> Self {
        let nr = (self.re.hi / LN2.hi).round();
        let r = self.re - LN2 * nr;
        let nt = (self.im.hi / TWO_PI.hi).round();
        let t = self.im - TWO_PI * nt;
        const HALVINGS: i32 = 6;
        let w = Cdd::new(r.ldexp(-HALVINGS), t.ldexp(-HALVINGS));
        let mut acc = Cdd::ONE;
        for l in (1..=18).rev() {
            acc = Cdd::ONE + (w * acc).scale(Dd::ONE / Dd::new(l as f64));
        }
        for _ in 0..HALVINGS {
            acc = acc * acc;
        }
        let e = nr as i32;
        Cdd::new(acc.re.ldexp(e), acc.im.ldexp(e))
    }

    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, b: Cdd) -> Cdd {
        Cdd { re: self.re + b.re, im: self.im + b.im }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, b: Cdd) -> Cdd {
        Cdd { re: self.re - b.re, im: self.im - b.im }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, b: Cdd) -> Cdd {
        Cdd {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: Dd, b: Dd) -> Vec<(Dd, Dd)> {
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    let nf = n as f64;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut x = Dd::new(guess);
        let mut dp = Dd::ONE;
        for _ in 0..8 {
            let (p, p_prev) = legendre(n, x);
            dp = (x * p - p_prev) * nf / (x * x - Dd::ONE);
            let step = p / dp;
            x = x - step;
            if step.hi.abs() < 1e-33 {
                break;
            }
        }
        let (p, p_prev) = legendre(n, x);
        if p.hi != 0.0 {
            dp = (x * p - p_prev) * nf / (x * x - Dd::ONE);
        }
        let w = Dd::new(2.0) / ((Dd::ONE - x * x) * dp * dp);
        out.push((mid + half * x, half * w));
    }
    out
}

/// `(P_n(x), P_{n-1}(x))`.
fn legendre(n: usize, x: Dd) -> (Dd, Dd) {
    let mut p_prev = Dd::ONE;
    let mut p = x;
    for j in 1..n {
        let jf = j as f64;
        let next = (x * p * (2.0 * jf + 1.0) - p_prev * jf) / (jf + 1.0);
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}
