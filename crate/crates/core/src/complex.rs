//! Complex arithmetic on explicit pairs of `f64`.
//!
//! Everything downstream (kernels, automorphisms, symbols) manipulates
//! complex numbers through this type, so conjugation, division and the
//! principal branch of non-integer powers have one fixed definition.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
pub const ONE: Complex = Complex { re: 1.0, im: 0.0 };

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    /// Squared modulus `re^2 + im^2`.
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    /// Modulus, computed as `hypot` to avoid spurious overflow.
    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn arg(self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Principal-branch real power `z^p = exp(p (ln|z| + i arg z))`.
    ///
    /// Positive real `z` maps to positive real values. All call sites keep
    /// `Re z > 0` (the kernel base `1 - <z,w>` never leaves the right half
    /// plane on the ball), so the branch cut is never touched.
    pub fn powf(self, p: f64) -> Self {
        let log_r = 0.5 * self.norm_sqr().ln();
        let theta = self.arg();
        let mag = (p * log_r).exp();
        let ang = p * theta;
        Self::new(mag * ang.cos(), mag * ang.sin())
    }

    /// `|z|^p` without computing the complex power.
    pub fn abs_powf(self, p: f64) -> f64 {
        (0.5 * p * self.norm_sqr().ln()).exp()
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, rhs: Complex) -> Complex {
        Complex::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl AddAssign for Complex {
    fn add_assign(&mut self, rhs: Complex) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, rhs: Complex) -> Complex {
        Complex::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, rhs: Complex) -> Complex {
        Complex::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl Mul<f64> for Complex {
    type Output = Complex;
    fn mul(self, rhs: f64) -> Complex {
        self.scale(rhs)
    }
}

impl Div for Complex {
    type Output = Complex;
    /// Smith's algorithm: scales by the larger component of the divisor so
    /// intermediate products cannot overflow for well-scaled inputs.
    fn div(self, rhs: Complex) -> Complex {
        if rhs.re.abs() >= rhs.im.abs() {
            let r = rhs.im / rhs.re;
            let d = rhs.re + rhs.im * r;
            Complex::new((self.re + self.im * r) / d, (self.im - self.re * r) / d)
        } else {
            let r = rhs.re / rhs.im;
            let d = rhs.re * r + rhs.im;
            Complex::new((self.re * r + self.im) / d, (self.im * r - self.re) / d)
        }
    }
}

impl From<f64> for Complex {
    fn from(re: f64) -> Self {
        Complex::new(re, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-14;

    #[test]
    fn division_round_trips() {
        let a = Complex::new(1.7, -0.3);
        let b = Complex::new(-0.2, 0.9);
        let q = a / b;
        let back = q * b;
        assert!((back.re - a.re).abs() < TOL && (back.im - a.im).abs() < TOL);
    }

    #[test]
    fn principal_power_on_positive_reals() {
        let z = Complex::new(0.75, 0.0);
        let p = z.powf(-2.0);
        assert!((p.re - 1.0 / 0.5625).abs() < 1e-12);
        assert!(p.im.abs() < TOL);
    }

    #[test]
    fn power_matches_repeated_multiplication() {
        let z = Complex::new(0.6, 0.3);
        let p3 = z.powf(3.0);
        let m3 = z * z * z;
        assert!((p3.re - m3.re).abs() < 1e-13 && (p3.im - m3.im).abs() < 1e-13);
    }

    #[test]
    fn abs_powf_matches_powf_modulus() {
        let z = Complex::new(0.4, -1.2);
        assert!((z.abs_powf(2.5) - z.abs().powf(2.5)).abs() < 1e-12);
    }
}
