//! Complex-step differentiation for functions that are already complex.
//!
//! The classical trick `f'(x) ≈ Im f(x + ih) / h` needs a second imaginary
//! unit when `x` itself is complex. [`Bicomplex`] numbers `a + b·j` with
//! `a, b ∈ ℂ`, `j² = −1` and `ij = ji` supply it: for analytic `f`,
//! `f(q + h·j) = f(q) + h·f'(q)·j + O(h²)` and the `j` part carries the
//! derivative without any subtractive cancellation, so `h` can be as small
//! as `1e-20`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::model::principal_sqrt;

/// Arithmetic needed by the closed-form Jost algebra, implemented both for
/// plain complex numbers and for bicomplex numbers.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_complex(z: Complex64) -> Self;
    /// The ordinary complex part (drops the perturbation).
    fn base(&self) -> Complex64;
    fn exp(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    /// Principal square root of the base part, continued to first order.
    fn sqrt(self) -> Self;

    fn scale(self, c: Complex64) -> Self {
        self * Self::from_complex(c)
    }

    fn times_i(self) -> Self {
        self.scale(Complex64::i())
    }
}

impl Scalar for Complex64 {
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn base(&self) -> Complex64 {
        *self
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn sqrt(self) -> Self {
        principal_sqrt(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bicomplex {
    pub re: Complex64,
    pub jm: Complex64,
}

impl Bicomplex {
    pub fn new(re: Complex64, jm: Complex64) -> Self {
        Self { re, jm }
    }
}

impl Add for Bicomplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.jm + o.jm)
    }
}

impl Sub for Bicomplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.jm - o.jm)
    }
}

impl Neg for Bicomplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.jm)
    }
}

impl Mul for Bicomplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re - self.jm * o.jm, self.re * o.jm + self.jm * o.re)
    }
}

impl Div for Bicomplex {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        // (c + dj)(c - dj) = c² + d², a plain complex number.
        let den = o.re * o.re + o.jm * o.jm;
        let num = self * Self::new(o.re, -o.jm);
        Self::new(num.re / den, num.jm / den)
    }
}

impl Scalar for Bicomplex {
    fn from_complex(z: Complex64) -> Self {
        Self::new(z, Complex64::new(0.0, 0.0))
    }
    fn base(&self) -> Complex64 {
        self.re
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Self::new(e * self.jm.cos(), e * self.jm.sin())
    }
    fn sin(self) -> Self {
        Self::new(
            self.re.sin() * self.jm.cosh(),
            self.re.cos() * self.jm.sinh(),
        )
    }
    fn cos(self) -> Self {
        Self::new(
            self.re.cos() * self.jm.cosh(),
            -(self.re.sin() * self.jm.sinh()),
        )
    }
    fn sqrt(self) -> Self {
        // s² − d² = a and 2sd = b, solved to second order in b.
        let s = principal_sqrt(self.re);
        let d = self.jm / (2.0 * s);
        Self::new(s + d * d / (2.0 * s), d)
    }
}

/// Default step, `1e-20 · (1 + |q|)`.
pub fn default_step(q: Complex64) -> f64 {
    1e-20 * (1.0 + q.norm())
}

/// Derivative of an analytic `f` at `q` by a bicomplex step.
pub fn derivative<F>(f: F, q: Complex64) -> Complex64
where
    F: Fn(Bicomplex) -> Bicomplex,
{
    let h = default_step(q);
    let out = f(Bicomplex::new(q, Complex64::new(h, 0.0)));
    out.jm / h
}

/// Value and derivative from a single evaluation.
pub fn value_and_derivative<F>(f: F, q: Complex64) -> (Complex64, Complex64)
where
    F: Fn(Bicomplex) -> Bicomplex,
{
    let h = default_step(q);
    let out = f(Bicomplex::new(q, Complex64::new(h, 0.0)));
    (out.re, out.jm / h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn elementary_derivatives() {
        let q = Complex64::new(1.3, -0.7);
        assert!(close(derivative(|z| z.exp(), q), q.exp(), 1e-15));
        assert!(close(derivative(|z| z.sin(), q), q.cos(), 1e-15));
        assert!(close(derivative(|z| z.cos(), q), -q.sin(), 1e-15));
        assert!(close(derivative(|z| z.sqrt(), q), 0.5 / q.sqrt(), 1e-15));
        let one = Bicomplex::from_complex(Complex64::new(1.0, 0.0));
        assert!(close(derivative(|z| one / z, q), -1.0 / (q * q), 1e-15));
        assert!(close(derivative(|z| z * z * z, q), 3.0 * q * q, 1e-15));
    }

    #[test]
    fn composite_function() {
        // f(q) = sin(q)·exp(i q) / (q² + 2)
        let f = |z: Bicomplex| {
            let two = Bicomplex::from_complex(Complex64::new(2.0, 0.0));
            z.sin() * z.times_i().exp() / (z * z + two)
        };
        let q = Complex64::new(2.5, -0.4);
        let fc = |z: Complex64| z.sin() * (Complex64::i() * z).exp() / (z * z + 2.0);
        let h = 1e-5;
        let fd = (fc(q + h) - fc(q - h)) / (2.0 * h);
        assert!(close(derivative(f, q), fd, 1e-9));
    }

    #[test]
    fn value_is_untouched() {
        let q = Complex64::new(0.3, 0.2);
        let (v, _) = value_and_derivative(|z| z.exp(), q);
        assert_eq!(v, q.exp());
    }
}
