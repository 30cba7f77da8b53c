//! Truncated univariate Taylor series.
//!
//! A [`TaylorJet`] of order `N` stores `f(c), f'(c), f''(c)/2!, ..., f^(N)(c)/N!`.
//! Every operation is truncation-exact: output coefficient `j` depends only on
//! input coefficients `0..=j`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorJet {
    center: f64,
    coeffs: Vec<f64>,
}

impl TaylorJet {
    pub fn from_coeffs(center: f64, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        TaylorJet { center, coeffs }
    }

    pub fn constant(center: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        TaylorJet { center, coeffs }
    }

    /// The identity `t -> t` expanded at `center`.
    pub fn variable(center: f64, order: usize) -> Self {
        Self::affine(center, order, center, 1.0)
    }

    /// `t -> value + slope * (t - center)`.
    pub fn affine(center: f64, order: usize, value: f64, slope: f64) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        if order >= 1 {
            coeffs[1] = slope;
        }
        TaylorJet { center, coeffs }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `f^(k)(center)`.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeffs.get(k).copied().unwrap_or(0.0) * fact
    }

    /// Evaluates the truncated polynomial at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x - self.center)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        TaylorJet { center: self.center, coeffs: self.coeffs[..=n].to_vec() }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|c| c * s)
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        TaylorJet { center: self.center, coeffs: self.coeffs.iter().map(|&c| f(c)).collect() }
    }

    fn zip_len(&self, other: &Self) -> usize {
        debug_assert!(self.center == other.center, "jets expanded about different centers");
        self.coeffs.len().min(other.coeffs.len())
    }

    pub fn recip(&self) -> Result<Self> {
        let one = TaylorJet::constant(self.center, 1.0, self.order());
        one.checked_div(self)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        let n = self.zip_len(other);
        let b0 = other.coeffs[0];
        if b0 == 0.0 || !b0.is_finite() {
            return Err(Error::DomainError(format!("jet division by a series with leading coefficient {b0}")));
        }
        let mut c = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for i in 1..=k {
                acc -= other.coeffs[i] * c[k - i];
            }
            c[k] = acc / b0;
        }
        Ok(TaylorJet { center: self.center, coeffs: c })
    }

    pub fn sqrt(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(Error::DomainError(format!("jet square root at value {a0}")));
        }
        let n = self.coeffs.len();
        let mut s = vec![0.0; n];
        s[0] = a0.sqrt();
        for k in 1..n {
            let mut acc = self.coeffs[k];
            for i in 1..k {
                acc -= s[i] * s[k - i];
            }
            s[k] = acc / (2.0 * s[0]);
        }
        Ok(TaylorJet { center: self.center, coeffs: s })
    }

    /// Jet of `asin(u)`, built by integrating `u' / sqrt(1 - u^2)`.
    pub fn asin(&self) -> Result<Self> {
        let u0 = self.coeffs[0];
        if !(u0.abs() < 1.0) {
            return Err(Error::DomainError(format!("arcsine jet at |u| = {}", u0.abs())));
        }
        let one_minus_u2 = (self * self).neg().add_scalar(1.0);
        self.asin_with(&one_minus_u2)
    }

    /// Same as [`asin`](Self::asin), with `1 - u^2` supplied by the caller
    /// (useful when it can be formed without cancellation).
    pub fn asin_with(&self, one_minus_u2: &Self) -> Result<Self> {
        let u0 = self.coeffs[0];
        if !(u0.abs() < 1.0) {
            return Err(Error::DomainError(format!("arcsine jet at |u| = {}", u0.abs())));
        }
        let g = &self.differentiate() * &one_minus_u2.sqrt()?.recip()?;
        Ok(g.integrate(u0.asin()))
    }

    /// Termwise derivative; the order drops by one (order 0 stays order 0).
    pub fn differentiate(&self) -> Self {
        if self.coeffs.len() == 1 {
            return TaylorJet::constant(self.center, 0.0, 0);
        }
        let coeffs = (1..self.coeffs.len()).map(|k| k as f64 * self.coeffs[k]).collect();
        TaylorJet { center: self.center, coeffs }
    }

    /// Termwise antiderivative with the given value at the center; the order grows by one.
    pub fn integrate(&self, value: f64) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(value);
        coeffs.extend(self.coeffs.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
        TaylorJet { center: self.center, coeffs }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = TaylorJet::constant(self.center, 1.0, self.order());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }
}

/// Evaluates `sum c_k h^k`.
pub fn horner(coeffs: &[f64], h: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * h + c)
}

impl Add for &TaylorJet {
    type Output = TaylorJet;
    fn add(self, rhs: &TaylorJet) -> TaylorJet {
        let n = self.zip_len(rhs);
        let coeffs = (0..n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect();
        TaylorJet { center: self.center, coeffs }
    }
}

impl Sub for &TaylorJet {
    type Output = TaylorJet;
    fn sub(self, rhs: &TaylorJet) -> TaylorJet {
        let n = self.zip_len(rhs);
        let coeffs = (0..n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect();
        TaylorJet { center: self.center, coeffs }
    }
}

impl Mul for &TaylorJet {
    type Output = TaylorJet;
    fn mul(self, rhs: &TaylorJet) -> TaylorJet {
        let n = self.zip_len(rhs);
        let coeffs = (0..n).map(|k| (0..=k).map(|i| self.coeffs[i] * rhs.coeffs[k - i]).sum()).collect();
        TaylorJet { center: self.center, coeffs }
    }
}

impl Div for &TaylorJet {
    type Output = TaylorJet;
    /// Panics on a zero leading coefficient; use [`TaylorJet::checked_div`] otherwise.
    fn div(self, rhs: &TaylorJet) -> TaylorJet {
        self.checked_div(rhs).expect("jet division")
    }
}

impl Neg for &TaylorJet {
    type Output = TaylorJet;
    fn neg(self) -> TaylorJet {
        self.scale(-1.0)
    }
}

impl Neg for TaylorJet {
    type Output = TaylorJet;
    fn neg(self) -> TaylorJet {
        self.scale(-1.0)
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for TaylorJet {
            type Output = TaylorJet;
            fn $m(self, rhs: TaylorJet) -> TaylorJet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&TaylorJet> for TaylorJet {
            type Output = TaylorJet;
            fn $m(self, rhs: &TaylorJet) -> TaylorJet {
                (&self).$m(rhs)
            }
        }
        impl $tr<TaylorJet> for &TaylorJet {
            type Output = TaylorJet;
            fn $m(self, rhs: TaylorJet) -> TaylorJet {
                self.$m(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn x(c: f64, n: usize) -> TaylorJet {
        TaylorJet::variable(c, n)
    }

    #[test]
    fn variable_is_affine() {
        let j = x(0.3, 5);
        assert_eq!(j.coeffs(), &[0.3, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn exp_like_division() {
        // 1/(1-t) at 0 is the geometric series
        let one_minus = x(0.0, 8).neg().add_scalar(1.0);
        let r = one_minus.recip().unwrap();
        for c in r.coeffs() {
            assert_relative_eq!(*c, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let f = (&x(0.2, 10) * &x(0.2, 10)).add_scalar(1.0);
        let s = f.sqrt().unwrap();
        let back = &s * &s;
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn asin_matches_known_derivatives() {
        // asin at 0: t + t^3/6 + 3 t^5/40
        let a = x(0.0, 6).asin().unwrap();
        let want = [0.0, 1.0, 0.0, 1.0 / 6.0, 0.0, 3.0 / 40.0, 0.0];
        for (g, w) in a.coeffs().iter().zip(want) {
            assert!((g - w).abs() < 1e-15, "{g} vs {w}");
        }
    }

    #[test]
    fn asin_against_finite_differences() {
        let c = 0.6;
        let a = x(c, 4).asin().unwrap();
        let h = 1e-4;
        let f = |t: f64| t.asin();
        let d1 = (f(c + h) - f(c - h)) / (2.0 * h);
        let d2 = (f(c + h) - 2.0 * f(c) + f(c - h)) / (h * h);
        assert_relative_eq!(a.derivative(1), d1, max_relative = 1e-7);
        assert_relative_eq!(a.derivative(2), d2, max_relative = 1e-5);
    }

    #[test]
    fn asin_outside_domain_fails() {
        assert!(matches!(x(1.0, 3).asin(), Err(Error::DomainError(_))));
        assert!(matches!(x(-1.5, 3).asin(), Err(Error::DomainError(_))));
    }

    #[test]
    fn eval_reproduces_polynomial() {
        let p = (&x(1.0, 3) * &x(1.0, 3)).add_scalar(2.0);
        assert_relative_eq!(p.eval(1.7), 1.7 * 1.7 + 2.0, epsilon = 1e-14);
    }

    #[test]
    fn integrate_then_differentiate() {
        let j = TaylorJet::from_coeffs(0.0, vec![1.0, 2.0, 3.0]);
        let back = j.integrate(5.0).differentiate();
        assert_eq!(back.coeffs(), j.coeffs());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn jet() -> impl Strategy<Value = TaylorJet> {
            prop::collection::vec(-2.0f64..2.0, 8).prop_map(|c| TaylorJet::from_coeffs(0.1, c))
        }

        proptest! {
            #[test]
            fn product_truncation_exact(a in jet(), b in jet(), k in 0usize..8) {
                let full = &a * &b;
                let low = &a.truncate(k) * &b.truncate(k);
                for i in 0..=k {
                    prop_assert_eq!(full.coeffs()[i], low.coeffs()[i]);
                }
            }

            #[test]
            fn quotient_inverts_product(a in jet(), mut b in jet()) {
                b.coeffs[0] = 1.0 + b.coeffs[0].abs();
                let q = &(&a * &b) / &b;
                for (g, w) in q.coeffs().iter().zip(a.coeffs()) {
                    prop_assert!((g - w).abs() < 1e-9 * (1.0 + w.abs()));
                }
            }
        }
    }
}
