//! Truncated power series with exact rational coefficients.
//!
//! A [`Jet`] of order `m` stores `c_0 + c_1 u + ... + c_m u^m` and discards
//! everything of higher degree. Products and reciprocals of jets give Taylor
//! coefficients of rational functions without symbolic differentiation.

use std::ops::{Add, Mul};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jet {
    coeffs: Vec<BigRational>,
}

impl Jet {
    pub fn constant(c: BigRational, order: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); order + 1];
        coeffs[0] = c;
        Jet { coeffs }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(BigRational::one(), order)
    }

    /// The jet of `c0 + c1 u`.
    pub fn linear(c0: BigRational, c1: BigRational, order: usize) -> Self {
        let mut j = Self::constant(c0, order);
        if order >= 1 {
            j.coeffs[1] = c1;
        }
        j
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>, order: usize) -> Self {
        coeffs.resize(order + 1, BigRational::zero());
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigRational> {
        self.coeffs
    }

    /// In-place multiplication by `c0 + c1 u`, O(order).
    pub fn mul_linear(&mut self, c0: &BigRational, c1: &BigRational) {
        for i in (0..self.coeffs.len()).rev() {
            let mut v = &self.coeffs[i] * c0;
            if i > 0 && !c1.is_zero() {
                v += &self.coeffs[i - 1] * c1;
            }
            self.coeffs[i] = v;
        }
    }

    pub fn scale(&mut self, c: &BigRational) {
        for x in &mut self.coeffs {
            *x *= c;
        }
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn recip(&self) -> Result<Jet> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(Error::InvariantViolation(
                "jet reciprocal of a series with zero constant term".into(),
            ));
        }
        let inv0 = c0.recip();
        let mut out = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for m in 1..self.coeffs.len() {
            let mut acc = BigRational::zero();
            for k in 1..=m {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &out[m - k];
                }
            }
            out.push(-acc * &inv0);
        }
        Ok(Jet { coeffs: out })
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, u: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * u + c)
    }
}

impl Add for &Jet {
    type Output = Jet;

    fn add(self, rhs: &Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order).map(|i| &self.coeffs[i] + &rhs.coeffs[i]).collect();
        Jet { coeffs }
    }
}

impl Mul for &Jet {
    type Output = Jet;

    fn mul(self, rhs: &Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let mut coeffs = vec![BigRational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(order + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        Jet { coeffs }
    }
}
