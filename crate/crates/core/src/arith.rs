//! Integer and rational primitives: `d_n = lcm(1..n)`, p-adic valuations, the
//! part of `n!` coprime to `D`, and the product divisibility check used when
//! normalising the twisted elementary factors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `lcm(1, 2, ..., n)`.
pub fn lcm_up_to(n: i64) -> Result<BigInt> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("lcm_up_to needs n >= 1, got {n}")));
    }
    Ok((2..=n).fold(BigInt::one(), |acc, m| acc.lcm(&BigInt::from(m))))
}

/// Deterministic trial division; inputs here are tiny.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p % 2 == 0 {
        return false;
    }
    let mut q = 3;
    while q * q <= p {
        if p % q == 0 {
            return false;
        }
        q += 2;
    }
    true
}

fn int_valuation(p: &BigInt, x: &BigInt) -> i64 {
    let mut x = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// `nu_p(x) = nu_p(numerator) - nu_p(denominator)`.
pub fn p_valuation(p: u64, x: &BigRational) -> Result<i64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if x.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let p = BigInt::from(p);
    Ok(int_valuation(&p, x.numer()) - int_valuation(&p, x.denom()))
}

pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, m| acc * m)
}

pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `n! / gcd(D^n, n!)`, the largest divisor of `n!` coprime to `D`.
pub fn coprime_factorial_part(n: u64, d: u64) -> Result<BigInt> {
    if n < 1 || d < 1 {
        return Err(Error::InvalidArgument(format!(
            "coprime_factorial_part needs n, D >= 1, got n={n}, D={d}"
        )));
    }
    let f = factorial(n);
    let g = BigInt::from(d).pow(n as u32).gcd(&f);
    Ok(f / g)
}

/// Whether `n!/gcd(D^n, n!)` divides `prod_{j=k}^{n+k-1} (D j + i)`.
///
/// The product is evaluated exactly; this is a runtime check of a statement
/// that holds for every input.
pub fn lemma2_divides(d: u64, n: u64, k: i64, i: i64) -> Result<bool> {
    let part = coprime_factorial_part(n, d)?;
    let d = d as i64;
    let prod: BigInt = (k..k + n as i64).map(|j| BigInt::from(d * j + i)).product();
    Ok((prod % part).is_zero())
}

/// Natural log of a positive big integer, accurate to f64 precision.
pub fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::NAN).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// The table `d_n^{1/n}` for `n = 1..=max_n`.
pub fn lcm_root_trend(max_n: i64) -> Result<Vec<f64>> {
    if max_n < 1 {
        return Err(Error::InvalidArgument(format!("lcm_root_trend needs N >= 1, got {max_n}")));
    }
    let mut d = BigInt::one();
    let mut out = Vec::with_capacity(max_n as usize);
    for n in 1..=max_n {
        d = d.lcm(&BigInt::from(n));
        out.push((ln_bigint(&d) / n as f64).exp());
    }
    Ok(out)
}

/// True when `x` has denominator one.
pub fn is_integral(x: &BigRational) -> bool {
    x.is_integer()
}
