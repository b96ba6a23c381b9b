//! Hurwitz zeta values `zeta(s, a) = sum_{k>=0} (k + a)^{-s}` at integer
//! `s >= 2` by direct summation plus an Euler-Maclaurin tail, and the Lerch
//! transcendent `Phi(z, a, s)` for real `0 < z < 1`.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::real::{self, abs, from_i64, from_rational, pow2, Approx, PrecisionContext, Real};

static BERNOULLI: Mutex<Vec<BigRational>> = Mutex::new(Vec::new());

/// Tangent numbers `T_1..T_count` (1, 2, 16, 272, ...) by the integer
/// recurrence of Brent and Harvey.
fn tangent_numbers(count: usize) -> Vec<BigInt> {
    let mut t = vec![BigInt::zero(); count + 1];
    if count == 0 {
        return t;
    }
    t[1] = BigInt::one();
    for k in 2..=count {
        t[k] = &t[k - 1] * (k - 1);
    }
    for k in 2..=count {
        for j in k..=count {
            t[j] = &t[j - 1] * (j - k) + &t[j] * (j - k + 2);
        }
    }
    t
}

/// Exact Bernoulli number `B_m` (with `B_1 = -1/2`), computed once and cached.
///
/// Even indices come from `B_{2k} = (-1)^{k-1} 2k T_k / (4^k (4^k - 1))`.
pub fn bernoulli(m: usize) -> BigRational {
    match m {
        0 => return BigRational::one(),
        1 => return BigRational::new(BigInt::from(-1), BigInt::from(2)),
        _ if m % 2 == 1 => return BigRational::zero(),
        _ => {}
    }
    let k = m / 2;
    let mut cache = BERNOULLI.lock().unwrap_or_else(|e| e.into_inner());
    if cache.len() < k {
        let count = k.max(2 * cache.len()).max(32);
        let t = tangent_numbers(count);
        *cache = (1..=count)
            .map(|k| {
                let four_k = BigInt::one() << (2 * k);
                let num = &t[k] * (2 * k);
                let b = BigRational::new(num, &four_k * (&four_k - 1u32));
                if k % 2 == 0 {
                    -b
                } else {
                    b
                }
            })
            .collect();
    }
    cache[k - 1].clone()
}

/// `zeta(sigma, a)` for rational `a > 0` with relative error about `2^-bits`.
///
/// The returned error bound covers the first omitted Euler-Maclaurin term
/// and accumulated rounding.
pub fn hurwitz_zeta_at(sigma: u32, a: &BigRational, bits: usize) -> Result<Approx> {
    if sigma < 2 {
        return Err(Error::Divergent(sigma));
    }
    if !a.is_positive() {
        return Err(Error::InvalidArgument(format!("Hurwitz shift must be positive, got {a}")));
    }
    let prec = bits + 32;
    let one = Real::ONE.with_precision(prec).value();
    let sig = sigma as i64;
    let a_real = from_rational(a, prec);
    let term = |k: usize| -> Real {
        let x = &a_real + from_i64(k as i64, prec);
        &one / x.powi(sig.into())
    };
    let max_em_terms = bits / 2 + 16;

    let mut direct = real::zero(prec);
    let mut n_direct = 0usize;
    let mut n_target = 4usize;
    loop {
        while n_direct < n_target {
            direct += term(n_direct);
            n_direct += 1;
        }
        let x = &a_real + from_i64(n_direct as i64, prec);
        let x_pow = &one / x.powi(sig.into());
        let mut sum = &direct + &x_pow * &x / from_i64(sig - 1, prec) + &x_pow / from_i64(2, prec);
        let inv_x2 = &one / (&x * &x);
        // fac_p = sigma (sigma+1) ... (sigma+2p-2) / (2p)! * x^{-sigma-2p+1}
        let mut fac = &x_pow / &x * from_i64(sig, prec) / from_i64(2, prec);
        let mut prev: Option<Real> = None;
        let mut converged = None;
        for p in 1..=max_em_terms {
            let b = from_rational(&bernoulli(2 * p), prec);
            let t = &b * &fac;
            let size = abs(&t);
            if let Some(prev) = &prev {
                if size > *prev {
                    break;
                }
            }
            sum += &t;
            if size <= abs(&sum) * pow2(-(bits as isize) - 4, prec) {
                converged = Some(size);
                break;
            }
            let p2 = 2 * p as i64;
            fac = fac * from_i64((sig + p2 - 1) * (sig + p2), prec) / from_i64((p2 + 1) * (p2 + 2), prec) * &inv_x2;
            prev = Some(size);
        }
        if let Some(trunc) = converged {
            let rounding = abs(&sum) * from_i64((n_direct + max_em_terms) as i64 + 8, prec) * pow2(-(prec as isize) + 1, prec);
            let value = sum.with_precision(bits + 8).value();
            return Ok(Approx { value, error: trunc + rounding });
        }
        if n_target > 1 << 20 {
            return Err(Error::NonConvergence { terms: n_target });
        }
        n_target = 2 * n_target + sigma as usize / 4;
    }
}

/// `zeta(i, alpha)` for integer `i >= 2` and rational `0 < alpha <= 1`,
/// accurate to `ctx.target_abs_error`.
pub fn hurwitz_zeta(i: u32, alpha: &BigRational, ctx: &PrecisionContext) -> Result<Approx> {
    if i < 2 {
        return Err(Error::Divergent(i));
    }
    if !alpha.is_positive() || *alpha > BigRational::one() {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    // zeta(i, alpha) <= alpha^-i + zeta(2)
    let log2_bound = (i as f64) * (1.0 / f64_of(alpha)).log2() + 1.0;
    let bits = ctx.working_bits.max(ctx.target_bits() + log2_bound.ceil() as usize + 8);
    hurwitz_zeta_at(i, alpha, bits)
}

/// `zeta(i) = zeta(i, 1)`.
pub fn riemann_zeta(i: u32, ctx: &PrecisionContext) -> Result<Approx> {
    hurwitz_zeta(i, &BigRational::one(), ctx)
}

fn f64_of(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// `Phi(z, alpha, i) = sum_{k>=0} z^k / (k + alpha)^i` for `0 < z < 1`.
///
/// Stops once `z^N / ((N + alpha)^i (1 - z))`, a bound on the remaining
/// tail, drops below the target error.
pub fn lerch_phi(z: &Real, alpha: &BigRational, i: u32, ctx: &PrecisionContext) -> Result<Approx> {
    let prec = ctx.working_bits + 32;
    let one = Real::ONE.with_precision(prec).value();
    let z = real::with_bits(z, prec);
    if z <= real::zero(prec) || z >= one {
        return Err(Error::InvalidArgument("Lerch series needs 0 < z < 1".into()));
    }
    if i < 1 {
        return Err(Error::InvalidArgument("Lerch series needs i >= 1".into()));
    }
    if !alpha.is_positive() || *alpha > BigRational::one() {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    const MAX_TERMS: usize = 2_000_000;
    let target = real::from_f64(ctx.target_abs_error, prec);
    let a = from_rational(alpha, prec);
    let one_minus_z = &one - &z;
    let mut zk = one.clone();
    let mut sum = real::zero(prec);
    for k in 0..MAX_TERMS {
        let base = &a + from_i64(k as i64, prec);
        let denom = base.powi((i as i64).into());
        let tail = &zk / (&denom * &one_minus_z);
        if tail <= target {
            let rounding = abs(&sum) * from_i64(k as i64 + 8, prec) * pow2(-(prec as isize) + 1, prec);
            return Ok(Approx { value: sum, error: tail + rounding });
        }
        sum += &zk / denom;
        zk *= &z;
    }
    Err(Error::NonConvergence { terms: MAX_TERMS })
}
