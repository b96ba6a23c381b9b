//! Linear forms in Hurwitz zeta values.
//!
//! For a twist `j in 1..=D` the series `r = sum_{m>=1} R(m + j/D)` equals
//! `sum_i a_i zeta(i, j/D) + a_0` with `a_i = sum_k a[i][k]` and a rational
//! constant `a_0`. This module assembles the form from a decomposition and
//! evaluates `r` independently by summing the series itself.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::is_integral;
use crate::asymptotics::term_ratio_parts;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::rational_fn::{build_r, decompose, FormSpec, PartialFraction};
use crate::real::{
    self, abs, digits_for, from_int, from_rational, pow2, to_decimal_string, Approx, PrecisionContext, Real,
};
use crate::zeta::{hurwitz_zeta_at, lerch_phi};

/// Number of series terms summed directly, per unit of `n`, before the
/// expansion at infinity takes over.
const DIRECT_TERMS_PER_N: u32 = 32;
const MAX_TAIL_ORDER: usize = 4096;

pub(crate) fn check_twist(spec: &FormSpec, j: u32) -> Result<()> {
    if j < 1 || j > spec.d {
        return Err(Error::InvalidArgument(format!("twist j must lie in 1..={}, got {j}", spec.d)));
    }
    Ok(())
}

pub(crate) fn twist(spec: &FormSpec, j: u32) -> BigRational {
    BigRational::new(BigInt::from(j), BigInt::from(spec.d))
}

/// One twist's form `sum_{i=2}^{s} a_i zeta(i, j/D) + a_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HurwitzForm {
    pub spec: FormSpec,
    pub j: u32,
    /// `a_i` for `i = 2..=s`, stored at index `i - 2`.
    coeffs: Vec<BigRational>,
    pub a0: BigRational,
}

impl HurwitzForm {
    pub fn new(spec: FormSpec, j: u32, coeffs: Vec<BigRational>, a0: BigRational) -> Result<Self> {
        check_twist(&spec, j)?;
        if coeffs.len() != spec.s as usize - 1 {
            return Err(Error::InvalidArgument(format!("expected {} coefficients a_2..a_s", spec.s - 1)));
        }
        Ok(HurwitzForm { spec, j, coeffs, a0 })
    }

    /// `a_i`, `2 <= i <= s`.
    pub fn a(&self, i: u32) -> &BigRational {
        &self.coeffs[i as usize - 2]
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.coeffs.iter().enumerate().map(|(idx, c)| (idx as u32 + 2, c))
    }

    pub fn alpha(&self) -> BigRational {
        twist(&self.spec, self.j)
    }
}

/// Assembles the form for twist `j`; aborts if `sum_k a[1][k] != 0`.
pub fn coeffs_from_pfd(pf: &PartialFraction, j: u32) -> Result<HurwitzForm> {
    let spec = pf.spec();
    check_twist(&spec, j)?;
    let (s, n) = (spec.s, spec.n);
    let a1: BigRational = (0..=n).map(|k| pf.a(1, k)).sum();
    if !a1.is_zero() {
        return Err(Error::InvariantViolation(format!("sum_k a[1][k] = {a1}, expected 0")));
    }
    let coeffs = (2..=s).map(|i| (0..=n).map(|k| pf.a(i, k)).sum()).collect();

    // inv_pows[l][i-1] = (l + j/D)^{-i}
    let alpha = twist(&spec, j);
    let inv_pows: Vec<Vec<BigRational>> = (0..=n)
        .map(|l| {
            let inv = (&alpha + BigRational::from_integer(l.into())).recip();
            std::iter::successors(Some(inv.clone()), |p| Some(p * &inv)).take(s as usize).collect()
        })
        .collect();
    let mut a0 = BigRational::zero();
    for k in 0..=n {
        for i in 1..=s {
            let c = pf.a(i, k);
            if c.is_zero() {
                continue;
            }
            let inner: BigRational = (0..=k).map(|l| &inv_pows[l as usize][i as usize - 1]).sum();
            a0 -= c * inner;
        }
    }
    HurwitzForm::new(spec, j, coeffs, a0)
}

/// `d_n^{s-i} a_i` and `d_n^s a_0` are all integers.
pub fn check_form_integrality(form: &HurwitzForm) -> bool {
    let s = form.spec.s;
    let dn = BigRational::from_integer(form.spec.lcm());
    form.coefficients().all(|(i, c)| is_integral(&(dn.pow((s - i) as i32) * c)))
        && is_integral(&(dn.pow(s as i32) * &form.a0))
}

fn log2_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    crate::arith::ln_bigint(&x.numer().abs()) / std::f64::consts::LN_2
        - crate::arith::ln_bigint(x.denom()) / std::f64::consts::LN_2
}

/// `sum_i a_i zeta(i, j/D) + a_0`, with enough working precision to absorb
/// the cancellation between large coefficients.
pub fn eval_form(form: &HurwitzForm, ctx: &PrecisionContext) -> Result<Approx> {
    eval_combination(form.coefficients(), &form.a0, &form.alpha(), ctx)
}

/// `sum_i c_i zeta(i, alpha) + c_0` for rational coefficients.
pub fn eval_combination<'a, I>(terms: I, c0: &BigRational, alpha: &BigRational, ctx: &PrecisionContext) -> Result<Approx>
where
    I: IntoIterator<Item = (u32, &'a BigRational)>,
{
    let terms: Vec<(u32, &BigRational)> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    let max_i = terms.iter().map(|(i, _)| *i).max().unwrap_or(2);
    let alpha_log2 = -alpha.to_f64().unwrap_or(1.0).log2();
    let coeff_log2 = terms
        .iter()
        .map(|(_, c)| log2_rational(c))
        .chain(std::iter::once(log2_rational(c0)))
        .fold(0f64, f64::max);
    let zeta_log2 = max_i as f64 * alpha_log2 + 1.0;
    let slack = (terms.len() as f64 + 1.0).log2().ceil() as isize + 8;
    let bits = ctx
        .working_bits
        .max(ctx.target_bits() + (coeff_log2 + zeta_log2).ceil() as usize + slack as usize + 16);
    let prec = bits + 16;
    let mut value = from_rational(c0, prec);
    let mut error = real::zero(prec);
    for (i, c) in terms {
        let z = hurwitz_zeta_at(i, alpha, bits)?;
        let c = from_rational(c, prec);
        value += &c * &z.value;
        error += abs(&c) * &z.error;
    }
    error += pow2(coeff_log2.ceil() as isize + zeta_log2.ceil() as isize + slack - prec as isize, prec);
    Ok(Approx { value, error })
}

/// Exact `c_0 = R(n + j/D)`, the first nonzero term of the series.
pub fn first_term(spec: FormSpec, j: u32) -> Result<BigRational> {
    check_twist(&spec, j)?;
    let t = BigRational::from_integer(spec.n.into()) + twist(&spec, j);
    build_r(spec).eval_exact(&t)
}

/// Coefficients `e_0..e_order` with `R(t) = C t^{-p} sum_q e_q t^{-q}`,
/// convergent for `|t| > n`.
///
/// With `P_m = sum_l r_l^m - (s+1) sum_k (-k)^m` over the numerator roots
/// `r_l` and poles `-k`, the series is `C exp(-sum_m P_m v^m / m)` in
/// `v = 1/t`, so `q e_q = -sum_{m=1}^{q} P_m e_{q-m}`.
pub fn infinity_expansion(spec: FormSpec, order: usize) -> Jet {
    let r = build_r(spec);
    let mut power_sums = vec![BigRational::zero(); order + 1];
    let mut add_powers = |base: &BigRational, weight: &BigRational| {
        let mut pw = base.clone();
        for m in 1..=order {
            power_sums[m] += weight * &pw;
            pw *= base;
        }
    };
    let one = BigRational::one();
    for root in r.numerator_roots() {
        add_powers(root, &one);
    }
    let weight = -BigRational::from_integer((spec.s + 1).into());
    for k in 1..=spec.n {
        add_powers(&BigRational::from_integer(-BigInt::from(k)), &weight);
    }
    let mut e = vec![one];
    for q in 1..=order {
        let acc: BigRational = (1..=q).map(|m| &power_sums[m] * &e[q - m]).sum();
        e.push(-acc / BigRational::from_integer(q.into()));
    }
    let mut jet = Jet::from_coeffs(e, order);
    jet.scale(r.scalar());
    jet
}

/// The values `c_k = R(n + k + j/D)` for `k = 0..count`.
pub fn series_terms(spec: FormSpec, j: u32, count: usize, bits: usize) -> Result<Vec<Real>> {
    let mut c = from_rational(&first_term(spec, j)?, bits);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        out.push(c.clone());
        let (num, den) = term_ratio_parts(&spec, j, k as u64);
        c = c * from_int(&num, bits) / from_int(&den, bits);
    }
    Ok(out)
}

/// `r = sum_{m>=1} R(m + j/D)` by direct summation.
///
/// Terms with `m + j/D <= n` are numerator zeros, so the sum starts at
/// `c_0 = R(n + j/D)`. The first `32 n` terms are accumulated through exact
/// consecutive ratios; the rest is `C sum_q e_q zeta(p + q, T)` from the
/// expansion at infinity, with `T = n + 32n + j/D`, truncated once a term is
/// below the tolerance and past the order where terms can still grow.
/// The tolerance is the smaller of the absolute target and `2^-bits`
/// relative to the partial sum.
pub fn sum_series_r(spec: FormSpec, j: u32, ctx: &PrecisionContext) -> Result<Approx> {
    check_twist(&spec, j)?;
    let bits = ctx.working_bits;
    let prec = bits + 32;
    let direct = (DIRECT_TERMS_PER_N * spec.n) as usize;
    let terms = series_terms(spec, j, direct, prec)?;
    let mut sum = real::zero(prec);
    for c in &terms {
        sum += c;
    }
    let rounding = abs(&sum) * real::from_i64(direct as i64 + 8, prec) * pow2(1 - prec as isize, prec);

    let target = real::from_f64(ctx.target_abs_error, prec);
    let relative = abs(&sum) * pow2(-(bits as isize), prec);
    let tol = if target < relative { target } else { relative };

    let p = spec.decay_degree();
    if p < 2 {
        return Err(spec.invalid("series does not converge"));
    }
    let shift = BigRational::from_integer((spec.n + direct as u32).into()) + twist(&spec, j);
    let ratio_log2 = (shift.to_f64().unwrap() / spec.n as f64).log2();
    let mut order = spec.s as usize + 2 + (ctx.target_bits().max(bits) as f64 / ratio_log2).ceil() as usize;
    loop {
        let e = infinity_expansion(spec, order);
        let mut tail = real::zero(prec);
        let mut tail_err = real::zero(prec);
        for q in 0..=order {
            let c = e.coeff(q);
            if c.is_zero() {
                continue;
            }
            let z = hurwitz_zeta_at((p + q as i64) as u32, &shift, bits)?;
            let c = from_rational(c, prec);
            let term = &c * &z.value;
            tail_err += abs(&c) * &z.error;
            let size = abs(&term);
            tail += term;
            if q > spec.s as usize + 1 && size * real::from_i64(8, prec) <= tol {
                let trunc = abs(&tail) * pow2(-(bits as isize), prec) + tol.clone();
                let value = sum + tail;
                return Ok(Approx { value, error: rounding + tail_err + trunc });
            }
        }
        if order >= MAX_TAIL_ORDER {
            return Err(Error::NonConvergence { terms: direct + order });
        }
        order *= 2;
    }
}

/// Both evaluations of one twist and their difference.
#[derive(Debug, Clone)]
pub struct DualCheck {
    pub series: Approx,
    pub form: Approx,
    pub residual: Real,
    pub bound: Real,
}

impl DualCheck {
    pub fn passes(&self) -> bool {
        self.residual <= self.bound
    }
}

/// `|sum_series_r - eval_form(coeffs_from_pfd(...))|` against the combined error bound.
pub fn dual_check(spec: FormSpec, j: u32, ctx: &PrecisionContext) -> Result<DualCheck> {
    let pf = decompose(spec)?;
    dual_check_with(&pf, j, ctx)
}

pub fn dual_check_with(pf: &PartialFraction, j: u32, ctx: &PrecisionContext) -> Result<DualCheck> {
    let form = coeffs_from_pfd(pf, j)?;
    let series = sum_series_r(pf.spec(), j, ctx)?;
    let value = eval_form(&form, ctx)?;
    let residual = abs(&(&series.value - &value.value));
    let bound = &series.error + &value.error;
    Ok(DualCheck { series, form: value, residual, bound })
}

/// `sum_{m>=1} R(m + j/D) z^m` for `0 < z < 1`, summed directly.
pub fn lerch_series_value(spec: FormSpec, j: u32, z: &Real, ctx: &PrecisionContext) -> Result<Approx> {
    check_twist(&spec, j)?;
    let prec = ctx.working_bits + 32;
    let z = real::with_bits(z, prec);
    let target = real::from_f64(ctx.target_abs_error, prec);
    // skipped numerator zeros: R(m + j/D) = 0 for m + j/D <= n
    let first_m = spec.n;
    let mut zm = Real::ONE.with_precision(prec).value();
    for _ in 0..first_m {
        zm *= &z;
    }
    let mut c = from_rational(&first_term(spec, j)?, prec);
    let mut sum = real::zero(prec);
    for k in 0..1_000_000u64 {
        let term = &c * &zm;
        sum += &term;
        let (num, den) = term_ratio_parts(&spec, j, k);
        let next_ratio = from_int(&num, prec) / from_int(&den, prec);
        // once the term ratio (times z) stays below 1/2 the tail is below the current term
        let step = &next_ratio * &z;
        if step < real::from_f64(0.5, prec) && abs(&term) <= target {
            return Ok(Approx { value: sum, error: target });
        }
        c *= next_ratio;
        zm *= &z;
    }
    Err(Error::NonConvergence { terms: 1_000_000 })
}

/// The `z`-deformed form
/// `sum_i sum_k a[i][k] z^{-k} (Phi(z, j/D, i) - sum_{l<=k} z^l/(l + j/D)^i)`.
pub fn lerch_form_value(pf: &PartialFraction, j: u32, z: &Real, ctx: &PrecisionContext) -> Result<Approx> {
    let spec = pf.spec();
    check_twist(&spec, j)?;
    let max_bits = pf.max_coefficient_bits() as usize;
    let bits = ctx.working_bits.max(ctx.target_bits() + max_bits + 64);
    let prec = bits + 32;
    let inner = ctx.with_bits(bits).with_target(ctx.target_abs_error * 2f64.powi(-(max_bits as i32) - 16));
    let z = real::with_bits(z, prec);
    let alpha = twist(&spec, j);
    let alpha_r = from_rational(&alpha, prec);
    let one = Real::ONE.with_precision(prec).value();
    let mut value = real::zero(prec);
    let mut error = real::zero(prec);
    for i in 1..=spec.s {
        let phi = lerch_phi(&z, &alpha, i, &inner)?;
        for k in 0..=spec.n {
            let c = pf.a(i, k);
            if c.is_zero() {
                continue;
            }
            let mut partial = real::zero(prec);
            let mut zl = one.clone();
            for l in 0..=k {
                partial += &zl / (&alpha_r + real::from_i64(l as i64, prec)).powi((i as i64).into());
                zl *= &z;
            }
            let z_inv_k = &one / z.powi((k as i64).into());
            let c = from_rational(c, prec);
            value += &c * &z_inv_k * (&phi.value - partial);
            error += abs(&c) * &z_inv_k * &phi.error;
        }
    }
    Ok(Approx { value, error })
}

#[derive(Debug, Clone, Serialize)]
pub struct RationalEntry {
    pub i: u32,
    pub num: String,
    pub den: String,
}

/// JSON view of a form together with its evaluated value.
#[derive(Debug, Clone, Serialize)]
pub struct HurwitzFormReport {
    #[serde(rename = "D")]
    pub d: u32,
    pub s: u32,
    pub n: u32,
    pub j: u32,
    pub a: Vec<RationalEntry>,
    pub a0: [String; 2],
    pub value: String,
    pub error_bound: String,
}

impl HurwitzFormReport {
    pub fn new(form: &HurwitzForm, value: &Approx, bits: usize) -> Self {
        HurwitzFormReport {
            d: form.spec.d,
            s: form.spec.s,
            n: form.spec.n,
            j: form.j,
            a: form
                .coefficients()
                .map(|(i, c)| RationalEntry { i, num: c.numer().to_string(), den: c.denom().to_string() })
                .collect(),
            a0: [form.a0.numer().to_string(), form.a0.denom().to_string()],
            value: to_decimal_string(&value.value, digits_for(bits)),
            error_bound: to_decimal_string(&value.error, 6),
        }
    }
}
