//! Growth of the series `r_n` as `n` grows.
//!
//! With `f_D(x) = ((x+3)/x)^D ((x+1)/(x+2))^{s+1}` the consecutive term
//! ratio of the series behaves like `f_D(k/n)`, so the terms peak near
//! `k = x0 n` where `f_D(x0) = 1`, and `r_n^{1/n}` tends to
//! `g_D(x0) = D^{6(D-1)} (3+x0)^{3D} (1+x0)^{s+1} / (2+x0)^{2(s+1)}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{check_twist, sum_series_r};
use crate::rational_fn::FormSpec;
use crate::real::{self, abs, from_f64, from_i64, ln_f64, to_f64, with_bits, PrecisionContext, Real};

pub const DEFAULT_X0_TOLERANCE: f64 = 1e-12;

fn positive(x: &Real, what: &str) -> Result<()> {
    if *x <= real::zero(x.precision().max(2)) {
        return Err(Error::InvalidArgument(format!("{what} needs x > 0")));
    }
    Ok(())
}

fn bits_of(x: &Real) -> usize {
    x.precision().max(64)
}

/// `f_D(x) = ((x+3)/x)^D ((x+1)/(x+2))^{s+1}`.
pub fn f_d(x: &Real, d: u32, s: u32) -> Result<Real> {
    positive(x, "f_D")?;
    let bits = bits_of(x);
    let x = with_bits(x, bits);
    let a = (&x + from_i64(3, bits)) / &x;
    let b = (&x + from_i64(1, bits)) / (&x + from_i64(2, bits));
    Ok(a.powi(d.into()) * b.powi((s + 1).into()))
}

/// `(x+3)^D (x+1)^{s+1} - x^D (x+2)^{s+1}`, positive exactly where `f_D > 1`.
pub fn x0_polynomial(x: &Real, d: u32, s: u32) -> Real {
    let bits = bits_of(x);
    let x = with_bits(x, bits);
    let p = |c: i64, e: u32| (&x + from_i64(c, bits)).powi(e.into());
    p(3, d) * p(1, s + 1) - x.powi(d.into()) * p(2, s + 1)
}

fn check_quadratic(d: u32, s: u32) -> Result<()> {
    if s + 1 <= 3 * d {
        return Err(Error::InvalidArgument(format!("need s + 1 > 3D, got D={d} s={s}")));
    }
    Ok(())
}

/// `(s+1-3D) x^2 + (3s+3-9D) x - 6D`; its positive root is the minimum of `f_D`.
pub fn critical_quadratic(x: &Real, d: u32, s: u32) -> Real {
    let bits = bits_of(x);
    let (d, s) = (d as i64, s as i64);
    let x = with_bits(x, bits);
    from_i64(s + 1 - 3 * d, bits) * x.powi(2.into()) + from_i64(3 * s + 3 - 9 * d, bits) * &x
        - from_i64(6 * d, bits)
}

/// The unique positive root `x1` of the critical quadratic.
pub fn critical_x1(d: u32, s: u32, bits: usize) -> Result<Real> {
    check_quadratic(d, s)?;
    let (di, si) = (d as i64, s as i64);
    let a = from_i64(si + 1 - 3 * di, bits);
    let b = from_i64(3 * si + 3 - 9 * di, bits);
    let c = from_i64(-6 * di, bits);
    let disc = &b * &b - from_i64(4, bits) * &a * &c;
    Ok((disc.sqrt() - b) / (from_i64(2, bits) * a))
}

/// Bisection for `f_D(x0) = 1` on `(0, min(x1, 1)]`, where `f_D` decreases.
pub fn find_x0(d: u32, s: u32, tol: f64, bits: usize) -> Result<Real> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let x1 = critical_x1(d, s, bits)?;
    let one = from_i64(1, bits);
    let mut hi = if x1 < one { x1 } else { one.clone() };
    if f_d(&hi, d, s)? >= one {
        return Err(Error::BracketFailure(format!("f_D >= 1 at the right end for D={d} s={s}")));
    }
    let mut lo = hi.clone() / from_i64(2, bits);
    let mut halvings = 0;
    while f_d(&lo, d, s)? <= one {
        hi = lo.clone();
        lo = lo / from_i64(2, bits);
        halvings += 1;
        if halvings > 4 * bits {
            return Err(Error::BracketFailure("no left bracket for x0".into()));
        }
    }
    let tol = from_f64(tol, bits);
    let two = from_i64(2, bits);
    for _ in 0..4 * bits {
        let mid = (&lo + &hi) / &two;
        let fm = f_d(&mid, d, s)?;
        if abs(&(&fm - &one)) <= tol || &hi - &lo <= &mid * real::pow2(2 - bits as isize, bits) {
            return Ok(mid);
        }
        if fm > one {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence { terms: 4 * bits })
}

/// `g_D(x) = D^{6(D-1)} (3+x)^{3D} (1+x)^{s+1} / (2+x)^{2(s+1)}`.
pub fn g_val(d: u32, s: u32, x: &Real) -> Real {
    let bits = bits_of(x);
    let x = with_bits(x, bits);
    let p = |c: i64, e: u32| (&x + from_i64(c, bits)).powi(e.into());
    let pre = from_i64(d as i64, bits).powi((6 * (d - 1)).into());
    pre * p(3, 3 * d) * p(1, s + 1) / p(2, 2 * (s + 1))
}

/// `g_D(x0)` written as it appears after the Stirling step, carrying the
/// factor `f_D(x0)^{x0}` that equals one at the crossing.
pub fn g_via_stirling(d: u32, s: u32, x0: &Real) -> Result<Real> {
    let bits = bits_of(x0);
    let x = with_bits(x0, bits);
    let f = f_d(&x, d, s)?;
    let dd = from_i64(d as i64, bits);
    let pre = dd.powi((3 * d as i64 - 6).into()) * dd.powi((3 * d).into());
    let p = |c: i64, e: u32| (&x + from_i64(c, bits)).powi(e.into());
    Ok(pre * p(3, 3 * d) * p(1, s + 1) / p(2, 2 * (s + 1)) * f.powf(&x))
}

/// The asymptotic constants of one `(D, s)`.
#[derive(Debug, Clone)]
pub struct AsymProfile {
    pub d: u32,
    pub s: u32,
    pub x1: Real,
    pub x0: Real,
    pub g_at_x0: Real,
}

impl AsymProfile {
    pub fn new(d: u32, s: u32, tol: f64, bits: usize) -> Result<Self> {
        let x1 = critical_x1(d, s, bits)?;
        let x0 = find_x0(d, s, tol, bits)?;
        let g_at_x0 = g_val(d, s, &x0);
        Ok(AsymProfile { d, s, x1, x0, g_at_x0 })
    }

    /// `g_D(x0) e^s`; the analysis needs this below one.
    pub fn criterion(&self) -> f64 {
        (ln_f64(&self.g_at_x0) + self.s as f64).exp()
    }
}

/// `c_{k+1} / c_k` as an unreduced pair `(num, den)` of positive integers:
///
/// ```text
/// prod_{l=1}^{D} (Dk + 3Dn + j + l) / (Dk + j + l - 1) * ((D(n+k) + j) / (D(2n+k+1) + j))^{s+1}
/// ```
pub fn term_ratio_parts(spec: &FormSpec, j: u32, k: u64) -> (BigInt, BigInt) {
    let (d, s, n, j) = (spec.d as u64, spec.s, spec.n as u64, j as u64);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for l in 1..=d {
        num *= d * k + 3 * d * n + j + l;
        den *= d * k + j + l - 1;
    }
    num *= BigInt::from(d * (n + k) + j).pow(s + 1);
    den *= BigInt::from(d * (2 * n + k + 1) + j).pow(s + 1);
    (num, den)
}

/// Exact `c_{k+1} / c_k` for `c_k = R(n + k + j/D)`.
pub fn term_ratio(spec: &FormSpec, j: u32, k: u64) -> Result<BigRational> {
    check_twist(spec, j)?;
    let (num, den) = term_ratio_parts(spec, j, k);
    if den.is_zero() {
        return Err(Error::InvalidArgument("vanishing series term".into()));
    }
    Ok(BigRational::new(num, den))
}

/// Index of the largest term, the first `k` whose ratio drops to 1 or below.
pub fn peak_index(spec: &FormSpec, j: u32) -> Result<u64> {
    check_twist(spec, j)?;
    let mut k = 0;
    loop {
        let (num, den) = term_ratio_parts(spec, j, k);
        if num <= den {
            return Ok(k);
        }
        k += 1;
    }
}

/// One row of a trend table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendRow {
    pub n: u32,
    pub value: f64,
    pub reference: f64,
    pub gap: f64,
}

pub fn trend_csv(rows: &[TrendRow]) -> String {
    let mut out = String::from("n,value,reference,gap\n");
    for r in rows {
        out.push_str(&format!("{},{:.12e},{:.12e},{:.12e}\n", r.n, r.value, r.reference, r.gap));
    }
    out
}

/// Whether the gaps strictly decrease along the table.
pub fn gaps_decreasing(rows: &[TrendRow]) -> bool {
    rows.windows(2).all(|w| w[1].gap < w[0].gap)
}

fn check_increasing(n_list: &[u32]) -> Result<()> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("n_list must be increasing".into()));
    }
    Ok(())
}

/// `ln r_n` from direct summation.
pub fn ln_series(spec: FormSpec, j: u32, ctx: &PrecisionContext) -> Result<f64> {
    let r = sum_series_r(spec, j, ctx)?;
    Ok(ln_f64(&r.value))
}

/// Rows `(n, r_n^{1/n}, g_D(x0), relative gap)`.
pub fn nth_root_trend(d: u32, s: u32, j: u32, n_list: &[u32], ctx: &PrecisionContext) -> Result<Vec<TrendRow>> {
    check_increasing(n_list)?;
    let profile = AsymProfile::new(d, s, DEFAULT_X0_TOLERANCE, ctx.working_bits)?;
    let g = ln_f64(&profile.g_at_x0);
    n_list
        .par_iter()
        .map(|&n| {
            let ln_r = ln_series(FormSpec::new(d, s, n)?, j, ctx)?;
            let value = (ln_r / n as f64).exp();
            let reference = g.exp();
            Ok(TrendRow { n, value, reference, gap: ((ln_r / n as f64 - g).exp() - 1.0).abs() })
        })
        .collect()
}

/// Rows `(n, r_n^{(D,j)} / r_n^{(D,jt)}, 1, |ratio - 1|)`.
pub fn twist_ratio_trend(
    d: u32,
    s: u32,
    j: u32,
    jt: u32,
    n_list: &[u32],
    ctx: &PrecisionContext,
) -> Result<Vec<TrendRow>> {
    check_increasing(n_list)?;
    n_list
        .par_iter()
        .map(|&n| {
            let spec = FormSpec::new(d, s, n)?;
            let value = if j == jt {
                check_twist(&spec, j)?;
                1.0
            } else {
                let a = sum_series_r(spec, j, ctx)?;
                let b = sum_series_r(spec, jt, ctx)?;
                to_f64(&(a.value / b.value))
            };
            Ok(TrendRow { n, value, reference: 1.0, gap: (value - 1.0).abs() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational_fn::build_r;
    use proptest::prelude::*;

    const BITS: usize = 192;

    fn r(x: f64) -> Real {
        from_f64(x, BITS)
    }

    #[test]
    fn f_at_one() {
        let v = to_f64(&f_d(&r(1.0), 1, 3).unwrap());
        assert!((v - 64.0 / 81.0).abs() < 1e-15);
        let v = to_f64(&f_d(&r(1.0), 2, 25).unwrap());
        assert!((v - 16.0 * (2.0f64 / 3.0).powi(26)).abs() < 1e-15);
        assert!(f_d(&r(0.0), 1, 3).is_err());
        assert!(f_d(&r(-1.0), 1, 3).is_err());
    }

    #[test]
    fn f_approaches_one() {
        let a = to_f64(&f_d(&r(1e3), 1, 3).unwrap());
        let b = to_f64(&f_d(&r(1e6), 1, 3).unwrap());
        assert!(a < b && b < 1.0);
        assert!(1.0 - b < 1e-5);
    }

    #[test]
    fn critical_points() {
        let x1 = to_f64(&critical_x1(1, 3, BITS).unwrap());
        assert!((x1 - (33f64.sqrt() - 3.0) / 2.0).abs() < 1e-14);
        let x1 = critical_x1(2, 25, BITS).unwrap();
        assert!((to_f64(&x1) - (4560f64.sqrt() - 60.0) / 40.0).abs() < 1e-14);
        let half = &x1 / from_i64(2, BITS);
        let double = &x1 * from_i64(2, BITS);
        assert!(critical_quadratic(&half, 2, 25) < real::zero(BITS));
        assert!(critical_quadratic(&double, 2, 25) > real::zero(BITS));
        assert!(critical_x1(2, 5, BITS).is_err());
    }

    #[test]
    fn x0_small_case() {
        let x0 = find_x0(1, 3, 1e-12, BITS).unwrap();
        let v = to_f64(&x0);
        assert!((v - 0.385).abs() < 1e-3, "{v}");
        // x^4 + 6x^3 + 10x^2 + 3x - 3
        let poly = v.powi(4) + 6.0 * v.powi(3) + 10.0 * v * v + 3.0 * v - 3.0;
        assert!(poly.abs() < 1e-10);
        assert!(to_f64(&abs(&(f_d(&x0, 1, 3).unwrap() - from_i64(1, BITS)))) <= 1e-12);
        let g = to_f64(&g_val(1, 3, &x0));
        assert!((g - 0.136).abs() < 1e-3, "{g}");
    }

    #[test]
    fn x0_bounds_for_power_of_two() {
        for (d, s) in [(2, 25), (4, 41), (4, 61), (8, 97)] {
            let x0 = to_f64(&find_x0(d, s, 1e-12, BITS).unwrap());
            let base = 2f64.powf(-((s + 1) as f64) / d as f64);
            assert!(base < x0 && x0 < 4.0 * base, "D={d} s={s} x0={x0}");
        }
    }

    #[test]
    fn criterion_for_main_case() {
        let p = AsymProfile::new(2, 25, 1e-12, BITS).unwrap();
        assert!(p.criterion() < 1.0, "{}", p.criterion());
        assert!(real::zero(BITS) < p.x0 && p.x0 < p.x1);
    }

    #[test]
    fn polynomial_changes_sign_at_x0() {
        for (d, s) in [(1, 3), (2, 7), (2, 25), (3, 17)] {
            let x0 = find_x0(d, s, 1e-14, BITS).unwrap();
            let lo = &x0 * from_f64(0.999, BITS);
            let hi = &x0 * from_f64(1.001, BITS);
            assert!(x0_polynomial(&lo, d, s) > real::zero(BITS));
            assert!(x0_polynomial(&hi, d, s) < real::zero(BITS));
        }
    }

    #[test]
    fn f_shape_around_x1() {
        let (d, s) = (2, 25);
        let x1 = to_f64(&critical_x1(d, s, BITS).unwrap());
        let grid = |a: f64, b: f64| (0..20).map(move |i| a + (b - a) * i as f64 / 19.0);
        let left: Vec<f64> = grid(x1 * 0.05, x1 * 0.99).map(|x| to_f64(&f_d(&r(x), d, s).unwrap())).collect();
        let right: Vec<f64> = grid(x1 * 1.01, x1 * 20.0).map(|x| to_f64(&f_d(&r(x), d, s).unwrap())).collect();
        assert!(left.windows(2).all(|w| w[1] < w[0]));
        assert!(right.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn stirling_form_agrees() {
        for (d, s) in [(1, 3), (2, 25), (4, 41)] {
            let x0 = find_x0(d, s, 1e-30, BITS).unwrap();
            let a = g_val(d, s, &x0);
            let b = g_via_stirling(d, s, &x0).unwrap();
            assert!(to_f64(&abs(&((&a - &b) / &a))) < 1e-20, "D={d} s={s}");
        }
    }

    #[test]
    fn ratio_near_peak() {
        let spec = FormSpec::new(2, 25, 40).unwrap();
        let x0 = to_f64(&find_x0(2, 25, 1e-12, BITS).unwrap());
        assert!(to_f64(&from_rational_ratio(&spec, 0)) > 1.0 || x0 * 40.0 < 1.0);
        // far past x0 n the terms decrease
        assert!(to_f64(&from_rational_ratio(&spec, 40)) < 1.0);
        let spec = FormSpec::new(1, 3, 200).unwrap();
        let x0 = to_f64(&find_x0(1, 3, 1e-12, BITS).unwrap());
        let peak = (x0 * 200.0) as u64;
        assert!(to_f64(&from_rational_ratio(&spec, peak / 4)) > 1.0);
        assert!(to_f64(&from_rational_ratio(&spec, peak * 4)) < 1.0);
        assert!((to_f64(&from_rational_ratio(&spec, peak)) - 1.0).abs() < 0.05);
    }

    fn from_rational_ratio(spec: &FormSpec, k: u64) -> Real {
        real::from_rational(&term_ratio(spec, 1, k).unwrap(), BITS)
    }

    #[test]
    fn peak_trend() {
        let x0 = to_f64(&find_x0(2, 25, 1e-12, BITS).unwrap());
        let p20 = peak_index(&FormSpec::new(2, 25, 20).unwrap(), 1).unwrap();
        let p40 = peak_index(&FormSpec::new(2, 25, 40).unwrap(), 1).unwrap();
        let g20 = (p20 as f64 / 20.0 - x0).abs();
        let g40 = (p40 as f64 / 40.0 - x0).abs();
        assert!(g20 < 0.15);
        assert!(g40 <= g20);
        assert!(peak_index(&FormSpec::new(2, 25, 1).unwrap(), 2).is_ok());
        let x0 = to_f64(&find_x0(1, 7, 1e-12, BITS).unwrap());
        let gaps: Vec<f64> = [50u32, 100, 200]
            .iter()
            .map(|&n| (peak_index(&FormSpec::new(1, 7, n).unwrap(), 1).unwrap() as f64 / n as f64 - x0).abs())
            .collect();
        assert!(gaps[2] < 0.02, "{gaps:?}");
    }

    #[test]
    fn identical_twists_give_one() {
        let ctx = PrecisionContext::default();
        let rows = twist_ratio_trend(2, 7, 2, 2, &[3, 5], &ctx).unwrap();
        assert!(rows.iter().all(|r| r.value == 1.0 && r.gap == 0.0));
        assert!(twist_ratio_trend(2, 7, 1, 2, &[5, 3], &ctx).is_err());
    }

    #[test]
    fn small_case_nth_root_trend() {
        let ctx = PrecisionContext::default();
        let rows = nth_root_trend(1, 3, 1, &[5, 10, 20, 40], &ctx).unwrap();
        assert!(gaps_decreasing(&rows), "{rows:?}");
        let single = nth_root_trend(1, 3, 1, &[7], &ctx).unwrap();
        assert_eq!(single.len(), 1);
        let csv = trend_csv(&rows);
        assert!(csv.starts_with("n,value,reference,gap\n5,"));
        assert_eq!(csv.lines().count(), 5);
    }

    fn spec_strategy() -> impl Strategy<Value = (FormSpec, u32, u64)> {
        (1u32..=3, 0u32..4, 1u32..=4, 0u64..12).prop_flat_map(|(d, extra, n, k)| {
            let spec = FormSpec::new(d, 3 * d + extra, n).unwrap();
            (Just(spec), 1..=d, Just(k))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn ratio_matches_exact_quotient((spec, j, k) in spec_strategy()) {
            let rf = build_r(spec);
            let t = |m: u64| BigRational::new(
                BigInt::from(spec.d as u64 * (spec.n as u64 + m) + j as u64),
                BigInt::from(spec.d),
            );
            let exact = rf.eval_exact(&t(k + 1)).unwrap() / rf.eval_exact(&t(k)).unwrap();
            prop_assert_eq!(term_ratio(&spec, j, k).unwrap(), exact);
        }
    }
}
