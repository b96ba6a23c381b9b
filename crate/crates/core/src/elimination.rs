//! Aggregating twisted forms over divisors and eliminating zeta values.
//!
//! For `d | D` the sum `r^(D,d) = sum_{j=1}^{D/d-1} r^{(D,dj)}` only involves
//! `zeta(i)` through `((D/d)^i - 1) zeta(i)`, with the same `a_i` for every
//! divisor. With `D = 2^{m+1}` and divisors `D/2^b`, `b = 1..m+1`, an integer
//! combination `sum_b w_b r^(D, D/2^b)` can cancel `m` chosen odd zeta values.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::is_integral;
use crate::asymptotics::AsymProfile;
use crate::error::{Error, Result};
use crate::forms::{coeffs_from_pfd, eval_combination, sum_series_r};
use crate::rational_fn::{decompose, FormSpec, PartialFraction};
use crate::real::{
    self, abs, digits_for, from_int, ln_f64, to_decimal_string, Approx, PrecisionContext,
};
use crate::zeta::{hurwitz_zeta, riemann_zeta};

pub type Matrix = Vec<Vec<BigInt>>;

fn check_divisor(big_d: u32, d: u32) -> Result<()> {
    if d == 0 || big_d % d != 0 {
        return Err(Error::InvalidArgument(format!("{d} does not divide {big_d}")));
    }
    Ok(())
}

/// `sum_{j=1}^{D/d-1} zeta(i, jd/D) - ((D/d)^i - 1) zeta(i)`, with the
/// accumulated error bound in `error`.
pub fn zeta_identity_check(big_d: u32, d: u32, i: u32, ctx: &PrecisionContext) -> Result<Approx> {
    check_divisor(big_d, d)?;
    let q = big_d / d;
    let prec = ctx.working_bits + 32;
    let mut lhs = real::zero(prec);
    let mut error = real::zero(prec);
    for j in 1..q {
        let z = hurwitz_zeta(i, &BigRational::new(j.into(), q.into()), ctx)?;
        lhs += z.value;
        error += z.error;
    }
    let z = riemann_zeta(i, ctx)?;
    let factor = from_int(&(BigInt::from(q).pow(i) - 1), prec);
    let rhs = &factor * &z.value;
    error += factor * z.error;
    Ok(Approx { value: abs(&(lhs - rhs)), error })
}

/// `sum_{j=1}^{D/d-1} r^{(D,dj)}` from the series.
pub fn hat_r(spec: FormSpec, d: u32, ctx: &PrecisionContext) -> Result<Approx> {
    check_divisor(spec.d, d)?;
    let prec = ctx.working_bits + 32;
    let parts: Vec<Approx> =
        (1..spec.d / d).into_par_iter().map(|j| sum_series_r(spec, d * j, ctx)).collect::<Result<_>>()?;
    let mut value = real::zero(prec);
    let mut error = real::zero(prec);
    for p in parts {
        value += p.value;
        error += p.error;
    }
    Ok(Approx { value, error })
}

/// A linear form `sum_i c_i zeta(i) + c_0` with rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaForm {
    /// `(i, c_i)` for `i = 2..=s`.
    pub coeffs: Vec<(u32, BigRational)>,
    pub c0: BigRational,
}

impl ZetaForm {
    pub fn coeff(&self, i: u32) -> BigRational {
        self.coeffs.iter().find(|(k, _)| *k == i).map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, ctx: &PrecisionContext) -> Result<Approx> {
        eval_combination(self.coeffs.iter().map(|(i, c)| (*i, c)), &self.c0, &BigRational::one(), ctx)
    }
}

/// The `zeta(i)` form of `hat_r(spec, d)`: coefficients `a_i ((D/d)^i - 1)`
/// and constant `sum_j a_0^{(D,dj)}`. Requires `nD` even and aborts if an
/// even-index coefficient survives.
pub fn hat_form(pf: &PartialFraction, d: u32) -> Result<ZetaForm> {
    let spec = pf.spec();
    check_divisor(spec.d, d)?;
    if !spec.nd_even() {
        return Err(spec.invalid("divisor forms need nD even"));
    }
    let q = BigInt::from(spec.d / d);
    let base = coeffs_from_pfd(pf, spec.d)?;
    let mut coeffs = Vec::with_capacity(spec.s as usize - 1);
    for (i, a) in base.coefficients() {
        if i % 2 == 0 && !a.is_zero() {
            return Err(Error::InvariantViolation(format!("a_{i} = {a} is nonzero for even i")));
        }
        let factor = BigRational::from_integer(q.pow(i) - 1);
        coeffs.push((i, a * factor));
    }
    let mut c0 = BigRational::zero();
    for j in 1..spec.d / d {
        c0 += coeffs_from_pfd(pf, d * j)?.a0;
    }
    Ok(ZetaForm { coeffs, c0 })
}

/// `M[a][b] = 2^{i_a b} - 1` for `a, b = 1..=m+1`.
pub fn build_m(complement: &[u32]) -> Matrix {
    let size = complement.len();
    complement
        .iter()
        .map(|&i| (1..=size as u32).map(|b| (BigInt::one() << (i * b) as usize) - 1).collect())
        .collect()
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &Matrix) -> BigInt {
    let size = m.len();
    if size == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..size - 1 {
        if a[k][k].is_zero() {
            match (k + 1..size).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v.div_floor(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[size - 1][size - 1]
}

fn minor(m: &Matrix, row: usize, col: usize) -> Matrix {
    m.iter()
        .enumerate()
        .filter(|(r, _)| *r != row)
        .map(|(_, line)| line.iter().enumerate().filter(|(c, _)| *c != col).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// `adj(M)` with `adj(M) M = M adj(M) = det(M) I`.
pub fn adjugate(m: &Matrix) -> Matrix {
    let size = m.len();
    if size == 1 {
        return vec![vec![BigInt::one()]];
    }
    let mut adj = vec![vec![BigInt::zero(); size]; size];
    for r in 0..size {
        for c in 0..size {
            let cof = determinant(&minor(m, r, c));
            adj[c][r] = if (r + c) % 2 == 0 { cof } else { -cof };
        }
    }
    adj
}

pub fn mat_vec(m: &Matrix, w: &[BigInt]) -> Vec<BigInt> {
    m.iter().map(|row| row.iter().zip(w).map(|(a, b)| a * b).sum()).collect()
}

/// The integer vector `w` with `M w = det(M) e_l` (`l` is 1-based): the
/// `l`-th column of the adjugate.
///
/// Rows of `M` belong to zeta indices and columns to divisors, so this is
/// the orientation under which `sum_b w_b r^(D, D/2^b)` loses every
/// `zeta(i_a)` with `a != l`.
pub fn solve_w(m: &Matrix, l: usize) -> Result<Vec<BigInt>> {
    let size = m.len();
    if l < 1 || l > size {
        return Err(Error::InvalidArgument(format!("l must lie in 1..={size}")));
    }
    let det = determinant(m);
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let adj = adjugate(m);
    let w: Vec<BigInt> = adj.iter().map(|row| row[l - 1].clone()).collect();
    let image = mat_vec(m, &w);
    for (a, v) in image.iter().enumerate() {
        let expected = if a == l - 1 { det.clone() } else { BigInt::zero() };
        if *v != expected {
            return Err(Error::InvariantViolation(format!("M w differs from det e_l at row {}", a + 1)));
        }
    }
    Ok(w)
}

/// `(-1)^{l-1} sum_b w_b (2^b - 1)`, the limit of the combined form over
/// `r^(D,D)`; an error unless positive.
pub fn positivity_constant(w: &[BigInt], l: usize) -> Result<BigInt> {
    let sum: BigInt = w.iter().enumerate().map(|(b, wb)| wb * ((BigInt::one() << (b + 1)) - 1)).sum();
    let value = if (l - 1) % 2 == 0 { sum } else { -sum };
    if !value.is_positive() {
        return Err(Error::InvariantViolation(format!("positivity constant {value} is not positive")));
    }
    Ok(value)
}

/// A choice of which odd zeta values to keep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EliminationPlan {
    pub m: u32,
    #[serde(rename = "D")]
    pub d: u32,
    pub s: u32,
    #[serde(rename = "N")]
    pub big_n: u32,
    #[serde(rename = "J")]
    pub keep: Vec<u32>,
    pub j: u32,
    pub complement: Vec<u32>,
    pub l: usize,
    #[serde(rename = "M", serialize_with = "ser_matrix")]
    pub matrix: Matrix,
    #[serde(serialize_with = "ser_int")]
    pub det: BigInt,
    #[serde(serialize_with = "ser_vec")]
    pub w: Vec<BigInt>,
    #[serde(serialize_with = "ser_int")]
    pub positivity: BigInt,
}

fn ser_int<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn ser_vec<S: serde::Serializer>(x: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|v| v.to_string()))
}

fn ser_matrix<S: serde::Serializer>(x: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>()))
}

/// The odd indices `3, 5, ..., s`.
pub fn odd_indices(s: u32) -> Vec<u32> {
    (3..=s).step_by(2).collect()
}

impl EliminationPlan {
    /// `D = 2^{m+1}`, `s = 2N + 1`, `J` a set of `N - m` odd indices in
    /// `3..=s` and `j` an element of `J`.
    pub fn new(m: u32, s: u32, keep: &[u32], j: u32) -> Result<Self> {
        if m > 8 {
            return Err(Error::InvalidArgument("m above 8 is not supported".into()));
        }
        let d = 1u32 << (m + 1);
        if s % 2 == 0 || s < 3 {
            return Err(Error::InvalidArgument(format!("s must be odd and at least 3, got {s}")));
        }
        FormSpec::new(d, s, 2)?;
        let big_n = (s - 1) / 2;
        let all: BTreeSet<u32> = odd_indices(s).into_iter().collect();
        let keep_set: BTreeSet<u32> = keep.iter().copied().collect();
        if keep_set.len() != keep.len() {
            return Err(Error::InvalidArgument("J has repeated entries".into()));
        }
        if !keep_set.is_subset(&all) {
            return Err(Error::InvalidArgument(format!("J must consist of odd indices in 3..={s}")));
        }
        if keep_set.len() as u32 + m != big_n {
            return Err(Error::InvalidArgument(format!("J must have N - m = {} elements", big_n as i64 - m as i64)));
        }
        if !keep_set.contains(&j) {
            return Err(Error::InvalidArgument(format!("j = {j} is not in J")));
        }
        let mut complement: Vec<u32> = all.difference(&keep_set).copied().collect();
        complement.push(j);
        complement.sort_unstable();
        let l = complement.iter().position(|&i| i == j).unwrap() + 1;
        let matrix = build_m(&complement);
        let det = determinant(&matrix);
        let w = solve_w(&matrix, l)?;
        let positivity = positivity_constant(&w, l)?;
        Ok(EliminationPlan {
            m,
            d,
            s,
            big_n,
            keep: keep_set.into_iter().collect(),
            j,
            complement,
            l,
            matrix,
            det,
            w,
            positivity,
        })
    }

    /// The plan keeping `{3, 5, ..., s}` minus `dropped`.
    pub fn dropping(m: u32, s: u32, dropped: &[u32], j: u32) -> Result<Self> {
        let keep: Vec<u32> = odd_indices(s).into_iter().filter(|i| !dropped.contains(i)).collect();
        Self::new(m, s, &keep, j)
    }

    /// Divisor paired with `w_b`: `D / 2^b`.
    pub fn divisor(&self, b: usize) -> u32 {
        self.d >> b
    }

    pub fn eliminated(&self) -> impl Iterator<Item = u32> + '_ {
        self.complement.iter().copied().filter(move |&i| i != self.j)
    }

    fn sign(&self) -> i32 {
        if (self.l - 1) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// `A_0 + sum_{i in J} A_i zeta(i)` with integer coefficients.
#[derive(Debug, Clone)]
pub struct IntegerZetaForm {
    pub n: u32,
    pub a0: BigInt,
    pub coeffs: Vec<(u32, BigInt)>,
    pub value: Approx,
}

fn to_integer(x: &BigRational, what: &str) -> Result<BigInt> {
    if !is_integral(x) {
        return Err(Error::InvariantViolation(format!("{what} = {x} is not an integer")));
    }
    Ok(x.to_integer())
}

/// The exact rational form `(-1)^{l-1} d_n^s sum_b w_b hat_form(D/2^b)`
/// over all `i = 2..=s`.
pub fn combined_rational_form(plan: &EliminationPlan, pf: &PartialFraction) -> Result<ZetaForm> {
    let spec = pf.spec();
    let dn_s = BigRational::from_integer(spec.lcm().pow(spec.s));
    let scale = &dn_s * BigRational::from_integer(plan.sign().into());
    let hats: Vec<ZetaForm> =
        (1..=plan.w.len()).into_par_iter().map(|b| hat_form(pf, plan.divisor(b))).collect::<Result<_>>()?;
    let mut coeffs: Vec<(u32, BigRational)> = (2..=spec.s).map(|i| (i, BigRational::zero())).collect();
    let mut c0 = BigRational::zero();
    for (wb, hat) in plan.w.iter().zip(&hats) {
        let wb = BigRational::from_integer(wb.clone());
        for ((_, acc), (_, c)) in coeffs.iter_mut().zip(&hat.coeffs) {
            *acc += &wb * c;
        }
        c0 += &wb * &hat.c0;
    }
    for (_, c) in coeffs.iter_mut() {
        *c *= &scale;
    }
    Ok(ZetaForm { coeffs, c0: c0 * scale })
}

/// The integer form for one `n`. Fails unless every eliminated coefficient
/// and every coefficient outside `J` is exactly zero, and the kept
/// coefficient of `zeta(j)` is `(-1)^{l-1} det(M) d_n^s a_j`.
pub fn combined_form(plan: &EliminationPlan, n: u32, ctx: &PrecisionContext) -> Result<IntegerZetaForm> {
    let spec = FormSpec::new(plan.d, plan.s, n)?;
    let pf = decompose(spec)?;
    combined_form_with(plan, &pf, ctx)
}

pub fn combined_form_with(plan: &EliminationPlan, pf: &PartialFraction, ctx: &PrecisionContext) -> Result<IntegerZetaForm> {
    let spec = pf.spec();
    let form = combined_rational_form(plan, pf)?;
    for (i, c) in &form.coeffs {
        if !plan.keep.contains(i) && !c.is_zero() {
            return Err(Error::InvariantViolation(format!("coefficient of zeta({i}) is {c}, expected 0")));
        }
    }
    let a_j: BigRational = (0..=spec.n).map(|k| pf.a(plan.j, k)).sum();
    let expected = a_j
        * BigRational::from_integer(spec.lcm().pow(spec.s) * &plan.det * BigInt::from(plan.sign()));
    if form.coeff(plan.j) != expected {
        return Err(Error::InvariantViolation(format!("coefficient of zeta({}) is off", plan.j)));
    }
    let coeffs = plan
        .keep
        .iter()
        .map(|&i| Ok((i, to_integer(&form.coeff(i), &format!("A_{i}"))?)))
        .collect::<Result<Vec<_>>>()?;
    let a0 = to_integer(&form.c0, "A_0")?;
    let value = form.eval(ctx)?;
    Ok(IntegerZetaForm { n: spec.n, a0, coeffs, value })
}

/// `(-1)^{l-1} d_n^s sum_b w_b hat_r(D/2^b)` from the series.
pub fn combined_series_value(plan: &EliminationPlan, n: u32, ctx: &PrecisionContext) -> Result<Approx> {
    let spec = FormSpec::new(plan.d, plan.s, n)?;
    let prec = ctx.working_bits + 32;
    let scale = from_int(&(spec.lcm().pow(spec.s) * BigInt::from(plan.sign())), prec);
    let mut value = real::zero(prec);
    let mut error = real::zero(prec);
    for (b, wb) in plan.w.iter().enumerate() {
        let h = hat_r(spec, plan.divisor(b + 1), ctx)?;
        let wb = from_int(wb, prec);
        value += &wb * &h.value;
        error += abs(&wb) * &h.error;
    }
    Ok(Approx { value: &scale * value, error: abs(&scale) * error })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: u32,
    /// `d_n^s |r^_n|`.
    pub scaled: f64,
    /// `ln(d_n^s |r^_n|)`.
    pub ln_scaled: f64,
    /// Quotient by the previous row.
    pub ratio: Option<f64>,
}

/// Columns `n, scaled, ln_scaled, ratio`; the first ratio is empty.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("n,scaled,ln_scaled,ratio\n");
    for r in rows {
        let ratio = r.ratio.map(|x| format!("{x:.12e}")).unwrap_or_default();
        out.push_str(&format!("{},{:.12e},{:.12e},{}\n", r.n, r.scaled, r.ln_scaled, ratio));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// `g_D(x0) e^s`.
    pub criterion: f64,
    pub criterion_met: bool,
    pub rows: Vec<ConvergenceRow>,
    /// Whether every ratio is below one; only judged when the criterion holds
    /// and there are at least two rows.
    pub monotone: Option<bool>,
    pub last_ratio_below_one: Option<bool>,
}

/// `d_n^s |r^_n|` over `n_list`, preceded by the criterion `g e^s < 1`.
pub fn convergence_report(plan: &EliminationPlan, n_list: &[u32], ctx: &PrecisionContext) -> Result<ConvergenceReport> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("n_list must be increasing".into()));
    }
    let profile = AsymProfile::new(plan.d, plan.s, crate::asymptotics::DEFAULT_X0_TOLERANCE, ctx.working_bits)?;
    let criterion = profile.criterion();
    let criterion_met = criterion < 1.0;
    let values: Vec<Approx> =
        n_list.par_iter().map(|&n| combined_series_value(plan, n, ctx)).collect::<Result<_>>()?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(n_list.len());
    for (&n, v) in n_list.iter().zip(&values) {
        let ln_scaled = ln_f64(&abs(&v.value));
        let ratio = rows.last().map(|p| (ln_scaled - p.ln_scaled).exp());
        rows.push(ConvergenceRow { n, scaled: ln_scaled.exp(), ln_scaled, ratio });
    }
    let judged = criterion_met && rows.len() >= 2;
    let monotone = judged.then(|| rows.iter().skip(1).all(|r| r.ratio.unwrap() < 1.0));
    let last_ratio_below_one = judged.then(|| rows.last().unwrap().ratio.unwrap() < 1.0);
    Ok(ConvergenceReport { criterion, criterion_met, rows, monotone, last_ratio_below_one })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegerEntry {
    pub i: u32,
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FormEntry {
    pub n: u32,
    #[serde(rename = "A0")]
    pub a0: String,
    #[serde(rename = "A")]
    pub coeffs: Vec<IntegerEntry>,
    pub value: String,
    pub error_bound: String,
    pub series_value: String,
    pub dual_agrees: bool,
    pub nonzero: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub plan: EliminationPlan,
    pub forms: Vec<FormEntry>,
    pub criterion: f64,
    pub criterion_met: bool,
    pub convergence: Vec<ConvergenceRow>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Builds the plan and, for each `n`, the integer form checked against the
/// series, its nonvanishing and the decay table.
pub fn certify(m: u32, s: u32, keep: &[u32], j: u32, n_list: &[u32], ctx: &PrecisionContext) -> Result<CertificateReport> {
    let plan = EliminationPlan::new(m, s, keep, j)?;
    let digits = digits_for(ctx.working_bits).min(40);
    let mut checks = vec![Check { name: "positivity".into(), passed: plan.positivity.is_positive() }];
    let mut forms = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let series = combined_series_value(&plan, n, ctx)?;
        // Resolve the form well below its own size, which may be far under the target.
        let size = real::to_f64(&abs(&series.value)) * 2f64.powi(-64);
        let form_ctx = if size > 0.0 && size < ctx.target_abs_error { ctx.with_target(size) } else { *ctx };
        let form = combined_form(&plan, n, &form_ctx)?;
        let residual = abs(&(&form.value.value - &series.value));
        let bound = &form.value.error + &series.error;
        let dual_agrees = residual <= bound || residual <= real::from_f64(ctx.target_abs_error, ctx.working_bits);
        let nonzero = abs(&form.value.value) > form.value.error;
        checks.push(Check { name: format!("eliminated-zero n={n}"), passed: true });
        checks.push(Check { name: format!("dual n={n}"), passed: dual_agrees });
        checks.push(Check { name: format!("nonzero n={n}"), passed: nonzero });
        forms.push(FormEntry {
            n,
            a0: form.a0.to_string(),
            coeffs: form.coeffs.iter().map(|(i, c)| IntegerEntry { i: *i, value: c.to_string() }).collect(),
            value: to_decimal_string(&form.value.value, digits),
            error_bound: to_decimal_string(&form.value.error, 6),
            series_value: to_decimal_string(&series.value, digits),
            dual_agrees,
            nonzero,
        });
    }
    let report = convergence_report(&plan, n_list, ctx)?;
    if let Some(last) = report.last_ratio_below_one {
        checks.push(Check { name: "last ratio below one".into(), passed: last });
    }
    if let Some(monotone) = report.monotone {
        checks.push(Check { name: "monotone decay".into(), passed: monotone });
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(CertificateReport {
        plan,
        forms,
        criterion: report.criterion,
        criterion_met: report.criterion_met,
        convergence: report.rows,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::to_f64;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn example() -> Matrix {
        build_m(&[3, 5])
    }

    #[test]
    fn matrix_and_determinant() {
        assert_eq!(example(), vec![ints(&[7, 63]), ints(&[31, 1023])]);
        assert_eq!(determinant(&example()), BigInt::from(5208));
        assert_eq!(build_m(&[7]), vec![ints(&[127])]);
        let m = vec![ints(&[0, 2, 1]), ints(&[3, 0, 4]), ints(&[5, 6, 0])];
        // 0*(0-24) - 2*(0-20) + 1*(18-0)
        assert_eq!(determinant(&m), BigInt::from(58));
        assert_eq!(determinant(&vec![ints(&[1, 2]), ints(&[2, 4])]), BigInt::zero());
    }

    #[test]
    fn elimination_vectors() {
        let m = example();
        assert_eq!(solve_w(&m, 1).unwrap(), ints(&[1023, -31]));
        assert_eq!(solve_w(&m, 2).unwrap(), ints(&[-63, 7]));
        assert_eq!(mat_vec(&m, &solve_w(&m, 1).unwrap()), ints(&[5208, 0]));
        assert_eq!(positivity_constant(&ints(&[1023, -31]), 1).unwrap(), BigInt::from(930));
        assert_eq!(positivity_constant(&ints(&[-63, 7]), 2).unwrap(), BigInt::from(42));
        assert_eq!(solve_w(&build_m(&[9]), 1).unwrap(), ints(&[1]));
        assert_eq!(positivity_constant(&ints(&[1]), 1).unwrap(), BigInt::one());
        assert!(positivity_constant(&ints(&[-1]), 1).is_err());
        assert!(matches!(solve_w(&vec![ints(&[1, 2]), ints(&[2, 4])], 1), Err(Error::SingularMatrix)));
    }

    #[test]
    fn adjugate_rows_do_not_eliminate() {
        // a row of adj(M) satisfies w M = det e_l but leaves M w non-diagonal
        let m = example();
        let row = ints(&[1023, -63]);
        let w_m: Vec<BigInt> = (0..2).map(|c| (0..2).map(|r| &row[r] * &m[r][c]).sum()).collect();
        assert_eq!(w_m, ints(&[5208, 0]));
        assert_ne!(mat_vec(&m, &row)[1], BigInt::zero());
    }

    #[test]
    fn hurwitz_identity() {
        let ctx = PrecisionContext::default();
        let tol = real::from_f64(1e-30, 256);
        for (big_d, d, i) in [(2, 1, 3), (1, 1, 4), (6, 2, 5), (8, 1, 15), (6, 1, 2)] {
            let r = zeta_identity_check(big_d, d, i, &ctx).unwrap();
            assert!(r.value <= tol && r.value <= &r.error + &tol, "D={big_d} d={d} i={i}");
        }
        assert!(zeta_identity_check(6, 4, 3, &ctx).is_err());
    }

    #[test]
    fn hat_forms() {
        let spec = FormSpec::new(2, 7, 2).unwrap();
        let pf = decompose(spec).unwrap();
        let h = hat_form(&pf, 1).unwrap();
        for i in 2..=7u32 {
            let a: BigRational = (0..=2).map(|k| pf.a(i, k)).sum();
            assert_eq!(h.coeff(i), a * BigRational::from_integer((BigInt::one() << i as usize) - 1));
        }
        let top = hat_form(&pf, 2).unwrap();
        assert!(top.coeffs.iter().all(|(_, c)| c.is_zero()) && top.c0.is_zero());
        assert!(hat_form(&decompose(FormSpec::new(3, 9, 1).unwrap()).unwrap(), 1).is_err());
        assert!(hat_form(&pf, 3).is_err());
    }

    #[test]
    fn coefficients_independent_of_divisor() {
        let pf = decompose(FormSpec::new(4, 13, 1).unwrap()).unwrap();
        let base: Vec<BigRational> = (2..=13).map(|i| (0..=1).map(|k| pf.a(i, k)).sum()).collect();
        for d in [1, 2] {
            let h = hat_form(&pf, d).unwrap();
            let q = BigInt::from(4 / d);
            for (idx, (i, c)) in h.coeffs.iter().enumerate() {
                let f = BigRational::from_integer(q.pow(*i) - 1);
                assert_eq!(*c, &base[idx] * f);
            }
        }
    }

    #[test]
    fn hat_r_dual_paths() {
        let ctx = PrecisionContext::default();
        let tol = real::from_f64(1e-30, 256);
        for (big_d, s, n, d) in [(2, 25, 2, 1), (4, 13, 2, 1), (4, 13, 1, 2)] {
            let spec = FormSpec::new(big_d, s, n).unwrap();
            let series = hat_r(spec, d, &ctx).unwrap();
            let form = hat_form(&decompose(spec).unwrap(), d).unwrap().eval(&ctx).unwrap();
            assert!(abs(&(&series.value - &form.value)) <= tol, "D={big_d} s={s} n={n} d={d}");
        }
        let spec = FormSpec::new(4, 13, 1).unwrap();
        assert!(to_f64(&hat_r(spec, 4, &ctx).unwrap().value) == 0.0);
    }

    #[test]
    fn plan_validation() {
        assert!(EliminationPlan::new(0, 25, &odd_indices(25), 3).is_ok());
        assert!(EliminationPlan::new(0, 25, &odd_indices(23), 3).is_err());
        assert!(EliminationPlan::new(0, 24, &odd_indices(23), 3).is_err());
        assert!(EliminationPlan::dropping(1, 13, &[5], 5).is_err());
        assert!(EliminationPlan::new(1, 13, &[3, 5, 7, 9, 9], 3).is_err());
        let plan = EliminationPlan::dropping(1, 13, &[5], 3).unwrap();
        assert_eq!(plan.complement, vec![3, 5]);
        assert_eq!(plan.l, 1);
        assert_eq!(plan.w, ints(&[1023, -31]));
        assert_eq!(plan.positivity, BigInt::from(930));
        assert_eq!(plan.divisor(1), 2);
        assert_eq!(plan.divisor(2), 1);
    }

    #[test]
    fn combined_form_drops_eliminated_zeta() {
        let ctx = PrecisionContext::default();
        let plan = EliminationPlan::dropping(1, 41, &[5], 3).unwrap();
        let form = combined_form(&plan, 2, &ctx).unwrap();
        assert!(form.coeffs.iter().all(|(i, _)| *i != 5));
        let rational = combined_rational_form(&plan, &decompose(FormSpec::new(4, 41, 2).unwrap()).unwrap()).unwrap();
        assert!(rational.coeff(5).is_zero());
        assert!(!rational.coeff(3).is_zero());
    }

    #[test]
    fn combined_value_matches_series() {
        let ctx = PrecisionContext::default();
        for (m, s, dropped, j, n) in [(1u32, 13u32, vec![7u32], 9u32, 2u32), (0, 7, vec![], 5, 3), (1, 15, vec![3], 5, 2)] {
            let plan = EliminationPlan::dropping(m, s, &dropped, j).unwrap();
            let form = combined_form(&plan, n, &ctx).unwrap();
            let series = combined_series_value(&plan, n, &ctx).unwrap();
            let diff = abs(&(&form.value.value - &series.value));
            assert!(diff <= &form.value.error + &series.error + real::from_f64(1e-30, 256), "m={m} s={s}");
        }
        // the plan with j = 3 in J, while 3 is also the dropped index, is rejected
        assert!(EliminationPlan::dropping(1, 15, &[3], 3).is_err());
    }

    #[test]
    fn convergence_table_shapes() {
        let ctx = PrecisionContext::default();
        let plan = EliminationPlan::new(0, 25, &odd_indices(25), 3).unwrap();
        let one = convergence_report(&plan, &[4], &ctx).unwrap();
        assert!(one.criterion_met && one.criterion < 1.0);
        assert_eq!(one.rows.len(), 1);
        assert!(one.monotone.is_none());
        let two = convergence_report(&plan, &[4, 6], &ctx).unwrap();
        assert_eq!(two.monotone, Some(two.rows[1].ratio.unwrap() < 1.0));
        let weak = EliminationPlan::new(0, 7, &odd_indices(7), 3).unwrap();
        let r = convergence_report(&weak, &[2, 3], &ctx).unwrap();
        assert!(!r.criterion_met && r.monotone.is_none());
    }

    fn plan_strategy() -> impl Strategy<Value = (u32, u32, Vec<u32>, usize)> {
        (0u32..=3).prop_flat_map(|m| {
            let d = 1u32 << (m + 1);
            let s_min = 3 * d + 1 + (3 * d) % 2;
            (Just(m), (0u32..4).prop_map(move |e| s_min + 2 * e)).prop_flat_map(|(m, s)| {
                let pool = odd_indices(s);
                (Just(m), Just(s), proptest::sample::subsequence(pool, m as usize + 1), 0..=m as usize)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn plans_eliminate_and_stay_positive((m, s, complement, pick) in plan_strategy()) {
            let j = complement[pick];
            let keep: Vec<u32> = odd_indices(s).into_iter().filter(|i| *i == j || !complement.contains(i)).collect();
            let plan = EliminationPlan::new(m, s, &keep, j).unwrap();
            let image = mat_vec(&plan.matrix, &plan.w);
            for (a, v) in image.iter().enumerate() {
                let expected = if a + 1 == plan.l { plan.det.clone() } else { BigInt::zero() };
                prop_assert_eq!(v, &expected);
            }
            prop_assert!(plan.positivity.is_positive());
        }
    }
}
