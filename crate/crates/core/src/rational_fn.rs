//! The twisted rational functions
//!
//! ```text
//! R(t) = D^{6(D-1)n} (n!)^{s-(3D-1)} * prod_{j=0}^{3Dn} (t - n + j/D) / prod_{k=0}^{n} (t + k)^{s+1}
//! ```
//!
//! and their exact partial-fraction decompositions
//! `R(t) = sum_{i=1}^{s} sum_{k=0}^{n} a[i][k] / (t + k)^i`.
//!
//! Each pole `-k` is simple in exactly one numerator factor, so after that
//! factor is cancelled the pole has order `s`. The coefficients at `-k` are
//! the Taylor coefficients of `R(t) (t + k)^s` in `u = t + k`, obtained by
//! multiplying linear jets and taking one jet reciprocal.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{binomial, factorial, is_integral, lcm_up_to};
use crate::error::{Error, Result};
use crate::jet::Jet;

fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// The triple `(D, s, n)` selecting one member of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormSpec {
    #[serde(rename = "D")]
    pub d: u32,
    pub s: u32,
    pub n: u32,
}

impl FormSpec {
    /// Requires `D, n >= 1` and `s >= 3D`.
    pub fn new(d: u32, s: u32, n: u32) -> Result<Self> {
        let spec = FormSpec { d, s, n };
        if d < 1 {
            return Err(spec.invalid("D must be positive"));
        }
        if n < 1 {
            return Err(spec.invalid("n must be positive"));
        }
        if s < 3 * d {
            return Err(spec.invalid("s must be at least 3D"));
        }
        Ok(spec)
    }

    pub(crate) fn invalid(&self, reason: &str) -> Error {
        Error::InvalidSpec { d: self.d, s: self.s, n: self.n, reason: reason.into() }
    }

    /// `s >= 3D + 1`, needed by the series and the asymptotic analysis.
    pub fn require_convergent(&self) -> Result<()> {
        if self.s < 3 * self.d + 1 {
            return Err(self.invalid("series routines need s >= 3D + 1"));
        }
        Ok(())
    }

    pub fn nd_even(&self) -> bool {
        (self.n as u64 * self.d as u64) % 2 == 0
    }

    /// Decay exponent at infinity: `R(t) = O(t^{-p})` with `p = (s+1)(n+1) - 3Dn - 1`.
    pub fn decay_degree(&self) -> i64 {
        let (d, s, n) = (self.d as i64, self.s as i64, self.n as i64);
        (s + 1) * (n + 1) - 3 * d * n - 1
    }

    pub fn root_count(&self) -> usize {
        3 * self.d as usize * self.n as usize + 1
    }

    /// `d_n`.
    pub fn lcm(&self) -> BigInt {
        lcm_up_to(self.n as i64).expect("n >= 1")
    }
}

/// `R` kept as a scalar, a list of numerator roots and the pole set
/// `{0, -1, ..., -n}` with raw multiplicity `s + 1`.
#[derive(Debug, Clone)]
pub struct StructuredRational {
    spec: FormSpec,
    scalar: BigRational,
    roots: Vec<BigRational>,
}

/// Builds `R` for `spec`.
pub fn build_r(spec: FormSpec) -> StructuredRational {
    let (d, s, n) = (spec.d as i64, spec.s, spec.n as u64);
    let d_pow = BigInt::from(d).pow((6 * (d - 1) * n as i64) as u32);
    let fact = factorial(n).pow(s + 1 - 3 * spec.d);
    let roots = (0..=3 * d * n as i64)
        .map(|j| BigRational::new(BigInt::from(n as i64 * d - j), BigInt::from(d)))
        .collect();
    StructuredRational { spec, scalar: BigRational::from_integer(d_pow * fact), roots }
}

/// Multiplies factors while keeping numerator and denominator apart, reducing once.
fn product_of(factors: impl Iterator<Item = BigRational>) -> BigRational {
    let (num, den) = factors.fold((BigInt::one(), BigInt::one()), |(n, d), f| {
        let (fn_, fd) = f.into();
        (n * fn_, d * fd)
    });
    BigRational::new(num, den)
}

impl StructuredRational {
    pub fn spec(&self) -> FormSpec {
        self.spec
    }

    pub fn scalar(&self) -> &BigRational {
        &self.scalar
    }

    /// The `3Dn + 1` values `n - j/D`.
    pub fn numerator_roots(&self) -> &[BigRational] {
        &self.roots
    }

    /// Poles `-k` for `k = 0..=n`.
    pub fn poles(&self) -> impl Iterator<Item = i64> {
        0..=self.spec.n as i64
    }

    pub fn raw_pole_multiplicity(&self) -> u32 {
        self.spec.s + 1
    }

    /// Index `j` of the numerator factor that vanishes at the pole `-k`.
    fn cancelling_root(&self, k: i64) -> usize {
        (self.spec.d as i64 * (self.spec.n as i64 + k)) as usize
    }

    /// Exact value by direct product evaluation.
    pub fn eval_exact(&self, t: &BigRational) -> Result<BigRational> {
        if t.is_integer() {
            let k = -t.to_integer();
            if !k.is_negative() && k <= BigInt::from(self.spec.n) {
                return Err(Error::Pole(t.to_string()));
            }
        }
        let num = product_of(self.roots.iter().map(|r| t - r));
        if num.is_zero() {
            return Ok(num);
        }
        let den = product_of((0..=self.spec.n as i64).map(|k| t + int(k))).pow(self.spec.s as i32 + 1);
        Ok(&self.scalar * num / den)
    }

    /// Taylor coefficients `c_0..c_{s-1}` of `R(t) (t + k)^s` at `u = t + k`.
    ///
    /// Numerator factors become `(j - D(n+k)) + D u` after clearing the
    /// `1/D`, so both products stay in integers; the single division is a
    /// power-series quotient with denominators that are powers of its
    /// constant term.
    fn pole_jet(&self, k: i64) -> Result<Jet> {
        let order = self.spec.s as usize - 1;
        let (d, n) = (self.spec.d as i64, self.spec.n as i64);
        let skip = self.cancelling_root(k) as i64;
        let mut num = vec![BigInt::one()];
        for j in (0..self.roots.len() as i64).filter(|&j| j != skip) {
            mul_linear_int(&mut num, &BigInt::from(j - d * (n + k)), &BigInt::from(d), order);
        }
        let mut den = vec![BigInt::one()];
        for kk in self.poles().filter(|&kk| kk != k) {
            let c = BigInt::from(kk - k);
            for _ in 0..=self.spec.s {
                mul_linear_int(&mut den, &c, &BigInt::one(), order);
            }
        }
        num.resize(order + 1, BigInt::zero());
        den.resize(order + 1, BigInt::zero());
        let p0 = den[0].clone();
        if p0.is_zero() {
            return Err(Error::InvariantViolation(format!("vanishing cofactor at pole {}", -k)));
        }
        // q_m = Q_m / p0^{m+1} with Q_m = N_m p0^m - sum_{i=1}^{m} P_i Q_{m-i} p0^{i-1}
        let mut p0_pows = vec![BigInt::one()];
        for m in 1..=order {
            let next = &p0_pows[m - 1] * &p0;
            p0_pows.push(next);
        }
        let mut q: Vec<BigInt> = Vec::with_capacity(order + 1);
        for m in 0..=order {
            let mut acc = &num[m] * &p0_pows[m];
            for i in 1..=m {
                acc -= &den[i] * &q[m - i] * &p0_pows[i - 1];
            }
            q.push(acc);
        }
        let root_scale = BigInt::from(d).pow(self.roots.len() as u32 - 1);
        let coeffs = q
            .into_iter()
            .enumerate()
            .map(|(m, qm)| {
                &self.scalar * BigRational::new(qm, &root_scale * &p0_pows[m] * &p0)
            })
            .collect();
        Ok(Jet::from_coeffs(coeffs, order))
    }
}

/// `poly *= (c0 + c1 u)`, truncated after `u^order`.
fn mul_linear_int(poly: &mut Vec<BigInt>, c0: &BigInt, c1: &BigInt, order: usize) {
    if poly.len() <= order {
        poly.push(BigInt::zero());
    }
    for m in (0..poly.len()).rev() {
        let mut v = &poly[m] * c0;
        if m > 0 {
            v += &poly[m - 1] * c1;
        }
        poly[m] = v;
    }
}

/// Exact coefficient table `a[i][k]`, `i = 1..=s`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFraction {
    spec: FormSpec,
    coeffs: Vec<Vec<BigRational>>,
}

/// Decomposes `R` pole by pole.
pub fn partial_fraction(r: &StructuredRational) -> Result<PartialFraction> {
    let spec = r.spec;
    let s = spec.s as usize;
    let columns: Vec<Jet> = (0..=spec.n as i64)
        .into_par_iter()
        .map(|k| r.pole_jet(k))
        .collect::<Result<_>>()?;
    let coeffs = (1..=s)
        .map(|i| columns.iter().map(|jet| jet.coeff(s - i).clone()).collect())
        .collect();
    Ok(PartialFraction { spec, coeffs })
}

/// `partial_fraction(&build_r(spec))`.
pub fn decompose(spec: FormSpec) -> Result<PartialFraction> {
    partial_fraction(&build_r(spec))
}

impl PartialFraction {
    pub fn spec(&self) -> FormSpec {
        self.spec
    }

    /// `a[i][k]` for `1 <= i <= s`, `0 <= k <= n`.
    pub fn a(&self, i: u32, k: u32) -> &BigRational {
        &self.coeffs[i as usize - 1][k as usize]
    }

    /// Copy with a single coefficient replaced.
    pub fn with_coefficient(&self, i: u32, k: u32, value: BigRational) -> Self {
        let mut out = self.clone();
        out.coeffs[i as usize - 1][k as usize] = value;
        out
    }

    /// `sum a[i][k] / (t + k)^i`.
    pub fn reconstruct(&self, t: &BigRational) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for k in 0..=self.spec.n {
            let base = t + int(k as i64);
            if base.is_zero() {
                return Err(Error::Pole(t.to_string()));
            }
            let inv = base.recip();
            let mut pow = inv.clone();
            for row in &self.coeffs {
                acc += &row[k as usize] * &pow;
                pow *= &inv;
            }
        }
        Ok(acc)
    }

    /// Largest bit length among numerators and denominators.
    pub fn max_coefficient_bits(&self) -> u64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|c| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }

    pub fn to_table(&self) -> CoefficientTable {
        CoefficientTable {
            d: self.spec.d,
            s: self.spec.s,
            n: self.spec.n,
            coeffs: self
                .coeffs
                .iter()
                .flatten()
                .map(|c| [c.numer().to_string(), c.denom().to_string()])
                .collect(),
        }
    }

    pub fn from_table(table: &CoefficientTable) -> Result<Self> {
        let spec = FormSpec::new(table.d, table.s, table.n)?;
        let width = spec.n as usize + 1;
        if table.coeffs.len() != spec.s as usize * width {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, found {}",
                spec.s as usize * width,
                table.coeffs.len()
            )));
        }
        let parse = |x: &str| {
            x.parse::<BigInt>()
                .map_err(|e| Error::InvalidArgument(format!("bad integer {x:?}: {e}")))
        };
        let flat = table
            .coeffs
            .iter()
            .map(|[num, den]| {
                let den = parse(den)?;
                if den.is_zero() {
                    return Err(Error::InvalidArgument("zero denominator".into()));
                }
                Ok(BigRational::new(parse(num)?, den))
            })
            .collect::<Result<Vec<_>>>()?;
        let coeffs = flat.chunks(width).map(|c| c.to_vec()).collect();
        Ok(PartialFraction { spec, coeffs })
    }
}

/// JSON layout of a coefficient table; `coeffs` is row-major in `(i, k)`
/// with each entry `[numerator, denominator]` in base 10.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientTable {
    #[serde(rename = "D")]
    pub d: u32,
    pub s: u32,
    pub n: u32,
    pub coeffs: Vec<[String; 2]>,
}

fn mirrored_with(pf: &PartialFraction, odd_shift: bool) -> bool {
    let FormSpec { s, n, .. } = pf.spec;
    (1..=s).all(|i| {
        let flip = ((i - 1) % 2 == 1) != odd_shift;
        (0..=n).all(|k| {
            let mirrored = pf.a(i, n - k);
            if flip {
                *pf.a(i, k) == -mirrored
            } else {
                pf.a(i, k) == mirrored
            }
        })
    })
}

/// `a[i][k] == (-1)^{i-1} (-1)^{nD} a[i][n-k]` for every entry.
///
/// This is the reflection law as usually quoted. It holds whenever
/// `(n+1)(s+1)` is even and fails when `s` and `n` are both even; see
/// [`check_reflection`] for the law that holds unconditionally.
pub fn check_symmetry(pf: &PartialFraction) -> bool {
    mirrored_with(pf, !pf.spec.nd_even())
}

/// Sign `e` with `R(-n-t) = e R(t)`, namely `(-1)^{3Dn+1+(s+1)(n+1)}`.
pub fn reflection_sign(spec: &FormSpec) -> i32 {
    let (d, s, n) = (spec.d as u64, spec.s as u64, spec.n as u64);
    if (3 * d * n + 1 + (s + 1) * (n + 1)) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `a[i][k] == (-1)^{i-1} (-1)^{nD} (-1)^{(n+1)(s+1)} a[i][n-k]`, the
/// coefficient form of `R(-n-t) = reflection_sign * R(t)`.
pub fn check_reflection(pf: &PartialFraction) -> bool {
    let FormSpec { d, s, n } = pf.spec;
    let odd = (n as u64 * d as u64 + (n as u64 + 1) * (s as u64 + 1)) % 2 == 1;
    mirrored_with(pf, odd)
}

/// `d_n^{s-i} a[i][k]` is an integer for every entry.
pub fn check_coeff_integrality(pf: &PartialFraction) -> bool {
    let dn = BigRational::from_integer(pf.spec.lcm());
    let s = pf.spec.s;
    (1..=s).all(|i| {
        let scale = dn.pow((s - i) as i32);
        (0..=pf.spec.n).all(|k| is_integral(&(&scale * pf.a(i, k))))
    })
}

/// `sum_i a[i][k] / (l + j/D)^i`.
pub fn twisted_row_sum(pf: &PartialFraction, k: u32, j: u32, l: u32) -> BigRational {
    let d = pf.spec.d as i64;
    let x = BigRational::new(BigInt::from(l as i64 * d + j as i64), BigInt::from(d));
    let inv = x.recip();
    let mut pow = inv.clone();
    let mut acc = BigRational::zero();
    for i in 1..=pf.spec.s {
        acc += pf.a(i, k) * &pow;
        pow *= &inv;
    }
    acc
}

/// `d_n^s * sum_i a[i][k] / (l + j/D)^i` is an integer.
pub fn check_lemma4(pf: &PartialFraction, k: u32, j: u32, l: u32) -> Result<bool> {
    let FormSpec { d, s, n } = pf.spec;
    if k > n || l > n || j < 1 || j > d {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= k, l <= {n} and 1 <= j <= {d}; got k={k}, j={j}, l={l}"
        )));
    }
    let dn = BigRational::from_integer(pf.spec.lcm()).pow(s as i32);
    Ok(is_integral(&(dn * twisted_row_sum(pf, k, j, l))))
}

/// The six families of simple-pole factors whose product (with the scalar
/// `(n!)^{s-(3D-1)}` absorbed into `FactorialOverPoles`) reproduces `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementaryKind {
    /// `n! / prod_{j=0}^n (t + j)`
    FactorialOverPoles,
    /// `prod_{j=1}^n (t - j) / prod_{j=0}^n (t + j)`
    ShiftedDown,
    /// `prod_{j=1}^n (t + n + j) / prod_{j=0}^n (t + j)`
    ShiftedUp,
    /// `D^{2n} prod_{j=1}^n (t - j + i/D) / prod_{j=0}^n (t + j)`
    TwistedDown,
    /// `D^{2n} prod_{j=1}^n (t + j - i/D) / prod_{j=0}^n (t + j)`
    TwistedMid,
    /// `D^{2n} prod_{j=1}^n (t + n + j - i/D) / prod_{j=0}^n (t + j)`
    TwistedUp,
}

impl ElementaryKind {
    pub const ALL: [ElementaryKind; 6] = [
        ElementaryKind::FactorialOverPoles,
        ElementaryKind::ShiftedDown,
        ElementaryKind::ShiftedUp,
        ElementaryKind::TwistedDown,
        ElementaryKind::TwistedMid,
        ElementaryKind::TwistedUp,
    ];

    pub fn is_twisted(self) -> bool {
        matches!(self, Self::TwistedDown | Self::TwistedMid | Self::TwistedUp)
    }

    /// 1-based index in the order listed above.
    pub fn from_index(kind: u32) -> Result<Self> {
        Self::ALL
            .get((kind as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("elementary kind must be 1..=6, got {kind}")))
    }

    /// Numerator roots (as values of `t`) and the constant prefactor.
    fn numerator(self, n: i64, d: i64, i: i64) -> (BigRational, Vec<BigRational>) {
        let q = |num: i64| BigRational::new(BigInt::from(num), BigInt::from(d));
        let d_pow = BigRational::from_integer(BigInt::from(d).pow(2 * n as u32));
        match self {
            Self::FactorialOverPoles => (BigRational::from_integer(factorial(n as u64)), vec![]),
            Self::ShiftedDown => (BigRational::one(), (1..=n).map(int).collect()),
            Self::ShiftedUp => (BigRational::one(), (1..=n).map(|j| int(-n - j)).collect()),
            Self::TwistedDown => (d_pow, (1..=n).map(|j| q(j * d - i)).collect()),
            Self::TwistedMid => (d_pow, (1..=n).map(|j| q(i - j * d)).collect()),
            Self::TwistedUp => (d_pow, (1..=n).map(|j| q(i - (n + j) * d)).collect()),
        }
    }
}

fn check_elementary_args(kind: ElementaryKind, n: u32, d: u32, i: u32) -> Result<()> {
    if n < 1 || d < 1 {
        return Err(Error::InvalidArgument("elementary factors need n, D >= 1".into()));
    }
    if kind.is_twisted() && (i < 1 || i >= d) {
        return Err(Error::InvalidArgument(format!("twisted factor needs 1 <= i < D, got i={i}, D={d}")));
    }
    Ok(())
}

/// Closed-form residues `c_k`, `k = 0..=n`, of an elementary factor at `t = -k`.
///
/// For the twisted kinds the residue is written as
/// `(+-) prod(...) / (n!/g) * binom(n, k) * D^n / g` with `g = gcd(D^n, n!)`,
/// and both quotients are formed with exact integer division; a nonzero
/// remainder is reported as an invariant violation.
pub fn elementary_pfd(kind: ElementaryKind, n: u32, d: u32, i: u32) -> Result<Vec<BigInt>> {
    check_elementary_args(kind, n, d, i)?;
    let (n, dd, ii) = (n as i64, d as i64, i as i64);
    let sign = |e: i64| if e % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    let f = factorial(n as u64);
    let dn = BigInt::from(dd).pow(n as u32);
    let g = dn.gcd(&f);
    let coprime = &f / &g;
    let d_part = &dn / &g;
    let twisted = |k: i64, prod: BigInt, sgn: BigInt| -> Result<BigInt> {
        let (quot, rem) = prod.div_rem(&coprime);
        if !rem.is_zero() {
            return Err(Error::InvariantViolation(format!(
                "n!/gcd(D^n, n!) does not divide the product (n={n}, D={dd}, i={ii}, k={k})"
            )));
        }
        Ok(sgn * quot * binomial(n, k) * &d_part)
    };
    (0..=n)
        .map(|k| match kind {
            ElementaryKind::FactorialOverPoles => Ok(sign(k) * binomial(n, k)),
            ElementaryKind::ShiftedDown => Ok(sign(n + k) * binomial(n + k, n) * binomial(n, k)),
            ElementaryKind::ShiftedUp => Ok(sign(k) * binomial(2 * n - k, n) * binomial(n, k)),
            ElementaryKind::TwistedDown => {
                let prod = (k + 1..=n + k).map(|j| BigInt::from(dd * j - ii)).product();
                twisted(k, prod, sign(n + k))
            }
            ElementaryKind::TwistedMid => {
                let prod = (1 - k..=n - k).map(|j| BigInt::from(dd * j - ii)).product();
                twisted(k, prod, sign(k))
            }
            ElementaryKind::TwistedUp => {
                let prod = (n - k + 1..=2 * n - k).map(|j| BigInt::from(dd * j - ii)).product();
                twisted(k, prod, sign(k))
            }
        })
        .collect()
}

/// Direct value of an elementary factor at a non-pole point.
pub fn elementary_eval(kind: ElementaryKind, n: u32, d: u32, i: u32, t: &BigRational) -> Result<BigRational> {
    check_elementary_args(kind, n, d, i)?;
    let (c, roots) = kind.numerator(n as i64, d as i64, i as i64);
    let den = product_of((0..=n as i64).map(|j| t + int(j)));
    if den.is_zero() {
        return Err(Error::Pole(t.to_string()));
    }
    Ok(c * product_of(roots.iter().map(|r| t - r)) / den)
}

/// The factor list of `R`: `s - 3D + 1` copies of `FactorialOverPoles`, one
/// each of the two shifted kinds, and the three twisted kinds for every
/// `i = 1..D-1`.
pub fn elementary_factorization(spec: FormSpec) -> Vec<(ElementaryKind, u32)> {
    let mut out = vec![(ElementaryKind::FactorialOverPoles, 0); (spec.s + 1 - 3 * spec.d) as usize];
    out.push((ElementaryKind::ShiftedDown, 0));
    out.push((ElementaryKind::ShiftedUp, 0));
    for i in 1..spec.d {
        out.push((ElementaryKind::TwistedDown, i));
        out.push((ElementaryKind::TwistedMid, i));
        out.push((ElementaryKind::TwistedUp, i));
    }
    out
}

/// Partial fractions of `1 / prod_j (t + k_j)^{s_j}` for distinct integers `k_j`.
///
/// Returns, for each pole in input order, `b[1..=s_j]`.
pub fn decompose_pole_product(poles: &[(i64, u32)]) -> Result<Vec<Vec<BigRational>>> {
    for (a, (ka, ma)) in poles.iter().enumerate() {
        if *ma == 0 {
            return Err(Error::InvalidArgument("pole multiplicities must be positive".into()));
        }
        if poles[..a].iter().any(|(kb, _)| kb == ka) {
            return Err(Error::InvalidArgument(format!("repeated pole {ka}")));
        }
    }
    let one = BigRational::one();
    poles
        .iter()
        .map(|&(k, mult)| {
            let order = mult as usize - 1;
            let mut den = Jet::one(order);
            for &(kk, m) in poles.iter().filter(|(kk, _)| *kk != k) {
                let c = int(kk - k);
                for _ in 0..m {
                    den.mul_linear(&c, &one);
                }
            }
            let jet = den.recip()?;
            Ok((1..=mult as usize).map(|i| jet.coeff(mult as usize - i).clone()).collect())
        })
        .collect()
}

/// Checks `d_n^{s-i} b_{i,j}` integral for poles drawn from `{0, ..., n}`.
pub fn lemma1_holds(n: u32, poles: &[(i64, u32)]) -> Result<bool> {
    if poles.iter().any(|&(k, _)| k < 0 || k > n as i64) {
        return Err(Error::InvalidArgument(format!("poles must lie in 0..={n}")));
    }
    let total: u32 = poles.iter().map(|p| p.1).sum();
    let dn = BigRational::from_integer(lcm_up_to(n.max(1) as i64)?);
    let table = decompose_pole_product(poles)?;
    Ok(table.iter().all(|b| {
        b.iter()
            .enumerate()
            .all(|(idx, c)| is_integral(&(dn.pow((total - idx as u32 - 1) as i32) * c)))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn small() -> FormSpec {
        FormSpec::new(1, 3, 1).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(FormSpec::new(2, 5, 1).is_err());
        assert!(FormSpec::new(0, 5, 1).is_err());
        assert!(FormSpec::new(1, 3, 0).is_err());
        assert!(FormSpec::new(2, 6, 1).is_ok());
        assert!(FormSpec::new(2, 6, 1).unwrap().require_convergent().is_err());
    }

    #[test]
    fn build_small_instances() {
        let r = build_r(small());
        assert_eq!(*r.scalar(), q(1, 1));
        assert_eq!(r.numerator_roots(), &[q(1, 1), q(0, 1), q(-1, 1), q(-2, 1)]);
        assert_eq!(r.poles().collect::<Vec<_>>(), vec![0, 1]);

        let r = build_r(FormSpec::new(2, 25, 1).unwrap());
        assert_eq!(*r.scalar(), q(64, 1));
        let expected: Vec<_> = (0..7).map(|j| q(2 - j, 2)).collect();
        assert_eq!(r.numerator_roots(), expected.as_slice());
        assert_eq!(r.numerator_roots().len(), r.spec().root_count());
        assert_eq!(r.spec().decay_degree(), 26 * 2 - 6 - 1);
    }

    #[test]
    fn exact_evaluation() {
        let r = build_r(small());
        assert_eq!(r.eval_exact(&q(2, 1)).unwrap(), q(1, 54));
        assert_eq!(r.eval_exact(&q(1, 1)).unwrap(), q(0, 1));
        assert!(matches!(r.eval_exact(&q(0, 1)), Err(Error::Pole(_))));
        assert!(matches!(r.eval_exact(&q(-1, 1)), Err(Error::Pole(_))));
        // same as the reduced form (t-1)(t+2)/(t^3 (t+1)^3)
        let t = q(7, 3);
        let reduced = (&t - q(1, 1)) * (&t + q(2, 1)) / (t.pow(3) * (&t + q(1, 1)).pow(3));
        assert_eq!(r.eval_exact(&t).unwrap(), reduced);
    }

    #[test]
    fn small_decomposition() {
        let pf = decompose(small()).unwrap();
        let col0: Vec<_> = (1..=3).map(|i| pf.a(i, 0).clone()).collect();
        let col1: Vec<_> = (1..=3).map(|i| pf.a(i, 1).clone()).collect();
        assert_eq!(col0, vec![q(-14, 1), q(7, 1), q(-2, 1)]);
        assert_eq!(col1, vec![q(14, 1), q(7, 1), q(2, 1)]);
        assert_eq!(pf.reconstruct(&q(2, 1)).unwrap(), q(1, 54));
        assert!(check_symmetry(&pf));
        assert!(check_coeff_integrality(&pf));
        assert!(check_lemma4(&pf, 0, 1, 0).unwrap());
        assert_eq!(twisted_row_sum(&pf, 0, 1, 0), q(-9, 1));
        assert!(check_lemma4(&pf, 1, 1, 1).unwrap());
        assert_eq!(twisted_row_sum(&pf, 1, 1, 1), q(9, 1));
        assert!(check_lemma4(&pf, 2, 1, 0).is_err());
    }

    #[test]
    fn d2_s7_n2_checks() {
        let pf = decompose(FormSpec::new(2, 7, 2).unwrap()).unwrap();
        assert!(check_symmetry(&pf));
        assert!(check_coeff_integrality(&pf));
        let sum: BigRational = (0..=2).map(|k| pf.a(1, k).clone()).sum();
        assert!(sum.is_zero());
    }

    #[test]
    fn mutation_breaks_symmetry() {
        let pf = decompose(FormSpec::new(2, 7, 2).unwrap()).unwrap();
        let bumped = pf.with_coefficient(3, 0, pf.a(3, 0) + q(1, 1));
        assert!(!check_symmetry(&bumped));
        let frac = pf.with_coefficient(1, 1, pf.a(1, 1) + q(1, 1 << 20));
        assert!(!check_coeff_integrality(&frac));
    }

    #[test]
    fn table_roundtrip() {
        let pf = decompose(FormSpec::new(2, 7, 2).unwrap()).unwrap();
        let json = serde_json::to_string(&pf.to_table()).unwrap();
        assert!(json.starts_with("{\"D\":2,\"s\":7,\"n\":2,\"coeffs\":[["));
        let back: CoefficientTable = serde_json::from_str(&json).unwrap();
        assert_eq!(PartialFraction::from_table(&back).unwrap(), pf);
    }

    #[test]
    fn elementary_examples() {
        use ElementaryKind::*;
        let v = |x: &[i64]| x.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
        assert_eq!(elementary_pfd(FactorialOverPoles, 1, 1, 0).unwrap(), v(&[1, -1]));
        assert_eq!(elementary_pfd(ShiftedDown, 1, 1, 0).unwrap(), v(&[-1, 2]));
        assert_eq!(elementary_pfd(ShiftedUp, 2, 1, 0).unwrap()[0], BigInt::from(6));
        assert!(elementary_pfd(TwistedDown, 2, 2, 2).is_err());
        assert!(elementary_pfd(TwistedDown, 2, 1, 1).is_err());
        assert!(ElementaryKind::from_index(7).is_err());
        assert!(ElementaryKind::from_index(0).is_err());
    }

    #[test]
    fn elementary_residues_match_direct_decomposition() {
        for &kind in &ElementaryKind::ALL {
            for d in 1..=5u32 {
                for n in 1..=5u32 {
                    let is: Vec<u32> = if kind.is_twisted() { (1..d).collect() } else { vec![0] };
                    for i in is {
                        let coeffs = elementary_pfd(kind, n, d, i).unwrap();
                        for t in [q(7, 3), q(-1, 2), q(11, 5)] {
                            let direct = elementary_eval(kind, n, d, i, &t).unwrap();
                            let via: BigRational = coeffs
                                .iter()
                                .enumerate()
                                .map(|(k, c)| BigRational::from_integer(c.clone()) / (&t + int(k as i64)))
                                .sum();
                            assert_eq!(direct, via, "{kind:?} n={n} D={d} i={i}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn elementary_product_reproduces_r() {
        for (d, s, n) in [(1, 3, 1), (2, 7, 2), (3, 10, 2), (4, 13, 1)] {
            let spec = FormSpec::new(d, s, n).unwrap();
            let r = build_r(spec);
            for t in [q(5, 7), q(-1, 3), q(9, 2)] {
                let prod = elementary_factorization(spec)
                    .into_iter()
                    .map(|(kind, i)| elementary_eval(kind, n, d, i, &t).unwrap())
                    .fold(BigRational::one(), |a, b| a * b);
                assert_eq!(prod, r.eval_exact(&t).unwrap(), "D={d} s={s} n={n}");
            }
        }
    }

    #[test]
    fn pole_product_lemma1() {
        assert!(decompose_pole_product(&[(0, 1), (0, 2)]).is_err());
        // 1/(t (t+1)) = 1/t - 1/(t+1)
        let b = decompose_pole_product(&[(0, 1), (1, 1)]).unwrap();
        assert_eq!(b, vec![vec![q(1, 1)], vec![q(-1, 1)]]);
        assert!(lemma1_holds(4, &[(0, 3), (2, 2), (4, 1)]).unwrap());
        assert!(lemma1_holds(3, &[(5, 1)]).is_err());
    }

    #[test]
    fn reflection_law_on_grid() {
        for d in 1..=3 {
            for n in 1..=3 {
                for s in [3 * d, 3 * d + 1, 3 * d + 3] {
                    let spec = FormSpec::new(d, s, n).unwrap();
                    let pf = decompose(spec).unwrap();
                    assert!(check_reflection(&pf), "D={d} s={s} n={n}");
                    let quoted = (n + 1) * (s + 1) % 2 == 0;
                    assert_eq!(check_symmetry(&pf), quoted, "D={d} s={s} n={n}");
                }
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn reflection_of_r(d in 1u32..=3, extra in 0u32..4, n in 1u32..=3, num in -40i64..40, den in 1i64..9) {
            let spec = FormSpec::new(d, 3 * d + extra, n).unwrap();
            let r = build_r(spec);
            let t = q(num, den) + q(1, 97);
            let mirrored = -(t.clone()) - q(n as i64, 1);
            let lhs = r.eval_exact(&mirrored).unwrap();
            let rhs = r.eval_exact(&t).unwrap() * q(reflection_sign(&spec) as i64, 1);
            proptest::prop_assert_eq!(lhs, rhs);
        }
    }
}
