#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use zeta_forms::rational_fn::{build_r, FormSpec};

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Solves `sum_{i,k} a[i][k] / (t_m + k)^i = R(t_m)` at `s (n+1)` sample
/// points by exact Gaussian elimination. Returns `a[i-1][k]`.
pub fn linear_system_oracle(spec: FormSpec) -> Vec<Vec<BigRational>> {
    let r = build_r(spec);
    let (s, n) = (spec.s as usize, spec.n as usize);
    let unknowns = s * (n + 1);
    let points: Vec<BigRational> = (0..unknowns).map(|m| q(2 * m as i64 + 3, 7) + q(1, 3)).collect();
    let mut rows: Vec<Vec<BigRational>> = points
        .iter()
        .map(|t| {
            let mut row = Vec::with_capacity(unknowns + 1);
            for i in 1..=s {
                for k in 0..=n {
                    let base = t + BigRational::from_integer(BigInt::from(k));
                    row.push(base.pow(-(i as i32)));
                }
            }
            row.push(r.eval_exact(t).unwrap());
            row
        })
        .collect();
    for col in 0..unknowns {
        let pivot = (col..unknowns).find(|&r| !rows[r][col].is_zero()).expect("nonsingular sample system");
        rows.swap(col, pivot);
        let inv = rows[col][col].recip();
        for x in rows[col].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    let mut out = vec![vec![BigRational::zero(); n + 1]; s];
    for i in 0..s {
        for k in 0..=n {
            out[i][k] = rows[i * (n + 1) + k][unknowns].clone();
        }
    }
    out
}

/// Specs with `s <= 5`, `n <= 2`, `D <= 2`.
pub fn oracle_specs() -> Vec<FormSpec> {
    let mut out = Vec::new();
    for d in 1..=2 {
        for s in 3 * d..=5 {
            for n in 1..=2 {
                out.push(FormSpec::new(d, s, n).unwrap());
            }
        }
    }
    out
}

pub fn one() -> BigRational {
    BigRational::one()
}
