//! Lattice lines on which the torus integrand `|E f(x, X)|` reaches `nu`.
//!
//! An even tuple `k` with `sum k = 0` indexes the line
//! `x_alpha = (t + k_alpha pi) / nu`. Its in-cube parameter range has width
//! `pi d(k)` with `d(k) = 2 nu + min k - max k`, and the segment length is
//! `L(k) = pi d(k) / sqrt(nu)`; the line meets the open cube iff `d >= 2`.
//!
//! The starred family (second moment) uses lines
//! `x_alpha = (t + (pi / nu) k_alpha) / nu` for even zero-sum tuples whose
//! pairwise differences are divisible by `2 nu`, with
//! `d*(k) = 2 nu - r / nu`, `r = max k - min k`.
//!
//! Every aggregate is computed twice: once from generating functions with a
//! roots-of-unity filter, once by direct enumeration (for `nu <= 6`), and
//! the two must agree exactly.

mod poly;

use std::f64::consts::PI;
use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::check_nu;

pub use poly::{roots_of_unity_filter, GfPoly};

/// Largest `nu` for which tuples are enumerated directly.
pub const ENUMERATION_MAX_NU: usize = 6;

fn check_enumerable(nu: usize) -> Result<()> {
    check_nu(nu)?;
    if nu > ENUMERATION_MAX_NU {
        return Err(Error::BudgetExceeded {
            what: "tuple enumeration nu",
            required: nu as u128,
            limit: ENUMERATION_MAX_NU as u128,
        });
    }
    Ok(())
}

fn spread(k: &[i64]) -> (i64, i64) {
    let lo = *k.iter().min().expect("non-empty tuple");
    let hi = *k.iter().max().expect("non-empty tuple");
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineTuple {
    pub k: Vec<i64>,
    pub r: i64,
    pub d: i64,
    /// In-cube segment length `pi d / sqrt(nu)`.
    pub length: f64,
}

impl LineTuple {
    pub fn new(k: Vec<i64>) -> Self {
        let nu = k.len() as i64;
        let (lo, hi) = spread(&k);
        let d = 2 * nu + lo - hi;
        Self {
            r: hi - lo,
            d,
            length: PI * d as f64 / (nu as f64).sqrt(),
            k,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.k.iter().all(|&v| v == 0)
    }

    pub fn is_admissible(&self) -> bool {
        self.d >= 2
    }
}

/// Calls `visit` on every zero-sum tuple whose first `nu - 1` entries come
/// from `choices`; the last entry is whatever balances the sum.
fn for_each_zero_sum(nu: usize, choices: &[i64], mut visit: impl FnMut(&[i64])) {
    let mut idx = vec![0usize; nu - 1];
    let mut k = vec![0i64; nu];
    'outer: loop {
        for (slot, &i) in k.iter_mut().zip(&idx) {
            *slot = choices[i];
        }
        k[nu - 1] = -k[..nu - 1].iter().sum::<i64>();
        visit(&k);
        for i in idx.iter_mut() {
            *i += 1;
            if *i < choices.len() {
                continue 'outer;
            }
            *i = 0;
        }
        break;
    }
}

/// All admissible even zero-sum tuples, including the zero tuple, sorted.
pub fn enumerate_even_tuples(nu: usize) -> Result<Vec<LineTuple>> {
    check_enumerable(nu)?;
    let reach = 2 * (nu as i64 - 1);
    let choices: Vec<i64> = (-reach..=reach).step_by(2).collect();
    let mut out = Vec::new();
    for_each_zero_sum(nu, &choices, |k| {
        let last = k[nu - 1];
        if last.abs() <= reach && last % 2 == 0 {
            let t = LineTuple::new(k.to_vec());
            if t.is_admissible() {
                out.push(t);
            }
        }
    });
    out.sort_by(|a, b| a.k.cmp(&b.k));
    Ok(out)
}

/// `F_r` in the variable `z = zeta^2`, for even `r >= 2`:
/// `A^nu - B^nu - C^nu + D^nu` with `A = (1 - z^(h+1))/(1 - z)`,
/// `B = (1 - z^h)/(1 - z)`, `C = (z - z^(h+1))/(1 - z)`, `D = (z - z^h)/(1 - z)`, `h = r/2`.
pub fn f_r(r: i64, nu: usize) -> Result<GfPoly> {
    if r < 2 || r % 2 != 0 {
        return Err(Error::Domain(format!("F_r needs even r >= 2, got {r}")));
    }
    let h = (r / 2) as usize;
    boxed_difference(h, nu as u32)
}

/// `A^e - B^e - C^e + D^e` for the width-`h` boxes described at [`f_r`].
fn boxed_difference(h: usize, e: u32) -> Result<GfPoly> {
    let a = poly::ratio_over_one_minus(0, h + 1)?;
    let b = poly::ratio_over_one_minus(0, h)?;
    let c = poly::ratio_over_one_minus(1, h + 1)?;
    let d = poly::ratio_over_one_minus(1, h)?;
    let ab = &a.pow(e) - &b.pow(e);
    let cd = &c.pow(e) - &d.pow(e);
    Ok(&ab - &cd)
}

/// Number of even zero-sum `nu`-tuples with minimum `a` and maximum `b`,
/// read off as `[z^(-a nu / 2)] F_(b-a)(z)`.
pub fn gf_count_n(a: i64, b: i64, nu: usize) -> Result<BigInt> {
    check_nu(nu)?;
    if a > 0 || b < 0 || a % 2 != 0 || b % 2 != 0 {
        return Err(Error::Domain(format!(
            "need even a <= 0 <= b, got a = {a}, b = {b}"
        )));
    }
    let r = b - a;
    match r {
        0 => {
            return Ok(if a == 0 {
                BigInt::one()
            } else {
                BigInt::zero()
            })
        }
        2 => return Ok(BigInt::zero()),
        _ => {}
    }
    if r > 2 * (nu as i64 - 1) {
        return Err(Error::Domain(format!(
            "r = {r} outside [4, {}]",
            2 * (nu as i64 - 1)
        )));
    }
    let exponent = (-a) as usize * nu / 2;
    Ok(f_r(r, nu)?.coeff(exponent))
}

/// Telescoped `sum_r F_r`: `((1-z^nu)/(1-z))^nu - ((z-z^nu)/(1-z))^nu - (1+z)^nu + z^nu`.
pub fn s1_poly(nu: usize) -> Result<GfPoly> {
    let e = nu as u32;
    let a = poly::ratio_over_one_minus(0, nu)?.pow(e);
    let c = poly::ratio_over_one_minus(1, nu)?.pow(e);
    let one_plus = GfPoly::from_i64(&[1, 1]).pow(e);
    Ok(&(&(&a - &c) - &one_plus) + &GfPoly::monomial(nu))
}

/// `sum_r r F_r` with `z^nu` replaced by 1:
/// `2(nu-1) ((1-z^nu)/(1-z))^nu - 2 nu ((1-z^(nu-1))/(1-z))^nu - 2(1+z)^nu + 4 z^nu`.
/// Agrees with `sum_r r F_r` modulo `z^nu - 1`, hence under the filter.
pub fn s2_poly(nu: usize) -> Result<GfPoly> {
    let e = nu as u32;
    let v = nu as i64;
    let a = poly::ratio_over_one_minus(0, nu)?.pow(e);
    let b = poly::ratio_over_one_minus(0, nu - 1)?.pow(e);
    let one_plus = GfPoly::from_i64(&[1, 1]).pow(e);
    let mut s = a.scale(&BigInt::from(2 * (v - 1)));
    s = &s - &b.scale(&BigInt::from(2 * v));
    s = &s - &one_plus.scale(&BigInt::from(2));
    Ok(&s + &GfPoly::monomial(nu).scale(&BigInt::from(4)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineAggregates {
    pub nu: usize,
    /// Admissible tuples other than the zero tuple.
    #[serde(serialize_with = "crate::numeric::as_string")]
    pub tuple_count: BigInt,
    /// `sum_k d(k)` over all admissible tuples.
    #[serde(serialize_with = "crate::numeric::as_string")]
    pub m_agg: BigInt,
    pub total_length: f64,
    /// `nu (2 nu - 1)^nu`, a bound on isolated boundary touch points.
    #[serde(serialize_with = "crate::numeric::as_string")]
    pub touch_point_bound: BigInt,
}

/// `(1/nu)[nu^nu - (nu-1)^nu - (nu-1)(-1)^nu] - 1`.
pub fn closed_form_tuple_count(nu: usize) -> BigInt {
    let v = BigInt::from(nu);
    let sign = if nu.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    let vm1: BigInt = &v - 1;
    let inner = v.pow(nu as u32) - vm1.pow(nu as u32) - vm1 * sign;
    inner / &v - 1
}

/// `2 nu^(nu-1)`.
pub fn closed_form_m_agg(nu: usize) -> BigInt {
    BigInt::from(2) * BigInt::from(nu).pow(nu as u32 - 1)
}

/// `2 pi nu^(nu - 3/2)`.
pub fn closed_form_total_length(nu: usize) -> f64 {
    2.0 * PI * (nu as f64).powf(nu as f64 - 1.5)
}

fn mismatch(what: &str, gf: impl std::fmt::Display, other: impl std::fmt::Display) -> Error {
    Error::InternalMismatch(format!(
        "{what}: generating function {gf}, other route {other}"
    ))
}

fn to_f64(x: &BigInt) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::INFINITY)
}

pub fn line_aggregates(nu: usize) -> Result<LineAggregates> {
    check_nu(nu)?;
    let v = nu as i64;
    let mut count = BigInt::zero();
    let mut weighted = BigInt::zero();
    for r in (4..=2 * (v - 1)).step_by(2) {
        let n_r = roots_of_unity_filter(&f_r(r, nu)?, nu)?;
        weighted += &n_r * r;
        count += n_r;
    }
    let s1 = roots_of_unity_filter(&s1_poly(nu)?, nu)?;
    if s1 != count {
        return Err(mismatch("telescoped count", &s1, &count));
    }
    let s2 = roots_of_unity_filter(&s2_poly(nu)?, nu)?;
    if s2 != weighted {
        return Err(mismatch("telescoped r-weighted count", &s2, &weighted));
    }
    let m_agg = BigInt::from(2 * v) * (BigInt::one() + &count) - &weighted;

    if nu <= ENUMERATION_MAX_NU {
        let tuples = enumerate_even_tuples(nu)?;
        let enum_count = tuples.iter().filter(|t| !t.is_diagonal()).count();
        let enum_m: i64 = tuples.iter().map(|t| t.d).sum();
        if BigInt::from(enum_count) != count {
            return Err(mismatch("tuple count", &count, enum_count));
        }
        if BigInt::from(enum_m) != m_agg {
            return Err(mismatch("sum of d(k)", &m_agg, enum_m));
        }
    }

    Ok(LineAggregates {
        nu,
        total_length: PI * to_f64(&m_agg) / (nu as f64).sqrt(),
        tuple_count: count,
        m_agg,
        touch_point_bound: BigInt::from(nu) * BigInt::from(2 * nu - 1).pow(nu as u32),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarTuple {
    pub k: Vec<i64>,
    pub r: i64,
    /// `2 nu - r / nu`; always an integer since `2 nu` divides `r`.
    pub dstar: i64,
    /// `pi dstar / sqrt(nu)`.
    pub length: f64,
}

impl StarTuple {
    pub fn new(k: Vec<i64>) -> Self {
        let nu = k.len() as i64;
        let (lo, hi) = spread(&k);
        let r = hi - lo;
        let dstar = 2 * nu - r / nu;
        Self {
            r,
            dstar,
            length: PI * dstar as f64 / (nu as f64).sqrt(),
            k,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.k.iter().all(|&v| v == 0)
    }
}

/// Even zero-sum tuples with all pairwise differences divisible by `2 nu`
/// and `d* > 0`, sorted.
pub fn enumerate_star_tuples(nu: usize) -> Result<Vec<StarTuple>> {
    check_enumerable(nu)?;
    let v = nu as i64;
    let modulus = 2 * v;
    let reach = modulus * (v - 1);
    let mut out = Vec::new();
    // first entry anywhere in range, the others congruent to it mod 2 nu
    for first in (-reach..=reach).step_by(2) {
        let offsets: Vec<i64> = (-(v - 1)..=(v - 1)).map(|m| first + modulus * m).collect();
        let mut idx = vec![0usize; nu.saturating_sub(2)];
        let mut k = vec![0i64; nu];
        'outer: loop {
            k[0] = first;
            for (slot, &i) in k[1..nu - 1].iter_mut().zip(&idx) {
                *slot = offsets[i];
            }
            k[nu - 1] = -k[..nu - 1].iter().sum::<i64>();
            let last = k[nu - 1];
            let congruent = (last - first).rem_euclid(modulus) == 0;
            let (lo, hi) = spread(&k);
            if congruent && last % 2 == 0 && hi - lo < 2 * v * v {
                out.push(StarTuple::new(k.clone()));
            }
            for i in idx.iter_mut() {
                *i += 1;
                if *i < offsets.len() {
                    continue 'outer;
                }
                *i = 0;
            }
            break;
        }
    }
    out.sort_by(|a, b| a.k.cmp(&b.k));
    out.dedup_by(|a, b| a.k == b.k);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarAggregates {
    pub nu: usize,
    /// Non-diagonal starred tuples.
    #[serde(serialize_with = "crate::numeric::as_string")]
    pub m1: BigInt,
    /// `sum r` over non-diagonal starred tuples.
    #[serde(serialize_with = "crate::numeric::as_string")]
    pub m2: BigInt,
    #[serde(serialize_with = "crate::numeric::as_string")]
    pub sum_dstar: BigInt,
    pub total_length: f64,
}

/// `nu^nu - (nu-1)^nu - 1`.
pub fn closed_form_star_m1(nu: usize) -> BigInt {
    let v = BigInt::from(nu);
    let vm1: BigInt = &v - 1;
    v.pow(nu as u32) - vm1.pow(nu as u32) - 1
}

/// `2 nu (nu-1) nu^nu - 2 nu^2 (nu-1)^nu`.
pub fn closed_form_star_m2(nu: usize) -> BigInt {
    let v = BigInt::from(nu);
    let e = nu as u32;
    let vm1: BigInt = &v - 1;
    BigInt::from(2) * &v * &vm1 * v.pow(e) - BigInt::from(2) * &v * &v * vm1.pow(e)
}

/// `2 nu^nu`.
pub fn closed_form_star_sum_dstar(nu: usize) -> BigInt {
    BigInt::from(2) * BigInt::from(nu).pow(nu as u32)
}

/// `2 pi nu^(nu - 1/2)`.
pub fn closed_form_star_total_length(nu: usize) -> f64 {
    2.0 * PI * (nu as f64).powf(nu as f64 - 0.5)
}

/// `S*(t)`, the telescoped `sum_j (2 nu j) F*_j(t)` with `t = zeta^(2 nu)`.
pub fn s_star_poly(nu: usize) -> Result<GfPoly> {
    let v = nu as i64;
    let e = nu as u32;
    let a = |j: usize| poly::ratio_over_one_minus(0, j).map(|p| p.pow(e));
    let t_nu = GfPoly::monomial(nu);
    let mut s = a(nu)?.scale(&BigInt::from(2 * v * (v - 1)));
    let coef = &t_nu.scale(&BigInt::from(2 * v * (v - 1))) + &GfPoly::from_i64(&[2 * v]);
    s = &s - &(&coef * &a(nu - 1)?);
    let mut tail = GfPoly::zero();
    for j in 1..=nu.saturating_sub(2) {
        tail = &tail + &a(j)?;
    }
    let factor = (&t_nu - &GfPoly::one()).scale(&BigInt::from(2 * v));
    Ok(&s + &(&factor * &tail))
}

pub fn star_aggregates(nu: usize) -> Result<StarAggregates> {
    check_nu(nu)?;
    let v = nu as i64;
    let m1 = closed_form_star_m1(nu);
    let m2 = closed_form_star_m2(nu);
    let sum_dstar = closed_form_star_sum_dstar(nu);

    // generating-function route in t = zeta^(2 nu): every power of t is kept,
    // so the filter is the plain coefficient sum.
    let mut gf_m1 = BigInt::zero();
    let mut gf_m2 = BigInt::zero();
    for j in 1..nu {
        let n_j = roots_of_unity_filter(&boxed_difference(j, nu as u32)?, 1)?;
        gf_m2 += &n_j * (2 * v * j as i64);
        gf_m1 += n_j;
    }
    if gf_m1 != m1 {
        return Err(mismatch("starred M1", &gf_m1, &m1));
    }
    if gf_m2 != m2 {
        return Err(mismatch("starred M2", &gf_m2, &m2));
    }
    let telescoped = roots_of_unity_filter(&s_star_poly(nu)?, 1)?;
    if telescoped != m2 {
        return Err(mismatch("telescoped starred M2", &telescoped, &m2));
    }
    let from_parts = BigInt::from(2 * v) * (BigInt::one() + &m1) - &m2 / BigInt::from(v);
    if from_parts != sum_dstar {
        return Err(mismatch("sum of d*", &from_parts, &sum_dstar));
    }

    if nu <= ENUMERATION_MAX_NU {
        let tuples = enumerate_star_tuples(nu)?;
        let off: Vec<_> = tuples.iter().filter(|t| !t.is_diagonal()).collect();
        let e_m1 = BigInt::from(off.len());
        let e_m2 = BigInt::from(off.iter().map(|t| t.r).sum::<i64>());
        let e_d = BigInt::from(tuples.iter().map(|t| t.dstar).sum::<i64>());
        if e_m1 != m1 {
            return Err(mismatch("starred tuple count", &m1, &e_m1));
        }
        if e_m2 != m2 {
            return Err(mismatch("starred r sum", &m2, &e_m2));
        }
        if e_d != sum_dstar {
            return Err(mismatch("starred d* sum", &sum_dstar, &e_d));
        }
    }

    Ok(StarAggregates {
        nu,
        total_length: PI * to_f64(&sum_dstar) / (nu as f64).sqrt(),
        m1,
        m2,
        sum_dstar,
    })
}

fn join_k(k: &[i64]) -> String {
    k.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

fn write_tuple_rows<W: Write>(
    out: W,
    nu: usize,
    rows: impl Iterator<Item = (String, i64, i64, f64)>,
) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["nu", "k", "r", "d", "L"])?;
    for (k, r, d, l) in rows {
        w.write_record([
            nu.to_string(),
            k,
            r.to_string(),
            d.to_string(),
            l.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with columns `nu,k,r,d,L`, `k` joined by semicolons.
pub fn write_line_csv<W: Write>(out: W, nu: usize, tuples: &[LineTuple]) -> csv::Result<()> {
    write_tuple_rows(
        out,
        nu,
        tuples.iter().map(|t| (join_k(&t.k), t.r, t.d, t.length)),
    )
}

/// Same layout as [`write_line_csv`]; `d` and `L` hold `d*` and `L*`.
pub fn write_star_csv<W: Write>(out: W, nu: usize, tuples: &[StarTuple]) -> csv::Result<()> {
    write_tuple_rows(
        out,
        nu,
        tuples
            .iter()
            .map(|t| (join_k(&t.k), t.r, t.dstar, t.length)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_tuples_small_nu() {
        let t2 = enumerate_even_tuples(2).unwrap();
        assert_eq!(t2.len(), 1);
        assert_eq!(t2[0].k, vec![0, 0]);

        let t3 = enumerate_even_tuples(3).unwrap();
        assert_eq!(t3.len(), 7);
        let non_diag: Vec<_> = t3.iter().filter(|t| !t.is_diagonal()).collect();
        assert_eq!(non_diag.len(), 6);
        for t in non_diag {
            let mut s = t.k.clone();
            s.sort();
            assert_eq!(s, vec![-2, 0, 2]);
        }
        let total: f64 = t3.iter().map(|t| t.length).sum();
        assert!((total - 2.0 * PI * 3f64.powf(1.5)).abs() < 1e-12);
        assert!((total - 32.6484).abs() < 1e-4);
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(
            enumerate_even_tuples(7),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(enumerate_star_tuples(7).is_err());
    }

    #[test]
    fn n_ab_matches_enumeration() {
        for nu in 2..=ENUMERATION_MAX_NU {
            // all even zero-sum tuples within the admissible spread, admissible or not
            let reach = 2 * (nu as i64 - 1);
            let choices: Vec<i64> = (-reach..=reach).step_by(2).collect();
            let mut tally = std::collections::BTreeMap::new();
            for_each_zero_sum(nu, &choices, |k| {
                let (lo, hi) = spread(k);
                if k[nu - 1].abs() <= reach && hi - lo <= reach {
                    *tally.entry((lo, hi)).or_insert(0i64) += 1;
                }
            });
            for a in (-reach..=0).step_by(2) {
                for b in (0..=reach).step_by(2) {
                    if b - a > reach {
                        continue;
                    }
                    let expected = tally.get(&(a, b)).copied().unwrap_or(0);
                    assert_eq!(
                        gf_count_n(a, b, nu).unwrap(),
                        BigInt::from(expected),
                        "nu={nu} a={a} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn n_ab_examples() {
        assert_eq!(gf_count_n(-2, 2, 3).unwrap(), BigInt::from(6));
        assert_eq!(gf_count_n(0, 4, 3).unwrap(), BigInt::zero());
        assert_eq!(gf_count_n(-4, 0, 3).unwrap(), BigInt::zero());
        assert_eq!(gf_count_n(0, 0, 3).unwrap(), BigInt::one());
        assert_eq!(gf_count_n(-2, 0, 3).unwrap(), BigInt::zero());
        assert!(gf_count_n(-4, 4, 3).is_err());
        assert!(gf_count_n(-1, 3, 3).is_err());
        // a <= -r forces zero
        for nu in 3..=7 {
            for r in (4..=2 * (nu as i64 - 1)).step_by(2) {
                for a in (-3 * r..=-r).step_by(2) {
                    let exp = (-a) as usize * nu / 2;
                    assert!(f_r(r, nu).unwrap().coeff(exp).is_zero());
                }
                assert!(f_r(r, nu).unwrap().coeff(0).is_zero());
            }
        }
    }

    #[test]
    fn line_aggregate_examples() {
        let a3 = line_aggregates(3).unwrap();
        assert_eq!(a3.tuple_count, BigInt::from(6));
        assert_eq!(a3.m_agg, BigInt::from(18));
        assert!((a3.total_length - 2.0 * PI * 3f64.powf(1.5)).abs() < 1e-12);
        assert_eq!(line_aggregates(2).unwrap().tuple_count, BigInt::zero());
        assert_eq!(line_aggregates(4).unwrap().m_agg, BigInt::from(128));
    }

    #[test]
    fn lengths_are_bounded_below() {
        for nu in 2..=ENUMERATION_MAX_NU {
            let floor = 2.0 * PI / (nu as f64).sqrt();
            for t in enumerate_even_tuples(nu).unwrap() {
                assert!(t.d >= 2);
                assert!(t.length >= floor - 1e-12);
                assert_eq!(t.k.iter().sum::<i64>(), 0);
                assert!(t.k.iter().all(|v| v % 2 == 0));
            }
        }
    }

    #[test]
    fn star_examples() {
        let s3 = enumerate_star_tuples(3).unwrap();
        assert_eq!(s3.iter().filter(|t| !t.is_diagonal()).count(), 18);
        assert_eq!(s3.iter().map(|t| t.dstar).sum::<i64>(), 54);
        let total: f64 = s3.iter().map(|t| t.length).sum();
        assert!((total - 97.945).abs() < 1e-3);

        let a3 = star_aggregates(3).unwrap();
        assert_eq!(a3.m1, BigInt::from(18));
        assert_eq!(a3.m2, BigInt::from(180));
        assert_eq!(a3.sum_dstar, BigInt::from(54));
        assert_eq!(star_aggregates(4).unwrap().m1, BigInt::from(174));

        let s2 = enumerate_star_tuples(2).unwrap();
        assert_eq!(s2.iter().map(|t| t.dstar).sum::<i64>(), 8);
        assert_eq!(star_aggregates(2).unwrap().sum_dstar, BigInt::from(8));
    }

    #[test]
    fn star_tuples_satisfy_definition() {
        for nu in 2..=ENUMERATION_MAX_NU {
            let v = nu as i64;
            for t in enumerate_star_tuples(nu).unwrap() {
                assert_eq!(t.k.iter().sum::<i64>(), 0);
                assert!(t.dstar > 0);
                for &x in &t.k {
                    assert_eq!(x % 2, 0);
                    assert_eq!((x - t.k[0]).rem_euclid(2 * v), 0);
                }
                let j = t.r / (2 * v);
                assert!(t.is_diagonal() || (1..v).contains(&j));
            }
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_line_csv(&mut buf, 3, &enumerate_even_tuples(3).unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("nu,k,r,d,L"));
        assert!(text.contains("3,-2;0;2,4,2,"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 8);
    }
}
