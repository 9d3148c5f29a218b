//! Moments of the perfect-partition count `Z_n` and the phase-diagram constants.
//!
//! `expected_exact` is the convolution oracle: for a fixed labeling the part
//! sums are independent, so `E[Z_n]` is a sum over compositions
//! `n_1 + .. + n_nu = n` (all `n_alpha >= 1`) of
//! `multinomial(n; n_1..n_nu) * sum_t prod_alpha P(sum of n_alpha uniforms = t)`.
//! `expected_bruteforce` and `second_moment_bruteforce` average exact counts
//! over all `M^n` instances.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::count_brute;
use crate::error::{Error, Result};
use crate::numeric::{saturating_pow, CompensatedSum};
use crate::problem::{check_nu, Instance};

/// Limit on `maxk * maxk * M` for sum-distribution tables.
pub const TABLE_BUDGET: u128 = 50_000_000;
/// Limit on the number of compositions visited by `expected_exact`.
pub const COMPOSITION_BUDGET: u128 = 10_000_000;
/// Limit on `M^n` for instance enumeration.
pub const INSTANCE_ENUMERATION_LIMIT: u128 = 10_000_000;

fn check_table_budget(maxk: usize, bound: u64) -> Result<()> {
    let required = (maxk as u128)
        .saturating_mul(maxk as u128)
        .saturating_mul(bound as u128);
    if required > TABLE_BUDGET {
        return Err(Error::MemoryBudgetExceeded {
            states: required,
            limit: TABLE_BUDGET,
        });
    }
    Ok(())
}

/// `p[k][t]`: probability that `k` iid uniforms on `1..=M` sum to `t`.
#[derive(Debug, Clone)]
pub struct SumDistTable {
    bound: u64,
    p: Vec<Vec<f64>>,
}

impl SumDistTable {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn maxk(&self) -> usize {
        self.p.len() - 1
    }

    pub fn prob(&self, k: usize, t: u64) -> f64 {
        self.p[k].get(t as usize).copied().unwrap_or(0.0)
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.p[k]
    }
}

pub fn sum_dist(maxk: usize, bound: u64) -> Result<SumDistTable> {
    if maxk == 0 || bound == 0 {
        return Err(Error::InvalidInput("maxk and M must be positive".into()));
    }
    check_table_budget(maxk, bound)?;
    let m = bound as usize;
    let w = 1.0 / bound as f64;
    let mut p = vec![vec![1.0]];
    for k in 1..=maxk {
        let prev = &p[k - 1];
        let mut row = vec![0.0; k * m + 1];
        for (t, slot) in row.iter_mut().enumerate().skip(k) {
            let lo = t.saturating_sub(m).max(k - 1);
            let hi = (t - 1).min((k - 1) * m);
            let mut acc = CompensatedSum::default();
            for &q in &prev[lo..=hi] {
                acc.add(q);
            }
            *slot = acc.value() * w;
        }
        p.push(row);
    }
    Ok(SumDistTable { bound, p })
}

/// Exact counterpart of [`SumDistTable`]: number of `k`-tuples in `1..=M`
/// summing to `t`; the probability is `ways / M^k`.
#[derive(Debug, Clone)]
pub struct SumCountTable {
    bound: u64,
    ways: Vec<Vec<BigUint>>,
}

impl SumCountTable {
    pub fn ways(&self, k: usize, t: u64) -> BigUint {
        self.ways[k].get(t as usize).cloned().unwrap_or_default()
    }

    pub fn probability(&self, k: usize, t: u64) -> BigRational {
        BigRational::new(
            self.ways(k, t).into(),
            BigUint::from(self.bound).pow(k as u32).into(),
        )
    }
}

pub fn sum_dist_exact(maxk: usize, bound: u64) -> Result<SumCountTable> {
    if maxk == 0 || bound == 0 {
        return Err(Error::InvalidInput("maxk and M must be positive".into()));
    }
    check_table_budget(maxk, bound)?;
    let m = bound as usize;
    let mut ways = vec![vec![BigUint::from(1u32)]];
    for k in 1..=maxk {
        let prev = &ways[k - 1];
        let mut row = vec![BigUint::zero(); k * m + 1];
        // sliding window over prev[t - M ..= t - 1]
        let mut window = BigUint::zero();
        for t in 1..=k * m {
            if t - 1 < prev.len() {
                window += &prev[t - 1];
            }
            if t > m && t - m - 1 < prev.len() {
                window -= &prev[t - m - 1];
            }
            row[t] = window.clone();
        }
        ways.push(row);
    }
    Ok(SumCountTable { bound, ways })
}

fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// All `(n_1..n_nu)` with `n_alpha >= 1` summing to `n`, in lexicographic order.
fn compositions(n: usize, nu: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in 1..=left - (parts - 1) {
            cur.push(first);
            rec(left - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n >= nu {
        rec(n, nu, &mut Vec::with_capacity(nu), &mut out);
    }
    out
}

fn check_composition_budget(n: usize, nu: usize) -> Result<()> {
    let count = binomial_u128(n.saturating_sub(1) as u64, nu as u64 - 1);
    if count > COMPOSITION_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "compositions C(n-1, nu-1)",
            required: count,
            limit: COMPOSITION_BUDGET,
        });
    }
    Ok(())
}

fn factorials(n: usize) -> Vec<BigUint> {
    let mut f = vec![BigUint::from(1u32)];
    for k in 1..=n {
        let next = &f[k - 1] * BigUint::from(k);
        f.push(next);
    }
    f
}

fn multinomial(fact: &[BigUint], parts: &[usize]) -> BigUint {
    let n: usize = parts.iter().sum();
    parts.iter().fold(fact[n].clone(), |acc, &p| acc / &fact[p])
}

/// `E[Z_n]` by convolution, in double precision with compensated summation.
pub fn expected_exact(n: usize, bound: u64, nu: usize) -> Result<f64> {
    check_nu(nu)?;
    if n == 0 || bound == 0 {
        return Err(Error::InvalidInput("n and M must be positive".into()));
    }
    check_composition_budget(n, nu)?;
    let comps = compositions(n, nu);
    if comps.is_empty() {
        return Ok(0.0);
    }
    let table = sum_dist(n + 1 - nu, bound)?;
    let fact = factorials(n);
    let mut total = CompensatedSum::default();
    for c in &comps {
        let lo = *c.iter().max().unwrap();
        let hi = c.iter().min().unwrap() * bound as usize;
        let mut inner = CompensatedSum::default();
        for t in lo..=hi {
            inner.add(c.iter().map(|&k| table.row(k)[t]).product());
        }
        let weight = multinomial(&fact, c).to_f64().unwrap_or(f64::INFINITY);
        total.add(weight * inner.value());
    }
    Ok(total.value())
}

/// `E[Z_n]` by convolution in exact rational arithmetic.
pub fn expected_exact_rational(n: usize, bound: u64, nu: usize) -> Result<BigRational> {
    check_nu(nu)?;
    if n == 0 || bound == 0 {
        return Err(Error::InvalidInput("n and M must be positive".into()));
    }
    check_composition_budget(n, nu)?;
    let comps = compositions(n, nu);
    if comps.is_empty() {
        return Ok(BigRational::zero());
    }
    let table = sum_dist_exact(n + 1 - nu, bound)?;
    let fact = factorials(n);
    let mut numer = BigUint::zero();
    for c in &comps {
        let lo = *c.iter().max().unwrap();
        let hi = c.iter().min().unwrap() * bound as usize;
        let mut inner = BigUint::zero();
        for t in lo..=hi {
            inner += c
                .iter()
                .map(|&k| table.ways(k, t as u64))
                .fold(BigUint::from(1u32), |a, b| a * b);
        }
        numer += multinomial(&fact, c) * inner;
    }
    Ok(BigRational::new(
        numer.into(),
        BigUint::from(bound).pow(n as u32).into(),
    ))
}

/// `(E[Z_n], E[Z_n^2])` averaged over all `M^n` instances with `count_brute`.
pub fn brute_moments(n: usize, bound: u64, nu: usize) -> Result<(BigRational, BigRational)> {
    check_nu(nu)?;
    if n == 0 || bound == 0 {
        return Err(Error::InvalidInput("n and M must be positive".into()));
    }
    let space = saturating_pow(bound as u128, n as u32);
    if space > INSTANCE_ENUMERATION_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "instance enumeration M^n",
            required: space,
            limit: INSTANCE_ENUMERATION_LIMIT,
        });
    }
    let (s1, s2) = (0..space as u64)
        .into_par_iter()
        .map(|index| {
            let mut rest = index;
            let values = (0..n)
                .map(|_| {
                    let v = rest % bound + 1;
                    rest /= bound;
                    v
                })
                .collect();
            let inst = Instance::new(values, bound)?;
            let z: u128 = count_brute(&inst, nu)?
                .z
                .to_u128()
                .expect("brute-force counts fit in u128");
            Ok((z, z * z))
        })
        .try_reduce(|| (0u128, 0u128), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let denom: num_bigint::BigInt = BigUint::from(space).into();
    Ok((
        BigRational::new(s1.into(), denom.clone()),
        BigRational::new(s2.into(), denom),
    ))
}

pub fn expected_bruteforce(n: usize, bound: u64, nu: usize) -> Result<BigRational> {
    brute_moments(n, bound, nu).map(|m| m.0)
}

pub fn second_moment_bruteforce(n: usize, bound: u64, nu: usize) -> Result<BigRational> {
    brute_moments(n, bound, nu).map(|m| m.1)
}

/// `c_M = E[X^2] / M^2 = (M + 1)(2M + 1) / (6 M^2)`.
pub fn c_m(bound: u64) -> f64 {
    let m = bound as f64;
    (m + 1.0) * (2.0 * m + 1.0) / (6.0 * m * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticMean {
    /// Natural log of the leading-order expression for `E[Z_n]`.
    pub ln_value: f64,
    pub c_m: f64,
    /// Set for `nu = 2`, where the expansion was not established.
    pub outside_theorem_range: bool,
}

/// `ln[ nu^n / M^(nu-1) * nu^(nu-3/2) / (2 pi nu c_M n)^((nu-1)/2) ]`.
pub fn expected_asymptotic(n: usize, bound: u64, nu: usize) -> Result<AsymptoticMean> {
    check_nu(nu)?;
    if n == 0 || bound == 0 {
        return Err(Error::InvalidInput("n and M must be positive".into()));
    }
    let (n_f, m_f, v) = (n as f64, bound as f64, nu as f64);
    let c = c_m(bound);
    let ln_value = n_f * v.ln() - (v - 1.0) * m_f.ln() + (v - 1.5) * v.ln()
        - 0.5 * (v - 1.0) * (2.0 * std::f64::consts::PI * v * c * n_f).ln();
    Ok(AsymptoticMean {
        ln_value,
        c_m: c,
        outside_theorem_range: nu < 3,
    })
}

/// `f_nu(eta) = exp((nu - 1) eta) / (nu e eta)`.
pub fn f_nu(eta: f64, nu: usize) -> f64 {
    let v = nu as f64;
    ((v - 1.0) * eta).exp() / (v * std::f64::consts::E * eta)
}

/// Bracket `(1/(nu-1), 2 ln nu / (nu-1))` holding the larger root of `f_nu = 1`.
pub fn eta_bracket(nu: usize) -> (f64, f64) {
    let v = nu as f64;
    (1.0 / (v - 1.0), 2.0 * v.ln() / (v - 1.0))
}

/// Larger root of `f_nu(eta) = 1` by bisection.
pub fn eta(nu: usize, tol: f64) -> Result<f64> {
    if nu <= 3 {
        return Err(Error::Domain(format!(
            "eta(nu) is defined for nu >= 4, got {nu}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (mut lo, mut hi) = eta_bracket(nu);
    let g = |x: f64| f_nu(x, nu) - 1.0;
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    let (left, right) = (lo, hi);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm.abs() <= tol {
            return Ok(mid);
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    if g(best).abs() <= tol && best > left && best < right {
        Ok(best)
    } else {
        Err(Error::Domain(format!(
            "bisection stalled at {best} with |f - 1| = {:e} > {tol:e}",
            g(best).abs()
        )))
    }
}

pub const ETA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub nu: usize,
    /// Below `2 / ln nu` the expected count vanishes.
    pub kappa_exist: f64,
    pub eta: Option<f64>,
    /// Above this (minus the excluded points) the expected count is exponential.
    pub kappa_mean_lo: f64,
    /// Boundary points where the behaviour of the mean is unresolved.
    pub kappa_excluded: Vec<f64>,
    /// Above this the count is exponentially large with positive probability.
    pub kappa_second: f64,
}

pub fn thresholds(nu: usize) -> Result<ThresholdSet> {
    if nu < 3 {
        return Err(Error::Domain(format!(
            "thresholds are defined for nu >= 3, got {nu}"
        )));
    }
    let v = nu as f64;
    let kappa_exist = 2.0 / v.ln();
    let eta = if nu >= 4 {
        Some(eta(nu, ETA_TOL)?)
    } else {
        None
    };
    let kappa_mean_lo = match eta {
        Some(e) => 2.0 / e,
        None => 2.0 / 3f64.ln(),
    };
    let mut kappa_excluded = vec![2.0 * (v - 1.0)];
    if nu == 3 {
        kappa_excluded.push(2.0);
    }
    let kappa_second = 2.0 * (v - 1.0) / (1.0 / (1.0 - 2.0 / (v * v))).ln();
    Ok(ThresholdSet {
        nu,
        kappa_exist,
        eta,
        kappa_mean_lo,
        kappa_excluded,
        kappa_second,
    })
}

/// One-sided lower bound `(1 - delta)^2 / ((1 - delta)^2 + nu^2)` on
/// `P(Z_n >= delta E[Z_n])` when `E[Z_n^2] <= (1 + o(1)) nu^2 E[Z_n]^2`.
pub fn cantelli_bound(delta: f64, nu: usize) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let a = (1.0 - delta) * (1.0 - delta);
    let v = nu as f64;
    Ok(a / (a + v * v))
}

/// Summary emitted by the `expect` and `moment2` commands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct MomentReport {
    pub nu: usize,
    pub n: usize,
    pub M: u64,
    pub c_M: f64,
    pub log_E_asymptotic: Option<f64>,
    pub asymptotic_outside_theorem_range: Option<bool>,
    pub E_exact: Option<f64>,
    /// Exact rational rendered as `p/q`.
    pub E_brute: Option<String>,
    pub E_brute_value: Option<f64>,
    pub E2_brute: Option<String>,
    pub E2_brute_value: Option<f64>,
    pub E_quadrature: Option<f64>,
    pub E2_quadrature: Option<f64>,
    /// `E_exact / exp(log_E_asymptotic)` when both are present.
    pub ratio: Option<f64>,
}

impl MomentReport {
    pub fn new(n: usize, bound: u64, nu: usize) -> Self {
        Self {
            nu,
            n,
            M: bound,
            c_M: c_m(bound),
            ..Default::default()
        }
    }

    pub fn fill_ratio(&mut self) {
        self.ratio = match (self.E_exact, self.log_E_asymptotic) {
            (Some(e), Some(l)) => Some(e / l.exp()),
            _ => None,
        };
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
