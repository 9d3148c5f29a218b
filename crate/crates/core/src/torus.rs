//! Trapezoidal evaluation of the torus integrals for `E[Z_n]` and `E[Z_n^2]`.
//!
//! With `y_alpha(x) = nu x_alpha - sum_beta x_beta` and
//! `phi(y) = E[exp(i y X)]`,
//!
//! ```text
//! E[Z_n]   = (2 pi)^-nu  ∫ (sum_alpha phi(y_alpha(x)))^n dx
//! E[Z_n^2] = (2 pi)^-2nu ∫∫ (sum_{alpha,beta} phi(y_alpha(x) - y_beta(x')))^n dx dx'
//! ```
//!
//! Both integrands are trigonometric polynomials whose frequency in every
//! coordinate lies in `[-(nu-1) n M, (nu-1) n M]`, so the `P`-point
//! trapezoidal rule per coordinate is exact once `P > (nu-1) n M`. The
//! default grid is `P = 2 n (nu-1) M + 1`.
//!
//! On the grid `x_alpha = -pi + 2 pi j_alpha / P` every `y_alpha` equals
//! `2 pi m_alpha / P` with the integer `m_alpha = nu j_alpha - sum j`, so
//! `phi` is tabulated once over residues mod `P` and the grid is folded into
//! a histogram of residue vectors before summing. This only regroups terms of
//! the same trapezoidal sum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{saturating_pow, ComplexSum};
use crate::problem::check_nu;

/// Limit on `P^nu` grid points visited when building the residue histogram.
pub const GRID_BUDGET: u128 = 200_000_000;
/// Limit on histogram pairs visited by the second-moment sum.
pub const PAIR_BUDGET: u128 = 2_000_000_000;

const SINGULAR_EPS: f64 = 1e-6;

/// A point of `[-pi, pi]^nu` with its derived `y` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TorusPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        check_nu(x.len())?;
        let nu = x.len() as f64;
        let sum: f64 = x.iter().sum();
        let y = x.iter().map(|&xa| nu * xa - sum).collect();
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn nu(&self) -> usize {
        self.x.len()
    }
}

/// `phi(y) = (1/M) sum_{j=1..M} exp(i y j)`.
pub fn phi(y: f64, bound: u64) -> Complex64 {
    assert!(bound >= 1, "M must be positive");
    let m = bound as f64;
    let half = 0.5 * y;
    let denom = half.sin();
    if Complex64::new(1.0 - y.cos(), -y.sin()).norm() < SINGULAR_EPS {
        let mut acc = ComplexSum::default();
        for j in 1..=bound {
            acc.add(Complex64::from_polar(1.0, y * j as f64));
        }
        return acc.value() / m;
    }
    // e^{iy(M+1)/2} sin(My/2) / (M sin(y/2))
    let modulus = (m * half).sin() / (m * denom);
    Complex64::from_polar(1.0, half * (m + 1.0)) * modulus
}

/// `E[f(x, X)] = sum_alpha phi(y_alpha(x))`.
pub fn f_expect(point: &TorusPoint, bound: u64) -> Complex64 {
    point.y.iter().map(|&y| phi(y, bound)).sum()
}

/// Grid size at which the trapezoidal rule is exact: `2 n (nu-1) M + 1`.
pub fn nyquist_grid(n: usize, bound: u64, nu: usize) -> u64 {
    2 * n as u64 * (nu as u64 - 1) * bound + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    /// Real part of the trapezoidal sum.
    pub value: f64,
    /// Imaginary part; zero up to rounding for the exact integral.
    pub imag: f64,
    pub grid: u64,
    /// True when `grid` is at least the exactness bound.
    pub exact: bool,
}

fn phi_table(grid: u64, bound: u64) -> Vec<Complex64> {
    (0..grid)
        .map(|m| phi(2.0 * PI * m as f64 / grid as f64, bound))
        .collect()
}

/// Multiplicity of each residue vector `(m_1..m_nu) mod P` over the `P^nu` grid.
fn residue_histogram(nu: usize, grid: u64) -> Result<Vec<(Vec<u32>, u64)>> {
    let points = saturating_pow(grid as u128, nu as u32);
    if points > GRID_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "quadrature grid P^nu",
            required: points,
            limit: GRID_BUDGET,
        });
    }
    let p = grid as i64;
    let mut hist: FxHashMap<Vec<u32>, u64> = FxHashMap::default();
    let mut j = vec![0i64; nu];
    let mut residues = vec![0u32; nu];
    for _ in 0..points {
        let sum: i64 = j.iter().sum();
        for (r, &ja) in residues.iter_mut().zip(&j) {
            *r = (nu as i64 * ja - sum).rem_euclid(p) as u32;
        }
        *hist.entry(residues.clone()).or_insert(0) += 1;
        for slot in j.iter_mut() {
            *slot += 1;
            if *slot < p {
                break;
            }
            *slot = 0;
        }
    }
    let mut out: Vec<_> = hist.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

fn check_args(n: usize, bound: u64, nu: usize, grid: u64) -> Result<()> {
    check_nu(nu)?;
    if n == 0 || bound == 0 {
        return Err(Error::InvalidInput("n and M must be positive".into()));
    }
    if grid == 0 || grid > u32::MAX as u64 {
        return Err(Error::InvalidInput(format!(
            "grid size {grid} out of range"
        )));
    }
    Ok(())
}

pub fn expected_via_quadrature(n: usize, bound: u64, nu: usize) -> Result<QuadratureResult> {
    check_nu(nu)?;
    expected_via_quadrature_with_grid(n, bound, nu, nyquist_grid(n, bound, nu))
}

pub fn expected_via_quadrature_with_grid(
    n: usize,
    bound: u64,
    nu: usize,
    grid: u64,
) -> Result<QuadratureResult> {
    check_args(n, bound, nu, grid)?;
    let table = phi_table(grid, bound);
    let hist = residue_histogram(nu, grid)?;
    // slabs in histogram order, reduced in the same order
    let partials: Vec<ComplexSum> = hist
        .par_chunks(1024)
        .map(|chunk| {
            let mut acc = ComplexSum::default();
            for (res, mult) in chunk {
                let f: Complex64 = res.iter().map(|&r| table[r as usize]).sum();
                acc.add(f.powu(n as u32) * *mult as f64);
            }
            acc
        })
        .collect();
    let mut total = ComplexSum::default();
    for p in &partials {
        total.merge(p);
    }
    let z = total.value() / saturating_pow(grid as u128, nu as u32) as f64;
    Ok(QuadratureResult {
        value: z.re,
        imag: z.im,
        grid,
        exact: grid >= nyquist_grid(n, bound, nu),
    })
}

pub fn second_moment_via_quadrature(n: usize, bound: u64, nu: usize) -> Result<QuadratureResult> {
    check_nu(nu)?;
    second_moment_via_quadrature_with_grid(n, bound, nu, nyquist_grid(n, bound, nu))
}

pub fn second_moment_via_quadrature_with_grid(
    n: usize,
    bound: u64,
    nu: usize,
    grid: u64,
) -> Result<QuadratureResult> {
    check_args(n, bound, nu, grid)?;
    let table = phi_table(grid, bound);
    let hist = residue_histogram(nu, grid)?;
    let pairs = (hist.len() as u128).saturating_mul(hist.len() as u128);
    if pairs > PAIR_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "second-moment residue pairs",
            required: pairs,
            limit: PAIR_BUDGET,
        });
    }
    let p = grid as i64;
    let partials: Vec<ComplexSum> = hist
        .par_iter()
        .map(|(u, wu)| {
            let mut acc = ComplexSum::default();
            for (v, wv) in &hist {
                let mut g = Complex64::new(0.0, 0.0);
                for &ua in u {
                    for &vb in v {
                        g += table[(ua as i64 - vb as i64).rem_euclid(p) as usize];
                    }
                }
                acc.add(g.powu(n as u32) * (*wu as f64 * *wv as f64));
            }
            acc
        })
        .collect();
    let mut total = ComplexSum::default();
    for part in &partials {
        total.merge(part);
    }
    let points = (grid as f64).powi(2 * nu as i32);
    let z = total.value() / points;
    Ok(QuadratureResult {
        value: z.re,
        imag: z.im,
        grid,
        exact: grid >= nyquist_grid(n, bound, nu),
    })
}

/// Unfolded trapezoidal sum over the full `P^nu` grid, evaluating `phi`
/// directly at every node. Used to check the folded evaluator.
pub fn expected_via_full_grid(n: usize, bound: u64, nu: usize, grid: u64) -> Result<Complex64> {
    check_args(n, bound, nu, grid)?;
    let points = saturating_pow(grid as u128, nu as u32);
    if points > GRID_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "quadrature grid P^nu",
            required: points,
            limit: GRID_BUDGET,
        });
    }
    let h = 2.0 * PI / grid as f64;
    let mut j = vec![0u64; nu];
    let mut acc = ComplexSum::default();
    for _ in 0..points {
        let x = j.iter().map(|&ja| -PI + h * ja as f64).collect();
        let pt = TorusPoint::new(x)?;
        acc.add(f_expect(&pt, bound).powu(n as u32));
        for slot in j.iter_mut() {
            *slot += 1;
            if *slot < grid {
                break;
            }
            *slot = 0;
        }
    }
    Ok(acc.value() / points as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn phi_examples() {
        for m in [1, 2, 5, 17] {
            assert!(close(phi(0.0, m), Complex64::new(1.0, 0.0), 1e-15));
            for k in [-3, 1, 2, 5] {
                assert!(close(
                    phi(2.0 * PI * k as f64, m),
                    Complex64::new(1.0, 0.0),
                    1e-9
                ));
            }
        }
        assert!(phi(PI, 2).norm() < 1e-15);
    }

    #[test]
    fn phi_matches_direct_sum() {
        for m in [1u64, 3, 10] {
            for i in 0..200 {
                let y = -7.0 + 0.0713 * i as f64;
                let direct: Complex64 = (1..=m)
                    .map(|j| Complex64::from_polar(1.0, y * j as f64))
                    .sum::<Complex64>()
                    / m as f64;
                assert!(close(phi(y, m), direct, 1e-12), "y={y} m={m}");
                assert!(phi(y, m).norm() <= 1.0 + 1e-12);
            }
        }
        // just outside the series-fallback window
        let y = 2e-6;
        let direct: Complex64 = (1..=4)
            .map(|j| Complex64::from_polar(1.0, y * j as f64))
            .sum::<Complex64>()
            / 4.0;
        assert!(close(phi(y, 4), direct, 1e-12));
    }

    #[test]
    fn torus_point_y_sums_to_zero() {
        let p = TorusPoint::new(vec![0.3, -2.0, 1.7, 3.1]).unwrap();
        assert!(p.y().iter().sum::<f64>().abs() < 1e-12);
        assert!(TorusPoint::new(vec![0.1]).is_err());
    }

    #[test]
    fn f_expect_peaks_on_lattice_lines() {
        let origin = TorusPoint::new(vec![0.0; 3]).unwrap();
        assert!(close(f_expect(&origin, 7), Complex64::new(3.0, 0.0), 1e-12));
        // line for k = (-2, 0, 2): x_alpha = (t + k_alpha pi) / 3
        let t = 0.4;
        let x = [-2.0, 0.0, 2.0]
            .iter()
            .map(|k| (t + k * PI) / 3.0)
            .collect();
        let on_line = TorusPoint::new(x).unwrap();
        assert!(close(f_expect(&on_line, 5), Complex64::new(3.0, 0.0), 1e-9));
        let off = TorusPoint::new(vec![0.3, -0.5, 1.1]).unwrap();
        assert!(f_expect(&off, 2).norm() < 3.0);
    }

    #[test]
    fn quadrature_examples() {
        let r = expected_via_quadrature(1, 1, 2).unwrap();
        assert!(r.value.abs() < 1e-12);
        let r = expected_via_quadrature(2, 2, 2).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!(r.exact);
        let r = expected_via_quadrature(3, 2, 3).unwrap();
        assert!((r.value - 1.5).abs() < 1e-10);
        assert!(r.imag.abs() < 1e-9);
    }

    #[test]
    fn second_moment_examples() {
        let r = second_moment_via_quadrature(2, 2, 2).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        let r = second_moment_via_quadrature(3, 1, 3).unwrap();
        assert!((r.value - 36.0).abs() < 1e-8);
    }

    #[test]
    fn folded_matches_unfolded_grid() {
        for (n, m, nu, p) in [(2, 2, 3, 9), (3, 2, 2, 13), (2, 3, 3, 7)] {
            let folded = expected_via_quadrature_with_grid(n, m, nu, p).unwrap();
            let full = expected_via_full_grid(n, m, nu, p).unwrap();
            assert!((folded.value - full.re).abs() < 1e-10);
            assert!((folded.imag - full.im).abs() < 1e-10);
        }
    }

    #[test]
    fn doubling_grid_changes_nothing() {
        let a = expected_via_quadrature(3, 3, 3).unwrap();
        let b = expected_via_quadrature_with_grid(3, 3, 3, 2 * a.grid).unwrap();
        assert!(((a.value - b.value) / a.value).abs() < 1e-10);
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let r = expected_via_quadrature_with_grid(3, 3, 3, 5).unwrap();
        assert!(!r.exact);
    }

    #[test]
    fn grid_budget() {
        assert!(matches!(
            expected_via_quadrature(40, 50, 4),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
