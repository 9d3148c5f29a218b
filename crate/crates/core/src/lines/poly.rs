//! Dense univariate polynomials with exact integer coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GfPoly {
    coeffs: Vec<BigInt>,
}

impl GfPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0)
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = BigInt::one();
        Self { coeffs }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// `[z^k] self`.
    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact quotient by `1 - z^step`; fails if the division leaves a remainder.
    pub fn div_one_minus(&self, step: usize) -> Result<Self> {
        assert!(step >= 1);
        if self.is_zero() {
            return Ok(Self::zero());
        }
        // q (1 - z^s) = p  =>  q_k = p_k + q_{k-s}
        let deg = self.coeffs.len() - 1;
        if deg < step {
            return Err(Error::InternalMismatch(format!(
                "polynomial of degree {deg} not divisible by 1 - z^{step}"
            )));
        }
        let qlen = deg + 1 - step;
        let mut q: Vec<BigInt> = Vec::with_capacity(qlen);
        for k in 0..qlen {
            let mut c = self.coeffs[k].clone();
            if k >= step {
                c += &q[k - step];
            }
            q.push(c);
        }
        let quotient = Self::new(q);
        let back = &quotient - &(&quotient * &Self::monomial(step));
        if &back != self {
            return Err(Error::InternalMismatch(format!(
                "polynomial not divisible by 1 - z^{step}"
            )));
        }
        Ok(quotient)
    }

    /// Horner evaluation in double precision.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| {
                acc * z + c.to_f64().unwrap_or(f64::NAN)
            })
    }

    /// `sum_{alpha >= 0} [z^(alpha nu)] self` by summing coefficients.
    pub fn multisection_direct(&self, nu: usize) -> BigInt {
        self.coeffs.iter().step_by(nu).sum()
    }

    /// `(1/nu) sum_j self(exp(2 pi i j / nu))`.
    pub fn multisection_roots(&self, nu: usize) -> Complex64 {
        let total: Complex64 = (0..nu)
            .map(|j| {
                let angle = 2.0 * std::f64::consts::PI * j as f64 / nu as f64;
                self.eval_complex(Complex64::from_polar(1.0, angle))
            })
            .sum();
        total / nu as f64
    }
}

/// Sum of the coefficients at exponents divisible by `nu`, computed by direct
/// summation and by evaluation at the `nu`-th roots of unity. The two must
/// agree after rounding the complex value.
pub fn roots_of_unity_filter(poly: &GfPoly, nu: usize) -> Result<BigInt> {
    if nu == 0 {
        return Err(Error::Domain("filter modulus must be positive".into()));
    }
    let direct = poly.multisection_direct(nu);
    let via_roots = poly.multisection_roots(nu);
    let rounded = via_roots.re.round();
    let distance = Complex64::new(via_roots.re - rounded, via_roots.im).norm();
    let matches = rounded
        .to_i128()
        .map(BigInt::from)
        .is_some_and(|r| r == direct);
    if !matches || distance > 1e-6 {
        return Err(Error::InternalMismatch(format!(
            "roots-of-unity filter mod {nu}: direct {direct}, roots {via_roots}"
        )));
    }
    Ok(direct)
}

impl Add for &GfPoly {
    type Output = GfPoly;

    fn add(self, rhs: &GfPoly) -> GfPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        GfPoly::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &GfPoly {
    type Output = GfPoly;

    fn sub(self, rhs: &GfPoly) -> GfPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        GfPoly::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &GfPoly {
    type Output = GfPoly;

    fn mul(self, rhs: &GfPoly) -> GfPoly {
        if self.is_zero() || rhs.is_zero() {
            return GfPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        GfPoly::new(out)
    }
}

impl Neg for &GfPoly {
    type Output = GfPoly;

    fn neg(self) -> GfPoly {
        GfPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// `(z^lo - z^hi) / (1 - z)` as an exact polynomial, for `lo <= hi`.
pub(crate) fn ratio_over_one_minus(lo: usize, hi: usize) -> Result<GfPoly> {
    if lo == hi {
        return Ok(GfPoly::zero());
    }
    let numer = &GfPoly::monomial(lo) - &GfPoly::monomial(hi);
    let shifted = numer.coeffs[lo..].to_vec();
    let q = GfPoly::new(shifted).div_one_minus(1)?;
    Ok(&q * &GfPoly::monomial(lo))
}
