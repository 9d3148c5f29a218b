//! Instances, assignments and the perfectness predicate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Xoshiro256StarStar;

/// A multiset `X_1..X_n` of integers in `1..=bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    values: Vec<u64>,
    bound: u64,
}

impl Instance {
    pub fn new(values: Vec<u64>, bound: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput(
                "instance must have at least one item".into(),
            ));
        }
        if bound == 0 {
            return Err(Error::InvalidInput("value bound must be positive".into()));
        }
        if let Some(v) = values.iter().find(|&&v| v == 0 || v > bound) {
            return Err(Error::InvalidInput(format!(
                "value {v} outside [1, {bound}]"
            )));
        }
        (values.len() as u64)
            .checked_mul(bound)
            .ok_or_else(|| Error::InvalidInput("n * M overflows 64 bits".into()))?;
        Ok(Self { values, bound })
    }

    /// Instance whose bound is the largest value present.
    pub fn from_values(values: Vec<u64>) -> Result<Self> {
        let bound = values.iter().copied().max().unwrap_or(0);
        Self::new(values, bound)
    }

    /// `n` values uniform on `1..=bound`, drawn from stream 0 of `seed`.
    pub fn generate(n: usize, bound: u64, seed: u64) -> Result<Self> {
        Self::generate_stream(n, bound, seed, 0)
    }

    pub fn generate_stream(n: usize, bound: u64, seed: u64, stream: u64) -> Result<Self> {
        if n == 0 || bound == 0 {
            return Err(Error::InvalidInput("n and M must be positive".into()));
        }
        let mut rng = Xoshiro256StarStar::stream(seed, stream);
        let values = (0..n).map(|_| rng.uniform_inclusive(bound)).collect();
        Self::new(values, bound)
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }

    /// Every value multiplied by `factor`, with the bound scaled alike.
    pub fn scaled(&self, factor: u64) -> Result<Self> {
        let bound = self
            .bound
            .checked_mul(factor)
            .ok_or_else(|| Error::InvalidInput("scaled bound overflows".into()))?;
        Self::new(self.values.iter().map(|v| v * factor).collect(), bound)
    }
}

/// `gen_instance`: seeded uniform instance on `1..=bound`.
pub fn gen_instance(n: usize, bound: u64, seed: u64) -> Result<Instance> {
    Instance::generate(n, bound, seed)
}

/// `nu` and, when `M >= 2`, `kappa = n / ln M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub nu: usize,
    pub kappa: Option<f64>,
}

impl ProblemParams {
    pub fn new(nu: usize, n: usize, bound: u64) -> Result<Self> {
        check_nu(nu)?;
        Ok(Self {
            nu,
            kappa: kappa_of(n, bound),
        })
    }
}

pub fn kappa_of(n: usize, bound: u64) -> Option<f64> {
    (bound >= 2).then(|| n as f64 / (bound as f64).ln())
}

pub(crate) fn check_nu(nu: usize) -> Result<()> {
    if nu < 2 {
        return Err(Error::InvalidInput(format!(
            "nu must be at least 2, got {nu}"
        )));
    }
    Ok(())
}

/// Labels in `1..=nu`, one per item. Parts may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    labels: Vec<usize>,
    nu: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, nu: usize) -> Result<Self> {
        check_nu(nu)?;
        if let Some(l) = labels.iter().find(|&&l| l == 0 || l > nu) {
            return Err(Error::InvalidInput(format!("label {l} outside [1, {nu}]")));
        }
        Ok(Self { labels, nu })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn nu(&self) -> usize {
        self.nu
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumVector {
    pub sums: Vec<u64>,
    pub total: u64,
}

pub fn part_sums(inst: &Instance, a: &Assignment) -> Result<SumVector> {
    if a.labels.len() != inst.len() {
        return Err(Error::InvalidInput(format!(
            "assignment has {} labels for {} items",
            a.labels.len(),
            inst.len()
        )));
    }
    let mut sums = vec![0u64; a.nu];
    for (&v, &l) in inst.values.iter().zip(&a.labels) {
        sums[l - 1] += v;
    }
    Ok(SumVector {
        total: inst.total(),
        sums,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divisibility {
    pub total: u64,
    pub divisible: bool,
    pub target: Option<u64>,
}

pub fn divisibility_check(inst: &Instance, nu: usize) -> Result<Divisibility> {
    check_nu(nu)?;
    let total = inst.total();
    let divisible = total.is_multiple_of(nu as u64);
    Ok(Divisibility {
        total,
        divisible,
        target: divisible.then(|| total / nu as u64),
    })
}

/// True iff every part sum equals `S / nu` and no part is empty.
pub fn is_perfect(inst: &Instance, nu: usize, a: &Assignment) -> Result<bool> {
    if a.nu != nu {
        return Err(Error::InvalidInput(format!(
            "assignment built for nu = {}, asked about nu = {nu}",
            a.nu
        )));
    }
    let sv = part_sums(inst, a)?;
    let mut occupied = vec![false; nu];
    for &l in &a.labels {
        occupied[l - 1] = true;
    }
    // nu * Y_alpha - S == 0 for every part
    let balanced = sv.sums.iter().all(|&y| y * nu as u64 == sv.total);
    Ok(balanced && occupied.iter().all(|&o| o))
}
