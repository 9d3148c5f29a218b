//! Perfect multiway partitions of random integers.
//!
//! An instance is a list of integers `X_1..X_n` drawn uniformly from `1..=M`.
//! An ordered partition of the items into `nu` labelled parts is *perfect*
//! when every part has the same sum. This crate provides
//!
//! - the problem model and a portable seeded instance generator ([`problem`], [`rng`]),
//! - exact counters and an existence solver ([`counting`]),
//! - exact and asymptotic moments of the perfect-partition count, the
//!   threshold constants of the phase diagram and the root `eta(nu)` ([`moments`]),
//! - Nyquist-exact trapezoidal quadrature of the torus integral
//!   representations of the first two moments ([`torus`]),
//! - enumeration and generating-function accounting of the lattice lines on
//!   which the torus integrand peaks ([`lines`]),
//! - a seeded Monte Carlo sweep across `kappa = n / ln M` with CSV/JSON output
//!   ([`harness`]).

pub mod counting;
pub mod error;
pub mod harness;
pub mod lines;
pub mod moments;
mod numeric;
pub mod problem;
pub mod rng;
pub mod torus;

pub use error::{Error, Result};
pub use problem::{Assignment, Divisibility, Instance, SumVector};
