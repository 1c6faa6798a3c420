//! Exact lattice-point counting in stretched superellipsoidal domains
//! `{x : x_1^{w_1} + ... + x_d^{w_d} <= 1}` (even exponents), closed-form
//! Gamma-function measures, optimal volume-preserving stretching factors,
//! and empirical verification of the two-term count bounds and the decay
//! of optimal factors toward the balanced shape.
//!
//! Module map:
//!
//! - [`domain`]: exponents, determinant-one stretches, certified
//!   membership, balanced factors, and the theoretical decay exponent.
//! - [`measure`]: octant/full volumes, section measures, and the parallel
//!   section function.
//! - [`counting`]: the exact counting kernel for the four region kinds and
//!   its brute-force oracle.
//! - [`asymptotics`]: two-term predictions, error budgets, empirical bound
//!   constants, and the balanced-product lemma.
//! - [`optimizer`]: deterministic nested grid search over determinant-one
//!   stretches.
//! - [`sweep`]: dilation sweeps, log-log rate fits, and CSV/JSON/SVG
//!   emission.
//! - [`quadrature`]: independent Gauss-Kronrod and Monte Carlo oracles.
//!
//! All types are immutable values and all operations are pure functions;
//! parallel paths reduce with exact integer sums or ordered selections, so
//! results are identical for any worker-thread count.

pub mod asymptotics;
mod certify;
pub mod counting;
pub mod domain;
pub mod error;
pub mod measure;
pub mod optimizer;
pub mod quadrature;
pub mod rational;
pub mod sweep;

pub use counting::{brute_force_count, count, symmetry_decomposition_check, LatticeCount, RegionKind};
pub use domain::{
    balanced_factors, contains, gamma_rate, membership, seeded_det1_factors, Exponents,
    LatticePoint, Membership, StretchFactors,
};
pub use error::{Error, Result};
pub use measure::{measure_table, octant_volume, parallel_section, MeasureTable};
pub use optimizer::{evaluate_objective, optimize, Objective, OptimizationResult, SearchConfig};
pub use rational::Rational;
pub use sweep::{emit, fit_rate, log_space, run_sweep, EmitFormat, RateFit, SweepRecord};
