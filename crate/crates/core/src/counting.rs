//! Exact lattice-point counts over the four region kinds.
//!
//! The fast kernel iterates the first `d - 1` coordinate magnitudes inside
//! their axis bounds, prunes a prefix as soon as its certified partial sum
//! exceeds 1, and closes the last coordinate analytically: the largest
//! admissible magnitude is located with certified comparisons (sliding
//! monotonically along each innermost row), escalating to exact rational
//! arithmetic only when a float enclosure straddles the boundary. Counts
//! are therefore exact, and the brute-force oracle enumerates the whole
//! bounding box point by point as an independent cross-check.
//!
//! Axes are reordered so the largest `a_j t` is the analytically closed
//! one, which minimizes the outer iteration count. Parallel runs split the
//! outermost coordinate; partial counts are exact integers combined by
//! addition, so results do not depend on the thread count.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::certify::{self, Certified, Interval};
use crate::domain::{Exponents, StretchFactors};
use crate::error::{Error, Result};

/// Guard on the brute-force bounding-box size.
pub const BRUTE_FORCE_GUARD: u128 = 100_000_000;

/// Which lattice points of the stretched dilated domain are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// All of `Z^d` inside `t A D`.
    Full,
    /// Points with every coordinate `>= 1`.
    Positive,
    /// Points with every coordinate `>= 0`.
    Nonnegative,
    /// Points of `t A D` lying on at least one coordinate hyperplane.
    HyperplaneUnion,
}

impl RegionKind {
    pub const ALL: [RegionKind; 4] = [
        RegionKind::Full,
        RegionKind::Positive,
        RegionKind::Nonnegative,
        RegionKind::HyperplaneUnion,
    ];
}

/// An exact count with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeCount {
    pub region: RegionKind,
    pub t: f64,
    pub factors: StretchFactors,
    pub count: u64,
    /// Number of boundary-uncertain comparisons resolved exactly.
    pub boundary_escalations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Full,
    Positive,
    Nonnegative,
}

impl Mode {
    fn start(self) -> u64 {
        match self {
            Mode::Positive => 1,
            _ => 0,
        }
    }

    /// Multiplicity of an outer magnitude: sign symmetry doubles nonzero
    /// magnitudes in the full region.
    fn outer_weight(self, v: u64) -> u128 {
        match self {
            Mode::Full if v > 0 => 2,
            _ => 1,
        }
    }

    /// Points contributed by the closed axis when the largest admissible
    /// magnitude is `m`.
    fn closed_contribution(self, m: u64) -> u128 {
        match self {
            Mode::Full => 2 * m as u128 + 1,
            Mode::Positive => m as u128,
            Mode::Nonnegative => m as u128 + 1,
        }
    }
}

struct AxisTable {
    bound: u64,
    terms: Vec<Interval>,
}

/// Largest integer magnitude admissible on one axis: `max { v : v <= a t }`
/// with the comparison certified (exact rational fallback at ties).
fn axis_bound(factor: f64, t: f64) -> u64 {
    let le_scale = |v: u64| -> bool {
        let den = certify::scale_interval(factor, t);
        let vf = v as f64;
        if vf <= den.lo {
            true
        } else if vf > den.hi {
            false
        } else {
            certify::exact_sum_cmp_one(&[2], &[factor], t, &[v as i64]) != Ordering::Greater
        }
    };
    let mut bound = (factor * t).floor().max(0.0) as u64;
    while le_scale(bound + 1) {
        bound += 1;
    }
    while bound > 0 && !le_scale(bound) {
        bound -= 1;
    }
    bound
}

fn build_axis(omega: u32, factor: f64, t: f64) -> AxisTable {
    let bound = axis_bound(factor, t);
    let den = certify::scale_interval(factor, t);
    let terms = (0..=bound)
        .map(|v| certify::term_interval(v, den, omega))
        .collect();
    AxisTable { bound, terms }
}

struct Counter {
    axes: Vec<AxisTable>,
    omegas: Vec<u32>,
    factors: Vec<f64>,
    t: f64,
    mode: Mode,
}

impl Counter {
    /// Builds the kernel with axes sorted so the largest `a_j t` is last.
    fn new(omegas: &[u32], factors: &[f64], t: f64, mode: Mode) -> Self {
        let mut order: Vec<usize> = (0..omegas.len()).collect();
        order.sort_by(|&i, &j| (factors[i] * t).total_cmp(&(factors[j] * t)));
        let omegas: Vec<u32> = order.iter().map(|&i| omegas[i]).collect();
        let factors: Vec<f64> = order.iter().map(|&i| factors[i]).collect();
        let axes = omegas
            .iter()
            .zip(&factors)
            .map(|(&w, &a)| build_axis(w, a, t))
            .collect();
        Counter {
            axes,
            omegas,
            factors,
            t,
            mode,
        }
    }

    fn decide_inside(&self, sum: Interval, point: &mut Vec<i64>, v: i64, escalations: &mut u64) -> bool {
        match certify::interval_leq_one(sum) {
            Certified::True => true,
            Certified::False => false,
            Certified::Uncertain => {
                *escalations += 1;
                point.push(v);
                let inside =
                    certify::exact_sum_cmp_one(&self.omegas, &self.factors, self.t, point)
                        != Ordering::Greater;
                point.pop();
                inside
            }
        }
    }

    /// Largest magnitude on the closed axis admissible after `prefix`, or
    /// `None` when even 0 falls outside. `hint` is a certified upper bound
    /// from the previous (smaller-sum) row.
    fn closed_max(
        &self,
        s: Interval,
        prefix: &mut Vec<i64>,
        hint: u64,
        escalations: &mut u64,
    ) -> Option<u64> {
        let last = self.axes.last().expect("at least one axis");
        let mut v = hint.min(last.bound) as i64;
        while v >= 0 {
            let sum = s.add(last.terms[v as usize]);
            if self.decide_inside(sum, prefix, v, escalations) {
                return Some(v as u64);
            }
            v -= 1;
        }
        None
    }

    /// Counts the subtree rooted at outer axis `level` given the certified
    /// prefix sum `s`.
    fn count_outer(
        &self,
        level: usize,
        s: Interval,
        prefix: &mut Vec<i64>,
        escalations: &mut u64,
    ) -> u128 {
        let d = self.axes.len();
        let axis = &self.axes[level];
        let mut total: u128 = 0;
        if level == d - 2 {
            let mut hint = self.axes[d - 1].bound;
            for v in self.mode.start()..=axis.bound {
                let s2 = s.add(axis.terms[v as usize]);
                if s2.lo > 1.0 {
                    break;
                }
                prefix.push(v as i64);
                let closed = self.closed_max(s2, prefix, hint, escalations);
                prefix.pop();
                match closed {
                    Some(m) => {
                        hint = m;
                        total += self.mode.outer_weight(v) * self.mode.closed_contribution(m);
                    }
                    None => break,
                }
            }
        } else {
            for v in self.mode.start()..=axis.bound {
                let s2 = s.add(axis.terms[v as usize]);
                if s2.lo > 1.0 {
                    break;
                }
                prefix.push(v as i64);
                let sub = self.count_outer(level + 1, s2, prefix, escalations);
                prefix.pop();
                total += self.mode.outer_weight(v) * sub;
            }
        }
        total
    }

    /// Per-value task at the outermost axis; identical arithmetic whether
    /// driven sequentially or in parallel.
    fn outermost_task(&self, v: u64) -> (u128, u64) {
        let s = self.axes[0].terms[v as usize];
        let mut prefix = vec![v as i64];
        let mut escalations = 0;
        let sub = self.count_outer(1, s, &mut prefix, &mut escalations);
        (self.mode.outer_weight(v) * sub, escalations)
    }

    fn run(&self) -> (u128, u64) {
        let d = self.axes.len();
        match d {
            0 => (1, 0), // the empty point: the origin of the 0-dim domain
            1 => {
                let mut escalations = 0;
                let mut prefix = Vec::new();
                let bound = self.axes[0].bound;
                match self.closed_max(Interval::ZERO, &mut prefix, bound, &mut escalations) {
                    Some(m) => (self.mode.closed_contribution(m), escalations),
                    None => (0, escalations),
                }
            }
            2 => {
                // the outermost axis is also the innermost row: keep the
                // sliding state sequential so escalation tallies do not
                // depend on scheduling
                let mut escalations = 0;
                let mut prefix = Vec::new();
                let total = self.count_outer(0, Interval::ZERO, &mut prefix, &mut escalations);
                (total, escalations)
            }
            _ => {
                let values: Vec<u64> = (self.mode.start()..=self.axes[0].bound).collect();
                let combine = |a: (u128, u64), b: (u128, u64)| (a.0 + b.0, a.1 + b.1);
                if values.len() >= 16 {
                    values
                        .par_iter()
                        .map(|&v| self.outermost_task(v))
                        .reduce(|| (0, 0), combine)
                } else {
                    values
                        .iter()
                        .map(|&v| self.outermost_task(v))
                        .fold((0, 0), combine)
                }
            }
        }
    }
}

fn orthant_count(omegas: &[u32], factors: &[f64], t: f64, mode: Mode) -> (u128, u64) {
    Counter::new(omegas, factors, t, mode).run()
}

fn union_count(omegas: &[u32], factors: &[f64], t: f64) -> Result<(u128, u64)> {
    let d = omegas.len();
    let mut total: i128 = 0;
    let mut escalations = 0;
    // exact inclusion-exclusion over all nonempty sets of axes pinned to 0
    for mask in 1u32..(1 << d) {
        let mut sub_omegas = Vec::with_capacity(d);
        let mut sub_factors = Vec::with_capacity(d);
        for j in 0..d {
            if mask & (1 << j) == 0 {
                sub_omegas.push(omegas[j]);
                sub_factors.push(factors[j]);
            }
        }
        let (sub, esc) = orthant_count(&sub_omegas, &sub_factors, t, Mode::Full);
        let signed = i128::try_from(sub).map_err(|_| Error::CountOverflow)?;
        if mask.count_ones() % 2 == 1 {
            total += signed;
        } else {
            total -= signed;
        }
        escalations += esc;
    }
    debug_assert!(total >= 0);
    Ok((total as u128, escalations))
}

fn validate_count_inputs(exponents: &Exponents, factors: &StretchFactors, t: f64) -> Result<()> {
    if factors.dim() != exponents.dim() {
        return Err(Error::DimensionMismatch {
            expected: exponents.dim(),
            got: factors.dim(),
        });
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dilation t must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

/// Exact cardinality of the requested region of `t A D`.
pub fn count(
    exponents: &Exponents,
    factors: &StretchFactors,
    t: f64,
    region: RegionKind,
) -> Result<LatticeCount> {
    validate_count_inputs(exponents, factors, t)?;
    let omegas = exponents.omegas();
    let a = factors.factors();
    let (raw, boundary_escalations) = match region {
        RegionKind::Full => orthant_count(omegas, a, t, Mode::Full),
        RegionKind::Positive => orthant_count(omegas, a, t, Mode::Positive),
        RegionKind::Nonnegative => orthant_count(omegas, a, t, Mode::Nonnegative),
        RegionKind::HyperplaneUnion => union_count(omegas, a, t)?,
    };
    let count = u64::try_from(raw).map_err(|_| Error::CountOverflow)?;
    Ok(LatticeCount {
        region,
        t,
        factors: factors.clone(),
        count,
        boundary_escalations,
    })
}

/// Independent oracle: enumerates the whole bounding box and tests each
/// point with the certified membership decision.
pub fn brute_force_count(
    exponents: &Exponents,
    factors: &StretchFactors,
    t: f64,
    region: RegionKind,
) -> Result<LatticeCount> {
    validate_count_inputs(exponents, factors, t)?;
    let omegas = exponents.omegas();
    let a = factors.factors();
    let d = exponents.dim();
    let bounds: Vec<u64> = a.iter().map(|&aj| axis_bound(aj, t)).collect();
    let ranges: Vec<(i64, i64)> = bounds
        .iter()
        .map(|&b| match region {
            RegionKind::Full | RegionKind::HyperplaneUnion => (-(b as i64), b as i64),
            RegionKind::Positive => (1, b as i64),
            RegionKind::Nonnegative => (0, b as i64),
        })
        .collect();
    let mut box_size: u128 = 1;
    for &(lo, hi) in &ranges {
        let width = if hi < lo { 0 } else { (hi - lo + 1) as u128 };
        box_size = box_size.saturating_mul(width);
    }
    if box_size > BRUTE_FORCE_GUARD {
        return Err(Error::GuardExceeded {
            estimate: box_size,
            limit: BRUTE_FORCE_GUARD,
        });
    }

    let mut total: u128 = 0;
    let mut escalations = 0;
    if box_size > 0 {
        let mut k: Vec<i64> = ranges.iter().map(|&(lo, _)| lo).collect();
        'scan: loop {
            let counted = match region {
                RegionKind::HyperplaneUnion => k.contains(&0),
                _ => true,
            };
            if counted && certify::decide_inside(omegas, a, t, &k, &mut escalations) {
                total += 1;
            }
            let mut i = 0;
            loop {
                k[i] += 1;
                if k[i] <= ranges[i].1 {
                    break;
                }
                k[i] = ranges[i].0;
                i += 1;
                if i == d {
                    break 'scan;
                }
            }
        }
    }
    Ok(LatticeCount {
        region,
        t,
        factors: factors.clone(),
        count: u64::try_from(total).map_err(|_| Error::CountOverflow)?,
        boundary_escalations: escalations,
    })
}

/// Checks the exact symmetry decomposition
/// `count(full) = 2^d count(positive) + count(hyperplane_union)`.
pub fn symmetry_decomposition_check(
    exponents: &Exponents,
    factors: &StretchFactors,
    t: f64,
) -> Result<bool> {
    let full = count(exponents, factors, t, RegionKind::Full)?.count as u128;
    let positive = count(exponents, factors, t, RegionKind::Positive)?.count as u128;
    let union = count(exponents, factors, t, RegionKind::HyperplaneUnion)?.count as u128;
    let d = exponents.dim() as u32;
    Ok(full == (1u128 << d) * positive + union)
}
