//! Certified floating-point enclosures with exact rational fallback.
//!
//! Lattice counting must decide `sum_j (k_j / (a_j t))^{omega_j} <= 1`
//! without ever mislabeling a point. Every intermediate value is kept as a
//! closed interval `[lo, hi]` that provably contains the real result: IEEE
//! operations are correctly rounded, so the true value lies strictly within
//! one ulp of the computed one, and stepping one ulp outward after each
//! operation yields a rigorous enclosure. When the enclosure of the sum
//! straddles 1 the comparison is escalated to exact rational arithmetic —
//! every finite `f64` is a dyadic rational, so the escalation always
//! terminates with a definitive answer.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Closed interval certified to contain a real value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    /// Encloses a value that is exactly representable.
    pub fn exact(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Sum of two enclosures, rounded outward.
    pub fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: widen_down(self.lo + rhs.lo),
            hi: widen_up(self.hi + rhs.hi),
        }
    }

    /// Product of two enclosures of nonnegative reals.
    pub fn mul_nonneg(self, rhs: Interval) -> Interval {
        let a = self.clamp_nonneg();
        let b = rhs.clamp_nonneg();
        Interval {
            lo: widen_down(a.lo * b.lo).max(0.0),
            hi: widen_up(a.hi * b.hi),
        }
    }

    /// Quotient of two enclosures, both of nonnegative reals with a
    /// strictly positive divisor.
    pub fn div_nonneg(self, rhs: Interval) -> Interval {
        debug_assert!(rhs.lo > 0.0);
        let a = self.clamp_nonneg();
        Interval {
            lo: widen_down(a.lo / rhs.hi).max(0.0),
            hi: widen_up(a.hi / rhs.lo),
        }
    }

    /// Integer power of an enclosure of a nonnegative real, by binary
    /// exponentiation with outward rounding at every step.
    pub fn powi_nonneg(self, n: u32) -> Interval {
        debug_assert!(n >= 1);
        let mut base = self.clamp_nonneg();
        let mut acc = Interval::exact(1.0);
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_nonneg(base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_nonneg(base);
            }
        }
        acc
    }

    /// Tightens a known-nonnegative enclosure whose lower end drifted
    /// below zero from outward rounding.
    fn clamp_nonneg(self) -> Interval {
        Interval {
            lo: self.lo.max(0.0),
            hi: self.hi,
        }
    }
}

fn widen_down(x: f64) -> f64 {
    x.next_down()
}

fn widen_up(x: f64) -> f64 {
    x.next_up()
}

/// Three-way outcome of an interval comparison against 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certified {
    True,
    False,
    Uncertain,
}

/// Compares an enclosed sum against 1.
pub fn interval_leq_one(sum: Interval) -> Certified {
    if sum.hi <= 1.0 {
        Certified::True
    } else if sum.lo > 1.0 {
        Certified::False
    } else {
        Certified::Uncertain
    }
}

/// Enclosure of `a * t` from two exact `f64` inputs.
pub fn scale_interval(a: f64, t: f64) -> Interval {
    Interval::exact(a).mul_nonneg(Interval::exact(t))
}

/// Enclosure of one membership term `(|k| / (a t))^omega`.
pub fn term_interval(k_abs: u64, denom: Interval, omega: u32) -> Interval {
    if k_abs == 0 {
        return Interval::ZERO;
    }
    Interval::exact(k_abs as f64).div_nonneg(denom).powi_nonneg(omega)
}

/// Enclosure of the full membership sum for a lattice point.
pub fn membership_sum(omegas: &[u32], factors: &[f64], t: f64, k: &[i64]) -> Interval {
    let mut sum = Interval::ZERO;
    for ((&omega, &a), &kj) in omegas.iter().zip(factors).zip(k) {
        if kj == 0 {
            continue;
        }
        sum = sum.add(term_interval(kj.unsigned_abs(), scale_interval(a, t), omega));
    }
    sum
}

/// Exact comparison of `sum_j (k_j / (a_j t))^{omega_j}` with 1, treating
/// the `f64` factors and dilation as the dyadic rationals they are.
pub fn exact_sum_cmp_one(omegas: &[u32], factors: &[f64], t: f64, k: &[i64]) -> Ordering {
    let t_rat = BigRational::from_float(t).expect("dilation is finite");
    let one = BigRational::one();
    let mut sum = BigRational::zero();
    for ((&omega, &a), &kj) in omegas.iter().zip(factors).zip(k) {
        if kj == 0 {
            continue;
        }
        let a_rat = BigRational::from_float(a).expect("factor is finite");
        let x = BigRational::from_integer(BigInt::from(kj.unsigned_abs())) / (a_rat * &t_rat);
        sum += rational_pow(&x, omega);
        if sum > one {
            return Ordering::Greater;
        }
    }
    sum.cmp(&one)
}

fn rational_pow(x: &BigRational, n: u32) -> BigRational {
    let mut base = x.clone();
    let mut acc = BigRational::one();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            let sq = &base * &base;
            base = sq;
        }
    }
    acc
}

/// Decides `point inside` exactly, escalating to rational arithmetic when
/// the float enclosure straddles the boundary. Bumps `escalations` on each
/// rational fallback.
pub fn decide_inside(
    omegas: &[u32],
    factors: &[f64],
    t: f64,
    k: &[i64],
    escalations: &mut u64,
) -> bool {
    match interval_leq_one(membership_sum(omegas, factors, t, k)) {
        Certified::True => true,
        Certified::False => false,
        Certified::Uncertain => {
            *escalations += 1;
            exact_sum_cmp_one(omegas, factors, t, k) != Ordering::Greater
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_add_encloses() {
        let a = Interval::exact(0.1);
        let b = Interval::exact(0.2);
        let s = a.add(b);
        assert!(s.lo <= 0.3 && 0.3 <= s.hi);
        assert!(s.hi - s.lo < 1e-15);
    }

    #[test]
    fn pow_encloses_true_value() {
        // (3/7)^4 straddled by the enclosure of the float route
        let x = Interval::exact(3.0).div_nonneg(Interval::exact(7.0));
        let p = x.powi_nonneg(4);
        let exact = 81.0 / 2401.0;
        assert!(p.lo <= exact && exact <= p.hi);
    }

    #[test]
    fn exact_comparison_on_boundary_point() {
        // (2/2)^2 = 1 exactly: closed domain keeps the point
        let cmp = exact_sum_cmp_one(&[2, 2, 2], &[1.0, 1.0, 1.0], 2.0, &[2, 0, 0]);
        assert_eq!(cmp, Ordering::Equal);
    }

    #[test]
    fn decide_inside_resolves_boundary() {
        let mut escal = 0;
        assert!(decide_inside(&[2, 2, 2], &[1.0, 1.0, 1.0], 2.0, &[2, 0, 0], &mut escal));
        assert!(!decide_inside(&[2, 2, 2], &[1.0, 1.0, 1.0], 2.0, &[2, 1, 0], &mut escal));
    }

    #[test]
    fn sum_interval_is_narrow() {
        let s = membership_sum(&[2, 2, 4], &[1.25, 0.8, 1.0], 10.0, &[3, 5, 7]);
        assert!(s.hi - s.lo < 1e-12);
        assert!(s.lo > 0.0);
    }
}
