//! The model domain `{x : x_1^{w_1} + ... + x_d^{w_d} <= 1}`, its
//! volume-preserving diagonal stretches, certified membership tests, the
//! balanced stretch, and the theoretical convergence exponent.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::certify::{self, Certified};
use crate::error::{Error, Result};
use crate::measure;
use crate::rational::Rational;

/// Tolerance on the factor product after renormalization.
pub const DET_TOLERANCE: f64 = 1e-12;

/// Tolerance on the factor product accepted from callers before
/// renormalization.
pub const DET_INPUT_TOLERANCE: f64 = 1e-9;

/// Even exponents defining one domain, with the maximum cached.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Exponents {
    omegas: Vec<u32>,
    omega_max: u32,
}

/// Validates a single exponent entry: even and at least 2.
pub(crate) fn validate_omega(omega: u32) -> Result<()> {
    if !omega.is_multiple_of(2) {
        return Err(Error::OddExponent(omega));
    }
    if omega < 2 {
        return Err(Error::SmallExponent(omega));
    }
    Ok(())
}

impl Exponents {
    /// Builds a validated exponent vector; requires `d >= 2` and every
    /// entry even and `>= 2`.
    pub fn new(omegas: Vec<u32>) -> Result<Self> {
        if omegas.len() < 2 {
            return Err(Error::BadDimension {
                min: 2,
                got: omegas.len(),
            });
        }
        for &omega in &omegas {
            validate_omega(omega)?;
        }
        let omega_max = *omegas.iter().max().expect("nonempty");
        Ok(Exponents { omegas, omega_max })
    }

    pub fn dim(&self) -> usize {
        self.omegas.len()
    }

    pub fn omegas(&self) -> &[u32] {
        &self.omegas
    }

    pub fn omega_max(&self) -> u32 {
        self.omega_max
    }
}

/// Volume-preserving diagonal stretch factors with the derived `a_star`.
///
/// The factor product is renormalized to 1 on construction; `a_star` is
/// `max_j 1/a_j` computed from the stored (renormalized) factors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StretchFactors {
    a: Vec<f64>,
    a_star: f64,
}

impl StretchFactors {
    /// Accepts factors whose product is within `1e-9` of 1 and
    /// renormalizes them to determinant 1.
    pub fn new(a: Vec<f64>) -> Result<Self> {
        let product = Self::check_entries(&a)?;
        if (product - 1.0).abs() > DET_INPUT_TOLERANCE {
            return Err(Error::UnnormalizedFactors { product });
        }
        Ok(Self::renormalize(a))
    }

    /// Accepts any positive factors and renormalizes to determinant 1,
    /// returning the factors and the relative size of the correction.
    pub fn renormalized(a: Vec<f64>) -> Result<(Self, f64)> {
        let product = Self::check_entries(&a)?;
        let correction = (product - 1.0).abs();
        Ok((Self::renormalize(a), correction))
    }

    pub fn identity(d: usize) -> Self {
        StretchFactors {
            a: vec![1.0; d],
            a_star: 1.0,
        }
    }

    fn check_entries(a: &[f64]) -> Result<f64> {
        if a.is_empty() {
            return Err(Error::BadDimension { min: 1, got: 0 });
        }
        let mut product = 1.0;
        for &x in a {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::BadFactor(x));
            }
            product *= x;
        }
        Ok(product)
    }

    fn renormalize(mut a: Vec<f64>) -> Self {
        let d = a.len();
        let product: f64 = a.iter().product();
        let scale = product.powf(1.0 / d as f64);
        for x in &mut a {
            *x /= scale;
        }
        let product: f64 = a.iter().product();
        debug_assert!((product - 1.0).abs() <= DET_TOLERANCE);
        let a_star = a.iter().map(|&x| 1.0 / x).fold(f64::MIN, f64::max);
        StretchFactors { a, a_star }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn factors(&self) -> &[f64] {
        &self.a
    }

    /// Largest inverse factor `max_j 1/a_j`.
    pub fn a_star(&self) -> f64 {
        self.a_star
    }
}

/// An integer lattice point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticePoint {
    pub k: Vec<i64>,
}

impl From<Vec<i64>> for LatticePoint {
    fn from(k: Vec<i64>) -> Self {
        LatticePoint { k }
    }
}

/// Outcome of the certified membership test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
    BoundaryUncertain,
}

fn check_point_dims(exponents: &Exponents, factors: &StretchFactors, k: &[i64]) -> Result<()> {
    if factors.dim() != exponents.dim() {
        return Err(Error::DimensionMismatch {
            expected: exponents.dim(),
            got: factors.dim(),
        });
    }
    if k.len() != exponents.dim() {
        return Err(Error::DimensionMismatch {
            expected: exponents.dim(),
            got: k.len(),
        });
    }
    Ok(())
}

fn check_dilation(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dilation t must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

/// Certified membership of `k` in the stretched dilated domain `t A D`.
///
/// Returns `Inside` or `Outside` only when the directed-rounding enclosure
/// of the membership sum settles the comparison; `BoundaryUncertain` when
/// the enclosure straddles 1.
pub fn membership(
    exponents: &Exponents,
    factors: &StretchFactors,
    t: f64,
    point: &LatticePoint,
) -> Result<Membership> {
    check_dilation(t)?;
    check_point_dims(exponents, factors, &point.k)?;
    let sum = certify::membership_sum(exponents.omegas(), factors.factors(), t, &point.k);
    Ok(match certify::interval_leq_one(sum) {
        Certified::True => Membership::Inside,
        Certified::False => Membership::Outside,
        Certified::Uncertain => Membership::BoundaryUncertain,
    })
}

/// Definitive membership: escalates boundary-uncertain cases to exact
/// rational arithmetic. The closed domain keeps boundary points.
pub fn contains(
    exponents: &Exponents,
    factors: &StretchFactors,
    t: f64,
    point: &LatticePoint,
) -> Result<bool> {
    check_dilation(t)?;
    check_point_dims(exponents, factors, &point.k)?;
    let mut escalations = 0;
    Ok(certify::decide_inside(
        exponents.omegas(),
        factors.factors(),
        t,
        &point.k,
        &mut escalations,
    ))
}

/// The balanced stretch: `b_j = |D_j| / (prod_k |D_k|)^{1/d}`, the
/// diagonal that equalizes the section measures of the stretched domain.
pub fn balanced_factors(exponents: &Exponents) -> StretchFactors {
    let table = measure::measure_table(exponents);
    let sections = table.sections();
    let d = exponents.dim();
    let log_gm = sections.iter().map(|s| s.ln()).sum::<f64>() / d as f64;
    let gm = log_gm.exp();
    let b: Vec<f64> = sections.iter().map(|s| s / gm).collect();
    StretchFactors::new(b).expect("balanced factors multiply to 1")
}

/// Theoretical decay exponent `min{(d-1)/(2 w), (d-1)/(2d+2)}` for the
/// deviation of optimal factors from the balanced ones.
///
/// The statement is proved for `d >= 3`; smaller dimensions evaluate the
/// same formula but are flagged with a warning.
pub fn gamma_rate(exponents: &Exponents) -> Rational {
    let d = exponents.dim() as i64;
    if d < 3 {
        log::warn!("gamma_rate: d = {d} is outside theorem scope (d >= 3); formula still evaluated");
    }
    let omega = exponents.omega_max() as i64;
    Rational::new(d - 1, 2 * omega).min(Rational::new(d - 1, 2 * d + 2))
}

/// Draws deterministic volume-preserving factor vectors with `a_star`
/// capped, for randomized verification suites.
pub fn seeded_det1_factors(d: usize, n: usize, max_a_star: f64, seed: u64) -> Vec<StretchFactors> {
    assert!(d >= 1 && max_a_star > 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_width = max_a_star.ln();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut u: Vec<f64> = (0..d).map(|_| rng.gen_range(-half_width..half_width)).collect();
        let mean = u.iter().sum::<f64>() / d as f64;
        for x in &mut u {
            *x -= mean;
        }
        let a: Vec<f64> = u.iter().map(|x| x.exp()).collect();
        let factors = StretchFactors::new(a).expect("centered log factors multiply to 1");
        if factors.a_star() <= max_a_star {
            out.push(factors);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exps(v: &[u32]) -> Exponents {
        Exponents::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(matches!(
            Exponents::new(vec![3, 4]),
            Err(Error::OddExponent(3))
        ));
        assert!(matches!(
            Exponents::new(vec![2, 0]),
            Err(Error::SmallExponent(0))
        ));
        assert!(matches!(
            Exponents::new(vec![2]),
            Err(Error::BadDimension { .. })
        ));
    }

    #[test]
    fn membership_examples() {
        let e = exps(&[2, 2, 2]);
        let a = StretchFactors::identity(3);
        let m = |k: Vec<i64>| membership(&e, &a, 2.0, &k.into()).unwrap();
        assert_eq!(m(vec![1, 1, 1]), Membership::Inside);
        // boundary point: sum is exactly 1, closed domain keeps it
        assert!(contains(&e, &a, 2.0, &vec![2, 0, 0].into()).unwrap());
        assert_eq!(m(vec![1, 1, 2]), Membership::Outside);
    }

    #[test]
    fn membership_rejects_dimension_mismatch() {
        let e = exps(&[2, 2, 2]);
        let a = StretchFactors::identity(3);
        assert!(matches!(
            membership(&e, &a, 2.0, &vec![1, 1].into()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn factors_renormalize_and_derive_a_star() {
        let f = StretchFactors::new(vec![2.0, 1.0, 0.5]).unwrap();
        let product: f64 = f.factors().iter().product();
        assert!((product - 1.0).abs() <= DET_TOLERANCE);
        assert_eq!(f.a_star(), 2.0);

        let f = StretchFactors::new(vec![1.0 / 3.0, 3.0, 1.0]).unwrap();
        assert!((f.a_star() - 3.0).abs() < 1e-12);

        assert_eq!(StretchFactors::identity(3).a_star(), 1.0);
    }

    #[test]
    fn factors_reject_unnormalized_input() {
        assert!(matches!(
            StretchFactors::new(vec![2.0, 1.0, 1.0]),
            Err(Error::UnnormalizedFactors { .. })
        ));
        // the lenient constructor accepts and reports the correction
        let (f, corr) = StretchFactors::renormalized(vec![2.0, 1.0, 1.0]).unwrap();
        assert!(corr > 0.9);
        let product: f64 = f.factors().iter().product();
        assert!((product - 1.0).abs() <= DET_TOLERANCE);
    }

    #[test]
    fn balanced_factors_symmetric_cases() {
        for omegas in [[2, 2, 2], [4, 4, 4]] {
            let b = balanced_factors(&exps(&omegas));
            for &x in b.factors() {
                assert!((x - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn balanced_factors_mixed_case() {
        // frozen from the section-measure ratio (cross-checked against
        // quadrature in the measure tests)
        let b = balanced_factors(&exps(&[2, 2, 4]));
        let f = b.factors();
        assert!((f[0] - 1.036279789103405).abs() < 1e-9);
        assert!((f[1] - 1.036279789103405).abs() < 1e-9);
        assert!((f[2] - 0.9312063823260781).abs() < 1e-9);
        let product: f64 = f.iter().product();
        assert!((product - 1.0).abs() <= DET_TOLERANCE);
    }

    #[test]
    fn gamma_rate_examples() {
        assert_eq!(gamma_rate(&exps(&[4, 4, 4])), Rational::new(1, 4));
        assert_eq!(gamma_rate(&exps(&[2, 2, 6])), Rational::new(1, 6));
        assert_eq!(gamma_rate(&exps(&[2, 2, 2, 2])), Rational::new(3, 10));
    }

    #[test]
    fn seeded_factors_are_reproducible_and_capped() {
        let a = seeded_det1_factors(3, 5, 2.0, 42);
        let b = seeded_det1_factors(3, 5, 2.0, 42);
        assert_eq!(a, b);
        for f in &a {
            assert!(f.a_star() <= 2.0);
            let product: f64 = f.factors().iter().product();
            assert!((product - 1.0).abs() <= DET_TOLERANCE);
        }
    }

    proptest! {
        #[test]
        fn a_star_at_least_one(seed in 0u64..1000) {
            let f = &seeded_det1_factors(3, 1, 4.0, seed)[0];
            prop_assert!(f.a_star() >= 1.0 - 1e-12);
        }

        #[test]
        fn membership_invariant_under_sign_flips(
            k in proptest::collection::vec(-6i64..=6, 3),
            signs in proptest::collection::vec(proptest::bool::ANY, 3),
        ) {
            let e = exps(&[2, 2, 4]);
            let a = StretchFactors::new(vec![1.25, 1.0, 0.8]).unwrap();
            let flipped: Vec<i64> = k.iter().zip(&signs)
                .map(|(&x, &s)| if s { -x } else { x })
                .collect();
            let lhs = contains(&e, &a, 5.0, &k.clone().into()).unwrap();
            let rhs = contains(&e, &a, 5.0, &flipped.into()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn membership_monotone_along_rays(
            k in proptest::collection::vec(0i64..=6, 3),
            shrink in proptest::collection::vec(0i64..=6, 3),
        ) {
            let e = exps(&[2, 4, 2]);
            let a = StretchFactors::identity(3);
            let smaller: Vec<i64> = k.iter().zip(&shrink)
                .map(|(&x, &s)| (x - s).max(0))
                .collect();
            if contains(&e, &a, 4.5, &k.clone().into()).unwrap() {
                prop_assert!(contains(&e, &a, 4.5, &smaller.into()).unwrap());
            }
        }

        #[test]
        fn gamma_rate_in_range(d in 3usize..=6, omega_half in 1u32..=6) {
            let omegas = vec![2 * omega_half; d];
            let g = gamma_rate(&Exponents::new(omegas).unwrap());
            prop_assert!(g.value() > 0.0 && g.value() <= 0.5);
        }
    }
}
