//! Two-term count predictions, error budgets, empirical bound constants,
//! and the balanced-product lemma as an executable property.
//!
//! The underlying asymptotics carry implicit constants that are not
//! recoverable in closed form, so the error budget exposes the envelope
//! shape with a unit constant and callers compare empirical ratios.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::counting::{self, RegionKind};
use crate::domain::{Exponents, StretchFactors};
use crate::error::{Error, Result};
use crate::measure;

/// Two-term asymptotic value for a count, with the envelope magnitude of
/// the remainder at unit constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub region: RegionKind,
    /// Coefficient of the `t^d` term (or `t^{d-1}` for the hyperplane
    /// union, whose leading order is one lower).
    pub leading: f64,
    /// Signed `t^{d-1}` correction; zero for regions without one.
    pub second: f64,
    /// `a*^{1+(d-1)/w} t^{(d-1)(1-1/w)} + a*^{2-2/(d+1)} t^{d-2+2/(d+1)}`
    /// with `w = max_j w_j`.
    pub error_budget: f64,
}

/// Two-term prediction of the lattice count for the given region.
///
/// The underlying formulas assume `t / a* >= 1`; smaller dilations are
/// still evaluated but flagged with a warning.
pub fn predict(
    exponents: &Exponents,
    factors: &StretchFactors,
    t: f64,
    region: RegionKind,
) -> Prediction {
    let d = exponents.dim();
    let a_star = factors.a_star();
    if t / a_star < 1.0 {
        log::warn!("predict: t/a* = {} < 1 is below the asymptotic hypothesis", t / a_star);
    }
    let table = measure::measure_table(exponents);
    let volume = table.volume_full();
    let section_sum: f64 = table
        .sections()
        .iter()
        .zip(factors.factors())
        .map(|(s, a)| s / a)
        .sum();
    let td = t.powi(d as i32);
    let td1 = t.powi(d as i32 - 1);
    let scale = 0.5f64.powi(d as i32);
    let (leading, second) = match region {
        RegionKind::Full => (volume * td, 0.0),
        RegionKind::Positive => (scale * volume * td, -scale * section_sum * td1),
        RegionKind::Nonnegative => (scale * volume * td, scale * section_sum * td1),
        RegionKind::HyperplaneUnion => (section_sum * td1, 0.0),
    };
    let omega = exponents.omega_max() as f64;
    let dm1 = (d - 1) as f64;
    let error_budget = a_star.powf(1.0 + dm1 / omega) * t.powf(dm1 * (1.0 - 1.0 / omega))
        + a_star.powf(2.0 - 2.0 / (d as f64 + 1.0)) * t.powf(d as f64 - 2.0 + 2.0 / (d as f64 + 1.0));
    Prediction {
        region,
        leading,
        second,
        error_budget,
    }
}

/// Exact count minus the two-term prediction.
pub fn remainder(
    exponents: &Exponents,
    factors: &StretchFactors,
    t: f64,
    region: RegionKind,
) -> Result<f64> {
    let observed = counting::count(exponents, factors, t, region)?.count as f64;
    let p = predict(exponents, factors, t, region);
    Ok(observed - (p.leading + p.second))
}

fn require_asymptotic_range(factors: &StretchFactors, t: f64) -> Result<()> {
    if t / factors.a_star() < 1.0 {
        return Err(Error::PreconditionViolated(format!(
            "two-term bounds require t/a* >= 1, got {}",
            t / factors.a_star()
        )));
    }
    Ok(())
}

fn require_nonneg_constant(c: f64) -> Result<()> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bound constant must be nonnegative, got {c}"
        )));
    }
    Ok(())
}

/// Checks the two-term upper bound
/// `count(positive) <= 2^{-d} |D| t^d - c a* t^{d-1}`.
pub fn check_two_term_upper(
    exponents: &Exponents,
    factors: &StretchFactors,
    t: f64,
    c: f64,
) -> Result<bool> {
    require_asymptotic_range(factors, t)?;
    require_nonneg_constant(c)?;
    let observed = counting::count(exponents, factors, t, RegionKind::Positive)?.count as f64;
    let p = predict(exponents, factors, t, RegionKind::Positive);
    let d = exponents.dim() as i32;
    Ok(observed <= p.leading - c * factors.a_star() * t.powi(d - 1))
}

/// Checks the two-term lower bound
/// `count(nonnegative) >= 2^{-d} |D| t^d + c a* t^{d-1}`.
pub fn check_two_term_lower(
    exponents: &Exponents,
    factors: &StretchFactors,
    t: f64,
    c: f64,
) -> Result<bool> {
    require_asymptotic_range(factors, t)?;
    require_nonneg_constant(c)?;
    let observed = counting::count(exponents, factors, t, RegionKind::Nonnegative)?.count as f64;
    let p = predict(exponents, factors, t, RegionKind::Nonnegative);
    let d = exponents.dim() as i32;
    Ok(observed >= p.leading + c * factors.a_star() * t.powi(d - 1))
}

/// Empirical bound constants: the largest `c` values for which the
/// two-term upper and lower bounds hold on every sample, computed as the
/// minimum over samples of the normalized count gaps. Both must come out
/// positive for the bounds to be empirically consistent.
pub fn estimate_c(
    exponents: &Exponents,
    samples: &[(StretchFactors, f64)],
) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument(
            "estimate_c requires at least one (factors, t) sample".into(),
        ));
    }
    for (factors, t) in samples {
        require_asymptotic_range(factors, *t)?;
    }
    let d = exponents.dim() as i32;
    let ratios: Vec<(f64, f64)> = samples
        .iter()
        .map(|(factors, t)| -> Result<(f64, f64)> {
            let scale = factors.a_star() * t.powi(d - 1);
            let leading = predict(exponents, factors, *t, RegionKind::Positive).leading;
            let positive =
                counting::count(exponents, factors, *t, RegionKind::Positive)?.count as f64;
            let nonneg =
                counting::count(exponents, factors, *t, RegionKind::Nonnegative)?.count as f64;
            Ok(((leading - positive) / scale, (nonneg - leading) / scale))
        })
        .collect::<Result<_>>()?;
    let c_upper = ratios.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let c_lower = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok((c_upper, c_lower))
}

/// Executable form of the balanced-product lemma: positive `s_j` with
/// `prod s_j = 1` and `sum s_j <= d + eps` must satisfy
/// `max_j |s_j - 1| <= C sqrt(eps)`.
pub fn check_balanced_lemma(s: &[f64], epsilon: f64, big_c: f64) -> Result<bool> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(big_c.is_finite() && big_c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lemma constant must be positive, got {big_c}"
        )));
    }
    if s.is_empty() || s.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(Error::InvalidArgument(
            "lemma inputs must be positive reals".into(),
        ));
    }
    let product: f64 = s.iter().product();
    if (product - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "lemma hypothesis violated: product {product} is not 1"
        )));
    }
    let sum: f64 = s.iter().sum();
    let d = s.len() as f64;
    if sum > d + epsilon {
        return Err(Error::InvalidArgument(format!(
            "lemma hypothesis violated: sum {sum} exceeds d + epsilon = {}",
            d + epsilon
        )));
    }
    let max_dev = s.iter().map(|&x| (x - 1.0).abs()).fold(0.0, f64::max);
    Ok(max_dev <= big_c * epsilon.sqrt())
}

/// Draws hypothesis-satisfying lemma inputs by rejection: centered
/// log-coordinates keep the product at 1, and draws violating the sum
/// constraint are discarded.
pub fn sample_lemma_inputs(d: usize, epsilon: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(d >= 2 && epsilon > 0.0 && epsilon < 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = 2.0 * epsilon.sqrt();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut u: Vec<f64> = (0..d).map(|_| rng.gen_range(-width..width)).collect();
        let mean = u.iter().sum::<f64>() / d as f64;
        for x in &mut u {
            *x -= mean;
        }
        let s: Vec<f64> = u.iter().map(|x| x.exp()).collect();
        let sum: f64 = s.iter().sum();
        let product: f64 = s.iter().product();
        if sum <= d as f64 + epsilon && (product - 1.0).abs() <= 1e-12 {
            out.push(s);
        }
    }
    out
}
