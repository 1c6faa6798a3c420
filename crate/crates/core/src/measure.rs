//! Closed-form measures of the model domain and its coordinate sections.
//!
//! The octant volume of `{x in R_+^m : sum x_l^{w_l} <= 1}` has the closed
//! form
//!
//! ```text
//! V(w_1..w_m) = (sum_l prod_{k != l} w_k)^{-1}
//!               * prod_l Gamma(1/w_l) / Gamma(sum_l 1/w_l)
//! ```
//!
//! evaluated in log space. The prefactor is an exact integer and is kept
//! in integer arithmetic.

use serde::Serialize;

use crate::domain::{validate_omega, Exponents};
use crate::error::{Error, Result};

/// Lanczos coefficients for g = 7, as used by the GNU Scientific Library;
/// accurate to about 15 significant digits for positive arguments.
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Natural log of the Gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument");
    if x < 0.5 {
        // reflection keeps the series in its accurate range
        let sin_pi_x = (std::f64::consts::PI * x).sin();
        (std::f64::consts::PI / sin_pi_x).ln() - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let w = z + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * w.ln() - w + acc.ln()
    }
}

/// Octant volume `V(w_1..w_m)` of the domain restricted to the positive
/// orthant, for any nonempty list of even exponents.
pub fn octant_volume(omegas: &[u32]) -> Result<f64> {
    if omegas.is_empty() {
        return Err(Error::InvalidArgument(
            "octant_volume requires at least one exponent".into(),
        ));
    }
    for &omega in omegas {
        validate_omega(omega)?;
    }
    // prefactor sum_l prod_{k != l} w_k is an exact integer
    let mut prefactor: u128 = 0;
    for l in 0..omegas.len() {
        let mut p: u128 = 1;
        for (k, &omega) in omegas.iter().enumerate() {
            if k != l {
                p = p.checked_mul(omega as u128).ok_or(Error::CountOverflow)?;
            }
        }
        prefactor = prefactor.checked_add(p).ok_or(Error::CountOverflow)?;
    }
    let inv_sum: f64 = omegas.iter().map(|&w| 1.0 / w as f64).sum();
    let log_v = omegas.iter().map(|&w| ln_gamma(1.0 / w as f64)).sum::<f64>()
        - ln_gamma(inv_sum)
        - (prefactor as f64).ln();
    Ok(log_v.exp())
}

/// All measures attached to one exponent vector: the full and octant
/// volumes, the section measures `|D_j|`, and the double-section measures
/// `|D_{j,k}|` (diagonal unused, stored as 0).
#[derive(Clone, Debug, Serialize)]
pub struct MeasureTable {
    volume_full: f64,
    octant_volume: f64,
    sections: Vec<f64>,
    double_sections: Vec<Vec<f64>>,
}

impl MeasureTable {
    /// Full `d`-dimensional measure of the domain.
    pub fn volume_full(&self) -> f64 {
        self.volume_full
    }

    /// Measure of the intersection with the positive orthant.
    pub fn octant_volume(&self) -> f64 {
        self.octant_volume
    }

    /// `(d-1)`-dimensional measures of the coordinate-hyperplane sections.
    pub fn sections(&self) -> &[f64] {
        &self.sections
    }

    /// `(d-2)`-dimensional measures of the pairwise sections; empty for
    /// `d = 2`.
    pub fn double_sections(&self) -> &[Vec<f64>] {
        &self.double_sections
    }
}

fn omit(omegas: &[u32], skip: &[usize]) -> Vec<u32> {
    omegas
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, &w)| w)
        .collect()
}

/// Computes the full measure table for one exponent vector.
#[allow(clippy::needless_range_loop)]
pub fn measure_table(exponents: &Exponents) -> MeasureTable {
    let omegas = exponents.omegas();
    let d = exponents.dim();
    let octant = octant_volume(omegas).expect("validated exponents");
    let volume_full = (1u64 << d) as f64 * octant;
    let sections: Vec<f64> = (0..d)
        .map(|j| {
            let sub = omit(omegas, &[j]);
            (1u64 << (d - 1)) as f64 * octant_volume(&sub).expect("validated exponents")
        })
        .collect();
    let double_sections = if d == 2 {
        Vec::new()
    } else {
        let mut table = vec![vec![0.0; d]; d];
        for j in 0..d {
            for k in (j + 1)..d {
                let sub = omit(omegas, &[j, k]);
                let m = (1u64 << (d - 2)) as f64 * octant_volume(&sub).expect("validated exponents");
                table[j][k] = m;
                table[k][j] = m;
            }
        }
        table
    };
    MeasureTable {
        volume_full,
        octant_volume: octant,
        sections,
        double_sections,
    }
}

/// Parallel section function: the `(d-1)`-measure of the slice of the
/// domain at `x_j = x`, which is
/// `(1 - x^{w_j})^{sum_{l != j} 1/w_l} * 2^{d-1} V(w without j)`.
///
/// Returns 0 for `x > 1` (empty slice); negative `x` is rejected — use the
/// domain's reflection symmetry upstream.
pub fn parallel_section(exponents: &Exponents, j: usize, x: f64) -> Result<f64> {
    let d = exponents.dim();
    if j >= d {
        return Err(Error::InvalidArgument(format!(
            "axis index {j} out of range for dimension {d}"
        )));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "section offset must be in [0, 1], got {x}"
        )));
    }
    if x > 1.0 {
        return Ok(0.0);
    }
    let omegas = exponents.omegas();
    let sub = omit(omegas, &[j]);
    let base = (1u64 << (d - 1)) as f64 * octant_volume(&sub).expect("validated exponents");
    let alpha: f64 = sub.iter().map(|&w| 1.0 / w as f64).sum();
    let budget = 1.0 - x.powi(omegas[j] as i32);
    if budget <= 0.0 {
        return Ok(0.0);
    }
    Ok(budget.powf(alpha) * base)
}
