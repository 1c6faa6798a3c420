//! Independent numerical oracles: adaptive Gauss-Kronrod quadrature and
//! seeded Monte Carlo volume estimation.
//!
//! These deliberately avoid the Gamma-function identities they are used to
//! check. The octant volume is reduced to a product of one-dimensional
//! integrals through the scaling identity
//! `|{y in R_+^{m-1} : sum y^w <= r}| = r^{sum 1/w} * |{ ... <= 1}|`,
//! which only uses the homogeneity of the defining powers.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

// 15-point Kronrod nodes on [-1, 1] (nonnegative half) and weights, with
// the embedded 7-point Gauss weights; the classical QUADPACK qk15 table.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = WGK[7] * f(center);
    let mut gauss = WG[3] * f(center);
    for i in 0..7 {
        let dx = half * XGK[i];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth >= 60 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, tol * 0.5, depth + 1) + adaptive(f, mid, b, tol * 0.5, depth + 1)
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to the given
/// absolute tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    adaptive(&f, a, b, abs_tol, 0)
}

/// Octant volume by iterated quadrature, independent of the closed form.
///
/// Peeling one axis at a time with the scaling identity gives
/// `V(w_1..w_m) = prod_l integral_0^1 (1 - x^{w_l})^{alpha_l} dx` with
/// `alpha_l = sum_{k > l} 1/w_k` (the last factor is 1).
pub fn octant_volume_quadrature(omegas: &[u32], abs_tol: f64) -> f64 {
    let mut volume = 1.0;
    for (l, &omega) in omegas.iter().enumerate() {
        let alpha: f64 = omegas[l + 1..].iter().map(|&w| 1.0 / w as f64).sum();
        if alpha == 0.0 {
            continue; // innermost axis integrates to 1
        }
        volume *= integrate(
            move |x| (1.0 - x.powi(omega as i32)).max(0.0).powf(alpha),
            0.0,
            1.0,
            abs_tol,
        );
    }
    volume
}

/// Seeded Monte Carlo estimate of the octant volume with its standard
/// error; sequential by construction, so the result depends only on the
/// seed and sample count.
pub fn monte_carlo_octant_volume(omegas: &[u32], samples: u64, seed: u64) -> (f64, f64) {
    assert!(samples > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits: u64 = 0;
    let mut x = vec![0.0f64; omegas.len()];
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = rng.gen::<f64>();
        }
        let sum: f64 = x
            .iter()
            .zip(omegas)
            .map(|(&xi, &w)| xi.powi(w as i32))
            .sum();
        if sum <= 1.0 {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let se = (p * (1.0 - p) / samples as f64).sqrt();
    (p, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrates_polynomials_exactly() {
        assert!((integrate(|x| x * x, 0.0, 1.0, 1e-12) - 1.0 / 3.0).abs() < 1e-12);
        assert!((integrate(|x| x.powi(9), 0.0, 2.0, 1e-12) - 102.4).abs() < 1e-9);
    }

    #[test]
    fn integrates_quarter_circle() {
        // area under sqrt(1 - x^2), an endpoint-singular derivative
        let v = integrate(|x| (1.0 - x * x).max(0.0).sqrt(), 0.0, 1.0, 1e-10);
        assert!((v - PI / 4.0).abs() < 1e-9);
    }

    #[test]
    fn quadrature_octant_matches_known_ball() {
        let v = octant_volume_quadrature(&[2, 2, 2], 1e-10);
        assert!((v - PI / 6.0).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_is_seed_deterministic_and_sane() {
        let (v1, se1) = monte_carlo_octant_volume(&[2, 2], 200_000, 7);
        let (v2, _) = monte_carlo_octant_volume(&[2, 2], 200_000, 7);
        assert_eq!(v1, v2);
        assert!((v1 - PI / 4.0).abs() < 4.0 * se1);
    }
}
