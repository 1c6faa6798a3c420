//! The `verify` subcommand: runs the library's property suites and prints
//! a per-suite pass/fail table. Returns exit code 3 when any suite fails.

use anyhow::Result;

use optstretch::{
    asymptotics, balanced_factors, brute_force_count, count, seeded_det1_factors,
    symmetry_decomposition_check, Error as CoreError, Exponents, RegionKind, StretchFactors,
};

struct SuiteResult {
    name: &'static str,
    cases: usize,
    failures: usize,
    skipped: usize,
}

impl SuiteResult {
    fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn stretch_set(exponents: &Exponents, seed: u64) -> Vec<StretchFactors> {
    let mut set = vec![
        StretchFactors::identity(exponents.dim()),
        balanced_factors(exponents),
    ];
    set.extend(seeded_det1_factors(exponents.dim(), 3, 2.0, seed));
    set
}

fn t_grid(t_max: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut t = 1.0;
    while t <= t_max + 1e-9 {
        grid.push(t);
        t += 0.5;
    }
    grid
}

fn oracle_suite(exponents: &Exponents, t_max: f64, seed: u64) -> SuiteResult {
    let mut result = SuiteResult {
        name: "oracle_equivalence",
        cases: 0,
        failures: 0,
        skipped: 0,
    };
    for t in t_grid(t_max) {
        for factors in stretch_set(exponents, seed) {
            for region in RegionKind::ALL {
                let fast = count(exponents, &factors, t, region).expect("count");
                match brute_force_count(exponents, &factors, t, region) {
                    Ok(reference) => {
                        result.cases += 1;
                        if fast.count != reference.count {
                            result.failures += 1;
                            eprintln!(
                                "oracle mismatch: t={t} region={region:?} a={:?}: {} vs {}",
                                factors.factors(),
                                fast.count,
                                reference.count
                            );
                        }
                    }
                    Err(CoreError::GuardExceeded { .. }) => result.skipped += 1,
                    Err(err) => panic!("oracle failed: {err}"),
                }
            }
        }
    }
    result
}

fn symmetry_suite(exponents: &Exponents, t_max: f64, seed: u64) -> SuiteResult {
    let mut result = SuiteResult {
        name: "symmetry_identity",
        cases: 0,
        failures: 0,
        skipped: 0,
    };
    for t in t_grid(t_max) {
        for factors in stretch_set(exponents, seed) {
            result.cases += 1;
            if !symmetry_decomposition_check(exponents, &factors, t).expect("counts") {
                result.failures += 1;
                eprintln!(
                    "symmetry identity failed: t={t} a={:?}",
                    factors.factors()
                );
            }
        }
    }
    result
}

fn two_term_suite(exponents: &Exponents) -> SuiteResult {
    let mut result = SuiteResult {
        name: "two_term_bounds",
        cases: 0,
        failures: 0,
        skipped: 0,
    };
    let mut samples = Vec::new();
    for t in [5.0, 10.0, 20.0, 50.0] {
        samples.push((StretchFactors::identity(exponents.dim()), t));
        samples.push((balanced_factors(exponents), t));
    }
    let (c_upper, c_lower) = asymptotics::estimate_c(exponents, &samples).expect("samples valid");
    result.cases += 2;
    if c_upper <= 0.0 {
        result.failures += 1;
        eprintln!("estimate_c: c_upper = {c_upper} is not positive");
    }
    if c_lower <= 0.0 {
        result.failures += 1;
        eprintln!("estimate_c: c_lower = {c_lower} is not positive");
    }
    for (factors, t) in &samples {
        result.cases += 2;
        if !asymptotics::check_two_term_upper(exponents, factors, *t, c_upper.max(0.0) / 2.0)
            .expect("hypothesis")
        {
            result.failures += 1;
            eprintln!("two-term upper bound failed at t={t}");
        }
        if !asymptotics::check_two_term_lower(exponents, factors, *t, c_lower.max(0.0) / 2.0)
            .expect("hypothesis")
        {
            result.failures += 1;
            eprintln!("two-term lower bound failed at t={t}");
        }
    }
    result
}

fn lemma_suite(exponents: &Exponents, seed: u64) -> SuiteResult {
    const TRIALS: usize = 100_000;
    let mut result = SuiteResult {
        name: "balanced_lemma",
        cases: 0,
        failures: 0,
        skipped: 0,
    };
    for (i, epsilon) in [1e-2f64, 1e-3, 1e-4].into_iter().enumerate() {
        for s in asymptotics::sample_lemma_inputs(exponents.dim(), epsilon, TRIALS, seed + i as u64)
        {
            result.cases += 1;
            if !asymptotics::check_balanced_lemma(&s, epsilon, 10.0).expect("hypothesis holds") {
                result.failures += 1;
            }
        }
    }
    result
}

pub fn run(omega: &[u32], t_max: f64, seed: u64) -> Result<i32> {
    let exponents = Exponents::new(omega.to_vec())?;
    let suites = [
        oracle_suite(&exponents, t_max, seed),
        symmetry_suite(&exponents, t_max, seed),
        two_term_suite(&exponents),
        lemma_suite(&exponents, seed),
    ];
    println!("{:<22} {:>8} {:>9} {:>8}  status", "suite", "cases", "failures", "skipped");
    let mut all_passed = true;
    for suite in &suites {
        println!(
            "{:<22} {:>8} {:>9} {:>8}  {}",
            suite.name,
            suite.cases,
            suite.failures,
            suite.skipped,
            if suite.passed() { "PASS" } else { "FAIL" }
        );
        all_passed &= suite.passed();
    }
    Ok(if all_passed { 0 } else { 3 })
}
