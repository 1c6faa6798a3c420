//! Subcommand bodies: validate inputs, call the library, print JSON.

use std::path::Path;

use anyhow::Result;
use serde_json::json;

use optstretch::{
    asymptotics, balanced_factors, brute_force_count, counting, gamma_rate, measure_table,
    optimizer, sweep as sweep_mod, EmitFormat, Exponents, Objective, RegionKind, SearchConfig,
    StretchFactors,
};

fn parse_exponents(omega: &[u32]) -> Result<Exponents> {
    Ok(Exponents::new(omega.to_vec())?)
}

/// Builds stretch factors from `--a`, defaulting to the identity;
/// renormalizes to determinant 1 and warns when the correction is large.
fn parse_factors(d: usize, a: Option<&[f64]>) -> Result<StretchFactors> {
    match a {
        None => Ok(StretchFactors::identity(d)),
        Some(values) => {
            let (factors, correction) = StretchFactors::renormalized(values.to_vec())?;
            if correction > 1e-6 {
                log::warn!(
                    "stretch factors multiplied to {:.9}; renormalized to determinant 1",
                    1.0 + correction
                );
            }
            Ok(factors)
        }
    }
}

pub fn volume(omega: &[u32]) -> Result<()> {
    let exponents = parse_exponents(omega)?;
    let table = measure_table(&exponents);
    let balanced = balanced_factors(&exponents);
    let payload = json!({
        "omega": exponents.omegas(),
        "volume_full": table.volume_full(),
        "octant_volume": table.octant_volume(),
        "sections": table.sections(),
        "double_sections": table.double_sections(),
        "balanced_factors": balanced,
    });
    println!("{}", serde_json::to_string_pretty(&payload)?);
    Ok(())
}

pub fn count(
    omega: &[u32],
    t: f64,
    region: RegionKind,
    a: Option<&[f64]>,
    oracle: bool,
) -> Result<()> {
    let exponents = parse_exponents(omega)?;
    let factors = parse_factors(exponents.dim(), a)?;
    let counted = counting::count(&exponents, &factors, t, region)?;
    let prediction = asymptotics::predict(&exponents, &factors, t, region);
    let remainder = counted.count as f64 - (prediction.leading + prediction.second);
    let mut payload = json!({
        "region": region,
        "t": t,
        "factors": factors,
        "count": counted.count,
        "boundary_escalations": counted.boundary_escalations,
        "prediction": prediction,
        "remainder": remainder,
        "error_budget": prediction.error_budget,
    });
    if oracle {
        let reference = brute_force_count(&exponents, &factors, t, region)?;
        payload["oracle_match"] = json!(reference.count == counted.count);
    }
    println!("{}", serde_json::to_string_pretty(&payload)?);
    Ok(())
}

pub fn predict(omega: &[u32], t: f64, region: RegionKind, a: Option<&[f64]>) -> Result<()> {
    let exponents = parse_exponents(omega)?;
    let factors = parse_factors(exponents.dim(), a)?;
    let prediction = asymptotics::predict(&exponents, &factors, t, region);
    let payload = json!({
        "t": t,
        "factors": factors,
        "prediction": prediction,
    });
    println!("{}", serde_json::to_string_pretty(&payload)?);
    Ok(())
}

pub fn optimize(omega: &[u32], t: f64, objective: Objective, config: &SearchConfig) -> Result<()> {
    let exponents = parse_exponents(omega)?;
    let result = optimizer::optimize(&exponents, t, objective, config)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    omega: &[u32],
    t_min: f64,
    t_max: f64,
    points: usize,
    objective: Objective,
    config: &SearchConfig,
    out_dir: &Path,
    formats: &[EmitFormat],
) -> Result<()> {
    let exponents = parse_exponents(omega)?;
    let grid = sweep_mod::log_space(t_min, t_max, points)?;
    let records = sweep_mod::run_sweep(&exponents, &grid, objective, config)?;
    let fit = sweep_mod::fit_rate(&records, gamma_rate(&exponents));
    if !out_dir.as_os_str().is_empty() && !out_dir.exists() {
        std::fs::create_dir_all(out_dir)?;
    }
    let mut written = Vec::new();
    for format in formats {
        let name = match format {
            EmitFormat::Csv => "sweep.csv",
            EmitFormat::Json => "sweep.json",
            EmitFormat::SvgScatter => "sweep.svg",
        };
        let path = out_dir.join(name);
        sweep_mod::emit(&records, &fit, *format, &path)?;
        written.push(path.display().to_string());
    }
    let payload = json!({
        "records": records.len(),
        "fit": fit,
        "files": written,
    });
    println!("{}", serde_json::to_string_pretty(&payload)?);
    Ok(())
}
