//! Convergence experiments over dilation grids: per-t optimization,
//! deviation regression against the theoretical exponent, and emission to
//! CSV / JSON / SVG.
//!
//! The theorem being probed is an O-bound, so the fitted slope is reported
//! against `-gamma` rather than asserted equal to it. Deviations at or
//! below the optimizer's final grid spacing measure the search grid, not
//! the mathematics, and are censored from the regression.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics;
use crate::domain::Exponents;
use crate::error::{Error, Result};
use crate::optimizer::{self, Objective, OptimizationResult, SearchConfig};
use crate::rational::Rational;

/// One sweep entry: the optimization outcome at one dilation together with
/// its deviation from balance and the two-term prediction at the optimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub t: f64,
    pub result: OptimizationResult,
    /// `max_j |best_j - balanced_j|`.
    pub max_deviation: f64,
    pub count_observed: u64,
    pub count_predicted: f64,
}

/// Log-log regression of deviation against dilation.
///
/// `slope` is absent when fewer than two records survive censoring — the
/// "saturated" outcome, itself evidence that deviations sit at the
/// resolution floor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    /// Records entering the regression.
    pub points_used: usize,
    /// Records censored at the resolution floor.
    pub censored: usize,
    pub gamma_theoretical: Rational,
}

impl RateFit {
    pub fn is_saturated(&self) -> bool {
        self.slope.is_none()
    }
}

/// `n` logarithmically spaced values from `min` to `max` inclusive.
pub fn log_space(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min > 0.0 && max > min) {
        return Err(Error::InvalidArgument(format!(
            "log_space requires 0 < min < max, got [{min}, {max}]"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("log_space requires n >= 2".into()));
    }
    let (ln_min, ln_max) = (min.ln(), max.ln());
    let step = (ln_max - ln_min) / (n - 1) as f64;
    Ok((0..n).map(|i| (ln_min + step * i as f64).exp()).collect())
}

/// Runs the optimizer at every grid dilation, in parallel, one record per
/// entry. The grid must be nonempty, strictly increasing, and start at 1
/// or above.
pub fn run_sweep(
    exponents: &Exponents,
    t_grid: &[f64],
    objective: Objective,
    config: &SearchConfig,
) -> Result<Vec<SweepRecord>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("sweep grid must be strictly increasing".into()));
    }
    if t_grid[0] < 1.0 {
        return Err(Error::InvalidArgument("sweep grid entries must be >= 1".into()));
    }
    let records: Vec<SweepRecord> = t_grid
        .par_iter()
        .map(|&t| -> Result<SweepRecord> {
            let result = optimizer::optimize(exponents, t, objective, config)?;
            let prediction =
                asymptotics::predict(exponents, &result.best, t, objective.region());
            let max_deviation = result
                .deviations
                .iter()
                .map(|d| d.abs())
                .fold(0.0, f64::max);
            let record = SweepRecord {
                t,
                max_deviation,
                count_observed: result.value,
                count_predicted: prediction.leading + prediction.second,
                result,
            };
            let gap = (record.count_observed as f64 - record.count_predicted).abs();
            if gap > 3.0 * prediction.error_budget {
                log::warn!(
                    "sweep: |observed - predicted| = {gap:.3} exceeds 3x error budget \
                     {:.3} at t = {t}",
                    prediction.error_budget
                );
            }
            Ok(record)
        })
        .collect::<Result<_>>()?;
    Ok(records)
}

/// Ordinary least squares of `ys` against `xs`; returns
/// `(slope, intercept, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r_squared)
}

/// Fits `log(max_deviation)` against `log(t)` over records whose deviation
/// clears the optimizer's final resolution.
pub fn fit_rate(records: &[SweepRecord], gamma: Rational) -> RateFit {
    let qualifying: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| r.max_deviation > r.result.resolution)
        .collect();
    let censored = records.len() - qualifying.len();
    if qualifying.len() < 2 {
        return RateFit {
            slope: None,
            intercept: None,
            r_squared: None,
            points_used: qualifying.len(),
            censored,
            gamma_theoretical: gamma,
        };
    }
    let xs: Vec<f64> = qualifying.iter().map(|r| r.t.ln()).collect();
    let ys: Vec<f64> = qualifying.iter().map(|r| r.max_deviation.ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    RateFit {
        slope: Some(slope),
        intercept: Some(intercept),
        r_squared: Some(r_squared),
        points_used: qualifying.len(),
        censored,
        gamma_theoretical: gamma,
    }
}

/// Output formats for [`emit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
    SvgScatter,
}

/// Writes sweep records (and the fit, where the format carries it) to
/// `destination`.
///
/// CSV columns are exactly
/// `t, a_1..a_d, dev_1..dev_d, max_dev, count, predicted, resolution`;
/// JSON mirrors the record structure under `{"records": ..., "fit": ...}`;
/// the SVG scatter plots `log t` against `log max_dev` with the fitted
/// line and a reference line of slope `-gamma`.
pub fn emit(
    records: &[SweepRecord],
    fit: &RateFit,
    format: EmitFormat,
    destination: &Path,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("emit requires at least one record".into()));
    }
    let file = File::create(destination).map_err(|source| Error::Io {
        path: destination.to_path_buf(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    let outcome = match format {
        EmitFormat::Csv => write_csv(&mut writer, records),
        EmitFormat::Json => write_json(&mut writer, records, fit),
        EmitFormat::SvgScatter => write_svg(&mut writer, records, fit),
    };
    outcome.map_err(|source| Error::Io {
        path: destination.to_path_buf(),
        source,
    })
}

fn write_csv(out: &mut impl Write, records: &[SweepRecord]) -> std::io::Result<()> {
    let d = records[0].result.best.dim();
    let mut header = String::from("t");
    for j in 1..=d {
        header.push_str(&format!(",a_{j}"));
    }
    for j in 1..=d {
        header.push_str(&format!(",dev_{j}"));
    }
    header.push_str(",max_dev,count,predicted,resolution");
    writeln!(out, "{header}")?;
    for r in records {
        let mut row = format!("{}", r.t);
        for a in r.result.best.factors() {
            row.push_str(&format!(",{a}"));
        }
        for dev in &r.result.deviations {
            row.push_str(&format!(",{dev}"));
        }
        row.push_str(&format!(
            ",{},{},{},{}",
            r.max_deviation, r.count_observed, r.count_predicted, r.result.resolution
        ));
        writeln!(out, "{row}")?;
    }
    Ok(())
}

fn write_json(
    out: &mut impl Write,
    records: &[SweepRecord],
    fit: &RateFit,
) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct Payload<'a> {
        records: &'a [SweepRecord],
        fit: &'a RateFit,
    }
    serde_json::to_writer_pretty(&mut *out, &Payload { records, fit })?;
    writeln!(out)
}

fn write_svg(out: &mut impl Write, records: &[SweepRecord], fit: &RateFit) -> std::io::Result<()> {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const MARGIN: f64 = 60.0;
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.max_deviation > r.result.resolution)
        .map(|r| (r.t.ln(), r.max_deviation.ln()))
        .collect();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )?;
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#)?;
    if points.is_empty() {
        writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">all deviations at resolution floor</text>"#,
            W / 2.0,
            H / 2.0
        )?;
        return writeln!(out, "</svg>");
    }
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    // widen the value range so reference/fit lines stay visible
    let x_pad = ((x_max - x_min) * 0.05).max(1e-9);
    let y_pad = ((y_max - y_min) * 0.15).max(1e-9);
    x_min -= x_pad;
    x_max += x_pad;
    y_min -= y_pad;
    y_max += y_pad;
    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y_min) / (y_max - y_min) * (H - 2.0 * MARGIN);

    // frame drawn as a path so the only <line> elements are fit/reference
    writeln!(
        out,
        r#"<path d="M {m} {m} L {m} {b} L {r} {b}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    )?;
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">log t</text>"#,
        W / 2.0,
        H - MARGIN / 3.0
    )?;
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {x} {y})">log max deviation</text>"#,
        MARGIN / 3.0,
        H / 2.0,
        x = MARGIN / 3.0,
        y = H / 2.0
    )?;

    for &(x, y) in &points {
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#,
            sx(x),
            sy(y)
        )?;
    }
    let anchor = points
        .iter()
        .copied()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("nonempty");
    if let (Some(slope), Some(intercept)) = (fit.slope, fit.intercept) {
        let y0 = slope * x_min + intercept;
        let y1 = slope * x_max + intercept;
        writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-width="1.5"/>"#,
            sx(x_min),
            sy(y0),
            sx(x_max),
            sy(y1)
        )?;
        writeln!(
            out,
            r#"<text x="{}" y="{}" fill="crimson">fit slope {:.4}</text>"#,
            MARGIN + 10.0,
            MARGIN + 15.0,
            slope
        )?;
    }
    let gamma = fit.gamma_theoretical.value();
    let ref_y = |x: f64| anchor.1 - gamma * (x - anchor.0);
    writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
        sx(x_min),
        sy(ref_y(x_min)),
        sx(x_max),
        sy(ref_y(x_max))
    )?;
    writeln!(
        out,
        r#"<text x="{}" y="{}" fill="gray">reference slope -{}</text>"#,
        MARGIN + 10.0,
        MARGIN + 32.0,
        fit.gamma_theoretical
    )?;
    writeln!(out, "</svg>")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{gamma_rate, StretchFactors};

    fn exps(v: &[u32]) -> Exponents {
        Exponents::new(v.to_vec()).unwrap()
    }

    fn synthetic_records(ts: &[f64], devs: &[f64], resolution: f64) -> Vec<SweepRecord> {
        ts.iter()
            .zip(devs)
            .map(|(&t, &dev)| SweepRecord {
                t,
                result: OptimizationResult {
                    t,
                    objective: Objective::MaximizePositive,
                    best: StretchFactors::identity(3),
                    value: 1,
                    ties: vec![StretchFactors::identity(3)],
                    resolution,
                    deviations: vec![dev, 0.0, -dev],
                },
                max_deviation: dev,
                count_observed: 1,
                count_predicted: 1.0,
            })
            .collect()
    }

    #[test]
    fn log_space_endpoints_and_errors() {
        let g = log_space(20.0, 300.0, 25).unwrap();
        assert_eq!(g.len(), 25);
        assert!((g[0] - 20.0).abs() < 1e-12);
        assert!((g[24] - 300.0).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(log_space(0.0, 10.0, 5).is_err());
        assert!(log_space(1.0, 10.0, 1).is_err());
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let ts: Vec<f64> = log_space(10.0, 200.0, 12).unwrap();
        let devs: Vec<f64> = ts.iter().map(|t| t.powf(-0.25)).collect();
        let records = synthetic_records(&ts, &devs, 1e-9);
        let fit = fit_rate(&records, Rational::new(1, 4));
        assert!((fit.slope.unwrap() + 0.25).abs() < 1e-9);
        assert!(fit.r_squared.unwrap() > 1.0 - 1e-12);
        assert_eq!(fit.points_used, 12);
        assert_eq!(fit.censored, 0);
    }

    #[test]
    fn saturated_marker_when_all_censored() {
        let ts = [10.0, 20.0, 40.0];
        let devs = [1e-6, 1e-6, 1e-6];
        let records = synthetic_records(&ts, &devs, 1e-3);
        let fit = fit_rate(&records, Rational::new(1, 4));
        assert!(fit.is_saturated());
        assert_eq!(fit.points_used, 0);
        assert_eq!(fit.censored, 3);
    }

    #[test]
    fn sweep_validates_grid() {
        let e = exps(&[2, 2, 2]);
        let cfg = SearchConfig::default();
        assert!(run_sweep(&e, &[], Objective::MaximizePositive, &cfg).is_err());
        assert!(run_sweep(&e, &[2.0, 2.0], Objective::MaximizePositive, &cfg).is_err());
        assert!(run_sweep(&e, &[0.5, 2.0], Objective::MaximizePositive, &cfg).is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_consistent() {
        let e = exps(&[2, 2, 4]);
        let cfg = SearchConfig {
            levels: 2,
            grid_per_axis: 5,
            initial_radius: 0.3,
            keep_top: 2,
            expand_limit: 1,
        };
        let grid = [4.0, 6.0, 9.0];
        let a = run_sweep(&e, &grid, Objective::MaximizePositive, &cfg).unwrap();
        let b = run_sweep(&e, &grid, Objective::MaximizePositive, &cfg).unwrap();
        assert_eq!(a, b);
        for r in &a {
            let expect = r
                .result
                .deviations
                .iter()
                .map(|d| d.abs())
                .fold(0.0, f64::max);
            assert_eq!(r.max_deviation, expect);
            assert_eq!(r.count_observed, r.result.value);
        }
    }

    #[test]
    fn csv_has_header_and_one_row_per_record() {
        let ts = [10.0, 20.0, 40.0];
        let devs = [0.3, 0.2, 0.1];
        let records = synthetic_records(&ts, &devs, 1e-6);
        let fit = fit_rate(&records, Rational::new(1, 4));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        emit(&records, &fit, EmitFormat::Csv, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[0],
            "t,a_1,a_2,a_3,dev_1,dev_2,dev_3,max_dev,count,predicted,resolution"
        );
    }

    #[test]
    fn json_round_trips_numeric_fields() {
        let ts = [10.0, 17.5, 40.0];
        let devs = [0.31, 0.22, 0.13];
        let records = synthetic_records(&ts, &devs, 1e-6);
        let fit = fit_rate(&records, Rational::new(1, 4));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.json");
        emit(&records, &fit, EmitFormat::Json, &path).unwrap();
        let value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let parsed = value["records"].as_array().unwrap();
        assert_eq!(parsed.len(), records.len());
        for (v, r) in parsed.iter().zip(&records) {
            assert_eq!(v["t"].as_f64().unwrap(), r.t);
            assert_eq!(v["max_deviation"].as_f64().unwrap(), r.max_deviation);
            assert_eq!(v["count_predicted"].as_f64().unwrap(), r.count_predicted);
            assert_eq!(v["count_observed"].as_u64().unwrap(), r.count_observed);
            for (dv, dr) in v["result"]["deviations"]
                .as_array()
                .unwrap()
                .iter()
                .zip(&r.result.deviations)
            {
                assert_eq!(dv.as_f64().unwrap(), *dr);
            }
        }
        assert_eq!(
            value["fit"]["slope"].as_f64().unwrap(),
            fit.slope.unwrap()
        );
    }

    #[test]
    fn svg_has_two_lines_and_one_point_per_qualifying_record() {
        let ts = [10.0, 20.0, 40.0, 80.0];
        let devs = [0.3, 0.2, 0.15, 1e-9]; // last record censored
        let records = synthetic_records(&ts, &devs, 1e-6);
        let fit = fit_rate(&records, Rational::new(1, 4));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.svg");
        emit(&records, &fit, EmitFormat::SvgScatter, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<line ").count(), 2);
        assert_eq!(text.matches("<circle ").count(), 3);
    }

    #[test]
    fn gamma_rate_feeds_fit_comparison() {
        let e = exps(&[2, 2, 4]);
        assert_eq!(gamma_rate(&e), Rational::new(1, 4));
    }
}
