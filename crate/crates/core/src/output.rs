//! CSV and JSON writers for experiment results.
//!
//! Floating-point values are printed with 9 significant digits, `%g` style:
//! fixed notation for decimal exponents in `[-5, 9)`, scientific otherwise,
//! trailing zeros removed.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{MetaStudy, SweepResult};
use crate::meta::{beta_cdf_complement, EmpiricalMeta};

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Size of the conditional-outage grid in the meta summary.
pub const META_GRID_POINTS: usize = 200;
pub const META_GRID_MIN_OUTAGE: f64 = 1e-5;

/// Maximum number of samples per separation written to the scatter file.
pub const SCATTER_PER_SEPARATION: usize = 1000;

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

/// Rounds to 9 significant digits; used for JSON numbers.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("round trip")
}

pub fn write_sweep_csv<W: Write>(out: W, sweep: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "separation_m",
        "link_class",
        "avg_success_analytic",
        "avg_success_empirical",
        "meta_at_avg",
        "n_realizations",
    ])?;
    for p in &sweep.points {
        w.write_record([
            fmt_sig(p.separation),
            p.link_class.name().to_string(),
            fmt_sig(p.average.value),
            fmt_sig(p.empirical_mean),
            fmt_sig(p.meta_at_average),
            p.samples.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Evenly spaced subset of `0..n` of at most `limit` indices, in ascending order.
pub fn thinned_indices(n: usize, limit: usize) -> Vec<usize> {
    if n <= limit {
        return (0..n).collect();
    }
    (0..limit).map(|k| k * n / limit).collect()
}

pub fn write_scatter_csv<W: Write>(out: W, sweep: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["separation_m", "realization_id", "conditional_outage"])?;
    for p in &sweep.points {
        for i in thinned_indices(p.samples.len(), SCATTER_PER_SEPARATION) {
            w.write_record([fmt_sig(p.separation), i.to_string(), fmt_sig(1.0 - p.samples[i])])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_meta_csv<W: Write>(out: W, meta: &EmpiricalMeta) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["realization_id", "conditional_success"])?;
    for (i, x) in meta.samples().iter().enumerate() {
        w.write_record([i.to_string(), fmt_sig(*x)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample set written by [`write_meta_csv`]; rows must be in
/// ascending `realization_id` order.
pub fn read_meta_csv<R: Read>(input: R, beta_db: f64) -> Result<EmpiricalMeta> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["realization_id", "conditional_success"] {
        return Err(Error::Domain(format!("unexpected meta CSV header: {headers:?}")));
    }
    let mut samples = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let id: usize = rec[0]
            .parse()
            .map_err(|_| Error::Domain(format!("row {}: bad realization_id", row + 1)))?;
        if id != row {
            return Err(Error::Domain(format!(
                "row {}: expected realization_id {row}, got {id}",
                row + 1
            )));
        }
        let x: f64 = rec[1]
            .parse()
            .map_err(|_| Error::Domain(format!("row {}: bad conditional_success", row + 1)))?;
        samples.push(x);
    }
    EmpiricalMeta::new(samples, beta_db)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaPoint {
    pub p: f64,
    pub empirical: f64,
    pub beta_approx: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaSummary {
    pub mean: f64,
    pub variance: f64,
    pub beta_a: Option<f64>,
    pub beta_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_fit_error: Option<String>,
    #[serde(rename = "F_r")]
    pub f_r: Vec<MetaPoint>,
}

/// Conditional-outage grid: `META_GRID_POINTS` log-spaced values in `[1e-5, 1]`.
pub fn outage_grid() -> Vec<f64> {
    let lo = META_GRID_MIN_OUTAGE.log10();
    let n = META_GRID_POINTS;
    (0..n)
        .map(|j| {
            if j + 1 == n {
                1.0
            } else {
                10f64.powf(lo + (0.0 - lo) * j as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

impl MetaSummary {
    pub fn from_study(study: &MetaStudy) -> Result<Self> {
        let meta = &study.meta;
        let variance = if meta.len() >= 2 { meta.variance()? } else { 0.0 };
        let fit = study.fit.as_ref().ok();
        let mut f_r = Vec::with_capacity(META_GRID_POINTS);
        for q in outage_grid() {
            let p = 1.0 - q;
            f_r.push(MetaPoint {
                p: round_sig(p),
                empirical: round_sig(meta.survival(p)?),
                beta_approx: fit.map(|b| round_sig(beta_cdf_complement(b, p))),
            });
        }
        Ok(MetaSummary {
            mean: round_sig(meta.mean()?),
            variance: round_sig(variance),
            beta_a: fit.map(|b| round_sig(b.a)),
            beta_b: fit.map(|b| round_sig(b.b)),
            beta_fit_error: study.fit.as_ref().err().cloned(),
            f_r,
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        Ok(())
    }
}
