//! Separation sweeps, meta-distribution studies and the validation report.
//!
//! Realization `i` at lane `k` always draws from `rng::substream(seed, k, i)`;
//! work is spread over the rayon pool and collected in index order, so results
//! do not depend on the number of workers.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::analytic::{average_success, laplace_factor, AverageReliability};
use crate::channel::{classify_link, sample_fading, ChannelParams, LinkClass};
use crate::error::{domain, Result};
use crate::geometry::{Position, Road};
use crate::meta::{fit_beta_moments, BetaParams, EmpiricalMeta};
use crate::output::fmt_sig;
use crate::reliability::Link;
use crate::rng::{substream, META_LANE, SWEEP_LANES, VALIDATION_LANE};
use crate::scenario::Scenario;
use crate::traffic::{sample_realization, Realization};

pub const DEFAULT_REALIZATIONS: usize = 10_000;
pub const DEFAULT_FADING_DRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub separation: f64,
    pub tx: Position,
    pub link_class: LinkClass,
    pub average: AverageReliability,
    pub empirical_mean: f64,
    /// Empirical `F_r(β, p)` at `p` = the analytic average success.
    pub meta_at_average: f64,
    /// Conditional success of every realization, in realization order.
    pub samples: Vec<f64>,
}

impl SweepPoint {
    /// Standard error of the empirical mean.
    pub fn standard_error(&self) -> f64 {
        standard_error(&self.samples)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub seed: u64,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn at(&self, separation: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| (p.separation - separation).abs() < 1e-9)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn standard_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

/// Separations `s_min, s_min + step, ...` up to and including `s_max`.
pub fn separation_grid(s_min: f64, s_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return domain(format!("separation step must be positive, got {step}"));
    }
    if !(s_min >= 1.0 && s_min < s_max) {
        return domain(format!(
            "separation range must satisfy 1 <= s_min < s_max, got [{s_min}, {s_max}]"
        ));
    }
    let n = ((s_max - s_min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| s_min + k as f64 * step).collect())
}

/// Closed-form conditional success for realizations `0..n` of `lane`.
fn conditional_samples(scenario: &Scenario, link: &Link<'_>, n: usize, seed: u64, lane: u64) -> Vec<f64> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, lane, i as u64);
            let realization = sample_realization(&scenario.extent, &scenario.traffic, &mut rng);
            link.conditional_success(&realization).value()
        })
        .collect()
}

pub fn run_separation_sweep(
    scenario: &Scenario,
    s_min: f64,
    s_max: f64,
    step: f64,
    n_realizations: usize,
    seed: u64,
) -> Result<SweepResult> {
    if n_realizations == 0 {
        return domain("n_realizations must be at least 1");
    }
    if s_max > scenario.d_max + 1e-9 {
        return domain(format!("s_max {s_max} exceeds d_max {}", scenario.d_max));
    }
    let grid = separation_grid(s_min, s_max, step)?;
    if grid.len() as u64 > SWEEP_LANES {
        return domain(format!("{} separations exceed the supported {SWEEP_LANES}", grid.len()));
    }
    let trajectory = scenario.trajectory();
    let rx = scenario.rx;
    let points = grid
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let tx = trajectory.position_at(s.min(trajectory.max_separation()))?;
            let link = Link::new(tx, rx, &scenario.channel, &scenario.radio)?;
            let average = average_success(&tx, &rx, scenario)?;
            let samples = conditional_samples(scenario, &link, n_realizations, seed, k as u64);
            let meta = EmpiricalMeta::new(samples, scenario.radio.beta_db())?;
            Ok(SweepPoint {
                separation: s,
                tx,
                link_class: classify_link(&tx, &rx, &scenario.channel)?,
                average,
                empirical_mean: meta.mean()?,
                meta_at_average: meta.survival(average.value)?,
                samples: meta.samples().to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { seed, points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaStudy {
    pub separation: f64,
    pub tx: Position,
    pub average: AverageReliability,
    pub meta: EmpiricalMeta,
    /// Beta fit, or the reason the fit is degenerate.
    pub fit: std::result::Result<BetaParams, String>,
}

pub fn run_meta_study(scenario: &Scenario, separation: f64, n_realizations: usize, seed: u64) -> Result<MetaStudy> {
    if n_realizations < 2 {
        return domain("a meta study needs at least two realizations");
    }
    let trajectory = scenario.trajectory();
    if !(separation > 0.0 && separation <= trajectory.max_separation()) {
        return domain(format!(
            "separation {separation} outside (0, {}]",
            trajectory.max_separation()
        ));
    }
    let tx = trajectory.position_at(separation)?;
    let rx = scenario.rx;
    let link = Link::new(tx, rx, &scenario.channel, &scenario.radio)?;
    let average = average_success(&tx, &rx, scenario)?;
    let samples = conditional_samples(scenario, &link, n_realizations, seed, META_LANE);
    let meta = EmpiricalMeta::new(samples, scenario.radio.beta_db())?;
    let fit = fit_beta_moments(&meta).map_err(|e| e.to_string());
    Ok(MetaStudy {
        separation,
        tx,
        average,
        meta,
        fit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{tag} {}: {}", c.name, c.detail).unwrap();
        }
        let n_pass = self.checks.iter().filter(|c| c.passed).count();
        writeln!(out, "{n_pass}/{} checks passed", self.checks.len()).unwrap();
        out
    }
}

pub const CHECK_CLOSED_FORM: &str = "closed_form_vs_fading_mc";
pub const CHECK_MEAN: &str = "mean_vs_analytic";
pub const CHECK_LAPLACE: &str = "laplace_vs_mc";
pub const CHECK_DESIGN: &str = "design_position_is_worst_case";

/// Sub-lanes of the validation lane.
const SUB_CONFIG: u64 = 0;
const SUB_MEAN: u64 = 1;
const SUB_LAPLACE: u64 = 3;

/// Half-width of the window around the receiver in which validation
/// configurations place their interferers.
const CONFIG_WINDOW_M: f64 = 300.0;
const MAX_CONFIG_INTERFERERS: usize = 4;

/// Share of configurations whose Monte Carlo estimate must fall within 3 sigma.
pub const MIN_PERCENT_WITHIN_3_SIGMA: usize = 99;

/// Two-sided tail mass outside ±3σ of a normal distribution.
pub const THREE_SIGMA_P_VALUE: f64 = 0.0027;

/// Exact two-sided p-value of `hits` successes in `n` Bernoulli(`p`) trials.
/// Unlike the normal approximation this stays calibrated when `n p` is small.
pub fn binomial_two_sided_p_value(hits: u64, n: u64, p: f64) -> f64 {
    let d = Binomial::new(p.clamp(0.0, 1.0), n).expect("valid binomial");
    let lower = d.cdf(hits);
    let upper = if hits == 0 { 1.0 } else { d.sf(hits - 1) };
    (2.0 * lower.min(upper)).min(1.0)
}

/// Random TX on the trajectory plus 1 to 4 interferers near the receiver.
fn random_configuration<R: Rng>(scenario: &Scenario, rng: &mut R) -> (Position, Realization) {
    let trajectory = scenario.trajectory();
    let s = rng.random_range(1.0..=trajectory.max_separation());
    let tx = trajectory.position_at(s).expect("inside the trajectory");
    let k = rng.random_range(1..=MAX_CONFIG_INTERFERERS);
    let mut realization = Realization::empty();
    for _ in 0..k {
        let road = if rng.random_bool(0.5) {
            Road::Horizontal
        } else {
            Road::Vertical
        };
        let half = scenario.extent.half_length(road).min(CONFIG_WINDOW_M);
        realization.push(Position::new(road, rng.random_range(-half..=half)));
    }
    (tx, realization)
}

pub fn check_closed_form(scenario: &Scenario, n_configs: usize, n_fading: usize, seed: u64) -> Result<Check> {
    let results = (0..n_configs)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, VALIDATION_LANE + SUB_CONFIG, i as u64);
            let (tx, realization) = random_configuration(scenario, &mut rng);
            let link = Link::new(tx, scenario.rx, &scenario.channel, &scenario.radio)?;
            let exact = link.conditional_success(&realization).value();
            let mc = link.conditional_success_mc(&realization, n_fading, &mut rng)?.value();
            let hits = (mc * n_fading as f64).round() as u64;
            let p_value = binomial_two_sided_p_value(hits, n_fading as u64, exact);
            Ok((p_value >= THREE_SIGMA_P_VALUE, (mc - exact).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let inside = results.iter().filter(|r| r.0).count();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(Check {
        name: CHECK_CLOSED_FORM.into(),
        passed: inside * 100 >= n_configs * MIN_PERCENT_WITHIN_3_SIGMA,
        detail: format!(
            "{inside}/{n_configs} configurations within 3 sigma, exact binomial ({n_fading} fading draws), max |diff| {}",
            fmt_sig(worst)
        ),
    })
}

/// Empirical mean of the conditional success simulated under `simulated`
/// against the analytic average under `analytic`, at the design position.
pub fn check_mean(analytic: &Scenario, simulated: &Scenario, n: usize, seed: u64) -> Result<Check> {
    let tx = analytic.design.tx_at_target;
    let rx = analytic.rx;
    let expected = average_success(&tx, &rx, analytic)?.value;
    let link = Link::new(tx, rx, &simulated.channel, &simulated.radio)?;
    let samples = conditional_samples(simulated, &link, n, seed, VALIDATION_LANE + SUB_MEAN);
    let m = mean(&samples);
    let se = standard_error(&samples);
    Ok(Check {
        name: CHECK_MEAN.into(),
        passed: (m - expected).abs() <= 3.0 * se + 1e-12,
        detail: format!(
            "empirical {} vs analytic {} at {tx} (3 SE = {})",
            fmt_sig(m),
            fmt_sig(expected),
            fmt_sig(3.0 * se)
        ),
    })
}

/// Per-road Laplace factor against the Monte Carlo mean of `exp(-β' I)`.
pub fn check_laplace(scenario: &Scenario, n: usize, seed: u64) -> Result<Check> {
    let tx = scenario.design.tx_at_target;
    let rx = scenario.rx;
    let link = Link::new(tx, rx, &scenario.channel, &scenario.radio)?;
    let mut passed = true;
    let mut parts = Vec::new();
    for (r, road) in [Road::Horizontal, Road::Vertical].into_iter().enumerate() {
        let exact = laplace_factor(road, &tx, &rx, scenario)?;
        let lane = VALIDATION_LANE + SUB_LAPLACE + r as u64;
        let samples: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(seed, lane, i as u64);
                let realization = sample_realization(&scenario.extent, &scenario.traffic, &mut rng);
                let interference: f64 = realization
                    .on_road(road)
                    .iter()
                    .map(|x| sample_fading(&mut rng) * link.interferer_gain(x))
                    .sum();
                (-link.beta_prime() * interference).exp()
            })
            .collect();
        let m = mean(&samples);
        let se = standard_error(&samples);
        passed &= (m - exact).abs() <= 3.0 * se + 1e-12;
        parts.push(format!(
            "{}: MC {} vs {} (3 SE = {})",
            road.tag(),
            fmt_sig(m),
            fmt_sig(exact),
            fmt_sig(3.0 * se)
        ));
    }
    Ok(Check {
        name: CHECK_LAPLACE.into(),
        passed,
        detail: parts.join("; "),
    })
}

/// The design TX must minimize the average success over trajectory positions
/// within `d_target` of the receiver (1 m grid).
pub fn check_design(scenario: &Scenario) -> Result<Check> {
    let rx = scenario.rx;
    let design = average_success(&scenario.design.tx_at_target, &rx, scenario)?.value;
    let trajectory = scenario.trajectory();
    let mut worst = (f64::INFINITY, 0.0);
    let n = scenario.design.d_target.floor() as usize;
    for s in (1..=n).map(|s| s as f64) {
        let v = average_success(&trajectory.position_at(s)?, &rx, scenario)?.value;
        if v < worst.0 {
            worst = (v, s);
        }
    }
    Ok(Check {
        name: CHECK_DESIGN.into(),
        passed: design <= worst.0 + 1e-12,
        detail: format!(
            "design success {} vs minimum {} at s = {} m",
            fmt_sig(design),
            fmt_sig(worst.0),
            fmt_sig(worst.1)
        ),
    })
}

/// Cross-checks with the analytic side taken from `analytic` and the
/// simulated side from `simulated`; with both equal every check should pass.
pub fn run_validation_pair(
    analytic: &Scenario,
    simulated: &Scenario,
    n_realizations: usize,
    n_fading: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if n_realizations < 10 {
        return domain("validation needs at least 10 realizations");
    }
    if n_fading < 100 {
        return domain("validation needs at least 100 fading draws");
    }
    Ok(ValidationReport {
        checks: vec![
            check_closed_form(simulated, n_realizations, n_fading, seed)?,
            check_mean(analytic, simulated, n_realizations, seed)?,
            check_laplace(simulated, n_realizations, seed)?,
            check_design(analytic)?,
        ],
    })
}

pub fn run_validation(
    scenario: &Scenario,
    n_realizations: usize,
    n_fading: usize,
    seed: u64,
) -> Result<ValidationReport> {
    run_validation_pair(scenario, scenario, n_realizations, n_fading, seed)
}

/// Copy of `scenario` with the LOS coefficient shifted by `delta_db`.
pub fn with_corrupted_a0(scenario: &Scenario, delta_db: f64) -> Result<Scenario> {
    let c = &scenario.channel;
    let mut channel = ChannelParams::new(
        c.model(),
        c.alpha(),
        c.a0_db() + delta_db,
        c.a0p_db(),
        c.breakpoint(),
        c.unit(),
    )?;
    channel.frequency = c.frequency;
    channel.ref_distance = c.ref_distance;
    let mut s = scenario.clone();
    s.channel = channel;
    Ok(s)
}
