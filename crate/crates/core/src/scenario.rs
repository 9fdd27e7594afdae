//! Full parameter set for an experiment, the reference defaults, and the flat
//! `key = value` config format.
//!
//! Config keys (units in brackets):
//!
//! | key | meaning |
//! |-----|---------|
//! | `model` | `urban` or `suburban` |
//! | `coefficient_unit` | `dBm` (default) or `dB`, how `A0`/`A0p` are converted |
//! | `R`, `R_x`, `R_y` | road half-lengths \[m\]; `R` sets both |
//! | `lambda`, `lambda_x`, `lambda_y` | vehicle intensity \[1/m\]; `lambda` sets both |
//! | `p_I` | Aloha transmit probability, or `auto` to solve for the design optimum |
//! | `alpha` | path loss exponent |
//! | `A0`, `A0p` | LOS/WLOS and NLOS coefficients; derived from `alpha`, `Delta` if absent |
//! | `Delta` | break-point distance \[m\] |
//! | `f0`, `d0` | carrier frequency \[Hz\] and reference distance \[m\]; informational |
//! | `P0`, `N0` | transmit power and noise floor \[dBm\] |
//! | `beta` | SINR threshold \[dB\] |
//! | `x_rx` | receiver offset on the horizontal road \[m\], negative |
//! | `P_target` | design target for the average success probability |
//! | `d_target` | separation at which the target must hold \[m\] |
//! | `d_max` | largest TX/RX separation of interest \[m\] |
//!
//! Blank lines and `#` comments are ignored; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::{solve_optimal_pi, DesignSpec};
use crate::channel::{table_a0_db, table_a0p_db, ChannelModel, ChannelParams, CoefficientUnit};
use crate::error::{Error, Result};
use crate::geometry::{Position, Road, RoadExtent, Trajectory};
use crate::reliability::RadioParams;
use crate::traffic::TrafficParams;

pub const DEFAULT_LAMBDA: f64 = 0.01;
pub const PRACTICAL_ROAD_M: f64 = 200.0;
pub const STRESS_ROAD_M: f64 = 10_000.0;
pub const DEFAULT_RX_OFFSET_M: f64 = -50.0;
pub const DEFAULT_P_TARGET: f64 = 0.9;
pub const DEFAULT_D_TARGET_M: f64 = 100.0;
pub const DEFAULT_D_MAX_M: f64 = 140.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub extent: RoadExtent,
    pub traffic: TrafficParams,
    pub channel: ChannelParams,
    pub radio: RadioParams,
    pub rx: Position,
    pub design: DesignSpec,
    pub d_max: f64,
}

impl Scenario {
    /// Checks the cross-field constraints.
    pub fn validate(&self) -> Result<()> {
        self.traffic.validate()?;
        if self.channel.breakpoint() > self.extent.r_x.min(self.extent.r_y) {
            return Err(Error::Config(format!(
                "break-point {} exceeds the shorter road half-length {}",
                self.channel.breakpoint(),
                self.extent.r_x.min(self.extent.r_y)
            )));
        }
        if self.rx.road() != Road::Horizontal || !(self.rx.offset() < 0.0) {
            return Err(Error::Config(format!(
                "receiver must sit on the horizontal road at a negative offset, got {}",
                self.rx
            )));
        }
        if !self.extent.contains(&self.rx) {
            return Err(Error::Config(format!(
                "receiver {} lies outside the road segment",
                self.rx
            )));
        }
        if !(self.d_max > self.rx.norm()) {
            return Err(Error::Config(format!(
                "d_max {} must exceed the receiver's distance to the junction {}",
                self.d_max,
                self.rx.norm()
            )));
        }
        if !(self.design.d_target > 0.0 && self.design.d_target <= self.d_max) {
            return Err(Error::Config(format!(
                "d_target {} must lie in (0, d_max = {}]",
                self.design.d_target, self.d_max
            )));
        }
        Ok(())
    }

    /// TX path from the receiver to the far end of the vertical leg.
    pub fn trajectory(&self) -> Trajectory {
        Trajectory::new(self.rx, self.d_max - self.rx.norm()).expect("validated scenario")
    }

    pub fn with_p_i(&self, p_i: f64) -> Result<Self> {
        let mut s = self.clone();
        s.traffic = s.traffic.with_p_i(p_i)?;
        Ok(s)
    }

    /// Reference scenario for `model` with road half-length `road_m` and the
    /// Aloha probability solved for the design target.
    pub fn reference(model: ChannelModel, road_m: f64) -> Result<Self> {
        ScenarioBuilder {
            model: Some(model),
            r: Some(road_m),
            ..Default::default()
        }
        .build()
    }

    pub fn summary(&self) -> String {
        format!(
            "model={} R_x={} R_y={} lambda_x={} lambda_y={} p_I={} alpha={} A0={}{unit} A0p={}{unit} \
             Delta={} P0={}dBm N0={}dBm beta={}dB x_rx={} P_target={} d_target={} d_max={}",
            self.channel.model().name(),
            self.extent.r_x,
            self.extent.r_y,
            self.traffic.lambda_x,
            self.traffic.lambda_y,
            self.traffic.p_i,
            self.channel.alpha(),
            self.channel.a0_db(),
            self.channel.a0p_db(),
            self.channel.breakpoint(),
            self.radio.p0_dbm(),
            self.radio.n0_dbm(),
            self.radio.beta_db(),
            self.rx.offset(),
            self.design.target,
            self.design.d_target,
            self.d_max,
            unit = self.channel.unit().name(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PiChoice {
    Fixed(f64),
    /// Largest Aloha probability that still meets the design target.
    Auto,
}

impl std::str::FromStr for PiChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(PiChoice::Auto);
        }
        s.parse::<f64>()
            .map(PiChoice::Fixed)
            .map_err(|_| Error::Config(format!("p_I must be a probability or 'auto', got '{s}'")))
    }
}

/// Partially specified scenario. Unset fields fall back to the reference
/// values when [`build`](ScenarioBuilder::build) runs, so layering config-file
/// values and then command-line values over one builder gives
/// command line > config file > defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioBuilder {
    pub model: Option<ChannelModel>,
    pub unit: Option<CoefficientUnit>,
    pub r: Option<f64>,
    pub r_x: Option<f64>,
    pub r_y: Option<f64>,
    pub lambda: Option<f64>,
    pub lambda_x: Option<f64>,
    pub lambda_y: Option<f64>,
    pub p_i: Option<PiChoice>,
    pub alpha: Option<f64>,
    pub a0_db: Option<f64>,
    pub a0p_db: Option<f64>,
    pub breakpoint: Option<f64>,
    pub f0: Option<f64>,
    pub d0: Option<f64>,
    pub p0_dbm: Option<f64>,
    pub n0_dbm: Option<f64>,
    pub beta_db: Option<f64>,
    pub x_rx: Option<f64>,
    pub p_target: Option<f64>,
    pub d_target: Option<f64>,
    pub d_max: Option<f64>,
}

fn parse_num(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got '{value}'")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("{key}: value must be finite")));
    }
    Ok(v)
}

impl ScenarioBuilder {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || parse_num(key, value);
        match key {
            "model" => self.model = Some(value.parse().map_err(|e: Error| Error::Config(e.to_string()))?),
            "coefficient_unit" => self.unit = Some(value.parse().map_err(|e: Error| Error::Config(e.to_string()))?),
            "R" => self.r = Some(num()?),
            "R_x" => self.r_x = Some(num()?),
            "R_y" => self.r_y = Some(num()?),
            "lambda" => self.lambda = Some(num()?),
            "lambda_x" => self.lambda_x = Some(num()?),
            "lambda_y" => self.lambda_y = Some(num()?),
            "p_I" => self.p_i = Some(value.parse()?),
            "alpha" => self.alpha = Some(num()?),
            "A0" => self.a0_db = Some(num()?),
            "A0p" => self.a0p_db = Some(num()?),
            "Delta" => self.breakpoint = Some(num()?),
            "f0" => self.f0 = Some(num()?),
            "d0" => self.d0 = Some(num()?),
            "P0" => self.p0_dbm = Some(num()?),
            "N0" => self.n0_dbm = Some(num()?),
            "beta" => self.beta_db = Some(num()?),
            "x_rx" => self.x_rx = Some(num()?),
            "P_target" => self.p_target = Some(num()?),
            "d_target" => self.d_target = Some(num()?),
            "d_max" => self.d_max = Some(num()?),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`.
    pub fn apply_config_str(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_config_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_config_str(&text)
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut b = Self::default();
        b.apply_config_str(text)?;
        Ok(b)
    }

    /// Overwrites fields that are set in `other`.
    pub fn merge(&mut self, other: &ScenarioBuilder) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            model, unit, r, r_x, r_y, lambda, lambda_x, lambda_y, p_i, alpha, a0_db, a0p_db, breakpoint, f0, d0,
            p0_dbm, n0_dbm, beta_db, x_rx, p_target, d_target, d_max
        );
    }

    pub fn build(&self) -> Result<Scenario> {
        let model = self.model.unwrap_or(ChannelModel::Urban);
        let r = self.r.unwrap_or(PRACTICAL_ROAD_M);
        let extent = RoadExtent::new(self.r_x.unwrap_or(r), self.r_y.unwrap_or(r))?;
        let lambda = self.lambda.unwrap_or(DEFAULT_LAMBDA);
        let alpha = self.alpha.unwrap_or(model.default_alpha());
        let breakpoint = self.breakpoint.unwrap_or(crate::channel::DEFAULT_BREAKPOINT_M);
        let mut channel = ChannelParams::new(
            model,
            alpha,
            self.a0_db.unwrap_or_else(|| table_a0_db(alpha)),
            self.a0p_db.unwrap_or_else(|| table_a0p_db(alpha, breakpoint)),
            breakpoint,
            self.unit.unwrap_or(CoefficientUnit::DecibelMilliwatt),
        )?;
        if let Some(f0) = self.f0 {
            channel.frequency = f0;
        }
        if let Some(d0) = self.d0 {
            channel.ref_distance = d0;
        }
        let radio = RadioParams::new(
            self.p0_dbm.unwrap_or(20.0),
            self.n0_dbm.unwrap_or(-99.0),
            self.beta_db.unwrap_or(8.0),
        )?;
        let rx = Position::horizontal(self.x_rx.unwrap_or(DEFAULT_RX_OFFSET_M));
        let d_max = self.d_max.unwrap_or(DEFAULT_D_MAX_M);
        let d_target = self.d_target.unwrap_or(DEFAULT_D_TARGET_M);
        let target = self.p_target.unwrap_or(DEFAULT_P_TARGET);
        let trajectory = Trajectory::new(rx, d_max - rx.norm()).map_err(|e| Error::Config(e.to_string()))?;
        let design =
            DesignSpec::on_trajectory(target, d_target, &trajectory).map_err(|e| Error::Config(e.to_string()))?;
        let pending = self.p_i.unwrap_or(PiChoice::Auto);
        let traffic = TrafficParams::new(
            self.lambda_x.unwrap_or(lambda),
            self.lambda_y.unwrap_or(lambda),
            match pending {
                PiChoice::Fixed(p) => p,
                PiChoice::Auto => 0.0,
            },
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        let mut scenario = Scenario {
            extent,
            traffic,
            channel,
            radio,
            rx,
            design,
            d_max,
        };
        scenario.validate()?;
        if pending == PiChoice::Auto {
            let p = solve_optimal_pi(&scenario.design, &scenario)?;
            scenario.traffic = scenario.traffic.with_p_i(p)?;
        }
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_defaults() {
        let b = ScenarioBuilder {
            p_i: Some(PiChoice::Fixed(0.013)),
            ..Default::default()
        };
        let s = b.build().unwrap();
        assert_eq!(s.channel.model(), ChannelModel::Urban);
        assert_eq!(s.channel.alpha(), 1.68);
        assert_eq!(s.extent, RoadExtent::symmetric(200.0).unwrap());
        assert_eq!(s.rx, Position::horizontal(-50.0));
        assert_eq!(s.design.tx_at_target, Position::vertical(50.0));
        assert_eq!(s.design.target, 0.9);
        assert_eq!(s.d_max, 140.0);
        assert_eq!(s.traffic.lambda_x, 0.01);
        assert_eq!(s.radio.beta_db(), 8.0);
        assert_eq!(s.channel.unit(), CoefficientUnit::DecibelMilliwatt);
        assert!((s.channel.a0p_db() - table_a0p_db(1.68, 15.0)).abs() < 1e-12);
    }

    #[test]
    fn config_parsing_and_precedence() {
        let text = "
            # stress test
            model = suburban
            R = 10000
            p_I = 0.0021   # fixed
            beta = 6
        ";
        let mut b = ScenarioBuilder::from_config_str(text).unwrap();
        assert_eq!(b.model, Some(ChannelModel::Suburban));
        let cli = ScenarioBuilder {
            beta_db: Some(8.0),
            ..Default::default()
        };
        b.merge(&cli);
        let s = b.build().unwrap();
        assert_eq!(s.radio.beta_db(), 8.0);
        assert_eq!(s.extent.r_x, 10_000.0);
        assert_eq!(s.traffic.p_i, 0.0021);
        assert_eq!(s.channel.alpha(), 2.0);
    }

    #[test]
    fn config_errors() {
        assert!(ScenarioBuilder::from_config_str("bogus = 1").is_err());
        assert!(ScenarioBuilder::from_config_str("R 200").is_err());
        assert!(ScenarioBuilder::from_config_str("R = abc").is_err());
        assert!(ScenarioBuilder::from_config_str("model = rural").is_err());
        assert!(ScenarioBuilder::from_config_str("p_I = maybe").is_err());
        let b = ScenarioBuilder::from_config_str("Delta = 500\np_I = 0.1").unwrap();
        assert!(b.build().is_err());
        let b = ScenarioBuilder::from_config_str("x_rx = 50\np_I = 0.1").unwrap();
        assert!(b.build().is_err());
        let b = ScenarioBuilder::from_config_str("p_I = 1.5").unwrap();
        assert!(b.build().is_err());
    }

    #[test]
    fn explicit_coefficients_override_formulas() {
        let b = ScenarioBuilder::from_config_str("A0 = -20\nA0p = -5\ncoefficient_unit = dB\np_I = 0.01").unwrap();
        let s = b.build().unwrap();
        assert_eq!(s.channel.a0_db(), -20.0);
        assert_eq!(s.channel.a0p_db(), -5.0);
        assert!((s.channel.a0() - 0.01).abs() < 1e-15);
    }
}
