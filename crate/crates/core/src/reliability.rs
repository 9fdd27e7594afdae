//! Conditional (per-realization) success probability `P(SINR >= β | Φ)`.
//!
//! With unit-mean exponential fading on every link, the wanted-link fading can
//! be integrated out exactly for a fixed interferer set:
//!
//! ```text
//! p_c = exp(-β' γ0) * Π_i 1 / (1 + β' ℓ(x_i, rx)),    β' = β / ℓ(tx, rx)
//! ```
//!
//! That product is the production path. [`conditional_success_mc`] draws the
//! fading explicitly and exists to cross-check it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{path_loss, sample_fading, ChannelParams};
use crate::error::{domain, Result};
use crate::geometry::Position;
use crate::traffic::Realization;

/// Above this many interferers the product is accumulated as a sum of logs.
const LOG_SPACE_THRESHOLD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    p0_dbm: f64,
    n0_dbm: f64,
    beta_db: f64,
    gamma0: f64,
    beta: f64,
}

impl RadioParams {
    pub fn new(p0_dbm: f64, n0_dbm: f64, beta_db: f64) -> Result<Self> {
        if !(p0_dbm.is_finite() && n0_dbm.is_finite() && beta_db.is_finite()) {
            return domain("radio parameters must be finite");
        }
        Ok(RadioParams {
            p0_dbm,
            n0_dbm,
            beta_db,
            gamma0: 10f64.powf((n0_dbm - p0_dbm) / 10.0),
            beta: 10f64.powf(beta_db / 10.0),
        })
    }

    /// 20 dBm transmit power, -99 dBm noise floor, 8 dB SINR threshold.
    pub fn reference() -> Self {
        Self::new(20.0, -99.0, 8.0).expect("reference radio parameters are valid")
    }

    pub fn p0_dbm(&self) -> f64 {
        self.p0_dbm
    }

    pub fn n0_dbm(&self) -> f64 {
        self.n0_dbm
    }

    pub fn beta_db(&self) -> f64 {
        self.beta_db
    }

    /// Noise-to-transmit-power ratio `N0/P0`, linear.
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// SINR threshold, linear.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_beta_db(&self, beta_db: f64) -> Result<Self> {
        Self::new(self.p0_dbm, self.n0_dbm, beta_db)
    }
}

/// A probability in `[0, 1]` conditioned on one interferer realization.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ConditionalReliability(f64);

impl ConditionalReliability {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return domain(format!("conditional reliability must lie in [0, 1], got {value}"));
        }
        Ok(ConditionalReliability(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn outage(self) -> f64 {
        1.0 - self.0
    }
}

/// A fixed TX/RX pair with the per-link quantities precomputed.
#[derive(Debug, Clone, Copy)]
pub struct Link<'a> {
    pub tx: Position,
    pub rx: Position,
    channel: &'a ChannelParams,
    radio: &'a RadioParams,
    wanted_gain: f64,
    beta_prime: f64,
}

impl<'a> Link<'a> {
    pub fn new(tx: Position, rx: Position, channel: &'a ChannelParams, radio: &'a RadioParams) -> Result<Self> {
        let wanted_gain = path_loss(&tx, &rx, channel)?;
        Ok(Link {
            tx,
            rx,
            channel,
            radio,
            wanted_gain,
            beta_prime: radio.beta() / wanted_gain,
        })
    }

    pub fn wanted_gain(&self) -> f64 {
        self.wanted_gain
    }

    /// `β / ℓ(tx, rx)`.
    pub fn beta_prime(&self) -> f64 {
        self.beta_prime
    }

    /// Success probability with no interferers, `exp(-β' γ0)`.
    pub fn noise_factor(&self) -> f64 {
        (-self.beta_prime * self.radio.gamma0()).exp()
    }

    pub fn interferer_gain(&self, x: &Position) -> f64 {
        self.channel.gain(x, &self.rx)
    }

    /// Closed-form conditional success for `realization`.
    pub fn conditional_success(&self, realization: &Realization) -> ConditionalReliability {
        let bp = self.beta_prime;
        let noise = self.noise_factor();
        let value = if realization.len() > LOG_SPACE_THRESHOLD {
            let log_sum: f64 = realization.iter().map(|x| (bp * self.interferer_gain(x)).ln_1p()).sum();
            noise * (-log_sum).exp()
        } else {
            realization
                .iter()
                .fold(noise, |acc, x| acc / (1.0 + bp * self.interferer_gain(x)))
        };
        ConditionalReliability(value.clamp(0.0, 1.0))
    }

    /// SINR for given fading powers (`interferer_fading` in [`Realization::iter`] order).
    pub fn sinr_with_fading(
        &self,
        realization: &Realization,
        tx_fading: f64,
        interferer_fading: &[f64],
    ) -> Result<f64> {
        let interference = normalized_interference(realization, &self.rx, self.channel, interferer_fading)?;
        Ok(tx_fading * self.wanted_gain / (interference + self.radio.gamma0()))
    }

    /// SINR with fresh unit-mean exponential fading on every link.
    pub fn sinr_sample<R: Rng + ?Sized>(&self, realization: &Realization, rng: &mut R) -> f64 {
        let signal = sample_fading(rng) * self.wanted_gain;
        let interference: f64 = realization
            .iter()
            .map(|x| sample_fading(rng) * self.interferer_gain(x))
            .sum();
        signal / (interference + self.radio.gamma0())
    }

    pub fn conditional_success_mc<R: Rng + ?Sized>(
        &self,
        realization: &Realization,
        n_fading: usize,
        rng: &mut R,
    ) -> Result<ConditionalReliability> {
        if n_fading == 0 {
            return domain("n_fading must be at least 1");
        }
        let beta = self.radio.beta();
        let hits = (0..n_fading)
            .filter(|_| self.sinr_sample(realization, rng) >= beta)
            .count();
        Ok(ConditionalReliability(hits as f64 / n_fading as f64))
    }
}

/// `Σ_i ℓ_f,i ℓ(x_i, rx)` with fading values given in [`Realization::iter`] order.
pub fn normalized_interference(
    realization: &Realization,
    rx: &Position,
    channel: &ChannelParams,
    fading: &[f64],
) -> Result<f64> {
    if fading.len() != realization.len() {
        return domain(format!(
            "fading list has {} entries but the realization has {} interferers",
            fading.len(),
            realization.len()
        ));
    }
    if fading.iter().any(|f| !(*f >= 0.0)) {
        return domain("fading values must be non-negative");
    }
    Ok(realization
        .iter()
        .zip(fading)
        .map(|(x, f)| f * channel.gain(x, rx))
        .sum())
}

pub fn sinr_sample<R: Rng + ?Sized>(
    tx: &Position,
    rx: &Position,
    realization: &Realization,
    channel: &ChannelParams,
    radio: &RadioParams,
    rng: &mut R,
) -> Result<f64> {
    Ok(Link::new(*tx, *rx, channel, radio)?.sinr_sample(realization, rng))
}

pub fn conditional_success_closed_form(
    tx: &Position,
    rx: &Position,
    realization: &Realization,
    channel: &ChannelParams,
    radio: &RadioParams,
) -> Result<ConditionalReliability> {
    Ok(Link::new(*tx, *rx, channel, radio)?.conditional_success(realization))
}

pub fn conditional_success_mc<R: Rng + ?Sized>(
    tx: &Position,
    rx: &Position,
    realization: &Realization,
    channel: &ChannelParams,
    radio: &RadioParams,
    n_fading: usize,
    rng: &mut R,
) -> Result<ConditionalReliability> {
    Link::new(*tx, *rx, channel, radio)?.conditional_success_mc(realization, n_fading, rng)
}
