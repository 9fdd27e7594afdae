//! Deterministic path loss for the suburban (power-law) and urban
//! (VirtualSource11p-style, three case) intersection models, plus Rayleigh
//! fading draws.
//!
//! Path loss is a dimensionless linear gain. The receiver is assumed to sit on
//! the horizontal road; transmitters and interferers may be on either road.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{euclidean_distance, Position, Road};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelModel {
    Suburban,
    Urban,
}

impl ChannelModel {
    pub fn name(self) -> &'static str {
        match self {
            ChannelModel::Suburban => "suburban",
            ChannelModel::Urban => "urban",
        }
    }

    /// Path loss exponent used for this environment in the reference scenarios.
    pub fn default_alpha(self) -> f64 {
        match self {
            ChannelModel::Suburban => 2.0,
            ChannelModel::Urban => 1.68,
        }
    }
}

impl std::str::FromStr for ChannelModel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "suburban" => Ok(ChannelModel::Suburban),
            "urban" => Ok(ChannelModel::Urban),
            other => domain(format!("unknown channel model '{other}' (expected urban or suburban)")),
        }
    }
}

/// How the logarithmic path loss coefficients are converted to linear gains.
///
/// `Decibel` reads a coefficient `c` as the ratio `10^(c/10)`. `DecibelMilliwatt`
/// reads it as a dBm figure and converts to watts, `10^((c - 30)/10)`, while
/// transmit and noise powers stay in milliwatts. The reference scenarios use
/// `DecibelMilliwatt`, which is what makes the tabulated coefficients reproduce
/// the reported optimal Aloha probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientUnit {
    Decibel,
    DecibelMilliwatt,
}

impl CoefficientUnit {
    pub fn to_linear(self, value: f64) -> f64 {
        match self {
            CoefficientUnit::Decibel => 10f64.powf(value / 10.0),
            CoefficientUnit::DecibelMilliwatt => 10f64.powf((value - 30.0) / 10.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CoefficientUnit::Decibel => "dB",
            CoefficientUnit::DecibelMilliwatt => "dBm",
        }
    }
}

impl std::str::FromStr for CoefficientUnit {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dB" | "db" => Ok(CoefficientUnit::Decibel),
            "dBm" | "dbm" => Ok(CoefficientUnit::DecibelMilliwatt),
            other => domain(format!("unknown coefficient unit '{other}' (expected dB or dBm)")),
        }
    }
}

/// LOS/WLOS coefficient `A0` in dB for path loss exponent `alpha`.
pub fn table_a0_db(alpha: f64) -> f64 {
    -37.86 + 10.0 * alpha
}

/// NLOS coefficient `A0'` in dB for exponent `alpha` and break-point `breakpoint`.
pub fn table_a0p_db(alpha: f64, breakpoint: f64) -> f64 {
    -38.32 + (7.0 + 10.0 * breakpoint.log10()) * alpha
}

pub const DEFAULT_BREAKPOINT_M: f64 = 15.0;
pub const DEFAULT_FREQUENCY_HZ: f64 = 5.9e9;
pub const DEFAULT_REF_DISTANCE_M: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    model: ChannelModel,
    alpha: f64,
    a0_db: f64,
    a0p_db: f64,
    breakpoint: f64,
    unit: CoefficientUnit,
    /// Carried for reference only; the path loss formulas do not use it.
    pub frequency: f64,
    /// Carried for reference only; the path loss formulas do not use it.
    pub ref_distance: f64,
    a0: f64,
    a0p: f64,
}

impl ChannelParams {
    pub fn new(
        model: ChannelModel,
        alpha: f64,
        a0_db: f64,
        a0p_db: f64,
        breakpoint: f64,
        unit: CoefficientUnit,
    ) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return domain(format!("path loss exponent must exceed 1, got {alpha}"));
        }
        if !(breakpoint > 0.0 && breakpoint.is_finite()) {
            return domain(format!("break-point distance must be positive, got {breakpoint}"));
        }
        if !(a0_db.is_finite() && a0p_db.is_finite()) {
            return domain("path loss coefficients must be finite");
        }
        Ok(ChannelParams {
            model,
            alpha,
            a0_db,
            a0p_db,
            breakpoint,
            unit,
            frequency: DEFAULT_FREQUENCY_HZ,
            ref_distance: DEFAULT_REF_DISTANCE_M,
            a0: unit.to_linear(a0_db),
            a0p: unit.to_linear(a0p_db),
        })
    }

    /// Coefficients derived from `alpha` and `breakpoint` with the tabulated formulas.
    pub fn from_table_formulas(
        model: ChannelModel,
        alpha: f64,
        breakpoint: f64,
        unit: CoefficientUnit,
    ) -> Result<Self> {
        Self::new(
            model,
            alpha,
            table_a0_db(alpha),
            table_a0p_db(alpha, breakpoint),
            breakpoint,
            unit,
        )
    }

    /// Reference channel: default exponent for `model`, 15 m break-point, dBm coefficients.
    pub fn reference(model: ChannelModel) -> Self {
        Self::from_table_formulas(
            model,
            model.default_alpha(),
            DEFAULT_BREAKPOINT_M,
            CoefficientUnit::DecibelMilliwatt,
        )
        .expect("reference channel parameters are valid")
    }

    pub fn model(&self) -> ChannelModel {
        self.model
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a0_db(&self) -> f64 {
        self.a0_db
    }

    pub fn a0p_db(&self) -> f64 {
        self.a0p_db
    }

    pub fn breakpoint(&self) -> f64 {
        self.breakpoint
    }

    pub fn unit(&self) -> CoefficientUnit {
        self.unit
    }

    /// Linear LOS/WLOS coefficient.
    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Linear NLOS coefficient.
    pub fn a0p(&self) -> f64 {
        self.a0p
    }

    /// Path loss from `x` to `rx` without the coincidence check.
    ///
    /// Returns `+inf` when `x == rx`. Used for interferers, whose positions are
    /// random and may land arbitrarily close to the receiver.
    #[inline]
    pub fn gain(&self, x: &Position, rx: &Position) -> f64 {
        match self.model {
            ChannelModel::Suburban => self.a0 * euclidean_distance(x, rx).powf(-self.alpha),
            ChannelModel::Urban => match classify(x, rx, self.breakpoint) {
                LinkClass::Los => self.a0 * (x.offset() - rx.offset()).abs().powf(-self.alpha),
                LinkClass::Wlos => self.a0 * (x.norm() + rx.norm()).powf(-self.alpha),
                LinkClass::Nlos => self.a0p * (x.norm() * rx.norm()).powf(-self.alpha),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkClass {
    Los,
    Wlos,
    Nlos,
}

impl LinkClass {
    pub fn name(self) -> &'static str {
        match self {
            LinkClass::Los => "LOS",
            LinkClass::Wlos => "WLOS",
            LinkClass::Nlos => "NLOS",
        }
    }
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[inline]
fn classify(x: &Position, rx: &Position, breakpoint: f64) -> LinkClass {
    match x.road() {
        Road::Horizontal => LinkClass::Los,
        Road::Vertical if x.norm().min(rx.norm()) > breakpoint => LinkClass::Nlos,
        Road::Vertical => LinkClass::Wlos,
    }
}

fn check_link(tx: &Position, rx: &Position) -> Result<()> {
    if rx.road() != Road::Horizontal {
        return domain(format!("receiver must be on the horizontal road, got {rx}"));
    }
    if tx == rx {
        return domain(format!("transmitter and receiver coincide at {tx}"));
    }
    Ok(())
}

/// Which of the three urban cases applies to the link `tx -> rx`.
pub fn classify_link(tx: &Position, rx: &Position, params: &ChannelParams) -> Result<LinkClass> {
    check_link(tx, rx)?;
    Ok(classify(tx, rx, params.breakpoint))
}

pub fn path_loss(tx: &Position, rx: &Position, params: &ChannelParams) -> Result<f64> {
    check_link(tx, rx)?;
    Ok(params.gain(tx, rx))
}

/// Unit-mean exponential draw (power gain of a Rayleigh-faded link).
#[inline]
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn db_channel(model: ChannelModel) -> ChannelParams {
        ChannelParams::from_table_formulas(model, model.default_alpha(), 15.0, CoefficientUnit::Decibel).unwrap()
    }

    #[test]
    fn table_coefficients() {
        assert!((table_a0_db(2.0) - (-17.86)).abs() < 1e-12);
        assert!((table_a0p_db(1.68, 15.0) - (-6.801_666_847_864_556)).abs() < 1e-9);
        let c = ChannelParams::reference(ChannelModel::Urban);
        assert!((c.a0() - 10f64.powf((table_a0_db(1.68) - 30.0) / 10.0)).abs() < 1e-18);
    }

    #[test]
    fn classify_examples() {
        let rx = Position::horizontal(-50.0);
        let ch = db_channel(ChannelModel::Urban);
        assert_eq!(
            classify_link(&Position::vertical(16.0), &rx, &ch).unwrap(),
            LinkClass::Nlos
        );
        assert_eq!(
            classify_link(&Position::vertical(15.0), &rx, &ch).unwrap(),
            LinkClass::Wlos
        );
        assert_eq!(
            classify_link(&Position::horizontal(30.0), &rx, &ch).unwrap(),
            LinkClass::Los
        );
        assert_eq!(
            classify_link(&Position::vertical(-16.0), &rx, &ch).unwrap(),
            LinkClass::Nlos
        );
        assert_eq!(
            classify_link(&Position::vertical(0.0), &rx, &ch).unwrap(),
            LinkClass::Los
        );
        assert!(classify_link(&rx, &rx, &ch).is_err());
    }

    #[test]
    fn suburban_example() {
        let ch = db_channel(ChannelModel::Suburban);
        let g = path_loss(&Position::horizontal(50.0), &Position::horizontal(-50.0), &ch).unwrap();
        assert!((g - 1.636_816_521_427_808_6e-6).abs() < 1e-18);
        let g2 = path_loss(&Position::vertical(100.0), &Position::horizontal(0.0), &ch).unwrap();
        assert!((g2 - g).abs() < 1e-18);
    }

    #[test]
    fn urban_nlos_example() {
        let ch = db_channel(ChannelModel::Urban);
        let g = path_loss(&Position::vertical(90.0), &Position::horizontal(-50.0), &ch).unwrap();
        assert!((g / 1.522_075_838_742_024e-7 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn urban_wlos_jump_at_breakpoint() {
        let ch = db_channel(ChannelModel::Urban);
        let rx = Position::horizontal(-50.0);
        let wlos = path_loss(&Position::vertical(15.0), &rx, &ch).unwrap();
        let nlos = path_loss(&Position::vertical(15.0 + 1e-9), &rx, &ch).unwrap();
        assert!((wlos / 7.051_890_512_615_829e-6 - 1.0).abs() < 1e-12);
        assert!(wlos > 0.0 && nlos > 0.0);
        assert!(wlos / nlos > 2.0, "expected a finite jump, got {wlos} vs {nlos}");
    }

    #[test]
    fn dbm_unit_is_thirty_db_lower() {
        let db = db_channel(ChannelModel::Urban);
        let dbm = ChannelParams::reference(ChannelModel::Urban);
        let rx = Position::horizontal(-50.0);
        for tx in [
            Position::vertical(90.0),
            Position::vertical(5.0),
            Position::horizontal(20.0),
        ] {
            let ratio = path_loss(&tx, &rx, &dbm).unwrap() / path_loss(&tx, &rx, &db).unwrap();
            assert!((ratio - 1e-3).abs() < 1e-15);
        }
    }

    #[test]
    fn coincident_link_is_rejected() {
        let ch = db_channel(ChannelModel::Suburban);
        let rx = Position::horizontal(-50.0);
        assert!(path_loss(&rx, &rx, &ch).is_err());
        assert!(ch.gain(&rx, &rx).is_infinite());
        assert!(path_loss(&rx, &Position::vertical(-50.0), &ch).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(ChannelParams::new(ChannelModel::Urban, 1.0, 0.0, 0.0, 15.0, CoefficientUnit::Decibel).is_err());
        assert!(ChannelParams::new(ChannelModel::Urban, 2.0, 0.0, 0.0, 0.0, CoefficientUnit::Decibel).is_err());
    }

    #[test]
    fn fading_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let (mut sum, mut sum2, mut tail) = (0.0, 0.0, 0usize);
        for _ in 0..n {
            let x = sample_fading(&mut rng);
            assert!(x >= 0.0);
            sum += x;
            sum2 += x * x;
            tail += usize::from(x > 3.0);
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
        let p = tail as f64 / n as f64;
        assert!((p - (-3f64).exp()).abs() < 0.002, "tail {p}");
    }

    proptest! {
        #[test]
        fn los_branch_matches_suburban_formula(x in -500f64..500.0) {
            prop_assume!(x != -50.0);
            let rx = Position::horizontal(-50.0);
            let tx = Position::horizontal(x);
            let urban = ChannelParams::from_table_formulas(ChannelModel::Urban, 2.0, 15.0, CoefficientUnit::Decibel).unwrap();
            let sub = ChannelParams::from_table_formulas(ChannelModel::Suburban, 2.0, 15.0, CoefficientUnit::Decibel).unwrap();
            prop_assert_eq!(path_loss(&tx, &rx, &urban).unwrap(), path_loss(&tx, &rx, &sub).unwrap());
        }

        #[test]
        fn decreasing_within_branch(model in prop::sample::select(vec![ChannelModel::Suburban, ChannelModel::Urban]),
                                    vertical in any::<bool>(), a in 0.5f64..400.0, b in 0.5f64..400.0) {
            let ch = db_channel(model);
            let rx = Position::horizontal(-50.0);
            let (near, far) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(far - near > 1e-6);
            let (p_near, p_far) = if vertical {
                (Position::vertical(near), Position::vertical(far))
            } else {
                (Position::horizontal(-50.0 + near), Position::horizontal(-50.0 + far))
            };
            let same_branch = classify(&p_near, &rx, 15.0) == classify(&p_far, &rx, 15.0);
            prop_assume!(same_branch);
            prop_assume!(euclidean_distance(&p_near, &rx) < euclidean_distance(&p_far, &rx));
            prop_assert!(ch.gain(&p_near, &rx) > ch.gain(&p_far, &rx));
        }

        #[test]
        fn nlos_wlos_symmetric_in_norms(tx_off in 1f64..300.0, rx_off in 1f64..300.0) {
            let ch = db_channel(ChannelModel::Urban);
            let g1 = ch.gain(&Position::vertical(tx_off), &Position::horizontal(-rx_off));
            let g2 = ch.gain(&Position::vertical(rx_off), &Position::horizontal(-tx_off));
            prop_assert!((g1 / g2 - 1.0).abs() < 1e-12);
        }
    }
}
