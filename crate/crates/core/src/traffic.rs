//! Interferer configurations: thinned homogeneous Poisson point processes on
//! the two bounded road segments.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{Position, Road, RoadExtent};

/// Vehicle intensities (vehicles per meter) and the Aloha transmit probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficParams {
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub p_i: f64,
}

impl TrafficParams {
    pub fn new(lambda_x: f64, lambda_y: f64, p_i: f64) -> Result<Self> {
        let t = TrafficParams {
            lambda_x,
            lambda_y,
            p_i,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_x >= 0.0 && self.lambda_x.is_finite() && self.lambda_y >= 0.0 && self.lambda_y.is_finite()) {
            return domain(format!(
                "traffic intensities must be non-negative, got ({}, {})",
                self.lambda_x, self.lambda_y
            ));
        }
        if !(0.0..=1.0).contains(&self.p_i) {
            return domain(format!("Aloha probability must lie in [0, 1], got {}", self.p_i));
        }
        Ok(())
    }

    pub fn with_p_i(self, p_i: f64) -> Result<Self> {
        Self::new(self.lambda_x, self.lambda_y, p_i)
    }

    pub fn intensity(&self, road: Road) -> f64 {
        match road {
            Road::Horizontal => self.lambda_x,
            Road::Vertical => self.lambda_y,
        }
    }

    /// Intensity of active interferers on `road`, `p_I * lambda`.
    pub fn active_intensity(&self, road: Road) -> f64 {
        self.p_i * self.intensity(road)
    }
}

/// One sampled set of active interferers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Realization {
    pub horizontal: Vec<Position>,
    pub vertical: Vec<Position>,
    /// Index of the random substream this realization was drawn from.
    pub seed_id: u64,
}

impl Realization {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.horizontal.len() + self.vertical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All interferers, horizontal road first.
    pub fn iter(&self) -> impl Iterator<Item = &Position> + '_ {
        self.horizontal.iter().chain(self.vertical.iter())
    }

    pub fn on_road(&self, road: Road) -> &[Position] {
        match road {
            Road::Horizontal => &self.horizontal,
            Road::Vertical => &self.vertical,
        }
    }

    /// Adds an interferer to the list matching its road.
    pub fn push(&mut self, p: Position) {
        match p.road() {
            Road::Horizontal => self.horizontal.push(p),
            Road::Vertical => self.vertical.push(p),
        }
    }

    /// Line-oriented text form: a `# realization <seed_id>` header, then one
    /// `H <offset>` or `V <offset>` line per interferer.
    pub fn to_text(&self) -> String {
        let mut out = format!("# realization {}\n", self.seed_id);
        for p in self.iter() {
            let _ = writeln!(out, "{} {}", p.road().tag(), p.offset());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Realization::empty();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(id) = rest.trim().strip_prefix("realization") {
                    r.seed_id = id
                        .trim()
                        .parse()
                        .map_err(|_| crate::Error::Domain(format!("line {}: bad seed id", lineno + 1)))?;
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let (tag, offset) = match (parts.next(), parts.next(), parts.next()) {
                (Some(t), Some(o), None) => (t, o),
                _ => return domain(format!("line {}: expected '<H|V> <offset>'", lineno + 1)),
            };
            let offset: f64 = offset
                .parse()
                .map_err(|_| crate::Error::Domain(format!("line {}: bad offset '{offset}'", lineno + 1)))?;
            let p = match tag {
                "H" => Position::horizontal(offset),
                "V" => Position::vertical(offset),
                _ => return domain(format!("line {}: unknown road tag '{tag}'", lineno + 1)),
            };
            r.push(p);
        }
        Ok(r)
    }
}

/// Mean number of active interferers on the horizontal and vertical roads.
pub fn expected_count(extent: &RoadExtent, traffic: &TrafficParams) -> (f64, f64) {
    (
        traffic.active_intensity(Road::Horizontal) * extent.measure(Road::Horizontal),
        traffic.active_intensity(Road::Vertical) * extent.measure(Road::Vertical),
    )
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as usize
}

fn sample_road<R: Rng + ?Sized>(road: Road, half: f64, mean: f64, rng: &mut R) -> Vec<Position> {
    let n = poisson_count(mean, rng);
    (0..n)
        .map(|_| Position::new(road, rng.random_range(-half..=half)))
        .collect()
}

/// Draws the thinned processes `PPP(p_I λ_x, B_x)` and `PPP(p_I λ_y, B_y)` directly.
pub fn sample_realization<R: Rng + ?Sized>(extent: &RoadExtent, traffic: &TrafficParams, rng: &mut R) -> Realization {
    let (mean_x, mean_y) = expected_count(extent, traffic);
    let horizontal = sample_road(Road::Horizontal, extent.r_x, mean_x, rng);
    let vertical = sample_road(Road::Vertical, extent.r_y, mean_y, rng);
    Realization {
        horizontal,
        vertical,
        seed_id: 0,
    }
}

/// Draws all vehicles `PPP(λ, B)` and keeps each one independently with
/// probability `p_I`. Same law as [`sample_realization`]; kept for testing that
/// equivalence.
pub fn sample_then_thin<R: Rng + ?Sized>(extent: &RoadExtent, traffic: &TrafficParams, rng: &mut R) -> Realization {
    let mut keep = |road: Road| -> Vec<Position> {
        let half = extent.half_length(road);
        let all = sample_road(road, half, traffic.intensity(road) * extent.measure(road), rng);
        all.into_iter().filter(|_| rng.random_bool(traffic.p_i)).collect()
    };
    let horizontal = keep(Road::Horizontal);
    let vertical = keep(Road::Vertical);
    Realization {
        horizontal,
        vertical,
        seed_id: 0,
    }
}
