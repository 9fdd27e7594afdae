//! Positions on the two perpendicular roads of the intersection.
//!
//! The horizontal road is the x axis and the vertical road is the y axis; the
//! junction sits at the origin. A [`Position`] stores the road and a signed
//! offset along it, so every position automatically satisfies `x * y = 0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Road {
    Horizontal,
    Vertical,
}

impl Road {
    pub fn tag(self) -> char {
        match self {
            Road::Horizontal => 'H',
            Road::Vertical => 'V',
        }
    }
}

/// A point on one of the two roads, as a signed offset (meters) from the junction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Position {
    road: Road,
    offset: f64,
}

impl Position {
    pub const JUNCTION: Position = Position {
        road: Road::Horizontal,
        offset: 0.0,
    };

    pub fn new(road: Road, offset: f64) -> Self {
        Position { road, offset }
    }

    pub fn horizontal(offset: f64) -> Self {
        Self::new(Road::Horizontal, offset)
    }

    pub fn vertical(offset: f64) -> Self {
        Self::new(Road::Vertical, offset)
    }

    /// Road tag, with the junction reported as horizontal.
    pub fn road(&self) -> Road {
        if self.offset == 0.0 {
            Road::Horizontal
        } else {
            self.road
        }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Distance from the junction, `‖x‖`.
    pub fn norm(&self) -> f64 {
        self.offset.abs()
    }

    pub fn is_junction(&self) -> bool {
        self.offset == 0.0
    }

    /// 2D coordinates `(x, y)`.
    pub fn to_xy(&self) -> (f64, f64) {
        match self.road() {
            Road::Horizontal => (self.offset, 0.0),
            Road::Vertical => (0.0, self.offset),
        }
    }
}

impl PartialEq for Position {
    fn eq(&self, other: &Self) -> bool {
        self.road() == other.road() && self.offset == other.offset
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.road().tag(), self.offset)
    }
}

/// Half-lengths of the two road segments, `B_x = [-R_x, R_x]` and `B_y = [-R_y, R_y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadExtent {
    pub r_x: f64,
    pub r_y: f64,
}

impl RoadExtent {
    pub fn new(r_x: f64, r_y: f64) -> Result<Self> {
        if !(r_x > 0.0 && r_x.is_finite() && r_y > 0.0 && r_y.is_finite()) {
            return domain(format!("road half-lengths must be positive, got ({r_x}, {r_y})"));
        }
        Ok(RoadExtent { r_x, r_y })
    }

    pub fn symmetric(r: f64) -> Result<Self> {
        Self::new(r, r)
    }

    pub fn half_length(&self, road: Road) -> f64 {
        match road {
            Road::Horizontal => self.r_x,
            Road::Vertical => self.r_y,
        }
    }

    /// Lebesgue measure of the segment on `road`.
    pub fn measure(&self, road: Road) -> f64 {
        2.0 * self.half_length(road)
    }

    pub fn contains(&self, p: &Position) -> bool {
        p.norm() <= self.half_length(p.road())
    }
}

pub fn euclidean_distance(a: &Position, b: &Position) -> f64 {
    let (ax, ay) = a.to_xy();
    let (bx, by) = b.to_xy();
    (ax - bx).hypot(ay - by)
}

pub fn manhattan_separation(a: &Position, b: &Position) -> f64 {
    let (ax, ay) = a.to_xy();
    let (bx, by) = b.to_xy();
    (ax - bx).abs() + (ay - by).abs()
}

/// Length of the vertical leg of the default TX trajectory.
pub const VERTICAL_LEG_M: f64 = 90.0;

/// TX path used by the separation sweeps: from the RX along the horizontal road
/// to the junction, then up the vertical road.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    rx: Position,
    vertical_leg: f64,
}

impl Trajectory {
    /// `rx` must lie on the horizontal road at a negative offset.
    pub fn new(rx: Position, vertical_leg: f64) -> Result<Self> {
        if rx.road() != Road::Horizontal || !(rx.offset() < 0.0) {
            return domain(format!(
                "trajectory RX must be on the horizontal road at a negative offset, got {rx}"
            ));
        }
        if !(vertical_leg >= 0.0 && vertical_leg.is_finite()) {
            return domain(format!("vertical leg must be non-negative, got {vertical_leg}"));
        }
        Ok(Trajectory { rx, vertical_leg })
    }

    pub fn rx(&self) -> Position {
        self.rx
    }

    pub fn max_separation(&self) -> f64 {
        self.rx.norm() + self.vertical_leg
    }

    pub fn position_at(&self, s: f64) -> Result<Position> {
        if !(0.0..=self.max_separation()).contains(&s) {
            return domain(format!(
                "separation {s} outside [0, {}] for RX {}",
                self.max_separation(),
                self.rx
            ));
        }
        let to_junction = self.rx.norm();
        if s <= to_junction {
            Ok(Position::horizontal(self.rx.offset() + s))
        } else {
            Ok(Position::vertical(s - to_junction))
        }
    }
}

/// TX position at Manhattan separation `s` along the default trajectory.
pub fn tx_position_at_separation(s: f64, rx: Position) -> Result<Position> {
    Trajectory::new(rx, VERTICAL_LEG_M)?.position_at(s)
}
