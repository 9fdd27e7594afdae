//! Average success probability and the optimal Aloha probability.
//!
//! Averaging the conditional success over a thinned PPP with exponential marks
//! gives, per road,
//!
//! ```text
//! E[exp(-β' I(Φ))] = exp(-p_I λ ∫_B β'ℓ(x, rx) / (1 + β'ℓ(x, rx)) dx)
//! ```
//!
//! so the average success is `exp(-β'γ0)` times one such factor per road. The
//! integrals are evaluated with adaptive Gauss–Kronrod quadrature, split where
//! the integrand has kinks.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{manhattan_separation, Position, Road, Trajectory};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::reliability::Link;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageReliability {
    pub value: f64,
    pub noise_factor: f64,
    pub laplace_x: f64,
    pub laplace_y: f64,
}

impl AverageReliability {
    pub fn outage(&self) -> f64 {
        1.0 - self.value
    }
}

/// Reliability requirement: average success at least `target` for every TX
/// up to Manhattan separation `d_target`, with `tx_at_target` the binding position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub target: f64,
    pub d_target: f64,
    pub tx_at_target: Position,
}

impl DesignSpec {
    pub fn new(target: f64, d_target: f64, tx_at_target: Position, rx: &Position) -> Result<Self> {
        if !(target > 0.0 && target < 1.0) {
            return domain(format!("design target must lie in (0, 1), got {target}"));
        }
        let d = manhattan_separation(&tx_at_target, rx);
        if (d - d_target).abs() > 1e-9 * (1.0 + d_target) {
            return domain(format!(
                "design TX {tx_at_target} is {d} m from the receiver, not d_target = {d_target} m"
            ));
        }
        Ok(DesignSpec {
            target,
            d_target,
            tx_at_target,
        })
    }

    /// Design position at separation `d_target` along `trajectory`.
    pub fn on_trajectory(target: f64, d_target: f64, trajectory: &Trajectory) -> Result<Self> {
        let tx = trajectory.position_at(d_target)?;
        Self::new(target, d_target, tx, &trajectory.rx())
    }
}

/// Integration breakpoints for one road: segment ends, the junction, the
/// receiver abscissa and the WLOS/NLOS boundaries.
fn breakpoints(road: Road, half: f64, rx: &Position, breakpoint: f64) -> Vec<f64> {
    let mut pts = vec![-half, 0.0, half];
    match road {
        Road::Horizontal => pts.push(rx.offset()),
        Road::Vertical => pts.extend([-breakpoint, breakpoint]),
    }
    pts.retain(|p| (-half..=half).contains(p));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫_B t/(1+t) dx` with `t = β' ℓ(x, rx)` along `road`.
pub fn interference_integral(
    link: &Link<'_>,
    road: Road,
    scenario: &Scenario,
    opts: &QuadratureOptions,
) -> Result<f64> {
    let half = scenario.extent.half_length(road);
    let bp = link.beta_prime();
    let integrand = |u: f64| {
        let t = bp * link.interferer_gain(&Position::new(road, u));
        // Written as 1/(1 + 1/t) so that t = inf at the receiver gives 1.
        1.0 / (1.0 + 1.0 / t)
    };
    let pts = breakpoints(road, half, &link.rx, scenario.channel.breakpoint());
    Ok(integrate(integrand, &pts, opts)?.value)
}

pub fn laplace_factor_with_options(
    road: Road,
    tx: &Position,
    rx: &Position,
    scenario: &Scenario,
    opts: &QuadratureOptions,
) -> Result<f64> {
    let rate = scenario.traffic.active_intensity(road);
    if rate == 0.0 {
        return Ok(1.0);
    }
    let link = Link::new(*tx, *rx, &scenario.channel, &scenario.radio)?;
    let integral = interference_integral(&link, road, scenario, opts)?;
    Ok((-rate * integral).exp())
}

/// `E[exp(-β' I(Φ_road))]` for the active interferers on `road`.
pub fn laplace_factor(road: Road, tx: &Position, rx: &Position, scenario: &Scenario) -> Result<f64> {
    laplace_factor_with_options(road, tx, rx, scenario, &QuadratureOptions::default())
}

pub fn average_success_with_options(
    tx: &Position,
    rx: &Position,
    scenario: &Scenario,
    opts: &QuadratureOptions,
) -> Result<AverageReliability> {
    let link = Link::new(*tx, *rx, &scenario.channel, &scenario.radio)?;
    let noise_factor = link.noise_factor();
    let laplace_x = laplace_factor_with_options(Road::Horizontal, tx, rx, scenario, opts)?;
    let laplace_y = laplace_factor_with_options(Road::Vertical, tx, rx, scenario, opts)?;
    Ok(AverageReliability {
        value: noise_factor * laplace_x * laplace_y,
        noise_factor,
        laplace_x,
        laplace_y,
    })
}

pub fn average_success(tx: &Position, rx: &Position, scenario: &Scenario) -> Result<AverageReliability> {
    average_success_with_options(tx, rx, scenario, &QuadratureOptions::default())
}

/// Bisection steps on `[0, 1]`; the final bracket is narrower than 1e-12.
const BISECTION_STEPS: usize = 40;

/// Largest `p_I` in `[0, 1]` for which the average success at the design
/// position still meets the target.
pub fn solve_optimal_pi(design: &DesignSpec, scenario: &Scenario) -> Result<f64> {
    let rx = scenario.rx;
    let success_at = |p: f64| -> Result<f64> {
        let s = scenario.with_p_i(p)?;
        Ok(average_success(&design.tx_at_target, &rx, &s)?.value)
    };
    let silent = success_at(0.0)?;
    if silent < design.target {
        return Err(Error::Infeasible {
            target: design.target,
            achievable: silent,
        });
    }
    if success_at(1.0)? >= design.target {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if success_at(mid)? >= design.target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelModel, ChannelParams};
    use crate::scenario::{PiChoice, ScenarioBuilder};

    fn scenario(model: ChannelModel, r: f64, p_i: f64) -> Scenario {
        ScenarioBuilder {
            model: Some(model),
            r: Some(r),
            p_i: Some(PiChoice::Fixed(p_i)),
            ..Default::default()
        }
        .build()
        .unwrap()
    }

    #[test]
    fn breakpoints_cover_kinks() {
        let rx = Position::horizontal(-50.0);
        assert_eq!(
            breakpoints(Road::Horizontal, 200.0, &rx, 15.0),
            vec![-200.0, -50.0, 0.0, 200.0]
        );
        assert_eq!(
            breakpoints(Road::Vertical, 200.0, &rx, 15.0),
            vec![-200.0, -15.0, 0.0, 15.0, 200.0]
        );
        assert_eq!(breakpoints(Road::Horizontal, 30.0, &rx, 15.0), vec![-30.0, 0.0, 30.0]);
    }

    #[test]
    fn silent_network_gives_noise_only() {
        let s = scenario(ChannelModel::Urban, 200.0, 0.0);
        let rx = s.rx;
        for tx in [
            Position::vertical(50.0),
            Position::horizontal(-10.0),
            Position::vertical(90.0),
        ] {
            let avg = average_success(&tx, &rx, &s).unwrap();
            assert_eq!(avg.laplace_x, 1.0);
            assert_eq!(avg.laplace_y, 1.0);
            let link = Link::new(tx, rx, &s.channel, &s.radio).unwrap();
            assert_eq!(avg.value, link.noise_factor());
        }
    }

    #[test]
    fn vanishing_threshold_gives_unit_factor() {
        let mut s = scenario(ChannelModel::Urban, 200.0, 0.5);
        s.radio = s.radio.with_beta_db(-200.0).unwrap();
        let f = laplace_factor(Road::Horizontal, &Position::vertical(50.0), &s.rx, &s).unwrap();
        assert!((f - 1.0).abs() < 1e-9, "{f}");
    }

    #[test]
    fn factorization_holds() {
        for model in [ChannelModel::Urban, ChannelModel::Suburban] {
            let s = scenario(model, 200.0, 0.01);
            let avg = average_success(&Position::vertical(30.0), &s.rx, &s).unwrap();
            let prod = avg.noise_factor * avg.laplace_x * avg.laplace_y;
            assert!((avg.value / prod - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn subdivision_limit_does_not_matter() {
        for (model, r) in [
            (ChannelModel::Urban, 200.0),
            (ChannelModel::Urban, 10_000.0),
            (ChannelModel::Suburban, 10_000.0),
        ] {
            let s = scenario(model, r, 0.01);
            let tx = Position::vertical(50.0);
            for road in [Road::Horizontal, Road::Vertical] {
                let base = QuadratureOptions::default();
                let doubled = QuadratureOptions {
                    max_subdivisions: 2 * base.max_subdivisions,
                    ..base
                };
                let a = laplace_factor_with_options(road, &tx, &s.rx, &s, &base).unwrap();
                let b = laplace_factor_with_options(road, &tx, &s.rx, &s, &doubled).unwrap();
                assert!(((a - b) / a).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn design_point_at_practical_road() {
        let s = scenario(ChannelModel::Urban, 200.0, 0.013);
        let avg = average_success(&Position::vertical(50.0), &s.rx, &s).unwrap();
        assert!((avg.value - 0.90).abs() <= 0.005, "{}", avg.value);
    }

    #[test]
    fn optimal_pi_matches_closed_inversion() {
        // The exponent is linear in p_I, so p* = ln(noise / target) / (λ_x I_x + λ_y I_y).
        for (model, r) in [(ChannelModel::Urban, 200.0), (ChannelModel::Suburban, 10_000.0)] {
            let s = scenario(model, r, 1.0);
            let link = Link::new(s.design.tx_at_target, s.rx, &s.channel, &s.radio).unwrap();
            let opts = QuadratureOptions::default();
            let ix = interference_integral(&link, Road::Horizontal, &s, &opts).unwrap();
            let iy = interference_integral(&link, Road::Vertical, &s, &opts).unwrap();
            let expected =
                (link.noise_factor() / s.design.target).ln() / (s.traffic.lambda_x * ix + s.traffic.lambda_y * iy);
            let p = solve_optimal_pi(&s.design, &s).unwrap();
            assert!((p - expected).abs() < 1e-5, "{p} vs {expected}");
            let at = average_success(&s.design.tx_at_target, &s.rx, &s.with_p_i(p).unwrap())
                .unwrap()
                .value;
            assert!(at >= s.design.target);
            let past = average_success(&s.design.tx_at_target, &s.rx, &s.with_p_i(p + 1e-4).unwrap())
                .unwrap()
                .value;
            assert!(past < s.design.target);
        }
    }

    #[test]
    fn no_traffic_admits_any_pi() {
        let mut s = scenario(ChannelModel::Urban, 200.0, 0.5);
        s.traffic.lambda_x = 0.0;
        s.traffic.lambda_y = 0.0;
        assert_eq!(solve_optimal_pi(&s.design, &s).unwrap(), 1.0);
    }

    #[test]
    fn infeasible_target() {
        let mut s = scenario(ChannelModel::Urban, 200.0, 0.5);
        s.radio = crate::reliability::RadioParams::new(20.0, -40.0, 8.0).unwrap();
        match solve_optimal_pi(&s.design, &s) {
            Err(Error::Infeasible { achievable, .. }) => assert!(achievable < 0.9),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn monotone_in_pi_lambda_beta() {
        let s = scenario(ChannelModel::Urban, 200.0, 0.013);
        let tx = Position::vertical(50.0);
        let grid = |i: usize| i as f64 / 19.0;
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let v = average_success(&tx, &s.rx, &s.with_p_i(0.05 * grid(i)).unwrap())
                .unwrap()
                .value;
            assert!(v <= prev);
            prev = v;
        }
        prev = f64::INFINITY;
        for i in 0..20 {
            let mut t = s.clone();
            t.traffic.lambda_x = 0.05 * grid(i);
            t.traffic.lambda_y = 0.05 * grid(i);
            let v = average_success(&tx, &t.rx, &t).unwrap().value;
            assert!(v <= prev);
            prev = v;
        }
        prev = f64::INFINITY;
        for i in 0..20 {
            let mut t = s.clone();
            t.radio = t.radio.with_beta_db(-10.0 + 30.0 * grid(i)).unwrap();
            let v = average_success(&tx, &t.rx, &t).unwrap().value;
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn urban_los_integrand_handles_receiver_singularity() {
        let s = scenario(ChannelModel::Urban, 200.0, 1.0);
        let ch = ChannelParams::reference(ChannelModel::Urban);
        assert_eq!(ch, s.channel);
        let f = laplace_factor(Road::Horizontal, &Position::horizontal(-49.0), &s.rx, &s).unwrap();
        assert!(f > 0.0 && f < 1.0);
    }
}
