//! Reference strategies and initial trajectories.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{
    full_harvest, harvested_raw, rate_raw, throughput_raw, trajectory_geometry, validate_trajectory, Profile, Protocol,
    Scenario, SlotGeometry, Trajectory,
};
use crate::pipeline::OuterTermination;
use crate::profile::{optimize_profile, ProfileOptions};
use crate::scalar::{add, norm2, sub, Point, Scalar};
use crate::trajectory::{optimize_trajectory, EnergyCoupling, TrajectoryOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Optimal,
    Greedy,
    Static,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Optimal, Strategy::Greedy, Strategy::Static];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Optimal => "optimal",
            Strategy::Greedy => "greedy",
            Strategy::Static => "static",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "optimal" => Ok(Strategy::Optimal),
            "greedy" => Ok(Strategy::Greedy),
            "static" => Ok(Strategy::Static),
            other => Err(Error::Config(format!("unknown strategy `{other}` (expected optimal|greedy|static)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StrategyResult<T> {
    pub strategy: Strategy,
    pub protocol: Protocol,
    pub profile: Profile<T>,
    pub trajectory: Trajectory<T>,
    pub throughput: T,
    /// Throughput after each outer round; a single entry for one-shot strategies.
    pub trace: Vec<T>,
    pub termination: OuterTermination,
    /// Hover location of the static strategy.
    pub hover: Option<Point<T>>,
}

/// Greedy ratio search tolerance.
const RATIO_TOL: f64 = 1e-6;

fn golden_max<T: Scalar>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, tol: T) -> (T, T) {
    let r = T::lit(0.618_033_988_749_894_8);
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        }
    }
    let mid = T::lit(0.5) * (lo + hi);
    (mid, f(mid))
}

/// Ratio maximizing the slot rate when the relay spends exactly what it harvests.
pub fn greedy_ratio<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, protocol: Protocol) -> T {
    let full = full_harvest(scn, g);
    let f = |rho: T| rate_raw(scn, g, protocol, full * (T::one() - rho), rho);
    let (rho, v) = golden_max(f, T::zero(), T::one(), T::lit(RATIO_TOL));
    if f(T::zero()) > v {
        T::zero()
    } else {
        rho
    }
}

/// Spends each slot's harvest in the same slot, with the best ratio per slot.
pub fn greedy_profile<T: Scalar>(scn: &Scenario<T>, traj: &Trajectory<T>, protocol: Protocol) -> Result<Profile<T>> {
    traj.check_len(scn)?;
    let geo = trajectory_geometry(scn, traj);
    Ok(greedy_profile_raw(scn, &geo, protocol))
}

pub(crate) fn greedy_profile_raw<T: Scalar>(scn: &Scenario<T>, geo: &[SlotGeometry<T>], protocol: Protocol) -> Profile<T> {
    let rho: Vec<T> = geo.iter().map(|g| greedy_ratio(scn, g, protocol)).collect();
    let power = geo.iter().zip(&rho).map(|(g, &r)| harvested_raw(scn, g, r)).collect();
    Profile { power, rho }
}

/// Same-slot spending with a fixed ratio in every slot.
pub fn fixed_ratio_profile<T: Scalar>(scn: &Scenario<T>, traj: &Trajectory<T>, rho: T) -> Result<Profile<T>> {
    traj.check_len(scn)?;
    let geo = trajectory_geometry(scn, traj);
    let power = geo.iter().map(|g| harvested_raw(scn, g, rho)).collect();
    Profile::new(power, vec![rho; geo.len()])
}

/// Evenly spaced points strictly between the start and end locations.
pub fn straight_line_init<T: Scalar>(scn: &Scenario<T>) -> Result<Trajectory<T>> {
    let n = scn.num_slots();
    let (a, b) = (scn.start(), scn.end());
    let span = sub(b, a);
    let points = (1..=n)
        .map(|k| {
            let t = T::of_usize(k) / T::of_usize(n + 1);
            [a[0] + t * span[0], a[1] + t * span[1]]
        })
        .collect();
    checked_init(scn, Trajectory::new(points), "straight line")
}

/// Which way the semicircle bulges out of the start-end chord.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArcSide {
    /// The half whose apex is nearer the source.
    #[default]
    TowardSource,
    AwayFromSource,
}

/// Points evenly spaced in angle on the semicircle over the start-end segment.
pub fn semicircle_init<T: Scalar>(scn: &Scenario<T>, side: ArcSide) -> Result<Trajectory<T>> {
    let n = scn.num_slots();
    let (a, b) = (scn.start(), scn.end());
    let half = T::lit(0.5);
    let center = [half * (a[0] + b[0]), half * (a[1] + b[1])];
    let u = sub(a, center);
    let perp = [-u[1], u[0]];
    let apex = |s: T| add(center, [s * perp[0], s * perp[1]]);
    let toward = norm2(sub(apex(T::one()), scn.source())) <= norm2(sub(apex(-T::one()), scn.source()));
    let sign = if toward == (side == ArcSide::TowardSource) { T::one() } else { -T::one() };
    let points = (1..=n)
        .map(|k| {
            let t = T::lit(PI) * T::of_usize(k) / T::of_usize(n + 1);
            let (c, s) = (t.cos(), sign * t.sin());
            [center[0] + c * u[0] + s * perp[0], center[1] + c * u[1] + s * perp[1]]
        })
        .collect();
    checked_init(scn, Trajectory::new(points), "semicircle")
}

fn checked_init<T: Scalar>(scn: &Scenario<T>, traj: Trajectory<T>, what: &str) -> Result<Trajectory<T>> {
    let check = validate_trajectory(scn, &traj);
    if !check.feasible {
        return Err(Error::InfeasibleInitialization(format!(
            "{what} needs a step of {} on {:?}, longer than V = {}",
            (check.worst_violation + scn.max_step() * scn.max_step()).sqrt(),
            check.worst_leg,
            scn.max_step()
        )));
    }
    Ok(traj)
}

/// Literal hover point of the static baseline.
pub fn default_hover<T: Scalar>() -> Point<T> {
    [T::zero(), T::one()]
}

/// Relay hovering at `hover` for the whole horizon with the optimized profile.
pub fn static_strategy<T: Scalar>(
    scn: &Scenario<T>,
    protocol: Protocol,
    hover: Point<T>,
    opts: &ProfileOptions<T>,
) -> Result<StrategyResult<T>> {
    let trajectory = Trajectory::new(vec![hover; scn.num_slots()]);
    let opts = ProfileOptions { check_endpoints: false, ..*opts };
    let sol = optimize_profile(scn, &trajectory, protocol, &opts)?;
    Ok(StrategyResult {
        strategy: Strategy::Static,
        protocol,
        profile: sol.profile,
        trajectory,
        throughput: sol.throughput,
        trace: vec![sol.throughput],
        termination: OuterTermination::SinglePass,
        hover: Some(hover),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct GreedyOptions<T> {
    pub max_rounds: usize,
    pub rel_tol: T,
    pub trajectory: TrajectoryOptions<T>,
}

impl<T: Scalar> Default for GreedyOptions<T> {
    fn default() -> Self {
        Self {
            max_rounds: 50,
            rel_tol: T::lit(1e-3),
            trajectory: TrajectoryOptions { coupling: EnergyCoupling::PerSlot, ..TrajectoryOptions::default() },
        }
    }
}

/// Greedy profile alternated with trajectory rounds. Each trajectory round keeps
/// every slot's own harvest above its power, so the next greedy profile can only
/// do better.
pub fn greedy_strategy<T: Scalar>(
    scn: &Scenario<T>,
    protocol: Protocol,
    init: &Trajectory<T>,
    opts: &GreedyOptions<T>,
) -> Result<StrategyResult<T>> {
    let mut trajectory = init.clone();
    let mut profile = greedy_profile(scn, &trajectory, protocol)?;
    let mut throughput = throughput_raw(scn, &trajectory_geometry(scn, &trajectory), &profile, protocol);
    let mut trace = vec![throughput];
    let mut termination = OuterTermination::IterationLimit;
    let topts = TrajectoryOptions { coupling: EnergyCoupling::PerSlot, ..opts.trajectory };
    for _ in 0..opts.max_rounds {
        let moved = optimize_trajectory(scn, &profile, &trajectory, protocol, &topts)?;
        let next_profile = greedy_profile(scn, &moved.trajectory, protocol)?;
        let next = throughput_raw(scn, &trajectory_geometry(scn, &moved.trajectory), &next_profile, protocol);
        if !(next > throughput) {
            termination = OuterTermination::NoImprovement;
            break;
        }
        let gain = next - throughput;
        trajectory = moved.trajectory;
        profile = next_profile;
        throughput = next;
        trace.push(throughput);
        if gain <= opts.rel_tol * throughput.abs() {
            termination = OuterTermination::Converged;
            break;
        }
    }
    Ok(StrategyResult {
        strategy: Strategy::Greedy,
        protocol,
        profile,
        trajectory,
        throughput,
        trace,
        termination,
        hover: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{residuals_raw, ScenarioParams};

    #[test]
    fn greedy_residuals_are_exactly_zero() {
        let s = Scenario::<f64>::reference();
        let traj = straight_line_init(&s).unwrap();
        for protocol in Protocol::ALL {
            let prof = greedy_profile(&s, &traj, protocol).unwrap();
            let res = residuals_raw(&s, &trajectory_geometry(&s, &traj), &prof);
            assert!(res.iter().all(|&r| r == 0.0), "{protocol}: {res:?}");
        }
    }

    #[test]
    fn straight_line_midpoint() {
        let s = ScenarioParams::<f64> { num_slots: 49, ..ScenarioParams::default() }.build().unwrap();
        let traj = straight_line_init(&s).unwrap();
        assert!((traj.points[24][0] - 1.0).abs() < 1e-12 && traj.points[24][1].abs() < 1e-12);
    }

    #[test]
    fn semicircle_shape() {
        let s = Scenario::<f64>::reference();
        let traj = semicircle_init(&s, ArcSide::TowardSource).unwrap();
        let r = 2f64.sqrt();
        for p in &traj.points {
            assert!(((p[0] - 1.0).hypot(p[1]) - r).abs() < 1e-12);
        }
        // apex on the source side of the chord
        let apex = traj.points[24];
        assert!(apex[0] + apex[1] - 1.0 < 0.0);
        let flipped = semicircle_init(&s, ArcSide::AwayFromSource).unwrap();
        assert!(flipped.points[24][0] + flipped.points[24][1] - 1.0 > 0.0);
    }

    #[test]
    fn short_reach_rejects_semicircle() {
        let s = ScenarioParams::<f64> { max_step: 0.06, ..ScenarioParams::default() }.build().unwrap();
        assert!(straight_line_init(&s).is_ok());
        assert!(matches!(semicircle_init(&s, ArcSide::TowardSource), Err(Error::InfeasibleInitialization(_))));
    }
}
