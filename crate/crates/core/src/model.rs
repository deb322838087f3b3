//! Physical scenario, link geometry, per-slot rates and energy accounting.
//!
//! All link budgets are expressed through the normalized quantities `gamma0`
//! (relay-link reference SNR), `gamma` (direct-link reference SNR), the channel
//! noise power and the relative signal-processing noise `a`. Channel gain at the
//! reference distance and absolute noise powers never appear on their own.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{norm2, sub, Point, Scalar};

/// Slack below zero still counted as feasible for step lengths and energy residuals.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Relaying protocol at the UAV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    /// Amplify-and-forward.
    Af,
    /// Decode-and-forward.
    Df,
}

impl Protocol {
    pub const ALL: [Protocol; 2] = [Protocol::Af, Protocol::Df];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Af => "af",
            Protocol::Df => "df",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "af" => Ok(Protocol::Af),
            "df" => Ok(Protocol::Df),
            other => Err(Error::Config(format!("unknown protocol `{other}` (expected af|df)"))),
        }
    }
}

/// Editable scenario parameters. `Default` gives the reference desk-scale layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams<T> {
    pub source: Point<T>,
    pub destination: Point<T>,
    pub start: Point<T>,
    pub end: Point<T>,
    /// Flight altitude `H`.
    pub altitude: T,
    /// Maximum travel distance per slot `V`.
    pub max_step: T,
    pub num_slots: usize,
    /// Source transmit power `Ps`.
    pub source_power: T,
    /// Reference SNR of source-UAV and UAV-destination links.
    pub gamma0: T,
    /// Reference SNR of the direct source-destination link.
    pub gamma: T,
    /// Channel noise power `delta`.
    pub noise_power: T,
    /// Signal-processing noise relative to channel noise, `a`.
    pub rel_noise: T,
    /// Base of the rate logarithm (2 gives bits/s/Hz).
    pub log_base: T,
}

impl<T: Scalar> Default for ScenarioParams<T> {
    fn default() -> Self {
        let l = T::lit;
        Self {
            source: [l(0.0), l(0.0)],
            destination: [l(2.0), l(0.0)],
            start: [l(0.0), l(1.0)],
            end: [l(2.0), l(-1.0)],
            altitude: l(0.3),
            max_step: l(0.2),
            num_slots: 50,
            source_power: l(1.0),
            gamma0: l(1.0),
            gamma: l(0.01),
            noise_power: l(1.0),
            rel_noise: l(2.0),
            log_base: l(2.0),
        }
    }
}

impl<T: Scalar> ScenarioParams<T> {
    /// Validates the parameters and freezes them into a [`Scenario`].
    pub fn build(self) -> Result<Scenario<T>> {
        fn positive<T: Scalar>(field: &'static str, v: T) -> Result<()> {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidScenario { field, reason: format!("must be > 0 (got {v})") })
            }
        }
        fn non_negative<T: Scalar>(field: &'static str, v: T) -> Result<()> {
            if v.is_finite() && v >= T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidScenario { field, reason: format!("must be >= 0 (got {v})") })
            }
        }
        for (field, p) in [
            ("source_xy", self.source),
            ("dest_xy", self.destination),
            ("start_xy", self.start),
            ("end_xy", self.end),
        ] {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(Error::InvalidScenario { field, reason: "must be finite".into() });
            }
        }
        positive("altitude_H", self.altitude)?;
        positive("max_step_V", self.max_step)?;
        if self.num_slots == 0 {
            return Err(Error::InvalidScenario { field: "num_slots_N", reason: "must be >= 1".into() });
        }
        positive("ps", self.source_power)?;
        positive("gamma0", self.gamma0)?;
        non_negative("gamma", self.gamma)?;
        positive("delta_noise", self.noise_power)?;
        non_negative("a_rel_noise", self.rel_noise)?;
        if !(self.log_base.is_finite() && self.log_base > T::one()) {
            return Err(Error::InvalidScenario {
                field: "log_base",
                reason: format!("must be > 1 (got {})", self.log_base),
            });
        }
        let reach = self.max_step * T::of_usize(self.num_slots);
        let span = norm2(sub(self.end, self.start)).sqrt();
        if reach < span {
            return Err(Error::InvalidScenario {
                field: "max_step_V",
                reason: format!(
                    "V * N = {reach} cannot cover the start-to-end distance {span}"
                ),
            });
        }
        Ok(Scenario { ln_base: self.log_base.ln(), p: self })
    }
}

/// A validated scenario. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    p: ScenarioParams<T>,
    ln_base: T,
}

impl<T: Scalar> Scenario<T> {
    /// The reference layout with every parameter at its default.
    pub fn reference() -> Self {
        ScenarioParams::default().build().expect("reference scenario is valid")
    }

    pub fn params(&self) -> &ScenarioParams<T> {
        &self.p
    }

    /// Copy of the parameters for building a modified scenario.
    pub fn to_params(&self) -> ScenarioParams<T> {
        self.p.clone()
    }

    pub fn source(&self) -> Point<T> {
        self.p.source
    }
    pub fn destination(&self) -> Point<T> {
        self.p.destination
    }
    pub fn start(&self) -> Point<T> {
        self.p.start
    }
    pub fn end(&self) -> Point<T> {
        self.p.end
    }
    pub fn altitude(&self) -> T {
        self.p.altitude
    }
    pub fn max_step(&self) -> T {
        self.p.max_step
    }
    pub fn num_slots(&self) -> usize {
        self.p.num_slots
    }
    pub fn source_power(&self) -> T {
        self.p.source_power
    }
    pub fn gamma0(&self) -> T {
        self.p.gamma0
    }
    pub fn gamma(&self) -> T {
        self.p.gamma
    }
    pub fn noise_power(&self) -> T {
        self.p.noise_power
    }
    pub fn rel_noise(&self) -> T {
        self.p.rel_noise
    }
    pub fn log_base(&self) -> T {
        self.p.log_base
    }
    /// Natural log of the rate base; converts nats to rate units by division.
    pub fn ln_base(&self) -> T {
        self.ln_base
    }

    /// `Ps * gamma`, the direct-link SNR.
    pub fn direct_snr(&self) -> T {
        self.p.source_power * self.p.gamma
    }

    /// `1 + Ps * gamma`.
    pub fn direct_term(&self) -> T {
        T::one() + self.direct_snr()
    }

    /// Received-signal factor `Ps * gamma0 * rho / (rho + a)` before path loss.
    pub(crate) fn split_gain(&self, rho: T) -> T {
        if rho <= T::zero() {
            return T::zero();
        }
        self.p.source_power * self.p.gamma0 * rho / (rho + self.p.rel_noise)
    }

    /// Converts a value in nats into rate units, including the half-duplex factor.
    #[inline]
    pub(crate) fn half_log(&self, arg: T) -> T {
        arg.ln() / (T::lit(2.0) * self.ln_base)
    }
}

/// Squared link distances of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotGeometry<T> {
    pub d2_sr: T,
    pub d2_rd: T,
}

/// Ordered UAV positions, one per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub points: Vec<Point<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(points: Vec<Point<T>>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub(crate) fn check_len(&self, scn: &Scenario<T>) -> Result<()> {
        if self.len() != scn.num_slots() {
            return Err(Error::LengthMismatch { expected: scn.num_slots(), got: self.len() });
        }
        Ok(())
    }
}

/// Per-slot relay power and power-splitting ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    pub power: Vec<T>,
    pub rho: Vec<T>,
}

impl<T: Scalar> Profile<T> {
    /// Builds a profile, checking `p >= 0` and `0 <= rho <= 1` elementwise.
    pub fn new(power: Vec<T>, rho: Vec<T>) -> Result<Self> {
        if power.len() != rho.len() {
            return Err(Error::LengthMismatch { expected: power.len(), got: rho.len() });
        }
        for (&p, &r) in power.iter().zip(&rho) {
            check_power(p)?;
            check_ratio(r)?;
        }
        Ok(Self { power, rho })
    }

    pub fn zeros(n: usize) -> Self {
        Self { power: vec![T::zero(); n], rho: vec![T::zero(); n] }
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub(crate) fn check_len(&self, scn: &Scenario<T>) -> Result<()> {
        if self.len() != scn.num_slots() || self.rho.len() != scn.num_slots() {
            return Err(Error::LengthMismatch { expected: scn.num_slots(), got: self.len() });
        }
        Ok(())
    }
}

fn check_power<T: Scalar>(p: T) -> Result<()> {
    if p.is_finite() && p >= T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!("relay power must be >= 0, got {p}")))
    }
}

fn check_ratio<T: Scalar>(rho: T) -> Result<()> {
    if rho >= T::zero() && rho <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("power-splitting ratio must lie in [0, 1], got {rho}")))
    }
}

pub fn slot_geometry<T: Scalar>(scn: &Scenario<T>, xy: Point<T>) -> SlotGeometry<T> {
    let h2 = scn.altitude() * scn.altitude();
    SlotGeometry {
        d2_sr: norm2(sub(xy, scn.source())) + h2,
        d2_rd: norm2(sub(xy, scn.destination())) + h2,
    }
}

pub fn trajectory_geometry<T: Scalar>(scn: &Scenario<T>, traj: &Trajectory<T>) -> Vec<SlotGeometry<T>> {
    traj.points.iter().map(|&xy| slot_geometry(scn, xy)).collect()
}

/// SNR of the first hop after power splitting.
#[inline]
pub(crate) fn relay_snr<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, rho: T) -> T {
    scn.split_gain(rho) / g.d2_sr
}

/// SNR of the relayed second hop.
#[inline]
pub(crate) fn forward_snr<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, p: T) -> T {
    p * scn.gamma0() / g.d2_rd
}

pub(crate) fn af_rate_raw<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, p: T, rho: T) -> T {
    let x = relay_snr(scn, g, rho);
    let y = forward_snr(scn, g, p);
    scn.half_log(scn.direct_term() + x * y / (T::one() + x + y))
}

/// First DF branch: decoding at the UAV.
pub fn df_first_hop<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, rho: T) -> T {
    scn.half_log(T::one() + relay_snr(scn, g, rho))
}

/// Second DF branch: combining at the destination.
pub fn df_second_hop<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, p: T) -> T {
    scn.half_log(scn.direct_term() + forward_snr(scn, g, p))
}

pub(crate) fn df_rate_raw<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, p: T, rho: T) -> T {
    df_first_hop(scn, g, rho).min(df_second_hop(scn, g, p))
}

pub(crate) fn rate_raw<T: Scalar>(
    scn: &Scenario<T>,
    g: &SlotGeometry<T>,
    protocol: Protocol,
    p: T,
    rho: T,
) -> T {
    match protocol {
        Protocol::Af => af_rate_raw(scn, g, p, rho),
        Protocol::Df => df_rate_raw(scn, g, p, rho),
    }
}

/// Per-slot amplify-and-forward cooperative rate.
pub fn af_rate<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, p: T, rho: T) -> Result<T> {
    check_power(p)?;
    check_ratio(rho)?;
    Ok(af_rate_raw(scn, g, p, rho))
}

/// Per-slot decode-and-forward cooperative rate (minimum of the two hops).
pub fn df_rate<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, p: T, rho: T) -> Result<T> {
    check_power(p)?;
    check_ratio(rho)?;
    Ok(df_rate_raw(scn, g, p, rho))
}

pub fn rate<T: Scalar>(
    scn: &Scenario<T>,
    g: &SlotGeometry<T>,
    protocol: Protocol,
    p: T,
    rho: T,
) -> Result<T> {
    match protocol {
        Protocol::Af => af_rate(scn, g, p, rho),
        Protocol::Df => df_rate(scn, g, p, rho),
    }
}

/// Energy harvested at `rho = 0`: `(1 + Ps gamma0 / d_sr^2) * delta`.
#[inline]
pub(crate) fn full_harvest<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>) -> T {
    (T::one() + scn.source_power() * scn.gamma0() / g.d2_sr) * scn.noise_power()
}

#[inline]
pub(crate) fn harvested_raw<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, rho: T) -> T {
    full_harvest(scn, g) * (T::one() - rho)
}

/// Energy harvested in one slot with splitting ratio `rho`.
pub fn harvested_energy<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, rho: T) -> Result<T> {
    check_ratio(rho)?;
    Ok(harvested_raw(scn, g, rho))
}

/// Cumulative harvested energy minus cumulative spent power, per slot.
pub fn causality_residuals<T: Scalar>(
    scn: &Scenario<T>,
    traj: &Trajectory<T>,
    prof: &Profile<T>,
) -> Result<Vec<T>> {
    traj.check_len(scn)?;
    prof.check_len(scn)?;
    Ok(residuals_raw(scn, &trajectory_geometry(scn, traj), prof))
}

pub(crate) fn residuals_raw<T: Scalar>(
    scn: &Scenario<T>,
    geo: &[SlotGeometry<T>],
    prof: &Profile<T>,
) -> Vec<T> {
    let mut harvested = T::zero();
    let mut spent = T::zero();
    geo.iter()
        .zip(prof.power.iter().zip(&prof.rho))
        .map(|(g, (&p, &rho))| {
            harvested = harvested + harvested_raw(scn, g, rho);
            spent = spent + p;
            harvested - spent
        })
        .collect()
}

/// True when every residual clears the feasibility tolerance.
pub fn is_causal<T: Scalar>(residuals: &[T]) -> bool {
    let tol = T::lit(FEASIBILITY_TOL);
    residuals.iter().all(|&r| r >= -tol)
}

/// Sum of per-slot cooperative rates.
pub fn total_throughput<T: Scalar>(
    scn: &Scenario<T>,
    traj: &Trajectory<T>,
    prof: &Profile<T>,
    protocol: Protocol,
) -> Result<T> {
    traj.check_len(scn)?;
    prof.check_len(scn)?;
    Ok(throughput_raw(scn, &trajectory_geometry(scn, traj), prof, protocol))
}

pub(crate) fn throughput_raw<T: Scalar>(
    scn: &Scenario<T>,
    geo: &[SlotGeometry<T>],
    prof: &Profile<T>,
    protocol: Protocol,
) -> T {
    geo.iter()
        .zip(prof.power.iter().zip(&prof.rho))
        .map(|(g, (&p, &rho))| rate_raw(scn, g, protocol, p, rho))
        .sum()
}

/// Which step of the flight a constraint refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    /// Start location to the first slot.
    Departure,
    /// Slot `i` to slot `i + 1` (zero-based).
    Step(usize),
    /// Last slot to the end location.
    Arrival,
}

/// Outcome of a mobility check. `worst_violation` is `step^2 - V^2` of the worst leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryCheck<T> {
    pub feasible: bool,
    pub worst_violation: T,
    pub worst_leg: Leg,
}

/// Checks every leg, including departure from the start and arrival at the end.
pub fn validate_trajectory<T: Scalar>(scn: &Scenario<T>, traj: &Trajectory<T>) -> TrajectoryCheck<T> {
    check_legs(scn, traj, true)
}

/// Checks only the legs between consecutive slots, as for a relay hovering in place.
pub fn validate_steps<T: Scalar>(scn: &Scenario<T>, traj: &Trajectory<T>) -> TrajectoryCheck<T> {
    check_legs(scn, traj, false)
}

fn check_legs<T: Scalar>(scn: &Scenario<T>, traj: &Trajectory<T>, endpoints: bool) -> TrajectoryCheck<T> {
    let v2 = scn.max_step() * scn.max_step();
    let mut worst = (T::neg_infinity(), Leg::Departure);
    let mut visit = |len2: T, leg: Leg| {
        let excess = len2 - v2;
        if excess > worst.0 {
            worst = (excess, leg);
        }
    };
    let pts = &traj.points;
    if endpoints {
        if let (Some(&first), Some(&last)) = (pts.first(), pts.last()) {
            visit(norm2(sub(first, scn.start())), Leg::Departure);
            visit(norm2(sub(scn.end(), last)), Leg::Arrival);
        }
    }
    for (i, w) in pts.windows(2).enumerate() {
        visit(norm2(sub(w[1], w[0])), Leg::Step(i));
    }
    if worst.0 == T::neg_infinity() {
        worst.0 = -v2;
    }
    let len_ok = traj.len() == scn.num_slots();
    TrajectoryCheck {
        feasible: len_ok && worst.0 <= T::lit(FEASIBILITY_TOL),
        worst_violation: worst.0,
        worst_leg: worst.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn scenario(log_base: f64) -> Scenario<f64> {
        ScenarioParams { log_base, ..ScenarioParams::default() }.build().unwrap()
    }

    #[test]
    fn geometry_above_source() {
        let scn = Scenario::<f64>::reference();
        let g = slot_geometry(&scn, [0.0, 0.0]);
        assert!(approx_eq(g.d2_sr, 0.09, 1e-15));
        assert!(approx_eq(g.d2_rd, 4.09, 1e-15));
        let g = slot_geometry(&scn, [0.0, 1.0]);
        assert!(approx_eq(g.d2_sr, 1.09, 1e-15));
    }

    #[test]
    fn af_rate_examples() {
        let scn = scenario(2.0);
        let g = SlotGeometry { d2_sr: 0.09, d2_rd: 4.09 };
        let direct = 0.5 * (1.01f64).log2();
        assert!(approx_eq(af_rate(&scn, &g, 0.0, 0.7).unwrap(), direct, 1e-15));
        assert!(approx_eq(direct, 0.00718, 1e-5));
        assert!(approx_eq(af_rate(&scn, &g, 3.0, 0.0).unwrap(), direct, 1e-15));
        // x = 0.5 / (2.5 * 0.09), y = 1 / 4.09, evaluated by hand.
        assert!(approx_eq(af_rate(&scn, &g, 1.0, 0.5).unwrap(), 0.111_20, 5e-5));
    }

    #[test]
    fn df_rate_examples() {
        let scn = scenario(2.0);
        let g = SlotGeometry { d2_sr: 0.09, d2_rd: 4.09 };
        assert_eq!(df_rate(&scn, &g, 2.0, 0.0).unwrap(), 0.0);
        assert!(approx_eq(df_rate(&scn, &g, 1.0, 0.5).unwrap(), 0.163_57, 5e-5));
        let no_direct = ScenarioParams { gamma: 0.0, ..ScenarioParams::default() }.build().unwrap();
        assert_eq!(df_rate(&no_direct, &g, 0.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn rates_reject_out_of_range_inputs() {
        let scn = scenario(2.0);
        let g = SlotGeometry { d2_sr: 1.0, d2_rd: 1.0 };
        assert!(matches!(af_rate(&scn, &g, -1.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(df_rate(&scn, &g, 1.0, 1.5), Err(Error::Domain(_))));
        assert!(matches!(harvested_energy(&scn, &g, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn harvest_examples() {
        let scn = scenario(2.0);
        let g = SlotGeometry { d2_sr: 1.09, d2_rd: 1.0 };
        assert_eq!(harvested_energy(&scn, &g, 1.0).unwrap(), 0.0);
        assert!(approx_eq(harvested_energy(&scn, &g, 0.0).unwrap(), 1.917_43, 1e-5));
        assert!(approx_eq(harvested_energy(&scn, &g, 0.5).unwrap(), 0.958_72, 1e-5));
    }

    #[test]
    fn residual_sign_flags_overspending() {
        let scn = ScenarioParams { num_slots: 2, max_step: 2.0, ..ScenarioParams::default() }
            .build()
            .unwrap();
        let traj = Trajectory::new(vec![[0.0, 1.0], [1.0, 0.0]]);
        let idle = Profile::zeros(2);
        let r = causality_residuals(&scn, &traj, &idle).unwrap();
        assert!(r[0] > 0.0 && r[1] > r[0] && is_causal(&r));

        let h1 = harvested_energy(&scn, &slot_geometry(&scn, [0.0, 1.0]), 0.5).unwrap();
        let greedy = Profile::new(vec![h1 + 0.1, 0.0], vec![0.5, 1.0]).unwrap();
        let r = causality_residuals(&scn, &traj, &greedy).unwrap();
        assert!(r[0] < 0.0 && !is_causal(&r));
    }

    #[test]
    fn throughput_of_idle_relay_is_direct_link_only() {
        let scn = Scenario::<f64>::reference();
        let traj = Trajectory::new(vec![[1.0, 0.0]; 50]);
        let t = total_throughput(&scn, &traj, &Profile::zeros(50), Protocol::Af).unwrap();
        assert!(approx_eq(t, 50.0 * 0.5 * 1.01f64.log2(), 1e-12));
        let dead = Profile::new(vec![1.0; 50], vec![0.0; 50]).unwrap();
        assert_eq!(total_throughput(&scn, &traj, &dead, Protocol::Df).unwrap(), 0.0);
    }

    #[test]
    fn straight_line_is_feasible_and_long_step_is_not() {
        let scn = Scenario::<f64>::reference();
        let n = 50;
        let pts: Vec<_> = (1..=n)
            .map(|k| {
                let s = k as f64 / (n + 1) as f64;
                [2.0 * s, 1.0 - 2.0 * s]
            })
            .collect();
        let chk = validate_trajectory(&scn, &Trajectory::new(pts.clone()));
        assert!(chk.feasible);

        let eps = 0.01;
        let mut bad = pts;
        bad[10] = [bad[9][0] + 0.2 + eps, bad[9][1]];
        let chk = validate_steps(&scn, &Trajectory::new(bad));
        assert!(!chk.feasible);
        assert!(chk.worst_violation >= 2.0 * 0.2 * eps + eps * eps - 1e-12);
    }

    #[test]
    fn single_slot_at_start_equals_end() {
        let scn = ScenarioParams { num_slots: 1, start: [0.5, 0.5], end: [0.5, 0.5], ..ScenarioParams::default() }
            .build()
            .unwrap();
        let chk = validate_trajectory(&scn, &Trajectory::new(vec![[0.5, 0.5]]));
        assert!(chk.feasible);
        assert!(approx_eq(chk.worst_violation, -0.04, 1e-15));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let err = ScenarioParams::<f64> { altitude: -1.0, ..ScenarioParams::default() }.build();
        assert!(matches!(err, Err(Error::InvalidScenario { field: "altitude_H", .. })));
        let err = ScenarioParams::<f64> { max_step: 0.01, ..ScenarioParams::default() }.build();
        assert!(matches!(err, Err(Error::InvalidScenario { field: "max_step_V", .. })));
    }
}
