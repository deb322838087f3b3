//! Concave quadratic under-estimators of the per-slot rates in the UAV position.
//!
//! Coefficients are stored in the units of the log argument (natural log, no
//! half-duplex factor); `scale` converts them to rate units.

use crate::model::{
    df_first_hop, df_second_hop, full_harvest, rate_raw, slot_geometry, Profile, Protocol, Scenario, Trajectory,
};
use crate::scalar::{norm2, Point, Scalar};
use crate::solver::{ConcaveQuadratic, SlotObjective};

/// `ln(omega + (r1 r2 / ((A1 + z1)(A2 + z2))) / (1 + r1 / (A1 + z1) + r2 / (A2 + z2)))`,
/// the AF log argument as a function of the squared-distance offsets `z1`, `z2`.
pub fn af_log_term<T: Scalar>(omega: T, r1: T, r2: T, a1: T, a2: T, z1: T, z2: T) -> T {
    let (u1, u2) = (a1 + z1, a2 + z2);
    let x = r1 / u1;
    let y = r2 / u2;
    (omega + x * y / (T::one() + x + y)).ln()
}

/// `mu |d|^2 + delta d_x + eta d_y` is subtracted from the current value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerm<T> {
    pub mu: T,
    pub delta: T,
    pub eta: T,
}

impl<T: Scalar> BoundTerm<T> {
    pub fn zero() -> Self {
        Self { mu: T::zero(), delta: T::zero(), eta: T::zero() }
    }

    fn centered(mu: T, pos: Point<T>, anchor: Point<T>) -> Self {
        let two = T::lit(2.0);
        Self { mu, delta: two * mu * (pos[0] - anchor[0]), eta: two * mu * (pos[1] - anchor[1]) }
    }

    /// Drop below the anchor value at increment `d`, in the stored units.
    pub fn penalty(&self, d: Point<T>) -> T {
        self.mu * norm2(d) + self.delta * d[0] + self.eta * d[1]
    }

    fn to_quadratic(self, value: T, scale: T) -> ConcaveQuadratic<T> {
        ConcaveQuadratic { constant: value, curvature: scale * self.mu, linear: [scale * self.delta, scale * self.eta] }
    }
}

/// One AF slot: the intermediate `X` and `phi` and the resulting bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfSlotBound<T> {
    pub x: T,
    pub phi: T,
    pub term: BoundTerm<T>,
    /// Rate at the current position.
    pub rate: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AfBoundCoefficients<T> {
    pub scale: T,
    pub slots: Vec<AfSlotBound<T>>,
}

/// One DF slot: first hop (source to UAV) and second hop (UAV to destination).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfSlotBound<T> {
    pub first: BoundTerm<T>,
    pub second: BoundTerm<T>,
    pub first_rate: T,
    pub second_rate: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfBoundCoefficients<T> {
    pub scale: T,
    pub slots: Vec<DfSlotBound<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundCoefficients<T> {
    Af(AfBoundCoefficients<T>),
    Df(DfBoundCoefficients<T>),
}

fn rate_scale<T: Scalar>(scn: &Scenario<T>) -> T {
    T::one() / (T::lit(2.0) * scn.ln_base())
}

pub fn af_bound_coefficients<T: Scalar>(
    scn: &Scenario<T>,
    traj: &Trajectory<T>,
    prof: &Profile<T>,
) -> AfBoundCoefficients<T> {
    let (s, d) = (scn.source(), scn.destination());
    let omega = scn.direct_term();
    let slots = traj
        .points
        .iter()
        .zip(prof.power.iter().zip(&prof.rho))
        .map(|(&w, (&p, &rho))| {
            let g = slot_geometry(scn, w);
            let (a1, a2) = (g.d2_sr, g.d2_rd);
            let r1 = scn.split_gain(rho);
            let r2 = p * scn.gamma0();
            let x = a1 * a2 + r1 * a2 + r2 * a1;
            let extra = r1 * r2 / omega;
            // 1/X - 1/(X + extra) without the cancellation
            let phi = extra / (x * (x + extra));
            let two = T::lit(2.0);
            let mu = phi * (a1 + a2 + r1 + r2);
            let delta = two * phi * ((a2 + r2) * (w[0] - s[0]) + (a1 + r1) * (w[0] - d[0]));
            let eta = two * phi * ((a2 + r2) * (w[1] - s[1]) + (a1 + r1) * (w[1] - d[1]));
            AfSlotBound { x, phi, term: BoundTerm { mu, delta, eta }, rate: rate_raw(scn, &g, Protocol::Af, p, rho) }
        })
        .collect();
    AfBoundCoefficients { scale: rate_scale(scn), slots }
}

pub fn df_bound_coefficients<T: Scalar>(
    scn: &Scenario<T>,
    traj: &Trajectory<T>,
    prof: &Profile<T>,
) -> DfBoundCoefficients<T> {
    let (s, d) = (scn.source(), scn.destination());
    let omega = scn.direct_term();
    let slots = traj
        .points
        .iter()
        .zip(prof.power.iter().zip(&prof.rho))
        .map(|(&w, (&p, &rho))| {
            let g = slot_geometry(scn, w);
            let r1 = scn.split_gain(rho);
            let r2 = p * scn.gamma0();
            let mu1 = if r1 > T::zero() { r1 / (g.d2_sr * (r1 + g.d2_sr)) } else { T::zero() };
            let mu2 = if r2 > T::zero() { r2 / (g.d2_rd * (r2 + omega * g.d2_rd)) } else { T::zero() };
            DfSlotBound {
                first: BoundTerm::centered(mu1, w, s),
                second: BoundTerm::centered(mu2, w, d),
                first_rate: df_first_hop(scn, &g, rho),
                second_rate: df_second_hop(scn, &g, p),
            }
        })
        .collect();
    DfBoundCoefficients { scale: rate_scale(scn), slots }
}

pub fn bound_coefficients<T: Scalar>(
    scn: &Scenario<T>,
    traj: &Trajectory<T>,
    prof: &Profile<T>,
    protocol: Protocol,
) -> BoundCoefficients<T> {
    match protocol {
        Protocol::Af => BoundCoefficients::Af(af_bound_coefficients(scn, traj, prof)),
        Protocol::Df => BoundCoefficients::Df(df_bound_coefficients(scn, traj, prof)),
    }
}

/// Per-slot lower bounds on the rate after moving by `increments`, and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundValue<T> {
    pub per_slot: Vec<T>,
    pub total: T,
}

impl<T: Scalar> BoundCoefficients<T> {
    pub fn len(&self) -> usize {
        match self {
            BoundCoefficients::Af(c) => c.slots.len(),
            BoundCoefficients::Df(c) => c.slots.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sum of the current rates, where every bound is tight.
    pub fn current_total(&self) -> T {
        match self {
            BoundCoefficients::Af(c) => c.slots.iter().map(|s| s.rate).sum(),
            BoundCoefficients::Df(c) => c.slots.iter().map(|s| s.first_rate.min(s.second_rate)).sum(),
        }
    }

    /// Objective pieces of the incremental problem, one entry per slot.
    pub fn slot_objectives(&self) -> Vec<SlotObjective<T>> {
        match self {
            BoundCoefficients::Af(c) => {
                c.slots.iter().map(|s| SlotObjective::single(s.term.to_quadratic(s.rate, c.scale))).collect()
            }
            BoundCoefficients::Df(c) => c
                .slots
                .iter()
                .map(|s| SlotObjective {
                    pieces: vec![
                        s.first.to_quadratic(s.first_rate, c.scale),
                        s.second.to_quadratic(s.second_rate, c.scale),
                    ],
                })
                .collect(),
        }
    }
}

/// Evaluates the bounds at the given increments. Slots beyond `increments` count as unmoved.
pub fn lower_bound_value<T: Scalar>(coeffs: &BoundCoefficients<T>, increments: &[Point<T>]) -> BoundValue<T> {
    let zero = [T::zero(), T::zero()];
    let inc = |i: usize| increments.get(i).copied().unwrap_or(zero);
    let per_slot: Vec<T> = match coeffs {
        BoundCoefficients::Af(c) => {
            c.slots.iter().enumerate().map(|(i, s)| s.rate - c.scale * s.term.penalty(inc(i))).collect()
        }
        BoundCoefficients::Df(c) => c
            .slots
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let d = inc(i);
                (s.first_rate - c.scale * s.first.penalty(d)).min(s.second_rate - c.scale * s.second.penalty(d))
            })
            .collect(),
    };
    let total = per_slot.iter().copied().sum();
    BoundValue { per_slot, total }
}

/// Concave lower bound on the energy harvested at `pos + d` with ratio `rho`,
/// from the tangent of `1 / d_sr^2` in the squared distance.
pub fn harvest_lower_bound<T: Scalar>(scn: &Scenario<T>, pos: Point<T>, rho: T) -> ConcaveQuadratic<T> {
    let g = slot_geometry(scn, pos);
    let s = scn.source();
    let keep = scn.noise_power() * (T::one() - rho);
    let c = keep * scn.source_power() * scn.gamma0() / (g.d2_sr * g.d2_sr);
    let two = T::lit(2.0);
    ConcaveQuadratic {
        constant: full_harvest(scn, &g) * (T::one() - rho),
        curvature: c,
        linear: [two * c * (pos[0] - s[0]), two * c * (pos[1] - s[1])],
    }
}
