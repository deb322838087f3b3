//! Amplify-and-forward per-slot subproblem:
//! `max_{p >= 0, 0 <= rho <= 1} r(p, rho) + alpha * (E * (1 - rho) - p)`.
//!
//! The stationary points come from two quadratics in the shifted variables
//! `p' = b2 p + b3` and `rho' = c2 rho + c3`. Coefficients are in natural-log
//! units: `b5` and `c5` carry the energy price multiplied by `ln(base)`, which is
//! what the price is worth in nats when rates are measured in the scenario base.

use crate::error::{Error, Result};
use crate::model::{af_rate_raw, full_harvest, Scenario, SlotGeometry};
use crate::scalar::Scalar;

/// Intermediate coefficients of the power (`b`) and ratio (`c`) stationarity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfSlotCoefficients<T> {
    /// From a fixed ratio: `b1 = 1 + Ps*gamma + x`, `b2 = gamma0 / d_rd^2`, `b3 = 1 + x`,
    /// `b4 = x * b3`, `b5 = alpha * ln(base)`, with `x` the post-split first-hop SNR.
    pub b: [T; 5],
    /// From a fixed power: `c1 = 1 + Ps*gamma + K*y/c2`, `c2 = 1 + K + y`, `c3 = (1 + y) a`,
    /// `c4 = (c1 - 1 - Ps*gamma) c3`, `c5 = alpha * ln(base) * (1 + K) * delta`,
    /// with `K = Ps*gamma0 / d_sr^2` and `y = p*gamma0 / d_rd^2`.
    pub c: [T; 5],
}

/// Coefficients given the ratio held fixed (for the power update) and the power held
/// fixed (for the ratio update).
pub fn af_coefficients<T: Scalar>(
    scn: &Scenario<T>,
    g: &SlotGeometry<T>,
    fixed_power: T,
    fixed_rho: T,
    alpha: T,
) -> Result<AfSlotCoefficients<T>> {
    if !(alpha > T::zero()) {
        return Err(Error::DegenerateDual(format!(
            "energy price {alpha} leaves the stationary point unbounded"
        )));
    }
    Ok(coefficients_unchecked(scn, g, fixed_power, fixed_rho, alpha))
}

fn coefficients_unchecked<T: Scalar>(
    scn: &Scenario<T>,
    g: &SlotGeometry<T>,
    p: T,
    rho: T,
    alpha: T,
) -> AfSlotCoefficients<T> {
    let one = T::one();
    let price = alpha * scn.ln_base();
    let direct = scn.direct_term();

    let x = scn.split_gain(rho) / g.d2_sr;
    let b2 = scn.gamma0() / g.d2_rd;
    let b3 = one + x;
    let b = [direct + x, b2, b3, x * b3, price];

    let k = scn.source_power() * scn.gamma0() / g.d2_sr;
    let y = p * scn.gamma0() / g.d2_rd;
    let c2 = one + k + y;
    let c1 = direct + k * y / c2;
    let c3 = (one + y) * scn.rel_noise();
    let c4 = (c1 - direct) * c3;
    let c5 = price * full_harvest(scn, g);
    AfSlotCoefficients { b, c: [c1, c2, c3, c4, c5] }
}

/// Positive root of `k1 u^2 - k4 u - k2 k4 / (2 k5) = 0`, mapped back by `(u - k3) / k2`.
fn shifted_root<T: Scalar>(k: &[T; 5]) -> T {
    let two = T::lit(2.0);
    let disc = k[3] * k[3] + two * k[0] * k[1] * k[3] / k[4];
    (k[3] + disc.max(T::zero()).sqrt()) / (two * k[0] * k[1]) - k[2] / k[1]
}

/// Stationary power for the fixed ratio. May be negative.
pub fn af_candidate_power<T: Scalar>(coeffs: &AfSlotCoefficients<T>) -> T {
    shifted_root(&coeffs.b)
}

/// Stationary ratio for the fixed power. May fall outside `[0, 1]`.
pub fn af_candidate_rho<T: Scalar>(coeffs: &AfSlotCoefficients<T>) -> T {
    shifted_root(&coeffs.c)
}

/// Per-slot Lagrangian term in rate units.
pub fn af_slot_objective<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, alpha: T, p: T, rho: T) -> T {
    af_rate_raw(scn, g, p, rho) + alpha * (full_harvest(scn, g) * (T::one() - rho) - p)
}

/// Which coordinate the alternation updates first.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AlternationStart<T> {
    /// Start from `rho = 1` and update the power first.
    #[default]
    PowerFirst,
    /// Start from `p = p_max` and update the ratio first.
    RatioFirst,
    /// Start from the given ratio and update the power first.
    Ratio(T),
}

#[derive(Debug, Clone, Copy)]
pub struct SlotSolveOptions<T> {
    /// Stop when the objective improves by less than this.
    pub tol: T,
    pub max_iter: usize,
    pub start: AlternationStart<T>,
}

impl<T: Scalar> Default for SlotSolveOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-12), max_iter: 100, start: AlternationStart::PowerFirst }
    }
}

#[derive(Debug, Clone)]
pub struct SlotSolution<T> {
    pub power: T,
    pub rho: T,
    pub objective: T,
    /// Objective after each full (power, ratio) alternation.
    pub trace: Vec<T>,
}

pub(crate) fn best_power<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, rho: T, alpha: T, p_max: T) -> T {
    if alpha > T::zero() {
        let c = coefficients_unchecked(scn, g, T::zero(), rho, alpha);
        af_candidate_power(&c).max(T::zero()).min(p_max)
    } else {
        p_max
    }
}

pub(crate) fn best_rho<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, p: T, alpha: T) -> T {
    if alpha > T::zero() {
        let c = coefficients_unchecked(scn, g, p, T::zero(), alpha);
        let cand = af_candidate_rho(&c);
        if cand >= T::zero() && cand <= T::one() {
            return cand;
        }
    }
    let f0 = af_slot_objective(scn, g, alpha, p, T::zero());
    let f1 = af_slot_objective(scn, g, alpha, p, T::one());
    if f1 > f0 {
        T::one()
    } else {
        T::zero()
    }
}

/// Maximizes the per-slot Lagrangian term by alternating the closed-form power and
/// ratio updates. `p_max` bounds the power; it only binds when `alpha` is zero or tiny.
///
/// The slot objective is concave in each coordinate separately but not jointly, so a
/// single alternation can stall at a coordinate-wise maximum. The alternation is run
/// from both starts and from the best point of a coarse ratio scan (with the power
/// maximized in closed form); the best result is returned.
pub fn af_slot_solve<T: Scalar>(
    scn: &Scenario<T>,
    g: &SlotGeometry<T>,
    alpha: T,
    p_max: T,
    opts: &SlotSolveOptions<T>,
) -> Result<SlotSolution<T>> {
    let other = match opts.start {
        AlternationStart::PowerFirst => AlternationStart::RatioFirst,
        _ => AlternationStart::PowerFirst,
    };
    let starts = [opts.start, other, AlternationStart::Ratio(scan_ratio(scn, g, alpha, p_max))];
    let mut best: Option<SlotSolution<T>> = None;
    let mut capped = None;
    for start in starts {
        match alternate(scn, g, alpha, p_max, opts, start) {
            Ok(sol) => {
                if best.as_ref().map_or(true, |b| sol.objective > b.objective) {
                    best = Some(sol);
                }
            }
            Err(e) => capped = Some(e),
        }
    }
    match (best, capped) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("at least one start runs"),
    }
}

const SCAN_POINTS: usize = 32;

fn scan_ratio<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, alpha: T, p_max: T) -> T {
    let mut best = (T::neg_infinity(), T::zero());
    for k in 0..=SCAN_POINTS {
        let rho = T::of_usize(k) / T::of_usize(SCAN_POINTS);
        let p = best_power(scn, g, rho, alpha, p_max);
        let v = af_slot_objective(scn, g, alpha, p, rho);
        if v > best.0 {
            best = (v, rho);
        }
    }
    best.1
}

fn alternate<T: Scalar>(
    scn: &Scenario<T>,
    g: &SlotGeometry<T>,
    alpha: T,
    p_max: T,
    opts: &SlotSolveOptions<T>,
    start: AlternationStart<T>,
) -> Result<SlotSolution<T>> {
    let mut p = match start {
        AlternationStart::PowerFirst => best_power(scn, g, T::one(), alpha, p_max),
        AlternationStart::RatioFirst => p_max,
        AlternationStart::Ratio(rho) => best_power(scn, g, rho, alpha, p_max),
    };
    let mut rho = best_rho(scn, g, p, alpha);
    let mut objective = af_slot_objective(scn, g, alpha, p, rho);
    let mut trace = vec![objective];
    for _ in 0..opts.max_iter {
        p = best_power(scn, g, rho, alpha, p_max);
        rho = best_rho(scn, g, p, alpha);
        let next = af_slot_objective(scn, g, alpha, p, rho);
        trace.push(next);
        let gain = next - objective;
        objective = next;
        if gain <= opts.tol {
            return Ok(SlotSolution { power: p, rho, objective, trace });
        }
    }
    Err(Error::IterationLimit { stage: "af slot alternation", iterations: opts.max_iter })
}
