//! Primal refinement of an AF profile. With the ratios fixed the problem is
//! concave in the powers, and with the powers fixed it is concave in the ratios;
//! each half is solved exactly by the pooled price search, and the halves alternate
//! while the throughput improves.

use crate::model::{harvested_raw, throughput_raw, Profile, Protocol, Scenario, SlotGeometry};
use crate::scalar::Scalar;

use super::af::{best_power, best_rho};
use super::restore_causality;
use super::staircase::pooled_prices;

const PRICE_TOL: f64 = 1e-13;

fn power_step<T: Scalar>(scn: &Scenario<T>, geo: &[SlotGeometry<T>], prof: &Profile<T>, p_max: T) -> Profile<T> {
    let net = |k: usize, alpha: T| {
        harvested_raw(scn, &geo[k], prof.rho[k]) - best_power(scn, &geo[k], prof.rho[k], alpha, p_max)
    };
    let (alpha, _) = pooled_prices(geo.len(), net, T::lit(PRICE_TOL));
    let power = (0..geo.len()).map(|k| best_power(scn, &geo[k], prof.rho[k], alpha[k], p_max)).collect();
    Profile { power, rho: prof.rho.clone() }
}

fn ratio_step<T: Scalar>(scn: &Scenario<T>, geo: &[SlotGeometry<T>], prof: &Profile<T>) -> Profile<T> {
    let net = |k: usize, alpha: T| {
        harvested_raw(scn, &geo[k], best_rho(scn, &geo[k], prof.power[k], alpha)) - prof.power[k]
    };
    let (alpha, _) = pooled_prices(geo.len(), net, T::lit(PRICE_TOL));
    let rho = (0..geo.len()).map(|k| best_rho(scn, &geo[k], prof.power[k], alpha[k])).collect();
    Profile { power: prof.power.clone(), rho }
}

/// Improves a causal AF profile by exact block-coordinate steps. Never returns a
/// worse profile than the input.
pub(crate) fn refine_af<T: Scalar>(
    scn: &Scenario<T>,
    geo: &[SlotGeometry<T>],
    start: Profile<T>,
    p_max: T,
    top_up: bool,
    max_rounds: usize,
) -> (Profile<T>, T) {
    let score = |p: &Profile<T>| throughput_raw(scn, geo, p, Protocol::Af);
    let mut best_val = score(&start);
    let mut best = start;
    for _ in 0..max_rounds {
        let before = best_val;
        for step in 0..2 {
            let mut cand = if step == 0 { power_step(scn, geo, &best, p_max) } else { ratio_step(scn, geo, &best) };
            restore_causality(scn, geo, &mut cand, top_up);
            let v = score(&cand);
            if v > best_val {
                best_val = v;
                best = cand;
            }
        }
        if best_val - before <= T::lit(1e-12) * T::one().max(best_val.abs()) {
            break;
        }
    }
    (best, best_val)
}
