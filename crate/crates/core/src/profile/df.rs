//! Decode-and-forward per-slot subproblems. With the rate epigraph folded into
//! `theta`, the slot Lagrangian splits into a power part
//! `(1 - theta) r2(p) - alpha p` and a ratio part `theta r1(rho) + alpha E (1 - rho)`.

use crate::error::{Error, Result};
use crate::model::{df_first_hop, df_second_hop, full_harvest, Scenario, SlotGeometry};
use crate::scalar::Scalar;

/// Stationary power of the power part. Needs `alpha > 0`; may be negative.
pub fn df_candidate_power<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, alpha: T, theta: T) -> Result<T> {
    if !(alpha > T::zero()) {
        return Err(Error::DegenerateDual(format!("power candidate undefined at energy price {alpha}")));
    }
    let price = alpha * scn.ln_base();
    Ok((T::one() - theta) / (T::lit(2.0) * price) - scn.direct_term() * g.d2_rd / scn.gamma0())
}

/// Stationary ratio of the ratio part. Needs `alpha > 0` and `theta > 0`; may leave `[0, 1]`.
pub fn df_candidate_rho<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, alpha: T, theta: T) -> Result<T> {
    if !(alpha > T::zero()) || !(theta > T::zero()) {
        return Err(Error::DegenerateDual(format!(
            "ratio candidate undefined at energy price {alpha}, rate weight {theta}"
        )));
    }
    let price = alpha * scn.ln_base();
    let a = scn.rel_noise();
    let k = scn.source_power() * scn.gamma0() / g.d2_sr;
    let w = price * scn.noise_power() / theta;
    let big = w * a * k;
    let root = big + (big * big + T::lit(2.0) * big).sqrt();
    Ok(root / (T::lit(2.0) * w * (T::one() + k)) - a)
}

/// Power part of the slot Lagrangian.
pub fn df_power_objective<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, alpha: T, theta: T, p: T) -> T {
    (T::one() - theta) * df_second_hop(scn, g, p) - alpha * p
}

/// Ratio part of the slot Lagrangian.
pub fn df_ratio_objective<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, alpha: T, theta: T, rho: T) -> T {
    theta * df_first_hop(scn, g, rho) + alpha * full_harvest(scn, g) * (T::one() - rho)
}

/// Maximizer of the power part over `[0, p_max]`.
pub fn df_best_power<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, alpha: T, theta: T, p_max: T) -> T {
    if theta >= T::one() {
        return T::zero();
    }
    match df_candidate_power(scn, g, alpha, theta) {
        Ok(p) => p.max(T::zero()).min(p_max),
        Err(_) => p_max,
    }
}

/// Maximizer of the ratio part over `[0, 1]`; ties between the endpoints go to zero.
pub fn df_best_rho<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, alpha: T, theta: T) -> T {
    if let Ok(r) = df_candidate_rho(scn, g, alpha, theta) {
        if r >= T::zero() && r <= T::one() {
            return r;
        }
    }
    let f0 = df_ratio_objective(scn, g, alpha, theta, T::zero());
    let f1 = df_ratio_objective(scn, g, alpha, theta, T::one());
    if f1 > f0 {
        T::one()
    } else {
        T::zero()
    }
}

/// Returns `(p*, rho*, objective)` of the slot Lagrangian.
pub fn df_slot_solve<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, alpha: T, theta: T, p_max: T) -> (T, T, T) {
    let p = df_best_power(scn, g, alpha, theta, p_max);
    let rho = df_best_rho(scn, g, alpha, theta);
    let obj = df_power_objective(scn, g, alpha, theta, p) + df_ratio_objective(scn, g, alpha, theta, rho);
    (p, rho, obj)
}

/// Power at which the second hop carries exactly the first-hop rate at `rho`.
pub fn df_balancing_power<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, rho: T) -> T {
    let snr = T::one() + scn.split_gain(rho) / g.d2_sr - scn.direct_term();
    snr.max(T::zero()) * g.d2_rd / scn.gamma0()
}

/// Rate weight minimizing the slot's dual term for a fixed price: the dual term is
/// convex in `theta` with derivative `r1(rho*) - r2(p*)`, nondecreasing in `theta`,
/// so bisection drives the two hops to balance whenever that is possible.
pub fn df_balanced_theta<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, alpha: T, p_max: T) -> T {
    let slope = |theta: T| {
        let p = df_best_power(scn, g, alpha, theta, p_max);
        let rho = df_best_rho(scn, g, alpha, theta);
        df_first_hop(scn, g, rho) - df_second_hop(scn, g, p)
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    if slope(lo) >= T::zero() {
        return lo;
    }
    if slope(hi) <= T::zero() {
        return hi;
    }
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScenarioParams;

    fn natural() -> Scenario<f64> {
        ScenarioParams { log_base: std::f64::consts::E, ..ScenarioParams::default() }.build().unwrap()
    }

    fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        while hi - lo > 1e-12 {
            let a = hi - r * (hi - lo);
            let b = lo + r * (hi - lo);
            if f(a) < f(b) {
                lo = a;
            } else {
                hi = b;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn power_candidate_example() {
        let s = natural();
        let g = SlotGeometry { d2_sr: 1.0, d2_rd: 0.09 };
        let p = df_candidate_power(&s, &g, 1.0, 0.5).unwrap();
        assert!((p - (0.25 - 1.01 * 0.09)).abs() < 1e-12);
        assert!((p - 0.1591).abs() < 1e-4);
        let oracle = golden_max(|p| df_power_objective(&s, &g, 1.0, 0.5, p), 0.0, 5.0);
        assert!((p - oracle).abs() < 1e-6);
    }

    #[test]
    fn ratio_candidate_example_falls_back_to_zero() {
        let s = natural();
        let g = SlotGeometry { d2_sr: 1.09, d2_rd: 1.0 };
        let r = df_candidate_rho(&s, &g, 1.0, 0.5).unwrap();
        assert!((r + 0.9268).abs() < 1e-4, "rho_c = {r}");
        assert_eq!(df_best_rho(&s, &g, 1.0, 0.5), 0.0);
        assert!(df_ratio_objective(&s, &g, 1.0, 0.5, 0.0) > df_ratio_objective(&s, &g, 1.0, 0.5, 1.0));
    }

    #[test]
    fn interior_ratio_candidate_is_stationary() {
        let s = Scenario::reference();
        let g = SlotGeometry { d2_sr: 0.2, d2_rd: 2.0 };
        let (alpha, theta) = (0.2, 0.7);
        let r = df_candidate_rho(&s, &g, alpha, theta).unwrap();
        assert!(r > 0.0 && r < 1.0, "rho_c = {r}");
        let oracle = golden_max(|r| df_ratio_objective(&s, &g, alpha, theta, r), 0.0, 1.0);
        assert!((r - oracle).abs() < 1e-6);
    }

    #[test]
    fn full_rate_weight_on_first_hop_turns_relay_off() {
        let s = Scenario::reference();
        let g = SlotGeometry { d2_sr: 1.0, d2_rd: 0.09 };
        assert!(df_candidate_power(&s, &g, 0.1, 1.0).unwrap() < 0.0);
        assert_eq!(df_best_power(&s, &g, 0.1, 1.0, 10.0), 0.0);
        assert_eq!(df_best_power(&s, &g, 0.0, 0.3, 10.0), 10.0);
        assert!(matches!(df_candidate_rho(&s, &g, 0.0, 0.5), Err(Error::DegenerateDual(_))));
        assert!(matches!(df_candidate_rho(&s, &g, 0.1, 0.0), Err(Error::DegenerateDual(_))));
        assert_eq!(df_best_rho(&s, &g, 0.0, 0.5), 1.0);
        assert_eq!(df_best_rho(&s, &g, 0.1, 0.0), 0.0);
    }

    #[test]
    fn balanced_theta_equalizes_hops_and_minimizes_dual_term() {
        let s = Scenario::reference();
        let g = SlotGeometry { d2_sr: 0.5, d2_rd: 1.5 };
        let (alpha, p_max): (f64, f64) = (0.05, 20.0);
        let theta = df_balanced_theta(&s, &g, alpha, p_max);
        assert!(theta > 0.0 && theta < 1.0);
        let (p, rho, obj) = df_slot_solve(&s, &g, alpha, theta, p_max);
        assert!((df_first_hop(&s, &g, rho) - df_second_hop(&s, &g, p)).abs() < 1e-9);
        for k in 0..=100 {
            let other = df_slot_solve(&s, &g, alpha, k as f64 / 100.0, p_max).2;
            assert!(other >= obj - 1e-12);
        }
    }
}
