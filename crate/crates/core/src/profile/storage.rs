//! Dynamic program over the stored energy for the AF profile.
//!
//! The best AF rate as a function of the energy a slot consumes is convex over much
//! of its range, so the relaxed dual can settle on a price where the slot maximizers
//! jump and the recovered profile is far from optimal. The program below searches
//! bursty spending patterns directly: the state is the energy carried into a slot on
//! a uniform grid, and a transition spends `c` out of storage, which is split between
//! relay power and the ratio by a 1-D search.

use crate::model::{af_rate_raw, full_harvest, Profile, Scenario, SlotGeometry};
use crate::scalar::Scalar;

/// Grid size is chosen so that `N * G^2` stays near this many transitions.
const TRANSITION_BUDGET: f64 = 1.2e8;
const MAX_LEVELS: usize = 6000;
const SCAN: usize = 16;

/// Best ratio and rate for a slot drawing `c` out of storage (negative `c` saves).
fn best_split<T: Scalar>(scn: &Scenario<T>, g: &SlotGeometry<T>, full: T, c: T) -> (T, T) {
    let one = T::one();
    let hi = one.min(one + c / full);
    if hi < T::zero() {
        return (T::zero(), T::neg_infinity());
    }
    let f = |rho: T| {
        let p = (c + full * (one - rho)).max(T::zero());
        af_rate_raw(scn, g, p, rho)
    };
    let mut best = (T::zero(), f(T::zero()));
    for k in 1..=SCAN {
        let rho = hi * T::of_usize(k) / T::of_usize(SCAN);
        let v = f(rho);
        if v > best.1 {
            best = (rho, v);
        }
    }
    let step = hi / T::of_usize(SCAN);
    let (mut lo, mut up) = ((best.0 - step).max(T::zero()), (best.0 + step).min(hi));
    let r = T::lit(0.618_033_988_749_894_8);
    let mut a = up - r * (up - lo);
    let mut b = lo + r * (up - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..60 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (up - lo);
            fb = f(b);
        } else {
            up = b;
            b = a;
            fb = fa;
            a = up - r * (up - lo);
            fa = f(a);
        }
    }
    let mid = T::lit(0.5) * (lo + up);
    let fm = f(mid);
    if fm > best.1 {
        (mid, fm)
    } else {
        best
    }
}

/// Returns a causal AF profile maximizing throughput over the storage grid.
pub(crate) fn storage_dp<T: Scalar>(scn: &Scenario<T>, geo: &[SlotGeometry<T>]) -> Profile<T> {
    let n = geo.len();
    let full: Vec<T> = geo.iter().map(|g| full_harvest(scn, g)).collect();
    let total: T = full.iter().copied().sum();
    let levels = ((TRANSITION_BUDGET / n.max(1) as f64).sqrt() as usize).clamp(16, MAX_LEVELS);
    let h = total / T::of_usize(levels);

    // value[n][j] for c = (j - save[n]) * h
    let save: Vec<usize> = full.iter().map(|&e| (e / h).floor().to_usize().unwrap_or(0)).collect();
    let mut value: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut ratio: Vec<Vec<T>> = Vec::with_capacity(n);
    for k in 0..n {
        let (mut vals, mut rhos) = (Vec::new(), Vec::new());
        for j in 0..=save[k] + levels {
            let c = (T::of_usize(j) - T::of_usize(save[k])) * h;
            let (rho, v) = best_split(scn, &geo[k], full[k], c);
            vals.push(v);
            rhos.push(rho);
        }
        value.push(vals);
        ratio.push(rhos);
    }

    // to_go[k][s]: best rate from slot k on, entering with s * h stored.
    let mut to_go = vec![vec![T::zero(); levels + 1]; n + 1];
    let mut choice = vec![vec![0usize; levels + 1]; n];
    for k in (0..n).rev() {
        for s in 0..=levels {
            let top = (s + save[k]).min(levels);
            let mut best = (T::neg_infinity(), s);
            for next in 0..=top {
                // draw = s - next, index = draw + save
                let v = value[k][s + save[k] - next] + to_go[k + 1][next];
                if v > best.0 {
                    best = (v, next);
                }
            }
            to_go[k][s] = best.0;
            choice[k][s] = best.1;
        }
    }

    let mut power = Vec::with_capacity(n);
    let mut rho = Vec::with_capacity(n);
    let mut s = 0usize;
    for k in 0..n {
        let next = choice[k][s];
        let j = s + save[k] - next;
        let r = ratio[k][j];
        let c = (T::of_usize(j) - T::of_usize(save[k])) * h;
        power.push((c + full[k] * (T::one() - r)).max(T::zero()));
        rho.push(r);
        s = next;
    }
    Profile { power, rho }
}
