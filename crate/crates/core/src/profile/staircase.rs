//! Exact minimization of the profile dual in terms of the cumulative prices.
//!
//! Written in `alpha`, the dual is `sum_n psi_n(alpha_n)` subject to
//! `alpha_1 >= alpha_2 >= ... >= alpha_N >= 0`, where each `psi_n` is convex with
//! derivative equal to the slot's net harvest at its inner maximizer. Pooling
//! adjacent violators gives the minimizer: every pool shares one price, chosen so
//! the pool's net harvest crosses zero (or zero price if the pool has a surplus).

use crate::scalar::Scalar;

/// Minimizes `sum psi_n(alpha_n)` over nonincreasing, non-negative `alpha`.
///
/// `net(n, alpha)` is `psi_n'(alpha)` and must be nondecreasing in `alpha`.
/// Returns the prices and the number of `net` evaluations. Each price is the upper
/// end of its final bracket, where the pool's net harvest is non-negative.
pub(crate) fn pooled_prices<T, F>(n: usize, net: F, rel_tol: T) -> (Vec<T>, usize)
where
    T: Scalar,
    F: FnMut(usize, T) -> T,
{
    let (hi, _, calls) = pooled_brackets(n, net, rel_tol);
    (hi, calls)
}

/// Like [`pooled_prices`] but also returns the lower end of every bracket, where
/// the pool runs a deficit. The two differ noticeably only where `net` jumps.
pub(crate) fn pooled_brackets<T, F>(n: usize, mut net: F, rel_tol: T) -> (Vec<T>, Vec<T>, usize)
where
    T: Scalar,
    F: FnMut(usize, T) -> T,
{
    let mut calls = 0usize;
    let mut solve = |lo_slot: usize, hi_slot: usize| -> (T, T) {
        let mut block = |alpha: T| {
            calls += hi_slot - lo_slot;
            (lo_slot..hi_slot).map(|k| net(k, alpha)).sum::<T>()
        };
        if block(T::zero()) >= T::zero() {
            return (T::zero(), T::zero());
        }
        let mut hi = T::one();
        let mut doublings = 0;
        while block(hi) < T::zero() {
            hi = hi * T::lit(2.0);
            doublings += 1;
            if doublings > 200 || !hi.is_finite() {
                return (hi, hi);
            }
        }
        let mut lo = T::zero();
        while hi - lo > rel_tol * hi {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if block(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (hi, lo)
    };

    // (first slot, one past last slot, (price, lower bracket))
    let mut pools: Vec<(usize, usize, (T, T))> = Vec::with_capacity(n);
    for k in 0..n {
        let mut pool = (k, k + 1, solve(k, k + 1));
        while let Some(&prev) = pools.last() {
            if prev.2 .0 >= pool.2 .0 {
                break;
            }
            pools.pop();
            pool = (prev.0, pool.1, solve(prev.0, pool.1));
        }
        pools.push(pool);
    }
    let mut upper = vec![T::zero(); n];
    let mut lower = vec![T::zero(); n];
    for (a, b, (hi, lo)) in pools {
        upper[a..b].iter_mut().for_each(|v| *v = hi);
        lower[a..b].iter_mut().for_each(|v| *v = lo);
    }
    (upper, lower, calls)
}
