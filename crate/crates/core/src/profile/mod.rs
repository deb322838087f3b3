//! Power and power-splitting profile for a fixed trajectory, by dual decomposition
//! over the energy-causality constraints.

mod af;
mod df;
mod refine;
mod staircase;
mod storage;

pub use af::{
    af_candidate_power, af_candidate_rho, af_coefficients, af_slot_objective, af_slot_solve, AfSlotCoefficients,
    AlternationStart, SlotSolution, SlotSolveOptions,
};
pub use df::{
    df_best_power, df_best_rho, df_candidate_power, df_candidate_rho, df_power_objective, df_ratio_objective,
    df_balanced_theta, df_balancing_power, df_slot_solve,
};

use log::debug;

use crate::error::{Error, Result};
use crate::model::{
    df_first_hop, df_second_hop, full_harvest, harvested_raw, residuals_raw, throughput_raw, trajectory_geometry,
    validate_steps, validate_trajectory, Profile, Protocol, Scenario, SlotGeometry, Trajectory,
};
use crate::scalar::Scalar;
use crate::solver::{dual_ascent, DualEvaluation, DualMethod, DualOptions, DualReport, DualTermination};

/// Multipliers of the causality constraints (`lambda`) and, for DF, of the rate
/// epigraph (`theta`). `alpha[n]` is the suffix sum of `lambda` from `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState<T> {
    pub lambda: Vec<T>,
    pub theta: Option<Vec<T>>,
    pub alpha: Vec<T>,
}

impl<T: Scalar> DualState<T> {
    pub fn new(lambda: Vec<T>, theta: Option<Vec<T>>) -> Result<Self> {
        if lambda.iter().any(|&l| !(l >= T::zero())) {
            return Err(Error::Domain("lambda must be non-negative".into()));
        }
        if let Some(th) = &theta {
            if th.len() != lambda.len() {
                return Err(Error::LengthMismatch { expected: lambda.len(), got: th.len() });
            }
            if th.iter().any(|&t| !(t >= T::zero() && t <= T::one())) {
                return Err(Error::Domain("theta must lie in [0, 1]".into()));
            }
        }
        Ok(Self::from_parts_unchecked(lambda, theta))
    }

    /// `lambda = 1/N`, and `theta = 1/2` for DF.
    pub fn initial(n: usize, protocol: Protocol) -> Self {
        let l = T::one() / T::of_usize(n.max(1));
        let theta = (protocol == Protocol::Df).then(|| vec![T::lit(0.5); n]);
        Self::from_parts_unchecked(vec![l; n], theta)
    }

    fn from_parts_unchecked(lambda: Vec<T>, theta: Option<Vec<T>>) -> Self {
        let mut alpha = lambda.clone();
        for i in (0..alpha.len().saturating_sub(1)).rev() {
            alpha[i] = alpha[i] + alpha[i + 1];
        }
        Self { lambda, theta, alpha }
    }

    fn to_flat(&self) -> Vec<T> {
        let mut v = self.lambda.clone();
        if let Some(th) = &self.theta {
            v.extend_from_slice(th);
        }
        v
    }

    fn from_flat(x: &[T], n: usize) -> Self {
        let theta = (x.len() > n).then(|| x[n..].to_vec());
        Self::from_parts_unchecked(x[..n].to_vec(), theta)
    }
}

/// How the dual is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DualScheme {
    /// Exact minimization over the cumulative prices by pooling adjacent slots.
    #[default]
    Pooled,
    /// The generic projected-subgradient or ellipsoid method configured in `dual`.
    Iterative,
}

/// How the DF rate weights `theta` are updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaUpdate {
    /// Minimize the dual over each `theta_n` exactly for the current prices.
    #[default]
    Exact,
    /// Treat `theta` as part of the dual vector of the outer method.
    Joint,
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions<T> {
    pub scheme: DualScheme,
    /// Settings of the iterative scheme.
    pub dual: DualOptions<T>,
    pub theta: ThetaUpdate,
    pub slot: SlotSolveOptions<T>,
    /// Spend the energy left over after the last slot in the last slot.
    pub top_up: bool,
    /// Check the departure and arrival legs too. Hovering strategies turn this off.
    pub check_endpoints: bool,
    /// Rounds of exact power/ratio block steps applied to the recovered AF profile.
    pub refine_rounds: usize,
    /// Also search AF spending patterns with the stored-energy dynamic program.
    pub storage_search: bool,
}

impl<T: Scalar> Default for ProfileOptions<T> {
    fn default() -> Self {
        Self {
            scheme: DualScheme::Pooled,
            dual: DualOptions {
                method: DualMethod::Subgradient { step0: T::lit(0.5) },
                ..DualOptions::default()
            },
            theta: ThetaUpdate::Exact,
            slot: SlotSolveOptions::default(),
            top_up: true,
            check_endpoints: true,
            refine_rounds: 50,
            storage_search: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProfileSolution<T> {
    pub profile: Profile<T>,
    /// Duals at the best dual value found.
    pub duals: DualState<T>,
    pub throughput: T,
    pub dual_value: T,
    pub report: DualReport<T>,
}

impl<T: Scalar> ProfileSolution<T> {
    /// Dual value minus throughput; non-negative by weak duality.
    pub fn gap(&self) -> T {
        self.dual_value - self.throughput
    }
}

/// Inner maximizer of the Lagrangian for fixed duals.
#[derive(Debug, Clone)]
pub struct InnerSolution<T> {
    pub profile: Profile<T>,
    pub value: T,
    /// DF rate weights actually used.
    pub theta: Option<Vec<T>>,
}

/// Energy available over the whole flight; caps the power when a price is zero.
pub fn power_cap<T: Scalar>(scn: &Scenario<T>, geo: &[SlotGeometry<T>]) -> T {
    geo.iter().map(|g| full_harvest(scn, g)).sum()
}

/// Maximizes the Lagrangian slot by slot for the given duals. With
/// [`ThetaUpdate::Exact`] the DF weights in `duals` are ignored and replaced by the
/// per-slot minimizers.
pub fn solve_inner<T: Scalar>(
    scn: &Scenario<T>,
    geo: &[SlotGeometry<T>],
    duals: &DualState<T>,
    protocol: Protocol,
    opts: &ProfileOptions<T>,
) -> Result<InnerSolution<T>> {
    let n = geo.len();
    let p_max = power_cap(scn, geo);
    let mut power = Vec::with_capacity(n);
    let mut rho = Vec::with_capacity(n);
    let mut thetas = Vec::new();
    let mut value = T::zero();
    for (i, g) in geo.iter().enumerate() {
        let fixed = match (opts.theta, duals.theta.as_ref()) {
            (ThetaUpdate::Joint, Some(t)) => Some(t[i]),
            _ => None,
        };
        let s = solve_slot(scn, g, duals.alpha[i], fixed, protocol, p_max, opts)?;
        power.push(s.power);
        rho.push(s.rho);
        thetas.extend(s.theta);
        value = value + s.objective;
    }
    let theta = (protocol == Protocol::Df).then_some(thetas);
    Ok(InnerSolution { profile: Profile { power, rho }, value, theta })
}

struct SlotInner<T> {
    power: T,
    rho: T,
    objective: T,
    theta: Option<T>,
}

fn solve_slot<T: Scalar>(
    scn: &Scenario<T>,
    g: &SlotGeometry<T>,
    alpha: T,
    theta: Option<T>,
    protocol: Protocol,
    p_max: T,
    opts: &ProfileOptions<T>,
) -> Result<SlotInner<T>> {
    Ok(match protocol {
        Protocol::Af => {
            let s = af_slot_solve(scn, g, alpha, p_max, &opts.slot)?;
            SlotInner { power: s.power, rho: s.rho, objective: s.objective, theta: None }
        }
        Protocol::Df => {
            let theta = theta.unwrap_or_else(|| df_balanced_theta(scn, g, alpha, p_max));
            let (mut p, mut rho, objective) = df_slot_solve(scn, g, alpha, theta, p_max);
            if !(alpha > T::zero()) {
                // Free energy: take the limit of the maximizers as the price drops to
                // zero, full first hop and just enough power to match it. A tie at
                // theta = 0 would otherwise pick rho = 0 and fake a surplus.
                rho = T::one();
                p = df_balancing_power(scn, g, rho).min(p_max);
            }
            SlotInner { power: p, rho, objective, theta: Some(theta) }
        }
    })
}

/// Subgradient of the dual function at `duals`, given the inner maximizer `prof`.
/// The first `N` entries are the causality residuals; DF appends `r1 - r2` per slot.
pub fn dual_subgradient<T: Scalar>(
    scn: &Scenario<T>,
    traj: &Trajectory<T>,
    prof: &Profile<T>,
    duals: &DualState<T>,
    protocol: Protocol,
) -> Result<Vec<T>> {
    traj.check_len(scn)?;
    prof.check_len(scn)?;
    if duals.lambda.len() != scn.num_slots() {
        return Err(Error::LengthMismatch { expected: scn.num_slots(), got: duals.lambda.len() });
    }
    Ok(subgradient_raw(scn, &trajectory_geometry(scn, traj), prof, protocol))
}

fn subgradient_raw<T: Scalar>(scn: &Scenario<T>, geo: &[SlotGeometry<T>], prof: &Profile<T>, protocol: Protocol) -> Vec<T> {
    let mut g = residuals_raw(scn, geo, prof);
    if protocol == Protocol::Df {
        g.extend(
            geo.iter()
                .zip(prof.power.iter().zip(&prof.rho))
                .map(|(s, (&p, &r))| df_first_hop(scn, s, r) - df_second_hop(scn, s, p)),
        );
    }
    g
}

/// Makes a profile causal by cutting the power of the earliest violating slots.
/// With `top_up`, energy still unspent at the end goes into the last slot.
pub fn restore_causality<T: Scalar>(scn: &Scenario<T>, geo: &[SlotGeometry<T>], prof: &mut Profile<T>, top_up: bool) {
    let mut stored = T::zero();
    for (i, g) in geo.iter().enumerate() {
        stored = stored + harvested_raw(scn, g, prof.rho[i]);
        let p = prof.power[i].min(stored).max(T::zero());
        prof.power[i] = p;
        stored = (stored - p).max(T::zero());
    }
    if top_up {
        if let Some(last) = prof.power.last_mut() {
            *last = *last + stored;
        }
    }
}

/// Dual decomposition for the profile subproblem on a fixed trajectory.
/// Returns the best causal profile recovered along the dual iterations.
pub fn optimize_profile<T: Scalar>(
    scn: &Scenario<T>,
    traj: &Trajectory<T>,
    protocol: Protocol,
    opts: &ProfileOptions<T>,
) -> Result<ProfileSolution<T>> {
    traj.check_len(scn)?;
    let check = if opts.check_endpoints { validate_trajectory(scn, traj) } else { validate_steps(scn, traj) };
    if !check.feasible {
        return Err(Error::InfeasibleTrajectory { violation: check.worst_violation.to_f64().unwrap_or(f64::NAN) });
    }
    let n = scn.num_slots();
    let geo = trajectory_geometry(scn, traj);
    if opts.scheme == DualScheme::Pooled {
        return pooled(scn, &geo, protocol, opts);
    }
    let init = DualState::initial(n, protocol);
    let joint = protocol == Protocol::Df && opts.theta == ThetaUpdate::Joint;
    let dim = if joint { 2 * n } else { n };
    let lower = vec![T::zero(); dim];
    let mut upper = vec![T::infinity(); n];
    upper.resize(dim, T::one());

    let mut failure: Option<Error> = None;
    let mut best: Option<(T, Profile<T>)> = None;
    let mut best_dual: Option<(T, DualState<T>)> = None;
    let evaluate = |x: &[T]| {
        let mut duals = DualState::from_flat(x, n);
        if !joint {
            duals.theta = init.theta.clone();
        }
        let inner = match solve_inner(scn, &geo, &duals, protocol, opts) {
            Ok(s) => s,
            Err(e) => {
                failure.get_or_insert(e);
                return DualEvaluation { value: T::infinity(), subgradient: vec![T::zero(); x.len()], primal_value: None };
            }
        };
        let mut subgradient = subgradient_raw(scn, &geo, &inner.profile, protocol);
        subgradient.truncate(dim);
        duals.theta = inner.theta.clone();
        if best_dual.as_ref().map_or(true, |(v, _)| inner.value < *v) {
            best_dual = Some((inner.value, duals));
        }
        let mut recovered = inner.profile;
        restore_causality(scn, &geo, &mut recovered, opts.top_up);
        let primal = throughput_raw(scn, &geo, &recovered, protocol);
        if best.as_ref().map_or(true, |(b, _)| primal > *b) {
            best = Some((primal, recovered));
        }
        DualEvaluation { value: inner.value, subgradient, primal_value: Some(primal) }
    };
    let start = if joint { init.to_flat() } else { init.lambda.clone() };
    let (_, report) = dual_ascent(evaluate, start, &lower, &upper, &opts.dual);
    if let Some(e) = failure {
        return Err(e);
    }
    if report.hit_cap() {
        debug!("profile dual ascent stopped at the cap after {} iterations", report.iterations);
    }
    let (_, profile) = best.expect("dual ascent evaluates at least once");
    let (dual_value, duals) = best_dual.expect("dual ascent evaluates at least once");
    let (throughput, profile) = recover(scn, &geo, protocol, vec![profile], opts);
    Ok(ProfileSolution { profile, duals, throughput, dual_value, report })
}

/// Restores causality on every candidate and keeps the best. For AF, adds the
/// stored-energy program's profile and refines each candidate first.
fn recover<T: Scalar>(
    scn: &Scenario<T>,
    geo: &[SlotGeometry<T>],
    protocol: Protocol,
    mut candidates: Vec<Profile<T>>,
    opts: &ProfileOptions<T>,
) -> (T, Profile<T>) {
    if protocol == Protocol::Af {
        candidates.push(crate::baselines::greedy_profile_raw(scn, geo, protocol));
        if opts.storage_search {
            candidates.push(storage::storage_dp(scn, geo));
        }
    }
    let p_max = power_cap(scn, geo);
    let mut best: Option<(T, Profile<T>)> = None;
    for mut cand in candidates {
        restore_causality(scn, geo, &mut cand, opts.top_up);
        let (cand, v) = if protocol == Protocol::Af && opts.refine_rounds > 0 {
            refine::refine_af(scn, geo, cand, p_max, opts.top_up, opts.refine_rounds)
        } else {
            let v = throughput_raw(scn, geo, &cand, protocol);
            (cand, v)
        };
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, cand));
        }
    }
    best.expect("at least one candidate")
}

fn alpha_to_lambda<T: Scalar>(alpha: &[T]) -> Vec<T> {
    (0..alpha.len()).map(|k| alpha[k] - alpha.get(k + 1).copied().unwrap_or(T::zero())).collect()
}

fn pooled<T: Scalar>(
    scn: &Scenario<T>,
    geo: &[SlotGeometry<T>],
    protocol: Protocol,
    opts: &ProfileOptions<T>,
) -> Result<ProfileSolution<T>> {
    let n = geo.len();
    let p_max = power_cap(scn, geo);
    let mut failure: Option<Error> = None;
    let net = |k: usize, alpha: T| match solve_slot(scn, &geo[k], alpha, None, protocol, p_max, opts) {
        Ok(s) => harvested_raw(scn, &geo[k], s.rho) - s.power,
        Err(e) => {
            failure.get_or_insert(e);
            T::zero()
        }
    };
    let (alpha, alpha_low, calls) = staircase::pooled_brackets(n, net, T::lit(1e-13));
    if let Some(e) = failure {
        return Err(e);
    }
    let free_theta = ProfileOptions { theta: ThetaUpdate::Exact, ..*opts };
    let mut duals = DualState::from_parts_unchecked(alpha_to_lambda(&alpha), None);
    let inner = solve_inner(scn, geo, &duals, protocol, &free_theta)?;
    duals.theta = inner.theta.clone();

    // Where a pool's price sits on a jump of the slot maximizers, the deficit side of
    // the bracket can recover a better profile than the surplus side.
    let mut candidates = vec![inner.profile.clone()];
    if alpha_low != alpha {
        let low = DualState::from_parts_unchecked(alpha_to_lambda(&alpha_low), None);
        candidates.push(solve_inner(scn, geo, &low, protocol, &free_theta)?.profile);
    }
    let (throughput, profile) = recover(scn, geo, protocol, candidates, opts);
    let report = DualReport {
        best_value: inner.value,
        best_primal: Some(throughput),
        iterations: calls,
        termination: DualTermination::Converged,
        best_trace: vec![inner.value],
    };
    Ok(ProfileSolution { profile, duals, throughput, dual_value: inner.value, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{causality_residuals, is_causal, ScenarioParams};

    fn small(n: usize) -> (Scenario<f64>, Trajectory<f64>) {
        let s = ScenarioParams {
            num_slots: n,
            start: [0.4, 0.3],
            end: [0.6, -0.1],
            max_step: 0.5,
            ..ScenarioParams::default()
        }
        .build()
        .unwrap();
        let pts = (1..=n)
            .map(|k| {
                let t = k as f64 / (n + 1) as f64;
                [0.4 + 0.2 * t, 0.3 - 0.4 * t]
            })
            .collect();
        (s, Trajectory::new(pts))
    }

    #[test]
    fn alpha_is_suffix_sum() {
        let d = DualState::<f64>::new(vec![0.1, 0.2, 0.3], None).unwrap();
        assert_eq!(d.alpha.len(), 3);
        assert!((d.alpha[0] - 0.6).abs() < 1e-15);
        assert!((d.alpha[1] - 0.5).abs() < 1e-15);
        assert_eq!(d.alpha[2], 0.3);
        assert!(DualState::new(vec![-0.1], None).is_err());
        assert!(DualState::new(vec![0.1], Some(vec![1.5])).is_err());
    }

    #[test]
    fn tight_profile_has_zero_residual_block() {
        let (s, t) = small(3);
        let geo = trajectory_geometry(&s, &t);
        let rho = vec![0.3, 0.5, 0.7];
        let power = geo.iter().zip(&rho).map(|(g, &r)| harvested_raw(&s, g, r)).collect();
        let prof = Profile::new(power, rho).unwrap();
        let d = DualState::initial(3, Protocol::Af);
        let g = dual_subgradient(&s, &t, &prof, &d, Protocol::Af).unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn restore_causality_clips_earliest_and_tops_up() {
        let (s, t) = small(3);
        let geo = trajectory_geometry(&s, &t);
        let mut prof = Profile { power: vec![100.0, 0.0, 0.0], rho: vec![0.5; 3] };
        restore_causality(&s, &geo, &mut prof, false);
        assert!((prof.power[0] - harvested_raw(&s, &geo[0], 0.5)).abs() < 1e-12);
        let mut prof = Profile { power: vec![0.0; 3], rho: vec![0.5; 3] };
        restore_causality(&s, &geo, &mut prof, true);
        let res = residuals_raw(&s, &geo, &prof);
        assert!(res[2].abs() < 1e-12);
    }

    #[test]
    fn profile_is_causal_and_dual_bounds_primal() {
        for protocol in Protocol::ALL {
            let (s, t) = small(4);
            let sol = optimize_profile(&s, &t, protocol, &ProfileOptions::default()).unwrap();
            let res = causality_residuals(&s, &t, &sol.profile).unwrap();
            assert!(is_causal(&res));
            assert!(sol.gap() >= -1e-9);
            assert!(sol.throughput > 0.0);
        }
    }
}
