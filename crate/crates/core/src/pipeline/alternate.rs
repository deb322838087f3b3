//! Alternating profile and trajectory optimization.

use std::time::{Duration, Instant};

use log::{debug, info};

use crate::baselines::Strategy;
use crate::error::Result;
use crate::model::{throughput_raw, trajectory_geometry, Profile, Protocol, Scenario, Trajectory};
use crate::profile::{optimize_profile, ProfileOptions};
use crate::scalar::{Point, Scalar};
use crate::trajectory::{optimize_trajectory, TrajectoryOptions};

#[derive(Debug, Clone, Copy)]
pub struct AlternateOptions<T> {
    pub max_outer: usize,
    /// Stop once a round gains less than this fraction of the throughput.
    pub rel_tol: T,
    pub profile: ProfileOptions<T>,
    pub trajectory: TrajectoryOptions<T>,
}

impl<T: Scalar> Default for AlternateOptions<T> {
    fn default() -> Self {
        Self {
            max_outer: 50,
            rel_tol: T::lit(1e-3),
            profile: ProfileOptions::default(),
            trajectory: TrajectoryOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterTermination {
    Converged,
    /// A round did not improve the throughput.
    NoImprovement,
    IterationLimit,
    /// One-shot strategies.
    SinglePass,
}

impl OuterTermination {
    pub fn as_str(self) -> &'static str {
        match self {
            OuterTermination::Converged => "converged",
            OuterTermination::NoImprovement => "no-improvement",
            OuterTermination::IterationLimit => "iteration-limit",
            OuterTermination::SinglePass => "single-pass",
        }
    }
}

/// Result of one strategy run.
#[derive(Debug, Clone)]
pub struct RunRecord<T> {
    pub strategy: Strategy,
    pub protocol: Protocol,
    /// Name of the initial trajectory (`straight`, `semicircle` or `hover`).
    pub init: String,
    /// Throughput after the first profile step and after every outer round.
    pub trace: Vec<T>,
    pub profile: Profile<T>,
    pub trajectory: Trajectory<T>,
    pub throughput: T,
    pub elapsed: Duration,
    pub termination: OuterTermination,
    pub hover: Option<Point<T>>,
}

/// Alternates the profile and trajectory subproblems from `traj_init`.
///
/// Every round first moves the trajectory with the profile fixed, then re-solves
/// the profile; a profile that does worse than the one already in hand is
/// discarded, so the trace never decreases.
pub fn alternate_optimize<T: Scalar>(
    scn: &Scenario<T>,
    protocol: Protocol,
    traj_init: &Trajectory<T>,
    init_name: &str,
    opts: &AlternateOptions<T>,
) -> Result<RunRecord<T>> {
    let clock = Instant::now();
    let first = optimize_profile(scn, traj_init, protocol, &opts.profile)?;
    let mut trajectory = traj_init.clone();
    let mut profile = first.profile;
    let mut throughput = first.throughput;
    let mut trace = vec![throughput];
    let mut termination = OuterTermination::IterationLimit;
    debug!("{protocol} outer round 0: {throughput}");

    for round in 1..=opts.max_outer {
        let moved = optimize_trajectory(scn, &profile, &trajectory, protocol, &opts.trajectory)?;
        let mut next_traj = moved.trajectory;
        let mut next_profile = profile.clone();
        let mut next = moved.throughput;
        let resolved = optimize_profile(scn, &next_traj, protocol, &opts.profile)?;
        if resolved.throughput > next {
            next_profile = resolved.profile;
            next = resolved.throughput;
        }
        debug!("{protocol} outer round {round}: {next} ({} trajectory rounds)", moved.iterations);
        if !(next > throughput) {
            termination = OuterTermination::NoImprovement;
            break;
        }
        let gain = next - throughput;
        std::mem::swap(&mut trajectory, &mut next_traj);
        profile = next_profile;
        throughput = next;
        trace.push(throughput);
        if gain <= opts.rel_tol * throughput.abs() {
            termination = OuterTermination::Converged;
            break;
        }
    }
    debug_assert!((throughput - throughput_raw(scn, &trajectory_geometry(scn, &trajectory), &profile, protocol)).abs()
        <= T::lit(1e-9) * T::one().max(throughput.abs()));
    info!("{protocol} alternating optimization from {init_name}: {throughput} after {} rounds", trace.len() - 1);
    Ok(RunRecord {
        strategy: Strategy::Optimal,
        protocol,
        init: init_name.to_string(),
        trace,
        profile,
        trajectory,
        throughput,
        elapsed: clock.elapsed(),
        termination,
        hover: None,
    })
}
