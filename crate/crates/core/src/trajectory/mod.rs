//! Trajectory for a fixed profile by successive convex approximation: each round
//! maximizes concave quadratic lower bounds of the slot rates over position
//! increments that keep every flight leg within reach.

mod bounds;

pub use bounds::{
    af_bound_coefficients, af_log_term, bound_coefficients, df_bound_coefficients, harvest_lower_bound,
    lower_bound_value, AfBoundCoefficients, AfSlotBound, BoundCoefficients, BoundTerm, BoundValue,
    DfBoundCoefficients, DfSlotBound,
};

use log::debug;

use crate::error::{Error, Result};
use crate::model::{
    residuals_raw, throughput_raw, trajectory_geometry, validate_trajectory, Profile, Protocol, Scenario, Trajectory,
    FEASIBILITY_TOL,
};
use crate::scalar::{add, Point, Scalar};
use crate::solver::{
    solve_concave_qcqp, BarrierOptions, DiskChainConstraintSet, SlotBudget, SlotObjective, SolverReport, Termination,
};

/// How the fixed profile's energy needs constrain the move.
///
/// Harvested energy depends on the distance to the source, so moving away can
/// leave the profile without enough stored energy. The budgets use a concave
/// lower bound on the harvest, so a satisfied budget implies true causality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyCoupling {
    /// Mobility constraints only.
    Ignore,
    /// Cumulative harvest covers cumulative spending after every slot.
    #[default]
    Cumulative,
    /// Each slot's harvest covers its own power.
    PerSlot,
}

/// One convex round: maximize the bound total over increments.
#[derive(Debug, Clone)]
pub struct IncrementalProblem<T> {
    pub protocol: Protocol,
    pub anchors: Trajectory<T>,
    pub coefficients: BoundCoefficients<T>,
    pub objective: Vec<SlotObjective<T>>,
    pub chain: DiskChainConstraintSet<T>,
    pub budgets: Vec<SlotBudget<T>>,
}

impl<T: Scalar> IncrementalProblem<T> {
    /// Bound total at the given increments.
    pub fn value(&self, increments: &[Point<T>]) -> T {
        lower_bound_value(&self.coefficients, increments).total
    }

    pub fn solve(&self, opts: &BarrierOptions<T>) -> Result<(Vec<Point<T>>, SolverReport<T>)> {
        solve_concave_qcqp(&self.objective, &self.chain, &self.budgets, opts)
    }

    pub fn apply(&self, increments: &[Point<T>]) -> Trajectory<T> {
        Trajectory::new(self.anchors.points.iter().zip(increments).map(|(&p, &d)| add(p, d)).collect())
    }
}

/// Builds the round anchored at `traj`. `trust_radius` caps each slot's move.
pub fn build_incremental_problem<T: Scalar>(
    scn: &Scenario<T>,
    traj: &Trajectory<T>,
    prof: &Profile<T>,
    protocol: Protocol,
    coupling: EnergyCoupling,
    trust_radius: Option<T>,
) -> Result<IncrementalProblem<T>> {
    traj.check_len(scn)?;
    prof.check_len(scn)?;
    let check = validate_trajectory(scn, traj);
    if !check.feasible {
        return Err(Error::InfeasibleTrajectory { violation: check.worst_violation.to_f64().unwrap_or(f64::NAN) });
    }
    let coefficients = bound_coefficients(scn, traj, prof, protocol);
    let objective = coefficients.slot_objectives();
    let chain = DiskChainConstraintSet {
        anchors: traj.points.clone(),
        start: scn.start(),
        end: scn.end(),
        radius: scn.max_step(),
        trust_radius,
    };
    let budgets = energy_budgets(scn, traj, prof, coupling);
    Ok(IncrementalProblem { protocol, anchors: traj.clone(), coefficients, objective, chain, budgets })
}

fn energy_budgets<T: Scalar>(
    scn: &Scenario<T>,
    traj: &Trajectory<T>,
    prof: &Profile<T>,
    coupling: EnergyCoupling,
) -> Vec<SlotBudget<T>> {
    let gains: Vec<_> =
        traj.points.iter().zip(&prof.rho).map(|(&pos, &rho)| harvest_lower_bound(scn, pos, rho)).collect();
    let moves = |i: usize| gains[i].curvature > T::zero();
    let mut out = Vec::new();
    match coupling {
        EnergyCoupling::Ignore => {}
        EnergyCoupling::PerSlot => {
            for (i, g) in gains.iter().enumerate() {
                if moves(i) && prof.power[i] > T::zero() {
                    out.push(SlotBudget { terms: vec![(i, *g)], spend: prof.power[i] });
                }
            }
        }
        EnergyCoupling::Cumulative => {
            let mut spend = T::zero();
            let mut fixed = T::zero();
            for i in 0..gains.len() {
                spend = spend + prof.power[i];
                if !moves(i) {
                    fixed = fixed + gains[i].constant;
                }
                let terms: Vec<_> = (0..=i).filter(|&k| moves(k)).map(|k| (k, gains[k])).collect();
                if !terms.is_empty() {
                    out.push(SlotBudget { terms, spend: spend - fixed });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct TrajectoryOptions<T> {
    pub max_iter: usize,
    /// Stop once the bound gains less than this fraction of the current throughput.
    pub rel_tol: T,
    pub abs_tol: T,
    /// Cap each slot's move at the step length `V`.
    pub trust_region: bool,
    pub coupling: EnergyCoupling,
    pub barrier: BarrierOptions<T>,
}

impl<T: Scalar> Default for TrajectoryOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 200,
            rel_tol: T::lit(1e-3),
            abs_tol: T::lit(1e-9),
            trust_region: true,
            coupling: EnergyCoupling::default(),
            barrier: BarrierOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryTermination {
    /// The bound improvement fell under the tolerance.
    Converged,
    /// The round's optimum did not raise the true throughput; the anchor is kept.
    NoAscent,
    /// The energy budgets leave no room to move.
    NoInterior,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct TrajectorySolution<T> {
    pub trajectory: Trajectory<T>,
    pub throughput: T,
    /// True throughput of the initial trajectory and of every accepted round.
    pub throughput_trace: Vec<T>,
    /// Optimal bound total of every round, preceded by the initial throughput.
    pub bound_trace: Vec<T>,
    pub iterations: usize,
    pub termination: TrajectoryTermination,
}

/// Successive convex approximation of the best trajectory for a fixed profile.
pub fn optimize_trajectory<T: Scalar>(
    scn: &Scenario<T>,
    prof: &Profile<T>,
    traj_init: &Trajectory<T>,
    protocol: Protocol,
    opts: &TrajectoryOptions<T>,
) -> Result<TrajectorySolution<T>> {
    traj_init.check_len(scn)?;
    prof.check_len(scn)?;
    let check = validate_trajectory(scn, traj_init);
    if !check.feasible {
        return Err(Error::InfeasibleTrajectory { violation: check.worst_violation.to_f64().unwrap_or(f64::NAN) });
    }
    check_energy(scn, traj_init, prof, opts.coupling)?;

    let trust = opts.trust_region.then(|| scn.max_step());
    let mut traj = traj_init.clone();
    let mut current = throughput_raw(scn, &trajectory_geometry(scn, &traj), prof, protocol);
    let mut throughput_trace = vec![current];
    let mut bound_trace = vec![current];
    let mut termination = TrajectoryTermination::IterationLimit;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let problem = build_incremental_problem(scn, &traj, prof, protocol, opts.coupling, trust)?;
        if problem.objective.iter().all(|o| o.pieces.iter().all(|p| p.curvature == T::zero())) {
            // the rates do not depend on the position at all
            termination = TrajectoryTermination::Converged;
            break;
        }
        let (inc, report) = problem.solve(&opts.barrier)?;
        if report.termination == Termination::NoStrictInterior {
            termination = TrajectoryTermination::NoInterior;
            break;
        }
        let bound = report.objective;
        let next = problem.apply(&inc);
        let next_value = throughput_raw(scn, &trajectory_geometry(scn, &next), prof, protocol);
        let feasible = validate_trajectory(scn, &next).feasible && check_energy(scn, &next, prof, opts.coupling).is_ok();
        debug!("{protocol} trajectory round {iterations}: bound {bound}, throughput {next_value}");
        bound_trace.push(bound);
        if !feasible || !(next_value > current) {
            termination = TrajectoryTermination::NoAscent;
            break;
        }
        let gain = bound - current;
        traj = next;
        current = next_value;
        throughput_trace.push(current);
        if gain <= opts.abs_tol.max(opts.rel_tol * current.abs()) {
            termination = TrajectoryTermination::Converged;
            break;
        }
    }
    Ok(TrajectorySolution { trajectory: traj, throughput: current, throughput_trace, bound_trace, iterations, termination })
}

fn check_energy<T: Scalar>(
    scn: &Scenario<T>,
    traj: &Trajectory<T>,
    prof: &Profile<T>,
    coupling: EnergyCoupling,
) -> Result<()> {
    let geo = trajectory_geometry(scn, traj);
    let tol = T::lit(FEASIBILITY_TOL);
    let worst = match coupling {
        EnergyCoupling::Ignore => return Ok(()),
        EnergyCoupling::Cumulative => residuals_raw(scn, &geo, prof).into_iter().fold(T::infinity(), T::min),
        EnergyCoupling::PerSlot => geo
            .iter()
            .enumerate()
            .map(|(i, g)| crate::model::harvested_raw(scn, g, prof.rho[i]) - prof.power[i])
            .fold(T::infinity(), T::min),
    };
    if worst < -tol {
        return Err(Error::InfeasibleProfile { residual: worst.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(())
}
