//! Concave quadratic maximization over chained disks, the shape of every
//! incremental trajectory problem.
//!
//! Decision variables are per-slot planar increments `d_n`. Each slot contributes
//! the minimum of one or more isotropic concave quadratics in `d_n`; slots with
//! more than one piece are handled through an epigraph variable.

use super::barrier::{self, BarrierOptions, ConvexQcqp, SolverReport, SparseQuadratic};
use crate::error::{Error, Result};
use crate::model::FEASIBILITY_TOL;
use crate::scalar::{add, norm2, sub, Point, Scalar};

/// `constant - curvature * |d|^2 - linear . d` with `curvature >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcaveQuadratic<T> {
    pub constant: T,
    pub curvature: T,
    pub linear: Point<T>,
}

impl<T: Scalar> ConcaveQuadratic<T> {
    pub fn flat(constant: T) -> Self {
        Self { constant, curvature: T::zero(), linear: [T::zero(), T::zero()] }
    }

    pub fn eval(&self, d: Point<T>) -> T {
        self.constant - self.curvature * norm2(d) - self.linear[0] * d[0] - self.linear[1] * d[1]
    }

    /// Adds `scale * (-self)` (a convex quadratic) over variables `(ix, ix + 1)`.
    fn add_negated(&self, q: &mut SparseQuadratic<T>, ix: usize, scale: T) {
        let two = T::lit(2.0);
        if self.curvature != T::zero() {
            q.add_quad(ix, ix, scale * two * self.curvature);
            q.add_quad(ix + 1, ix + 1, scale * two * self.curvature);
        }
        if self.linear[0] != T::zero() {
            q.add_lin(ix, scale * self.linear[0]);
        }
        if self.linear[1] != T::zero() {
            q.add_lin(ix + 1, scale * self.linear[1]);
        }
        q.constant = q.constant - scale * self.constant;
    }
}

/// Objective contribution of one slot: the minimum of its pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotObjective<T> {
    pub pieces: Vec<ConcaveQuadratic<T>>,
}

impl<T: Scalar> SlotObjective<T> {
    pub fn single(piece: ConcaveQuadratic<T>) -> Self {
        Self { pieces: vec![piece] }
    }

    pub fn eval(&self, d: Point<T>) -> T {
        self.pieces.iter().map(|p| p.eval(d)).fold(T::infinity(), T::min)
    }
}

/// Step constraints of a flight anchored at `anchors`:
/// `|anchor_1 + d_1 - start| <= V`, `|(anchor_{n+1} + d_{n+1}) - (anchor_n + d_n)| <= V`,
/// `|end - anchor_N - d_N| <= V`, plus an optional per-slot trust radius `|d_n| <= R`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskChainConstraintSet<T> {
    pub anchors: Vec<Point<T>>,
    pub start: Point<T>,
    pub end: Point<T>,
    pub radius: T,
    pub trust_radius: Option<T>,
}

impl<T: Scalar> DiskChainConstraintSet<T> {
    /// Values `|leg|^2 - V^2` (and `|d|^2 - R^2`) at the given increments; feasible when all `<= 0`.
    pub fn constraint_values(&self, inc: &[Point<T>]) -> Vec<T> {
        let v2 = self.radius * self.radius;
        let pos: Vec<Point<T>> = self.anchors.iter().zip(inc).map(|(&a, &d)| add(a, d)).collect();
        let mut out = Vec::with_capacity(2 * pos.len() + 1);
        if let (Some(&first), Some(&last)) = (pos.first(), pos.last()) {
            out.push(norm2(sub(first, self.start)) - v2);
            for w in pos.windows(2) {
                out.push(norm2(sub(w[1], w[0])) - v2);
            }
            out.push(norm2(sub(self.end, last)) - v2);
        }
        if let Some(r) = self.trust_radius {
            out.extend(inc.iter().map(|&d| norm2(d) - r * r));
        }
        out
    }

    pub fn max_violation(&self, inc: &[Point<T>]) -> T {
        self.constraint_values(inc).into_iter().fold(T::zero(), T::max)
    }

    fn push_constraints(&self, out: &mut Vec<SparseQuadratic<T>>) {
        let n = self.anchors.len();
        let v2 = self.radius * self.radius;
        let two = T::lit(2.0);
        // |offset + d_a - d_b|^2 - r2
        let leg = |offset: Point<T>, a: Option<usize>, b: Option<usize>, r2: T| {
            let mut q = SparseQuadratic::new();
            for k in 0..2 {
                if let Some(a) = a {
                    q.add_quad(2 * a + k, 2 * a + k, two);
                    q.add_lin(2 * a + k, two * offset[k]);
                }
                if let Some(b) = b {
                    q.add_quad(2 * b + k, 2 * b + k, two);
                    q.add_lin(2 * b + k, -two * offset[k]);
                }
                if let (Some(a), Some(b)) = (a, b) {
                    q.add_quad(2 * a + k, 2 * b + k, -two);
                }
            }
            q.constant = norm2(offset) - r2;
            q
        };
        if n == 0 {
            return;
        }
        out.push(leg(sub(self.anchors[0], self.start), Some(0), None, v2));
        for i in 0..n - 1 {
            out.push(leg(sub(self.anchors[i + 1], self.anchors[i]), Some(i + 1), Some(i), v2));
        }
        out.push(leg(sub(self.anchors[n - 1], self.end), Some(n - 1), None, v2));
        if let Some(r) = self.trust_radius {
            for i in 0..n {
                out.push(leg([T::zero(), T::zero()], Some(i), None, r * r));
            }
        }
    }
}

/// Requires `sum over terms of gain_i(d_i) >= spend`, each gain concave.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotBudget<T> {
    pub terms: Vec<(usize, ConcaveQuadratic<T>)>,
    pub spend: T,
}

impl<T: Scalar> SlotBudget<T> {
    /// `gain - spend`; non-negative when satisfied.
    pub fn margin(&self, inc: &[Point<T>]) -> T {
        self.terms.iter().map(|(i, g)| g.eval(inc[*i])).sum::<T>() - self.spend
    }

    fn to_constraint(&self) -> SparseQuadratic<T> {
        let mut q = SparseQuadratic::constant(self.spend);
        for (i, g) in &self.terms {
            g.add_negated(&mut q, 2 * i, T::one());
        }
        q
    }
}

/// Maximizes `sum_n objective[n](d_n)` over increments satisfying the disk chain
/// and every budget. The zero increment must be feasible.
///
/// Returns the increments and a report whose `objective` is the attained maximum.
pub fn solve_concave_qcqp<T: Scalar>(
    objective: &[SlotObjective<T>],
    chain: &DiskChainConstraintSet<T>,
    budgets: &[SlotBudget<T>],
    opts: &BarrierOptions<T>,
) -> Result<(Vec<Point<T>>, SolverReport<T>)> {
    let n = chain.anchors.len();
    if objective.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: objective.len() });
    }
    let zero = vec![[T::zero(), T::zero()]; n];
    let tol = T::lit(FEASIBILITY_TOL);
    let chain_violation = chain.max_violation(&zero);
    if chain_violation > tol {
        return Err(Error::InfeasibleTrajectory { violation: chain_violation.to_f64().unwrap_or(f64::NAN) });
    }
    for b in budgets {
        let margin = b.margin(&zero);
        if margin < -tol {
            return Err(Error::InfeasibleProfile { residual: margin.to_f64().unwrap_or(f64::NAN) });
        }
    }

    let mut epigraph = vec![None; n];
    let mut dim = 2 * n;
    for (slot, obj) in objective.iter().enumerate() {
        if obj.pieces.is_empty() {
            return Err(Error::Domain(format!("slot {slot} has an empty objective")));
        }
        if obj.pieces.len() > 1 {
            epigraph[slot] = Some(dim);
            dim += 1;
        }
    }

    let mut f0 = SparseQuadratic::new();
    let mut constraints = Vec::new();
    for (slot, obj) in objective.iter().enumerate() {
        match epigraph[slot] {
            None => obj.pieces[0].add_negated(&mut f0, 2 * slot, T::one()),
            Some(t) => {
                f0.add_lin(t, -T::one());
                for piece in &obj.pieces {
                    // t - piece(d) <= 0
                    let mut q = SparseQuadratic::new();
                    q.add_lin(t, T::one());
                    piece.add_negated(&mut q, 2 * slot, T::one());
                    constraints.push(q);
                }
            }
        }
    }
    chain.push_constraints(&mut constraints);
    constraints.extend(budgets.iter().map(SlotBudget::to_constraint));

    let mut x0 = vec![T::zero(); dim];
    for (slot, obj) in objective.iter().enumerate() {
        if let Some(t) = epigraph[slot] {
            x0[t] = obj.eval([T::zero(), T::zero()]) - T::one();
        }
    }

    let prog = ConvexQcqp { dim, objective: f0, constraints };
    let (x, mut report) = barrier::minimize(&prog, &x0, opts)?;
    let inc: Vec<Point<T>> = (0..n).map(|i| [x[2 * i], x[2 * i + 1]]).collect();
    report.objective = objective.iter().zip(&inc).map(|(o, &d)| o.eval(d)).sum();
    report.central_path.iter_mut().for_each(|v| *v = -*v);
    let budget_violation = budgets
        .iter()
        .map(|b| -b.margin(&inc))
        .fold(T::zero(), T::max);
    report.max_violation = chain.max_violation(&inc).max(budget_violation);
    Ok((inc, report))
}
