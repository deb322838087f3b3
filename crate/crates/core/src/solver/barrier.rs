//! Logarithmic-barrier interior-point method for convex quadratically constrained
//! programs with sparse data.

use log::trace;

use super::linalg::{cholesky_solve, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `0.5 z' P z + q' z + c`. Off-diagonal entries of `P` are stored once with `i < j`.
#[derive(Debug, Clone, Default)]
pub struct SparseQuadratic<T> {
    quad: Vec<(usize, usize, T)>,
    lin: Vec<(usize, T)>,
    pub constant: T,
    support: Vec<usize>,
}

impl<T: Scalar> SparseQuadratic<T> {
    pub fn new() -> Self {
        Self { quad: Vec::new(), lin: Vec::new(), constant: T::zero(), support: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self { constant: c, ..Self::new() }
    }

    /// Adds `v` to `P[i][j]` and `P[j][i]` (once when `i == j`).
    pub fn add_quad(&mut self, i: usize, j: usize, v: T) -> &mut Self {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        match self.quad.iter_mut().find(|e| e.0 == i && e.1 == j) {
            Some(e) => e.2 = e.2 + v,
            None => self.quad.push((i, j, v)),
        }
        self.touch(i);
        self.touch(j);
        self
    }

    pub fn add_lin(&mut self, i: usize, v: T) -> &mut Self {
        match self.lin.iter_mut().find(|e| e.0 == i) {
            Some(e) => e.1 = e.1 + v,
            None => self.lin.push((i, v)),
        }
        self.touch(i);
        self
    }

    fn touch(&mut self, i: usize) {
        if let Err(pos) = self.support.binary_search(&i) {
            self.support.insert(pos, i);
        }
    }

    pub fn is_constant(&self) -> bool {
        self.quad.iter().all(|e| e.2 == T::zero()) && self.lin.iter().all(|e| e.1 == T::zero())
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn value(&self, z: &[T]) -> T {
        let half = T::lit(0.5);
        let mut v = self.constant;
        for &(i, j, p) in &self.quad {
            v = v + if i == j { half * p * z[i] * z[i] } else { p * z[i] * z[j] };
        }
        for &(i, q) in &self.lin {
            v = v + q * z[i];
        }
        v
    }

    /// Adds the gradient at `z` into `grad` (dense).
    pub fn add_gradient(&self, z: &[T], scale: T, grad: &mut [T]) {
        for &(i, j, p) in &self.quad {
            if i == j {
                grad[i] = grad[i] + scale * p * z[i];
            } else {
                grad[i] = grad[i] + scale * p * z[j];
                grad[j] = grad[j] + scale * p * z[i];
            }
        }
        for &(i, q) in &self.lin {
            grad[i] = grad[i] + scale * q;
        }
    }

    fn add_hessian(&self, scale: T, h: &mut DenseMatrix<T>) {
        for &(i, j, p) in &self.quad {
            h.add(i, j, scale * p);
            if i != j {
                h.add(j, i, scale * p);
            }
        }
    }

    /// Same form over a problem with one extra trailing variable `s`, as `self - s`.
    fn minus_slack(&self, slack: usize) -> Self {
        let mut out = self.clone();
        out.add_lin(slack, -T::one());
        out
    }
}

/// `minimize f0(z)  s.t.  f_k(z) <= 0` with every `f` a convex quadratic.
#[derive(Debug, Clone)]
pub struct ConvexQcqp<T> {
    pub dim: usize,
    pub objective: SparseQuadratic<T>,
    pub constraints: Vec<SparseQuadratic<T>>,
}

#[derive(Debug, Clone, Copy)]
pub struct BarrierOptions<T> {
    pub t0: T,
    pub growth: T,
    /// Stop a centering step when half the squared Newton decrement drops below this.
    pub newton_tol: T,
    /// Stop when the duality-gap bound `m / t` drops below this.
    pub gap_tol: T,
    pub max_newton: usize,
    pub max_outer: usize,
}

impl<T: Scalar> Default for BarrierOptions<T> {
    fn default() -> Self {
        Self {
            t0: T::one(),
            growth: T::lit(10.0),
            newton_tol: T::lit(1e-9),
            gap_tol: T::lit(1e-8),
            max_newton: 100,
            max_outer: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gap bound reached the tolerance.
    Converged,
    /// The feasible set has no strict interior; the start point is returned unchanged.
    NoStrictInterior,
}

#[derive(Debug, Clone)]
pub struct SolverReport<T> {
    /// Objective of the returned point, in the sense of the caller (see the wrapper).
    pub objective: T,
    pub newton_iterations: usize,
    pub outer_iterations: usize,
    pub max_violation: T,
    pub termination: Termination,
    pub used_phase_one: bool,
    /// Objective `f0` after each centering step.
    pub central_path: Vec<T>,
}

/// Minimizes the program from `x0`, running a phase-I search when `x0` is not
/// strictly feasible.
pub fn minimize<T: Scalar>(
    prog: &ConvexQcqp<T>,
    x0: &[T],
    opts: &BarrierOptions<T>,
) -> Result<(Vec<T>, SolverReport<T>)> {
    let mut active = Vec::with_capacity(prog.constraints.len());
    for c in &prog.constraints {
        if c.is_constant() {
            if c.constant > T::zero() {
                return Err(Error::Numerical {
                    stage: "qcqp",
                    detail: format!("constant constraint {} > 0 is infeasible", c.constant),
                });
            }
        } else {
            active.push(c.clone());
        }
    }
    let prog = ConvexQcqp { dim: prog.dim, objective: prog.objective.clone(), constraints: active };

    let worst = prog.constraints.iter().map(|c| c.value(x0)).fold(T::neg_infinity(), T::max);
    let mut used_phase_one = false;
    let start = if worst < T::zero() {
        x0.to_vec()
    } else {
        used_phase_one = true;
        match phase_one(&prog, x0, opts)? {
            Some(x) => x,
            None => {
                let report = SolverReport {
                    objective: prog.objective.value(x0),
                    newton_iterations: 0,
                    outer_iterations: 0,
                    max_violation: worst.max(T::zero()),
                    termination: Termination::NoStrictInterior,
                    used_phase_one,
                    central_path: Vec::new(),
                };
                return Ok((x0.to_vec(), report));
            }
        }
    };
    let (x, mut report) = barrier(&prog, start, opts)?;
    report.used_phase_one = used_phase_one;
    Ok((x, report))
}

/// Finds a strictly feasible point by minimizing a common slack `s` with
/// `f_k(z) <= s`. A small proximal term keeps variables absent from the violated
/// constraints bounded.
fn phase_one<T: Scalar>(
    prog: &ConvexQcqp<T>,
    x0: &[T],
    opts: &BarrierOptions<T>,
) -> Result<Option<Vec<T>>> {
    let n = prog.dim;
    let slack = n;
    let prox = T::lit(1e-6);
    let mut objective = SparseQuadratic::new();
    objective.add_lin(slack, T::one());
    for (i, &xi) in x0.iter().enumerate() {
        objective.add_quad(i, i, prox);
        objective.add_lin(i, -prox * xi);
    }
    let constraints = prog.constraints.iter().map(|c| c.minus_slack(slack)).collect();
    let aug = ConvexQcqp { dim: n + 1, objective, constraints };

    let worst = prog.constraints.iter().map(|c| c.value(x0)).fold(T::neg_infinity(), T::max);
    let mut z = x0.to_vec();
    z.push(worst + T::one() + worst.abs());
    let phase_opts = BarrierOptions { gap_tol: T::lit(1e-7), ..*opts };
    let (z, _) = barrier(&aug, z, &phase_opts)?;
    let x = z[..n].to_vec();
    let achieved = prog.constraints.iter().map(|c| c.value(&x)).fold(T::neg_infinity(), T::max);
    trace!("phase one reached max constraint value {achieved}");
    if achieved < -T::lit(1e-12) {
        Ok(Some(x))
    } else {
        Ok(None)
    }
}

fn barrier<T: Scalar>(
    prog: &ConvexQcqp<T>,
    mut x: Vec<T>,
    opts: &BarrierOptions<T>,
) -> Result<(Vec<T>, SolverReport<T>)> {
    let n = prog.dim;
    let m = T::of_usize(prog.constraints.len().max(1));
    let mut t = opts.t0;
    let mut hess = DenseMatrix::zeros(n);
    let mut grad = vec![T::zero(); n];
    let mut cgrad = vec![T::zero(); n];
    let mut newton_total = 0;
    let mut outer = 0;
    let mut central_path = Vec::new();

    let phi = |x: &[T], t: T| -> Option<T> {
        let mut v = t * prog.objective.value(x);
        for c in &prog.constraints {
            let g = c.value(x);
            if !(g < T::zero()) {
                return None;
            }
            v = v - (-g).ln();
        }
        Some(v)
    };

    loop {
        outer += 1;
        for _ in 0..opts.max_newton {
            newton_total += 1;
            hess.fill_zero();
            grad.iter_mut().for_each(|g| *g = T::zero());
            prog.objective.add_gradient(&x, t, &mut grad);
            prog.objective.add_hessian(t, &mut hess);
            for c in &prog.constraints {
                let g = c.value(&x);
                let inv = -T::one() / g;
                for &i in c.support() {
                    cgrad[i] = T::zero();
                }
                c.add_gradient(&x, T::one(), &mut cgrad);
                for &i in c.support() {
                    grad[i] = grad[i] + inv * cgrad[i];
                }
                c.add_hessian(inv, &mut hess);
                let inv2 = inv * inv;
                for &i in c.support() {
                    for &j in c.support() {
                        hess.add(i, j, inv2 * cgrad[i] * cgrad[j]);
                    }
                }
            }
            let rhs: Vec<T> = grad.iter().map(|&g| -g).collect();
            let dx = solve_regularized(&hess, &rhs)?;
            let dec2 = -grad.iter().zip(&dx).map(|(&g, &d)| g * d).sum::<T>();
            if dec2 * T::lit(0.5) <= opts.newton_tol {
                break;
            }
            let f0 = phi(&x, t).ok_or_else(|| Error::Numerical {
                stage: "qcqp",
                detail: "iterate left the strict interior".into(),
            })?;
            let slope = -dec2;
            let mut step = T::one();
            let mut accepted = false;
            for _ in 0..80 {
                let trial: Vec<T> = x.iter().zip(&dx).map(|(&a, &d)| a + step * d).collect();
                if let Some(f1) = phi(&trial, t) {
                    if f1 <= f0 + T::lit(0.25) * step * slope {
                        x = trial;
                        accepted = true;
                        break;
                    }
                }
                step = step * T::lit(0.5);
            }
            if !accepted {
                // Decrement is at round-off level relative to the barrier value.
                break;
            }
        }
        central_path.push(prog.objective.value(&x));
        if m / t < opts.gap_tol || outer >= opts.max_outer {
            break;
        }
        t = t * opts.growth;
    }

    let max_violation = prog
        .constraints
        .iter()
        .map(|c| c.value(&x))
        .fold(T::zero(), T::max);
    let report = SolverReport {
        objective: prog.objective.value(&x),
        newton_iterations: newton_total,
        outer_iterations: outer,
        max_violation,
        termination: Termination::Converged,
        used_phase_one: false,
        central_path,
    };
    Ok((x, report))
}

fn solve_regularized<T: Scalar>(h: &DenseMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    if let Some(x) = cholesky_solve(h, T::zero(), rhs) {
        return Ok(x);
    }
    let scale = T::one() + h.max_abs_diag();
    let mut shift = T::lit(1e-14) * scale;
    for _ in 0..6 {
        if let Some(x) = cholesky_solve(h, shift, rhs) {
            return Ok(x);
        }
        shift = shift * T::lit(100.0);
    }
    Err(Error::Numerical {
        stage: "qcqp",
        detail: format!("barrier Hessian is singular (diagonal scale {scale})"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(cx: f64, cy: f64, r: f64) -> SparseQuadratic<f64> {
        // (x - cx)^2 + (y - cy)^2 - r^2
        let mut q = SparseQuadratic::new();
        q.add_quad(0, 0, 2.0).add_quad(1, 1, 2.0);
        q.add_lin(0, -2.0 * cx).add_lin(1, -2.0 * cy);
        q.constant = cx * cx + cy * cy - r * r;
        q
    }

    #[test]
    fn linear_objective_over_disk() {
        // minimize x over the unit disk -> (-1, 0)
        let mut obj = SparseQuadratic::new();
        obj.add_lin(0, 1.0);
        let prog = ConvexQcqp { dim: 2, objective: obj, constraints: vec![disk(0.0, 0.0, 1.0)] };
        let (x, rep) = minimize(&prog, &[0.0, 0.0], &BarrierOptions::default()).unwrap();
        assert!((x[0] + 1.0).abs() < 1e-6 && x[1].abs() < 1e-6);
        assert_eq!(rep.termination, Termination::Converged);
        assert!(!rep.used_phase_one);
    }

    #[test]
    fn phase_one_from_boundary_point() {
        // start on the boundary of the intersection of two disks
        let mut obj = SparseQuadratic::new();
        obj.add_lin(1, -1.0);
        let prog = ConvexQcqp {
            dim: 2,
            objective: obj,
            constraints: vec![disk(0.0, 0.0, 1.0), disk(1.0, 0.0, 1.0)],
        };
        let (x, rep) = minimize(&prog, &[1.0, 0.0], &BarrierOptions::default()).unwrap();
        assert!(rep.used_phase_one);
        assert!((x[0] - 0.5).abs() < 1e-5);
        assert!((x[1] - 0.75f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn empty_interior_is_reported() {
        // two disks touching at a single point
        let prog = ConvexQcqp {
            dim: 2,
            objective: SparseQuadratic::new(),
            constraints: vec![disk(-1.0, 0.0, 1.0), disk(1.0, 0.0, 1.0)],
        };
        let (x, rep) = minimize(&prog, &[0.0, 0.0], &BarrierOptions::default()).unwrap();
        assert_eq!(rep.termination, Termination::NoStrictInterior);
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn constant_constraints() {
        let ok = ConvexQcqp {
            dim: 1,
            objective: SparseQuadratic::new(),
            constraints: vec![SparseQuadratic::constant(0.0)],
        };
        assert!(minimize(&ok, &[0.0], &BarrierOptions::default()).is_ok());
        let bad = ConvexQcqp { constraints: vec![SparseQuadratic::constant(1.0)], ..ok };
        assert!(minimize(&bad, &[0.0], &BarrierOptions::default()).is_err());
    }
}
