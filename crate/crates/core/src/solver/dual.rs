//! Minimization of a convex dual function over a box, given an oracle that
//! returns the dual value and one subgradient.

use log::trace;

use crate::scalar::Scalar;

/// What the inner solver reports for one dual point.
#[derive(Debug, Clone)]
pub struct DualEvaluation<T> {
    pub value: T,
    pub subgradient: Vec<T>,
    /// Objective of a primal-feasible point recovered at this dual point, if any.
    /// Enables the duality-gap stopping rule.
    pub primal_value: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualMethod<T> {
    /// Projected subgradient steps `x <- P(x - s0 / sqrt(k) * g)`.
    Subgradient { step0: T },
    /// Central-cut ellipsoid method started from a ball of the given radius.
    Ellipsoid { radius: T },
}

#[derive(Debug, Clone, Copy)]
pub struct DualOptions<T> {
    pub method: DualMethod<T>,
    pub tol: T,
    pub max_iter: usize,
    /// Iterations over which the running best must improve by more than `tol`.
    pub window: usize,
}

impl<T: Scalar> Default for DualOptions<T> {
    fn default() -> Self {
        Self {
            method: DualMethod::Subgradient { step0: T::one() },
            tol: T::lit(1e-6),
            max_iter: 5000,
            window: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualTermination {
    /// The projected subgradient vanished: the point is optimal.
    ZeroSubgradient,
    /// Best dual value and best recovered primal value agree within tolerance.
    GapClosed,
    /// The running best stopped improving (subgradient) or the ellipsoid bound closed.
    Converged,
    /// Iteration cap hit; the best iterate is returned.
    IterationCap,
}

#[derive(Debug, Clone)]
pub struct DualReport<T> {
    pub best_value: T,
    pub best_primal: Option<T>,
    pub iterations: usize,
    pub termination: DualTermination,
    /// Running best dual value after each evaluation (non-increasing).
    pub best_trace: Vec<T>,
}

impl<T: Scalar> DualReport<T> {
    pub fn hit_cap(&self) -> bool {
        self.termination == DualTermination::IterationCap
    }
}

/// Minimizes the dual function over `lower <= x <= upper` starting from `x0`.
/// Upper bounds may be `T::infinity()`.
pub fn dual_ascent<T, F>(
    mut evaluate: F,
    x0: Vec<T>,
    lower: &[T],
    upper: &[T],
    opts: &DualOptions<T>,
) -> (Vec<T>, DualReport<T>)
where
    T: Scalar,
    F: FnMut(&[T]) -> DualEvaluation<T>,
{
    let x0 = project(x0, lower, upper);
    match opts.method {
        DualMethod::Subgradient { step0 } => subgradient(&mut evaluate, x0, lower, upper, step0, opts),
        DualMethod::Ellipsoid { radius } => ellipsoid(&mut evaluate, x0, lower, upper, radius, opts),
    }
}

fn project<T: Scalar>(mut x: Vec<T>, lower: &[T], upper: &[T]) -> Vec<T> {
    for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.max(lo).min(hi);
    }
    x
}

struct Tracker<T> {
    best_x: Vec<T>,
    best_value: T,
    best_primal: Option<T>,
    trace: Vec<T>,
}

impl<T: Scalar> Tracker<T> {
    fn new(x: &[T]) -> Self {
        Self { best_x: x.to_vec(), best_value: T::infinity(), best_primal: None, trace: Vec::new() }
    }

    fn record(&mut self, x: &[T], ev: &DualEvaluation<T>) {
        if ev.value < self.best_value {
            self.best_value = ev.value;
            self.best_x = x.to_vec();
        }
        if let Some(p) = ev.primal_value {
            self.best_primal = Some(self.best_primal.map_or(p, |b| b.max(p)));
        }
        self.trace.push(self.best_value);
    }

    fn gap_closed(&self, tol: T) -> bool {
        match self.best_primal {
            Some(p) => self.best_value - p <= tol * T::one().max(self.best_value.abs()),
            None => false,
        }
    }

    fn stalled(&self, window: usize, tol: T) -> bool {
        let k = self.trace.len();
        k > window && self.trace[k - 1 - window] - self.trace[k - 1] < tol
    }

    fn finish(self, iterations: usize, termination: DualTermination) -> (Vec<T>, DualReport<T>) {
        let report = DualReport {
            best_value: self.best_value,
            best_primal: self.best_primal,
            iterations,
            termination,
            best_trace: self.trace,
        };
        (self.best_x, report)
    }
}

fn subgradient<T, F>(
    evaluate: &mut F,
    mut x: Vec<T>,
    lower: &[T],
    upper: &[T],
    step0: T,
    opts: &DualOptions<T>,
) -> (Vec<T>, DualReport<T>)
where
    T: Scalar,
    F: FnMut(&[T]) -> DualEvaluation<T>,
{
    let mut track = Tracker::new(&x);
    for k in 1..=opts.max_iter {
        let ev = evaluate(&x);
        track.record(&x, &ev);
        if track.gap_closed(opts.tol) {
            return track.finish(k, DualTermination::GapClosed);
        }
        let step = step0 / T::of_usize(k).sqrt();
        let next = project(
            x.iter().zip(&ev.subgradient).map(|(&xi, &gi)| xi - step * gi).collect(),
            lower,
            upper,
        );
        if next == x {
            return track.finish(k, DualTermination::ZeroSubgradient);
        }
        if track.stalled(opts.window, opts.tol) {
            return track.finish(k, DualTermination::Converged);
        }
        x = next;
    }
    trace!("subgradient dual ascent hit the cap, best {}", track.best_value);
    track.finish(opts.max_iter, DualTermination::IterationCap)
}

fn ellipsoid<T, F>(
    evaluate: &mut F,
    mut x: Vec<T>,
    lower: &[T],
    upper: &[T],
    radius: T,
    opts: &DualOptions<T>,
) -> (Vec<T>, DualReport<T>)
where
    T: Scalar,
    F: FnMut(&[T]) -> DualEvaluation<T>,
{
    let n = x.len();
    let mut shape = vec![T::zero(); n * n];
    for i in 0..n {
        shape[i * n + i] = radius * radius;
    }
    let mut track = Tracker::new(&x);
    let mut evaluations = 0;
    let nf = T::of_usize(n);
    for _ in 0..opts.max_iter {
        // Feasibility cut when the center has left the box.
        let mut cut = vec![T::zero(); n];
        let mut objective_cut = true;
        if let Some(i) = (0..n).find(|&i| x[i] < lower[i]) {
            cut[i] = -T::one();
            objective_cut = false;
        } else if let Some(i) = (0..n).find(|&i| x[i] > upper[i]) {
            cut[i] = T::one();
            objective_cut = false;
        }
        if objective_cut {
            evaluations += 1;
            let ev = evaluate(&x);
            track.record(&x, &ev);
            if track.gap_closed(opts.tol) {
                return track.finish(evaluations, DualTermination::GapClosed);
            }
            if ev.subgradient.iter().all(|&g| g == T::zero()) {
                return track.finish(evaluations, DualTermination::ZeroSubgradient);
            }
            cut = ev.subgradient;
        }
        let pg: Vec<T> = (0..n)
            .map(|i| (0..n).map(|j| shape[i * n + j] * cut[j]).sum())
            .collect();
        let gpg: T = cut.iter().zip(&pg).map(|(&a, &b)| a * b).sum();
        if !(gpg > T::zero()) {
            return track.finish(evaluations, DualTermination::Converged);
        }
        let root = gpg.sqrt();
        if objective_cut && root < opts.tol {
            return track.finish(evaluations, DualTermination::Converged);
        }
        let b: Vec<T> = pg.iter().map(|&v| v / root).collect();
        if n == 1 {
            x[0] = x[0] - b[0] / T::lit(2.0);
            shape[0] = shape[0] / T::lit(4.0);
            continue;
        }
        for i in 0..n {
            x[i] = x[i] - b[i] / (nf + T::one());
        }
        let scale = nf * nf / (nf * nf - T::one());
        let shrink = T::lit(2.0) / (nf + T::one());
        for i in 0..n {
            for j in 0..n {
                shape[i * n + j] = scale * (shape[i * n + j] - shrink * b[i] * b[j]);
            }
        }
    }
    track.finish(evaluations, DualTermination::IterationCap)
}
