use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Debug, Clone)]
pub(crate) struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|v| *v = T::zero());
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = self.data[i * self.n + j] + v;
    }

    pub fn max_abs_diag(&self) -> T {
        (0..self.n).map(|i| self.get(i, i).abs()).fold(T::zero(), T::max)
    }
}

/// Solves `A x = b` for symmetric positive definite `A`. Adds `shift` to the diagonal.
/// Returns `None` when the factorization breaks down.
pub(crate) fn cholesky_solve<T: Scalar>(a: &DenseMatrix<T>, shift: T, b: &[T]) -> Option<Vec<T>> {
    let n = a.dim();
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let mut d = a.get(j, j) + shift;
        for k in 0..j {
            d = d - l[j * n + k] * l[j * n + k];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s = s - l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        let mut a = DenseMatrix::<f64>::zeros(3);
        let vals = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                a.add(i, j, vals[i][j]);
            }
        }
        let x_true = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3).map(|i| (0..3).map(|j| vals[i][j] * x_true[j]).sum()).collect();
        let x = cholesky_solve(&a, 0.0, &b).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_fails() {
        let mut a = DenseMatrix::<f64>::zeros(2);
        a.add(0, 0, 1.0);
        a.add(1, 1, -1.0);
        assert!(cholesky_solve(&a, 0.0, &[1.0, 1.0]).is_none());
    }
}
