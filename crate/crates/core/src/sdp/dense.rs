//! Small dense kernels for the interior-point solver.

use nalgebra::DMatrix;

use super::problem::svec_len;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Symmetric matrix from its `svec`.
pub(crate) fn mat(n: usize, v: &[f64]) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), svec_len(n));
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for c in 0..n {
        m[(c, c)] = v[k];
        k += 1;
        for r in c + 1..n {
            let x = v[k] / SQRT2;
            m[(r, c)] = x;
            m[(c, r)] = x;
            k += 1;
        }
    }
    m
}

/// `svec` of the symmetric part of `m`, written into `out`.
pub(crate) fn svec_into(m: &DMatrix<f64>, out: &mut [f64]) {
    let n = m.nrows();
    let mut k = 0;
    for c in 0..n {
        out[k] = m[(c, c)];
        k += 1;
        for r in c + 1..n {
            out[k] = (m[(r, c)] + m[(c, r)]) / SQRT2;
            k += 1;
        }
    }
}

/// Cholesky factor with small pivots replaced by a huge value, so that the
/// corresponding direction is effectively frozen instead of amplified.
pub(crate) struct GuardedCholesky {
    n: usize,
    l: Vec<f64>,
}

impl GuardedCholesky {
    pub(crate) fn new(a: &DMatrix<f64>, rel_pivot: f64) -> Self {
        let n = a.nrows();
        let max_diag = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                l[i * n + j] = a[(i, j)];
            }
        }
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > rel_pivot * max_diag) {
                d = 1e128;
            }
            let dj = d.sqrt();
            l[j * n + j] = dj;
            let (head, tail) = l.split_at_mut((j + 1) * n);
            let row_j = &head[j * n..j * n + j];
            for i in j + 1..n {
                let row_i = &mut tail[(i - j - 1) * n..(i - j) * n];
                let mut s = row_i[j];
                for k in 0..j {
                    s -= row_i[k] * row_j[k];
                }
                row_i[j] = s / dj;
            }
        }
        GuardedCholesky { n, l }
    }

    #[allow(clippy::needless_range_loop)]
    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svec_round_trip_preserves_inner_product() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 5.0, -1.0, 3.0, -1.0, 4.0]);
        let b = DMatrix::from_row_slice(3, 3, &[0.5, 1.0, 0.0, 1.0, -2.0, 0.25, 0.0, 0.25, 1.0]);
        let mut va = vec![0.0; 6];
        let mut vb = vec![0.0; 6];
        svec_into(&a, &mut va);
        svec_into(&b, &mut vb);
        assert!((dot(&va, &vb) - a.component_mul(&b).sum()).abs() < 1e-12);
        assert!((mat(3, &va) - a).norm() < 1e-12);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let f = GuardedCholesky::new(&a, 1e-14);
        let mut x = vec![1.0, 2.0, 3.0];
        f.solve_in_place(&mut x);
        let r = &a * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(r.norm() < 1e-12);
    }
}
