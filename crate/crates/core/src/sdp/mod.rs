//! Block-structured semidefinite programs.
//!
//! [`SdpProblem`] is the standard form `min/max c'x + c₀` subject to
//! `Ax = b` and `x ∈ K`, where `K` is a product of a free block, a
//! nonnegative orthant and real PSD cones in `svec` coordinates (column-major
//! lower triangle, off-diagonal entries scaled by `√2`). [`solve`] runs a
//! primal-dual interior-point method on the homogeneous self-dual embedding,
//! so infeasible and unbounded problems are reported through
//! [`SolveStatus`]. [`Model`] builds problems from Hermitian affine matrix
//! expressions.

mod dense;
mod model;
mod problem;
mod solver;

pub use model::{Field, MatExpr, Model, ModelSolution, Scalar};
pub use problem::{svec_index, svec_len, ConeSpec, SdpProblem, Sense};
pub use solver::{solve, solve_from, solve_with, SdpSolution, SolveStatus, SolverOptions, NEAR_OPTIMAL_FACTOR};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quantum::linalg::{hermitian_defect, max_abs, CMat};

/// Real symmetric embedding `[[Re H, −Im H], [Im H, Re H]]` of a Hermitian
/// matrix. The spectrum of the embedding is that of `H` with every
/// multiplicity doubled.
pub fn embed_hermitian(h: &CMat) -> Result<DMatrix<f64>> {
    if !h.is_square() || hermitian_defect(h) > 1e-12 * max_abs(h).max(1.0) {
        return Err(Error::Numerical("embed_hermitian needs a Hermitian matrix".into()));
    }
    let n = h.nrows();
    Ok(DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    }))
}

/// Conic dual written in the same standard form.
///
/// For `min c'x` the dual is `max b'y` subject to `A_K'y + s = c_K`,
/// `A_F'y = c_F` with `y` free and `s ∈ K`; for `max c'x` it is `min b'y`
/// subject to `A_K'y − s = c_K`, `A_F'y = c_F`. The objective offset carries
/// over, so at optimality both problems report the same value.
pub fn dualize(p: &SdpProblem) -> SdpProblem {
    let m = p.n_rows;
    let cones = &p.cones;
    let nf = cones.free;
    let n = p.n_cols();
    let s_sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut a = Vec::with_capacity(p.a.len() + n - nf);
    for &(r, col, v) in &p.a {
        a.push((col, r, v));
    }
    for col in nf..n {
        a.push((col, m + col - nf, s_sign));
    }
    let mut c = p.b.clone();
    c.resize(m + n - nf, 0.0);
    SdpProblem {
        sense: match p.sense {
            Sense::Minimize => Sense::Maximize,
            Sense::Maximize => Sense::Minimize,
        },
        cones: ConeSpec { free: m, nonneg: cones.nonneg, psd: cones.psd.clone() },
        block_labels: p.block_labels.iter().map(|l| format!("dual:{l}")).collect(),
        c,
        offset: p.offset,
        a,
        b: p.c.clone(),
        n_rows: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::linalg::{c, eigvalsh};
    use crate::quantum::random;

    #[test]
    fn embed_examples() {
        let i2 = crate::quantum::linalg::identity(2);
        assert_eq!(embed_hermitian(&i2).unwrap(), DMatrix::identity(4, 4));
        let y = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let e = embed_hermitian(&y).unwrap();
        let mut ev: Vec<f64> = e.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let h = random::random_state(5, 3, 2) - crate::quantum::linalg::identity(5).scale(0.1);
        let lo = eigvalsh(&h)[0];
        let e = embed_hermitian(&h).unwrap();
        let elo = e.symmetric_eigen().eigenvalues.min();
        assert!((lo - elo).abs() < 1e-12);
        let bad = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(embed_hermitian(&bad).is_err());
    }
}
