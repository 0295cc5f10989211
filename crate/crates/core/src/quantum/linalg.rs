//! Dense complex matrix helpers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[&CMat]) -> CMat {
    let mut out = CMat::from_element(1, 1, ONE);
    for m in ms {
        out = out.kronecker(*m);
    }
    out
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Re Tr[A B]` without forming the product.
pub fn trace_prod_re(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    eigh(m).0
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

/// Applies `g` to the spectrum of a Hermitian matrix.
pub fn spectral_map(m: &CMat, g: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let gv = g(v);
        for i in 0..n {
            scaled[(i, j)] *= gv;
        }
    }
    scaled * vecs.adjoint()
}

/// Square root of a PSD matrix; eigenvalues in `[-clip, 0)` are set to zero.
pub fn sqrt_psd(m: &CMat, clip: f64) -> Result<CMat> {
    let lo = min_eigenvalue(m);
    if lo < -clip {
        return Err(Error::Numerical(format!("matrix not PSD: min eigenvalue {lo:e}")));
    }
    Ok(spectral_map(m, |v| v.max(0.0).sqrt()))
}

/// Inverse square root of a positive definite matrix.
pub fn inv_sqrt_pd(m: &CMat) -> Result<CMat> {
    let lo = min_eigenvalue(m);
    if lo <= 1e-14 * max_abs(m).max(1.0) {
        return Err(Error::Numerical(format!("matrix not positive definite: min eigenvalue {lo:e}")));
    }
    Ok(spectral_map(m, |v| 1.0 / v.sqrt()))
}

/// Orthonormal eigenvectors of a PSD matrix, split at `rel_tol · λ_max`
/// into `(support, kernel)` column blocks. Real input yields real vectors.
fn spectral_split(m: &CMat, rel_tol: f64) -> (CMat, CMat) {
    let n = m.nrows();
    let (vals, vecs) = if m.iter().all(|z| z.im == 0.0) {
        let re = m.map(|z| z.re);
        let re = (&re + re.transpose()) * 0.5;
        let eig = re.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect::<Vec<f64>>(), eig.eigenvectors.map(|x| c(x, 0.0)))
    } else {
        let eig = hermitize(m).symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let top = vals.iter().copied().fold(0.0, f64::max);
    let (keep, drop): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| vals[i] > rel_tol * top);
    let pick = |idx: &[usize]| {
        let mut v = CMat::zeros(n, idx.len());
        for (dst, &src) in idx.iter().enumerate() {
            v.set_column(dst, &vecs.column(src));
        }
        v
    };
    (pick(&keep), pick(&drop))
}

/// Orthonormal basis of the support of a PSD matrix (eigenvalues above
/// `rel_tol · λ_max`), or `None` when the matrix has full rank.
pub fn support_basis(m: &CMat, rel_tol: f64) -> Option<CMat> {
    let (support, kernel) = spectral_split(m, rel_tol);
    (kernel.ncols() > 0).then_some(support)
}

/// Orthonormal basis of the numerical kernel of a PSD matrix, or `None` when
/// the matrix has full rank.
pub fn kernel_basis(m: &CMat, rel_tol: f64) -> Option<CMat> {
    let (_, kernel) = spectral_split(m, rel_tol);
    (kernel.ncols() > 0).then_some(kernel)
}

fn check_dims(n: usize, dims: &[usize]) -> Result<()> {
    let prod: usize = dims.iter().product();
    if prod != n || dims.contains(&0) {
        return Err(Error::dim(format!("subsystem dims {dims:?} do not multiply to {n}")));
    }
    Ok(())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Offsets contributed by every multi-index over the listed subsystems.
fn offsets(dims: &[usize], strides: &[usize], systems: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &sys in systems {
        let mut next = Vec::with_capacity(out.len() * dims[sys]);
        for &o in &out {
            for k in 0..dims[sys] {
                next.push(o + k * strides[sys]);
            }
        }
        out = next;
    }
    out
}

/// Index of every basis vector of the kept subsystems and of the traced
/// subsystems, both in row-major order. Shared with the SDP modelling layer.
pub(crate) fn trace_index_maps(dims: &[usize], keep: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let st = strides(dims);
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !kept.contains(s)).collect();
    (offsets(dims, &st, &kept), offsets(dims, &st, &traced))
}

/// Partial trace keeping the subsystems listed in `keep` (in their original
/// order).
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    check_dims(m.nrows(), dims)?;
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::dim(format!("keep {keep:?} references a missing subsystem")));
    }
    let (ko, to) = trace_index_maps(dims, keep);
    let n = ko.len();
    let mut out = CMat::zeros(n, n);
    for (a, &oa) in ko.iter().enumerate() {
        for (b, &ob) in ko.iter().enumerate() {
            let mut s = ZERO;
            for &t in &to {
                s += m[(oa + t, ob + t)];
            }
            out[(a, b)] = s;
        }
    }
    Ok(out)
}

/// Permutation of basis indices realising a reordering of subsystems: new
/// position `q` holds old subsystem `perm[q]`. Entry `i` of the result is the
/// old index of new basis vector `i`.
pub(crate) fn subsystem_permutation(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let old_st = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let n: usize = dims.iter().product();
    let mut out = Vec::with_capacity(n);
    for idx in 0..n {
        let mut rem = idx;
        let mut old = 0;
        let new_st = strides(&new_dims);
        for (q, &p) in perm.iter().enumerate() {
            let digit = rem / new_st[q];
            rem %= new_st[q];
            old += digit * old_st[p];
        }
        out.push(old);
    }
    out
}

/// Reorders tensor factors.
pub fn permute_subsystems(m: &CMat, dims: &[usize], perm: &[usize]) -> Result<CMat> {
    check_dims(m.nrows(), dims)?;
    let mut seen = perm.to_vec();
    seen.sort_unstable();
    if seen != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::dim(format!("{perm:?} is not a permutation of {} systems", dims.len())));
    }
    let map = subsystem_permutation(dims, perm);
    let n = map.len();
    Ok(CMat::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

/// `I ⊗ op ⊗ I` with `op` on subsystem `sys`.
pub fn embed_local(op: &CMat, dims: &[usize], sys: usize) -> CMat {
    let left: usize = dims[..sys].iter().product();
    let right: usize = dims[sys + 1..].iter().product();
    kron_all(&[&identity(left), op, &identity(right)])
}

pub fn ket(d: usize, i: usize) -> nalgebra::DVector<Complex64> {
    let mut v = nalgebra::DVector::zeros(d);
    v[i] = ONE;
    v
}

pub fn projector(v: &nalgebra::DVector<Complex64>) -> CMat {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> CMat {
        CMat::from_fn(n, n, |i, j| {
            let t = (seed as f64 + 1.0) * (i as f64 * 1.3 + j as f64 * 0.7 + 0.1);
            c(t.sin(), (t * 1.7).cos())
        })
    }

    #[test]
    fn partial_trace_of_product() {
        let x = hermitize(&sample(2, 1));
        let y = hermitize(&sample(3, 2));
        let xy = kron(&x, &y);
        let tb = partial_trace(&xy, &[2, 3], &[0]).unwrap();
        let ta = partial_trace(&xy, &[2, 3], &[1]).unwrap();
        assert!((tb - x.scale(trace(&y).re)).norm() < 1e-12);
        assert!((ta - y.scale(trace(&x).re)).norm() < 1e-12);
        assert!(partial_trace(&xy, &[2, 2], &[0]).is_err());
    }

    #[test]
    fn permutation_swaps_factors() {
        let x = sample(2, 3);
        let y = sample(3, 4);
        let swapped = permute_subsystems(&kron(&x, &y), &[2, 3], &[1, 0]).unwrap();
        assert!((swapped - kron(&y, &x)).norm() < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let g = sample(4, 5);
        let p = &g * g.adjoint();
        let r = sqrt_psd(&p, 1e-10).unwrap();
        assert!((&r * &r - &p).norm() < 1e-9);
        let is = inv_sqrt_pd(&p).unwrap();
        assert!((&is * &p * &is - identity(4)).norm() < 1e-8);
    }

    #[test]
    fn support_and_kernel_split() {
        let a = sample(3, 4);
        let rank2 = a.columns(0, 2) * a.columns(0, 2).adjoint();
        let v = support_basis(&rank2, 1e-12).unwrap();
        let q = kernel_basis(&rank2, 1e-12).unwrap();
        assert_eq!((v.ncols(), q.ncols()), (2, 1));
        assert!((v.adjoint() * &v - identity(2)).norm() < 1e-12);
        assert!((&rank2 * &q).norm() < 1e-12);
        assert!((&v * v.adjoint() + &q * q.adjoint() - identity(3)).norm() < 1e-12);
        assert!(support_basis(&identity(3), 1e-12).is_none());
        assert!(kernel_basis(&identity(3), 1e-12).is_none());
    }
}
