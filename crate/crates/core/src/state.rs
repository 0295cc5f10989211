//! Unextendible-entanglement measures of bipartite states and the one-shot
//! and n-shot bounds on one-way distillable key.
//!
//! Every extension `ω_ABE` has `E ≅ B`; its marginal `Tr_B ω` lives on `AE`
//! and is compared with `ρ_AB` by identifying `E` with `B`.

use crate::closed_form::zero_threshold;
use crate::error::{Error, Result};
use crate::quantum::linalg::{identity, support_basis};
use crate::quantum::{BipartiteState, CMat};
use crate::report::{BoundReport, Method, BOUNDARY_TOL};
use crate::sdp::{Field, MatExpr, Model, SdpProblem, SolverOptions};

pub const DEFAULT_TOL: f64 = 1e-9;

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::domain(format!("epsilon {eps} outside [0, 1)")));
    }
    Ok(())
}

struct Extension {
    model: Model,
    marginal_ae: MatExpr,
    rho: MatExpr,
}

/// Relative eigenvalue cut defining the support of a rank-deficient input.
pub(crate) const SUPPORT_TOL: f64 = 1e-12;

/// PSD variable on `X ⊗ C^{d_e}` confined to `supp(X) ⊗ C^{d_e}`; any
/// operator whose `E`-marginal equals `X` has this support.
pub(crate) fn extension_variable(model: &mut Model, x: &CMat, d_e: usize, label: &str) -> Result<MatExpr> {
    let n = x.nrows() * d_e;
    match support_basis(x, SUPPORT_TOL) {
        None => Ok(model.psd_var(n, label)),
        Some(v) => {
            let iso = v.kronecker(&identity(d_e));
            model.psd_var(iso.ncols(), label).congruence(&iso)
        }
    }
}

/// Extension variable `ω_ABE ⪰ 0` with `Tr_E ω = ρ`.
fn extension(rho: &BipartiteState) -> Result<Extension> {
    let (da, db) = rho.dims();
    let mut model = Model::new(Field::for_data([rho.matrix()]));
    let dims = [da, db, db];
    let omega = extension_variable(&mut model, rho.matrix(), db, "omega")?;
    model.eq_const(&omega.partial_trace(&dims, &[0, 1])?, rho.matrix())?;
    let marginal_ae = omega.partial_trace(&dims, &[0, 2])?;
    Ok(Extension { model, marginal_ae, rho: MatExpr::from_const(rho.matrix()) })
}

/// `max μ(1−ε) − Tr Z` over `μ ≥ 0`, `Z ⪰ 0`, extensions `ω`, subject to
/// `μρ ⪯ Tr_B ω + Z`.
///
/// At ε = 0 the optimal test is the support projector `Π_ρ` and the model is
/// `max Tr[Π_ρ Tr_B ω]`; the `μ` form is then only attained as `μ → ∞`.
fn smooth_min_model(rho: &BipartiteState, eps: f64) -> Result<Model> {
    check_eps(eps)?;
    let Extension { mut model, marginal_ae, rho: r } = extension(rho)?;
    if eps == 0.0 {
        let overlap = match support_basis(rho.matrix(), SUPPORT_TOL) {
            None => marginal_ae.trace(),
            Some(v) => marginal_ae.congruence(&v.adjoint())?.trace(),
        };
        model.maximize(overlap);
        return Ok(model);
    }
    let mu = model.nonneg("mu");
    let z = model.psd_var(rho.dim(), "Z");
    let slack = marginal_ae.add(&z)?.sub(&MatExpr::const_times(r.constant_part(), &mu))?;
    model.psd(&slack, "hypothesis")?;
    model.maximize(mu.scale(1.0 - eps).sub(&z.trace()));
    Ok(model)
}

/// Standard-form SDP whose optimal value is `J^ε_min(ρ)`.
pub fn smooth_min_problem(rho: &BipartiteState, eps: f64) -> Result<SdpProblem> {
    smooth_min_model(rho, eps)?.compile()
}

/// `J^ε_min(ρ) = 2^{−2 E^{u,ε}_min(ρ)}`.
pub fn j_min(rho: &BipartiteState, eps: f64, tol: f64) -> Result<f64> {
    let sol = smooth_min_model(rho, eps)?.solve(&SolverOptions::with_tol(tol))?;
    let v = sol.sol.value("smooth-min unextendible entanglement")?;
    Ok(v.clamp(f64::MIN_POSITIVE, 1.0 - eps))
}

/// Smooth-min unextendible entanglement `E^{u,ε}_min(ρ)` in bits.
pub fn smooth_min_unext_ent(rho: &BipartiteState, eps: f64, tol: f64) -> Result<f64> {
    Ok(-0.5 * j_min(rho, eps, tol)?.log2())
}

/// `max λ` subject to `λρ ⪯ Tr_B ω` over extensions `ω`.
fn max_lambda(rho: &BipartiteState, tol: f64) -> Result<f64> {
    let Extension { mut model, marginal_ae, rho: r } = extension(rho)?;
    let lam = model.nonneg("lambda");
    let slack = marginal_ae.sub(&MatExpr::const_times(r.constant_part(), &lam))?;
    model.psd(&slack, "max")?;
    model.maximize(lam);
    let sol = model.solve(&SolverOptions::with_tol(tol))?;
    let v = sol.sol.value("max-unextendible entanglement")?;
    Ok(v.clamp(f64::MIN_POSITIVE, 1.0))
}

/// Max-unextendible entanglement `E^u_max(ρ)` in bits.
pub fn max_unext_ent(rho: &BipartiteState, tol: f64) -> Result<f64> {
    Ok(-0.5 * max_lambda(rho, tol)?.log2())
}

/// One-shot bound `f(J^ε_min, ε)`.
pub fn key_bound_oneshot(rho: &BipartiteState, eps: f64, tol: f64) -> Result<BoundReport> {
    let j = j_min(rho, eps, tol)?;
    BoundReport::new(Method::SmoothMin, -0.5 * j.log2(), j, eps, 1)
}

/// Relaxed bound `−log₂(√J − √ε)`.
pub fn key_bound_relaxed_alg(rho: &BipartiteState, eps: f64, tol: f64) -> Result<BoundReport> {
    let j = j_min(rho, eps, tol)?;
    BoundReport::new(Method::RelaxedAlg, -0.5 * j.log2(), j, eps, 1)
}

/// Relaxed bound `−½ log₂(J − √ε)`.
pub fn key_bound_relaxed_td(rho: &BipartiteState, eps: f64, tol: f64) -> Result<BoundReport> {
    let j = j_min(rho, eps, tol)?;
    BoundReport::new(Method::RelaxedTd, -0.5 * j.log2(), j, eps, 1)
}

/// n-shot bound from the additive max measure:
/// `J̃ = 2^{−2n E^u_max(ρ)} (1 − ε)`. The report's `E` is `n E^u_max(ρ)`.
pub fn key_bound_nshot_max(rho: &BipartiteState, eps: f64, n: u32, tol: f64) -> Result<BoundReport> {
    let e = max_unext_ent(rho, tol)?;
    nshot_max_report(e, eps, n)
}

/// n-shot report from a precomputed single-copy `E^u_max`.
pub fn nshot_max_report(e_max: f64, eps: f64, n: u32) -> Result<BoundReport> {
    check_eps(eps)?;
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let e = f64::from(n) * e_max.max(0.0);
    let j = (-2.0 * e).exp2() * (1.0 - eps);
    BoundReport::new(Method::NshotMax, e, j, eps, n)
}

/// Whether the one-shot key of any state with this `J` is certified zero.
pub fn certified_zero(j: f64, eps: f64) -> Result<bool> {
    Ok(j > zero_threshold(eps)? + BOUNDARY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{f_bound, prop3_value};
    use crate::quantum::{isotropic, max_entangled};
    use crate::report::Regime;

    #[test]
    fn maximally_entangled_values() {
        let phi = max_entangled(2).unwrap();
        let e = smooth_min_unext_ent(&phi, 0.1, DEFAULT_TOL).unwrap();
        assert!((e - prop3_value(2, 0.1).unwrap()).abs() < 1e-7, "{e}");
        assert!((j_min(&phi, 0.0, DEFAULT_TOL).unwrap() - 0.25).abs() < 1e-8);
        assert!((max_unext_ent(&phi, DEFAULT_TOL).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn two_extendible_floor() {
        let iso = isotropic(5.0 / 8.0, 2).unwrap();
        for eps in [0.0, 0.3] {
            let j = j_min(&iso, eps, DEFAULT_TOL).unwrap();
            assert!((j - (1.0 - eps)).abs() < 1e-7, "eps {eps}: {j}");
        }
        assert!(max_unext_ent(&iso, DEFAULT_TOL).unwrap().abs() < 1e-7);
    }

    #[test]
    fn reports() {
        let iso = isotropic(5.0 / 8.0, 2).unwrap();
        assert_eq!(key_bound_oneshot(&iso, 0.05, DEFAULT_TOL).unwrap().regime, Regime::Zero);
        let r = key_bound_oneshot(&max_entangled(2).unwrap(), 0.1, DEFAULT_TOL).unwrap();
        assert_eq!(r.regime, Regime::Finite);
        assert!((r.bound.unwrap() - f_bound(r.j, 0.1).unwrap()).abs() < 1e-12);
        let n1 = key_bound_nshot_max(&max_entangled(2).unwrap(), 0.0, 1, DEFAULT_TOL).unwrap();
        assert!((n1.bound.unwrap() - 1.0).abs() < 1e-7);
        assert!(nshot_max_report(0.5, 0.1, 0).is_err());
    }

    #[test]
    fn degenerate_face_is_accepted() {
        let mut r = crate::quantum::random::rng(5130);
        let m = crate::quantum::random::random_density(4, 3, &mut r);
        let rho = BipartiteState::new(m, 2, 2).unwrap();
        for eps in [0.01, 0.1] {
            let j = j_min(&rho, eps, DEFAULT_TOL).unwrap();
            assert!((j - (1.0 - eps)).abs() < 1e-7, "eps {eps}: J = {j}");
        }
    }
}
