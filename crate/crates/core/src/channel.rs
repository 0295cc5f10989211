//! Unextendible-entanglement measures of channels and the bounds on
//! forward-assisted private capacity.
//!
//! A channel extension is a Choi operator `Γ^P_ABE` with `Tr_E Γ^P = Γ^N`
//! and `E ≅ B`. Its `AE` marginal is the Choi operator of the extended
//! channel `A → E`.

use crate::closed_form::{alpha_of_ell, erasure_geo_analytic};
use crate::error::{Error, Result};
use crate::quantum::linalg::{identity, kernel_basis, support_basis};
use crate::quantum::{CMat, ChannelChoi};
use crate::report::{BoundReport, ChannelBoundReport, Method};
use crate::sdp::{Field, MatExpr, Model, SolverOptions};
use crate::state::{extension_variable, SUPPORT_TOL};

pub use crate::state::DEFAULT_TOL;

/// Largest supported ladder depth; `α − 1 = 2^{−8}`.
pub const MAX_ELL: u32 = 8;

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::domain(format!("epsilon {eps} outside [0, 1)")));
    }
    Ok(())
}

struct Extension {
    model: Model,
    /// `Tr_B Γ^P` on `AE`.
    marginal_ae: MatExpr,
}

fn extension(ch: &ChannelChoi) -> Result<Extension> {
    let (da, db) = (ch.d_in(), ch.d_out());
    let mut model = Model::new(Field::for_data([ch.matrix()]));
    let dims = [da, db, db];
    let gp = extension_variable(&mut model, ch.matrix(), db, "choi_ext")?;
    model.eq_const(&gp.partial_trace(&dims, &[0, 1])?, ch.matrix())?;
    let marginal_ae = gp.partial_trace(&dims, &[0, 2])?;
    Ok(Extension { model, marginal_ae })
}

/// `J^ε_min(N) = max μ(1−ε) − λ` over extensions, `Y ⪰ 0` and `λ, μ ≥ 0`
/// with `μΓ^N ⪯ Tr_B Γ^P + Y` and `Tr_B Y ⪯ λ I_A`.
///
/// At ε = 0 and rank-deficient `Γ^N` that supremum is only approached as
/// `μ → ∞`. Every feasible test then has the form `ρ_A ⊗ I − K` with `K`
/// supported on `ker Γ^N = ran Q`, which gives the attained program
/// `J = 1 − min t` over extensions and `Z ⪰ 0` with
/// `Q†ZQ ⪰ Q† Tr_B Γ^P Q` and `Tr_B Z ⪯ t I_A`.
pub fn j_min_channel(ch: &ChannelChoi, eps: f64, tol: f64) -> Result<f64> {
    check_eps(eps)?;
    let (da, db) = (ch.d_in(), ch.d_out());
    let Extension { mut model, marginal_ae } = extension(ch)?;
    if eps == 0.0 {
        let Some(q) = kernel_basis(ch.matrix(), SUPPORT_TOL) else {
            return Ok(1.0);
        };
        let t = model.free("t");
        let z = model.psd_var(da * db, "Z");
        let qh = q.adjoint();
        model.psd(&z.sub(&marginal_ae)?.congruence(&qh)?, "kernel")?;
        let cap = MatExpr::scalar_identity(&t, da).sub(&z.partial_trace(&[da, db], &[0])?)?;
        model.psd(&cap, "input")?;
        model.minimize(t);
        let sol = model.solve(&SolverOptions::with_tol(tol))?;
        let v = 1.0 - sol.sol.value("smooth-min unextendible entanglement of a channel")?;
        return Ok(v.clamp(f64::MIN_POSITIVE, 1.0));
    }
    let mu = model.nonneg("mu");
    let lam = model.nonneg("lambda");
    let y = model.psd_var(da * db, "Y");
    let hyp = marginal_ae.add(&y)?.sub(&MatExpr::const_times(ch.matrix(), &mu))?;
    model.psd(&hyp, "hypothesis")?;
    let cap = MatExpr::scalar_identity(&lam, da).sub(&y.partial_trace(&[da, db], &[0])?)?;
    model.psd(&cap, "input")?;
    model.maximize(mu.scale(1.0 - eps).sub(&lam));
    let sol = model.solve(&SolverOptions::with_tol(tol))?;
    let v = sol.sol.value("smooth-min unextendible entanglement of a channel")?;
    Ok(v.clamp(f64::MIN_POSITIVE, 1.0 - eps))
}

/// Smooth-min unextendible entanglement `E^{u,ε}_min(N)` in bits.
pub fn smooth_min_unext_ent_channel(ch: &ChannelChoi, eps: f64, tol: f64) -> Result<f64> {
    Ok(-0.5 * j_min_channel(ch, eps, tol)?.log2())
}

/// `min y` for the geometric-mean ladder of depth `ℓ`:
/// `Tr_E M ⪯ y I_A` with `M ⪰ Γ^N #_{α} N⁰`, `N⁰ = Tr_B Γ^P`.
///
/// The ladder blocks are written on `supp(Γ^N)`, which contains the range of
/// every `N^i` with `i ≥ 1`.
fn geo_min_y(ch: &ChannelChoi, ell: u32, tol: f64) -> Result<f64> {
    if ell > MAX_ELL {
        return Err(Error::domain(format!("ell {ell} exceeds {MAX_ELL}")));
    }
    let (da, db) = (ch.d_in(), ch.d_out());
    let n = da * db;
    let gamma = ch.matrix();
    let v = support_basis(gamma, SUPPORT_TOL).unwrap_or_else(|| identity(n));
    let r = v.ncols();
    let gamma_c: CMat = v.adjoint() * gamma * &v;
    let Extension { mut model, marginal_ae: n0 } = extension(ch)?;

    let w_inner = if ell == 0 { n } else { r };
    let w = model.psd_var(n + w_inner, "W");
    let m = w.block(0, 0, n, n)?;
    if ell == 0 {
        model.eq_const(&w.block(0, n, n, n)?, gamma)?;
        model.eq(&w.block(n, n, n, n)?, &n0)?;
    } else {
        model.eq_const(&w.block(0, n, n, r)?, &(gamma * &v))?;
        let mut ladder = Vec::with_capacity(ell as usize);
        for i in 1..=ell {
            let lower = if i == 1 { n } else { r };
            let z = model.psd_var(r + lower, &format!("ladder{i}"));
            model.eq_const(&z.block(0, 0, r, r)?, &gamma_c)?;
            ladder.push(z);
        }
        model.eq(&ladder[0].block(r, r, n, n)?, &n0)?;
        for i in 0..ladder.len() {
            let ni = if i + 1 < ladder.len() {
                ladder[i + 1].block(r, r, r, r)?
            } else {
                w.block(n, n, r, r)?
            };
            if i == 0 {
                model.eq(&ladder[0].block(0, r, r, n)?, &ni.mul_right(&v.adjoint())?)?;
            } else {
                model.eq(&ladder[i].block(0, r, r, r)?, &ni)?;
            }
        }
    }
    let y = model.nonneg("y");
    let cap = MatExpr::scalar_identity(&y, da).sub(&m.partial_trace(&[da, db], &[0])?)?;
    model.psd(&cap, "input")?;
    model.minimize(y);
    let sol = model.solve(&SolverOptions::with_tol(tol))?;
    sol.sol.value("geometric unextendible entanglement of a channel")
}

/// α-geometric unextendible entanglement `Ê^u_α(N)` at `α = 1 + 2^{−ℓ}`, in
/// bits: `2^{ℓ−1} log₂ y*`.
pub fn geo_unext_ent_channel(ch: &ChannelChoi, ell: u32, tol: f64) -> Result<f64> {
    let y = geo_min_y(ch, ell, tol)?;
    if y <= 0.0 {
        return Err(Error::Numerical(format!("nonpositive optimum y = {y:e}")));
    }
    Ok(2f64.powi(ell as i32 - 1) * y.log2())
}

/// Closed-form `Ê^u_α` of the `d`-dimensional erasure channel.
pub fn erasure_geo_unext_analytic(p: f64, d: usize, alpha: f64) -> Result<f64> {
    erasure_geo_analytic(p, d, alpha)
}

/// `Ĵ^{ε,n}_α = (1−ε)^{α/(α−1)} 2^{−2n Ê}` from a single-copy value `Ê`.
pub fn j_geo_from(e_geo: f64, eps: f64, n: u32, ell: u32) -> Result<f64> {
    check_eps(eps)?;
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let alpha = alpha_of_ell(ell);
    let e = e_geo.max(0.0);
    Ok((1.0 - eps).powf(alpha / (alpha - 1.0)) * (-2.0 * f64::from(n) * e).exp2())
}

/// `Ĵ^{ε,n}_α(N)` with `Ê` computed by SDP.
pub fn j_geo_n(ch: &ChannelChoi, eps: f64, n: u32, ell: u32, tol: f64) -> Result<f64> {
    check_eps(eps)?;
    j_geo_from(geo_unext_ent_channel(ch, ell, tol)?, eps, n, ell)
}

/// One-shot bound `f(J^ε_min(N), ε)`.
pub fn private_capacity_bound_oneshot(ch: &ChannelChoi, eps: f64, tol: f64) -> Result<ChannelBoundReport> {
    let j = j_min_channel(ch, eps, tol)?;
    let base = BoundReport::new(Method::SmoothMin, -0.5 * j.log2(), j, eps, 1)?;
    Ok(ChannelBoundReport::new(base, None))
}

/// The two relaxed one-shot bounds, sharing one `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedChannelBounds {
    /// `−log₂(√J − √ε)`.
    pub alg: ChannelBoundReport,
    /// `−½ log₂(J − √ε)`.
    pub td: ChannelBoundReport,
}

pub fn private_capacity_bound_relaxed(ch: &ChannelChoi, eps: f64, tol: f64) -> Result<RelaxedChannelBounds> {
    let j = j_min_channel(ch, eps, tol)?;
    relaxed_reports(j, eps)
}

/// Relaxed reports from a precomputed channel `J`.
pub fn relaxed_reports(j: f64, eps: f64) -> Result<RelaxedChannelBounds> {
    check_eps(eps)?;
    let e = -0.5 * j.log2();
    Ok(RelaxedChannelBounds {
        alg: ChannelBoundReport::new(BoundReport::new(Method::RelaxedAlg, e, j, eps, 1)?, None),
        td: ChannelBoundReport::new(BoundReport::new(Method::RelaxedTd, e, j, eps, 1)?, None),
    })
}

/// n-shot bound `f(Ĵ^{ε,n}_α, ε)` with the per-copy rate alongside.
pub fn private_capacity_bound_nshot(
    ch: &ChannelChoi,
    eps: f64,
    n: u32,
    ell: u32,
    tol: f64,
) -> Result<ChannelBoundReport> {
    check_eps(eps)?;
    nshot_geo_report(geo_unext_ent_channel(ch, ell, tol)?, eps, n, ell)
}

/// n-shot report from a precomputed single-copy `Ê`. The report's `E` is
/// `n Ê`.
pub fn nshot_geo_report(e_geo: f64, eps: f64, n: u32, ell: u32) -> Result<ChannelBoundReport> {
    let j = j_geo_from(e_geo, eps, n, ell)?;
    let base = BoundReport::new(Method::NshotGeo, f64::from(n) * e_geo.max(0.0), j, eps, n)?;
    Ok(ChannelBoundReport::new(base, Some(ell)))
}
