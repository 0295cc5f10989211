//! Two-extendibility through the smallest identity shift that admits a
//! swap-symmetric extension.

use super::linalg::{identity, CMat};
use super::{BipartiteState, ChannelChoi};
use crate::error::Result;
use crate::sdp::{Field, MatExpr, Model, SolverOptions};

/// Decision threshold on the extension margin.
pub const TWO_EXT_TOL: f64 = 1e-7;

const MARGIN_SOLVER_TOL: f64 = 1e-9;

/// `min t` such that some `ω_ABE ⪰ 0` with `W_BE ω W_BE = ω` has
/// `Tr_E ω = X + t I`. The operator `X` is two-extendible iff `t ≤ 0`.
fn margin(x: &CMat, da: usize, db: usize) -> Result<f64> {
    let mut m = Model::new(Field::for_data([x]));
    let t = m.free("t");
    let dims = [da, db, db];
    let omega = m.psd_var(da * db * db, "omega");
    let swapped = omega.permute(&dims, &[0, 2, 1])?;
    m.eq(&swapped, &omega)?;
    let marg = omega.partial_trace(&dims, &[0, 1])?;
    let shifted = MatExpr::from_const(x).add(&MatExpr::const_times(&identity(da * db), &t))?;
    m.eq(&marg, &shifted)?;
    m.minimize(t.clone());
    let sol = m.solve(&SolverOptions::with_tol(MARGIN_SOLVER_TOL))?;
    sol.sol.value("two-extendibility margin")
}

/// Extension margin of a state; nonpositive exactly for two-extendible states.
pub fn extension_margin(rho: &BipartiteState) -> Result<f64> {
    margin(rho.matrix(), rho.da(), rho.db())
}

/// Extension margin of a channel's Choi operator.
pub fn extension_margin_channel(ch: &ChannelChoi) -> Result<f64> {
    margin(ch.matrix(), ch.d_in(), ch.d_out())
}

/// True when `ρ_AB` has a two-extension, up to margin `tol` (use
/// [`TWO_EXT_TOL`] by default).
pub fn is_two_extendible(rho: &BipartiteState, tol: f64) -> Result<bool> {
    Ok(extension_margin(rho)? <= tol)
}

/// True when the channel has a permutation-covariant two-extension.
pub fn is_two_extendible_channel(ch: &ChannelChoi, tol: f64) -> Result<bool> {
    Ok(extension_margin_channel(ch)? <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{erasure_channel, identity_channel, isotropic, max_entangled, random};

    #[test]
    fn states() {
        assert!(!is_two_extendible(&max_entangled(2).unwrap(), TWO_EXT_TOL).unwrap());
        assert!(is_two_extendible(&isotropic(5.0 / 8.0, 2).unwrap(), TWO_EXT_TOL).unwrap());
        assert!(!is_two_extendible(&isotropic(0.8, 2).unwrap(), TWO_EXT_TOL).unwrap());
        let a = random::random_state(2, 2, 1);
        let b = random::random_state(2, 2, 2);
        let prod = BipartiteState::new(a.kronecker(&b), 2, 2).unwrap();
        assert!(is_two_extendible(&prod, TWO_EXT_TOL).unwrap());
    }

    #[test]
    fn isotropic_threshold_is_three_quarters() {
        let lo = extension_margin(&isotropic(0.74, 2).unwrap()).unwrap();
        let hi = extension_margin(&isotropic(0.76, 2).unwrap()).unwrap();
        assert!(lo < 0.0 && hi > 0.0, "{lo} {hi}");
    }

    #[test]
    fn channels() {
        assert!(is_two_extendible_channel(&erasure_channel(0.5, 2).unwrap(), TWO_EXT_TOL).unwrap());
        assert!(!is_two_extendible_channel(&erasure_channel(0.2, 2).unwrap(), TWO_EXT_TOL).unwrap());
        assert!(!is_two_extendible_channel(&identity_channel(2).unwrap(), TWO_EXT_TOL).unwrap());
    }
}
