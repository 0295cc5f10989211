//! Privacy tests built from twisting unitaries.

use super::linalg::{dagger, identity, kron, max_abs, trace_prod_re, CMat};
use super::{phi_matrix, BipartiteState};
use crate::error::{Error, Result};

/// The privacy test `Π = V (Φ^k ⊗ I_{A'B'}) V†` on `A B A' B'` with twisting
/// unitary `V = Σ_i |i⟩⟨i|_A ⊗ I_B ⊗ U^i_{A'B'}`.
#[derive(Debug, Clone)]
pub struct PrivacyTest {
    k: usize,
    da_shield: usize,
    db_shield: usize,
    twist: CMat,
}

impl PrivacyTest {
    /// `unitaries[i]` acts on the shield `A'B'` when the `A` key is `i`.
    pub fn new(k: usize, da_shield: usize, db_shield: usize, unitaries: &[CMat]) -> Result<Self> {
        if k < 2 || da_shield == 0 || db_shield == 0 {
            return Err(Error::domain("privacy test needs k >= 2 and nonempty shields"));
        }
        let ds = da_shield * db_shield;
        if unitaries.len() != k {
            return Err(Error::dim(format!("need {k} controlled unitaries, got {}", unitaries.len())));
        }
        let n = k * k * ds;
        let mut twist = CMat::zeros(n, n);
        for (i, u) in unitaries.iter().enumerate() {
            if u.nrows() != ds || u.ncols() != ds || max_abs(&(dagger(u) * u - identity(ds))) > 1e-10 {
                return Err(Error::domain(format!("controlled operator {i} is not a {ds}x{ds} unitary")));
            }
            for b in 0..k {
                let off = (i * k + b) * ds;
                twist.view_mut((off, off), (ds, ds)).copy_from(u);
            }
        }
        Ok(PrivacyTest { k, da_shield, db_shield, twist })
    }

    /// Test with identity twisting.
    pub fn untwisted(k: usize, da_shield: usize, db_shield: usize) -> Result<Self> {
        let ds = da_shield * db_shield;
        PrivacyTest::new(k, da_shield, db_shield, &vec![identity(ds); k])
    }

    pub fn key_dim(&self) -> usize {
        self.k
    }

    pub fn shield_dims(&self) -> (usize, usize) {
        (self.da_shield, self.db_shield)
    }

    pub fn twisting_unitary(&self) -> &CMat {
        &self.twist
    }

    /// Projector onto the accepting subspace.
    pub fn projector(&self) -> CMat {
        let core = kron(&phi_matrix(self.k), &identity(self.da_shield * self.db_shield));
        &self.twist * core * dagger(&self.twist)
    }

    /// The private state `V(Φ^k ⊗ τ)V†` for a shield state `τ_{A'B'}`.
    pub fn private_state(&self, shield: &CMat) -> Result<CMat> {
        let ds = self.da_shield * self.db_shield;
        if shield.nrows() != ds {
            return Err(Error::dim("shield state dimension mismatch"));
        }
        Ok(&self.twist * kron(&phi_matrix(self.k), shield) * dagger(&self.twist))
    }

    fn total_dim(&self) -> usize {
        self.k * self.k * self.da_shield * self.db_shield
    }
}

/// `Tr[Π ω]` for `ω` on `A B A' B'` (as a state on `(A A') ⊗ (B B')` the
/// systems must first be brought into the `A B A' B'` order).
pub fn privacy_pass_probability(omega: &BipartiteState, test: &PrivacyTest) -> Result<f64> {
    if omega.dim() != test.total_dim() {
        return Err(Error::dim(format!(
            "state of dimension {} does not match privacy test of dimension {}",
            omega.dim(),
            test.total_dim()
        )));
    }
    Ok(trace_prod_re(&test.projector(), omega.matrix()).clamp(0.0, 1.0))
}
