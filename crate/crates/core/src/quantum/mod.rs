//! Quantum objects: Hermitian operators, bipartite states, Choi operators,
//! privacy tests and the one-way LOCC maps used by the monotonicity checks.
//!
//! Composite systems use row-major tensor ordering `A ⊗ B ⊗ E` with `A`
//! slowest. The erasure flag is the last basis vector of an erasure output.

mod extendibility;
mod json;
pub mod linalg;
mod privacy;
pub mod random;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
pub use extendibility::{extension_margin, extension_margin_channel, is_two_extendible, is_two_extendible_channel, TWO_EXT_TOL};
pub use json::MatrixJson;
pub use linalg::{partial_trace, permute_subsystems, CMat};
use linalg::{c, dagger, eigvalsh, embed_local, hermitian_defect, hermitize, identity, kron, max_abs, trace, ONE, ZERO};
pub use privacy::{privacy_pass_probability, PrivacyTest};

pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;

/// A complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMat,
}

impl HermitianOperator {
    /// Accepts `m` when its Hermiticity defect is at most
    /// `1e-12 · max(1, ‖m‖_max)`; the stored matrix is exactly Hermitian.
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dim(format!("operator is {}x{}", m.nrows(), m.ncols())));
        }
        let defect = hermitian_defect(&m);
        if defect > 1e-12 * max_abs(&m).max(1.0) {
            return Err(Error::Numerical(format!("operator not Hermitian (defect {defect:e})")));
        }
        Ok(HermitianOperator { m: hermitize(&m) })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.m)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn trace(&self) -> f64 {
        trace(&self.m).re
    }

    /// True when every entry is real.
    pub fn is_real(&self) -> bool {
        self.m.iter().all(|z| z.im == 0.0)
    }
}

/// Which factor of a bipartite operator a map acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// A density operator on `A ⊗ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    op: HermitianOperator,
    da: usize,
    db: usize,
}

impl BipartiteState {
    pub fn new(m: CMat, da: usize, db: usize) -> Result<Self> {
        if da == 0 || db == 0 || m.nrows() != da * db {
            return Err(Error::dim(format!("{}x{} matrix is not on a {da}x{db} system", m.nrows(), m.ncols())));
        }
        let op = HermitianOperator::new(m)?;
        let lo = op.min_eigenvalue();
        if lo < -PSD_TOL {
            return Err(Error::Numerical(format!("state not PSD: min eigenvalue {lo:e}")));
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Numerical(format!("state trace {tr} is not 1")));
        }
        Ok(BipartiteState { op, da, db })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.da, self.db)
    }

    pub fn da(&self) -> usize {
        self.da
    }

    pub fn db(&self) -> usize {
        self.db
    }

    pub fn dim(&self) -> usize {
        self.da * self.db
    }

    /// `ρ_A ⊗ σ_B` style tensor product with `A = A₁A₂`, `B = B₁B₂`.
    pub fn tensor(&self, other: &BipartiteState) -> BipartiteState {
        let joint = kron(self.matrix(), other.matrix());
        let dims = [self.da, self.db, other.da, other.db];
        let reordered = permute_subsystems(&joint, &dims, &[0, 2, 1, 3]).expect("valid permutation");
        BipartiteState {
            op: HermitianOperator { m: reordered },
            da: self.da * other.da,
            db: self.db * other.db,
        }
    }

    pub fn marginal_a(&self) -> CMat {
        partial_trace(self.matrix(), &[self.da, self.db], &[0]).expect("consistent dims")
    }

    pub fn marginal_b(&self) -> CMat {
        partial_trace(self.matrix(), &[self.da, self.db], &[1]).expect("consistent dims")
    }

    /// `Tr[Φ^d ρ]` for `dA = dB = d`.
    pub fn singlet_fraction(&self) -> Result<f64> {
        if self.da != self.db {
            return Err(Error::dim("singlet fraction needs dA = dB"));
        }
        let d = self.da;
        let mut s = ZERO;
        for i in 0..d {
            for j in 0..d {
                s += self.matrix()[(i * d + i, j * d + j)];
            }
        }
        Ok(s.re / d as f64)
    }
}

/// An unnormalised Choi operator `Γ = Σ |i⟩⟨j| ⊗ N(|i⟩⟨j|)` on `in ⊗ out`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelChoi {
    op: HermitianOperator,
    d_in: usize,
    d_out: usize,
}

impl ChannelChoi {
    pub fn new(m: CMat, d_in: usize, d_out: usize) -> Result<Self> {
        if d_in == 0 || d_out == 0 || m.nrows() != d_in * d_out {
            return Err(Error::dim(format!("{}x{} matrix is not on a {d_in}x{d_out} system", m.nrows(), m.ncols())));
        }
        let op = HermitianOperator::new(m)?;
        let lo = op.min_eigenvalue();
        if lo < -PSD_TOL * (d_in as f64) {
            return Err(Error::Numerical(format!("Choi operator not PSD: min eigenvalue {lo:e}")));
        }
        let marg = partial_trace(op.matrix(), &[d_in, d_out], &[0])?;
        let dev = max_abs(&(marg - identity(d_in)));
        if dev > TRACE_TOL {
            return Err(Error::Numerical(format!("channel not trace preserving (deviation {dev:e})")));
        }
        Ok(ChannelChoi { op, d_in, d_out })
    }

    /// Choi operator of the channel with the given Kraus operators.
    pub fn from_kraus(kraus: &[CMat]) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::domain("no Kraus operators"))?;
        let (d_out, d_in) = (first.nrows(), first.ncols());
        let mut vec_phi = DVector::<Complex64>::zeros(d_in * d_in);
        for i in 0..d_in {
            vec_phi[i * d_in + i] = ONE;
        }
        let mut g = CMat::zeros(d_in * d_out, d_in * d_out);
        for k in kraus {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(Error::dim("Kraus operators have inconsistent shapes"));
            }
            let v = kron(&identity(d_in), k) * &vec_phi;
            g += &v * v.adjoint();
        }
        ChannelChoi::new(g, d_in, d_out)
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Block `N(|i⟩⟨j|)` of the Choi operator.
    fn block(&self, i: usize, j: usize) -> CMat {
        self.matrix()
            .view((i * self.d_out, j * self.d_out), (self.d_out, self.d_out))
            .into_owned()
    }

    /// Applies the channel to a single-system operator.
    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        if x.nrows() != self.d_in {
            return Err(Error::dim(format!("input is {}-dimensional, channel expects {}", x.nrows(), self.d_in)));
        }
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for i in 0..self.d_in {
            for j in 0..self.d_in {
                if x[(i, j)] != ZERO {
                    out += self.block(i, j) * x[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// Sequential composition `other ∘ self`.
    pub fn then(&self, other: &ChannelChoi) -> Result<ChannelChoi> {
        let out = apply_choi(other, self.matrix(), &[self.d_in, self.d_out], 1)?;
        ChannelChoi::new(out, self.d_in, other.d_out)
    }

    /// The normalised Choi state `Γ / d_in`.
    pub fn choi_state(&self) -> BipartiteState {
        let m = self.matrix().scale(1.0 / self.d_in as f64);
        BipartiteState { op: HermitianOperator { m }, da: self.d_in, db: self.d_out }
    }
}

/// Applies a channel on subsystem `sys` of a multipartite operator.
pub fn apply_choi(ch: &ChannelChoi, m: &CMat, dims: &[usize], sys: usize) -> Result<CMat> {
    if sys >= dims.len() || dims[sys] != ch.d_in {
        return Err(Error::dim(format!("subsystem {sys} of {dims:?} does not match channel input {}", ch.d_in)));
    }
    let k = dims.len();
    let mut perm: Vec<usize> = (0..k).filter(|&s| s != sys).collect();
    perm.push(sys);
    let moved = permute_subsystems(m, dims, &perm)?;
    let rest: usize = dims.iter().enumerate().filter(|&(s, _)| s != sys).map(|(_, d)| d).product();
    let (din, dout) = (ch.d_in, ch.d_out);
    let mut out = CMat::zeros(rest * dout, rest * dout);
    for i in 0..din {
        for j in 0..din {
            let blk = ch.block(i, j);
            for a in 0..rest {
                for b in 0..rest {
                    let x = moved[(a * din + i, b * din + j)];
                    if x == ZERO {
                        continue;
                    }
                    for r in 0..dout {
                        for s in 0..dout {
                            out[(a * dout + r, b * dout + s)] += x * blk[(r, s)];
                        }
                    }
                }
            }
        }
    }
    let mut new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    *new_dims.last_mut().expect("nonempty") = dout;
    let mut inverse = vec![0; k];
    for (q, &p) in perm.iter().enumerate() {
        inverse[p] = q;
    }
    permute_subsystems(&out, &new_dims, &inverse)
}

/// Applies a channel to one side of a bipartite state.
pub fn apply_channel(ch: &ChannelChoi, rho: &BipartiteState, act_on: Subsystem) -> Result<BipartiteState> {
    let (sys, da, db) = match act_on {
        Subsystem::A => (0, ch.d_out, rho.db),
        Subsystem::B => (1, rho.da, ch.d_out),
    };
    let out = apply_choi(ch, rho.matrix(), &[rho.da, rho.db], sys)?;
    BipartiteState::new(out, da, db)
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::domain(format!("dimension {d} must be at least 2")));
    }
    Ok(())
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::domain(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

fn phi_matrix(d: usize) -> CMat {
    let mut m = CMat::zeros(d * d, d * d);
    let v = 1.0 / d as f64;
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = c(v, 0.0);
        }
    }
    m
}

/// `Φ^d`, the maximally entangled state of Schmidt rank `d`.
pub fn max_entangled(d: usize) -> Result<BipartiteState> {
    check_d(d)?;
    Ok(BipartiteState { op: HermitianOperator { m: phi_matrix(d) }, da: d, db: d })
}

/// `F Φ^d + (1 − F)(I − Φ^d)/(d² − 1)`.
pub fn isotropic(fid: f64, d: usize) -> Result<BipartiteState> {
    check_d(d)?;
    check_prob("F", fid)?;
    let phi = phi_matrix(d);
    let n = d * d;
    let m = phi.scale(fid) + (identity(n) - &phi).scale((1.0 - fid) / (n as f64 - 1.0));
    Ok(BipartiteState { op: HermitianOperator { m }, da: d, db: d })
}

/// `(1 − p) Φ^d + p (I/d) ⊗ |e⟩⟨e|` with `B` of dimension `d + 1`.
pub fn erased_state(p: f64, d: usize) -> Result<BipartiteState> {
    check_d(d)?;
    check_prob("p", p)?;
    let db = d + 1;
    let mut m = CMat::zeros(d * db, d * db);
    let v = (1.0 - p) / d as f64;
    for i in 0..d {
        for j in 0..d {
            m[(i * db + i, j * db + j)] = c(v, 0.0);
        }
        m[(i * db + d, i * db + d)] += c(p / d as f64, 0.0);
    }
    Ok(BipartiteState { op: HermitianOperator { m }, da: d, db })
}

/// Choi operator of the `d`-dimensional erasure channel.
pub fn erasure_channel(p: f64, d: usize) -> Result<ChannelChoi> {
    let st = erased_state(p, d)?;
    let m = st.matrix().scale(d as f64);
    Ok(ChannelChoi { op: HermitianOperator { m }, d_in: d, d_out: d + 1 })
}

/// Choi operator `d Φ^d` of the identity channel.
pub fn identity_channel(d: usize) -> Result<ChannelChoi> {
    check_d(d)?;
    Ok(ChannelChoi { op: HermitianOperator { m: phi_matrix(d).scale(d as f64) }, d_in: d, d_out: d })
}

/// Choi operator `I ⊗ σ` of the replacer channel.
pub fn replacer_channel(d_in: usize, sigma: &CMat) -> Result<ChannelChoi> {
    ChannelChoi::new(kron(&identity(d_in), sigma), d_in, sigma.nrows())
}

/// Fidelity `(Tr √(√σ ρ √σ))²`.
pub fn fidelity(rho: &BipartiteState, sigma: &BipartiteState) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dim("fidelity of states with different dimensions"));
    }
    fidelity_matrices(rho.matrix(), sigma.matrix())
}

pub(crate) fn fidelity_matrices(rho: &CMat, sigma: &CMat) -> Result<f64> {
    let rs = linalg::sqrt_psd(sigma, PSD_TOL)?;
    let inner = &rs * rho * &rs;
    let vals = eigvalsh(&inner);
    if vals[0] < -PSD_TOL {
        return Err(Error::Numerical(format!("fidelity argument not PSD: min eigenvalue {:e}", vals[0])));
    }
    let s: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// The swap `W = Σ |k⟩⟨k'| ⊗ |k'⟩⟨k|` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> Result<HermitianOperator> {
    check_d(d)?;
    let n = d * d;
    let mut m = CMat::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m[(j * d + i, i * d + j)] = ONE;
        }
    }
    Ok(HermitianOperator { m })
}

/// Exact action of the isotropic twirl.
pub fn twirl_to_isotropic(rho: &BipartiteState) -> Result<BipartiteState> {
    let f = rho.singlet_fraction()?.clamp(0.0, 1.0);
    isotropic(f, rho.da)
}

/// Heisenberg–Weyl operator `Z^z X^x` on `C^d`.
pub fn heisenberg_weyl(d: usize, z: usize, x: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    for k in 0..d {
        let phase = 2.0 * std::f64::consts::PI * ((z * ((k + x) % d)) as f64) / d as f64;
        m[((k + x) % d, k)] = c(phase.cos(), phase.sin());
    }
    m
}

/// Teleports the `A'` half of `target = ρ_{AA'}` through `resource = ω_{A₀B₀}`
/// (with `dA₀ = dB₀ = dA'`), yielding a state on `A B₀`.
pub fn apply_teleportation_locc(resource: &BipartiteState, target: &BipartiteState) -> Result<BipartiteState> {
    let d = resource.da;
    if resource.db != d || target.db != d {
        return Err(Error::dim(format!(
            "teleportation needs dA0 = dB0 = dA' (got {}, {}, {})",
            resource.da, resource.db, target.db
        )));
    }
    let da = target.da;
    let dims = [da, d, d, d];
    let joint = kron(target.matrix(), resource.matrix());
    let phi = phi_matrix(d);
    let mut out = CMat::zeros(da * d, da * d);
    for z in 0..d {
        for x in 0..d {
            let w = heisenberg_weyl(d, z, x);
            let wb = embed_local(&w, &dims, 3);
            let corrected = &wb * &joint * dagger(&wb);
            let wa0 = kron(&identity(d), &w);
            let phi_zx = &wa0 * &phi * dagger(&wa0);
            let proj = kron_three(&identity(da), &phi_zx, &identity(d));
            let measured = proj * corrected;
            out += partial_trace(&measured, &dims, &[0, 3])?;
        }
    }
    BipartiteState::new(hermitize(&out), da, d)
}

fn kron_three(a: &CMat, b: &CMat, cc: &CMat) -> CMat {
    kron(&kron(a, b), cc)
}

/// A two-outcome-or-more instrument on `A` followed by an outcome-dependent
/// channel on `B`: `ρ ↦ Σ_x (E^x ⊗ D^x)(ρ)`.
#[derive(Debug, Clone)]
pub struct OneWayLocc {
    /// Kraus operators of each instrument branch on `A`.
    pub instrument: Vec<Vec<CMat>>,
    /// Kraus operators of the conditional channel on `B`, one set per outcome.
    pub decoders: Vec<Vec<CMat>>,
}

impl OneWayLocc {
    pub fn apply(&self, rho: &BipartiteState) -> Result<BipartiteState> {
        if self.instrument.len() != self.decoders.len() || self.instrument.is_empty() {
            return Err(Error::domain("instrument and decoders must have matching nonzero outcome counts"));
        }
        let mut out: Option<CMat> = None;
        let (mut da, mut db) = (0, 0);
        for (branch, dec) in self.instrument.iter().zip(&self.decoders) {
            for e in branch {
                for k in dec {
                    if e.ncols() != rho.da || k.ncols() != rho.db {
                        return Err(Error::dim("one-way LOCC Kraus operator does not match state"));
                    }
                    let op = kron(e, k);
                    let term = &op * rho.matrix() * dagger(&op);
                    (da, db) = (e.nrows(), k.nrows());
                    out = Some(match out {
                        Some(acc) => acc + term,
                        None => term,
                    });
                }
            }
        }
        BipartiteState::new(hermitize(&out.expect("nonempty")), da, db)
    }
}
