//! Homogeneous self-dual interior-point method with Nesterov–Todd scaling
//! and Mehrotra predictor-corrector steps.
//!
//! Embedding: `Ax − bτ = 0`, `cτ − A'y − s = 0`, `b'y − c'x − κ = 0` with
//! `x, s ∈ K` (`s` vanishes on free entries) and `τ, κ ≥ 0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::dense::{axpy, dot, mat, norm, svec_into, GuardedCholesky};
use super::problem::{svec_len, SdpProblem, Sense};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    /// Progress stalled before `tol` was reached, but the best iterate meets
    /// [`NEAR_OPTIMAL_FACTOR`]` · tol` on residuals and gap.
    NearOptimal,
    /// The primal problem is infeasible (dual certificate found).
    Infeasible,
    /// The primal problem is unbounded (primal ray found).
    Unbounded,
    NumericalTrouble,
}

/// Loosening applied to `tol` when accepting a stalled solve.
pub const NEAR_OPTIMAL_FACTOR: f64 = 1e3;

/// Iterations without improvement after which a near-optimal solve stops.
const STALL_WINDOW: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative tolerance on residuals and duality gap.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 150, step_factor: 0.99 }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions { tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// Primal objective (including the offset) in the problem's own sense;
    /// NaN unless a primal point was found.
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    /// Primal PSD blocks as symmetric matrices.
    #[serde(skip)]
    pub block_values: Vec<DMatrix<f64>>,
    kappa: f64,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Optimal or near-optimal.
    pub fn is_usable(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }

    /// The primal value of a usable solve, or an error carrying the status.
    pub fn value(&self, context: &str) -> Result<f64> {
        if self.is_usable() {
            Ok(self.primal)
        } else {
            Err(Error::Solver { status: self.status, context: context.to_string() })
        }
    }
}

pub fn solve(p: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    solve_with(p, &SolverOptions::with_tol(tol))
}

pub fn solve_with(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    check_opts(opts)?;
    p.validate()?;
    let data = Data::new(p);
    let it = data.initial_point();
    Ok(data.run(it, opts))
}

/// Restarts from a previous solution of the same problem.
pub fn solve_from(p: &SdpProblem, prev: &SdpSolution, opts: &SolverOptions) -> Result<SdpSolution> {
    check_opts(opts)?;
    p.validate()?;
    let data = Data::new(p);
    if prev.x.len() != data.n || prev.s.len() != data.n || prev.y.len() != data.m {
        return Err(Error::dim("warm start does not match problem"));
    }
    let it = Iterate { x: prev.x.clone(), y: prev.y.clone(), s: prev.s.clone(), tau: 1.0, kappa: prev.kappa.max(1e-300) };
    Ok(data.run(it, opts))
}

fn check_opts(opts: &SolverOptions) -> Result<()> {
    if !(opts.tol >= 1e-12 && opts.tol <= 1e-2) {
        return Err(Error::domain(format!("solver tolerance {} outside [1e-12, 1e-2]", opts.tol)));
    }
    if !(opts.step_factor > 0.0 && opts.step_factor < 1.0) {
        return Err(Error::domain("step factor must lie in (0, 1)"));
    }
    Ok(())
}

#[derive(Clone)]
struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Residuals {
    rp: Vec<f64>,
    rd: Vec<f64>,
    rg: f64,
}

struct BlockScaling {
    r: DMatrix<f64>,
    rinv: DMatrix<f64>,
    w: DMatrix<f64>,
    lam: Vec<f64>,
}

struct Scaling {
    lp_w: Vec<f64>,
    lp_lam: Vec<f64>,
    blocks: Vec<BlockScaling>,
}

/// A vector of the cone part in scaled (λ) coordinates.
struct ScaledVec {
    lp: Vec<f64>,
    blocks: Vec<DMatrix<f64>>,
}

struct Direction {
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Factor {
    m_mat: DMatrix<f64>,
    chol: GuardedCholesky,
    af: Vec<Vec<f64>>,
    minv_af: Vec<Vec<f64>>,
    schur: Option<GuardedCholesky>,
}

/// Symmetric `(i, j, value)` entries of one constraint row inside a PSD block.
type RowEntries = Vec<(usize, usize, f64)>;

struct Data<'a> {
    p: &'a SdpProblem,
    m: usize,
    n: usize,
    nf: usize,
    nl: usize,
    psd: Vec<usize>,
    off: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
    c: Vec<f64>,
    b: Vec<f64>,
    sign: f64,
    /// Per PSD block: each touching row with its full symmetric entries.
    block_rows: Vec<Vec<(usize, RowEntries)>>,
}

impl<'a> Data<'a> {
    fn new(p: &'a SdpProblem) -> Self {
        let m = p.n_rows;
        let n = p.n_cols();
        let mut trip = p.a.clone();
        trip.sort_by_key(|x| (x.0, x.1));
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut i = 0;
        while i < trip.len() {
            let (r, c, mut v) = trip[i];
            let mut j = i + 1;
            while j < trip.len() && trip[j].0 == r && trip[j].1 == c {
                v += trip[j].2;
                j += 1;
            }
            if v != 0.0 {
                rows[r].push((c, v));
            }
            i = j;
        }
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                cols[c].push((r, v));
            }
        }
        let sign = match p.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let c: Vec<f64> = p.c.iter().map(|v| sign * v).collect();
        let off = p.cones.psd_offsets();
        let psd = p.cones.psd.clone();
        let mut block_rows = Vec::with_capacity(psd.len());
        for (bi, &nb) in psd.iter().enumerate() {
            let start = off[bi];
            let end = start + svec_len(nb);
            let mut coord = Vec::with_capacity(end - start);
            for cc in 0..nb {
                for rr in cc..nb {
                    coord.push((rr, cc));
                }
            }
            let mut per_row: Vec<(usize, RowEntries)> = Vec::new();
            for (r, row) in rows.iter().enumerate() {
                let mut ent = Vec::new();
                for &(c, v) in row {
                    if c >= start && c < end {
                        let (rr, cc) = coord[c - start];
                        if rr == cc {
                            ent.push((rr, rr, v));
                        } else {
                            let h = v / std::f64::consts::SQRT_2;
                            ent.push((rr, cc, h));
                            ent.push((cc, rr, h));
                        }
                    }
                }
                if !ent.is_empty() {
                    per_row.push((r, ent));
                }
            }
            block_rows.push(per_row);
        }
        Data {
            p,
            m,
            n,
            nf: p.cones.free,
            nl: p.cones.nonneg,
            psd,
            off,
            rows,
            cols,
            c,
            b: p.b.clone(),
            sign,
            block_rows,
        }
    }

    fn initial_point(&self) -> Iterate {
        let mut e = vec![0.0; self.n];
        for v in &mut e[self.nf..self.nf + self.nl] {
            *v = 1.0;
        }
        for (bi, &nb) in self.psd.iter().enumerate() {
            let o = self.off[bi];
            for cc in 0..nb {
                e[o + super::problem::svec_index(nb, cc, cc)] = 1.0;
            }
        }
        Iterate { x: e.clone(), y: vec![0.0; self.m], s: e, tau: 1.0, kappa: 1.0 }
    }

    fn a_mul(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|&(c, v)| v * x[c]).sum()).collect()
    }

    fn at_mul(&self, y: &[f64]) -> Vec<f64> {
        self.cols.iter().map(|col| col.iter().map(|&(r, v)| v * y[r]).sum()).collect()
    }

    fn residuals(&self, it: &Iterate) -> Residuals {
        let mut rp = self.a_mul(&it.x);
        axpy(-it.tau, &self.b, &mut rp);
        let aty = self.at_mul(&it.y);
        let rd: Vec<f64> = (0..self.n).map(|j| self.c[j] * it.tau - aty[j] - it.s[j]).collect();
        let rg = dot(&self.b, &it.y) - dot(&self.c, &it.x) - it.kappa;
        Residuals { rp, rd, rg }
    }

    fn cone_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        dot(&a[self.nf..], &b[self.nf..])
    }

    fn scaling(&self, it: &Iterate) -> Option<Scaling> {
        let lp = self.nf..self.nf + self.nl;
        let mut lp_w = Vec::with_capacity(self.nl);
        let mut lp_lam = Vec::with_capacity(self.nl);
        for j in lp {
            let (x, s) = (it.x[j], it.s[j]);
            if !(x > 0.0 && s > 0.0) {
                return None;
            }
            lp_w.push((x / s).sqrt());
            lp_lam.push((x * s).sqrt());
        }
        let mut blocks = Vec::with_capacity(self.psd.len());
        for (bi, &nb) in self.psd.iter().enumerate() {
            let o = self.off[bi];
            let len = svec_len(nb);
            let xm = mat(nb, &it.x[o..o + len]);
            let sm = mat(nb, &it.s[o..o + len]);
            let lx = xm.cholesky()?.l();
            let ls = sm.cholesky()?.l();
            let prod = ls.transpose() * &lx;
            let svd = prod.svd(true, true);
            let u = svd.u?;
            let vt = svd.v_t?;
            let lam: Vec<f64> = svd.singular_values.iter().copied().collect();
            if lam.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
                return None;
            }
            let isq = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(nb, lam.iter().map(|l| 1.0 / l.sqrt())));
            let r = &lx * vt.transpose() * &isq;
            let rinv = &isq * u.transpose() * ls.transpose();
            let w = &r * r.transpose();
            blocks.push(BlockScaling { r, rinv, w, lam });
        }
        Some(Scaling { lp_w, lp_lam, blocks })
    }

    /// `D v` on the cone part (free part of the result is zero).
    fn apply_d(&self, sc: &Scaling, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (k, w) in sc.lp_w.iter().enumerate() {
            let j = self.nf + k;
            out[j] = w * w * v[j];
        }
        for (bi, &nb) in self.psd.iter().enumerate() {
            let o = self.off[bi];
            let len = svec_len(nb);
            let vm = mat(nb, &v[o..o + len]);
            let w = &sc.blocks[bi].w;
            let r = w * vm * w;
            svec_into(&r, &mut out[o..o + len]);
        }
        out
    }

    /// `𝒲ᵀ(λ \ d)`.
    fn unscale_div(&self, sc: &Scaling, d: &ScaledVec) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for k in 0..self.nl {
            out[self.nf + k] = sc.lp_w[k] * d.lp[k] / sc.lp_lam[k];
        }
        for (bi, &nb) in self.psd.iter().enumerate() {
            let bs = &sc.blocks[bi];
            let y = DMatrix::from_fn(nb, nb, |i, j| 2.0 * d.blocks[bi][(i, j)] / (bs.lam[i] + bs.lam[j]));
            let u = &bs.r * y * bs.r.transpose();
            let o = self.off[bi];
            svec_into(&u, self.slice_mut(&mut out, bi, o));
        }
        out
    }

    fn slice_mut<'v>(&self, v: &'v mut [f64], bi: usize, o: usize) -> &'v mut [f64] {
        &mut v[o..o + svec_len(self.psd[bi])]
    }

    /// `(𝒲⁻ᵀ dx, 𝒲 ds)` in scaled coordinates.
    fn scaled_pair(&self, sc: &Scaling, dx: &[f64], ds: &[f64]) -> (ScaledVec, ScaledVec) {
        let mut px = ScaledVec { lp: Vec::with_capacity(self.nl), blocks: Vec::new() };
        let mut ps = ScaledVec { lp: Vec::with_capacity(self.nl), blocks: Vec::new() };
        for k in 0..self.nl {
            let j = self.nf + k;
            px.lp.push(dx[j] / sc.lp_w[k]);
            ps.lp.push(ds[j] * sc.lp_w[k]);
        }
        for (bi, &nb) in self.psd.iter().enumerate() {
            let o = self.off[bi];
            let len = svec_len(nb);
            let bs = &sc.blocks[bi];
            let xm = mat(nb, &dx[o..o + len]);
            let sm = mat(nb, &ds[o..o + len]);
            px.blocks.push(&bs.rinv * xm * bs.rinv.transpose());
            ps.blocks.push(bs.r.transpose() * sm * &bs.r);
        }
        (px, ps)
    }

    fn form_m(&self, sc: &Scaling) -> DMatrix<f64> {
        let m = self.m;
        let mut mm = DMatrix::<f64>::zeros(m, m);
        for k in 0..self.nl {
            let j = self.nf + k;
            let d = sc.lp_w[k] * sc.lp_w[k];
            let col = &self.cols[j];
            for &(r1, v1) in col {
                for &(r2, v2) in col {
                    if r2 >= r1 {
                        mm[(r1, r2)] += v1 * d * v2;
                    }
                }
            }
        }
        for (bi, &nb) in self.psd.iter().enumerate() {
            let w = &sc.blocks[bi].w;
            let rows = &self.block_rows[bi];
            let mut t = DMatrix::<f64>::zeros(nb, nb);
            for (pj, (rj, ej)) in rows.iter().enumerate() {
                t.fill(0.0);
                for &(a, b, v) in ej {
                    for q in 0..nb {
                        let wqa = v * w[(q, a)];
                        if wqa == 0.0 {
                            continue;
                        }
                        for r in 0..nb {
                            t[(q, r)] += wqa * w[(b, r)];
                        }
                    }
                }
                for (ri, ei) in rows[..=pj].iter() {
                    let mut s = 0.0;
                    for &(a, b, v) in ei {
                        s += v * t[(a, b)];
                    }
                    mm[(*ri, *rj)] += s;
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                mm[(i, j)] = mm[(j, i)];
            }
        }
        mm
    }

    fn factor(&self, sc: &Scaling) -> Factor {
        let m_mat = self.form_m(sc);
        let chol = GuardedCholesky::new(&m_mat, 1e-15);
        let af: Vec<Vec<f64>> = (0..self.nf)
            .map(|j| {
                let mut col = vec![0.0; self.m];
                for &(r, v) in &self.cols[j] {
                    col[r] = v;
                }
                col
            })
            .collect();
        let minv_af: Vec<Vec<f64>> = af
            .iter()
            .map(|col| {
                let mut z = col.clone();
                chol.solve_in_place(&mut z);
                z
            })
            .collect();
        let schur = (self.nf > 0).then(|| {
            let s = DMatrix::from_fn(self.nf, self.nf, |i, j| dot(&af[i], &minv_af[j]));
            let s = (&s + s.transpose()) * 0.5;
            GuardedCholesky::new(&s, 1e-15)
        });
        Factor { m_mat, chol, af, minv_af, schur }
    }

    /// Solves `[[M, A_F], [A_Fᵀ, 0]] [dy; v] = [r1; r2]`.
    fn kkt_solve_once(&self, f: &Factor, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut t = r1.to_vec();
        f.chol.solve_in_place(&mut t);
        match &f.schur {
            None => (t, Vec::new()),
            Some(sch) => {
                let mut v: Vec<f64> = (0..self.nf).map(|j| dot(&f.af[j], &t) - r2[j]).collect();
                sch.solve_in_place(&mut v);
                for (j, vj) in v.iter().enumerate() {
                    axpy(-vj, &f.minv_af[j], &mut t);
                }
                (t, v)
            }
        }
    }

    fn kkt_solve(&self, f: &Factor, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (mut dy, mut v) = self.kkt_solve_once(f, r1, r2);
        for _ in 0..3 {
            let mdy = &f.m_mat * nalgebra::DVector::from_column_slice(&dy);
            let mut e1: Vec<f64> = (0..self.m).map(|i| r1[i] - mdy[i]).collect();
            for (j, vj) in v.iter().enumerate() {
                axpy(-vj, &f.af[j], &mut e1);
            }
            let e2: Vec<f64> = (0..self.nf).map(|j| r2[j] - dot(&f.af[j], &dy)).collect();
            let scale = norm(r1).max(norm(r2)).max(1e-300);
            if norm(&e1).max(norm(&e2)) <= 1e-15 * scale {
                break;
            }
            let (cy, cv) = self.kkt_solve_once(f, &e1, &e2);
            axpy(1.0, &cy, &mut dy);
            axpy(1.0, &cv, &mut v);
        }
        (dy, v)
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        it: &Iterate,
        sc: &Scaling,
        f: &Factor,
        res: &Residuals,
        eta: f64,
        dc: &ScaledVec,
        d_tau: f64,
    ) -> Direction {
        let nf = self.nf;
        let u = self.unscale_div(sc, dc);
        let mut rdc = res.rd.clone();
        rdc[..nf].iter_mut().for_each(|v| *v = 0.0);
        let d_rdc = self.apply_d(sc, &rdc);
        let mut cc = self.c.clone();
        cc[..nf].iter_mut().for_each(|v| *v = 0.0);
        let d_cc = self.apply_d(sc, &cc);

        let au = self.a_mul(&u);
        let ad_rdc = self.a_mul(&d_rdc);
        let r1: Vec<f64> = (0..self.m).map(|i| -eta * res.rp[i] - au[i] + eta * ad_rdc[i]).collect();
        let r2: Vec<f64> = (0..nf).map(|j| eta * res.rd[j]).collect();
        let ad_cc = self.a_mul(&d_cc);
        let q1: Vec<f64> = (0..self.m).map(|i| ad_cc[i] + self.b[i]).collect();
        let q2: Vec<f64> = self.c[..nf].to_vec();

        let (dy0, f0) = self.kkt_solve(f, &r1, &r2);
        let (dy1, f1) = self.kkt_solve(f, &q1, &q2);

        let at0 = self.at_mul(&dy0);
        let dat0 = self.apply_d(sc, &at0);
        let mut xc0 = u;
        axpy(1.0, &dat0, &mut xc0);
        axpy(-eta, &d_rdc, &mut xc0);
        let mut at1 = self.at_mul(&dy1);
        axpy(-1.0, &cc, &mut at1);
        let xc1 = self.apply_d(sc, &at1);

        let cf0: f64 = dot(&self.c[..nf], &f0);
        let cf1: f64 = dot(&self.c[..nf], &f1);
        let num = -eta * res.rg - dot(&self.b, &dy0) + self.cone_dot(&cc, &xc0) + cf0 + d_tau / it.tau;
        let den = dot(&self.b, &dy1) - self.cone_dot(&cc, &xc1) - cf1 + it.kappa / it.tau;
        let dtau = num / den;

        let mut dy = dy0;
        axpy(dtau, &dy1, &mut dy);
        let mut dx = xc0;
        axpy(dtau, &xc1, &mut dx);
        for j in 0..nf {
            dx[j] = f0[j] + dtau * f1[j];
        }
        let aty = self.at_mul(&dy);
        let mut ds = vec![0.0; self.n];
        for j in nf..self.n {
            ds[j] = -aty[j] + self.c[j] * dtau + eta * res.rd[j];
        }
        let dkappa = (d_tau - it.kappa * dtau) / it.tau;
        Direction { x: dx, y: dy, s: ds, tau: dtau, kappa: dkappa }
    }

    fn max_step(&self, it: &Iterate, sc: &Scaling, dir: &Direction) -> f64 {
        let mut alpha = f64::INFINITY;
        for k in 0..self.nl {
            let j = self.nf + k;
            if dir.x[j] < 0.0 {
                alpha = alpha.min(-it.x[j] / dir.x[j]);
            }
            if dir.s[j] < 0.0 {
                alpha = alpha.min(-it.s[j] / dir.s[j]);
            }
        }
        if dir.tau < 0.0 {
            alpha = alpha.min(-it.tau / dir.tau);
        }
        if dir.kappa < 0.0 {
            alpha = alpha.min(-it.kappa / dir.kappa);
        }
        let (px, ps) = self.scaled_pair(sc, &dir.x, &dir.s);
        for (bi, &nb) in self.psd.iter().enumerate() {
            let lam = &sc.blocks[bi].lam;
            for p in [&px.blocks[bi], &ps.blocks[bi]] {
                let q = DMatrix::from_fn(nb, nb, |i, j| p[(i, j)] / (lam[i] * lam[j]).sqrt());
                let q = (&q + q.transpose()) * 0.5;
                let emin = q.symmetric_eigenvalues().min();
                if emin < 0.0 {
                    alpha = alpha.min(-1.0 / emin);
                }
            }
        }
        alpha
    }

    fn lambda_sq_neg(&self, sc: &Scaling) -> ScaledVec {
        ScaledVec {
            lp: sc.lp_lam.iter().map(|l| -l * l).collect(),
            blocks: sc
                .blocks
                .iter()
                .map(|b| DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(b.lam.len(), b.lam.iter().map(|l| -l * l))))
                .collect(),
        }
    }

    fn run(&self, mut it: Iterate, opts: &SolverOptions) -> SdpSolution {
        let tol = opts.tol;
        let nu = self.p.cones.degree() as f64;
        let bnorm = norm(&self.b);
        let cnorm = norm(&self.c);
        let mut stalls = 0;
        let near_tol = NEAR_OPTIMAL_FACTOR * tol;
        let mut best: Option<(f64, usize, Iterate)> = None;
        let trace = std::env::var_os("UNEXT_SDP_TRACE").is_some();
        for iter in 0..=opts.max_iter {
            let res = self.residuals(&it);
            let merit = self.merit(&it, &res, bnorm, cnorm);
            if best.as_ref().is_none_or(|b| merit < b.0) {
                best = Some((merit, iter, it.clone()));
            }
            if trace {
                eprintln!(
                    "it {iter:3} pres {:.2e} dres {:.2e} pobj {:+.10e} dobj {:+.10e} tau {:.2e} kappa {:.2e}",
                    norm(&res.rp) / it.tau / (1.0 + bnorm),
                    norm(&res.rd) / it.tau / (1.0 + cnorm),
                    dot(&self.c, &it.x) / it.tau,
                    dot(&self.b, &it.y) / it.tau,
                    it.tau,
                    it.kappa
                );
            }
            if let Some(sol) = self.check(&it, &res, tol, bnorm, cnorm, iter) {
                return sol;
            }
            if iter == opts.max_iter {
                break;
            }
            if let Some((m, bi, _)) = &best {
                if *m <= near_tol && iter - bi >= STALL_WINDOW {
                    break;
                }
            }
            let Some(sc) = self.scaling(&it) else {
                if trace {
                    eprintln!("scaling failed");
                }
                break;
            };
            let fac = self.factor(&sc);
            let mu = (self.cone_dot(&it.x, &it.s) + it.tau * it.kappa) / (nu + 1.0);

            let dc_aff = self.lambda_sq_neg(&sc);
            let aff = self.direction(&it, &sc, &fac, &res, 1.0, &dc_aff, -it.tau * it.kappa);
            let a_aff = self.max_step(&it, &sc, &aff).min(1.0);
            let sigma = (1.0 - a_aff).powi(3).clamp(0.0, 1.0);

            let (px, ps) = self.scaled_pair(&sc, &aff.x, &aff.s);
            let mut dc = self.lambda_sq_neg(&sc);
            for k in 0..self.nl {
                dc.lp[k] += -px.lp[k] * ps.lp[k] + sigma * mu;
            }
            for bi in 0..self.psd.len() {
                let jp = (&px.blocks[bi] * &ps.blocks[bi] + &ps.blocks[bi] * &px.blocks[bi]) * 0.5;
                dc.blocks[bi] -= jp;
                for i in 0..self.psd[bi] {
                    dc.blocks[bi][(i, i)] += sigma * mu;
                }
            }
            let d_tau = -it.tau * it.kappa - aff.tau * aff.kappa + sigma * mu;
            let dir = self.direction(&it, &sc, &fac, &res, 1.0 - sigma, &dc, d_tau);
            let alpha = (opts.step_factor * self.max_step(&it, &sc, &dir)).min(1.0);
            if trace {
                eprintln!("    alpha_aff {a_aff:.3e} sigma {sigma:.3e} alpha {alpha:.3e}");
            }
            if !alpha.is_finite() || alpha < 1e-10 {
                stalls += 1;
                if stalls >= 3 || !alpha.is_finite() {
                    break;
                }
                continue;
            }
            stalls = 0;
            axpy(alpha, &dir.x, &mut it.x);
            axpy(alpha, &dir.y, &mut it.y);
            axpy(alpha, &dir.s, &mut it.s);
            it.tau += alpha * dir.tau;
            it.kappa += alpha * dir.kappa;
        }
        if let Some((m, iter, b)) = best {
            if m <= near_tol {
                let res = self.residuals(&b);
                return self.normalized(&b, &res, bnorm, cnorm, iter, SolveStatus::NearOptimal);
            }
        }
        let res = self.residuals(&it);
        let mut sol = self.normalized(&it, &res, bnorm, cnorm, opts.max_iter, SolveStatus::NumericalTrouble);
        sol.iterations = opts.max_iter.min(sol.iterations);
        sol
    }

    /// Largest of the relative primal residual, dual residual and gap.
    fn merit(&self, it: &Iterate, res: &Residuals, bnorm: f64, cnorm: f64) -> f64 {
        let pres = norm(&res.rp) / it.tau / (1.0 + bnorm);
        let dres = norm(&res.rd) / it.tau / (1.0 + cnorm);
        let pobj = dot(&self.c, &it.x) / it.tau;
        let dobj = dot(&self.b, &it.y) / it.tau;
        let gap = (pobj - dobj).abs() / pobj.abs().max(1.0);
        let m = pres.max(dres).max(gap);
        if m.is_finite() { m } else { f64::INFINITY }
    }

    fn check(&self, it: &Iterate, res: &Residuals, tol: f64, bnorm: f64, cnorm: f64, iter: usize) -> Option<SdpSolution> {
        let pres = norm(&res.rp) / it.tau / (1.0 + bnorm);
        let dres = norm(&res.rd) / it.tau / (1.0 + cnorm);
        let pobj = dot(&self.c, &it.x) / it.tau;
        let dobj = dot(&self.b, &it.y) / it.tau;
        if pres <= tol && dres <= tol && (pobj - dobj).abs() <= tol * pobj.abs().max(1.0) {
            return Some(self.normalized(it, res, bnorm, cnorm, iter, SolveStatus::Optimal));
        }
        let by = dot(&self.b, &it.y);
        if by > 0.0 {
            let aty = self.at_mul(&it.y);
            let cert: Vec<f64> = (0..self.n).map(|j| aty[j] + it.s[j]).collect();
            if norm(&cert) / by <= tol {
                return Some(self.certificate(it, iter, SolveStatus::Infeasible));
            }
        }
        let cx = dot(&self.c, &it.x);
        if cx < 0.0 && norm(&self.a_mul(&it.x)) / -cx <= tol {
            return Some(self.certificate(it, iter, SolveStatus::Unbounded));
        }
        None
    }

    fn certificate(&self, it: &Iterate, iter: usize, status: SolveStatus) -> SdpSolution {
        SdpSolution {
            status,
            primal: f64::NAN,
            dual: f64::NAN,
            gap: f64::NAN,
            iterations: iter,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            x: it.x.clone(),
            y: it.y.clone(),
            s: it.s.clone(),
            block_values: Vec::new(),
            kappa: it.kappa,
        }
    }

    fn normalized(&self, it: &Iterate, res: &Residuals, bnorm: f64, cnorm: f64, iter: usize, status: SolveStatus) -> SdpSolution {
        let t = it.tau;
        let x: Vec<f64> = it.x.iter().map(|v| v / t).collect();
        let y: Vec<f64> = it.y.iter().map(|v| v / t).collect();
        let s: Vec<f64> = it.s.iter().map(|v| v / t).collect();
        let primal = self.sign * dot(&self.c, &x) + self.p.offset;
        let dual = self.sign * dot(&self.b, &y) + self.p.offset;
        let block_values = self
            .psd
            .iter()
            .enumerate()
            .map(|(bi, &nb)| mat(nb, &x[self.off[bi]..self.off[bi] + svec_len(nb)]))
            .collect();
        SdpSolution {
            status,
            primal,
            dual,
            gap: (primal - dual).abs(),
            iterations: iter,
            primal_residual: norm(&res.rp) / t / (1.0 + bnorm),
            dual_residual: norm(&res.rd) / t / (1.0 + cnorm),
            x,
            y,
            s,
            block_values,
            kappa: it.kappa / t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::problem::ConeSpec;

    fn lambda_le_identity() -> SdpProblem {
        // maximize λ s.t. S = I − λI ⪰ 0, variables [λ (free), svec(S)]
        SdpProblem {
            sense: Sense::Maximize,
            cones: ConeSpec { free: 1, nonneg: 0, psd: vec![2] },
            block_labels: vec!["S".into()],
            c: vec![1.0, 0.0, 0.0, 0.0],
            offset: 0.0,
            a: vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 3, 1.0), (2, 2, 1.0)],
            b: vec![1.0, 1.0, 0.0],
            n_rows: 3,
        }
    }

    #[test]
    fn lambda_identity() {
        let sol = solve(&lambda_le_identity(), 1e-9).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal - 1.0).abs() < 1e-7, "{sol:?}");
        assert!((sol.dual - 1.0).abs() < 1e-7);
    }

    #[test]
    fn diagonal_forcing() {
        // minimize Tr X s.t. X00 = 2, X11 = 3
        let p = SdpProblem {
            sense: Sense::Minimize,
            cones: ConeSpec { free: 0, nonneg: 0, psd: vec![2] },
            block_labels: vec!["X".into()],
            c: vec![1.0, 0.0, 1.0],
            offset: 0.0,
            a: vec![(0, 0, 1.0), (1, 2, 1.0)],
            b: vec![2.0, 3.0],
            n_rows: 2,
        };
        let sol = solve(&p, 1e-9).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal - 5.0).abs() < 1e-7);
        let x = &sol.block_values[0];
        assert!((x[(0, 0)] - 2.0).abs() < 1e-6 && (x[(1, 1)] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn lp_infeasible_and_unbounded() {
        // x ≥ 0, x = −1
        let p = SdpProblem {
            sense: Sense::Minimize,
            cones: ConeSpec { free: 0, nonneg: 1, psd: vec![] },
            block_labels: vec![],
            c: vec![1.0],
            offset: 0.0,
            a: vec![(0, 0, 1.0)],
            b: vec![-1.0],
            n_rows: 1,
        };
        assert_eq!(solve(&p, 1e-8).unwrap().status, SolveStatus::Infeasible);
        // minimize −x1 s.t. x1 − x2 = 0, x ≥ 0
        let q = SdpProblem {
            sense: Sense::Minimize,
            cones: ConeSpec { free: 0, nonneg: 2, psd: vec![] },
            block_labels: vec![],
            c: vec![-1.0, 0.0],
            offset: 0.0,
            a: vec![(0, 0, 1.0), (0, 1, -1.0)],
            b: vec![0.0],
            n_rows: 1,
        };
        assert_eq!(solve(&q, 1e-8).unwrap().status, SolveStatus::Unbounded);
    }

    #[test]
    fn warm_restart_is_immediate() {
        let p = lambda_le_identity();
        let opts = SolverOptions::with_tol(1e-9);
        let sol = solve_with(&p, &opts).unwrap();
        let again = solve_from(&p, &sol, &opts).unwrap();
        assert_eq!(again.status, SolveStatus::Optimal);
        assert!(again.iterations <= 2);
        assert!((again.primal - sol.primal).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(solve(&lambda_le_identity(), 0.5).is_err());
    }
}
