//! Affine Hermitian matrix expressions over scalar decision variables.
//!
//! In [`Field::Complex`] a Hermitian PSD variable of side `n` is a real PSD
//! cone `X` of side `2n` read as `H = ½[(X₁₁ + X₂₂) + i(X₂₁ − X₁₂)]`. In
//! [`Field::Real`] every matrix variable is real symmetric, which loses no
//! optimality when all problem data are real.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::problem::{svec_index, svec_len, ConeSpec, SdpProblem, Sense};
use super::solver::{solve_with, SdpSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::quantum::linalg::{c, trace_index_maps, subsystem_permutation, CMat, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// `Real` when every matrix has zero imaginary part.
    pub fn for_data<'a>(mats: impl IntoIterator<Item = &'a CMat>) -> Field {
        if mats.into_iter().all(|m| m.iter().all(|z| z.im == 0.0)) {
            Field::Real
        } else {
            Field::Complex
        }
    }
}

type Terms = Vec<(usize, Complex64)>;

/// Real affine scalar `constant + Σ coef · var`.
#[derive(Debug, Clone, Default)]
pub struct Scalar {
    constant: f64,
    terms: Vec<(usize, f64)>,
}

impl Scalar {
    pub fn constant(v: f64) -> Self {
        Scalar { constant: v, terms: Vec::new() }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&o.terms);
        Scalar { constant: self.constant + o.constant, terms }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Scalar {
        Scalar { constant: self.constant * k, terms: self.terms.iter().map(|&(v, a)| (v, a * k)).collect() }
    }

    pub fn plus(&self, k: f64) -> Scalar {
        Scalar { constant: self.constant + k, terms: self.terms.clone() }
    }
}

/// Affine `n × m` complex matrix expression.
#[derive(Debug, Clone)]
pub struct MatExpr {
    rows: usize,
    cols: usize,
    constant: CMat,
    terms: Vec<Terms>,
}

impl MatExpr {
    pub fn from_const(m: &CMat) -> Self {
        MatExpr { rows: m.nrows(), cols: m.ncols(), constant: m.clone(), terms: vec![Vec::new(); m.len()] }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatExpr::from_const(&CMat::zeros(rows, cols))
    }

    /// `M · s` for a constant matrix `M` and an affine scalar `s`.
    pub fn const_times(m: &CMat, s: &Scalar) -> Self {
        let mut e = MatExpr::from_const(&m.scale(s.constant));
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if z != ZERO {
                    let k = e.idx(i, j);
                    e.terms[k] = s.terms.iter().map(|&(v, a)| (v, z * a)).collect();
                }
            }
        }
        e
    }

    /// `s · I_n`.
    pub fn scalar_identity(s: &Scalar, n: usize) -> Self {
        MatExpr::const_times(&CMat::identity(n, n), s)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    /// The constant term.
    pub fn constant_part(&self) -> &CMat {
        &self.constant
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.cols + j
    }

    fn same_shape(&self, o: &MatExpr) -> Result<()> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::dim(format!("{}x{} vs {}x{}", self.rows, self.cols, o.rows, o.cols)));
        }
        Ok(())
    }

    pub fn add(&self, o: &MatExpr) -> Result<MatExpr> {
        self.same_shape(o)?;
        let mut out = self.clone();
        out.constant += &o.constant;
        for (t, ot) in out.terms.iter_mut().zip(&o.terms) {
            t.extend_from_slice(ot);
        }
        Ok(out)
    }

    pub fn sub(&self, o: &MatExpr) -> Result<MatExpr> {
        self.add(&o.scale(-1.0))
    }

    pub fn add_const(&self, m: &CMat) -> Result<MatExpr> {
        self.add(&MatExpr::from_const(m))
    }

    pub fn scale(&self, k: f64) -> MatExpr {
        MatExpr {
            rows: self.rows,
            cols: self.cols,
            constant: self.constant.scale(k),
            terms: self.terms.iter().map(|t| t.iter().map(|&(v, a)| (v, a * k)).collect()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> MatExpr {
        let mut terms = vec![Vec::new(); self.terms.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                terms[j * self.rows + i] = self.terms[self.idx(i, j)].iter().map(|&(v, a)| (v, a.conj())).collect();
            }
        }
        MatExpr { rows: self.cols, cols: self.rows, constant: self.constant.adjoint(), terms }
    }

    /// Real part of the trace.
    pub fn trace(&self) -> Scalar {
        let mut s = Scalar::default();
        for i in 0..self.rows.min(self.cols) {
            s.constant += self.constant[(i, i)].re;
            s.terms.extend(self.terms[self.idx(i, i)].iter().map(|&(v, a)| (v, a.re)));
        }
        s
    }

    /// Partial trace of a square expression on subsystems `dims`.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<MatExpr> {
        if self.rows != self.cols || dims.iter().product::<usize>() != self.rows {
            return Err(Error::dim(format!("dims {dims:?} do not match a {}x{} expression", self.rows, self.cols)));
        }
        let constant = crate::quantum::linalg::partial_trace(&self.constant, dims, keep)?;
        let (ko, to) = trace_index_maps(dims, keep);
        let n = ko.len();
        let mut terms = vec![Vec::new(); n * n];
        for (a, &oa) in ko.iter().enumerate() {
            for (b, &ob) in ko.iter().enumerate() {
                let t: &mut Terms = &mut terms[a * n + b];
                for &tr in &to {
                    t.extend_from_slice(&self.terms[self.idx(oa + tr, ob + tr)]);
                }
            }
        }
        Ok(MatExpr { rows: n, cols: n, constant, terms })
    }

    /// Reorders tensor factors of a square expression.
    pub fn permute(&self, dims: &[usize], perm: &[usize]) -> Result<MatExpr> {
        let constant = crate::quantum::linalg::permute_subsystems(&self.constant, dims, perm)?;
        let map = subsystem_permutation(dims, perm);
        let n = map.len();
        let mut terms = vec![Vec::new(); n * n];
        for i in 0..n {
            for j in 0..n {
                terms[i * n + j] = self.terms[self.idx(map[i], map[j])].clone();
            }
        }
        Ok(MatExpr { rows: n, cols: n, constant, terms })
    }

    /// Sub-block with top-left corner `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<MatExpr> {
        if r0 + rows > self.rows || c0 + cols > self.cols {
            return Err(Error::dim("block outside expression"));
        }
        let constant = self.constant.view((r0, c0), (rows, cols)).into_owned();
        let mut terms = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                terms.push(self.terms[self.idx(r0 + i, c0 + j)].clone());
            }
        }
        Ok(MatExpr { rows, cols, constant, terms })
    }

    /// Block matrix `[[a, b], [c, d]]`.
    pub fn block2(a: &MatExpr, b: &MatExpr, cc: &MatExpr, d: &MatExpr) -> Result<MatExpr> {
        if a.rows != b.rows || cc.rows != d.rows || a.cols != cc.cols || b.cols != d.cols {
            return Err(Error::dim("inconsistent 2x2 block shapes"));
        }
        let (rows, cols) = (a.rows + cc.rows, a.cols + b.cols);
        let mut out = MatExpr::zeros(rows, cols);
        for (blk, r0, c0) in [(a, 0, 0), (b, 0, a.cols), (cc, a.rows, 0), (d, a.rows, a.cols)] {
            for i in 0..blk.rows {
                for j in 0..blk.cols {
                    let k = out.idx(r0 + i, c0 + j);
                    out.constant[(r0 + i, c0 + j)] = blk.constant[(i, j)];
                    out.terms[k] = blk.terms[blk.idx(i, j)].clone();
                }
            }
        }
        Ok(out)
    }

    /// `self · M` for a constant `M`.
    pub fn mul_right(&self, m: &CMat) -> Result<MatExpr> {
        if m.nrows() != self.cols {
            return Err(Error::dim("right factor shape mismatch"));
        }
        let (rows, cols) = (self.rows, m.ncols());
        let constant = &self.constant * m;
        let mut terms = vec![Vec::new(); rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                let t: &mut Terms = &mut terms[i * cols + j];
                for k in 0..self.cols {
                    let w = m[(k, j)];
                    if w != ZERO {
                        t.extend(self.terms[self.idx(i, k)].iter().map(|&(var, x)| (var, x * w)));
                    }
                }
            }
        }
        Ok(MatExpr { rows, cols, constant, terms })
    }

    /// `V · self · V†` for a constant `V`.
    pub fn congruence(&self, v: &CMat) -> Result<MatExpr> {
        if v.ncols() != self.rows || self.rows != self.cols {
            return Err(Error::dim("congruence shape mismatch"));
        }
        let n = v.nrows();
        let k = self.rows;
        let constant = v * &self.constant * v.adjoint();
        let mut terms = vec![Vec::new(); n * n];
        for i in 0..n {
            for j in 0..n {
                let t: &mut Terms = &mut terms[i * n + j];
                for a in 0..k {
                    let via = v[(i, a)];
                    if via == ZERO {
                        continue;
                    }
                    for b in 0..k {
                        let w = via * v[(j, b)].conj();
                        if w == ZERO {
                            continue;
                        }
                        t.extend(self.terms[a * k + b].iter().map(|&(var, x)| (var, w * x)));
                    }
                }
            }
        }
        Ok(MatExpr { rows: n, cols: n, constant, terms })
    }

    /// Kronecker product `M ⊗ self` with a constant matrix on the left.
    pub fn const_kron_left(&self, m: &CMat) -> MatExpr {
        let (p, q) = (m.nrows(), m.ncols());
        let mut out = MatExpr::from_const(&m.kronecker(&self.constant));
        for a in 0..p {
            for b in 0..q {
                let z = m[(a, b)];
                if z == ZERO {
                    continue;
                }
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        let k = out.idx(a * self.rows + i, b * self.cols + j);
                        out.terms[k] = self.terms[self.idx(i, j)].iter().map(|&(v, x)| (v, z * x)).collect();
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Free,
    NonNeg,
    Psd(usize),
}

#[derive(Debug, Clone)]
struct Group {
    kind: Kind,
    start: usize,
    len: usize,
    label: String,
}

/// Incrementally built SDP.
#[derive(Debug, Clone)]
pub struct Model {
    field: Field,
    groups: Vec<Group>,
    n_raw: usize,
    rows: Vec<(Vec<(usize, f64)>, f64)>,
    objective: Option<(Sense, Scalar)>,
}

impl Model {
    pub fn new(field: Field) -> Self {
        Model { field, groups: Vec::new(), n_raw: 0, rows: Vec::new(), objective: None }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    fn group(&mut self, kind: Kind, len: usize, label: &str) -> usize {
        let start = self.n_raw;
        self.groups.push(Group { kind, start, len, label: label.to_string() });
        self.n_raw += len;
        start
    }

    pub fn free(&mut self, label: &str) -> Scalar {
        let v = self.group(Kind::Free, 1, label);
        Scalar { constant: 0.0, terms: vec![(v, 1.0)] }
    }

    pub fn nonneg(&mut self, label: &str) -> Scalar {
        let v = self.group(Kind::NonNeg, 1, label);
        Scalar { constant: 0.0, terms: vec![(v, 1.0)] }
    }

    /// Hermitian (or real symmetric) PSD matrix variable of side `n`.
    pub fn psd_var(&mut self, n: usize, label: &str) -> MatExpr {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut e = MatExpr::zeros(n, n);
        match self.field {
            Field::Real => {
                let start = self.group(Kind::Psd(n), svec_len(n), label);
                for i in 0..n {
                    for j in 0..n {
                        let k = start + svec_index(n, i, j);
                        let coef = if i == j { 1.0 } else { inv };
                        e.terms[i * n + j] = vec![(k, c(coef, 0.0))];
                    }
                }
            }
            Field::Complex => {
                let big = 2 * n;
                let start = self.group(Kind::Psd(big), svec_len(big), label);
                let entry = |a: usize, b: usize| -> (usize, f64) {
                    (start + svec_index(big, a, b), if a == b { 1.0 } else { inv })
                };
                for i in 0..n {
                    for j in 0..n {
                        let (k1, w1) = entry(i, j);
                        let (k2, w2) = entry(i + n, j + n);
                        let (k3, w3) = entry(i + n, j);
                        let (k4, w4) = entry(i, j + n);
                        e.terms[i * n + j] = vec![
                            (k1, c(0.5 * w1, 0.0)),
                            (k2, c(0.5 * w2, 0.0)),
                            (k3, c(0.0, 0.5 * w3)),
                            (k4, c(0.0, -0.5 * w4)),
                        ];
                    }
                }
            }
        }
        e
    }

    /// Unconstrained Hermitian (or real symmetric) matrix variable.
    pub fn free_herm(&mut self, n: usize, label: &str) -> MatExpr {
        let count = match self.field {
            Field::Real => svec_len(n),
            Field::Complex => n * n,
        };
        let start = self.group(Kind::Free, count, label);
        let mut e = MatExpr::zeros(n, n);
        let mut next = start;
        for i in 0..n {
            e.terms[i * n + i] = vec![(next, c(1.0, 0.0))];
            next += 1;
            for j in i + 1..n {
                let re = next;
                next += 1;
                match self.field {
                    Field::Real => {
                        e.terms[i * n + j] = vec![(re, c(1.0, 0.0))];
                        e.terms[j * n + i] = vec![(re, c(1.0, 0.0))];
                    }
                    Field::Complex => {
                        let im = next;
                        next += 1;
                        e.terms[i * n + j] = vec![(re, c(1.0, 0.0)), (im, c(0.0, 1.0))];
                        e.terms[j * n + i] = vec![(re, c(1.0, 0.0)), (im, c(0.0, -1.0))];
                    }
                }
            }
        }
        e
    }

    fn push_row(&mut self, terms: &Terms, part: fn(Complex64) -> f64, rhs: f64) {
        let row: Vec<(usize, f64)> = terms.iter().map(|&(v, a)| (v, part(a))).filter(|t| t.1 != 0.0).collect();
        self.rows.push((row, rhs));
    }

    /// `lhs = rhs` entrywise. Square Hermitian-valued expressions contribute
    /// only their upper triangle.
    pub fn eq_const(&mut self, lhs: &MatExpr, rhs: &CMat) -> Result<()> {
        if lhs.rows != rhs.nrows() || lhs.cols != rhs.ncols() {
            return Err(Error::dim("equality shape mismatch"));
        }
        let hermitian = lhs.rows == lhs.cols && is_hermitian_expr(lhs) && {
            let d = rhs - rhs.adjoint();
            d.iter().all(|z| z.norm() <= 1e-14 * (1.0 + rhs.norm()))
        };
        let complex = self.field == Field::Complex;
        for i in 0..lhs.rows {
            for j in 0..lhs.cols {
                if hermitian && j < i {
                    continue;
                }
                let t = &lhs.terms[lhs.idx(i, j)];
                let r = rhs[(i, j)] - lhs.constant[(i, j)];
                self.push_row(t, |z| z.re, r.re);
                if complex && !(hermitian && i == j) {
                    self.push_row(t, |z| z.im, r.im);
                }
            }
        }
        Ok(())
    }

    pub fn eq(&mut self, a: &MatExpr, b: &MatExpr) -> Result<()> {
        let d = a.sub(b)?;
        self.eq_const(&d, &CMat::zeros(d.rows, d.cols))
    }

    pub fn eq_scalar(&mut self, s: &Scalar, rhs: f64) {
        self.rows.push((s.terms.clone(), rhs - s.constant));
    }

    /// `e ⪰ 0` through a PSD slack variable; returns the slack.
    pub fn psd(&mut self, e: &MatExpr, label: &str) -> Result<MatExpr> {
        if e.rows != e.cols {
            return Err(Error::dim("PSD constraint on a non-square expression"));
        }
        let s = self.psd_var(e.rows, label);
        self.eq(&s, e)?;
        Ok(s)
    }

    pub fn ge0(&mut self, s: &Scalar, label: &str) -> Scalar {
        let t = self.nonneg(label);
        self.eq_scalar(&t.sub(s), 0.0);
        t
    }

    pub fn minimize(&mut self, s: Scalar) {
        self.objective = Some((Sense::Minimize, s));
    }

    pub fn maximize(&mut self, s: Scalar) {
        self.objective = Some((Sense::Maximize, s));
    }

    /// Column of every raw variable in the compiled problem.
    fn column_map(&self) -> (Vec<usize>, ConeSpec, Vec<String>) {
        let mut map = vec![0usize; self.n_raw];
        let mut cones = ConeSpec::default();
        let mut labels = Vec::new();
        let mut next = 0;
        for pass in 0..3 {
            for g in &self.groups {
                let hit = matches!((pass, g.kind), (0, Kind::Free) | (1, Kind::NonNeg) | (2, Kind::Psd(_)));
                if !hit {
                    continue;
                }
                for k in 0..g.len {
                    map[g.start + k] = next + k;
                }
                next += g.len;
                match g.kind {
                    Kind::Free => cones.free += g.len,
                    Kind::NonNeg => cones.nonneg += g.len,
                    Kind::Psd(n) => {
                        cones.psd.push(n);
                        labels.push(g.label.clone());
                    }
                }
            }
        }
        (map, cones, labels)
    }

    /// Standard-form problem. Empty rows are dropped (an empty row with a
    /// nonzero right-hand side is kept so infeasibility is detected) and
    /// duplicate rows, up to sign, are merged.
    pub fn compile(&self) -> Result<SdpProblem> {
        let (sense, obj) = self.objective.clone().unwrap_or((Sense::Minimize, Scalar::default()));
        let (map, cones, block_labels) = self.column_map();
        let n = cones.n_cols();
        let mut cvec = vec![0.0; n];
        for &(v, a) in &obj.terms {
            cvec[map[v]] += a;
        }
        let mut seen: HashSet<Vec<(usize, u64)>> = HashSet::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (row, rhs) in &self.rows {
            let mut r: Vec<(usize, f64)> = row.iter().map(|&(v, x)| (map[v], x)).collect();
            r.sort_by_key(|t| t.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(r.len());
            for (col, x) in r {
                match merged.last_mut() {
                    Some(last) if last.0 == col => last.1 += x,
                    _ => merged.push((col, x)),
                }
            }
            merged.retain(|t| t.1.abs() > 1e-15);
            if merged.is_empty() {
                if rhs.abs() > 1e-12 {
                    b.push(*rhs);
                }
                continue;
            }
            let lead = merged[0].1;
            let key: Vec<(usize, u64)> = merged.iter().map(|&(col, x)| (col, (x / lead).to_bits())).collect();
            if !seen.insert(key) {
                continue;
            }
            let r_idx = b.len();
            for (col, x) in merged {
                a.push((r_idx, col, x));
            }
            b.push(*rhs);
        }
        let p = SdpProblem {
            sense,
            cones,
            block_labels,
            c: cvec,
            offset: obj.constant,
            a,
            n_rows: b.len(),
            b,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<ModelSolution> {
        let problem = self.compile()?;
        let sol = solve_with(&problem, opts)?;
        let (map, _, _) = self.column_map();
        let values = map.iter().map(|&col| sol.x[col]).collect();
        Ok(ModelSolution { sol, values, problem })
    }
}

fn is_hermitian_expr(e: &MatExpr) -> bool {
    let n = e.rows;
    for i in 0..n {
        for j in i..n {
            if (e.constant[(i, j)] - e.constant[(j, i)].conj()).norm() > 1e-14 * (1.0 + e.constant[(i, j)].norm()) {
                return false;
            }
            if !terms_conj_equal(&e.terms[i * n + j], &e.terms[j * n + i]) {
                return false;
            }
        }
    }
    true
}

fn terms_conj_equal(a: &Terms, b: &Terms) -> bool {
    let norm = |t: &Terms| {
        let mut v: Vec<(usize, Complex64)> = Vec::with_capacity(t.len());
        let mut s = t.clone();
        s.sort_by_key(|x| x.0);
        for (k, z) in s {
            match v.last_mut() {
                Some(last) if last.0 == k => last.1 += z,
                _ => v.push((k, z)),
            }
        }
        v.retain(|x| x.1.norm() > 1e-15);
        v
    };
    let na = norm(a);
    let nb: Vec<(usize, Complex64)> = norm(b).into_iter().map(|(k, z)| (k, z.conj())).collect();
    na.len() == nb.len() && na.iter().zip(&nb).all(|(x, y)| x.0 == y.0 && (x.1 - y.1).norm() <= 1e-14)
}

/// A solved model with variable values available for evaluation.
#[derive(Debug, Clone)]
pub struct ModelSolution {
    pub sol: SdpSolution,
    values: Vec<f64>,
    pub problem: SdpProblem,
}

impl ModelSolution {
    pub fn scalar(&self, s: &Scalar) -> f64 {
        s.constant + s.terms.iter().map(|&(v, a)| a * self.values[v]).sum::<f64>()
    }

    pub fn matrix(&self, e: &MatExpr) -> CMat {
        let mut m = e.constant.clone();
        for i in 0..e.rows {
            for j in 0..e.cols {
                for &(v, a) in &e.terms[e.idx(i, j)] {
                    m[(i, j)] += a * self.values[v];
                }
            }
        }
        m
    }

    pub fn real_matrix(&self, e: &MatExpr) -> DMatrix<f64> {
        self.matrix(e).map(|z| z.re)
    }
}
