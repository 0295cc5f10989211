use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Cone layout of the variable vector: free entries, then nonnegative
/// entries, then one `svec` block per PSD cone.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConeSpec {
    pub free: usize,
    pub nonneg: usize,
    /// Side length of each PSD block.
    pub psd: Vec<usize>,
}

pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of entry `(r, c)` (either triangle) in the `svec` of an `n × n`
/// symmetric matrix.
pub fn svec_index(n: usize, r: usize, c: usize) -> usize {
    let (r, c) = if r >= c { (r, c) } else { (c, r) };
    c * n - c * c.saturating_sub(1) / 2 + (r - c)
}

impl ConeSpec {
    pub fn n_cols(&self) -> usize {
        self.free + self.nonneg + self.psd.iter().map(|&n| svec_len(n)).sum::<usize>()
    }

    /// Offset of each PSD block in the variable vector.
    pub fn psd_offsets(&self) -> Vec<usize> {
        let mut off = self.free + self.nonneg;
        self.psd
            .iter()
            .map(|&n| {
                let o = off;
                off += svec_len(n);
                o
            })
            .collect()
    }

    /// Barrier parameter: the number of nonnegative entries plus the total
    /// PSD side length.
    pub fn degree(&self) -> usize {
        self.nonneg + self.psd.iter().sum::<usize>()
    }
}

/// `min/max c'x + offset` subject to `Ax = b`, `x ∈ K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub sense: Sense,
    pub cones: ConeSpec,
    pub block_labels: Vec<String>,
    pub c: Vec<f64>,
    pub offset: f64,
    /// Sparse `(row, column, value)` triplets of `A`.
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub n_rows: usize,
}

impl SdpProblem {
    pub fn n_cols(&self) -> usize {
        self.cones.n_cols()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_cols();
        if self.c.len() != n {
            return Err(Error::dim(format!("objective has {} entries, expected {n}", self.c.len())));
        }
        if self.b.len() != self.n_rows {
            return Err(Error::dim(format!("rhs has {} entries, expected {}", self.b.len(), self.n_rows)));
        }
        if self.block_labels.len() != self.cones.psd.len() {
            return Err(Error::dim("one label per PSD block required"));
        }
        if let Some(&(r, col, _)) = self.a.iter().find(|&&(r, col, _)| r >= self.n_rows || col >= n) {
            return Err(Error::dim(format!("triplet ({r}, {col}) outside {}x{n}", self.n_rows)));
        }
        if self.a.iter().any(|t| !t.2.is_finite()) || self.b.iter().chain(&self.c).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("problem data contain non-finite values".into()));
        }
        Ok(())
    }

    /// Debug JSON with `A` as sparse triplets.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: SdpProblem = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    /// Multiplies the objective (and offset) by `k`.
    pub fn scale_objective(&self, k: f64) -> SdpProblem {
        let mut p = self.clone();
        p.c.iter_mut().for_each(|v| *v *= k);
        p.offset *= k;
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svec_layout_is_column_major_lower() {
        let n = 4;
        let mut k = 0;
        for c in 0..n {
            for r in c..n {
                assert_eq!(svec_index(n, r, c), k);
                assert_eq!(svec_index(n, c, r), k);
                k += 1;
            }
        }
        assert_eq!(k, svec_len(n));
    }
}
