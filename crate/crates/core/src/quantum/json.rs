//! JSON form `{"dims": [...], "re": [[...]], "im": [[...]]}` of matrices.

use serde::{Deserialize, Serialize};

use super::linalg::{c, CMat};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat, dims: &[usize]) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        MatrixJson { dims: dims.to_vec(), re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.re.len();
        if self.im.len() != n || self.re.iter().chain(&self.im).any(|r| r.len() != n) {
            return Err(Error::dim("matrix JSON is not square or re/im shapes differ"));
        }
        if self.dims.iter().product::<usize>() != n {
            return Err(Error::dim(format!("dims {:?} do not multiply to {n}", self.dims)));
        }
        Ok(CMat::from_fn(n, n, |i, j| c(self.re[i][j], self.im[i][j])))
    }
}

impl super::BipartiteState {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(self.matrix(), &[self.da(), self.db()])
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        match j.dims[..] {
            [da, db] => super::BipartiteState::new(j.to_matrix()?, da, db),
            _ => Err(Error::dim("bipartite state JSON needs two dims")),
        }
    }
}

impl super::ChannelChoi {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(self.matrix(), &[self.d_in(), self.d_out()])
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        match j.dims[..] {
            [di, dout] => super::ChannelChoi::new(j.to_matrix()?, di, dout),
            _ => Err(Error::dim("Choi operator JSON needs two dims")),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::quantum::{erasure_channel, isotropic, BipartiteState, ChannelChoi};

    #[test]
    fn round_trip() {
        let s = isotropic(0.7, 2).unwrap();
        let text = serde_json::to_string(&s.to_json()).unwrap();
        assert!(text.starts_with("{\"dims\":[2,2],\"re\":"));
        let back = BipartiteState::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, s);
        let ch = erasure_channel(0.3, 2).unwrap();
        let back = ChannelChoi::from_json(&ch.to_json()).unwrap();
        assert_eq!(back, ch);
    }
}
