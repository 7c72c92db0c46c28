use serde::{Deserialize, Serialize};

use crate::{c64, CMat, HermitianOp, OpError};

/// Row-major `[re, im]` pairs; the serialized form of every operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRepr {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixRepr {
    pub fn from_matrix(m: &CMat) -> Self {
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                let z = m[(r, c)];
                entries.push([z.re, z.im]);
            }
        }
        Self { dim, entries }
    }

    pub fn to_matrix(&self) -> Result<CMat, OpError> {
        if self.dim == 0 || self.entries.len() != self.dim * self.dim {
            return Err(OpError::Malformed(format!(
                "dim {} with {} entries",
                self.dim,
                self.entries.len()
            )));
        }
        Ok(CMat::from_fn(self.dim, self.dim, |r, c| {
            let [re, im] = self.entries[r * self.dim + c];
            c64(re, im)
        }))
    }
}

impl TryFrom<MatrixRepr> for HermitianOp {
    type Error = OpError;
    fn try_from(r: MatrixRepr) -> Result<Self, OpError> {
        HermitianOp::new(r.to_matrix()?)
    }
}

impl From<HermitianOp> for MatrixRepr {
    fn from(h: HermitianOp) -> Self {
        MatrixRepr::from_matrix(h.matrix())
    }
}
