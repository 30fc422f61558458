//! JSON file formats. Matrices are nested row-major arrays whose entries
//! are `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::mps::{MpsTensor, WeightedTensor};
use crate::numerics::{c, CMatrix};
use crate::{Error, Result};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMatrix> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|row| row.len() != cols) {
        return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
    }
    Ok(CMatrix::from_fn(r, cols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelFile {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        ChannelFile { dim: ch.dim(), kraus: ch.kraus().iter().map(matrix_to_json).collect() }
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        let kraus = self.kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        let ch = KrausChannel::new(kraus)?;
        if ch.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: ch.dim() });
        }
        Ok(ch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub phys_dim: usize,
    pub bond_dim: usize,
    pub matrices: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<[f64; 2]>,
}

impl TensorFile {
    pub fn from_tensor(t: &MpsTensor, weight: Option<Complex64>) -> Self {
        TensorFile {
            phys_dim: t.phys_dim(),
            bond_dim: t.bond_dim(),
            matrices: t.matrices().iter().map(matrix_to_json).collect(),
            weight: weight.map(|w| [w.re, w.im]),
        }
    }

    pub fn to_tensor(&self) -> Result<MpsTensor> {
        let mats = self.matrices.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        let t = MpsTensor::new(mats)?;
        if t.phys_dim() != self.phys_dim {
            return Err(Error::DimensionMismatch { expected: self.phys_dim, found: t.phys_dim() });
        }
        if t.bond_dim() != self.bond_dim {
            return Err(Error::DimensionMismatch { expected: self.bond_dim, found: t.bond_dim() });
        }
        Ok(t)
    }

    /// Weight defaults to 1.
    pub fn to_weighted(&self) -> Result<WeightedTensor> {
        let w = self.weight.map_or(c(1.0, 0.0), |[re, im]| c(re, im));
        Ok(WeightedTensor::new(self.to_tensor()?, w))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorListFile {
    pub tensors: Vec<TensorFile>,
}

impl TensorListFile {
    pub fn to_weighted(&self) -> Result<Vec<WeightedTensor>> {
        self.tensors.iter().map(TensorFile::to_weighted).collect()
    }
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed JSON: {e}")))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}
