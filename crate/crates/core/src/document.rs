//! JSON interchange for states: dense matrices as rows of [re, im] pairs, or
//! CS-compressed lists of one value per sorted 2d-index multiset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::states::{DensityMatrix, Tolerances};
use crate::tensors::{self, SymTensor};
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    #[serde(rename = "dense")]
    Dense,
    #[serde(rename = "cs-compressed")]
    CsCompressed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsEntry {
    pub index: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StateDocument {
    pub parties: usize,
    /// Local dimension N of every party.
    pub dim: usize,
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cs_entries: Option<Vec<CsEntry>>,
}

impl StateDocument {
    pub fn from_state(rho: &DensityMatrix, format: Format) -> Result<Self> {
        let n = rho.local_dim().ok_or_else(|| Error::Dimension("documents need equal local dimensions".into()))?;
        let d = rho.parties();
        let m = rho.matrix();
        let mut doc = StateDocument { parties: d, dim: n, format, name: None, dense: None, cs_entries: None };
        match format {
            Format::Dense => {
                doc.dense = Some((0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect());
            }
            Format::CsCompressed => {
                let t = SymTensor::from_dense(m, n, d, Tolerances::default().cs)?;
                doc.cs_entries = Some(t.entries().map(|(k, v)| CsEntry { index: k.as_slice().to_vec(), value: v }).collect());
            }
        }
        Ok(doc)
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let (n, d) = (self.dim, self.parties);
        if n == 0 || d == 0 {
            return Err(Error::Dimension("parties and dim must be positive".into()));
        }
        let size = tensors::checked_pow(n, d)?;
        match (self.format, &self.dense, &self.cs_entries) {
            (Format::Dense, Some(rows), None) => {
                if rows.len() != size || rows.iter().any(|r| r.len() != size) {
                    return Err(Error::Dimension(format!("dense matrix must be {size}x{size}")));
                }
                Ok(CMat::from_fn(size, size, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1])))
            }
            (Format::CsCompressed, None, Some(entries)) => {
                let mut t = SymTensor::new(n, d)?;
                for e in entries {
                    if e.index.len() != 2 * d {
                        return Err(Error::Dimension(format!("index {:?} must have length {}", e.index, 2 * d)));
                    }
                    if e.index.windows(2).any(|w| w[0] > w[1]) {
                        return Err(Error::Invalid(format!("index {:?} is not sorted", e.index)));
                    }
                    t.set(&e.index, e.value)?;
                }
                Ok(crate::linalg::complexify(&t.to_dense()))
            }
            (Format::Dense, _, _) => Err(Error::Invalid("dense documents carry exactly the `dense` field".into())),
            (Format::CsCompressed, _, _) => Err(Error::Invalid("cs-compressed documents carry exactly the `csEntries` field".into())),
        }
    }

    pub fn to_state(&self, tol: &Tolerances) -> Result<DensityMatrix> {
        DensityMatrix::with_tolerances(self.to_matrix()?, vec![self.dim; self.parties], tol)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed state document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}
