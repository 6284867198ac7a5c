use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

use super::index::{Family, Harmonic, Table};
use super::{Mask, TorusModel};
use crate::error::{Error, Result};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// On-disk form of a [`TorusModel`].
///
/// `a`, `b` are `n × |X|` tables over `momentum_indices`, `c`, `d` are
/// `n × |Y|` tables over `coordinate_indices`. Entries outside the family
/// mask are stored as zero and must be zero on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub n: usize,
    #[serde(rename = "N")]
    pub order: u32,
    pub family: Family,
    pub momentum_indices: Vec<Vec<i32>>,
    pub coordinate_indices: Vec<Vec<i32>>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

fn as_harmonic(v: &[i32]) -> Harmonic {
    let mut k = [0; 2];
    for (dst, src) in k.iter_mut().zip(v) {
        *dst = *src;
    }
    k
}

impl From<&TorusModel> for ModelDocument {
    fn from(model: &TorusModel) -> Self {
        let n = model.dim();
        let x = model.mask.momentum_indices().indices();
        let y = model.mask.coordinate_indices().indices();
        let table = |t: Table, set: &[Harmonic]| -> Vec<Vec<f64>> {
            (0..n)
                .map(|j| set.iter().map(|k| model.coefficient(t, j, k)).collect())
                .collect()
        };
        ModelDocument {
            schema_version: MODEL_SCHEMA_VERSION,
            n,
            order: model.order(),
            family: model.family(),
            momentum_indices: x.iter().map(|k| k[..n].to_vec()).collect(),
            coordinate_indices: y.iter().map(|k| k[..n].to_vec()).collect(),
            a: table(Table::A, x),
            b: table(Table::B, x),
            c: table(Table::C, y),
            d: table(Table::D, y),
        }
    }
}

impl TryFrom<ModelDocument> for TorusModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        if doc.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Schema {
                found: doc.schema_version,
                expected: MODEL_SCHEMA_VERSION,
            });
        }
        let mask = Arc::new(Mask::new(doc.family, doc.n, doc.order)?);
        let mut model = TorusModel::from_mask(mask);
        let tables = [
            (Table::A, &doc.momentum_indices, &doc.a),
            (Table::B, &doc.momentum_indices, &doc.b),
            (Table::C, &doc.coordinate_indices, &doc.c),
            (Table::D, &doc.coordinate_indices, &doc.d),
        ];
        for (table, indices, values) in tables {
            if values.len() != doc.n {
                return Err(Error::InvalidParameter(format!(
                    "table {table:?} has {} rows, expected {}",
                    values.len(),
                    doc.n
                )));
            }
            for (j, row) in values.iter().enumerate() {
                if row.len() != indices.len() {
                    return Err(Error::InvalidParameter(format!(
                        "table {table:?} row {j} has {} entries, expected {}",
                        row.len(),
                        indices.len()
                    )));
                }
                for (k, &value) in indices.iter().zip(row) {
                    model.set_coefficient(table, j, &as_harmonic(k), value)?;
                }
            }
        }
        Ok(model)
    }
}

impl TorusModel {
    pub fn to_document(&self) -> ModelDocument {
        ModelDocument::from(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(s)?;
        TorusModel::try_from(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
