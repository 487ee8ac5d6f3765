use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Maximum allowed deviation of an attention row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-4;

/// One sentence of a soft-alignment dump: rows are target units, columns
/// are source units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionRecord {
    pub id: String,
    #[serde(rename = "src")]
    pub src_units: Vec<String>,
    #[serde(rename = "trg")]
    pub trg_units: Vec<String>,
    #[serde(rename = "attn")]
    pub matrix: Vec<Vec<f64>>,
}

impl AttentionRecord {
    /// Checks shape, value range and row stochasticity.
    pub fn validate(&self) -> Result<()> {
        let dim = |message: String| Error::Dimension {
            id: self.id.clone(),
            message,
        };
        if self.src_units.is_empty() || self.trg_units.is_empty() {
            return Err(dim("source and target unit lists must be non-empty".into()));
        }
        if self.matrix.len() != self.trg_units.len() {
            return Err(dim(format!(
                "matrix has {} rows but there are {} target units",
                self.matrix.len(),
                self.trg_units.len()
            )));
        }
        for (r, row) in self.matrix.iter().enumerate() {
            if row.len() != self.src_units.len() {
                return Err(dim(format!(
                    "row {r} has {} columns but there are {} source units",
                    row.len(),
                    self.src_units.len()
                )));
            }
            for (c, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::Probability {
                        id: self.id.clone(),
                        row: r,
                        col: c,
                        value,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSum {
                    id: self.id.clone(),
                    row: r,
                    sum,
                });
            }
        }
        Ok(())
    }
}

/// Reads one validated record per non-blank line.
pub fn read_attention_jsonl(text: &str) -> Result<Vec<AttentionRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: AttentionRecord = serde_json::from_str(line).map_err(|source| Error::Json {
            line: i + 1,
            source,
        })?;
        record.validate()?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_attention_jsonl(records: &[AttentionRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("attention record serializes"));
        out.push('\n');
    }
    out
}
