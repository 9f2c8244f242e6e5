use std::path::Path;

use crate::error::{Error, Result};

/// A 512-dimensional face embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub const DIM: usize = 512;

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != Self::DIM {
            return Err(Error::Argument(format!(
                "feature vector has {} values, expected {}",
                values.len(),
                Self::DIM
            )));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::Argument(format!("non-finite feature at dimension {i}")));
        }
        Ok(FeatureVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEmbedding {
    pub subject: Option<String>,
    pub features: FeatureVector,
}

/// Parses the embedding CSV: 512 floats per row, optionally preceded by a
/// subject id column.
pub fn parse_embeddings(text: &str) -> Result<Vec<LabeledEmbedding>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let (subject, nums) = match fields.len() {
            n if n == FeatureVector::DIM => (None, &fields[..]),
            n if n == FeatureVector::DIM + 1 => (Some(fields[0].to_string()), &fields[1..]),
            n => {
                return Err(Error::ParseLine {
                    line: idx + 1,
                    msg: format!("expected 512 or 513 fields, found {n}"),
                })
            }
        };
        let values = nums
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| Error::ParseLine {
                    line: idx + 1,
                    msg: format!("not a number: {s:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let features = FeatureVector::new(values).map_err(|e| Error::ParseLine {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        out.push(LabeledEmbedding { subject, features });
    }
    Ok(out)
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<Vec<LabeledEmbedding>> {
    parse_embeddings(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_and_unlabeled_rows() {
        let row: Vec<String> = (0..512).map(|i| format!("{}", i as f64 * 0.5)).collect();
        let text = format!("{}\nalice,{}\n", row.join(","), row.join(","));
        let e = parse_embeddings(&text).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].subject, None);
        assert_eq!(e[1].subject.as_deref(), Some("alice"));
        assert_eq!(e[1].features.values()[3], 1.5);
    }

    #[test]
    fn short_row_rejected() {
        assert!(matches!(parse_embeddings("1,2,3\n"), Err(Error::ParseLine { line: 1, .. })));
    }
}
