//! Assignment files: one JSON object per abstract,
//! `{"id", "conclusion_indices", "labeling", "nmi_at_fix"}`.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GreedyOutcome;
use crate::corpus::TokenizedAbstract;
use crate::cycle::BoundaryLabeling;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub id: String,
    /// Ascending sentence indices.
    pub conclusion_indices: Vec<usize>,
    pub labeling: BoundaryLabeling,
    pub nmi_at_fix: Option<f64>,
}

impl AssignmentRecord {
    /// Records for every corpus abstract, in corpus order.
    pub fn from_outcome(
        corpus: &[TokenizedAbstract],
        outcome: &GreedyOutcome,
    ) -> Result<Vec<AssignmentRecord>> {
        corpus
            .iter()
            .map(|a| {
                let c = outcome.assignment.get(&a.id).ok_or_else(|| {
                    Error::Contract(format!("abstract `{}` missing from assignment", a.id))
                })?;
                Ok(AssignmentRecord {
                    id: a.id.clone(),
                    conclusion_indices: c.conclusion_set().into_iter().collect(),
                    labeling: c.labeling(),
                    nmi_at_fix: outcome.nmi_at_fix(&a.id),
                })
            })
            .collect()
    }

    /// Record for a bare labeling (baselines); the conclusion is the cyclic
    /// segment holding the final sentence.
    pub fn from_labeling(id: impl Into<String>, labeling: BoundaryLabeling) -> Self {
        Self {
            id: id.into(),
            conclusion_indices: labeling.conclusion_indices().into_iter().collect(),
            labeling,
            nmi_at_fix: None,
        }
    }
}

pub fn write_assignment(mut out: impl Write, records: &[AssignmentRecord]) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Validation(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<assignment output>", e))?;
    }
    Ok(())
}

pub fn read_assignment(path: impl AsRef<Path>) -> Result<Vec<AssignmentRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: AssignmentRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}
