//! Embedding vector files.
//!
//! JSONL, one `{"id": ..., "vector": [...]}` record per line, optionally
//! closed by a manifest line
//! `{"manifest": {"model_id": ..., "dimension": ..., "count": ..., "granularity": ...}}`.
//! Abstract-level records use the abstract id; sentence-level records use
//! `"<abstract id>#<sentence index>"`.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::greedy::SimilarityProvider;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub id: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub model_id: String,
    pub dimension: usize,
    pub count: usize,
    #[serde(default)]
    pub granularity: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Line {
    Manifest { manifest: Manifest },
    Record(EmbeddingRecord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub records: Vec<EmbeddingRecord>,
    pub manifest: Option<Manifest>,
}

impl EmbeddingFile {
    pub fn dimension(&self) -> usize {
        self.records.first().map_or(0, |r| r.vector.len())
    }

    /// Abstract-level vectors as a nearest-neighbor provider. Sentence
    /// records (ids with `#`) are left out.
    pub fn into_provider(self) -> Result<SimilarityProvider> {
        SimilarityProvider::new(
            self.records
                .into_iter()
                .filter(|r| !r.id.contains('#'))
                .map(|r| (r.id, r.vector))
                .collect(),
        )
    }

    /// Sentence-level vectors grouped by abstract, ordered by sentence
    /// index. Indices of one abstract must be exactly `0..n`. Records
    /// without a `#` (abstract-level ones in a mixed file) are skipped.
    pub fn sentence_vectors(&self) -> Result<SentenceVectors> {
        let mut grouped: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
        for r in &self.records {
            let Some((abs, idx)) = r.id.rsplit_once('#') else {
                continue;
            };
            let idx: usize = idx.parse().map_err(|_| {
                Error::Validation(format!("bad sentence index in record id `{}`", r.id))
            })?;
            grouped
                .entry(abs.to_string())
                .or_default()
                .insert(idx, r.vector.clone());
        }
        let mut out = BTreeMap::new();
        for (abs, sentences) in grouped {
            if sentences.keys().copied().ne(0..sentences.len()) {
                return Err(Error::Validation(format!(
                    "sentence vectors of `{abs}` are not numbered 0..{}",
                    sentences.len()
                )));
            }
            out.insert(abs, sentences.into_values().collect());
        }
        Ok(SentenceVectors(out))
    }
}

/// Per-sentence vectors keyed by abstract id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentenceVectors(pub BTreeMap<String, Vec<Vec<f64>>>);

impl SentenceVectors {
    pub fn get(&self, abstract_id: &str) -> Option<&[Vec<f64>]> {
        self.0.get(abstract_id).map(Vec::as_slice)
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingFile> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(BufReader::new(file))
}

pub fn parse_embeddings(reader: impl BufRead) -> Result<EmbeddingFile> {
    let mut records = Vec::new();
    let mut manifest = None;
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        if manifest.is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: "content after the manifest line".into(),
            });
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        match parsed {
            Line::Manifest { manifest: m } => manifest = Some(m),
            Line::Record(r) => {
                if let Some(first) = records.first().map(|f: &EmbeddingRecord| f.vector.len()) {
                    if r.vector.len() != first {
                        return Err(Error::Validation(format!(
                            "line {lineno}: dimension {} differs from {first}",
                            r.vector.len()
                        )));
                    }
                }
                if r.vector.is_empty() || r.vector.iter().all(|x| *x == 0.0) {
                    return Err(Error::Validation(format!("line {lineno}: zero vector `{}`", r.id)));
                }
                if !seen.insert(r.id.clone()) {
                    return Err(Error::Validation(format!("line {lineno}: duplicate id `{}`", r.id)));
                }
                records.push(r);
            }
        }
    }
    if let Some(m) = &manifest {
        if m.count != records.len() {
            return Err(Error::Validation(format!(
                "manifest declares {} records, file has {}",
                m.count,
                records.len()
            )));
        }
        if !records.is_empty() && m.dimension != records[0].vector.len() {
            return Err(Error::Validation(format!(
                "manifest declares dimension {}, records have {}",
                m.dimension,
                records[0].vector.len()
            )));
        }
    }
    Ok(EmbeddingFile { records, manifest })
}

pub fn write_embeddings(mut out: impl Write, file: &EmbeddingFile) -> Result<()> {
    let io = |e| Error::io("<embeddings output>", e);
    for r in &file.records {
        let line = serde_json::to_string(r).map_err(|e| Error::Validation(e.to_string()))?;
        writeln!(out, "{line}").map_err(io)?;
    }
    if let Some(m) = &file.manifest {
        let line = serde_json::to_string(&serde_json::json!({ "manifest": m }))
            .map_err(|e| Error::Validation(e.to_string()))?;
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}
