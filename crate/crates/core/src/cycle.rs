//! Cycled abstracts and their constrained candidate segmentations.
//!
//! An abstract of `n` sentences is read as a cycle so that a conclusion
//! segment may wrap from the end into the start. A candidate conclusion is
//! a cyclically contiguous window of 1 to `min(3, n - 1)` sentences that
//! contains the final sentence `n - 1`; everything else is premise. For
//! `n >= 4` this gives exactly six candidates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedAbstract;
use crate::{Error, Result};

pub const MAX_CONCLUSION_LEN: usize = 3;

/// One candidate (premise, conclusion) split of an `n`-sentence cycled
/// abstract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CandidateSegmentation {
    pub n: usize,
    /// Conclusion length in sentences.
    pub len: usize,
    /// Sentences of the window that wrapped past `n - 1` into the start.
    pub wrap: usize,
    /// Position in the canonical enumeration order (0-based).
    pub config_rank: usize,
}

impl CandidateSegmentation {
    /// Start index of the conclusion.
    pub fn alpha(&self) -> usize {
        (self.n - self.len + self.wrap) % self.n
    }

    /// End index of the conclusion (inclusive, in cyclic order).
    pub fn xi(&self) -> usize {
        (self.alpha() + self.len - 1) % self.n
    }

    /// Conclusion sentence indices in cyclic reading order.
    pub fn conclusion_window(&self) -> Vec<usize> {
        let a = self.alpha();
        (0..self.len).map(|t| (a + t) % self.n).collect()
    }

    pub fn conclusion_set(&self) -> BTreeSet<usize> {
        self.conclusion_window().into_iter().collect()
    }

    pub fn is_conclusion(&self, sentence: usize) -> bool {
        // offset of the sentence from alpha along the cycle
        (sentence + self.n - self.alpha()) % self.n < self.len
    }

    pub fn premise_indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.is_conclusion(i)).collect()
    }

    pub fn labeling(&self) -> BoundaryLabeling {
        boundary_labeling(self)
    }
}

/// Per-sentence segment-boundary bits (`1` marks the final sentence of a
/// segment in cyclic reading order).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundaryLabeling {
    pub bits: Vec<bool>,
}

impl BoundaryLabeling {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Labeling of a two-class split where `conclusion` is any subset of
    /// `0..n`: a sentence is a boundary when its successor on the cycle
    /// belongs to the other class.
    pub fn from_conclusion(n: usize, conclusion: &BTreeSet<usize>) -> Self {
        let bits = (0..n)
            .map(|i| conclusion.contains(&i) != conclusion.contains(&((i + 1) % n)))
            .collect();
        Self { bits }
    }

    /// Labeling with boundaries at the given positions.
    pub fn from_positions(n: usize, positions: &[usize]) -> Self {
        let mut bits = vec![false; n];
        for &p in positions {
            bits[p] = true;
        }
        Self { bits }
    }

    /// The cyclic segment holding the final sentence, read as the
    /// conclusion. Without any boundary the whole abstract is returned.
    pub fn conclusion_indices(&self) -> BTreeSet<usize> {
        let n = self.bits.len();
        if n == 0 || self.ones() == 0 {
            return (0..n).collect();
        }
        let last = n - 1;
        // walk back from n-1 to the previous boundary (exclusive)
        let mut out = BTreeSet::new();
        out.insert(last);
        let mut i = (last + n - 1) % n;
        while !self.bits[i] && i != last {
            out.insert(i);
            i = (i + n - 1) % n;
        }
        // walk forward from n-1 to the next boundary (inclusive)
        let mut j = last;
        while !self.bits[j] {
            j = (j + 1) % n;
            out.insert(j);
        }
        out
    }
}

impl fmt::Display for BoundaryLabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BoundaryLabeling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Validation(format!(
                    "invalid labeling character `{other}` in `{s}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { bits })
    }
}

impl Serialize for BoundaryLabeling {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BoundaryLabeling {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All candidate segmentations of an `n`-sentence cycled abstract, ordered
/// by conclusion length, then by number of wrapped sentences.
pub fn enumerate_candidates(n: usize) -> Result<Vec<CandidateSegmentation>> {
    if n < 2 {
        return Err(Error::NoValidSegmentation { n });
    }
    let max_len = MAX_CONCLUSION_LEN.min(n - 1);
    let mut out = Vec::with_capacity(6);
    for len in 1..=max_len {
        for wrap in 0..len {
            out.push(CandidateSegmentation {
                n,
                len,
                wrap,
                config_rank: out.len(),
            });
        }
    }
    Ok(out)
}

pub fn boundary_labeling(c: &CandidateSegmentation) -> BoundaryLabeling {
    BoundaryLabeling::from_conclusion(c.n, &c.conclusion_set())
}

/// Premise and conclusion token multisets of `a` under candidate `c`, in
/// sentence order.
pub fn apply_segmentation<'a>(
    a: &'a TokenizedAbstract,
    c: &CandidateSegmentation,
) -> Result<(Vec<&'a str>, Vec<&'a str>)> {
    if c.n != a.n() {
        return Err(Error::Contract(format!(
            "candidate for {} sentences applied to abstract `{}` of {} sentences",
            c.n,
            a.id,
            a.n()
        )));
    }
    let mut premise = Vec::new();
    let mut conclusion = Vec::new();
    for (i, sentence) in a.sentences.iter().enumerate() {
        let side = if c.is_conclusion(i) {
            &mut conclusion
        } else {
            &mut premise
        };
        side.extend(sentence.iter().map(String::as_str));
    }
    Ok((premise, conclusion))
}

/// Corpus-wide choice of one candidate per abstract.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SegmentationAssignment {
    pub choices: BTreeMap<String, CandidateSegmentation>,
}

impl SegmentationAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, c: CandidateSegmentation) {
        self.choices.insert(id.into(), c);
    }

    pub fn get(&self, id: &str) -> Option<&CandidateSegmentation> {
        self.choices.get(id)
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Every abstract has exactly one valid choice and no foreign ids exist.
    pub fn validate(&self, corpus: &[TokenizedAbstract]) -> Result<()> {
        if self.choices.len() != corpus.len() {
            let known: BTreeSet<&str> = corpus.iter().map(|a| a.id.as_str()).collect();
            if let Some(extra) = self.choices.keys().find(|k| !known.contains(k.as_str())) {
                return Err(Error::UnknownId(extra.clone()));
            }
        }
        for a in corpus {
            let c = self
                .choices
                .get(&a.id)
                .ok_or_else(|| Error::Contract(format!("abstract `{}` has no segmentation", a.id)))?;
            if c.n != a.n() || c.len == 0 || c.len >= c.n || c.wrap >= c.len {
                return Err(Error::Contract(format!(
                    "invalid segmentation for abstract `{}`",
                    a.id
                )));
            }
        }
        Ok(())
    }

    /// The all-`config_rank == rank` assignment (clamped to the last
    /// candidate for short abstracts).
    pub fn uniform(corpus: &[TokenizedAbstract], rank: usize) -> Result<Self> {
        let mut out = Self::new();
        for a in corpus {
            let cands = enumerate_candidates(a.n())?;
            out.insert(a.id.clone(), cands[rank.min(cands.len() - 1)]);
        }
        Ok(out)
    }
}

/// Candidate of an `n`-sentence abstract whose conclusion is exactly
/// `indices`, if any.
pub fn candidate_for_conclusion(
    n: usize,
    indices: &BTreeSet<usize>,
) -> Option<CandidateSegmentation> {
    enumerate_candidates(n)
        .ok()?
        .into_iter()
        .find(|c| &c.conclusion_set() == indices)
}
