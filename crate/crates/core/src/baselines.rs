//! Unsupervised baselines. Every baseline emits exactly two boundary
//! bits; methods that find a single boundary get a second one on the final
//! sentence.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedAbstract;
use crate::cycle::{enumerate_candidates, BoundaryLabeling, CandidateSegmentation};
use crate::embeddings::SentenceVectors;
use crate::greedy::{cosine, AssignmentRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    RandomBase,
    RandomPlus,
    Texttiling,
    EmbedSim,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextTilingParams {
    /// Sentences per block on each side of a gap.
    pub block_size: usize,
    /// Moving-average half width applied to the gap similarities.
    pub smoothing_width: usize,
    /// Boundary cutoff is `mean(depth) - multiplier * std(depth)`.
    pub depth_cutoff_multiplier: f64,
}

impl Default for TextTilingParams {
    fn default() -> Self {
        Self {
            block_size: 2,
            smoothing_width: 1,
            depth_cutoff_multiplier: 0.5,
        }
    }
}

/// How the embedding baseline splits an abstract.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// One split point in reading order, plus the end boundary.
    #[default]
    Linear,
    /// The cycled candidates.
    Cycled,
}

fn require_two(a: &TokenizedAbstract) -> Result<usize> {
    match a.n() {
        n if n >= 2 => Ok(n),
        n => Err(Error::NoValidSegmentation { n }),
    }
}

/// Boundaries after two distinct, uniformly chosen sentences.
pub fn random_base(a: &TokenizedAbstract, rng: &mut impl Rng) -> Result<BoundaryLabeling> {
    let n = require_two(a)?;
    let picks = sample(rng, n, 2).into_vec();
    Ok(BoundaryLabeling::from_positions(n, &picks))
}

/// A uniformly chosen cycled candidate.
pub fn random_plus(a: &TokenizedAbstract, rng: &mut impl Rng) -> Result<CandidateSegmentation> {
    let cands = enumerate_candidates(a.n())?;
    Ok(cands[rng.gen_range(0..cands.len())])
}

fn term_counts(sentences: &[Vec<String>]) -> BTreeMap<&str, f64> {
    let mut m = BTreeMap::new();
    for w in sentences.iter().flatten() {
        *m.entry(w.as_str()).or_insert(0.0) += 1.0;
    }
    m
}

fn sparse_cosine(a: &BTreeMap<&str, f64>, b: &BTreeMap<&str, f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(w, x)| b.get(w).map(|y| x * y)).sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Depth score of every sentence gap (gap `g` sits after sentence `g`).
pub fn texttiling_depths(a: &TokenizedAbstract, p: &TextTilingParams) -> Vec<f64> {
    gap_scores(a, p).1
}

/// Smoothed block similarities and depth scores per gap.
const DEPTH_EPS: f64 = 1e-9;

fn gap_scores(a: &TokenizedAbstract, p: &TextTilingParams) -> (Vec<f64>, Vec<f64>) {
    let n = a.n();
    if n < 2 {
        return (Vec::new(), Vec::new());
    }
    let bs = p.block_size.max(1);
    let raw: Vec<f64> = (0..n - 1)
        .map(|g| {
            let left = &a.sentences[(g + 1).saturating_sub(bs)..=g];
            let right = &a.sentences[g + 1..(g + 1 + bs).min(n)];
            sparse_cosine(&term_counts(left), &term_counts(right))
        })
        .collect();
    let w = p.smoothing_width;
    let sims: Vec<f64> = (0..raw.len())
        .map(|g| {
            let lo = g.saturating_sub(w);
            let hi = (g + w).min(raw.len() - 1);
            raw[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let depths = (0..sims.len())
        .map(|g| {
            let mut l = g;
            while l > 0 && sims[l - 1] >= sims[l] {
                l -= 1;
            }
            let mut r = g;
            while r + 1 < sims.len() && sims[r + 1] >= sims[r] {
                r += 1;
            }
            let d = (sims[l] - sims[g]) + (sims[r] - sims[g]);
            // rounding noise between equal blocks is not a boundary
            if d < DEPTH_EPS {
                0.0
            } else {
                d
            }
        })
        .collect();
    (sims, depths)
}

/// Lexical-cohesion segmentation.
///
/// Local similarity minima whose depth exceeds the cutoff are boundaries.
/// Of several, the two deepest are kept (earlier gap on ties). A single
/// boundary is completed with the end boundary. Without any, the deepest
/// gap is used.
pub fn texttiling(a: &TokenizedAbstract, p: &TextTilingParams) -> Result<BoundaryLabeling> {
    let n = require_two(a)?;
    let (sims, depths) = gap_scores(a, p);
    let mean = depths.iter().sum::<f64>() / depths.len() as f64;
    let var = depths.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / depths.len() as f64;
    let cutoff = mean - p.depth_cutoff_multiplier * var.sqrt();

    let mut found: Vec<usize> = (0..depths.len())
        .filter(|&g| depths[g] > 0.0 && depths[g] > cutoff)
        .filter(|&g| {
            (g == 0 || sims[g] <= sims[g - 1]) && (g + 1 == sims.len() || sims[g] <= sims[g + 1])
        })
        .collect();
    found.sort_by(|&x, &y| depths[y].total_cmp(&depths[x]).then(x.cmp(&y)));

    let positions = match found.len() {
        0 => {
            let deepest = (0..depths.len())
                .rev()
                .max_by(|&x, &y| depths[x].total_cmp(&depths[y]))
                .unwrap_or(0);
            vec![deepest, n - 1]
        }
        1 => vec![found[0], n - 1],
        _ => vec![found[0], found[1]],
    };
    Ok(BoundaryLabeling::from_positions(n, &positions))
}

fn mean_vector(vectors: &[Vec<f64>]) -> Vec<f64> {
    let dim = vectors[0].len();
    let mut out = vec![0.0; dim];
    for v in vectors {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    out.iter_mut().for_each(|o| *o /= vectors.len() as f64);
    out
}

/// Chooses the split whose two segment embeddings (mean of the sentence
/// vectors) have maximal cosine similarity; earliest split on ties.
pub fn embed_sim_baseline(
    a: &TokenizedAbstract,
    sentence_vectors: &[Vec<f64>],
    mode: SplitMode,
) -> Result<BoundaryLabeling> {
    let n = require_two(a)?;
    if sentence_vectors.len() != n {
        return Err(Error::Validation(format!(
            "abstract `{}` has {n} sentences but {} sentence vectors",
            a.id,
            sentence_vectors.len()
        )));
    }
    match mode {
        SplitMode::Linear => {
            let mut best = (f64::NEG_INFINITY, 1);
            for i in 1..n {
                let s = cosine(
                    &mean_vector(&sentence_vectors[..i]),
                    &mean_vector(&sentence_vectors[i..]),
                );
                if s > best.0 {
                    best = (s, i);
                }
            }
            Ok(BoundaryLabeling::from_positions(n, &[best.1 - 1, n - 1]))
        }
        SplitMode::Cycled => {
            let mut best: Option<(f64, CandidateSegmentation)> = None;
            for c in enumerate_candidates(n)? {
                let premise: Vec<Vec<f64>> = c
                    .premise_indices()
                    .into_iter()
                    .map(|i| sentence_vectors[i].clone())
                    .collect();
                let conclusion: Vec<Vec<f64>> = c
                    .conclusion_window()
                    .into_iter()
                    .map(|i| sentence_vectors[i].clone())
                    .collect();
                let s = cosine(&mean_vector(&premise), &mean_vector(&conclusion));
                if best.is_none_or(|(b, _)| s > b) {
                    best = Some((s, c));
                }
            }
            Ok(best.expect("n >= 2 has a candidate").1.labeling())
        }
    }
}

/// Inputs a baseline run may need besides the corpus.
#[derive(Debug, Clone, Default)]
pub struct BaselineInputs<'a> {
    pub seed: u64,
    pub texttiling: TextTilingParams,
    pub sentence_vectors: Option<&'a SentenceVectors>,
    pub split_mode: SplitMode,
}

/// Runs `baseline` over the corpus in corpus order. The random baselines
/// draw from one generator seeded with `inputs.seed`.
pub fn run_baseline(
    corpus: &[TokenizedAbstract],
    baseline: Baseline,
    inputs: &BaselineInputs<'_>,
) -> Result<Vec<AssignmentRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(inputs.seed);
    corpus
        .iter()
        .map(|a| {
            let labeling = match baseline {
                Baseline::RandomBase => random_base(a, &mut rng)?,
                Baseline::RandomPlus => random_plus(a, &mut rng)?.labeling(),
                Baseline::Texttiling => texttiling(a, &inputs.texttiling)?,
                Baseline::EmbedSim => {
                    let vectors = inputs
                        .sentence_vectors
                        .ok_or_else(|| Error::Validation("embed-sim needs sentence vectors".into()))?
                        .get(&a.id)
                        .ok_or_else(|| {
                            Error::Validation(format!("no sentence vectors for abstract `{}`", a.id))
                        })?;
                    embed_sim_baseline(a, vectors, inputs.split_mode)?
                }
            };
            Ok(AssignmentRecord::from_labeling(a.id.clone(), labeling))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs(sentences: &[&[&str]]) -> TokenizedAbstract {
        TokenizedAbstract::new(
            "a",
            sentences
                .iter()
                .map(|s| s.iter().map(|w| w.to_string()).collect())
                .collect(),
        )
    }

    fn blank(n: usize) -> TokenizedAbstract {
        TokenizedAbstract::new("a", vec![vec!["x".to_string()]; n])
    }

    #[test]
    fn random_base_has_two_boundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert_eq!(random_base(&blank(7), &mut rng).unwrap().ones(), 2);
        }
        assert_eq!(random_base(&blank(2), &mut rng).unwrap().to_string(), "11");
        assert!(random_base(&blank(1), &mut rng).is_err());
    }

    #[test]
    fn random_plus_stays_in_candidate_family() {
        let table = ["0000011", "0000101", "1000010", "0001001", "1000100", "0100010"];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut freq = [0usize; 6];
        for _ in 0..6000 {
            let c = random_plus(&blank(7), &mut rng).unwrap();
            assert!(table.contains(&c.labeling().to_string().as_str()));
            freq[c.config_rank] += 1;
        }
        for f in freq {
            assert!((900..=1100).contains(&f), "{freq:?}");
        }
        assert_eq!(random_plus(&blank(2), &mut rng).unwrap().config_rank, 0);
    }

    #[test]
    fn texttiling_finds_vocabulary_shift() {
        let a = abs(&[
            &["virus", "spike", "cells"],
            &["virus", "cells", "spike"],
            &["spike", "virus", "cells"],
            &["vaccine", "dose", "trial"],
            &["dose", "trial", "vaccine"],
            &["trial", "vaccine", "dose"],
        ]);
        let depths = texttiling_depths(&a, &TextTilingParams::default());
        let deepest = (0..depths.len())
            .max_by(|&x, &y| depths[x].total_cmp(&depths[y]))
            .unwrap();
        assert_eq!(deepest, 2);
        assert_eq!(
            texttiling(&a, &TextTilingParams::default()).unwrap().to_string(),
            "001001"
        );
    }

    #[test]
    fn texttiling_fallback_on_uniform_text() {
        let a = abs(&[&["same", "words"][..]; 5]);
        assert_eq!(
            texttiling(&a, &TextTilingParams::default()).unwrap().to_string(),
            "10001"
        );
        let two = abs(&[&["a"], &["b"]]);
        assert_eq!(texttiling(&two, &TextTilingParams::default()).unwrap().to_string(), "11");
    }

    #[test]
    fn embed_sim_ties_and_argmax() {
        let a = blank(4);
        let same = vec![vec![1.0, 0.0]; 4];
        assert_eq!(
            embed_sim_baseline(&a, &same, SplitMode::Linear).unwrap().to_string(),
            "1001"
        );

        // sentences 0-2 along x, 3-5 along y, except sentence 3 leans to x
        let b = blank(6);
        let v = vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.8, 0.6],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ];
        // brute-force the split cosines
        let cos_at = |i: usize| cosine(&mean_vector(&v[..i]), &mean_vector(&v[i..]));
        let expected = (1..6).max_by(|&x, &y| cos_at(x).total_cmp(&cos_at(y))).unwrap();
        let got = embed_sim_baseline(&b, &v, SplitMode::Linear).unwrap();
        assert_eq!(got, BoundaryLabeling::from_positions(6, &[expected - 1, 5]));

        assert_eq!(
            embed_sim_baseline(&blank(2), &[vec![1.0], vec![2.0]], SplitMode::Linear)
                .unwrap()
                .to_string(),
            "11"
        );
        assert!(embed_sim_baseline(&b, &v[..5], SplitMode::Linear).is_err());
        assert_eq!(
            embed_sim_baseline(&b, &v, SplitMode::Cycled).unwrap().ones(),
            2
        );
    }
}
