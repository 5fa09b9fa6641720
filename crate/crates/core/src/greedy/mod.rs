//! Greedy search for the corpus segmentation maximizing NMI.
//!
//! [`greedycas_base`] fixes one abstract at a time. For the current
//! abstract it runs `epochs` rounds; each round draws a random candidate
//! for every abstract not yet fixed, keeps committed abstracts at their
//! choice, and scores all candidates of the current abstract. The best
//! candidate over all rounds is committed.
//!
//! [`greedycas_nn`] splits the corpus into chunks, carves each chunk into
//! batches of mutually similar abstracts by nearest-neighbor search around
//! random seed abstracts, and runs the base search per batch.

mod io;
mod similarity;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedAbstract;
use crate::cycle::{enumerate_candidates, CandidateSegmentation, SegmentationAssignment};
use crate::nmi::{score, NmiOptions, Normalizer, SegmentCounts, Vocabulary};
use crate::{Error, Result};

pub use io::{read_assignment, write_assignment, AssignmentRecord};
pub use similarity::{build_tfidf_provider, cosine, SimilarityProvider};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityBackend {
    LexicalTfidf,
    ExternalEmbeddings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub chunk_size: usize,
    pub rng_seed: u64,
    pub similarity_backend: SimilarityBackend,
    pub renormalize_joint: bool,
    pub normalizer: Normalizer,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            batch_size: 12,
            chunk_size: 48,
            rng_seed: 0,
            similarity_backend: SimilarityBackend::LexicalTfidf,
            renormalize_joint: true,
            normalizer: Normalizer::MIN,
        }
    }
}

impl GreedyConfig {
    pub fn nmi_options(&self) -> NmiOptions {
        NmiOptions {
            renormalize_joint: self.renormalize_joint,
            normalizer: self.normalizer,
        }
    }

    /// Checks `epochs >= 1` and `2 <= batch_size <= chunk_size <= corpus_len`.
    pub fn validate(&self, corpus_len: usize) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Validation("epochs must be at least 1".into()));
        }
        if self.batch_size < 2 {
            return Err(Error::Validation("batch size must be at least 2".into()));
        }
        if self.batch_size > self.chunk_size {
            return Err(Error::Validation(format!(
                "batch size {} exceeds chunk size {}",
                self.batch_size, self.chunk_size
            )));
        }
        if self.chunk_size > corpus_len {
            return Err(Error::Validation(format!(
                "chunk size {} exceeds corpus size {corpus_len}",
                self.chunk_size
            )));
        }
        Ok(())
    }

    /// Seed of the `index`-th batch search.
    fn batch_seed(&self, index: usize) -> u64 {
        self.rng_seed.wrapping_add(index as u64)
    }

    /// Generator for batch planning, independent of the per-batch streams.
    fn planning_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(1);
        rng
    }
}

/// One commitment made by the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixRecord {
    pub id: String,
    pub batch: usize,
    pub config_rank: usize,
    /// Best NMI seen for the committed candidate; `None` when every
    /// evaluation was degenerate.
    pub nmi_at_fix: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub index: usize,
    pub ids: Vec<String>,
    /// NMI of the batch under its final assignment.
    pub final_nmi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    pub assignment: SegmentationAssignment,
    /// Commitments in the order they were made, batch by batch.
    pub trace: Vec<FixRecord>,
    pub batches: Vec<BatchSummary>,
}

impl GreedyOutcome {
    fn merge(parts: Vec<GreedyOutcome>) -> Self {
        let mut out = GreedyOutcome {
            assignment: SegmentationAssignment::new(),
            trace: Vec::new(),
            batches: Vec::new(),
        };
        for p in parts {
            out.assignment.choices.extend(p.assignment.choices);
            out.trace.extend(p.trace);
            out.batches.extend(p.batches);
        }
        out
    }

    pub fn nmi_at_fix(&self, id: &str) -> Option<f64> {
        self.trace.iter().find(|r| r.id == id).and_then(|r| r.nmi_at_fix)
    }
}

/// Precomputed segment counts of every candidate of every batch member.
struct CandidateTable {
    vocab_len: usize,
    candidates: Vec<Vec<CandidateSegmentation>>,
    counts: Vec<Vec<SegmentCounts>>,
}

impl CandidateTable {
    fn new(batch: &[&TokenizedAbstract]) -> Result<Self> {
        let mut vocab = Vocabulary::new();
        let mut candidates = Vec::with_capacity(batch.len());
        let mut counts = Vec::with_capacity(batch.len());
        for a in batch {
            let cands = enumerate_candidates(a.n()).map_err(|e| match e {
                Error::NoValidSegmentation { n } => Error::Validation(format!(
                    "abstract `{}` has {n} sentence(s); at least 2 are needed",
                    a.id
                )),
                e => e,
            })?;
            let ids: Vec<Vec<u32>> = a
                .sentences
                .iter()
                .map(|s| s.iter().map(|w| vocab.intern(w)).collect())
                .collect();
            let per: Vec<SegmentCounts> = cands
                .iter()
                .map(|c| {
                    let mut p = Vec::new();
                    let mut q = Vec::new();
                    for (i, s) in ids.iter().enumerate() {
                        if c.is_conclusion(i) {
                            q.extend_from_slice(s);
                        } else {
                            p.extend_from_slice(s);
                        }
                    }
                    SegmentCounts::new(p, q)
                })
                .collect();
            candidates.push(cands);
            counts.push(per);
        }
        Ok(Self {
            vocab_len: vocab.len(),
            candidates,
            counts,
        })
    }

    /// NMI of the assignment `choices`, `-inf` when undefined.
    fn objective(&self, choices: &[usize], opts: &NmiOptions) -> f64 {
        let parts: Vec<&SegmentCounts> = choices
            .iter()
            .enumerate()
            .map(|(a, &j)| &self.counts[a][j])
            .collect();
        match score(&parts, self.vocab_len, opts) {
            Ok(r) if r.nmi.is_finite() => r.nmi,
            _ => f64::NEG_INFINITY,
        }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Greedy search over one batch, seeded by `cfg.rng_seed`.
///
/// The result does not depend on the order of `batch`: abstracts are
/// sorted by id before the seeded shuffle.
pub fn greedycas_base(batch: &[TokenizedAbstract], cfg: &GreedyConfig) -> Result<GreedyOutcome> {
    let refs: Vec<&TokenizedAbstract> = batch.iter().collect();
    run_batch(&refs, cfg, cfg.batch_seed(0), 0)
}

fn run_batch(
    batch: &[&TokenizedAbstract],
    cfg: &GreedyConfig,
    seed: u64,
    batch_index: usize,
) -> Result<GreedyOutcome> {
    if batch.is_empty() {
        return Err(Error::Validation("cannot segment an empty batch".into()));
    }
    if cfg.epochs == 0 {
        return Err(Error::Validation("epochs must be at least 1".into()));
    }
    let mut batch: Vec<&TokenizedAbstract> = batch.to_vec();
    batch.sort_by(|a, b| a.id.cmp(&b.id));
    let table = CandidateTable::new(&batch)?;
    let opts = cfg.nmi_options();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let k = batch.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(&mut rng);

    let mut choices = vec![0usize; k];
    let mut trace = Vec::with_capacity(k);
    for step in 0..k {
        let current = order[step];
        let residual = &order[step + 1..];
        let n_cands = table.candidates[current].len();
        let mut best: Option<(f64, usize)> = None;
        for _epoch in 0..cfg.epochs {
            for &r in residual {
                choices[r] = rng.gen_range(0..table.candidates[r].len());
            }
            let scores: Vec<f64> = (0..n_cands)
                .into_par_iter()
                .map(|j| {
                    let mut trial = choices.clone();
                    trial[current] = j;
                    table.objective(&trial, &opts)
                })
                .collect();
            for (j, s) in scores.into_iter().enumerate() {
                let better = match best {
                    None => true,
                    Some((bs, bj)) => s > bs || (s == bs && j < bj),
                };
                if better {
                    best = Some((s, j));
                }
            }
            if residual.is_empty() {
                // nothing left to resample; further epochs would repeat this one
                break;
            }
        }
        let (best_score, best_rank) = best.expect("at least one candidate");
        choices[current] = best_rank;
        trace.push(FixRecord {
            id: batch[current].id.clone(),
            batch: batch_index,
            config_rank: best_rank,
            nmi_at_fix: finite(best_score),
        });
    }

    let mut assignment = SegmentationAssignment::new();
    for (i, a) in batch.iter().enumerate() {
        assignment.insert(a.id.clone(), table.candidates[i][choices[i]]);
    }
    Ok(GreedyOutcome {
        assignment,
        trace,
        batches: vec![BatchSummary {
            index: batch_index,
            ids: batch.iter().map(|a| a.id.clone()).collect(),
            final_nmi: finite(table.objective(&choices, &opts)),
        }],
    })
}

/// Base search over the whole corpus in random batches of `cfg.batch_size`.
pub fn greedycas_base_batched(
    corpus: &[TokenizedAbstract],
    cfg: &GreedyConfig,
) -> Result<GreedyOutcome> {
    if corpus.is_empty() {
        return Err(Error::Validation("empty corpus".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Validation("batch size must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut cfg.planning_rng());
    let batches: Vec<Vec<&TokenizedAbstract>> = order
        .chunks(cfg.batch_size)
        .map(|c| c.iter().map(|&i| &corpus[i]).collect())
        .collect();
    run_batches(&batches, cfg)
}

fn run_batches(batches: &[Vec<&TokenizedAbstract>], cfg: &GreedyConfig) -> Result<GreedyOutcome> {
    let parts = batches
        .par_iter()
        .enumerate()
        .map(|(i, b)| run_batch(b, cfg, cfg.batch_seed(i), i))
        .collect::<Result<Vec<_>>>()?;
    Ok(GreedyOutcome::merge(parts))
}

/// The seed followed by its `b - 1` most cosine-similar pool members
/// (ties by id). `b` larger than the pool returns the whole pool.
pub fn nn_search(
    seed_id: &str,
    pool: &[&str],
    b: usize,
    provider: &SimilarityProvider,
) -> Result<Vec<String>> {
    if b == 0 {
        return Err(Error::Validation("batch size must be at least 1".into()));
    }
    if !pool.contains(&seed_id) {
        return Err(Error::Contract(format!("seed `{seed_id}` is not in the pool")));
    }
    let mut others = pool
        .iter()
        .filter(|&&id| id != seed_id)
        .map(|&id| Ok((provider.cosine(seed_id, id)?, id)))
        .collect::<Result<Vec<(f64, &str)>>>()?;
    others.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    let mut out = vec![seed_id.to_string()];
    out.extend(others.into_iter().take(b - 1).map(|(_, id)| id.to_string()));
    Ok(out)
}

/// Chunk the corpus (in corpus order) and partition every chunk into
/// nearest-neighbor batches around random seeds.
pub fn plan_nn_batches(
    corpus: &[TokenizedAbstract],
    cfg: &GreedyConfig,
    provider: &SimilarityProvider,
) -> Result<Vec<Vec<String>>> {
    provider.check_covers(corpus)?;
    let mut rng = cfg.planning_rng();
    let mut batches = Vec::new();
    for chunk in corpus.chunks(cfg.chunk_size) {
        let mut pool: Vec<&str> = chunk.iter().map(|a| a.id.as_str()).collect();
        while !pool.is_empty() {
            let seed = pool[rng.gen_range(0..pool.len())];
            let batch = nn_search(seed, &pool, cfg.batch_size, provider)?;
            let taken: BTreeSet<&str> = batch.iter().map(String::as_str).collect();
            pool.retain(|id| !taken.contains(id));
            batches.push(batch);
        }
    }
    Ok(batches)
}

pub fn greedycas_nn(
    corpus: &[TokenizedAbstract],
    cfg: &GreedyConfig,
    provider: &SimilarityProvider,
) -> Result<GreedyOutcome> {
    cfg.validate(corpus.len())?;
    let planned = plan_nn_batches(corpus, cfg, provider)?;
    let by_id: std::collections::HashMap<&str, &TokenizedAbstract> =
        corpus.iter().map(|a| (a.id.as_str(), a)).collect();
    let batches: Vec<Vec<&TokenizedAbstract>> = planned
        .iter()
        .map(|b| b.iter().map(|id| by_id[id.as_str()]).collect())
        .collect();
    run_batches(&batches, cfg)
}

/// NMI of `corpus` under `assignment`, `None` when undefined.
pub fn assignment_nmi(
    corpus: &[TokenizedAbstract],
    assignment: &SegmentationAssignment,
    opts: &NmiOptions,
) -> Result<Option<f64>> {
    let table = crate::nmi::build_counts(corpus, assignment)?;
    match crate::nmi::nmi(&table, opts) {
        Ok(r) => Ok(finite(r.nmi)),
        Err(Error::DegenerateSpace(_) | Error::DegenerateNormalizer { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}
