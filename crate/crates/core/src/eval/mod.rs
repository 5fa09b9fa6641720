//! Scoring hypothesized segmentations against gold conclusions.
//!
//! Pk and WindowDiff compare boundary labelings, Jaccard compares
//! conclusion index sets, and ROUGE compares the conclusion token streams.

mod metrics;
mod stats;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use metrics::{default_window, jaccard, pk, rouge_l, rouge_mean, rouge_n, window_diff};
pub use stats::{pearson, wilcoxon_signed_rank, Correlation, Wilcoxon, WILCOXON_MIN_PAIRS};

use crate::corpus::TokenizedAbstract;
use crate::cycle::BoundaryLabeling;
use crate::greedy::AssignmentRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Fixed window for Pk and WindowDiff. `None` derives it per abstract
    /// from the reference labeling.
    pub window_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractMetrics {
    pub id: String,
    pub window_k: usize,
    pub pk: f64,
    pub window_diff: f64,
    pub jaccard: f64,
    pub rouge_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub pk: f64,
    pub window_diff: f64,
    pub jaccard: f64,
    pub rouge_mean: f64,
    /// The fixed window if one was requested.
    pub window_k: Option<usize>,
    pub num_abstracts: usize,
    pub per_abstract: Vec<AbstractMetrics>,
}

impl MetricReport {
    pub fn metric(&self, m: Metric) -> f64 {
        match m {
            Metric::Pk => self.pk,
            Metric::WindowDiff => self.window_diff,
            Metric::Jaccard => self.jaccard,
            Metric::Rouge => self.rouge_mean,
        }
    }

    pub fn per_abstract_values(&self, m: Metric) -> Vec<f64> {
        self.per_abstract
            .iter()
            .map(|a| match m {
                Metric::Pk => a.pk,
                Metric::WindowDiff => a.window_diff,
                Metric::Jaccard => a.jaccard,
                Metric::Rouge => a.rouge_mean,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Pk,
    WindowDiff,
    Jaccard,
    Rouge,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Pk, Metric::WindowDiff, Metric::Jaccard, Metric::Rouge];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Pk => "pk",
            Metric::WindowDiff => "window_diff",
            Metric::Jaccard => "jaccard",
            Metric::Rouge => "rouge_mean",
        }
    }

    /// Pk and WindowDiff are error rates.
    pub fn lower_is_better(self) -> bool {
        matches!(self, Metric::Pk | Metric::WindowDiff)
    }
}

fn conclusion_tokens<'a>(a: &'a TokenizedAbstract, indices: &BTreeSet<usize>) -> Vec<&'a str> {
    indices
        .iter()
        .flat_map(|&i| a.sentences[i].iter().map(String::as_str))
        .collect()
}

pub fn evaluate_abstract(
    a: &TokenizedAbstract,
    hypothesis: &AssignmentRecord,
    opts: &EvalOptions,
) -> Result<AbstractMetrics> {
    let gold = a
        .gold
        .as_ref()
        .ok_or_else(|| Error::Validation(format!("abstract `{}` has no gold label", a.id)))?;
    let n = a.n();
    if hypothesis.labeling.len() != n {
        return Err(Error::Validation(format!(
            "abstract `{}`: labeling has {} positions, abstract has {n} sentences",
            a.id,
            hypothesis.labeling.len()
        )));
    }
    let hyp_set: BTreeSet<usize> = hypothesis.conclusion_indices.iter().copied().collect();
    if let Some(bad) = hyp_set.iter().find(|&&i| i >= n) {
        return Err(Error::Validation(format!(
            "abstract `{}`: conclusion index {bad} out of range",
            a.id
        )));
    }
    let reference = BoundaryLabeling::from_conclusion(n, gold);
    let k = opts.window_k.unwrap_or_else(|| default_window(&reference));
    let ref_tokens = conclusion_tokens(a, gold);
    let hyp_tokens = conclusion_tokens(a, &hyp_set);
    let rouge = rouge_mean(&hyp_tokens, &ref_tokens)
        .map_err(|e| Error::Validation(format!("abstract `{}`: {e}", a.id)))?;
    Ok(AbstractMetrics {
        id: a.id.clone(),
        window_k: k.min(n.saturating_sub(1)).max(1),
        pk: pk(&reference, &hypothesis.labeling, k)?,
        window_diff: window_diff(&reference, &hypothesis.labeling, k)?,
        jaccard: jaccard(&hyp_set, gold),
        rouge_mean: rouge,
    })
}

/// Scores a full run. Every corpus abstract needs a gold label and exactly
/// one hypothesis, and every hypothesis must name a corpus abstract.
pub fn evaluate_run(
    corpus: &[TokenizedAbstract],
    hypotheses: &[AssignmentRecord],
    opts: &EvalOptions,
) -> Result<MetricReport> {
    if corpus.is_empty() {
        return Err(Error::Validation("cannot evaluate an empty corpus".into()));
    }
    let unlabelled: Vec<&str> = corpus
        .iter()
        .filter(|a| a.gold.is_none())
        .map(|a| a.id.as_str())
        .collect();
    if !unlabelled.is_empty() {
        return Err(Error::Validation(format!(
            "abstracts without gold labels: {}",
            unlabelled.join(", ")
        )));
    }
    let mut by_id: BTreeMap<&str, &AssignmentRecord> = BTreeMap::new();
    for h in hypotheses {
        if by_id.insert(h.id.as_str(), h).is_some() {
            return Err(Error::Validation(format!("duplicate hypothesis for `{}`", h.id)));
        }
    }
    let known: BTreeSet<&str> = corpus.iter().map(|a| a.id.as_str()).collect();
    let extra: Vec<&str> = by_id.keys().copied().filter(|id| !known.contains(id)).collect();
    if !extra.is_empty() {
        return Err(Error::UnknownId(extra.join(", ")));
    }
    let missing: Vec<&str> = known.iter().copied().filter(|id| !by_id.contains_key(id)).collect();
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "abstracts without a hypothesis: {}",
            missing.join(", ")
        )));
    }

    let per_abstract = corpus
        .iter()
        .map(|a| evaluate_abstract(a, by_id[a.id.as_str()], opts))
        .collect::<Result<Vec<_>>>()?;
    let m = per_abstract.len() as f64;
    let mean = |f: fn(&AbstractMetrics) -> f64| per_abstract.iter().map(f).sum::<f64>() / m;
    Ok(MetricReport {
        pk: mean(|a| a.pk),
        window_diff: mean(|a| a.window_diff),
        jaccard: mean(|a| a.jaccard),
        rouge_mean: mean(|a| a.rouge_mean),
        window_k: opts.window_k,
        num_abstracts: per_abstract.len(),
        per_abstract,
    })
}

/// Paired per-abstract comparison of two runs on one metric.
pub fn compare_runs(a: &MetricReport, b: &MetricReport, metric: Metric) -> Result<Wilcoxon> {
    let ids_a: Vec<&str> = a.per_abstract.iter().map(|r| r.id.as_str()).collect();
    let ids_b: Vec<&str> = b.per_abstract.iter().map(|r| r.id.as_str()).collect();
    if ids_a != ids_b {
        return Err(Error::Validation("runs cover different abstracts".into()));
    }
    wilcoxon_signed_rank(&a.per_abstract_values(metric), &b.per_abstract_values(metric))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abstract_7() -> TokenizedAbstract {
        let s = |w: &[&str]| w.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        TokenizedAbstract::new(
            "x",
            vec![
                s(&["p0"]),
                s(&["p1"]),
                s(&["p2"]),
                s(&["p3"]),
                s(&["a", "b", "c"]),
                s(&["q5"]),
                s(&["a", "b", "d"]),
            ],
        )
        .with_gold([4, 5, 6])
    }

    #[test]
    fn scores_a_single_abstract() {
        let a = abstract_7();
        let hyp = AssignmentRecord::from_labeling("x", "0000011".parse().unwrap());
        assert_eq!(hyp.conclusion_indices, vec![6]);
        let r = evaluate_run(&[a], &[hyp], &EvalOptions { window_k: Some(2) }).unwrap();
        assert!((r.pk - 0.6).abs() < 1e-12);
        assert!((r.jaccard - 1.0 / 3.0).abs() < 1e-12);
        // hypothesis tokens a b d against reference a b c q5 a b d
        let expected = rouge_mean(&["a", "b", "d"], &["a", "b", "c", "q5", "a", "b", "d"]).unwrap();
        assert!((r.rouge_mean - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_runs() {
        let a = abstract_7();
        let good = AssignmentRecord::from_labeling("x", "0000011".parse().unwrap());
        let other = AssignmentRecord::from_labeling("y", "0000011".parse().unwrap());
        let opts = EvalOptions::default();
        assert!(matches!(
            evaluate_run(std::slice::from_ref(&a), &[good.clone(), other], &opts),
            Err(Error::UnknownId(_))
        ));
        assert!(evaluate_run(std::slice::from_ref(&a), &[], &opts).is_err());
        let short = AssignmentRecord::from_labeling("x", "000011".parse().unwrap());
        assert!(evaluate_run(std::slice::from_ref(&a), &[short], &opts).is_err());
        let mut unlabelled = a;
        unlabelled.gold = None;
        let err = evaluate_run(&[unlabelled], &[good], &opts).unwrap_err();
        assert!(err.to_string().contains('x'));
    }

    #[test]
    fn perfect_hypothesis_scores_perfectly() {
        let a = abstract_7();
        let hyp = AssignmentRecord::from_labeling("x", "0001001".parse().unwrap());
        let r = evaluate_run(&[a], &[hyp], &EvalOptions::default()).unwrap();
        assert_eq!((r.pk, r.window_diff, r.jaccard, r.rouge_mean), (0.0, 0.0, 1.0, 1.0));
    }
}
