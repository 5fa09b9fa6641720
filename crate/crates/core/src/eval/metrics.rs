use std::collections::{BTreeSet, HashMap};

use crate::cycle::BoundaryLabeling;
use crate::{Error, Result};

fn check_pair(reference: &BoundaryLabeling, hypothesis: &BoundaryLabeling, k: usize) -> Result<()> {
    if reference.len() != hypothesis.len() {
        return Err(Error::Validation(format!(
            "labeling lengths differ: reference {}, hypothesis {}",
            reference.len(),
            hypothesis.len()
        )));
    }
    if k == 0 {
        return Err(Error::Validation("window size must be at least 1".into()));
    }
    Ok(())
}

/// Boundaries between sentences `i` and `i + k` (bits `i..i + k`).
fn boundaries_in(bits: &[bool], i: usize, k: usize) -> usize {
    bits[i..i + k].iter().filter(|b| **b).count()
}

/// Windows `(i, i + k)` for `i in 0..n - k`; `k` is clamped to `n - 1`.
fn windows(n: usize, k: usize) -> Option<(usize, usize)> {
    if n < 2 {
        return None;
    }
    let k = k.min(n - 1);
    Some((n - k, k))
}

/// Window size from the reference: half the mean segment length, rounded,
/// at least 1. Segments are read linearly, so the bit on the final
/// sentence does not open a new one.
pub fn default_window(reference: &BoundaryLabeling) -> usize {
    let n = reference.len();
    if n == 0 {
        return 1;
    }
    let segments = 1 + reference.bits[..n - 1].iter().filter(|b| **b).count();
    let mean = n as f64 / segments as f64;
    ((mean / 2.0).round() as usize).max(1)
}

/// Probability that a pair of sentences `k` apart is classified
/// inconsistently (same segment in one labeling, different in the other).
pub fn pk(reference: &BoundaryLabeling, hypothesis: &BoundaryLabeling, k: usize) -> Result<f64> {
    check_pair(reference, hypothesis, k)?;
    let Some((count, k)) = windows(reference.len(), k) else {
        return Ok(0.0);
    };
    let errors = (0..count)
        .filter(|&i| {
            (boundaries_in(&reference.bits, i, k) == 0)
                != (boundaries_in(&hypothesis.bits, i, k) == 0)
        })
        .count();
    Ok(errors as f64 / count as f64)
}

/// Fraction of windows in which the two labelings place a different number
/// of boundaries.
pub fn window_diff(
    reference: &BoundaryLabeling,
    hypothesis: &BoundaryLabeling,
    k: usize,
) -> Result<f64> {
    check_pair(reference, hypothesis, k)?;
    let Some((count, k)) = windows(reference.len(), k) else {
        return Ok(0.0);
    };
    let errors = (0..count)
        .filter(|&i| boundaries_in(&reference.bits, i, k) != boundaries_in(&hypothesis.bits, i, k))
        .count();
    Ok(errors as f64 / count as f64)
}

pub fn jaccard(hypothesis: &BTreeSet<usize>, reference: &BTreeSet<usize>) -> f64 {
    let union = hypothesis.union(reference).count();
    if union == 0 {
        return 1.0;
    }
    hypothesis.intersection(reference).count() as f64 / union as f64
}

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *m.entry(g).or_insert(0) += 1;
        }
    }
    m
}

fn f_measure(overlap: usize, hyp_total: usize, ref_total: usize) -> f64 {
    if overlap == 0 || hyp_total == 0 || ref_total == 0 {
        return 0.0;
    }
    let p = overlap as f64 / hyp_total as f64;
    let r = overlap as f64 / ref_total as f64;
    2.0 * p * r / (p + r)
}

/// ROUGE-N f-measure with clipped n-gram counts.
pub fn rouge_n(hypothesis: &[&str], reference: &[&str], n: usize) -> f64 {
    let h = ngram_counts(hypothesis, n);
    let r = ngram_counts(reference, n);
    let overlap = r
        .iter()
        .map(|(g, &rc)| h.get(g).map_or(0, |&hc| hc.min(rc)))
        .sum();
    f_measure(overlap, h.values().sum(), r.values().sum())
}

fn lcs_len(a: &[&str], b: &[&str]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS-based f-measure over the whole token sequence.
pub fn rouge_l(hypothesis: &[&str], reference: &[&str]) -> f64 {
    f_measure(lcs_len(hypothesis, reference), hypothesis.len(), reference.len())
}

/// Mean of the ROUGE-1, ROUGE-2 and ROUGE-L f-measures.
pub fn rouge_mean(hypothesis: &[&str], reference: &[&str]) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::Validation("ROUGE reference is empty".into()));
    }
    Ok((rouge_n(hypothesis, reference, 1)
        + rouge_n(hypothesis, reference, 2)
        + rouge_l(hypothesis, reference))
        / 3.0)
}
