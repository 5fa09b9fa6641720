//! Word-level boundary sweep: how NMI changes as the premise/conclusion
//! boundary of one abstract moves word by word, every other abstract held
//! at its gold segmentation.

use serde::{Deserialize, Serialize};

use super::scorer::{score, SegmentCounts, Vocabulary};
use super::NmiOptions;
use crate::corpus::TokenizedAbstract;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Index of the first conclusion word in the flattened target.
    pub position: usize,
    pub nmi: f64,
    pub nmi_smoothed: f64,
    /// The position falls between two sentences.
    pub sentence_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub target_id: String,
    pub word_count: usize,
    pub sigma: f64,
    pub points: Vec<SweepPoint>,
}

impl SweepSeries {
    pub fn raw(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.nmi).collect()
    }

    pub fn smoothed(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.nmi_smoothed).collect()
    }
}

/// Sweeps the boundary of `target_id` across its flattened token sequence.
///
/// At position `q` the target's premise is words `0..q` and its conclusion
/// words `q..L`. Positions `0` and `L` leave one side empty and are not
/// reported, so the series has `L - 1` points. Every other abstract is
/// segmented by its gold conclusion set, which must be present. NMI is
/// recomputed from scratch at each position. `sigma > 0` applies a
/// Gaussian filter to a copy of the series.
pub fn word_boundary_sweep(
    corpus: &[TokenizedAbstract],
    target_id: &str,
    opts: &NmiOptions,
    sigma: f64,
) -> Result<SweepSeries> {
    let target = corpus
        .iter()
        .find(|a| a.id == target_id)
        .ok_or_else(|| Error::UnknownId(target_id.to_string()))?;

    let mut vocab = Vocabulary::new();
    let mut fixed = Vec::with_capacity(corpus.len());
    for a in corpus.iter().filter(|a| a.id != target_id) {
        let gold = a.gold.as_ref().ok_or_else(|| {
            Error::Validation(format!("abstract `{}` has no gold conclusion labels", a.id))
        })?;
        let mut premise = Vec::new();
        let mut conclusion = Vec::new();
        for (i, s) in a.sentences.iter().enumerate() {
            let side = if gold.contains(&i) {
                &mut conclusion
            } else {
                &mut premise
            };
            side.extend(s.iter().map(|w| vocab.intern(w)));
        }
        fixed.push(SegmentCounts::new(premise, conclusion));
    }

    let words: Vec<u32> = target
        .sentences
        .iter()
        .flatten()
        .map(|w| vocab.intern(w))
        .collect();
    let mut sentence_ends = vec![false; words.len() + 1];
    let mut acc = 0;
    for s in &target.sentences {
        acc += s.len();
        sentence_ends[acc] = true;
    }

    let len = words.len();
    let mut points = Vec::with_capacity(len.saturating_sub(1));
    for q in 1..len {
        let seg = SegmentCounts::new(words[..q].iter().copied(), words[q..].iter().copied());
        let mut parts: Vec<&SegmentCounts> = fixed.iter().collect();
        parts.push(&seg);
        let report = score(&parts, vocab.len(), opts)?;
        points.push(SweepPoint {
            position: q,
            nmi: report.nmi,
            nmi_smoothed: report.nmi,
            sentence_boundary: sentence_ends[q],
        });
    }

    if sigma > 0.0 {
        let raw: Vec<f64> = points.iter().map(|p| p.nmi).collect();
        for (p, s) in points.iter_mut().zip(gaussian_smooth(&raw, sigma)) {
            p.nmi_smoothed = s;
        }
    }

    Ok(SweepSeries {
        target_id: target_id.to_string(),
        word_count: len,
        sigma,
        points,
    })
}

/// 1-D Gaussian filter with reflecting boundaries (`d c b a | a b c d`),
/// kernel truncated at four standard deviations.
pub fn gaussian_smooth(values: &[f64], sigma: f64) -> Vec<f64> {
    let n = values.len();
    if n == 0 || sigma <= 0.0 {
        return values.to_vec();
    }
    let radius = (4.0 * sigma + 0.5) as i64;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|x| (-0.5 * (x as f64 / sigma).powi(2)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= total);

    let period = 2 * n as i64;
    let reflect = |i: i64| -> usize {
        let m = i.rem_euclid(period);
        if m < n as i64 {
            m as usize
        } else {
            (period - 1 - m) as usize
        }
    };
    (0..n as i64)
        .map(|i| {
            kernel
                .iter()
                .zip(-radius..=radius)
                .map(|(w, off)| w * values[reflect(i + off)])
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_stays_flat() {
        let v = vec![0.3; 17];
        for s in gaussian_smooth(&v, 3.0) {
            assert!((s - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn smoothing_matches_reference_values() {
        // reference: reflect-mode Gaussian filter, sigma = 1, truncate = 4
        let v = [0.0, 0.0, 1.0, 0.0, 0.0];
        let s = gaussian_smooth(&v, 1.0);
        let k = |x: f64| (-0.5 * x * x).exp();
        let norm: f64 = (-4..=4).map(|x| k(x as f64)).sum();
        // index 2 sees the impulse at offset 0, and its reflections at offsets
        // +-5 are outside the kernel
        assert!((s[2] - 1.0 / norm).abs() < 1e-12);
        // index 0 sees it at offset +2 and via reflection (index -3 -> 2) at offset -3
        assert!((s[0] - (k(2.0) + k(3.0)) / norm).abs() < 1e-12);
        let total: f64 = s.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    fn words(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn sweep_shape_and_markers() {
        let corpus = vec![
            TokenizedAbstract::new(
                "t",
                vec![words(&["virus", "cells"]), words(&["mice"]), words(&["immunity", "dose"])],
            ),
            TokenizedAbstract::new("g", vec![words(&["virus", "mice"]), words(&["immunity"])])
                .with_gold([1]),
            TokenizedAbstract::new("h", vec![words(&["cells", "dose"]), words(&["protection", "dose"])])
                .with_gold([1]),
        ];
        let series = word_boundary_sweep(&corpus, "t", &NmiOptions::default(), 3.0).unwrap();
        assert_eq!(series.word_count, 5);
        assert_eq!(series.points.len(), 4);
        let markers: Vec<usize> = series
            .points
            .iter()
            .filter(|p| p.sentence_boundary)
            .map(|p| p.position)
            .collect();
        assert_eq!(markers, vec![2, 3]);
        assert!(series.points.iter().all(|p| p.nmi.is_finite()));

        assert!(matches!(
            word_boundary_sweep(&corpus, "nope", &NmiOptions::default(), 3.0),
            Err(Error::UnknownId(_))
        ));
    }
}
