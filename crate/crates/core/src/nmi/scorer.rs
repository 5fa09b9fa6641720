//! Interned-token evaluation of the NMI objective.
//!
//! The search evaluates the objective thousands of times over the same
//! handful of abstracts, so each (abstract, candidate) pair is reduced once
//! to a [`SegmentCounts`]: premise and conclusion counts plus the products
//! `c(w_p, P_i) c(w_c, C_i)` that feed the joint numerators. An evaluation
//! then only merges these. Results agree with the [`CountTable`] route up
//! to summation order.
//!
//! [`CountTable`]: super::CountTable

use std::collections::HashMap;

use super::{finish_report, NmiOptions, NmiReport, Space};
use crate::{Error, Result};

/// Token interner. Ids are assigned in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    ids: HashMap<String, u32>,
    words: Vec<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.ids.insert(word.to_string(), id);
        self.words.push(word.to_string());
        id
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// One abstract's contribution under one segmentation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SegmentCounts {
    /// (token, count), sorted by token.
    pub premise: Vec<(u32, u64)>,
    pub conclusion: Vec<(u32, u64)>,
    /// (pair key, `c_p * c_c`), sorted by key; key = `premise << 32 | conclusion`.
    pub pairs: Vec<(u64, u64)>,
    pub premise_total: u64,
    pub conclusion_total: u64,
}

fn count_ids(ids: impl IntoIterator<Item = u32>) -> Vec<(u32, u64)> {
    let mut v: Vec<u32> = ids.into_iter().collect();
    v.sort_unstable();
    let mut out: Vec<(u32, u64)> = Vec::new();
    for id in v {
        match out.last_mut() {
            Some((last, c)) if *last == id => *c += 1,
            _ => out.push((id, 1)),
        }
    }
    out
}

impl SegmentCounts {
    pub fn new(premise: impl IntoIterator<Item = u32>, conclusion: impl IntoIterator<Item = u32>) -> Self {
        let premise = count_ids(premise);
        let conclusion = count_ids(conclusion);
        let mut pairs = Vec::with_capacity(premise.len() * conclusion.len());
        for &(wp, cp) in &premise {
            for &(wc, cc) in &conclusion {
                pairs.push(((wp as u64) << 32 | wc as u64, cp * cc));
            }
        }
        Self {
            premise_total: premise.iter().map(|x| x.1).sum(),
            conclusion_total: conclusion.iter().map(|x| x.1).sum(),
            premise,
            conclusion,
            pairs,
        }
    }

    pub fn from_words<'a>(
        vocab: &mut Vocabulary,
        premise: impl IntoIterator<Item = &'a str>,
        conclusion: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        let p: Vec<u32> = premise.into_iter().map(|w| vocab.intern(w)).collect();
        let c: Vec<u32> = conclusion.into_iter().map(|w| vocab.intern(w)).collect();
        Self::new(p, c)
    }
}

fn entropy_bits(counts: &[u64], total: u64) -> f64 {
    let g = total as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / g;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Evaluates the NMI of the spaces formed by `parts` (one entry per
/// abstract). `vocab_len` bounds every token id.
pub fn score(parts: &[&SegmentCounts], vocab_len: usize, opts: &NmiOptions) -> Result<NmiReport> {
    let mut premise_totals = vec![0u64; vocab_len];
    let mut conclusion_totals = vec![0u64; vocab_len];
    let mut np = 0u64;
    let mut nc = 0u64;
    let mut pair_count = 0usize;
    let mut mass_num = 0u64;
    for s in parts {
        for &(w, c) in &s.premise {
            premise_totals[w as usize] += c;
        }
        for &(w, c) in &s.conclusion {
            conclusion_totals[w as usize] += c;
        }
        np += s.premise_total;
        nc += s.conclusion_total;
        pair_count += s.pairs.len();
        mass_num += s.premise_total * s.conclusion_total;
    }
    if np == 0 {
        return Err(Error::DegenerateSpace(Space::Premise));
    }
    if nc == 0 {
        return Err(Error::DegenerateSpace(Space::Conclusion));
    }

    let mut pairs: Vec<(u64, u64)> = Vec::with_capacity(pair_count);
    for s in parts {
        pairs.extend_from_slice(&s.pairs);
    }
    pairs.sort_unstable_by_key(|p| p.0);

    let full = np as f64 * nc as f64;
    let denom = if opts.renormalize_joint {
        mass_num as f64
    } else {
        full
    };
    let (gp, gc) = (np as f64, nc as f64);
    let mut mi = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let key = pairs[i].0;
        let mut num = 0u64;
        while i < pairs.len() && pairs[i].0 == key {
            num += pairs[i].1;
            i += 1;
        }
        if num == 0 {
            continue;
        }
        let joint = num as f64 / denom;
        let pp = premise_totals[(key >> 32) as usize] as f64 / gp;
        let pc = conclusion_totals[(key & 0xffff_ffff) as usize] as f64 / gc;
        mi += joint * (joint / (pp * pc)).log2();
    }

    let hp = entropy_bits(&premise_totals, np);
    let hc = entropy_bits(&conclusion_totals, nc);
    finish_report(mi, hp, hc, mass_num as f64 / full, opts)
}
