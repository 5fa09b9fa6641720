//! Word probabilities over the premise and conclusion spaces, and the
//! information measures built on them.
//!
//! With `c(w, S)` the number of occurrences of `w` in space `S`:
//!
//! * `p(w_p) = c(w_p, P) / sum c(., P)`, likewise `p(w_c)`;
//! * `p(w_p; w_c) = sum_i c(w_p, P_i) c(w_c, C_i) / (sum c(., P) * sum c(., C))`
//!   where `P_i`, `C_i` are the premise and conclusion of abstract `i`;
//! * `I(P; C) = sum over co-occurring pairs p(w_p; w_c) log2(p(w_p; w_c) / (p(w_p) p(w_c)))`;
//! * `NMI = I / U_a`, `U_a` the order-`a` power mean of `H(P)` and `H(C)`,
//!   by default `a = -inf`, i.e. `min(H(P), H(C))`.
//!
//! The joint above is evaluated as written. Its total mass is
//! `sum_i |P_i||C_i| / (|P||C|)`, which is below 1 whenever more than one
//! abstract contributes. Each pair's ratio is then at most 1, so `I` is never
//! positive. [`NmiOptions::renormalize_joint`] divides the joint by that mass
//! instead, which makes `I` a KL divergence and never negative;
//! [`NmiReport::joint_mass`] reports the mass either way.

mod scorer;
mod sweep;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedAbstract;
use crate::cycle::{apply_segmentation, SegmentationAssignment};
use crate::{Error, Result};

pub use scorer::{score, SegmentCounts, Vocabulary};
pub use sweep::{gaussian_smooth, word_boundary_sweep, SweepPoint, SweepSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Premise,
    Conclusion,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Premise => "premise",
            Space::Conclusion => "conclusion",
        })
    }
}

/// Order `a` of the power mean used as the NMI normalizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub order: f64,
}

impl Normalizer {
    /// `a = -inf`: `min(H(P), H(C))`, the least upper bound of `I`.
    pub const MIN: Normalizer = Normalizer {
        order: f64::NEG_INFINITY,
    };

    pub fn new(order: f64) -> Self {
        Self { order }
    }

    pub fn apply(&self, premise_bits: f64, conclusion_bits: f64) -> f64 {
        let a = self.order;
        if a == f64::NEG_INFINITY {
            premise_bits.min(conclusion_bits)
        } else if a == f64::INFINITY {
            premise_bits.max(conclusion_bits)
        } else if a == 0.0 {
            (premise_bits * conclusion_bits).sqrt()
        } else {
            ((premise_bits.powf(a) + conclusion_bits.powf(a)) / 2.0).powf(1.0 / a)
        }
    }
}

impl Default for Normalizer {
    fn default() -> Self {
        Self::MIN
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NmiOptions {
    /// Divide the joint by its total mass so that it sums to 1.
    pub renormalize_joint: bool,
    pub normalizer: Normalizer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmiReport {
    pub mi_bits: f64,
    pub entropy_premise_bits: f64,
    pub entropy_conclusion_bits: f64,
    pub normalizer_bits: f64,
    pub nmi: f64,
    /// Total mass of the (unnormalized) joint.
    pub joint_mass: f64,
}

/// Unigram counts per abstract and per space.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    /// abstract id -> token -> `c(w_p, P_i)`
    pub per_abstract_premise_counts: BTreeMap<String, BTreeMap<String, u64>>,
    /// abstract id -> token -> `c(w_c, C_i)`
    pub per_abstract_conclusion_counts: BTreeMap<String, BTreeMap<String, u64>>,
    pub premise_totals: BTreeMap<String, u64>,
    pub conclusion_totals: BTreeMap<String, u64>,
    pub premise_grand_total: u64,
    pub conclusion_grand_total: u64,
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one abstract's premise and conclusion tokens.
    pub fn add_segment<'a>(
        &mut self,
        id: &str,
        premise: impl IntoIterator<Item = &'a str>,
        conclusion: impl IntoIterator<Item = &'a str>,
    ) {
        let p = self
            .per_abstract_premise_counts
            .entry(id.to_string())
            .or_default();
        for w in premise {
            *p.entry(w.to_string()).or_default() += 1;
            *self.premise_totals.entry(w.to_string()).or_default() += 1;
            self.premise_grand_total += 1;
        }
        let c = self
            .per_abstract_conclusion_counts
            .entry(id.to_string())
            .or_default();
        for w in conclusion {
            *c.entry(w.to_string()).or_default() += 1;
            *self.conclusion_totals.entry(w.to_string()).or_default() += 1;
            self.conclusion_grand_total += 1;
        }
    }

    /// The same table with the premise and conclusion roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            per_abstract_premise_counts: self.per_abstract_conclusion_counts.clone(),
            per_abstract_conclusion_counts: self.per_abstract_premise_counts.clone(),
            premise_totals: self.conclusion_totals.clone(),
            conclusion_totals: self.premise_totals.clone(),
            premise_grand_total: self.conclusion_grand_total,
            conclusion_grand_total: self.premise_grand_total,
        }
    }

    fn totals(&self, space: Space) -> (&BTreeMap<String, u64>, u64) {
        match space {
            Space::Premise => (&self.premise_totals, self.premise_grand_total),
            Space::Conclusion => (&self.conclusion_totals, self.conclusion_grand_total),
        }
    }

    fn check(&self) -> Result<()> {
        if self.premise_grand_total == 0 {
            return Err(Error::DegenerateSpace(Space::Premise));
        }
        if self.conclusion_grand_total == 0 {
            return Err(Error::DegenerateSpace(Space::Conclusion));
        }
        Ok(())
    }

    /// Joint numerators `sum_i c(w_p, P_i) c(w_c, C_i)` for every pair
    /// co-occurring in at least one abstract, in sorted pair order.
    fn joint_numerators(&self) -> BTreeMap<(&str, &str), u64> {
        let mut out: BTreeMap<(&str, &str), u64> = BTreeMap::new();
        for (id, premise) in &self.per_abstract_premise_counts {
            let Some(conclusion) = self.per_abstract_conclusion_counts.get(id) else {
                continue;
            };
            for (wp, cp) in premise {
                for (wc, cc) in conclusion {
                    *out.entry((wp.as_str(), wc.as_str())).or_default() += cp * cc;
                }
            }
        }
        out
    }

    fn joint_denominator(&self) -> f64 {
        self.premise_grand_total as f64 * self.conclusion_grand_total as f64
    }
}

/// Counts induced by segmenting every abstract with its assigned candidate.
pub fn build_counts(
    corpus: &[TokenizedAbstract],
    assignment: &SegmentationAssignment,
) -> Result<CountTable> {
    let mut table = CountTable::new();
    for a in corpus {
        let c = assignment
            .get(&a.id)
            .ok_or_else(|| Error::Contract(format!("abstract `{}` missing from assignment", a.id)))?;
        let (premise, conclusion) = apply_segmentation(a, c)?;
        table.add_segment(&a.id, premise, conclusion);
    }
    Ok(table)
}

/// Counts for explicit conclusion index sets (gold labels or a stored
/// run), which need not be cycled candidates. Every abstract needs a set.
pub fn counts_from_conclusions(
    corpus: &[TokenizedAbstract],
    conclusions: &BTreeMap<String, BTreeSet<usize>>,
) -> Result<CountTable> {
    let mut table = CountTable::new();
    for a in corpus {
        let set = conclusions
            .get(&a.id)
            .ok_or_else(|| Error::Validation(format!("no conclusion set for `{}`", a.id)))?;
        if let Some(bad) = set.iter().find(|&&i| i >= a.n()) {
            return Err(Error::Validation(format!(
                "abstract `{}`: conclusion index {bad} out of range",
                a.id
            )));
        }
        let mut premise = Vec::new();
        let mut conclusion = Vec::new();
        for (i, s) in a.sentences.iter().enumerate() {
            let side = if set.contains(&i) { &mut conclusion } else { &mut premise };
            side.extend(s.iter().map(String::as_str));
        }
        table.add_segment(&a.id, premise, conclusion);
    }
    Ok(table)
}

pub fn marginal_prob(t: &CountTable, w: &str, space: Space) -> Result<f64> {
    let (totals, grand) = t.totals(space);
    if grand == 0 {
        return Err(Error::DegenerateSpace(space));
    }
    Ok(totals.get(w).copied().unwrap_or(0) as f64 / grand as f64)
}

/// `p(w_p; w_c)` as defined in the module docs (not renormalized).
pub fn joint_prob(t: &CountTable, w_p: &str, w_c: &str) -> Result<f64> {
    t.check()?;
    let mut num = 0u64;
    for (id, premise) in &t.per_abstract_premise_counts {
        let cp = premise.get(w_p).copied().unwrap_or(0);
        let cc = t
            .per_abstract_conclusion_counts
            .get(id)
            .and_then(|c| c.get(w_c))
            .copied()
            .unwrap_or(0);
        num += cp * cc;
    }
    Ok(num as f64 / t.joint_denominator())
}

/// Sum of the joint over all pairs.
pub fn joint_mass(t: &CountTable) -> Result<f64> {
    t.check()?;
    let mut mass = 0u64;
    for (id, premise) in &t.per_abstract_premise_counts {
        let np: u64 = premise.values().sum();
        let nc: u64 = t
            .per_abstract_conclusion_counts
            .get(id)
            .map(|c| c.values().sum())
            .unwrap_or(0);
        mass += np * nc;
    }
    Ok(mass as f64 / t.joint_denominator())
}

pub fn entropy(t: &CountTable, space: Space) -> Result<f64> {
    let (totals, grand) = t.totals(space);
    if grand == 0 {
        return Err(Error::DegenerateSpace(space));
    }
    let g = grand as f64;
    Ok(-totals
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / g;
            p * p.log2()
        })
        .sum::<f64>())
}

/// One pair's pointwise contribution to the mutual information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTerm {
    pub premise_word: String,
    pub conclusion_word: String,
    pub joint: f64,
    pub term_bits: f64,
}

/// All pairs with positive joint and their MI terms, in sorted pair order.
pub fn pair_terms(t: &CountTable, opts: &NmiOptions) -> Result<Vec<PairTerm>> {
    t.check()?;
    let numerators = t.joint_numerators();
    let mut denom = t.joint_denominator();
    if opts.renormalize_joint {
        let total: u64 = numerators.values().sum();
        if total == 0 {
            return Ok(Vec::new());
        }
        denom = total as f64;
    }
    let gp = t.premise_grand_total as f64;
    let gc = t.conclusion_grand_total as f64;
    Ok(numerators
        .into_iter()
        .filter(|(_, num)| *num > 0)
        .map(|((wp, wc), num)| {
            let joint = num as f64 / denom;
            let pp = t.premise_totals[wp] as f64 / gp;
            let pc = t.conclusion_totals[wc] as f64 / gc;
            PairTerm {
                premise_word: wp.to_string(),
                conclusion_word: wc.to_string(),
                joint,
                term_bits: joint * (joint / (pp * pc)).log2(),
            }
        })
        .collect())
}

pub fn mutual_information(t: &CountTable, opts: &NmiOptions) -> Result<f64> {
    Ok(pair_terms(t, opts)?.iter().map(|p| p.term_bits).sum())
}

pub fn nmi(t: &CountTable, opts: &NmiOptions) -> Result<NmiReport> {
    let mi = mutual_information(t, opts)?;
    let hp = entropy(t, Space::Premise)?;
    let hc = entropy(t, Space::Conclusion)?;
    finish_report(mi, hp, hc, joint_mass(t)?, opts)
}

pub(crate) fn finish_report(
    mi_bits: f64,
    entropy_premise_bits: f64,
    entropy_conclusion_bits: f64,
    joint_mass: f64,
    opts: &NmiOptions,
) -> Result<NmiReport> {
    let normalizer_bits = opts
        .normalizer
        .apply(entropy_premise_bits, entropy_conclusion_bits);
    if normalizer_bits.is_nan() || normalizer_bits <= 0.0 {
        return Err(Error::DegenerateNormalizer {
            premise_bits: entropy_premise_bits,
            conclusion_bits: entropy_conclusion_bits,
        });
    }
    Ok(NmiReport {
        mi_bits,
        entropy_premise_bits,
        entropy_conclusion_bits,
        normalizer_bits,
        nmi: mi_bits / normalizer_bits,
        joint_mass,
    })
}

/// The `k` pairs with the largest MI terms; ties broken by pair order.
pub fn top_contributing_pairs(
    t: &CountTable,
    k: usize,
    opts: &NmiOptions,
) -> Result<Vec<PairTerm>> {
    let mut terms = pair_terms(t, opts)?;
    // pair_terms is already in lexicographic pair order; a stable sort keeps it for ties
    terms.sort_by(|a, b| b.term_bits.total_cmp(&a.term_bits));
    terms.truncate(k);
    Ok(terms)
}
