//! Seeded synthetic corpora with a planted premise/conclusion coupling.
//!
//! Every abstract draws a topic. Premise sentences use the topic's premise
//! vocabulary, conclusion sentences its conclusion vocabulary, and both mix
//! in words from a shared background pool. The gold conclusion is one of
//! the cycled candidate windows, so an exact recovery is possible.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{RawAbstract, TokenizedAbstract};
use crate::cycle::enumerate_candidates;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub num_abstracts: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub words_per_sentence: usize,
    pub num_topics: usize,
    /// Topic-specific words per role.
    pub topic_vocab: usize,
    pub background_vocab: usize,
    /// Probability that a token comes from the background pool.
    pub noise: f64,
    /// Probability that the gold window wraps around to the first sentence.
    pub wrap_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            num_abstracts: 50,
            min_sentences: 6,
            max_sentences: 12,
            words_per_sentence: 6,
            num_topics: 8,
            topic_vocab: 6,
            background_vocab: 60,
            noise: 0.3,
            wrap_rate: 0.05,
            seed: 0,
        }
    }
}

fn word(prefix: &str, topic: usize, i: usize) -> String {
    format!("{prefix}{}{}", letters(topic), letters(i))
}

/// Digit-free suffixes so generated words survive preprocessing.
fn letters(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    s.reverse();
    String::from_utf8(s).expect("ascii")
}

/// Raw abstracts, one sentence per generated clause, with gold labels.
pub fn generate_raw(cfg: &SyntheticConfig) -> Vec<RawAbstract> {
    generate(cfg)
        .into_iter()
        .map(|a| {
            let sentences = a
                .sentences
                .iter()
                .map(|ws| {
                    let mut s = ws.join(" ");
                    if let Some(first) = s.get_mut(0..1) {
                        first.make_ascii_uppercase();
                    }
                    s.push('.');
                    s
                })
                .collect();
            RawAbstract {
                id: a.id.clone(),
                title: String::new(),
                sentences,
                gold_conclusion_indices: a.gold.map(|g| g.into_iter().collect()),
                section_tags: None,
            }
        })
        .collect()
}

pub fn generate(cfg: &SyntheticConfig) -> Vec<TokenizedAbstract> {
    assert!(cfg.min_sentences >= 4 && cfg.min_sentences <= cfg.max_sentences);
    assert!(cfg.num_topics > 0 && cfg.topic_vocab > 0 && cfg.words_per_sentence > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let width = letters(cfg.num_abstracts.saturating_sub(1)).len().max(3);
    (0..cfg.num_abstracts)
        .map(|i| {
            let n = rng.gen_range(cfg.min_sentences..=cfg.max_sentences);
            let topic = rng.gen_range(0..cfg.num_topics);
            let candidates = enumerate_candidates(n).expect("n >= 4");
            let linear: Vec<_> = candidates.iter().filter(|c| c.wrap == 0).collect();
            let wrapped: Vec<_> = candidates.iter().filter(|c| c.wrap > 0).collect();
            let gold = if rng.gen_bool(cfg.wrap_rate) {
                **wrapped.choose(&mut rng).expect("wrapped windows exist")
            } else {
                **linear.choose(&mut rng).expect("linear windows exist")
            };
            let sentences = (0..n)
                .map(|s| {
                    let prefix = if gold.is_conclusion(s) { "con" } else { "pre" };
                    (0..cfg.words_per_sentence)
                        .map(|_| {
                            if cfg.background_vocab > 0 && rng.gen_bool(cfg.noise) {
                                word("bg", 0, rng.gen_range(0..cfg.background_vocab))
                            } else {
                                word(prefix, topic, rng.gen_range(0..cfg.topic_vocab))
                            }
                        })
                        .collect()
                })
                .collect();
            let id = format!("syn{:0>width$}", letters(i), width = width);
            TokenizedAbstract::new(id, sentences).with_gold(gold.conclusion_set())
        })
        .collect()
}
