//! Corpus ingestion: JSONL loading, sentence splitting, token preprocessing
//! and dataset statistics.
//!
//! One record per line:
//!
//! ```json
//! {"id": "a1", "title": "...", "sentences": ["...", "..."], "gold_conclusion_indices": [5, 6]}
//! {"id": "a2", "title": "...", "body": "Raw text. Split by the engine.", "section_tags": ["Background", "Conclusions"]}
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const STOPWORDS_EN: &str = include_str!("../resources/stopwords_en.txt");
const ABBREVIATIONS_EN: &str = include_str!("../resources/abbreviations_en.txt");

/// An abstract as stored on disk, after sentence splitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawAbstract {
    pub id: String,
    pub title: String,
    pub sentences: Vec<String>,
    /// 0-based, sorted, deduplicated.
    pub gold_conclusion_indices: Option<Vec<usize>>,
    pub section_tags: Option<Vec<String>>,
}

/// Wire form of one JSONL line.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    #[serde(default)]
    title: String,
    sentences: Option<Vec<String>>,
    body: Option<String>,
    gold_conclusion_indices: Option<Vec<i64>>,
    section_tags: Option<Vec<String>>,
}

/// An abstract reduced to per-sentence unigram tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedAbstract {
    pub id: String,
    /// Sentence positions are kept even when every token was removed.
    pub sentences: Vec<Vec<String>>,
    pub gold: Option<BTreeSet<usize>>,
}

impl TokenizedAbstract {
    pub fn new(id: impl Into<String>, sentences: Vec<Vec<String>>) -> Self {
        Self {
            id: id.into(),
            sentences,
            gold: None,
        }
    }

    pub fn with_gold(mut self, gold: impl IntoIterator<Item = usize>) -> Self {
        self.gold = Some(gold.into_iter().collect());
        self
    }

    /// Sentence count.
    pub fn n(&self) -> usize {
        self.sentences.len()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub num_abstracts: usize,
    /// Abstracts carrying gold conclusion labels.
    pub num_labelled: usize,
    pub num_conclusion_sentences: usize,
    pub num_premise_sentences: usize,
    pub total_sentences: usize,
    pub avg_sentences_per_abstract: f64,
    /// Conclusion sentence positions counted from the start (0, 1, ...).
    pub conclusion_positions_from_start: BTreeMap<i64, usize>,
    /// Conclusion sentence positions counted from the end (-1 is the last sentence).
    pub conclusion_positions_from_end: BTreeMap<i64, usize>,
}

/// Frozen English stopword list (`resources/stopwords_en.txt`).
#[derive(Debug, Clone)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn english() -> Self {
        Self::from_list(STOPWORDS_EN)
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn from_list(list: &str) -> Self {
        Self(
            list.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::english()
    }
}

/// Reads a JSONL corpus. Records are returned in file order.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<RawAbstract>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(BufReader::new(file))
}

/// Parses JSONL corpus text from any reader; see [`load_corpus`].
pub fn parse_corpus(reader: impl BufRead) -> Result<Vec<RawAbstract>> {
    let mut out = Vec::new();
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
        let record: Record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let raw = validate_record(record)
            .map_err(|msg| Error::Validation(format!("line {lineno}: {msg}")))?;
        if !seen.insert(raw.id.clone()) {
            return Err(Error::Validation(format!(
                "line {lineno}: duplicate abstract id `{}`",
                raw.id
            )));
        }
        out.push(raw);
    }
    Ok(out)
}

fn validate_record(record: Record) -> std::result::Result<RawAbstract, String> {
    if record.id.trim().is_empty() {
        return Err("empty abstract id".into());
    }
    let sentences = match (record.sentences, record.body) {
        (Some(_), Some(_)) => return Err("record has both `sentences` and `body`".into()),
        (None, None) => return Err("record has neither `sentences` nor `body`".into()),
        (Some(s), None) => s,
        (None, Some(body)) => split_sentences(&body).map_err(|e| e.to_string())?,
    };
    let n = sentences.len();
    if n == 0 {
        return Err(format!("abstract `{}` has no sentences", record.id));
    }

    if let Some(tags) = &record.section_tags {
        if tags.len() != n {
            return Err(format!(
                "abstract `{}`: {} section tags for {n} sentences",
                record.id,
                tags.len()
            ));
        }
    }
    let tagged_gold: Option<Vec<usize>> = record.section_tags.as_ref().map(|tags| {
        tags.iter()
            .enumerate()
            .filter(|(_, t)| is_conclusion_tag(t))
            .map(|(i, _)| i)
            .collect()
    });

    let explicit_gold = match record.gold_conclusion_indices {
        None => None,
        Some(indices) => {
            if indices.is_empty() {
                return Err(format!(
                    "abstract `{}`: empty gold_conclusion_indices",
                    record.id
                ));
            }
            let mut set = BTreeSet::new();
            for idx in indices {
                if idx < 0 || idx as usize >= n {
                    return Err(format!(
                        "abstract `{}`: gold index {idx} out of range 0..{}",
                        record.id,
                        n - 1
                    ));
                }
                set.insert(idx as usize);
            }
            Some(set.into_iter().collect::<Vec<_>>())
        }
    };

    let gold = match (explicit_gold, tagged_gold) {
        (Some(g), Some(t)) if !t.is_empty() && g != t => {
            return Err(format!(
                "abstract `{}`: gold_conclusion_indices {g:?} disagree with Conclusions tags {t:?}",
                record.id
            ))
        }
        (Some(g), _) => Some(g),
        (None, Some(t)) if !t.is_empty() => Some(t),
        (None, _) => None,
    };

    Ok(RawAbstract {
        id: record.id,
        title: record.title,
        sentences,
        gold_conclusion_indices: gold,
        section_tags: record.section_tags,
    })
}

fn is_conclusion_tag(tag: &str) -> bool {
    tag.trim().to_lowercase().starts_with("conclusion")
}

fn abbreviations() -> &'static HashSet<&'static str> {
    static SET: std::sync::OnceLock<HashSet<&'static str>> = std::sync::OnceLock::new();
    SET.get_or_init(|| {
        ABBREVIATIONS_EN
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

fn is_closing(c: char) -> bool {
    matches!(c, ')' | ']' | '"' | '\'' | '\u{2019}' | '\u{201d}')
}

fn is_opening(c: char) -> bool {
    matches!(c, '(' | '[' | '"' | '\'' | '\u{2018}' | '\u{201c}')
}

/// Rule-based sentence splitter.
///
/// A sentence ends at `.`, `?` or `!` (plus any closing quotes/brackets)
/// when followed by whitespace and a token starting with an uppercase
/// letter or digit, possibly behind an opening quote/bracket. A period does
/// not end a sentence after a vendored abbreviation (`e.g.`, `et al.`,
/// `Fig.`) or a single-letter initial.
pub fn split_sentences(text: &str) -> Result<Vec<String>> {
    if text.trim().is_empty() {
        return Err(Error::Validation("cannot split empty text".into()));
    }
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (_, c) = chars[i];
        if !matches!(c, '.' | '?' | '!') {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && matches!(chars[j].1, '.' | '?' | '!') {
            j += 1;
        }
        while j < chars.len() && is_closing(chars[j].1) {
            j += 1;
        }
        // must be followed by whitespace
        if j >= chars.len() || !chars[j].1.is_whitespace() {
            i = j.max(i + 1);
            continue;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        if k >= chars.len() {
            break;
        }
        let mut m = k;
        while m < chars.len() && is_opening(chars[m].1) {
            m += 1;
        }
        let starts_sentence = m < chars.len() && {
            let next = chars[m].1;
            next.is_uppercase() || next.is_ascii_digit()
        };
        if starts_sentence && !(c == '.' && protects_period(text, chars[start].0, chars[i].0)) {
            let end = chars[j].0;
            let sentence = text[chars[start].0..end].trim();
            if !sentence.is_empty() {
                sentences.push(sentence.to_string());
            }
            start = k;
        }
        i = k;
    }
    if start < chars.len() {
        let rest = text[chars[start].0..].trim();
        if !rest.is_empty() {
            sentences.push(rest.to_string());
        }
    }
    Ok(sentences)
}

/// True when the word ending right before the period at byte `dot` is an
/// abbreviation or an initial.
fn protects_period(text: &str, sentence_start: usize, dot: usize) -> bool {
    let before = &text[sentence_start..dot];
    let word = before
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(is_opening);
    if word.is_empty() {
        return false;
    }
    let mut letters = word.chars();
    if let (Some(first), None) = (letters.next(), letters.next()) {
        if first.is_uppercase() {
            return true;
        }
    }
    abbreviations().contains(word.to_lowercase().as_str())
}

/// Lowercases and tokenizes a sentence, dropping stopwords, tokens that
/// contain a digit, and punctuation.
///
/// Tokens are maximal runs of alphanumeric characters, hyphens and
/// apostrophes; leading/trailing hyphens and apostrophes are trimmed.
pub fn preprocess_sentence(sentence: &str, stopwords: &Stopwords) -> Vec<String> {
    let lowered = sentence.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'");
    lowered
        .split(|c: char| !(c.is_alphanumeric() || c == '-' || c == '\''))
        .map(|t| t.trim_matches(|c| c == '-' || c == '\''))
        .filter(|t| !t.is_empty())
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .filter(|t| !t.chars().any(|c| c.is_numeric()))
        .filter(|t| !stopwords.contains(t))
        .map(str::to_string)
        .collect()
}

pub fn tokenize(raw: &RawAbstract, stopwords: &Stopwords) -> TokenizedAbstract {
    TokenizedAbstract {
        id: raw.id.clone(),
        sentences: raw
            .sentences
            .iter()
            .map(|s| preprocess_sentence(s, stopwords))
            .collect(),
        gold: raw
            .gold_conclusion_indices
            .as_ref()
            .map(|g| g.iter().copied().collect()),
    }
}

pub fn tokenize_corpus(raw: &[RawAbstract], stopwords: &Stopwords) -> Vec<TokenizedAbstract> {
    raw.iter().map(|r| tokenize(r, stopwords)).collect()
}

/// Loads and tokenizes a corpus with the frozen English stopword list.
pub fn load_tokenized(path: impl AsRef<Path>) -> Result<Vec<TokenizedAbstract>> {
    let raw = load_corpus(path)?;
    Ok(tokenize_corpus(&raw, &Stopwords::english()))
}

pub fn corpus_stats(corpus: &[TokenizedAbstract]) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::Validation("cannot summarize an empty corpus".into()));
    }
    let total_sentences: usize = corpus.iter().map(TokenizedAbstract::n).sum();
    let mut stats = CorpusStats {
        num_abstracts: corpus.len(),
        num_labelled: 0,
        num_conclusion_sentences: 0,
        num_premise_sentences: 0,
        total_sentences,
        avg_sentences_per_abstract: total_sentences as f64 / corpus.len() as f64,
        conclusion_positions_from_start: BTreeMap::new(),
        conclusion_positions_from_end: BTreeMap::new(),
    };
    for a in corpus {
        let Some(gold) = &a.gold else { continue };
        stats.num_labelled += 1;
        stats.num_conclusion_sentences += gold.len();
        stats.num_premise_sentences += a.n() - gold.len();
        for &idx in gold {
            *stats
                .conclusion_positions_from_start
                .entry(idx as i64)
                .or_default() += 1;
            *stats
                .conclusion_positions_from_end
                .entry(idx as i64 - a.n() as i64)
                .or_default() += 1;
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<RawAbstract>> {
        parse_corpus(text.as_bytes())
    }

    #[test]
    fn loads_two_records() {
        let text = r#"{"id":"a1","title":"t","sentences":["One.","Two."],"gold_conclusion_indices":[1]}
{"id":"a2","title":"u","body":"First part. Second part."}
"#;
        let corpus = parse(text).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus[0].gold_conclusion_indices, Some(vec![1]));
        assert_eq!(corpus[1].sentences, vec!["First part.", "Second part."]);
    }

    #[test]
    fn rejects_duplicate_ids() {
        let text = r#"{"id":"a1","sentences":["x."]}
{"id":"a1","sentences":["y."]}"#;
        let err = parse(text).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("duplicate")), "{err}");
    }

    #[test]
    fn malformed_line_names_line_number() {
        let text = "{\"id\":\"a1\",\"sentences\":[\"x.\"]}\n{not json\n";
        match parse(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn gold_index_out_of_range() {
        let text = r#"{"id":"a1","sentences":["x.","y."],"gold_conclusion_indices":[2]}"#;
        assert!(matches!(parse(text).unwrap_err(), Error::Validation(_)));
        let text = r#"{"id":"a1","sentences":["x.","y."],"gold_conclusion_indices":[-1]}"#;
        assert!(matches!(parse(text).unwrap_err(), Error::Validation(_)));
        let text = r#"{"id":"a1","sentences":["x.","y."],"gold_conclusion_indices":[]}"#;
        assert!(matches!(parse(text).unwrap_err(), Error::Validation(_)));
    }

    #[test]
    fn section_tags_define_gold() {
        let text = r#"{"id":"s","sentences":["a.","b.","c.","d."],"section_tags":["Background","Methods","Results","Conclusions"]}"#;
        let corpus = parse(text).unwrap();
        assert_eq!(corpus[0].gold_conclusion_indices, Some(vec![3]));

        let text = r#"{"id":"s","sentences":["a.","b."],"section_tags":["Background"]}"#;
        assert!(matches!(parse(text).unwrap_err(), Error::Validation(_)));

        let text = r#"{"id":"s","sentences":["a.","b."],"section_tags":["Background","Conclusion"],"gold_conclusion_indices":[0]}"#;
        assert!(matches!(parse(text).unwrap_err(), Error::Validation(_)));
    }

    #[test]
    fn split_two_periods() {
        assert_eq!(
            split_sentences("A works. B fails.").unwrap(),
            vec!["A works.", "B fails."]
        );
    }

    #[test]
    fn split_keeps_decimal_points() {
        let s = split_sentences("Results (p<0.05) hold. Done.").unwrap();
        assert_eq!(s, vec!["Results (p<0.05) hold.", "Done."]);
    }

    #[test]
    fn split_without_terminal_period() {
        assert_eq!(
            split_sentences("no terminal period here").unwrap(),
            vec!["no terminal period here"]
        );
    }

    #[test]
    fn split_respects_abbreviations_and_initials() {
        let s = split_sentences(
            "Smith et al. Reported this in Fig. 2 of the study. J. Doe agreed. Was it true? Yes!",
        )
        .unwrap();
        assert_eq!(
            s,
            vec![
                "Smith et al. Reported this in Fig. 2 of the study.",
                "J. Doe agreed.",
                "Was it true?",
                "Yes!"
            ]
        );
    }

    #[test]
    fn split_needs_uppercase_start() {
        let s = split_sentences("We used approx. ten mice. the end. (Then) it stopped.").unwrap();
        assert_eq!(s, vec!["We used approx. ten mice. the end.", "(Then) it stopped."]);
    }

    #[test]
    fn split_rejects_empty() {
        assert!(split_sentences("   ").is_err());
    }

    #[test]
    fn preprocess_examples() {
        let sw = Stopwords::english();
        assert_eq!(
            preprocess_sentence("We tested 96 samples in 2021.", &sw),
            vec!["tested", "samples"]
        );
        assert!(preprocess_sentence("The of and.", &sw).is_empty());
        assert_eq!(
            preprocess_sentence("Antigen ANTIGEN antigen", &sw),
            vec!["antigen", "antigen", "antigen"]
        );
        assert_eq!(
            preprocess_sentence("SARS-CoV-2 and anti-body (IgG) levels -- rose.", &sw),
            vec!["anti-body", "igg", "levels", "rose"]
        );
    }

    #[test]
    fn stopword_list_is_frozen() {
        assert_eq!(Stopwords::english().len(), 179);
    }

    #[test]
    fn stats_arithmetic_and_positions() {
        let a = TokenizedAbstract::new("a", vec![vec![]; 4]).with_gold([3]);
        let b = TokenizedAbstract::new("b", vec![vec![]; 6]).with_gold([0, 5]);
        let stats = corpus_stats(&[a, b]).unwrap();
        assert_eq!(stats.avg_sentences_per_abstract, 5.0);
        assert_eq!(stats.num_conclusion_sentences, 3);
        assert_eq!(stats.num_premise_sentences, 7);
        assert_eq!(stats.conclusion_positions_from_end[&-1], 2);
        assert_eq!(stats.conclusion_positions_from_end[&-6], 1);
        assert_eq!(stats.conclusion_positions_from_start[&0], 1);
        assert!(corpus_stats(&[]).is_err());
    }
}
