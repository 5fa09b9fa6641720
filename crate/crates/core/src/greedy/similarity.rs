use std::collections::BTreeMap;

use crate::corpus::TokenizedAbstract;
use crate::{Error, Result};

/// Abstract-level vectors for nearest-neighbor batching.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityProvider {
    vectors: BTreeMap<String, Vec<f64>>,
    dimension: usize,
}

impl SimilarityProvider {
    /// Rejects empty input, mixed dimensions and zero vectors.
    pub fn new(vectors: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        let dimension = vectors
            .values()
            .next()
            .map(Vec::len)
            .ok_or_else(|| Error::Validation("no vectors".into()))?;
        if dimension == 0 {
            return Err(Error::Validation("vectors have dimension 0".into()));
        }
        for (id, v) in &vectors {
            if v.len() != dimension {
                return Err(Error::Validation(format!(
                    "vector `{id}` has dimension {}, expected {dimension}",
                    v.len()
                )));
            }
            if !v.iter().all(|x| x.is_finite()) || norm(v) == 0.0 {
                return Err(Error::Validation(format!("vector `{id}` is zero or not finite")));
            }
        }
        Ok(Self { vectors, dimension })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.vectors.contains_key(id)
    }

    pub fn cosine(&self, a: &str, b: &str) -> Result<f64> {
        let va = self.vector(a).ok_or_else(|| Error::UnknownId(a.to_string()))?;
        let vb = self.vector(b).ok_or_else(|| Error::UnknownId(b.to_string()))?;
        Ok(cosine(va, vb))
    }

    /// Errors on the first corpus abstract without a vector.
    pub fn check_covers(&self, corpus: &[TokenizedAbstract]) -> Result<()> {
        match corpus.iter().find(|a| !self.contains(&a.id)) {
            Some(a) => Err(Error::Validation(format!(
                "similarity provider has no vector for abstract `{}`",
                a.id
            ))),
            None => Ok(()),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
}

const EMPTY_ABSTRACT_WEIGHT: f64 = 1e-6;

/// TF-IDF vectors over the corpus vocabulary, L2-normalized.
///
/// Term weight is `tf * (ln((1 + N) / (1 + df)) + 1)`. Abstracts left with
/// no tokens get a uniform tiny vector.
pub fn build_tfidf_provider(corpus: &[TokenizedAbstract]) -> Result<SimilarityProvider> {
    if corpus.is_empty() {
        return Err(Error::Validation("cannot build TF-IDF vectors for an empty corpus".into()));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    let mut tfs: Vec<BTreeMap<&str, usize>> = Vec::with_capacity(corpus.len());
    for a in corpus {
        let mut tf: BTreeMap<&str, usize> = BTreeMap::new();
        for w in a.sentences.iter().flatten() {
            *tf.entry(w.as_str()).or_default() += 1;
        }
        for w in tf.keys() {
            *df.entry(w).or_default() += 1;
        }
        tfs.push(tf);
    }
    if df.is_empty() {
        return Err(Error::Validation("corpus has no tokens".into()));
    }
    let index: BTreeMap<&str, usize> = df.keys().enumerate().map(|(i, w)| (*w, i)).collect();
    let n_docs = corpus.len() as f64;

    let mut vectors = BTreeMap::new();
    for (a, tf) in corpus.iter().zip(&tfs) {
        let mut v = vec![0.0; index.len()];
        if tf.is_empty() {
            log::warn!("abstract `{}` has no tokens; using a uniform vector", a.id);
            v.fill(EMPTY_ABSTRACT_WEIGHT);
        } else {
            for (w, &count) in tf {
                let idf = ((1.0 + n_docs) / (1.0 + df[w] as f64)).ln() + 1.0;
                v[index[w]] = count as f64 * idf;
            }
            let n = norm(&v);
            v.iter_mut().for_each(|x| *x /= n);
        }
        vectors.insert(a.id.clone(), v);
    }
    SimilarityProvider::new(vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, words: &[&str]) -> TokenizedAbstract {
        TokenizedAbstract::new(id, vec![words.iter().map(|w| w.to_string()).collect()])
    }

    #[test]
    fn duplicates_and_disjoint() {
        let corpus = vec![
            doc("a", &["virus", "antigen"]),
            doc("b", &["virus", "antigen"]),
            doc("c", &["mice", "dose"]),
        ];
        let p = build_tfidf_provider(&corpus).unwrap();
        assert!((p.cosine("a", "b").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(p.cosine("a", "c").unwrap(), 0.0);
        assert!(p.cosine("a", "zz").is_err());
    }

    #[test]
    fn shared_term_has_unit_idf() {
        let corpus = vec![doc("a", &["virus", "x"]), doc("b", &["virus"])];
        let p = build_tfidf_provider(&corpus).unwrap();
        // vocabulary order: virus, x; b = [1 * 1.0, 0] normalized
        assert_eq!(p.vector("b").unwrap(), &[1.0, 0.0]);
        let a = p.vector("a").unwrap();
        let idf_x = (3.0f64 / 2.0).ln() + 1.0;
        let n = (1.0 + idf_x * idf_x).sqrt();
        assert!((a[0] - 1.0 / n).abs() < 1e-12);
        assert!((a[1] - idf_x / n).abs() < 1e-12);
    }

    #[test]
    fn empty_abstract_gets_uniform_vector() {
        let corpus = vec![doc("a", &["virus"]), doc("b", &[])];
        let p = build_tfidf_provider(&corpus).unwrap();
        assert_eq!(p.vector("b").unwrap(), &[EMPTY_ABSTRACT_WEIGHT]);
    }

    #[test]
    fn rejects_bad_vectors() {
        let zero = BTreeMap::from([("a".to_string(), vec![0.0, 0.0])]);
        assert!(SimilarityProvider::new(zero).is_err());
        let mixed = BTreeMap::from([("a".to_string(), vec![1.0]), ("b".to_string(), vec![1.0, 2.0])]);
        assert!(SimilarityProvider::new(mixed).is_err());
    }
}
