//! TF-IDF bag-of-words baseline with cosine distances.

use std::collections::{BTreeMap, HashMap};

use crate::corpus::TokenStream;
use crate::error::{Error, Result};
use crate::similarity::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IdfVariant {
    /// `ln(M / df)`
    #[default]
    Plain,
    /// `ln(M / (1 + df)) + 1`
    Smoothed,
}

/// Sparse document vectors over the union vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    pub document_ids: Vec<String>,
    /// Word to column index, columns in lexicographic word order.
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    /// `(column, weight)` pairs sorted by column; zero weights omitted.
    pub doc_vectors: Vec<Vec<(usize, f64)>>,
}

impl TfidfModel {
    pub fn weight(&self, doc: usize, word: &str) -> f64 {
        let Some(&col) = self.vocabulary.get(word) else {
            return 0.0;
        };
        self.doc_vectors[doc]
            .binary_search_by_key(&col, |&(c, _)| c)
            .map(|k| self.doc_vectors[doc][k].1)
            .unwrap_or(0.0)
    }
}

pub fn tfidf_vectors(streams: &[TokenStream]) -> Result<TfidfModel> {
    tfidf_vectors_with(streams, IdfVariant::Plain)
}

pub fn tfidf_vectors_with(streams: &[TokenStream], variant: IdfVariant) -> Result<TfidfModel> {
    if streams.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if streams.len() == 1 && variant == IdfVariant::Plain {
        log::warn!("TF-IDF over a single document: every idf is zero");
    }
    let counts: Vec<HashMap<&str, usize>> = streams
        .iter()
        .map(|s| {
            let mut tf: HashMap<&str, usize> = HashMap::new();
            for l in s.lemmas() {
                *tf.entry(l).or_insert(0) += 1;
            }
            tf
        })
        .collect();
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for tf in &counts {
        for w in tf.keys() {
            *df.entry((*w).to_string()).or_insert(0) += 1;
        }
    }
    let m = streams.len() as f64;
    let vocabulary: BTreeMap<String, usize> = df.keys().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let idf: Vec<f64> = df
        .values()
        .map(|&d| match variant {
            IdfVariant::Plain => (m / d as f64).ln(),
            IdfVariant::Smoothed => (m / (1.0 + d as f64)).ln() + 1.0,
        })
        .collect();
    let doc_vectors = counts
        .iter()
        .map(|tf| {
            let mut v: Vec<(usize, f64)> = tf
                .iter()
                .map(|(w, &c)| {
                    let col = vocabulary[*w];
                    (col, c as f64 * idf[col])
                })
                .filter(|&(_, x)| x != 0.0)
                .collect();
            v.sort_unstable_by_key(|&(c, _)| c);
            v
        })
        .collect();
    Ok(TfidfModel {
        document_ids: streams.iter().map(|s| s.document_id.clone()).collect(),
        vocabulary,
        idf,
        doc_vectors,
    })
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut sum) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

/// `1 - cos(A, B)`. A zero vector is at distance 1 from every other document.
pub fn cosine_distance_matrix(model: &TfidfModel) -> DistanceMatrix {
    let norms: Vec<f64> = model
        .doc_vectors
        .iter()
        .map(|v| v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt())
        .collect();
    DistanceMatrix::from_fn(model.document_ids.clone(), |i, j| {
        if norms[i] == 0.0 || norms[j] == 0.0 {
            return 1.0;
        }
        let cos = sparse_dot(&model.doc_vectors[i], &model.doc_vectors[j]) / (norms[i] * norms[j]);
        (1.0 - cos).clamp(0.0, 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;

    fn stream(id: &str, words: &str) -> TokenStream {
        TokenStream {
            document_id: id.into(),
            tokens: words
                .split_whitespace()
                .enumerate()
                .map(|(i, w)| Token { lemma: w.into(), position: i })
                .collect(),
            original_length: words.split_whitespace().count(),
            sentence_starts: Vec::new(),
        }
    }

    #[test]
    fn idf_values() {
        let mut docs = vec![stream("d0", "common rare")];
        for i in 1..80 {
            docs.push(stream(&format!("d{i}"), "common filler"));
        }
        let m = tfidf_vectors(&docs).unwrap();
        assert_eq!(m.idf[m.vocabulary["common"]], 0.0);
        assert!((m.idf[m.vocabulary["rare"]] - 80f64.ln()).abs() < 1e-12);
        assert!((m.idf[m.vocabulary["rare"]] - 4.382).abs() < 1e-3);
        assert_eq!(m.weight(0, "common"), 0.0);
    }

    #[test]
    fn single_document_is_all_zero() {
        let m = tfidf_vectors(&[stream("a", "x y y")]).unwrap();
        assert!(m.idf.iter().all(|&v| v == 0.0));
        assert!(m.doc_vectors[0].is_empty());
        assert!(tfidf_vectors(&[]).is_err());
    }

    #[test]
    fn cosine_cases() {
        let docs = [
            stream("a", "x y z q"),
            stream("b", "x y z q"),
            stream("c", "u v w u"),
            stream("d", "x y z q x y z q"),
        ];
        let d = cosine_distance_matrix(&tfidf_vectors(&docs).unwrap());
        d.validate().unwrap();
        assert!(d.get(0, 1).abs() < 1e-12);
        assert_eq!(d.get(0, 2), 1.0);
        assert!(d.get(0, 3).abs() < 1e-12);
    }

    #[test]
    fn smoothed_idf() {
        let docs = [stream("a", "x"), stream("b", "y")];
        let m = tfidf_vectors_with(&docs, IdfVariant::Smoothed).unwrap();
        assert!((m.idf[0] - ((2.0f64 / 2.0).ln() + 1.0)).abs() < 1e-12);
    }
}
