//! Synthetic labeled corpora with known authorship.
//!
//! Each author is a word source over pseudo-words. Content words come in
//! equal-probability pairs whose pair weights follow a Zipf law. An author
//! binds some pairs into fixed two-word collocations: when a bound word is
//! drawn, the pair is written with probability 1/2 and otherwise the draw is
//! repeated. Expected word counts are therefore the same whether a pair is
//! bound or not, so binding changes word order but not word frequency.
//! Function words from the default stopword list are interleaved.

use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::corpus::{CorpusManifest, ManifestEntry, StopwordList};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SyntheticMode {
    /// Authors draw from partly private vocabularies, each with its own
    /// frequency order.
    #[default]
    Vocabulary,
    /// All authors share one vocabulary and one frequency law; they differ
    /// only in which pairs they bind.
    Ordering,
}

impl FromStr for SyntheticMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vocabulary" => Ok(Self::Vocabulary),
            "ordering" => Ok(Self::Ordering),
            _ => Err(Error::InvalidArgument(format!("unknown synthetic mode \"{s}\""))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub authors: usize,
    pub documents_per_author: usize,
    /// Tokens per document, function words included.
    pub tokens_per_document: usize,
    /// Content words per author; rounded down to an even number.
    pub vocabulary_size: usize,
    /// Fraction of each author's vocabulary drawn from a shared pool.
    pub overlap: f64,
    /// Probability that a pair is bound for a given author.
    pub binding_rate: f64,
    /// Fraction of tokens that are function words.
    pub stopword_rate: f64,
    pub zipf_exponent: f64,
    pub mode: SyntheticMode,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            authors: 8,
            documents_per_author: 10,
            tokens_per_document: 20_000,
            vocabulary_size: 2_000,
            overlap: 0.5,
            binding_rate: 0.5,
            stopword_rate: 0.4,
            zipf_exponent: 1.0,
            mode: SyntheticMode::Vocabulary,
            seed: 2024,
        }
    }
}

const FUNCTION_WORDS: [&str; 30] = [
    "the", "of", "and", "to", "a", "in", "that", "it", "was", "he", "for", "on", "is", "with", "as", "his", "at",
    "by", "be", "had", "not", "but", "from", "her", "this", "which", "or", "she", "they", "were",
];

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Distinct pronounceable words built from consonant-vowel syllables,
/// skipping anything on the default stopword list.
fn pseudo_words(count: usize) -> Vec<String> {
    let stops = StopwordList::english();
    let base = CONSONANTS.len() * VOWELS.len();
    let mut out = Vec::with_capacity(count);
    let mut i = 0usize;
    while out.len() < count {
        let mut digits = Vec::new();
        let mut n = i;
        while n > 0 || digits.len() < 2 {
            digits.push(n % base);
            n /= base;
        }
        let mut w = String::with_capacity(2 * digits.len());
        for d in digits.iter().rev() {
            w.push(CONSONANTS[d / VOWELS.len()] as char);
            w.push(VOWELS[d % VOWELS.len()] as char);
        }
        if !stops.contains(&w) {
            out.push(w);
        }
        i += 1;
    }
    out
}

struct AuthorSource {
    /// Words in frequency order; entries `2j` and `2j + 1` form pair `j`.
    words: Vec<usize>,
    bound: Vec<bool>,
    sampler: WeightedAliasIndex<f64>,
}

impl AuthorSource {
    fn new(words: Vec<usize>, bound: Vec<bool>, exponent: f64) -> Result<Self> {
        let weights: Vec<f64> = (0..words.len())
            .map(|r| 1.0 / ((r / 2 + 1) as f64).powf(exponent))
            .collect();
        let sampler = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::InvalidArgument(format!("word distribution: {e}")))?;
        Ok(Self { words, bound, sampler })
    }

    /// Next content unit: one word, or a bound pair.
    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut Vec<usize>) {
        loop {
            let r = self.sampler.sample(rng);
            if !self.bound[r / 2] {
                out.push(self.words[r]);
                return;
            }
            if rng.random_bool(0.5) {
                let first = r - r % 2;
                out.push(self.words[first]);
                out.push(self.words[first + 1]);
                return;
            }
        }
    }
}

fn author_sources(cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Result<(Vec<String>, Vec<AuthorSource>)> {
    let v = cfg.vocabulary_size - cfg.vocabulary_size % 2;
    let (lexicon, orders): (Vec<String>, Vec<Vec<usize>>) = match cfg.mode {
        SyntheticMode::Ordering => {
            let mut order: Vec<usize> = (0..v).collect();
            order.shuffle(rng);
            (pseudo_words(v), vec![order; cfg.authors])
        }
        SyntheticMode::Vocabulary => {
            let shared = ((cfg.overlap * v as f64).round() as usize).min(v);
            let own = v - shared;
            let total = shared + own * cfg.authors;
            let orders = (0..cfg.authors)
                .map(|a| {
                    let mut words: Vec<usize> = (0..shared).chain(shared + a * own..shared + (a + 1) * own).collect();
                    words.shuffle(rng);
                    words
                })
                .collect();
            (pseudo_words(total), orders)
        }
    };
    let sources = orders
        .into_iter()
        .map(|words| {
            let bound = (0..words.len() / 2).map(|_| rng.random_bool(cfg.binding_rate)).collect();
            AuthorSource::new(words, bound, cfg.zipf_exponent)
        })
        .collect::<Result<_>>()?;
    Ok((lexicon, sources))
}

fn write_document(source: &AuthorSource, lexicon: &[String], cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> String {
    let function_weights: Vec<f64> = (0..FUNCTION_WORDS.len()).map(|r| 1.0 / (r + 1) as f64).collect();
    let function_sampler = WeightedAliasIndex::new(function_weights).expect("positive weights");
    let mut text = String::with_capacity(cfg.tokens_per_document * 7);
    let mut tokens = 0;
    let mut sentence_len = 0;
    let mut sentence_target = rng.random_range(8..=20);
    let mut unit = Vec::with_capacity(2);
    while tokens < cfg.tokens_per_document {
        unit.clear();
        source.draw(rng, &mut unit);
        let mut words: Vec<&str> = Vec::new();
        for &w in &unit {
            // a geometric run of function words makes their share `stopword_rate`
            while rng.random_bool(cfg.stopword_rate) {
                words.push(FUNCTION_WORDS[function_sampler.sample(rng)]);
            }
            words.push(&lexicon[w]);
        }
        for w in words {
            if sentence_len == 0 {
                let mut chars = w.chars();
                if let Some(c) = chars.next() {
                    text.extend(c.to_uppercase());
                    text.push_str(chars.as_str());
                }
            } else {
                text.push(' ');
                text.push_str(w);
            }
            sentence_len += 1;
            tokens += 1;
        }
        if sentence_len >= sentence_target {
            text.push_str(".\n");
            sentence_len = 0;
            sentence_target = rng.random_range(8..=20);
        }
    }
    if sentence_len > 0 {
        text.push_str(".\n");
    }
    text
}

/// A generated document with its author.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDocument {
    pub author: String,
    pub document_id: String,
    pub text: String,
}

pub fn synthetic_documents(cfg: &SyntheticConfig) -> Result<Vec<SyntheticDocument>> {
    if cfg.authors < 1 || cfg.documents_per_author < 1 || cfg.vocabulary_size < 2 {
        return Err(Error::InvalidArgument(
            "synthetic corpus needs an author, a document and two words".into(),
        ));
    }
    for (name, v) in [
        ("overlap", cfg.overlap),
        ("binding_rate", cfg.binding_rate),
        ("stopword_rate", cfg.stopword_rate),
    ] {
        if !(0.0..=1.0).contains(&v) || (name == "stopword_rate" && v >= 1.0) {
            return Err(Error::InvalidArgument(format!("{name} = {v} is out of range")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lexicon, sources) = author_sources(cfg, &mut rng)?;
    let mut docs = Vec::with_capacity(cfg.authors * cfg.documents_per_author);
    for (a, source) in sources.iter().enumerate() {
        for d in 0..cfg.documents_per_author {
            let mut doc_rng = ChaCha8Rng::seed_from_u64(rng.random());
            docs.push(SyntheticDocument {
                author: format!("author{:02}", a + 1),
                document_id: format!("author{:02}_{:02}", a + 1, d + 1),
                text: write_document(source, &lexicon, cfg, &mut doc_rng),
            });
        }
    }
    Ok(docs)
}

/// Writes the corpus as `texts/<id>.txt` plus `manifest.csv` under `dir`.
pub fn write_synthetic_corpus(cfg: &SyntheticConfig, dir: &Path) -> Result<CorpusManifest> {
    let texts = dir.join("texts");
    std::fs::create_dir_all(&texts).map_err(|e| Error::io(&texts, e))?;
    let mut entries = Vec::new();
    for doc in synthetic_documents(cfg)? {
        let rel = format!("texts/{}.txt", doc.document_id);
        let path = dir.join(&rel);
        std::fs::write(&path, &doc.text).map_err(|e| Error::io(&path, e))?;
        entries.push(ManifestEntry {
            author: doc.author,
            document_id: doc.document_id,
            path: rel.into(),
        });
    }
    let manifest = CorpusManifest::new(entries);
    manifest.write_csv(&dir.join("manifest.csv"))?;
    Ok(manifest)
}
