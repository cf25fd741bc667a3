//! Corpus loading and text preprocessing.
//!
//! Raw text goes through three steps before any network is built:
//!
//! 1. [`tokenize`] splits it into lowercase word tokens. A token is a run of
//!    alphabetic characters; an apostrophe or hyphen is kept only when it sits
//!    between two letters (`it's`, `well-known`). Digits and every other
//!    character act as separators.
//! 2. Stopwords are dropped ([`StopwordList`]).
//! 3. Survivors are mapped to lemmas through a [`Lemmatizer`]; the shipped
//!    implementation is a dictionary ([`LemmaLexicon`]) with identity fallback.
//!
//! Each surviving token remembers its index in the unfiltered token list, so
//! positional statistics can be computed against either sequence.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub(crate) const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub author: String,
    pub document_id: String,
    pub path: PathBuf,
}

/// List of labeled documents, read from a CSV with header `author,document_id,path`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Self {
        Self { entries }
    }

    /// Reads a manifest CSV. Relative document paths resolve against the
    /// manifest's own directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(path, 1, e.to_string()))?
            .clone();
        let expected = ["author", "document_id", "path"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::parse(
                path,
                1,
                "expected header `author,document_id,path`",
            ));
        }
        let mut entries = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
            let doc_path = PathBuf::from(&record[2]);
            let doc_path = if doc_path.is_relative() {
                base.join(doc_path)
            } else {
                doc_path
            };
            entries.push(ManifestEntry {
                author: record[0].to_string(),
                document_id: record[1].to_string(),
                path: doc_path,
            });
        }
        Ok(Self { entries })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("author,document_id,path\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{}", e.author, e.document_id, e.path.display());
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Checks non-emptiness and id uniqueness.
    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::EmptyManifest);
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.document_id.as_str()) {
                return Err(Error::DuplicateId(e.document_id.clone()));
            }
        }
        Ok(())
    }

    /// Distinct author labels in order of first appearance.
    pub fn authors(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.author) {
                out.push(e.author.clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub author: String,
    pub document_id: String,
    pub text: String,
}

pub fn load_corpus(manifest: &CorpusManifest) -> Result<Vec<Document>> {
    manifest.validate()?;
    manifest
        .entries
        .iter()
        .map(|e| {
            let bytes = fs::read(&e.path).map_err(|err| Error::io(&e.path, err))?;
            let text = String::from_utf8(bytes).map_err(|_| Error::Utf8 {
                path: e.path.clone(),
            })?;
            Ok(Document {
                author: e.author.clone(),
                document_id: e.document_id.clone(),
                text,
            })
        })
        .collect()
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

/// Splits text into lowercase word tokens.
pub fn tokenize(raw_text: &str) -> Vec<String> {
    let chars: Vec<char> = raw_text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphabetic() {
            current.extend(c.to_lowercase());
        } else if is_joiner(c)
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())
        {
            current.push(if c == '-' { '-' } else { '\'' });
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Line-delimited variant of [`tokenize`]: each non-empty line is one sentence.
pub fn tokenize_sentences(raw_text: &str) -> Vec<Vec<String>> {
    raw_text
        .lines()
        .map(tokenize)
        .filter(|s| !s.is_empty())
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordList {
    words: HashSet<String>,
}

impl StopwordList {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    /// The bundled English list.
    pub fn english() -> Self {
        Self::new(DEFAULT_STOPWORDS.lines())
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(
            text.lines().filter(|l| !l.trim_start().starts_with('#')),
        ))
    }

    pub fn contains(&self, word: &str) -> bool {
        if word.chars().any(char::is_uppercase) {
            self.words.contains(&word.to_lowercase())
        } else {
            self.words.contains(word)
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Maps a surface form to its base form.
pub trait Lemmatizer {
    fn lemma<'a>(&'a self, surface: &'a str) -> Cow<'a, str>;
}

/// Leaves every word unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityLemmatizer;

impl Lemmatizer for IdentityLemmatizer {
    fn lemma<'a>(&'a self, surface: &'a str) -> Cow<'a, str> {
        Cow::Borrowed(surface)
    }
}

/// Dictionary lemmatizer; unknown surface forms map to themselves.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaLexicon {
    map: HashMap<String, String>,
}

impl LemmaLexicon {
    pub fn new<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        Self {
            map: pairs
                .into_iter()
                .map(|(s, l)| (s.as_ref().to_lowercase(), l.as_ref().to_lowercase()))
                .filter(|(s, l)| !s.is_empty() && !l.is_empty())
                .collect(),
        }
    }

    /// Tab-separated `surface<TAB>lemma` lines.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(s), Some(l), None) if !s.trim().is_empty() && !l.trim().is_empty() => {
                    pairs.push((s.trim().to_string(), l.trim().to_string()))
                }
                _ => return Err(Error::parse(path, i + 1, "expected `surface<TAB>lemma`")),
            }
        }
        Ok(Self::new(pairs))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl Lemmatizer for LemmaLexicon {
    fn lemma<'a>(&'a self, surface: &'a str) -> Cow<'a, str> {
        match self.map.get(surface) {
            Some(l) => Cow::Borrowed(l.as_str()),
            None => Cow::Borrowed(surface),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub lemma: String,
    /// Index in the unfiltered token sequence.
    pub position: usize,
}

/// Lemmatized content words of one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenStream {
    pub document_id: String,
    pub tokens: Vec<Token>,
    /// Token count before stopword removal.
    pub original_length: usize,
    /// Indices into `tokens` where a new sentence begins. Empty unless the
    /// stream was built from sentence-split input.
    pub sentence_starts: Vec<usize>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.lemma.as_str())
    }

    /// Reads the pre-lemmatized format: one `lemma<TAB>position` per line.
    /// A `# original_length=N` line may precede the tokens; otherwise the
    /// original length is taken as last position + 1.
    pub fn read_pre_lemmatized(document_id: &str, path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = std::io::BufReader::new(file);
        let mut tokens: Vec<Token> = Vec::new();
        let mut original_length = None;
        let mut sentence_starts = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let lineno = i + 1;
            if let Some(meta) = line.strip_prefix('#') {
                let meta = meta.trim();
                if let Some(v) = meta.strip_prefix("original_length=") {
                    original_length = Some(v.trim().parse::<usize>().map_err(|_| {
                        Error::parse(path, lineno, "bad original_length value")
                    })?);
                } else if let Some(v) = meta.strip_prefix("sentence_starts=") {
                    for part in v.split(',').filter(|p| !p.trim().is_empty()) {
                        sentence_starts.push(part.trim().parse::<usize>().map_err(|_| {
                            Error::parse(path, lineno, "bad sentence_starts value")
                        })?);
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (lemma, pos) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, lineno, "expected `lemma<TAB>position`"))?;
            let position = pos
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::parse(path, lineno, "position is not an integer"))?;
            let lemma = lemma.trim().to_lowercase();
            if lemma.is_empty() {
                return Err(Error::parse(path, lineno, "empty lemma"));
            }
            if tokens.last().is_some_and(|t| t.position >= position) {
                return Err(Error::parse(path, lineno, "positions must be strictly increasing"));
            }
            tokens.push(Token { lemma, position });
        }
        let min_len = tokens.last().map_or(0, |t| t.position + 1);
        let original_length = original_length.unwrap_or(min_len);
        if original_length < min_len {
            return Err(Error::parse(path, 1, "original_length smaller than a token position"));
        }
        Ok(Self {
            document_id: document_id.to_string(),
            tokens,
            original_length,
            sentence_starts,
        })
    }

    pub fn to_pre_lemmatized(&self) -> String {
        let mut out = format!("# original_length={}\n", self.original_length);
        if !self.sentence_starts.is_empty() {
            let starts: Vec<String> = self.sentence_starts.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(out, "# sentence_starts={}", starts.join(","));
        }
        for t in &self.tokens {
            let _ = writeln!(out, "{}\t{}", t.lemma, t.position);
        }
        out
    }
}

/// Removes stopwords and lemmatizes the remaining tokens.
pub fn preprocess<L: Lemmatizer + ?Sized>(
    document_id: &str,
    tokens: &[String],
    stops: &StopwordList,
    lemmatizer: &L,
) -> TokenStream {
    let kept = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| !stops.contains(t))
        .filter_map(|(position, t)| {
            let lemma = lemmatizer.lemma(t).trim().to_lowercase();
            (!lemma.is_empty()).then_some(Token { lemma, position })
        })
        .collect();
    TokenStream {
        document_id: document_id.to_string(),
        tokens: kept,
        original_length: tokens.len(),
        sentence_starts: Vec::new(),
    }
}

/// Like [`preprocess`] over sentence-split input; positions run across the
/// whole document and `sentence_starts` marks the first surviving token of
/// every non-empty sentence.
pub fn preprocess_sentences<L: Lemmatizer + ?Sized>(
    document_id: &str,
    sentences: &[Vec<String>],
    stops: &StopwordList,
    lemmatizer: &L,
) -> TokenStream {
    let mut stream = TokenStream {
        document_id: document_id.to_string(),
        ..Default::default()
    };
    for sentence in sentences {
        let part = preprocess(document_id, sentence, stops, lemmatizer);
        if !part.tokens.is_empty() {
            stream.sentence_starts.push(stream.tokens.len());
        }
        let offset = stream.original_length;
        stream.tokens.extend(part.tokens.into_iter().map(|t| Token {
            lemma: t.lemma,
            position: t.position + offset,
        }));
        stream.original_length += sentence.len();
    }
    stream
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_basic() {
        assert_eq!(tokenize("The Dog barked!"), strings(&["the", "dog", "barked"]));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("it's 1984"), strings(&["it's"]));
    }

    #[test]
    fn tokenize_joiners() {
        assert_eq!(tokenize("a well-known fact"), strings(&["a", "well-known", "fact"]));
        assert_eq!(tokenize("'quoted' -dash- end-"), strings(&["quoted", "dash", "end"]));
        assert_eq!(tokenize("don\u{2019}t"), strings(&["don't"]));
        assert_eq!(tokenize("abc123def"), strings(&["abc", "def"]));
    }

    #[test]
    fn preprocess_stops_and_lemmas() {
        let stops = StopwordList::new(["the", "are"]);
        let lex = LemmaLexicon::new([("networks", "network"), ("running", "run")]);
        let s = preprocess("d", &strings(&["the", "networks", "are", "running"]), &stops, &lex);
        let got: Vec<(&str, usize)> = s.tokens.iter().map(|t| (t.lemma.as_str(), t.position)).collect();
        assert_eq!(got, vec![("network", 1), ("run", 3)]);
        assert_eq!(s.original_length, 4);
    }

    #[test]
    fn preprocess_sentence_with_lexicon() {
        let sentence = "On the shape of rivers in the valley floors of deserts: \
                        survey by water mapping";
        let lex = LemmaLexicon::new([("rivers", "river"), ("floors", "floor"), ("deserts", "desert"), ("mapping", "map")]);
        let s = preprocess("t", &tokenize(sentence), &StopwordList::english(), &lex);
        let lemmas: Vec<&str> = s.lemmas().collect();
        assert_eq!(
            lemmas,
            ["shape", "river", "valley", "floor", "desert", "survey", "water", "map"]
        );
    }

    #[test]
    fn all_stopwords_gives_empty_stream() {
        let toks = strings(&["the", "of", "and"]);
        let s = preprocess("d", &toks, &StopwordList::english(), &IdentityLemmatizer);
        assert!(s.is_empty());
        assert_eq!(s.original_length, 3);
    }

    #[test]
    fn stopwords_case_insensitive() {
        let stops = StopwordList::new(["The"]);
        assert!(stops.contains("the"));
        assert!(stops.contains("THE"));
    }

    #[test]
    fn sentences_keep_global_positions() {
        let sents = tokenize_sentences("the cat sat\n\nthe dog ran\n");
        let s = preprocess_sentences("d", &sents, &StopwordList::new(["the"]), &IdentityLemmatizer);
        let got: Vec<(&str, usize)> = s.tokens.iter().map(|t| (t.lemma.as_str(), t.position)).collect();
        assert_eq!(got, vec![("cat", 1), ("sat", 2), ("dog", 4), ("ran", 5)]);
        assert_eq!(s.sentence_starts, vec![0, 2]);
        assert_eq!(s.original_length, 6);
    }

    #[test]
    fn manifest_errors() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        fs::write(&a, "hello world").unwrap();
        let ok = CorpusManifest::new(vec![
            ManifestEntry { author: "x".into(), document_id: "a".into(), path: a.clone() },
            ManifestEntry { author: "y".into(), document_id: "b".into(), path: a.clone() },
        ]);
        let docs = load_corpus(&ok).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].document_id, "b");

        let missing = dir.path().join("nope.txt");
        let bad = CorpusManifest::new(vec![ManifestEntry {
            author: "x".into(),
            document_id: "a".into(),
            path: missing.clone(),
        }]);
        let err = load_corpus(&bad).unwrap_err();
        assert!(err.to_string().contains("nope.txt"), "{err}");

        let dup = CorpusManifest::new(vec![ok.entries[0].clone(), ok.entries[0].clone()]);
        assert!(matches!(load_corpus(&dup), Err(Error::DuplicateId(id)) if id == "a"));
        assert!(matches!(load_corpus(&CorpusManifest::default()), Err(Error::EmptyManifest)));
    }

    #[test]
    fn manifest_csv_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("d.txt"), "x").unwrap();
        let m = dir.path().join("manifest.csv");
        fs::write(&m, "author,document_id,path\nann,d1,d.txt\n").unwrap();
        let manifest = CorpusManifest::from_path(&m).unwrap();
        assert_eq!(manifest.entries[0].path, dir.path().join("d.txt"));
        fs::write(&m, "who,id,file\n").unwrap();
        assert!(CorpusManifest::from_path(&m).is_err());
    }

    #[test]
    fn pre_lemmatized_roundtrip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.tsv");
        let s = preprocess(
            "d",
            &strings(&["the", "networks", "run"]),
            &StopwordList::new(["the"]),
            &IdentityLemmatizer,
        );
        fs::write(&p, s.to_pre_lemmatized()).unwrap();
        assert_eq!(TokenStream::read_pre_lemmatized("d", &p).unwrap(), s);

        fs::write(&p, "a\t3\nb\t2\n").unwrap();
        assert!(TokenStream::read_pre_lemmatized("d", &p).is_err());
        fs::write(&p, "a\t0\nb\t4\n").unwrap();
        assert_eq!(TokenStream::read_pre_lemmatized("d", &p).unwrap().original_length, 5);
    }

    #[test]
    fn lexicon_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lex.tsv");
        fs::write(&p, "Ran\trun\nmice\tmouse\n").unwrap();
        let lex = LemmaLexicon::from_path(&p).unwrap();
        assert_eq!(lex.lemma("ran"), "run");
        assert_eq!(lex.lemma("cats"), "cats");
        fs::write(&p, "broken line\n").unwrap();
        assert!(LemmaLexicon::from_path(&p).is_err());
    }
}
