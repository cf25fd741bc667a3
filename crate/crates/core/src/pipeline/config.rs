use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::classify::{ClassifierSpec, DEFAULT_CLUSTERS, DEFAULT_FOLDS, DEFAULT_K};
use crate::embedding::DEFAULT_THRESHOLD;
use crate::error::{Error, Result};
use crate::metrics::{Metric, PositionBasis, RankOrder};
use crate::similarity::DEFAULT_PROFILE_SIZE;

/// Every setting of a run. Serialized as flat `key = value` lines; `#` starts
/// a comment. Relative paths are resolved against the config file's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    /// `None` selects the built-in English list.
    pub stopwords: Option<PathBuf>,
    /// `None` leaves surface forms unchanged.
    pub lexicon: Option<PathBuf>,
    /// Manifest paths point at `lemma<TAB>position` files instead of raw text.
    pub pre_lemmatized: bool,
    pub profile_size: usize,
    pub metrics: Vec<Metric>,
    /// Ranking direction per metric, indexed like [`Metric::ALL`].
    pub rank_orders: [RankOrder; 4],
    pub mds_threshold: f64,
    /// `None` means `min(M - 1, 20)`.
    pub max_dims: Option<usize>,
    /// Classifier kinds; hyperparameters come from `knn_k` and `rbfn_clusters`.
    pub classifiers: Vec<ClassifierSpec>,
    pub knn_k: usize,
    pub rbfn_clusters: usize,
    pub folds: usize,
    pub seed: u64,
    pub keep_self_loops: bool,
    pub sentence_delimited: bool,
    pub directed_metrics: bool,
    pub intermittency_positions: PositionBasis,
    pub intermittency_min_frequency: usize,
    pub tfidf_smoothed: bool,
    pub output_dir: PathBuf,
    pub cache: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            stopwords: None,
            lexicon: None,
            pre_lemmatized: false,
            profile_size: DEFAULT_PROFILE_SIZE,
            metrics: Metric::ALL.to_vec(),
            rank_orders: Metric::ALL.map(Metric::default_order),
            mds_threshold: DEFAULT_THRESHOLD,
            max_dims: None,
            classifiers: ClassifierSpec::defaults(),
            knn_k: DEFAULT_K,
            rbfn_clusters: DEFAULT_CLUSTERS,
            folds: DEFAULT_FOLDS,
            seed: 42,
            keep_self_loops: false,
            sentence_delimited: false,
            directed_metrics: false,
            intermittency_positions: PositionBasis::Filtered,
            intermittency_min_frequency: 0,
            tfidf_smoothed: false,
            output_dir: PathBuf::from("textnet-out"),
            cache: true,
        }
    }
}

fn metric_index(m: Metric) -> usize {
    Metric::ALL.iter().position(|&x| x == m).unwrap_or(0)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got \"{v}\""))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse \"{v}\"")))
}

fn parse_path(v: &str, base: &Path) -> Option<PathBuf> {
    if v.is_empty() || v == "default" || v == "none" {
        return None;
    }
    let p = PathBuf::from(v);
    Some(if p.is_absolute() { p } else { base.join(p) })
}

fn fmt_path(p: &Option<PathBuf>, none: &str) -> String {
    p.as_ref().map_or_else(|| none.to_string(), |p| p.display().to_string())
}

impl RunConfig {
    pub fn rank_order(&self, metric: Metric) -> RankOrder {
        self.rank_orders[metric_index(metric)]
    }

    /// Classifiers with the configured hyperparameters.
    pub fn classifier_specs(&self) -> Vec<ClassifierSpec> {
        self.classifiers
            .iter()
            .map(|c| match c {
                ClassifierSpec::Knn { .. } => ClassifierSpec::Knn { k: self.knn_k },
                ClassifierSpec::Rbfn { .. } => ClassifierSpec::Rbfn {
                    clusters: self.rbfn_clusters,
                },
                other => *other,
            })
            .collect()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text. Keys not set keep their defaults.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key {key}", n + 1)));
            }
            cfg.set(key, value, base)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` setting. Used for file lines and CLI overrides.
    pub fn set(&mut self, key: &str, v: &str, base: &Path) -> Result<()> {
        if let Some(metric) = key.strip_prefix("rank_") {
            let m: Metric = metric
                .parse()
                .map_err(|_| Error::Config(format!("unknown key {key}")))?;
            self.rank_orders[metric_index(m)] = v.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
            return Ok(());
        }
        match key {
            "manifest" => self.manifest = parse_path(v, base),
            "stopwords" => self.stopwords = parse_path(v, base),
            "lexicon" => self.lexicon = parse_path(v, base),
            "pre_lemmatized" => self.pre_lemmatized = parse_bool(key, v)?,
            "profile_size" => self.profile_size = parse_num(key, v)?,
            "metrics" => {
                self.metrics = v
                    .split(',')
                    .map(|s| s.trim().parse::<Metric>())
                    .collect::<Result<_>>()
                    .map_err(|e| Error::Config(e.to_string()))?
            }
            "mds_threshold" => self.mds_threshold = parse_num(key, v)?,
            "max_dims" => {
                self.max_dims = if v == "auto" { None } else { Some(parse_num(key, v)?) }
            }
            "classifiers" => {
                self.classifiers = v
                    .split(',')
                    .map(|s| s.trim().parse::<ClassifierSpec>())
                    .collect::<Result<_>>()
                    .map_err(|e| Error::Config(e.to_string()))?
            }
            "knn_k" => self.knn_k = parse_num(key, v)?,
            "rbfn_clusters" => self.rbfn_clusters = parse_num(key, v)?,
            "folds" => self.folds = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "keep_self_loops" => self.keep_self_loops = parse_bool(key, v)?,
            "sentence_delimited" => self.sentence_delimited = parse_bool(key, v)?,
            "directed_metrics" => self.directed_metrics = parse_bool(key, v)?,
            "intermittency_positions" => {
                self.intermittency_positions = v.parse().map_err(|e: Error| Error::Config(e.to_string()))?
            }
            "intermittency_min_frequency" => self.intermittency_min_frequency = parse_num(key, v)?,
            "tfidf_smoothed" => self.tfidf_smoothed = parse_bool(key, v)?,
            "output_dir" => {
                self.output_dir = parse_path(v, base).ok_or_else(|| Error::Config("output_dir is empty".into()))?
            }
            "cache" => self.cache = parse_bool(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.profile_size < 1 {
            return fail("profile_size must be at least 1");
        }
        if self.metrics.is_empty() {
            return fail("metrics is empty");
        }
        let distinct: BTreeSet<_> = self.metrics.iter().map(|m| m.name()).collect();
        if distinct.len() != self.metrics.len() {
            return fail("metrics lists a metric twice");
        }
        if !(self.mds_threshold > 0.0 && self.mds_threshold < 1.0) {
            return fail("mds_threshold must lie in (0, 1)");
        }
        if self.max_dims == Some(0) {
            return fail("max_dims must be at least 1");
        }
        if self.classifiers.is_empty() {
            return fail("classifiers is empty");
        }
        if self.knn_k < 1 || self.rbfn_clusters < 1 {
            return fail("knn_k and rbfn_clusters must be at least 1");
        }
        if self.folds < 2 {
            return fail("folds must be at least 2");
        }
        Ok(())
    }

    /// Every key with its resolved value.
    pub fn to_config_string(&self) -> String {
        let mut out = String::from("# textnet run configuration (fully resolved)\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("manifest", fmt_path(&self.manifest, "none"));
        kv("stopwords", fmt_path(&self.stopwords, "default"));
        kv("lexicon", fmt_path(&self.lexicon, "none"));
        kv("pre_lemmatized", self.pre_lemmatized.to_string());
        kv("profile_size", self.profile_size.to_string());
        kv(
            "metrics",
            self.metrics.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
        );
        for m in Metric::ALL {
            kv(&format!("rank_{}", m.name()), self.rank_order(m).to_string());
        }
        kv("mds_threshold", format!("{:?}", self.mds_threshold));
        kv("max_dims", self.max_dims.map_or("auto".into(), |d| d.to_string()));
        kv(
            "classifiers",
            self.classifiers.iter().map(|c| c.label()).collect::<Vec<_>>().join(","),
        );
        kv("knn_k", self.knn_k.to_string());
        kv("rbfn_clusters", self.rbfn_clusters.to_string());
        kv("folds", self.folds.to_string());
        kv("seed", self.seed.to_string());
        kv("keep_self_loops", self.keep_self_loops.to_string());
        kv("sentence_delimited", self.sentence_delimited.to_string());
        kv("directed_metrics", self.directed_metrics.to_string());
        kv("intermittency_positions", self.intermittency_positions.to_string());
        kv("intermittency_min_frequency", self.intermittency_min_frequency.to_string());
        kv("tfidf_smoothed", self.tfidf_smoothed.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        kv("cache", self.cache.to_string());
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_config_string()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig {
            manifest: Some("/data/m.csv".into()),
            output_dir: "/data/out".into(),
            metrics: vec![Metric::Betweenness, Metric::Degree],
            max_dims: Some(6),
            knn_k: 5,
            ..Default::default()
        };
        cfg.rank_orders[0] = RankOrder::Lowest;
        let back = RunConfig::parse(&cfg.to_config_string(), Path::new("/")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn relative_paths_and_comments() {
        let cfg = RunConfig::parse("# c\nmanifest = m.csv  # trailing\n\nseed=7\n", Path::new("/base")).unwrap();
        assert_eq!(cfg.manifest, Some(PathBuf::from("/base/m.csv")));
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn rejects_bad_input() {
        let base = Path::new(".");
        for text in [
            "colour = red",
            "seed = x",
            "seed = 1\nseed = 2",
            "folds = 1",
            "metrics = degree,degree",
            "rank_speed = highest",
            "no equals sign",
        ] {
            let err = RunConfig::parse(text, base).unwrap_err();
            assert_eq!(err.kind(), crate::ErrorKind::Config, "{text}");
        }
    }

    #[test]
    fn classifier_hyperparameters() {
        let cfg = RunConfig::parse("classifiers = knn,rbfn\nknn_k = 1\nrbfn_clusters = 4", Path::new(".")).unwrap();
        assert_eq!(
            cfg.classifier_specs(),
            vec![ClassifierSpec::Knn { k: 1 }, ClassifierSpec::Rbfn { clusters: 4 }]
        );
    }
}
