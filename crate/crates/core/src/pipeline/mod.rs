//! End-to-end runs: corpus, networks, metrics, rank distances, MDS and
//! cross-validated classification, with on-disk stage caching.
//!
//! Stage seeds come from [`stage_seed`]: `mds:<metric>` for each metric's
//! embedding, `mds:tfidf` for the baseline, `cv` for fold assignment and
//! classifier fitting, and `plot:<name>` for the 2-D scatter embeddings.

mod cache;
mod config;
mod plots;
mod report;
mod synthetic;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use cache::{stage_seed, StageStats};
pub use config::RunConfig;
pub use plots::export_plots;
pub use report::{Summary, SummaryRow, METHOD_NETWORK_MDS, METHOD_NETWORK_NO_MDS, METHOD_TFIDF_MDS};
pub use synthetic::{synthetic_documents, write_synthetic_corpus, SyntheticConfig, SyntheticDocument, SyntheticMode};

use crate::baseline::{cosine_distance_matrix, tfidf_vectors_with, IdfVariant};
use crate::classify::{cross_validate, ClassifierSpec, LabeledDataset};
use crate::corpus::{
    load_corpus, preprocess, preprocess_sentences, tokenize, tokenize_sentences, CorpusManifest, IdentityLemmatizer,
    LemmaLexicon, Lemmatizer, StopwordList, TokenStream, DEFAULT_STOPWORDS,
};
use crate::embedding::{choose_dim_labeled, combine, default_max_dims, DimChoice};
use crate::error::{Error, Result, StageContext};
use crate::graph::{build_network_with, CoocNetwork, NetworkOptions};
use crate::metrics::{metric_table_with, Metric, MetricOptions, NodeMetricTable};
use crate::similarity::{distance_matrix, rank_profile_with, DistanceMatrix, RankOptions};
use cache::{Cache, KeyBuilder};

/// Result of one command: the accuracy rows it produced plus cache statistics.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Summary,
    pub stats: StageStats,
    /// Chosen MDS dimension per embedded matrix, in run order.
    pub dims: Vec<(String, usize)>,
}

pub(crate) fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// File-name-safe form of a document id.
pub(crate) fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

/// Token streams and class labels shared by every method.
struct Prepared {
    ids: Vec<String>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    streams: Vec<TokenStream>,
    token_keys: Vec<String>,
    token_hits: Vec<bool>,
}

fn manifest_of(cfg: &RunConfig) -> Result<CorpusManifest> {
    let path = cfg
        .manifest
        .as_ref()
        .ok_or_else(|| Error::Config("no manifest given".into()))?;
    let manifest = CorpusManifest::from_path(path)?;
    manifest.validate()?;
    Ok(manifest)
}

fn lemmatizer_of(cfg: &RunConfig) -> Result<(Box<dyn Lemmatizer + Sync>, Vec<u8>)> {
    match &cfg.lexicon {
        None => Ok((Box::new(IdentityLemmatizer), b"identity".to_vec())),
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
            Ok((Box::new(LemmaLexicon::from_path(p)?), bytes))
        }
    }
}

fn stopwords_of(cfg: &RunConfig) -> Result<(StopwordList, Vec<u8>)> {
    match &cfg.stopwords {
        None => Ok((StopwordList::english(), DEFAULT_STOPWORDS.as_bytes().to_vec())),
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
            Ok((StopwordList::from_path(p)?, bytes))
        }
    }
}

fn prepare(cfg: &RunConfig, cache: &Cache, stats: &mut StageStats) -> Result<Prepared> {
    let manifest = manifest_of(cfg).stage("corpus")?;
    let class_names = manifest.authors();
    if class_names.len() < 2 {
        return Err(Error::Corpus("attribution needs at least two authors".into())).stage("corpus");
    }
    let ids: Vec<String> = manifest.entries.iter().map(|e| e.document_id.clone()).collect();
    let labels: Vec<usize> = manifest
        .entries
        .iter()
        .map(|e| class_names.iter().position(|a| *a == e.author).unwrap_or(0))
        .collect();
    cache.prepare("tokens").stage("corpus")?;

    let results: Vec<Result<(TokenStream, String, bool)>> = if cfg.pre_lemmatized {
        manifest
            .entries
            .par_iter()
            .map(|e| {
                let bytes = std::fs::read(&e.path).map_err(|err| Error::io(&e.path, err))?;
                let mut key = KeyBuilder::new("tokens-pre");
                key.text(&e.document_id).field(&bytes);
                let stream = TokenStream::read_pre_lemmatized(&e.document_id, &e.path)?;
                // nothing is computed here, so downstream caches stay usable
                Ok((stream, key.finish(), true))
            })
            .collect()
    } else {
        let docs = load_corpus(&manifest).stage("corpus")?;
        let (stops, stop_bytes) = stopwords_of(cfg).stage("corpus")?;
        let (lemmatizer, lex_bytes) = lemmatizer_of(cfg).stage("corpus")?;
        docs.par_iter()
            .map(|d| {
                let mut key = KeyBuilder::new("tokens");
                key.text(&d.document_id)
                    .field(&stop_bytes)
                    .field(&lex_bytes)
                    .text(&cfg.sentence_delimited.to_string())
                    .text(&d.text);
                let key = key.finish();
                if let Some(paths) = cache.lookup("tokens", &key, &[".tsv"]) {
                    let stream = TokenStream::read_pre_lemmatized(&d.document_id, &paths[0])?;
                    return Ok((stream, key, true));
                }
                let stream = if cfg.sentence_delimited {
                    preprocess_sentences(&d.document_id, &tokenize_sentences(&d.text), &stops, lemmatizer.as_ref())
                } else {
                    preprocess(&d.document_id, &tokenize(&d.text), &stops, lemmatizer.as_ref())
                };
                if let Some(p) = cache.entry("tokens", &key, ".tsv") {
                    write_file(&p, &stream.to_pre_lemmatized())?;
                }
                Ok((stream, key, false))
            })
            .collect()
    };
    let mut streams = Vec::with_capacity(ids.len());
    let mut token_keys = Vec::with_capacity(ids.len());
    let mut token_hits = Vec::with_capacity(ids.len());
    for r in results {
        let (s, k, hit) = r.stage("corpus")?;
        stats.record("tokens", hit);
        if s.is_empty() {
            log::warn!("{}: no content words after preprocessing", s.document_id);
        }
        streams.push(s);
        token_keys.push(k);
        token_hits.push(hit);
    }
    Ok(Prepared {
        ids,
        labels,
        class_names,
        streams,
        token_keys,
        token_hits,
    })
}

/// Networks and metric tables for every document. An entry is read from the
/// cache only if everything it was built from was too.
fn network_metrics(
    cfg: &RunConfig,
    prep: &Prepared,
    cache: &Cache,
    stats: &mut StageStats,
) -> Result<(Vec<NodeMetricTable>, Vec<String>, bool)> {
    cache.prepare("network").stage("graph")?;
    cache.prepare("metrics").stage("metrics")?;
    let net_opts = NetworkOptions {
        keep_self_loops: cfg.keep_self_loops,
        sentence_delimited: cfg.sentence_delimited,
    };
    let metric_opts = MetricOptions {
        directed: cfg.directed_metrics,
        positions: cfg.intermittency_positions,
    };
    let per_doc: Vec<Result<(bool, NodeMetricTable, String, bool)>> = (0..prep.streams.len())
        .into_par_iter()
        .map(|i| {
            let stream = &prep.streams[i];
            let mut nk = KeyBuilder::new("network");
            nk.text(&prep.token_keys[i])
                .text(&format!("{}/{}", net_opts.keep_self_loops, net_opts.sentence_delimited));
            let net_key = nk.finish();
            let cached_net = if prep.token_hits[i] {
                cache.lookup("network", &net_key, &[".nodes.tsv", ".edges.tsv"])
            } else {
                None
            };
            let (net, net_hit) = match cached_net {
                Some(p) => (CoocNetwork::read_edge_list(&p[0], &p[1]).stage("graph")?, true),
                None => {
                    let net = build_network_with(stream, net_opts);
                    if let (Some(n), Some(e)) = (
                        cache.entry("network", &net_key, ".nodes.tsv"),
                        cache.entry("network", &net_key, ".edges.tsv"),
                    ) {
                        net.write_edge_list(&n, &e).stage("graph")?;
                    }
                    (net, false)
                }
            };

            let mut mk = KeyBuilder::new("metrics");
            mk.text(&net_key)
                .text(&prep.token_keys[i])
                .text(&format!("{}/{}", metric_opts.directed, metric_opts.positions));
            let metric_key = mk.finish();
            let cached_table = if net_hit {
                cache.lookup("metrics", &metric_key, &[".csv"])
            } else {
                None
            };
            let (table, hit) = match cached_table {
                Some(p) => (NodeMetricTable::read_csv(&stream.document_id, &p[0]).stage("metrics")?, true),
                None => {
                    let table = metric_table_with(&net, stream, metric_opts).stage("metrics")?;
                    if let Some(p) = cache.entry("metrics", &metric_key, ".csv") {
                        table.write_csv(&p).stage("metrics")?;
                    }
                    (table, false)
                }
            };
            Ok((net_hit, table, metric_key, hit))
        })
        .collect();

    let mut tables = Vec::with_capacity(per_doc.len());
    let mut keys = Vec::with_capacity(per_doc.len());
    let mut all_hit = true;
    for r in per_doc {
        let (net_hit, table, key, hit) = r?;
        stats.record("network", net_hit);
        stats.record("metrics", hit);
        all_hit &= hit;
        tables.push(table);
        keys.push(key);
    }
    Ok((tables, keys, all_hit))
}

fn rank_options(cfg: &RunConfig, metric: Metric) -> RankOptions {
    RankOptions {
        order: cfg.rank_order(metric),
        min_frequency: if metric == Metric::Intermittency {
            cfg.intermittency_min_frequency
        } else {
            0
        },
    }
}

fn distance_stage(
    cfg: &RunConfig,
    tables: &[NodeMetricTable],
    metric_keys: &[String],
    metrics_hit: bool,
    cache: &Cache,
    stats: &mut StageStats,
) -> Result<Vec<(Metric, DistanceMatrix)>> {
    cache.prepare("distance")?;
    let mut out = Vec::with_capacity(cfg.metrics.len());
    for &metric in &cfg.metrics {
        let opts = rank_options(cfg, metric);
        let mut key = KeyBuilder::new("distance");
        key.text(metric.name())
            .text(&format!("{}/{}/{}", cfg.profile_size, opts.order, opts.min_frequency));
        for k in metric_keys {
            key.text(k);
        }
        let key = key.finish();
        if metrics_hit {
            if let Some(p) = cache.lookup("distance", &key, &[".csv"]) {
                stats.record("distance", true);
                out.push((metric, DistanceMatrix::read_csv(&p[0])?));
                continue;
            }
        }
        let profiles = tables
            .par_iter()
            .map(|t| rank_profile_with(t, metric, cfg.profile_size, opts))
            .collect::<Result<Vec<_>>>()?;
        let short: Vec<&str> = profiles
            .iter()
            .filter(|p| p.is_short())
            .map(|p| p.document_id.as_str())
            .collect();
        if !short.is_empty() {
            log::warn!(
                "{metric}: {} document(s) rank fewer than {} words, first {}",
                short.len(),
                cfg.profile_size,
                short[0]
            );
        }
        let d = distance_matrix(&profiles)?;
        if let Some(p) = cache.entry("distance", &key, ".csv") {
            d.write_csv(&p)?;
        }
        stats.record("distance", false);
        out.push((metric, d));
    }
    Ok(out)
}

fn effective_specs(cfg: &RunConfig, data: &LabeledDataset) -> Vec<ClassifierSpec> {
    let smallest = data.class_counts().into_iter().filter(|&c| c > 0).min().unwrap_or(0);
    let folds = cfg.folds.min(smallest).max(1);
    let largest_fold = data.len().div_ceil(folds);
    let min_train = data.len().saturating_sub(largest_fold).max(1);
    cfg.classifier_specs()
        .into_iter()
        .map(|s| match s {
            ClassifierSpec::Rbfn { clusters } if clusters > min_train => {
                log::warn!("rbfn: {clusters} clusters exceed the {min_train} training rows per fold; using {min_train}");
                ClassifierSpec::Rbfn { clusters: min_train }
            }
            ClassifierSpec::Knn { k } if k > min_train => {
                log::warn!("knn: k = {k} exceeds the {min_train} training rows per fold; using {min_train}");
                ClassifierSpec::Knn { k: min_train }
            }
            other => other,
        })
        .collect()
}

fn classify_all(
    cfg: &RunConfig,
    method: &'static str,
    prep: &Prepared,
    features: Vec<Vec<f64>>,
    summary: &mut Summary,
) -> Result<()> {
    let data = LabeledDataset::new(prep.ids.clone(), features, prep.labels.clone(), prep.class_names.len())?;
    let seed = stage_seed(cfg.seed, "cv");
    for spec in effective_specs(cfg, &data) {
        let report = cross_validate(&data, &spec, cfg.folds, seed)?;
        let stem = format!("{method}_{}", spec.label());
        report.write_csv(
            &cfg.output_dir.join(format!("cv_{stem}.csv")),
            &cfg.output_dir.join(format!("confusion_{stem}.csv")),
            &prep.class_names,
        )?;
        summary.push(method, &report, data.width());
    }
    Ok(())
}

fn embed(cfg: &RunConfig, name: &str, delta: &DistanceMatrix) -> Result<DimChoice> {
    let max_dims = cfg
        .max_dims
        .unwrap_or_else(|| default_max_dims(delta.size()))
        .min(default_max_dims(delta.size()).max(1));
    let choice = choose_dim_labeled(
        delta,
        cfg.mds_threshold,
        max_dims,
        stage_seed(cfg.seed, &format!("mds:{name}")),
        name,
    )?;
    choice.embedding.write_csv(&cfg.output_dir.join(format!("embed_{name}.csv")))?;
    choice.curve.write_csv(&cfg.output_dir.join(format!("stress_{name}.csv")))?;
    Ok(choice)
}

fn start(cfg: &RunConfig) -> Result<Cache> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    cfg.write(&cfg.output_dir.join("resolved.conf"))?;
    Ok(Cache::new(&cfg.output_dir, cfg.cache))
}

fn write_labels(cfg: &RunConfig, prep: &Prepared) -> Result<()> {
    let mut out = String::from("document_id,author\n");
    for (id, &l) in prep.ids.iter().zip(&prep.labels) {
        out.push_str(&format!("{id},{}\n", prep.class_names[l]));
    }
    write_file(&cfg.output_dir.join("labels.csv"), &out)
}

fn write_tables(cfg: &RunConfig, tables: &[NodeMetricTable]) -> Result<()> {
    let dir = cfg.output_dir.join("metrics");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut seen = std::collections::HashSet::new();
    for t in tables {
        let stem = file_stem(&t.document_id);
        if !seen.insert(stem.clone()) {
            return Err(Error::DuplicateId(format!("{} (as file name {stem})", t.document_id)));
        }
        t.write_csv(&dir.join(format!("{stem}.csv")))?;
    }
    Ok(())
}

fn network_distances(
    cfg: &RunConfig,
    cache: &Cache,
    stats: &mut StageStats,
) -> Result<(Prepared, Vec<(Metric, DistanceMatrix)>)> {
    let prep = prepare(cfg, cache, stats)?;
    write_labels(cfg, &prep).stage("report")?;
    let (tables, keys, hit) = network_metrics(cfg, &prep, cache, stats)?;
    write_tables(cfg, &tables).stage("metrics")?;
    let dists = distance_stage(cfg, &tables, &keys, hit, cache, stats).stage("similarity")?;
    for (metric, d) in &dists {
        d.write_csv(&cfg.output_dir.join(format!("dist_{}.csv", metric.name())))
            .stage("similarity")?;
    }
    Ok((prep, dists))
}

fn no_mds_features(prep: &Prepared, dists: &[(Metric, DistanceMatrix)]) -> Vec<Vec<f64>> {
    (0..prep.ids.len())
        .map(|i| dists.iter().flat_map(|(_, d)| d.row(i).iter().copied()).collect())
        .collect()
}

fn finish(cfg: &RunConfig, summary: &Summary, file: &str) -> Result<()> {
    summary.write_csv(&cfg.output_dir.join(file))?;
    report::write_joint_report(&cfg.output_dir)
}

/// Network method with MDS, plus the no-MDS variant on the same distances.
pub fn run_attribution(cfg: &RunConfig) -> Result<RunOutcome> {
    let cache = start(cfg)?;
    let mut stats = StageStats::default();
    let (prep, dists) = network_distances(cfg, &cache, &mut stats)?;
    let mut dims = Vec::new();
    let mut embeddings = Vec::with_capacity(dists.len());
    for (metric, d) in &dists {
        let choice = embed(cfg, metric.name(), d).stage("embedding")?;
        dims.push((metric.name().to_string(), choice.dims));
        embeddings.push(choice.embedding);
    }
    let features = combine(&embeddings).stage("embedding")?;
    let mut mds = Summary::new(prep.ids.len(), prep.class_names.len());
    mds.dims = dims.clone();
    classify_all(cfg, METHOD_NETWORK_MDS, &prep, features.rows, &mut mds).stage("classify")?;
    finish(cfg, &mds, "summary_network_mds.csv").stage("report")?;

    let mut plain = Summary::new(prep.ids.len(), prep.class_names.len());
    classify_all(cfg, METHOD_NETWORK_NO_MDS, &prep, no_mds_features(&prep, &dists), &mut plain).stage("classify")?;
    finish(cfg, &plain, "summary_network_nomds.csv").stage("report")?;

    let mut summary = mds;
    summary.rows.extend(plain.rows);
    Ok(RunOutcome { summary, stats, dims })
}

/// Network method on the concatenated distance rows, without MDS.
pub fn run_without_mds(cfg: &RunConfig) -> Result<RunOutcome> {
    let cache = start(cfg)?;
    let mut stats = StageStats::default();
    let (prep, dists) = network_distances(cfg, &cache, &mut stats)?;
    let mut summary = Summary::new(prep.ids.len(), prep.class_names.len());
    classify_all(cfg, METHOD_NETWORK_NO_MDS, &prep, no_mds_features(&prep, &dists), &mut summary)
        .stage("classify")?;
    finish(cfg, &summary, "summary_network_nomds.csv").stage("report")?;
    Ok(RunOutcome {
        summary,
        stats,
        dims: Vec::new(),
    })
}

/// TF-IDF cosine distances through the same MDS and classifiers.
pub fn run_baseline(cfg: &RunConfig) -> Result<RunOutcome> {
    let cache = start(cfg)?;
    let mut stats = StageStats::default();
    let prep = prepare(cfg, &cache, &mut stats)?;
    write_labels(cfg, &prep).stage("report")?;
    let variant = if cfg.tfidf_smoothed {
        IdfVariant::Smoothed
    } else {
        IdfVariant::Plain
    };
    let model = tfidf_vectors_with(&prep.streams, variant).stage("baseline")?;
    if model.doc_vectors.iter().all(Vec::is_empty) {
        log::warn!("tfidf: every document vector is zero; distances are degenerate");
    }
    let d = cosine_distance_matrix(&model);
    d.write_csv(&cfg.output_dir.join("dist_tfidf.csv")).stage("baseline")?;
    let choice = embed(cfg, "tfidf", &d).stage("embedding")?;
    let mut summary = Summary::new(prep.ids.len(), prep.class_names.len());
    summary.dims = vec![("tfidf".to_string(), choice.dims)];
    let dims = summary.dims.clone();
    let rows = (0..choice.embedding.len()).map(|i| choice.embedding.row(i).to_vec()).collect();
    classify_all(cfg, METHOD_TFIDF_MDS, &prep, rows, &mut summary).stage("classify")?;
    finish(cfg, &summary, "summary_tfidf_mds.csv").stage("report")?;
    Ok(RunOutcome { summary, stats, dims })
}

/// Paths of the per-document metric tables written by a run.
pub fn metric_table_path(output_dir: &Path, document_id: &str) -> PathBuf {
    output_dir.join("metrics").join(format!("{}.csv", file_stem(document_id)))
}
