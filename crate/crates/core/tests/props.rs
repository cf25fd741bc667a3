//! Property tests for the invariants of each stage.

mod common;

use proptest::prelude::*;

use common::*;
use textnet::baseline::{cosine_distance_matrix, tfidf_vectors};
use textnet::classify::stratified_folds;
use textnet::corpus::{preprocess, tokenize, IdentityLemmatizer, StopwordList, TokenStream};
use textnet::embedding::choose_dim;
use textnet::graph::{build_network_with, CoocNetwork, NetworkOptions};
use textnet::metrics::{betweenness, betweenness_sequential, bfs_distances, Metric};
use textnet::similarity::{distance, distance_matrix, profile_norm, similarity_exact, DistanceMatrix, RankProfile};

fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["the", "cat", "sat", "on", "a", "mat", "and", "dog", "ran"]), 0..60)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn text() -> impl Strategy<Value = String> {
    "[A-Za-z ,.;'\\-\n]{0,200}"
}

fn distinct(v: Vec<u16>) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    v.into_iter().filter(|x| seen.insert(*x)).map(|x| format!("w{x}")).collect()
}

fn profile(id: &str, n: usize, ids: Vec<u16>) -> RankProfile {
    let mut w = distinct(ids);
    w.truncate(n);
    RankProfile::from_ranked_words(id, Metric::Betweenness, n, w).unwrap()
}

fn stream(id: &str, words: &[String]) -> TokenStream {
    preprocess(id, words, &StopwordList::english(), &IdentityLemmatizer)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tokenize_is_idempotent(t in text()) {
        let once = tokenize(&t);
        prop_assert_eq!(tokenize(&once.join(" ")), once.clone());
        prop_assert_eq!(tokenize(&t), once);
    }

    #[test]
    fn positions_point_at_surviving_tokens(t in text()) {
        let raw = tokenize(&t);
        let stops = StopwordList::english();
        let s = preprocess("d", &raw, &stops, &IdentityLemmatizer);
        prop_assert_eq!(s.original_length, raw.len());
        prop_assert_eq!(s.len(), raw.iter().filter(|w| !stops.contains(w)).count());
        for pair in s.tokens.windows(2) {
            prop_assert!(pair[0].position < pair[1].position);
        }
        for tok in &s.tokens {
            prop_assert_eq!(&raw[tok.position], &tok.lemma);
        }
    }

    #[test]
    fn pre_lemmatized_round_trip(w in words()) {
        let s = stream("d", &w);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.tsv");
        std::fs::write(&path, s.to_pre_lemmatized()).unwrap();
        prop_assert_eq!(TokenStream::read_pre_lemmatized("d", &path).unwrap(), s);
    }

    #[test]
    fn link_weights_count_adjacent_pairs(w in words(), keep in any::<bool>()) {
        let s = stream("d", &w);
        let net = build_network_with(&s, NetworkOptions { keep_self_loops: keep, sentence_delimited: false });
        let repeats = s.tokens.windows(2).filter(|p| p[0].lemma == p[1].lemma).count() as u64;
        let pairs = s.len().saturating_sub(1) as u64;
        prop_assert_eq!(net.total_weight(), if keep { pairs } else { pairs - repeats });
        let distinct: std::collections::BTreeSet<&str> = s.lemmas().collect();
        prop_assert_eq!(net.node_count(), distinct.len());
    }

    #[test]
    fn undirected_view_is_symmetric(w in words()) {
        let net = build_network_with(&stream("d", &w), NetworkOptions::default());
        let adj = net.undirected_view();
        for (v, list) in adj.neighbors.iter().enumerate() {
            prop_assert!(!list.contains(&v));
            for &u in list {
                prop_assert!(adj.neighbors[u].contains(&v));
            }
        }
    }

    #[test]
    fn edge_list_round_trip(w in words()) {
        let net = build_network_with(&stream("d", &w), NetworkOptions::default());
        let dir = tempfile::tempdir().unwrap();
        let (nodes, edges) = (dir.path().join("n.csv"), dir.path().join("e.csv"));
        net.write_edge_list(&nodes, &edges).unwrap();
        prop_assert_eq!(CoocNetwork::read_edge_list(&nodes, &edges).unwrap(), net);
    }

    /// Every geodesic from s to t passes d(s,t) - 1 interior nodes, so the
    /// betweenness total equals the sum of those counts.
    #[test]
    fn betweenness_total_matches_distances(seed in any::<u64>(), n in 2usize..25, p in 0.05f64..0.6) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let edges = random_graph(&mut rng, n, p);
        let (net, _) = edge_network(n, &edges);
        let adj = net.undirected_view();
        let par = betweenness(&adj);
        let seq = betweenness_sequential(&adj);
        prop_assert!(par.iter().zip(&seq).all(|(a, b)| a.to_bits() == b.to_bits()));
        let expected: u32 = (0..n)
            .flat_map(|s| bfs_distances(&adj, s).into_iter().flatten())
            .filter(|&d| d > 0)
            .map(|d| d - 1)
            .sum();
        prop_assert!((par.iter().sum::<f64>() - expected as f64).abs() < 1e-9);
    }

    #[test]
    fn similarity_is_symmetric_and_bounded(
        n in 1usize..40,
        a in prop::collection::vec(0u16..80, 0..60),
        b in prop::collection::vec(0u16..80, 0..60),
    ) {
        let (pa, pb) = (profile("a", n, a), profile("b", n, b));
        prop_assert_eq!(similarity_exact(&pa, &pb).unwrap(), similarity_exact(&pb, &pa).unwrap());
        let d = distance(&pa, &pb).unwrap();
        prop_assert_eq!(d.to_bits(), distance(&pb, &pa).unwrap().to_bits());
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!(similarity_exact(&pa, &pb).unwrap() <= profile_norm(n));
    }

    #[test]
    fn full_profile_self_similarity(n in 1usize..200, seed in any::<u16>()) {
        let ids: Vec<u16> = (0..n as u16).map(|i| i.wrapping_mul(7).wrapping_add(seed)).collect();
        let p = profile("a", n, ids);
        prop_assume!(p.len() == n);
        prop_assert_eq!(similarity_exact(&p, &p).unwrap(), profile_norm(n));
        prop_assert_eq!(distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn distance_matrix_invariants(lists in prop::collection::vec(prop::collection::vec(0u16..30, 0..20), 1..8)) {
        let profiles: Vec<RankProfile> = lists
            .into_iter()
            .enumerate()
            .map(|(i, l)| profile(&format!("d{i}"), 10, l))
            .collect();
        let m = distance_matrix(&profiles).unwrap();
        prop_assert!(m.validate().is_ok());
    }

    #[test]
    fn folds_partition_and_stratify(
        labels in prop::collection::vec(0usize..4, 1..80),
        folds in 2usize..11,
        seed in any::<u64>(),
    ) {
        let assign = stratified_folds(&labels, 4, folds, seed);
        prop_assert_eq!(assign.len(), labels.len());
        prop_assert!(assign.iter().all(|&f| f < folds));
        prop_assert_eq!(&assign, &stratified_folds(&labels, 4, folds, seed));
        let size = |pred: &dyn Fn(usize) -> bool| -> Vec<usize> {
            (0..folds).map(|f| (0..labels.len()).filter(|&i| assign[i] == f && pred(i)).count()).collect()
        };
        let spread = |v: Vec<usize>| v.iter().max().unwrap() - v.iter().min().unwrap();
        prop_assert!(spread(size(&|_| true)) <= 1);
        for c in 0..4 {
            prop_assert!(spread(size(&|i| labels[i] == c)) <= 1);
        }
    }

    #[test]
    fn tfidf_distance_ignores_document_length(docs in prop::collection::vec(words(), 2..6), times in 2usize..4) {
        let streams: Vec<TokenStream> =
            docs.iter().enumerate().map(|(i, w)| stream(&i.to_string(), w)).collect();
        let longer: Vec<TokenStream> = docs
            .iter()
            .enumerate()
            .map(|(i, w)| stream(&i.to_string(), &w.iter().cycle().take(w.len() * times).cloned().collect::<Vec<_>>()))
            .collect();
        let a = cosine_distance_matrix(&tfidf_vectors(&streams).unwrap());
        let b = cosine_distance_matrix(&tfidf_vectors(&longer).unwrap());
        prop_assert!(a.validate().is_ok());
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stress_curve_never_increases(m in 3usize..10, seed in any::<u64>(), values in prop::collection::vec(0.0f64..1.0, 45)) {
        let mut v = vec![0.0; m * m];
        let mut k = 0;
        for i in 0..m {
            for j in i + 1..m {
                v[i * m + j] = values[k];
                v[j * m + i] = values[k];
                k += 1;
            }
        }
        let ids = (0..m).map(|i| i.to_string()).collect();
        let delta = DistanceMatrix::new(ids, v).unwrap();
        let choice = choose_dim(&delta, 0.01, m - 1, seed).unwrap();
        for w in choice.curve.points.windows(2) {
            prop_assert!(w[1].1 <= w[0].1);
        }
        prop_assert_eq!(choice.embedding.dims, choice.dims);
    }
}
