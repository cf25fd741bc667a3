//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use textnet::corpus::{Token, TokenStream};
use textnet::graph::{build_network_with, CoocNetwork, NetworkOptions};

pub type Edges = Vec<(usize, usize)>;

/// Every labeled simple undirected graph on `n` nodes.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Edges> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let count = 1u64 << pairs.len();
    (0..count).map(move |mask| {
        pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &p)| p)
            .collect()
    })
}

fn neighbor_lists(n: usize, edges: &[(usize, usize)], directed: bool) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a == b {
            continue;
        }
        if !adj[a].contains(&b) {
            adj[a].push(b);
        }
        if !directed && !adj[b].contains(&a) {
            adj[b].push(a);
        }
    }
    adj
}

pub fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let adj = neighbor_lists(n, edges, false);
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// All-pairs distances by Floyd–Warshall.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize)], directed: bool) -> Vec<Vec<Option<u32>>> {
    let adj = neighbor_lists(n, edges, directed);
    let inf = u32::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
        for &j in &adj[i] {
            row[j] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.into_iter()
        .map(|row| row.into_iter().map(|x| (x < inf).then_some(x)).collect())
        .collect()
}

/// `sum of reachable distances / n`, undefined when nothing is reachable.
pub fn avg_path_oracle(dist: &[Vec<Option<u32>>]) -> Vec<Option<f64>> {
    let n = dist.len();
    dist.iter()
        .enumerate()
        .map(|(i, row)| {
            let reach: Vec<u32> = row
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .filter_map(|(_, d)| *d)
                .collect();
            (!reach.is_empty()).then(|| reach.iter().sum::<u32>() as f64 / n as f64)
        })
        .collect()
}

fn shortest_paths(adj: &[Vec<usize>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn dfs(
        adj: &[Vec<usize>],
        t: usize,
        path: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        best: &mut usize,
        found: &mut Vec<Vec<usize>>,
    ) {
        let v = *path.last().unwrap();
        if path.len() > *best {
            return;
        }
        if v == t {
            if path.len() < *best {
                *best = path.len();
                found.clear();
            }
            found.push(path.clone());
            return;
        }
        for &w in &adj[v] {
            if !on_path[w] {
                on_path[w] = true;
                path.push(w);
                dfs(adj, t, path, on_path, best, found);
                path.pop();
                on_path[w] = false;
            }
        }
    }
    let mut on_path = vec![false; adj.len()];
    on_path[s] = true;
    let mut found = Vec::new();
    let mut best = usize::MAX;
    dfs(adj, t, &mut vec![s], &mut on_path, &mut best, &mut found);
    found
}

/// Betweenness by enumerating every shortest path between every ordered
/// pair of distinct nodes.
pub fn betweenness_oracle(n: usize, edges: &[(usize, usize)], directed: bool) -> Vec<f64> {
    let adj = neighbor_lists(n, edges, directed);
    let mut b = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let paths = shortest_paths(&adj, s, t);
            if paths.is_empty() {
                continue;
            }
            let sigma = paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    b[v] += 1.0 / sigma;
                }
            }
        }
    }
    b
}

pub fn node_name(i: usize) -> String {
    format!("n{i}")
}

/// Token stream with one two-word sentence per edge (one-word sentences for
/// isolated nodes), so that a sentence-delimited network has exactly these
/// links, directed from the first word to the second.
pub fn edge_stream(n: usize, edges: &[(usize, usize)]) -> TokenStream {
    let mut sentences: Vec<Vec<usize>> = edges.iter().map(|&(a, b)| vec![a, b]).collect();
    for v in 0..n {
        if !edges.iter().any(|&(a, b)| a == v || b == v) {
            sentences.push(vec![v]);
        }
    }
    let mut stream = TokenStream {
        document_id: "g".into(),
        ..Default::default()
    };
    for s in sentences {
        stream.sentence_starts.push(stream.tokens.len());
        for v in s {
            let position = stream.tokens.len();
            stream.tokens.push(Token {
                lemma: node_name(v),
                position,
            });
        }
    }
    stream.original_length = stream.tokens.len();
    stream
}

pub fn edge_network(n: usize, edges: &[(usize, usize)]) -> (CoocNetwork, TokenStream) {
    let stream = edge_stream(n, edges);
    let net = build_network_with(
        &stream,
        NetworkOptions {
            keep_self_loops: false,
            sentence_delimited: true,
        },
    );
    (net, stream)
}

/// Oracle node index of a network node.
pub fn oracle_index(net: &CoocNetwork, node: usize) -> usize {
    net.lemma(node)[1..].parse().unwrap()
}

/// Seeded Erdős–Rényi graph.
pub fn random_graph(rng: &mut impl rand::Rng, n: usize, p: f64) -> Edges {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Intermittency from the second moment of the gaps:
/// `sqrt(<tau^2> / <tau>^2 - 1)`.
pub fn intermittency_oracle(positions: &[usize]) -> Option<f64> {
    if positions.len() < 2 {
        return None;
    }
    let gaps: Vec<f64> = positions.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let k = gaps.len() as f64;
    let m1 = gaps.iter().sum::<f64>() / k;
    let m2 = gaps.iter().map(|g| g * g).sum::<f64>() / k;
    Some((m2 / (m1 * m1) - 1.0).max(0.0).sqrt())
}
