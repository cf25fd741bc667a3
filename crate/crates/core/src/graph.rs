//! Word co-occurrence networks.
//!
//! Every distinct lemma is a node. Each pair of consecutive lemmas `(a, b)` in
//! the filtered stream adds one unit of weight to the directed link `a -> b`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::TokenStream;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NetworkOptions {
    /// Record immediate repetitions (`very very`) as self-loops.
    pub keep_self_loops: bool,
    /// Do not link the last word of a sentence to the first word of the next.
    /// Needs a stream with `sentence_starts`.
    pub sentence_delimited: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoocNetwork {
    lemmas: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeMap<(usize, usize), u64>,
}

/// Adjacency lists, sorted by node index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    pub neighbors: Vec<Vec<usize>>,
}

impl Adjacency {
    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }
}

impl CoocNetwork {
    pub fn node_count(&self) -> usize {
        self.lemmas.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Lemmas in node-index order (first appearance in the stream).
    pub fn lemmas(&self) -> &[String] {
        &self.lemmas
    }

    pub fn lemma(&self, node: usize) -> &str {
        &self.lemmas[node]
    }

    pub fn node(&self, lemma: &str) -> Option<usize> {
        self.index.get(lemma).copied()
    }

    pub fn require_node(&self, lemma: &str) -> Result<usize> {
        self.node(lemma)
            .ok_or_else(|| Error::UnknownNode(lemma.to_string()))
    }

    pub fn weight(&self, source: usize, target: usize) -> u64 {
        self.edges.get(&(source, target)).copied().unwrap_or(0)
    }

    /// `(source, target, weight)` in lexicographic index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.edges.iter().map(|(&(s, t), &w)| (s, t, w))
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    fn add_node(&mut self, lemma: &str) -> usize {
        if let Some(&i) = self.index.get(lemma) {
            return i;
        }
        let i = self.lemmas.len();
        self.lemmas.push(lemma.to_string());
        self.index.insert(lemma.to_string(), i);
        i
    }

    /// Symmetric, unweighted neighbor sets. Self-loops are ignored.
    pub fn undirected_view(&self) -> Adjacency {
        let mut neighbors = vec![Vec::new(); self.node_count()];
        for &(s, t) in self.edges.keys() {
            if s != t {
                neighbors[s].push(t);
                neighbors[t].push(s);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Adjacency { neighbors }
    }

    /// Out-neighbors following reading order. Self-loops are ignored.
    pub fn directed_view(&self) -> Adjacency {
        let mut neighbors = vec![Vec::new(); self.node_count()];
        for &(s, t) in self.edges.keys() {
            if s != t {
                neighbors[s].push(t);
            }
        }
        Adjacency { neighbors }
    }

    /// Node file (`lemma<TAB>index`) and edge file
    /// (`source_lemma<TAB>target_lemma<TAB>weight`).
    pub fn to_edge_list(&self) -> (String, String) {
        let mut nodes = String::new();
        for (i, l) in self.lemmas.iter().enumerate() {
            let _ = writeln!(nodes, "{l}\t{i}");
        }
        let mut edges = String::new();
        for (s, t, w) in self.edges() {
            let _ = writeln!(edges, "{}\t{}\t{}", self.lemmas[s], self.lemmas[t], w);
        }
        (nodes, edges)
    }

    pub fn write_edge_list(&self, node_path: &Path, edge_path: &Path) -> Result<()> {
        let (nodes, edges) = self.to_edge_list();
        std::fs::write(node_path, nodes).map_err(|e| Error::io(node_path, e))?;
        std::fs::write(edge_path, edges).map_err(|e| Error::io(edge_path, e))
    }

    pub fn read_edge_list(node_path: &Path, edge_path: &Path) -> Result<Self> {
        let nodes = std::fs::read_to_string(node_path).map_err(|e| Error::io(node_path, e))?;
        let edges = std::fs::read_to_string(edge_path).map_err(|e| Error::io(edge_path, e))?;
        let mut net = CoocNetwork::default();
        for (i, line) in nodes.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (lemma, idx) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(node_path, i + 1, "expected `lemma<TAB>index`"))?;
            if idx.parse::<usize>().ok() != Some(net.node_count()) {
                return Err(Error::parse(node_path, i + 1, "node indices must be 0,1,2,..."));
            }
            if net.index.contains_key(lemma) {
                return Err(Error::parse(node_path, i + 1, "duplicate lemma"));
            }
            net.add_node(lemma);
        }
        for (i, line) in edges.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = || Error::parse(edge_path, i + 1, "expected `source<TAB>target<TAB>weight`");
            if cols.len() != 3 {
                return Err(bad());
            }
            let s = net.node(cols[0]).ok_or_else(bad)?;
            let t = net.node(cols[1]).ok_or_else(bad)?;
            let w: u64 = cols[2].parse().map_err(|_| bad())?;
            if w == 0 {
                return Err(bad());
            }
            net.edges.insert((s, t), w);
        }
        Ok(net)
    }
}

pub fn build_network(stream: &TokenStream) -> CoocNetwork {
    build_network_with(stream, NetworkOptions::default())
}

pub fn build_network_with(stream: &TokenStream, opts: NetworkOptions) -> CoocNetwork {
    let mut net = CoocNetwork::default();
    let mut starts = stream.sentence_starts.iter().peekable();
    let mut prev: Option<usize> = None;
    for (i, tok) in stream.tokens.iter().enumerate() {
        let node = net.add_node(&tok.lemma);
        let mut new_sentence = false;
        while let Some(&&s) = starts.peek() {
            if s > i {
                break;
            }
            new_sentence |= s == i;
            starts.next();
        }
        if let Some(p) = prev {
            let linked = !(opts.sentence_delimited && new_sentence);
            if linked && (p != node || opts.keep_self_loops) {
                *net.edges.entry((p, node)).or_insert(0) += 1;
            }
        }
        prev = Some(node);
    }
    net
}
