//! Node-local measurements of a co-occurrence network.
//!
//! Four metrics are computed for every word of a document:
//!
//! * degree: number of distinct neighbors in the undirected view;
//! * average shortest path length: `sum_j d(i, j) / N`, where the sum runs over
//!   the nodes reachable from `i` and `N` is the node count of the whole
//!   network (unreachable nodes add nothing);
//! * betweenness: `sum over ordered pairs (j, k), j != i != k` of the fraction
//!   of shortest `j -> k` paths through `i`, left unnormalized;
//! * intermittency: standard deviation over mean of the gaps between
//!   consecutive occurrences of the word.
//!
//! Distances and betweenness are hop counts on the undirected view unless
//! [`MetricOptions::directed`] is set.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::TokenStream;
use crate::error::{Error, Result};
use crate::graph::{Adjacency, CoocNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Degree,
    AvgShortestPath,
    Betweenness,
    Intermittency,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Degree,
        Metric::AvgShortestPath,
        Metric::Betweenness,
        Metric::Intermittency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Degree => "degree",
            Metric::AvgShortestPath => "avg_shortest_path",
            Metric::Betweenness => "betweenness",
            Metric::Intermittency => "intermittency",
        }
    }

    /// Which end of the distribution marks the most relevant words.
    pub fn default_order(self) -> RankOrder {
        match self {
            Metric::Degree | Metric::Betweenness => RankOrder::Highest,
            Metric::AvgShortestPath | Metric::Intermittency => RankOrder::Lowest,
        }
    }

    pub fn value(self, row: &NodeMetrics) -> Option<f64> {
        match self {
            Metric::Degree => Some(row.degree as f64),
            Metric::AvgShortestPath => row.avg_shortest_path,
            Metric::Betweenness => Some(row.betweenness),
            Metric::Intermittency => row.intermittency,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric \"{s}\"")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankOrder {
    Highest,
    Lowest,
}

impl FromStr for RankOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "highest" => Ok(RankOrder::Highest),
            "lowest" => Ok(RankOrder::Lowest),
            _ => Err(Error::InvalidArgument(format!(
                "rank order must be `highest` or `lowest`, got \"{s}\""
            ))),
        }
    }
}

impl fmt::Display for RankOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankOrder::Highest => "highest",
            RankOrder::Lowest => "lowest",
        })
    }
}

/// Which token sequence intermittency gaps are measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PositionBasis {
    /// Consecutive indices of the stopword-free stream.
    #[default]
    Filtered,
    /// Indices in the original token sequence, stopwords included.
    Original,
}

impl FromStr for PositionBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "filtered" => Ok(PositionBasis::Filtered),
            "original" => Ok(PositionBasis::Original),
            _ => Err(Error::InvalidArgument(format!(
                "position basis must be `filtered` or `original`, got \"{s}\""
            ))),
        }
    }
}

impl fmt::Display for PositionBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PositionBasis::Filtered => "filtered",
            PositionBasis::Original => "original",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MetricOptions {
    /// Follow link direction for distances and betweenness.
    pub directed: bool,
    pub positions: PositionBasis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetrics {
    pub lemma: String,
    pub frequency: usize,
    pub degree: usize,
    pub avg_shortest_path: Option<f64>,
    pub betweenness: f64,
    pub intermittency: Option<f64>,
}

/// One row per network node, in node-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetricTable {
    pub document_id: String,
    pub rows: Vec<NodeMetrics>,
}

const TABLE_HEADER: &str = "lemma,frequency,degree,avg_shortest_path,betweenness,intermittency";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl NodeMetricTable {
    pub fn row(&self, lemma: &str) -> Option<&NodeMetrics> {
        self.rows.iter().find(|r| r.lemma == lemma)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 48);
        out.push_str(TABLE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.lemma,
                r.frequency,
                r.degree,
                fmt_opt(r.avg_shortest_path),
                r.betweenness,
                fmt_opt(r.intermittency)
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(document_id: &str, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        if lines.next() != Some(TABLE_HEADER) {
            return Err(Error::parse(path, 1, format!("expected header `{TABLE_HEADER}`")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(Error::parse(path, lineno, "expected 6 columns"));
            }
            let bad = |what: &str| Error::parse(path, lineno, format!("bad {what}"));
            let opt = |s: &str, what: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(what))
                }
            };
            rows.push(NodeMetrics {
                lemma: cols[0].to_string(),
                frequency: cols[1].parse().map_err(|_| bad("frequency"))?,
                degree: cols[2].parse().map_err(|_| bad("degree"))?,
                avg_shortest_path: opt(cols[3], "avg_shortest_path")?,
                betweenness: cols[4].parse().map_err(|_| bad("betweenness"))?,
                intermittency: opt(cols[5], "intermittency")?,
            });
        }
        Ok(Self {
            document_id: document_id.to_string(),
            rows,
        })
    }
}

pub fn degree(net: &CoocNetwork, lemma: &str) -> Result<usize> {
    let node = net.require_node(lemma)?;
    Ok(net.undirected_view().neighbors[node].len())
}

/// Hop distances from `source`; `None` for unreachable nodes.
pub fn bfs_distances(adj: &Adjacency, source: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.node_count()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap_or(0);
        for &w in &adj.neighbors[v] {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

fn avg_path_from(adj: &Adjacency, source: usize) -> Option<f64> {
    let dist = bfs_distances(adj, source);
    let reached = dist.iter().filter(|d| d.is_some()).count();
    if reached <= 1 {
        return None;
    }
    let sum: u64 = dist.iter().flatten().map(|&d| u64::from(d)).sum();
    Some(sum as f64 / adj.node_count() as f64)
}

/// Average shortest path length of every node of `adj`.
pub fn avg_shortest_paths(adj: &Adjacency) -> Vec<Option<f64>> {
    (0..adj.node_count())
        .into_par_iter()
        .map(|s| avg_path_from(adj, s))
        .collect()
}

pub fn avg_shortest_path(net: &CoocNetwork, lemma: &str) -> Result<Option<f64>> {
    avg_shortest_path_with(net, lemma, MetricOptions::default())
}

pub fn avg_shortest_path_with(
    net: &CoocNetwork,
    lemma: &str,
    opts: MetricOptions,
) -> Result<Option<f64>> {
    let node = net.require_node(lemma)?;
    Ok(avg_path_from(&view(net, opts), node))
}

fn view(net: &CoocNetwork, opts: MetricOptions) -> Adjacency {
    if opts.directed {
        net.directed_view()
    } else {
        net.undirected_view()
    }
}

fn reverse(adj: &Adjacency) -> Adjacency {
    let mut neighbors = vec![Vec::new(); adj.node_count()];
    for (v, list) in adj.neighbors.iter().enumerate() {
        for &w in list {
            neighbors[w].push(v);
        }
    }
    Adjacency { neighbors }
}

/// Scratch buffers for one single-source accumulation.
struct Workspace {
    dist: Vec<u32>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<usize>,
}

const UNSEEN: u32 = u32::MAX;

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![UNSEEN; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
        }
    }

    /// Dependencies of every node on `source`, written into `self.delta`.
    /// `preds` lists in-neighbors (equal to `adj` for undirected views).
    fn accumulate(&mut self, adj: &Adjacency, preds: &Adjacency, source: usize) {
        self.dist.fill(UNSEEN);
        self.sigma.fill(0.0);
        self.delta.fill(0.0);
        self.order.clear();

        self.dist[source] = 0;
        self.sigma[source] = 1.0;
        self.order.push(source);
        let mut head = 0;
        while head < self.order.len() {
            let v = self.order[head];
            head += 1;
            let dv = self.dist[v];
            for &w in &adj.neighbors[v] {
                if self.dist[w] == UNSEEN {
                    self.dist[w] = dv + 1;
                    self.order.push(w);
                }
                if self.dist[w] == dv + 1 {
                    self.sigma[w] += self.sigma[v];
                }
            }
        }

        for &w in self.order.iter().rev() {
            let dw = self.dist[w];
            if dw == 0 {
                continue;
            }
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for &v in &preds.neighbors[w] {
                if self.dist[v] != UNSEEN && self.dist[v] + 1 == dw {
                    self.delta[v] += self.sigma[v] * coeff;
                }
            }
        }
        self.delta[source] = 0.0;
    }
}

const SOURCE_BATCH: usize = 256;

fn betweenness_impl(adj: &Adjacency, parallel: bool) -> Vec<f64> {
    let n = adj.node_count();
    let rev;
    let preds = if is_symmetric(adj) {
        adj
    } else {
        rev = reverse(adj);
        &rev
    };
    let mut total = vec![0.0; n];
    if !parallel {
        let mut ws = Workspace::new(n);
        for s in 0..n {
            ws.accumulate(adj, preds, s);
            for (t, d) in total.iter_mut().zip(&ws.delta) {
                *t += d;
            }
        }
        return total;
    }
    // Per-source dependency vectors are computed in parallel, then summed in
    // source order so the result is bit-identical to the sequential loop.
    let sources: Vec<usize> = (0..n).collect();
    for batch in sources.chunks(SOURCE_BATCH) {
        let deltas: Vec<Vec<f64>> = batch
            .par_iter()
            .map_init(
                || Workspace::new(n),
                |ws, &s| {
                    ws.accumulate(adj, preds, s);
                    ws.delta.clone()
                },
            )
            .collect();
        for delta in &deltas {
            for (t, d) in total.iter_mut().zip(delta) {
                *t += d;
            }
        }
    }
    total
}

fn is_symmetric(adj: &Adjacency) -> bool {
    adj.neighbors
        .iter()
        .enumerate()
        .all(|(v, list)| list.iter().all(|&w| adj.neighbors[w].binary_search(&v).is_ok()))
}

/// Betweenness of every node of `adj`, indexed by node.
pub fn betweenness(adj: &Adjacency) -> Vec<f64> {
    betweenness_impl(adj, true)
}

/// Single-threaded reference for [`betweenness`]; results are bit-identical.
pub fn betweenness_sequential(adj: &Adjacency) -> Vec<f64> {
    betweenness_impl(adj, false)
}

/// Betweenness of every node on the undirected view, indexed by node.
pub fn betweenness_all(net: &CoocNetwork) -> Vec<f64> {
    betweenness(&net.undirected_view())
}

pub fn betweenness_all_with(net: &CoocNetwork, opts: MetricOptions) -> Vec<f64> {
    betweenness(&view(net, opts))
}

/// Coefficient of variation of the gaps between sorted positions.
/// `None` with fewer than two occurrences.
pub fn intermittency_from_positions(positions: &[usize]) -> Option<f64> {
    if positions.len() < 2 {
        return None;
    }
    let gaps: Vec<f64> = positions.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let count = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / count;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / count;
    Some(var.sqrt() / mean)
}

fn occurrence_positions(stream: &TokenStream, basis: PositionBasis) -> HashMap<&str, Vec<usize>> {
    let mut out: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, t) in stream.tokens.iter().enumerate() {
        let p = match basis {
            PositionBasis::Filtered => i,
            PositionBasis::Original => t.position,
        };
        out.entry(t.lemma.as_str()).or_default().push(p);
    }
    out
}

pub fn intermittency(stream: &TokenStream, lemma: &str) -> Result<Option<f64>> {
    intermittency_with(stream, lemma, PositionBasis::Filtered)
}

pub fn intermittency_with(
    stream: &TokenStream,
    lemma: &str,
    basis: PositionBasis,
) -> Result<Option<f64>> {
    let positions: Vec<usize> = stream
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.lemma == lemma)
        .map(|(i, t)| match basis {
            PositionBasis::Filtered => i,
            PositionBasis::Original => t.position,
        })
        .collect();
    if positions.is_empty() {
        return Err(Error::AbsentLemma(lemma.to_string()));
    }
    Ok(intermittency_from_positions(&positions))
}

pub fn metric_table(net: &CoocNetwork, stream: &TokenStream) -> Result<NodeMetricTable> {
    metric_table_with(net, stream, MetricOptions::default())
}

pub fn metric_table_with(
    net: &CoocNetwork,
    stream: &TokenStream,
    opts: MetricOptions,
) -> Result<NodeMetricTable> {
    let positions = occurrence_positions(stream, opts.positions);
    if positions.len() != net.node_count() {
        return Err(Error::Inconsistent(format!(
            "{} distinct lemmas in stream, {} nodes in network",
            positions.len(),
            net.node_count()
        )));
    }
    let missing: HashSet<&str> = positions
        .keys()
        .copied()
        .filter(|l| net.node(l).is_none())
        .collect();
    if let Some(l) = missing.iter().min() {
        return Err(Error::Inconsistent(format!("lemma \"{l}\" has no node")));
    }

    let undirected = net.undirected_view();
    let paths_view = view(net, opts);
    let asp = avg_shortest_paths(&paths_view);
    let btw = betweenness(&paths_view);
    let rows = net
        .lemmas()
        .iter()
        .enumerate()
        .map(|(i, lemma)| {
            let occ = &positions[lemma.as_str()];
            NodeMetrics {
                lemma: lemma.clone(),
                frequency: occ.len(),
                degree: undirected.neighbors[i].len(),
                avg_shortest_path: asp[i],
                betweenness: btw[i],
                intermittency: intermittency_from_positions(occ),
            }
        })
        .collect();
    Ok(NodeMetricTable {
        document_id: stream.document_id.clone(),
        rows,
    })
}
