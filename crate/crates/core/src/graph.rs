//! Simple undirected graphs, edge-list I/O and ego-network sampling.
//!
//! Graphs are immutable once built. Adjacency lists are kept sorted so that
//! edge queries are a binary search and neighborhood intersections are merges.
//!
//! Edge-list files are whitespace-delimited `u v` pairs, one per line, with
//! `#` comments. Node ids are compacted to `0..n` in ascending id order unless
//! the file carries a `# nodes: N` header, in which case ids are taken as-is
//! and must be `< N` (this is how isolated nodes survive a round trip).

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NODES_HEADER: &str = "nodes:";

/// Undirected simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
    label: Option<String>,
}

impl Graph {
    /// Graph with `node_count` isolated nodes.
    pub fn empty(node_count: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); node_count],
            edge_count: 0,
            label: None,
        }
    }

    /// Builds a graph from unordered pairs. Self-loops and repeated pairs
    /// (in either orientation) are dropped.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges_counting(node_count, edges).map(|(g, _)| g)
    }

    /// Like [`Graph::from_edges`], also returning how many input pairs were dropped.
    pub fn from_edges_counting<I>(node_count: usize, edges: I) -> Result<(Self, usize)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); node_count];
        let mut seen = 0usize;
        for (u, v) in edges {
            seen += 1;
            for x in [u, v] {
                if x >= node_count {
                    return Err(Error::NodeOutOfRange {
                        index: x,
                        node_count,
                    });
                }
            }
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut edge_count = 0;
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        edge_count /= 2;
        let graph = Graph {
            adj,
            edge_count,
            label: None,
        };
        Ok((graph, seen - edge_count))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Relabels nodes so that old node `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::InvalidInput(format!(
                "permutation of length {} for graph with {} nodes",
                perm.len(),
                n
            )));
        }
        let mut hit = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut hit[p], true) {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
        }
        let mut g = Graph::from_edges(n, self.edges().map(|(u, v)| (perm[u], perm[v])))?;
        g.label = self.label.clone();
        Ok(g)
    }

    /// Subgraph induced on `nodes`; node `nodes[i]` becomes node `i`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        let mut position = BTreeMap::new();
        for (i, &v) in nodes.iter().enumerate() {
            if v >= n {
                return Err(Error::NodeOutOfRange {
                    index: v,
                    node_count: n,
                });
            }
            position.insert(v, i);
        }
        let mut edges = Vec::new();
        for (i, &v) in nodes.iter().enumerate() {
            for w in &self.adj[v] {
                if let Some(&j) = position.get(w) {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        let mut g = Graph::from_edges(nodes.len(), edges)?;
        g.label = self.label.clone();
        Ok(g)
    }

    /// Renders the graph in the edge-list format, including a node-count header.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {}", NODES_HEADER, self.node_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Result of reading an edge-list file.
#[derive(Debug, Clone)]
pub struct EdgeListFile {
    pub graph: Graph,
    /// Lines dropped as self-loops or repeats of an earlier pair.
    pub dropped: usize,
}

/// Reads an edge list from disk.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<EdgeListFile> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    parse_edge_list(BufReader::new(file), path)
}

/// Parses edge-list text; `origin` is only used in error messages.
pub fn parse_edge_list(reader: impl BufRead, origin: &Path) -> Result<EdgeListFile> {
    let mut declared: Option<usize> = None;
    let mut pairs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", origin.display()), e))?;
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(count) = comment.trim().strip_prefix(NODES_HEADER) {
                let count = count
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("bad node-count header: {e}")))?;
                declared = Some(count);
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut next_id = || -> Result<usize> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err("expected two node ids".into()))?;
            tok.parse::<usize>()
                .map_err(|_| parse_err(format!("invalid node id {tok:?}")))
        };
        let u = next_id()?;
        let v = next_id()?;
        pairs.push((u, v));
    }

    let (node_count, pairs) = match declared {
        Some(n) => (n, pairs),
        None => {
            if pairs.is_empty() {
                return Err(Error::EmptyGraph(origin.to_path_buf()));
            }
            let mut ids: Vec<usize> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
            ids.sort_unstable();
            ids.dedup();
            let compact = |x: usize| ids.binary_search(&x).expect("id collected above");
            let pairs = pairs
                .iter()
                .map(|&(u, v)| (compact(u), compact(v)))
                .collect::<Vec<_>>();
            (ids.len(), pairs)
        }
    };
    let (graph, dropped) = Graph::from_edges_counting(node_count, pairs).map_err(|e| match e {
        Error::NodeOutOfRange { index, node_count } => Error::Parse {
            path: origin.to_path_buf(),
            line: 0,
            message: format!("node id {index} exceeds declared node count {node_count}"),
        },
        other => other,
    })?;
    Ok(EdgeListFile { graph, dropped })
}

pub fn write_edge_list(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, graph.to_edge_list())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Nodes within `hops` of `center` in BFS order, with their depth.
fn bfs_within(g: &Graph, center: usize, hops: usize) -> Vec<usize> {
    let mut depth = vec![usize::MAX; g.node_count()];
    let mut order = vec![center];
    let mut queue = VecDeque::from([center]);
    depth[center] = 0;
    while let Some(v) = queue.pop_front() {
        if depth[v] == hops {
            continue;
        }
        for &w in g.neighbors(v) {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    order
}

/// Induced subgraph on every node within `hops` of `center`, re-indexed in
/// BFS order so that the center is node 0.
pub fn ego_network(g: &Graph, center: usize, hops: usize) -> Result<Graph> {
    if center >= g.node_count() {
        return Err(Error::NodeOutOfRange {
            index: center,
            node_count: g.node_count(),
        });
    }
    if hops == 0 {
        return Err(Error::InvalidInput("ego-network hops must be >= 1".into()));
    }
    g.induced_subgraph(&bfs_within(g, center, hops))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSize {
    All,
    #[serde(untagged)]
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EgoNetConfig {
    pub hops: usize,
    pub sample_size: SampleSize,
    pub seed: u64,
}

impl EgoNetConfig {
    /// 2-hop ego-nets around 1000 sampled centers.
    pub fn pretraining(seed: u64) -> Self {
        EgoNetConfig {
            hops: 2,
            sample_size: SampleSize::Count(1000),
            seed,
        }
    }

    /// 2-hop ego-nets around every node.
    pub fn downstream(seed: u64) -> Self {
        EgoNetConfig {
            hops: 2,
            sample_size: SampleSize::All,
            seed,
        }
    }
}

/// Centers chosen by [`sample_ego_networks`]: uniform without replacement,
/// or every node in index order when the sample covers the graph.
pub fn sample_centers(g: &Graph, cfg: &EgoNetConfig) -> Vec<usize> {
    let n = g.node_count();
    match cfg.sample_size {
        SampleSize::Count(k) if k < n => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            index::sample(&mut rng, n, k).into_vec()
        }
        _ => (0..n).collect(),
    }
}

pub fn sample_ego_networks(g: &Graph, cfg: &EgoNetConfig) -> Result<Vec<Graph>> {
    sample_centers(g, cfg)
        .into_iter()
        .map(|c| ego_network(g, c, cfg.hops))
        .collect()
}
