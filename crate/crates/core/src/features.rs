//! Topological feature extraction.
//!
//! Every graph maps to a fixed 6-vector: the mean over nodes of degree,
//! clustering coefficient and closeness centrality, followed by density,
//! degree assortativity and transitivity. Degenerate cases resolve to 0
//! (clustering for degree < 2, closeness for isolated nodes, assortativity
//! when the endpoint degrees have no variance) so the output is always finite.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;

pub const FEATURE_NAMES: [&str; 6] = [
    "mean_degree",
    "mean_clustering",
    "mean_closeness",
    "density",
    "assortativity",
    "transitivity",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeProperties {
    pub degree: f64,
    pub clustering: f64,
    pub closeness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphProperties {
    pub density: f64,
    pub assortativity: f64,
    pub transitivity: f64,
}

/// `[mean degree, mean clustering, mean closeness, density, assortativity, transitivity]`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; 6]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Feature values keyed by name, in layout order.
    pub fn labeled(&self) -> serde_json::Map<String, serde_json::Value> {
        FEATURE_NAMES
            .iter()
            .zip(self.0)
            .map(|(name, v)| (name.to_string(), serde_json::json!(v)))
            .collect()
    }
}

/// Number of triangles through each node.
pub fn triangles_per_node(g: &Graph) -> Vec<usize> {
    (0..g.node_count())
        .map(|v| {
            let nv = g.neighbors(v);
            let twice: usize = nv
                .iter()
                .map(|&u| sorted_intersection_len(nv, g.neighbors(u)))
                .sum();
            twice / 2
        })
        .collect()
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

pub fn local_clustering(g: &Graph) -> Vec<f64> {
    triangles_per_node(g)
        .into_iter()
        .enumerate()
        .map(|(v, t)| clustering_from(t, g.degree(v)))
        .collect()
}

fn clustering_from(triangles: usize, degree: usize) -> f64 {
    if degree < 2 {
        0.0
    } else {
        2.0 * triangles as f64 / (degree * (degree - 1)) as f64
    }
}

/// Closeness with Wasserman-Faust scaling for disconnected graphs.
pub fn closeness(g: &Graph, v: usize) -> f64 {
    let n = g.node_count();
    if n <= 1 {
        return 0.0;
    }
    let mut dist = vec![usize::MAX; n];
    dist[v] = 0;
    let mut queue = VecDeque::from([v]);
    let (mut reached, mut total) = (0usize, 0usize);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                reached += 1;
                total += dist[w];
                queue.push_back(w);
            }
        }
    }
    if total == 0 {
        return 0.0;
    }
    let reached = reached as f64;
    (reached / total as f64) * (reached / (n - 1) as f64)
}

pub fn node_properties(g: &Graph) -> Vec<NodeProperties> {
    triangles_per_node(g)
        .into_iter()
        .enumerate()
        .map(|(v, t)| NodeProperties {
            degree: g.degree(v) as f64,
            clustering: clustering_from(t, g.degree(v)),
            closeness: closeness(g, v),
        })
        .collect()
}

pub fn density(g: &Graph) -> f64 {
    let n = g.node_count();
    if n <= 1 {
        0.0
    } else {
        2.0 * g.edge_count() as f64 / (n * (n - 1)) as f64
    }
}

/// Pearson correlation of endpoint degrees over both orientations of every edge.
pub fn degree_assortativity(g: &Graph) -> f64 {
    let (mut s1, mut s2, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0);
    for (u, v) in g.edges() {
        let (du, dv) = (g.degree(u) as f64, g.degree(v) as f64);
        s1 += du + dv;
        s2 += du * du + dv * dv;
        sxy += 2.0 * du * dv;
        m += 2.0;
    }
    if m == 0.0 {
        return 0.0;
    }
    let mean = s1 / m;
    let var = s2 / m - mean * mean;
    if var <= 1e-12 * (s2 / m).max(1.0) {
        return 0.0;
    }
    ((sxy / m - mean * mean) / var).clamp(-1.0, 1.0)
}

fn transitivity_from(g: &Graph, triangles: &[usize]) -> f64 {
    let closed: usize = triangles.iter().sum();
    let triples: usize = (0..g.node_count())
        .map(|v| {
            let d = g.degree(v);
            d * d.saturating_sub(1) / 2
        })
        .sum();
    if triples == 0 {
        0.0
    } else {
        closed as f64 / triples as f64
    }
}

pub fn transitivity(g: &Graph) -> f64 {
    transitivity_from(g, &triangles_per_node(g))
}

pub fn graph_properties(g: &Graph) -> GraphProperties {
    GraphProperties {
        density: density(g),
        assortativity: degree_assortativity(g),
        transitivity: transitivity(g),
    }
}

pub fn extract_features(g: &Graph) -> FeatureVector {
    let n = g.node_count();
    if n == 0 {
        return FeatureVector([0.0; 6]);
    }
    let nodes = node_properties(g);
    let mean = |f: fn(&NodeProperties) -> f64| nodes.iter().map(f).sum::<f64>() / n as f64;
    let gp = graph_properties(g);
    FeatureVector([
        mean(|p| p.degree),
        mean(|p| p.clustering),
        mean(|p| p.closeness),
        gp.density,
        gp.assortativity,
        gp.transitivity,
    ])
}
