//! Interaction graphs, triad enumeration, canonical triad types and dyadic
//! structural features.
//!
//! A [`Network`] is one undirected interaction graph. Nodes are kept in
//! lexicographic order of their ids, and every edge is stored as `(i, j)`
//! with `i < j` in that order. Each edge carries the address-token streams
//! exchanged in both directions: `fwd` is what `i` said to `j`, `bwd` is
//! what `j` said to `i`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of an edge label within a [`crate::params::LabelSet`].
pub type Label = usize;

/// Sparse nonnegative count vector, sorted by symbol id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseCounts(Vec<(u32, u32)>);

impl SparseCounts {
    pub fn from_tokens(tokens: &[u32]) -> Self {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for &t in tokens {
            *map.entry(t).or_insert(0) += 1;
        }
        SparseCounts(map.into_iter().collect())
    }

    pub fn from_dense(dense: &[u32]) -> Self {
        SparseCounts(dense.iter().enumerate().filter(|(_, &c)| c > 0).map(|(w, &c)| (w as u32, c)).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|&(w, c)| (w as usize, c))
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<u32> {
        let mut v = vec![0; dim];
        for (w, c) in self.iter() {
            v[w] = c;
        }
        v
    }

    /// `Σ_w x_w · log_theta[w]`, skipping zero counts so that `0 · log 0`
    /// never appears.
    pub fn dot_log(&self, log_theta: &[f64]) -> f64 {
        self.iter().map(|(w, c)| c as f64 * log_theta[w]).sum()
    }
}

/// Content exchanged across one edge, as ordered symbol streams.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeContent {
    /// Symbols addressed by the lower-ordered node to the higher one.
    pub fwd: Vec<u32>,
    /// Symbols addressed by the higher-ordered node to the lower one.
    pub bwd: Vec<u32>,
}

impl EdgeContent {
    pub fn new(fwd: Vec<u32>, bwd: Vec<u32>) -> Self {
        EdgeContent { fwd, bwd }
    }

    /// Expands dense count vectors into symbol streams in symbol order.
    pub fn from_counts(fwd: &[u32], bwd: &[u32]) -> Self {
        let expand = |v: &[u32]| {
            v.iter().enumerate().flat_map(|(w, &c)| std::iter::repeat_n(w as u32, c as usize)).collect::<Vec<_>>()
        };
        EdgeContent { fwd: expand(fwd), bwd: expand(bwd) }
    }

    pub fn reversed(self) -> Self {
        EdgeContent { fwd: self.bwd, bwd: self.fwd }
    }
}

/// An undirected edge `(i, j)` with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone)]
pub struct Network {
    id: String,
    nodes: Vec<String>,
    edges: Vec<Edge>,
    content: Vec<EdgeContent>,
    counts: Vec<(SparseCounts, SparseCounts)>,
    vocab_size: usize,
    neighbors: Vec<Vec<usize>>,
    edge_lookup: HashMap<Edge, usize>,
}

impl Network {
    /// Builds a network from already-ordered parts. `nodes` must be strictly
    /// increasing, and edges are `(i, j, content)` with `i < j`.
    pub fn from_parts(
        id: impl Into<String>,
        nodes: Vec<String>,
        edges: Vec<(usize, usize, EdgeContent)>,
        vocab_size: usize,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidNetwork { network: id.clone(), reason };
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("node ids must be unique and lexicographically sorted".into()));
        }
        let mut sorted = edges;
        sorted.sort_by_key(|(i, j, _)| (*i, *j));
        let mut edge_list = Vec::with_capacity(sorted.len());
        let mut content = Vec::with_capacity(sorted.len());
        let mut edge_lookup = HashMap::with_capacity(sorted.len());
        let mut neighbors = vec![Vec::new(); nodes.len()];
        for (i, j, c) in sorted {
            if i == j {
                return Err(invalid(format!("self-loop on node {}", i)));
            }
            if i > j {
                return Err(invalid(format!("edge ({}, {}) violates i < j", i, j)));
            }
            if j >= nodes.len() {
                return Err(invalid(format!("edge ({}, {}) references a missing node", i, j)));
            }
            if let Some(&w) = c.fwd.iter().chain(c.bwd.iter()).find(|&&w| w as usize >= vocab_size) {
                return Err(invalid(format!("symbol {} outside vocabulary of size {}", w, vocab_size)));
            }
            let e = Edge { i, j };
            if edge_lookup.insert(e, edge_list.len()).is_some() {
                return Err(invalid(format!("duplicate edge ({}, {})", i, j)));
            }
            neighbors[i].push(j);
            neighbors[j].push(i);
            edge_list.push(e);
            content.push(c);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        let counts =
            content.iter().map(|c| (SparseCounts::from_tokens(&c.fwd), SparseCounts::from_tokens(&c.bwd))).collect();
        Ok(Network { id, nodes, edges: edge_list, content, counts, vocab_size, neighbors, edge_lookup })
    }

    /// Convenience constructor for numbered nodes. Node ids are zero-padded
    /// so that lexicographic order agrees with numeric order.
    pub fn from_edge_list(
        id: impl Into<String>,
        n_nodes: usize,
        edges: &[(usize, usize)],
        vocab_size: usize,
    ) -> Result<Self> {
        let width = n_nodes.saturating_sub(1).to_string().len();
        let nodes = (0..n_nodes).map(|n| format!("n{:0width$}", n, width = width)).collect();
        let parts = edges.iter().map(|&(a, b)| (a.min(b), a.max(b), EdgeContent::default())).collect();
        Network::from_parts(id, nodes, parts, vocab_size)
    }

    /// Returns a copy with the content of every edge replaced.
    pub fn with_content(&self, content: Vec<EdgeContent>) -> Result<Self> {
        assert_eq!(content.len(), self.edges.len());
        let parts = self.edges.iter().zip(content).map(|(e, c)| (e.i, e.j, c)).collect();
        Network::from_parts(self.id.clone(), self.nodes.clone(), parts, self.vocab_size)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn content(&self, edge: usize) -> &EdgeContent {
        &self.content[edge]
    }

    /// Sparse `(x_fwd, x_bwd)` counts for an edge.
    pub fn counts(&self, edge: usize) -> (&SparseCounts, &SparseCounts) {
        let (f, b) = &self.counts[edge];
        (f, b)
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&Edge { i: a.min(b), j: a.max(b) }).copied()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    /// Mutual neighbors of `a` and `b`, ascending.
    pub fn common_neighbors(&self, a: usize, b: usize) -> Vec<usize> {
        let (na, nb) = (&self.neighbors[a], &self.neighbors[b]);
        let (mut x, mut y) = (0, 0);
        let mut out = Vec::new();
        while x < na.len() && y < nb.len() {
            match na[x].cmp(&nb[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    out.push(na[x]);
                    x += 1;
                    y += 1;
                }
            }
        }
        out
    }
}

/// Closed triangles of a network, with per-edge adjacency.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriadIndex {
    /// Node triples `(i, j, k)`, `i < j < k`.
    pub triads: Vec<[usize; 3]>,
    /// Edge indices of each triad, ordered `(ij, jk, ik)`.
    pub triad_edges: Vec<[usize; 3]>,
    /// For each edge, the triads containing it.
    pub per_edge: Vec<Vec<usize>>,
}

impl TriadIndex {
    pub fn len(&self) -> usize {
        self.triads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triads.is_empty()
    }

    /// For edge `e`, the pairs of other edges that close a triangle with it.
    pub fn partner_edges(&self, e: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.per_edge[e].iter().map(move |&t| {
            let [a, b, c] = self.triad_edges[t];
            if a == e {
                (b, c)
            } else if b == e {
                (a, c)
            } else {
                (a, b)
            }
        })
    }
}

pub fn enumerate_triads(net: &Network) -> TriadIndex {
    let mut idx = TriadIndex { per_edge: vec![Vec::new(); net.num_edges()], ..Default::default() };
    for (e_ij, edge) in net.edges().iter().enumerate() {
        let (i, j) = (edge.i, edge.j);
        for k in net.common_neighbors(i, j) {
            if k <= j {
                continue;
            }
            let e_jk = net.edge_index(j, k).expect("common neighbor implies edge");
            let e_ik = net.edge_index(i, k).expect("common neighbor implies edge");
            let t = idx.triads.len();
            idx.triads.push([i, j, k]);
            idx.triad_edges.push([e_ij, e_jk, e_ik]);
            for e in [e_ij, e_jk, e_ik] {
                idx.per_edge[e].push(t);
            }
        }
    }
    idx
}

/// Adamic-Adar score: `Σ_{k ∈ Γ(a) ∩ Γ(b)} 1 / ln |Γ(k)|`.
pub fn adamic_adar(net: &Network, a: usize, b: usize) -> f64 {
    debug_assert_ne!(a, b);
    net.common_neighbors(a, b)
        .into_iter()
        .map(|k| net.degree(k))
        // a mutual neighbor of two distinct nodes has degree >= 2
        .filter(|&d| d >= 2)
        .map(|d| 1.0 / (d as f64).ln())
        .sum()
}

pub fn mutual_friends(net: &Network, a: usize, b: usize) -> f64 {
    net.common_neighbors(a, b).len() as f64
}

/// Label-independent structural measure placed in a dyad feature slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureTemplate {
    AdamicAdar,
    MutualFriends,
}

impl FeatureTemplate {
    pub fn name(self) -> &'static str {
        match self {
            FeatureTemplate::AdamicAdar => "adamic_adar",
            FeatureTemplate::MutualFriends => "mutual_friends",
        }
    }

    pub fn value(self, net: &Network, a: usize, b: usize) -> f64 {
        match self {
            FeatureTemplate::AdamicAdar => adamic_adar(net, a, b),
            FeatureTemplate::MutualFriends => mutual_friends(net, a, b),
        }
    }
}

/// Dyad features laid out as `[template][label]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

pub fn dyad_features(
    net: &Network,
    a: usize,
    b: usize,
    label: Label,
    num_labels: usize,
    templates: &[FeatureTemplate],
) -> FeatureVector {
    let mut v = vec![0.0; templates.len() * num_labels];
    for (t, tpl) in templates.iter().enumerate() {
        v[t * num_labels + label] = tpl.value(net, a, b);
    }
    FeatureVector(v)
}

/// Raw template values per edge, `[edge][template]`.
pub fn edge_template_values(net: &Network, templates: &[FeatureTemplate]) -> Vec<Vec<f64>> {
    net.edges().iter().map(|e| templates.iter().map(|t| t.value(net, e.i, e.j)).collect()).collect()
}

/// Rotation-invariant signed triad type: the sorted multiset of three labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriadType(pub [Label; 3]);

impl TriadType {
    /// Number of occurrences of `label` in the triad.
    pub fn count(&self, label: Label) -> usize {
        self.0.iter().filter(|&&l| l == label).count()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.0[0] == self.0[2]
    }
}

pub fn canonical_triad_type(a: Label, b: Label, c: Label) -> TriadType {
    let mut t = [a, b, c];
    t.sort_unstable();
    TriadType(t)
}

/// All triad types for a label set of size `k`, in lexicographic order of
/// their sorted label triples, with an O(1) lookup from ordered triples.
#[derive(Debug, Clone)]
pub struct TriadCatalog {
    k: usize,
    types: Vec<TriadType>,
    lookup: Vec<usize>,
}

impl TriadCatalog {
    pub fn new(k: usize) -> Self {
        let mut types = Vec::new();
        for a in 0..k {
            for b in a..k {
                for c in b..k {
                    types.push(TriadType([a, b, c]));
                }
            }
        }
        let mut lookup = vec![0; k * k * k];
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    let t = canonical_triad_type(a, b, c);
                    lookup[(a * k + b) * k + c] = types.binary_search(&t).expect("catalog is complete");
                }
            }
        }
        TriadCatalog { k, types, lookup }
    }

    pub fn num_labels(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[TriadType] {
        &self.types
    }

    #[inline]
    pub fn index(&self, a: Label, b: Label, c: Label) -> usize {
        self.lookup[(a * self.k + b) * self.k + c]
    }

    pub fn index_of(&self, t: TriadType) -> usize {
        self.index(t.0[0], t.0[1], t.0[2])
    }

    /// Index of the all-`label` triad.
    pub fn homogeneous(&self, label: Label) -> usize {
        self.index(label, label, label)
    }
}
