#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signet_core::graph::{enumerate_triads, EdgeContent, FeatureTemplate, Network};
use signet_core::params::{ContentParams, LabelSet, ModelParams, StructParams, TyingScheme};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `m` distinct random pairs on `n` nodes.
pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    for i in 0..pairs.len() {
        let j = rng.random_range(i..pairs.len());
        pairs.swap(i, j);
    }
    pairs.truncate(m);
    pairs
}

/// A random graph with at most `max_edges` edges and at least one triad.
pub fn random_graph_with_triads(rng: &mut ChaCha8Rng, max_edges: usize) -> Network {
    loop {
        let n = rng.random_range(4..=6);
        let m = rng.random_range(3..=max_edges.min(n * (n - 1) / 2));
        let net = Network::from_edge_list("g", n, &random_edges(rng, n, m), 1).unwrap();
        if !enumerate_triads(&net).is_empty() {
            return net;
        }
    }
}

/// A random forest: node `i` attaches to an earlier node or starts a new tree.
pub fn random_forest(rng: &mut ChaCha8Rng, max_edges: usize) -> Network {
    let n = rng.random_range(2..=max_edges + 1);
    let mut edges = Vec::new();
    for i in 1..n {
        if rng.random_bool(0.85) {
            edges.push((rng.random_range(0..i), i));
        }
    }
    Network::from_edge_list("forest", n, &edges, 1).unwrap()
}

pub fn random_simplex(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Random weights in `[-scale, scale]` with the gauge slots at zero.
pub fn random_structure(rng: &mut ChaCha8Rng, scale: f64, eta: bool) -> StructParams {
    let mut s = StructParams {
        eta: (0..2).map(|_| if eta { uniform(rng, -scale, scale) } else { 0.0 }).collect(),
        beta: (0..4).map(|_| uniform(rng, -scale, scale)).collect(),
        c: 0.0,
    };
    s.eta[1] = 0.0;
    s.beta[3] = 0.0;
    s
}

pub fn random_content(rng: &mut ChaCha8Rng, vocab: usize) -> ContentParams {
    ContentParams {
        theta_fwd: (0..2).map(|_| random_simplex(rng, vocab)).collect(),
        theta_bwd: (0..2).map(|_| random_simplex(rng, vocab)).collect(),
        alpha: 0.0,
    }
}

pub fn model(content: ContentParams, structure: StructParams) -> ModelParams {
    ModelParams {
        labels: LabelSet::tv(),
        tying: TyingScheme::Directed,
        templates: vec![FeatureTemplate::AdamicAdar],
        content,
        structure,
    }
}

/// Attaches up to `max_tokens` random tokens per direction to every edge.
pub fn with_random_tokens(rng: &mut ChaCha8Rng, net: &Network, vocab: usize, max_tokens: usize) -> Network {
    let content = (0..net.num_edges())
        .map(|_| {
            let mut draw = || -> Vec<u32> {
                let n = rng.random_range(0..=max_tokens);
                (0..n).map(|_| rng.random_range(0..vocab as u32)).collect()
            };
            let fwd = draw();
            EdgeContent::new(fwd, draw())
        })
        .collect();
    let parts: Vec<(usize, usize)> = net.edges().iter().map(|e| (e.i, e.j)).collect();
    Network::from_edge_list(net.id(), net.nodes().len(), &parts, vocab).unwrap().with_content(content).unwrap()
}
