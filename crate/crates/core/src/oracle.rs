//! Brute-force ground truth on small graphs and a generative sampler.
//!
//! Everything here enumerates or samples the joint model directly and
//! shares no code path with the mean-field machinery beyond the graph
//! primitives, so it can be used to check the approximate inference.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::estep::EdgeBeliefs;
use crate::graph::{edge_template_values, EdgeContent, FeatureTemplate, Network, TriadCatalog, TriadIndex};
use crate::mstep::draw_categorical;
use crate::params::{ContentParams, ModelParams, StructParams};
use crate::rng;

/// Hard cap on enumerated edges.
pub const MAX_EXACT_EDGES: usize = 20;
/// Largest graph sampled exactly rather than by Gibbs.
pub const MAX_EXACT_SAMPLE_EDGES: usize = 16;

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub log_z: f64,
    pub marginals: EdgeBeliefs,
    pub map_labeling: Vec<usize>,
}

/// Per-edge label scores that do not involve triads.
fn local_scores(net: &Network, params: &ModelParams, with_content: bool) -> Vec<Vec<f64>> {
    let k = params.num_labels();
    let values = edge_template_values(net, &params.templates);
    let logs = with_content.then(|| (params.content.log_fwd(), params.content.log_bwd()));
    (0..net.num_edges())
        .map(|e| {
            (0..k)
                .map(|y| {
                    let mut s: f64 =
                        values[e].iter().enumerate().map(|(t, v)| params.structure.eta[t * k + y] * v).sum();
                    if let Some((lf, lb)) = &logs {
                        let (xf, xb) = net.counts(e);
                        s += xf.dot_log(&lf[y]) + xb.dot_log(&lb[y]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

struct Enumerator<'a> {
    k: usize,
    m: usize,
    local: Vec<Vec<f64>>,
    triads: &'a TriadIndex,
    catalog: TriadCatalog,
    beta: &'a [f64],
}

impl<'a> Enumerator<'a> {
    fn new(net: &Network, triads: &'a TriadIndex, params: &'a ModelParams, with_content: bool) -> Result<Self> {
        let k = params.num_labels();
        let m = net.num_edges();
        let total = (k as f64).powi(m as i32);
        if m > MAX_EXACT_EDGES || total > (1u64 << MAX_EXACT_EDGES) as f64 {
            return Err(Error::TooManyEdges { edges: m, cap: MAX_EXACT_EDGES });
        }
        Ok(Enumerator {
            k,
            m,
            local: local_scores(net, params, with_content),
            triads,
            catalog: TriadCatalog::new(k),
            beta: &params.structure.beta,
        })
    }

    fn count(&self) -> usize {
        self.k.pow(self.m as u32)
    }

    /// Labeling number `n`, edge 0 most significant, so increasing `n`
    /// walks labelings in lexicographic order.
    fn decode(&self, mut n: usize, out: &mut [usize]) {
        for e in (0..self.m).rev() {
            out[e] = n % self.k;
            n /= self.k;
        }
    }

    fn score(&self, y: &[usize]) -> f64 {
        let mut s: f64 = y.iter().enumerate().map(|(e, &l)| self.local[e][l]).sum();
        for &[a, b, c] in &self.triads.triad_edges {
            s += self.beta[self.catalog.index(y[a], y[b], y[c])];
        }
        s
    }
}

/// Exact log-partition function, single-edge marginals and MAP labeling of
/// the prior, or of the content-weighted joint when `with_content` is set.
pub fn exact_partition(
    net: &Network,
    triads: &TriadIndex,
    params: &ModelParams,
    with_content: bool,
) -> Result<ExactResult> {
    let en = Enumerator::new(net, triads, params, with_content)?;
    let (k, m) = (en.k, en.m);
    let mut y = vec![0; m];
    let mut scores = Vec::with_capacity(en.count());
    let mut best = (f64::NEG_INFINITY, 0);
    for n in 0..en.count() {
        en.decode(n, &mut y);
        let s = en.score(&y);
        if s > best.0 {
            best = (s, n);
        }
        scores.push(s);
    }
    let max = best.0;
    let mut z = 0.0;
    let mut marg = vec![vec![0.0; k]; m];
    for (n, &s) in scores.iter().enumerate() {
        let w = (s - max).exp();
        z += w;
        en.decode(n, &mut y);
        for (e, &l) in y.iter().enumerate() {
            marg[e][l] += w;
        }
    }
    for row in &mut marg {
        row.iter_mut().for_each(|p| *p /= z);
    }
    let mut map_labeling = vec![0; m];
    en.decode(best.1, &mut map_labeling);
    let marginals = if m == 0 { EdgeBeliefs::uniform(0, k) } else { EdgeBeliefs::from_rows(&marg) };
    Ok(ExactResult { log_z: max + z.ln(), marginals, map_labeling })
}

/// `Z` by plain summation of `exp(score)`, with no log-domain shifting.
pub fn direct_partition(net: &Network, triads: &TriadIndex, params: &ModelParams, with_content: bool) -> Result<f64> {
    let en = Enumerator::new(net, triads, params, with_content)?;
    let mut y = vec![0; en.m];
    let mut z = 0.0;
    for n in 0..en.count() {
        en.decode(n, &mut y);
        z += en.score(&y).exp();
    }
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerMode {
    /// Exact for graphs up to [`MAX_EXACT_SAMPLE_EDGES`] edges, Gibbs beyond.
    Auto,
    Exact,
    Gibbs {
        burn_in: usize,
    },
}

pub const DEFAULT_BURN_IN: usize = 1000;

/// Full conditional of edge `e` under the prior given all other labels.
fn gibbs_conditional(
    local: &[Vec<f64>],
    catalog: &TriadCatalog,
    beta: &[f64],
    triads: &TriadIndex,
    y: &[usize],
    e: usize,
    out: &mut [f64],
) {
    for (l, o) in out.iter_mut().enumerate() {
        *o = local[e][l];
        for (a, b) in triads.partner_edges(e) {
            *o += beta[catalog.index(l, y[a], y[b])];
        }
    }
    let m = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    out.iter_mut().for_each(|s| *s = (*s - m).exp());
}

fn gibbs_sweep(
    local: &[Vec<f64>],
    catalog: &TriadCatalog,
    beta: &[f64],
    triads: &TriadIndex,
    y: &mut [usize],
    rng: &mut ChaCha8Rng,
) {
    let mut p = vec![0.0; catalog.num_labels()];
    for e in 0..y.len() {
        gibbs_conditional(local, catalog, beta, triads, y, e, &mut p);
        y[e] = draw_categorical(rng, &p);
    }
}

/// Draws one labeling from the prior.
pub fn sample_labeling(
    net: &Network,
    triads: &TriadIndex,
    params: &ModelParams,
    mode: SamplerMode,
    seed: u64,
) -> Result<Vec<usize>> {
    let mut rng = rng::substream(seed, "labeling", &[]);
    sample_labeling_with(net, triads, params, mode, &mut rng)
}

fn sample_labeling_with(
    net: &Network,
    triads: &TriadIndex,
    params: &ModelParams,
    mode: SamplerMode,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let m = net.num_edges();
    let mode = match mode {
        SamplerMode::Auto if m <= MAX_EXACT_SAMPLE_EDGES => SamplerMode::Exact,
        SamplerMode::Auto => SamplerMode::Gibbs { burn_in: DEFAULT_BURN_IN },
        other => other,
    };
    match mode {
        SamplerMode::Exact => {
            let en = Enumerator::new(net, triads, params, false)?;
            let scores: Vec<f64> = (0..en.count())
                .map(|n| {
                    let mut y = vec![0; m];
                    en.decode(n, &mut y);
                    en.score(&y)
                })
                .collect();
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
            let n = draw_categorical(rng, &weights);
            let mut y = vec![0; m];
            en.decode(n, &mut y);
            Ok(y)
        }
        SamplerMode::Gibbs { burn_in } => {
            let k = params.num_labels();
            let local = local_scores(net, params, false);
            let catalog = TriadCatalog::new(k);
            let mut y: Vec<usize> = (0..m).map(|_| rng.random_range(0..k)).collect();
            for _ in 0..burn_in {
                gibbs_sweep(&local, &catalog, &params.structure.beta, triads, &mut y, rng);
            }
            Ok(y)
        }
        SamplerMode::Auto => unreachable!(),
    }
}

/// Empirical edge marginals of the prior from a single Gibbs chain.
pub fn gibbs_marginals(
    net: &Network,
    triads: &TriadIndex,
    params: &ModelParams,
    burn_in: usize,
    sweeps: usize,
    seed: u64,
) -> EdgeBeliefs {
    let k = params.num_labels();
    let m = net.num_edges();
    let mut rng = rng::substream(seed, "gibbs", &[]);
    let local = local_scores(net, params, false);
    let catalog = TriadCatalog::new(k);
    let mut y: Vec<usize> = (0..m).map(|_| rng.random_range(0..k)).collect();
    for _ in 0..burn_in {
        gibbs_sweep(&local, &catalog, &params.structure.beta, triads, &mut y, &mut rng);
    }
    let mut counts = vec![vec![0.0; k]; m];
    for _ in 0..sweeps {
        gibbs_sweep(&local, &catalog, &params.structure.beta, triads, &mut y, &mut rng);
        for (e, &l) in y.iter().enumerate() {
            counts[e][l] += 1.0;
        }
    }
    for row in &mut counts {
        row.iter_mut().for_each(|c| *c /= sweeps.max(1) as f64);
    }
    if m == 0 {
        EdgeBeliefs::uniform(0, k)
    } else {
        EdgeBeliefs::from_rows(&counts)
    }
}

/// Description of a synthetic corpus drawn from the generative model.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub num_networks: usize,
    pub nodes: usize,
    /// Edges per network, placed uniformly at random among node pairs.
    pub edges: usize,
    pub templates: Vec<FeatureTemplate>,
    pub structure: StructParams,
    pub content: ContentParams,
    pub vocab: Vec<String>,
    /// Mean address tokens per dyad, split evenly between the directions;
    /// each direction draws a Poisson count.
    pub tokens_per_dyad: f64,
    pub sampler: SamplerMode,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn edge_density(&self) -> f64 {
        let pairs = self.nodes * self.nodes.saturating_sub(1) / 2;
        if pairs == 0 {
            0.0
        } else {
            self.edges as f64 / pairs as f64
        }
    }
}

/// Content distributions where label `y` concentrates `top_mass` on its own
/// block of `block` symbols and spreads the rest uniformly over the
/// vocabulary.
pub fn block_topics(num_labels: usize, vocab: usize, block: usize, top_mass: f64) -> ContentParams {
    assert!(num_labels * block <= vocab);
    let theta: Vec<Vec<f64>> = (0..num_labels)
        .map(|y| {
            (0..vocab)
                .map(|w| {
                    let base = (1.0 - top_mass) / vocab as f64;
                    if w / block == y && w < num_labels * block {
                        base + top_mass / block as f64
                    } else {
                        base
                    }
                })
                .collect()
        })
        .collect();
    ContentParams { theta_fwd: theta.clone(), theta_bwd: theta, alpha: 0.0 }
}

/// Homogeneous/heterogeneous triad weights for the binary label set,
/// in catalog order `ttt, ttv, tvv, vvv`.
pub fn balance_beta(hom: f64, het: f64) -> Vec<f64> {
    vec![hom, het, het, hom]
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// True label of every edge, per network; kept for scoring only.
    pub truth: Vec<Vec<usize>>,
}

fn random_graph(id: String, nodes: usize, edges: usize, vocab: usize, rng: &mut ChaCha8Rng) -> Result<Network> {
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for a in 0..nodes {
        for b in a + 1..nodes {
            pairs.push((a, b));
        }
    }
    if edges > pairs.len() {
        return Err(Error::InvalidConfig(format!("{} edges do not fit on {} nodes", edges, nodes)));
    }
    pairs.shuffle(rng);
    pairs.truncate(edges);
    Network::from_edge_list(id, nodes, &pairs, vocab)
}

pub fn generate_corpus(spec: &SyntheticSpec, labels: &crate::params::LabelSet) -> Result<SyntheticCorpus> {
    let k = labels.len();
    let vocab = spec.vocab.len();
    if spec.content.num_labels() != k || spec.content.vocab_size() != vocab {
        return Err(Error::InvalidConfig("content parameters disagree with labels or vocabulary".into()));
    }
    let params = ModelParams {
        labels: labels.clone(),
        tying: crate::params::TyingScheme::Directed,
        templates: spec.templates.clone(),
        content: spec.content.clone(),
        structure: spec.structure.clone(),
    };
    let per_direction = spec.tokens_per_dyad / 2.0;
    let poisson = if per_direction > 0.0 {
        Some(Poisson::new(per_direction).map_err(|e| Error::InvalidConfig(e.to_string()))?)
    } else {
        None
    };
    let width = spec.num_networks.saturating_sub(1).to_string().len();
    let mut networks = Vec::with_capacity(spec.num_networks);
    let mut truth = Vec::with_capacity(spec.num_networks);
    for t in 0..spec.num_networks {
        let mut rng = rng::substream(spec.seed, "synthetic", &[t as u64]);
        let id = format!("film{:0width$}", t, width = width);
        let graph = random_graph(id, spec.nodes, spec.edges, vocab, &mut rng)?;
        let triads = crate::graph::enumerate_triads(&graph);
        let labeling = sample_labeling_with(&graph, &triads, &params, spec.sampler, &mut rng)?;
        let draw_tokens = |theta: &[f64], rng: &mut ChaCha8Rng| -> Vec<u32> {
            let n = poisson.as_ref().map_or(0, |p| p.sample(rng) as usize);
            (0..n).map(|_| draw_categorical(rng, theta) as u32).collect()
        };
        let content = labeling
            .iter()
            .map(|&y| {
                let fwd = draw_tokens(&spec.content.theta_fwd[y], &mut rng);
                let bwd = draw_tokens(&spec.content.theta_bwd[y], &mut rng);
                EdgeContent::new(fwd, bwd)
            })
            .collect();
        networks.push(graph.with_content(content)?);
        truth.push(labeling);
    }
    Ok(SyntheticCorpus { corpus: Corpus::new(spec.vocab.clone(), networks)?, truth })
}

/// Fraction of edges whose predicted label matches the truth under the best
/// relabeling of clusters, and that relabeling (`perm[predicted] = true`).
pub fn best_permutation_accuracy(truth: &[Vec<usize>], predicted: &[Vec<usize>], k: usize) -> (f64, Vec<usize>) {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = (-1.0, perm.clone());
    let total: usize = truth.iter().map(Vec::len).sum();
    permutations(&mut perm, 0, &mut |p| {
        let hits: usize =
            truth.iter().zip(predicted).map(|(t, q)| t.iter().zip(q).filter(|(a, b)| **a == p[**b]).count()).sum();
        let acc = if total == 0 { 1.0 } else { hits as f64 / total as f64 };
        if acc > best.0 {
            best = (acc, p.to_vec());
        }
    });
    best
}

fn permutations(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permutations(p, i + 1, f);
        p.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::enumerate_triads;
    use crate::params::{LabelSet, TyingScheme};

    fn prior(beta: Vec<f64>) -> ModelParams {
        ModelParams {
            labels: LabelSet::tv(),
            tying: TyingScheme::Symmetric,
            templates: vec![FeatureTemplate::AdamicAdar],
            content: block_topics(2, 2, 1, 0.5),
            structure: StructParams { eta: vec![0.0, 0.0], beta, c: 0.0 },
        }
    }

    fn triangle() -> Network {
        Network::from_edge_list("t", 3, &[(0, 1), (1, 2), (0, 2)], 2).unwrap()
    }

    #[test]
    fn single_edge_uniform() {
        let net = Network::from_edge_list("e", 2, &[(0, 1)], 2).unwrap();
        let r = exact_partition(&net, &enumerate_triads(&net), &prior(vec![0.0; 4]), false).unwrap();
        assert!((r.log_z - 2f64.ln()).abs() < 1e-15);
        assert_eq!(r.marginals.get(0), &[0.5, 0.5]);
    }

    #[test]
    fn triangle_partition() {
        let net = triangle();
        let t = enumerate_triads(&net);
        let r = exact_partition(&net, &t, &prior(vec![0.0; 4]), false).unwrap();
        assert!((r.log_z.exp() - 8.0).abs() < 1e-12);
        let e = std::f64::consts::E;
        let r = exact_partition(&net, &t, &prior(vec![1.0, 0.0, 0.0, 0.0]), false).unwrap();
        assert!((r.log_z.exp() - (e + 7.0)).abs() < 1e-12);
        for q in r.marginals.rows() {
            assert!((q[0] - (e + 3.0) / (e + 7.0)).abs() < 1e-14);
        }
        assert_eq!(r.map_labeling, vec![0, 0, 0]);
    }

    #[test]
    fn map_ties_break_lexicographically() {
        let net = triangle();
        let r = exact_partition(&net, &enumerate_triads(&net), &prior(vec![0.0; 4]), false).unwrap();
        assert_eq!(r.map_labeling, vec![0, 0, 0]);
        let r = exact_partition(&net, &enumerate_triads(&net), &prior(vec![0.0, 1.0, 0.0, 0.0]), false).unwrap();
        // ttv-type labelings in lexicographic order: (0,0,1) first
        assert_eq!(r.map_labeling, vec![0, 0, 1]);
    }

    #[test]
    fn refuses_large_graphs() {
        let edges: Vec<(usize, usize)> = (0..21).map(|i| (i, i + 1)).collect();
        let net = Network::from_edge_list("big", 22, &edges, 2).unwrap();
        let err = exact_partition(&net, &enumerate_triads(&net), &prior(vec![0.0; 4]), false).unwrap_err();
        assert!(err.to_string().contains("cap of 20"));
    }

    #[test]
    fn strong_ttt_weight_samples_all_t() {
        let net = triangle();
        let t = enumerate_triads(&net);
        let p = prior(vec![20.0, 0.0, 0.0, 0.0]);
        let hits = (0..2000)
            .filter(|&s| sample_labeling(&net, &t, &p, SamplerMode::Exact, s).unwrap() == vec![0, 0, 0])
            .count();
        assert!(hits as f64 / 2000.0 > 0.999);
        assert_eq!(
            sample_labeling(&net, &t, &p, SamplerMode::Exact, 7).unwrap(),
            sample_labeling(&net, &t, &p, SamplerMode::Exact, 7).unwrap()
        );
    }

    #[test]
    fn permutation_accuracy() {
        let truth = vec![vec![0, 0, 1, 1]];
        let (acc, perm) = best_permutation_accuracy(&truth, &[vec![1, 1, 0, 0]], 2);
        assert_eq!(acc, 1.0);
        assert_eq!(perm, vec![1, 0]);
    }
}
