//! M-step: closed-form content updates and noise-contrastive estimation of
//! the structural weights.
//!
//! The NCE score of a labeling is `s(y) = log P⁰(y) + c − log P_n(y) − log ν`
//! with ν noise samples per network. Because true labelings are latent, the
//! data side uses expectations under the current beliefs while each noise
//! labeling is scored concretely. Both sides are linear in the flat weight
//! vector `[η.., β.., c]`, so every network contributes a feature row and an
//! offset and the objective is a logistic loss over those rows.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estep::{expected_triad_sum, EdgeBeliefs};
use crate::graph::{edge_template_values, FeatureTemplate, Network, TriadCatalog, TriadIndex};
use crate::lbfgs::{self, LbfgsConfig};
use crate::params::{ContentParams, ParamLayout, StructParams, TyingScheme};
use crate::rng;

/// Closed-form multinomial update from expected counts, smoothed by `alpha`
/// and pooled across tied (direction, label) pairs before normalization.
pub fn mstep_content(
    networks: &[Network],
    beliefs: &[EdgeBeliefs],
    num_labels: usize,
    tying: TyingScheme,
    alpha: f64,
) -> Result<ContentParams> {
    let vocab = networks.first().map_or(0, Network::vocab_size);
    if vocab == 0 {
        return Err(Error::InvalidConfig("empty vocabulary".into()));
    }
    let k = num_labels;
    let partial: Vec<(Vec<f64>, Vec<f64>)> = networks
        .par_iter()
        .zip(beliefs.par_iter())
        .map(|(net, q)| {
            let mut fwd = vec![0.0; k * vocab];
            let mut bwd = vec![0.0; k * vocab];
            for e in 0..net.num_edges() {
                let (xf, xb) = net.counts(e);
                for (y, &p) in q.get(e).iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    for (w, c) in xf.iter() {
                        fwd[y * vocab + w] += p * c as f64;
                    }
                    for (w, c) in xb.iter() {
                        bwd[y * vocab + w] += p * c as f64;
                    }
                }
            }
            (fwd, bwd)
        })
        .collect();
    let mut fwd = vec![0.0; k * vocab];
    let mut bwd = vec![0.0; k * vocab];
    for (f, b) in &partial {
        fwd.iter_mut().zip(f).for_each(|(a, x)| *a += x);
        bwd.iter_mut().zip(b).for_each(|(a, x)| *a += x);
    }
    let row = |m: &[f64], y: usize| m[y * vocab..(y + 1) * vocab].to_vec();
    let normalize = |mut v: Vec<f64>, y: usize| -> Result<Vec<f64>> {
        v.iter_mut().for_each(|x| *x += alpha);
        let s: f64 = v.iter().sum();
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::UndefinedMultinomial { label: y });
        }
        v.iter_mut().for_each(|x| *x /= s);
        Ok(v)
    };
    let mut theta_fwd = vec![Vec::new(); k];
    let mut theta_bwd = vec![Vec::new(); k];
    for y in 0..k {
        match tying.partner(y, k) {
            None => {
                theta_fwd[y] = normalize(row(&fwd, y), y)?;
                theta_bwd[y] = normalize(row(&bwd, y), y)?;
            }
            Some(p) => {
                let pooled: Vec<f64> = row(&fwd, y).iter().zip(row(&bwd, p)).map(|(a, b)| a + b).collect();
                let theta = normalize(pooled, y)?;
                theta_bwd[p] = theta.clone();
                theta_fwd[y] = theta;
            }
        }
    }
    Ok(ContentParams { theta_fwd, theta_bwd, alpha })
}

/// Expected sufficient statistics under the beliefs, in flat layout with a
/// 1 in the `c` slot.
pub fn expected_features(
    net: &Network,
    triads: &TriadIndex,
    beliefs: &EdgeBeliefs,
    templates: &[FeatureTemplate],
    layout: &ParamLayout,
) -> Vec<f64> {
    let k = layout.num_labels;
    let mut phi = vec![0.0; layout.dim()];
    let values = edge_template_values(net, templates);
    for (e, q) in beliefs.rows().enumerate() {
        for (t, v) in values[e].iter().enumerate() {
            for y in 0..k {
                phi[t * k + y] += q[y] * v;
            }
        }
    }
    let cat = layout.catalog();
    let off = layout.beta_offset();
    for &[a, b, c] in &triads.triad_edges {
        let (qa, qb, qc) = (beliefs.get(a), beliefs.get(b), beliefs.get(c));
        for (y0, &p0) in qa.iter().enumerate() {
            for (y1, &p1) in qb.iter().enumerate() {
                for (y2, &p2) in qc.iter().enumerate() {
                    phi[off + cat.index(y0, y1, y2)] += p0 * p1 * p2;
                }
            }
        }
    }
    phi[layout.c_index()] = 1.0;
    phi
}

/// Sufficient statistics of a concrete labeling, same layout as
/// [`expected_features`].
pub fn labeling_features(
    net: &Network,
    triads: &TriadIndex,
    labeling: &[usize],
    templates: &[FeatureTemplate],
    layout: &ParamLayout,
) -> Vec<f64> {
    expected_features(net, triads, &EdgeBeliefs::hard(labeling, layout.num_labels), templates, layout)
}

/// `E_Q[log P⁰(y)] = Σ_edges Σ_y q ηᵀf + Σ_triads Σ q q q β`.
pub fn expected_log_unnormalized_prior(
    net: &Network,
    triads: &TriadIndex,
    beliefs: &EdgeBeliefs,
    templates: &[FeatureTemplate],
    params: &StructParams,
) -> f64 {
    let k = beliefs.num_labels();
    let values = edge_template_values(net, templates);
    let mut total = 0.0;
    for (e, q) in beliefs.rows().enumerate() {
        for (t, v) in values[e].iter().enumerate() {
            for y in 0..k {
                total += q[y] * params.eta[t * k + y] * v;
            }
        }
    }
    total + expected_triad_sum(&TriadCatalog::new(k), &params.beta, triads, beliefs)
}

/// Noise labelings drawn i.i.d. per edge from each network's empirical
/// label distribution under the beliefs.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSample {
    /// `labelings[network][draw][edge]`.
    pub labelings: Vec<Vec<Vec<usize>>>,
    /// Per network, normalized `Σ_edges q_ij`.
    pub empirical_dist: Vec<Vec<f64>>,
    /// Per network, `E_Q[log P_n(y)] = |E| · Σ_y p(y) log p(y)`.
    pub expected_log_noise: Vec<f64>,
    /// Per network and draw, `log P_n(ỹ)`.
    pub sample_log_noise: Vec<Vec<f64>>,
}

pub fn empirical_distribution(beliefs: &EdgeBeliefs) -> Vec<f64> {
    let k = beliefs.num_labels();
    let m = beliefs.num_edges();
    if m == 0 {
        return vec![1.0 / k as f64; k];
    }
    let mut p = vec![0.0; k];
    for q in beliefs.rows() {
        p.iter_mut().zip(q).for_each(|(a, b)| *a += b);
    }
    p.iter_mut().for_each(|a| *a /= m as f64);
    p
}

fn pooled_distribution(beliefs: &[EdgeBeliefs]) -> Vec<f64> {
    let k = beliefs.first().map_or(1, EdgeBeliefs::num_labels);
    let mut p = vec![0.0; k];
    let mut m = 0usize;
    for q in beliefs {
        for row in q.rows() {
            p.iter_mut().zip(row).for_each(|(a, b)| *a += b);
        }
        m += q.num_edges();
    }
    if m == 0 {
        return vec![1.0 / k as f64; k];
    }
    p.iter_mut().for_each(|a| *a /= m as f64);
    p
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Where the empirical label distribution of the noise is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseScope {
    /// Separately for each network from its own beliefs.
    #[default]
    PerNetwork,
    /// Once from the beliefs of all networks together.
    Pooled,
}

pub fn sample_noise(
    networks: &[Network],
    beliefs: &[EdgeBeliefs],
    per_true: usize,
    scope: NoiseScope,
    seed: u64,
) -> NoiseSample {
    let pooled = (scope == NoiseScope::Pooled).then(|| pooled_distribution(beliefs));
    let mut out = NoiseSample {
        labelings: Vec::with_capacity(networks.len()),
        empirical_dist: Vec::with_capacity(networks.len()),
        expected_log_noise: Vec::with_capacity(networks.len()),
        sample_log_noise: Vec::with_capacity(networks.len()),
    };
    for (t, (net, q)) in networks.iter().zip(beliefs).enumerate() {
        let p = pooled.clone().unwrap_or_else(|| empirical_distribution(q));
        let m = net.num_edges();
        let neg_entropy: f64 = p.iter().map(|&pi| xlogy(pi, pi)).sum();
        let mut rng = rng::substream(seed, "noise", &[t as u64]);
        let mut draws = Vec::with_capacity(per_true);
        let mut logs = Vec::with_capacity(per_true);
        for _ in 0..per_true {
            let labeling: Vec<usize> = (0..m).map(|_| draw_categorical(&mut rng, &p)).collect();
            logs.push(labeling.iter().map(|&y| p[y].ln()).sum());
            draws.push(labeling);
        }
        out.expected_log_noise.push(m as f64 * neg_entropy);
        out.empirical_dist.push(p);
        out.labelings.push(draws);
        out.sample_log_noise.push(logs);
    }
    out
}

pub(crate) fn draw_categorical<R: Rng>(rng: &mut R, p: &[f64]) -> usize {
    let u: f64 = rng.random::<f64>() * p.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (y, &pi) in p.iter().enumerate() {
        if pi <= 0.0 {
            continue;
        }
        acc += pi;
        last = y;
        if u < acc {
            return y;
        }
    }
    last
}

#[derive(Debug, Clone, Copy)]
pub struct NceConfig {
    pub noise_per_true: usize,
    pub noise_scope: NoiseScope,
    pub optimizer: LbfgsConfig,
    /// Ridge penalty `ridge/2 · ‖(η, β)‖²` subtracted from the objective;
    /// `c` is not penalized. Keeps the fit finite when near-hard beliefs
    /// make data and noise rows almost separable.
    pub ridge: f64,
}

impl Default for NceConfig {
    fn default() -> Self {
        NceConfig {
            noise_per_true: 1,
            noise_scope: NoiseScope::PerNetwork,
            optimizer: LbfgsConfig::default(),
            ridge: 1.0,
        }
    }
}

/// `(φ, offset)`: the score is `w·φ − offset`.
type FeatureRow = (Vec<f64>, f64);

/// Feature rows and offsets of the NCE logistic problem.
#[derive(Debug, Clone)]
pub struct NceProblem {
    data: Vec<FeatureRow>,
    noise: Vec<FeatureRow>,
    dim: usize,
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl NceProblem {
    /// Networks without edges carry no information and are skipped.
    pub fn new(
        networks: &[Network],
        triads: &[TriadIndex],
        beliefs: &[EdgeBeliefs],
        noise: &NoiseSample,
        templates: &[FeatureTemplate],
        layout: &ParamLayout,
    ) -> Self {
        let log_nu = (noise.labelings.first().map_or(1, Vec::len).max(1) as f64).ln();
        let rows: Vec<(FeatureRow, Vec<FeatureRow>)> = (0..networks.len())
            .into_par_iter()
            .filter(|&t| networks[t].num_edges() > 0)
            .map(|t| {
                let (net, tri, q) = (&networks[t], &triads[t], &beliefs[t]);
                let p = &noise.empirical_dist[t];
                let expected_log_noise: f64 =
                    q.rows().map(|row| row.iter().zip(p).map(|(&qy, &py)| xlogy(qy, py)).sum::<f64>()).sum();
                let data = (expected_features(net, tri, q, templates, layout), expected_log_noise + log_nu);
                let noise_rows = noise.labelings[t]
                    .iter()
                    .zip(&noise.sample_log_noise[t])
                    .map(|(lab, &ln)| (labeling_features(net, tri, lab, templates, layout), ln + log_nu))
                    .collect();
                (data, noise_rows)
            })
            .collect();
        let mut data = Vec::with_capacity(rows.len());
        let mut noise_rows = Vec::new();
        for (d, n) in rows {
            data.push(d);
            noise_rows.extend(n);
        }
        NceProblem { data, noise: noise_rows, dim: layout.dim() }
    }

    pub fn num_data(&self) -> usize {
        self.data.len()
    }

    /// `J(w) = Σ log σ(s_data) + Σ log σ(−s_noise)` and its gradient.
    pub fn objective_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let mut value = 0.0;
        let mut comp = 0.0;
        let mut grad = vec![0.0; self.dim];
        let mut add = |v: f64| {
            // Neumaier summation
            let t = value + v;
            if f64::abs(value) >= f64::abs(v) {
                comp += (value - t) + v;
            } else {
                comp += (v - t) + value;
            }
            value = t;
        };
        for (phi, off) in &self.data {
            let s = dot(w, phi) - off;
            add(log_sigmoid(s));
            let g = sigmoid(-s);
            grad.iter_mut().zip(phi).for_each(|(a, f)| *a += g * f);
        }
        for (phi, off) in &self.noise {
            let s = dot(w, phi) - off;
            add(log_sigmoid(-s));
            let g = sigmoid(s);
            grad.iter_mut().zip(phi).for_each(|(a, f)| *a -= g * f);
        }
        (value + comp, grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// NCE objective and its exact gradient over the flat `[η, β, c]` vector.
pub fn nce_objective_and_gradient(
    networks: &[Network],
    triads: &[TriadIndex],
    beliefs: &[EdgeBeliefs],
    noise: &NoiseSample,
    templates: &[FeatureTemplate],
    layout: &ParamLayout,
    params: &StructParams,
) -> Result<(f64, Vec<f64>)> {
    let problem = NceProblem::new(networks, triads, beliefs, noise, templates, layout);
    let (v, g) = problem.objective_and_gradient(&layout.flatten(params));
    if !v.is_finite() || g.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { context: "NCE objective".into(), detail: format!("at {:?}", params) });
    }
    Ok((v, g))
}

#[derive(Debug, Clone)]
pub struct StructFit {
    pub params: StructParams,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximizes the NCE objective over the free coordinates with L-BFGS,
/// starting from `init`. Pinned coordinates stay exactly zero.
#[allow(clippy::too_many_arguments)]
pub fn optimize_struct(
    networks: &[Network],
    triads: &[TriadIndex],
    beliefs: &[EdgeBeliefs],
    templates: &[FeatureTemplate],
    layout: &ParamLayout,
    init: &StructParams,
    config: &NceConfig,
    seed: u64,
) -> Result<StructFit> {
    if config.noise_per_true == 0 {
        return Err(Error::InvalidConfig("noise_per_true must be at least 1".into()));
    }
    if !(config.ridge >= 0.0 && config.ridge.is_finite()) {
        return Err(Error::InvalidConfig(format!("ridge {} must be finite and non-negative", config.ridge)));
    }
    let noise = sample_noise(networks, beliefs, config.noise_per_true, config.noise_scope, seed);
    let problem = NceProblem::new(networks, triads, beliefs, &noise, templates, layout);
    let mut start = init.clone();
    layout.enforce(&mut start);
    let base = layout.flatten(&start);
    let free = layout.free_indices();
    let expand = |z: &[f64]| {
        let mut w = base.clone();
        for (&i, &v) in free.iter().zip(z) {
            w[i] = v;
        }
        w
    };
    let c_index = layout.c_index();
    let x0: Vec<f64> = free.iter().map(|&i| base[i]).collect();
    let outcome = lbfgs::minimize(
        |z| {
            let w = expand(z);
            let (mut v, mut g) = problem.objective_and_gradient(&w);
            for i in 0..c_index {
                v -= 0.5 * config.ridge * w[i] * w[i];
                g[i] -= config.ridge * w[i];
            }
            (-v, free.iter().map(|&i| -g[i]).collect())
        },
        x0,
        &config.optimizer,
    )
    .map_err(|e| Error::Diverged(format!("{} (initial params {:?})", e, start)))?;
    let mut params = layout.unflatten(&expand(&outcome.x));
    layout.enforce(&mut params);
    if !params.is_finite() {
        return Err(Error::Diverged(format!("non-finite structural weights {:?}", params)));
    }
    Ok(StructFit { params, objective: -outcome.value, iterations: outcome.iterations, converged: outcome.converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{enumerate_triads, EdgeContent};

    #[test]
    fn content_mle_with_hard_beliefs() {
        let net = Network::from_edge_list("a", 3, &[(0, 1), (1, 2)], 3)
            .unwrap()
            .with_content(vec![
                EdgeContent::from_counts(&[2, 1, 0], &[0, 0, 1]),
                EdgeContent::from_counts(&[0, 0, 4], &[1, 0, 0]),
            ])
            .unwrap();
        let q = EdgeBeliefs::hard(&[0, 1], 2);
        let c = mstep_content(&[net], &[q], 2, TyingScheme::Directed, 0.0).unwrap();
        assert_eq!(c.theta_fwd[0], vec![2.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert_eq!(c.theta_bwd[1], vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn half_weighted_counts() {
        let net = Network::from_edge_list("a", 3, &[(0, 1), (1, 2)], 2)
            .unwrap()
            .with_content(vec![EdgeContent::from_counts(&[2, 0], &[0, 0]), EdgeContent::from_counts(&[0, 2], &[0, 0])])
            .unwrap();
        let q = EdgeBeliefs::uniform(2, 2);
        let c = mstep_content(&[net], &[q], 2, TyingScheme::Symmetric, 0.0).unwrap();
        assert_eq!(c.theta_fwd[0], vec![0.5, 0.5]);
        assert_eq!(c.theta_fwd, c.theta_bwd);
    }

    #[test]
    fn symmetric_pools_directions() {
        let net = Network::from_edge_list("a", 2, &[(0, 1)], 2)
            .unwrap()
            .with_content(vec![EdgeContent::from_counts(&[3, 0], &[0, 1])])
            .unwrap();
        let c = mstep_content(&[net], &[EdgeBeliefs::hard(&[0], 2)], 2, TyingScheme::Symmetric, 0.5).unwrap();
        assert_eq!(c.theta_fwd[0], vec![3.5 / 5.0, 1.5 / 5.0]);
        assert_eq!(c.theta_fwd[0], c.theta_bwd[0]);
        // label 1 saw no counts: alpha alone
        assert_eq!(c.theta_fwd[1], vec![0.5, 0.5]);
    }

    #[test]
    fn zero_counts_without_smoothing_is_an_error() {
        let net = Network::from_edge_list("a", 2, &[(0, 1)], 2).unwrap();
        let err = mstep_content(&[net], &[EdgeBeliefs::uniform(1, 2)], 2, TyingScheme::Symmetric, 0.0).unwrap_err();
        assert_eq!(err.code(), "E_MULTINOMIAL");
    }

    fn triangle() -> Network {
        Network::from_edge_list("t", 3, &[(0, 1), (1, 2), (0, 2)], 1).unwrap()
    }

    #[test]
    fn expected_prior_values() {
        let net = triangle();
        let t = enumerate_triads(&net);
        let tpl = [FeatureTemplate::AdamicAdar];
        let zero = StructParams::zeros(1, 2);
        assert_eq!(expected_log_unnormalized_prior(&net, &t, &EdgeBeliefs::uniform(3, 2), &tpl, &zero), 0.0);
        let p = StructParams { eta: vec![0.0, 0.0], beta: vec![2.0, 0.0, 0.0, 0.0], c: 0.0 };
        assert_eq!(expected_log_unnormalized_prior(&net, &t, &EdgeBeliefs::hard(&[0, 0, 0], 2), &tpl, &p), 2.0);
        let p = StructParams { eta: vec![0.0, 0.0], beta: vec![1.0, 0.0, 0.0, 0.0], c: 0.0 };
        let v = expected_log_unnormalized_prior(&net, &t, &EdgeBeliefs::uniform(3, 2), &tpl, &p);
        assert!((v - 0.125).abs() < 1e-15);
        // eta contributes AA(i,j) = 1/ln 2 per edge on the t slot
        let p = StructParams { eta: vec![1.0, 0.0], beta: vec![0.0; 4], c: 0.0 };
        let v = expected_log_unnormalized_prior(&net, &t, &EdgeBeliefs::hard(&[0, 1, 0], 2), &tpl, &p);
        assert!((v - 2.0 / 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_noise() {
        let net = Network::from_edge_list("p", 4, &[(0, 1), (1, 2), (2, 3)], 1).unwrap();
        let q = EdgeBeliefs::hard(&[0, 0, 0], 2);
        let n = sample_noise(&[net], &[q], 2, NoiseScope::PerNetwork, 5);
        assert!(n.labelings[0].iter().flatten().all(|&y| y == 0));
        assert_eq!(n.expected_log_noise[0], 0.0);
    }

    #[test]
    fn uniform_noise_log_probability() {
        let edges: Vec<(usize, usize)> = (0..10).map(|i| (i, i + 1)).collect();
        let net = Network::from_edge_list("p", 11, &edges, 1).unwrap();
        let q = EdgeBeliefs::uniform(10, 2);
        let n = sample_noise(std::slice::from_ref(&net), std::slice::from_ref(&q), 1, NoiseScope::PerNetwork, 1);
        assert!((n.expected_log_noise[0] - 10.0 * 0.5f64.ln()).abs() < 1e-12);
        assert!((n.expected_log_noise[0] + 6.9315).abs() < 1e-4);
        assert_eq!(n, sample_noise(&[net], &[q], 1, NoiseScope::PerNetwork, 1));
    }

    #[test]
    fn equal_scores_give_two_log_half() {
        let net = triangle();
        let t = enumerate_triads(&net);
        let layout = ParamLayout::new(2, 1, 1);
        let q = EdgeBeliefs::hard(&[0, 0, 0], 2);
        let noise = sample_noise(std::slice::from_ref(&net), std::slice::from_ref(&q), 1, NoiseScope::PerNetwork, 3);
        let (v, g) = nce_objective_and_gradient(
            &[net],
            &[t],
            &[q],
            &noise,
            &[FeatureTemplate::AdamicAdar],
            &layout,
            &StructParams::zeros(1, 2),
        )
        .unwrap();
        assert!((v - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        // dJ/dc = σ(-s_d) - σ(s_n) = 0 at equal scores
        assert_eq!(g[layout.c_index()], 0.0);
    }
}
