//! Mean-field E-step and the tractable part of the variational bound.
//!
//! Each edge belief is updated in closed form,
//!
//! ```text
//! q_ij(y) ∝ exp{ x→ᵀ log θ→_y + x←ᵀ log θ←_y + ηᵀ f(y, i, j, G)
//!               + Σ_{k: (i,j,k) ∈ T(G)} Σ_{y', y''} q_jk(y') q_ik(y'') β[y, y', y''] }
//! ```
//!
//! with neighbor beliefs read in their current (already updated) state.

use crate::error::{Error, Result};
use crate::graph::{edge_template_values, Network, TriadCatalog, TriadIndex};
use crate::params::ModelParams;

/// Per-edge variational distributions, stored row-major `[edge][label]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeBeliefs {
    k: usize,
    q: Vec<f64>,
}

impl EdgeBeliefs {
    pub fn uniform(num_edges: usize, k: usize) -> Self {
        EdgeBeliefs { k, q: vec![1.0 / k as f64; num_edges * k] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let k = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == k), "ragged belief rows");
        EdgeBeliefs { k, q: rows.concat() }
    }

    /// Point-mass beliefs on the given labeling.
    pub fn hard(labels: &[usize], k: usize) -> Self {
        let mut q = vec![0.0; labels.len() * k];
        for (e, &y) in labels.iter().enumerate() {
            q[e * k + y] = 1.0;
        }
        EdgeBeliefs { k, q }
    }

    pub fn num_labels(&self) -> usize {
        self.k
    }

    pub fn num_edges(&self) -> usize {
        self.q.len().checked_div(self.k).unwrap_or(0)
    }

    pub fn get(&self, e: usize) -> &[f64] {
        &self.q[e * self.k..(e + 1) * self.k]
    }

    pub fn set(&mut self, e: usize, row: &[f64]) {
        self.q[e * self.k..(e + 1) * self.k].copy_from_slice(row);
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.q.chunks(self.k.max(1))
    }

    /// Most probable label per edge; ties go to the lowest index.
    pub fn argmax(&self) -> Vec<usize> {
        self.rows()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (y, &p)| if p > best.1 { (y, p) } else { best })
                    .0
            })
            .collect()
    }

    /// Relabels so that old label `y` becomes `perm[y]`.
    pub fn permute(&self, perm: &[usize]) -> EdgeBeliefs {
        let mut out = self.clone();
        for e in 0..self.num_edges() {
            for y in 0..self.k {
                out.q[e * self.k + perm[y]] = self.q[e * self.k + y];
            }
        }
        out
    }

    /// `max_e max_y |q_e(y) − other_e(y)|`.
    pub fn max_abs_diff(&self, other: &EdgeBeliefs) -> f64 {
        self.q.iter().zip(&other.q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BoundReport {
    pub expected_loglik_content: f64,
    pub expected_logprior_unnormalized: f64,
    pub entropy: f64,
    /// Sum of the three terms; the variational bound up to `−log Z`.
    pub bound_excluding_logz: f64,
}

impl BoundReport {
    fn new(content: f64, prior: f64, entropy: f64) -> Self {
        BoundReport {
            expected_loglik_content: content,
            expected_logprior_unnormalized: prior,
            entropy,
            bound_excluding_logz: content + prior + entropy,
        }
    }

    pub fn merge(&self, other: &BoundReport) -> BoundReport {
        BoundReport::new(
            self.expected_loglik_content + other.expected_loglik_content,
            self.expected_logprior_unnormalized + other.expected_logprior_unnormalized,
            self.entropy + other.entropy,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, Copy)]
pub struct EStepOptions {
    pub max_sweeps: usize,
    pub tol: f64,
    pub order: SweepOrder,
}

impl Default for EStepOptions {
    fn default() -> Self {
        EStepOptions { max_sweeps: 200, tol: 1e-8, order: SweepOrder::Forward }
    }
}

#[derive(Debug, Clone)]
pub struct EStepOutcome {
    pub beliefs: EdgeBeliefs,
    pub bound: BoundReport,
    pub sweeps: usize,
    pub converged: bool,
}

/// Label scores that do not depend on other beliefs, precomputed once per
/// parameter snapshot.
pub(crate) struct EdgeScorer<'a> {
    k: usize,
    content: Vec<f64>,
    dyad: Vec<f64>,
    beta: &'a [f64],
    catalog: TriadCatalog,
}

impl<'a> EdgeScorer<'a> {
    pub(crate) fn new(net: &Network, params: &'a ModelParams) -> Result<Self> {
        let k = params.num_labels();
        let log_fwd = params.content.log_fwd();
        let log_bwd = params.content.log_bwd();
        let feats = edge_template_values(net, &params.templates);
        let m = net.num_edges();
        let mut content = vec![0.0; m * k];
        let mut dyad = vec![0.0; m * k];
        for e in 0..m {
            let (xf, xb) = net.counts(e);
            for y in 0..k {
                content[e * k + y] = xf.dot_log(&log_fwd[y]) + xb.dot_log(&log_bwd[y]);
                dyad[e * k + y] = feats[e].iter().enumerate().map(|(t, v)| params.structure.eta[t * k + y] * v).sum();
            }
        }
        Ok(EdgeScorer { k, content, dyad, beta: &params.structure.beta, catalog: TriadCatalog::new(k) })
    }

    fn triad_message(&self, triads: &TriadIndex, beliefs: &EdgeBeliefs, e: usize, out: &mut [f64]) {
        triad_message(&self.catalog, self.beta, triads, beliefs, e, out);
    }

    fn update(&self, triads: &TriadIndex, beliefs: &EdgeBeliefs, e: usize, scores: &mut [f64]) -> Result<()> {
        let k = self.k;
        scores.fill(0.0);
        self.triad_message(triads, beliefs, e, scores);
        for y in 0..k {
            scores[y] += self.content[e * k + y] + self.dyad[e * k + y];
        }
        normalize_log(scores).map_err(|detail| Error::NonFinite {
            context: format!("E-step update of edge {}", e),
            detail: format!(
                "{}; content={:?} dyad={:?}",
                detail,
                &self.content[e * k..(e + 1) * k],
                &self.dyad[e * k..(e + 1) * k]
            ),
        })
    }

    pub(crate) fn bound(&self, triads: &TriadIndex, beliefs: &EdgeBeliefs) -> BoundReport {
        let k = self.k;
        let mut content = 0.0;
        let mut prior = 0.0;
        let mut entropy = 0.0;
        for (e, q) in beliefs.rows().enumerate() {
            for y in 0..k {
                if q[y] > 0.0 {
                    content += q[y] * self.content[e * k + y];
                    prior += q[y] * self.dyad[e * k + y];
                    entropy -= q[y] * q[y].ln();
                }
            }
        }
        prior += expected_triad_sum(&self.catalog, self.beta, triads, beliefs);
        BoundReport::new(content, prior, entropy)
    }
}

/// Adds `Σ_{(a,b)} Σ_{y',y''} q_a(y') q_b(y'') β[y, y', y'']` to `out[y]`.
fn triad_message(
    catalog: &TriadCatalog,
    beta: &[f64],
    triads: &TriadIndex,
    beliefs: &EdgeBeliefs,
    e: usize,
    out: &mut [f64],
) {
    let k = catalog.num_labels();
    for (a, b) in triads.partner_edges(e) {
        let (qa, qb) = (beliefs.get(a), beliefs.get(b));
        for (y, o) in out.iter_mut().enumerate().take(k) {
            let mut acc = 0.0;
            for (y1, &p1) in qa.iter().enumerate() {
                for (y2, &p2) in qb.iter().enumerate() {
                    acc += p1 * p2 * beta[catalog.index(y, y1, y2)];
                }
            }
            *o += acc;
        }
    }
}

/// `Σ_triads Σ_{y,y',y''} q_ij(y) q_jk(y') q_ik(y'') β[y, y', y'']`.
pub(crate) fn expected_triad_sum(
    catalog: &TriadCatalog,
    beta: &[f64],
    triads: &TriadIndex,
    beliefs: &EdgeBeliefs,
) -> f64 {
    let mut total = 0.0;
    for &[a, b, c] in &triads.triad_edges {
        let (qa, qb, qc) = (beliefs.get(a), beliefs.get(b), beliefs.get(c));
        for (y0, &p0) in qa.iter().enumerate() {
            for (y1, &p1) in qb.iter().enumerate() {
                for (y2, &p2) in qc.iter().enumerate() {
                    total += p0 * p1 * p2 * beta[catalog.index(y0, y1, y2)];
                }
            }
        }
    }
    total
}

/// Exponentiates and normalizes log scores in place, subtracting the max.
pub(crate) fn normalize_log(scores: &mut [f64]) -> std::result::Result<(), String> {
    if scores.iter().any(|s| s.is_nan() || *s == f64::INFINITY) {
        return Err(format!("scores {:?}", scores));
    }
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Err("every label has zero probability".into());
    }
    let mut z = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - m).exp();
        z += *s;
    }
    for s in scores.iter_mut() {
        *s /= z;
    }
    Ok(())
}

/// Closed-form update of a single edge given the beliefs of all others.
pub fn estep_update_edge(
    net: &Network,
    triads: &TriadIndex,
    beliefs: &EdgeBeliefs,
    params: &ModelParams,
    edge: usize,
) -> Result<Vec<f64>> {
    let k = params.num_labels();
    let (xf, xb) = net.counts(edge);
    let e = net.edges()[edge];
    let values: Vec<f64> = params.templates.iter().map(|t| t.value(net, e.i, e.j)).collect();
    let log_fwd = params.content.log_fwd();
    let log_bwd = params.content.log_bwd();
    let mut scores = vec![0.0; k];
    triad_message(&TriadCatalog::new(k), &params.structure.beta, triads, beliefs, edge, &mut scores);
    for (y, s) in scores.iter_mut().enumerate() {
        *s += xf.dot_log(&log_fwd[y]) + xb.dot_log(&log_bwd[y]);
        *s += values.iter().enumerate().map(|(t, v)| params.structure.eta[t * k + y] * v).sum::<f64>();
    }
    normalize_log(&mut scores).map_err(|detail| Error::NonFinite {
        context: format!("E-step update of edge {} in `{}`", edge, net.id()),
        detail,
    })?;
    Ok(scores)
}

fn sweep_in_place(
    scorer: &EdgeScorer,
    triads: &TriadIndex,
    beliefs: &mut EdgeBeliefs,
    order: SweepOrder,
) -> Result<f64> {
    let m = beliefs.num_edges();
    let mut scores = vec![0.0; scorer.k];
    let mut delta: f64 = 0.0;
    for step in 0..m {
        let e = match order {
            SweepOrder::Forward => step,
            SweepOrder::Reverse => m - 1 - step,
        };
        scorer.update(triads, beliefs, e, &mut scores)?;
        for (old, new) in beliefs.get(e).iter().zip(&scores) {
            delta = delta.max((old - new).abs());
        }
        beliefs.set(e, &scores);
    }
    Ok(delta)
}

/// One pass over all edges in node order.
pub fn estep_sweep(
    net: &Network,
    triads: &TriadIndex,
    beliefs: &EdgeBeliefs,
    params: &ModelParams,
) -> Result<(EdgeBeliefs, BoundReport)> {
    let scorer = EdgeScorer::new(net, params)?;
    let mut next = beliefs.clone();
    sweep_in_place(&scorer, triads, &mut next, SweepOrder::Forward)?;
    let bound = scorer.bound(triads, &next);
    Ok((next, bound))
}

/// Sweeps until the largest belief change falls below `opts.tol` or the
/// sweep budget runs out.
pub fn run_estep(
    net: &Network,
    triads: &TriadIndex,
    init: &EdgeBeliefs,
    params: &ModelParams,
    opts: &EStepOptions,
) -> Result<EStepOutcome> {
    let scorer = EdgeScorer::new(net, params)?;
    let mut beliefs = init.clone();
    let mut sweeps = 0;
    let mut converged = net.num_edges() == 0;
    while !converged && sweeps < opts.max_sweeps {
        let delta = sweep_in_place(&scorer, triads, &mut beliefs, opts.order)?;
        sweeps += 1;
        converged = delta < opts.tol;
    }
    let bound = scorer.bound(triads, &beliefs);
    Ok(EStepOutcome { beliefs, bound, sweeps, converged })
}

pub fn compute_bound(
    net: &Network,
    triads: &TriadIndex,
    beliefs: &EdgeBeliefs,
    params: &ModelParams,
) -> Result<BoundReport> {
    Ok(EdgeScorer::new(net, params)?.bound(triads, beliefs))
}
