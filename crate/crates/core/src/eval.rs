//! Held-out predictive likelihood, term ranking, triad weight tables and
//! signed-network export.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::em::EmConfig;
use crate::error::{Error, Result};
use crate::estep::{run_estep, EStepOptions, EdgeBeliefs};
use crate::graph::{enumerate_triads, EdgeContent, Network};
use crate::params::{ContentParams, LabelSet, ModelParams, Semantics, StructParams};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    /// Fraction of networks held out from training.
    pub holdout_frac: f64,
    /// Fraction of each directed token stream used to estimate beliefs.
    pub split_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { holdout_frac: 0.10, split_frac: 0.50, seed: 0 }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("holdout fraction", self.holdout_frac), ("split fraction", self.split_frac)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidConfig(format!("{} {} outside (0, 1)", name, v)));
            }
        }
        Ok(())
    }

    /// Indices of training and held-out networks, each ascending. At least
    /// one network lands on each side when there are two or more.
    pub fn split_networks(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        self.validate()?;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng::substream(self.seed, "split", &[]));
        let held = ((self.holdout_frac * n as f64).round() as usize).clamp(n.min(1), n.saturating_sub(1).max(n.min(1)));
        let mut test = idx[..held].to_vec();
        let mut train = idx[held..].to_vec();
        test.sort_unstable();
        train.sort_unstable();
        Ok((train, test))
    }
}

/// Number of leading tokens kept for estimation; odd counts round up.
pub fn first_part_len(n: usize, frac: f64) -> usize {
    ((n as f64) * frac).ceil() as usize
}

/// Splits every directed token stream of `net` into a leading part (kept
/// on the returned network) and the remainder.
pub fn split_tokens(net: &Network, frac: f64) -> Result<(Network, Vec<EdgeContent>)> {
    let (first, rest): (Vec<EdgeContent>, Vec<EdgeContent>) = (0..net.num_edges())
        .map(|e| {
            let c = net.content(e);
            let (nf, nb) = (first_part_len(c.fwd.len(), frac), first_part_len(c.bwd.len(), frac));
            (
                EdgeContent::new(c.fwd[..nf].to_vec(), c.bwd[..nb].to_vec()),
                EdgeContent::new(c.fwd[nf..].to_vec(), c.bwd[nb..].to_vec()),
            )
        })
        .unzip();
    Ok((net.with_content(first)?, rest))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkLikelihood {
    pub network: String,
    pub loglik: f64,
    pub dyads: usize,
    /// Dyads with at least one token in the scored part.
    pub scored_dyads: usize,
    pub scored_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeldoutReport {
    pub total: f64,
    /// `total` divided by the number of scored dyads.
    pub per_dyad_mean: f64,
    pub empty_dyads: usize,
    pub networks: Vec<NetworkLikelihood>,
}

/// `Σ_y q(y) Σ_n log θ_y[x_n]` over the given tokens of one edge.
pub fn expected_token_loglik(q: &[f64], held: &EdgeContent, log_fwd: &[Vec<f64>], log_bwd: &[Vec<f64>]) -> f64 {
    q.iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(y, &p)| {
            let lf: f64 = held.fwd.iter().map(|&w| log_fwd[y][w as usize]).sum();
            let lb: f64 = held.bwd.iter().map(|&w| log_bwd[y][w as usize]).sum();
            p * (lf + lb)
        })
        .sum()
}

/// Runs the E-step on the leading tokens of each network and scores the
/// remaining tokens under the resulting beliefs.
pub fn heldout_predictive_ll(
    params: &ModelParams,
    networks: &[Network],
    split_frac: f64,
    opts: &EStepOptions,
) -> Result<HeldoutReport> {
    let log_fwd = params.content.log_fwd();
    let log_bwd = params.content.log_bwd();
    let k = params.num_labels();
    let per: Vec<(NetworkLikelihood, usize)> = networks
        .par_iter()
        .map(|net| {
            let (first, rest) = split_tokens(net, split_frac)?;
            let triads = enumerate_triads(&first);
            let out = run_estep(&first, &triads, &EdgeBeliefs::uniform(first.num_edges(), k), params, opts)?;
            let mut row = NetworkLikelihood {
                network: net.id().to_string(),
                loglik: 0.0,
                dyads: net.num_edges(),
                scored_dyads: 0,
                scored_tokens: 0,
            };
            let mut empty = 0;
            for (e, held) in rest.iter().enumerate() {
                let n = held.fwd.len() + held.bwd.len();
                if n == 0 {
                    empty += 1;
                    continue;
                }
                row.scored_dyads += 1;
                row.scored_tokens += n;
                row.loglik += expected_token_loglik(out.beliefs.get(e), held, &log_fwd, &log_bwd);
            }
            Ok((row, empty))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = HeldoutReport { total: 0.0, per_dyad_mean: 0.0, empty_dyads: 0, networks: Vec::new() };
    let mut scored = 0;
    for (row, empty) in per {
        report.total += row.loglik;
        report.empty_dyads += empty;
        scored += row.scored_dyads;
        report.networks.push(row);
    }
    report.per_dyad_mean = if scored == 0 { 0.0 } else { report.total / scored as f64 };
    Ok(report)
}

impl HeldoutReport {
    pub fn to_tsv(&self, provenance: &str) -> String {
        let mut s = provenance_header(provenance);
        s.push_str("network\tloglik\tdyads\tscored_dyads\tscored_tokens\n");
        for r in &self.networks {
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", r.network, r.loglik, r.dyads, r.scored_dyads, r.scored_tokens);
        }
        let _ = writeln!(s, "# total\t{}", self.total);
        let _ = writeln!(s, "# per_dyad_mean\t{}", self.per_dyad_mean);
        let _ = writeln!(s, "# empty_dyads\t{}", self.empty_dyads);
        s
    }
}

/// Which structural components a model may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ablation {
    pub dyad_features: bool,
    pub triads: bool,
}

impl Ablation {
    pub const FULL: Ablation = Ablation { dyad_features: true, triads: true };
    pub const FEATURES_ONLY: Ablation = Ablation { dyad_features: true, triads: false };
    pub const TEXT_ONLY: Ablation = Ablation { dyad_features: false, triads: false };

    pub fn name(&self) -> &'static str {
        match (self.dyad_features, self.triads) {
            (true, true) => "full",
            (true, false) => "mutual-friends",
            (false, true) => "triads",
            (false, false) => "text-only",
        }
    }

    /// Disabled components are held at zero during training.
    pub fn apply(&self, base: &EmConfig) -> EmConfig {
        EmConfig {
            freeze_eta: base.freeze_eta || !self.dyad_features,
            freeze_beta: base.freeze_beta || !self.triads,
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub ablation: Ablation,
    pub report: HeldoutReport,
}

pub fn ablation_table_tsv(rows: &[AblationRow], provenance: &str) -> String {
    let mut s = provenance_header(provenance);
    s.push_str("model\tdyad_features\ttriads\ttotal\tper_dyad_mean\tempty_dyads\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.ablation.name(),
            r.ablation.dyad_features,
            r.ablation.triads,
            r.report.total,
            r.report.per_dyad_mean,
            r.report.empty_dyads
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterTerms {
    pub label: String,
    pub terms: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermRanking {
    pub clusters: Vec<ClusterTerms>,
}

/// Both directions pooled with equal weight.
fn pooled_theta(content: &ContentParams) -> Vec<Vec<f64>> {
    content
        .theta_fwd
        .iter()
        .zip(&content.theta_bwd)
        .map(|(f, b)| f.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect())
        .collect()
}

/// For each cluster, the `top_k` symbols with the largest ratio of their
/// probability to the best competing cluster. Ties go to the
/// lexicographically smaller symbol. Clusters are listed formal first.
pub fn rank_terms(content: &ContentParams, vocab: &[String], labels: &LabelSet, top_k: usize) -> TermRanking {
    let theta = pooled_theta(content);
    let k = theta.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&y| (labels.semantics(y) != Semantics::Formal, y));
    let clusters = order
        .into_iter()
        .map(|y| {
            let mut scored: Vec<(String, f64)> = (0..vocab.len())
                .map(|w| {
                    let rival = (0..k).filter(|&z| z != y).map(|z| theta[z][w]).fold(0.0, f64::max);
                    (vocab[w].clone(), theta[y][w] / rival)
                })
                .collect();
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            scored.truncate(top_k);
            ClusterTerms { label: labels.name(y).to_string(), terms: scored }
        })
        .collect();
    TermRanking { clusters }
}

impl TermRanking {
    /// One row per rank, one term and score column pair per cluster.
    pub fn to_tsv(&self, provenance: &str) -> String {
        let mut s = provenance_header(provenance);
        s.push_str("rank");
        for c in &self.clusters {
            let _ = write!(s, "\t{}\t{}_ratio", c.label, c.label);
        }
        s.push('\n');
        let rows = self.clusters.iter().map(|c| c.terms.len()).max().unwrap_or(0);
        for r in 0..rows {
            let _ = write!(s, "{}", r + 1);
            for c in &self.clusters {
                match c.terms.get(r) {
                    Some((t, v)) => {
                        let _ = write!(s, "\t{}\t{}", t, v);
                    }
                    None => s.push_str("\t\t"),
                }
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightRow {
    pub kind: &'static str,
    pub name: String,
    pub value: f64,
}

/// Every triad weight (the gauge-fixed one included, at zero) followed by
/// every dyad feature weight and the log-normalizer estimate.
pub fn report_triad_weights(params: &ModelParams) -> Vec<WeightRow> {
    weight_rows(&params.structure, &params.labels, params.templates.iter().map(|t| t.name()).collect())
}

fn weight_rows(p: &StructParams, labels: &LabelSet, templates: Vec<&str>) -> Vec<WeightRow> {
    let k = labels.len();
    let cat = crate::graph::TriadCatalog::new(k);
    let mut rows: Vec<WeightRow> = cat
        .types()
        .iter()
        .zip(&p.beta)
        .map(|(t, &v)| WeightRow { kind: "triad", name: labels.triad_name(*t), value: v })
        .collect();
    for (ti, t) in templates.iter().enumerate() {
        for y in 0..k {
            rows.push(WeightRow {
                kind: "feature",
                name: format!("{}:{}", t, labels.name(y)),
                value: p.eta[ti * k + y],
            });
        }
    }
    rows.push(WeightRow { kind: "normalizer", name: "c".into(), value: p.c });
    rows
}

pub fn weights_tsv(rows: &[WeightRow], provenance: &str) -> String {
    let mut s = provenance_header(provenance);
    s.push_str("kind\tname\tweight\n");
    for r in rows {
        let _ = writeln!(s, "{}\t{}\t{}", r.kind, r.name, r.value);
    }
    s
}

/// A bar-chart description of the triad weights for external plotting.
pub fn weights_chart_json(rows: &[WeightRow], provenance: &str) -> Result<String> {
    #[derive(Serialize)]
    struct Bar<'a> {
        label: &'a str,
        value: f64,
    }
    #[derive(Serialize)]
    struct Chart<'a> {
        chart: &'static str,
        title: &'static str,
        x_label: &'static str,
        y_label: &'static str,
        model_sha256: &'a str,
        bars: Vec<Bar<'a>>,
    }
    let chart = Chart {
        chart: "bar",
        title: "Triad weights",
        x_label: "triad type",
        y_label: "weight",
        model_sha256: provenance,
        bars: rows.iter().filter(|r| r.kind == "triad").map(|r| Bar { label: &r.name, value: r.value }).collect(),
    };
    let mut s = serde_json::to_string_pretty(&chart)?;
    s.push('\n');
    Ok(s)
}

fn provenance_header(provenance: &str) -> String {
    if provenance.is_empty() {
        String::new()
    } else {
        format!("# model_sha256={}\n", provenance)
    }
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT rendering of one network. Edges whose most likely label is the
/// formal one are solid blue, informal ones dashed red, and edges whose
/// largest belief is below `threshold` dotted gray.
pub fn export_signed_network(
    net: &Network,
    beliefs: &EdgeBeliefs,
    labels: &LabelSet,
    threshold: f64,
    provenance: &str,
) -> String {
    let mut s = String::new();
    if !provenance.is_empty() {
        let _ = writeln!(s, "// model_sha256={}", provenance);
    }
    let _ = writeln!(s, "graph {} {{", dot_quote(net.id()));
    for n in net.nodes() {
        let _ = writeln!(s, "  {} [label={}];", dot_quote(n), dot_quote(n));
    }
    let argmax = beliefs.argmax();
    for (e, edge) in net.edges().iter().enumerate() {
        let q = beliefs.get(e);
        let y = argmax[e];
        let (style, color) = if q[y] < threshold {
            ("dotted", "gray")
        } else {
            match labels.semantics(y) {
                Semantics::Formal => ("solid", "blue"),
                Semantics::Informal => ("dashed", "red"),
                Semantics::Unspecified => ("solid", "black"),
            }
        };
        let _ = writeln!(
            s,
            "  {} -- {} [style={}, color={}, label={}, belief=\"{:.4}\"];",
            dot_quote(&net.nodes()[edge.i]),
            dot_quote(&net.nodes()[edge.j]),
            style,
            color,
            dot_quote(labels.name(y)),
            q[y]
        );
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dot::parse_dot;
    use crate::graph::FeatureTemplate;
    use crate::params::TyingScheme;

    fn model(theta: Vec<Vec<f64>>) -> ModelParams {
        ModelParams {
            labels: LabelSet::tv(),
            tying: TyingScheme::Symmetric,
            templates: vec![FeatureTemplate::AdamicAdar],
            content: ContentParams { theta_fwd: theta.clone(), theta_bwd: theta, alpha: 0.0 },
            structure: StructParams::zeros(1, 2),
        }
    }

    #[test]
    fn uniform_theta_closed_form() {
        let net = Network::from_edge_list("f", 2, &[(0, 1)], 4)
            .unwrap()
            .with_content(vec![EdgeContent::new(vec![0, 1, 2, 3, 0], vec![1, 2])])
            .unwrap();
        let p = model(vec![vec![0.25; 4]; 2]);
        let r = heldout_predictive_ll(&p, &[net], 0.5, &EStepOptions::default()).unwrap();
        // fwd keeps 3 of 5, bwd 1 of 2: three tokens scored
        assert!((r.total - 3.0 * 0.25f64.ln()).abs() < 1e-12);
        assert_eq!(r.networks[0].scored_tokens, 3);
    }

    #[test]
    fn equal_clusters_score_alike() {
        let held = EdgeContent::new(vec![0, 1], vec![2]);
        let th = vec![vec![0.5, 0.3, 0.2]; 2];
        let logs: Vec<Vec<f64>> = th.iter().map(|r| r.iter().map(|x: &f64| x.ln()).collect()).collect();
        let a = expected_token_loglik(&[0.5, 0.5], &held, &logs, &logs);
        let b = expected_token_loglik(&[1.0, 0.0], &held, &logs, &logs);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn empty_second_half_counted() {
        let net = Network::from_edge_list("f", 3, &[(0, 1), (1, 2)], 2)
            .unwrap()
            .with_content(vec![EdgeContent::new(vec![0], vec![]), EdgeContent::new(vec![0, 1], vec![])])
            .unwrap();
        let r = heldout_predictive_ll(&model(vec![vec![0.5; 2]; 2]), &[net], 0.5, &EStepOptions::default()).unwrap();
        assert_eq!(r.empty_dyads, 1);
        assert_eq!(r.networks[0].scored_dyads, 1);
    }

    #[test]
    fn split_is_deterministic() {
        let spec = SplitSpec { seed: 9, ..Default::default() };
        let (train, test) = spec.split_networks(50).unwrap();
        assert_eq!(test.len(), 5);
        assert_eq!(train.len(), 45);
        assert_eq!(spec.split_networks(50).unwrap(), (train, test));
        assert!(SplitSpec { holdout_frac: 1.0, ..spec }.split_networks(3).is_err());
        assert_eq!(first_part_len(5, 0.5), 3);
    }

    #[test]
    fn ratio_ranking() {
        let vocab: Vec<String> = ["man", "sir", "x"].iter().map(|s| s.to_string()).collect();
        let content = ContentParams {
            theta_fwd: vec![vec![0.5, 0.001, 0.499], vec![0.05, 0.1, 0.85]],
            theta_bwd: vec![vec![0.5, 0.001, 0.499], vec![0.05, 0.1, 0.85]],
            alpha: 0.0,
        };
        let r = rank_terms(&content, &vocab, &LabelSet::tv(), 2);
        assert_eq!(r.clusters[0].label, "v");
        assert_eq!(r.clusters[0].terms[0].0, "sir");
        assert!((r.clusters[0].terms[0].1 - 100.0).abs() < 1e-9);
        assert_eq!(r.clusters[1].terms[0].0, "man");
        let tsv = r.to_tsv("");
        assert_eq!(tsv.lines().count(), 3);
    }

    #[test]
    fn zero_weights_report() {
        let rows = report_triad_weights(&model(vec![vec![0.5; 2]; 2]));
        assert_eq!(rows.iter().filter(|r| r.kind == "triad").count(), 4);
        assert!(rows.iter().all(|r| r.value == 0.0));
        assert_eq!(rows[3].name, "vvv");
        let json = weights_chart_json(&rows, "ab").unwrap();
        assert!(json.contains("\"bars\""));
    }

    #[test]
    fn dot_styles() {
        let net = Network::from_edge_list("f", 3, &[(0, 1), (1, 2), (0, 2)], 1).unwrap();
        let q = EdgeBeliefs::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]]);
        let dot = export_signed_network(&net, &q, &LabelSet::tv(), 0.6, "deadbeef");
        let g = parse_dot(&dot).unwrap();
        assert_eq!(g.edges.len(), 3);
        let attr = |e: usize, k: &str| g.edges[e].attrs.iter().find(|(a, _)| a == k).unwrap().1.clone();
        assert_eq!((attr(0, "style"), attr(0, "color")), ("solid".into(), "blue".into()));
        assert_eq!((attr(1, "style"), attr(1, "color")), ("dashed".into(), "red".into()));
        assert_eq!((attr(2, "style"), attr(2, "color")), ("dotted".into(), "gray".into()));
        assert_eq!(attr(0, "belief"), "1.0000");
    }
}
