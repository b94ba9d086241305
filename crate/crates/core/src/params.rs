//! Label sets, tying schemes and all learnable parameters.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FeatureTemplate, Label, TriadCatalog, TriadType};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    Informal,
    Formal,
    Unspecified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    names: Vec<String>,
    semantics: Vec<Semantics>,
    /// Label whose structural weights are pinned to zero.
    reference: Label,
}

impl LabelSet {
    pub fn new(names: Vec<String>, semantics: Vec<Semantics>, reference: Label) -> Result<Self> {
        if names.len() < 2 {
            return Err(Error::InvalidConfig("a label set needs at least 2 labels".into()));
        }
        if semantics.len() != names.len() {
            return Err(Error::InvalidConfig("one semantics tag per label".into()));
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() || names.iter().any(|n| n.is_empty()) {
            return Err(Error::InvalidConfig("label names must be unique and nonempty".into()));
        }
        if reference >= names.len() {
            return Err(Error::InvalidConfig("reference label out of range".into()));
        }
        Ok(LabelSet { names, semantics, reference })
    }

    /// The binary `{t, v}` set: `t` informal, `v` formal and the gauge reference.
    pub fn tv() -> Self {
        LabelSet {
            names: vec!["t".into(), "v".into()],
            semantics: vec![Semantics::Informal, Semantics::Formal],
            reference: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, l: Label) -> &str {
        &self.names[l]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn semantics(&self, l: Label) -> Semantics {
        self.semantics[l]
    }

    pub fn reference(&self) -> Label {
        self.reference
    }

    pub fn find(&self, name: &str) -> Option<Label> {
        self.names.iter().position(|n| n == name)
    }

    pub fn by_semantics(&self, s: Semantics) -> Option<Label> {
        self.semantics.iter().position(|&x| x == s)
    }

    /// Lowercase concatenation of label names, e.g. `ttv`.
    pub fn triad_name(&self, t: TriadType) -> String {
        t.0.iter().map(|&l| self.names[l].as_str()).collect()
    }
}

/// Equality constraints between forward and backward content distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TyingScheme {
    /// `θ→_y = θ←_y` for all labels.
    Symmetric,
    /// No tying.
    Directed,
    /// `θ→_0 = θ←_1`, `θ→_1 = θ←_0`, remaining labels tied to themselves.
    Status,
}

impl TyingScheme {
    /// Backward label tied to the forward distribution of `y`, if any.
    pub fn partner(self, y: Label, k: usize) -> Option<Label> {
        match self {
            TyingScheme::Symmetric => Some(y),
            TyingScheme::Directed => None,
            TyingScheme::Status => Some(match y {
                0 if k > 1 => 1,
                1 => 0,
                other => other,
            }),
        }
    }
}

impl std::str::FromStr for TyingScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(TyingScheme::Symmetric),
            "directed" => Ok(TyingScheme::Directed),
            "status" => Ok(TyingScheme::Status),
            other => Err(Error::InvalidConfig(format!("unknown tying scheme `{}`", other))),
        }
    }
}

/// Per-label multinomials over the vocabulary, `[label][symbol]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentParams {
    pub theta_fwd: Vec<Vec<f64>>,
    pub theta_bwd: Vec<Vec<f64>>,
    pub alpha: f64,
}

impl ContentParams {
    pub fn num_labels(&self) -> usize {
        self.theta_fwd.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.theta_fwd.first().map_or(0, Vec::len)
    }

    pub fn log_fwd(&self) -> Vec<Vec<f64>> {
        self.theta_fwd.iter().map(|r| r.iter().map(|p| p.ln()).collect()).collect()
    }

    pub fn log_bwd(&self) -> Vec<Vec<f64>> {
        self.theta_bwd.iter().map(|r| r.iter().map(|p| p.ln()).collect()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.vocab_size();
        if self.theta_bwd.len() != self.theta_fwd.len() {
            return Err(Error::InvalidParams("theta_fwd and theta_bwd disagree on label count".into()));
        }
        for row in self.theta_fwd.iter().chain(&self.theta_bwd) {
            if row.len() != v {
                return Err(Error::InvalidParams("ragged theta matrix".into()));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidParams("theta entries must be finite and nonnegative".into()));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParams(format!("theta row sums to {}", s)));
            }
        }
        Ok(())
    }
}

/// Structural weights: dyad weights `eta` laid out `[template][label]`,
/// triad weights `beta` indexed by [`TriadCatalog`] order, and the NCE
/// log-partition parameter `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructParams {
    pub eta: Vec<f64>,
    pub beta: Vec<f64>,
    pub c: f64,
}

impl StructParams {
    pub fn zeros(num_templates: usize, num_labels: usize) -> Self {
        StructParams {
            eta: vec![0.0; num_templates * num_labels],
            beta: vec![0.0; TriadCatalog::new(num_labels).len()],
            c: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.eta.iter().chain(&self.beta).all(|x| x.is_finite()) && self.c.is_finite()
    }
}

/// Maps [`StructParams`] to a flat vector `[eta.., beta.., c]` and records
/// which coordinates are pinned (gauge slots and ablated groups).
#[derive(Debug, Clone)]
pub struct ParamLayout {
    pub num_labels: usize,
    pub num_templates: usize,
    pub reference: Label,
    pub freeze_eta: bool,
    pub freeze_beta: bool,
    catalog: TriadCatalog,
}

impl ParamLayout {
    pub fn new(num_labels: usize, num_templates: usize, reference: Label) -> Self {
        ParamLayout {
            num_labels,
            num_templates,
            reference,
            freeze_eta: false,
            freeze_beta: false,
            catalog: TriadCatalog::new(num_labels),
        }
    }

    pub fn with_frozen(mut self, freeze_eta: bool, freeze_beta: bool) -> Self {
        self.freeze_eta = freeze_eta;
        self.freeze_beta = freeze_beta;
        self
    }

    pub fn catalog(&self) -> &TriadCatalog {
        &self.catalog
    }

    pub fn eta_len(&self) -> usize {
        self.num_templates * self.num_labels
    }

    pub fn beta_offset(&self) -> usize {
        self.eta_len()
    }

    pub fn c_index(&self) -> usize {
        self.eta_len() + self.catalog.len()
    }

    pub fn dim(&self) -> usize {
        self.c_index() + 1
    }

    /// Free coordinates of the flat vector, ascending.
    pub fn free_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.freeze_eta {
            for t in 0..self.num_templates {
                for y in 0..self.num_labels {
                    if y != self.reference {
                        out.push(t * self.num_labels + y);
                    }
                }
            }
        }
        if !self.freeze_beta {
            let gauge = self.catalog.homogeneous(self.reference);
            for b in 0..self.catalog.len() {
                if b != gauge {
                    out.push(self.beta_offset() + b);
                }
            }
        }
        out.push(self.c_index());
        out
    }

    pub fn flatten(&self, p: &StructParams) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&p.eta);
        v.extend_from_slice(&p.beta);
        v.push(p.c);
        v
    }

    pub fn unflatten(&self, v: &[f64]) -> StructParams {
        StructParams {
            eta: v[..self.eta_len()].to_vec(),
            beta: v[self.beta_offset()..self.c_index()].to_vec(),
            c: v[self.c_index()],
        }
    }

    /// Zeroes every pinned coordinate.
    pub fn enforce(&self, p: &mut StructParams) {
        let k = self.num_labels;
        for t in 0..self.num_templates {
            for y in 0..k {
                if self.freeze_eta || y == self.reference {
                    p.eta[t * k + y] = 0.0;
                }
            }
        }
        let gauge = self.catalog.homogeneous(self.reference);
        for (b, w) in p.beta.iter_mut().enumerate() {
            if self.freeze_beta || b == gauge {
                *w = 0.0;
            }
        }
    }
}

/// Everything inference needs: label set, tying, templates and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub labels: LabelSet,
    pub tying: TyingScheme,
    pub templates: Vec<FeatureTemplate>,
    pub content: ContentParams,
    pub structure: StructParams,
}

impl ModelParams {
    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new(self.labels.len(), self.templates.len(), self.labels.reference())
    }

    /// Relabels clusters so that old label `y` becomes `perm[y]`, then
    /// restores the gauge. The normalized model is unchanged.
    pub fn permute_labels(&self, perm: &[Label]) -> ModelParams {
        let k = self.num_labels();
        assert_eq!(perm.len(), k);
        let mut theta_fwd = vec![Vec::new(); k];
        let mut theta_bwd = vec![Vec::new(); k];
        for y in 0..k {
            theta_fwd[perm[y]] = self.content.theta_fwd[y].clone();
            theta_bwd[perm[y]] = self.content.theta_bwd[y].clone();
        }
        let nt = self.templates.len();
        let mut eta = vec![0.0; nt * k];
        for t in 0..nt {
            for y in 0..k {
                eta[t * k + perm[y]] = self.structure.eta[t * k + y];
            }
        }
        let cat = TriadCatalog::new(k);
        let mut beta = vec![0.0; cat.len()];
        for (b, ty) in cat.types().iter().enumerate() {
            let [x, y, z] = ty.0;
            beta[cat.index(perm[x], perm[y], perm[z])] = self.structure.beta[b];
        }
        let reference = self.labels.reference();
        for t in 0..nt {
            let shift = eta[t * k + reference];
            for y in 0..k {
                eta[t * k + y] -= shift;
            }
        }
        let shift = beta[cat.homogeneous(reference)];
        for w in &mut beta {
            *w -= shift;
        }
        ModelParams {
            labels: self.labels.clone(),
            tying: self.tying,
            templates: self.templates.clone(),
            content: ContentParams { theta_fwd, theta_bwd, alpha: self.content.alpha },
            structure: StructParams { eta, beta, c: self.structure.c },
        }
    }
}

/// Draws initial content parameters (symmetric Dirichlet(1) rows with tying
/// applied) and zero structural weights.
pub fn init_params(
    vocab_size: usize,
    labels: &LabelSet,
    tying: TyingScheme,
    num_templates: usize,
    seed: u64,
) -> Result<(ContentParams, StructParams)> {
    if vocab_size == 0 {
        return Err(Error::InvalidConfig("vocabulary size must be at least 1".into()));
    }
    let k = labels.len();
    let mut rng = rng::substream(seed, "init", &[]);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let mut row: Vec<f64> = (0..vocab_size)
            .map(|_| {
                let e: f64 = rng.sample(Exp1);
                e.max(f64::MIN_POSITIVE)
            })
            .collect();
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= s);
        row
    };
    let theta_fwd: Vec<Vec<f64>> = (0..k).map(|_| draw(&mut rng)).collect();
    let mut theta_bwd = vec![Vec::new(); k];
    match tying {
        TyingScheme::Directed => {
            for row in theta_bwd.iter_mut() {
                *row = draw(&mut rng);
            }
        }
        _ => {
            for y in 0..k {
                let p = tying.partner(y, k).expect("tied scheme");
                theta_bwd[p] = theta_fwd[y].clone();
            }
        }
    }
    Ok((ContentParams { theta_fwd, theta_bwd, alpha: 0.1 }, StructParams::zeros(num_templates, k)))
}

/// Pools tied distributions with equal weights.
pub fn apply_tying(params: &ContentParams, tying: TyingScheme) -> ContentParams {
    let k = params.num_labels();
    apply_tying_weighted(params, tying, &vec![1.0; k], &vec![1.0; k])
}

/// Pools tied distributions weighted by their total expected counts
/// `mass_fwd[y]`, `mass_bwd[y]`. Groups that already agree bitwise are left
/// alone, which makes the operation idempotent.
pub fn apply_tying_weighted(
    params: &ContentParams,
    tying: TyingScheme,
    mass_fwd: &[f64],
    mass_bwd: &[f64],
) -> ContentParams {
    let k = params.num_labels();
    let mut out = params.clone();
    for y in 0..k {
        let Some(p) = tying.partner(y, k) else { continue };
        let (f, b) = (&params.theta_fwd[y], &params.theta_bwd[p]);
        if f == b {
            continue;
        }
        let (mut wf, mut wb) = (mass_fwd[y], mass_bwd[p]);
        if wf + wb <= 0.0 {
            wf = 1.0;
            wb = 1.0;
        }
        let pooled: Vec<f64> = if wf == wb {
            f.iter().zip(b).map(|(x, z)| 0.5 * (x + z)).collect()
        } else {
            f.iter().zip(b).map(|(x, z)| (wf * x + wb * z) / (wf + wb)).collect()
        };
        out.theta_fwd[y] = pooled.clone();
        out.theta_bwd[p] = pooled;
    }
    out
}

/// Checks that every tied pair is bitwise identical.
pub fn tying_holds(params: &ContentParams, tying: TyingScheme) -> bool {
    let k = params.num_labels();
    (0..k).all(|y| match tying.partner(y, k) {
        Some(p) => params.theta_fwd[y] == params.theta_bwd[p],
        None => true,
    })
}

/// Which labeled clusters receive which semantics, judged by probability
/// mass on seed terms. Returns `perm` with `perm[cluster] = label`.
///
/// Only the binary informal/formal case is anchored; other label sets get
/// the identity.
pub fn anchor_permutation(
    params: &ModelParams,
    vocab: &[String],
    formal_seeds: &[&str],
    informal_seeds: &[&str],
) -> Vec<Label> {
    let k = params.num_labels();
    let identity: Vec<Label> = (0..k).collect();
    let (Some(formal), Some(informal)) =
        (params.labels.by_semantics(Semantics::Formal), params.labels.by_semantics(Semantics::Informal))
    else {
        return identity;
    };
    if k != 2 {
        return identity;
    }
    let term_of = |sym: &str| sym.rsplit(':').next().unwrap_or(sym).to_string();
    let mass = |y: Label, seeds: &[&str]| -> f64 {
        vocab
            .iter()
            .enumerate()
            .filter(|(_, s)| seeds.contains(&term_of(s).as_str()))
            .map(|(w, _)| params.content.theta_fwd[y][w] + params.content.theta_bwd[y][w])
            .sum()
    };
    // formality score of each cluster
    let score: Vec<f64> = (0..k).map(|y| mass(y, formal_seeds) - mass(y, informal_seeds)).collect();
    let mut perm = vec![0; k];
    if score[0] > score[1] {
        perm[0] = formal;
        perm[1] = informal;
    } else if score[1] > score[0] {
        perm[1] = formal;
        perm[0] = informal;
    } else {
        return identity;
    }
    perm
}

pub const DEFAULT_FORMAL_SEEDS: &[&str] = &["sir", "mr"];
pub const DEFAULT_INFORMAL_SEEDS: &[&str] = &["man", "baby"];

/// Serialized model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub vocab: Vec<String>,
    pub labels: LabelSet,
    pub tying: TyingScheme,
    pub templates: Vec<FeatureTemplate>,
    pub smoothing_alpha: f64,
    pub theta_fwd: Vec<Vec<f64>>,
    pub theta_bwd: Vec<Vec<f64>>,
    /// Keyed `template:label`.
    pub eta: BTreeMap<String, f64>,
    /// Keyed by canonical triad name.
    pub beta: BTreeMap<String, f64>,
    pub c: f64,
    pub frozen_eta: bool,
    pub frozen_beta: bool,
    pub seed: u64,
}

pub const MODEL_FORMAT: &str = "signet-model/1";

impl ModelFile {
    pub fn from_params(params: &ModelParams, vocab: &[String], frozen_eta: bool, frozen_beta: bool, seed: u64) -> Self {
        let k = params.num_labels();
        let mut eta = BTreeMap::new();
        for (t, tpl) in params.templates.iter().enumerate() {
            for y in 0..k {
                eta.insert(format!("{}:{}", tpl.name(), params.labels.name(y)), params.structure.eta[t * k + y]);
            }
        }
        let cat = TriadCatalog::new(k);
        let beta = cat
            .types()
            .iter()
            .enumerate()
            .map(|(b, &ty)| (params.labels.triad_name(ty), params.structure.beta[b]))
            .collect();
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            vocab: vocab.to_vec(),
            labels: params.labels.clone(),
            tying: params.tying,
            templates: params.templates.clone(),
            smoothing_alpha: params.content.alpha,
            theta_fwd: params.content.theta_fwd.clone(),
            theta_bwd: params.content.theta_bwd.clone(),
            eta,
            beta,
            c: params.structure.c,
            frozen_eta,
            frozen_beta,
            seed,
        }
    }

    pub fn to_params(&self) -> Result<ModelParams> {
        if self.format != MODEL_FORMAT {
            return Err(Error::InvalidParams(format!("unsupported model format `{}`", self.format)));
        }
        let labels = LabelSet::new(self.labels.names.clone(), self.labels.semantics.clone(), self.labels.reference)?;
        let k = labels.len();
        let missing = |key: &str| Error::InvalidParams(format!("model file lacks weight `{}`", key));
        let mut eta = vec![0.0; self.templates.len() * k];
        for (t, tpl) in self.templates.iter().enumerate() {
            for y in 0..k {
                let key = format!("{}:{}", tpl.name(), labels.name(y));
                eta[t * k + y] = *self.eta.get(&key).ok_or_else(|| missing(&key))?;
            }
        }
        let cat = TriadCatalog::new(k);
        let mut beta = vec![0.0; cat.len()];
        for (b, &ty) in cat.types().iter().enumerate() {
            let key = labels.triad_name(ty);
            beta[b] = *self.beta.get(&key).ok_or_else(|| missing(&key))?;
        }
        let content = ContentParams {
            theta_fwd: self.theta_fwd.clone(),
            theta_bwd: self.theta_bwd.clone(),
            alpha: self.smoothing_alpha,
        };
        content.validate()?;
        if content.num_labels() != k || content.vocab_size() != self.vocab.len() {
            return Err(Error::InvalidParams("theta shape disagrees with labels or vocabulary".into()));
        }
        Ok(ModelParams {
            labels,
            tying: self.tying,
            templates: self.templates.clone(),
            content,
            structure: StructParams { eta, beta, c: self.c },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
