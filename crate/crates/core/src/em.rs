//! The outer EM loop: E-step sweeps, closed-form content M-step and NCE
//! structural M-step, with random restarts.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estep::{run_estep, BoundReport, EStepOptions, EdgeBeliefs};
use crate::graph::{enumerate_triads, FeatureTemplate, Network, TriadIndex};
use crate::mstep::{mstep_content, optimize_struct, NceConfig};
use crate::params::{init_params, LabelSet, ModelParams, ParamLayout, StructParams, TyingScheme};
use crate::rng::derive_seed;

#[derive(Debug, Clone)]
pub struct EmConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Relative change of the bound below which EM stops.
    pub tol: f64,
    pub alpha: f64,
    pub tying: TyingScheme,
    pub templates: Vec<FeatureTemplate>,
    pub freeze_eta: bool,
    pub freeze_beta: bool,
    /// When false, structural weights stay at `initial_structure`.
    pub update_structure: bool,
    pub initial_structure: Option<StructParams>,
    pub estep: EStepOptions,
    pub nce: NceConfig,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            restarts: 5,
            max_iter: 100,
            tol: 1e-6,
            alpha: 0.1,
            tying: TyingScheme::Symmetric,
            templates: vec![FeatureTemplate::AdamicAdar],
            freeze_eta: false,
            freeze_beta: false,
            update_structure: true,
            initial_structure: None,
            estep: EStepOptions::default(),
            nce: NceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmRecord {
    pub restart: usize,
    pub iteration: usize,
    /// Bound after this iteration's E-step.
    pub bound: f64,
    pub nce_objective: Option<f64>,
    pub eta_norm: f64,
    pub beta_norm: f64,
    pub c: f64,
    pub estep_sweeps: usize,
    /// Bound fell by more than 1e-6 relative to the previous E-step.
    pub bound_decreased: bool,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EmTrace {
    records: Vec<EmRecord>,
}

impl EmTrace {
    pub fn push(&mut self, r: EmRecord) {
        debug_assert!(self.records.last().is_none_or(|p| p.elapsed_secs <= r.elapsed_secs));
        self.records.push(r);
    }

    pub fn records(&self) -> &[EmRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Tab-separated table with a header row. Wall-clock times are the only
    /// nondeterministic column, so they are opt-in.
    pub fn to_tsv(&self, timing: bool) -> String {
        let mut s = String::from(
            "restart\titeration\tbound\tnce_objective\teta_norm\tbeta_norm\tc\testep_sweeps\tbound_decreased",
        );
        s.push_str(if timing { "\telapsed_secs\n" } else { "\n" });
        for r in &self.records {
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.restart,
                r.iteration,
                r.bound,
                r.nce_objective.map_or("NA".to_string(), |v| v.to_string()),
                r.eta_norm,
                r.beta_norm,
                r.c,
                r.estep_sweeps,
                r.bound_decreased,
            ));
            if timing {
                s.push_str(&format!("\t{:.6}", r.elapsed_secs));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct EmResult {
    pub params: ModelParams,
    pub beliefs: Vec<EdgeBeliefs>,
    pub trace: EmTrace,
    pub best_restart: usize,
    pub final_bound: f64,
    pub restart_bounds: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// E-step on every network against one parameter snapshot. Networks run in
/// parallel; the bound is reduced in network order.
pub fn estep_all(
    networks: &[Network],
    triads: &[TriadIndex],
    beliefs: &[EdgeBeliefs],
    params: &ModelParams,
    opts: &EStepOptions,
) -> Result<(Vec<EdgeBeliefs>, BoundReport, usize)> {
    let outcomes = networks
        .par_iter()
        .zip(triads.par_iter())
        .zip(beliefs.par_iter())
        .map(|((n, t), q)| run_estep(n, t, q, params, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut bound = BoundReport::default();
    let mut sweeps = 0;
    let mut out = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        bound = bound.merge(&o.bound);
        sweeps = sweeps.max(o.sweeps);
        out.push(o.beliefs);
    }
    Ok((out, bound, sweeps))
}

struct RestartResult {
    params: ModelParams,
    beliefs: Vec<EdgeBeliefs>,
    bound: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_restart(
    networks: &[Network],
    triads: &[TriadIndex],
    labels: &LabelSet,
    layout: &ParamLayout,
    config: &EmConfig,
    seed: u64,
    restart: usize,
    started: Instant,
    trace: &mut EmTrace,
) -> Result<RestartResult> {
    let k = labels.len();
    let vocab = networks[0].vocab_size();
    let (mut content, mut structure) = init_params(
        vocab,
        labels,
        config.tying,
        config.templates.len(),
        derive_seed(seed, "restart", &[restart as u64]),
    )?;
    content.alpha = config.alpha;
    if let Some(s) = &config.initial_structure {
        structure = s.clone();
    }
    layout.enforce(&mut structure);
    let mut params = ModelParams {
        labels: labels.clone(),
        tying: config.tying,
        templates: config.templates.clone(),
        content,
        structure,
    };
    let mut beliefs: Vec<EdgeBeliefs> = networks.iter().map(|n| EdgeBeliefs::uniform(n.num_edges(), k)).collect();
    if config.max_iter == 0 {
        let (_, bound, _) =
            estep_all(networks, triads, &beliefs, &params, &EStepOptions { max_sweeps: 0, ..config.estep })?;
        return Ok(RestartResult { params, beliefs, bound: bound.bound_excluding_logz });
    }

    let mut prev: Option<f64> = None;
    for it in 0..config.max_iter {
        let (q, bound, sweeps) = estep_all(networks, triads, &beliefs, &params, &config.estep)?;
        beliefs = q;
        let b = bound.bound_excluding_logz;
        let decreased = prev.is_some_and(|p| b < p - 1e-6);

        params.content = mstep_content(networks, &beliefs, k, config.tying, config.alpha)?;
        let mut nce_objective = None;
        if config.update_structure && !(config.freeze_eta && config.freeze_beta) {
            let fit = optimize_struct(
                networks,
                triads,
                &beliefs,
                &config.templates,
                layout,
                &params.structure,
                &config.nce,
                derive_seed(seed, "noise", &[restart as u64, it as u64]),
            )?;
            nce_objective = Some(fit.objective);
            params.structure = fit.params;
        }
        trace.push(EmRecord {
            restart,
            iteration: it,
            bound: b,
            nce_objective,
            eta_norm: norm(&params.structure.eta),
            beta_norm: norm(&params.structure.beta),
            c: params.structure.c,
            estep_sweeps: sweeps,
            bound_decreased: decreased,
            elapsed_secs: started.elapsed().as_secs_f64(),
        });
        if let Some(p) = prev {
            if ((b - p) / p.abs().max(1.0)).abs() < config.tol {
                break;
            }
        }
        prev = Some(b);
    }
    let (q, bound, _) = estep_all(networks, triads, &beliefs, &params, &config.estep)?;
    Ok(RestartResult { params, beliefs: q, bound: bound.bound_excluding_logz })
}

/// Runs EM from `config.restarts` random initializations and keeps the one
/// with the highest final bound (earliest restart on ties).
pub fn run_em(networks: &[Network], labels: &LabelSet, config: &EmConfig, seed: u64) -> Result<EmResult> {
    if networks.iter().all(|n| n.num_edges() == 0) {
        return Err(Error::EmptyCorpus("no network has an edge".into()));
    }
    let vocab = networks[0].vocab_size();
    if vocab == 0 {
        return Err(Error::EmptyCorpus("empty vocabulary".into()));
    }
    if networks.iter().any(|n| n.vocab_size() != vocab) {
        return Err(Error::InvalidConfig("networks disagree on vocabulary size".into()));
    }
    if config.restarts == 0 {
        return Err(Error::InvalidConfig("at least one restart is required".into()));
    }
    let layout = ParamLayout::new(labels.len(), config.templates.len(), labels.reference())
        .with_frozen(config.freeze_eta, config.freeze_beta);
    let triads: Vec<TriadIndex> = networks.par_iter().map(enumerate_triads).collect();
    let started = Instant::now();
    let mut trace = EmTrace::default();
    let mut best: Option<(usize, RestartResult)> = None;
    let mut restart_bounds = Vec::with_capacity(config.restarts);
    for r in 0..config.restarts {
        let res = run_restart(networks, &triads, labels, &layout, config, seed, r, started, &mut trace)?;
        restart_bounds.push(res.bound);
        if best.as_ref().is_none_or(|(_, b)| res.bound > b.bound) {
            best = Some((r, res));
        }
    }
    let (best_restart, res) = best.expect("at least one restart");
    Ok(EmResult {
        params: res.params,
        beliefs: res.beliefs,
        trace,
        best_restart,
        final_bound: res.bound,
        restart_bounds,
    })
}
