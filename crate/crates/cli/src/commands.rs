use std::fs;
use std::io::{BufRead, Write as _};
use std::path::{Path, PathBuf};

use clap::Parser;
use rayon::prelude::*;
use serde_json::json;

use signet_core::address::{
    bootstrap_lexicon, build_content_vectors, curated_list, parse_characters, parse_dialogue, BaselinePolicy, Lexicon,
    Provenance, SlotKind, TermKind, VocabPolicy,
};
use signet_core::estep::run_estep;
use signet_core::eval::{
    ablation_table_tsv, export_signed_network, heldout_predictive_ll, rank_terms, report_triad_weights,
    weights_chart_json, weights_tsv, Ablation, AblationRow, SplitSpec,
};
use signet_core::graph::enumerate_triads;
use signet_core::mstep::NceConfig;
use signet_core::oracle::{
    balance_beta, best_permutation_accuracy, block_topics, generate_corpus, SamplerMode, SyntheticSpec,
};
use signet_core::params::{anchor_permutation, ModelFile};
use signet_core::{Corpus, EdgeBeliefs, EmConfig, FeatureTemplate, LabelSet, ModelParams, StructParams, TyingScheme};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::manifest::{default_path, hash_file, now, sha256_hex, RunManifest, MANIFEST_FORMAT};
use crate::tables;

/// What a command read and wrote.
struct Run {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    /// Where the manifest goes by default, and whether that is a directory.
    anchor: Option<(PathBuf, bool)>,
    seed: Option<u64>,
    summary: serde_json::Value,
}

pub fn dispatch(cli: &Cli, argv: &[String], write_manifest: bool) -> CliResult<()> {
    if let Command::Replay(r) = &cli.command {
        return replay(r, cli.threads);
    }
    let started_at = now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::new("E_CONFIG", e.to_string()))?;
    let run = pool.install(|| match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Rank(a) => rank(a),
        Command::Export(a) => export(a),
        Command::Lexicon(a) => lexicon(a),
        Command::Simulate(a) => simulate(a),
        Command::Replay(_) => unreachable!(),
    })?;
    if !write_manifest {
        return Ok(());
    }
    let path = match (&cli.manifest, &run.anchor) {
        (Some(p), _) => p.clone(),
        (None, Some((p, is_dir))) => default_path(p, *is_dir),
        (None, None) => return Ok(()),
    };
    let manifest = RunManifest {
        format: MANIFEST_FORMAT.into(),
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: subcommand_name(&cli.command).into(),
        argv: argv.to_vec(),
        cwd: std::env::current_dir().map_err(|e| CliError::io(Path::new("."), e))?,
        config: serde_json::to_value(&cli.command)?,
        seed: run.seed,
        threads: cli.threads,
        inputs: run.inputs.iter().map(|p| hash_file(p)).collect::<CliResult<_>>()?,
        outputs: run.outputs.iter().map(|p| hash_file(p)).collect::<CliResult<_>>()?,
        summary: run.summary,
        started_at,
        finished_at: now(),
    };
    manifest.write(&path)
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Train(_) => "train",
        Command::Eval(_) => "eval",
        Command::Rank(_) => "rank",
        Command::Export(_) => "export",
        Command::Lexicon(_) => "lexicon",
        Command::Simulate(_) => "simulate",
        Command::Replay(_) => "replay",
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn load_lexicon(files: &LexiconFiles, inputs: &mut Vec<PathBuf>) -> CliResult<Lexicon> {
    let mut text = |p: &Option<PathBuf>, kind| -> CliResult<String> {
        match p {
            Some(p) => {
                inputs.push(p.clone());
                read(p)
            }
            None => Ok(curated_list(kind).to_string()),
        }
    };
    let titles = text(&files.titles, TermKind::Title)?;
    let placeholders = text(&files.placeholders, TermKind::Placeholder)?;
    Ok(Lexicon::from_lists(&titles, &placeholders)?)
}

fn load_networks(path: &Path) -> CliResult<Corpus> {
    Corpus::from_json(&read(path)?).map_err(|e| CliError { message: format!("{}: {}", display(path), e), ..e.into() })
}

fn load_model(path: &Path) -> CliResult<(ModelFile, ModelParams, String)> {
    let text = read(path)?;
    let file = ModelFile::from_json(&text)
        .map_err(|e| CliError { message: format!("{}: {}", display(path), e), ..e.into() })?;
    let params = file.to_params()?;
    Ok((file, params, sha256_hex(text.as_bytes())))
}

fn ingest(a: &IngestArgs) -> CliResult<Run> {
    let mut inputs = vec![a.dialogue.clone(), a.characters.clone()];
    let lexicon = load_lexicon(&a.lexicon, &mut inputs)?;
    let chars = parse_characters(&read(&a.characters)?, &display(&a.characters))?;
    let dialogue = parse_dialogue(&read(&a.dialogue)?, &display(&a.dialogue), &chars)?;
    for s in &dialogue.skipped {
        eprintln!("warning: {}:{}: {}; line skipped", display(&a.dialogue), s.line, s.reason);
    }
    let policy = VocabPolicy { min_count: a.min_count, include_lexicon: a.include_lexicon };
    let built = build_content_vectors(&dialogue, &chars, &lexicon, policy)?;
    write(&a.out, &built.corpus.to_json()?)?;
    let skipped_lines: std::collections::BTreeSet<usize> = dialogue.skipped.iter().map(|s| s.line).collect();
    eprintln!(
        "ingested {} lines ({} skipped): {} networks, {} edges, {} address spans, {} symbols",
        dialogue.lines.len(),
        skipped_lines.len(),
        built.corpus.networks.len(),
        built.corpus.num_edges(),
        built.num_spans,
        built.corpus.vocab.len()
    );
    Ok(Run {
        inputs,
        outputs: vec![a.out.clone()],
        anchor: Some((a.out.clone(), false)),
        seed: None,
        summary: json!({
            "lines": dialogue.lines.len(),
            "skipped_lines": skipped_lines.len(),
            "networks": built.corpus.networks.len(),
            "edges": built.corpus.num_edges(),
            "address_spans": built.num_spans,
            "vocab": built.corpus.vocab.len(),
            "dropped_tokens": built.dropped_tokens,
        }),
    })
}

fn em_config(t: &TrainOptions) -> EmConfig {
    EmConfig {
        restarts: t.restarts,
        max_iter: t.max_iter,
        tol: t.tol,
        alpha: t.alpha,
        tying: match t.tying {
            TyingArg::Symmetric => TyingScheme::Symmetric,
            TyingArg::Directed => TyingScheme::Directed,
        },
        templates: vec![match t.feature {
            FeatureArg::AdamicAdar => FeatureTemplate::AdamicAdar,
            FeatureArg::MutualFriends => FeatureTemplate::MutualFriends,
        }],
        freeze_eta: t.ablate.contains(&AblateArg::MutualFriends),
        freeze_beta: t.ablate.contains(&AblateArg::Triads),
        nce: NceConfig { ridge: t.ridge, ..NceConfig::default() },
        ..EmConfig::default()
    }
}

fn train(a: &TrainArgs) -> CliResult<Run> {
    let corpus = load_networks(&a.networks)?;
    let mut inputs = vec![a.networks.clone()];
    let labels = LabelSet::tv();
    let cfg = em_config(&a.train);
    let res = signet_core::run_em(&corpus.networks, &labels, &cfg, a.train.seed)?;

    let formal: Vec<&str> = a.formal_seeds.iter().map(String::as_str).collect();
    let informal: Vec<&str> = a.informal_seeds.iter().map(String::as_str).collect();
    let perm = anchor_permutation(&res.params, &corpus.vocab, &formal, &informal);
    let params = res.params.permute_labels(&perm);
    let beliefs: Vec<EdgeBeliefs> = res.beliefs.iter().map(|b| b.permute(&perm)).collect();

    let model =
        ModelFile::from_params(&params, &corpus.vocab, cfg.freeze_eta, cfg.freeze_beta, a.train.seed).to_json()?;
    write(&a.out, &model)?;
    let sha = sha256_hex(model.as_bytes());
    let mut outputs = vec![a.out.clone()];
    if let Some(p) = &a.beliefs {
        write(p, &tables::beliefs_tsv(&corpus.networks, &beliefs, &labels, &sha))?;
        outputs.push(p.clone());
    }
    if let Some(p) = &a.trace {
        write(p, &res.trace.to_tsv(a.trace_timing))?;
        outputs.push(p.clone());
    }
    println!(
        "bound {} (restart {} of {}); model {}",
        res.final_bound,
        res.best_restart + 1,
        res.restart_bounds.len(),
        display(&a.out)
    );
    let mut summary = json!({
        "final_bound": res.final_bound,
        "best_restart": res.best_restart,
        "restart_bounds": res.restart_bounds,
        "anchor_permutation": perm,
        "model_sha256": sha,
    });
    if let Some(p) = &a.truth {
        inputs.push(p.clone());
        let table = tables::parse_truth(&read(p)?, &display(p), &labels)?;
        let truth = tables::align_truth(&corpus.networks, &table)?;
        let pred: Vec<Vec<usize>> = beliefs.iter().map(EdgeBeliefs::argmax).collect();
        let total: usize = truth.iter().map(Vec::len).sum();
        let hits: usize = truth.iter().zip(&pred).map(|(t, q)| t.iter().zip(q).filter(|(a, b)| a == b).count()).sum();
        let anchored = if total == 0 { 1.0 } else { hits as f64 / total as f64 };
        let (best, best_perm) = best_permutation_accuracy(&truth, &pred, labels.len());
        println!("accuracy {:.4} as labeled, {:.4} under the best relabeling ({} edges)", anchored, best, total);
        summary["accuracy"] =
            json!({ "as_labeled": anchored, "best_permutation": best, "permutation": best_perm, "edges": total });
    }
    Ok(Run { inputs, outputs, anchor: Some((a.out.clone(), false)), seed: Some(a.train.seed), summary })
}

fn eval(a: &EvalArgs) -> CliResult<Run> {
    if !a.train.ablate.is_empty() {
        return Err(CliError::usage("eval compares models itself; use --models instead of --ablate"));
    }
    let corpus = load_networks(&a.networks)?;
    let split = SplitSpec { holdout_frac: a.holdout_frac, split_frac: a.split_frac, seed: a.train.seed };
    let (train_idx, test_idx) = split.split_networks(corpus.networks.len())?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| corpus.networks[i].clone()).collect::<Vec<_>>();
    let (train, test) = (pick(&train_idx), pick(&test_idx));
    let base = em_config(&a.train);
    let labels = LabelSet::tv();
    let mut rows = Vec::new();
    for m in &a.models {
        let ablation = match m {
            ModelArg::Full => Ablation::FULL,
            ModelArg::MutualFriends => Ablation::FEATURES_ONLY,
            ModelArg::TextOnly => Ablation::TEXT_ONLY,
        };
        let res = signet_core::run_em(&train, &labels, &ablation.apply(&base), a.train.seed)?;
        let report = heldout_predictive_ll(&res.params, &test, a.split_frac, &base.estep)?;
        println!("{}\t{}\t{}", ablation.name(), report.total, report.per_dyad_mean);
        rows.push(AblationRow { ablation, report });
    }
    let sha = hash_file(&a.networks)?.sha256;
    let held: Vec<&str> = test.iter().map(|n| n.id()).collect();
    let table = format!(
        "# networks_sha256={}\n# train_networks={} heldout_networks={}\n{}",
        sha,
        train.len(),
        held.join(","),
        ablation_table_tsv(&rows, "")
    );
    write(&a.out, &table)?;
    let mut outputs = vec![a.out.clone()];
    if let Some(p) = &a.per_network {
        let mut s = format!("# networks_sha256={}\nmodel\tnetwork\tloglik\tdyads\tscored_dyads\tscored_tokens\n", sha);
        for r in &rows {
            for n in &r.report.networks {
                s.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    r.ablation.name(),
                    n.network,
                    n.loglik,
                    n.dyads,
                    n.scored_dyads,
                    n.scored_tokens
                ));
            }
        }
        write(p, &s)?;
        outputs.push(p.clone());
    }
    let summary = json!({
        "heldout_networks": held,
        "models": rows.iter().map(|r| json!({
            "model": r.ablation.name(),
            "total": r.report.total,
            "per_dyad_mean": r.report.per_dyad_mean,
        })).collect::<Vec<_>>(),
    });
    Ok(Run {
        inputs: vec![a.networks.clone()],
        outputs,
        anchor: Some((a.out.clone(), false)),
        seed: Some(a.train.seed),
        summary,
    })
}

fn rank(a: &RankArgs) -> CliResult<Run> {
    let (file, params, sha) = load_model(&a.model)?;
    let table = rank_terms(&params.content, &file.vocab, &params.labels, a.top).to_tsv(&sha);
    let outputs = match &a.out {
        Some(p) => {
            write(p, &table)?;
            vec![p.clone()]
        }
        None => {
            print!("{}", table);
            Vec::new()
        }
    };
    Ok(Run {
        inputs: vec![a.model.clone()],
        outputs,
        anchor: a.out.clone().map(|p| (p, false)),
        seed: None,
        summary: json!({ "model_sha256": sha }),
    })
}

fn file_stem_for(id: &str) -> String {
    id.chars().map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn export(a: &ExportArgs) -> CliResult<Run> {
    let (file, params, sha) = load_model(&a.model)?;
    let corpus = load_networks(&a.networks)?;
    if file.vocab != corpus.vocab {
        return Err(CliError::new("E_PARAMS", "model and networks were built with different vocabularies"));
    }
    for id in &a.network {
        if corpus.find(id).is_none() {
            return Err(CliError::usage(format!("no network `{}` in {}", id, display(&a.networks))));
        }
    }
    let selected: Vec<_> = corpus
        .networks
        .iter()
        .filter(|n| a.network.is_empty() || a.network.iter().any(|id| id == n.id()))
        .cloned()
        .collect();
    let k = params.num_labels();
    let beliefs = selected
        .par_iter()
        .map(|net| {
            let triads = enumerate_triads(net);
            run_estep(net, &triads, &EdgeBeliefs::uniform(net.num_edges(), k), &params, &Default::default())
                .map(|o| o.beliefs)
        })
        .collect::<signet_core::Result<Vec<_>>>()?;
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    let mut outputs = Vec::new();
    let mut put = |name: String, text: &str| -> CliResult<()> {
        let p = a.out_dir.join(name);
        write(&p, text)?;
        outputs.push(p);
        Ok(())
    };
    let mut used = std::collections::BTreeSet::new();
    for (net, q) in selected.iter().zip(&beliefs) {
        let mut stem = file_stem_for(net.id());
        while !used.insert(stem.clone()) {
            stem.push('_');
        }
        put(format!("{}.dot", stem), &export_signed_network(net, q, &params.labels, a.threshold, &sha))?;
    }
    put("beliefs.tsv".into(), &tables::beliefs_tsv(&selected, &beliefs, &params.labels, &sha))?;
    let weights = report_triad_weights(&params);
    put("weights.tsv".into(), &weights_tsv(&weights, &sha))?;
    put("weights_chart.json".into(), &weights_chart_json(&weights, &sha)?)?;
    eprintln!("exported {} networks to {}", selected.len(), display(&a.out_dir));
    Ok(Run {
        inputs: vec![a.model.clone(), a.networks.clone()],
        outputs,
        anchor: Some((a.out_dir.clone(), true)),
        seed: None,
        summary: json!({ "model_sha256": sha, "networks": selected.len() }),
    })
}

fn lexicon(a: &LexiconArgs) -> CliResult<Run> {
    let mut inputs = vec![a.dialogue.clone(), a.characters.clone()];
    let mut lex = load_lexicon(&a.lexicon, &mut inputs)?;
    let chars = parse_characters(&read(&a.characters)?, &display(&a.characters))?;
    let dialogue = parse_dialogue(&read(&a.dialogue)?, &display(&a.dialogue), &chars)?;
    let (slot, kind) = match a.slot {
        SlotArg::PreName => (SlotKind::PreName, TermKind::Title),
        SlotArg::Vocative => (SlotKind::Vocative, TermKind::Placeholder),
    };
    let baseline = a.baseline.map_or(BaselinePolicy::CorpusWide, BaselinePolicy::Fixed);
    let result = bootstrap_lexicon(&dialogue, &chars, slot, baseline, a.alpha, &lex)?;
    let mut outputs = Vec::new();
    if let Some(p) = &a.candidates {
        let mut s = format!("# baseline={}\nterm\tn\tk\tp_value\n", result.baseline);
        for c in &result.candidates {
            s.push_str(&format!("{}\t{}\t{}\t{:e}\n", c.term, c.n, c.k, c.p_value));
        }
        write(p, &s)?;
        outputs.push(p.clone());
    }

    let prompt = !(a.accept_all || a.no_prompt || !a.accept.is_empty());
    let stdin = std::io::stdin();
    let mut answers = stdin.lock().lines();
    let mut accepted = Vec::new();
    for c in &result.candidates {
        let yes = if a.accept_all {
            true
        } else if !prompt {
            a.accept.iter().any(|t| t == &c.term)
        } else {
            eprint!("{} (n={}, k={}, p={:.3e}) accept? [y/N] ", c.term, c.n, c.k, c.p_value);
            let _ = std::io::stderr().flush();
            match answers.next() {
                Some(Ok(line)) => matches!(line.trim(), "y" | "Y" | "yes"),
                _ => false,
            }
        };
        if yes {
            lex.insert(kind, &c.term, Provenance::Bootstrapped)?;
            accepted.push(c.term.clone());
        }
    }
    write(&a.out, &lex.render(kind))?;
    outputs.push(a.out.clone());
    eprintln!("{} candidates, {} accepted; wrote {}", result.candidates.len(), accepted.len(), display(&a.out));
    Ok(Run {
        inputs,
        outputs,
        anchor: Some((a.out.clone(), false)),
        seed: None,
        summary: json!({
            "baseline": result.baseline,
            "candidates": result.candidates.len(),
            "accepted": accepted,
            "prompted": prompt,
        }),
    })
}

/// Placeholder names used as the synthetic vocabulary, in sorted order so
/// that ingest assigns them the same ids.
pub const SIM_TERMS: &[&str] = &[
    "babe",
    "baby",
    "boss",
    "boy",
    "bro",
    "bud",
    "buddy",
    "convict",
    "cowboy",
    "dad",
    "darling",
    "dear",
    "doll",
    "dude",
    "fella",
    "gal",
    "hon",
    "honey",
    "kid",
    "lad",
    "lady",
    "lover",
    "ma",
    "madam",
    "madame",
    "man",
    "mate",
    "mon",
    "pal",
    "papa",
    "partner",
    "peanut",
    "pet",
    "pilgrim",
    "pop",
    "president",
    "sir",
    "sire",
    "son",
    "sonny",
    "sport",
    "sugar",
    "sweetheart",
    "sweetie",
    "tiger",
];

fn simulate(a: &SimulateArgs) -> CliResult<Run> {
    if a.vocab > SIM_TERMS.len() {
        return Err(CliError::usage(format!("--vocab is at most {}", SIM_TERMS.len())));
    }
    if a.block == 0 || 2 * a.block > a.vocab {
        return Err(CliError::usage("--block must be positive and at most half of --vocab"));
    }
    if !(0.0..=1.0).contains(&a.top_mass) {
        return Err(CliError::usage("--top-mass must lie in [0, 1]"));
    }
    let labels = LabelSet::tv();
    let spec = SyntheticSpec {
        num_networks: a.networks,
        nodes: a.nodes,
        edges: a.edges,
        templates: vec![FeatureTemplate::AdamicAdar],
        structure: StructParams { eta: vec![a.eta, 0.0], beta: balance_beta(a.beta_hom, a.beta_het), c: 0.0 },
        content: block_topics(2, a.vocab, a.block, a.top_mass),
        vocab: SIM_TERMS[..a.vocab].iter().map(|s| s.to_string()).collect(),
        tokens_per_dyad: a.tokens_per_dyad,
        sampler: SamplerMode::Auto,
        seed: a.seed,
    };
    let syn = generate_corpus(&spec, &labels)?;
    let nets = &syn.corpus.networks;

    let mut chars = format!("{}\n", signet_core::address::corpus::CHARACTER_HEADER);
    let mut dialogue = format!("{}\n", signet_core::address::corpus::DIALOGUE_HEADER);
    for net in nets {
        for n in net.nodes() {
            chars.push_str(&format!("{}\t{}\t{}\t\n", net.id(), n, n.to_uppercase()));
        }
        for (e, edge) in net.edges().iter().enumerate() {
            let (a_id, b_id) = (&net.nodes()[edge.i], &net.nodes()[edge.j]);
            // an address-free line so every edge survives ingestion
            dialogue.push_str(&format!("{}\t{}\t{}\tI see .\n", net.id(), a_id, b_id));
            let c = net.content(e);
            for &t in &c.fwd {
                dialogue.push_str(&format!("{}\t{}\t{}\t{} .\n", net.id(), a_id, b_id, spec.vocab[t as usize]));
            }
            for &t in &c.bwd {
                dialogue.push_str(&format!("{}\t{}\t{}\t{} .\n", net.id(), b_id, a_id, spec.vocab[t as usize]));
            }
        }
    }
    let out = |name: &str| a.out_dir.join(name);
    write(&out("characters.tsv"), &chars)?;
    write(&out("dialogue.tsv"), &dialogue)?;
    write(&out("truth.tsv"), &tables::truth_tsv(nets, &syn.truth, &labels))?;
    eprintln!("wrote {} networks, {} edges to {}", nets.len(), syn.corpus.num_edges(), display(&a.out_dir));
    Ok(Run {
        inputs: Vec::new(),
        outputs: vec![out("characters.tsv"), out("dialogue.tsv"), out("truth.tsv")],
        anchor: Some((a.out_dir.clone(), true)),
        seed: Some(a.seed),
        summary: json!({ "networks": nets.len(), "edges": syn.corpus.num_edges() }),
    })
}

fn replay(a: &ReplayArgs, threads: usize) -> CliResult<()> {
    let m = RunManifest::read(&a.manifest_file)?;
    std::env::set_current_dir(&m.cwd).map_err(|e| CliError::io(&m.cwd, e))?;
    for input in &m.inputs {
        if hash_file(&input.path)?.sha256 != input.sha256 {
            return Err(CliError::new("E_REPLAY", format!("input {} changed since the run", display(&input.path))));
        }
    }
    let mut argv = m.argv.clone();
    if m.subcommand == "lexicon" && m.summary["prompted"] == json!(true) {
        // replay the recorded terminal answers
        argv.push("--no-prompt".into());
        for t in m.summary["accepted"].as_array().into_iter().flatten() {
            argv.push("--accept".into());
            argv.push(t.as_str().unwrap_or_default().into());
        }
    }
    let mut cli = Cli::try_parse_from(&argv).map_err(|e| CliError::new("E_REPLAY", format!("recorded argv: {}", e)))?;
    if threads != 0 {
        cli.threads = threads;
    }
    if let Command::Replay(_) = cli.command {
        return Err(CliError::new("E_REPLAY", "a replay manifest cannot be replayed"));
    }
    dispatch(&cli, &argv, false)?;
    let mut differing = Vec::new();
    for out in &m.outputs {
        if hash_file(&out.path)?.sha256 != out.sha256 {
            differing.push(display(&out.path));
        }
    }
    if !differing.is_empty() {
        return Err(CliError::new("E_REPLAY", format!("outputs differ: {}", differing.join(", "))));
    }
    println!("replay: {} outputs identical", m.outputs.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulation_terms_are_sorted_placeholders() {
        let lex = Lexicon::curated();
        assert!(SIM_TERMS.windows(2).all(|w| w[0] < w[1]));
        assert!(SIM_TERMS.iter().all(|t| lex.is_placeholder(t) && !lex.is_title(t)));
    }

    #[test]
    fn ablate_flags_freeze_weights() {
        let t = TrainOptions {
            seed: 0,
            restarts: 1,
            max_iter: 1,
            tol: 1e-6,
            alpha: 0.1,
            ablate: vec![AblateArg::Triads],
            tying: TyingArg::Directed,
            feature: FeatureArg::AdamicAdar,
            ridge: 1.0,
        };
        let c = em_config(&t);
        assert!(c.freeze_beta && !c.freeze_eta);
        assert_eq!(c.tying, TyingScheme::Directed);
    }
}
