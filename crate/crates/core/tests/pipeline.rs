mod common;

use common::*;
use proptest::prelude::*;
use signet_core::dot::parse_dot;
use signet_core::em::{run_em, EmConfig};
use signet_core::estep::EdgeBeliefs;
use signet_core::eval::{export_signed_network, first_part_len, split_tokens, Ablation, SplitSpec};
use signet_core::graph::{FeatureTemplate, Network};
use signet_core::oracle::{balance_beta, block_topics, generate_corpus, SamplerMode, SyntheticSpec};
use signet_core::params::{LabelSet, ModelFile, StructParams};

fn small_corpus(seed: u64) -> (Vec<Network>, Vec<String>) {
    let spec = SyntheticSpec {
        num_networks: 12,
        nodes: 7,
        edges: 12,
        templates: vec![FeatureTemplate::AdamicAdar],
        structure: StructParams { eta: vec![0.5, 0.0], beta: balance_beta(1.0, -1.0), c: 0.0 },
        content: block_topics(2, 10, 3, 0.7),
        vocab: (0..10).map(|i| format!("w{}", i)).collect(),
        tokens_per_dyad: 8.0,
        sampler: SamplerMode::Auto,
        seed,
    };
    let syn = generate_corpus(&spec, &LabelSet::tv()).unwrap();
    (syn.corpus.networks, syn.corpus.vocab)
}

#[test]
fn model_file_round_trips() {
    let mut r = rng(5);
    let p = model(random_content(&mut r, 6), random_structure(&mut r, 1.0, true));
    let vocab: Vec<String> = (0..6).map(|i| format!("s{}", i)).collect();
    let file = ModelFile::from_params(&p, &vocab, false, true, 42);
    let json = file.to_json().unwrap();
    let back = ModelFile::from_json(&json).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.to_params().unwrap(), p);
    assert_eq!(back.to_json().unwrap(), json);
}

#[test]
fn model_file_rejects_other_format() {
    let mut r = rng(5);
    let p = model(random_content(&mut r, 3), random_structure(&mut r, 1.0, true));
    let mut file = ModelFile::from_params(&p, &["a".into(), "b".into(), "c".into()], false, false, 0);
    file.format = "other/9".into();
    assert!(file.to_params().is_err());
}

#[test]
fn exported_dot_parses_back() {
    let (nets, _) = small_corpus(3);
    let net = &nets[0];
    let rows: Vec<Vec<f64>> = (0..net.num_edges())
        .map(|e| match e % 3 {
            0 => vec![0.9, 0.1],
            1 => vec![0.2, 0.8],
            _ => vec![0.55, 0.45],
        })
        .collect();
    let dot = export_signed_network(net, &EdgeBeliefs::from_rows(&rows), &LabelSet::tv(), 0.6, "abc123");
    let g = parse_dot(&dot).unwrap();
    assert!(!g.directed);
    assert_eq!(g.name.as_deref(), Some(net.id()));
    assert_eq!(g.nodes.len(), net.nodes().len());
    assert_eq!(g.edges.len(), net.num_edges());
    for (e, (edge, parsed)) in net.edges().iter().zip(&g.edges).enumerate() {
        assert_eq!(parsed.from, net.nodes()[edge.i]);
        assert_eq!(parsed.to, net.nodes()[edge.j]);
        let attr = |k: &str| parsed.attrs.iter().find(|(a, _)| a == k).map(|(_, v)| v.as_str()).unwrap();
        let expected = match e % 3 {
            0 => ("dashed", "red", "t", "0.9000"),
            1 => ("solid", "blue", "v", "0.8000"),
            _ => ("dotted", "gray", "t", "0.5500"),
        };
        assert_eq!((attr("style"), attr("color"), attr("label"), attr("belief")), expected);
    }
}

#[test]
fn triad_ablation_keeps_beta_zero() {
    let (nets, _) = small_corpus(4);
    let cfg = Ablation::FEATURES_ONLY.apply(&EmConfig { restarts: 1, max_iter: 5, ..Default::default() });
    let res = run_em(&nets, &LabelSet::tv(), &cfg, 1).unwrap();
    assert!(res.params.structure.beta.iter().all(|&b| b == 0.0));
    assert!(res.params.structure.eta.iter().any(|&w| w != 0.0));
    let text = Ablation::TEXT_ONLY.apply(&EmConfig { restarts: 1, max_iter: 5, ..Default::default() });
    let res = run_em(&nets, &LabelSet::tv(), &text, 1).unwrap();
    assert!(res.params.structure.eta.iter().chain(&res.params.structure.beta).all(|&w| w == 0.0));
}

#[test]
fn em_reports_one_bound_per_restart() {
    let (nets, _) = small_corpus(6);
    let res = run_em(&nets, &LabelSet::tv(), &EmConfig { restarts: 3, max_iter: 4, ..Default::default() }, 2).unwrap();
    assert_eq!(res.restart_bounds.len(), 3);
    assert!(res.best_restart < 3);
    assert_eq!(res.beliefs.len(), nets.len());
    assert!(res.trace.records().iter().all(|r| r.bound.is_finite()));
}

#[test]
fn zero_restarts_rejected() {
    let (nets, _) = small_corpus(6);
    assert!(run_em(&nets, &LabelSet::tv(), &EmConfig { restarts: 0, ..Default::default() }, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn network_split_partitions_indices(n in 1usize..60, frac in 0.05f64..0.95, seed in any::<u64>()) {
        let (train, test) = SplitSpec { holdout_frac: frac, split_frac: 0.5, seed }.split_networks(n).unwrap();
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert!(!test.is_empty());
        if n >= 2 {
            prop_assert!(!train.is_empty());
        }
    }

    #[test]
    fn token_split_keeps_every_token(seed in any::<u64>(), frac in 0.1f64..0.9) {
        let mut r = rng(seed);
        let g = random_graph_with_triads(&mut r, 8);
        let net = with_random_tokens(&mut r, &g, 5, 7);
        let (first, rest) = split_tokens(&net, frac).unwrap();
        for (e, c) in rest.iter().enumerate() {
            let (a, b) = (net.content(e), first.content(e));
            prop_assert_eq!([b.fwd.clone(), c.fwd.clone()].concat(), a.fwd.clone());
            prop_assert_eq!([b.bwd.clone(), c.bwd.clone()].concat(), a.bwd.clone());
            prop_assert_eq!(b.fwd.len(), first_part_len(a.fwd.len(), frac));
        }
    }
}

#[test]
fn odd_streams_round_up() {
    assert_eq!(first_part_len(5, 0.5), 3);
    assert_eq!(first_part_len(4, 0.5), 2);
    assert_eq!(first_part_len(0, 0.5), 0);
    assert_eq!(first_part_len(1, 0.5), 1);
}
