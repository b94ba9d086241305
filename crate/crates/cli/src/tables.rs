//! Tab-separated edge tables: beliefs written by `train`/`export` and the
//! true labels written by `simulate`.

use std::collections::BTreeMap;
use std::fmt::Write;

use signet_core::{EdgeBeliefs, LabelSet, Network};

use crate::error::{CliError, CliResult};

pub const TRUTH_HEADER: &str = "film_id\tnode_a\tnode_b\tlabel";

/// One row per edge: endpoints, one belief column per label, and the most
/// likely label.
pub fn beliefs_tsv(networks: &[Network], beliefs: &[EdgeBeliefs], labels: &LabelSet, provenance: &str) -> String {
    let mut s = String::new();
    if !provenance.is_empty() {
        let _ = writeln!(s, "# model_sha256={}", provenance);
    }
    s.push_str("film_id\tnode_a\tnode_b");
    for name in labels.names() {
        let _ = write!(s, "\tq_{}", name);
    }
    s.push_str("\tlabel\n");
    for (net, q) in networks.iter().zip(beliefs) {
        let argmax = q.argmax();
        for (e, edge) in net.edges().iter().enumerate() {
            let _ = write!(s, "{}\t{}\t{}", net.id(), net.nodes()[edge.i], net.nodes()[edge.j]);
            for p in q.get(e) {
                let _ = write!(s, "\t{}", p);
            }
            let _ = writeln!(s, "\t{}", labels.name(argmax[e]));
        }
    }
    s
}

pub fn truth_tsv(networks: &[Network], truth: &[Vec<usize>], labels: &LabelSet) -> String {
    let mut s = format!("{}\n", TRUTH_HEADER);
    for (net, y) in networks.iter().zip(truth) {
        for (edge, &l) in net.edges().iter().zip(y) {
            let _ = writeln!(s, "{}\t{}\t{}\t{}", net.id(), net.nodes()[edge.i], net.nodes()[edge.j], labels.name(l));
        }
    }
    s
}

/// Labels keyed by `(film, a, b)` with `a < b`.
pub type TruthTable = BTreeMap<(String, String, String), usize>;

pub fn parse_truth(text: &str, path: &str, labels: &LabelSet) -> CliResult<TruthTable> {
    let mut out = TruthTable::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') || (n == 0 && line == TRUTH_HEADER) {
            continue;
        }
        let err = |reason: String| CliError::new("E_PARSE", format!("{}:{}: {}", path, n + 1, reason));
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(err(format!("expected 4 tab-separated fields, found {}", f.len())));
        }
        let label = labels.find(f[3]).ok_or_else(|| err(format!("unknown label `{}`", f[3])))?;
        let (a, b) = if f[1] <= f[2] { (f[1], f[2]) } else { (f[2], f[1]) };
        out.insert((f[0].to_string(), a.to_string(), b.to_string()), label);
    }
    Ok(out)
}

/// True labels aligned with the edges of `networks`.
pub fn align_truth(networks: &[Network], table: &TruthTable) -> CliResult<Vec<Vec<usize>>> {
    networks
        .iter()
        .map(|net| {
            net.edges()
                .iter()
                .map(|e| {
                    let (a, b) = (&net.nodes()[e.i], &net.nodes()[e.j]);
                    let key = (net.id().to_string(), a.min(b).clone(), a.max(b).clone());
                    table.get(&key).copied().ok_or_else(|| {
                        CliError::new("E_PARSE", format!("no true label for edge {}-{} in `{}`", a, b, net.id()))
                    })
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_round_trip() {
        let net = Network::from_edge_list("f", 3, &[(0, 1), (1, 2)], 1).unwrap();
        let labels = LabelSet::tv();
        let text = truth_tsv(std::slice::from_ref(&net), &[vec![1, 0]], &labels);
        let table = parse_truth(&text, "t.tsv", &labels).unwrap();
        assert_eq!(align_truth(&[net], &table).unwrap(), vec![vec![1, 0]]);
    }

    #[test]
    fn unknown_label_is_reported() {
        let err = parse_truth("f\ta\tb\tx\n", "t.tsv", &LabelSet::tv()).unwrap_err();
        assert_eq!(err.code, "E_PARSE");
        assert!(err.message.starts_with("t.tsv:1:"));
    }
}
