//! A collection of networks over a shared vocabulary, and its JSON form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeContent, Network};

#[derive(Debug, Clone)]
pub struct Corpus {
    pub vocab: Vec<String>,
    pub networks: Vec<Network>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EdgeRecord {
    i: usize,
    j: usize,
    fwd: Vec<u32>,
    bwd: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NetworkRecord {
    id: String,
    nodes: Vec<String>,
    edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NetworksFile {
    format: String,
    vocab: Vec<String>,
    networks: Vec<NetworkRecord>,
}

pub const NETWORKS_FORMAT: &str = "signet-networks/1";

impl Corpus {
    pub fn new(vocab: Vec<String>, networks: Vec<Network>) -> Result<Self> {
        if let Some(net) = networks.iter().find(|n| n.vocab_size() != vocab.len()) {
            return Err(Error::InvalidNetwork {
                network: net.id().to_string(),
                reason: format!("vocabulary size {} differs from corpus vocabulary {}", net.vocab_size(), vocab.len()),
            });
        }
        Ok(Corpus { vocab, networks })
    }

    pub fn num_edges(&self) -> usize {
        self.networks.iter().map(Network::num_edges).sum()
    }

    pub fn find(&self, id: &str) -> Option<&Network> {
        self.networks.iter().find(|n| n.id() == id)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = NetworksFile {
            format: NETWORKS_FORMAT.into(),
            vocab: self.vocab.clone(),
            networks: self
                .networks
                .iter()
                .map(|n| NetworkRecord {
                    id: n.id().to_string(),
                    nodes: n.nodes().to_vec(),
                    edges: n
                        .edges()
                        .iter()
                        .enumerate()
                        .map(|(e, edge)| {
                            let c = n.content(e);
                            EdgeRecord { i: edge.i, j: edge.j, fwd: c.fwd.clone(), bwd: c.bwd.clone() }
                        })
                        .collect(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: NetworksFile = serde_json::from_str(s)?;
        if file.format != NETWORKS_FORMAT {
            return Err(Error::InvalidConfig(format!("unsupported networks format `{}`", file.format)));
        }
        let v = file.vocab.len();
        let networks = file
            .networks
            .into_iter()
            .map(|r| {
                let edges = r.edges.into_iter().map(|e| (e.i, e.j, EdgeContent::new(e.fwd, e.bwd))).collect();
                Network::from_parts(r.id, r.nodes, edges, v)
            })
            .collect::<Result<Vec<_>>>()?;
        Corpus::new(file.vocab, networks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let net = Network::from_edge_list("f1", 3, &[(0, 1), (1, 2)], 2)
            .unwrap()
            .with_content(vec![EdgeContent::new(vec![0, 1, 0], vec![]), EdgeContent::new(vec![], vec![1])])
            .unwrap();
        let corpus = Corpus::new(vec!["a".into(), "b".into()], vec![net]).unwrap();
        let back = Corpus::from_json(&corpus.to_json().unwrap()).unwrap();
        assert_eq!(back.vocab, corpus.vocab);
        assert_eq!(back.networks[0].content(0), corpus.networks[0].content(0));
        assert_eq!(back.networks[0].edges(), corpus.networks[0].edges());
        assert_eq!(back.to_json().unwrap(), corpus.to_json().unwrap());
    }
}
