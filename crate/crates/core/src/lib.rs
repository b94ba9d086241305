//! Latent signed-network model: edges between characters carry a hidden
//! label, address terms exchanged along each edge are generated from
//! label-specific distributions, and triads of labels carry learned weights.

#![allow(clippy::needless_range_loop)]

pub mod address;
pub mod corpus;
pub mod dot;
pub mod em;
pub mod error;
pub mod estep;
pub mod eval;
pub mod graph;
pub mod lbfgs;
pub mod mstep;
pub mod oracle;
pub mod params;
pub mod rng;

pub use corpus::Corpus;
pub use em::{run_em, EmConfig, EmResult, EmTrace};
pub use error::{Error, Result};
pub use estep::{EStepOptions, EdgeBeliefs};
pub use graph::{FeatureTemplate, Network, TriadCatalog, TriadIndex};
pub use params::{LabelSet, ModelFile, ModelParams, StructParams, TyingScheme};
