use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "signet", version, about = "Induce formal/informal edge labels in dialogue networks")]
pub struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Where to write the run manifest (defaults next to the main output).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Turn dialogue and character files into a networks file.
    Ingest(IngestArgs),
    /// Fit the model with EM and write model, beliefs and trace.
    Train(TrainArgs),
    /// Held-out predictive likelihood of the full model and its ablations.
    Eval(EvalArgs),
    /// Most distinctive address terms per cluster.
    Rank(RankArgs),
    /// DOT graphs, edge beliefs and triad weights for a trained model.
    Export(ExportArgs),
    /// Propose new titles or placeholder names by a binomial test.
    Lexicon(LexiconArgs),
    /// Write a synthetic corpus drawn from the model, with its true labels.
    Simulate(SimulateArgs),
    /// Re-run a recorded command and check its outputs are unchanged.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct LexiconFiles {
    /// Title list (default: bundled curated list).
    #[arg(long)]
    pub titles: Option<PathBuf>,
    /// Placeholder-name list (default: bundled curated list).
    #[arg(long)]
    pub placeholders: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// Dialogue lines: film_id, speaker_id, addressee_id, text (tab-separated).
    #[arg(long)]
    pub dialogue: PathBuf,
    /// Characters: film_id, character_id, first_name, last_name (tab-separated).
    #[arg(long)]
    pub characters: PathBuf,
    #[command(flatten)]
    pub lexicon: LexiconFiles,
    /// Drop address symbols seen fewer times than this.
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Put every symbol the lexicons can produce in the vocabulary.
    #[arg(long)]
    pub include_lexicon: bool,
    /// Networks file to write.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblateArg {
    /// Drop the dyad feature weights.
    MutualFriends,
    /// Drop the triad weights.
    Triads,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TyingArg {
    Symmetric,
    Directed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureArg {
    AdamicAdar,
    MutualFriends,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainOptions {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random restarts; the one with the best bound is kept.
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Relative bound change that ends EM.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Additive smoothing of the content multinomials.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Parameter groups to freeze at zero; may be repeated.
    #[arg(long, value_enum)]
    pub ablate: Vec<AblateArg>,
    #[arg(long, value_enum, default_value = "symmetric")]
    pub tying: TyingArg,
    /// Dyad feature template.
    #[arg(long, value_enum, default_value = "adamic-adar")]
    pub feature: FeatureArg,
    /// Ridge penalty on structural weights during NCE.
    #[arg(long, default_value_t = 1.0)]
    pub ridge: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Networks file from `ingest`.
    pub networks: PathBuf,
    /// Model file to write.
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub train: TrainOptions,
    /// Edge beliefs table to write.
    #[arg(long)]
    pub beliefs: Option<PathBuf>,
    /// EM trace table to write.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Include wall-clock times in the trace (makes it nondeterministic).
    #[arg(long)]
    pub trace_timing: bool,
    /// True labels (from `simulate`) to score the induced labels against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Terms whose mass marks a cluster as formal.
    #[arg(long, value_delimiter = ',', default_value = "sir,mr")]
    pub formal_seeds: Vec<String>,
    /// Terms whose mass marks a cluster as informal.
    #[arg(long, value_delimiter = ',', default_value = "man,baby")]
    pub informal_seeds: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Full,
    MutualFriends,
    TextOnly,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    pub networks: PathBuf,
    /// Ablation table to write.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Fraction of networks held out from training.
    #[arg(long, default_value_t = 0.1)]
    pub holdout_frac: f64,
    /// Fraction of each directed token stream used to infer beliefs.
    #[arg(long, default_value_t = 0.5)]
    pub split_frac: f64,
    /// Models to compare.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "full,mutual-friends,text-only")]
    pub models: Vec<ModelArg>,
    /// Per-network likelihoods to write.
    #[arg(long)]
    pub per_network: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainOptions,
}

#[derive(Debug, Args, Serialize)]
pub struct RankArgs {
    pub model: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Ranking table to write (default: stdout).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportArgs {
    pub model: PathBuf,
    pub networks: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Edges whose top belief is below this are drawn as uncertain.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Only export these networks (repeatable; default all).
    #[arg(long)]
    pub network: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotArg {
    /// Token right before the addressee's name; proposes titles.
    PreName,
    /// Lone token between punctuation; proposes placeholder names.
    Vocative,
}

#[derive(Debug, Args, Serialize)]
pub struct LexiconArgs {
    #[arg(long)]
    pub dialogue: PathBuf,
    #[arg(long)]
    pub characters: PathBuf,
    #[command(flatten)]
    pub lexicon: LexiconFiles,
    #[arg(long, value_enum, default_value = "vocative")]
    pub slot: SlotArg,
    /// Significance level of the one-sided test.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// Fixed slot rate under the null (default: corpus-wide rate).
    #[arg(long)]
    pub baseline: Option<f64>,
    /// Accept every candidate without prompting.
    #[arg(long)]
    pub accept_all: bool,
    /// Accept this candidate without prompting (repeatable).
    #[arg(long)]
    pub accept: Vec<String>,
    /// Do not prompt; only `--accept` terms are added.
    #[arg(long)]
    pub no_prompt: bool,
    /// Candidate table to write.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    /// Lexicon file to write: the existing list plus accepted terms.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 200)]
    pub networks: usize,
    #[arg(long, default_value_t = 10)]
    pub nodes: usize,
    #[arg(long, default_value_t = 20)]
    pub edges: usize,
    /// Weight of the all-informal and all-formal triads.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub beta_hom: f64,
    /// Weight of the mixed triads.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub beta_het: f64,
    /// Adamic-Adar weight of the informal label.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eta: f64,
    /// Address-term vocabulary size.
    #[arg(long, default_value_t = 20)]
    pub vocab: usize,
    /// Terms favoured by each label.
    #[arg(long, default_value_t = 5)]
    pub block: usize,
    /// Probability mass a label puts on its own block.
    #[arg(long, default_value_t = 0.8)]
    pub top_mass: f64,
    /// Mean address terms per dyad (both directions).
    #[arg(long, default_value_t = 20.0)]
    pub tokens_per_dyad: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for dialogue.tsv, characters.tsv and truth.tsv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest_file: PathBuf,
}
