//! Candidate address terms by a one-sided binomial test.

use std::collections::BTreeMap;

use super::corpus::{CharacterTable, DialogueCorpus};
use super::lexicon::Lexicon;
use super::spans::{detect_address_spans, is_vocative};
use super::tokenize::{fold, is_punct};
use crate::error::{Error, Result};

/// `P(K >= k)` for `K ~ Binomial(n, p)`, summed term by term.
pub fn binomial_upper_tail(n: u64, k: u64, p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "probability out of range");
    if k == 0 {
        return 1.0;
    }
    if k > n || p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    // ln C(n, j) built up incrementally from j = 0
    let mut ln_c = 0.0;
    let mut terms = Vec::with_capacity((n - k + 1) as usize);
    for j in 0..=n {
        if j >= k {
            terms.push((ln_c + j as f64 * lp + (n - j) as f64 * lq).exp());
        }
        ln_c += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
    }
    // smallest terms first
    terms.sort_by(|a, b| a.total_cmp(b));
    terms.iter().sum::<f64>().min(1.0)
}

/// Which token positions count as address slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    /// The token immediately before an addressee-name match; finds titles.
    PreName,
    /// A lone token in vocative position outside any name; finds
    /// placeholder names.
    Vocative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselinePolicy {
    /// Fraction of all counted positions that are slots.
    CorpusWide,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub term: String,
    /// Occurrences of the term.
    pub n: u64,
    /// Occurrences in an address slot.
    pub k: u64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub baseline: f64,
    /// Terms with `p < alpha`, ascending by p-value, then by term.
    pub candidates: Vec<Candidate>,
}

/// Tests every word type for over-representation in address slots.
/// Terms already in `known` are left out of the output.
pub fn bootstrap_lexicon(
    corpus: &DialogueCorpus,
    characters: &CharacterTable,
    slot: SlotKind,
    baseline: BaselinePolicy,
    alpha: f64,
    known: &Lexicon,
) -> Result<BootstrapResult> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidConfig(format!("alpha {} outside [0, 1]", alpha)));
    }
    let empty = Lexicon::default();
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for line in &corpus.lines {
        let Some(addressee) = characters.get(&line.network_id, &line.addressee_id) else {
            continue;
        };
        let names = detect_address_spans(line, addressee, &empty);
        let toks = &line.tokens;
        let mut in_name = vec![false; toks.len()];
        let mut pre_name = vec![false; toks.len()];
        for s in &names {
            in_name[s.start..s.end].iter_mut().for_each(|b| *b = true);
            if s.start > 0 {
                pre_name[s.start - 1] = true;
            }
        }
        for (i, t) in toks.iter().enumerate() {
            if in_name[i] || is_punct(t) {
                continue;
            }
            let w = fold(t);
            if w.is_empty() || !w.chars().all(|c| c.is_alphabetic() || c == '\'' || c == '-') {
                continue;
            }
            let hit = match slot {
                SlotKind::PreName => pre_name[i],
                SlotKind::Vocative => is_vocative(toks, i),
            };
            let e = counts.entry(w).or_default();
            e.0 += 1;
            e.1 += hit as u64;
        }
    }
    let p0 = match baseline {
        BaselinePolicy::Fixed(p) if (0.0..=1.0).contains(&p) => p,
        BaselinePolicy::Fixed(p) => return Err(Error::InvalidConfig(format!("baseline rate {} outside [0, 1]", p))),
        BaselinePolicy::CorpusWide => {
            let (n, k) = counts.values().fold((0, 0), |(a, b), (n, k)| (a + n, b + k));
            if n == 0 {
                0.0
            } else {
                k as f64 / n as f64
            }
        }
    };
    let mut candidates: Vec<Candidate> = counts
        .into_iter()
        .filter(|(w, (n, _))| *n > 0 && !known.is_title(w) && !known.is_placeholder(w))
        .map(|(term, (n, k))| Candidate { p_value: binomial_upper_tail(n, k, p0), term, n, k })
        .filter(|c| c.p_value < alpha)
        .collect();
    candidates.sort_by(|a, b| a.p_value.total_cmp(&b.p_value).then_with(|| a.term.cmp(&b.term)));
    Ok(BootstrapResult { baseline: p0, candidates })
}
