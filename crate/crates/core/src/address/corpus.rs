//! Dialogue and character files, and the per-dyad content vectors built
//! from them.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::lexicon::Lexicon;
use super::spans::{detect_address_spans, CharacterRecord, DialogueLine, NamePart, SpanCategory};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::graph::{EdgeContent, Network};

pub const DIALOGUE_HEADER: &str = "film_id\tspeaker_id\taddressee_id\ttext";
pub const CHARACTER_HEADER: &str = "film_id\tcharacter_id\tfirst_name\tlast_name";

#[derive(Debug, Clone, Default)]
pub struct CharacterTable {
    records: BTreeMap<(String, String), CharacterRecord>,
}

impl CharacterTable {
    pub fn insert(&mut self, rec: CharacterRecord) -> Result<()> {
        let key = (rec.network_id.clone(), rec.character_id.clone());
        if self.records.contains_key(&key) {
            return Err(Error::DuplicateCharacter(format!("{}/{}", key.0, key.1)));
        }
        self.records.insert(key, rec);
        Ok(())
    }

    pub fn get(&self, network: &str, character: &str) -> Option<&CharacterRecord> {
        self.records.get(&(network.to_string(), character.to_string()))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CharacterRecord> {
        self.records.values()
    }
}

fn data_lines<'a>(text: &'a str, header: &'a str) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim_end_matches('\r')))
        .filter(move |(n, l)| !(l.trim().is_empty() || l.starts_with('#') || (*n == 1 && *l == header)))
}

fn optional(field: &str) -> Option<&str> {
    let f = field.trim();
    (!f.is_empty()).then_some(f)
}

/// Tab-separated `film_id, character_id, first_name, last_name`; either name
/// may be empty but not both.
pub fn parse_characters(text: &str, path: &str) -> Result<CharacterTable> {
    let mut table = CharacterTable::default();
    for (line, row) in data_lines(text, CHARACTER_HEADER) {
        let parse_err = |reason: String| Error::Parse { path: path.into(), line, reason };
        let f: Vec<&str> = row.split('\t').collect();
        if f.len() != 4 {
            return Err(parse_err(format!("expected 4 tab-separated fields, found {}", f.len())));
        }
        let (film, id) = (f[0].trim(), f[1].trim());
        if film.is_empty() || id.is_empty() {
            return Err(parse_err("empty film or character id".into()));
        }
        let rec =
            CharacterRecord::new(film, id, optional(f[2]), optional(f[3])).map_err(|e| parse_err(e.to_string()))?;
        table.insert(rec)?;
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct DialogueCorpus {
    pub lines: Vec<DialogueLine>,
    pub skipped: Vec<SkippedLine>,
}

/// Tab-separated `film_id, speaker_id, addressee_id, text`. Lines whose
/// speaker or addressee has no character record are skipped and reported.
pub fn parse_dialogue(text: &str, path: &str, characters: &CharacterTable) -> Result<DialogueCorpus> {
    let mut out = DialogueCorpus::default();
    let mut turns: BTreeMap<String, usize> = BTreeMap::new();
    for (line, row) in data_lines(text, DIALOGUE_HEADER) {
        let parse_err = |reason: String| Error::Parse { path: path.into(), line, reason };
        let f: Vec<&str> = row.splitn(4, '\t').collect();
        if f.len() != 4 {
            return Err(parse_err(format!("expected 4 tab-separated fields, found {}", f.len())));
        }
        let (film, speaker, addressee) = (f[0].trim(), f[1].trim(), f[2].trim());
        if film.is_empty() || speaker.is_empty() || addressee.is_empty() {
            return Err(parse_err("empty film, speaker or addressee id".into()));
        }
        for (role, id) in [("speaker", speaker), ("addressee", addressee)] {
            if characters.get(film, id).is_none() {
                out.skipped.push(SkippedLine { line, reason: format!("unknown {} `{}` in film `{}`", role, id, film) });
            }
        }
        if out.skipped.last().is_some_and(|s| s.line == line) {
            continue;
        }
        let turn = turns.entry(film.to_string()).or_default();
        let dl = DialogueLine::new(film, speaker, addressee, f[3], *turn).map_err(|e| parse_err(e.to_string()))?;
        *turn += 1;
        out.lines.push(dl);
    }
    if out.lines.is_empty() {
        return Err(Error::EmptyCorpus("no dialogue lines".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VocabPolicy {
    /// Symbols with fewer total occurrences are dropped.
    pub min_count: u64,
    /// Also list every symbol the lexicon and name rules could produce.
    pub include_lexicon: bool,
}

impl Default for VocabPolicy {
    fn default() -> Self {
        VocabPolicy { min_count: 1, include_lexicon: false }
    }
}

#[derive(Debug, Clone)]
pub struct ContentBuild {
    pub corpus: Corpus,
    pub num_spans: usize,
    /// Address tokens removed by the vocabulary policy.
    pub dropped_tokens: u64,
}

fn lexicon_symbols(lexicon: &Lexicon) -> Vec<String> {
    let mut v: Vec<String> =
        [NamePart::First, NamePart::Last, NamePart::Full].into_iter().map(|p| SpanCategory::Name(p).symbol()).collect();
    for (t, _) in lexicon.titles() {
        v.push(SpanCategory::TitleName(t.into()).symbol());
        v.push(SpanCategory::TitleAlone(t.into()).symbol());
    }
    for (t, _) in lexicon.placeholders() {
        v.push(SpanCategory::Placeholder(t.into()).symbol());
    }
    v
}

/// One network per film. Nodes are the characters who speak or are
/// addressed; every dyad that exchanges a line becomes an edge, with the
/// address symbols from `i` to `j` (in line order) as forward content.
pub fn build_content_vectors(
    dialogue: &DialogueCorpus,
    characters: &CharacterTable,
    lexicon: &Lexicon,
    policy: VocabPolicy,
) -> Result<ContentBuild> {
    let symbols: Vec<Vec<String>> = dialogue
        .lines
        .par_iter()
        .map(|l| match characters.get(&l.network_id, &l.addressee_id) {
            Some(rec) => detect_address_spans(l, rec, lexicon).iter().map(|s| s.symbol()).collect(),
            None => Vec::new(),
        })
        .collect();
    let num_spans = symbols.iter().map(Vec::len).sum();

    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    for s in symbols.iter().flatten() {
        *totals.entry(s).or_default() += 1;
    }
    let mut vocab: BTreeSet<String> =
        totals.iter().filter(|(_, c)| **c >= policy.min_count).map(|(s, _)| s.to_string()).collect();
    if policy.include_lexicon {
        vocab.extend(lexicon_symbols(lexicon));
    }
    let vocab: Vec<String> = vocab.into_iter().collect();
    let ids: BTreeMap<&str, u32> = vocab.iter().enumerate().map(|(i, s)| (s.as_str(), i as u32)).collect();

    // film -> (speaker, addressee) -> symbol ids
    let mut films: BTreeMap<&str, BTreeMap<(&str, &str), Vec<u32>>> = BTreeMap::new();
    let mut dropped_tokens = 0;
    for (line, syms) in dialogue.lines.iter().zip(&symbols) {
        let seq = films
            .entry(line.network_id.as_str())
            .or_default()
            .entry((line.speaker_id.as_str(), line.addressee_id.as_str()))
            .or_default();
        for s in syms {
            match ids.get(s.as_str()) {
                Some(&id) => seq.push(id),
                None => dropped_tokens += 1,
            }
        }
    }

    let mut networks = Vec::with_capacity(films.len());
    for (film, dyads) in &films {
        let nodes: BTreeSet<&str> = dyads.keys().flat_map(|(a, b)| [*a, *b]).collect();
        let nodes: Vec<String> = nodes.into_iter().map(String::from).collect();
        let index = |id: &str| nodes.binary_search_by(|n| n.as_str().cmp(id)).expect("node present");
        let mut edges: BTreeMap<(usize, usize), EdgeContent> = BTreeMap::new();
        for ((a, b), seq) in dyads {
            let (ia, ib) = (index(a), index(b));
            let c = edges.entry((ia.min(ib), ia.max(ib))).or_default();
            if ia < ib {
                c.fwd.extend(seq);
            } else {
                c.bwd.extend(seq);
            }
        }
        let parts = edges.into_iter().map(|((i, j), c)| (i, j, c)).collect();
        networks.push(Network::from_parts(*film, nodes, parts, vocab.len())?);
    }
    Ok(ContentBuild { corpus: Corpus::new(vocab, networks)?, num_spans, dropped_tokens })
}
