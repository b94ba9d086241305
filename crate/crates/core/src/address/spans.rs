//! Pattern-based address span detection with BILOU tags.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::lexicon::Lexicon;
use super::tokenize::{fold, fold_name, is_punct, tokenize};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueLine {
    pub network_id: String,
    pub speaker_id: String,
    pub addressee_id: String,
    pub tokens: Vec<String>,
    /// Position of the line within its network, in file order.
    pub turn: usize,
}

impl DialogueLine {
    pub fn new(network_id: &str, speaker_id: &str, addressee_id: &str, text: &str, turn: usize) -> Result<Self> {
        if speaker_id == addressee_id {
            return Err(Error::InvalidConfig(format!("speaker `{}` addresses themself", speaker_id)));
        }
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(Error::InvalidConfig("dialogue line has no tokens".into()));
        }
        Ok(DialogueLine {
            network_id: network_id.into(),
            speaker_id: speaker_id.into(),
            addressee_id: addressee_id.into(),
            tokens,
            turn,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Name {
    pub surface: String,
    /// Folded word tokens of the name.
    pub folded: Vec<String>,
}

impl Name {
    fn parse(surface: &str) -> Option<Self> {
        let folded: Vec<String> =
            tokenize(surface).iter().filter(|t| !is_punct(t)).map(|t| fold_name(t)).filter(|t| !t.is_empty()).collect();
        (!folded.is_empty()).then(|| Name { surface: surface.trim().to_string(), folded })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterRecord {
    pub network_id: String,
    pub character_id: String,
    pub first_name: Option<Name>,
    pub last_name: Option<Name>,
}

impl CharacterRecord {
    pub fn new(network_id: &str, character_id: &str, first: Option<&str>, last: Option<&str>) -> Result<Self> {
        let first_name = first.and_then(Name::parse);
        let last_name = last.and_then(Name::parse);
        if first_name.is_none() && last_name.is_none() {
            return Err(Error::InvalidConfig(format!("character `{}` has no name", character_id)));
        }
        Ok(CharacterRecord { network_id: network_id.into(), character_id: character_id.into(), first_name, last_name })
    }

    /// Name variants to try at a position, longest first.
    fn variants(&self) -> Vec<(NamePart, Vec<&str>)> {
        let mut v: Vec<(NamePart, Vec<&str>)> = Vec::new();
        if let (Some(f), Some(l)) = (&self.first_name, &self.last_name) {
            v.push((NamePart::Full, f.folded.iter().chain(&l.folded).map(String::as_str).collect()));
        }
        if let Some(f) = &self.first_name {
            v.push((NamePart::First, f.folded.iter().map(String::as_str).collect()));
        }
        if let Some(l) = &self.last_name {
            v.push((NamePart::Last, l.folded.iter().map(String::as_str).collect()));
        }
        v.sort_by_key(|(_, t)| std::cmp::Reverse(t.len()));
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NamePart {
    First,
    Last,
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpanCategory {
    Name(NamePart),
    TitleName(String),
    TitleAlone(String),
    Placeholder(String),
}

impl SpanCategory {
    /// Role-normalized vocabulary symbol.
    pub fn symbol(&self) -> String {
        match self {
            SpanCategory::Name(NamePart::First) => "firstName".into(),
            SpanCategory::Name(NamePart::Last) => "lastName".into(),
            SpanCategory::Name(NamePart::Full) => "fullName".into(),
            SpanCategory::TitleName(t) => format!("title+name:{}", t),
            SpanCategory::TitleAlone(t) => format!("title:{}", t),
            SpanCategory::Placeholder(t) => format!("placeholder:{}", t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    B,
    I,
    L,
    O,
    U,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::B => "B-ADDR",
            Tag::I => "I-ADDR",
            Tag::L => "L-ADDR",
            Tag::O => "O",
            Tag::U => "U-ADDR",
        })
    }
}

fn span_tags(len: usize) -> Vec<Tag> {
    match len {
        0 => Vec::new(),
        1 => vec![Tag::U],
        n => std::iter::once(Tag::B).chain(std::iter::repeat_n(Tag::I, n - 2)).chain([Tag::L]).collect(),
    }
}

/// I and L only continue an open B/I; U and B only start outside a span;
/// sequences end closed.
pub fn valid_bilou(tags: &[Tag]) -> bool {
    let mut open = false;
    for t in tags {
        match (open, t) {
            (false, Tag::O | Tag::U) => {}
            (false, Tag::B) => open = true,
            (true, Tag::I) => {}
            (true, Tag::L) => open = false,
            _ => return false,
        }
    }
    !open
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddressSpan {
    pub turn: usize,
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub tags: Vec<Tag>,
    pub category: SpanCategory,
}

impl AddressSpan {
    fn new(turn: usize, start: usize, end: usize, category: SpanCategory) -> Self {
        AddressSpan { turn, start, end, tags: span_tags(end - start), category }
    }

    pub fn symbol(&self) -> String {
        self.category.symbol()
    }
}

/// Tags for every token of a line given its spans.
pub fn line_tags(num_tokens: usize, spans: &[AddressSpan]) -> Vec<Tag> {
    let mut tags = vec![Tag::O; num_tokens];
    for s in spans {
        tags[s.start..s.end].copy_from_slice(&s.tags);
    }
    tags
}

fn name_match(tokens: &[String], at: usize, addressee: &CharacterRecord) -> Option<(NamePart, usize)> {
    addressee.variants().into_iter().find_map(|(part, name)| {
        let end = at + name.len();
        (end <= tokens.len() && tokens[at..end].iter().zip(&name).all(|(t, n)| fold_name(t) == *n))
            .then_some((part, name.len()))
    })
}

/// Delimited on both sides by punctuation or the edge of the turn.
pub fn is_vocative(tokens: &[String], i: usize) -> bool {
    let before = i == 0 || is_punct(&tokens[i - 1]);
    let after = i + 1 == tokens.len() || is_punct(&tokens[i + 1]);
    before && after && !is_punct(&tokens[i])
}

/// Address spans in one line, left to right and non-overlapping: the
/// addressee's name (full name preferred), a title directly before such a
/// name, and titles or placeholders standing alone in vocative position.
/// A vocative term listed in both lexicons counts as a title.
pub fn detect_address_spans(line: &DialogueLine, addressee: &CharacterRecord, lexicon: &Lexicon) -> Vec<AddressSpan> {
    let toks = &line.tokens;
    let mut spans = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let w = fold(&toks[i]);
        if lexicon.is_title(&w) && i + 1 < toks.len() {
            if let Some((_, len)) = name_match(toks, i + 1, addressee) {
                spans.push(AddressSpan::new(line.turn, i, i + 1 + len, SpanCategory::TitleName(w)));
                i += 1 + len;
                continue;
            }
        }
        if let Some((part, len)) = name_match(toks, i, addressee) {
            spans.push(AddressSpan::new(line.turn, i, i + len, SpanCategory::Name(part)));
            i += len;
            continue;
        }
        if is_vocative(toks, i) {
            let cat = if lexicon.is_title(&w) {
                Some(SpanCategory::TitleAlone(w))
            } else if lexicon.is_placeholder(&w) {
                Some(SpanCategory::Placeholder(w))
            } else {
                None
            };
            if let Some(cat) = cat {
                spans.push(AddressSpan::new(line.turn, i, i + 1, cat));
            }
        }
        i += 1;
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lebowski() -> CharacterRecord {
        CharacterRecord::new("f", "dude", Some("Jeffrey"), Some("Lebowski")).unwrap()
    }

    fn line(text: &str) -> DialogueLine {
        DialogueLine::new("f", "walter", "dude", text, 0).unwrap()
    }

    #[test]
    fn figure_sentence() {
        let l = line("I 'm not Mr. Lebowski ; you 're Mr. Lebowski .");
        let spans = detect_address_spans(&l, &lebowski(), &Lexicon::curated());
        assert_eq!(spans.len(), 2);
        for (s, start) in spans.iter().zip([3, 8]) {
            assert_eq!((s.start, s.end), (start, start + 2));
            assert_eq!(s.tags, [Tag::B, Tag::L]);
            assert_eq!(s.symbol(), "title+name:mr");
        }
        let tags: Vec<String> = line_tags(l.tokens.len(), &spans).iter().map(Tag::to_string).collect();
        assert_eq!(tags, ["O", "O", "O", "B-ADDR", "L-ADDR", "O", "O", "O", "B-ADDR", "L-ADDR", "O"]);
    }

    #[test]
    fn placeholder_unit_span() {
        let l = line("I 'm perfectly calm , dude .");
        let spans = detect_address_spans(&l, &lebowski(), &Lexicon::curated());
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].start, spans[0].tags.as_slice()), (5, [Tag::U].as_slice()));
        assert_eq!(spans[0].category, SpanCategory::Placeholder("dude".into()));
    }

    #[test]
    fn nothing_to_find() {
        let l = line("The rug really tied the room together .");
        assert!(detect_address_spans(&l, &lebowski(), &Lexicon::curated()).is_empty());
    }

    #[test]
    fn name_variants() {
        let lex = Lexicon::curated();
        let s = detect_address_spans(&line("Jeffrey Lebowski , sit down"), &lebowski(), &lex);
        assert_eq!(s[0].category, SpanCategory::Name(NamePart::Full));
        assert_eq!(s[0].tags, [Tag::B, Tag::L]);
        let s = detect_address_spans(&line("Hey jeffrey!"), &lebowski(), &lex);
        assert_eq!(s[0].symbol(), "firstName");
        let s = detect_address_spans(&line("Thank you, sir."), &lebowski(), &lex);
        assert_eq!(s[0].symbol(), "placeholder:sir");
        let s = detect_address_spans(&line("Yes, mister."), &lebowski(), &lex);
        assert_eq!(s[0].symbol(), "title:mister");
        // not vocative: "man" inside a clause
        assert!(detect_address_spans(&line("that man is here"), &lebowski(), &lex).is_empty());
    }

    #[test]
    fn bilou_validity() {
        assert!(valid_bilou(&[Tag::O, Tag::B, Tag::I, Tag::L, Tag::U]));
        assert!(!valid_bilou(&[Tag::I]));
        assert!(!valid_bilou(&[Tag::B, Tag::O]));
        assert!(!valid_bilou(&[Tag::B]));
        assert!(!valid_bilou(&[Tag::L]));
    }

    #[test]
    fn line_invariants() {
        assert!(DialogueLine::new("f", "a", "a", "hi", 0).is_err());
        assert!(DialogueLine::new("f", "a", "b", "   ", 0).is_err());
        assert!(CharacterRecord::new("f", "a", None, Some("")).is_err());
    }
}
