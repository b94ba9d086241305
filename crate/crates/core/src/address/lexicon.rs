//! Title and placeholder-name lexicons.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

const CURATED_TITLES: &str = include_str!("../../data/titles.txt");
const CURATED_PLACEHOLDERS: &str = include_str!("../../data/placeholders.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Curated,
    Bootstrapped,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Curated => "curated",
            Provenance::Bootstrapped => "bootstrapped",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Title,
    Placeholder,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    titles: BTreeMap<String, Provenance>,
    placeholders: BTreeMap<String, Provenance>,
}

/// Reads one case-folded term per line. `#` starts a comment; a header
/// comment of the form `# provenance: curated|bootstrapped` sets the tag
/// for the terms that follow.
pub fn parse_term_list(text: &str, path: &str) -> Result<Vec<(String, Provenance)>> {
    let mut provenance = Provenance::Curated;
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(tag) = comment.trim().strip_prefix("provenance:") {
                provenance = match tag.trim() {
                    "curated" => Provenance::Curated,
                    "bootstrapped" => Provenance::Bootstrapped,
                    other => {
                        return Err(Error::Parse {
                            path: path.into(),
                            line: n + 1,
                            reason: format!("unknown provenance `{}`", other),
                        })
                    }
                };
            }
            continue;
        }
        let term = line.split('#').next().unwrap_or("").trim();
        if term.is_empty() {
            continue;
        }
        if term.chars().any(char::is_whitespace) || term != term.to_lowercase() {
            return Err(Error::Parse {
                path: path.into(),
                line: n + 1,
                reason: format!("term `{}` must be a single case-folded word", term),
            });
        }
        out.push((term.to_string(), provenance));
    }
    Ok(out)
}

/// Text of a bundled list, in the format read by [`parse_term_list`].
pub fn curated_list(kind: TermKind) -> &'static str {
    match kind {
        TermKind::Title => CURATED_TITLES,
        TermKind::Placeholder => CURATED_PLACEHOLDERS,
    }
}

impl Lexicon {
    /// The hand-filtered lists shipped with the crate.
    pub fn curated() -> Self {
        Lexicon::from_lists(CURATED_TITLES, CURATED_PLACEHOLDERS).expect("bundled lexicons parse")
    }

    pub fn from_lists(titles: &str, placeholders: &str) -> Result<Self> {
        let mut lex = Lexicon::default();
        for (t, p) in parse_term_list(titles, "titles")? {
            lex.titles.insert(t, p);
        }
        for (t, p) in parse_term_list(placeholders, "placeholders")? {
            lex.placeholders.insert(t, p);
        }
        Ok(lex)
    }

    pub fn insert(&mut self, kind: TermKind, term: &str, provenance: Provenance) -> Result<()> {
        let term = term.trim().to_lowercase();
        if term.is_empty() {
            return Err(Error::InvalidConfig("empty lexicon term".into()));
        }
        match kind {
            TermKind::Title => self.titles.insert(term, provenance),
            TermKind::Placeholder => self.placeholders.insert(term, provenance),
        };
        Ok(())
    }

    pub fn is_title(&self, folded: &str) -> bool {
        self.titles.contains_key(folded)
    }

    pub fn is_placeholder(&self, folded: &str) -> bool {
        self.placeholders.contains_key(folded)
    }

    pub fn titles(&self) -> impl Iterator<Item = (&str, Provenance)> {
        self.titles.iter().map(|(t, p)| (t.as_str(), *p))
    }

    pub fn placeholders(&self) -> impl Iterator<Item = (&str, Provenance)> {
        self.placeholders.iter().map(|(t, p)| (t.as_str(), *p))
    }

    /// Terms listed both as titles and as placeholders (legal, but flagged).
    pub fn overlap(&self) -> Vec<&str> {
        self.titles.keys().filter(|t| self.placeholders.contains_key(*t)).map(String::as_str).collect()
    }

    /// Serializes one list in the format read by [`parse_term_list`]. Terms
    /// are grouped under a provenance header.
    pub fn render(&self, kind: TermKind) -> String {
        let map = match kind {
            TermKind::Title => &self.titles,
            TermKind::Placeholder => &self.placeholders,
        };
        let mut s = String::new();
        for prov in [Provenance::Curated, Provenance::Bootstrapped] {
            let terms: Vec<&String> = map.iter().filter(|(_, p)| **p == prov).map(|(t, _)| t).collect();
            if terms.is_empty() {
                continue;
            }
            s.push_str(&format!("# provenance: {}\n", prov));
            for t in terms {
                s.push_str(t);
                s.push('\n');
            }
        }
        s
    }
}
