//! Whitespace and punctuation tokenization for dialogue lines.

/// Abbreviations whose trailing period stays attached to the word.
pub const ABBREVIATIONS: &[&str] =
    &["capt", "col", "dr", "gen", "jr", "lt", "messrs", "mr", "mrs", "ms", "prof", "rev", "sgt", "sr", "st"];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '-'
}

/// Splits on whitespace, then separates runs of punctuation into their own
/// tokens. Apostrophes and hyphens belong to words; a period directly after
/// a known abbreviation stays on the abbreviation.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let word = is_word_char(chars[i]);
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) == word {
                i += 1;
            }
            let mut tok: String = chars[start..i].iter().collect();
            if word && i < chars.len() && chars[i] == '.' && ABBREVIATIONS.contains(&tok.to_lowercase().as_str()) {
                tok.push('.');
                i += 1;
            }
            out.push(tok);
        }
    }
    out
}

/// Case-folded form with surrounding periods removed, used for lexicon lookup.
pub fn fold(token: &str) -> String {
    token.trim_matches('.').to_lowercase()
}

/// Case-folded form keeping only alphanumerics, used for name matching.
pub fn fold_name(token: &str) -> String {
    token.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

/// A token made only of punctuation.
pub fn is_punct(token: &str) -> bool {
    !token.is_empty() && !token.chars().any(is_word_char)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pre_tokenized_text_is_stable() {
        let t = tokenize("I 'm not Mr. Lebowski ; you 're Mr. Lebowski .");
        assert_eq!(t, ["I", "'m", "not", "Mr.", "Lebowski", ";", "you", "'re", "Mr.", "Lebowski", "."]);
    }

    #[test]
    fn splits_attached_punctuation() {
        assert_eq!(tokenize("Calm down, dude!"), ["Calm", "down", ",", "dude", "!"]);
        assert_eq!(tokenize("Well...okay?!"), ["Well", "...", "okay", "?!"]);
        assert_eq!(tokenize("Don't, Dr.Jones."), ["Don't", ",", "Dr.", "Jones", "."]);
    }

    #[test]
    fn folding() {
        assert_eq!(fold("Mr."), "mr");
        assert_eq!(fold_name("Lebowski"), "lebowski");
        assert!(is_punct(";"));
        assert!(!is_punct("'m"));
    }
}
