//! Words over symbolic alphabets and their compact textual form.
//!
//! A word whose symbols are all single characters renders as the plain
//! concatenation (`101`); otherwise symbols are joined with commas
//! (`req,ack`), with a trailing comma for a lone multi-character symbol
//! (`req,`). [`parse_word`] inverts [`render_word`].

use std::fmt;

/// A sequence of symbols.
pub type Word = Vec<String>;

/// Renders a word in its compact form.
pub fn render_word<S: AsRef<str>>(word: &[S]) -> String {
    if word.iter().all(|s| s.as_ref().chars().count() == 1) {
        word.iter().map(|s| s.as_ref()).collect()
    } else if word.len() == 1 {
        format!("{},", word[0].as_ref())
    } else {
        word.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(",")
    }
}

/// Parses the compact form produced by [`render_word`].
pub fn parse_word(text: &str) -> Word {
    if text.is_empty() {
        Vec::new()
    } else if text.contains(',') {
        let body = text.strip_suffix(',').unwrap_or(text);
        body.split(',').map(str::to_owned).collect()
    } else {
        text.chars().map(|c| c.to_string()).collect()
    }
}

/// Convenience constructor used heavily in tests: `word("101")`.
pub fn word(text: &str) -> Word {
    parse_word(text)
}

/// Display adapter for a word.
pub struct DisplayWord<'a>(pub &'a [String]);

impl fmt::Display for DisplayWord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_word(self.0))
    }
}
