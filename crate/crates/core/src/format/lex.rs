use super::{DiagKind, Diagnostic, Loc};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tok {
    pub text: String,
    pub col: usize,
    pub quoted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Line {
    pub no: usize,
    pub toks: Vec<Tok>,
}

/// Splits text into lines of whitespace-separated tokens. `#` starts a
/// comment outside quotes; `"…"` is one token with `\"` and `\\` escapes.
pub(crate) fn tokenize(text: &str, file: &str) -> Result<Vec<Line>, Vec<Diagnostic>> {
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let mut toks = Vec::new();
        let chars: Vec<(usize, char)> = raw.char_indices().collect();
        let mut k = 0;
        while k < chars.len() {
            let (_, c) = chars[k];
            let col = k + 1;
            if c.is_whitespace() {
                k += 1;
            } else if c == '#' {
                break;
            } else if c == '"' {
                let mut s = String::new();
                k += 1;
                let mut closed = false;
                while k < chars.len() {
                    match chars[k].1 {
                        '"' => {
                            closed = true;
                            k += 1;
                            break;
                        }
                        '\\' if k + 1 < chars.len() => {
                            s.push(chars[k + 1].1);
                            k += 2;
                        }
                        other => {
                            s.push(other);
                            k += 1;
                        }
                    }
                }
                if !closed {
                    errors.push(Diagnostic::new(
                        DiagKind::Lexical,
                        Loc::new(file, no, col),
                        "unterminated string",
                    ));
                }
                toks.push(Tok {
                    text: s,
                    col,
                    quoted: true,
                });
            } else {
                let start = k;
                while k < chars.len() && !chars[k].1.is_whitespace() && chars[k].1 != '#' && chars[k].1 != '"' {
                    k += 1;
                }
                toks.push(Tok {
                    text: chars[start..k].iter().map(|(_, c)| c).collect(),
                    col,
                    quoted: false,
                });
            }
        }
        if !toks.is_empty() {
            lines.push(Line { no, toks });
        }
    }
    if errors.is_empty() {
        Ok(lines)
    } else {
        Err(errors)
    }
}

/// Renders a token so that [`tokenize`] reads it back unchanged.
pub(crate) fn quote_if_needed(s: &str) -> String {
    let plain = !s.is_empty()
        && !s.contains(|c: char| c.is_whitespace() || c == '#' || c == '"' || c == '\\')
        && s != "{"
        && s != "}";
    if plain {
        s.to_owned()
    } else {
        let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
        format!("\"{escaped}\"")
    }
}
