//! Tokenizer and s-expression reader with source positions.

use super::diag::{ParseDiagnostic, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtomKind {
    Ident,
    Int(i64),
    Var,
}

#[derive(Clone, Debug)]
pub enum Sexpr {
    Atom { text: String, kind: AtomKind, span: SourceSpan },
    List { items: Vec<Sexpr>, span: SourceSpan },
}

impl Sexpr {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Sexpr::Atom { span, .. } | Sexpr::List { span, .. } => span,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List { items, .. } => Some(items),
            Sexpr::Atom { .. } => None,
        }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match self {
            Sexpr::Atom { text, kind: AtomKind::Ident, .. } => Some(text),
            _ => None,
        }
    }

    /// Head identifier of a list, e.g. `action` in `(action ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(Sexpr::as_ident)
    }
}

struct Cursor<'a> {
    text: &'a str,
    file: Option<&'a str>,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.peek()?;
        self.pos += ch.len_utf8();
        if ch == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(ch)
    }

    fn span_from(&self, start: (usize, usize, usize)) -> SourceSpan {
        SourceSpan {
            file: self.file.map(str::to_string),
            line: start.1,
            column: start.2,
            offset: start.0,
            length: self.pos - start.0,
        }
    }

    fn mark(&self) -> (usize, usize, usize) {
        (self.pos, self.line, self.col)
    }

    fn skip_trivia(&mut self) {
        while let Some(ch) = self.peek() {
            if ch == ';' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if ch.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }
}

fn is_delim(ch: char) -> bool {
    ch.is_whitespace() || ch == '(' || ch == ')' || ch == ';'
}

fn classify(text: &str) -> Option<AtomKind> {
    if let Some(rest) = text.strip_prefix('?') {
        let mut chars = rest.chars();
        let first = chars.next()?;
        if (first.is_alphabetic() || first == '_') && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
            return Some(AtomKind::Var);
        }
        return None;
    }
    let digits = text.strip_prefix('-').unwrap_or(text);
    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
        return text.parse::<i64>().ok().map(AtomKind::Int);
    }
    let mut chars = text.chars();
    let first = chars.next()?;
    if (first.is_alphabetic() || first == '_') && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
        return Some(AtomKind::Ident);
    }
    None
}

/// Reads every top-level form of `text`.
pub fn read_all(text: &str, file: Option<&str>) -> Result<Vec<Sexpr>, Vec<ParseDiagnostic>> {
    let mut cur = Cursor { text, file, pos: 0, line: 1, col: 1 };
    let mut diags = Vec::new();
    // Stack of open lists: (start mark, items).
    let mut stack: Vec<((usize, usize, usize), Vec<Sexpr>)> = Vec::new();
    let mut top = Vec::new();

    loop {
        cur.skip_trivia();
        let start = cur.mark();
        let Some(ch) = cur.peek() else { break };
        match ch {
            '(' => {
                cur.bump();
                stack.push((start, Vec::new()));
            }
            ')' => {
                cur.bump();
                match stack.pop() {
                    Some((open, items)) => {
                        let node = Sexpr::List { items, span: cur.span_from(open) };
                        match stack.last_mut() {
                            Some((_, parent)) => parent.push(node),
                            None => top.push(node),
                        }
                    }
                    None => diags.push(ParseDiagnostic::error("unmatched `)`", cur.span_from(start))),
                }
            }
            _ => {
                while let Some(c) = cur.peek() {
                    if is_delim(c) {
                        break;
                    }
                    cur.bump();
                }
                let span = cur.span_from(start);
                let tok = &text[start.0..cur.pos];
                match classify(tok) {
                    Some(kind) => {
                        let node = Sexpr::Atom { text: tok.to_string(), kind, span };
                        match stack.last_mut() {
                            Some((_, parent)) => parent.push(node),
                            None => top.push(node),
                        }
                    }
                    None => diags.push(ParseDiagnostic::error(format!("invalid token `{tok}`"), span)),
                }
            }
        }
    }
    for (open, _) in stack.into_iter().rev() {
        let span = SourceSpan { file: file.map(str::to_string), line: open.1, column: open.2, offset: open.0, length: 1 };
        diags.push(ParseDiagnostic::error("unclosed `(`", span));
    }
    if diags.is_empty() {
        Ok(top)
    } else {
        Err(diags)
    }
}
