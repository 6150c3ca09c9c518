//! Token scanner shared by the four line-oriented facet sublanguages.

use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Word(String),
    ChildRef(usize),
    Str(String),
    Num(u32),
    Punct(&'static str),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::ChildRef(i) => format!("`${i}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Num(n) => format!("number {n}"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::End => "end of line".to_string(),
        }
    }
}

// Longest spellings first so that `->` wins over `-`.
const PUNCT: &[&str] = &[
    "->", "<-", "=>", "|-", ":", "=", "[", "]", ",", "{", "}", "(", ")",
];

/// Scans one line of facet text into tokens with 1-based columns.
pub(crate) fn scan_line(line: &str, line_no: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Word(chars[start..i].iter().collect()), col));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse().map_err(|_| ParseError::new(line_no, col, &["number < 2^32"], text.clone()))?;
            out.push((Tok::Num(n), col));
            continue;
        }
        if c == '$' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i == start {
                let found = chars.get(start).map(|c| c.to_string()).unwrap_or_else(|| "end of line".into());
                return Err(ParseError::new(line_no, col + 1, &["child index"], found));
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse().map_err(|_| ParseError::new(line_no, col, &["child index"], text.clone()))?;
            out.push((Tok::ChildRef(n), col));
            continue;
        }
        if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(ParseError::new(line_no, i + 1, &["`\"`"], "end of line".into())),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some(&e @ ('"' | '\\')) => s.push(e),
                            other => {
                                let found = other.map(|c| c.to_string()).unwrap_or_else(|| "end of line".into());
                                return Err(ParseError::new(line_no, i + 2, &["`\"`", "`\\`"], found));
                            }
                        }
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push((Tok::Str(s), col));
            continue;
        }
        let rest: String = chars[i..].iter().take(2).collect();
        match PUNCT.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                out.push((Tok::Punct(p), col));
                i += p.chars().count();
            }
            None => return Err(ParseError::new(line_no, col, &["token"], c.to_string())),
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

/// Quotes a literal the way the scanner reads it back.
pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Recursive-descent cursor over one scanned line.
pub(crate) struct Cursor {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
}

impl Cursor {
    pub(crate) fn new(line: &str, line_no: usize) -> Result<Self, ParseError> {
        Ok(Cursor { toks: scan_line(line, line_no)?, pos: 0, line: line_no })
    }

    pub(crate) fn is_blank(&self) -> bool {
        self.toks.len() == 1
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    pub(crate) fn peek_at(&self, ahead: usize) -> &Tok {
        let idx = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error(&self, expected: &[&str]) -> ParseError {
        let (tok, col) = &self.toks[self.pos];
        ParseError::new(self.line, *col, expected, tok.describe())
    }

    pub(crate) fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_punct(&mut self, p: &'static str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{p}`")]))
        }
    }

    pub(crate) fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Tok::Word(x) if x == w) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_child(&mut self) -> Result<usize, ParseError> {
        match self.peek() {
            Tok::ChildRef(i) => {
                let i = *i;
                self.bump();
                Ok(i)
            }
            _ => Err(self.error(&["child reference `$N`"])),
        }
    }

    pub(crate) fn expect_num(&mut self) -> Result<u32, ParseError> {
        match self.peek() {
            Tok::Num(n) => {
                let n = *n;
                self.bump();
                Ok(n)
            }
            _ => Err(self.error(&["number"])),
        }
    }

    /// A production or rule label: capitalized identifier.
    pub(crate) fn expect_label(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Word(w) if is_upper_name(w) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            _ => Err(self.error(&["label"])),
        }
    }

    pub(crate) fn expect_end(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::End) {
            Ok(())
        } else {
            Err(self.error(&["end of line"]))
        }
    }
}

pub(crate) fn is_upper_name(w: &str) -> bool {
    w.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

pub(crate) fn is_lower_name(w: &str) -> bool {
    w.chars().next().is_some_and(|c| c.is_ascii_lowercase())
}

/// Iterates the non-blank, non-comment lines of a facet text with 1-based numbers.
pub(crate) fn parse_lines<T>(
    text: &str,
    mut parse_one: impl FnMut(&mut Cursor) -> Result<T, ParseError>,
) -> Result<Vec<T>, ParseError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let mut cur = Cursor::new(line, idx + 1)?;
        if cur.is_blank() {
            continue;
        }
        let item = parse_one(&mut cur)?;
        cur.expect_end()?;
        out.push(item);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scans_mixed_line() {
        let toks: Vec<Tok> = scan_line(r#"Assign = H hs=1 [ $0 ":=" $2 ";" ] # trailing"#, 1)
            .unwrap()
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::Word("Assign".into()),
                Tok::Punct("="),
                Tok::Word("H".into()),
                Tok::Word("hs".into()),
                Tok::Punct("="),
                Tok::Num(1),
                Tok::Punct("["),
                Tok::ChildRef(0),
                Tok::Str(":=".into()),
                Tok::ChildRef(2),
                Tok::Str(";".into()),
                Tok::Punct("]"),
                Tok::End,
            ]
        );
    }

    #[test]
    fn hash_inside_string_is_not_a_comment() {
        let toks = scan_line(r##""#" x"##, 1).unwrap();
        assert_eq!(toks[0].0, Tok::Str("#".into()));
        assert_eq!(toks[1].0, Tok::Word("x".into()));
    }

    #[test]
    fn unterminated_string_reports_column() {
        let err = scan_line(r#"A: B -> "oops"#, 3).unwrap_err();
        assert_eq!((err.line, err.column), (3, 14));
    }

    #[test]
    fn quote_round_trips_escapes() {
        let q = quote(r#"a"b\c"#);
        let toks = scan_line(&q, 1).unwrap();
        assert_eq!(toks[0].0, Tok::Str(r#"a"b\c"#.into()));
    }
}
