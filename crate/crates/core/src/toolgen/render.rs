use crate::metalang::BoxExpr;

/// A rendered box: lines with their indentation relative to the box origin.
#[derive(Debug, Clone)]
struct Block {
    lines: Vec<(usize, String)>,
}

impl Block {
    fn shifted(mut self, by: usize) -> Block {
        for l in &mut self.lines {
            l.0 += by;
        }
        self
    }

    /// Column just past the last character of the last line.
    fn end_column(&self) -> usize {
        self.lines.last().map_or(0, |(i, t)| i + t.chars().count())
    }
}

fn layout(b: &BoxExpr) -> Block {
    match b {
        BoxExpr::Text(s) => Block { lines: vec![(0, s.clone())] },
        BoxExpr::Ref(i) => Block { lines: vec![(0, format!("${i}"))] },
        BoxExpr::I { is, child } => layout(child).shifted(*is as usize),
        BoxExpr::H { hs, children } => {
            let mut acc = Block { lines: Vec::new() };
            for c in children {
                let child = layout(c);
                if acc.lines.is_empty() {
                    acc = child;
                    continue;
                }
                let col = acc.end_column() + *hs as usize;
                let mut rest = child.lines.into_iter();
                if let Some((ci, ct)) = rest.next() {
                    let last = acc.lines.last_mut().expect("non-empty");
                    let pad = col + ci - (last.0 + last.1.chars().count());
                    last.1.extend(std::iter::repeat_n(' ', pad));
                    last.1.push_str(&ct);
                }
                acc.lines.extend(rest.map(|(ci, ct)| (col + ci, ct)));
            }
            acc
        }
        BoxExpr::V { vs, is, children } => {
            let mut acc = Block { lines: Vec::new() };
            for (k, c) in children.iter().enumerate() {
                let child = layout(c);
                if k == 0 {
                    acc = child;
                    continue;
                }
                acc.lines.extend((0..*vs).map(|_| (0, String::new())));
                acc.lines.extend(child.shifted(*is as usize).lines);
            }
            acc
        }
    }
}

/// Renders a substituted box to text: no trailing spaces, one final newline.
pub fn render(b: &BoxExpr) -> String {
    let mut out = String::new();
    for (indent, text) in layout(b).lines {
        let line = format!("{}{}", " ".repeat(indent), text);
        out.push_str(line.trim_end());
        out.push('\n');
    }
    if out.is_empty() {
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> BoxExpr {
        BoxExpr::text(s)
    }

    #[test]
    fn h_places_children_with_gap() {
        assert_eq!(render(&BoxExpr::h(1, vec![t("a"), t("b")])), "a b\n");
        assert_eq!(render(&BoxExpr::h(0, vec![t("("), t("x"), t(")")])), "(x)\n");
    }

    #[test]
    fn v_indents_children_after_the_first() {
        let b = BoxExpr::v(0, 2, vec![t("begin"), t("x"), t("end")]);
        assert_eq!(render(&b), "begin\n  x\n  end\n");
    }

    #[test]
    fn v_inside_h_aligns_on_its_start_column() {
        let b = BoxExpr::h(1, vec![t("if"), BoxExpr::v(0, 0, vec![t("p"), t("q")])]);
        assert_eq!(render(&b), "if p\n   q\n");
    }

    #[test]
    fn blank_lines_and_no_trailing_spaces() {
        let b = BoxExpr::v(1, 0, vec![t("a"), BoxExpr::h(3, vec![t("b"), t("")])]);
        assert_eq!(render(&b), "a\n\nb\n");
    }

    #[test]
    fn i_shifts_everything() {
        let b = BoxExpr::v(0, 0, vec![t("do"), BoxExpr::i(4, BoxExpr::v(0, 0, vec![t("x"), t("y")])), t("od")]);
        assert_eq!(render(&b), "do\n    x\n    y\nod\n");
    }
}
