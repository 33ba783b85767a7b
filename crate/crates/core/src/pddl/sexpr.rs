//! S-expression reader with source positions, and a width-aware printer.

use std::fmt;

use super::PddlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, Span),
    List(Vec<Sexp>, Span),
}

impl Sexp {
    pub fn atom(text: impl Into<String>) -> Sexp {
        Sexp::Atom(text.into(), Span::default())
    }

    pub fn list(items: Vec<Sexp>) -> Sexp {
        Sexp::List(items, Span::default())
    }

    pub fn span(&self) -> Span {
        match self {
            Sexp::Atom(_, s) | Sexp::List(_, s) => *s,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a, _) => Some(a),
            Sexp::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }

    /// First element of a list when it is an atom.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|items| items.first()).and_then(Sexp::as_atom)
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.as_atom() == Some(kw)
    }

    fn flat_len(&self) -> usize {
        match self {
            Sexp::Atom(a, _) => a.len(),
            Sexp::List(items, _) => 2 + items.iter().map(Sexp::flat_len).sum::<usize>() + items.len().saturating_sub(1),
        }
    }

    /// Renders with line breaks wherever a list does not fit in `width`
    /// columns. `:keyword value` pairs stay on one line.
    pub fn pretty(&self, width: usize) -> String {
        let mut out = String::new();
        self.write_pretty(&mut out, 0, width);
        out
    }

    fn write_pretty(&self, out: &mut String, indent: usize, width: usize) {
        let items = match self {
            Sexp::Atom(a, _) => {
                out.push_str(a);
                return;
            }
            Sexp::List(items, _) => items,
        };
        if indent + self.flat_len() <= width || items.len() < 2 {
            out.push_str(&self.to_string());
            return;
        }
        out.push('(');
        let child_indent = indent + 2;
        let mut i = 0;
        // keep the head (and a plain name that follows it) on the opening line
        items[0].write_pretty(out, indent + 1, width);
        i += 1;
        if items[0].as_atom().is_some_and(|h| h.starts_with(':') || h == "define")
            && items.get(1).is_some_and(|n| n.as_atom().is_some_and(|a| !a.starts_with(':')))
        {
            out.push(' ');
            items[1].write_pretty(out, indent + 1, width);
            i += 1;
        }
        while i < items.len() {
            out.push('\n');
            out.push_str(&" ".repeat(child_indent));
            let item = &items[i];
            if item.as_atom().is_some_and(|a| a.starts_with(':')) && i + 1 < items.len() {
                let kw = item.as_atom().unwrap();
                out.push_str(kw);
                out.push(' ');
                items[i + 1].write_pretty(out, child_indent + kw.len() + 1, width);
                i += 2;
            } else {
                item.write_pretty(out, child_indent, width);
                i += 1;
            }
        }
        out.push(')');
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a, _) => f.write_str(a),
            Sexp::List(items, _) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Reads every top-level expression in `text`. Atoms are lower-cased; `;`
/// starts a comment running to the end of the line.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, PddlError> {
    let mut stack: Vec<(Vec<Sexp>, Span)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let here = Span { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                stack.push((Vec::new(), here));
            }
            ')' => {
                chars.next();
                col += 1;
                let (items, span) = stack
                    .pop()
                    .ok_or_else(|| PddlError::syntax(here, "unbalanced `)`"))?;
                let node = Sexp::List(items, span);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
            _ => {
                let mut atom = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.extend(c.to_lowercase());
                    chars.next();
                    col += 1;
                }
                let node = Sexp::Atom(atom, here);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
        }
    }
    if let Some((_, span)) = stack.last() {
        return Err(PddlError::syntax(*span, "unclosed `(`"));
    }
    Ok(top)
}

/// Reads exactly one top-level expression.
pub fn parse_one(text: &str) -> Result<Sexp, PddlError> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(PddlError::syntax(Span { line: 1, col: 1 }, "empty input")),
        _ => Err(PddlError::syntax(all[1].span(), "trailing content after the first expression")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let e = parse_one("; header\n(define (Domain X)\n  (:requirements :typing))").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(e.span(), Span { line: 2, col: 1 });
        assert_eq!(items[1].to_string(), "(domain x)");
        assert_eq!(items[2].span(), Span { line: 3, col: 3 });
    }

    #[test]
    fn reports_unbalanced_input() {
        let err = parse_one("(a (b)").unwrap_err();
        assert!(err.to_string().contains("1:1"), "{err}");
        assert!(parse_one("(a))").is_err());
    }

    #[test]
    fn pretty_keeps_short_lists_flat() {
        let e = parse_one("(:process p-lightning :precondition (ok) :effect (increase (gc) (* #t 1)))").unwrap();
        assert_eq!(e.pretty(100), "(:process p-lightning :precondition (ok) :effect (increase (gc) (* #t 1)))");
        let broken = e.pretty(30);
        assert!(broken.starts_with("(:process p-lightning\n  :precondition (ok)\n  :effect"), "{broken}");
        assert_eq!(parse_one(&broken).unwrap().to_string(), e.to_string());
    }
}
