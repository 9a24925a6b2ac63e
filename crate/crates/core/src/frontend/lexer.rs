use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokKind {
    /// Lower-case or numeric name: a constant or a bound variable.
    Name(String),
    /// Upper-case or underscore name: a logic variable or a bound variable.
    Var(String),
    Punct(&'static str),
    End,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub line: usize,
    pub col: usize,
}

const PUNCT: [&str; 14] = [
    "::", ":-", "?-", "->", "=>", "\\", "(", ")", ",", ";", ".", "[", "]", "|",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = col;
        if c.is_alphanumeric() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            let kind = if c.is_uppercase() || c == '_' {
                TokKind::Var(s)
            } else {
                TokKind::Name(s)
            };
            out.push(Token { kind, line, col: start });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) else {
            return Err(ParseError {
                line,
                col,
                msg: format!("unexpected character `{c}`"),
            });
        };
        i += p.chars().count();
        col += p.chars().count();
        out.push(Token {
            kind: TokKind::Punct(p),
            line,
            col: start,
        });
    }
    out.push(Token {
        kind: TokKind::End,
        line,
        col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<TokKind> {
        tokenize(s).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn punctuation_and_names() {
        use TokKind::*;
        assert_eq!(
            kinds("p (X::L) :- x\\ q. % done"),
            vec![
                Name("p".into()),
                Punct("("),
                Var("X".into()),
                Punct("::"),
                Var("L".into()),
                Punct(")"),
                Punct(":-"),
                Name("x".into()),
                Punct("\\"),
                Name("q".into()),
                Punct("."),
                End
            ]
        );
    }

    #[test]
    fn positions_and_errors() {
        let t = tokenize("a\n  b").unwrap();
        assert_eq!((t[1].line, t[1].col), (2, 3));
        let e = tokenize("a & b").unwrap_err();
        assert_eq!((e.line, e.col), (1, 3));
    }
}
