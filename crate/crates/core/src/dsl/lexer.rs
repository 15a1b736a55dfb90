use super::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Digits, optionally with interior dashes (`1975-04-03`) or a leading
    /// minus sign.
    Number(String),
    Str(String),
    LBrace,
    RBrace,
    Comma,
    Dot,
    Eq,
    Arrow,
    Squiggle,
    /// Unlexable input; the message is reported by the parser.
    Bad(String),
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Str(_) => "string".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Squiggle => "`~>`".into(),
            Tok::Bad(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
    /// First token on its line.
    pub line_start: bool,
}

pub(crate) fn lex(src: &str) -> Vec<Token> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut fresh_line = true;

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            fresh_line = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }

        let start_col = col;
        let start = i;
        let peek = chars.get(i + 1).copied();
        let tok = match c {
            '{' => {
                i += 1;
                Tok::LBrace
            }
            '}' => {
                i += 1;
                Tok::RBrace
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '.' => {
                i += 1;
                Tok::Dot
            }
            '=' => {
                i += 1;
                Tok::Eq
            }
            '-' if peek == Some('>') => {
                i += 2;
                Tok::Arrow
            }
            '~' if peek == Some('>') => {
                i += 2;
                Tok::Squiggle
            }
            '-' if peek.is_some_and(|p| p.is_ascii_digit()) => {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                Tok::Number(chars[start..i].iter().collect())
            }
            c if c.is_ascii_digit() => {
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || (chars[i] == '-' && chars.get(i + 1).is_some_and(|p| p.is_ascii_digit())))
                {
                    i += 1;
                }
                Tok::Number(chars[start..i].iter().collect())
            }
            c if c.is_ascii_alphabetic() => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            '"' => {
                i += 1;
                let mut text = String::new();
                let mut closed = false;
                while i < chars.len() && chars[i] != '\n' {
                    match chars[i] {
                        '"' => {
                            closed = true;
                            i += 1;
                            break;
                        }
                        '\\' => {
                            let esc = chars.get(i + 1).copied();
                            text.push(match esc {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some('r') => '\r',
                                Some('"') => '"',
                                Some('\\') => '\\',
                                _ => '\\',
                            });
                            i += if matches!(esc, Some('n' | 't' | 'r' | '"' | '\\')) {
                                2
                            } else {
                                1
                            };
                        }
                        ch => {
                            text.push(ch);
                            i += 1;
                        }
                    }
                }
                if closed {
                    Tok::Str(text)
                } else {
                    Tok::Bad("unterminated string".into())
                }
            }
            other => {
                i += 1;
                Tok::Bad(format!("unexpected character `{}`", other.escape_debug()))
            }
        };
        col += i - start;
        out.push(Token {
            tok,
            span: SourceSpan {
                line,
                column: start_col,
                length: i - start,
            },
            line_start: fresh_line,
        });
        fresh_line = false;
    }
    out
}
