use super::{ParseError, ParseErrorKind, Position};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Word(String),
    LBrace,
    RBrace,
    Comma,
    Semi,
    Bar,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Bar => "`|`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Position,
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '{' | '}' | ',' | ';' | '|' | '#' | '=')
}

/// Splits network text into tokens. `#` starts a comment running to the end
/// of the line; a word is any run of characters that is not whitespace or
/// punctuation.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let mut chars = line.char_indices().peekable();
        let mut column = 0usize;
        while let Some((start, c)) = chars.next() {
            column += 1;
            let pos = Position::new(line_no + 1, column);
            let tok = match c {
                '#' => break,
                c if c.is_whitespace() => continue,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '|' => Tok::Bar,
                '=' => {
                    return Err(ParseError::new(pos, ParseErrorKind::Syntax("unexpected `=`".into())));
                }
                _ => {
                    let mut end = start + c.len_utf8();
                    while let Some(&(i, next)) = chars.peek() {
                        if !is_word_char(next) {
                            break;
                        }
                        chars.next();
                        column += 1;
                        end = i + next.len_utf8();
                    }
                    Tok::Word(line[start..end].to_owned())
                }
            };
            tokens.push(Token { tok, pos });
        }
    }
    Ok(tokens)
}

/// Parses a probability literal, accepting decimals and scientific notation
/// and rejecting everything `f64::from_str` would let through beyond that.
pub(crate) fn parse_number(word: &str) -> Option<f64> {
    let ok = word
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
    if !ok || !word.chars().any(|c| c.is_ascii_digit()) {
        return None;
    }
    word.parse::<f64>().ok().filter(|p| p.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_carry_positions() {
        let toks = tokenize("var X { T, F } # note\n  cpt X { 0.3 0.7 }").unwrap();
        assert_eq!(toks[0].tok, Tok::Word("var".into()));
        assert_eq!(toks[0].pos, Position::new(1, 1));
        assert_eq!(toks[3].tok, Tok::Word("T".into()));
        assert_eq!(toks[3].pos, Position::new(1, 9));
        let cpt = toks.iter().find(|t| t.tok == Tok::Word("cpt".into())).unwrap();
        assert_eq!(cpt.pos, Position::new(2, 3));
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_number("0.25"), Some(0.25));
        assert_eq!(parse_number("2.5e-1"), Some(0.25));
        assert_eq!(parse_number("1"), Some(1.0));
        assert_eq!(parse_number("inf"), None);
        assert_eq!(parse_number("NaN"), None);
        assert_eq!(parse_number("T"), None);
        assert_eq!(parse_number("."), None);
    }
}
