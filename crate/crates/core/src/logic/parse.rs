//! Text syntax for formulas.
//!
//! ```text
//! expr    := unary_or ( "->" expr )?
//! or      := and ( "|" and )*
//! and     := until ( "&" until )*
//! until   := unary ( "U" until )?
//! unary   := ("!" | "X" | "F" | "G" | "EF" | "AG") unary | primary
//! primary := "(" expr ")" | "@" ident | "img(" ident "," ident ")"
//!          | "inv(" ident "," ident ")" | ident
//! ```
//!
//! Bare identifiers parse as predicates; `@p` is an atomic proposition.
//! [`Formula::with_atoms`] can reinterpret bare names afterwards.

use std::fmt;

use super::{Direction, Formula};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at offset {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Bang,
    Amp,
    Bar,
    Arrow,
    At,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, ch)) = chars.peek() {
        let tok = match ch {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '!' | '~' | '¬' => Tok::Bang,
            '&' | '∧' => Tok::Amp,
            '|' | '∨' => Tok::Bar,
            '@' => Tok::At,
            '→' => Tok::Arrow,
            '-' => {
                chars.next();
                match chars.peek() {
                    Some(&(_, '>')) => Tok::Arrow,
                    _ => return Err(ParseError { offset: i, message: "expected `->`".into() }),
                }
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut ident = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '\'' || c == '.' {
                        ident.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((i, Tok::Ident(ident)));
                continue;
            }
            other => return Err(ParseError { offset: i, message: format!("unexpected character `{other}`") }),
        };
        chars.next();
        out.push((i, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.offset(), message: message.into() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn keyword(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s.as_str()),
            _ => None,
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected a name"),
        }
    }

    fn expr(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            Ok(Formula::implies(lhs, self.expr()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and()?;
        while self.eat(&Tok::Bar) {
            acc = Formula::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.until()?;
        while self.eat(&Tok::Amp) {
            acc = Formula::and(acc, self.until()?);
        }
        Ok(acc)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.keyword() == Some("U") {
            self.pos += 1;
            Ok(Formula::until(lhs, self.until()?))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::not(self.unary()?));
        }
        let build: Option<fn(Formula) -> Formula> = match self.keyword() {
            Some("X") => Some(Formula::next),
            Some("F" | "EF") => Some(Formula::eventually),
            Some("G" | "AG") => Some(Formula::always),
            _ => None,
        };
        if let Some(build) = build {
            self.pos += 1;
            return Ok(build(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::LParen) {
            let inner = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(inner);
        }
        if self.eat(&Tok::At) {
            return Ok(Formula::Atom(self.ident()?));
        }
        let dir = match self.keyword() {
            Some("img") => Some(Direction::Direct),
            Some("inv") => Some(Direction::Inverse),
            _ => None,
        };
        if let Some(dir) = dir {
            if self.toks.get(self.pos + 1).map(|(_, t)| t) == Some(&Tok::LParen) {
                self.pos += 2;
                let pred = self.ident()?;
                self.expect(Tok::Comma, "`,`")?;
                let rel = self.ident()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Formula::Img { pred, rel, dir });
            }
        }
        Ok(Formula::Pred(self.ident()?))
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "X" | "F" | "G" | "U" | "EF" | "AG")
}

/// Parse the text syntax described in the module docs.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end: src.len() };
    let f = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let f = parse_formula("X P & Q | !R -> S U T").unwrap();
        let expected = Formula::implies(
            Formula::or(
                Formula::and(Formula::next(Formula::pred("P")), Formula::pred("Q")),
                Formula::not(Formula::pred("R")),
            ),
            Formula::until(Formula::pred("S"), Formula::pred("T")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn atoms_and_images() {
        assert_eq!(parse_formula("EF @p").unwrap(), Formula::eventually(Formula::atom("p")));
        assert_eq!(parse_formula("G inv(P, R)").unwrap(), Formula::always(Formula::img("P", "R", Direction::Inverse)));
        assert_eq!(parse_formula("img").unwrap(), Formula::pred("img"));
    }

    #[test]
    fn display_round_trips() {
        for src in ["X (P U !Q)", "G (P -> F @p)", "(img(P, R) & inv(Q, S)) | AG P"] {
            let f = parse_formula(src).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_formula("P & ").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(parse_formula("P Q").is_err());
        assert!(parse_formula("(P").is_err());
        assert!(parse_formula("P - Q").is_err());
    }
}
