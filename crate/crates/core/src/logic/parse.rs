//! Recursive-descent parser for the formula grammar:
//!
//! ```text
//! formula := iff
//! iff     := imp ("<->" imp)*
//! imp     := or ("->" imp)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "(" formula ")" | NAME | "true" | "false"
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use super::{Atom, Formula, Symbols};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    True,
    False,
    Name(String),
    Eof,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Not => "`!`".into(),
            Token::And => "`&`".into(),
            Token::Or => "`|`".into(),
            Token::Implies => "`->`".into(),
            Token::Iff => "`<->`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::True => "`true`".into(),
            Token::False => "`false`".into(),
            Token::Name(n) => format!("`{n}`"),
            Token::Eof => "end of input".into(),
        }
    }
}

struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn tokenize(text: &str, first_line: usize, first_column: usize) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut line, mut column) = (first_line, first_column);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_column) = (line, column);
        let mut push = |token, width: usize, i: &mut usize, column: &mut usize| {
            out.push(Spanned {
                token,
                line: start_line,
                column: start_column,
            });
            *i += width;
            *column += width;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                column += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '!' => push(Token::Not, 1, &mut i, &mut column),
            '&' => push(Token::And, 1, &mut i, &mut column),
            '|' => push(Token::Or, 1, &mut i, &mut column),
            '(' => push(Token::LParen, 1, &mut i, &mut column),
            ')' => push(Token::RParen, 1, &mut i, &mut column),
            '-' if chars.get(i + 1) == Some(&'>') => push(Token::Implies, 2, &mut i, &mut column),
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                push(Token::Iff, 3, &mut i, &mut column)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                column += i - start;
                let token = match word.as_str() {
                    "true" => Token::True,
                    "false" => Token::False,
                    _ => Token::Name(word),
                };
                out.push(Spanned {
                    token,
                    line: start_line,
                    column: start_column,
                });
            }
            other => {
                return Err(Error::syntax(
                    line,
                    column,
                    format!("unexpected character `{other}`"),
                ))
            }
        }
    }
    out.push(Spanned {
        token: Token::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser<'a, R> {
    tokens: Vec<Spanned>,
    pos: usize,
    resolve: &'a mut R,
}

impl<'a, R> Parser<'a, R>
where
    R: FnMut(&str) -> Option<Atom>,
{
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].token
    }

    fn bump(&mut self) -> &Spanned {
        let t = &self.tokens[self.pos];
        if t.token != Token::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: String) -> Error {
        let t = &self.tokens[self.pos];
        Error::syntax(t.line, t.column, message)
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut lhs = self.imp()?;
        while *self.peek() == Token::Iff {
            self.bump();
            let rhs = self.imp()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if *self.peek() == Token::Implies {
            self.bump();
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while *self.peek() == Token::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Token::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Token::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Token::LParen => {
                self.bump();
                let inner = self.iff()?;
                if *self.peek() != Token::RParen {
                    return Err(self.error_here(format!(
                        "expected `)`, found {}",
                        self.peek().describe()
                    )));
                }
                self.bump();
                Ok(inner)
            }
            Token::True => {
                self.bump();
                Ok(Formula::Const(true))
            }
            Token::False => {
                self.bump();
                Ok(Formula::Const(false))
            }
            Token::Name(name) => {
                let (line, column) = {
                    let t = &self.tokens[self.pos];
                    (t.line, t.column)
                };
                self.bump();
                match (self.resolve)(&name) {
                    Some(atom) => Ok(Formula::Atom(atom)),
                    None => Err(Error::UndeclaredAtom { name, line, column }),
                }
            }
            other => Err(self.error_here(format!("expected a formula, found {}", other.describe()))),
        }
    }
}

/// Parses `text` whose first character sits at `line:column` of some larger
/// document, resolving names through `resolve`.
pub(crate) fn parse_at<R>(text: &str, line: usize, column: usize, resolve: &mut R) -> Result<Formula>
where
    R: FnMut(&str) -> Option<Atom>,
{
    let tokens = tokenize(text, line, column)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        resolve,
    };
    let f = parser.iff()?;
    if *parser.peek() != Token::Eof {
        return Err(parser.error_here(format!("unexpected {}", parser.peek().describe())));
    }
    Ok(f)
}

/// Parses a formula whose atoms must all be declared in `symbols`.
pub fn parse_formula(text: &str, symbols: &Symbols) -> Result<Formula> {
    parse_at(text, 1, 1, &mut |name| symbols.get(name))
}

/// Parses a formula, declaring unseen atoms in first-occurrence order.
pub fn parse_formula_declaring(text: &str, symbols: &mut Symbols) -> Result<Formula> {
    parse_at(text, 1, 1, &mut |name| symbols.declare(name).ok())
}
