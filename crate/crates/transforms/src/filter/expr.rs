//! Lexer and recursive-descent parser for row predicates.
//!
//! ```text
//! expr    := or
//! or      := and ( OR and )*
//! and     := not ( AND not )*
//! not     := NOT not | primary
//! primary := '(' expr ')' | operand ( cmp_op operand )?
//! operand := identifier | "quoted identifier" | 'string' | int | float | TRUE | FALSE
//! cmp_op  := = | == | != | <> | < | <= | > | >= | CONTAINS
//! ```
//!
//! Keywords are case-insensitive. A bare operand must be a bool column or
//! literal.

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operand {
    Column(String),
    Lit(Literal),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Contains,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Contains => "CONTAINS",
        }
    }

    pub fn is_ordering(self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Cmp {
        left: Operand,
        op: CmpOp,
        right: Operand,
    },
    /// A bare bool operand.
    Truth(Operand),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at position {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Float(f64),
    True,
    False,
    And,
    Or,
    Not,
    Op(CmpOp),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, at: usize, message: impl Into<String>) -> ParseError {
        ParseError { position: at, message: message.into() }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.peek_char().is_some_and(char::is_whitespace) {
                self.pos += self.peek_char().unwrap().len_utf8();
            }
            let start = self.pos;
            let Some(c) = self.peek_char() else {
                out.push((start, Tok::End));
                return Ok(out);
            };
            let rest = &self.src[self.pos..];
            let tok = match c {
                '(' => {
                    self.pos += 1;
                    Tok::LParen
                }
                ')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                '=' => {
                    self.pos += if rest.starts_with("==") { 2 } else { 1 };
                    Tok::Op(CmpOp::Eq)
                }
                '!' if rest.starts_with("!=") => {
                    self.pos += 2;
                    Tok::Op(CmpOp::Ne)
                }
                '<' => {
                    if rest.starts_with("<=") {
                        self.pos += 2;
                        Tok::Op(CmpOp::Le)
                    } else if rest.starts_with("<>") {
                        self.pos += 2;
                        Tok::Op(CmpOp::Ne)
                    } else {
                        self.pos += 1;
                        Tok::Op(CmpOp::Lt)
                    }
                }
                '>' => {
                    if rest.starts_with(">=") {
                        self.pos += 2;
                        Tok::Op(CmpOp::Ge)
                    } else {
                        self.pos += 1;
                        Tok::Op(CmpOp::Gt)
                    }
                }
                '\'' => Tok::Str(self.quoted('\'')?),
                '"' => Tok::Ident(self.quoted('"')?),
                c if c.is_ascii_digit() || c == '-' || c == '.' => self.number()?,
                c if c.is_alphabetic() || c == '_' => {
                    let len = rest.find(|ch: char| !(ch.is_alphanumeric() || ch == '_')).unwrap_or(rest.len());
                    self.pos += len;
                    let word = &rest[..len];
                    match word.to_ascii_uppercase().as_str() {
                        "AND" => Tok::And,
                        "OR" => Tok::Or,
                        "NOT" => Tok::Not,
                        "TRUE" => Tok::True,
                        "FALSE" => Tok::False,
                        "CONTAINS" => Tok::Op(CmpOp::Contains),
                        _ => Tok::Ident(word.to_string()),
                    }
                }
                other => return Err(self.err(start, format!("unexpected character {other:?}"))),
            };
            out.push((start, tok));
        }
    }

    /// Quoted run with the quote doubled as escape.
    fn quoted(&mut self, q: char) -> Result<String, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let mut s = String::new();
        loop {
            match self.peek_char() {
                None => return Err(self.err(start, "unterminated quoted string")),
                Some(c) if c == q => {
                    self.pos += 1;
                    if self.peek_char() == Some(q) {
                        s.push(q);
                        self.pos += 1;
                    } else {
                        return Ok(s);
                    }
                }
                Some(c) => {
                    s.push(c);
                    self.pos += c.len_utf8();
                }
            }
        }
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let mut len = 0;
        let bytes = rest.as_bytes();
        if bytes.first() == Some(&b'-') {
            len = 1;
        }
        let mut is_float = false;
        while len < bytes.len() {
            let b = bytes[len];
            if b.is_ascii_digit() {
                len += 1;
            } else if b == b'.' || b == b'e' || b == b'E' {
                is_float = true;
                len += 1;
                if (b == b'e' || b == b'E') && matches!(bytes.get(len), Some(b'+') | Some(b'-')) {
                    len += 1;
                }
            } else {
                break;
            }
        }
        let text = &rest[..len];
        self.pos += len;
        let bad = || ParseError { position: start, message: format!("invalid number {text:?}") };
        if is_float {
            text.parse::<f64>().map(Tok::Float).map_err(|_| bad())
        } else {
            text.parse::<i64>().map(Tok::Int).map_err(|_| bad())
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].1
    }

    fn pos(&self) -> usize {
        self.toks[self.i].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].1.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { position: self.pos(), message: message.into() }
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            left = Expr::Or(Box::new(left), Box::new(self.and()?));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.not()?;
        while *self.peek() == Tok::And {
            self.bump();
            left = Expr::And(Box::new(left), Box::new(self.not()?));
        }
        Ok(left)
    }

    fn not(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(Expr::Not(Box::new(self.not()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let e = self.or()?;
            if *self.peek() != Tok::RParen {
                return Err(self.err("expected ')'"));
            }
            self.bump();
            return Ok(e);
        }
        let left = self.operand()?;
        if let Tok::Op(op) = *self.peek() {
            self.bump();
            let right = self.operand()?;
            return Ok(Expr::Cmp { left, op, right });
        }
        Ok(Expr::Truth(left))
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        let pos = self.pos();
        Ok(match self.bump() {
            Tok::Ident(name) => Operand::Column(name),
            Tok::Str(s) => Operand::Lit(Literal::Str(s)),
            Tok::Int(i) => Operand::Lit(Literal::Int(i)),
            Tok::Float(x) => Operand::Lit(Literal::Float(x)),
            Tok::True => Operand::Lit(Literal::Bool(true)),
            Tok::False => Operand::Lit(Literal::Bool(false)),
            Tok::End => return Err(ParseError { position: pos, message: "unexpected end of expression".into() }),
            other => {
                return Err(ParseError {
                    position: pos,
                    message: format!("expected a column or literal, found {other:?}"),
                })
            }
        })
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = Lexer { src, pos: 0 }.tokens()?;
    let mut p = Parser { toks, i: 0 };
    let e = p.or()?;
    if *p.peek() != Tok::End {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(n: &str) -> Operand {
        Operand::Column(n.into())
    }

    #[test]
    fn precedence_and_literals() {
        let e = parse("docq_total_words >= 10 AND lang = 'en' OR NOT flag").unwrap();
        let expected = Expr::Or(
            Box::new(Expr::And(
                Box::new(Expr::Cmp {
                    left: col("docq_total_words"),
                    op: CmpOp::Ge,
                    right: Operand::Lit(Literal::Int(10)),
                }),
                Box::new(Expr::Cmp {
                    left: col("lang"),
                    op: CmpOp::Eq,
                    right: Operand::Lit(Literal::Str("en".into())),
                }),
            )),
            Box::new(Expr::Not(Box::new(Expr::Truth(col("flag"))))),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn numbers_strings_and_quoting() {
        assert_eq!(
            parse("x > -1.5e2").unwrap(),
            Expr::Cmp { left: col("x"), op: CmpOp::Gt, right: Operand::Lit(Literal::Float(-150.0)) }
        );
        assert_eq!(
            parse("\"my col\" contains 'it''s'").unwrap(),
            Expr::Cmp { left: col("my col"), op: CmpOp::Contains, right: Operand::Lit(Literal::Str("it's".into())) }
        );
        assert_eq!(parse("true").unwrap(), Expr::Truth(Operand::Lit(Literal::Bool(true))));
        assert_eq!(parse("(a <> 1)").unwrap(), parse("a != 1").unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("a = ").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse("a = 'open").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse("(a = 1").unwrap_err();
        assert!(e.message.contains("')'"));
        let e = parse("a = 1 b").unwrap_err();
        assert_eq!(e.position, 6);
        assert!(parse("a # 1").is_err());
        assert!(parse("a = 1.2.3").is_err());
    }
}
