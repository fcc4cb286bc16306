//! Textual expression format.
//!
//! Grammar: `expr := constant | feature | "(" name expr+ ")"` with features
//! written `X<digits>` and constants as decimal literals (optional sign and
//! exponent). Whitespace separates tokens. Constants print in shortest
//! round-trip form, so `parse(print(e))` reproduces `e` bit-for-bit.

use super::{ExprNode, Primitive};
use crate::error::{Error, Result};
use std::fmt::Write as _;

pub fn to_sexpr(expr: &ExprNode) -> String {
    let mut out = String::new();
    write_node(expr, &mut out);
    out
}

fn write_node(expr: &ExprNode, out: &mut String) {
    match expr {
        ExprNode::Constant(v) => {
            let _ = write!(out, "{v}");
        }
        ExprNode::Feature(i) => {
            let _ = write!(out, "X{i}");
        }
        ExprNode::Call(p, children) => {
            out.push('(');
            out.push_str(p.name());
            for c in children {
                out.push(' ');
                write_node(c, out);
            }
            out.push(')');
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    Atom(String),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::LParen => "`(`".to_string(),
            Token::RParen => "`)`".to_string(),
            Token::Atom(s) => format!("`{s}`"),
        }
    }
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut atom = String::new();
    let flush = |atom: &mut String, tokens: &mut Vec<Token>| {
        if !atom.is_empty() {
            tokens.push(Token::Atom(std::mem::take(atom)));
        }
    };
    for ch in text.chars() {
        match ch {
            '(' => {
                flush(&mut atom, &mut tokens);
                tokens.push(Token::LParen);
            }
            ')' => {
                flush(&mut atom, &mut tokens);
                tokens.push(Token::RParen);
            }
            c if c.is_whitespace() => flush(&mut atom, &mut tokens),
            c => atom.push(c),
        }
    }
    flush(&mut atom, &mut tokens);
    tokens
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    // Token positions are 1-based in errors.
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos + 1,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse_expr(&mut self) -> Result<ExprNode> {
        match self.peek().cloned() {
            None => Err(self.error("expected an expression, found end of input")),
            Some(Token::RParen) => {
                Err(self.error("expected a constant, feature, or `(`, found `)`"))
            }
            Some(Token::LParen) => self.parse_call(),
            Some(Token::Atom(atom)) => {
                self.next();
                self.parse_leaf(&atom)
            }
        }
    }

    fn parse_call(&mut self) -> Result<ExprNode> {
        self.next(); // consume `(`
        let name_pos = self.pos + 1;
        let at = |position: usize, message: String| Error::Parse { position, message };
        let prim = match self.next() {
            None => return Err(self.error("expected a primitive name, found end of input")),
            Some(Token::Atom(name)) => Primitive::from_name(&name)
                .ok_or_else(|| at(name_pos, format!("unknown primitive `{name}`")))?,
            Some(other) => {
                return Err(at(
                    name_pos,
                    format!("expected a primitive name, found {}", other.describe()),
                ))
            }
        };
        let mut children = Vec::with_capacity(prim.arity());
        loop {
            match self.peek() {
                Some(Token::RParen) => {
                    let rparen_pos = self.pos + 1;
                    self.next();
                    if children.len() != prim.arity() {
                        return Err(at(
                            rparen_pos,
                            format!(
                                "arity mismatch for `{}`: expected {} arguments, got {}",
                                prim.name(),
                                prim.arity(),
                                children.len()
                            ),
                        ));
                    }
                    return Ok(ExprNode::Call(prim, children));
                }
                None => {
                    return Err(self.error(format!(
                        "unclosed call to `{}`: expected an argument or `)`",
                        prim.name()
                    )))
                }
                _ => children.push(self.parse_expr()?),
            }
        }
    }

    fn parse_leaf(&mut self, atom: &str) -> Result<ExprNode> {
        // The token was already consumed; report errors at its position.
        let leaf_pos = self.pos; // pos is 1 past the token, i.e. its 1-based index
        let err = |message: String| Error::Parse {
            position: leaf_pos,
            message,
        };
        if let Some(rest) = atom.strip_prefix('X') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                let index = rest
                    .parse::<usize>()
                    .map_err(|_| err(format!("feature index `{rest}` is out of range")))?;
                return Ok(ExprNode::Feature(index));
            }
        }
        match atom.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(ExprNode::Constant(v)),
            Ok(_) => Err(err(format!("constant `{atom}` is not finite"))),
            Err(_) => Err(err(format!(
                "expected a constant or feature, found `{atom}`"
            ))),
        }
    }
}

/// Parses the textual expression format back into a tree.
pub fn parse_sexpr(text: &str) -> Result<ExprNode> {
    let mut parser = Parser {
        tokens: tokenize(text),
        pos: 0,
    };
    let expr = parser.parse_expr()?;
    if let Some(extra) = parser.peek() {
        return Err(parser.error(format!(
            "trailing input after expression: {}",
            extra.describe()
        )));
    }
    Ok(expr)
}
