//! Expression grammar shared by the CLI and the bracket file formats.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' exponent)?
//! primary := integer | '(' expr ')' | ident primes? ('(' expr (',' expr)* ')')?
//!          | 'D' '[' ident ',' integer ']' '(' expr ')'
//! ```
//!
//! Parsing produces an [`Ast`]; evaluators interpret identifiers and calls
//! for their own target (scalars here, jet polynomials and lattice
//! coefficients in the pencil module).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{CoeffExpr, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at position {pos}")]
    UnknownSymbol { pos: usize, name: String },
    #[error("invalid expression at position {pos}: {msg}")]
    Invalid { pos: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Int(BigInt),
    Ident { name: String, pos: usize },
    /// `name^(order)(args)`: primes or `D[name, order]` give the order.
    Call { name: String, order: u32, args: Vec<Ast>, pos: usize },
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, usize),
    Neg(Box<Ast>),
    Pow(Box<Ast>, i32),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String, u32),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().unwrap()), start));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let mut primes = 0;
            while i < chars.len() && chars[i] == '\'' {
                primes += 1;
                i += 1;
            }
            out.push((Tok::Ident(s, primes), start));
        } else if "+-*/^()[],".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct P {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(ParseError::Syntax { pos: self.pos(), msg: format!("expected `{c}`") })
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek() == Some(&Tok::Sym('/')) {
                let pos = self.pos();
                self.at += 1;
                lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?), pos);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        if self.eat('-') {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let paren = self.eat('(');
        let neg = self.eat('-');
        let pos = self.pos();
        let Some(Tok::Int(n)) = self.peek().cloned() else {
            return Err(ParseError::Syntax { pos, msg: "expected integer exponent".into() });
        };
        self.at += 1;
        if paren {
            self.expect(')')?;
        }
        let n: i32 = n
            .try_into()
            .map_err(|_| ParseError::Invalid { pos, msg: "exponent too large".into() })?;
        Ok(Ast::Pow(Box::new(base), if neg { -n } else { n }))
    }

    fn args(&mut self) -> Result<Vec<Ast>, ParseError> {
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(args)
    }

    fn primary(&mut self) -> Result<Ast, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.at += 1;
                Ok(Ast::Int(n))
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name, 0)) if name == "D" && self.toks.get(self.at + 1).map(|t| &t.0) == Some(&Tok::Sym('[')) => {
                self.at += 2;
                let fpos = self.pos();
                let Some(Tok::Ident(f, 0)) = self.peek().cloned() else {
                    return Err(ParseError::Syntax { pos: fpos, msg: "expected function name".into() });
                };
                self.at += 1;
                self.expect(',')?;
                let kpos = self.pos();
                let Some(Tok::Int(k)) = self.peek().cloned() else {
                    return Err(ParseError::Syntax { pos: kpos, msg: "expected derivative order".into() });
                };
                self.at += 1;
                self.expect(']')?;
                self.expect('(')?;
                let order: u32 = k
                    .try_into()
                    .map_err(|_| ParseError::Invalid { pos: kpos, msg: "derivative order too large".into() })?;
                let args = self.args()?;
                Ok(Ast::Call { name: f, order, args, pos: fpos })
            }
            Some(Tok::Ident(name, primes)) => {
                self.at += 1;
                if self.eat('(') {
                    let args = self.args()?;
                    Ok(Ast::Call { name, order: primes, args, pos })
                } else if primes > 0 {
                    Err(ParseError::Syntax { pos: self.pos(), msg: "derivative primes need an argument list".into() })
                } else {
                    Ok(Ast::Ident { name, pos })
                }
            }
            _ => Err(ParseError::Syntax { pos, msg: "expected an operand".into() }),
        }
    }
}

pub fn parse_ast(text: &str) -> Result<Ast, ParseError> {
    let toks = tokenize(text)?;
    let end = text.chars().count();
    let mut p = P { toks, at: 0, end };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return Err(ParseError::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(e)
}

impl Ast {
    /// Rational value of a constant subtree (integers, `+ - * /`, integer powers).
    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Ast::Int(n) => Some(Rational::from_integer(n.clone())),
            Ast::Add(a, b) => Some(a.as_rational()? + b.as_rational()?),
            Ast::Sub(a, b) => Some(a.as_rational()? - b.as_rational()?),
            Ast::Mul(a, b) => Some(a.as_rational()? * b.as_rational()?),
            Ast::Div(a, b, _) => {
                let d = b.as_rational()?;
                (!d.is_zero()).then(|| a.as_rational().unwrap_or_default() / d)
            }
            Ast::Neg(a) => Some(-a.as_rational()?),
            Ast::Pow(a, k) => {
                let r = a.as_rational()?;
                if *k < 0 && r.is_zero() {
                    return None;
                }
                Some(num_traits::pow::Pow::pow(r, *k))
            }
            _ => None,
        }
    }

    pub fn position(&self) -> usize {
        match self {
            Ast::Ident { pos, .. } | Ast::Call { pos, .. } | Ast::Div(_, _, pos) => *pos,
            Ast::Add(a, _) | Ast::Sub(a, _) | Ast::Mul(a, _) | Ast::Neg(a) | Ast::Pow(a, _) => a.position(),
            Ast::Int(_) => 0,
        }
    }
}

/// Scalar expression parser with a table of declared function symbols.
#[derive(Clone, Debug)]
pub struct Parser {
    functions: BTreeSet<String>,
}

impl Default for Parser {
    fn default() -> Self {
        Parser { functions: ["g", "c"].iter().map(|s| s.to_string()).collect() }
    }
}

impl Parser {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(mut self, name: &str) -> Self {
        self.functions.insert(name.to_string());
        self
    }

    pub fn is_function(&self, name: &str) -> bool {
        self.functions.contains(name)
    }

    pub fn parse(&self, text: &str) -> Result<CoeffExpr, ParseError> {
        self.eval(&parse_ast(text)?)
    }

    pub fn eval(&self, ast: &Ast) -> Result<CoeffExpr, ParseError> {
        match ast {
            Ast::Int(n) => Ok(CoeffExpr::constant(Rational::from_integer(n.clone()))),
            Ast::Ident { name, pos } => match name.as_str() {
                "u" => Ok(CoeffExpr::u()),
                "lambda" => Ok(CoeffExpr::lambda()),
                "eps" => Err(ParseError::Invalid { pos: *pos, msg: "`eps` is not allowed in a scalar coefficient".into() }),
                _ => Err(ParseError::UnknownSymbol { pos: *pos, name: name.clone() }),
            },
            Ast::Call { name, order, args, pos } => {
                if name == "sqrt" && *order == 0 {
                    let r = match args.as_slice() {
                        [a] => a.as_rational(),
                        _ => None,
                    };
                    return r
                        .and_then(|r| CoeffExpr::sqrt(&r))
                        .ok_or_else(|| ParseError::Invalid { pos: *pos, msg: "sqrt needs a positive rational".into() });
                }
                if !self.is_function(name) {
                    return Err(ParseError::UnknownSymbol { pos: *pos, name: name.clone() });
                }
                match args.as_slice() {
                    [Ast::Ident { name: arg, .. }] if arg == "u" => Ok(CoeffExpr::func(name, *order)),
                    _ => Err(ParseError::Invalid { pos: *pos, msg: format!("`{name}` must be applied to `u`") }),
                }
            }
            Ast::Add(a, b) => Ok(self.eval(a)? + self.eval(b)?),
            Ast::Sub(a, b) => Ok(self.eval(a)? - self.eval(b)?),
            Ast::Mul(a, b) => Ok(self.eval(a)? * self.eval(b)?),
            Ast::Div(a, b, pos) => {
                let d = self.eval(b)?;
                self.eval(a)?
                    .div_exact(&d)
                    .ok_or_else(|| ParseError::Invalid { pos: *pos, msg: "division by a non-monomial expression".into() })
            }
            Ast::Neg(a) => Ok(-self.eval(a)?),
            Ast::Pow(a, k) => self
                .eval(a)?
                .pow(*k)
                .ok_or_else(|| ParseError::Invalid { pos: a.position(), msg: "negative power of a non-monomial".into() }),
        }
    }
}

/// Parses a scalar expression with the default symbols `g` and `c`.
pub fn parse(text: &str) -> Result<CoeffExpr, ParseError> {
    Parser::default().parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{int, rat};

    #[test]
    fn literal_constructions() {
        let e = parse("u*g(u) - lambda*g(u)").unwrap();
        let expect = (CoeffExpr::u() - CoeffExpr::lambda()) * CoeffExpr::func("g", 0);
        assert_eq!(e, expect);
        let e = parse("g'(u)^2*c(u)").unwrap();
        let gp = CoeffExpr::func("g", 1);
        assert_eq!(e, &(&gp * &gp) * &CoeffExpr::func("c", 0));
        assert_eq!(parse("D[g,2](u)").unwrap(), parse("g''(u)").unwrap());
    }

    #[test]
    fn radical_literal_squares_to_one_eighth() {
        let e = parse("1/(2*sqrt(2))").unwrap();
        assert_eq!(&e * &e, CoeffExpr::rational(1, 8));
        assert_eq!(parse("sqrt(1/2)").unwrap(), e.scale(&int(2)));
        assert_eq!(parse("sqrt(8)").unwrap(), parse("2*sqrt(2)").unwrap());
        assert_eq!(parse("3/4").unwrap(), CoeffExpr::constant(rat(3, 4)));
    }

    #[test]
    fn errors_carry_positions() {
        match parse("u + h(u)") {
            Err(ParseError::UnknownSymbol { pos, name }) => {
                assert_eq!(pos, 4);
                assert_eq!(name, "h");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("u + * 2"), Err(ParseError::Syntax { pos: 4, .. })));
        assert!(matches!(parse("(u"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("u $"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(Parser::new().declare("h").parse("h(u)").is_ok());
    }

    #[test]
    fn negative_powers_and_render_round_trip() {
        let e = parse("u^(-1)/24 + g(u)^-2*c'(u) - 7/3*lambda^2*sqrt(3)").unwrap();
        let back = parse(&e.to_string()).unwrap();
        assert_eq!(back, e);
    }
}
