//! Bracket and lattice files, and the expression evaluators behind them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::lattice::{Atom, LatticeBracket, LatticeCoeff, LatticeTerm, Point};
use super::DeltaBracket;
use crate::algebra::{Monomial, ThetaPoly};
use crate::coeff::parse::{parse_ast, Ast, ParseError, Parser};
use crate::coeff::{CoeffExpr, Rational};
use crate::error::{Error, Result};

/// Polynomial in ε with jet-polynomial coefficients.
pub type EpsPoly = BTreeMap<u32, ThetaPoly>;

fn jet_index(name: &str, coordinate: &str) -> Option<u32> {
    for base in [coordinate, "u"] {
        let Some(rest) = name.strip_prefix(base) else { continue };
        if rest.is_empty() {
            return Some(0);
        }
        if rest.bytes().all(|b| b == b'x') {
            return Some(rest.len() as u32);
        }
        if rest.bytes().all(|b| b.is_ascii_digit()) && !rest.starts_with('0') {
            return rest.parse().ok();
        }
    }
    None
}

fn constant_poly(c: CoeffExpr) -> EpsPoly {
    let mut out = EpsPoly::new();
    if !c.is_zero() {
        out.insert(0, ThetaPoly::from_coeff(c));
    }
    out
}

fn add_into(acc: &mut EpsPoly, e: u32, t: ThetaPoly) {
    let slot = acc.entry(e).or_default();
    *slot += &t;
    if slot.is_zero() {
        acc.remove(&e);
    }
}

fn eps_add(a: EpsPoly, b: EpsPoly, sign: i64) -> EpsPoly {
    let mut out = a;
    for (e, t) in b {
        add_into(&mut out, e, t.scale_rational(&Rational::from_integer(sign.into())));
    }
    out
}

fn eps_mul(a: &EpsPoly, b: &EpsPoly) -> EpsPoly {
    let mut out = EpsPoly::new();
    for (i, x) in a {
        for (j, y) in b {
            add_into(&mut out, i + j, x * y);
        }
    }
    out
}

/// A jet-free, ε-free value, if `p` is one.
fn as_scalar(p: &EpsPoly) -> Option<CoeffExpr> {
    match p.len() {
        0 => Some(CoeffExpr::zero()),
        1 => {
            let t = p.get(&0)?;
            if t.num_terms() == 1 {
                let (m, c) = t.terms().next()?;
                (*m == Monomial::one()).then(|| c.clone())
            } else {
                None
            }
        }
        _ => None,
    }
}

fn rename_call_arg(ast: &Ast, coordinate: &str) -> Ast {
    match ast {
        Ast::Call { name, order, args, pos } => {
            let args = args
                .iter()
                .map(|a| match a {
                    Ast::Ident { name, pos } if name == coordinate => Ast::Ident { name: "u".into(), pos: *pos },
                    other => other.clone(),
                })
                .collect();
            Ast::Call { name: name.clone(), order: *order, args, pos: *pos }
        }
        other => other.clone(),
    }
}

/// Evaluates an expression in jets of `coordinate` and `eps`.
pub fn eval_eps_jet(ast: &Ast, coordinate: &str, parser: &Parser) -> Result<EpsPoly, ParseError> {
    Ok(match ast {
        Ast::Int(_) => constant_poly(parser.eval(ast)?),
        Ast::Ident { name, .. } if name == "eps" => EpsPoly::from([(1, ThetaPoly::one())]),
        Ast::Ident { name, .. } => match jet_index(name, coordinate) {
            Some(0) => constant_poly(CoeffExpr::u()),
            Some(s) => EpsPoly::from([(0, ThetaPoly::u_jet(s))]),
            None => constant_poly(parser.eval(ast)?),
        },
        Ast::Call { .. } => constant_poly(parser.eval(&rename_call_arg(ast, coordinate))?),
        Ast::Add(a, b) => eps_add(eval_eps_jet(a, coordinate, parser)?, eval_eps_jet(b, coordinate, parser)?, 1),
        Ast::Sub(a, b) => eps_add(eval_eps_jet(a, coordinate, parser)?, eval_eps_jet(b, coordinate, parser)?, -1),
        Ast::Mul(a, b) => eps_mul(&eval_eps_jet(a, coordinate, parser)?, &eval_eps_jet(b, coordinate, parser)?),
        Ast::Neg(a) => eps_add(EpsPoly::new(), eval_eps_jet(a, coordinate, parser)?, -1),
        Ast::Div(a, b, pos) => {
            let d = as_scalar(&eval_eps_jet(b, coordinate, parser)?)
                .ok_or_else(|| ParseError::Invalid { pos: *pos, msg: "only division by a scalar is supported".into() })?;
            let mut out = EpsPoly::new();
            for (e, t) in eval_eps_jet(a, coordinate, parser)? {
                let mut q = ThetaPoly::zero();
                for (m, c) in t.terms() {
                    let c = c.div_exact(&d).ok_or_else(|| ParseError::Invalid {
                        pos: *pos,
                        msg: "division by a non-monomial expression".into(),
                    })?;
                    q += &ThetaPoly::term(m.clone(), c);
                }
                add_into(&mut out, e, q);
            }
            out
        }
        Ast::Pow(a, k) => {
            let base = eval_eps_jet(a, coordinate, parser)?;
            if *k < 0 {
                let s = as_scalar(&base)
                    .and_then(|s| s.pow(*k))
                    .ok_or_else(|| ParseError::Invalid { pos: a.position(), msg: "negative power of a non-scalar".into() })?;
                constant_poly(s)
            } else {
                let mut acc = EpsPoly::from([(0, ThetaPoly::one())]);
                for _ in 0..*k {
                    acc = eps_mul(&acc, &base);
                }
                acc
            }
        }
    })
}

/// Parses a jet polynomial without ε.
pub fn parse_jet(text: &str, coordinate: &str, parser: &Parser) -> Result<ThetaPoly> {
    let p = eval_eps_jet(&parse_ast(text)?, coordinate, parser)?;
    match p.keys().next_back() {
        None => Ok(ThetaPoly::zero()),
        Some(0) => Ok(p[&0].clone()),
        Some(_) => Err(Error::Invalid(format!("`{text}` depends on eps"))),
    }
}

/// Parses an ε-polynomial in jets, such as `u + eps/(2*sqrt(2))*u1`.
pub fn parse_eps_jet(text: &str, coordinate: &str, parser: &Parser) -> Result<EpsPoly> {
    Ok(eval_eps_jet(&parse_ast(text)?, coordinate, parser)?)
}

fn point_of(ast: &Ast) -> Result<(Point, i32), ParseError> {
    // x, y, x+k*eps, y-eps, …
    fn linear(ast: &Ast) -> Option<(Option<Point>, i64)> {
        match ast {
            Ast::Ident { name, .. } => match name.as_str() {
                "x" => Some((Some(Point::X), 0)),
                "y" => Some((Some(Point::Y), 0)),
                "eps" => Some((None, 1)),
                _ => None,
            },
            Ast::Add(a, b) | Ast::Sub(a, b) => {
                let (pa, ka) = linear(a)?;
                let (pb, kb) = linear(b)?;
                let neg = matches!(ast, Ast::Sub(..));
                if neg && pb.is_some() {
                    return None;
                }
                let point = match (pa, pb) {
                    (Some(_), Some(_)) => return None,
                    (p, None) | (None, p) => p,
                };
                Some((point, if neg { ka - kb } else { ka + kb }))
            }
            Ast::Mul(a, b) => {
                let (k, e) = match (a.as_rational(), b.as_rational()) {
                    (Some(k), None) => (k, b),
                    (None, Some(k)) => (k, a),
                    _ => return None,
                };
                let (p, m) = linear(e)?;
                if p.is_some() || !k.is_integer() {
                    return None;
                }
                Some((None, m * i64::try_from(k.to_integer()).ok()?))
            }
            Ast::Neg(a) => {
                let (p, k) = linear(a)?;
                p.is_none().then_some((None, -k))
            }
            _ => None,
        }
    }
    match linear(ast) {
        Some((Some(p), k)) => Ok((p, k as i32)),
        _ => Err(ParseError::Invalid { pos: ast.position(), msg: "expected a lattice point such as x+eps".into() }),
    }
}

/// Evaluates a lattice coefficient over `field(x + k*eps)`, `field(y + k*eps)` and `exp(field(…))`.
pub fn eval_lattice(ast: &Ast, field: &str) -> Result<LatticeCoeff, ParseError> {
    let inv = |pos| ParseError::Invalid { pos, msg: "unsupported lattice coefficient".into() };
    Ok(match ast {
        Ast::Int(n) => LatticeCoeff::constant(Rational::from_integer(n.clone())),
        Ast::Ident { name, pos } => return Err(ParseError::UnknownSymbol { pos: *pos, name: name.clone() }),
        Ast::Call { name, order: 0, args, pos } if name == field => match args.as_slice() {
            [a] => {
                let (p, k) = point_of(a)?;
                LatticeCoeff::atom(Atom::Field(p, k))
            }
            _ => return Err(inv(*pos)),
        },
        Ast::Call { name, order: 0, args, pos } if name == "exp" => match args.as_slice() {
            [Ast::Call { name: f, order: 0, args: inner, .. }] if f == field && inner.len() == 1 => {
                let (p, k) = point_of(&inner[0])?;
                LatticeCoeff::atom(Atom::Exp(p, k))
            }
            _ => return Err(inv(*pos)),
        },
        Ast::Call { name, pos, .. } => return Err(ParseError::UnknownSymbol { pos: *pos, name: name.clone() }),
        Ast::Add(a, b) => eval_lattice(a, field)?.add(&eval_lattice(b, field)?),
        Ast::Sub(a, b) => eval_lattice(a, field)?.add(&eval_lattice(b, field)?.scale(&Rational::from_integer((-1).into()))),
        Ast::Mul(a, b) => eval_lattice(a, field)?.mul(&eval_lattice(b, field)?),
        Ast::Neg(a) => eval_lattice(a, field)?.scale(&Rational::from_integer((-1).into())),
        Ast::Div(a, b, pos) => {
            let d = b.as_rational().filter(|d| *d != Rational::from_integer(0.into())).ok_or_else(|| inv(*pos))?;
            eval_lattice(a, field)?.scale(&d.recip())
        }
        Ast::Pow(a, k) if *k >= 0 => {
            let base = eval_lattice(a, field)?;
            let mut acc = LatticeCoeff::constant(Rational::from_integer(1.into()));
            for _ in 0..*k {
                acc = acc.mul(&base);
            }
            acc
        }
        Ast::Pow(a, _) => return Err(inv(a.position())),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermRecord {
    pub eps: u32,
    pub der: u32,
    pub coeff: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BracketFile {
    pub coordinate: String,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ShiftRecord {
    pub shift: i32,
    pub coeff: String,
    pub eps_power: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LatticeFile {
    #[serde(default = "default_field")]
    pub coordinate: String,
    pub shift_terms: Vec<ShiftRecord>,
}

fn default_field() -> String {
    "u".into()
}

impl BracketFile {
    pub fn from_bracket(b: &DeltaBracket) -> Self {
        let terms = b
            .terms()
            .map(|(eps, der, a)| TermRecord { eps, der, coeff: a.to_string() })
            .collect();
        BracketFile { coordinate: b.coordinate().to_string(), terms }
    }

    pub fn to_bracket(&self, parser: &Parser) -> Result<DeltaBracket> {
        let mut terms = Vec::new();
        for t in &self.terms {
            terms.push((t.eps, t.der, parse_jet(&t.coeff, &self.coordinate, parser)?));
        }
        DeltaBracket::new(&self.coordinate, terms)
    }
}

impl LatticeFile {
    pub fn to_lattice(&self) -> Result<LatticeBracket> {
        let mut terms = Vec::new();
        for t in &self.shift_terms {
            let coeff = eval_lattice(&parse_ast(&t.coeff)?, &self.coordinate)?;
            terms.push(LatticeTerm { shift: t.shift, coeff, eps_power: t.eps_power });
        }
        Ok(LatticeBracket::new(&self.coordinate, terms))
    }
}

pub fn read_bracket(text: &str, parser: &Parser) -> Result<DeltaBracket> {
    let file: BracketFile = serde_json::from_str(text)?;
    file.to_bracket(parser)
}

pub fn write_bracket(b: &DeltaBracket) -> Result<String> {
    Ok(serde_json::to_string_pretty(&BracketFile::from_bracket(b))?)
}

pub fn read_lattice(text: &str) -> Result<LatticeBracket> {
    let file: LatticeFile = serde_json::from_str(text)?;
    file.to_lattice()
}
