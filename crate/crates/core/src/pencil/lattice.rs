//! Shift-operator brackets and their expansion in ε.

use std::collections::BTreeMap;
use std::fmt;

use super::diffop::{DiffOp, Series};
use super::DeltaBracket;
use crate::algebra::ThetaPoly;
use crate::coeff::{CoeffExpr, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    X,
    Y,
}

/// `f(p + kε)` or `exp(f(p + kε))` for the lattice field `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Field(Point, i32),
    Exp(Point, i32),
}

/// Polynomial with rational coefficients in lattice atoms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LatticeCoeff {
    terms: BTreeMap<BTreeMap<Atom, u32>, Rational>,
}

impl LatticeCoeff {
    pub fn constant(r: Rational) -> Self {
        let mut c = Self::default();
        c.add_term(BTreeMap::new(), r);
        c
    }

    pub fn atom(a: Atom) -> Self {
        let mut c = Self::default();
        c.add_term(BTreeMap::from([(a, 1)]), Rational::from_integer(1.into()));
        c
    }

    fn add_term(&mut self, m: BTreeMap<Atom, u32>, r: Rational) {
        let slot = self.terms.entry(m.clone()).or_insert_with(|| Rational::from_integer(0.into()));
        *slot += r;
        if *slot == Rational::from_integer(0.into()) {
            self.terms.remove(&m);
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BTreeMap<Atom, u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, r) in &other.terms {
            out.add_term(m.clone(), r.clone());
        }
        out
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = Self::default();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * r);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (m, a) in &self.terms {
            for (n, b) in &other.terms {
                let mut p = m.clone();
                for (atom, e) in n {
                    *p.entry(*atom).or_insert(0) += e;
                }
                out.add_term(p, a * b);
            }
        }
        out
    }

    /// Rewrites `exp(v(p))` as `u(p)/factor`; plain `v` atoms are rejected.
    fn exponential_to_field(&self, factor: &Rational) -> Result<Self> {
        let mut out = Self::default();
        for (m, r) in &self.terms {
            let mut n = BTreeMap::new();
            let mut r = r.clone();
            for (atom, e) in m {
                match atom {
                    Atom::Exp(p, k) => {
                        n.insert(Atom::Field(*p, *k), *e);
                        for _ in 0..*e {
                            r /= factor;
                        }
                    }
                    Atom::Field(..) => {
                        return Err(Error::Invalid(
                            "coefficient is not a polynomial in exp of the lattice field".into(),
                        ))
                    }
                }
            }
            out.add_term(n, r);
        }
        Ok(out)
    }
}

impl fmt::Display for LatticeCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, r)| {
                let mut s = r.to_string();
                for (atom, e) in m {
                    let (name, p, k) = match atom {
                        Atom::Field(p, k) => ("f", p, k),
                        Atom::Exp(p, k) => ("exp f", p, k),
                    };
                    let p = if *p == Point::X { "x" } else { "y" };
                    s.push_str(&format!("*{name}({p}{k:+}eps)^{e}"));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `ε^eps_power · coeff · δ(x − y + shift·ε)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeTerm {
    pub shift: i32,
    pub coeff: LatticeCoeff,
    pub eps_power: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeBracket {
    field: String,
    terms: Vec<LatticeTerm>,
}

/// Change of dependent variable applied before expansion.
#[derive(Clone, Debug, PartialEq)]
pub enum Substitution {
    /// `u = factor·exp(v)`, so `{u(x),u(y)} = u(x)u(y){v(x),v(y)}`.
    Exponential { factor: Rational },
}

impl LatticeBracket {
    pub fn new(field: &str, terms: Vec<LatticeTerm>) -> Self {
        LatticeBracket { field: field.to_string(), terms }
    }

    pub fn field(&self) -> &str {
        &self.field
    }

    pub fn terms(&self) -> &[LatticeTerm] {
        &self.terms
    }

    pub fn substitute(&self, subst: &Substitution) -> Result<LatticeBracket> {
        let Substitution::Exponential { factor } = subst;
        let uu = LatticeCoeff::atom(Atom::Field(Point::X, 0)).mul(&LatticeCoeff::atom(Atom::Field(Point::Y, 0)));
        let mut terms = Vec::new();
        for t in &self.terms {
            let coeff = t.coeff.exponential_to_field(factor)?.mul(&uu);
            terms.push(LatticeTerm { shift: t.shift, coeff, eps_power: t.eps_power });
        }
        Ok(LatticeBracket { field: "u".into(), terms })
    }
}

/// `u(x + kε)` to order `n`.
fn shifted_field(k: i32, n: u32) -> Series<ThetaPoly> {
    let mut s = Series::zero(n);
    let mut factor = Rational::from_integer(1.into());
    for j in 0..=n {
        if j > 0 {
            factor = factor * Rational::from_integer(k.into()) / Rational::from_integer(j.into());
        }
        let jet = if j == 0 { ThetaPoly::from_coeff(CoeffExpr::u()) } else { ThetaPoly::u_jet(j) };
        s.set(j, jet.scale_rational(&factor));
    }
    s
}

/// Expands a lattice bracket into δ-derivatives up to `ε^order`.
///
/// `y` is eliminated first and exactly: on the support of `δ(x − y + sε)`
/// the point `y + kε` equals `x + (s + k)ε`. The shifted fields and the
/// shifted δ are then Taylor expanded in ε.
pub fn expand_lattice_bracket(b: &LatticeBracket, subst: Option<&Substitution>, order: u32) -> Result<DeltaBracket> {
    let b = match subst {
        Some(s) => b.substitute(s)?,
        None => b.clone(),
    };
    // (ε power, δ order) → coefficient; negative powers must cancel
    let mut acc: BTreeMap<(i32, u32), ThetaPoly> = BTreeMap::new();
    for t in &b.terms {
        let span = order as i32 - t.eps_power;
        if span < 0 {
            continue;
        }
        let span = span as u32;
        for (m, r) in t.coeff.terms() {
            let mut prod = Series::constant(ThetaPoly::from_coeff(CoeffExpr::constant(r.clone())), span);
            for (atom, e) in m {
                let k = match atom {
                    Atom::Field(Point::X, k) => *k,
                    Atom::Field(Point::Y, k) => t.shift + k,
                    Atom::Exp(..) => {
                        return Err(Error::Invalid("exp atoms need a substitution before expansion".into()))
                    }
                };
                let f = shifted_field(k, span);
                for _ in 0..*e {
                    prod = prod.mul(&f);
                }
            }
            for (a, pa) in prod.terms() {
                if pa.is_zero() {
                    continue;
                }
                let mut w = Rational::from_integer(1.into());
                for j in 0..=(span - a) {
                    if j > 0 {
                        w = w * Rational::from_integer(t.shift.into()) / Rational::from_integer(j.into());
                    }
                    if w == Rational::from_integer(0.into()) {
                        break;
                    }
                    let key = (t.eps_power + (a + j) as i32, j);
                    let slot = acc.entry(key).or_default();
                    *slot += &pa.scale_rational(&w);
                }
            }
        }
    }
    let mut ops: BTreeMap<u32, DiffOp> = BTreeMap::new();
    for ((e, j), a) in acc {
        if a.is_zero() {
            continue;
        }
        if e < 0 {
            return Err(Error::Invalid(format!("the ε^{e} δ^({j}) term does not cancel: {a}")));
        }
        ops.entry(e as u32).or_default().add_term(j, a);
    }
    DeltaBracket::from_ops(&b.field, ops, Some(order))
}
