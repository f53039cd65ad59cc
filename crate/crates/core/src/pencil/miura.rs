//! Second-type Miura transformations `w = u + Σ ε^e F_e`.

use std::collections::BTreeMap;

use super::diffop::{DiffOp, Series};
use super::format::parse_eps_jet;
use super::DeltaBracket;
use crate::algebra::ThetaPoly;
use crate::coeff::parse::Parser;
use crate::coeff::{CoeffExpr, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MiuraTransform {
    from: String,
    to: String,
    /// `F_e` for `e ≥ 1`.
    corrections: BTreeMap<u32, ThetaPoly>,
    /// `None` when the series is exact.
    order: Option<u32>,
}

impl MiuraTransform {
    pub fn new(from: &str, to: &str, corrections: BTreeMap<u32, ThetaPoly>, order: Option<u32>) -> Result<Self> {
        let mut kept = BTreeMap::new();
        for (e, f) in corrections {
            if f.is_zero() {
                continue;
            }
            if e == 0 {
                return Err(Error::Invalid("the ε⁰ part of a second-type transformation is the identity".into()));
            }
            if f.super_degree() != Some(0) {
                return Err(Error::Invalid(format!("F_{e} must be θ-free")));
            }
            if f.standard_degree() != Some(e as i64) {
                return Err(Error::DegreeMismatch { expected: e.to_string(), found: format!("{:?}", f.standard_degree()) });
            }
            kept.insert(e, f);
        }
        Ok(MiuraTransform { from: from.to_string(), to: to.to_string(), corrections: kept, order })
    }

    pub fn identity(from: &str, to: &str) -> Self {
        MiuraTransform { from: from.to_string(), to: to.to_string(), corrections: BTreeMap::new(), order: None }
    }

    /// Parses `F` written in jets of `to`, e.g. `u + eps/(2*sqrt(2))*u1`.
    pub fn parse(from: &str, to: &str, text: &str, parser: &Parser) -> Result<Self> {
        let mut series = parse_eps_jet(text, to, parser)?;
        let lead = series.remove(&0).unwrap_or_default();
        if lead != ThetaPoly::from_coeff(CoeffExpr::u()) {
            return Err(Error::Invalid(format!("leading term must be `{to}`, found {lead}")));
        }
        Self::new(from, to, series, None)
    }

    pub fn from_coordinate(&self) -> &str {
        &self.from
    }

    pub fn to_coordinate(&self) -> &str {
        &self.to
    }

    pub fn correction(&self, e: u32) -> ThetaPoly {
        self.corrections.get(&e).cloned().unwrap_or_default()
    }

    pub fn order(&self) -> Option<u32> {
        self.order
    }

    fn series(&self, n: u32) -> Series<ThetaPoly> {
        let mut s = Series::constant(ThetaPoly::from_coeff(CoeffExpr::u()), n);
        for (e, f) in &self.corrections {
            s.set(*e, f.clone());
        }
        s
    }

    /// `L = Σ_s (∂F/∂u^s) ∂^s`.
    fn linearization(&self, n: u32) -> Series<DiffOp> {
        let mut l = Series::constant(DiffOp::identity(), n);
        for (e, f) in &self.corrections {
            let mut op = DiffOp::zero();
            for s in 0..=f.max_jet() {
                op.add_term(s, f.d_u(s));
            }
            l.set(*e, op);
        }
        l
    }
}

struct Substituter {
    order: u32,
    /// `∂^s F`, grown on demand.
    jets: Vec<Series<ThetaPoly>>,
    /// powers of `F − u`
    shift_powers: Vec<Series<ThetaPoly>>,
}

impl Substituter {
    fn new(f: Series<ThetaPoly>) -> Self {
        let order = f.order();
        let mut delta = f.clone();
        delta.set(0, ThetaPoly::zero());
        let mut shift_powers = vec![Series::constant(ThetaPoly::one(), order)];
        for _ in 0..order {
            let next = shift_powers.last().unwrap().mul(&delta);
            shift_powers.push(next);
        }
        Substituter { order, jets: vec![f], shift_powers }
    }

    fn jet(&mut self, s: u32) -> &Series<ThetaPoly> {
        while self.jets.len() <= s as usize {
            let next = self.jets.last().unwrap().map(ThetaPoly::total_derivative);
            self.jets.push(next);
        }
        &self.jets[s as usize]
    }

    /// `c(w)` at `w = F`: `Σ_n c⁽ⁿ⁾(u)(F − u)ⁿ/n!`.
    fn coeff(&self, c: &CoeffExpr) -> Series<ThetaPoly> {
        let mut out = Series::zero(self.order);
        let mut dc = c.clone();
        let mut fact = Rational::from_integer(1.into());
        for n in 0..=self.order {
            if n > 0 {
                dc = dc.ddu();
                fact *= Rational::from_integer(n.into());
            }
            if dc.is_zero() {
                break;
            }
            let c_n = dc.scale(&fact.recip());
            out = out.add(&self.shift_powers[n as usize].scale(&c_n));
        }
        out
    }

    fn apply(&mut self, a: &ThetaPoly) -> Series<ThetaPoly> {
        let mut out = Series::zero(self.order);
        for (m, c) in a.terms() {
            let mut term = self.coeff(c);
            for (s, e) in m.u_factors() {
                let j = self.jet(s).clone();
                for _ in 0..e {
                    term = term.mul(&j);
                }
            }
            out = out.add(&term);
        }
        out
    }
}

/// `K_u = L⁻¹ ∘ K_w|_{w=F(u)} ∘ (L†)⁻¹` to `ε^order`.
pub fn miura_transform(b: &DeltaBracket, f: &MiuraTransform, order: u32) -> Result<DeltaBracket> {
    if b.coordinate() != f.from_coordinate() {
        return Err(Error::Invalid(format!(
            "bracket is in `{}` but the transformation expects `{}`",
            b.coordinate(),
            f.from_coordinate()
        )));
    }
    let available = [b.order(), f.order()].into_iter().flatten().min();
    if let Some(av) = available {
        if order > av {
            return Err(Error::OrderOverflow { requested: order as usize, available: av as usize });
        }
    }
    let l = f.linearization(order);
    let l_inv = l.neumann_inverse().expect("identity leading term");
    let l_adj_inv = l.adjoint().neumann_inverse().expect("identity leading term");
    let mut sub = Substituter::new(f.series(order));
    let mut kw: Series<DiffOp> = Series::zero(order);
    for (e, op) in b.ops() {
        if e > order {
            continue;
        }
        for (k, a) in op.terms() {
            let sa = sub.apply(a);
            for (t, piece) in sa.terms() {
                if e + t > order || piece.is_zero() {
                    continue;
                }
                let mut slot = kw.get(e + t).clone();
                slot.add_term(k, piece.clone());
                kw.set(e + t, slot);
            }
        }
    }
    let ku = l_inv.mul(&kw).mul(&l_adj_inv);
    let ops = ku.terms().map(|(e, op)| (e, op.clone())).collect();
    DeltaBracket::from_ops(f.to_coordinate(), ops, Some(order))
}
