//! Scalar differential operators `Σ A_k ∂^k` and their ε-series.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::ThetaPoly;
use crate::coeff::{binomial, CoeffExpr, Rational};

#[derive(Clone, Default, PartialEq)]
pub struct DiffOp {
    coeffs: BTreeMap<u32, ThetaPoly>,
}

impl DiffOp {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::term(0, ThetaPoly::one())
    }

    /// `a·∂^k`.
    pub fn term(k: u32, a: ThetaPoly) -> Self {
        let mut op = Self::zero();
        op.add_term(k, a);
        op
    }

    pub fn add_term(&mut self, k: u32, a: ThetaPoly) {
        if a.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(k).or_default();
        *slot += &a;
        if slot.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn coeff(&self, k: u32) -> ThetaPoly {
        self.coeffs.get(&k).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &ThetaPoly)> {
        self.coeffs.iter().map(|(k, a)| (*k, a))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn order(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn map_coeffs(&self, f: impl Fn(&ThetaPoly) -> ThetaPoly) -> Self {
        let mut out = Self::zero();
        for (k, a) in &self.coeffs {
            out.add_term(*k, f(a));
        }
        out
    }

    pub fn scale(&self, c: &CoeffExpr) -> Self {
        self.map_coeffs(|a| a.scale(c))
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.map_coeffs(|a| a.scale_rational(r))
    }

    pub fn add(&self, other: &DiffOp) -> Self {
        let mut out = self.clone();
        for (k, a) in &other.coeffs {
            out.add_term(*k, a.clone());
        }
        out
    }

    pub fn sub(&self, other: &DiffOp) -> Self {
        let mut out = self.clone();
        for (k, a) in &other.coeffs {
            out.add_term(*k, -a);
        }
        out
    }

    /// Left multiplication by a function.
    pub fn left_mul(&self, a: &ThetaPoly) -> Self {
        self.map_coeffs(|b| a * b)
    }

    /// `self ∘ other`, via `∂^k ∘ B = Σ_j C(k,j) ∂^j(B) ∂^{k−j}`.
    pub fn compose(&self, other: &DiffOp) -> Self {
        let mut out = Self::zero();
        for (k, a) in &self.coeffs {
            for (l, b) in &other.coeffs {
                let mut db = b.clone();
                for j in 0..=*k {
                    if db.is_zero() {
                        break;
                    }
                    out.add_term(k - j + l, (a * &db).scale_rational(&binomial(*k, j)));
                    db = db.total_derivative();
                }
            }
        }
        out
    }

    /// Formal adjoint `Σ (−∂)^k ∘ A_k`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (k, a) in &self.coeffs {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let mut da = a.clone();
            for j in 0..=*k {
                if da.is_zero() {
                    break;
                }
                let c = binomial(*k, j) * Rational::from_integer(sign.into());
                out.add_term(k - j, da.scale_rational(&c));
                da = da.total_derivative();
            }
        }
        out
    }

    /// `(K − K†)/2`.
    pub fn skew_part(&self) -> Self {
        self.sub(&self.adjoint()).scale_rational(&Rational::new(1.into(), 2.into()))
    }

    /// `(K + K†)/2`.
    pub fn symmetric_part(&self) -> Self {
        self.add(&self.adjoint()).scale_rational(&Rational::new(1.into(), 2.into()))
    }

    pub fn subst_lambda(&self, v: &CoeffExpr) -> Self {
        self.map_coeffs(|a| a.subst_lambda(v))
    }

    pub fn lambda_coeff(&self, k: u32) -> Self {
        self.map_coeffs(|a| a.lambda_coeff(k))
    }

    pub fn has_extension_atoms(&self) -> bool {
        self.coeffs.values().any(ThetaPoly::has_extension_atoms)
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.coeffs.iter().rev().map(|(k, a)| format!("({a})*D^{k}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffOp({self})")
    }
}

/// A truncated power series in ε with coefficients of type `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<T> {
    /// `terms[e]` multiplies `ε^e`; its length is the truncation order + 1.
    terms: Vec<T>,
}

pub trait SeriesCoeff: Clone + PartialEq {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
}

impl SeriesCoeff for ThetaPoly {
    fn zero() -> Self {
        ThetaPoly::zero()
    }
    fn is_zero(&self) -> bool {
        ThetaPoly::is_zero(self)
    }
    fn one() -> Self {
        ThetaPoly::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl SeriesCoeff for DiffOp {
    fn zero() -> Self {
        DiffOp::zero()
    }
    fn is_zero(&self) -> bool {
        DiffOp::is_zero(self)
    }
    fn one() -> Self {
        DiffOp::identity()
    }
    fn add(&self, other: &Self) -> Self {
        DiffOp::add(self, other)
    }
    fn neg(&self) -> Self {
        DiffOp::zero().sub(self)
    }
    fn mul(&self, other: &Self) -> Self {
        self.compose(other)
    }
}

impl<T: SeriesCoeff> Series<T> {
    pub fn zero(order: u32) -> Self {
        Series { terms: vec![T::zero(); order as usize + 1] }
    }

    pub fn constant(c: T, order: u32) -> Self {
        let mut s = Self::zero(order);
        s.terms[0] = c;
        s
    }

    pub fn from_terms(terms: Vec<T>, order: u32) -> Self {
        let mut s = Self::zero(order);
        for (e, t) in terms.into_iter().enumerate() {
            if e <= order as usize {
                s.terms[e] = t;
            }
        }
        s
    }

    pub fn order(&self) -> u32 {
        self.terms.len() as u32 - 1
    }

    pub fn get(&self, e: u32) -> &T {
        &self.terms[e as usize]
    }

    pub fn set(&mut self, e: u32, t: T) {
        if e <= self.order() {
            self.terms[e as usize] = t;
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &T)> {
        self.terms.iter().enumerate().map(|(e, t)| (e as u32, t))
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Series { terms: (0..=order).map(|e| self.get(e).add(other.get(e))).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = Self::zero(order);
        for i in 0..=order {
            if self.get(i).is_zero() {
                continue;
            }
            for j in 0..=(order - i) {
                if other.get(j).is_zero() {
                    continue;
                }
                out.terms[(i + j) as usize] = out.get(i + j).add(&self.get(i).mul(other.get(j)));
            }
        }
        out
    }

    /// Shift by `ε^k`, keeping the truncation order.
    pub fn shift(&self, k: u32) -> Self {
        let order = self.order();
        let mut out = Self::zero(order);
        for e in 0..=order {
            if e + k <= order {
                out.terms[(e + k) as usize] = self.get(e).clone();
            }
        }
        out
    }

    /// Inverse of `1 + R` with `R = O(ε)`, by the Neumann series.
    pub fn neumann_inverse(&self) -> Option<Self> {
        if *self.get(0) != T::one() {
            return None;
        }
        let order = self.order();
        let mut r = self.clone();
        r.terms[0] = T::zero();
        let minus_r = Series { terms: r.terms.iter().map(T::neg).collect() };
        let mut acc = Self::constant(T::one(), order);
        let mut power = Self::constant(T::one(), order);
        for _ in 0..order {
            power = power.mul(&minus_r);
            acc = acc.add(&power);
        }
        Some(acc)
    }
}

impl Series<DiffOp> {
    pub fn adjoint(&self) -> Self {
        Series { terms: self.terms.iter().map(DiffOp::adjoint).collect() }
    }
}

impl Series<ThetaPoly> {
    pub fn map(&self, f: impl Fn(&ThetaPoly) -> ThetaPoly) -> Self {
        Series { terms: self.terms.iter().map(f).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(ThetaPoly::one(), self.order());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale(&self, c: &CoeffExpr) -> Self {
        self.map(|t| t.scale(c))
    }
}
