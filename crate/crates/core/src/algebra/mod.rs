//! The graded algebra of jet polynomials with odd variables.
//!
//! Elements are finite sums `Σ c_m · m` over [`Monomial`]s with
//! [`CoeffExpr`] coefficients depending on `u = u⁰` and `λ`. Two gradings
//! are tracked: the standard degree (`u^s`, `θ^s` have degree `s`) and the
//! super degree (number of `θ` factors).

mod monomial;

pub use monomial::{Monomial, MAX_JET};

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::Signed;

use crate::coeff::{fmt_scaled, int, CoeffExpr, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThetaPoly {
    terms: BTreeMap<Monomial, CoeffExpr>,
    /// Set once any extension atom (`log u¹`, negative powers of `u¹`) has
    /// entered the computation; sticky under arithmetic.
    extended: bool,
}

impl ThetaPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_coeff(CoeffExpr::one())
    }

    pub fn from_coeff(c: CoeffExpr) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: CoeffExpr) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::term(m, CoeffExpr::one())
    }

    /// The jet variable `u^s`; `s = 0` gives the coefficient variable `u`.
    pub fn u_jet(s: u32) -> Self {
        if s == 0 {
            Self::from_coeff(CoeffExpr::u())
        } else {
            Self::monomial(Monomial::u(s))
        }
    }

    pub fn theta(s: u32) -> Self {
        Self::monomial(Monomial::theta(s))
    }

    /// Product of odd variables in the given order.
    pub fn thetas(indices: &[u32]) -> Self {
        match Monomial::from_parts(&[], indices) {
            Some((sign, m)) => Self::term(m, CoeffExpr::integer(sign as i64)),
            None => Self::zero(),
        }
    }

    /// `log u¹`, only available in extended mode.
    pub fn log_u1() -> Self {
        Self::from_coeff(CoeffExpr::log_u1())
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    pub fn set_extended(&mut self) {
        self.extended = true;
    }

    pub fn has_extension_atoms(&self) -> bool {
        self.terms.values().any(CoeffExpr::has_extension_atoms)
    }

    /// Drops the extended flag, asserting that every extension atom cancelled.
    pub fn into_plain(mut self) -> Result<Self> {
        if self.has_extension_atoms() {
            return Err(Error::ExtensionAtomsPersist(self.to_string()));
        }
        self.extended = false;
        Ok(self)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CoeffExpr)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> CoeffExpr {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Adds `c · m`, folding powers of `u¹` carried by extension coefficients
    /// into the monomial so that the representation stays canonical.
    pub fn add_term(&mut self, m: Monomial, c: CoeffExpr) {
        if c.is_zero() {
            return;
        }
        if !c.has_extension_atoms() {
            self.add_plain(m, c);
            return;
        }
        self.extended = true;
        for (cm, r) in c.into_terms() {
            let total = m.u_exp(1) as i32 + cm.u1_power();
            let (mono, cm) = if total >= 0 {
                (m.clone().with_u(1, total as u32), cm.with_u1(0))
            } else {
                (m.clone().with_u(1, 0), cm.with_u1(total))
            };
            self.add_plain(mono, CoeffExpr::from_term(cm, r));
        }
    }

    fn add_plain(&mut self, m: Monomial, c: CoeffExpr) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&CoeffExpr) -> CoeffExpr) -> Self {
        let mut out = Self { terms: BTreeMap::new(), extended: self.extended };
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn scale(&self, c: &CoeffExpr) -> Self {
        self.map_coeffs(|x| x * c)
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.map_coeffs(|x| x.scale(r))
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        Self {
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
            extended: self.extended,
        }
    }

    /// `(standard degree, super degree)` of each term. Negative powers of
    /// `u¹` in extension coefficients lower the standard degree.
    fn term_bidegrees(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        self.terms.iter().flat_map(|(m, c)| {
            c.terms().map(move |(cm, _)| (m.degree() as i64 + cm.u1_power() as i64, m.super_degree()))
        })
    }

    /// `Some((d, p))` when every term has the same bidegree.
    pub fn bidegree(&self) -> Option<(i64, u32)> {
        let mut it = self.term_bidegrees();
        let first = it.next()?;
        it.all(|b| b == first).then_some(first)
    }

    pub fn standard_degree(&self) -> Option<i64> {
        let mut it = self.term_bidegrees().map(|b| b.0);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn super_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(Monomial::super_degree);
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// Homogeneous component of bidegree `(d, p)`.
    pub fn component(&self, d: i64, p: u32) -> Self {
        let mut out = Self { terms: BTreeMap::new(), extended: self.extended };
        for (m, c) in &self.terms {
            if m.super_degree() != p {
                continue;
            }
            for (cm, r) in c.terms() {
                if m.degree() as i64 + cm.u1_power() as i64 == d {
                    out.add_term(m.clone(), CoeffExpr::from_term(cm.clone(), r.clone()));
                }
            }
        }
        out
    }

    pub fn max_jet(&self) -> u32 {
        self.terms.keys().map(Monomial::max_jet).max().unwrap_or(0)
    }

    pub fn lambda_degree(&self) -> Option<u32> {
        self.terms.values().filter_map(CoeffExpr::lambda_degree).max()
    }

    pub fn lambda_coeff(&self, k: u32) -> Self {
        self.map_coeffs(|c| c.lambda_coeff(k))
    }

    pub fn subst_lambda(&self, v: &CoeffExpr) -> Self {
        self.map_coeffs(|c| c.subst_lambda(v))
    }

    pub fn is_lambda_free(&self) -> bool {
        self.terms.values().all(CoeffExpr::is_lambda_free)
    }

    /// `∂/∂u^s`; for `s = 0` this differentiates the coefficients in `u`,
    /// for `s = 1` it also differentiates extension atoms.
    pub fn d_u(&self, s: u32) -> Self {
        let mut out = Self { terms: BTreeMap::new(), extended: self.extended };
        for (m, c) in &self.terms {
            if s == 0 {
                out.add_term(m.clone(), c.ddu());
                continue;
            }
            if let Some((e, lowered)) = m.d_u(s) {
                out.add_term(lowered, c.scale(&int(e as i64)));
            }
            if s == 1 && c.has_extension_atoms() {
                out.add_term(m.clone(), c.d_du1());
            }
        }
        out
    }

    /// Left derivative `∂/∂θ^s`.
    pub fn d_theta(&self, s: u32) -> Self {
        let mut out = Self { terms: BTreeMap::new(), extended: self.extended };
        for (m, c) in &self.terms {
            if let Some((sign, rest)) = m.d_theta(s) {
                out.add_term(rest, if sign < 0 { -c } else { c.clone() });
            }
        }
        out
    }

    /// The total derivative `∂ = Σ u^{s+1} ∂/∂u^s + θ^{s+1} ∂/∂θ^s`.
    pub fn total_derivative(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), extended: self.extended };
        for (m, c) in &self.terms {
            let cu = c.ddu();
            if !cu.is_zero() {
                let (_, mm) = m.mul(&Monomial::u(1)).unwrap();
                out.add_term(mm, cu);
            }
            if c.has_extension_atoms() {
                let (_, mm) = m.mul(&Monomial::u(2)).unwrap();
                out.add_term(mm, c.d_du1());
            }
            for (s, e) in m.u_factors() {
                let lowered = m.clone().with_u(s, e - 1);
                let raised = lowered.clone().with_u(s + 1, lowered.u_exp(s + 1) + 1);
                out.add_term(raised, c.scale(&int(e as i64)));
            }
            for s in m.theta_indices() {
                if s + 1 > MAX_JET || m.has_theta(s + 1) {
                    continue;
                }
                // θ^s → θ^{s+1} in place keeps the ascending order, no sign
                out.add_term(m.replace_theta(s, s + 1), c.clone());
            }
        }
        out
    }

    /// `∂^k`.
    pub fn total_derivative_n(&self, k: u32) -> Self {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.total_derivative();
        }
        p
    }

    /// Splits by odd part: `Σ_Θ (even coefficient) · Θ`, with the even
    /// factors to the left of the θ-product.
    pub fn split_by_odd_part(&self) -> BTreeMap<Monomial, ThetaPoly> {
        let mut out: BTreeMap<Monomial, ThetaPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let entry = out.entry(m.odd_part()).or_default();
            entry.extended |= self.extended;
            entry.add_term(m.even_part(), c.clone());
        }
        out
    }
}

impl From<CoeffExpr> for ThetaPoly {
    fn from(c: CoeffExpr) -> Self {
        ThetaPoly::from_coeff(c)
    }
}

impl AddAssign<&ThetaPoly> for ThetaPoly {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: &ThetaPoly) {
        self.extended |= rhs.extended;
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&ThetaPoly> for ThetaPoly {
    fn sub_assign(&mut self, rhs: &ThetaPoly) {
        self.extended |= rhs.extended;
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl Add for &ThetaPoly {
    type Output = ThetaPoly;
    fn add(self, rhs: &ThetaPoly) -> ThetaPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ThetaPoly {
    type Output = ThetaPoly;
    fn sub(self, rhs: &ThetaPoly) -> ThetaPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &ThetaPoly {
    type Output = ThetaPoly;
    fn neg(self) -> ThetaPoly {
        self.map_coeffs(|c| -c)
    }
}

impl Mul for &ThetaPoly {
    type Output = ThetaPoly;
    fn mul(self, rhs: &ThetaPoly) -> ThetaPoly {
        let mut out = ThetaPoly { terms: BTreeMap::new(), extended: self.extended || rhs.extended };
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                if let Some((sign, m)) = ma.mul(mb) {
                    let c = ca * cb;
                    out.add_term(m, if sign < 0 { -c } else { c });
                }
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for ThetaPoly {
            type Output = ThetaPoly;
            fn $method(self, rhs: ThetaPoly) -> ThetaPoly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&ThetaPoly> for ThetaPoly {
            type Output = ThetaPoly;
            fn $method(self, rhs: &ThetaPoly) -> ThetaPoly {
                (&self).$method(rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for ThetaPoly {
    type Output = ThetaPoly;
    fn neg(self) -> ThetaPoly {
        -&self
    }
}

impl fmt::Display for ThetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let mono = m.to_string();
            if c.num_terms() == 1 {
                let (cm, r) = c.terms().next().unwrap();
                let body = [cm.to_string(), mono].into_iter().filter(|s| !s.is_empty()).collect::<Vec<_>>().join("*");
                let s = fmt_scaled(r, &body);
                match (first, r.is_negative()) {
                    (true, false) => write!(f, "{s}")?,
                    (true, true) => write!(f, "-{s}")?,
                    (false, false) => write!(f, " + {s}")?,
                    (false, true) => write!(f, " - {s}")?,
                }
            } else {
                let sep = if first { "" } else { " + " };
                if mono.is_empty() {
                    write!(f, "{sep}({c})")?;
                } else {
                    write!(f, "{sep}({c})*{mono}")?;
                }
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for ThetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ThetaPoly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(name: &str) -> CoeffExpr {
        CoeffExpr::func(name, 0)
    }

    #[test]
    fn products_with_signs() {
        assert_eq!(ThetaPoly::theta(1) * ThetaPoly::theta(0), -ThetaPoly::thetas(&[0, 1]));
        assert!((ThetaPoly::theta(2) * ThetaPoly::theta(2)).is_zero());
        let a = ThetaPoly::u_jet(1) * ThetaPoly::theta(0);
        let b = ThetaPoly::from_coeff(f("g")) * ThetaPoly::theta(1);
        let expect = ThetaPoly::from_coeff(f("g")) * ThetaPoly::u_jet(1) * ThetaPoly::thetas(&[0, 1]);
        assert_eq!(a * b, expect);
    }

    #[test]
    fn total_derivative_examples() {
        let fu = ThetaPoly::from_coeff(f("f"));
        let expect = ThetaPoly::from_coeff(CoeffExpr::func("f", 1)) * ThetaPoly::u_jet(1);
        assert_eq!(fu.total_derivative(), expect);
        assert_eq!(ThetaPoly::thetas(&[0, 1]).total_derivative(), ThetaPoly::thetas(&[0, 2]));
        // ∂(u¹ log u¹) = u² log u¹ + u²
        let x = ThetaPoly::u_jet(1) * ThetaPoly::log_u1();
        let expect = &(ThetaPoly::u_jet(2) * ThetaPoly::log_u1()) + &ThetaPoly::u_jet(2);
        assert_eq!(x.total_derivative(), expect);
        assert!(x.is_extended());
    }

    #[test]
    fn extension_powers_fold_into_monomials() {
        let inv = ThetaPoly::from_coeff(CoeffExpr::u1_power(-1));
        let p = ThetaPoly::u_jet(1) * ThetaPoly::u_jet(1) * inv.clone();
        assert_eq!(p.into_plain().unwrap(), ThetaPoly::u_jet(1));
        let q = ThetaPoly::u_jet(2) * inv;
        assert_eq!(q.standard_degree(), Some(1));
        assert!(q.into_plain().is_err());
    }

    #[test]
    fn derivative_raises_degree() {
        let p = ThetaPoly::from_coeff(f("g")) * ThetaPoly::u_jet(2) * ThetaPoly::thetas(&[0, 3]);
        assert_eq!(p.bidegree(), Some((5, 2)));
        assert_eq!(p.total_derivative().bidegree(), Some((6, 2)));
    }
}
