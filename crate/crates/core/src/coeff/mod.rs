//! Exact scalar coefficients.
//!
//! A [`CoeffExpr`] is a finite sum of terms `r · √s · λ^a · u^b · Π F^(k)(u)^e`
//! with `r` rational, `s` a squarefree positive integer and `F` an uninterpreted
//! function symbol. Exponents of `u` and of function atoms may be negative
//! (formal inverses such as `g⁻¹`); `λ` only ever appears with a non-negative
//! exponent. Two extension atoms, `log(u¹)` and integer powers of `u¹`, exist
//! for the logarithmic constructions of the pencil module; they are constants
//! for `d/du` and are differentiated only by the total derivative.
//!
//! Every value is kept in expanded normal form, so structural equality is
//! mathematical equality.

pub mod parse;

pub use parse::{parse, parse_ast, Ast, ParseError, Parser};

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `C(n, k)` as a rational.
pub fn binomial(n: u32, k: u32) -> Rational {
    if k > n {
        return int(0);
    }
    let mut r = int(1);
    for i in 0..k {
        r = r * int((n - i) as i64) / int((i + 1) as i64);
    }
    r
}

/// The `order`-th u-derivative of the function symbol `name`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncAtom {
    pub name: Arc<str>,
    pub order: u32,
}

impl FuncAtom {
    pub fn new(name: &str, order: u32) -> Self {
        FuncAtom { name: Arc::from(name), order }
    }

    fn derivative(&self) -> Self {
        FuncAtom { name: self.name.clone(), order: self.order + 1 }
    }
}

/// Product of atoms inside one term; the rational factor lives outside.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoeffMono {
    lambda: u32,
    u: i32,
    /// Squarefree radicand; 1 means no radical.
    radical: u64,
    /// Sorted by atom, exponents nonzero.
    funcs: Vec<(FuncAtom, i32)>,
    log_u1: u32,
    u1: i32,
}

impl Default for CoeffMono {
    fn default() -> Self {
        CoeffMono { lambda: 0, u: 0, radical: 1, funcs: Vec::new(), log_u1: 0, u1: 0 }
    }
}

impl CoeffMono {
    pub fn lambda_power(&self) -> u32 {
        self.lambda
    }

    pub fn u_power(&self) -> i32 {
        self.u
    }

    pub fn u1_power(&self) -> i32 {
        self.u1
    }

    pub fn log_power(&self) -> u32 {
        self.log_u1
    }

    pub fn has_extension_atoms(&self) -> bool {
        self.log_u1 != 0 || self.u1 != 0
    }

    pub fn funcs(&self) -> &[(FuncAtom, i32)] {
        &self.funcs
    }

    pub(crate) fn with_u1(mut self, u1: i32) -> Self {
        self.u1 = u1;
        self
    }

    fn func_exp(&self, atom: &FuncAtom) -> i32 {
        self.funcs
            .binary_search_by(|(a, _)| a.cmp(atom))
            .map(|i| self.funcs[i].1)
            .unwrap_or(0)
    }

    fn mul_func(&mut self, atom: FuncAtom, exp: i32) {
        if exp == 0 {
            return;
        }
        match self.funcs.binary_search_by(|(a, _)| a.cmp(&atom)) {
            Ok(i) => {
                self.funcs[i].1 += exp;
                if self.funcs[i].1 == 0 {
                    self.funcs.remove(i);
                }
            }
            Err(i) => self.funcs.insert(i, (atom, exp)),
        }
    }

    /// Product of two monomials together with the rational factor produced
    /// by combining radicals.
    fn mul(&self, other: &CoeffMono) -> (CoeffMono, u64) {
        let mut out = self.clone();
        out.lambda += other.lambda;
        out.u += other.u;
        out.log_u1 += other.log_u1;
        out.u1 += other.u1;
        let g = self.radical.gcd(&other.radical);
        out.radical = (self.radical / g) * (other.radical / g);
        for (a, e) in &other.funcs {
            out.mul_func(a.clone(), *e);
        }
        (out, g)
    }

    fn max_func_order(&self) -> Option<u32> {
        self.funcs.iter().map(|(a, _)| a.order).max()
    }
}

/// Largest `k` with `k² | n`, and `n / k²`.
fn split_square(mut n: u64) -> (u64, u64) {
    let mut k = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        while n.is_multiple_of(p * p) {
            n /= p * p;
            k *= p;
        }
        p += 1;
    }
    (k, n)
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CoeffExpr {
    terms: BTreeMap<CoeffMono, Rational>,
}

impl fmt::Debug for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoeffExpr({})", self)
    }
}

impl CoeffExpr {
    pub fn zero() -> Self {
        CoeffExpr::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(r: Rational) -> Self {
        Self::from_term(CoeffMono::default(), r)
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(int(n))
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Self::constant(rat(n, d))
    }

    pub fn from_term(mono: CoeffMono, r: Rational) -> Self {
        let mut e = CoeffExpr::zero();
        e.add_term(mono, r);
        e
    }

    pub fn u() -> Self {
        Self::from_term(CoeffMono { u: 1, ..Default::default() }, Rational::one())
    }

    pub fn lambda() -> Self {
        Self::from_term(CoeffMono { lambda: 1, ..Default::default() }, Rational::one())
    }

    /// `F^(order)(u)` for a function symbol `F`.
    pub fn func(name: &str, order: u32) -> Self {
        let mut m = CoeffMono::default();
        m.mul_func(FuncAtom::new(name, order), 1);
        Self::from_term(m, Rational::one())
    }

    /// Exact square root of a positive rational.
    pub fn sqrt(r: &Rational) -> Option<Self> {
        if !r.is_positive() {
            return None;
        }
        let n = r.numer().to_u64()?;
        let d = r.denom().to_u64()?;
        // sqrt(n/d) = sqrt(n d) / d
        let (k, s) = split_square(n.checked_mul(d)?);
        let m = CoeffMono { radical: s, ..Default::default() };
        Some(Self::from_term(m, Rational::new(BigInt::from(k), BigInt::from(d))))
    }

    pub fn log_u1() -> Self {
        Self::from_term(CoeffMono { log_u1: 1, ..Default::default() }, Rational::one())
    }

    pub fn u1_power(k: i32) -> Self {
        Self::from_term(CoeffMono { u1: k, ..Default::default() }, Rational::one())
    }

    pub fn add_term(&mut self, mono: CoeffMono, r: Rational) {
        if r.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(r);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += r;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CoeffMono, &Rational)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (CoeffMono, Rational)> {
        self.terms.into_iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a rational number when the expression is a plain constant.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, r) = self.terms.iter().next().unwrap();
                (*m == CoeffMono::default()).then(|| r.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn has_extension_atoms(&self) -> bool {
        self.terms.keys().any(CoeffMono::has_extension_atoms)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        CoeffExpr { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect() }
    }

    pub fn mul_mono(&self, mono: &CoeffMono, r: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let (p, g) = m.mul(mono);
            out.add_term(p, c * r * int(g as i64));
        }
        out
    }

    /// Multiplicative inverse of a single-term expression without λ.
    pub fn inverse(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, r) = self.terms.iter().next().unwrap();
        if m.lambda != 0 || m.log_u1 != 0 {
            return None;
        }
        let inv = CoeffMono {
            lambda: 0,
            u: -m.u,
            radical: m.radical,
            funcs: m.funcs.iter().map(|(a, e)| (a.clone(), -e)).collect(),
            log_u1: 0,
            u1: -m.u1,
        };
        // 1/√s = √s / s
        let coeff = r.recip() / int(m.radical as i64);
        Some(Self::from_term(inv, coeff))
    }

    pub fn pow(&self, k: i32) -> Option<Self> {
        if k < 0 {
            return self.inverse()?.pow(-k);
        }
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        Some(out)
    }

    /// Exact quotient `self / d`. Succeeds when `d` is a single term, or when
    /// `self` is a single-term multiple of `d`.
    pub fn div_exact(&self, d: &CoeffExpr) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if let Some(inv) = d.inverse() {
            return Some(self * &inv);
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (lm, lr) = self.terms.iter().next_back().unwrap();
        let lead = Self::from_term(lm.clone(), lr.clone());
        for (dm, dr) in d.terms.iter() {
            let Some(dinv) = Self::from_term(dm.clone(), dr.clone()).inverse() else {
                continue;
            };
            let q = &lead * &dinv;
            if &q * d == *self {
                return Some(q);
            }
        }
        None
    }

    /// `d/du`; extension atoms are constants for this derivative.
    pub fn ddu(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.u != 0 {
                let mut n = m.clone();
                n.u -= 1;
                out.add_term(n, c * int(m.u as i64));
            }
            for (atom, e) in &m.funcs {
                let mut n = m.clone();
                n.mul_func(atom.clone(), -1);
                n.mul_func(atom.derivative(), 1);
                out.add_term(n, c * int(*e as i64));
            }
        }
        out
    }

    /// `∂/∂u¹` of the extension atoms (`log u¹`, powers of `u¹`).
    pub fn d_du1(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.log_u1 > 0 {
                let mut n = m.clone();
                n.log_u1 -= 1;
                n.u1 -= 1;
                out.add_term(n, c * int(m.log_u1 as i64));
            }
            if m.u1 != 0 {
                let mut n = m.clone();
                n.u1 -= 1;
                out.add_term(n, c * int(m.u1 as i64));
            }
        }
        out
    }

    /// Polynomial derivative in λ.
    pub fn d_lambda(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.lambda > 0 {
                let mut n = m.clone();
                n.lambda -= 1;
                out.add_term(n, c * int(m.lambda as i64));
            }
        }
        out
    }

    pub fn lambda_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.lambda).max()
    }

    /// Coefficient of `λ^k`, itself λ-free.
    pub fn lambda_coeff(&self, k: u32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.lambda == k {
                let mut n = m.clone();
                n.lambda = 0;
                out.add_term(n, c.clone());
            }
        }
        out
    }

    pub fn is_lambda_free(&self) -> bool {
        self.terms.keys().all(|m| m.lambda == 0)
    }

    /// Replaces every λ by the λ-free expression `v`.
    pub fn subst_lambda(&self, v: &CoeffExpr) -> Self {
        debug_assert!(v.is_lambda_free());
        let deg = self.lambda_degree().unwrap_or(0);
        let mut powers = vec![Self::one()];
        for k in 1..=deg as usize {
            let next = &powers[k - 1] * v;
            powers.push(next);
        }
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut n = m.clone();
            n.lambda = 0;
            let t = powers[m.lambda as usize].mul_mono(&n, c);
            out += &t;
        }
        out
    }

    /// Replaces the function symbol `name` by the expression `v`
    /// (derivatives by iterated `d/du`). Negative powers need `v` invertible.
    pub fn subst_func(&self, name: &str, v: &CoeffExpr) -> Option<Self> {
        let mut derivs = vec![v.clone()];
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let mut factor = Self::one();
            for (atom, e) in &m.funcs {
                if &*atom.name != name {
                    continue;
                }
                while derivs.len() <= atom.order as usize {
                    let next = derivs.last().unwrap().ddu();
                    derivs.push(next);
                }
                factor = &factor * &derivs[atom.order as usize].pow(*e)?;
                rest.mul_func(atom.clone(), -e);
            }
            out += &factor.mul_mono(&rest, c);
        }
        Some(out)
    }

    /// An antiderivative in `u` when one exists in this expression class.
    ///
    /// Works by repeatedly integrating the top-order function atom, which
    /// must appear linearly. Returns `None` when that fails (including
    /// genuinely non-elementary cases such as `g'/g`).
    pub fn integrate_u(&self) -> Option<Self> {
        let mut rest = self.clone();
        let mut acc = Self::zero();
        for _ in 0..256 {
            if rest.is_zero() {
                return Some(acc);
            }
            let top = rest.terms.keys().filter_map(CoeffMono::max_func_order).max();
            let Some(n) = top else {
                // plain Laurent polynomial in u, radicals and λ
                for (m, c) in &rest.terms {
                    if m.u == -1 {
                        return None;
                    }
                    let mut n = m.clone();
                    n.u += 1;
                    acc.add_term(n, c / int((m.u + 1) as i64));
                }
                return Some(acc);
            };
            if n == 0 {
                return None;
            }
            // first symbol carrying an order-n atom
            let atom = rest
                .terms
                .keys()
                .flat_map(|m| m.funcs.iter())
                .filter(|(a, _)| a.order == n)
                .map(|(a, _)| a.clone())
                .min()
                .unwrap();
            let lower = FuncAtom { name: atom.name.clone(), order: n - 1 };
            let mut piece = Self::zero();
            for (m, c) in &rest.terms {
                let e = m.func_exp(&atom);
                if e == 0 {
                    continue;
                }
                if e != 1 || m.funcs.iter().any(|(a, _)| a.order == n && *a != atom) {
                    return None;
                }
                let mut b = m.clone();
                b.mul_func(atom.clone(), -1);
                let k = b.func_exp(&lower);
                if k == -1 {
                    return None;
                }
                b.mul_func(lower.clone(), 1);
                piece.add_term(b, c / int((k + 1) as i64));
            }
            rest -= &piece.ddu();
            acc += &piece;
        }
        None
    }
}

impl From<Rational> for CoeffExpr {
    fn from(r: Rational) -> Self {
        CoeffExpr::constant(r)
    }
}

impl From<i64> for CoeffExpr {
    fn from(n: i64) -> Self {
        CoeffExpr::integer(n)
    }
}

impl AddAssign<&CoeffExpr> for CoeffExpr {
    fn add_assign(&mut self, rhs: &CoeffExpr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&CoeffExpr> for CoeffExpr {
    fn sub_assign(&mut self, rhs: &CoeffExpr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add for &CoeffExpr {
    type Output = CoeffExpr;
    fn add(self, rhs: &CoeffExpr) -> CoeffExpr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &CoeffExpr {
    type Output = CoeffExpr;
    fn sub(self, rhs: &CoeffExpr) -> CoeffExpr {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &CoeffExpr {
    type Output = CoeffExpr;
    fn neg(self) -> CoeffExpr {
        CoeffExpr { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl Mul for &CoeffExpr {
    type Output = CoeffExpr;
    fn mul(self, rhs: &CoeffExpr) -> CoeffExpr {
        let mut out = CoeffExpr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let (m, g) = ma.mul(mb);
                out.add_term(m, ca * cb * int(g as i64));
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for CoeffExpr {
            type Output = CoeffExpr;
            fn $method(self, rhs: CoeffExpr) -> CoeffExpr {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&CoeffExpr> for CoeffExpr {
            type Output = CoeffExpr;
            fn $method(self, rhs: &CoeffExpr) -> CoeffExpr {
                (&self).$method(rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for CoeffExpr {
    type Output = CoeffExpr;
    fn neg(self) -> CoeffExpr {
        -&self
    }
}

fn fmt_pow(f: &mut fmt::Formatter<'_>, base: &str, e: i64) -> fmt::Result {
    match e {
        1 => write!(f, "{base}"),
        e if e < 0 => write!(f, "{base}^({e})"),
        e => write!(f, "{base}^{e}"),
    }
}

impl fmt::Display for CoeffMono {
    /// Factors joined by `*`; the empty product renders as the empty string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            Ok(())
        };
        if self.radical != 1 {
            sep(f)?;
            write!(f, "sqrt({})", self.radical)?;
        }
        if self.lambda != 0 {
            sep(f)?;
            fmt_pow(f, "lambda", self.lambda as i64)?;
        }
        if self.u != 0 {
            sep(f)?;
            fmt_pow(f, "u", self.u as i64)?;
        }
        for (atom, e) in &self.funcs {
            sep(f)?;
            let base = match atom.order {
                0..=3 => format!("{}{}(u)", atom.name, "'".repeat(atom.order as usize)),
                k => format!("D[{},{}](u)", atom.name, k),
            };
            fmt_pow(f, &base, *e as i64)?;
        }
        if self.log_u1 != 0 {
            sep(f)?;
            fmt_pow(f, "log(u1)", self.log_u1 as i64)?;
        }
        if self.u1 != 0 {
            sep(f)?;
            fmt_pow(f, "u1", self.u1 as i64)?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders `c · body` where `body` is already a `*`-joined factor list,
/// with a leading sign handled by the caller.
pub(crate) fn fmt_scaled(c: &Rational, body: &str) -> String {
    let a = c.abs();
    if body.is_empty() {
        fmt_rational(&a)
    } else if a.is_one() {
        body.to_string()
    } else {
        format!("{}*{}", fmt_rational(&a), body)
    }
}

impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let body = m.to_string();
            let s = fmt_scaled(c, &body);
            match (i, c.is_negative()) {
                (0, false) => write!(f, "{s}")?,
                (0, true) => write!(f, "-{s}")?,
                (_, false) => write!(f, " + {s}")?,
                (_, true) => write!(f, " - {s}")?,
            }
        }
        Ok(())
    }
}
