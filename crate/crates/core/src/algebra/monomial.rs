use std::cmp::Ordering;
use std::fmt;

use crate::coeff::{int, rat, Rational};

/// A product of even jet variables `u^s` (s ≥ 1) and odd variables `θ^s`
/// (s ≥ 0). The odd factors are understood in increasing index order.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    /// `u[s - 1]` is the exponent of `u^s`; no trailing zeros.
    u: Vec<u32>,
    /// Bit `s` set iff `θ^s` occurs.
    theta: u64,
}

pub const MAX_JET: u32 = 62;

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    /// `u^s` for `s ≥ 1`.
    pub fn u(s: u32) -> Self {
        Self::one().with_u(s, 1)
    }

    pub fn theta(s: u32) -> Self {
        assert!(s <= MAX_JET, "jet index {s} out of range");
        Monomial { u: Vec::new(), theta: 1 << s }
    }

    /// Builds `Π (u^s)^e · θ^{t1} θ^{t2} …` with the θ indices in any order;
    /// returns the sign of reordering, or `None` if an index repeats.
    pub fn from_parts(u: &[(u32, u32)], thetas: &[u32]) -> Option<(i32, Self)> {
        let mut m = Self::one();
        for &(s, e) in u {
            let e = m.u_exp(s) + e;
            m = m.with_u(s, e);
        }
        let mut sign = 1;
        for &t in thetas {
            let (sg, next) = m.mul(&Self::theta(t))?;
            sign *= sg;
            m = next;
        }
        Some((sign, m))
    }

    pub fn u_exp(&self, s: u32) -> u32 {
        if s == 0 {
            return 0;
        }
        self.u.get(s as usize - 1).copied().unwrap_or(0)
    }

    pub fn has_theta(&self, s: u32) -> bool {
        s <= MAX_JET && self.theta & (1 << s) != 0
    }

    pub fn theta_bits(&self) -> u64 {
        self.theta
    }

    pub fn theta_indices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..=MAX_JET).filter(move |&s| self.has_theta(s))
    }

    /// `(s, e)` pairs with `e > 0`.
    pub fn u_factors(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.u.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i as u32 + 1, e))
    }

    pub fn with_u(mut self, s: u32, e: u32) -> Self {
        assert!(s >= 1, "u^0 lives in the coefficient");
        let i = s as usize - 1;
        if self.u.len() <= i {
            self.u.resize(i + 1, 0);
        }
        self.u[i] = e;
        while self.u.last() == Some(&0) {
            self.u.pop();
        }
        self
    }

    pub fn even_part(&self) -> Monomial {
        Monomial { u: self.u.clone(), theta: 0 }
    }

    pub fn odd_part(&self) -> Monomial {
        Monomial { u: Vec::new(), theta: self.theta }
    }

    /// Standard degree: `deg u^s = deg θ^s = s`.
    pub fn degree(&self) -> u32 {
        let du: u32 = self.u_factors().map(|(s, e)| s * e).sum();
        du + self.theta_indices().sum::<u32>()
    }

    /// Super degree: number of odd factors.
    pub fn super_degree(&self) -> u32 {
        self.theta.count_ones()
    }

    pub fn is_odd(&self) -> bool {
        self.super_degree() % 2 == 1
    }

    /// Largest `s` with `u^s` or `θ^s` present; 0 for jet-free monomials.
    pub fn max_jet(&self) -> u32 {
        let mu = self.u.len() as u32;
        let mt = if self.theta == 0 { 0 } else { 63 - self.theta.leading_zeros() };
        mu.max(mt)
    }

    /// Weight with `u^s ↦ (s+2)/2` and `θ^s ↦ (s−1)/2`.
    pub fn weight(&self) -> Rational {
        let mut w = int(0);
        for (s, e) in self.u_factors() {
            w += rat((s as i64 + 2) * e as i64, 2);
        }
        for s in self.theta_indices() {
            w += rat(s as i64 - 1, 2);
        }
        w
    }

    /// Supercommutative product with its Koszul sign; `None` when an odd
    /// factor repeats.
    pub fn mul(&self, other: &Monomial) -> Option<(i32, Monomial)> {
        if self.theta & other.theta != 0 {
            return None;
        }
        let mut inversions = 0u32;
        let mut bits = other.theta;
        while bits != 0 {
            let b = bits.trailing_zeros();
            inversions += (self.theta >> (b + 1)).count_ones();
            bits &= bits - 1;
        }
        let n = self.u.len().max(other.u.len());
        let mut u = vec![0; n];
        for (i, slot) in u.iter_mut().enumerate() {
            *slot = self.u.get(i).copied().unwrap_or(0) + other.u.get(i).copied().unwrap_or(0);
        }
        let sign = if inversions.is_multiple_of(2) { 1 } else { -1 };
        Some((sign, Monomial { u, theta: self.theta | other.theta }))
    }

    /// Left derivative `∂/∂θ^s`: moves `θ^s` to the front and drops it.
    pub fn d_theta(&self, s: u32) -> Option<(i32, Monomial)> {
        if !self.has_theta(s) {
            return None;
        }
        let before = (self.theta & ((1u64 << s) - 1)).count_ones();
        let sign = if before.is_multiple_of(2) { 1 } else { -1 };
        Some((sign, Monomial { u: self.u.clone(), theta: self.theta & !(1 << s) }))
    }

    /// The monomial with the listed odd factors removed.
    pub fn odd_part_without(&self, indices: &[u32]) -> Monomial {
        let mask = indices.iter().fold(0u64, |acc, &i| acc | (1 << i));
        Monomial { u: self.u.clone(), theta: self.theta & !mask }
    }

    /// Swaps `θ^from` for `θ^to`; caller guarantees `θ^to` is absent and no
    /// other odd index lies strictly between them.
    pub(crate) fn replace_theta(&self, from: u32, to: u32) -> Monomial {
        Monomial { u: self.u.clone(), theta: (self.theta & !(1 << from)) | (1 << to) }
    }

    /// `∂/∂u^s` for `s ≥ 1`: exponent factor and the lowered monomial.
    pub fn d_u(&self, s: u32) -> Option<(u32, Monomial)> {
        let e = self.u_exp(s);
        (e > 0).then(|| (e, self.clone().with_u(s, e - 1)))
    }

    /// Multi-index `(…, j_k, i_k, …, j_1, i_1, j_0)` from the highest jet `top` down.
    pub fn multi_index(&self, top: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(2 * top as usize + 1);
        for k in (1..=top).rev() {
            out.push(self.has_theta(k) as u32);
            out.push(self.u_exp(k));
        }
        out.push(self.has_theta(0) as u32);
        out
    }

    /// Lexicographic order on multi-indices; `Greater` means higher order.
    pub fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let top = self.max_jet().max(other.max_jet());
        self.multi_index(top).cmp(&other.multi_index(top))
    }

    /// All monomials of standard degree `degree` with jets `≤ max_jet`.
    pub fn enumerate(degree: u32, max_jet: u32) -> Vec<Monomial> {
        fn rec(s: u32, left: u32, max_jet: u32, cur: Monomial, out: &mut Vec<Monomial>) {
            if s > max_jet {
                if left == 0 {
                    out.push(cur.clone());
                    if !cur.has_theta(0) {
                        out.push(Monomial { u: cur.u.clone(), theta: cur.theta | 1 });
                    }
                }
                return;
            }
            let mut e = 0;
            while e * s <= left {
                let base = if e > 0 { cur.clone().with_u(s, e) } else { cur.clone() };
                rec(s + 1, left - e * s, max_jet, base.clone(), out);
                if (e + 1) * s <= left {
                    let with_t = Monomial { u: base.u.clone(), theta: base.theta | (1 << s) };
                    rec(s + 1, left - (e + 1) * s, max_jet, with_t, out);
                }
                e += 1;
            }
        }
        let mut out = Vec::new();
        if max_jet == 0 {
            if degree == 0 {
                out.push(Monomial::one());
                out.push(Monomial::theta(0));
            }
            return out;
        }
        rec(1, degree, max_jet, Monomial::one(), &mut out);
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (s, e) in self.u_factors() {
            parts.push(if e == 1 { format!("u{s}") } else { format!("u{s}^{e}") });
        }
        for s in self.theta_indices() {
            parts.push(format!("th{s}"));
        }
        write!(f, "{}", parts.join("*"))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.u.is_empty() && self.theta == 0 {
            write!(f, "1")
        } else {
            write!(f, "{self}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anticommutation_and_odd_squares() {
        let (s, m) = Monomial::theta(1).mul(&Monomial::theta(0)).unwrap();
        assert_eq!(s, -1);
        assert_eq!(m, Monomial::from_parts(&[], &[0, 1]).unwrap().1);
        assert!(Monomial::theta(2).mul(&Monomial::theta(2)).is_none());
        let (s, _) = Monomial::from_parts(&[], &[2, 0, 1]).unwrap();
        assert_eq!(s, 1); // θ²θ⁰θ¹ → θ⁰θ¹θ² is an even permutation
    }

    #[test]
    fn weights() {
        let (_, m) = Monomial::from_parts(&[], &[1, 0, 2]).unwrap();
        assert_eq!(m.weight(), int(0));
        assert_eq!(Monomial::u(1).weight(), rat(3, 2));
        let (_, m) = Monomial::from_parts(&[(1, 1)], &[0, 2]).unwrap();
        assert_eq!(m.weight(), rat(3, 2));
    }

    #[test]
    fn lexicographic_examples() {
        let u2 = Monomial::u(2);
        let u11 = Monomial::one().with_u(1, 2);
        assert_eq!(u2.lex_cmp(&u11), Ordering::Greater);
        let t2 = Monomial::theta(2);
        let (_, u2t0) = Monomial::from_parts(&[(2, 1)], &[0]).unwrap();
        assert_eq!(t2.lex_cmp(&u2t0), Ordering::Greater);
        assert_eq!(t2.lex_cmp(&t2), Ordering::Equal);
        assert_eq!(u2.multi_index(2), vec![0, 1, 0, 0, 0]);
        assert_eq!(u11.multi_index(2), vec![0, 0, 0, 2, 0]);
    }

    #[test]
    fn enumeration_counts_match_brute_force() {
        for d in 0..=5 {
            for j in 0..=4 {
                let fast = Monomial::enumerate(d, j);
                let mut brute = Vec::new();
                // brute force over bounded exponent boxes
                let n = j as usize;
                let mut exps = vec![0u32; n];
                loop {
                    let du: u32 = exps.iter().enumerate().map(|(i, e)| (i as u32 + 1) * e).sum();
                    if du <= d {
                        for bits in 0u64..(1 << (n + 1)) {
                            let mut m = Monomial::one();
                            for (i, e) in exps.iter().enumerate() {
                                if *e > 0 {
                                    m = m.with_u(i as u32 + 1, *e);
                                }
                            }
                            let m = Monomial { u: m.u, theta: bits };
                            if m.degree() == d {
                                brute.push(m);
                            }
                        }
                    }
                    let mut i = 0;
                    loop {
                        if i == n {
                            break;
                        }
                        exps[i] += 1;
                        if exps[i] <= d {
                            break;
                        }
                        exps[i] = 0;
                        i += 1;
                    }
                    if i == n {
                        break;
                    }
                }
                brute.sort();
                assert_eq!(fast, brute, "degree {d} jets {j}");
            }
        }
    }

    #[test]
    fn left_theta_derivative_sign() {
        let (_, m) = Monomial::from_parts(&[], &[0, 1]).unwrap();
        assert_eq!(m.d_theta(1).unwrap(), (-1, Monomial::theta(0)));
        assert_eq!(m.d_theta(0).unwrap(), (1, Monomial::theta(1)));
        assert!(m.d_theta(2).is_none());
    }
}
