//! Filtration, page-zero and page-one differentials of the `D_λ` complex,
//! and the perturbative homotopy for `d₁`.

use std::cmp::Ordering;

use crate::algebra::{Monomial, ThetaPoly};
use crate::coeff::{binomial, rat, CoeffExpr, Rational};
use crate::error::{Error, Result};
use crate::operators::{make_d_lambda, EvolutionaryOp};

/// `i` with `a ∈ F^i Â_d = Â_d^{(d−i)}` maximal.
pub fn filtration_level(a: &ThetaPoly, d: u32) -> Result<u32> {
    if let Some(found) = a.standard_degree() {
        if found != d as i64 {
            return Err(Error::DegreeMismatch { expected: d.to_string(), found: found.to_string() });
        }
    } else if !a.is_zero() {
        return Err(Error::NotHomogeneous);
    }
    Ok(d - a.max_jet().min(d))
}

/// Element `f·θθ^q` of the first page, stored by its body `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E1Element {
    p: u32,
    q: u32,
    body: ThetaPoly,
}

impl E1Element {
    pub fn new(p: u32, q: u32, body: ThetaPoly) -> Result<Self> {
        if q < 2 {
            return Err(Error::Invalid(format!("first-page elements need q >= 2, got {q}")));
        }
        for (m, _) in body.terms() {
            if m.has_theta(0) || m.has_theta(q) || m.max_jet() > q - 1 {
                return Err(Error::Invalid(format!("monomial {m} not allowed in a body at q = {q}")));
            }
            if m.degree() != p {
                return Err(Error::DegreeMismatch { expected: p.to_string(), found: m.degree().to_string() });
            }
        }
        if !body.is_lambda_free() {
            return Err(Error::Invalid("body must be free of lambda".into()));
        }
        Ok(E1Element { p, q, body })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn body(&self) -> &ThetaPoly {
        &self.body
    }

    /// Recovers the body from a multiple of `θθ^q`.
    pub fn from_representative(p: u32, q: u32, x: &ThetaPoly) -> Result<Self> {
        let spectator = Monomial::from_parts(&[], &[0, q]).map(|(_, m)| m);
        let mut body = ThetaPoly::zero();
        for (m, c) in x.terms() {
            if !(m.has_theta(0) && m.has_theta(q)) {
                return Err(Error::Invalid(format!("term {m} lacks the factor th0*th{q}")));
            }
            let rest = m.odd_part_without(&[0, q]);
            let (sign, back) = rest.mul(spectator.as_ref().unwrap()).unwrap();
            debug_assert_eq!(&back, m);
            body.add_term(rest, if sign < 0 { -c } else { c.clone() });
        }
        Self::new(p, q, body)
    }

    /// `f·θθ^q`.
    pub fn representative(&self) -> ThetaPoly {
        &self.body * &ThetaPoly::thetas(&[0, self.q])
    }

    /// The class modulo `Â^{(q−2)}`.
    pub fn reduce(&self) -> Self {
        let q = self.q;
        E1Element { p: self.p, q, body: self.body.filter(|m| m.max_jet() + 2 > q) }
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_zero()
    }

    /// Monomial basis of bodies at `(p, q)`; with `reduced` only those of
    /// maximal jet exactly `q − 1`.
    pub fn basis(p: u32, q: u32, reduced: bool) -> Vec<Monomial> {
        Monomial::enumerate(p, q.saturating_sub(1))
            .into_iter()
            .filter(|m| !m.has_theta(0) && !m.has_theta(q))
            .filter(|m| !reduced || m.max_jet() + 1 == q)
            .collect()
    }
}

/// The `D_λ` complex for a fixed metric `g`.
#[derive(Clone, Debug)]
pub struct Spectral {
    g: CoeffExpr,
    g_inv: Option<CoeffExpr>,
    d_lambda: EvolutionaryOp,
    a: CoeffExpr,
    da: CoeffExpr,
}

impl Spectral {
    pub fn new(g: CoeffExpr) -> Self {
        let a = &(&CoeffExpr::u() - &CoeffExpr::lambda()) * &g;
        let da = a.ddu();
        Spectral { g_inv: g.inverse(), d_lambda: make_d_lambda(&g), g, a, da }
    }

    pub fn g(&self) -> &CoeffExpr {
        &self.g
    }

    pub fn d_lambda(&self) -> &EvolutionaryOp {
        &self.d_lambda
    }

    fn a_poly(&self) -> ThetaPoly {
        ThetaPoly::from_coeff(self.a.clone())
    }

    fn half_da_poly(&self) -> ThetaPoly {
        ThetaPoly::from_coeff(self.da.scale(&rat(1, 2)))
    }

    /// The page-zero differential on `E₀^{p,q} = Â^{[q]}_{p+q}[λ]`:
    /// `(Aθ^{q+1} + ½A′u^{q+1}θ)∂/∂u^q + ½A′θθ^{q+1}∂/∂θ^q`, `A = (u−λ)g`.
    pub fn d0(&self, a: &ThetaPoly, p: u32, q: u32) -> Result<ThetaPoly> {
        check_degree(a, p + q)?;
        let xu = &self.a_poly() * &ThetaPoly::theta(q + 1)
            + &self.half_da_poly() * &ThetaPoly::u_jet(q + 1) * ThetaPoly::theta(0);
        let xt = &self.half_da_poly() * &ThetaPoly::thetas(&[0, q + 1]);
        Ok(&xu * &a.d_u(q) + &xt * &a.d_theta(q))
    }

    /// `(Aθ^q + ½A′u^qθ)·h + θθ^q·k`, a general element of `ker d₀`.
    pub fn kernel_element(&self, q: u32, h: &ThetaPoly, k: &ThetaPoly) -> ThetaPoly {
        let lead = &self.a_poly() * &ThetaPoly::theta(q) + &self.half_da_poly() * &ThetaPoly::u_jet(q) * ThetaPoly::theta(0);
        &lead * h + &ThetaPoly::thetas(&[0, q]) * k
    }

    /// The image element built from `h₀, h₁` (θ-free, top jet `q − 1`),
    /// together with its preimage `h₀ + θh₁`.
    pub fn image_element(&self, q: u32, h0: &ThetaPoly, h1: &ThetaPoly) -> (ThetaPoly, ThetaPoly) {
        let lead = &self.a_poly() * &ThetaPoly::theta(q) + &self.half_da_poly() * &ThetaPoly::u_jet(q) * ThetaPoly::theta(0);
        let inner = &self.a_poly() * &h1.d_u(q - 1) - &self.half_da_poly() * &h0.d_theta(q - 1);
        let img = &lead * &h0.d_u(q - 1) + &ThetaPoly::thetas(&[q, 0]) * &inner;
        let pre = h0 + &(&ThetaPoly::theta(0) * h1);
        (img, pre)
    }

    /// Body of `d₁(fθθ^q)`: `D_λ(f)|_{λ=u} + ((q−2)/2)·gθ¹f`, with terms
    /// containing `θ⁰` or `θ^q` dropped.
    pub fn d1_body(&self, f: &ThetaPoly, q: u32) -> ThetaPoly {
        let dl = self.d_lambda.apply(f).subst_lambda(&CoeffExpr::u());
        let corr = ThetaPoly::from_coeff(self.g.scale(&rat(q as i64 - 2, 2))) * ThetaPoly::theta(1) * f.clone();
        (&dl + &corr).filter(|m| !m.has_theta(0) && !m.has_theta(q))
    }

    pub fn d1(&self, x: &E1Element) -> E1Element {
        E1Element { p: x.p + 1, q: x.q, body: self.d1_body(&x.body, x.q) }
    }

    /// Eigenvalue factor of `U` on a body monomial: the weight of `m·θθ^q`.
    pub fn u_weight(m: &Monomial, q: u32) -> Rational {
        m.weight() + rat(q as i64 - 2, 2)
    }

    /// `U`: diagonal, `g·weight(m·θθ^q)` on the body monomial `m`.
    pub fn u_op(&self, f: &ThetaPoly, q: u32) -> ThetaPoly {
        let mut out = ThetaPoly::zero();
        for (m, c) in f.terms() {
            out.add_term(m.clone(), (c * &self.g).scale(&Self::u_weight(m, q)));
        }
        out
    }

    pub fn u_inverse(&self, f: &ThetaPoly, q: u32) -> Result<ThetaPoly> {
        let g_inv = self.g_inv.as_ref().ok_or_else(|| Error::NonMonomialDivision(self.g.to_string()))?;
        let mut out = ThetaPoly::zero();
        for (m, c) in f.terms() {
            let w = Self::u_weight(m, q);
            if w == rat(0, 1) {
                return Err(Error::ZeroWeight(format!("{m}*th0*th{q}")));
            }
            out.add_term(m.clone(), (c * g_inv).scale(&w.recip()));
        }
        Ok(out)
    }

    /// `V` in closed form: `Σ_{s=2}^{q−1} Σ_{l=1}^{s−1} ((s+2)/2)·C(s,l)·∂^l(g)·u^{s−l} ∂/∂u^s
    /// + Σ_{s=1}^{q−1} Σ_{l=0}^{s−1} ((l−1)/2)·C(s,l)·[∂^{s−l}((u−λ)g)′]_{λ=u} θ^l ∂/∂θ^s`,
    /// terms with `θ⁰` dropped.
    pub fn v_op(&self, f: &ThetaPoly, q: u32) -> ThetaPoly {
        let g = ThetaPoly::from_coeff(self.g.clone());
        let da = ThetaPoly::from_coeff(self.da.clone());
        let mut out = ThetaPoly::zero();
        for s in 2..q {
            let df = f.d_u(s);
            if df.is_zero() {
                continue;
            }
            for l in 1..s {
                let k = rat(s as i64 + 2, 2) * binomial(s, l);
                let coef = (g.total_derivative_n(l) * ThetaPoly::u_jet(s - l)).scale_rational(&k);
                out += &(&coef * &df);
            }
        }
        for s in 1..q {
            let df = f.d_theta(s);
            if df.is_zero() {
                continue;
            }
            for l in 1..s {
                let k = rat(l as i64 - 1, 2) * binomial(s, l);
                let jet = da.total_derivative_n(s - l).subst_lambda(&CoeffExpr::u());
                let coef = (jet * ThetaPoly::theta(l)).scale_rational(&k);
                out += &(&coef * &df);
            }
        }
        out
    }

    /// `W`: the part of `d₁` whose coefficients are free of `θ¹`,
    /// computed from the prolonged characteristics.
    pub fn w_op(&self, f: &ThetaPoly, q: u32) -> ThetaPoly {
        let keep = |m: &Monomial| !m.has_theta(0) && !m.has_theta(q) && !m.has_theta(1);
        let mut xu = self.d_lambda.x_u().clone();
        let mut xt = self.d_lambda.x_theta().clone();
        let mut out = ThetaPoly::zero();
        for s in 0..=f.max_jet() {
            let cu = xu.subst_lambda(&CoeffExpr::u()).filter(keep);
            let ct = xt.subst_lambda(&CoeffExpr::u()).filter(keep);
            out += &(&cu * &f.d_u(s));
            out += &(&ct * &f.d_theta(s));
            xu = xu.total_derivative();
            xt = xt.total_derivative();
        }
        out.filter(|m| !m.has_theta(0) && !m.has_theta(q))
    }

    /// `θ¹U(f) + θ¹V(f) + W(f)`.
    pub fn split_sum(&self, f: &ThetaPoly, q: u32) -> ThetaPoly {
        let t1 = ThetaPoly::theta(1);
        let uv = &self.u_op(f, q) + &self.v_op(f, q);
        (&t1 * &uv + self.w_op(f, q)).filter(|m| !m.has_theta(0) && !m.has_theta(q))
    }

    /// `h = Σ_n (−1)^n (U⁻¹V)^n U⁻¹ ∂/∂θ¹`, iterated until the series stops.
    pub fn homotopy_body(&self, f: &ThetaPoly, p: u32, q: u32) -> Result<ThetaPoly> {
        let mut term = self.u_inverse(&f.d_theta(1), q)?;
        let mut total = ThetaPoly::zero();
        let cap = iteration_cap(&term, p.saturating_sub(1), q);
        let mut n = 0usize;
        while !term.is_zero() {
            if n > cap {
                return Err(Error::IterationCap(cap));
            }
            if n.is_multiple_of(2) {
                total += &term;
            } else {
                total -= &term;
            }
            term = self.u_inverse(&self.v_op(&term, q), q)?;
            n += 1;
        }
        Ok(total)
    }

    pub fn homotopy(&self, x: &E1Element) -> Result<E1Element> {
        if x.p == 1 && x.q == 2 {
            let survivors = x.body.filter(|m| m.has_theta(1));
            if !survivors.is_zero() {
                return Err(Error::ZeroWeight(format!("{}*th0*th2", survivors)));
            }
        }
        let body = self.homotopy_body(&x.body, x.p, x.q)?;
        Ok(E1Element { p: x.p.saturating_sub(1), q: x.q, body })
    }
}

/// Number of basis monomials lex-below the highest monomial of `start`,
/// plus one: a bound on the length of the lex-descending series.
fn iteration_cap(start: &ThetaPoly, p: u32, q: u32) -> usize {
    let Some(top) = start.terms().map(|(m, _)| m).max_by(|a, b| a.lex_cmp(b)) else {
        return 0;
    };
    E1Element::basis(p, q, false).iter().filter(|m| m.lex_cmp(top) == Ordering::Less).count() + 1
}

fn check_degree(a: &ThetaPoly, d: u32) -> Result<()> {
    match a.standard_degree() {
        Some(found) if found != d as i64 => {
            Err(Error::DegreeMismatch { expected: d.to_string(), found: found.to_string() })
        }
        None if !a.is_zero() => Err(Error::NotHomogeneous),
        _ => Ok(()),
    }
}

/// Outcome of the λ-independence test on `t = Σ t_i (u−λ)^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaIndependence {
    /// `t₀/2` when `−(u−λ)t′ + t/2` is λ-free.
    pub value: Option<CoeffExpr>,
    /// The expanded expression `−(u−λ)t′ + t/2`.
    pub expression: CoeffExpr,
    /// `t_i′ = (i + ½)t_{i+1}` for all `i`.
    pub plus_recurrence: bool,
    /// `t_i′ = −(i + ½)t_{i+1}` for all `i`.
    pub minus_recurrence: bool,
}

pub fn check_lambda_independence(t: &[CoeffExpr]) -> LambdaIndependence {
    let w = &CoeffExpr::u() - &CoeffExpr::lambda();
    let mut tt = CoeffExpr::zero();
    let mut pw = CoeffExpr::one();
    for ti in t {
        tt += &(ti * &pw);
        pw = &pw * &w;
    }
    // derivative in u at fixed λ
    let expression = &(-&(&w * &tt.ddu())) + &tt.scale(&rat(1, 2));
    let value = if expression.is_lambda_free() {
        Some(t.first().cloned().unwrap_or_default().scale(&rat(1, 2)))
    } else {
        None
    };
    let rec = |sign: i64| {
        (0..t.len()).all(|i| {
            let next = t.get(i + 1).cloned().unwrap_or_default();
            let rhs = next.scale(&rat(sign * (2 * i as i64 + 1), 2));
            (&t[i].ddu() - &rhs).is_zero()
        })
    };
    LambdaIndependence { value, expression, plus_recurrence: rec(1), minus_recurrence: rec(-1) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Parser;

    fn parse(s: &str) -> crate::Result<CoeffExpr> {
        Ok(Parser::new().declare("a").declare("b").parse(s)?)
    }

    fn sp() -> Spectral {
        Spectral::new(CoeffExpr::func("g", 0))
    }

    fn tp(c: &str) -> ThetaPoly {
        ThetaPoly::from_coeff(parse(c).unwrap())
    }

    #[test]
    fn filtration_examples() {
        assert_eq!(filtration_level(&(ThetaPoly::u_jet(1) * ThetaPoly::theta(2)), 3).unwrap(), 1);
        assert_eq!(filtration_level(&(tp("a(u)") * ThetaPoly::theta(0)), 0).unwrap(), 0);
        assert_eq!(filtration_level(&ThetaPoly::theta(3), 3).unwrap(), 0);
        assert!(filtration_level(&ThetaPoly::theta(3), 2).is_err());
    }

    #[test]
    fn d0_on_functions() {
        let s = sp();
        let f0 = tp("a(u) + lambda*b(u)");
        let out = s.d0(&f0, 0, 0).unwrap();
        let expect = (tp("(u-lambda)*g(u)") * ThetaPoly::theta(1)
            + tp("1/2*(g(u) + (u-lambda)*g'(u))") * ThetaPoly::u_jet(1) * ThetaPoly::theta(0))
            * tp("a'(u) + lambda*b'(u)");
        assert_eq!(out, expect);
    }

    #[test]
    fn d1_examples() {
        let s = sp();
        // jet-free body: only the correction survives
        let f = tp("a(u)");
        assert_eq!(s.d1_body(&f, 3), tp("1/2*a(u)*g(u)") * ThetaPoly::theta(1));
        assert!(s.d1_body(&f, 2).is_zero());
        // the surviving class at (1, 2)
        let f = tp("a(u)") * ThetaPoly::theta(1);
        assert!(s.d1_body(&f, 2).is_zero());
    }

    #[test]
    fn u_eigenvalues() {
        let s = sp();
        let m = ThetaPoly::u_jet(1);
        assert_eq!(s.u_op(&m, 3), tp("2*g(u)") * ThetaPoly::u_jet(1));
        assert!(s.u_op(&ThetaPoly::theta(1), 2).is_zero());
    }

    #[test]
    fn lambda_fixtures() {
        let one = check_lambda_independence(&[CoeffExpr::one()]);
        assert_eq!(one.value, Some(CoeffExpr::rational(1, 2)));
        let two = check_lambda_independence(&[CoeffExpr::u(), CoeffExpr::integer(-2)]);
        assert_eq!(two.value, Some(parse("u/2").unwrap()));
        assert!(two.minus_recurrence && !two.plus_recurrence);
        let three = check_lambda_independence(&[CoeffExpr::zero(), CoeffExpr::one()]);
        assert_eq!(three.value, None);
    }
}
