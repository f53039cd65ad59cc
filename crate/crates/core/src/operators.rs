//! Evolutionary derivations, Euler operators and the exactness test.

use std::sync::Mutex;

use crate::algebra::{Monomial, ThetaPoly};
use crate::coeff::{rat, CoeffExpr};
use crate::error::{Error, Result};

/// A derivation given by its characteristics and prolonged by `∂`:
/// `Σ_s ∂^s(X_u) ∂/∂u^s + ∂^s(X_θ) ∂/∂θ^s`, characteristics on the left.
#[derive(Debug)]
pub struct EvolutionaryOp {
    x_u: ThetaPoly,
    x_theta: ThetaPoly,
    odd: bool,
    jets: Mutex<Vec<(ThetaPoly, ThetaPoly)>>,
}

impl Clone for EvolutionaryOp {
    fn clone(&self) -> Self {
        Self::new(self.x_u.clone(), self.x_theta.clone(), self.odd)
    }
}

impl EvolutionaryOp {
    pub fn new(x_u: ThetaPoly, x_theta: ThetaPoly, odd: bool) -> Self {
        let jets = Mutex::new(vec![(x_u.clone(), x_theta.clone())]);
        EvolutionaryOp { x_u, x_theta, odd, jets }
    }

    /// The hydrodynamic derivation of the metric `a(u, λ)`:
    /// `X_u = aθ¹ + ½a′u¹θ`, `X_θ = ½a′θθ¹`.
    pub fn hydrodynamic(a: &CoeffExpr) -> Self {
        let half_da = ThetaPoly::from_coeff(a.ddu().scale(&rat(1, 2)));
        let x_u = ThetaPoly::from_coeff(a.clone()) * ThetaPoly::theta(1)
            + half_da.clone() * ThetaPoly::u_jet(1) * ThetaPoly::theta(0);
        let x_theta = half_da * ThetaPoly::thetas(&[0, 1]);
        Self::new(x_u, x_theta, true)
    }

    pub fn x_u(&self) -> &ThetaPoly {
        &self.x_u
    }

    pub fn x_theta(&self) -> &ThetaPoly {
        &self.x_theta
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }

    /// `self − s·other`, with `s` a scalar coefficient.
    pub fn sub_scaled(&self, s: &CoeffExpr, other: &EvolutionaryOp) -> Self {
        let sc = ThetaPoly::from_coeff(s.clone());
        Self::new(&self.x_u - &(&sc * &other.x_u), &self.x_theta - &(&sc * &other.x_theta), self.odd)
    }

    fn prolongation(&self, s: u32) -> (ThetaPoly, ThetaPoly) {
        let mut jets = self.jets.lock().unwrap_or_else(|e| e.into_inner());
        while jets.len() <= s as usize {
            let (xu, xt) = jets.last().unwrap();
            let next = (xu.total_derivative(), xt.total_derivative());
            jets.push(next);
        }
        jets[s as usize].clone()
    }

    pub fn apply(&self, a: &ThetaPoly) -> ThetaPoly {
        let mut out = ThetaPoly::zero();
        for s in 0..=a.max_jet() {
            let (xu, xt) = self.prolongation(s);
            let du = a.d_u(s);
            if !du.is_zero() {
                out += &(&xu * &du);
            }
            let dt = a.d_theta(s);
            if !dt.is_zero() {
                out += &(&xt * &dt);
            }
        }
        if a.is_extended() {
            out.set_extended();
        }
        out
    }
}

/// First operator of the pencil for the metric `g`.
pub fn make_d1(g: &CoeffExpr) -> EvolutionaryOp {
    EvolutionaryOp::hydrodynamic(g)
}

/// Second operator of the pencil, metric `u·g`.
pub fn make_d2(g: &CoeffExpr) -> EvolutionaryOp {
    EvolutionaryOp::hydrodynamic(&(&CoeffExpr::u() * g))
}

/// `D_λ = D₂ − λD₁`, metric `(u − λ)g`.
pub fn make_d_lambda(g: &CoeffExpr) -> EvolutionaryOp {
    EvolutionaryOp::hydrodynamic(&(&(&CoeffExpr::u() - &CoeffExpr::lambda()) * g))
}

/// The symbolic metric `g(u)`.
pub fn symbolic_g() -> CoeffExpr {
    CoeffExpr::func("g", 0)
}

/// `Σ_s (−∂)^s ∂/∂u^s`.
pub fn variational_derivative_u(a: &ThetaPoly) -> ThetaPoly {
    euler(a, |p, s| p.d_u(s))
}

/// `Σ_s (−∂)^s ∂/∂θ^s` with left derivatives.
pub fn variational_derivative_theta(a: &ThetaPoly) -> ThetaPoly {
    euler(a, |p, s| p.d_theta(s))
}

fn euler(a: &ThetaPoly, partial: impl Fn(&ThetaPoly, u32) -> ThetaPoly) -> ThetaPoly {
    // Horner form: E = P_0 − ∂(P_1 − ∂(P_2 − …))
    let top = a.max_jet();
    let mut acc = ThetaPoly::zero();
    for s in (0..=top).rev() {
        acc = &partial(a, s) - &acc.total_derivative();
    }
    acc
}

/// Result of the exactness test.
#[derive(Clone, Debug, PartialEq)]
pub struct Exactness {
    pub exact: bool,
    /// `w` with `∂w = a`, when the integration by parts succeeded.
    pub witness: Option<ThetaPoly>,
}

/// Decides whether `a ∈ ∂Â` by the Euler criterion and, when it is,
/// integrates by parts on the top jet to produce a primitive.
pub fn is_total_derivative(a: &ThetaPoly) -> Result<Exactness> {
    for (m, c) in a.terms() {
        if *m == Monomial::one() && !c.is_zero() {
            return Err(Error::ConstantObstruction(c.to_string()));
        }
    }
    let exact = variational_derivative_u(a).is_zero() && variational_derivative_theta(a).is_zero();
    if !exact {
        return Ok(Exactness { exact: false, witness: None });
    }
    Ok(Exactness { exact: true, witness: integrate(a) })
}

/// Greedy integration by parts. `None` if some step is not linear in the
/// top jet or a coefficient has no elementary primitive.
pub fn integrate(a: &ThetaPoly) -> Option<ThetaPoly> {
    let mut rest = a.clone();
    let mut w = ThetaPoly::zero();
    while !rest.is_zero() {
        let n = rest.max_jet();
        if n == 0 {
            return None;
        }
        // odd top jet: θ^n·B ← ∂(θ^{n−1}B)
        let b = rest.d_theta(n);
        if !b.is_zero() {
            if b.max_jet() >= n || terms_have(&b, |m| m.has_theta(n - 1)) {
                return None;
            }
            let piece = ThetaPoly::theta(n - 1) * b;
            rest -= &piece.total_derivative();
            w += &piece;
        }
        // even top jet: u^n·A ← ∂(∫A du^{n−1})
        let a_n = rest.d_u(n);
        if !a_n.is_zero() {
            if terms_have(&a_n, |m| m.u_exp(n) > 0 || m.has_theta(n) || m.has_theta(n - 1)) {
                return None;
            }
            let piece = integrate_in_jet(&a_n, n - 1)?;
            rest -= &piece.total_derivative();
            w += &piece;
        }
        if rest.max_jet() >= n && !rest.is_zero() {
            return None;
        }
    }
    Some(w)
}

fn terms_have(p: &ThetaPoly, f: impl Fn(&Monomial) -> bool) -> bool {
    p.terms().any(|(m, _)| f(m))
}

/// Antiderivative in the even variable `u^s` (`s = 0` integrates the
/// coefficient in `u`).
fn integrate_in_jet(a: &ThetaPoly, s: u32) -> Option<ThetaPoly> {
    let mut out = ThetaPoly::zero();
    for (m, c) in a.terms() {
        if s == 0 {
            out.add_term(m.clone(), c.integrate_u()?);
        } else {
            let k = m.u_exp(s);
            out.add_term(m.clone().with_u(s, k + 1), c.scale(&rat(1, k as i64 + 1)));
        }
    }
    Some(out)
}

/// Graded commutator `[A, B] = AB − (−1)^{|A||B|}BA` evaluated on `x`.
pub fn graded_commutator(a: &EvolutionaryOp, b: &EvolutionaryOp, x: &ThetaPoly) -> ThetaPoly {
    let ab = a.apply(&b.apply(x));
    let ba = b.apply(&a.apply(x));
    if a.is_odd() && b.is_odd() {
        &ab + &ba
    } else {
        &ab - &ba
    }
}

/// `D∂ − ∂D` on `x`.
pub fn commutator_with_derivative(op: &EvolutionaryOp, x: &ThetaPoly) -> ThetaPoly {
    &op.apply(&x.total_derivative()) - &op.apply(x).total_derivative()
}
