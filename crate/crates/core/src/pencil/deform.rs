//! The order-ε² deformation of a scalar pencil and its logarithmic generator.

use super::{operator_density, skew_operator, EpsDensity};
use crate::algebra::ThetaPoly;
use crate::coeff::{CoeffExpr, Rational};
use crate::error::{Error, Result};
use crate::operators::{is_total_derivative, make_d1, make_d2, make_d_lambda, variational_derivative_theta, variational_derivative_u};

fn tp(c: CoeffExpr) -> ThetaPoly {
    ThetaPoly::from_coeff(c)
}

/// `(u−λ)gθθ¹ + ε²Q` with `Q` as displayed; `theta3_factor` is 6 for the true formula.
pub fn deformation_with(g: &CoeffExpr, c: &CoeffExpr, theta3_factor: i64) -> EpsDensity {
    let u = CoeffExpr::u();
    let lam = CoeffExpr::lambda();
    let (g1, g2) = (g.ddu(), g.ddu().ddu());
    let c1 = c.ddu();
    let r = |n: i64| CoeffExpr::integer(n);
    let u1 = ThetaPoly::u_jet(1);
    let u2 = ThetaPoly::u_jet(2);

    let lead = tp(&(&u - &lam) * g) * ThetaPoly::thetas(&[0, 1]);

    let t3 = tp(&(&r(theta3_factor) * c) * &(g * g));
    let t2 = tp(&(&(&r(9) * c) * &(g * &g1)) + &(&(&r(6) * &c1) * &(g * g))) * u1.clone();
    let t1_sq = &(&(&(&r(-5) * c) * &(&g1 * &g1)) + &(&c1 * &(g * &g1))) + &(&(&r(4) * c) * &(g * &g2));
    let t1 = tp(t1_sq) * &u1 * &u1 + tp(&(&r(5) * c) * &(g * &g1)) * u2;
    let q = (t3 * ThetaPoly::thetas(&[0, 3]) + t2 * ThetaPoly::thetas(&[0, 2]) + t1 * ThetaPoly::thetas(&[0, 1]))
        .scale_rational(&Rational::new(1.into(), 2.into()));

    let mut out = EpsDensity::new();
    out.insert(0, lead);
    if !q.is_zero() {
        out.insert(2, q);
    }
    out
}

pub fn deformation_order2(g: &CoeffExpr, c: &CoeffExpr) -> EpsDensity {
    deformation_with(g, c, 6)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeformationCheck {
    pub exact: bool,
    /// `D_λ(Q)`.
    pub image: ThetaPoly,
    pub residual_u: ThetaPoly,
    pub residual_theta: ThetaPoly,
    pub witness: Option<ThetaPoly>,
}

/// `D_λ(Q)` must be ∂-exact for the ε²-density `Q`.
pub fn verify_density(g: &CoeffExpr, q: &ThetaPoly) -> Result<DeformationCheck> {
    let image = make_d_lambda(g).apply(q);
    let residual_u = variational_derivative_u(&image);
    let residual_theta = variational_derivative_theta(&image);
    let r = is_total_derivative(&image)?;
    Ok(DeformationCheck { exact: r.exact, image, residual_u, residual_theta, witness: r.witness })
}

pub fn verify_deformation(g: &CoeffExpr, c: &CoeffExpr) -> Result<DeformationCheck> {
    let q = deformation_order2(g, c).remove(&2).unwrap_or_default();
    verify_density(g, &q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DlzResult {
    /// Plain density of `D₁(D₂X₁ − D₁X₂)` in normal form `Σ A_k θθ^k`.
    pub raw: ThetaPoly,
    /// `raw / kappa`, normalized against the displayed ε²-density.
    pub density: ThetaPoly,
    /// Ratio of the δ‴ coefficients of `raw` and of the displayed density.
    pub kappa: Option<Rational>,
}

/// Builds the ε²-density from `X₁ = c·u¹·log u¹` and `X₂ = u·c·u¹·log u¹`.
pub fn dlz_generator(g: &CoeffExpr, c: &CoeffExpr) -> Result<DlzResult> {
    let (d1, d2) = (make_d1(g), make_d2(g));
    let x1 = tp(c.clone()) * ThetaPoly::u_jet(1) * ThetaPoly::log_u1();
    let x2 = tp(CoeffExpr::u()) * &x1;
    let inner = &d2.apply(&x1) - &d1.apply(&x2);
    let y = d1.apply(&inner);
    let k = skew_operator(&y)?;
    if k.has_extension_atoms() {
        return Err(Error::ExtensionAtomsPersist(k.to_string()));
    }
    let k = k.map_coeffs(|a| a.clone().into_plain().unwrap_or_default());
    let raw = operator_density(&k);
    if raw.is_zero() {
        return Ok(DlzResult { raw: raw.clone(), density: raw, kappa: None });
    }
    let target = (g * g).scale(&Rational::from_integer(3.into())) * c.clone();
    let lead = k.coeff(3);
    let kappa = scalar_of(&lead)
        .and_then(|l| rational_ratio(&l, &target))
        .ok_or_else(|| Error::Invalid(format!("δ‴ coefficient {lead} is not a rational multiple of 3cg²")))?;
    let density = raw.scale_rational(&kappa.recip());
    Ok(DlzResult { raw, density, kappa: Some(kappa) })
}

pub(crate) fn scalar_of(a: &ThetaPoly) -> Option<CoeffExpr> {
    if a.is_zero() {
        return Some(CoeffExpr::zero());
    }
    let mut out = None;
    for (m, c) in a.terms() {
        if *m != crate::algebra::Monomial::one() {
            return None;
        }
        out = Some(c.clone());
    }
    out
}

/// `r` with `a = r·b`, if one exists.
pub(crate) fn rational_ratio(a: &CoeffExpr, b: &CoeffExpr) -> Option<Rational> {
    let (m, rb) = b.terms().next()?;
    let ra = a.terms().find(|(n, _)| *n == m).map(|(_, r)| r.clone())?;
    let k = ra / rb;
    (*a == b.scale(&k)).then_some(k)
}
