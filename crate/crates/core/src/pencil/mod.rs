//! Poisson brackets in δ-form, their θ-densities, Miura transformations,
//! lattice brackets and central invariants.

pub mod deform;
pub mod diffop;
pub mod examples;
pub mod format;
pub mod lattice;
pub mod miura;

use std::collections::BTreeMap;

use crate::algebra::ThetaPoly;
use crate::coeff::{CoeffExpr, Rational};
use crate::error::{Error, Result};

pub use deform::{deformation_order2, deformation_with, dlz_generator, verify_deformation, DeformationCheck, DlzResult};
pub use diffop::{DiffOp, Series};
pub use lattice::{expand_lattice_bracket, LatticeBracket, LatticeTerm, Substitution};
pub use miura::{miura_transform, MiuraTransform};

/// θ-densities indexed by the power of ε.
pub type EpsDensity = BTreeMap<u32, ThetaPoly>;

/// `{u(x),u(y)} = Σ ε^e A_{e,k} δ^{(k)}(x−y)`, stored as `K_e = Σ_k A_{e,k}∂^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaBracket {
    coordinate: String,
    ops: BTreeMap<u32, DiffOp>,
    /// Truncation order in ε; `None` when the bracket is exact.
    order: Option<u32>,
}

impl DeltaBracket {
    /// From `(eps, der, coeff)` triples; rejects θ-dependent or non-skew input.
    pub fn new(coordinate: &str, terms: impl IntoIterator<Item = (u32, u32, ThetaPoly)>) -> Result<Self> {
        let mut ops: BTreeMap<u32, DiffOp> = BTreeMap::new();
        for (e, k, a) in terms {
            if a.terms().any(|(m, _)| m.super_degree() != 0) {
                return Err(Error::Invalid(format!("bracket coefficient {a} depends on θ")));
            }
            ops.entry(e).or_default().add_term(k, a);
        }
        Self::from_ops(coordinate, ops, None)
    }

    pub fn from_ops(coordinate: &str, ops: BTreeMap<u32, DiffOp>, order: Option<u32>) -> Result<Self> {
        let ops = ops.into_iter().filter(|(_, op)| !op.is_zero()).collect();
        let b = DeltaBracket { coordinate: coordinate.to_string(), ops, order };
        b.check_skew()?;
        Ok(b)
    }

    /// `gδ′ + ½g′u¹δ`.
    pub fn hydrodynamic(coordinate: &str, g: &CoeffExpr) -> Self {
        DeltaBracket { coordinate: coordinate.to_string(), ops: BTreeMap::from([(0, hydrodynamic_op(g))]), order: None }
    }

    pub fn coordinate(&self) -> &str {
        &self.coordinate
    }

    pub fn order(&self) -> Option<u32> {
        self.order
    }

    pub fn with_order(mut self, order: Option<u32>) -> Self {
        self.order = order;
        self
    }

    pub fn ops(&self) -> impl Iterator<Item = (u32, &DiffOp)> {
        self.ops.iter().map(|(e, op)| (*e, op))
    }

    pub fn eps_part(&self, e: u32) -> DiffOp {
        self.ops.get(&e).cloned().unwrap_or_default()
    }

    pub fn coeff(&self, e: u32, k: u32) -> ThetaPoly {
        self.ops.get(&e).map(|op| op.coeff(k)).unwrap_or_default()
    }

    /// `(eps, der, coeff)` in increasing order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &ThetaPoly)> {
        self.ops.iter().flat_map(|(e, op)| op.terms().map(move |(k, a)| (*e, k, a)))
    }

    /// `K† = −K` in each power of ε.
    pub fn check_skew(&self) -> Result<()> {
        for (e, op) in &self.ops {
            let sym = op.symmetric_part();
            if !sym.is_zero() {
                return Err(Error::SkewnessViolation(format!("ε^{e}: {sym}")));
            }
        }
        Ok(())
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: &CoeffExpr, other: &DeltaBracket) -> Self {
        let mut ops = self.ops.clone();
        for (e, op) in &other.ops {
            let sum = ops.remove(e).unwrap_or_default().add(&op.scale(s));
            if !sum.is_zero() {
                ops.insert(*e, sum);
            }
        }
        let order = match (self.order, other.order) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        DeltaBracket { coordinate: self.coordinate.clone(), ops, order }
    }

    pub fn truncate(&self, order: u32) -> Self {
        let ops = self.ops.iter().filter(|(e, _)| **e <= order).map(|(e, op)| (*e, op.clone())).collect();
        DeltaBracket { coordinate: self.coordinate.clone(), ops, order: Some(self.order.map_or(order, |o| o.min(order))) }
    }

    pub fn map_coeffs(&self, f: impl Fn(&ThetaPoly) -> ThetaPoly) -> Self {
        let ops = self.ops.iter().map(|(e, op)| (*e, op.map_coeffs(&f))).filter(|(_, op)| !op.is_zero()).collect();
        DeltaBracket { coordinate: self.coordinate.clone(), ops, order: self.order }
    }
}

/// `g∂ + ½g′u¹`.
pub fn hydrodynamic_op(g: &CoeffExpr) -> DiffOp {
    let mut op = DiffOp::term(1, ThetaPoly::from_coeff(g.clone()));
    op.add_term(0, ThetaPoly::from_coeff(g.ddu().scale(&Rational::new(1.into(), 2.into()))) * ThetaPoly::u_jet(1));
    op
}

/// The skew operator of a bivector density.
///
/// `A θ^iθ^j` (i < j) contributes `(−∂)^i ∘ A ∘ ∂^j` to `M`, and `K = (M − M†)/2`.
/// `M` vanishes on total derivatives, so `K` depends only on the class.
pub fn skew_operator(p: &ThetaPoly) -> Result<DiffOp> {
    let mut m_op = DiffOp::zero();
    for (m, c) in p.terms() {
        let idx: Vec<u32> = m.theta_indices().collect();
        let [i, j] = idx[..] else {
            return Err(Error::NotABivector(idx.len()));
        };
        let mut a = ThetaPoly::term(m.even_part(), c.clone());
        if p.is_extended() {
            a.set_extended();
        }
        let sign = if i % 2 == 0 { 1 } else { -1 };
        let left = DiffOp::term(i, ThetaPoly::one().scale_rational(&Rational::from_integer(sign.into())));
        m_op = m_op.add(&left.compose(&DiffOp::term(j, a)));
    }
    Ok(m_op.skew_part())
}

/// `Σ_{k≥1} A_k θθ^k` for `K = Σ A_k∂^k`; `A₀` is fixed by skewness.
pub fn operator_density(k: &DiffOp) -> ThetaPoly {
    let mut out = ThetaPoly::zero();
    for (d, a) in k.terms() {
        if d >= 1 {
            out += &(a * &ThetaPoly::thetas(&[0, d]));
        }
    }
    out
}

pub fn theta_to_delta(p: &EpsDensity, coordinate: &str) -> Result<DeltaBracket> {
    let mut ops = BTreeMap::new();
    for (e, d) in p {
        let k = skew_operator(d)?;
        if k.has_extension_atoms() {
            return Err(Error::ExtensionAtomsPersist(k.to_string()));
        }
        ops.insert(*e, k);
    }
    DeltaBracket::from_ops(coordinate, ops, None)
}

pub fn delta_to_theta(b: &DeltaBracket) -> EpsDensity {
    b.ops().map(|(e, op)| (e, operator_density(op))).filter(|(_, d)| !d.is_zero()).collect()
}

/// `g₂/g₁`.
pub fn canonical_coordinate(g1: &CoeffExpr, g2: &CoeffExpr) -> Result<CoeffExpr> {
    g2.div_exact(g1).ok_or_else(|| Error::NonMonomialDivision(format!("({g2})/({g1})")))
}

fn scalar(a: &ThetaPoly, what: &str) -> Result<CoeffExpr> {
    deform::scalar_of(a).ok_or_else(|| Error::Invalid(format!("{what} depends on jets: {a}")))
}

/// The metric `g` of a hydrodynamic ε⁰ part.
pub fn dispersionless_metric(b: &DeltaBracket) -> Result<CoeffExpr> {
    let op = b.eps_part(0);
    let g = deform::scalar_of(&op.coeff(1))
        .filter(|g| !g.is_zero() && op == hydrodynamic_op(g))
        .ok_or_else(|| Error::NotCanonicalCoordinate(format!("ε⁰ part is not hydrodynamic: {op}")))?;
    Ok(g)
}

/// `(Q₂ − uQ₁)/(3g²)` for brackets with ε⁰ parts `gδ′ + …` and `ugδ′ + …`.
pub fn central_invariant(b1: &DeltaBracket, b2: &DeltaBracket) -> Result<CoeffExpr> {
    let g = dispersionless_metric(b1)?;
    let g2 = dispersionless_metric(b2)?;
    let u = CoeffExpr::u();
    if g2 != &u * &g {
        return Err(Error::NotCanonicalCoordinate(format!(
            "{} is not the canonical coordinate: g₂/g₁ = ({g2})/({g})",
            b1.coordinate()
        )));
    }
    let q1 = scalar(&b1.coeff(2, 3), "Q₁")?;
    let q2 = scalar(&b2.coeff(2, 3), "Q₂")?;
    let num = &q2 - &(&u * &q1);
    let den = (&g * &g).scale(&Rational::from_integer(3.into()));
    num.div_exact(&den).ok_or_else(|| Error::NonMonomialDivision(format!("({num})/({den})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;
    use crate::functional::{class_equal, FunctionalClass};

    fn g() -> CoeffExpr {
        CoeffExpr::func("g", 0)
    }

    #[test]
    fn pencil_density_gives_the_pencil_bracket() {
        let a = &(&CoeffExpr::u() - &CoeffExpr::lambda()) * &g();
        let p = EpsDensity::from([(0, ThetaPoly::from_coeff(a.clone()) * ThetaPoly::thetas(&[0, 1]))]);
        let b = theta_to_delta(&p, "u").unwrap();
        assert_eq!(b.eps_part(0), hydrodynamic_op(&a));
        assert_eq!(delta_to_theta(&b), p);
    }

    #[test]
    fn exact_densities_have_zero_operator() {
        let w = ThetaPoly::from_coeff(g()) * ThetaPoly::u_jet(2) * ThetaPoly::thetas(&[1, 3]);
        assert!(skew_operator(&w.total_derivative()).unwrap().is_zero());
    }

    #[test]
    fn round_trip_on_classes() {
        let p = ThetaPoly::from_coeff(g()) * ThetaPoly::thetas(&[1, 2]) + ThetaPoly::u_jet(1) * ThetaPoly::thetas(&[0, 2]);
        let b = theta_to_delta(&EpsDensity::from([(2, p.clone())]), "u").unwrap();
        let back = delta_to_theta(&b).remove(&2).unwrap();
        let (x, y) = (FunctionalClass::new(back).unwrap(), FunctionalClass::new(p).unwrap());
        assert!(class_equal(&x, &y).unwrap());
    }

    #[test]
    fn non_bivectors_and_non_skew_brackets_are_rejected() {
        assert!(matches!(skew_operator(&ThetaPoly::theta(1)), Err(Error::NotABivector(1))));
        let bad = DeltaBracket::new("u", [(0, 1, ThetaPoly::from_coeff(CoeffExpr::u()))]);
        assert!(matches!(bad, Err(Error::SkewnessViolation(_))));
    }

    #[test]
    fn canonical_coordinates() {
        assert_eq!(canonical_coordinate(&g(), &(&CoeffExpr::u() * &g())).unwrap(), CoeffExpr::u());
        let two_u2 = CoeffExpr::u().pow(2).unwrap().scale(&rat(2, 1));
        let two_u3 = CoeffExpr::u().pow(3).unwrap().scale(&rat(2, 1));
        assert_eq!(canonical_coordinate(&two_u2, &two_u3).unwrap(), CoeffExpr::u());
    }
}
