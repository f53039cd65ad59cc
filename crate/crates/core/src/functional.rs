//! Local functionals: densities modulo total derivatives.

use crate::algebra::ThetaPoly;
use crate::error::{Error, Result};
use crate::operators::{is_total_derivative, EvolutionaryOp};

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalClass {
    rep: ThetaPoly,
    /// `(standard degree, super degree)` of a homogeneous representative.
    bidegree: Option<(i64, u32)>,
}

impl FunctionalClass {
    pub fn new(rep: ThetaPoly) -> Result<Self> {
        let bidegree = rep.bidegree();
        Ok(FunctionalClass { rep, bidegree })
    }

    /// Like [`FunctionalClass::new`] but rejects inhomogeneous input.
    pub fn homogeneous(rep: ThetaPoly) -> Result<Self> {
        if rep.bidegree().is_none() && !rep.is_zero() {
            return Err(Error::NotHomogeneous);
        }
        Self::new(rep)
    }

    pub fn zero() -> Self {
        FunctionalClass { rep: ThetaPoly::zero(), bidegree: None }
    }

    pub fn representative(&self) -> &ThetaPoly {
        &self.rep
    }

    pub fn bidegree(&self) -> Option<(i64, u32)> {
        self.bidegree
    }

    /// Vanishing in `F̂`, with a primitive when one is found.
    pub fn vanishes(&self) -> Result<(bool, Option<ThetaPoly>)> {
        if self.rep.is_zero() {
            return Ok((true, Some(ThetaPoly::zero())));
        }
        let r = is_total_derivative(&self.rep)?;
        Ok((r.exact, r.witness))
    }
}

fn same_bidegree(a: &FunctionalClass, b: &FunctionalClass) -> Result<()> {
    match (a.bidegree, b.bidegree) {
        (Some(x), Some(y)) if x != y => {
            Err(Error::DegreeMismatch { expected: format!("{x:?}"), found: format!("{y:?}") })
        }
        _ => Ok(()),
    }
}

pub fn class_equal(a: &FunctionalClass, b: &FunctionalClass) -> Result<bool> {
    same_bidegree(a, b)?;
    let diff = FunctionalClass::new(&a.rep - &b.rep)?;
    match diff.vanishes() {
        Ok((v, _)) => Ok(v),
        Err(Error::ConstantObstruction(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// The operator induced on `F̂` by an evolutionary derivation.
pub fn induced_d(op: &EvolutionaryOp, a: &FunctionalClass) -> Result<FunctionalClass> {
    FunctionalClass::new(op.apply(&a.rep))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CocycleCheck {
    pub closed: bool,
    /// Primitives of `D₁(a)` and `D₂(a)` in that order.
    pub witnesses: [Option<ThetaPoly>; 2],
}

/// `d₁[a] = 0` and `d₂[a] = 0` in `F̂`.
pub fn verify_bh_cocycle(d1: &EvolutionaryOp, d2: &EvolutionaryOp, a: &FunctionalClass) -> Result<CocycleCheck> {
    let (c1, w1) = induced_d(d1, a)?.vanishes()?;
    let (c2, w2) = induced_d(d2, a)?.vanishes()?;
    Ok(CocycleCheck { closed: c1 && c2, witnesses: [w1, w2] })
}

/// `[a] = d₁d₂[y]`, with `y` two units lower in both degrees.
pub fn verify_bh_coboundary(
    d1: &EvolutionaryOp,
    d2: &EvolutionaryOp,
    a: &FunctionalClass,
    y: &FunctionalClass,
) -> Result<bool> {
    if let (Some((d, p)), Some((dy, py))) = (a.bidegree, y.bidegree) {
        if dy != d - 2 || py + 2 != p {
            return Err(Error::DegreeMismatch {
                expected: format!("({}, {})", d - 2, p as i64 - 2),
                found: format!("({dy}, {py})"),
            });
        }
    }
    let image = FunctionalClass::new(d1.apply(&d2.apply(&y.rep)))?;
    class_equal(a, &image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffExpr;
    use crate::operators::{make_d1, make_d2, make_d_lambda, symbolic_g};

    fn tt() -> ThetaPoly {
        ThetaPoly::thetas(&[0, 1])
    }

    #[test]
    fn class_equality_examples() {
        let w = ThetaPoly::u_jet(1) * ThetaPoly::thetas(&[0, 2]);
        let a = FunctionalClass::new(&tt() + &w.total_derivative()).unwrap();
        let b = FunctionalClass::new(tt()).unwrap();
        assert!(class_equal(&a, &b).unwrap());
        assert!(!class_equal(&b, &FunctionalClass::zero()).unwrap());
        let c = FunctionalClass::new(w.total_derivative()).unwrap();
        assert!(class_equal(&c, &FunctionalClass::zero()).unwrap());
    }

    #[test]
    fn pencil_is_closed() {
        let dl = make_d_lambda(&symbolic_g());
        let p = ThetaPoly::from_coeff(&(&CoeffExpr::u() - &CoeffExpr::lambda()) * &symbolic_g()) * tt();
        let img = induced_d(&dl, &FunctionalClass::new(p).unwrap()).unwrap();
        assert!(img.vanishes().unwrap().0);
    }

    #[test]
    fn zero_is_cocycle_and_coboundary() {
        let (d1, d2) = (make_d1(&symbolic_g()), make_d2(&symbolic_g()));
        let z = FunctionalClass::zero();
        assert!(verify_bh_cocycle(&d1, &d2, &z).unwrap().closed);
        assert!(verify_bh_coboundary(&d1, &d2, &z, &z).unwrap());
    }
}
