//! Seeded random elements for property sweeps.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Monomial, ThetaPoly};
use crate::coeff::{int, CoeffExpr};

pub struct Sampler {
    rng: ChaCha8Rng,
    pool: Vec<CoeffExpr>,
}

impl Sampler {
    /// Coefficients are drawn from small integer combinations of `1`, `u`,
    /// the metric `g` and two free symbols `a`, `b` with derivatives.
    pub fn new(seed: u64) -> Self {
        let f = CoeffExpr::func;
        let pool = vec![
            CoeffExpr::one(),
            CoeffExpr::u(),
            f("g", 0),
            f("g", 1),
            f("a", 0),
            f("a", 1),
            f("a", 2),
            f("b", 0),
            &CoeffExpr::u() * &f("a", 0),
            &f("g", 0) * &f("b", 1),
        ];
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), pool }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A nonzero coefficient with one or two terms.
    pub fn coeff(&mut self) -> CoeffExpr {
        let n = self.rng.gen_range(1..=2);
        let mut c = CoeffExpr::zero();
        while c.is_zero() {
            for _ in 0..n {
                let k = self.rng.gen_range(-3i64..=3);
                let atom = self.pool.choose(&mut self.rng).unwrap().clone();
                c += &atom.scale(&int(k));
            }
        }
        c
    }

    /// A coefficient that may also depend linearly on `λ`.
    pub fn coeff_lambda(&mut self) -> CoeffExpr {
        let c0 = self.coeff();
        if self.rng.gen_bool(0.5) {
            &c0 + &(&CoeffExpr::lambda() * &self.coeff())
        } else {
            c0
        }
    }

    pub fn pick<'a>(&mut self, basis: &'a [Monomial]) -> Option<&'a Monomial> {
        basis.choose(&mut self.rng)
    }

    /// Random combination of up to `max_terms` basis elements.
    pub fn combination(&mut self, basis: &[Monomial], max_terms: usize, with_lambda: bool) -> ThetaPoly {
        let mut p = ThetaPoly::zero();
        if basis.is_empty() {
            return p;
        }
        let n = self.rng.gen_range(1..=max_terms.max(1));
        for _ in 0..n {
            let m = basis.choose(&mut self.rng).unwrap().clone();
            let c = if with_lambda { self.coeff_lambda() } else { self.coeff() };
            p.add_term(m, c);
        }
        p
    }

    /// Random element of standard degree `d` with jets `≤ max_jet`.
    pub fn poly(&mut self, d: u32, max_jet: u32, max_terms: usize) -> ThetaPoly {
        let basis = Monomial::enumerate(d, max_jet);
        self.combination(&basis, max_terms, false)
    }
}
