use std::cmp::Ordering;

use thetacalc::algebra::{Monomial, ThetaPoly};
use thetacalc::coeff::CoeffExpr;
use thetacalc::sample::Sampler;
use thetacalc::spectral::{E1Element, Spectral};

fn sp() -> Spectral {
    Spectral::new(CoeffExpr::func("g", 0))
}

fn with_top_jet(p: u32, q: u32) -> Vec<Monomial> {
    Monomial::enumerate(p + q, q).into_iter().filter(|m| m.max_jet() == q).collect()
}

#[test]
fn d0_squares_to_zero() {
    let s = sp();
    let mut rng = Sampler::new(11);
    for d in 0..=5u32 {
        for q in 0..=d {
            let p = d - q;
            let basis = with_top_jet(p, q);
            for _ in 0..8 {
                let a = rng.combination(&basis, 3, true);
                let once = s.d0(&a, p, q).unwrap();
                let twice = s.d0(&once, p, q + 1).unwrap();
                assert!(twice.is_zero(), "d0^2 at ({p},{q}) on {a}: {twice}");
            }
        }
    }
}

#[test]
fn d0_is_the_top_jet_part_of_d_lambda() {
    let s = sp();
    let mut rng = Sampler::new(12);
    for d in 1..=5u32 {
        for q in 0..=d {
            let p = d - q;
            let basis = with_top_jet(p, q);
            for _ in 0..5 {
                let a = rng.combination(&basis, 3, true);
                let full = s.d_lambda().apply(&a).filter(|m| m.max_jet() == q + 1);
                assert_eq!(s.d0(&a, p, q).unwrap(), full);
            }
        }
    }
}

#[test]
fn kernel_and_image_membership() {
    let s = sp();
    let mut rng = Sampler::new(13);
    for d in 1..=5u32 {
        for q in 1..=d {
            let p = d - q;
            let low: Vec<Monomial> = Monomial::enumerate(p, q - 1);
            for _ in 0..6 {
                let h = rng.combination(&low, 2, true);
                let k = rng.combination(&low, 2, true);
                let el = s.kernel_element(q, &h, &k);
                assert!(s.d0(&el, p, q).unwrap().is_zero(), "kernel element at ({p},{q})");
            }
            if q < 2 {
                continue;
            }
            let theta_free: Vec<Monomial> = with_top_jet(p, q - 1).into_iter().filter(|m| !m.has_theta(0)).collect();
            for _ in 0..6 {
                let h0 = rng.combination(&theta_free, 2, true);
                let h1 = rng.combination(&theta_free, 2, true);
                let (img, pre) = s.image_element(q, &h0, &h1);
                assert_eq!(s.d0(&pre, p, q - 1).unwrap(), img, "preimage at ({p},{q})");
                assert!(s.d0(&img, p, q).unwrap().is_zero());
            }
        }
    }
}

#[test]
fn d1_matches_the_filtered_part_of_d_lambda() {
    let s = sp();
    let mut rng = Sampler::new(14);
    let u = CoeffExpr::u();
    for q in 2..=4u32 {
        for p in 1..=(6 - q) {
            let basis = E1Element::basis(p, q, false);
            for _ in 0..6 {
                let f = rng.combination(&basis, 3, false);
                let x = E1Element::new(p, q, f).unwrap();
                let full = s.d_lambda().apply(&x.representative()).subst_lambda(&u);
                // multiples of θθ^q whose remaining factors stay below jet q
                let kept = full.filter(|m| {
                    m.has_theta(0)
                        && m.has_theta(q)
                        && m.odd_part_without(&[0, q]).max_jet() < q
                });
                let oracle = E1Element::from_representative(p + 1, q, &kept).unwrap();
                // exact, not only modulo lower jets
                assert_eq!(s.d1(&x), oracle, "d1 at ({p},{q})");
            }
        }
    }
}

#[test]
fn d1_squares_to_zero_after_reduction() {
    let s = sp();
    let mut rng = Sampler::new(15);
    for q in 2..=5u32 {
        for p in 1..=(6 - q) {
            let basis = E1Element::basis(p, q, false);
            for _ in 0..10 {
                let f = rng.combination(&basis, 3, false);
                let x = E1Element::new(p, q, f).unwrap();
                let twice = s.d1(&s.d1(&x));
                assert!(twice.reduce().is_zero(), "d1^2 at ({p},{q}): {}", twice.body());
                // holds on representatives too
                assert!(twice.is_zero());
            }
        }
    }
}

#[test]
fn uvw_split_identity() {
    let s = sp();
    let a = ThetaPoly::from_coeff(CoeffExpr::func("a", 0));
    for q in 2..=6u32 {
        for p in 1..=5u32 {
            for m in E1Element::basis(p, q, false) {
                let f = &a * &ThetaPoly::monomial(m.clone());
                assert_eq!(s.split_sum(&f, q), s.d1_body(&f, q), "split at ({p},{q}) on {m}");
            }
        }
    }
}

#[test]
fn v_lowers_lex_order() {
    let s = sp();
    let mut rng = Sampler::new(16);
    let mut checked = 0;
    for q in 2..=6u32 {
        for p in 1..=5u32 {
            let basis = E1Element::basis(p, q, false);
            for _ in 0..20 {
                let Some(m) = rng.pick(&basis).cloned() else { continue };
                let out = s.v_op(&ThetaPoly::monomial(m.clone()), q);
                for (n, _) in out.terms() {
                    assert_eq!(n.lex_cmp(&m), Ordering::Less, "V({m}) contains {n}");
                    assert_eq!(n.degree(), m.degree());
                }
                checked += 1;
            }
        }
    }
    assert!(checked >= 500);
}

#[test]
fn contraction_identity() {
    let s = sp();
    let mut rng = Sampler::new(17);
    for (p, q) in [(1u32, 3u32), (2, 2), (3, 2), (2, 3), (2, 4), (3, 3)] {
        let basis = E1Element::basis(p, q, false);
        for _ in 0..30 {
            let f = rng.combination(&basis, 3, false);
            let x = E1Element::new(p, q, f).unwrap();
            let hd = s.homotopy(&s.d1(&x)).unwrap();
            let dh = s.d1(&s.homotopy(&x).unwrap());
            let sum = &hd.body().clone() + dh.body();
            let diff = E1Element::new(p, q, &sum - x.body()).unwrap();
            assert!(diff.reduce().is_zero(), "contraction at ({p},{q}) on {}: {}", x.body(), diff.body());
            assert!(diff.is_zero(), "contraction on the representative at ({p},{q})");
        }
    }
}

#[test]
fn surviving_class_at_one_two() {
    let s = sp();
    let f = ThetaPoly::from_coeff(CoeffExpr::func("a", 0)) * ThetaPoly::theta(1);
    let x = E1Element::new(1, 2, f).unwrap();
    assert!(s.d1(&x).is_zero());
    assert!(matches!(s.homotopy(&x), Err(thetacalc::Error::ZeroWeight(_))));
    // the other summand at (1, 2) is contracted
    let y = E1Element::new(1, 2, ThetaPoly::from_coeff(CoeffExpr::func("a", 0)) * ThetaPoly::u_jet(1)).unwrap();
    let back = s.homotopy(&s.d1(&y)).unwrap();
    assert_eq!(back, y);
}

#[test]
fn single_term_homotopy() {
    let s = sp();
    // θ¹u¹ at q = 3: V(u¹) = 0, so the series stops after one step
    let x = E1Element::new(2, 3, ThetaPoly::theta(1) * ThetaPoly::u_jet(1)).unwrap();
    let h = s.homotopy(&x).unwrap();
    // weight(u¹θθ³) = 3/2 − 1/2 + 1 = 2
    let expect = ThetaPoly::from_coeff(CoeffExpr::func("g", 0).inverse().unwrap().scale(&thetacalc::coeff::rat(1, 2)))
        * ThetaPoly::u_jet(1);
    assert_eq!(h.body(), &expect);
    let none = E1Element::new(2, 3, ThetaPoly::u_jet(2)).unwrap();
    assert!(s.homotopy(&none).unwrap().is_zero());
}
