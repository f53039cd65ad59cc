//! Built-in brackets: KdV, Camassa-Holm and Volterra.

use super::format::{parse_jet, read_lattice};
use super::lattice::{LatticeBracket, Substitution};
use super::miura::MiuraTransform;
use super::DeltaBracket;
use crate::coeff::parse::Parser;
use crate::coeff::{int, CoeffExpr};

fn bracket(coordinate: &str, terms: &[(u32, u32, &str)]) -> DeltaBracket {
    let p = Parser::new();
    let terms = terms.iter().map(|(e, k, c)| (*e, *k, parse_jet(c, coordinate, &p).expect("fixture parses")));
    DeltaBracket::new(coordinate, terms).expect("fixture is skew")
}

pub fn kdv() -> (DeltaBracket, DeltaBracket) {
    let b1 = bracket("u", &[(0, 1, "1")]);
    let b2 = bracket("u", &[(0, 1, "u"), (0, 0, "u1/2"), (2, 3, "1/8")]);
    (b1, b2)
}

/// Brackets in `w` and the transformation `w = u + ε u¹/(2√2)`.
pub fn camassa_holm() -> (DeltaBracket, DeltaBracket, MiuraTransform) {
    let b1 = bracket("w", &[(0, 1, "1"), (2, 3, "-1/8")]);
    let b2 = bracket("w", &[(0, 1, "w"), (0, 0, "wx/2")]);
    let f = MiuraTransform::parse("w", "u", "u + eps/(2*sqrt(2))*u1", &Parser::new()).expect("fixture parses");
    (b1, b2, f)
}

/// The ε² block of the Camassa-Holm bracket₂ in `u`, as expected after the transformation.
pub fn camassa_holm_u_block() -> DeltaBracket {
    bracket("u", &[(2, 3, "u/8"), (2, 2, "3/16*u1"), (2, 1, "1/16*u2")])
}

pub const VOLTERRA_1: &str = r#"{"coordinate": "u", "shift_terms": [
    {"shift": 1, "coeff": "u(x)*u(y)", "eps_power": -1},
    {"shift": -1, "coeff": "-u(x)*u(y)", "eps_power": -1}
]}"#;

pub const VOLTERRA_2: &str = r#"{"coordinate": "u", "shift_terms": [
    {"shift": 1, "coeff": "u(x)*u(y)*(u(x)+u(y))/4", "eps_power": -1},
    {"shift": -1, "coeff": "-u(x)*u(y)*(u(x)+u(y))/4", "eps_power": -1},
    {"shift": 2, "coeff": "u(x)*u(y)*u(x+eps)/4", "eps_power": -1},
    {"shift": -2, "coeff": "-u(x)*u(y)*u(y+eps)/4", "eps_power": -1}
]}"#;

/// The first Volterra bracket in the flat coordinate `v`.
pub const VOLTERRA_1_FLAT: &str = r#"{"coordinate": "v", "shift_terms": [
    {"shift": 1, "coeff": "1", "eps_power": -1},
    {"shift": -1, "coeff": "-1", "eps_power": -1}
]}"#;

/// The second Volterra bracket in `v`, reading the shifted terms as `exp(v(x+ε))`.
/// Under `u = 4exp(v)` it maps to a quarter of [`VOLTERRA_2`].
pub const VOLTERRA_2_FLAT: &str = r#"{"coordinate": "v", "shift_terms": [
    {"shift": 1, "coeff": "(exp(v(x))+exp(v(y)))/4", "eps_power": -1},
    {"shift": -1, "coeff": "-(exp(v(x))+exp(v(y)))/4", "eps_power": -1},
    {"shift": 2, "coeff": "exp(v(x+eps))/4", "eps_power": -1},
    {"shift": -2, "coeff": "-exp(v(y+eps))/4", "eps_power": -1}
]}"#;

pub fn volterra() -> (LatticeBracket, LatticeBracket) {
    (read_lattice(VOLTERRA_1).expect("fixture parses"), read_lattice(VOLTERRA_2).expect("fixture parses"))
}

pub fn volterra_flat() -> (LatticeBracket, LatticeBracket) {
    (
        read_lattice(VOLTERRA_1_FLAT).expect("fixture parses"),
        read_lattice(VOLTERRA_2_FLAT).expect("fixture parses"),
    )
}

/// `u = 4 exp(v)`.
pub fn volterra_substitution() -> Substitution {
    Substitution::Exponential { factor: int(4) }
}

/// Expected central invariants: KdV, Camassa-Holm in `w` (and in `u`), Volterra.
pub fn expected_invariants() -> [(&'static str, CoeffExpr); 3] {
    [
        ("kdv", CoeffExpr::rational(1, 24)),
        ("camassa-holm", CoeffExpr::u().scale(&crate::coeff::rat(1, 24))),
        ("volterra", CoeffExpr::u().inverse().expect("monomial").scale(&crate::coeff::rat(1, 24))),
    ]
}
