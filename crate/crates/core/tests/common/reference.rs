//! Hand-entered pencils and implicit constraints.

use strictfeas::reproduce::Target;

const M6: &str = "(mu+2)/6";
const F6: &str = "(4-mu)/6";
const O6: &str = "(1-mu)/6";
const H: &str = "1/2";
const C1: &str = "a01 - (1-mu)/6";

pub fn problem1_raw() -> Vec<Vec<&'static str>> {
    vec![
        vec!["1", H, F6, H, H, M6, M6, H, O6],
        vec![H, "a01", M6, M6, M6, M6, "c01_0", "c01_1"],
        vec![F6, H, O6, "c01_0", "c01_1", H, O6],
        vec![H, "b01", M6, "c0_01", H, "c1_01"],
        vec![H, "c0_01", M6, "c1_01", O6],
        vec![M6, "c0_01", "c01_0", "c01_01"],
        vec![M6, "c01_10", "c01_1"],
        vec![H, "c1_01"],
        vec![O6],
    ]
}

pub fn problem1_simple() -> Vec<Vec<&'static str>> {
    vec![
        vec!["1", H, F6, H, H, M6, M6, H, O6],
        vec![H, "a01", M6, M6, M6, M6, M6, C1],
        vec![F6, H, O6, M6, C1, H, O6],
        vec![H, "b01", M6, "c0_01", H, "b01"],
        vec![H, "c0_01", M6, "b01", O6],
        vec![M6, "c0_01", M6, "c0_01"],
        vec![M6, "c0_01", C1],
        vec![H, "b01"],
        vec![O6],
    ]
}

const P: &str = "mu/2 + alpha*(1-mu)";
const Q: &str = "mu/2 + 2*alpha*(1-mu)";
const U: &str = "mu/2";

pub fn problem2_raw() -> Vec<Vec<&'static str>> {
    vec![
        vec!["1", P, Q, P, Q, U, P, P, "0"],
        vec![P, "a01", U, P, U, P, "c01_0", "c01_1"],
        vec![Q, P, "0", "c01_0", "c01_1", P, "0"],
        vec![P, "b01", U, "c0_01", P, "c1_01"],
        vec![Q, "c0_01", P, "c1_01", "0"],
        vec![U, "c0_01", "c01_0", "c01_01"],
        vec![P, "c01_10", "c01_1"],
        vec![P, "c1_01"],
        vec!["0"],
    ]
}

pub fn problem2_simple() -> Vec<Vec<&'static str>> {
    vec![
        vec!["1", P, Q, P, Q, U, P, P, "0"],
        vec![P, "0", U, P, U, P, U, "0"],
        vec![Q, P, "0", U, "0", P, "0"],
        vec![P, "0", U, U, P, "0"],
        vec![Q, U, P, "0", "0"],
        vec![U, U, U, "0"],
        vec![P, U, "0"],
        vec![P, "0"],
        vec!["0"],
    ]
}

pub fn toy_raw() -> Vec<Vec<&'static str>> {
    vec![
        vec!["1", "pA0", "pA1", "0", "0"],
        vec!["pA0", "a01", "p00", "p01"],
        vec!["pA1", "p10", "p11"],
        vec!["0", "b01"],
        vec!["0"],
    ]
}

pub fn toy_simple() -> Vec<Vec<&'static str>> {
    vec![
        vec!["1", "pA0", "pA1", "0", "0"],
        vec!["pA0", "a01", "0", "0"],
        vec!["pA1", "0", "0"],
        vec!["0", "0"],
        vec!["0"],
    ]
}

pub fn rows<'a>(v: &'a [Vec<&'static str>]) -> Vec<&'a [&'static str]> {
    v.iter().map(Vec::as_slice).collect()
}

pub fn raw(t: Target) -> Vec<Vec<&'static str>> {
    match t {
        Target::Problem1 => problem1_raw(),
        Target::Problem2 => problem2_raw(),
        _ => toy_raw(),
    }
}

pub fn simple(t: Target) -> Vec<Vec<&'static str>> {
    match t {
        Target::Problem1 => problem1_simple(),
        Target::Problem2 => problem2_simple(),
        _ => toy_simple(),
    }
}

/// Implicit equalities `var = expr`.
pub fn constraints(t: Target) -> Vec<(&'static str, &'static str)> {
    match t {
        Target::Problem1 => vec![
            ("c1_01", "b01"),
            ("c01_01", "c0_01"),
            ("c01_10", "c0_01"),
            ("c01_0", "(mu + 2)/6"),
            ("c01_1", "a01 - (1-mu)/6"),
        ],
        Target::Problem2 => vec![
            ("a01", "0"),
            ("b01", "0"),
            ("c01_1", "0"),
            ("c1_01", "0"),
            ("c01_01", "0"),
            ("c01_0", "mu/2"),
            ("c0_01", "mu/2"),
            ("c01_10", "mu/2"),
        ],
        _ => vec![("p00", "0"), ("p01", "0"), ("p10", "0"), ("p11", "0"), ("b01", "0")],
    }
}
