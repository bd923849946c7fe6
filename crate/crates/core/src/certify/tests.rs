use super::*;
use crate::bell::{almost_quantum_pencil, chsh_toy_pencil, BehaviorLine};
use crate::facial::{apply_constraints, derive_implicit_constraints};

fn simplified(line: BehaviorLine, vectors: &[&[i64]]) -> SdpProblem<QuadExt> {
    let p = almost_quantum_pencil(&line);
    let vs: Vec<Vec<QuadExt>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| QuadExt::from(x)).collect())
        .collect();
    apply_constraints(&p, &derive_implicit_constraints(&p, &vs).unwrap()).unwrap()
}

fn problem1() -> SdpProblem<QuadExt> {
    simplified(
        BehaviorLine::l1(),
        &[&[1, 0, -1, 0, -1, 0, 0, 0, 1], &[0, 0, 0, 1, 0, 0, 0, -1, 0]],
    )
}

fn problem2() -> SdpProblem<QuadExt> {
    simplified(
        BehaviorLine::l2(),
        &[
            &[0, 0, 0, 0, 0, 0, 0, 0, 1],
            &[0, 0, 0, 1, 0, 0, 0, -1, 0],
            &[0, 1, 0, 0, 0, 0, -1, 0, 0],
        ],
    )
}

#[test]
fn problem1_matching_bounds() {
    let p = problem1();
    assert!(verify_primal_point(&p, &problem1_optimal_point()).unwrap().is_feasible());
    let v = verify_bound_certificate(&p, &problem1_x_star(), MU);
    let cert = v.certificate().expect("valid");
    assert_eq!(cert.certified_bound, QuadExt::zero());
    assert!(crate::exactnum::qsign(&cert.normalization) < 0);
}

#[test]
fn x_star_spectrum() {
    // Eigenvalues 15/2, 3/2 and seven zeros: trace 9 and trace of the square 58.5.
    let x = problem1_x_star();
    assert_eq!(x.trace(), QuadExt::from(9));
    assert_eq!(x.mul(&x).trace(), QuadExt::ratio(117, 2));
    assert_eq!(crate::exactnum::rank(&x), 2);
}

#[test]
fn invalid_certificates_list_violations() {
    let p = problem1();
    match verify_bound_certificate(&p, &Matrix::zeros(9, 9), MU) {
        BoundVerdict::Invalid { violations } => assert!(violations[0].contains("normalization")),
        v => panic!("{v:?}"),
    }
    let mut bumped = problem1_x_star();
    bumped.set_sym(0, 0, &bumped[(0, 0)] + &QuadExt::one());
    // ⟨F0, X⟩ grows by 1 while ⟨F_μ, X⟩ is unchanged: still valid, bound 1/⟨−F_μ,X⟩ > 0.
    match verify_bound_certificate(&p, &bumped, MU) {
        BoundVerdict::Valid(c) => assert!(crate::exactnum::qsign(&c.certified_bound) > 0),
        BoundVerdict::Invalid { violations } => assert!(!violations.is_empty()),
    }
    let mut bad = problem1_x_star();
    bad.set_sym(3, 3, -QuadExt::one());
    let BoundVerdict::Invalid { violations } = verify_bound_certificate(&p, &bad, MU) else {
        panic!("indefinite X accepted");
    };
    assert!(violations.iter().any(|v| v.contains("not positive semidefinite")));
    assert!(matches!(
        verify_bound_certificate(&p, &problem1_x_star(), "nope"),
        BoundVerdict::Invalid { .. }
    ));
    assert!(matches!(
        verify_bound_certificate(&p, &Matrix::zeros(3, 3), MU),
        BoundVerdict::Invalid { .. }
    ));
}

#[test]
fn problem2_bound() {
    let p = problem2();
    assert_eq!(p.var_names(), [MU]);
    let v = verify_mu2_bound(&p).unwrap();
    assert!(v.is_confirmed(), "{v:?}");
    let at = |mu: QuadExt| {
        let point = [(MU.to_string(), mu)].into_iter().collect();
        verify_primal_point(&p, &point).unwrap()
    };
    assert!(at(mu2_star()).is_feasible());
    assert!(matches!(
        at(&mu2_star() + &QuadExt::ratio(1, 100)),
        PrimalVerdict::Infeasible { .. }
    ));
    assert!(at(QuadExt::zero()).is_feasible());
}

#[test]
fn mu2_check_detects_a_loose_pencil() {
    let mut p = problem2();
    p.pencil.constant = Matrix::identity(9).scale(&QuadExt::from(2));
    assert!(!verify_mu2_bound(&p).unwrap().is_confirmed());
    assert!(matches!(verify_mu2_bound(&problem1()), Err(CertifyError::WrongShape(_))));
}

#[test]
fn eigenvalue_formula() {
    let p = problem2();
    let v = check_eigenvalue_formula(&p).unwrap();
    let FormulaVerdict::Confirmed { samples } = v else {
        panic!("{v:?}");
    };
    assert!(samples[0].formula_value > 0.0);
    assert!(samples[2].formula_value.abs() < 1e-12);
    assert!(samples[3].formula_value < 0.0);
    assert!(matches!(check_eigenvalue_formula(&problem1()), Err(CertifyError::WrongShape(_))));
}

#[test]
fn toy_bound() {
    let p = chsh_toy_pencil();
    let cons = derive_implicit_constraints(
        &p,
        &[
            vec![0, 0, 0, 1, 0].into_iter().map(QuadExt::from).collect(),
            vec![0, 0, 0, 0, 1].into_iter().map(QuadExt::from).collect(),
        ],
    )
    .unwrap();
    let q = apply_constraints(&p, &cons).unwrap();
    let v = verify_objective_bound(&q, &toy_bound_certificate());
    assert_eq!(v.certificate().unwrap().certified_bound, QuadExt::zero());
    // The raw problem has no dual solution of this kind.
    assert!(verify_objective_bound(&p, &toy_bound_certificate()).certificate().is_none());
}

#[test]
fn primal_point_needs_every_variable() {
    let p = problem1();
    let mut point = problem1_optimal_point();
    point.remove("a01");
    assert!(matches!(verify_primal_point(&p, &point), Err(CertifyError::Model(_))));
}

#[test]
fn reports_serialize() {
    let p = problem1();
    let r = VerdictReport::bound("mu1 <= 0", &verify_bound_certificate(&p, &problem1_x_star(), MU));
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["verdict"], "valid");
    assert_eq!(json["certified_bound"], "0");
    assert!(json.get("witness").is_none());
    assert!(r.passed());
}
