use proptest::prelude::*;
use strictfeas::certify::problem1_optimal_point;
use strictfeas::exactnum::{psd_check_exact, QuadExt, Rational};
use strictfeas::facial::{
    apply_constraints, derive_implicit_constraints, find_reducing_certificate, Diagnosis, FacialOptions,
    ImplicitConstraintSet,
};
use strictfeas::reproduce::{expected_null_vectors, raw_problem, simplified_problem, Target};
use strictfeas::sdp::{Assignment, SdpProblem};

const TARGETS: [Target; 3] = [Target::Problem1, Target::Problem2, Target::ChshToy];

fn constraints(t: Target) -> ImplicitConstraintSet {
    derive_implicit_constraints(&raw_problem(t), &expected_null_vectors(t)).unwrap()
}

/// Extends an assignment of the remaining variables by the eliminated ones.
fn lift(cons: &ImplicitConstraintSet, point: &Assignment<QuadExt>) -> Assignment<QuadExt> {
    let mut full = point.clone();
    for s in &cons.eliminated {
        let v = s.expr.eval(point).expect("expression uses remaining variables only");
        full.insert(s.var.clone(), v);
    }
    full
}

fn objective_at(prob: &SdpProblem<QuadExt>, point: &Assignment<QuadExt>) -> QuadExt {
    let y: Vec<QuadExt> = prob.var_names().iter().map(|n| point[*n].clone()).collect();
    prob.objective_value(&y)
}

fn scalar() -> impl Strategy<Value = QuadExt> {
    (-30i64..=30, 1i64..=12, -2i64..=2).prop_map(|(p, q, s)| QuadExt::new(Rational::new(p, q), Rational::new(s, q)))
}

fn target_and_point() -> impl Strategy<Value = (Target, Assignment<QuadExt>)> {
    prop::sample::select(TARGETS.to_vec()).prop_flat_map(|t| {
        let names: Vec<String> = simplified_problem(t).var_names().iter().map(|s| s.to_string()).collect();
        let k = names.len();
        (Just(t), proptest::collection::vec(scalar(), k)).prop_map(move |(t, vals)| {
            (t, names.iter().cloned().zip(vals).collect())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn substitution_is_exact((t, point) in target_and_point()) {
        let cons = constraints(t);
        let reduced = apply_constraints(&raw_problem(t), &cons).unwrap();
        let full = lift(&cons, &point);
        prop_assert_eq!(reduced.pencil.eval(&point).unwrap(), raw_problem(t).pencil.eval(&full).unwrap());
        prop_assert_eq!(objective_at(&reduced, &point), objective_at(&raw_problem(t), &full));
    }

    #[test]
    fn null_vectors_annihilate_the_face((t, point) in target_and_point()) {
        let cons = constraints(t);
        let m = raw_problem(t).pencil.eval(&lift(&cons, &point)).unwrap();
        for v in expected_null_vectors(t) {
            prop_assert!(m.mul_vec(&v).iter().all(QuadExt::is_zero));
        }
    }
}

#[test]
fn equations_are_consistent_and_triangular() {
    for t in TARGETS {
        let cons = constraints(t);
        let mut seen: Vec<&str> = Vec::new();
        for s in &cons.eliminated {
            assert!(!seen.contains(&s.var.as_str()), "{t}: {} eliminated twice", s.var);
            assert!(
                cons.eliminated.iter().all(|o| s.expr.coef(&o.var).is_zero()),
                "{t}: {} depends on an eliminated variable",
                s.var
            );
            seen.push(&s.var);
        }
    }
}

#[test]
fn feasible_points_lie_on_the_face() {
    let t = Target::Problem1;
    let cons = constraints(t);
    let point = problem1_optimal_point();
    let full = lift(&cons, &point);
    let m = raw_problem(t).pencil.eval(&full).unwrap();
    assert!(psd_check_exact(&m).unwrap().is_psd());
    for v in expected_null_vectors(t) {
        assert!(m.mul_vec(&v).iter().all(QuadExt::is_zero));
    }
}

#[test]
fn simplified_problems_need_no_further_reduction() {
    for t in [Target::Problem1, Target::Problem2] {
        let prob = simplified_problem(t);
        match find_reducing_certificate(&prob, &FacialOptions::default()).unwrap() {
            Diagnosis::StrictlyFeasible(_) => {}
            Diagnosis::Reducible(cert) => {
                let vs = strictfeas::facial::certificate_null_vectors(&cert);
                let more = derive_implicit_constraints(&prob, &vs).unwrap();
                assert!(more.eliminated.is_empty(), "{t}: new eliminations {:?}", more.eliminated);
            }
        }
    }
}

#[test]
fn reduced_problems_keep_the_certified_values() {
    use strictfeas::reproduce::certified_value;
    use strictfeas::solver::{solve_sdp, SolverOptions};
    for t in TARGETS {
        let res = solve_sdp(&simplified_problem(t).to_f64(), &SolverOptions::default()).unwrap();
        assert!(res.is_optimal(), "{t}: {}", res.status);
        assert!((res.objective_dual - certified_value(t).to_f64()).abs() <= 1e-6, "{t}");
    }
}
