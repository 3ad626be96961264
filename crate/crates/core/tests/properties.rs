mod common;

use common::{d5, index_sets};
use nhvol::extalg::{KForm, VectorField};
use nhvol::symexpr::{parse, zero_test, Domain, Expr, SampleOpts, Symbols};
use proptest::prelude::*;

const N: usize = 3;

fn dom() -> Domain {
    Domain::boxed(vec![(-1.0, 1.0); N])
}

fn vanishes(form: &KForm) -> bool {
    let r = form.zero_test(&dom(), SampleOpts::default()).unwrap();
    r.is_zero
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..N).prop_map(Expr::var),
        (-3i32..=3).prop_map(|k| Expr::constant(k as f64 * 0.5)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(&Expr::constant(1.5).add(&b.square()))),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.sin().exp()),
            (inner.clone(), 2i32..=3).prop_map(|(a, k)| a.powi(k)),
            inner.prop_map(|a| Expr::one().add(&a.square()).ln()),
        ]
    })
}

fn form(degree: usize) -> impl Strategy<Value = KForm> {
    let count = index_sets(N, degree).len();
    prop::collection::vec(expr(), count).prop_map(move |cs| {
        let terms = index_sets(N, degree).into_iter().zip(cs).collect();
        KForm::from_terms(N, degree, terms)
    })
}

fn field() -> impl Strategy<Value = VectorField> {
    prop::collection::vec(expr(), N).prop_map(VectorField::new)
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, N)
}

fn eval(e: &Expr, q: &[f64]) -> f64 {
    e.eval(q, &[]).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_parse_round_trip(e in expr(), q in point()) {
        let symbols = Symbols::new(&["x", "y", "z"], &[] as &[&str]);
        let text = e.display(&symbols).to_string();
        let back = parse(&text, &symbols).unwrap();
        prop_assert!(close(eval(&e, &q), eval(&back, &q), 1e-10), "{text}");
    }

    #[test]
    fn derivative_matches_finite_difference(e in expr(), q in point(), i in 0..N) {
        let exact = eval(&e.diff(i), &q);
        let fd = d5(&|y| eval(&e, y), &q, i, 1e-3);
        prop_assert!(close(exact, fd, 1e-7), "{exact} vs {fd}");
    }

    #[test]
    fn d_squared_vanishes(a in form(1), f in expr()) {
        prop_assert!(vanishes(&a.d().unwrap().d().unwrap()));
        prop_assert!(vanishes(&KForm::scalar(N, f).d().unwrap().d().unwrap()));
    }

    #[test]
    fn leibniz_rule(a in form(1), b in form(1)) {
        let lhs = a.wedge(&b).unwrap().d().unwrap();
        let rhs = a.d().unwrap().wedge(&b).unwrap().sub(&a.wedge(&b.d().unwrap()).unwrap());
        prop_assert!(vanishes(&lhs.sub(&rhs)));
    }

    #[test]
    fn lie_derivative_commutes_with_d(a in form(1), x in field()) {
        let lhs = a.d().unwrap().lie_derivative(&x).unwrap();
        let rhs = a.lie_derivative(&x).unwrap().d().unwrap();
        prop_assert!(vanishes(&lhs.sub(&rhs)));
    }

    #[test]
    fn double_contraction_vanishes(a in form(2), x in field()) {
        prop_assert!(vanishes(&a.contract(&x).unwrap().contract(&x).unwrap()));
    }

    #[test]
    fn pullback_composes(a in form(2), phi in prop::collection::vec(expr(), N), psi in prop::collection::vec(expr(), N)) {
        // q = phi(z), z = psi(w)
        let composed: Vec<Expr> = phi.iter().map(|p| p.substitute(&psi)).collect();
        let lhs = a.pullback(&composed, N).unwrap();
        let rhs = a.pullback(&phi, N).unwrap().pullback(&psi, N).unwrap();
        prop_assert!(vanishes(&lhs.sub(&rhs)));
        let d_first = a.d().unwrap().pullback(&phi, N).unwrap();
        let d_last = a.pullback(&phi, N).unwrap().d().unwrap();
        prop_assert!(vanishes(&d_first.sub(&d_last)));
    }

    #[test]
    fn zero_test_is_reproducible(e in expr(), seed in any::<u64>()) {
        let opts = SampleOpts { seed, ..SampleOpts::default() };
        let pythagoras = e.sin().square().add(&e.cos().square()).sub(&Expr::one());
        let a = zero_test(std::slice::from_ref(&pythagoras), &dom(), opts).unwrap();
        let b = zero_test(&[pythagoras], &dom(), opts).unwrap();
        prop_assert!(a.is_zero);
        prop_assert_eq!(a.max_residual, b.max_residual);
        let positive = e.square().add(&Expr::one());
        prop_assert!(!zero_test(&[positive], &dom(), opts).unwrap().is_zero);
    }
}
