use proptest::prelude::*;
use tubewha_core::fusion::{builtin, fibonacci, group_category};
use tubewha_core::tube::{bulk_string_counts, enumerate_basis};
use tubewha_core::{TubeAlgebra, C64};

#[test]
fn group_tube_algebras_have_cubic_dimension() {
    // Vec_{Z_n}: a and e are free, c = a+e, f is free and g = a+f
    for n in 1..=5 {
        let c = group_category(n, |_, _, _| C64::new(1.0, 0.0)).unwrap();
        assert_eq!(enumerate_basis(&c).len(), n * n * n);
        assert_eq!(bulk_string_counts(&c), vec![n * n; n]);
    }
}

#[test]
fn fibonacci_has_thirteen_tubes() {
    // bulk 1: 2 bottoms × 2 tops; bulk τ: 3 × 3
    let c = fibonacci().unwrap();
    assert_eq!(bulk_string_counts(&c), vec![4, 9]);
    assert_eq!(TubeAlgebra::new(&c).unwrap().dim(), 13);
}

#[test]
fn basis_elements_are_admissible_and_unique() {
    let c = fibonacci().unwrap();
    let b = enumerate_basis(&c);
    for t in &b {
        assert!(c.n(t.a, t.e, t.c) && c.n(t.a, t.f, t.g), "{t}");
    }
    let mut s = b.clone();
    s.dedup();
    assert_eq!(s.len(), b.len());
    let t = TubeAlgebra::new(&c).unwrap();
    for (i, x) in b.iter().enumerate() {
        assert_eq!(t.index_of(x), Some(i));
    }
}

#[test]
fn haar_closed_form_matches_solved_integral() {
    for name in ["trivial", "vec_z2", "vec_z3", "fibonacci"] {
        let t = TubeAlgebra::new(&builtin(name, None).unwrap()).unwrap();
        let lam = t.haar_closed_form();
        let solved = t.wha.solve_haar().unwrap();
        let diff = lam.iter().zip(&solved).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10, "{name}: {diff:e}");
    }
}

fn fib() -> TubeAlgebra {
    TubeAlgebra::new(&fibonacci().unwrap()).unwrap()
}

fn element(v: &[(f64, f64)]) -> Vec<C64> {
    v.iter().map(|&(re, im)| C64::new(re, im)).collect()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unit_is_two_sided(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 13)) {
        let t = fib();
        let x = element(&v);
        prop_assert!(max_diff(&t.wha.mul_dense(&t.wha.unit, &x), &x) < 1e-12);
        prop_assert!(max_diff(&t.wha.mul_dense(&x, &t.wha.unit), &x) < 1e-12);
    }

    #[test]
    fn counit_axiom(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 13)) {
        // (ε ⊗ id)Δ(x) = x = (id ⊗ ε)Δ(x), straight from the structure constants
        let t = fib();
        let x = element(&v);
        let mut left = vec![C64::new(0.0, 0.0); 13];
        let mut right = left.clone();
        for (i, j, k, c) in t.wha.comult.triples() {
            left[k] += x[i] * c * t.wha.counit[j];
            right[j] += x[i] * c * t.wha.counit[k];
        }
        prop_assert!(max_diff(&left, &x) < 1e-12);
        prop_assert!(max_diff(&right, &x) < 1e-12);
    }

    #[test]
    fn multiplication_is_associative(
        u in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 13),
        v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 13),
        w in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 13),
    ) {
        let t = fib();
        let (x, y, z) = (element(&u), element(&v), element(&w));
        let m = |a: &[C64], b: &[C64]| t.wha.mul_dense(a, b);
        prop_assert!(max_diff(&m(&m(&x, &y), &z), &m(&x, &m(&y, &z))) < 1e-11);
    }
}
