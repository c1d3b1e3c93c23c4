use tubewha_core::fusion::builtin;
use tubewha_core::lattice::dual_cocommutativity;
use tubewha_core::sparse::Sparse3;
use tubewha_core::weak_hopf::{SamplePolicy, WeakHopfAlgebra};
use tubewha_core::{TubeAlgebra, C64};

const SMALL: [&str; 4] = ["trivial", "vec_z2", "vec_z3", "fibonacci"];

fn tube(name: &str) -> TubeAlgebra {
    TubeAlgebra::new(&builtin(name, None).unwrap()).unwrap()
}

#[test]
fn axioms_hold_exhaustively() {
    for name in SMALL {
        let r = tube(name).wha.verify_axioms(1e-9, SamplePolicy::Exhaustive);
        assert!(r.pass, "{name}\n{r}");
    }
}

#[test]
fn sampled_policy_agrees_with_exhaustive() {
    let t = tube("fibonacci");
    let r = t.wha.verify_axioms(1e-9, SamplePolicy::Sampled { samples: 200, seed: 3 });
    assert!(r.pass, "{r}");
}

#[test]
fn corrupted_product_names_associativity() {
    let t = tube("vec_z2");
    let mut triples: Vec<_> = t.wha.mult.triples().collect();
    triples[3].3 += C64::new(1e-2, 0.0);
    let bad = WeakHopfAlgebra::new(
        t.wha.dim,
        Sparse3::from_triples(t.wha.dim, triples),
        t.wha.comult.clone(),
        t.wha.counit.clone(),
        t.wha.unit.clone(),
        t.wha.antipode.clone(),
    )
    .unwrap();
    let r = bad.verify_axioms(1e-9, SamplePolicy::Exhaustive);
    assert!(!r.pass);
    assert!(r.failed().contains(&"associativity"), "{r}");
}

#[test]
fn haar_integral_is_a_two_sided_idempotent_integral() {
    for name in SMALL {
        let t = tube(name);
        let r = t.wha.haar_residuals(&t.haar_closed_form());
        assert!(r.left_integral < 1e-10 && r.right_integral < 1e-10, "{name}: {r:?}");
        assert!(r.idempotent < 1e-10, "{name}: {r:?}");
    }
}

#[test]
fn group_haar_integrals_are_cocommutative() {
    for name in ["trivial", "vec_z2", "vec_z3"] {
        let t = tube(name);
        assert!(t.wha.haar_residuals(&t.haar_closed_form()).cocommutative < 1e-10, "{name}");
    }
}

#[test]
fn dual_of_dual_is_the_algebra() {
    let t = tube("fibonacci");
    let dd = t.wha.dualize().unwrap().dualize().unwrap();
    assert!(dd.mult.max_abs_diff(&t.wha.mult) < 1e-14);
    assert!(dd.comult.max_abs_diff(&t.wha.comult) < 1e-14);
}

#[test]
fn dual_haar_is_idempotent() {
    for name in SMALL {
        let mut t = tube(name);
        let big = t.compute_dual_haar().unwrap().to_vec();
        let dual = t.wha.dualize().unwrap();
        let r = dual.haar_residuals(&big);
        assert!(r.idempotent < 1e-10, "{name}: {r:?}");
    }
}

#[test]
fn wedderburn_blocks() {
    // one block per simple object, total dimension Σ n²
    for (name, want) in [("trivial", vec![1]), ("vec_z2", vec![2, 2]), ("vec_z3", vec![3, 3, 3]), ("fibonacci", vec![2, 3])] {
        let t = tube(name);
        let mut dims = t.wha.wedderburn_blocks(5).unwrap().dims;
        dims.sort();
        assert_eq!(dims, want, "{name}");
        assert_eq!(dims.iter().map(|n| n * n).sum::<usize>(), t.dim());
    }
}

#[test]
fn blocks_do_not_depend_on_the_seed() {
    let t = tube("fibonacci");
    let mut a = t.wha.wedderburn_blocks(1).unwrap().dims;
    let mut b = t.wha.wedderburn_blocks(99).unwrap().dims;
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn characters_realise_the_fusion_ring() {
    // Z3: the characters multiply like the group
    let t = tube("vec_z3");
    let ct = t.wha.characters(2).unwrap();
    assert!(ct.rounding_residual < 1e-8);
    let m = &ct.fusion_mults;
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(m[i][j].iter().sum::<i64>(), 1);
        }
    }
    // fibonacci: the non-unit character squares to 1 + itself
    let t = tube("fibonacci");
    let ct = t.wha.characters(2).unwrap();
    let unit = (0..2).find(|&i| (0..2).all(|j| m_is_delta(&ct.fusion_mults[i][j], j))).unwrap();
    let tau = 1 - unit;
    let mut want = vec![0; 2];
    want[unit] = 1;
    want[tau] = 1;
    assert_eq!(ct.fusion_mults[tau][tau], want);
}

fn m_is_delta(row: &[i64], j: usize) -> bool {
    row.iter().enumerate().all(|(k, &v)| v == i64::from(k == j))
}

#[test]
fn characters_are_cocommutative_functionals() {
    for name in SMALL {
        let t = tube(name);
        let dual = t.wha.dualize().unwrap();
        for chi in t.wha.characters(4).unwrap().characters {
            let r = dual_cocommutativity(&dual, &chi);
            assert!(r < 1e-9, "{name}: {r:e}");
        }
    }
}
