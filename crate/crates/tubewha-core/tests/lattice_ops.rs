use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tubewha_core::fusion::builtin;
use tubewha_core::lattice::{dual_cocommutativity, Boundary, CheckOptions, Checker, LadderLattice, LatticeModel, LocalMatrix, Model};
use tubewha_core::linalg::{norm, random_complex};
use tubewha_core::TubeAlgebra;

fn tube(name: &str) -> TubeAlgebra {
    TubeAlgebra::new(&builtin(name, None).unwrap()).unwrap()
}

#[test]
fn edge_counts() {
    for (model, bc, n, edges) in [
        (Model::Cluster, Boundary::Periodic, 3, 6),
        (Model::Cluster, Boundary::Open, 3, 7),
        (Model::Ladder, Boundary::Periodic, 3, 9),
        (Model::Ladder, Boundary::Open, 2, 7),
    ] {
        assert_eq!(LadderLattice::new(n, model, bc, 2).unwrap().n_edges(), edges, "{model:?} {bc:?}");
    }
    assert!(LadderLattice::new(0, Model::Cluster, Boundary::Open, 2).is_err());
}

#[test]
fn group_stabilizers_form_a_commuting_projector_family() {
    for name in ["vec_z2", "vec_z3"] {
        let t = tube(name);
        for bc in [Boundary::Periodic, Boundary::Open] {
            for model in [Model::Cluster, Model::Ladder] {
                if name == "vec_z3" && model == Model::Ladder {
                    continue;
                }
                let lat = LadderLattice::new(2, model, bc, t.dim()).unwrap();
                let m = LatticeModel::new(&t.wha, lat).unwrap();
                let r = Checker::new(&m, CheckOptions::default()).stabilizer_report().unwrap();
                let tag = format!("{name} {model:?} {bc:?}");
                assert!(r.max_projector() < 1e-10, "{tag}: {r:?}");
                assert!(r.max_commutator() < 1e-10, "{tag}: {r:?}");
                let g = r.ground.expect("fits the budget");
                assert_eq!(g.energy, Some(-(r.n_terms as f64)), "{tag}");
                assert!(r.start_link.iter().all(|s| s.1 < 1e-10), "{tag}");
            }
        }
    }
}

fn terms(m: &LatticeModel<'_>) -> Vec<LocalMatrix> {
    m.stabilizers().unwrap().iter().map(|o| m.local_matrix(o)).collect()
}

#[test]
fn character_strings_commute_with_the_periodic_hamiltonian() {
    let t = tube("vec_z2");
    for n in [2, 3] {
        let m = LatticeModel::new(&t.wha, LadderLattice::new(n, Model::Cluster, Boundary::Periodic, t.dim()).unwrap()).unwrap();
        let hs = terms(&m);
        let mut ch = Checker::new(&m, CheckOptions::default());
        for chi in t.wha.characters(1).unwrap().characters {
            let w = m.local_matrix(&m.symmetry_z(&chi));
            assert!(ch.hamiltonian_commutator(&w, &hs).unwrap() < 1e-10);
        }
    }
}

#[test]
fn non_cocommutative_strings_do_not() {
    let t = tube("vec_z2");
    let m = LatticeModel::new(&t.wha, LadderLattice::new(2, Model::Cluster, Boundary::Periodic, t.dim()).unwrap()).unwrap();
    let hs = terms(&m);
    let mut ch = Checker::new(&m, CheckOptions::default());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let psi = random_complex(&mut rng, t.dim());
    assert!(dual_cocommutativity(&m.dual, &psi) / norm(&psi) > 1e-2);
    let w = m.local_matrix(&m.symmetry_z(&psi));
    assert!(ch.hamiltonian_commutator(&w, &hs).unwrap() / norm(&psi) > 1e-3);
}

#[test]
fn string_operators_compose_like_the_dual_algebra() {
    let t = tube("vec_z3");
    let m = LatticeModel::new(&t.wha, LadderLattice::new(2, Model::Cluster, Boundary::Periodic, t.dim()).unwrap()).unwrap();
    let mut ch = Checker::new(&m, CheckOptions::default());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (psi, phi) = (random_complex(&mut rng, t.dim()), random_complex(&mut rng, t.dim()));
    let w = |f: &[_]| m.local_matrix(&m.symmetry_z(f));
    let r = ch.product_residual(&w(&psi), &w(&phi), &w(&m.dual.mul_dense(&psi, &phi))).unwrap();
    assert!(r / (norm(&psi) * norm(&phi)) < 1e-10, "{r:e}");
}

#[test]
fn oversized_ground_state_is_a_budget_error() {
    let t = tube("vec_z2");
    let m = LatticeModel::new(&t.wha, LadderLattice::new(3, Model::Cluster, Boundary::Open, t.dim()).unwrap()).unwrap();
    let hs = terms(&m);
    let opts = CheckOptions { max_state_dim: 100, max_sparse_nnz: 4, ..CheckOptions::default() };
    let e = Checker::new(&m, opts).ground_state(&hs).unwrap_err();
    assert!(matches!(e, tubewha_core::lattice::LatticeError::Budget { .. }), "{e}");
}
