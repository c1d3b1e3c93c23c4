use tubewha_core::fusion::builtin;
use tubewha_core::lattice::{Boundary, LadderLattice, LatticeModel, Model};
use tubewha_core::mps::{apply_symmetry_mpo, build_state, local_identities, local_tensors_from, verify_stabilizers, MpsOptions};
use tubewha_core::TubeAlgebra;

fn tube(name: &str) -> TubeAlgebra {
    let mut t = TubeAlgebra::new(&builtin(name, None).unwrap()).unwrap();
    t.compute_dual_haar().unwrap();
    t
}

#[test]
fn group_states_are_stabilized() {
    for name in ["vec_z2", "vec_z3"] {
        let t = tube(name);
        for (n, bc) in [(2, Boundary::Periodic), (3, Boundary::Periodic), (2, Boundary::Open)] {
            let m = LatticeModel::new(&t.wha, LadderLattice::new(n, Model::Cluster, bc, t.dim()).unwrap()).unwrap();
            let lt = local_tensors_from(&t.wha, &m.dual, &m.lambda, &m.big_lambda);
            let opts = MpsOptions::default();
            let st = build_state(&m, &lt, &opts).unwrap();
            let tag = format!("{name} n={n} {bc:?}");
            assert!(st.raw_norm > 1e-6, "{tag}");
            assert!(st.plan_discrepancy(opts.max_intermediate).unwrap() < 1e-10, "{tag}");
            let r = verify_stabilizers(&m, &st).unwrap();
            assert!(r.max_residual() < 1e-10, "{tag}: {r:?}");
            assert!(1.0 - r.projected_fidelity < 1e-9, "{tag}");
        }
    }
}

#[test]
fn symmetry_mpo_matches_the_operator_and_fixes_the_state() {
    let t = tube("vec_z3");
    let m = LatticeModel::new(&t.wha, LadderLattice::new(2, Model::Cluster, Boundary::Periodic, t.dim()).unwrap()).unwrap();
    let lt = local_tensors_from(&t.wha, &m.dual, &m.lambda, &m.big_lambda);
    let st = build_state(&m, &lt, &MpsOptions::default()).unwrap();
    for b in 0..3 {
        let a = apply_symmetry_mpo(&m, &st, b, 3, 1, 1_000_000).unwrap();
        assert!(a.operator_agreement < 1e-9, "block {b}: {a:?}");
        assert!(a.variance < 1e-9, "block {b}: {a:?}");
    }
}

#[test]
fn ladder_model_is_rejected() {
    let t = tube("vec_z2");
    let m = LatticeModel::new(&t.wha, LadderLattice::new(2, Model::Ladder, Boundary::Periodic, t.dim()).unwrap()).unwrap();
    let lt = local_tensors_from(&t.wha, &m.dual, &m.lambda, &m.big_lambda);
    assert!(build_state(&m, &lt, &MpsOptions::default()).is_err());
}

#[test]
fn local_identities_of_group_algebras() {
    for name in ["trivial", "vec_z2", "vec_z3"] {
        let t = tube(name);
        let dual = t.wha.dualize().unwrap();
        let li = local_identities(&t.wha, &dual, &t.haar_closed_form(), t.wha.haar_dual.as_ref().unwrap());
        for (k, r) in li.as_list() {
            assert!(r < 1e-10, "{name} {k}: {r:e}");
        }
    }
}
