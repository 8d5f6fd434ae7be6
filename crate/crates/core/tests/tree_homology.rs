use std::sync::Arc;
use std::time::Instant;

use psdiag::diagrams::{Diagram, DiagramParams, IntegralDiagram};
use psdiag::linalg::ExactMatrix;
use psdiag::local_field::{FieldContext, FieldElement, PolySpec};
use psdiag::smooth_reps::SmoothCharacter;
use psdiag::tree::{homology_report, reduction_compat, reduction_invariants_agree, Boundary, QMat, TreeBall};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q3() -> Arc<FieldContext> {
    FieldContext::new(3, PolySpec::Trivial, 20).unwrap()
}

fn diagram(ctx: &Arc<FieldContext>, l1: (i64, i64), l2: (i64, i64), k: Option<u32>) -> Diagram {
    let triv = SmoothCharacter::unramified(FieldElement::one(ctx)).unwrap();
    Diagram::build(DiagramParams {
        lambda1: FieldElement::from_ratio(ctx, l1.0, l1.1).unwrap(),
        lambda2: FieldElement::from_ratio(ctx, l2.0, l2.1).unwrap(),
        theta1: triv.clone(),
        theta2: triv,
        c: 1,
        k,
    })
    .unwrap()
}

#[test]
fn smallest_ball_boundary() {
    let ctx = q3();
    let d = diagram(&ctx, (1, 1), (1, 1), None);
    let ball = TreeBall::enumerate(3, 1).unwrap();
    let b = Boundary::new(&d, &ball).unwrap();
    let m = b.matrix().unwrap();
    assert_eq!((m.rows(), m.cols()), (20, 8));
    assert_eq!(m.rank(), 8);
    let chain = b.edge_chain(&QMat::identity()).unwrap().unwrap();
    assert_eq!(chain.len(), 2);
    assert_ne!(chain[0].0, chain[1].0);
    assert!(chain[0].1.equals(d.r()));
    assert!(chain.iter().all(|(_, blk)| !blk.is_zero()));
    let empty = TreeBall::enumerate(3, 0).unwrap();
    let h = homology_report(&d, &empty, None).unwrap();
    assert_eq!((h.n_vertices, h.n_edges, h.rank, h.ker_dim), (1, 0, 0, 0));
}

#[test]
fn kernel_vanishes_and_sampling_passes() {
    let ctx = q3();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (l1, l2, k) in [((1, 1), (1, 1), None), ((2, 1), (5, 1), Some(3)), ((1, 3), (1, 1), Some(3))] {
        let d = diagram(&ctx, l1, l2, k);
        for r in 1..=2 {
            let ball = TreeBall::enumerate(3, r).unwrap();
            let h = homology_report(&d, &ball, None).unwrap();
            assert_eq!(h.ker_dim, 0);
            assert_eq!(h.rank + h.ker_dim, h.n_edges * d.dim1());
            assert_eq!(Boundary::new(&d, &ball).unwrap().matrix().unwrap().rank(), h.rank);
            let rep = Boundary::new(&d, &ball).unwrap().check_well_defined(40, &mut rng).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert!(rep.translation_samples > 0);
        }
    }
}

#[test]
fn radius_three() {
    let ctx = q3();
    let d = diagram(&ctx, (1, 1), (1, 1), None);
    let t = Instant::now();
    let ball = TreeBall::enumerate(3, 3).unwrap();
    let h = homology_report(&d, &ball, None).unwrap();
    assert_eq!((h.n_vertices, h.n_edges, h.ker_dim), (53, 52, 0));
    eprintln!("radius 3: {:?}", t.elapsed());
}

#[test]
fn wrong_sign_is_detected() {
    let ctx = q3();
    let d = diagram(&ctx, (2, 1), (5, 1), None);
    let ball = TreeBall::enumerate(3, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rep = Boundary::with_far_sign(&d, &ball, 1).unwrap().check_well_defined(20, &mut rng).unwrap();
    assert!(rep.cocycle_failures > 0);
}

#[test]
fn zero_restriction_has_full_kernel() {
    let ctx = q3();
    let d = diagram(&ctx, (1, 1), (1, 1), None);
    let zero = ExactMatrix::zeros(&ctx, d.dim0(), d.dim1());
    let d = d.with_r(zero);
    let ball = TreeBall::enumerate(3, 2).unwrap();
    let h = homology_report(&d, &ball, None).unwrap();
    assert_eq!(h.rank, 0);
    assert_eq!(Boundary::new(&d, &ball).unwrap().matrix().unwrap().rank(), 0);
    assert_eq!(h.ker_dim, h.n_edges * d.dim1());
}

#[test]
fn peeled_rank_matches_dense_rank_for_degenerate_restriction() {
    let ctx = q3();
    let d = diagram(&ctx, (2, 1), (5, 1), Some(3));
    let mut proj = ExactMatrix::identity(&ctx, d.dim1());
    proj[(0, 0)] = FieldElement::zero(&ctx);
    let r = d.r().mul(&proj);
    let d = d.with_r(r);
    let ball = TreeBall::enumerate(3, 2).unwrap();
    let b = Boundary::new(&d, &ball).unwrap();
    let h = homology_report(&d, &ball, None).unwrap();
    assert_eq!(b.matrix().unwrap().rank(), h.rank);
}

#[test]
fn reduction_compatibility() {
    let ctx = q3();
    for (l1, l2, k) in [((1, 1), (1, 1), None), ((1, 3), (1, 1), Some(3))] {
        let d = diagram(&ctx, l1, l2, k);
        let id = IntegralDiagram::construct(&d).unwrap();
        for r in 1..=2 {
            let ball = TreeBall::enumerate(3, r).unwrap();
            for n in 1..=3 {
                assert!(reduction_compat(&id, &ball, n).unwrap());
            }
            let h = homology_report(&d, &ball, Some(&id)).unwrap();
            assert!(h.coker_invariants.is_some());
        }
    }
    // a single perturbed entry after reduction is detected
    let a = ExactMatrix::from_ints(&ctx, &[&[1, 0, 0], &[0, 3, 0], &[0, 0, 9]]);
    let mut bad = a.truncate(3);
    bad[(2, 2)] = FieldElement::from_int(&ctx, 12);
    assert!(reduction_invariants_agree(&a, &a.truncate(3), 3).unwrap());
    assert!(!reduction_invariants_agree(&a, &bad, 3).unwrap());
}
