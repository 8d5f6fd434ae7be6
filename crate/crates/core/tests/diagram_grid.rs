use std::sync::Arc;

use psdiag::diagrams::{compare_mod, verify_deformation_isomorphism, Diagram, DiagramParams, IntegralDiagram};
use psdiag::error::Error;
use psdiag::local_field::{FieldContext, FieldElement, PolySpec};
use psdiag::smooth_reps::SmoothCharacter;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field_for(k: u32) -> Arc<FieldContext> {
    if k % 2 == 1 {
        FieldContext::new(3, PolySpec::Trivial, 24).unwrap()
    } else {
        FieldContext::new(3, PolySpec::Monic(vec![-3, 0, 1]), 40).unwrap()
    }
}

/// λ1 = λ^{-1}, λ2 = λ p^{2-k} with λ = sign · p^{(k-1)/2}.
fn preset(ctx: &Arc<FieldContext>, k: u32, sign: i64, t1: &SmoothCharacter, t2: &SmoothCharacter, c: u32) -> DiagramParams {
    let e = ctx.e() as i64;
    let lam = FieldElement::pi_pow(ctx, e * (k as i64 - 1) / 2).mul_int(sign);
    DiagramParams {
        lambda1: lam.inv().unwrap(),
        lambda2: lam.mul(&FieldElement::pi_pow(ctx, e * (2 - k as i64))),
        theta1: t1.clone(),
        theta2: t2.clone(),
        c,
        k: Some(k),
    }
}

fn deepest_congruence(s: &IntegralDiagram, x: &FieldElement, limit: u32) -> u32 {
    let sx = s.deform(x).unwrap();
    (0..=limit).take_while(|&b| compare_mod(&sx, s, b).unwrap()).last().unwrap()
}

#[test]
fn unramified_grid_deformations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for c in 1..=2u32 {
        for k in 2..=5u32 {
            let ctx = field_for(k);
            let one = FieldElement::one(&ctx);
            let triv = SmoothCharacter::unramified(one.clone()).unwrap();
            let d = Diagram::build(preset(&ctx, k, 1, &triv, &triv, c)).unwrap();
            assert!(d.check_axioms(10, &mut rng).all_pass());
            let id = IntegralDiagram::construct(&d).unwrap();
            let adapted = id.adapted().unwrap();
            let a = id.deformation_bound().unwrap();
            assert_eq!(adapted.deformation_bound().unwrap(), 1);
            for v in [a, a + 1] {
                let x = one.add(&FieldElement::from_int(&ctx, 3i64.pow(v)));
                let vx = x.sub(&one).val_pi().unwrap() as u32;
                assert!(verify_deformation_isomorphism(&d, &x).unwrap().is_ok());
                // adapted lattice: congruent exactly to depth v(x - 1)
                assert_eq!(deepest_congruence(&adapted, &x, vx + 2), vx, "c={c} k={k}");
                // intersection lattice: at least to depth v(x - 1) - a
                assert!(deepest_congruence(&id, &x, vx + 2) + a >= vx, "c={c} k={k}");
            }
        }
    }
}

#[test]
fn ramified_weight_five_level_two_has_no_bounded_structure() {
    let ctx = field_for(5);
    let one = FieldElement::one(&ctx);
    let triv = SmoothCharacter::unramified(one.clone()).unwrap();
    let tame = SmoothCharacter::tame(one, 1).unwrap();
    let d = Diagram::build(preset(&ctx, 5, 1, &tame, &triv, 2)).unwrap();
    assert!(matches!(IntegralDiagram::construct(&d), Err(Error::Limit(_))));
    let d = Diagram::build(preset(&ctx, 5, 1, &tame, &triv, 1)).unwrap();
    assert!(IntegralDiagram::construct(&d).is_ok());
}
