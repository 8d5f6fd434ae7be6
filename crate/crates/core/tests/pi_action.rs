//! The `Π`-matrix on `D_1` against a direct evaluation of `(Π f)(g) = f(gΠ)`
//! on the principal series, using the Iwasawa decomposition of `gΠ`.

use psdiag::diagrams::{Diagram, DiagramParams};
use psdiag::gl2::{CosetLabel, FiniteMatrix};
use psdiag::linalg::ExactMatrix;
use psdiag::local_field::{FieldContext, FieldElement, PolySpec};
use psdiag::smooth_reps::SmoothCharacter;

#[test]
fn pi_matches_iwasawa_evaluation() {
    let ctx = FieldContext::new(3, PolySpec::Trivial, 24).unwrap();
    let p = 3i64;
    let one = FieldElement::one(&ctx);
    let triv = SmoothCharacter::unramified(one.clone()).unwrap();
    let tame = SmoothCharacter::tame(one.clone(), 1).unwrap();
    let l1 = FieldElement::from_ratio(&ctx, 1, 9).unwrap();
    let l2 = FieldElement::from_int(&ctx, 5);
    for (t1, t2) in [(&triv, &triv), (&tame, &triv), (&triv, &tame), (&tame, &tame)] {
        for c in 1..=2u32 {
            let m = p.pow(c);
            let inv = |u: i64| (1..m).find(|&v| (u * v).rem_euclid(m) == 1).unwrap();
            let params = DiagramParams {
                lambda1: l1.clone(),
                lambda2: l2.clone(),
                theta1: t1.clone(),
                theta2: t2.clone(),
                c,
                k: Some(2),
            };
            let d = Diagram::build(params).unwrap();
            let ind = d.induced();
            // χ1(p^v1 u1) χ2(p^v2 u2)
            let chi = |v1: i64, u1: i64, v2: i64, u2: i64| {
                l1.pow(v1).unwrap().mul(&t1.eval_unit(u1).unwrap()).mul(&l2.pow(v2).unwrap()).mul(&t2.eval_unit(u2).unwrap())
            };
            let mut cols = Vec::new();
            for j in 0..d.d1_basis().cols() {
                let f = d.d1_basis().column(j);
                let img: Vec<FieldElement> = ind
                    .labels()
                    .iter()
                    .map(|l| {
                        // g Π = b k' with b upper triangular and k' ∈ K
                        let (scale, kp) = match *l {
                            CosetLabel::Affine(g) if g as i64 % p != 0 => {
                                let gi = inv(g as i64);
                                (chi(1, -gi, 0, g as i64), [1, 0, p * gi, 1])
                            }
                            CosetLabel::Affine(g) => (chi(0, 1, 1, 1), [0, 1, 1, g as i64 / p]),
                            CosetLabel::Infinity(g) => (chi(1, 1, 0, 1), [1, 0, p * p * g as i64, 1]),
                        };
                        scale.mul(&ind.eval(&f, &FiniteMatrix::new(3, c, kp)).unwrap())
                    })
                    .collect();
                cols.push(img);
            }
            let expected = ExactMatrix::from_columns(&ctx, ind.dim(), &cols);
            assert!(d.d1_basis().mul(d.pi_matrix()).equals(&expected), "c={c}");
        }
    }
}
