//! Principal-series diagrams `D = (D_1 → D_0)` at Iwahori level `c`,
//! optionally twisted by `W = Sym^{k-2} L^2`, with the `Π`-action on `D_1`,
//! axiom checks, deformations `Π⋆ = φ_x Π φ_x^{-1}`, integral structures and
//! congruences between them.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gl2::{enumerate_gl2, generators, FiniteMatrix, Mat2, Side, Subgroup};
use crate::lattice::{Lattice, Splitting};
use crate::linalg::{fixed_space, ExactMatrix};
use crate::local_field::{FieldContext, FieldElement};
use crate::smooth_reps::{InducedRep, SmoothCharacter, SymPower};

/// Input data of a principal-series diagram.
#[derive(Clone, Debug)]
pub struct DiagramParams {
    pub lambda1: FieldElement,
    pub lambda2: FieldElement,
    pub theta1: SmoothCharacter,
    pub theta2: SmoothCharacter,
    pub c: u32,
    /// Weight of the algebraic twist; `None` means no twist (`k = 2`).
    pub k: Option<u32>,
}

impl DiagramParams {
    pub fn weight(&self) -> u32 {
        self.k.unwrap_or(2)
    }
}

#[derive(Clone, Debug)]
pub struct Diagram {
    params: DiagramParams,
    induced: InducedRep,
    w: SymPower,
    /// Basis of `D_1 = D_0^{I_c}` in label coordinates, `V_1` columns first.
    d1_basis: ExactMatrix,
    d1_left: ExactMatrix,
    v1_dim: usize,
    r: ExactMatrix,
    pi: ExactMatrix,
    central: FieldElement,
    deformation: Option<FieldElement>,
}

/// Splits a basis of `D_1` into functions supported on `J_c I` and on `J_c s I`.
pub fn split_v1_vs(ind: &InducedRep, basis: &ExactMatrix) -> Result<(ExactMatrix, ExactMatrix)> {
    let ctx = ind.ctx();
    let p = ctx.p();
    let restrict = |side: Side| {
        ExactMatrix::from_fn(ctx, basis.rows(), basis.cols(), |i, j| {
            if ind.labels()[i].side(p) == side {
                basis[(i, j)].clone()
            } else {
                FieldElement::zero(ctx)
            }
        })
        .column_basis()
    };
    let (v1, vs) = (restrict(Side::One), restrict(Side::S));
    if v1.cols() + vs.cols() != basis.cols() {
        return Err(Error::AxiomFailure(format!(
            "invariants do not split by support: {} + {} != {}",
            v1.cols(),
            vs.cols(),
            basis.cols()
        )));
    }
    // each restriction must itself be invariant, i.e. lie in the span
    let both = v1.hstack(&vs);
    if basis.hstack(&both).rank() != basis.cols() {
        return Err(Error::AxiomFailure("a support component is not invariant".into()));
    }
    Ok((v1, vs))
}

/// Pass/fail per diagram axiom, with witnesses for failures.
#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomReport {
    pub pi_squared: bool,
    pub pi_conjugation: bool,
    pub r_injective: bool,
    pub r_equivariant: bool,
    pub samples: usize,
    pub witnesses: Vec<String>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.pi_squared && self.pi_conjugation && self.r_injective && self.r_equivariant
    }
}

fn mat2_pi_inv(ctx: &Arc<FieldContext>) -> Mat2 {
    let z = FieldElement::zero(ctx);
    let one = FieldElement::one(ctx);
    Mat2::new(z.clone(), FieldElement::from_ratio(ctx, 1, ctx.p() as i64).expect("p is nonzero"), one, z)
}

impl Diagram {
    pub fn build(params: DiagramParams) -> Result<Diagram> {
        let ctx = params.lambda1.ctx().clone();
        if params.lambda1.is_zero() || params.lambda2.is_zero() {
            return Err(Error::InvalidInput("λ1 and λ2 must be nonzero".into()));
        }
        let c = params.c;
        if ctx.precision() < c + 1 {
            return Err(Error::PrecisionExhausted(format!("precision {} below level c + 1", ctx.precision())));
        }
        let p = ctx.p();
        let induced = InducedRep::new(&params.theta1, &params.theta2, c)?;
        let w = SymPower::new(&ctx, params.weight())?;
        let ic: Vec<ExactMatrix> =
            generators(Subgroup::IM(c), p, c).iter().map(|g| induced.matrix(g)).collect::<Result<_>>()?;
        let fixed = fixed_space(&ctx, induced.dim(), &ic);
        let (v1, vs) = split_v1_vs(&induced, &fixed)?;
        let d1_basis = v1.hstack(&vs);
        let d1_left = d1_basis.left_inverse()?;
        let wd = w.dim();
        let r = d1_basis.kron(&ExactMatrix::identity(&ctx, wd));
        let central = params.lambda1.mul(&params.lambda2).mul(&w.central_scalar());
        let mut d = Diagram {
            induced,
            w,
            v1_dim: v1.cols(),
            d1_left,
            r,
            pi: ExactMatrix::zeros(&ctx, 0, 0),
            central,
            deformation: None,
            d1_basis,
            params,
        };
        let pi_d1 = d.pi_on_d1()?;
        d.pi = pi_d1.kron(&d.w.matrix(&Mat2::pi(&ctx)));
        // cheap consistency check; the sampled check is `check_axioms`
        let sq = d.pi.mul(&d.pi);
        if !sq.equals(&ExactMatrix::scalar(&ctx, d.dim1(), &d.central)) {
            return Err(Error::AxiomFailure("Π² is not the central scalar".into()));
        }
        Ok(d)
    }

    /// The matrix of `Π` on `D_1` (untwisted), from
    /// `[Π f_1](s g) = λ_1 f_1(Π^{-1} g Π)` and `[Π f_s](g) = λ_2 f_s(s Π g Π^{-1})`.
    fn pi_on_d1(&self) -> Result<ExactMatrix> {
        let ctx = self.ctx().clone();
        let ind = &self.induced;
        let (p, c) = (ctx.p(), self.params.c);
        let m = p.pow(c) as i64;
        let n1 = self.d1_basis.cols();
        let mut images = Vec::with_capacity(n1);
        for j in 0..n1 {
            let f = self.d1_basis.column(j);
            let part = |side: Side| -> Vec<FieldElement> {
                f.iter()
                    .zip(ind.labels())
                    .map(|(x, l)| if l.side(p) == side { x.clone() } else { FieldElement::zero(&ctx) })
                    .collect()
            };
            let (f1, fs) = (part(Side::One), part(Side::S));
            let mut image = Vec::with_capacity(ind.dim());
            for l in ind.labels() {
                let x = l.representative(p, c);
                let value = match l.side(p) {
                    Side::S => {
                        // x = [[1, t], [0, 1]] · s · g with g = [[c, d], [0, b - t d]] ∈ I
                        let (a, b, cc, d) = (x.a as i64, x.b as i64, x.c as i64, x.d as i64);
                        let ci = crate::local_field::inv_mod(cc as u64 % m as u64, m as u64)
                            .ok_or_else(|| Error::AxiomFailure("side s label without unit entry".into()))?
                            as i64;
                        let t = (a * ci).rem_euclid(m);
                        let e = (b - t * d).rem_euclid(m);
                        // Π^{-1} g Π = [[b - t d, 0], [p d, c]]
                        let h = FiniteMatrix::new(p, c, [e, 0, p as i64 * d, cc]);
                        self.params.lambda1.mul(&ind.eval(&f1, &h)?)
                    }
                    Side::One => {
                        // x = [[1, 0], [γ, 1]], s Π x Π^{-1} = [[0, 1], [1, γ/p]]
                        let gamma = x.c as i64;
                        let y = FiniteMatrix::new(p, c, [0, 1, 1, gamma / p as i64]);
                        self.params.lambda2.mul(&ind.eval(&fs, &y)?)
                    }
                };
                image.push(value);
            }
            images.push(image);
        }
        let img = ExactMatrix::from_columns(&ctx, ind.dim(), &images);
        let coords = self.d1_left.mul(&img);
        if !self.d1_basis.mul(&coords).equals(&img) {
            return Err(Error::AxiomFailure("Π does not preserve D_1".into()));
        }
        Ok(coords)
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        self.params.lambda1.ctx()
    }

    pub fn params(&self) -> &DiagramParams {
        &self.params
    }

    pub fn induced(&self) -> &InducedRep {
        &self.induced
    }

    pub fn sym_power(&self) -> &SymPower {
        &self.w
    }

    pub fn w_dim(&self) -> usize {
        self.w.dim()
    }

    pub fn dim0(&self) -> usize {
        self.induced.dim() * self.w.dim()
    }

    pub fn dim1(&self) -> usize {
        self.d1_basis.cols() * self.w.dim()
    }

    /// Dimension of `V_1 ⊗ W`; these come first in the `D_1` basis.
    pub fn v1_dim(&self) -> usize {
        self.v1_dim * self.w.dim()
    }

    /// Dimensions of `V_1` and `V_s` before twisting.
    pub fn split_dims(&self) -> (usize, usize) {
        (self.v1_dim, self.d1_basis.cols() - self.v1_dim)
    }

    pub fn d1_basis(&self) -> &ExactMatrix {
        &self.d1_basis
    }

    pub fn pi_matrix(&self) -> &ExactMatrix {
        &self.pi
    }

    pub fn r(&self) -> &ExactMatrix {
        &self.r
    }

    pub fn central_scalar(&self) -> &FieldElement {
        &self.central
    }

    pub fn deformation(&self) -> Option<&FieldElement> {
        self.deformation.as_ref()
    }

    /// Replaces the `Π`-matrix (used to build counterexamples).
    pub fn with_pi(mut self, pi: ExactMatrix) -> Diagram {
        self.pi = pi;
        self
    }

    /// Replaces the map `r` (used to build counterexamples).
    pub fn with_r(mut self, r: ExactMatrix) -> Diagram {
        self.r = r;
        self
    }

    /// Action of `g ∈ K` on `D_0 ⊗ W`.
    pub fn rho0(&self, g: &Mat2) -> Result<ExactMatrix> {
        let fin = g.to_finite(self.params.c)?;
        Ok(self.induced.matrix(&fin)?.kron(&self.w.matrix(g)))
    }

    /// Action of `g ∈ I` on `D_1 ⊗ W` (restriction from `D_0`).
    pub fn rho1(&self, g: &Mat2) -> Result<ExactMatrix> {
        let fin = g.to_finite(self.params.c)?;
        if !fin.is_in(Subgroup::Iwahori) {
            return Err(Error::InvalidInput(format!("{fin:?} is not in the Iwahori subgroup")));
        }
        let m = self.d1_left.mul(&self.induced.matrix(&fin)?).mul(&self.d1_basis);
        Ok(m.kron(&self.w.matrix(g)))
    }

    /// Integer lifts of generators of a subgroup, exact over `L`.
    pub fn group_generators(&self, s: Subgroup) -> Vec<Mat2> {
        let (p, c) = (self.ctx().p(), self.params.c);
        generators(s, p, c + 1).iter().map(|g| Mat2::lift(self.ctx(), g)).collect()
    }

    /// Elements of `I` used by the axiom check: all of `I mod p^{c+1}` at
    /// `p = 3, c = 1`, otherwise single generators plus random words of
    /// length at most 4.
    pub fn iwahori_samples<R: Rng>(&self, samples: usize, rng: &mut R) -> Vec<Mat2> {
        let ctx = self.ctx();
        let (p, c) = (ctx.p(), self.params.c);
        if p == 3 && c == 1 {
            return enumerate_gl2(p, c + 1)
                .into_iter()
                .filter(|g| g.is_in(Subgroup::Iwahori))
                .map(|g| Mat2::lift(ctx, &g))
                .collect();
        }
        let gens = self.group_generators(Subgroup::Iwahori);
        let mut out = gens.clone();
        for _ in 0..samples {
            let len = rng.gen_range(1..=4);
            let mut g = Mat2::identity(ctx);
            for _ in 0..len {
                g = g.mul(gens.choose(rng).expect("generators"));
            }
            out.push(g);
        }
        out
    }

    pub fn check_axioms<R: Rng>(&self, samples: usize, rng: &mut R) -> AxiomReport {
        let ctx = self.ctx().clone();
        let mut rep = AxiomReport::default();
        let n1 = self.dim1();
        let sq = self.pi.mul(&self.pi);
        rep.pi_squared = sq.equals(&ExactMatrix::scalar(&ctx, n1, &self.central));
        if !rep.pi_squared {
            rep.witnesses.push("Π² differs from the central scalar".into());
        }
        rep.r_injective = self.r.rows() == self.dim0() && self.r.cols() == n1 && self.r.rank() == n1;
        if !rep.r_injective {
            rep.witnesses.push(format!("rank r = {} < dim D_1 = {n1}", self.r.rank()));
        }
        let pi = Mat2::pi(&ctx);
        let pi_inv = mat2_pi_inv(&ctx);
        let elems = self.iwahori_samples(samples, rng);
        rep.samples = elems.len();
        rep.pi_conjugation = true;
        rep.r_equivariant = true;
        for g in &elems {
            let (Ok(r1), Ok(r0)) = (self.rho1(g), self.rho0(g)) else {
                rep.pi_conjugation = false;
                rep.witnesses.push(format!("cannot evaluate the action of {g:?}"));
                continue;
            };
            if rep.pi_conjugation {
                let conj = pi.mul(g).mul(&pi_inv);
                match self.rho1(&conj) {
                    Ok(rc) => {
                        if !self.pi.mul(&r1).equals(&rc.mul(&self.pi)) {
                            rep.pi_conjugation = false;
                            rep.witnesses.push(format!("Π·ρ(g) ≠ ρ(ΠgΠ⁻¹)·Π for g = {:?}", g.to_finite(self.params.c + 1)));
                        }
                    }
                    Err(e) => {
                        rep.pi_conjugation = false;
                        rep.witnesses.push(format!("ΠgΠ⁻¹ not evaluable: {e}"));
                    }
                }
            }
            if rep.r_equivariant && (self.r.rows() != r0.cols() || !self.r.mul(&r1).equals(&r0.mul(&self.r))) {
                rep.r_equivariant = false;
                rep.witnesses.push(format!("r is not equivariant for g = {:?}", g.to_finite(self.params.c + 1)));
            }
        }
        rep
    }

    /// The splitting `D_1 ⊗ W = (V_1 ⊗ W) ⊕ (V_s ⊗ W)` in `D_1` coordinates.
    pub fn splitting(&self) -> Result<Splitting> {
        let ctx = self.ctx();
        let n = self.dim1();
        let t = self.v1_dim();
        let id = ExactMatrix::identity(ctx, n);
        Splitting::new(&id.select_columns(&(0..t).collect::<Vec<_>>()), &id.select_columns(&(t..n).collect::<Vec<_>>()))
    }

    /// `Π⋆ = φ_x Π φ_x^{-1}` with `φ_x` scaling `V_1 ⊗ W` by `x`.
    pub fn deform(&self, x: &FieldElement) -> Result<Diagram> {
        let s = self.splitting()?;
        let phi = s.phi_x(x)?;
        let phi_inv = s.phi_x(&x.inv()?)?;
        let mut d = self.clone();
        d.pi = phi.mul(&self.pi).mul(&phi_inv);
        d.deformation = Some(match &self.deformation {
            Some(y) => y.mul(x),
            None => x.clone(),
        });
        Ok(d)
    }

    /// Machine-readable description with matrices as `(valuation, unit)` pairs.
    pub fn to_json(&self) -> Value {
        let ctx = self.ctx();
        json!({
            "p": ctx.p(),
            "field": ctx.describe(),
            "c": self.params.c,
            "k": self.params.weight(),
            "lambda1": element_json(&self.params.lambda1),
            "lambda2": element_json(&self.params.lambda2),
            "labels": self.induced.labels().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "dim_d0": self.dim0(),
            "dim_d1": self.dim1(),
            "dim_v1": self.split_dims().0,
            "dim_vs": self.split_dims().1,
            "d1_basis": matrix_json(&self.d1_basis),
            "pi": matrix_json(&self.pi),
            "central_scalar": element_json(&self.central),
        })
    }
}

pub fn element_json(x: &FieldElement) -> Value {
    match x.val_pi() {
        None => json!({ "val": null, "unit": [], "known_mod": x.abs_precision().min(i64::from(i32::MAX)) }),
        Some(v) => json!({ "val": v, "unit": x.unit_digits() }),
    }
}

pub fn matrix_json(m: &ExactMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array((0..m.cols()).map(|j| element_json(&m[(i, j)])).collect())).collect())
}

/// A pair of maps `D → D'` tested for being a morphism of diagrams.
pub struct DiagramMorphism {
    pub alpha0: ExactMatrix,
    pub alpha1: ExactMatrix,
}

impl DiagramMorphism {
    pub fn identity(d: &Diagram) -> Self {
        DiagramMorphism {
            alpha0: ExactMatrix::identity(d.ctx(), d.dim0()),
            alpha1: ExactMatrix::identity(d.ctx(), d.dim1()),
        }
    }

    /// Checks the commuting square and equivariance on generators of `K`,
    /// `I`, and for `Π`. Returns the first failure.
    pub fn check(&self, from: &Diagram, to: &Diagram) -> std::result::Result<(), String> {
        if !self.alpha0.mul(from.r()).equals(&to.r().mul(&self.alpha1)) {
            return Err("α0 ∘ r ≠ r' ∘ α1".into());
        }
        if !self.alpha1.mul(from.pi_matrix()).equals(&to.pi_matrix().mul(&self.alpha1)) {
            return Err("α1 does not intertwine the Π-actions".into());
        }
        if !from.central_scalar().equals(to.central_scalar()) {
            return Err("central scalars differ".into());
        }
        let err = |e: Error| e.to_string();
        for g in from.group_generators(Subgroup::K) {
            if !self.alpha0.mul(&from.rho0(&g).map_err(err)?).equals(&to.rho0(&g).map_err(err)?.mul(&self.alpha0)) {
                return Err(format!("α0 not K-equivariant at {:?}", g.to_finite(1)));
            }
        }
        for g in from.group_generators(Subgroup::Iwahori) {
            if !self.alpha1.mul(&from.rho1(&g).map_err(err)?).equals(&to.rho1(&g).map_err(err)?.mul(&self.alpha1)) {
                return Err(format!("α1 not I-equivariant at {:?}", g.to_finite(1)));
            }
        }
        Ok(())
    }
}

/// Checks `D(x) ≅ D(x^{-1} λ_1, x λ_2, θ_1, θ_2)` through the identity maps.
pub fn verify_deformation_isomorphism(d: &Diagram, x: &FieldElement) -> Result<std::result::Result<(), String>> {
    let dx = d.deform(x)?;
    let mut params = d.params().clone();
    params.lambda1 = x.inv()?.mul(&params.lambda1);
    params.lambda2 = x.mul(&params.lambda2);
    let target = Diagram::build(params)?;
    Ok(DiagramMorphism::identity(d).check(&dx, &target))
}

/// A diagram with lattices `L_0 ⊂ D_0 ⊗ W` and `L_1 ⊂ D_1 ⊗ W` (in the
/// respective coordinates) stable under the group actions, with
/// `r(L_1) ⊆ L_0`.
#[derive(Clone, Debug)]
pub struct IntegralDiagram {
    diagram: Diagram,
    l0: Lattice,
    l1: Lattice,
}

const MAX_STABILIZATION_ROUNDS: usize = 16;

fn is_stable(l: &Lattice, m: &ExactMatrix) -> bool {
    l.contains_vectors(&m.mul(l.basis()))
}

impl IntegralDiagram {
    /// Wraps given lattices after checking every stability condition.
    pub fn new(diagram: Diagram, l0: Lattice, l1: Lattice) -> Result<IntegralDiagram> {
        let fail = |what: &str| Err(Error::AxiomFailure(format!("integral structure: {what}")));
        if !diagram.central_scalar().is_unit() {
            return fail("central scalar is not a unit");
        }
        if !l0.is_full_rank() || l0.ambient_dim() != diagram.dim0() || !l1.is_full_rank() || l1.ambient_dim() != diagram.dim1() {
            return fail("lattices are not full rank in the right spaces");
        }
        if !l0.contains_vectors(&diagram.r().mul(l1.basis())) {
            return fail("r(L1) is not contained in L0");
        }
        if !is_stable(&l1, diagram.pi_matrix()) {
            return fail("L1 is not Π-stable");
        }
        for g in diagram.group_generators(Subgroup::K) {
            if !is_stable(&l0, &diagram.rho0(&g)?) {
                return fail("L0 is not K-stable");
            }
        }
        for g in diagram.group_generators(Subgroup::Iwahori) {
            if !is_stable(&l1, &diagram.rho1(&g)?) {
                return fail("L1 is not I-stable");
            }
        }
        Ok(IntegralDiagram { diagram, l0, l1 })
    }

    /// The smallest integral structure with `L_0` containing the standard
    /// lattice of `D_0 ⊗ W`, found by alternately saturating `L_0` under `K`
    /// and `L_1 = (L_0 ∩ D_1) + Π (L_0 ∩ D_1)`.
    pub fn construct(diagram: &Diagram) -> Result<IntegralDiagram> {
        if !diagram.central_scalar().is_unit() {
            return Err(Error::InvalidInput(format!(
                "central scalar {} is not a unit: no bounded integral structure",
                diagram.central_scalar()
            )));
        }
        let ctx = diagram.ctx().clone();
        let k_mats: Vec<ExactMatrix> =
            diagram.group_generators(Subgroup::K).iter().map(|g| diagram.rho0(g)).collect::<Result<_>>()?;
        let r_left = diagram.r().left_inverse()?;
        let mut l0 = Lattice::standard(&ctx, diagram.dim0());
        for _ in 0..MAX_STABILIZATION_ROUNDS {
            l0 = k_saturate(&l0, &k_mats)?;

            let m = l0.intersect_subspace(diagram.r())?;
            let m1 = Lattice::from_generators(&r_left.mul(m.basis()))?;
            let l1 = m1.sum(&m1.image(diagram.pi_matrix())?)?;
            let pushed = diagram.r().mul(l1.basis());
            if l0.contains_vectors(&pushed) {
                return IntegralDiagram::new(diagram.clone(), l0, l1);
            }
            l0 = l0.sum(&Lattice::from_generators(&pushed)?)?;
        }
        Err(Error::Limit(format!("integral structure did not stabilize in {MAX_STABILIZATION_ROUNDS} rounds")))
    }

    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    pub fn l0(&self) -> &Lattice {
        &self.l0
    }

    pub fn l1(&self) -> &Lattice {
        &self.l1
    }

    /// The exponent `a` with `φ_x(L_1) = L_1` for all `x ∈ 1 + 𝔭^a`.
    pub fn deformation_bound(&self) -> Result<u32> {
        self.diagram.splitting()?.deformation_bound(&self.l1)
    }

    /// The same `L_0` with `L_1` replaced by `(L_1 ∩ V_1⊗W) ⊕ (L_1 ∩ V_s⊗W)`.
    /// This is again an integral structure (`Π` swaps the two summands and
    /// `I` preserves each), and its deformation bound is 1.
    pub fn adapted(&self) -> Result<IntegralDiagram> {
        let l1 = self.diagram.splitting()?.adapted_sublattice(&self.l1)?;
        IntegralDiagram::new(self.diagram.clone(), self.l0.clone(), l1)
    }

    /// `𝒟(x)`: the deformed diagram with the same lattices.
    pub fn deform(&self, x: &FieldElement) -> Result<IntegralDiagram> {
        IntegralDiagram::new(self.diagram.deform(x)?, self.l0.clone(), self.l1.clone())
    }
}

fn k_saturate(l: &Lattice, mats: &[ExactMatrix]) -> Result<Lattice> {
    let mut cur = l.clone();
    for _ in 0..MAX_STABILIZATION_ROUNDS {
        let mut gens = cur.basis().clone();
        let mut stable = true;
        for m in mats {
            let img = m.mul(cur.basis());
            if !cur.contains_vectors(&img) {
                stable = false;
                gens = gens.hstack(&img);
            }
        }
        if stable {
            return Ok(cur);
        }
        cur = Lattice::from_generators(&gens)?;
    }
    Err(Error::Limit("K-saturation did not stabilize".into()))
}

/// Whether the identity maps induce an isomorphism of the reductions
/// modulo `𝔭^b`: every action matrix, written in the lattice bases, agrees
/// modulo `π^b`.
pub fn compare_mod(x: &IntegralDiagram, y: &IntegralDiagram, b: u32) -> Result<bool> {
    if !x.l0.equals(&y.l0) || !x.l1.equals(&y.l1) {
        return Err(Error::InvalidInput("integral structures use different lattices".into()));
    }
    let (dx, dy) = (&x.diagram, &y.diagram);
    let b = b as i64;
    let in_basis = |l: &Lattice, m: &ExactMatrix| -> Result<ExactMatrix> {
        l.coordinates(&m.mul(l.basis())).ok_or_else(|| Error::AxiomFailure("lattice not preserved".into()))
    };
    if !in_basis(&x.l1, dx.pi_matrix())?.congruent_mod(&in_basis(&y.l1, dy.pi_matrix())?, b) {
        return Ok(false);
    }
    for g in dx.group_generators(Subgroup::Iwahori) {
        if !in_basis(&x.l1, &dx.rho1(&g)?)?.congruent_mod(&in_basis(&y.l1, &dy.rho1(&g)?)?, b) {
            return Ok(false);
        }
    }
    for g in dx.group_generators(Subgroup::K) {
        if !in_basis(&x.l0, &dx.rho0(&g)?)?.congruent_mod(&in_basis(&y.l0, &dy.rho0(&g)?)?, b) {
            return Ok(false);
        }
    }
    let r_coords = |d: &IntegralDiagram| {
        d.l0.coordinates(&d.diagram.r().mul(d.l1.basis())).ok_or_else(|| Error::AxiomFailure("r(L1) ⊄ L0".into()))
    };
    Ok(r_coords(x)?.congruent_mod(&r_coords(y)?, b))
}
