//! `o_L`-lattices in `L^n`, their sums and intersections, containment, and
//! the deformation maps `φ_x` attached to a splitting `U_1 ⊕ U_2`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{saturate, ExactMatrix, Invariant};
use crate::local_field::{FieldContext, FieldElement};

/// A finitely generated `o_L`-submodule of `L^n`, stored by an `o_L`-basis
/// (the columns of `basis`).
#[derive(Clone, Debug)]
pub struct Lattice {
    basis: ExactMatrix,
}

/// Outcome of comparing two lattices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeRelation {
    Equal,
    /// The first lattice is strictly inside the second; the invariants
    /// describe the quotient.
    FirstInSecond(Vec<Invariant>),
    SecondInFirst(Vec<Invariant>),
    Incomparable,
}

impl Lattice {
    /// The `o_L`-span of the columns of `gens`.
    pub fn from_generators(gens: &ExactMatrix) -> Result<Lattice> {
        let ctx = gens.ctx().clone();
        let n = gens.rows();
        let Some(shift) = gens.min_val() else {
            return Ok(Lattice { basis: ExactMatrix::zeros(&ctx, n, 0) });
        };
        let scaled = gens.scale(&FieldElement::pi_pow(&ctx, -shift));
        let snf = scaled.smith_normal_form(true)?;
        let u_inv = snf.u_inv.expect("transforms requested");
        // columns of A·V are u_inv · D; keep the nonzero ones
        let mut cols = Vec::new();
        for (j, inv) in snf.invariants.iter().enumerate() {
            if let Invariant::Power(k) = inv {
                let s = FieldElement::pi_pow(&ctx, *k as i64 + shift);
                cols.push(u_inv.column(j).iter().map(|x| x.mul(&s)).collect::<Vec<_>>());
            }
        }
        Ok(Lattice { basis: ExactMatrix::from_columns(&ctx, n, &cols) })
    }

    /// The standard lattice `o_L^n`.
    pub fn standard(ctx: &Arc<FieldContext>, n: usize) -> Lattice {
        Lattice { basis: ExactMatrix::identity(ctx, n) }
    }

    pub fn basis(&self) -> &ExactMatrix {
        &self.basis
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        self.basis.ctx()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.ambient_dim()
    }

    fn check_same(&self, other: &Lattice) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::Dimension(format!(
                "lattices in dimensions {} and {}",
                self.ambient_dim(),
                other.ambient_dim()
            )));
        }
        Ok(())
    }

    pub fn sum(&self, other: &Lattice) -> Result<Lattice> {
        self.check_same(other)?;
        Lattice::from_generators(&self.basis.hstack(&other.basis))
    }

    pub fn intersect(&self, other: &Lattice) -> Result<Lattice> {
        self.check_same(other)?;
        let a = self.rank();
        if a == 0 || other.rank() == 0 {
            return Ok(Lattice { basis: ExactMatrix::zeros(self.ctx(), self.ambient_dim(), 0) });
        }
        // A x = B y with x, y integral: the integral points of ker [A | -B].
        let k = self.basis.hstack(&other.basis.scale(&FieldElement::from_int(self.ctx(), -1))).kernel();
        if k.cols() == 0 {
            return Ok(Lattice { basis: ExactMatrix::zeros(self.ctx(), self.ambient_dim(), 0) });
        }
        let sat = saturate(&k)?;
        let x = sat.select_rows(&(0..a).collect::<Vec<_>>());
        Lattice::from_generators(&self.basis.mul(&x))
    }

    /// `self ∩ span_L(sub)`.
    pub fn intersect_subspace(&self, sub: &ExactMatrix) -> Result<Lattice> {
        let a = self.rank();
        let empty = || Lattice { basis: ExactMatrix::zeros(self.ctx(), self.ambient_dim(), 0) };
        if a == 0 || sub.cols() == 0 {
            return Ok(empty());
        }
        let k = self.basis.hstack(sub).kernel();
        if k.cols() == 0 {
            return Ok(empty());
        }
        let x = k.select_rows(&(0..a).collect::<Vec<_>>());
        let sat = saturate(&x)?;
        Lattice::from_generators(&self.basis.mul(&sat))
    }

    /// Image under a linear map.
    pub fn image(&self, g: &ExactMatrix) -> Result<Lattice> {
        Lattice::from_generators(&g.mul(&self.basis))
    }

    /// `π^k · self`.
    pub fn scale_pi(&self, k: i64) -> Lattice {
        Lattice { basis: self.basis.scale(&FieldElement::pi_pow(self.ctx(), k)) }
    }

    /// Coordinates of `v` in the lattice basis, if `v` lies in the span.
    pub fn coordinates(&self, v: &ExactMatrix) -> Option<ExactMatrix> {
        self.basis.solve(v)
    }

    pub fn contains_vectors(&self, v: &ExactMatrix) -> bool {
        if v.cols() == 0 {
            return true;
        }
        match self.basis.solve(v) {
            Some(x) => self.basis.mul(&x).equals(v) && x.is_integral(),
            None => false,
        }
    }

    /// True when `other ⊆ self`.
    pub fn contains(&self, other: &Lattice) -> bool {
        self.ambient_dim() == other.ambient_dim() && self.contains_vectors(&other.basis)
    }

    pub fn equals(&self, other: &Lattice) -> bool {
        self.contains(other) && other.contains(self)
    }

    /// Containment relation with the quotient invariants.
    pub fn compare(&self, other: &Lattice) -> Result<LatticeRelation> {
        self.check_same(other)?;
        let a_in_b = other.contains(self);
        let b_in_a = self.contains(other);
        Ok(match (a_in_b, b_in_a) {
            (true, true) => LatticeRelation::Equal,
            (true, false) => LatticeRelation::FirstInSecond(other.index_of(self)?),
            (false, true) => LatticeRelation::SecondInFirst(self.index_of(other)?),
            (false, false) => LatticeRelation::Incomparable,
        })
    }

    /// Smith invariants of `self / sub` for `sub ⊆ self`.
    fn index_of(&self, sub: &Lattice) -> Result<Vec<Invariant>> {
        let x = self.basis.solve(&sub.basis).ok_or_else(|| Error::InvalidInput("not a sublattice".into()))?;
        let mut inv = x.smith_invariants()?;
        // a rank deficiency shows up as zero invariants
        inv.extend(std::iter::repeat_n(Invariant::Zero, self.rank().saturating_sub(inv.len())));
        Ok(inv)
    }
}

/// The splitting `L^n = U_1 ⊕ U_2` given by bases of the two summands.
#[derive(Clone, Debug)]
pub struct Splitting {
    p: ExactMatrix,
    p_inv: ExactMatrix,
    t: usize,
}

impl Splitting {
    pub fn new(u1: &ExactMatrix, u2: &ExactMatrix) -> Result<Splitting> {
        let p = u1.hstack(u2);
        if p.rows() != p.cols() || p.rank() != p.rows() {
            return Err(Error::InvalidInput("U1 and U2 are not complementary".into()));
        }
        let p_inv = p.inverse()?;
        Ok(Splitting { p, p_inv, t: u1.cols() })
    }

    pub fn u1(&self) -> ExactMatrix {
        self.p.select_columns(&(0..self.t).collect::<Vec<_>>())
    }

    pub fn u2(&self) -> ExactMatrix {
        self.p.select_columns(&(self.t..self.p.cols()).collect::<Vec<_>>())
    }

    /// `(M ∩ U_1) ⊕ (M ∩ U_2)`, the largest sublattice of `M` adapted to the
    /// splitting; `φ_x` preserves it for every unit `x`.
    pub fn adapted_sublattice(&self, m: &Lattice) -> Result<Lattice> {
        m.intersect_subspace(&self.u1())?.sum(&m.intersect_subspace(&self.u2())?)
    }

    /// The matrix of `φ_x : v_1 + v_2 ↦ x v_1 + v_2`.
    pub fn phi_x(&self, x: &FieldElement) -> Result<ExactMatrix> {
        if !x.is_unit() {
            return Err(Error::NotInvertible(format!("φ_x needs a unit, got {x}")));
        }
        let ctx = x.ctx();
        let n = self.p.rows();
        let mut d = ExactMatrix::identity(ctx, n);
        for i in 0..self.t {
            d[(i, i)] = x.clone();
        }
        Ok(self.p.mul(&d).mul(&self.p_inv))
    }

    /// `φ_x` applied to column vectors.
    pub fn apply_phi_x(&self, x: &FieldElement, v: &ExactMatrix) -> Result<ExactMatrix> {
        Ok(self.phi_x(x)?.mul(v))
    }

    pub fn apply_phi_x_lattice(&self, x: &FieldElement, m: &Lattice) -> Result<Lattice> {
        m.image(&self.phi_x(x)?)
    }

    /// The smallest `a ≥ 1` with `𝔭^{-a}(M ∩ U_1) + U_2 ⊇ M`, in `π`-units.
    ///
    /// This is a sufficient exponent: `φ_x(M) = M` for every `x ∈ 1 + 𝔭^a`.
    /// It is not claimed to be the least exponent with that property.
    pub fn deformation_bound(&self, m: &Lattice) -> Result<u32> {
        if !m.is_full_rank() || m.ambient_dim() != self.p.rows() {
            return Err(Error::InvalidInput("deformation bound needs a full-rank lattice".into()));
        }
        if self.t == 0 {
            return Ok(1);
        }
        let rows1: Vec<usize> = (0..self.t).collect();
        let n_gens = self.p_inv.mul(m.basis()).select_rows(&rows1);
        let m1 = m.intersect_subspace(&self.u1())?;
        let q = self.p_inv.mul(m1.basis()).select_rows(&rows1);
        let x = q.solve(&n_gens).ok_or_else(|| Error::InvalidInput("projection outside M ∩ U1 span".into()))?;
        let worst = x.min_val().unwrap_or(0);
        Ok((-worst).max(1) as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_field::PolySpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q3() -> Arc<FieldContext> {
        FieldContext::new(3, PolySpec::Trivial, 20).unwrap()
    }

    fn fe(c: &Arc<FieldContext>, n: i64, d: i64) -> FieldElement {
        FieldElement::from_ratio(c, n, d).unwrap()
    }

    fn m_example(c: &Arc<FieldContext>) -> Lattice {
        // span{e1, p^{-2} e1 + e2}
        let g = ExactMatrix::from_fn(c, 2, 2, |i, j| match (i, j) {
            (0, 0) => fe(c, 1, 1),
            (0, 1) => fe(c, 1, 9),
            (1, 1) => fe(c, 1, 1),
            _ => FieldElement::zero(c),
        });
        Lattice::from_generators(&g).unwrap()
    }

    fn e(c: &Arc<FieldContext>, i: usize) -> ExactMatrix {
        ExactMatrix::from_fn(c, 2, 1, |r, _| FieldElement::from_int(c, (r == i) as i64))
    }

    #[test]
    fn sums_and_intersections() {
        let c = q3();
        let m = m_example(&c);
        assert!(m.sum(&m).unwrap().equals(&m));
        let std = Lattice::standard(&c, 2);
        let p_std = std.scale_pi(1);
        assert!(std.intersect(&p_std).unwrap().equals(&p_std));
        let want = Lattice::from_generators(&ExactMatrix::from_ints(&c, &[&[1, 1], &[0, 9]])).unwrap();
        assert!(m.intersect(&std).unwrap().equals(&want));
    }

    #[test]
    fn comparisons() {
        let c = q3();
        let std = Lattice::standard(&c, 2);
        assert_eq!(std.compare(&std).unwrap(), LatticeRelation::Equal);
        assert_eq!(
            std.scale_pi(1).compare(&std).unwrap(),
            LatticeRelation::FirstInSecond(vec![Invariant::Power(1), Invariant::Power(1)])
        );
        assert_eq!(m_example(&c).compare(&std.scale_pi(-1)).unwrap(), LatticeRelation::Incomparable);
    }

    #[test]
    fn deformation_bound_examples() {
        let c = q3();
        let s = Splitting::new(&e(&c, 0), &e(&c, 1)).unwrap();
        assert_eq!(s.deformation_bound(&Lattice::standard(&c, 2)).unwrap(), 1);
        let m = m_example(&c);
        assert_eq!(s.deformation_bound(&m).unwrap(), 2);
        let x = FieldElement::from_int(&c, 1 + 9);
        assert!(s.apply_phi_x_lattice(&x, &m).unwrap().equals(&m));
        // a = 1 is not enough for this M
        let x1 = FieldElement::from_int(&c, 1 + 3);
        assert!(!s.apply_phi_x_lattice(&x1, &m).unwrap().equals(&m));
        assert!(Splitting::new(&e(&c, 0), &e(&c, 0)).is_err());
        assert!(s.phi_x(&FieldElement::from_int(&c, 3)).is_err());
    }

    #[test]
    fn phi_x_on_vectors() {
        let c = q3();
        let s = Splitting::new(&e(&c, 0), &e(&c, 1)).unwrap();
        let v = e(&c, 0).add(&e(&c, 1));
        let got = s.apply_phi_x(&FieldElement::from_int(&c, 4), &v).unwrap();
        assert!(got.equals(&ExactMatrix::from_ints(&c, &[&[4], &[1]])));
        assert!(s.apply_phi_x(&FieldElement::from_int(&c, 4), &e(&c, 1)).unwrap().equals(&e(&c, 1)));
        assert!(s.phi_x(&FieldElement::one(&c)).unwrap().equals(&ExactMatrix::identity(&c, 2)));
    }

    fn random_lattice(c: &Arc<FieldContext>, rng: &mut ChaCha8Rng, n: usize) -> Lattice {
        let g = ExactMatrix::from_fn(c, n, n, |_, _| {
            let num = rng.gen_range(-12i64..=12);
            fe(c, num * 3i64.pow(rng.gen_range(0..3)), 3i64.pow(rng.gen_range(0..3)))
        });
        let g = if g.rank() < n { g.add(&ExactMatrix::identity(c, n)) } else { g };
        Lattice::from_generators(&g).unwrap()
    }

    #[test]
    fn random_deformation_bound_holds() {
        let c = q3();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let m = random_lattice(&c, &mut rng, 4);
            if !m.is_full_rank() {
                continue;
            }
            let u1 = ExactMatrix::from_fn(&c, 4, 2, |_, _| FieldElement::from_int(&c, rng.gen_range(-5..5)));
            let u2 = ExactMatrix::from_fn(&c, 4, 2, |_, _| FieldElement::from_int(&c, rng.gen_range(-5..5)));
            let Ok(s) = Splitting::new(&u1, &u2) else { continue };
            let a = s.deformation_bound(&m).unwrap();
            for _ in 0..20 {
                let t = rng.gen_range(-40i64..40);
                let x = FieldElement::one(&c).add(&FieldElement::from_int(&c, t).mul(&FieldElement::pi_pow(&c, a as i64)));
                assert!(s.apply_phi_x_lattice(&x, &m).unwrap().equals(&m));
            }
        }
    }

    #[test]
    fn lattice_axioms_on_random_triples() {
        let c = q3();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..8 {
            let a = random_lattice(&c, &mut rng, 3);
            let b = random_lattice(&c, &mut rng, 3);
            let cc = random_lattice(&c, &mut rng, 3);
            let s = a.sum(&b).unwrap();
            let i = a.intersect(&b).unwrap();
            assert!(s.contains(&a) && s.contains(&b));
            assert!(a.contains(&i) && b.contains(&i));
            // modular law for A' = A ∩ C ⊆ C
            let a2 = a.intersect(&cc).unwrap();
            let lhs = a2.sum(&b.intersect(&cc).unwrap()).unwrap();
            let rhs = a2.sum(&b).unwrap().intersect(&cc).unwrap();
            assert!(lhs.equals(&rhs));
        }
    }
}
