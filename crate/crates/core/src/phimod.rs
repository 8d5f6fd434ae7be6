//! The filtered φ-modules `D_{k,a_p}` (basis `e_1, e_2`,
//! `φ(e_1) = p^{k-1} e_2`, `φ(e_2) = -e_1 + a_p e_2`, `Fil^i = L e_1` for
//! `1 ≤ i ≤ k-1`), their polygons, and the valuation bookkeeping around
//! approximating `a_p = 2λ` by `a_p(j) = λ(x_j + x_j^{-1})`.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ExactMatrix;
use crate::local_field::{FieldContext, FieldElement, PolySpec, Valuation};

pub type Slope = Ratio<i64>;

#[derive(Clone, Debug)]
pub struct FilteredPhiModule {
    k: u32,
    a_p: FieldElement,
    phi: ExactMatrix,
}

impl FilteredPhiModule {
    pub fn new(k: u32, a_p: FieldElement) -> Result<FilteredPhiModule> {
        if k < 2 {
            return Err(Error::InvalidInput(format!("weight k = {k} must be at least 2")));
        }
        if !a_p.is_zero() && a_p.val_pi().is_some_and(|v| v <= 0) {
            return Err(Error::InvalidInput(format!("a_p = {a_p} must lie in the maximal ideal")));
        }
        let ctx = a_p.ctx().clone();
        let pk = FieldElement::from_int(&ctx, ctx.p() as i64).pow(k as i64 - 1)?;
        let mut phi = ExactMatrix::zeros(&ctx, 2, 2);
        phi[(1, 0)] = pk;
        phi[(0, 1)] = FieldElement::from_int(&ctx, -1);
        phi[(1, 1)] = a_p.clone();
        Ok(FilteredPhiModule { k, a_p, phi })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn a_p(&self) -> &FieldElement {
        &self.a_p
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        self.a_p.ctx()
    }

    /// Columns are `φ(e_1)`, `φ(e_2)`.
    pub fn phi_matrix(&self) -> &ExactMatrix {
        &self.phi
    }

    pub fn det(&self) -> FieldElement {
        self.phi[(0, 0)].mul(&self.phi[(1, 1)]).sub(&self.phi[(0, 1)].mul(&self.phi[(1, 0)]))
    }

    pub fn trace(&self) -> FieldElement {
        self.phi[(0, 0)].add(&self.phi[(1, 1)])
    }

    /// `max{i : Fil^i ∩ line ≠ 0}` for a line spanned by `v`.
    pub fn hodge_degree_of_line(&self, v: &[FieldElement; 2]) -> u32 {
        if v[1].is_zero() {
            self.k - 1
        } else {
            0
        }
    }

    /// Jumps of the filtration, with multiplicity.
    pub fn hodge_slopes(&self) -> [u32; 2] {
        [0, self.k - 1]
    }

    /// Slopes of the Newton polygon of `X^2 - a_p X + p^{k-1}`, from the
    /// valuations of its coefficients.
    pub fn newton_slopes(&self) -> [Slope; 2] {
        let total = Slope::from_integer(self.k as i64 - 1);
        let half = total / 2;
        match self.a_p.valuation() {
            Valuation::Finite(v) if v < half => [v, total - v],
            _ => [half, half],
        }
    }

    /// `a_p^2 - 4 p^{k-1}`.
    pub fn discriminant(&self) -> FieldElement {
        let four_det = self.det().mul_int(4);
        self.a_p.mul(&self.a_p).sub(&four_det)
    }

    /// Eigenvalues of `φ` lying in `L` (empty when the characteristic
    /// polynomial is irreducible over `L`).
    pub fn eigenvalues(&self) -> Result<Vec<FieldElement>> {
        let disc = self.discriminant();
        let half = FieldElement::from_int(self.ctx(), 2).inv()?;
        if disc.is_zero() {
            return Ok(vec![self.a_p.mul(&half)]);
        }
        if !disc.is_square() {
            return Ok(vec![]);
        }
        let r = disc.sqrt()?;
        Ok(vec![self.a_p.add(&r).mul(&half), self.a_p.sub(&r).mul(&half)])
    }

    /// Every `φ`-stable line `L'` has `t_N(L') ≥ t_H(L')`; the totals agree
    /// because `det φ = p^{k-1}`.
    pub fn weakly_admissible(&self) -> Result<bool> {
        let newton_total: Slope = self.newton_slopes().iter().sum();
        let hodge_total = Slope::from_integer(self.hodge_slopes().iter().sum::<u32>() as i64);
        if newton_total != hodge_total {
            return Ok(false);
        }
        for mu in self.eigenvalues()? {
            // (A - μ)(-1, μ)^T = 0 for A = [[0, -1], [p^{k-1}, a_p]]
            let v = [FieldElement::from_int(self.ctx(), -1), mu.clone()];
            let t_h = Slope::from_integer(self.hodge_degree_of_line(&v) as i64);
            let t_n = match mu.valuation() {
                Valuation::Finite(x) => x,
                Valuation::Infinite => return Ok(false),
            };
            if t_n < t_h {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// False exactly when `a_p^2 = 4 p^{k-1}`: a double eigenvalue, and `φ`
    /// is then a nontrivial Jordan block since it is not scalar.
    pub fn frobenius_semisimple(&self) -> bool {
        !self.discriminant().is_zero()
    }
}

/// Largest integer `m ≤ (k-2)/(p-1)`.
pub fn blz_threshold(p: u64, k: u32) -> i64 {
    (k as i64 - 2).div_euclid(p as i64 - 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ReductionType {
    Irreducible,
    SplitPrincipalSeries { twist_exponent: u32, characters: [String; 2] },
}

impl fmt::Display for ReductionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionType::Irreducible => write!(f, "irreducible"),
            ReductionType::SplitPrincipalSeries { twist_exponent, characters } => {
                write!(f, "{} ⊕ {} twisted by ω^{twist_exponent}", characters[0], characters[1])
            }
        }
    }
}

/// Shape of the semisimplified reduction for `val(a_p)` above the
/// threshold `m`: irreducible unless `p + 1 | k - 1`.
pub fn blz_reduction_type(p: u64, k: u32, val_ap: Slope) -> Result<ReductionType> {
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    let m = blz_threshold(p, k);
    if val_ap <= Slope::from_integer(m) {
        return Err(Error::InvalidInput(format!("val(a_p) = {val_ap} must exceed m = {m}")));
    }
    let k1 = k as u64 - 1;
    if k1 % (p + 1) != 0 {
        return Ok(ReductionType::Irreducible);
    }
    Ok(ReductionType::SplitPrincipalSeries {
        twist_exponent: (k1 / (p + 1)) as u32,
        characters: ["μ_{√-1}".to_string(), "μ_{-√-1}".to_string()],
    })
}

/// `n - e m`, the precision to which the trace characters agree when
/// `a_p ≡ a'_p mod 𝔭^n`.
pub fn congruence_precision(n: i64, e: u32, k: u32, p: u64) -> Result<i64> {
    let em = e as i64 * blz_threshold(p, k);
    if n < em {
        return Err(Error::InvalidInput(format!("n = {n} is below e·m = {em}")));
    }
    Ok(n - em)
}

/// The field used for weight `k`: `Q_p` for odd `k`, `Q_p(√p)` for even
/// `k` so that `p^{(k-1)/2}` exists.
pub fn field_for_weight(p: u64, k: u32, precision: u32) -> Result<Arc<FieldContext>> {
    if k % 2 == 1 {
        FieldContext::new(p, PolySpec::Trivial, precision)
    } else {
        FieldContext::new(p, PolySpec::Monic(vec![-(p as i64), 0, 1]), precision)
    }
}

/// `λ = sign · p^{(k-1)/2}`.
pub fn lambda(ctx: &Arc<FieldContext>, k: u32, sign: i64) -> Result<FieldElement> {
    let e = ctx.e() as i64;
    if (e * (k as i64 - 1)) % 2 != 0 {
        return Err(Error::InvalidField(format!("p^{{(k-1)/2}} with k = {k} needs a ramified extension")));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidInput("sign must be ±1".into()));
    }
    Ok(FieldElement::pi_pow(ctx, e * (k as i64 - 1) / 2).mul_int(sign))
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproximationStep {
    pub j: u32,
    /// `x_j` and `a_p(j)` in display form.
    pub x_j: String,
    pub a_p_j: String,
    /// `v_π(a_p - a_p(j))`.
    pub val_difference: i64,
    /// `a + j + e m`.
    pub required: i64,
    /// `val(a_p(j))`, normalized by `val(p) = 1`.
    pub val_a_p_j: String,
    pub congruence_holds: bool,
    pub valuation_matches: bool,
}

impl ApproximationStep {
    pub fn passed(&self) -> bool {
        self.congruence_holds && self.valuation_matches
    }
}

/// `x_j = 1 + p^{a+j}` for `j = 0..=j_max`.
pub fn default_points(ctx: &Arc<FieldContext>, a: u32, j_max: u32) -> Vec<FieldElement> {
    let one = FieldElement::one(ctx);
    let e = ctx.e() as i64;
    (0..=j_max).map(|j| one.add(&FieldElement::pi_pow(ctx, e * (a + j) as i64))).collect()
}

/// Checks `a_p ≡ a_p(j) mod 𝔭^{a+j+em}` and `val(a_p(j)) = (k-1)/2` for
/// `a_p = 2λ`, `a_p(j) = λ(x_j + x_j^{-1})`.
pub fn approximation_sequence(
    ctx: &Arc<FieldContext>,
    k: u32,
    sign: i64,
    a: u32,
    points: &[FieldElement],
) -> Result<Vec<ApproximationStep>> {
    let p = ctx.p();
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    let lam = lambda(ctx, k, sign)?;
    let a_p = lam.mul_int(2);
    let em = ctx.e() as i64 * blz_threshold(p, k);
    let target = Valuation::Finite(Slope::new(k as i64 - 1, 2));
    let one = FieldElement::one(ctx);
    let mut out = Vec::with_capacity(points.len());
    for (j, x) in points.iter().enumerate() {
        let j = j as u32;
        let required = (a + j) as i64 + em;
        let dx = x.sub(&one);
        if dx.is_zero() {
            return Err(Error::InvalidInput(format!("x_{j} must differ from 1")));
        }
        if dx.val_pi().is_some_and(|v| v < (a + j) as i64) {
            return Err(Error::InvalidInput(format!("x_{j} is not in 1 + 𝔭^{}", a + j)));
        }
        let a_p_j = lam.mul(&x.add(&x.inv()?));
        let diff = a_p.sub(&a_p_j);
        let val_difference = match diff.val_pi() {
            Some(v) if !diff.is_zero() => v,
            _ => {
                return Err(Error::PrecisionExhausted(format!(
                    "a_p - a_p({j}) vanishes at the working precision; cannot certify the congruence"
                )))
            }
        };
        let v_apj = a_p_j.valuation();
        out.push(ApproximationStep {
            j,
            x_j: x.to_string(),
            a_p_j: a_p_j.to_string(),
            val_difference,
            required,
            val_a_p_j: v_apj.to_string(),
            congruence_holds: val_difference >= required,
            valuation_matches: v_apj == target,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> Arc<FieldContext> {
        FieldContext::new(3, PolySpec::Trivial, 20).unwrap()
    }

    #[test]
    fn phi_matrix_and_invariants() {
        let c = q3();
        let d = FilteredPhiModule::new(2, FieldElement::from_int(&c, 3)).unwrap();
        assert!(d.phi_matrix().equals(&ExactMatrix::from_ints(&c, &[&[0, -1], &[3, 3]])));
        let d = FilteredPhiModule::new(3, FieldElement::from_int(&c, 6)).unwrap();
        assert!(d.det().equals(&FieldElement::from_int(&c, 9)));
        assert!(d.trace().equals(&FieldElement::from_int(&c, 6)));
        assert!(FilteredPhiModule::new(2, FieldElement::from_int(&c, 1)).is_err());
        assert!(FilteredPhiModule::new(2, FieldElement::zero(&c)).is_ok());
    }

    #[test]
    fn polygons() {
        let c = q3();
        let d = FilteredPhiModule::new(3, FieldElement::from_int(&c, 6)).unwrap();
        assert_eq!(d.hodge_slopes(), [0, 2]);
        assert_eq!(d.newton_slopes(), [Slope::from_integer(1), Slope::from_integer(1)]);
        let d = FilteredPhiModule::new(2, FieldElement::from_int(&c, 9)).unwrap();
        assert_eq!(d.newton_slopes(), [Slope::new(1, 2), Slope::new(1, 2)]);
        let d = FilteredPhiModule::new(5, FieldElement::from_int(&c, 3)).unwrap();
        assert_eq!(d.newton_slopes(), [Slope::from_integer(1), Slope::from_integer(3)]);
    }

    #[test]
    fn admissibility_and_semisimplicity() {
        let c = q3();
        let d = FilteredPhiModule::new(2, FieldElement::from_int(&c, 3)).unwrap();
        assert!(d.eigenvalues().unwrap().is_empty());
        assert!(d.weakly_admissible().unwrap());
        assert!(d.frobenius_semisimple());
        let d = FilteredPhiModule::new(3, FieldElement::from_int(&c, 6)).unwrap();
        let ev = d.eigenvalues().unwrap();
        assert_eq!(ev.len(), 1);
        assert!(ev[0].equals(&FieldElement::from_int(&c, 3)));
        assert!(d.weakly_admissible().unwrap());
        assert!(!d.frobenius_semisimple());
        let d = FilteredPhiModule::new(3, FieldElement::zero(&c)).unwrap();
        assert!(d.frobenius_semisimple());
    }

    #[test]
    fn reduction_types() {
        assert_eq!(
            blz_reduction_type(3, 5, Slope::from_integer(2)).unwrap(),
            ReductionType::SplitPrincipalSeries {
                twist_exponent: 1,
                characters: ["μ_{√-1}".into(), "μ_{-√-1}".into()]
            }
        );
        assert_eq!(blz_reduction_type(3, 4, Slope::new(3, 2)).unwrap(), ReductionType::Irreducible);
        assert!(blz_reduction_type(3, 5, Slope::from_integer(1)).is_err());
    }

    #[test]
    fn congruence_bookkeeping() {
        assert_eq!(congruence_precision(5, 1, 2, 3).unwrap(), 5);
        assert_eq!(congruence_precision(12, 2, 12, 3).unwrap(), 2);
        assert!(congruence_precision(9, 2, 12, 3).is_err());
    }

    #[test]
    fn first_approximation_step() {
        let c = q3();
        let steps = approximation_sequence(&c, 3, 1, 1, &default_points(&c, 1, 0)).unwrap();
        assert_eq!(steps[0].a_p_j, FieldElement::from_ratio(&c, 51, 4).unwrap().to_string());
        assert_eq!(steps[0].val_difference, 3);
        assert!(steps[0].passed());
        assert!(approximation_sequence(&c, 3, 1, 1, &[FieldElement::one(&c)]).is_err());
    }
}
