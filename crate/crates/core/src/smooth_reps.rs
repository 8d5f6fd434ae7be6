//! Smooth characters of `Q_p^×`, the induced representations
//! `Ind_{J_c}^K θ`, the algebraic representations `Sym^{k-2} L^2`, tensor
//! products and invariant subspaces.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gl2::{coset_decompose, coset_labels, primitive_root, CosetLabel, FiniteMatrix, Mat2};
use crate::linalg::{fixed_space, ExactMatrix};
use crate::local_field::{FieldContext, FieldElement};

/// A character `χ : Q_p^× → L^×` that is trivial on `1 + p^c Z_p`.
#[derive(Clone, Debug)]
pub struct SmoothCharacter {
    ctx: Arc<FieldContext>,
    value_at_p: FieldElement,
    level: u32,
    theta_gen: FieldElement,
    /// `values[u]` is `χ(u)` for units `u mod p^level`.
    values: Vec<Option<FieldElement>>,
}

impl SmoothCharacter {
    /// `χ(p) = value_at_p` and `χ(g) = theta_gen` on the fixed primitive root
    /// `g` modulo `p^level`.
    pub fn new(value_at_p: FieldElement, level: u32, theta_gen: FieldElement) -> Result<Self> {
        let ctx = value_at_p.ctx().clone();
        if value_at_p.is_zero() {
            return Err(Error::InvalidInput("χ(p) must be nonzero".into()));
        }
        let p = ctx.p();
        let m = p.pow(level);
        let order = if level == 0 { 1 } else { m / p * (p - 1) };
        if !theta_gen.is_unit() || !theta_gen.pow(order as i64)?.equals(&FieldElement::one(&ctx)) {
            return Err(Error::InvalidInput(format!(
                "θ(g) = {theta_gen} is not a root of unity of order dividing {order}"
            )));
        }
        let mut values = vec![None; m as usize];
        let g = primitive_root(p) % m;
        let mut x = 1 % m;
        let mut v = FieldElement::one(&ctx);
        for _ in 0..order {
            values[x as usize] = Some(v.clone());
            x = x * g % m;
            v = v.mul(&theta_gen);
        }
        Ok(SmoothCharacter { ctx, value_at_p, level, theta_gen, values })
    }

    /// Unramified character with the given value at `p`.
    pub fn unramified(value_at_p: FieldElement) -> Result<Self> {
        let one = FieldElement::one(value_at_p.ctx());
        Self::new(value_at_p, 0, one)
    }

    /// `χ(u) = ω(u)^j` on units, with `ω` the Teichmüller character.
    pub fn tame(value_at_p: FieldElement, j: i64) -> Result<Self> {
        let ctx = value_at_p.ctx().clone();
        let g = primitive_root(ctx.p()) as i64;
        let t = FieldElement::teichmuller(&ctx, g)?.pow(j)?;
        Self::new(value_at_p, 1, t)
    }

    /// The norm character `|x| = p^{-val(x)}`.
    pub fn norm(ctx: &Arc<FieldContext>) -> Result<Self> {
        Self::unramified(FieldElement::pi_pow(ctx, -(ctx.e() as i64)))
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn value_at_p(&self) -> &FieldElement {
        &self.value_at_p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn theta_gen(&self) -> &FieldElement {
        &self.theta_gen
    }

    /// `χ(u)` for an integer unit `u`.
    pub fn eval_unit(&self, u: i64) -> Result<FieldElement> {
        let m = self.ctx.p().pow(self.level) as i64;
        self.values[u.rem_euclid(m) as usize]
            .clone()
            .ok_or_else(|| Error::InvalidInput(format!("{u} is not a unit")))
    }

    /// `χ(p^v u)`.
    pub fn eval(&self, v: i64, u: i64) -> Result<FieldElement> {
        Ok(self.value_at_p.pow(v)?.mul(&self.eval_unit(u)?))
    }

    /// Smallest `c` with `χ` trivial on `1 + p^c Z_p` (0 for unramified).
    pub fn conductor_exponent(&self) -> u32 {
        let p = self.ctx.p();
        let m = p.pow(self.level);
        let one = FieldElement::one(&self.ctx);
        for c in 0..=self.level {
            let step = p.pow(c);
            let trivial = (0..m / step).all(|t| {
                let u = (1 + t * step) % m;
                self.values[u as usize].as_ref().is_none_or(|x| x.equals(&one))
            });
            if trivial {
                return c;
            }
        }
        self.level
    }
}

/// A finite-dimensional `L`-representation given by the matrices of named
/// group elements and the scalar by which `p ∈ Z` acts.
#[derive(Clone, Debug)]
pub struct ModuleWithAction {
    pub labels: Vec<String>,
    pub actions: Vec<(String, ExactMatrix)>,
    pub central_scalar: FieldElement,
}

impl ModuleWithAction {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn action(&self, name: &str) -> Option<&ExactMatrix> {
        self.actions.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn tensor(&self, other: &ModuleWithAction) -> ModuleWithAction {
        let mut labels = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.labels {
            for b in &other.labels {
                labels.push(format!("{a}⊗{b}"));
            }
        }
        let actions = self
            .actions
            .iter()
            .filter_map(|(n, m)| other.action(n).map(|m2| (n.clone(), m.kron(m2))))
            .collect();
        ModuleWithAction { labels, actions, central_scalar: self.central_scalar.mul(&other.central_scalar) }
    }

    /// The subspace fixed by `gens`, with the restriction of every stored
    /// action that preserves it.
    pub fn invariants_of(&self, gens: &[ExactMatrix]) -> (ExactMatrix, ModuleWithAction) {
        let ctx = self.central_scalar.ctx();
        let basis = fixed_space(ctx, self.dim(), gens);
        let mut actions = Vec::new();
        for (name, m) in &self.actions {
            let image = m.mul(&basis);
            if let Some(x) = basis.solve(&image) {
                if basis.mul(&x).equals(&image) {
                    actions.push((name.clone(), x));
                }
            }
        }
        let labels = (0..basis.cols()).map(|i| format!("v{i}")).collect();
        (basis, ModuleWithAction { labels, actions, central_scalar: self.central_scalar.clone() })
    }
}

/// `Ind_{J_c}^K θ` for `θ([[a,b],[c,d]]) = θ_1(a) θ_2(d)`, with `K` acting by
/// right translation `(g f)(x) = f(x g)` on functions `f(j x) = θ(j) f(x)`.
///
/// The basis vector for a label `ℓ` is the function supported on
/// `J_c · rep(ℓ)` with value 1 at `rep(ℓ)`.
#[derive(Clone, Debug)]
pub struct InducedRep {
    ctx: Arc<FieldContext>,
    c: u32,
    theta1: SmoothCharacter,
    theta2: SmoothCharacter,
    labels: Vec<CosetLabel>,
    index: HashMap<CosetLabel, usize>,
}

impl InducedRep {
    pub fn new(theta1: &SmoothCharacter, theta2: &SmoothCharacter, c: u32) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidInput("level c must be at least 1".into()));
        }
        for t in [theta1, theta2] {
            if t.conductor_exponent() > c {
                return Err(Error::InvalidInput(format!(
                    "character of conductor p^{} induced at level {c}",
                    t.conductor_exponent()
                )));
            }
        }
        let ctx = theta1.ctx().clone();
        let labels = coset_labels(ctx.p(), c);
        let index = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        Ok(InducedRep { ctx, c, theta1: theta1.clone(), theta2: theta2.clone(), labels, index })
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn level(&self) -> u32 {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[CosetLabel] {
        &self.labels
    }

    pub fn index_of(&self, l: &CosetLabel) -> usize {
        self.index[l]
    }

    /// `θ(j)` for `j ∈ J_c`.
    pub fn theta(&self, j: &FiniteMatrix) -> Result<FieldElement> {
        Ok(self.theta1.eval_unit(j.a as i64)?.mul(&self.theta2.eval_unit(j.d as i64)?))
    }

    /// The action of `g ∈ K` as a monomial matrix: entry `i` is the pair
    /// `(column, coefficient)` of the only nonzero entry of row `i`.
    pub fn monomial(&self, g: &FiniteMatrix) -> Result<Vec<(usize, FieldElement)>> {
        let g = g.reduce(self.c);
        let p = self.ctx.p();
        self.labels
            .iter()
            .map(|l| {
                let x = l.representative(p, self.c).mul(&g);
                let (l2, j) = coset_decompose(&x, self.c)?;
                Ok((self.index[&l2], self.theta(&j)?))
            })
            .collect()
    }

    pub fn matrix(&self, g: &FiniteMatrix) -> Result<ExactMatrix> {
        let mono = self.monomial(g)?;
        let mut m = ExactMatrix::zeros(&self.ctx, self.dim(), self.dim());
        for (i, (j, v)) in mono.into_iter().enumerate() {
            m[(i, j)] = v;
        }
        Ok(m)
    }

    /// `f(x)` read off from the coordinates of `f` in the label basis.
    pub fn eval(&self, f: &[FieldElement], x: &FiniteMatrix) -> Result<FieldElement> {
        let (l, j) = coset_decompose(&x.reduce(self.c), self.c)?;
        Ok(self.theta(&j)?.mul(&f[self.index[&l]]))
    }

    /// Module structure with the given named elements of `K`.
    pub fn module(&self, gens: &[(String, FiniteMatrix)], central: &FieldElement) -> Result<ModuleWithAction> {
        let actions = gens.iter().map(|(n, g)| Ok((n.clone(), self.matrix(g)?))).collect::<Result<_>>()?;
        Ok(ModuleWithAction {
            labels: self.labels.iter().map(|l| l.to_string()).collect(),
            actions,
            central_scalar: central.clone(),
        })
    }
}

/// `W = Sym^{k-2} L^2` with basis `x^{n-i} y^i` (`n = k-2`), where `g` acts
/// by `(g·P)(x, y) = P((x, y) g)`, i.e. `x ↦ a x + c y`, `y ↦ b x + d y`.
#[derive(Clone, Debug)]
pub struct SymPower {
    ctx: Arc<FieldContext>,
    k: u32,
}

impl SymPower {
    pub fn new(ctx: &Arc<FieldContext>, k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidInput(format!("weight k = {k} must be at least 2")));
        }
        Ok(SymPower { ctx: ctx.clone(), k })
    }

    pub fn dim(&self) -> usize {
        (self.k - 1) as usize
    }

    pub fn weight(&self) -> u32 {
        self.k
    }

    pub fn matrix(&self, g: &Mat2) -> ExactMatrix {
        let n = self.dim() - 1;
        let zero = FieldElement::zero(&self.ctx);
        let one = FieldElement::one(&self.ctx);
        // coefficient vectors indexed by the power of y
        let times = |poly: &[FieldElement], alpha: &FieldElement, beta: &FieldElement| {
            let mut out = vec![zero.clone(); poly.len() + 1];
            for (j, c) in poly.iter().enumerate() {
                if c.is_exact_zero() {
                    continue;
                }
                out[j] = out[j].add(&c.mul(alpha));
                out[j + 1] = out[j + 1].add(&c.mul(beta));
            }
            out
        };
        let mut m = ExactMatrix::zeros(&self.ctx, n + 1, n + 1);
        for i in 0..=n {
            let mut poly = vec![one.clone()];
            for _ in 0..n - i {
                poly = times(&poly, &g.a, &g.c);
            }
            for _ in 0..i {
                poly = times(&poly, &g.b, &g.d);
            }
            for (j, c) in poly.into_iter().enumerate() {
                m[(j, i)] = c;
            }
        }
        m
    }

    /// The scalar by which the central element `p` acts: `p^{k-2}`.
    pub fn central_scalar(&self) -> FieldElement {
        FieldElement::pi_pow(&self.ctx, (self.ctx.e() * (self.k - 2)) as i64)
    }

    pub fn module(&self, gens: &[(String, Mat2)]) -> ModuleWithAction {
        ModuleWithAction {
            labels: (0..self.dim()).map(|i| format!("x^{}y^{}", self.dim() - 1 - i, i)).collect(),
            actions: gens.iter().map(|(n, g)| (n.clone(), self.matrix(g))).collect(),
            central_scalar: self.central_scalar(),
        }
    }
}
