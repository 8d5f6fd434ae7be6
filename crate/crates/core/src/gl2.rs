//! `2×2` matrices over `Z/p^n`, the congruence subgroups `K_m`, `I`, `I_m`
//! and `J_c = (K ∩ B) K_c`, coset labels for `J_c \ K`, and conjugation by
//! `Π = [[0,1],[p,0]]`.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::local_field::{inv_mod, FieldContext, FieldElement};

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn reduce(x: i64, m: u64) -> u64 {
    x.rem_euclid(m as i64) as u64
}

/// Largest `v ≤ cap` with `p^v | x` (`cap` when `x ≡ 0`).
fn val_p(x: u64, p: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    let mut y = x;
    while y % p == 0 && v < cap {
        y /= p;
        v += 1;
    }
    v
}

/// A matrix `[[a, b], [c, d]]` with entries in `Z/p^n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FiniteMatrix {
    p: u64,
    n: u32,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl fmt::Debug for FiniteMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]] mod {}^{}", self.a, self.b, self.c, self.d, self.p, self.n)
    }
}

impl FiniteMatrix {
    pub fn new(p: u64, n: u32, entries: [i64; 4]) -> Self {
        let m = p.pow(n);
        FiniteMatrix {
            p,
            n,
            a: reduce(entries[0], m),
            b: reduce(entries[1], m),
            c: reduce(entries[2], m),
            d: reduce(entries[3], m),
        }
    }

    pub fn identity(p: u64, n: u32) -> Self {
        Self::new(p, n, [1, 0, 0, 1])
    }

    /// The Weyl element `s = [[0,1],[1,0]]`.
    pub fn s(p: u64, n: u32) -> Self {
        Self::new(p, n, [0, 1, 1, 0])
    }

    pub fn e12(p: u64, n: u32, t: i64) -> Self {
        Self::new(p, n, [1, t, 0, 1])
    }

    pub fn e21(p: u64, n: u32, t: i64) -> Self {
        Self::new(p, n, [1, 0, t, 1])
    }

    pub fn diag(p: u64, n: u32, x: i64, y: i64) -> Self {
        Self::new(p, n, [x, 0, 0, y])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.n)
    }

    pub fn entries(&self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!((self.p, self.n), (o.p, o.n), "matrices at different levels");
        let m = self.modulus();
        let f = |x: u64, y: u64, z: u64, w: u64| (mulmod(x, y, m) + mulmod(z, w, m)) % m;
        FiniteMatrix {
            p: self.p,
            n: self.n,
            a: f(self.a, o.a, self.b, o.c),
            b: f(self.a, o.b, self.b, o.d),
            c: f(self.c, o.a, self.d, o.c),
            d: f(self.c, o.b, self.d, o.d),
        }
    }

    pub fn det(&self) -> u64 {
        let m = self.modulus();
        (mulmod(self.a, self.d, m) + m - mulmod(self.b, self.c, m)) % m
    }

    pub fn is_invertible(&self) -> bool {
        self.det() % self.p != 0
    }

    pub fn inv(&self) -> Result<Self> {
        let m = self.modulus();
        let di = inv_mod(self.det(), m).ok_or_else(|| Error::NotInvertible(format!("{self:?}")))?;
        Ok(FiniteMatrix {
            p: self.p,
            n: self.n,
            a: mulmod(self.d, di, m),
            b: mulmod(m - self.b % m, di, m) % m,
            c: mulmod(m - self.c % m, di, m) % m,
            d: mulmod(self.a, di, m),
        })
    }

    /// Image at a lower level.
    pub fn reduce(&self, n: u32) -> Self {
        assert!(n <= self.n);
        let m = self.p.pow(n);
        FiniteMatrix { p: self.p, n, a: self.a % m, b: self.b % m, c: self.c % m, d: self.d % m }
    }

    /// Some lift to a higher level (entries keep their integer representatives).
    pub fn lift(&self, n: u32) -> Self {
        assert!(n >= self.n);
        FiniteMatrix { n, ..*self }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.p, self.n)
    }

    fn v(&self, x: u64) -> u32 {
        val_p(x, self.p, self.n)
    }

    /// Membership in the image of a subgroup at this level.
    pub fn is_in(&self, s: Subgroup) -> bool {
        if !self.is_invertible() {
            return false;
        }
        let n = self.n;
        let one = |x: u64, m: u32| self.v((x + self.modulus() - 1) % self.modulus()) >= m.min(n);
        match s {
            Subgroup::K => true,
            Subgroup::KM(m) => one(self.a, m) && one(self.d, m) && self.v(self.b) >= m.min(n) && self.v(self.c) >= m.min(n),
            Subgroup::Iwahori => self.v(self.c) >= 1.min(n),
            Subgroup::IM(m) => {
                one(self.a, m) && one(self.d, m) && self.v(self.b) >= (m - 1).min(n) && self.v(self.c) >= m.min(n)
            }
            Subgroup::J(c) => self.v(self.c) >= c.min(n),
        }
    }

    /// `Π^{-1} g Π`, which for `Π² = p` central coincides with `Π g Π^{-1}`.
    ///
    /// The result is known one digit less than the input.
    pub fn conjugate_by_pi(&self) -> Result<Self> {
        if self.n < 2 {
            return Err(Error::PrecisionExhausted("conjugation by Π needs level ≥ 2".into()));
        }
        if self.c % self.p != 0 {
            return Err(Error::InvalidInput(format!("{self:?} is not in the Iwahori subgroup")));
        }
        let m = self.p.pow(self.n - 1);
        Ok(FiniteMatrix {
            p: self.p,
            n: self.n - 1,
            a: self.d % m,
            b: (self.c / self.p) % m,
            c: mulmod(self.p, self.b, m),
            d: self.a % m,
        })
    }

    /// Which Iwasawa cell `B I` or `B s I` contains the matrix.
    pub fn iwahori_side(&self) -> Side {
        if self.c % self.p == 0 {
            Side::One
        } else {
            Side::S
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    One,
    S,
}

/// Subgroups of `K = GL_2(Z_p)` seen at a finite level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subgroup {
    K,
    /// Principal congruence subgroup `1 + p^m M_2(Z_p)`.
    KM(u32),
    Iwahori,
    /// `[[1+p^m, p^{m-1}], [p^m, 1+p^m]]`.
    IM(u32),
    /// `(K ∩ B) K_c`: upper triangular modulo `p^c`.
    J(u32),
}

/// Smallest primitive root modulo `p²` (hence modulo every `p^n`).
pub fn primitive_root(p: u64) -> u64 {
    let m = p * p;
    let order = p * (p - 1);
    let mut factors = Vec::new();
    let mut t = order;
    let mut q = 2;
    while q * q <= t {
        if t % q == 0 {
            factors.push(q);
            while t % q == 0 {
                t /= q;
            }
        }
        q += 1;
    }
    if t > 1 {
        factors.push(t);
    }
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b, m);
            }
            b = mulmod(b, b, m);
            e >>= 1;
        }
        r
    };
    (2..m).find(|&g| g % p != 0 && factors.iter().all(|&f| pow(g, order / f) != 1)).expect("primitive root exists")
}

/// A generating set of the image of `s` in `GL_2(Z/p^n)`.
pub fn generators(s: Subgroup, p: u64, n: u32) -> Vec<FiniteMatrix> {
    let g = primitive_root(p) as i64;
    let pp = |k: u32| p.pow(k.min(n)) as i64;
    let one_plus = |k: u32| 1 + pp(k);
    let raw = match s {
        Subgroup::K => vec![
            FiniteMatrix::e12(p, n, 1),
            FiniteMatrix::e21(p, n, 1),
            FiniteMatrix::diag(p, n, g, 1),
            FiniteMatrix::diag(p, n, 1, g),
        ],
        Subgroup::KM(m) => vec![
            FiniteMatrix::e12(p, n, pp(m)),
            FiniteMatrix::e21(p, n, pp(m)),
            FiniteMatrix::diag(p, n, one_plus(m), 1),
            FiniteMatrix::diag(p, n, 1, one_plus(m)),
        ],
        Subgroup::Iwahori => vec![
            FiniteMatrix::e12(p, n, 1),
            FiniteMatrix::e21(p, n, pp(1)),
            FiniteMatrix::diag(p, n, g, 1),
            FiniteMatrix::diag(p, n, 1, g),
        ],
        Subgroup::IM(m) => vec![
            FiniteMatrix::e12(p, n, pp(m - 1)),
            FiniteMatrix::e21(p, n, pp(m)),
            FiniteMatrix::diag(p, n, one_plus(m), 1),
            FiniteMatrix::diag(p, n, 1, one_plus(m)),
        ],
        Subgroup::J(c) => vec![
            FiniteMatrix::e12(p, n, 1),
            FiniteMatrix::diag(p, n, g, 1),
            FiniteMatrix::diag(p, n, 1, g),
            FiniteMatrix::e21(p, n, pp(c)),
            FiniteMatrix::diag(p, n, one_plus(c), 1),
        ],
    };
    let mut out: Vec<FiniteMatrix> = Vec::new();
    for x in raw {
        if !x.is_identity() && !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// The subgroup generated by `gens` inside the finite group `GL_2(Z/p^n)`.
pub fn closure(p: u64, n: u32, gens: &[FiniteMatrix]) -> HashSet<FiniteMatrix> {
    let id = FiniteMatrix::identity(p, n);
    let mut seen = HashSet::from([id]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.mul(g);
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Every invertible matrix modulo `p^n`.
pub fn enumerate_gl2(p: u64, n: u32) -> Vec<FiniteMatrix> {
    let m = p.pow(n) as i64;
    let mut out = Vec::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let x = FiniteMatrix::new(p, n, [a, b, c, d]);
                    if x.is_invertible() {
                        out.push(x);
                    }
                }
            }
        }
    }
    out
}

/// A point of `P^1(Z/p^c)` labelling a coset in `J_c \ K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CosetLabel {
    /// `(γ : 1)` with `γ ∈ Z/p^c`.
    Affine(u64),
    /// `(1 : p γ')` with `γ' ∈ Z/p^{c-1}`.
    Infinity(u64),
}

impl fmt::Display for CosetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CosetLabel::Affine(g) => write!(f, "({g}:1)"),
            CosetLabel::Infinity(g) => write!(f, "(1:p*{g})"),
        }
    }
}

/// The canonical list of labels at level `c`: affine points first.
pub fn coset_labels(p: u64, c: u32) -> Vec<CosetLabel> {
    let mut v: Vec<CosetLabel> = (0..p.pow(c)).map(CosetLabel::Affine).collect();
    v.extend((0..p.pow(c - 1)).map(CosetLabel::Infinity));
    v
}

impl CosetLabel {
    /// Representative with bottom row `(γ, 1)` or `(1, pγ')`.
    pub fn representative(&self, p: u64, n: u32) -> FiniteMatrix {
        match *self {
            CosetLabel::Affine(g) => FiniteMatrix::new(p, n, [1, 0, g as i64, 1]),
            CosetLabel::Infinity(g) => FiniteMatrix::new(p, n, [0, 1, 1, (p * g) as i64]),
        }
    }

    /// The Iwasawa side of the coset.
    pub fn side(&self, p: u64) -> Side {
        match *self {
            CosetLabel::Affine(g) if g % p == 0 => Side::One,
            _ => Side::S,
        }
    }
}

/// Writes `x = j · rep(label)` with `j ∈ J_c`, working at the level of `x`.
pub fn coset_decompose(x: &FiniteMatrix, c: u32) -> Result<(CosetLabel, FiniteMatrix)> {
    if !x.is_invertible() {
        return Err(Error::NotInvertible(format!("{x:?}")));
    }
    let (p, n) = (x.p(), x.level());
    if c > n {
        return Err(Error::PrecisionExhausted(format!("level {c} above matrix level {n}")));
    }
    let mc = p.pow(c);
    let label = if x.d % p != 0 {
        let di = inv_mod(x.d % mc, mc).expect("unit");
        CosetLabel::Affine(mulmod(x.c % mc, di, mc))
    } else {
        let ci = inv_mod(x.c % mc, mc).expect("unit");
        let ratio = mulmod(x.d % mc, ci, mc);
        CosetLabel::Infinity((ratio / p) % p.pow(c - 1))
    };
    let j = x.mul(&label.representative(p, n).inv()?);
    debug_assert!(j.is_in(Subgroup::J(c)));
    Ok((label, j))
}

/// An element `p^z Π^ε k` of the normalizer of the Iwahori subgroup, with
/// `k ∈ K` seen at a finite level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtendedElement {
    pub central: i64,
    pub pi_power: u8,
    pub k: FiniteMatrix,
}

impl ExtendedElement {
    pub fn from_k(k: FiniteMatrix) -> Self {
        ExtendedElement { central: 0, pi_power: 0, k }
    }

    pub fn pi(p: u64, n: u32) -> Self {
        ExtendedElement { central: 0, pi_power: 1, k: FiniteMatrix::identity(p, n) }
    }

    /// `δ(g) = (-1)^ε`, the sign of the `Π`-component.
    pub fn delta(&self) -> i64 {
        if self.pi_power == 0 {
            1
        } else {
            -1
        }
    }

    /// Product, moving `Π` to the left through Iwahori elements (one digit
    /// of precision is lost per crossing).
    pub fn mul(&self, o: &Self) -> Result<Self> {
        let mut central = self.central + o.central;
        let (k1, k2) = if o.pi_power == 1 {
            let c = self.k.conjugate_by_pi()?;
            (c, o.k.reduce(c.level()))
        } else {
            let lv = self.k.level().min(o.k.level());
            (self.k.reduce(lv), o.k.reduce(lv))
        };
        let mut eps = self.pi_power + o.pi_power;
        if eps == 2 {
            eps = 0;
            central += 1;
        }
        Ok(ExtendedElement { central, pi_power: eps, k: k1.mul(&k2) })
    }
}

/// A `2×2` matrix over `L`, used for elements of `GL_2(Q_p) ⊂ GL_2(L)`.
#[derive(Clone, Debug)]
pub struct Mat2 {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
    pub d: FieldElement,
}

impl Mat2 {
    pub fn new(a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_ints(ctx: &Arc<FieldContext>, e: [i64; 4]) -> Self {
        let f = |x| FieldElement::from_int(ctx, x);
        Mat2::new(f(e[0]), f(e[1]), f(e[2]), f(e[3]))
    }

    pub fn identity(ctx: &Arc<FieldContext>) -> Self {
        Self::from_ints(ctx, [1, 0, 0, 1])
    }

    /// `Π = [[0,1],[p,0]]`.
    pub fn pi(ctx: &Arc<FieldContext>) -> Self {
        Self::from_ints(ctx, [0, 1, ctx.p() as i64, 0])
    }

    pub fn scalar(x: &FieldElement) -> Self {
        let z = FieldElement::zero(x.ctx());
        Mat2::new(x.clone(), z.clone(), z, x.clone())
    }

    /// Integer lift of a finite-level matrix.
    pub fn lift(ctx: &Arc<FieldContext>, m: &FiniteMatrix) -> Self {
        let e = m.entries();
        Self::from_ints(ctx, [e[0] as i64, e[1] as i64, e[2] as i64, e[3] as i64])
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        self.a.ctx()
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            &(&self.a * &o.a) + &(&self.b * &o.c),
            &(&self.a * &o.b) + &(&self.b * &o.d),
            &(&self.c * &o.a) + &(&self.d * &o.c),
            &(&self.c * &o.b) + &(&self.d * &o.d),
        )
    }

    pub fn det(&self) -> FieldElement {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn inv(&self) -> Result<Mat2> {
        let di = self.det().inv()?;
        Ok(Mat2::new(&self.d * &di, -&(&self.b * &di), -&(&self.c * &di), &self.a * &di))
    }

    pub fn scale(&self, s: &FieldElement) -> Mat2 {
        Mat2::new(&self.a * s, &self.b * s, &self.c * s, &self.d * s)
    }

    pub fn entries(&self) -> [&FieldElement; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn equals(&self, o: &Mat2) -> bool {
        self.entries().iter().zip(o.entries()).all(|(x, y)| x.equals(y))
    }

    pub fn is_integral(&self) -> bool {
        self.entries().iter().all(|x| x.is_integral())
    }

    /// Reduction of an integral matrix with `Q_p`-rational entries modulo `p^n`.
    pub fn to_finite(&self, n: u32) -> Result<FiniteMatrix> {
        let ctx = self.ctx();
        let mut out = [0i64; 4];
        for (slot, x) in out.iter_mut().zip(self.entries()) {
            let r = x.reduce_mod(n * ctx.e())?;
            let d = r.digits();
            if d[1..].iter().any(|&t| t != 0) {
                return Err(Error::InvalidInput(format!("{x} is not in Q_p")));
            }
            *slot = d[0] as i64;
        }
        Ok(FiniteMatrix::new(ctx.p(), n, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basic_ops() {
        let s = FiniteMatrix::s(3, 4);
        assert!(s.mul(&s).is_identity());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let x = FiniteMatrix::new(3, 4, [0; 4].map(|_| rng.gen_range(0..81)));
            if !x.is_invertible() {
                assert!(x.inv().is_err());
                continue;
            }
            // adjugate oracle
            let det = x.det();
            let di = inv_mod(det, 81).unwrap() as i64;
            let adj = FiniteMatrix::new(3, 4, [x.d as i64 * di, -(x.b as i64) * di, -(x.c as i64) * di, x.a as i64 * di]);
            assert_eq!(x.inv().unwrap(), adj);
            assert!(x.inv().unwrap().mul(&x).is_identity());
        }
    }

    #[test]
    fn membership_examples() {
        for m in 1..=4 {
            assert!(FiniteMatrix::identity(3, 4).is_in(Subgroup::KM(m)));
        }
        assert!(FiniteMatrix::new(3, 4, [1, 1, 3, 1]).is_in(Subgroup::IM(1)));
        let sing = FiniteMatrix::new(3, 4, [1, 1, 1, 1]);
        for s in [Subgroup::K, Subgroup::KM(1), Subgroup::Iwahori, Subgroup::IM(1), Subgroup::J(1)] {
            assert!(!sing.is_in(s));
        }
    }

    fn certify(s: Subgroup, p: u64, n: u32) {
        let gens = generators(s, p, n);
        let cl = closure(p, n, &gens);
        let direct: HashSet<FiniteMatrix> = enumerate_gl2(p, n).into_iter().filter(|x| x.is_in(s)).collect();
        assert_eq!(cl, direct, "{s:?} at level {n}");
    }

    #[test]
    fn generators_certified_by_closure() {
        assert_eq!(enumerate_gl2(3, 2).len(), 3888);
        for n in 1..=2 {
            certify(Subgroup::K, 3, n);
            certify(Subgroup::Iwahori, 3, n);
            certify(Subgroup::J(1), 3, n);
            for m in 1..=n {
                certify(Subgroup::KM(m), 3, n);
                certify(Subgroup::IM(m), 3, n);
            }
        }
        certify(Subgroup::J(2), 3, 2);
        assert_eq!(closure(3, 1, &generators(Subgroup::J(1), 3, 1)).len(), 12);
        // the image of I_c at level c degenerates to one generator
        assert_eq!(generators(Subgroup::IM(2), 3, 2), vec![FiniteMatrix::e12(3, 2, 3)]);
        let i1 = generators(Subgroup::IM(1), 3, 2);
        assert!(i1.contains(&FiniteMatrix::e12(3, 2, 1)));
        assert!(i1.contains(&FiniteMatrix::e21(3, 2, 3)));
    }

    #[test]
    fn coset_decomposition() {
        let (l, j) = coset_decompose(&FiniteMatrix::identity(3, 1), 1).unwrap();
        assert_eq!(l, CosetLabel::Affine(0));
        assert!(j.is_identity());
        assert_eq!(coset_decompose(&FiniteMatrix::s(3, 1), 1).unwrap().0, CosetLabel::Infinity(0));
        for c in 1..=2 {
            let n = c;
            let all = enumerate_gl2(3, n);
            let labels: HashSet<CosetLabel> = all.iter().map(|x| coset_decompose(x, c).unwrap().0).collect();
            assert_eq!(labels.len(), coset_labels(3, c).len());
            assert_eq!(labels.len() as u64, 3u64.pow(c) + 3u64.pow(c - 1));
            // bijection: |K| = |J_c| * #labels
            let jc = all.iter().filter(|x| x.is_in(Subgroup::J(c))).count();
            assert_eq!(jc * labels.len(), all.len());
            for x in &all {
                let (l, j) = coset_decompose(x, c).unwrap();
                assert!(j.is_in(Subgroup::J(c)));
                assert_eq!(j.mul(&l.representative(3, n)), *x);
                // the side is constant on the coset
                assert_eq!(x.iwahori_side(), l.side(3));
            }
        }
    }

    #[test]
    fn sides_at_level_one() {
        let labels = coset_labels(3, 1);
        let one = labels.iter().filter(|l| l.side(3) == Side::One).count();
        assert_eq!((one, labels.len() - one), (1, 3));
        assert_eq!(FiniteMatrix::identity(3, 1).iwahori_side(), Side::One);
        assert_eq!(FiniteMatrix::s(3, 1).iwahori_side(), Side::S);
    }

    #[test]
    fn pi_conjugation() {
        assert!(FiniteMatrix::identity(3, 3).conjugate_by_pi().unwrap().is_identity());
        let g = FiniteMatrix::new(3, 3, [1, 1, 3, 1]);
        assert_eq!(g.conjugate_by_pi().unwrap(), FiniteMatrix::new(3, 2, [1, 1, 3, 1]));
        assert!(FiniteMatrix::s(3, 3).conjugate_by_pi().is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for c in 1..=3u32 {
            for _ in 0..30 {
                let n = c + 2;
                let pc = 3i64.pow(c);
                let g = FiniteMatrix::new(
                    3,
                    n,
                    [1 + pc * rng.gen_range(0..9), 3i64.pow(c - 1) * rng.gen_range(0..9), pc * rng.gen_range(0..9), 1 + pc * rng.gen_range(0..9)],
                );
                assert!(g.is_in(Subgroup::IM(c)));
                let h = g.conjugate_by_pi().unwrap();
                assert!(h.is_in(Subgroup::IM(c)));
                let back = h.conjugate_by_pi().unwrap();
                assert_eq!(back, g.reduce(n - 2));
            }
        }
    }

    #[test]
    fn extended_elements() {
        let pi = ExtendedElement::pi(3, 4);
        let sq = pi.mul(&pi).unwrap();
        assert_eq!((sq.central, sq.pi_power), (1, 0));
        assert!(sq.k.is_identity());
        assert_eq!(pi.delta(), -1);
    }
}
