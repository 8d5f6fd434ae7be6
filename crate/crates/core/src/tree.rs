//! Truncations of the complex `c-Ind_{𝔎_1}^G(D_1 ⊗ δ) → c-Ind_{𝔎_0}^G D_0`
//! to finite balls of the Bruhat–Tits tree of `GL_2(Q_p)`.
//!
//! Vertices are cosets `g𝔎_0` with canonical representatives
//! `[[p^n, b], [0, 1]]`, `b ∈ Q_p / p^n Z_p`; edges are cosets `g𝔎_1` with
//! endpoints `g𝔎_0` and `gΠ𝔎_0`. A basis element `[g, v]` of a compactly
//! induced module is the function supported on the coset of `g^{-1}`, so
//! that `h·[g, v] = [hg, v]` and `[gk, v] = [g, k·v]`.
//!
//! The boundary is `∂[g, v] = [g, r(v)] - [gΠ, r(Π^{-1} v)]`: the unique
//! `𝔎_1`-equivariant extension of `r` when `Π` acts on `D_1 ⊗ δ` with the
//! sign `δ(Π) = -1`.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::diagrams::{Diagram, IntegralDiagram};
use crate::error::{Error, Result};
use crate::gl2::Mat2;
use crate::linalg::{ExactMatrix, Invariant};
use crate::local_field::{FieldContext, FieldElement};

pub type Rational = Ratio<i128>;

/// Largest radius `enumerate_ball` accepts unless told otherwise.
pub const DEFAULT_MAX_RADIUS: u32 = 6;

fn vp_int(mut n: i128, p: i128) -> i64 {
    debug_assert!(n != 0);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// `p`-adic valuation of a rational; `None` for zero.
pub fn vp(x: &Rational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let p = p as i128;
    Some(vp_int(*x.numer(), p) - vp_int(*x.denom(), p))
}

fn pow_q(p: u64, e: i64) -> Rational {
    let base = Rational::from_integer(p as i128);
    if e >= 0 {
        base.pow(e as i32)
    } else {
        base.recip().pow((-e) as i32)
    }
}

fn inv_mod(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    s0.rem_euclid(m)
}

/// Canonical representative of `x mod p^n Z_p` of the form `p^v · r` with
/// `0 ≤ r < p^{n-v}`.
fn reduce_mod_pn(x: &Rational, p: u64, n: i64) -> Rational {
    let Some(v) = vp(x, p) else { return Rational::zero() };
    if v >= n {
        return Rational::zero();
    }
    let unit = x / pow_q(p, v);
    let m = (p as i128).pow((n - v) as u32);
    let r = (unit.numer().rem_euclid(m) * inv_mod(*unit.denom(), m)).rem_euclid(m);
    pow_q(p, v) * Rational::from_integer(r)
}

/// A `2 × 2` matrix over `Q`, used for exact tree bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMat {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl QMat {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> QMat {
        QMat { a, b, c, d }
    }

    pub fn from_ints(e: [i128; 4]) -> QMat {
        let q = Rational::from_integer;
        QMat::new(q(e[0]), q(e[1]), q(e[2]), q(e[3]))
    }

    pub fn identity() -> QMat {
        QMat::from_ints([1, 0, 0, 1])
    }

    pub fn pi(p: u64) -> QMat {
        QMat::from_ints([0, 1, p as i128, 0])
    }

    pub fn s() -> QMat {
        QMat::from_ints([0, 1, 1, 0])
    }

    pub fn scalar(x: Rational) -> QMat {
        QMat::new(x, Rational::zero(), Rational::zero(), x)
    }

    pub fn mul(&self, o: &QMat) -> QMat {
        QMat::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn det(&self) -> Rational {
        self.a * self.d - self.b * self.c
    }

    pub fn inv(&self) -> Result<QMat> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::NotInvertible("singular 2x2 matrix".into()));
        }
        Ok(QMat::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    fn entries(&self) -> [&Rational; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// `(-1)^{v_p(det)}`.
    pub fn delta(&self, p: u64) -> i64 {
        match vp(&self.det(), p) {
            Some(v) if v % 2 != 0 => -1,
            _ => 1,
        }
    }

    /// Writes an element of `𝔎_0 = KZ` as `p^m · k` with `k ∈ GL_2(Z_p)`.
    pub fn split_center(&self, p: u64) -> Result<(i64, QMat)> {
        let m = self
            .entries()
            .iter()
            .filter_map(|x| vp(x, p))
            .min()
            .ok_or_else(|| Error::NotInvertible("zero matrix".into()))?;
        let f = pow_q(p, -m);
        let k = QMat::new(self.a * f, self.b * f, self.c * f, self.d * f);
        if vp(&k.det(), p) != Some(0) {
            return Err(Error::InvalidInput(format!("{self:?} is not in KZ")));
        }
        Ok((m, k))
    }

    pub fn to_mat2(&self, ctx: &Arc<FieldContext>) -> Result<Mat2> {
        let conv = |x: &Rational| -> Result<FieldElement> {
            let n = i64::try_from(*x.numer()).map_err(|_| Error::Limit("matrix entry overflows i64".into()))?;
            let d = i64::try_from(*x.denom()).map_err(|_| Error::Limit("matrix entry overflows i64".into()))?;
            FieldElement::from_ratio(ctx, n, d)
        };
        Ok(Mat2::new(conv(&self.a)?, conv(&self.b)?, conv(&self.c)?, conv(&self.d)?))
    }
}

/// Canonical vertex `[[p^n, b], [0, 1]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexKey {
    pub n: i64,
    pub b: Rational,
}

impl VertexKey {
    pub fn matrix(&self, p: u64) -> QMat {
        QMat::new(pow_q(p, self.n), self.b, Rational::zero(), Rational::one())
    }

    /// Distance to the standard vertex `[[1, 0], [0, 1]]`.
    pub fn distance(&self, p: u64) -> i64 {
        let m = vp(&self.b, p).map_or(self.n, |v| v.min(self.n));
        self.n - 2 * m.min(0)
    }
}

/// Writes `h = g κ` with `g` a canonical vertex representative and
/// `κ ∈ 𝔎_0`.
pub fn resolve_vertex(h: &QMat, p: u64) -> Result<(VertexKey, QMat)> {
    if h.det().is_zero() {
        return Err(Error::NotInvertible("singular group element".into()));
    }
    // track h · t = canonical
    let mut cur = h.clone();
    let mut t = QMat::identity();
    let swap = cur.d.is_zero() || (!cur.c.is_zero() && vp(&cur.c, p) < vp(&cur.d, p));
    if swap {
        cur = cur.mul(&QMat::s());
        t = t.mul(&QMat::s());
    }
    let clear = QMat::new(Rational::one(), Rational::zero(), -cur.c / cur.d, Rational::one());
    cur = cur.mul(&clear);
    t = t.mul(&clear);
    let sc = QMat::scalar(cur.d.recip());
    cur = cur.mul(&sc);
    t = t.mul(&sc);
    let n = vp(&cur.a, p).expect("invertible");
    let unit = cur.a / pow_q(p, n);
    let du = QMat::new(unit.recip(), Rational::zero(), Rational::zero(), Rational::one());
    cur = cur.mul(&du);
    t = t.mul(&du);
    let b0 = reduce_mod_pn(&cur.b, p, n);
    let shift = QMat::new(Rational::one(), -(cur.b - b0) / cur.a, Rational::zero(), Rational::one());
    t = t.mul(&shift);
    let key = VertexKey { n, b: b0 };
    debug_assert_eq!(h.mul(&t), key.matrix(p));
    Ok((key, t.inv()?))
}

/// Vertices within distance `R` of the standard vertex and the edges
/// joining them.
#[derive(Clone, Debug)]
pub struct TreeBall {
    p: u64,
    radius: u32,
    vertices: Vec<VertexKey>,
    edges: Vec<QMat>,
    index: HashMap<VertexKey, usize>,
}

/// Representatives of `K / I`.
fn k_mod_iwahori(p: u64) -> Vec<QMat> {
    let mut reps = vec![QMat::s()];
    reps.extend((0..p as i128).map(|g| QMat::from_ints([1, 0, g, 1])));
    reps
}

impl TreeBall {
    pub fn enumerate(p: u64, radius: u32) -> Result<TreeBall> {
        TreeBall::enumerate_capped(p, radius, DEFAULT_MAX_RADIUS)
    }

    pub fn enumerate_capped(p: u64, radius: u32, max_radius: u32) -> Result<TreeBall> {
        if p == 2 {
            return Err(Error::EvenPrime);
        }
        if radius > max_radius {
            return Err(Error::Limit(format!("radius {radius} exceeds the cap {max_radius}")));
        }
        let root = VertexKey { n: 0, b: Rational::zero() };
        let mut ball = TreeBall { p, radius, vertices: vec![root.clone()], edges: vec![], index: HashMap::new() };
        ball.index.insert(root, 0);
        let mut queue = VecDeque::from([(0usize, 0u32)]);
        let pi = QMat::pi(p);
        while let Some((v, dist)) = queue.pop_front() {
            if dist == radius {
                continue;
            }
            let g = ball.vertices[v].matrix(p);
            for k in k_mod_iwahori(p) {
                let e = g.mul(&k);
                let (key, _) = resolve_vertex(&e.mul(&pi), p)?;
                if ball.index.contains_key(&key) {
                    continue;
                }
                let idx = ball.vertices.len();
                ball.index.insert(key.clone(), idx);
                ball.vertices.push(key);
                ball.edges.push(e);
                queue.push_back((idx, dist + 1));
            }
        }
        Ok(ball)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn vertices(&self) -> &[VertexKey] {
        &self.vertices
    }

    pub fn edges(&self) -> &[QMat] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// `1 + (p+1)(p^R - 1)/(p - 1)`.
    pub fn expected_vertex_count(p: u64, radius: u32) -> usize {
        1 + ((p + 1) * (p.pow(radius) - 1) / (p - 1)) as usize
    }

    /// The stored vertex of `h𝔎_0` and `κ ∈ 𝔎_0` with `h = g_vertex κ`;
    /// `None` when the vertex lies outside the ball.
    pub fn locate(&self, h: &QMat) -> Result<Option<(usize, QMat)>> {
        let (key, kappa) = resolve_vertex(h, self.p)?;
        Ok(self.index.get(&key).map(|&i| (i, kappa)))
    }

    /// The two endpoint vertices of each edge.
    pub fn edge_endpoints(&self) -> Result<Vec<(usize, usize)>> {
        let pi = QMat::pi(self.p);
        self.edges
            .iter()
            .map(|e| {
                let a = self.locate(e)?.ok_or_else(|| Error::AxiomFailure("edge leaves the ball".into()))?;
                let b = self.locate(&e.mul(&pi))?.ok_or_else(|| Error::AxiomFailure("edge leaves the ball".into()))?;
                Ok((a.0, b.0))
            })
            .collect()
    }
}

/// Action of `κ = p^m k ∈ 𝔎_0` on `D_0 ⊗ W`.
fn rho0_kz(d: &Diagram, kappa: &QMat) -> Result<ExactMatrix> {
    let p = d.ctx().p();
    let (m, k) = kappa.split_center(p)?;
    Ok(d.rho0(&k.to_mat2(d.ctx())?)?.scale(&d.central_scalar().pow(m)?))
}

/// A chain in `c-Ind D_0`: one `dim D_0 × cols` block per touched vertex.
pub type Chain = Vec<(usize, ExactMatrix)>;

fn normalize(chain: Chain) -> Chain {
    let mut out: Vec<(usize, ExactMatrix)> = Vec::new();
    for (v, m) in chain {
        match out.iter_mut().find(|(w, _)| *w == v) {
            Some((_, acc)) => *acc = acc.add(&m),
            None => out.push((v, m)),
        }
    }
    out.retain(|(_, m)| !m.is_zero());
    out.sort_by_key(|(v, _)| *v);
    out
}

fn chains_equal(a: &Chain, b: &Chain) -> bool {
    let (a, b) = (normalize(a.clone()), normalize(b.clone()));
    a.len() == b.len() && a.iter().zip(&b).all(|((v, x), (w, y))| v == w && x.equals(y))
}

/// The boundary `∂` of a diagram on a ball, with the sign of the far
/// endpoint as a parameter (the correct complex uses `-1`).
pub struct Boundary<'a> {
    diagram: &'a Diagram,
    ball: &'a TreeBall,
    far_sign: i64,
    pi_inv: ExactMatrix,
}

impl<'a> Boundary<'a> {
    pub fn new(diagram: &'a Diagram, ball: &'a TreeBall) -> Result<Boundary<'a>> {
        Boundary::with_far_sign(diagram, ball, -1)
    }

    pub fn with_far_sign(diagram: &'a Diagram, ball: &'a TreeBall, far_sign: i64) -> Result<Boundary<'a>> {
        if diagram.ctx().p() != ball.p() {
            return Err(Error::ContextMismatch);
        }
        let pi_inv = diagram.pi_matrix().scale(&diagram.central_scalar().inv()?);
        Ok(Boundary { diagram, ball, far_sign, pi_inv })
    }

    /// `∂[h, ·]` as a chain of `dim D_0 × dim D_1` blocks, or `None` when an
    /// endpoint of the edge `h𝔎_1` is outside the ball.
    pub fn edge_chain(&self, h: &QMat) -> Result<Option<Chain>> {
        let d = self.diagram;
        let Some((v0, k0)) = self.ball.locate(h)? else { return Ok(None) };
        let Some((v1, k1)) = self.ball.locate(&h.mul(&QMat::pi(self.ball.p())))? else { return Ok(None) };
        let near = rho0_kz(d, &k0)?.mul(d.r());
        let far = rho0_kz(d, &k1)?.mul(d.r()).mul(&self.pi_inv).scale(&FieldElement::from_int(d.ctx(), self.far_sign));
        Ok(Some(vec![(v0, near), (v1, far)]))
    }

    /// For each stored edge, its two endpoint blocks.
    pub fn edge_blocks(&self) -> Result<Vec<Chain>> {
        self.ball
            .edges()
            .iter()
            .map(|e| self.edge_chain(e)?.ok_or_else(|| Error::AxiomFailure("edge leaves the ball".into())))
            .collect()
    }

    /// Exact rank of `∂` using the tree structure: an edge whose block at a
    /// leaf vertex has full column rank contributes `dim D_1` and can be
    /// removed together with that leaf (row operations at the leaf clear
    /// the edge's other block). Whatever cannot be peeled is ranked densely.
    pub fn rank(&self) -> Result<usize> {
        let blocks = self.edge_blocks()?;
        let nv = self.ball.n_vertices();
        let d1 = self.diagram.dim1();
        let mut alive = vec![true; blocks.len()];
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (j, chain) in blocks.iter().enumerate() {
            for (v, _) in chain {
                incident[*v].push(j);
            }
        }
        let mut rank = 0;
        let mut progress = true;
        while progress {
            progress = false;
            for v in 0..nv {
                let live: Vec<usize> = incident[v].iter().copied().filter(|&j| alive[j]).collect();
                if live.len() != 1 {
                    continue;
                }
                let j = live[0];
                let block = &blocks[j].iter().find(|(w, _)| *w == v).expect("incident").1;
                if block.rank() == d1 {
                    alive[j] = false;
                    rank += d1;
                    progress = true;
                }
            }
        }
        let rest: Vec<usize> = (0..blocks.len()).filter(|&j| alive[j]).collect();
        if rest.is_empty() {
            return Ok(rank);
        }
        let d0 = self.diagram.dim0();
        let mut m = ExactMatrix::zeros(self.diagram.ctx(), nv * d0, rest.len() * d1);
        for (t, &j) in rest.iter().enumerate() {
            for (v, block) in normalize(blocks[j].clone()) {
                for a in 0..d0 {
                    for b in 0..d1 {
                        m[(v * d0 + a, t * d1 + b)] = block[(a, b)].clone();
                    }
                }
            }
        }
        Ok(rank + m.rank())
    }

    /// The full matrix, rows indexed by `(vertex, D_0 coordinate)` and
    /// columns by `(edge, D_1 coordinate)`.
    pub fn matrix(&self) -> Result<ExactMatrix> {
        let d = self.diagram;
        let (d0, d1) = (d.dim0(), d.dim1());
        let mut m = ExactMatrix::zeros(d.ctx(), self.ball.n_vertices() * d0, self.ball.n_edges() * d1);
        for (j, e) in self.ball.edges().iter().enumerate() {
            let chain = self.edge_chain(e)?.ok_or_else(|| Error::AxiomFailure("edge leaves the ball".into()))?;
            for (v, block) in chain {
                for a in 0..d0 {
                    for b in 0..d1 {
                        let x = &m[(v * d0 + a, j * d1 + b)];
                        m[(v * d0 + a, j * d1 + b)] = x.add(&block[(a, b)]);
                    }
                }
            }
        }
        Ok(m)
    }

    /// `∂` written in the lattice bases of an integral structure, one block
    /// at a time.
    pub fn integral_matrix(&self, id: &IntegralDiagram) -> Result<ExactMatrix> {
        let d = self.diagram;
        let (d0, d1) = (d.dim0(), d.dim1());
        let l0_inv = id.l0().basis().inverse()?;
        let l1 = id.l1().basis();
        let mut m = ExactMatrix::zeros(d.ctx(), self.ball.n_vertices() * d0, self.ball.n_edges() * d1);
        for (j, e) in self.ball.edges().iter().enumerate() {
            let chain = self.edge_chain(e)?.ok_or_else(|| Error::AxiomFailure("edge leaves the ball".into()))?;
            for (v, block) in normalize(chain) {
                let b = l0_inv.mul(&block).mul(l1);
                for x in 0..d0 {
                    for y in 0..d1 {
                        m[(v * d0 + x, j * d1 + y)] = b[(x, y)].clone();
                    }
                }
            }
        }
        if !m.is_integral() {
            return Err(Error::AxiomFailure("boundary is not integral in the lattice bases".into()));
        }
        Ok(m)
    }

    /// `h · c` for a chain `c`, or `None` if a vertex leaves the ball.
    fn translate(&self, h: &QMat, chain: &Chain) -> Result<Option<Chain>> {
        let p = self.ball.p();
        let mut out = Vec::with_capacity(chain.len());
        for (v, block) in chain {
            let g = self.ball.vertices()[*v].matrix(p);
            let Some((w, kappa)) = self.ball.locate(&h.mul(&g))? else { return Ok(None) };
            out.push((w, rho0_kz(self.diagram, &kappa)?.mul(block)));
        }
        Ok(Some(out))
    }

    /// Samples the relations `∂[gk, δ(k) k^{-1} v] = ∂[g, v]` for
    /// `k ∈ 𝔎_1` and `h ∂[g, v] = ∂[hg, v]` for `h` in `K` or `Π`.
    pub fn check_well_defined<R: Rng>(&self, samples: usize, rng: &mut R) -> Result<WellDefinedReport> {
        let d = self.diagram;
        let p = self.ball.p();
        let ctx = d.ctx();
        let c = d.params().c;
        let modulus = (p as i128).pow(c + 1);
        let mut report = WellDefinedReport::default();
        if self.ball.n_edges() == 0 {
            return Ok(report);
        }
        let random_unit = |rng: &mut R| loop {
            let u = rng.gen_range(1..modulus);
            if u % p as i128 != 0 {
                break u;
            }
        };
        for t in 0..samples {
            let e = &self.ball.edges()[rng.gen_range(0..self.ball.n_edges())];
            let base = self.edge_chain(e)?.expect("stored edge");
            let iw = QMat::from_ints([
                random_unit(rng),
                rng.gen_range(0..modulus),
                p as i128 * rng.gen_range(0..modulus),
                random_unit(rng),
            ]);
            // alternate between k ∈ I and k ∈ ΠI
            let with_pi = t % 2 == 1;
            let mut act = d.rho1(&iw.to_mat2(ctx)?)?;
            let mut k = iw;
            if with_pi {
                k = QMat::pi(p).mul(&k);
                act = d.pi_matrix().mul(&act);
            }
            let sign = k.delta(p);
            let v = act.inverse()?.scale(&FieldElement::from_int(ctx, sign));
            report.cocycle_samples += 1;
            match self.edge_chain(&e.mul(&k))? {
                Some(moved) => {
                    let moved: Chain = moved.into_iter().map(|(w, b)| (w, b.mul(&v))).collect();
                    if !chains_equal(&moved, &base) {
                        report.cocycle_failures += 1;
                    }
                }
                None => report.cocycle_failures += 1,
            }
            let h = if t % 3 == 2 {
                QMat::pi(p)
            } else {
                QMat::from_ints([random_unit(rng), rng.gen_range(0..modulus), 0, 1])
                    .mul(&QMat::from_ints([1, 0, rng.gen_range(0..modulus), 1]))
            };
            let (Some(lhs), Some(rhs)) = (self.translate(&h, &base)?, self.edge_chain(&h.mul(e))?) else {
                continue;
            };
            report.translation_samples += 1;
            if !chains_equal(&lhs, &rhs) {
                report.translation_failures += 1;
            }
        }
        Ok(report)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct WellDefinedReport {
    pub cocycle_samples: usize,
    pub cocycle_failures: usize,
    pub translation_samples: usize,
    pub translation_failures: usize,
}

impl WellDefinedReport {
    pub fn passed(&self) -> bool {
        self.cocycle_failures == 0 && self.translation_failures == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HomologyReport {
    pub radius: u32,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub rank: usize,
    pub ker_dim: usize,
    /// Smith invariants of the integral boundary, when an integral
    /// structure was supplied.
    pub coker_invariants: Option<Vec<String>>,
}

pub fn homology_report(d: &Diagram, ball: &TreeBall, integral: Option<&IntegralDiagram>) -> Result<HomologyReport> {
    let b = Boundary::new(d, ball)?;
    let rank = b.rank()?;
    let coker_invariants = match integral {
        Some(id) => {
            let inv = b.integral_matrix(id)?.smith_invariants()?;
            Some(summarize_invariants(&inv, ball.n_vertices() * d.dim0()))
        }
        None => None,
    };
    Ok(HomologyReport {
        radius: ball.radius(),
        n_vertices: ball.n_vertices(),
        n_edges: ball.n_edges(),
        rank,
        ker_dim: ball.n_edges() * d.dim1() - rank,
        coker_invariants,
    })
}

/// Nontrivial cokernel summands: `π^k` for `k > 0`, plus one `0` (free
/// summand) per missing pivot row.
fn summarize_invariants(inv: &[Invariant], rows: usize) -> Vec<String> {
    let mut out: Vec<String> =
        inv.iter().filter(|i| !matches!(i, Invariant::Power(0))).map(|i| i.to_string()).collect();
    out.extend(std::iter::repeat_n("0".to_string(), rows.saturating_sub(inv.len())));
    out
}

/// Sorted Smith invariants over `o_L / 𝔭^n`.
fn invariants_mod(inv: Vec<Invariant>, n: u32) -> Vec<Invariant> {
    let mut v: Vec<Invariant> = inv.into_iter().map(|i| i.reduce(n)).collect();
    v.sort();
    v
}

/// Compares the Smith invariants of `a` reduced mod `π^n` with those of
/// `reduced`, a matrix over `o_L / 𝔭^n` meant to be `a mod π^n`.
pub fn reduction_invariants_agree(a: &ExactMatrix, reduced: &ExactMatrix, n: u32) -> Result<bool> {
    let lhs = invariants_mod(a.smith_invariants()?, n);
    let rhs = invariants_mod(reduced.truncate(n as i64).smith_invariants()?, n);
    Ok(lhs == rhs)
}

/// Cokernel of `∂` over `o_L` then reduced, against the cokernel of
/// `∂ mod 𝔭^n`.
pub fn reduction_compat(id: &IntegralDiagram, ball: &TreeBall, n: u32) -> Result<bool> {
    let ctx = id.diagram().ctx();
    if n as i64 >= ctx.precision() as i64 * ctx.e() as i64 {
        return Err(Error::PrecisionExhausted(format!("n = {n} is beyond the working precision")));
    }
    let m = Boundary::new(id.diagram(), ball)?.integral_matrix(id)?;
    reduction_invariants_agree(&m, &m.truncate(n as i64), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_resolution_is_canonical() {
        let p = 3;
        let (key, kappa) = resolve_vertex(&QMat::pi(p), p).unwrap();
        assert_eq!(key, VertexKey { n: -1, b: Rational::zero() });
        assert_eq!(key.matrix(p).mul(&kappa), QMat::pi(p));
        // right multiplication by K and scalars does not move the vertex
        let g = QMat::from_ints([9, 5, 0, 1]);
        let k = QMat::from_ints([2, 7, 3, 5]);
        let (k1, _) = resolve_vertex(&g, p).unwrap();
        let (k2, _) = resolve_vertex(&g.mul(&k).mul(&QMat::scalar(Rational::new(1, 3))), p).unwrap();
        assert_eq!(k1, k2);
        assert_eq!(k1, VertexKey { n: 2, b: Rational::from_integer(5) });
        assert_eq!(k1.distance(p), 2);
    }

    #[test]
    fn reduce_mod_pn_matches_hand_values() {
        assert_eq!(reduce_mod_pn(&Rational::new(1, 2), 3, 2), Rational::from_integer(5));
        assert_eq!(reduce_mod_pn(&Rational::new(1, 3), 3, 1), Rational::new(1, 3));
        assert_eq!(reduce_mod_pn(&Rational::new(7, 3), 3, 1), Rational::new(7, 3));
        assert_eq!(reduce_mod_pn(&Rational::new(10, 3), 3, 1), Rational::new(1, 3));
        assert_eq!(reduce_mod_pn(&Rational::from_integer(9), 3, 2), Rational::zero());
    }

    #[test]
    fn ball_counts() {
        for p in [3, 5] {
            for r in 0..=3 {
                let b = TreeBall::enumerate(p, r).unwrap();
                assert_eq!(b.n_vertices(), TreeBall::expected_vertex_count(p, r));
                assert_eq!(b.n_edges() + 1, b.n_vertices());
                assert!(b.vertices().iter().all(|v| v.distance(p) <= r as i64));
                b.edge_endpoints().unwrap();
            }
        }
        assert!(matches!(TreeBall::enumerate(3, 9), Err(Error::Limit(_))));
        assert!(matches!(TreeBall::enumerate(2, 1), Err(Error::EvenPrime)));
    }
}
