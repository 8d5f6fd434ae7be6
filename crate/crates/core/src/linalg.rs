//! Dense exact matrices over `L`, Gaussian elimination, and Smith normal
//! form over `o_L` (or `o_L/𝔭^n` when the entries only carry `n` digits).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::local_field::{cmp_val, FieldContext, FieldElement};

#[derive(Clone)]
pub struct ExactMatrix {
    ctx: Arc<FieldContext>,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for ExactMatrix {
    type Output = FieldElement;
    fn index(&self, (i, j): (usize, usize)) -> &FieldElement {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ExactMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut FieldElement {
        &mut self.data[i * self.cols + j]
    }
}

impl ExactMatrix {
    pub fn zeros(ctx: &Arc<FieldContext>, rows: usize, cols: usize) -> Self {
        ExactMatrix { ctx: ctx.clone(), rows, cols, data: vec![FieldElement::zero(ctx); rows * cols] }
    }

    pub fn identity(ctx: &Arc<FieldContext>, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m[(i, i)] = FieldElement::one(ctx);
        }
        m
    }

    pub fn scalar(ctx: &Arc<FieldContext>, n: usize, s: &FieldElement) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m[(i, i)] = s.clone();
        }
        m
    }

    pub fn from_fn(
        ctx: &Arc<FieldContext>,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElement,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ExactMatrix { ctx: ctx.clone(), rows, cols, data }
    }

    /// Integer matrix given row by row.
    pub fn from_ints(ctx: &Arc<FieldContext>, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(ctx, r, c, |i, j| FieldElement::from_int(ctx, rows[i][j]))
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(ctx: &Arc<FieldContext>, rows: usize, cols: &[Vec<FieldElement>]) -> Self {
        Self::from_fn(ctx, rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(&self.ctx, self.rows, idx.len(), |i, j| self[(i, idx[j])].clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(&self.ctx, idx.len(), self.cols, |i, j| self[(idx[i], j)].clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.ctx, self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimensions");
        let mut out = Self::zeros(&self.ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_exact_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_exact_zero() {
                        continue;
                    }
                    let t = a.mul(b);
                    let cur = &out[(i, j)];
                    out[(i, j)] = cur.add(&t);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = FieldElement::zero(&self.ctx);
                for (j, x) in v.iter().enumerate() {
                    let a = &self[(i, j)];
                    if a.is_exact_zero() || x.is_exact_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(x));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(&self.ctx, self.rows, self.cols, |i, j| self[(i, j)].add(&other[(i, j)]))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(&self.ctx, self.rows, self.cols, |i, j| self[(i, j)].sub(&other[(i, j)]))
    }

    pub fn scale(&self, s: &FieldElement) -> Self {
        Self::from_fn(&self.ctx, self.rows, self.cols, |i, j| self[(i, j)].mul(s))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(&self.ctx, self.rows * r2, self.cols * c2, |i, j| {
            let a = &self[(i / r2, j / c2)];
            if a.is_exact_zero() {
                FieldElement::zero(&self.ctx)
            } else {
                a.mul(&other[(i % r2, j % c2)])
            }
        })
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(&self.ctx, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        Self::from_fn(&self.ctx, self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self[(i, j)].clone()
            } else {
                other[(i - self.rows, j)].clone()
            }
        })
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self::from_fn(&self.ctx, self.rows + other.rows, self.cols + other.cols, |i, j| {
            match (i < self.rows, j < self.cols) {
                (true, true) => self[(i, j)].clone(),
                (false, false) => other[(i - self.rows, j - self.cols)].clone(),
                _ => FieldElement::zero(&self.ctx),
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Entrywise equality at the available precision.
    pub fn equals(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.sub(other).is_zero()
    }

    /// Smallest `π`-valuation of an entry (`None` for the zero matrix).
    pub fn min_val(&self) -> Option<i64> {
        self.data.iter().filter_map(|x| x.val_pi()).min()
    }

    pub fn is_integral(&self) -> bool {
        self.min_val().is_none_or(|v| v >= 0)
    }

    /// Reduction modulo `π^n`: every entry truncated to absolute precision `n`.
    pub fn truncate(&self, n: i64) -> Self {
        Self::from_fn(&self.ctx, self.rows, self.cols, |i, j| self[(i, j)].truncate(n))
    }

    /// True when every entry of `self - other` has valuation at least `n`.
    pub fn congruent_mod(&self, other: &Self, n: i64) -> bool {
        self.sub(other).data.iter().all(|x| x.val_pi().is_none_or(|v| v >= n))
    }

    /// Smallest absolute precision of an entry.
    pub fn min_abs_precision(&self) -> i64 {
        self.data.iter().map(|x| x.abs_precision()).min().unwrap_or(i64::MAX)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[dst] -= f * row[src]`, skipping structural zeros.
    fn row_axpy(&mut self, dst: usize, src: usize, f: &FieldElement) {
        for j in 0..self.cols {
            let s = &self.data[src * self.cols + j];
            if s.is_exact_zero() {
                continue;
            }
            let t = f.mul(s);
            let d = &self.data[dst * self.cols + j];
            self.data[dst * self.cols + j] = d.sub(&t);
        }
    }

    fn col_axpy(&mut self, dst: usize, src: usize, f: &FieldElement) {
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src];
            if s.is_exact_zero() {
                continue;
            }
            let t = f.mul(s);
            let d = &self.data[i * self.cols + dst];
            self.data[i * self.cols + dst] = d.sub(&t);
        }
    }

    fn scale_col(&mut self, c: usize, f: &FieldElement) {
        for i in 0..self.rows {
            let x = &self.data[i * self.cols + c];
            self.data[i * self.cols + c] = x.mul(f);
        }
    }

    fn scale_row(&mut self, r: usize, f: &FieldElement) {
        for j in 0..self.cols {
            let x = &self.data[r * self.cols + j];
            self.data[r * self.cols + j] = x.mul(f);
        }
    }

    /// Reduced row echelon form over `L` with pivot columns.
    ///
    /// Pivots are chosen by minimal valuation in the column, which keeps the
    /// loss of `p`-adic precision as small as possible.
    pub fn rref(&self) -> (ExactMatrix, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let best = (r..a.rows)
                .filter(|&i| !a[(i, c)].is_zero())
                .min_by(|&i, &j| cmp_val(a[(i, c)].val_pi(), a[(j, c)].val_pi()));
            let Some(pr) = best else { continue };
            a.swap_rows(r, pr);
            let inv = a[(r, c)].inv().expect("nonzero pivot");
            a.scale_row(r, &inv);
            for i in 0..a.rows {
                if i != r && !a[(i, c)].is_zero() {
                    let f = a[(i, c)].clone();
                    a.row_axpy(i, r, &f);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    /// Rank over `L` by sparse-aware forward elimination.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let best = (r..a.rows)
                .filter(|&i| !a[(i, c)].is_zero())
                .min_by(|&i, &j| cmp_val(a[(i, c)].val_pi(), a[(j, c)].val_pi()));
            let Some(pr) = best else { continue };
            a.swap_rows(r, pr);
            let inv = a[(r, c)].inv().expect("nonzero pivot");
            let support: Vec<usize> = (c..a.cols).filter(|&j| !a[(r, j)].is_exact_zero()).collect();
            for i in r + 1..a.rows {
                if a[(i, c)].is_zero() {
                    continue;
                }
                let f = a[(i, c)].mul(&inv);
                for &j in &support {
                    let t = f.mul(&a[(r, j)]);
                    a[(i, j)] = a[(i, j)].sub(&t);
                }
            }
            r += 1;
        }
        r
    }

    /// Basis of the right kernel over `L`, as columns.
    pub fn kernel(&self) -> ExactMatrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = ExactMatrix::zeros(&self.ctx, self.cols, free.len());
        for (t, &fc) in free.iter().enumerate() {
            k[(fc, t)] = FieldElement::one(&self.ctx);
            for (row, &pc) in pivots.iter().enumerate() {
                k[(pc, t)] = r[(row, fc)].neg();
            }
        }
        k
    }

    /// Solves `self · X = rhs`; `None` when inconsistent.
    pub fn solve(&self, rhs: &ExactMatrix) -> Option<ExactMatrix> {
        assert_eq!(self.rows, rhs.rows);
        let aug = self.hstack(rhs);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = ExactMatrix::zeros(&self.ctx, self.cols, rhs.cols);
        for (row, &pc) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x[(pc, j)] = r[(row, self.cols + j)].clone();
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Result<ExactMatrix> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!("{}x{} is not square", self.rows, self.cols)));
        }
        let (_, pivots) = self.rref();
        if pivots.len() < self.rows {
            return Err(Error::NotInvertible("singular matrix".into()));
        }
        self.solve(&ExactMatrix::identity(&self.ctx, self.rows))
            .ok_or_else(|| Error::NotInvertible("singular matrix".into()))
    }

    /// A left inverse of a matrix with independent columns.
    pub fn left_inverse(&self) -> Result<ExactMatrix> {
        let (_, rows) = self.transpose().rref();
        if rows.len() < self.cols {
            return Err(Error::NotInvertible("columns are dependent".into()));
        }
        let square_inv = self.select_rows(&rows).inverse()?;
        let mut out = ExactMatrix::zeros(&self.ctx, self.cols, self.rows);
        for (t, &r) in rows.iter().enumerate() {
            for i in 0..self.cols {
                out[(i, r)] = square_inv[(i, t)].clone();
            }
        }
        Ok(out)
    }

    /// A maximal linearly independent subset of the columns.
    pub fn column_basis(&self) -> ExactMatrix {
        let (_, pivots) = self.rref();
        self.select_columns(&pivots)
    }

    /// Smith normal form over `o_L`: `U · A · V = D`.
    ///
    /// Entries must be integral. An entry that is only known to be zero
    /// modulo `π^n` counts as zero, so a matrix truncated to `n` digits
    /// yields the Smith form over `o_L/𝔭^n`.
    pub fn smith_normal_form(&self, with_transforms: bool) -> Result<SmithForm> {
        if !self.is_integral() {
            return Err(Error::NegativeValuation("Smith form needs integral entries".into()));
        }
        let (m, n) = (self.rows, self.cols);
        let mut a = self.clone();
        let mut u = with_transforms.then(|| ExactMatrix::identity(&self.ctx, m));
        let mut v = with_transforms.then(|| ExactMatrix::identity(&self.ctx, n));
        let mut u_inv = with_transforms.then(|| ExactMatrix::identity(&self.ctx, m));
        let mut invariants = Vec::with_capacity(m.min(n));
        for t in 0..m.min(n) {
            let mut best: Option<(usize, usize, i64)> = None;
            for i in t..m {
                for j in t..n {
                    if let Some(val) = a[(i, j)].val_pi() {
                        if best.is_none_or(|(_, _, b)| val < b) {
                            best = Some((i, j, val));
                        }
                    }
                }
            }
            let Some((pi, pj, val)) = best else {
                invariants.extend(std::iter::repeat_n(Invariant::Zero, m.min(n) - t));
                break;
            };
            a.swap_rows(t, pi);
            a.swap_cols(t, pj);
            if let Some(u) = u.as_mut() {
                u.swap_rows(t, pi);
            }
            if let Some(w) = u_inv.as_mut() {
                w.swap_cols(t, pi);
            }
            if let Some(v) = v.as_mut() {
                v.swap_cols(t, pj);
            }
            // normalize the pivot to exactly π^val
            let pivot_unit = a[(t, t)].mul(&FieldElement::pi_pow(&self.ctx, -val));
            let sc = pivot_unit.inv()?;
            a.scale_row(t, &sc);
            if let Some(u) = u.as_mut() {
                u.scale_row(t, &sc);
            }
            if let Some(w) = u_inv.as_mut() {
                w.scale_col(t, &pivot_unit);
            }
            let pinv = a[(t, t)].inv()?;
            for i in t + 1..m {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let f = a[(i, t)].mul(&pinv);
                a.row_axpy(i, t, &f);
                if let Some(u) = u.as_mut() {
                    u.row_axpy(i, t, &f);
                }
                if let Some(w) = u_inv.as_mut() {
                    w.col_axpy(t, i, &f.neg());
                }
            }
            for j in t + 1..n {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let f = a[(t, j)].mul(&pinv);
                a.col_axpy(j, t, &f);
                if let Some(v) = v.as_mut() {
                    v.col_axpy(j, t, &f);
                }
            }
            invariants.push(Invariant::Power(val as u32));
        }
        Ok(SmithForm { u, u_inv, d: a, v, invariants })
    }

    /// Rank of the `o_L`-module together with the Smith invariants.
    pub fn smith_invariants(&self) -> Result<Vec<Invariant>> {
        Ok(self.smith_normal_form(false)?.invariants)
    }
}

/// A Smith invariant: `π^k`, or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Invariant {
    Power(u32),
    Zero,
}

impl Invariant {
    /// Image of the invariant after reduction mod `π^n` (`π^k` with `k ≥ n`
    /// becomes zero).
    pub fn reduce(self, n: u32) -> Invariant {
        match self {
            Invariant::Power(k) if k < n => Invariant::Power(k),
            _ => Invariant::Zero,
        }
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Invariant::Power(k) => write!(f, "pi^{k}"),
            Invariant::Zero => write!(f, "0"),
        }
    }
}

pub struct SmithForm {
    pub u: Option<ExactMatrix>,
    pub u_inv: Option<ExactMatrix>,
    pub d: ExactMatrix,
    pub v: Option<ExactMatrix>,
    pub invariants: Vec<Invariant>,
}

/// Basis of the common fixed vectors `{v : g v = v for all g}`.
pub fn fixed_space(ctx: &Arc<FieldContext>, dim: usize, gens: &[ExactMatrix]) -> ExactMatrix {
    let id = ExactMatrix::identity(ctx, dim);
    let mut stacked = ExactMatrix::zeros(ctx, 0, dim);
    for g in gens {
        assert_eq!((g.rows(), g.cols()), (dim, dim));
        stacked = stacked.vstack(&g.sub(&id));
    }
    stacked.kernel()
}

/// Basis (as columns) of `span_L(S) ∩ o_L^n` for a column-independent `S`.
pub fn saturate(s: &ExactMatrix) -> Result<ExactMatrix> {
    let s = s.column_basis();
    let t = s.cols();
    if t == 0 {
        return Ok(s);
    }
    let shift = s.min_val().unwrap_or(0).min(0);
    let scaled = s.scale(&FieldElement::pi_pow(s.ctx(), -shift));
    let snf = scaled.smith_normal_form(true)?;
    let uinv = snf.u_inv.expect("transforms requested");
    Ok(uinv.select_columns(&(0..t).collect::<Vec<_>>()))
}
