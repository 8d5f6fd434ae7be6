//! Exact arithmetic in finite extensions `L = Q_p[x]/(f)` at a fixed working
//! precision.
//!
//! Elements are stored in scaled form `π^v · u` with `u` a unit of `o_L`
//! known modulo `π^rel`. Every element carries its own certified precision:
//! cancellation in a sum shrinks the relative precision instead of silently
//! inventing digits, and a sum whose known digits all cancel becomes a zero
//! known only modulo some power of `π`.
//!
//! Only monogenic presentations are supported: either an Eisenstein
//! polynomial (`π = x`, totally ramified) or a lift of an irreducible
//! residue polynomial (`π = p`, unramified).

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 4;

/// Absolute precision used for exact zero.
const INFINITE: i64 = i64::MAX / 4;

type Digits = [u64; MAX_DEGREE];

/// How the field is presented.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolySpec {
    /// `L = Q_p`.
    Trivial,
    /// Monic polynomial, coefficients listed from the constant term up,
    /// leading 1 included.
    Monic(Vec<i64>),
}

impl PolySpec {
    /// Parses `"trivial"` or a comma separated coefficient list such as
    /// `"-3,0,1"` (constant term first) for `x^2 - 3`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("trivial") || s.is_empty() {
            return Ok(PolySpec::Trivial);
        }
        let coeffs = s
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidField(format!("bad coefficient list {s:?}: {e}")))?;
        Ok(PolySpec::Monic(coeffs))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Unramified,
    Eisenstein,
}

/// Immutable description of `L` and its arithmetic tables.
#[derive(Debug)]
pub struct FieldContext {
    p: u64,
    degree: usize,
    e: u32,
    f: u32,
    precision: u32,
    kind: Kind,
    coeff_digits: u32,
    modulus: u64,
    /// `x^d = -(c_0 + c_1 x + ... )`, these are `c_i mod p^P`.
    low_coeffs: Digits,
    /// Original integer coefficients, for display.
    poly: Vec<i64>,
    /// `g` with `x * g = p` (Eisenstein only).
    div_helper: Digits,
    residue_size: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn vp_u64(mut a: u64, p: u64) -> u32 {
    let mut v = 0;
    while a != 0 && a % p == 0 {
        a /= p;
        v += 1;
    }
    v
}

fn pow_u64(p: u64, e: u32) -> u64 {
    p.pow(e)
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn reduce_i64(a: i64, m: u64) -> u64 {
    let r = (a as i128).rem_euclid(m as i128);
    r as u64
}

/// Inverse of `a` modulo `m` for `gcd(a, m) = 1`.
pub(crate) fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Polynomial over `F_p`, low degree first, trimmed.
fn poly_mod_p(c: &[i64], p: u64) -> Vec<u64> {
    let mut v: Vec<u64> = c.iter().map(|&a| reduce_i64(a, p)).collect();
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

fn poly_rem_mod_p(num: &[u64], den: &[u64], p: u64) -> Vec<u64> {
    let mut r = num.to_vec();
    let dl = den.len();
    let lead_inv = inv_mod(den[dl - 1], p).expect("monic divisor");
    while r.len() >= dl {
        let t = mulmod(*r.last().unwrap(), lead_inv, p);
        let shift = r.len() - dl;
        for (i, &d) in den.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - mulmod(t, d, p)) % p;
        }
        r.pop();
        while r.len() > 1 && *r.last().unwrap() == 0 {
            r.pop();
        }
        if r.len() == 1 && r[0] == 0 {
            break;
        }
    }
    r
}

/// Brute-force irreducibility test over `F_p`: no monic factor of degree
/// at most `deg/2`.
pub(crate) fn irreducible_mod_p(c: &[i64], p: u64) -> bool {
    let f = poly_mod_p(c, p);
    let d = f.len() - 1;
    for k in 1..=d / 2 {
        let count = pow_u64(p, k as u32);
        for idx in 0..count {
            let mut g = vec![0u64; k + 1];
            let mut t = idx;
            for slot in g.iter_mut().take(k) {
                *slot = t % p;
                t /= p;
            }
            g[k] = 1;
            let r = poly_rem_mod_p(&f, &g, p);
            if r.iter().all(|&a| a == 0) {
                return false;
            }
        }
    }
    true
}

impl FieldContext {
    /// Builds a field context (`make_field`).
    pub fn new(p: u64, spec: PolySpec, precision: u32) -> Result<Arc<FieldContext>> {
        if p == 2 {
            return Err(Error::EvenPrime);
        }
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if precision == 0 {
            return Err(Error::InvalidField("precision must be at least 1".into()));
        }
        let (poly, kind, degree) = match spec {
            PolySpec::Trivial => (vec![0, 1], Kind::Unramified, 1usize),
            PolySpec::Monic(c) => {
                if c.len() < 3 {
                    return Err(Error::InvalidField(
                        "extension polynomial must have degree >= 2; use `trivial` for Q_p".into(),
                    ));
                }
                if *c.last().unwrap() != 1 {
                    return Err(Error::InvalidField("polynomial must be monic".into()));
                }
                let d = c.len() - 1;
                if d > MAX_DEGREE {
                    return Err(Error::InvalidField(format!("degree {d} exceeds {MAX_DEGREE}")));
                }
                let pi = p as i64;
                let eisenstein = c[..d].iter().all(|&a| a % pi == 0) && c[0] % (pi * pi) != 0;
                if eisenstein {
                    (c, Kind::Eisenstein, d)
                } else if irreducible_mod_p(&c, p) {
                    (c, Kind::Unramified, d)
                } else {
                    return Err(Error::InvalidField(format!(
                        "{c:?} is neither Eisenstein nor irreducible modulo {p}"
                    )));
                }
            }
        };
        let (e, f) = match kind {
            Kind::Eisenstein => (degree as u32, 1),
            Kind::Unramified => (1, degree as u32),
        };
        let coeff_digits = precision.div_ceil(e) + 2;
        let modulus = (p as u128).checked_pow(coeff_digits);
        let modulus = match modulus {
            Some(m) if m < (1u128 << 62) => m as u64,
            _ => {
                return Err(Error::InvalidField(format!(
                    "precision {precision} too large for p = {p} (p^{coeff_digits} must fit in 62 bits)"
                )))
            }
        };
        let mut low_coeffs = [0u64; MAX_DEGREE];
        for i in 0..degree {
            low_coeffs[i] = reduce_i64(poly[i], modulus);
        }
        let mut ctx = FieldContext {
            p,
            degree,
            e,
            f,
            precision,
            kind,
            coeff_digits,
            modulus,
            low_coeffs,
            poly: poly.clone(),
            div_helper: [0; MAX_DEGREE],
            residue_size: pow_u64(p, f),
        };
        if kind == Kind::Eisenstein {
            // x * h = -c_0 with h = x^{e-1} + c_{e-1} x^{e-2} + ... + c_1.
            let mut h = [0u64; MAX_DEGREE];
            h[degree - 1] = 1;
            for i in 1..degree {
                h[i - 1] = reduce_i64(poly[i], modulus);
            }
            let u0 = poly[0] / p as i64;
            let u0 = reduce_i64(-u0, modulus);
            let u0_inv = inv_mod(u0, modulus).expect("Eisenstein constant term is p times a unit");
            for slot in h.iter_mut().take(degree) {
                *slot = mulmod(*slot, u0_inv, modulus);
            }
            ctx.div_helper = h;
        }
        Ok(Arc::new(ctx))
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    /// Ramification index.
    pub fn e(&self) -> u32 {
        self.e
    }
    /// Residue degree.
    pub fn f_res(&self) -> u32 {
        self.f
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    /// Working precision `N` in `π`-digits.
    pub fn precision(&self) -> u32 {
        self.precision
    }
    pub fn residue_size(&self) -> u64 {
        self.residue_size
    }
    pub fn is_trivial(&self) -> bool {
        self.degree == 1
    }
    /// Number of `p`-adic digits needed to reach `N` `π`-digits.
    pub fn p_digits(&self) -> u32 {
        self.precision.div_ceil(self.e)
    }

    pub fn describe(&self) -> String {
        if self.degree == 1 {
            format!("Q_{}", self.p)
        } else {
            let kind = match self.kind {
                Kind::Eisenstein => "eisenstein",
                Kind::Unramified => "unramified",
            };
            format!("Q_{}[x]/({:?}) {kind}", self.p, self.poly)
        }
    }

    // ---- digit arithmetic -------------------------------------------------

    fn d_add(&self, a: &Digits, b: &Digits) -> Digits {
        let m = self.modulus;
        let mut r = [0; MAX_DEGREE];
        for i in 0..self.degree {
            r[i] = (a[i] + b[i]) % m;
        }
        r
    }

    fn d_neg(&self, a: &Digits) -> Digits {
        let m = self.modulus;
        let mut r = [0; MAX_DEGREE];
        for i in 0..self.degree {
            r[i] = (m - a[i]) % m;
        }
        r
    }

    fn d_mul(&self, a: &Digits, b: &Digits) -> Digits {
        let d = self.degree;
        let m = self.modulus;
        if d == 1 {
            let mut r = [0; MAX_DEGREE];
            r[0] = mulmod(a[0], b[0], m);
            return r;
        }
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..d {
            if a[i] == 0 {
                continue;
            }
            for j in 0..d {
                prod[i + j] = (prod[i + j] + mulmod(a[i], b[j], m)) % m;
            }
        }
        for i in (d..2 * d - 1).rev() {
            let t = prod[i];
            if t == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..d {
                let sub = mulmod(t, self.low_coeffs[j], m);
                prod[i - d + j] = (prod[i - d + j] + m - sub) % m;
            }
        }
        let mut r = [0; MAX_DEGREE];
        r[..d].copy_from_slice(&prod[..d]);
        r
    }

    fn d_scalar(&self, a: u64) -> Digits {
        let mut r = [0; MAX_DEGREE];
        r[0] = a % self.modulus;
        r
    }

    fn d_pi(&self) -> Digits {
        let mut r = [0; MAX_DEGREE];
        match self.kind {
            Kind::Unramified => r[0] = self.p,
            Kind::Eisenstein => r[1] = 1,
        }
        r
    }

    /// `π`-adic valuation of a digit vector (`None` when all digits vanish).
    fn d_val(&self, a: &Digits) -> Option<i64> {
        let mut best: Option<i64> = None;
        for i in 0..self.degree {
            if a[i] == 0 {
                continue;
            }
            let v = vp_u64(a[i], self.p) as i64;
            let v = match self.kind {
                Kind::Unramified => v,
                Kind::Eisenstein => self.e as i64 * v + i as i64,
            };
            best = Some(best.map_or(v, |b: i64| b.min(v)));
        }
        best
    }

    fn d_mul_pi_pow(&self, a: &Digits, t: u32) -> Digits {
        match self.kind {
            Kind::Unramified => {
                let s = (self.p as u128).pow(t.min(self.coeff_digits)) as u64 % self.modulus;
                let mut r = [0; MAX_DEGREE];
                for i in 0..self.degree {
                    r[i] = mulmod(a[i], s, self.modulus);
                }
                r
            }
            Kind::Eisenstein => {
                let pi = self.d_pi();
                let mut r = *a;
                for _ in 0..t {
                    r = self.d_mul(&r, &pi);
                }
                r
            }
        }
    }

    fn d_div_p_pow(&self, a: &Digits, t: u32) -> Digits {
        let s = pow_u64(self.p, t);
        let mut r = [0; MAX_DEGREE];
        for i in 0..self.degree {
            debug_assert!(a[i] % s == 0, "exact division by p^{t}");
            r[i] = a[i] / s;
        }
        r
    }

    /// Exact division by `π^t`; the caller guarantees divisibility.
    fn d_div_pi_pow(&self, a: &Digits, t: u32) -> Digits {
        match self.kind {
            Kind::Unramified => self.d_div_p_pow(a, t),
            Kind::Eisenstein => {
                let e = self.e;
                let mut r = self.d_div_p_pow(a, t / e);
                for _ in 0..t % e {
                    let y = self.d_mul(&r, &self.div_helper);
                    r = self.d_div_p_pow(&y, 1);
                }
                r
            }
        }
    }

    /// Canonical representative modulo `π^r`.
    fn d_canon(&self, a: &Digits, r: u32) -> Digits {
        let mut out = [0; MAX_DEGREE];
        for i in 0..self.degree {
            let digits = match self.kind {
                Kind::Unramified => r,
                Kind::Eisenstein => {
                    if r as usize <= i {
                        0
                    } else {
                        (r - i as u32).div_ceil(self.e)
                    }
                }
            };
            let digits = digits.min(self.coeff_digits);
            out[i] = if digits == 0 { 0 } else { a[i] % pow_u64(self.p, digits) };
        }
        out
    }

    fn d_pow(&self, a: &Digits, mut n: u64) -> Digits {
        let mut base = *a;
        let mut acc = self.d_scalar(1);
        while n > 0 {
            if n & 1 == 1 {
                acc = self.d_mul(&acc, &base);
            }
            base = self.d_mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    /// Inverse of a unit modulo `π^r` by Fermat seed plus Newton lifting.
    fn d_unit_inv(&self, u: &Digits, r: u32) -> Digits {
        let mut y = self.d_pow(u, self.residue_size - 2);
        let two = self.d_scalar(2);
        let mut known = 1u32;
        while known < r {
            let uy = self.d_mul(u, &y);
            let corr = self.d_add(&two, &self.d_neg(&uy));
            y = self.d_mul(&y, &corr);
            known = known.saturating_mul(2);
        }
        self.d_canon(&y, r)
    }
}

/// Valuation normalized by `val(p) = 1`; `Infinite` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(Ratio<i64>),
    Infinite,
}

impl Valuation {
    pub fn integer(n: i64) -> Self {
        Valuation::Finite(Ratio::from_integer(n))
    }
    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(r) => write!(f, "{r}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// An element `π^val · unit` of `L`, or a zero known modulo `π^val`.
#[derive(Clone)]
pub struct FieldElement {
    ctx: Arc<FieldContext>,
    val: i64,
    /// Number of known `π`-digits of the unit; 0 marks a zero.
    rel: u32,
    unit: Digits,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rel == 0 {
            return if self.val >= INFINITE {
                write!(f, "0")
            } else {
                write!(f, "O(pi^{})", self.val)
            };
        }
        let d = self.ctx.degree;
        if d == 1 {
            write!(f, "{}", self.unit[0])?;
        } else {
            write!(f, "(")?;
            for i in 0..d {
                if i > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "{}x^{i}", self.unit[i])?;
            }
            write!(f, ")")?;
        }
        if self.val != 0 {
            write!(f, "*pi^{}", self.val)?;
        }
        write!(f, " +O(rel {})", self.rel)
    }
}

impl FieldElement {
    fn make(ctx: &Arc<FieldContext>, val: i64, rel: u32, unit: Digits) -> Self {
        FieldElement { ctx: ctx.clone(), val, rel, unit }
    }

    /// Exact zero.
    pub fn zero(ctx: &Arc<FieldContext>) -> Self {
        Self::make(ctx, INFINITE, 0, [0; MAX_DEGREE])
    }

    /// Zero known modulo `π^abs`.
    pub fn zero_mod(ctx: &Arc<FieldContext>, abs: i64) -> Self {
        Self::make(ctx, abs.min(INFINITE), 0, [0; MAX_DEGREE])
    }

    pub fn one(ctx: &Arc<FieldContext>) -> Self {
        Self::from_int(ctx, 1)
    }

    /// Builds `π^v · u` from raw digits known to `rel` digits.
    fn from_digits(ctx: &Arc<FieldContext>, digits: Digits, abs_prec: i64) -> Self {
        match ctx.d_val(&digits) {
            Some(w) if w < abs_prec => {
                let unit = ctx.d_div_pi_pow(&digits, w as u32);
                let rel = (abs_prec - w).min(ctx.precision as i64) as u32;
                Self::make(ctx, w, rel, ctx.d_canon(&unit, rel))
            }
            _ => Self::zero_mod(ctx, abs_prec),
        }
    }

    pub fn from_int(ctx: &Arc<FieldContext>, n: i64) -> Self {
        if n == 0 {
            return Self::zero(ctx);
        }
        let p = ctx.p as i64;
        let mut v = 0i64;
        let mut m = n;
        while m % p == 0 {
            m /= p;
            v += 1;
        }
        let unit = ctx.d_scalar(reduce_i64(m, ctx.modulus));
        let rel = ctx.precision;
        let e = ctx.e as i64;
        Self::make(ctx, v * e, rel, ctx.d_canon(&unit, rel))
    }

    /// Exact rational `num / den`.
    pub fn from_ratio(ctx: &Arc<FieldContext>, num: i64, den: i64) -> Result<Self> {
        Self::from_int(ctx, num).div(&Self::from_int(ctx, den))
    }

    /// An integer residue known modulo `p^p_digits`.
    pub fn from_residue(ctx: &Arc<FieldContext>, r: u64, p_digits: u32) -> Self {
        let abs = p_digits as i64 * ctx.e as i64;
        if r == 0 {
            return Self::zero_mod(ctx, abs);
        }
        let x = Self::from_int(ctx, (r % ctx.modulus) as i64);
        x.truncate(abs)
    }

    /// Builds `c_0 + c_1 x + ...` in terms of the defining generator.
    pub fn from_poly(ctx: &Arc<FieldContext>, coeffs: &[i64]) -> Result<Self> {
        if coeffs.len() > ctx.degree {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for a degree {} field",
                coeffs.len(),
                ctx.degree
            )));
        }
        let mut d = [0u64; MAX_DEGREE];
        for (i, &c) in coeffs.iter().enumerate() {
            d[i] = reduce_i64(c, ctx.modulus);
        }
        // Coefficients are exact integers; the result is exact to N digits.
        let abs = match ctx.d_val(&d) {
            Some(w) => w + ctx.precision as i64,
            None => INFINITE,
        };
        Ok(Self::from_digits(ctx, d, abs))
    }

    /// The uniformizer `π` (`x` for Eisenstein, `p` otherwise).
    pub fn uniformizer(ctx: &Arc<FieldContext>) -> Self {
        Self::make(ctx, 1, ctx.precision, ctx.d_scalar(1))
    }

    /// `π^n` for any integer `n`.
    pub fn pi_pow(ctx: &Arc<FieldContext>, n: i64) -> Self {
        Self::make(ctx, n, ctx.precision, ctx.d_scalar(1))
    }

    /// The class of the polynomial variable `x`.
    pub fn generator(ctx: &Arc<FieldContext>) -> Self {
        let mut d = [0; MAX_DEGREE];
        if ctx.degree == 1 {
            return Self::zero(ctx);
        }
        d[1] = 1;
        Self::from_digits(ctx, d, ctx.d_val(&d).unwrap() + ctx.precision as i64)
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    /// True for zero at the available precision.
    pub fn is_zero(&self) -> bool {
        self.rel == 0
    }

    /// True for the exact zero (not merely a zero modulo some power of `π`).
    pub fn is_exact_zero(&self) -> bool {
        self.rel == 0 && self.val >= INFINITE
    }

    /// `π`-adic valuation, `None` for zero.
    pub fn val_pi(&self) -> Option<i64> {
        if self.rel == 0 {
            None
        } else {
            Some(self.val)
        }
    }

    /// Valuation normalized by `val(p) = 1`.
    pub fn valuation(&self) -> Valuation {
        match self.val_pi() {
            None => Valuation::Infinite,
            Some(v) => Valuation::Finite(Ratio::new(v, self.ctx.e as i64)),
        }
    }

    /// Absolute precision in `π`-digits.
    pub fn abs_precision(&self) -> i64 {
        if self.rel == 0 {
            self.val
        } else {
            self.val + self.rel as i64
        }
    }

    pub fn rel_precision(&self) -> u32 {
        self.rel
    }

    /// Coefficients of the unit part `u` in `π^v · u` (empty for zero).
    pub fn unit_digits(&self) -> Vec<u64> {
        if self.rel == 0 {
            Vec::new()
        } else {
            self.unit[..self.ctx.degree].to_vec()
        }
    }

    /// For a zero: the exponent it is known modulo.
    pub fn zero_bound(&self) -> Option<i64> {
        if self.rel == 0 {
            Some(self.val)
        } else {
            None
        }
    }

    /// Truncates to absolute precision `abs`.
    pub fn truncate(&self, abs: i64) -> Self {
        if self.rel == 0 {
            return Self::zero_mod(&self.ctx, self.val.min(abs));
        }
        if self.val >= abs {
            return Self::zero_mod(&self.ctx, abs);
        }
        let rel = (self.rel as i64).min(abs - self.val) as u32;
        Self::make(&self.ctx, self.val, rel, self.ctx.d_canon(&self.unit, rel))
    }

    pub fn is_unit(&self) -> bool {
        self.val_pi() == Some(0)
    }

    pub fn is_integral(&self) -> bool {
        match self.val_pi() {
            Some(v) => v >= 0,
            None => true,
        }
    }

    fn same_ctx(&self, other: &Self) {
        debug_assert!(Arc::ptr_eq(&self.ctx, &other.ctx), "mixed field contexts");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_ctx(other);
        let ctx = &self.ctx;
        let abs = self.abs_precision().min(other.abs_precision());
        if self.rel == 0 {
            return other.truncate(abs);
        }
        if other.rel == 0 {
            return self.truncate(abs);
        }
        let m = self.val.min(other.val);
        if m >= abs {
            return Self::zero_mod(ctx, abs);
        }
        let width = abs - m;
        let mut s = [0u64; MAX_DEGREE];
        for x in [self, other] {
            let shift = x.val - m;
            if shift < width {
                let t = ctx.d_mul_pi_pow(&x.unit, shift as u32);
                s = ctx.d_add(&s, &t);
            }
        }
        match ctx.d_val(&s) {
            Some(w) if w < width => {
                let unit = ctx.d_div_pi_pow(&s, w as u32);
                let rel = (width - w) as u32;
                Self::make(ctx, m + w, rel, ctx.d_canon(&unit, rel))
            }
            _ => Self::zero_mod(ctx, abs),
        }
    }

    pub fn neg(&self) -> Self {
        if self.rel == 0 {
            return self.clone();
        }
        let u = self.ctx.d_neg(&self.unit);
        Self::make(&self.ctx, self.val, self.rel, self.ctx.d_canon(&u, self.rel))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_ctx(other);
        let ctx = &self.ctx;
        match (self.rel, other.rel) {
            (0, 0) => Self::zero_mod(ctx, self.val.saturating_add(other.val).min(INFINITE)),
            (0, _) => Self::zero_mod(ctx, self.val.saturating_add(other.val).min(INFINITE)),
            (_, 0) => Self::zero_mod(ctx, other.val.saturating_add(self.val).min(INFINITE)),
            _ => {
                let rel = self.rel.min(other.rel);
                let u = ctx.d_mul(&self.unit, &other.unit);
                Self::make(ctx, self.val + other.val, rel, ctx.d_canon(&u, rel))
            }
        }
    }

    pub fn mul_int(&self, n: i64) -> Self {
        self.mul(&Self::from_int(&self.ctx, n))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.rel == 0 {
            return if self.is_exact_zero() {
                Err(Error::DivisionByZero)
            } else {
                Err(Error::PrecisionExhausted(format!(
                    "inverting an element only known to be O(pi^{})",
                    self.val
                )))
            };
        }
        let u = self.ctx.d_unit_inv(&self.unit, self.rel);
        Ok(Self::make(&self.ctx, -self.val, self.rel, u))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(&self.ctx);
        let mut b = base;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        Ok(acc)
    }

    /// Equality at the precision both operands carry.
    pub fn equals(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// Canonical residue in `o_L / 𝔭^n`.
    pub fn reduce_mod(&self, n: u32) -> Result<Residue> {
        let ctx = &self.ctx;
        if n > ctx.precision {
            return Err(Error::InvalidInput(format!(
                "reduction level {n} exceeds working precision {}",
                ctx.precision
            )));
        }
        if self.rel == 0 {
            if self.val < n as i64 {
                return Err(Error::PrecisionExhausted(format!(
                    "zero known only mod pi^{} cannot be reduced mod pi^{n}",
                    self.val
                )));
            }
            return Ok(Residue { ctx: ctx.clone(), n, digits: [0; MAX_DEGREE] });
        }
        if self.val < 0 {
            return Err(Error::NegativeValuation(format!("{self} reduced mod pi^{n}")));
        }
        if self.abs_precision() < n as i64 {
            return Err(Error::PrecisionExhausted(format!(
                "{self} is known only to pi^{}",
                self.abs_precision()
            )));
        }
        if self.val >= n as i64 {
            return Ok(Residue { ctx: ctx.clone(), n, digits: [0; MAX_DEGREE] });
        }
        let d = ctx.d_mul_pi_pow(&self.unit, self.val as u32);
        Ok(Residue { ctx: ctx.clone(), n, digits: ctx.d_canon(&d, n) })
    }

    /// For `L = Q_p`: the integer in `[0, p^k)` congruent to `self`.
    pub fn to_residue_int(&self, k: u32) -> Result<u64> {
        let ctx = &self.ctx;
        if ctx.degree != 1 {
            return Err(Error::InvalidInput("integer residues only exist for Q_p".into()));
        }
        if k > ctx.coeff_digits - 2 {
            return Err(Error::PrecisionExhausted(format!("{k} digits requested")));
        }
        let r = self.reduce_mod(k)?;
        Ok(r.digits[0])
    }

    /// Residue-field class of a unit: the digit vector modulo `π`.
    fn residue_digits(&self) -> Digits {
        self.ctx.d_canon(&self.unit, 1)
    }

    /// Square test (p odd): even valuation and a square residue.
    pub fn is_square(&self) -> bool {
        if self.rel == 0 {
            return true;
        }
        if self.val.rem_euclid(2) != 0 {
            return false;
        }
        let ctx = &self.ctx;
        let t = ctx.d_pow(&self.unit, (ctx.residue_size - 1) / 2);
        let one = ctx.d_scalar(1);
        let diff = ctx.d_add(&t, &ctx.d_neg(&one));
        ctx.d_val(&ctx.d_canon(&diff, 1)).is_none()
    }

    /// Square root for squares, by residue search and Newton lifting.
    pub fn sqrt(&self) -> Result<Self> {
        let ctx = &self.ctx;
        if self.rel == 0 {
            return Ok(Self::zero_mod(ctx, self.val / 2));
        }
        if !self.is_square() {
            return Err(Error::InvalidInput(format!("{self} is not a square in L")));
        }
        if ctx.residue_size > 1 << 20 {
            return Err(Error::Limit("residue field too large for square-root search".into()));
        }
        let target = self.residue_digits();
        let p = ctx.p;
        let mut root = None;
        'search: for idx in 0..ctx.residue_size {
            let mut cand = [0u64; MAX_DEGREE];
            let mut t = idx;
            for i in 0..ctx.f as usize {
                // residue field basis: 1, x, ..., x^{f-1} (unramified) or F_p.
                cand[i] = t % p;
                t /= p;
            }
            if ctx.kind == Kind::Eisenstein {
                cand = [idx, 0, 0, 0];
            }
            let sq = ctx.d_canon(&ctx.d_mul(&cand, &cand), 1);
            if sq == target {
                root = Some(cand);
                break 'search;
            }
        }
        let root = root.ok_or_else(|| Error::InvalidInput("no residue square root".into()))?;
        let u = Self::make(ctx, 0, self.rel, self.unit);
        let mut y = Self::make(ctx, 0, self.rel, ctx.d_canon(&root, self.rel));
        let half = Self::from_int(ctx, 2).inv()?;
        let mut known = 1u32;
        while known < self.rel {
            y = y.add(&u.div(&y)?).mul(&half);
            known *= 2;
        }
        let y = y.truncate(self.rel as i64);
        Ok(y.mul(&Self::pi_pow(ctx, self.val / 2)))
    }

    /// Teichmüller lift of the residue class of the integer `a` (p ∤ a).
    pub fn teichmuller(ctx: &Arc<FieldContext>, a: i64) -> Result<Self> {
        let x = Self::from_int(ctx, a);
        if !x.is_unit() {
            return Err(Error::InvalidInput(format!("{a} is not a unit")));
        }
        let mut y = x;
        for _ in 0..ctx.precision + 1 {
            y = y.pow(ctx.p as i64)?;
        }
        Ok(y)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) && self.equals(other)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &FieldElement) -> FieldElement {
                FieldElement::$f(self, rhs)
            }
        }
        impl std::ops::$tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                FieldElement::$f(&self, &rhs)
            }
        }
    };
}
forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

/// Canonical element of `o_L / 𝔭^n`.
#[derive(Clone)]
pub struct Residue {
    ctx: Arc<FieldContext>,
    n: u32,
    digits: Digits,
}

impl Residue {
    pub fn level(&self) -> u32 {
        self.n
    }
    pub fn digits(&self) -> &[u64] {
        &self.digits[..self.ctx.degree]
    }
    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }
    /// Lifts back to `L` with absolute precision `n`.
    pub fn lift(&self) -> FieldElement {
        FieldElement::from_digits(&self.ctx, self.digits, self.n as i64)
    }
}

impl fmt::Debug for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} mod pi^{}", self.digits(), self.n)
    }
}

impl PartialEq for Residue {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.digits == other.digits
    }
}

impl std::ops::Add for &Residue {
    type Output = Residue;
    fn add(self, rhs: &Residue) -> Residue {
        let d = self.ctx.d_add(&self.digits, &rhs.digits);
        Residue { ctx: self.ctx.clone(), n: self.n, digits: self.ctx.d_canon(&d, self.n) }
    }
}

impl std::ops::Mul for &Residue {
    type Output = Residue;
    fn mul(self, rhs: &Residue) -> Residue {
        let d = self.ctx.d_mul(&self.digits, &rhs.digits);
        Residue { ctx: self.ctx.clone(), n: self.n, digits: self.ctx.d_canon(&d, self.n) }
    }
}

/// Compares two valuations given as optional `π`-exponents (`None` = ∞).
pub fn cmp_val(a: Option<i64>, b: Option<i64>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, _) => Ordering::Greater,
        (_, None) => Ordering::Less,
        (Some(x), Some(y)) => x.cmp(&y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3(n: u32) -> Arc<FieldContext> {
        FieldContext::new(3, PolySpec::Trivial, n).unwrap()
    }

    #[test]
    fn make_field_examples() {
        let c = q3(8);
        assert_eq!((c.e(), c.f_res()), (1, 1));
        let c = FieldContext::new(3, PolySpec::Monic(vec![-3, 0, 1]), 8).unwrap();
        assert_eq!((c.e(), c.f_res()), (2, 1));
        let c = FieldContext::new(3, PolySpec::Monic(vec![1, 0, 1]), 8).unwrap();
        assert_eq!((c.e(), c.f_res()), (1, 2));
    }

    #[test]
    fn residue_irreducibility_oracle() {
        // x^2 + 1 over F_3: brute force over all residues.
        let roots: Vec<u64> = (0..3).filter(|x| (x * x + 1) % 3 == 0).collect();
        assert!(roots.is_empty());
        assert!(irreducible_mod_p(&[1, 0, 1], 3));
        assert!(!irreducible_mod_p(&[-1, 0, 1], 3));
        assert!(FieldContext::new(3, PolySpec::Monic(vec![-1, 0, 1]), 8).is_err());
    }

    #[test]
    fn rejects_even_prime_and_bad_input() {
        assert_eq!(FieldContext::new(2, PolySpec::Trivial, 8).unwrap_err(), Error::EvenPrime);
        assert!(FieldContext::new(9, PolySpec::Trivial, 8).is_err());
        assert!(FieldContext::new(3, PolySpec::Trivial, 0).is_err());
        assert!(FieldContext::new(3, PolySpec::Monic(vec![-3, 0, 2]), 8).is_err());
    }

    #[test]
    fn arith_examples() {
        let c = q3(8);
        let s = FieldElement::from_int(&c, 1).add(&FieldElement::from_int(&c, 2));
        assert_eq!(s.val_pi(), Some(1));
        assert_eq!(s, FieldElement::from_int(&c, 3));

        let l = FieldContext::new(3, PolySpec::Monic(vec![-3, 0, 1]), 8).unwrap();
        let pi = FieldElement::uniformizer(&l);
        let sq = pi.mul(&pi);
        assert_eq!(sq.val_pi(), Some(2));
        assert_eq!(sq, FieldElement::from_int(&l, 3));

        let c4 = q3(4);
        let four = FieldElement::from_int(&c4, 4);
        let inv = four.inv().unwrap();
        // extended Euclid mod 81: 4 * 61 = 244 = 3*81 + 1
        assert_eq!(inv.reduce_mod(4).unwrap().digits(), &[61]);
        assert!(four.mul(&inv).equals(&FieldElement::one(&c4)));
    }

    #[test]
    fn inverse_of_scaled_element() {
        let c = q3(8);
        let x = FieldElement::from_int(&c, 18);
        let y = x.inv().unwrap();
        assert_eq!(y.val_pi(), Some(-2));
        assert!(x.mul(&y).equals(&FieldElement::one(&c)));
        assert_eq!(FieldElement::zero(&c).inv().unwrap_err(), Error::DivisionByZero);
    }

    #[test]
    fn valuation_examples() {
        let c = q3(8);
        assert_eq!(FieldElement::from_int(&c, 3).valuation(), Valuation::integer(1));
        assert_eq!(FieldElement::zero(&c).valuation(), Valuation::Infinite);
        assert_eq!(FieldElement::from_int(&c, 18).valuation(), Valuation::integer(2));
        let l = FieldContext::new(3, PolySpec::Monic(vec![-3, 0, 1]), 10).unwrap();
        let lambda = FieldElement::pi_pow(&l, 3);
        assert_eq!(lambda.valuation(), Valuation::Finite(Ratio::new(3, 2)));
        assert_eq!(FieldElement::from_int(&l, 3).valuation(), Valuation::integer(1));
    }

    #[test]
    fn reduce_mod_examples() {
        let c = q3(8);
        assert!(FieldElement::from_int(&c, 12).reduce_mod(1).unwrap().is_zero());
        assert_eq!(FieldElement::from_int(&c, 4).reduce_mod(2).unwrap().digits(), &[4]);
        let x = FieldElement::from_int(&c, 10);
        let s = x.add(&x.inv().unwrap());
        // (1+9) + (1+9)^{-1} = 1 + 9 + 1 - 9 + 81 - ... ≡ 2 mod 9
        assert_eq!(s.reduce_mod(2).unwrap().digits(), &[2]);
        assert!(FieldElement::from_ratio(&c, 1, 3).unwrap().reduce_mod(1).is_err());
    }

    #[test]
    fn cancellation_tracks_precision() {
        let c = q3(6);
        let a = FieldElement::from_int(&c, 1);
        let b = FieldElement::from_int(&c, 1 + 27);
        let d = b.sub(&a);
        assert_eq!(d.val_pi(), Some(3));
        assert_eq!(d.abs_precision(), 6);
        let z = a.sub(&a);
        assert!(z.is_zero());
        assert_eq!(z.zero_bound(), Some(6));
        assert!(matches!(z.inv(), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn unit_plus_inverse_is_unit() {
        let l = FieldContext::new(3, PolySpec::Monic(vec![-3, 0, 1]), 12).unwrap();
        for k in 1..8 {
            let x = FieldElement::one(&l).add(&FieldElement::pi_pow(&l, k));
            let s = x.add(&x.inv().unwrap());
            assert_eq!(s.val_pi(), Some(0));
        }
    }

    #[test]
    fn squares_and_roots() {
        let c = q3(10);
        assert!(FieldElement::from_int(&c, 7).is_square());
        assert!(!FieldElement::from_int(&c, 2).is_square());
        assert!(!FieldElement::from_int(&c, 3).is_square());
        assert!(FieldElement::from_int(&c, 6).sqrt().is_err());
        let r = FieldElement::from_int(&c, 7 * 9).sqrt().unwrap();
        assert_eq!(r.val_pi(), Some(1));
        assert!(r.mul(&r).equals(&FieldElement::from_int(&c, 63)));
        let r = FieldElement::from_int(&c, 7).sqrt().unwrap();
        assert!(r.mul(&r).equals(&FieldElement::from_int(&c, 7)));
        let u = FieldContext::new(3, PolySpec::Monic(vec![1, 0, 1]), 10).unwrap();
        let minus_one = FieldElement::from_int(&u, -1);
        assert!(minus_one.is_square());
        let i = minus_one.sqrt().unwrap();
        assert!(i.mul(&i).equals(&minus_one));
    }

    #[test]
    fn teichmuller_is_root_of_unity() {
        let c = FieldContext::new(7, PolySpec::Trivial, 8).unwrap();
        let t = FieldElement::teichmuller(&c, 3).unwrap();
        assert!(t.pow(6).unwrap().equals(&FieldElement::one(&c)));
        assert!(t.sub(&FieldElement::from_int(&c, 3)).val_pi().unwrap() >= 1);
    }
}
