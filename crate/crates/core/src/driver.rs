//! Scenario configuration, orchestration of the verification checks, and
//! run reports.
//!
//! A scenario fixes a field, a principal-series diagram and the depths at
//! which to probe it; [`run_scenario`] executes the enabled suites and
//! records one [`CheckRecord`] per check. [`verify_suite`] runs fixed grids
//! of scenarios together with the standalone lattice and φ-module checks.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::diagrams::{compare_mod, verify_deformation_isomorphism, Diagram, DiagramParams, IntegralDiagram};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeRelation, Splitting};
use crate::linalg::ExactMatrix;
use crate::local_field::{FieldContext, FieldElement, PolySpec, Valuation};
use crate::phimod::{
    approximation_sequence, blz_reduction_type, default_points, FilteredPhiModule, ReductionType, Slope,
};
use crate::smooth_reps::SmoothCharacter;
use crate::tree::{homology_report, reduction_compat, Boundary, TreeBall};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest radius at which the dense Smith form of the integral boundary
/// is computed.
const MAX_SMITH_RADIUS: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Use `+` instead of `-` for the far endpoint of `∂`.
    BoundarySign,
    /// Replace the `Π`-matrix by the identity.
    PiIdentity,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extension {
    /// `Q_p` for odd weight, `Q_p(√p)` for even weight.
    #[default]
    Auto,
    None,
    SqrtP,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSpec {
    pub p: u64,
    pub extension: Extension,
    /// Working precision in `π`-digits; chosen from `p` when absent.
    pub precision: Option<u32>,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec { p: 3, extension: Extension::Auto, precision: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepresentationSpec {
    pub k: u32,
    /// Drop the algebraic factor `W` (plain smooth diagram).
    pub untwisted: bool,
    pub c: u32,
    /// `θ_i = ω^{j_i}` with `ω` the Teichmüller character.
    pub theta1: i64,
    pub theta2: i64,
    /// Sign of `λ = ±p^{(k-1)/2}` for the preset `λ_1 = λ^{-1}`,
    /// `λ_2 = λ p^{2-k}`.
    pub sign: i64,
    /// Explicit values override the preset; syntax `n`, `n/d`, `pi^e`,
    /// `n/d*pi^e`.
    pub lambda1: Option<String>,
    pub lambda2: Option<String>,
}

impl Default for RepresentationSpec {
    fn default() -> Self {
        RepresentationSpec { k: 3, untwisted: false, c: 1, theta1: 0, theta2: 0, sign: 1, lambda1: None, lambda2: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeformationSpec {
    /// Explicit points `x`; when empty, `x ∈ {1 + p^a, 1 + p^{a+1}}` with
    /// `a` the deformation bound of the integral structure.
    pub points: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeSpec {
    pub radius: u32,
    pub max_radius: u32,
    /// Reduction compatibility is checked for `n = 1..=levels`.
    pub levels: u32,
}

impl Default for TreeSpec {
    fn default() -> Self {
        TreeSpec { radius: 1, max_radius: crate::tree::DEFAULT_MAX_RADIUS, levels: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhimodSpec {
    /// `a` in `x_j ∈ 1 + 𝔭^{a+j}`.
    pub a: u32,
    pub depth: u32,
}

impl Default for PhimodSpec {
    fn default() -> Self {
        PhimodSpec { a: 1, depth: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub seed: u64,
    pub samples: usize,
    pub diagram: bool,
    pub deformation: bool,
    pub tree: bool,
    pub phimod: bool,
    pub mutation: Option<Mutation>,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec { seed: 0, samples: 20, diagram: true, deformation: true, tree: true, phimod: true, mutation: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub field: FieldSpec,
    pub representation: RepresentationSpec,
    pub deformation: DeformationSpec,
    pub tree: TreeSpec,
    pub phimod: PhimodSpec,
    pub run: RunSpec,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<ScenarioConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// The preset `λ = sign · p^{(k-1)/2}` for weight `k`.
    pub fn theorem_preset(k: u32, sign: i64) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.representation.k = k;
        cfg.representation.sign = sign;
        cfg.name = Some(format!("preset k={k} sign={}", if sign > 0 { "+" } else { "-" }));
        cfg
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            let r = &self.representation;
            format!("p={} k={} c={} theta=({},{})", self.field.p, r.k, r.c, r.theta1, r.theta2)
        })
    }

    /// Field implied by the configuration.
    pub fn field(&self) -> Result<Arc<FieldContext>> {
        let p = self.field.p;
        if p == 2 {
            return Err(Error::Config(
                "field.p = 2 is not supported: the constructions assume p > 2 (p odd)".into(),
            ));
        }
        if p < 2 || !(2..p).take_while(|d| d * d <= p).all(|d| p % d != 0) {
            return Err(Error::Config(format!("field.p = {p} is not a prime")));
        }
        let ramified = match self.field.extension {
            Extension::Auto => !self.representation.untwisted && self.representation.k % 2 == 0,
            Extension::None => false,
            Extension::SqrtP => true,
        };
        let spec = if ramified { PolySpec::Monic(vec![-(p as i64), 0, 1]) } else { PolySpec::Trivial };
        let e = if ramified { 2 } else { 1 };
        let precision = match self.field.precision {
            Some(n) => n,
            None => default_precision(p) * e,
        };
        FieldContext::new(p, spec, precision).map_err(|err| Error::Config(format!("field: {err}")))
    }

    fn validate(&self) -> Result<()> {
        let r = &self.representation;
        if r.k < 2 {
            return Err(Error::Config(format!("representation.k = {} must be at least 2", r.k)));
        }
        if r.c < 1 {
            return Err(Error::Config("representation.c must be at least 1".into()));
        }
        if r.sign != 1 && r.sign != -1 {
            return Err(Error::Config(format!("representation.sign = {} must be 1 or -1", r.sign)));
        }
        if r.lambda1.is_some() != r.lambda2.is_some() {
            return Err(Error::Config("representation.lambda1 and lambda2 must be given together".into()));
        }
        if self.tree.radius > self.tree.max_radius {
            return Err(Error::Config(format!(
                "tree.radius = {} exceeds tree.max_radius = {}",
                self.tree.radius, self.tree.max_radius
            )));
        }
        Ok(())
    }

    /// Diagram parameters (validated).
    pub fn diagram_params(&self, ctx: &Arc<FieldContext>) -> Result<DiagramParams> {
        self.validate()?;
        let r = &self.representation;
        let p = ctx.p() as i64;
        let one = FieldElement::one(ctx);
        let theta = |j: i64, key: &str| -> Result<SmoothCharacter> {
            if j.rem_euclid(p - 1) == 0 {
                SmoothCharacter::unramified(one.clone())
            } else {
                SmoothCharacter::tame(one.clone(), j).map_err(|e| Error::Config(format!("representation.{key}: {e}")))
            }
        };
        let (lambda1, lambda2) = match (&r.lambda1, &r.lambda2) {
            (Some(a), Some(b)) => (
                parse_element(ctx, a).map_err(|e| Error::Config(format!("representation.lambda1: {e}")))?,
                parse_element(ctx, b).map_err(|e| Error::Config(format!("representation.lambda2: {e}")))?,
            ),
            _ => preset_lambdas(ctx, r.k, r.sign)?,
        };
        let params = DiagramParams {
            lambda1,
            lambda2,
            theta1: theta(r.theta1, "theta1")?,
            theta2: theta(r.theta2, "theta2")?,
            c: r.c,
            k: (!r.untwisted).then_some(r.k),
        };
        for (t, key) in [(&params.theta1, "theta1"), (&params.theta2, "theta2")] {
            if t.conductor_exponent() > r.c {
                return Err(Error::Config(format!(
                    "representation.{key} has conductor exponent {} above c = {}",
                    t.conductor_exponent(),
                    r.c
                )));
            }
        }
        if ctx.precision() < r.c + 1 {
            return Err(Error::Config(format!("field.precision = {} is below c + 1", ctx.precision())));
        }
        Ok(params)
    }
}

/// Largest `N ≤ 24` such that `p^{N+2}` fits the residue arithmetic.
fn default_precision(p: u64) -> u32 {
    let mut n = 24;
    while n > 4 && (p as u128).checked_pow(n + 2).is_none_or(|m| m >= 1u128 << 62) {
        n -= 1;
    }
    n
}

/// `λ_1 = λ^{-1}`, `λ_2 = λ p^{2-k}` with `λ = sign · p^{(k-1)/2}`.
pub fn preset_lambdas(ctx: &Arc<FieldContext>, k: u32, sign: i64) -> Result<(FieldElement, FieldElement)> {
    let lam = crate::phimod::lambda(ctx, k, sign).map_err(|e| Error::Config(format!("preset λ: {e}")))?;
    let e = ctx.e() as i64;
    Ok((lam.inv()?, lam.mul(&FieldElement::pi_pow(ctx, e * (2 - k as i64)))))
}

/// Parses `n`, `n/d`, `pi^e`, `n*pi^e` or `n/d*pi^e`.
pub fn parse_element(ctx: &Arc<FieldContext>, s: &str) -> Result<FieldElement> {
    let s = s.trim().replace(' ', "");
    let bad = || Error::InvalidInput(format!("cannot parse field element {s:?}"));
    let (coeff, power) = match s.split_once("pi^") {
        Some((c, e)) => {
            let c = c.strip_suffix('*').unwrap_or(c);
            let c = match c {
                "" => "1",
                "-" => "-1",
                other => other,
            };
            (c.to_string(), e.parse::<i64>().map_err(|_| bad())?)
        }
        None => (s.clone(), 0),
    };
    let (num, den) = match coeff.split_once('/') {
        Some((n, d)) => (n.parse::<i64>().map_err(|_| bad())?, d.parse::<i64>().map_err(|_| bad())?),
        None => (coeff.parse::<i64>().map_err(|_| bad())?, 1),
    };
    Ok(FieldElement::from_ratio(ctx, num, den)?.mul(&FieldElement::pi_pow(ctx, power)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub parameters: Value,
    pub status: Status,
    pub witnesses: Value,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub title: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    pub all_passed: bool,
    pub seconds: f64,
}

impl RunReport {
    pub fn new(title: impl Into<String>, seed: u64, checks: Vec<CheckRecord>, seconds: f64) -> RunReport {
        let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
        let summary = Summary { passed: count(Status::Pass), failed: count(Status::Fail), skipped: count(Status::Skipped) };
        let all_passed = summary.failed == 0;
        RunReport { schema_version: SCHEMA_VERSION, title: title.into(), seed, checks, summary, all_passed, seconds }
    }

    /// The report with every timing set to zero, for comparisons.
    pub fn without_timing(&self) -> RunReport {
        let mut r = self.clone();
        r.seconds = 0.0;
        for c in &mut r.checks {
            c.seconds = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<RunReport> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("report: {e}")))
    }

    /// One line per check plus a summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let _ = writeln!(out, "{tag} {} {} {} ({:.2}s)", c.name, compact(&c.parameters), compact(&c.witnesses), c.seconds);
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{}: {} passed, {} failed, {} skipped in {:.1}s (seed {})",
            self.title, s.passed, s.failed, s.skipped, self.seconds, self.seed
        );
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Object(m) if m.is_empty() => String::new(),
        _ => v.to_string(),
    }
}

struct Outcome {
    status: Status,
    witnesses: Value,
}

impl Outcome {
    fn pass(w: Value) -> Outcome {
        Outcome { status: Status::Pass, witnesses: w }
    }

    fn check(ok: bool, w: Value) -> Outcome {
        Outcome { status: if ok { Status::Pass } else { Status::Fail }, witnesses: w }
    }

    fn skip(reason: impl Into<String>) -> Outcome {
        Outcome { status: Status::Skipped, witnesses: json!({ "reason": reason.into() }) }
    }
}

fn run_check(name: &str, parameters: Value, f: impl FnOnce() -> Result<Outcome>) -> CheckRecord {
    let t = Instant::now();
    let outcome = f().unwrap_or_else(|e| Outcome { status: Status::Fail, witnesses: json!({ "error": e.to_string() }) });
    CheckRecord { name: name.to_string(), parameters, status: outcome.status, witnesses: outcome.witnesses, seconds: t.elapsed().as_secs_f64() }
}

fn val_string(x: &FieldElement) -> String {
    x.valuation().to_string()
}

/// The scenario's diagram after any configured mutation.
pub fn scenario_diagram(cfg: &ScenarioConfig) -> Result<Diagram> {
    let ctx = cfg.field()?;
    let params = cfg.diagram_params(&ctx)?;
    let d = Diagram::build(params)?;
    Ok(match cfg.run.mutation {
        Some(Mutation::PiIdentity) => {
            let id = ExactMatrix::identity(&ctx, d.dim1());
            d.with_pi(id)
        }
        _ => d,
    })
}

/// Runs every enabled suite of one scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> RunReport {
    let t = Instant::now();
    let checks = scenario_checks(cfg);
    RunReport::new(cfg.label(), cfg.run.seed, checks, t.elapsed().as_secs_f64())
}

fn scenario_checks(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let label = cfg.label();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    let mut checks = Vec::new();
    let base = json!({ "scenario": label });
    let mut built = None;
    checks.push(run_check("diagram.build", base.clone(), || {
        let d = scenario_diagram(cfg)?;
        let (v1, vs) = d.split_dims();
        let w = json!({
            "field": d.ctx().describe(),
            "dim_d0": d.dim0(),
            "dim_d1": d.dim1(),
            "dim_v1": v1,
            "dim_vs": vs,
            "val_central": val_string(d.central_scalar()),
        });
        built = Some(d);
        Ok(Outcome::pass(w))
    }));
    let Some(d) = built else { return checks };

    if cfg.run.diagram {
        checks.push(run_check("diagram.axioms", base.clone(), || {
            let rep = d.check_axioms(cfg.run.samples, &mut rng);
            Ok(Outcome::check(rep.all_pass(), serde_json::to_value(&rep).expect("serializable")))
        }));
    }

    let integral = if d.central_scalar().is_unit() {
        match IntegralDiagram::construct(&d) {
            Ok(id) => Ok(id),
            Err(Error::Limit(msg)) => Err(format!(
                "no bounded o_L-lattice found ({msg}); π⊗W appears to admit no invariant norm at this level"
            )),
            Err(e) => Err(format!("integral structure: {e}")),
        }
    } else {
        Err(format!("central scalar has valuation {}: no bounded integral structure", val_string(d.central_scalar())))
    };
    let bound = integral.as_ref().ok().map(|id| id.deformation_bound());

    if cfg.run.deformation {
        checks.push(run_check("integral.structure", base.clone(), || match (&integral, &bound) {
            (Ok(id), Some(Ok(a))) => {
                let adapted = id.adapted()?;
                Ok(Outcome::pass(json!({
                    "deformation_bound": a,
                    "adapted_deformation_bound": adapted.deformation_bound()?,
                })))
            }
            (Ok(_), Some(Err(e))) => Err(Error::AxiomFailure(e.to_string())),
            (Err(reason), _) => Ok(Outcome::skip(reason.clone())),
            _ => unreachable!(),
        }));
        let points: Result<Vec<FieldElement>> = if cfg.deformation.points.is_empty() {
            let a = match &bound {
                Some(Ok(a)) => *a,
                _ => 1,
            };
            let p = d.ctx().p() as i64;
            Ok([a, a + 1].iter().map(|&v| FieldElement::from_int(d.ctx(), 1 + p.pow(v))).collect())
        } else {
            cfg.deformation.points.iter().map(|s| parse_element(d.ctx(), s)).collect()
        };
        match points {
            Err(e) => checks.push(run_check("deformation.points", base.clone(), || Err(e))),
            Ok(points) => {
                for x in points {
                    let params = json!({ "scenario": label, "val_x_minus_1": val_string(&x.sub(&FieldElement::one(d.ctx()))) });
                    checks.push(run_check("deformation.isomorphism", params.clone(), || {
                        Ok(match verify_deformation_isomorphism(&d, &x)? {
                            Ok(()) => Outcome::pass(Value::Null),
                            Err(w) => Outcome::check(false, json!({ "mismatch": w })),
                        })
                    }));
                    checks.push(run_check("deformation.congruence", params, || congruence_check(&integral, &x)));
                }
            }
        }
    }

    if cfg.run.tree {
        let ball = TreeBall::enumerate_capped(d.ctx().p(), cfg.tree.radius, cfg.tree.max_radius);
        let params = json!({ "scenario": label, "radius": cfg.tree.radius });
        match ball {
            Err(e) => checks.push(run_check("tree.ball", params, || Err(e))),
            Ok(ball) => {
                checks.push(run_check("tree.homology", params.clone(), || {
                    let h = homology_report(&d, &ball, None)?;
                    let w = serde_json::to_value(&h).expect("serializable");
                    if ball.n_edges() == 0 {
                        return Ok(Outcome::pass(json!({ "degenerate": "no edges at radius 0", "report": w })));
                    }
                    Ok(Outcome::check(h.ker_dim == 0, w))
                }));
                let far_sign = if cfg.run.mutation == Some(Mutation::BoundarySign) { 1 } else { -1 };
                checks.push(run_check("tree.well_defined", params.clone(), || {
                    let rep = Boundary::with_far_sign(&d, &ball, far_sign)?.check_well_defined(cfg.run.samples, &mut rng)?;
                    if ball.n_edges() == 0 {
                        return Ok(Outcome::pass(json!({ "degenerate": "no edges at radius 0" })));
                    }
                    Ok(Outcome::check(rep.passed(), serde_json::to_value(&rep).expect("serializable")))
                }));
                checks.push(run_check("tree.reduction_compat", params, || {
                    let id = match &integral {
                        Ok(id) => id,
                        Err(reason) => return Ok(Outcome::skip(reason.clone())),
                    };
                    if cfg.tree.radius > MAX_SMITH_RADIUS {
                        return Ok(Outcome::skip(format!("dense Smith forms are limited to radius ≤ {MAX_SMITH_RADIUS}")));
                    }
                    let mut failing = Vec::new();
                    for n in 1..=cfg.tree.levels {
                        if !reduction_compat(id, &ball, n)? {
                            failing.push(n);
                        }
                    }
                    Ok(Outcome::check(failing.is_empty(), json!({ "levels": cfg.tree.levels, "failing_levels": failing })))
                }));
            }
        }
    }

    if cfg.run.phimod {
        checks.extend(phimod_checks(cfg, &d));
    }
    checks
}

/// `𝒟(x)` against `𝒟` modulo `𝔭^b` for every `b ≤ v(x - 1)`, on the
/// lattice `(L_1 ∩ V_1⊗W) ⊕ (L_1 ∩ V_s⊗W)`; the depth reached by the
/// intersection lattice `L_1 = L_0 ∩ D_1` itself is reported alongside.
fn congruence_check(integral: &std::result::Result<IntegralDiagram, String>, x: &FieldElement) -> Result<Outcome> {
    let id = match integral {
        Ok(id) => id,
        Err(reason) => return Ok(Outcome::skip(reason.clone())),
    };
    let one = FieldElement::one(x.ctx());
    let v = match x.sub(&one).val_pi() {
        Some(v) if v > 0 => v as u32,
        _ => return Err(Error::InvalidInput(format!("x = {x} is not in 1 + 𝔭"))),
    };
    let depth = |s: &IntegralDiagram| -> Result<u32> {
        let sx = s.deform(x)?;
        let mut b = 0;
        while b < v + 1 && compare_mod(&sx, s, b + 1)? {
            b += 1;
        }
        Ok(b)
    };
    let adapted = id.adapted()?;
    let adapted_depth = depth(&adapted)?;
    let intersection_depth = depth(id)?;
    Ok(Outcome::check(
        adapted_depth >= v,
        json!({
            "v_x_minus_1": v,
            "adapted_lattice_depth": adapted_depth,
            "intersection_lattice_depth": intersection_depth,
            "intersection_lattice_bound": id.deformation_bound()?,
        }),
    ))
}

/// φ-module analysis for `α = λ_1^{-1}`, `β = p λ_2^{-1}`: the Frobenius
/// eigenvalues matching `π(χ_1, χ_2)` with `χ_2 = χ_2' |·|^{-1}`.
fn phimod_checks(cfg: &ScenarioConfig, d: &Diagram) -> Vec<CheckRecord> {
    let ctx = d.ctx();
    let label = cfg.label();
    let params = d.params();
    let k = cfg.representation.k;
    let p = ctx.p() as i64;
    let base = json!({ "scenario": label, "k": k });
    let mut out = Vec::new();
    let setup = (|| -> Result<std::result::Result<FilteredPhiModule, String>> {
        let alpha = params.lambda1.inv()?;
        let beta = FieldElement::from_int(ctx, p).mul(&params.lambda2.inv()?);
        let det = FieldElement::from_int(ctx, p).pow(k as i64 - 1)?;
        if !alpha.mul(&beta).equals(&det) {
            return Ok(Err("λ_1 λ_2 ≠ p^{2-k}: not the crystalline parameters of a D_{k,a_p}".into()));
        }
        let a_p = alpha.add(&beta);
        if !a_p.is_zero() && a_p.val_pi().is_some_and(|v| v <= 0) {
            return Ok(Err(format!("a_p = α + β has valuation {} ≤ 0", val_string(&a_p))));
        }
        Ok(Ok(FilteredPhiModule::new(k, a_p)?))
    })();
    let module = match setup {
        Ok(Ok(m)) => m,
        Ok(Err(reason)) => {
            out.push(run_check("phimod.analysis", base, || Ok(Outcome::skip(reason))));
            return out;
        }
        Err(e) => {
            out.push(run_check("phimod.analysis", base, || Err(e)));
            return out;
        }
    };
    out.push(run_check("phimod.analysis", base.clone(), || phimod_analysis(&module)));
    // a_p = 2λ exactly when α = β
    let alpha = params.lambda1.inv().expect("nonzero");
    let two_lambda = module.discriminant().is_zero() && alpha.mul_int(2).equals(module.a_p());
    if two_lambda {
        let sign = cfg.representation.sign;
        let approx_params = json!({ "scenario": label, "k": k, "sign": sign, "a": cfg.phimod.a, "depth": cfg.phimod.depth });
        out.push(run_check("phimod.approximation", approx_params, || {
            let lam = crate::phimod::lambda(ctx, k, sign)?;
            if !lam.equals(&alpha) {
                return Ok(Outcome::skip("λ_1^{-1} is not sign·p^{(k-1)/2} for the configured sign"));
            }
            let steps = approximation_sequence(ctx, k, sign, cfg.phimod.a, &default_points(ctx, cfg.phimod.a, cfg.phimod.depth))?;
            let ok = steps.iter().all(|s| s.passed());
            Ok(Outcome::check(ok, serde_json::to_value(&steps).expect("serializable")))
        }));
    }
    out
}

/// Analysis of `D_{k,a_p}` for an explicit `a_p`.
pub fn analyze_a_p(k: u32, a_p: &FieldElement) -> CheckRecord {
    let params = json!({ "k": k, "a_p": a_p.to_string() });
    run_check("phimod.analysis", params, || phimod_analysis(&FilteredPhiModule::new(k, a_p.clone())?))
}

fn phimod_analysis(m: &FilteredPhiModule) -> Result<Outcome> {
    let ctx = m.ctx();
    let k = m.k();
    let p = ctx.p();
    let det_ok = m.det().equals(&FieldElement::from_int(ctx, p as i64).pow(k as i64 - 1)?);
    let trace_ok = m.trace().equals(m.a_p());
    let newton = m.newton_slopes();
    let half = Slope::new(k as i64 - 1, 2);
    let expected_min = match m.a_p().valuation() {
        Valuation::Finite(v) => v.min(half),
        Valuation::Infinite => half,
    };
    let slopes_ok = newton[0] == expected_min && newton[0] + newton[1] == Slope::from_integer(k as i64 - 1);
    let wa = m.weakly_admissible()?;
    let reduction = match m.a_p().valuation() {
        Valuation::Finite(v) => blz_reduction_type(p, k, v).map(|r| r.to_string()).unwrap_or_else(|e| format!("n/a ({e})")),
        Valuation::Infinite => blz_reduction_type(p, k, Slope::from_integer(k as i64))
            .map(|r: ReductionType| r.to_string())
            .unwrap_or_else(|e| format!("n/a ({e})")),
    };
    Ok(Outcome::check(
        det_ok && trace_ok && slopes_ok && wa,
        json!({
            "val_a_p": val_string(m.a_p()),
            "hodge": m.hodge_slopes(),
            "newton": newton.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "weakly_admissible": wa,
            "frobenius_semisimple": m.frobenius_semisimple(),
            "reduction": reduction,
            "out_of_scope": "the trace character and its Galois content are not modeled",
        }),
    ))
}

/// `φ_x(M) = M` for random `x ∈ 1 + 𝔭^a`, `a = deformation_bound`, over
/// random lattices with random complementary splittings.
pub fn lattice_lemma_check(seed: u64, lattices: usize, points: usize) -> CheckRecord {
    let params = json!({ "lattices": lattices, "points_per_lattice": points, "seed": seed });
    run_check("lattice.deformation_bound", params, || {
        let ctx = FieldContext::new(3, PolySpec::Trivial, 20)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures = Vec::new();
        let mut bounds = Vec::new();
        // worked case: M = span{e1, p^{-2} e1 + e2}
        let m = Lattice::from_generators(&ExactMatrix::from_columns(
            &ctx,
            2,
            &[
                vec![FieldElement::one(&ctx), FieldElement::zero(&ctx)],
                vec![FieldElement::from_ratio(&ctx, 1, 9)?, FieldElement::one(&ctx)],
            ],
        ))?;
        let id = ExactMatrix::identity(&ctx, 2);
        let s = Splitting::new(&id.select_columns(&[0]), &id.select_columns(&[1]))?;
        let worked = s.deformation_bound(&m)?;
        if worked != 2 {
            failures.push(format!("worked case gave a = {worked}"));
        }
        let mut cases = vec![(m, s)];
        for _ in 0..lattices {
            let n = rng.gen_range(2..=4usize);
            cases.push((random_lattice(&ctx, n, &mut rng)?, random_splitting(&ctx, n, &mut rng)?));
        }
        for (i, (m, s)) in cases.iter().enumerate() {
            let a = s.deformation_bound(m)?;
            bounds.push(a);
            for _ in 0..points {
                let x = random_one_plus(&ctx, a, &mut rng);
                let image = s.apply_phi_x_lattice(&x, m)?;
                if !matches!(image.compare(m)?, LatticeRelation::Equal) {
                    failures.push(format!("case {i}: φ_x(M) ≠ M for x ∈ 1 + 𝔭^{a}"));
                }
            }
        }
        let max_bound = bounds.iter().max().copied().unwrap_or(0);
        Ok(Outcome::check(failures.is_empty(), json!({ "worked_case_bound": worked, "max_bound": max_bound, "failures": failures })))
    })
}

fn random_element<R: Rng>(ctx: &Arc<FieldContext>, rng: &mut R, min_val: i64) -> FieldElement {
    let u = rng.gen_range(-40i64..=40);
    FieldElement::from_int(ctx, u).mul(&FieldElement::pi_pow(ctx, rng.gen_range(min_val..=3)))
}

fn random_lattice<R: Rng>(ctx: &Arc<FieldContext>, n: usize, rng: &mut R) -> Result<Lattice> {
    loop {
        let m = ExactMatrix::from_fn(ctx, n, n, |_, _| random_element(ctx, rng, -3));
        if m.rank() == n {
            return Lattice::from_generators(&m);
        }
    }
}

fn random_splitting<R: Rng>(ctx: &Arc<FieldContext>, n: usize, rng: &mut R) -> Result<Splitting> {
    loop {
        let m = ExactMatrix::from_fn(ctx, n, n, |_, _| random_element(ctx, rng, -2));
        if m.rank() == n {
            let t = rng.gen_range(1..n);
            return Splitting::new(
                &m.select_columns(&(0..t).collect::<Vec<_>>()),
                &m.select_columns(&(t..n).collect::<Vec<_>>()),
            );
        }
    }
}

fn random_one_plus<R: Rng>(ctx: &Arc<FieldContext>, a: u32, rng: &mut R) -> FieldElement {
    let u = rng.gen_range(1i64..=80);
    FieldElement::one(ctx).add(&FieldElement::from_int(ctx, u).mul(&FieldElement::pi_pow(ctx, a as i64)))
}

/// `Π = [[0, 5], [2, 0]]` and `Π² = 10` for `p = 3`, `c = 1`, `θ` trivial,
/// `λ_1 = 2`, `λ_2 = 5`.
pub fn pi_matrix_check() -> CheckRecord {
    run_check("diagram.pi_matrix", json!({ "p": 3, "c": 1, "lambda1": 2, "lambda2": 5 }), || {
        let ctx = FieldContext::new(3, PolySpec::Trivial, 20)?;
        let triv = SmoothCharacter::unramified(FieldElement::one(&ctx))?;
        let d = Diagram::build(DiagramParams {
            lambda1: FieldElement::from_int(&ctx, 2),
            lambda2: FieldElement::from_int(&ctx, 5),
            theta1: triv.clone(),
            theta2: triv,
            c: 1,
            k: None,
        })?;
        let expected = ExactMatrix::from_ints(&ctx, &[&[0, 5], &[2, 0]]);
        let square = d.pi_matrix().mul(d.pi_matrix());
        let ok = d.pi_matrix().equals(&expected)
            && square.equals(&ExactMatrix::scalar(&ctx, 2, &FieldElement::from_int(&ctx, 10)));
        Ok(Outcome::check(ok, json!({ "pi": matrix_strings(d.pi_matrix()), "pi_squared": matrix_strings(&square) })))
    })
}

fn matrix_strings(m: &ExactMatrix) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)].to_string()).collect()).collect()
}

/// The φ-module suite: det/trace, the Newton slope rule on a grid, the
/// non-semisimple locus, and the two reduction-type cases.
pub fn phimod_suite_check() -> CheckRecord {
    run_check("phimod.suite", json!({ "p": 3 }), || {
        let mut failures = Vec::new();
        let ctx = FieldContext::new(3, PolySpec::Trivial, 24)?;
        // 20-point grid: k ∈ {2..=5}, a_p = u·3^v
        let mut grid = 0;
        for k in 2..=5u32 {
            for (u, v) in [(1, 1), (2, 1), (1, 2), (5, 3), (7, 4)] {
                grid += 1;
                let a_p = FieldElement::from_int(&ctx, u * 3i64.pow(v));
                let m = FilteredPhiModule::new(k, a_p.clone())?;
                if !m.trace().equals(&a_p) || !m.det().equals(&FieldElement::from_int(&ctx, 3i64.pow(k - 1))) {
                    failures.push(format!("det/trace at k={k}, a_p={u}·3^{v}"));
                }
                let expected = Slope::from_integer(v as i64).min(Slope::new(k as i64 - 1, 2));
                if m.newton_slopes()[0] != expected {
                    failures.push(format!("min slope at k={k}, a_p={u}·3^{v}"));
                }
            }
        }
        for k in 2..=5u32 {
            let ctx = crate::phimod::field_for_weight(3, k, 30)?;
            for sign in [1, -1] {
                let lam = crate::phimod::lambda(&ctx, k, sign)?;
                if FilteredPhiModule::new(k, lam.mul_int(2))?.frobenius_semisimple() {
                    failures.push(format!("a_p = 2λ semisimple at k={k}, sign={sign}"));
                }
                // off the locus a_p² = 4p^{k-1}
                if !FilteredPhiModule::new(k, lam.mul_int(8))?.frobenius_semisimple() {
                    failures.push(format!("a_p = 8λ not semisimple at k={k}, sign={sign}"));
                }
            }
        }
        let split = blz_reduction_type(3, 5, Slope::from_integer(2))?;
        let irred = blz_reduction_type(3, 4, Slope::new(3, 2))?;
        if !matches!(split, ReductionType::SplitPrincipalSeries { twist_exponent: 1, .. }) {
            failures.push(format!("(3,5) gave {split}"));
        }
        if irred != ReductionType::Irreducible {
            failures.push(format!("(3,4) gave {irred}"));
        }
        Ok(Outcome::check(
            failures.is_empty(),
            json!({ "grid_points": grid, "reduction_3_5": split.to_string(), "reduction_3_4": irred.to_string(), "failures": failures }),
        ))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

/// Scenario grid of a verification level.
pub fn suite_scenarios(level: Level, seed: u64) -> Vec<ScenarioConfig> {
    let (levels, weights, radius): (&[u32], Vec<u32>, u32) = match level {
        Level::Quick => (&[1], (2..=5).collect(), 1),
        Level::Full => (&[1, 2], (2..=7).collect(), 3),
    };
    let mut out = Vec::new();
    for &c in levels {
        for &k in &weights {
            for (t1, t2) in [(0, 0), (1, 0)] {
                for sign in [1, -1] {
                    let mut cfg = ScenarioConfig::theorem_preset(k, sign);
                    cfg.representation.c = c;
                    cfg.representation.theta1 = t1;
                    cfg.representation.theta2 = t2;
                    cfg.tree.radius = if c == 1 { radius } else { radius.min(2) };
                    cfg.run.seed = seed;
                    cfg.name = Some(format!("c={c} k={k} theta=({t1},{t2}) sign={}", if sign > 0 { "+" } else { "-" }));
                    out.push(cfg);
                }
            }
        }
    }
    out
}

/// Scenario checks in input order, spread over the available cores.
fn run_parallel(scenarios: &[ScenarioConfig]) -> Vec<Vec<CheckRecord>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(scenarios.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Vec<CheckRecord>>> = scenarios.iter().map(|_| Default::default()).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some(cfg) = scenarios.get(i) else { break };
                *slots[i].lock().expect("unpoisoned") = scenario_checks(cfg);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().expect("unpoisoned")).collect()
}

/// Runs a verification level; `mutation` is applied to every scenario.
pub fn verify_suite(level: Level, seed: u64, mutation: Option<Mutation>) -> RunReport {
    let t = Instant::now();
    let mut checks = vec![pi_matrix_check(), lattice_lemma_check(seed, 50, 20), phimod_suite_check()];
    if let Some(Mutation::PiIdentity) = mutation {
        // the fixed Π example reflects the mutation too
        checks[0] = run_check("diagram.pi_matrix", json!({ "mutation": "pi-identity" }), || {
            let ctx = FieldContext::new(3, PolySpec::Trivial, 20)?;
            let id = ExactMatrix::identity(&ctx, 2);
            let expected = ExactMatrix::from_ints(&ctx, &[&[0, 5], &[2, 0]]);
            Ok(Outcome::check(id.equals(&expected), Value::Null))
        });
    }
    let mut scenarios = suite_scenarios(level, seed);
    for cfg in &mut scenarios {
        cfg.run.mutation = mutation;
    }
    checks.extend(run_parallel(&scenarios).into_iter().flatten());
    let title = match level {
        Level::Quick => "verify quick",
        Level::Full => "verify full",
    };
    RunReport::new(title, seed, checks, t.elapsed().as_secs_f64())
}
