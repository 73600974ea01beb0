//! p-atoms and the lacunary counterexample martingales.
//!
//! Every construction is a finite sum `F = Σ_k λ_k a_k` with kernel-difference
//! atoms `a_k = s_k (D_{2^{m+1}} - D_{2^m})`, `m = |α_k|`, truncated at the
//! resolution `N`. Each atom is a Walsh polynomial of order below
//! `2^{|α_k|+1}`, so the truncated `F` is its own full-resolution limit and
//! the martingale `F_n` is `S_{2^n} F`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dyadic::{Dyadic, Number};
use crate::error::{Error, Result};
use crate::group::{check_level, DyadicInterval, Mode, Samples, StepFunction};
use crate::index::{
    self, select_gap_doubling, select_summable, select_variation_squaring, IndexSequence,
};
use crate::transform::{dirichlet_formula, fwht, partial_sum, CoefficientVector};

/// Nondecreasing weight `Φ : N_+ → [1, ∞)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum WeightFunction {
    #[default]
    One,
    /// `1 + log₂ n`.
    Log2,
    /// `n^γ`, `0 ≤ γ ≤ 1/4`.
    Power(f64),
    /// `Φ(n) = table[n - 1]`, extended by its last entry.
    Table(Vec<f64>),
}

impl WeightFunction {
    pub fn power(gamma: f64) -> Result<Self> {
        if !(0.0..=0.25).contains(&gamma) {
            return Err(Error::Domain(format!("power weight needs 0 ≤ γ ≤ 1/4, got {gamma}")));
        }
        Ok(WeightFunction::Power(gamma))
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("weight table is empty".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 1.0)) {
            return Err(Error::Domain("weight table entries must be finite and ≥ 1".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("weight table must be nondecreasing".into()));
        }
        Ok(WeightFunction::Table(values))
    }

    pub fn eval(&self, n: u64) -> f64 {
        let n = n.max(1);
        match self {
            WeightFunction::One => 1.0,
            WeightFunction::Log2 => 1.0 + (n as f64).log2(),
            WeightFunction::Power(g) => (n as f64).powf(*g),
            WeightFunction::Table(t) => t[((n - 1) as usize).min(t.len() - 1)],
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            WeightFunction::One => true,
            WeightFunction::Power(g) => *g == 0.0,
            WeightFunction::Table(t) => t.iter().all(|&v| v == 1.0),
            WeightFunction::Log2 => false,
        }
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFunction::One => write!(f, "one"),
            WeightFunction::Log2 => write!(f, "log2"),
            WeightFunction::Power(g) => write!(f, "power:{g}"),
            WeightFunction::Table(t) => {
                let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                write!(f, "table:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for WeightFunction {
    type Err = Error;

    /// `one`, `log2`, `power:γ` or `table:v1,v2,…`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("bad weight {s:?}: {what}"));
        match s.split_once(':') {
            None => match s {
                "one" => Ok(WeightFunction::One),
                "log2" => Ok(WeightFunction::Log2),
                _ => Err(bad("expected one, log2, power:γ or table:…")),
            },
            Some(("power", g)) => WeightFunction::power(g.parse().map_err(|_| bad("γ"))?),
            Some(("table", vals)) => {
                let v = vals
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| bad("table entry")))
                    .collect::<Result<Vec<_>>>()?;
                WeightFunction::table(v)
            }
            Some(_) => Err(bad("unknown kind")),
        }
    }
}

impl Serialize for WeightFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WeightFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    T1b,
    T2b,
    T4b,
    T5b,
}

impl Theorem {
    /// Whether the theorem works in `H_1` (`p = 1`) rather than `H_p`, `p < 1`.
    pub fn is_h1(self) -> bool {
        matches!(self, Theorem::T2b | Theorem::T5b)
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Theorem::T1b => "t1b",
            Theorem::T2b => "t2b",
            Theorem::T4b => "t4b",
            Theorem::T5b => "t5b",
        };
        f.write_str(s)
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1b" => Ok(Theorem::T1b),
            "t2b" => Ok(Theorem::T2b),
            "t4b" => Ok(Theorem::T4b),
            "t5b" => Ok(Theorem::T5b),
            _ => Err(Error::Parse(format!("unknown theorem {s:?}"))),
        }
    }
}

/// Fewest terms a construction may realise.
pub const MIN_TERMS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSpec {
    pub theorem: Theorem,
    pub p: f64,
    pub phi: WeightFunction,
    pub base: IndexSequence,
    pub level: u32,
    /// Keep at most this many selected terms.
    pub terms: Option<usize>,
    /// Budget of the summability selector (`T1b`, `T2b`).
    pub budget: f64,
}

impl ConstructionSpec {
    pub fn new(theorem: Theorem, p: f64, base: IndexSequence, level: u32) -> Self {
        ConstructionSpec {
            theorem,
            p,
            phi: WeightFunction::One,
            base,
            level,
            terms: None,
            budget: 1.0,
        }
    }

    pub fn with_phi(mut self, phi: WeightFunction) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_terms(mut self, terms: usize) -> Self {
        self.terms = Some(terms);
        self
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_level(self.level)?;
        if self.theorem.is_h1() {
            if self.p != 1.0 {
                return Err(Error::Domain(format!("{} needs p = 1, got {}", self.theorem, self.p)));
            }
        } else if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Domain(format!("{} needs 0 < p < 1, got {}", self.theorem, self.p)));
        }
        if matches!(self.theorem, Theorem::T4b | Theorem::T5b) && !self.phi.is_one() {
            return Err(Error::Domain(format!("{} takes no weight", self.theorem)));
        }
        Ok(())
    }

    /// Run the theorem's selector on the base sequence bounded by `2^N`.
    ///
    /// `t1b` and `t2b` only consider indices that are not powers of two: for
    /// `α = 2^m` the partial sum `S_α` is a conditional expectation and the
    /// tail term `S_α F - S_{2^{|α|}} F` vanishes.
    pub fn select(&self) -> Result<IndexSequence> {
        self.validate()?;
        let mut ms = self.base.bounded(self.level);
        if matches!(self.theorem, Theorem::T1b | Theorem::T2b) {
            ms.values.retain(|&m| !m.is_power_of_two());
        }
        let picked = match self.theorem {
            Theorem::T1b | Theorem::T2b => select_summable(&ms, self.p, &self.phi, self.budget, None)?,
            Theorem::T4b => select_gap_doubling(&ms, self.p, None)?,
            Theorem::T5b => select_variation_squaring(&ms, None)?,
        };
        let mut values = picked.values;
        if let Some(t) = self.terms {
            values.truncate(t);
        }
        if values.len() < MIN_TERMS {
            return Err(Error::Selection {
                achieved: values.len(),
                required: MIN_TERMS,
            });
        }
        Ok(IndexSequence {
            kind: picked.kind,
            values,
        })
    }

    /// `1/p - 1` when it is an integer.
    fn integer_q(&self) -> Option<i64> {
        let r = 1.0 / self.p;
        let q = r.round();
        (r == q && 1.0 / q == self.p).then_some(q as i64 - 1)
    }

    fn q(&self) -> f64 {
        1.0 / self.p - 1.0
    }
}

/// `2^{e/2}`, exact when `e` is even.
fn pow2_half(e: i64) -> Result<Number> {
    if e % 2 == 0 {
        Ok(Number::Exact(Dyadic::pow2((e / 2) as i32)?))
    } else {
        Ok(Number::Float((e as f64 / 2.0).exp2()))
    }
}

fn pow2_int(e: i64) -> Result<Number> {
    Ok(Number::Exact(Dyadic::pow2(e as i32)?))
}

/// `V^{-1/2}`, exact when `V` is a power of four.
fn inv_sqrt(v: u32) -> Result<Number> {
    if v.is_power_of_two() && v.trailing_zeros() % 2 == 0 {
        pow2_int(-(v.trailing_zeros() as i64 / 2))
    } else {
        Ok(Number::Float(1.0 / (v as f64).sqrt()))
    }
}

fn inv(v: u32) -> Result<Number> {
    if v.is_power_of_two() {
        pow2_int(-(v.trailing_zeros() as i64))
    } else {
        Ok(Number::Float(1.0 / v as f64))
    }
}

fn mul(a: Number, b: Number) -> Result<Number> {
    match (a, b) {
        (Number::Exact(x), Number::Exact(y)) => Ok(Number::Exact(x.checked_mul(&y)?)),
        (a, b) => Ok(Number::Float(a.to_f64() * b.to_f64())),
    }
}

/// `Φ^{e}(α)` for `e ∈ {1/2, -1/2, p/2, …}`; exact only for the unit weight.
fn phi_pow(phi: &WeightFunction, alpha: u64, e: f64) -> Number {
    if phi.is_one() {
        Number::Exact(Dyadic::ONE)
    } else {
        Number::Float(phi.eval(alpha).powf(e))
    }
}

/// Scale `s_k` of the atom `s_k (D_{2^{m+1}} - D_{2^m})`, `m = |α_k|`.
pub fn atom_scale(spec: &ConstructionSpec, alpha: u64) -> Result<Number> {
    let m = index::order(alpha) as i64;
    if spec.theorem.is_h1() {
        return Ok(Number::Exact(Dyadic::ONE));
    }
    match spec.integer_q() {
        Some(q) => pow2_int(m * q),
        None => Ok(Number::Float((m as f64 * spec.q()).exp2())),
    }
}

/// Weight `λ_k` of the `k`-th atom.
pub fn lambda(spec: &ConstructionSpec, alpha: u64) -> Result<Number> {
    let d = index::gap(alpha) as i64;
    let v = index::variation(alpha);
    let phi_half = phi_pow(&spec.phi, alpha, 0.5);
    match spec.theorem {
        Theorem::T1b => {
            let decay = match spec.integer_q() {
                Some(q) => pow2_half(-d * q)?,
                None => Number::Float((-(d as f64) * spec.q() / 2.0).exp2()),
            };
            mul(phi_half, decay)
        }
        Theorem::T2b => mul(phi_half, inv_sqrt(v)?),
        Theorem::T4b => match spec.integer_q() {
            Some(q) => pow2_int(-d * q),
            None => Ok(Number::Float((-(d as f64) * spec.q()).exp2())),
        },
        Theorem::T5b => inv(v),
    }
}

/// Closed-form block coefficient of `F` on `[2^{|α|}, 2^{|α|+1})`.
fn block_law(spec: &ConstructionSpec, alpha: u64) -> Result<Number> {
    let m = index::order(alpha) as i64;
    let l = index::low(alpha) as i64;
    let v = index::variation(alpha);
    match spec.theorem {
        Theorem::T1b => {
            let power = match spec.integer_q() {
                Some(q) => pow2_half((m + l) * q)?,
                None => Number::Float(((m + l) as f64 * spec.q() / 2.0).exp2()),
            };
            mul(phi_pow(&spec.phi, alpha, 0.5), power)
        }
        Theorem::T2b => mul(phi_pow(&spec.phi, alpha, 0.5), inv_sqrt(v)?),
        Theorem::T4b => match spec.integer_q() {
            Some(q) => pow2_int(l * q),
            None => Ok(Number::Float((l as f64 * spec.q()).exp2())),
        },
        Theorem::T5b => inv(v),
    }
}

/// `f̂(j)` of the realised martingale, from the closed-form coefficient law
/// alone.
pub fn coefficient_oracle(spec: &ConstructionSpec, alphas: &IndexSequence, j: u64) -> Result<Number> {
    if j >> spec.level != 0 {
        return Err(Error::OutOfRange(format!("j = {j} needs level > {}", spec.level)));
    }
    if j == 0 {
        return Ok(Number::Exact(Dyadic::ZERO));
    }
    let block = index::order(j);
    match alphas.values.iter().find(|&&a| index::order(a) == block) {
        Some(&a) => block_law(spec, a),
        None => Ok(Number::Exact(Dyadic::ZERO)),
    }
}

/// The full oracle vector `j = 0..2^N`, exact when every entry is.
pub fn oracle_coefficients(spec: &ConstructionSpec, alphas: &IndexSequence) -> Result<CoefficientVector> {
    let values = (0..1u64 << spec.level)
        .map(|j| coefficient_oracle(spec, alphas, j))
        .collect::<Result<Vec<_>>>()?;
    CoefficientVector::new(spec.level, numbers_to_samples(&values)?)
}

fn numbers_to_samples(values: &[Number]) -> Result<Samples> {
    if values.iter().all(Number::is_exact) {
        let ds: Vec<Dyadic> = values.iter().map(|v| v.exact().expect("exact")).collect();
        crate::group::aligned(&ds)
    } else {
        Ok(Samples::Float(values.iter().map(Number::to_f64).collect()))
    }
}

/// A p-atom together with the interval it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub support: DyadicInterval,
    pub f: StepFunction,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomReport {
    pub zero_mean: bool,
    pub within_sup_bound: bool,
    pub supported: bool,
    pub sup: f64,
    pub sup_bound: f64,
    pub violations: Vec<String>,
}

impl AtomReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check `∫ a = 0`, `‖a‖_∞ ≤ μ(I)^{-1/p}` and `supp a ⊂ I`.
///
/// Exact when the atom is exact and `rank / p` is an integer; float checks use
/// a relative slack of `1e-12`.
pub fn atom_check(a: &Atom) -> AtomReport {
    let rank = a.support.rank();
    let level = a.f.level();
    let mut violations = Vec::new();

    let supported = if rank > level {
        violations.push(format!("support rank {rank} exceeds level {level}"));
        false
    } else {
        let outside = (0..a.f.len()).find(|&ix| {
            !a.support.contains(ix as u64) && a.f.value(ix).to_f64() != 0.0
        });
        if let Some(ix) = outside {
            violations.push(format!("nonzero value at cell {ix} outside {}", a.support));
        }
        outside.is_none()
    };

    let sup = a.f.sup_norm();
    let e = rank as f64 / a.p;
    let sup_bound = e.exp2();
    let within_sup_bound = match (sup, e.fract() == 0.0 && e <= 120.0) {
        (Number::Exact(s), true) => s <= Dyadic::pow2(e as i32).expect("bounded exponent"),
        (s, _) => s.to_f64() <= sup_bound * (1.0 + 1e-12),
    };
    if !within_sup_bound {
        violations.push(format!("sup {} exceeds μ(I)^(-1/p) = {sup_bound}", sup.to_f64()));
    }

    let zero_mean = match a.f.integrate() {
        Ok(Number::Exact(d)) => d.is_zero(),
        Ok(Number::Float(x)) => x.abs() <= 1e-12 * sup.to_f64().max(1.0),
        Err(_) => false,
    };
    if !zero_mean {
        violations.push("integral is not zero".into());
    }

    AtomReport {
        zero_mean,
        within_sup_bound,
        supported,
        sup: sup.to_f64(),
        sup_bound,
        violations,
    }
}

/// `D_{2^{m+1}} - D_{2^m}` at level `N`: `2^m` on `I_{m+1}`, `-2^m` on
/// `I_m \ I_{m+1}`, zero elsewhere.
pub fn kernel_difference(m: u32, level: u32) -> Result<StepFunction> {
    if m + 1 > level {
        return Err(Error::OutOfRange(format!("D_2^{} needs level ≥ {}", m + 1, m + 1)));
    }
    dirichlet_formula(1 << (m + 1), level)?.sub(&dirichlet_formula(1 << m, level)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizedConstruction {
    pub spec: ConstructionSpec,
    pub alphas: IndexSequence,
    pub lambdas: Vec<Number>,
    pub atoms: Vec<Atom>,
    /// The truncated martingale `Σ λ_k a_k` at level `N`.
    pub f: StepFunction,
    pub oracle: CoefficientVector,
}

/// Outcome of comparing `fwht(F)` with the coefficient oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub exact: bool,
    pub mismatches: usize,
    pub max_rel_error: f64,
}

impl OracleCheck {
    pub fn ok(&self) -> bool {
        self.mismatches == 0
    }
}

/// Relative tolerance for float oracle comparisons.
pub const ORACLE_TOL: f64 = 1e-12;

impl RealizedConstruction {
    pub fn mode(&self) -> Mode {
        self.f.mode()
    }

    /// `Σ |λ_k|^p`.
    pub fn lambda_p_sum(&self) -> f64 {
        self.lambdas.iter().map(|l| l.to_f64().abs().powf(self.spec.p)).sum()
    }

    pub fn verify_oracle(&self) -> Result<OracleCheck> {
        let c = fwht(&self.f)?;
        let exact = c.mode() == Mode::Exact && self.oracle.mode() == Mode::Exact;
        if exact {
            let mismatches = (0..c.len()).filter(|&j| c.coeff(j) != self.oracle.coeff(j)).count();
            return Ok(OracleCheck {
                exact,
                mismatches,
                max_rel_error: if mismatches == 0 { 0.0 } else { f64::INFINITY },
            });
        }
        let got = c.to_f64_vec();
        let want = self.oracle.to_f64_vec();
        let scale = want.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let mut mismatches = 0;
        let mut max_rel_error = 0.0f64;
        for (g, w) in got.iter().zip(&want) {
            // Zero entries are compared against the largest coefficient.
            let denom = if *w == 0.0 { scale } else { w.abs() };
            let rel = (g - w).abs() / denom;
            max_rel_error = max_rel_error.max(rel);
            if rel > ORACLE_TOL {
                mismatches += 1;
            }
        }
        Ok(OracleCheck {
            exact,
            mismatches,
            max_rel_error,
        })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "spec": self.spec,
            "alphas": self.alphas.values,
            "lambdas": self.lambdas,
            "lambda_p_sum": self.lambda_p_sum(),
            "function": self.f.to_file(),
        })
    }
}

/// Realise `F = Σ_k λ_k a_k` for the selected `α_k`.
///
/// Exact arithmetic is used when every `λ_k` and atom scale is dyadic.
pub fn build(spec: &ConstructionSpec) -> Result<RealizedConstruction> {
    let alphas = spec.select()?;
    let level = spec.level;
    let mut lambdas = Vec::with_capacity(alphas.len());
    let mut atoms = Vec::with_capacity(alphas.len());
    let mut terms = Vec::with_capacity(alphas.len());
    for &alpha in &alphas.values {
        let m = index::order(alpha);
        let delta = kernel_difference(m, level)?;
        let scale = atom_scale(spec, alpha)?;
        let lam = lambda(spec, alpha)?;
        let atom = Atom {
            support: DyadicInterval::at_zero(m)?,
            f: delta.scale(scale)?,
            p: spec.p,
        };
        terms.push(atom.f.scale(lam)?);
        lambdas.push(lam);
        atoms.push(atom);
    }
    let exact = terms.iter().all(|t| t.mode() == Mode::Exact);
    let mut f = StepFunction::zero(level, if exact { Mode::Exact } else { Mode::Float })?;
    for t in &terms {
        f = f.add(t)?;
    }
    let oracle = oracle_coefficients(spec, &alphas)?;
    Ok(RealizedConstruction {
        spec: spec.clone(),
        alphas,
        lambdas,
        atoms,
        f,
        oracle,
    })
}

/// Result of the tail-term probe for one `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ProbeOutcome {
    Skipped {
        k: usize,
        alpha: u64,
        reason: String,
    },
    Compared {
        k: usize,
        alpha: u64,
        predicted: Number,
        measured_min: Number,
        measured_max: Number,
        exact: bool,
        matches: bool,
    },
}

impl ProbeOutcome {
    pub fn passed(&self) -> bool {
        match self {
            ProbeOutcome::Skipped { .. } => true,
            ProbeOutcome::Compared { matches, .. } => *matches,
        }
    }
}

/// Compare `|II|` with its predicted constant on the ring
/// `I_{⟨α_k⟩} \ I_{⟨α_k⟩+1}`, where
/// `II = (S_{α_k} F - S_{2^{|α_k|}} F) / Φ(α_k)`.
///
/// The predicted constant is `2^{|α|(1/p-1)/2} 2^{⟨α⟩(1/p+1)/2} / Φ^{1/2}(α)`.
pub fn proof_probe_ii(rc: &RealizedConstruction, k: usize) -> Result<ProbeOutcome> {
    let spec = &rc.spec;
    if spec.theorem != Theorem::T1b {
        return Err(Error::Domain("the tail probe applies to t1b constructions".into()));
    }
    let alpha = *rc
        .alphas
        .values
        .get(k)
        .ok_or_else(|| Error::OutOfRange(format!("term {k} of {}", rc.alphas.len())))?;
    let m = index::order(alpha);
    let l = index::low(alpha);
    if l == m {
        return Ok(ProbeOutcome::Skipped {
            k,
            alpha,
            reason: "⟨α⟩ = |α|".into(),
        });
    }
    let diff = partial_sum(&rc.f, alpha)?.sub(&partial_sum(&rc.f, 1 << m)?)?;
    let inv_phi = if spec.phi.is_one() {
        Number::Exact(Dyadic::ONE)
    } else {
        Number::Float(1.0 / spec.phi.eval(alpha))
    };
    let ii = diff.scale(inv_phi)?;

    let predicted = match spec.integer_q() {
        Some(q) => mul(
            pow2_half(m as i64 * q + l as i64 * (q + 2))?,
            phi_pow(&spec.phi, alpha, -0.5),
        )?,
        None => Number::Float(
            (m as f64 * spec.q() / 2.0 + l as f64 * (1.0 / spec.p + 1.0) / 2.0).exp2()
                / spec.phi.eval(alpha).sqrt(),
        ),
    };

    let ring: Vec<Number> = (0..ii.len())
        .filter(|&ix| ix != 0 && ix.trailing_zeros() == l)
        .map(|ix| ii.value(ix))
        .collect();
    let exact = predicted.is_exact() && ii.mode() == Mode::Exact;
    let (measured_min, measured_max, matches) = if exact {
        let mags: Vec<Dyadic> = ring.iter().map(|v| v.exact().expect("exact").abs()).collect();
        let lo = *mags.iter().min().expect("ring is non-empty");
        let hi = *mags.iter().max().expect("ring is non-empty");
        let want = predicted.exact().expect("exact");
        (Number::Exact(lo), Number::Exact(hi), lo == want && hi == want)
    } else {
        let mags: Vec<f64> = ring.iter().map(|v| v.to_f64().abs()).collect();
        let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mags.iter().copied().fold(0.0, f64::max);
        let want = predicted.to_f64();
        let close = |x: f64| (x - want).abs() <= ORACLE_TOL * want;
        (Number::Float(lo), Number::Float(hi), close(lo) && close(hi))
    };
    Ok(ProbeOutcome::Compared {
        k,
        alpha,
        predicted,
        measured_min,
        measured_max,
        exact,
        matches,
    })
}

/// Scale used for the integer draws inside [`random_p_atom`].
const ATOM_GRID: i128 = 1 << 20;

/// Random p-atom on `I_M` at level `N`: integer draws in `[-K, K]` on the
/// `2^{N-M}` cells of `I_M`, one of them pinned at `±K`, corrected to sum
/// zero and scaled so that the sup equals `μ(I_M)^{-1/p}`.
///
/// A nonzero mean-zero function on `I_M` needs at least two cells, so `M < N`
/// is required.
pub fn random_p_atom(p: f64, rank: u32, level: u32, seed: u64) -> Result<Atom> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("p = {p} must lie in (0, 1]")));
    }
    check_level(level)?;
    if rank >= level {
        return Err(Error::OutOfRange(format!(
            "an atom on I_{rank} needs level > {rank}, got {level}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = 1usize << (level - rank);
    let pinned = rng.gen_range(0..cells);
    let sign = if rng.gen::<bool>() { 1 } else { -1 };
    let mut v: Vec<i128> = (0..cells)
        .map(|c| if c == pinned { sign * ATOM_GRID } else { rng.gen_range(-ATOM_GRID..=ATOM_GRID) })
        .collect();
    let mut excess: i128 = v.iter().sum();
    let start = rng.gen_range(0..cells);
    for i in 0..cells {
        if excess == 0 {
            break;
        }
        let c = (start + i) % cells;
        if c == pinned {
            continue;
        }
        let target = (v[c] - excess).clamp(-ATOM_GRID, ATOM_GRID);
        excess -= v[c] - target;
        v[c] = target;
    }
    debug_assert_eq!(excess, 0);

    let mut numer = vec![0i128; 1 << level];
    for (c, &x) in v.iter().enumerate() {
        numer[c << rank] = x;
    }
    let raw = StepFunction::exact(level, numer, 0)?;
    let e = rank as f64 / p;
    let scale = if e.fract() == 0.0 {
        Number::Exact(Dyadic::pow2(e as i32)?.div_pow2(ATOM_GRID.trailing_zeros())?)
    } else {
        Number::Float(e.exp2() / ATOM_GRID as f64)
    };
    Ok(Atom {
        support: DyadicInterval::at_zero(rank)?,
        f: raw.scale(scale)?,
        p,
    })
}
