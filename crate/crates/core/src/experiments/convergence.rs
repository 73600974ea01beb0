use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::boundedness::growth_bound;
use super::report::{float_value, ExperimentReport};
use crate::dyadic::Number;
use crate::error::{Error, Result};
use crate::group::{random_step, Mode, StepFunction};
use crate::index::{self, IndexSequence, SequenceKind};
use crate::martingale::{build, ConstructionSpec, Theorem};
use crate::norms::{hp_norm, modulus_hp, weak_lp_norm};
use crate::transform::partial_sum;

/// `Σ_{m=0}^{N} decay^m g_m` with `g_m` a random level-`m` step function in
/// `[-1, 1]` viewed at level `N`; its `H_p` modulus decays like `decay^k`.
pub fn random_martingale(level: u32, seed: u64, decay: f64) -> Result<StepFunction> {
    if !(decay > 0.0 && decay < 1.0) {
        return Err(Error::Domain(format!("decay {decay} must lie in (0, 1)")));
    }
    let mut f = StepFunction::zero(level, Mode::Float)?;
    for m in 0..=level {
        let g = random_step(m, seed.wrapping_add(m as u64), -1.0, 1.0, Mode::Float)?;
        f = f.add(&g.refine(level)?.scale(Number::Float(decay.powi(m as i32)))?)?;
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub level: u32,
    pub p: f64,
    pub sequence: IndexSequence,
    pub seed: u64,
    pub decay: f64,
}

impl ConvergenceConfig {
    pub fn new(kind: SequenceKind, level: u32, p: f64, seed: u64) -> Result<Self> {
        Ok(ConvergenceConfig {
            level,
            p,
            sequence: IndexSequence::family(kind, level)?,
            seed,
            decay: 0.5,
        })
    }
}

/// Rank `k` with `2^k < n ≤ 2^{k+1}`.
fn bracket(n: u64) -> u32 {
    index::order(n - 1)
}

/// `‖S_n F - F‖_{H_p}` along a sequence against `B(n) ω_{H_p}(2^{-k}, F)`,
/// `2^k < n ≤ 2^{k+1}`, for a random martingale `F`.
///
/// For sequences with `d(n) ≤ 1` the errors must be non-increasing and the
/// last one below a quarter of the first.
///
/// Columns: `n, k, gap, error, modulus, bound, ratio`.
pub fn convergence_run(cfg: &ConvergenceConfig) -> Result<ExperimentReport> {
    if !(cfg.p > 0.0 && cfg.p <= 1.0) {
        return Err(Error::Domain(format!("p = {} must lie in (0, 1]", cfg.p)));
    }
    let f = random_martingale(cfg.level, cfg.seed, cfg.decay)?;
    let ns: Vec<u64> = cfg
        .sequence
        .bounded(cfg.level)
        .values
        .into_iter()
        .filter(|&n| n >= 2)
        .collect();
    if ns.len() < 2 {
        return Err(Error::Selection {
            achieved: ns.len(),
            required: 2,
        });
    }
    let rows = ns
        .par_iter()
        .map(|&n| {
            let k = bracket(n);
            let err = hp_norm(&partial_sum(&f, n)?.sub(&f)?, cfg.p)?.to_f64();
            let omega = modulus_hp(&f, k, cfg.p)?.to_f64();
            Ok((n, k, err, omega))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new(
        "convergence",
        &["n", "k", "gap", "error", "modulus", "bound", "ratio"],
    );
    report.config("config", cfg);
    let mut max_ratio = 0.0f64;
    for &(n, k, err, omega) in &rows {
        let bound = growth_bound(n, cfg.p) * omega;
        let ratio = if bound == 0.0 { 0.0 } else { err / bound };
        max_ratio = max_ratio.max(ratio);
        report.push_row(vec![
            json!(n),
            json!(k),
            json!(index::gap(n)),
            float_value(err),
            float_value(omega),
            float_value(bound),
            float_value(ratio),
        ]);
    }
    report.summary("max_ratio", float_value(max_ratio));
    report.check(
        "ratio_bounded",
        max_ratio.is_finite(),
        format!("‖S_n F - F‖ / (B(n) ω) ≤ {max_ratio:.6}"),
    );

    let bounded_gap = ns.iter().all(|&n| index::gap(n) <= 1);
    if bounded_gap {
        let errs: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
        let first = errs[0];
        let last = *errs.last().expect("non-empty");
        report
            .summary("first_error", float_value(first))
            .summary("last_error", float_value(last));
        report.check(
            "errors_non_increasing",
            monotone,
            "partial-sum errors along the sequence never increase",
        );
        report.check(
            "errors_decay",
            last < first / 4.0,
            format!("last error {last:.3e} vs first {first:.3e}"),
        );
    }
    Ok(report)
}

/// `‖S_{α_k}F - F‖_{L_{p,∞}}` for the `t4b` construction against the lower
/// bound `c - 2/2^{(1/p-1)d(α_k)}`, and its `H_p` modulus against the tail
/// sums `Σ_{i≥k} 2^{-(1/p-1)d(α_i)}`.
///
/// `c` is not given numerically, so the run records `ĉ = min_k (M_k + 2/2^{(1/p-1)d(α_k)})`
/// and checks that every `M_k` is positive and that `M_k` does not fall below
/// half its first value.
///
/// Columns: `k, alpha, gap, measured, tail, measured_plus_tail, modulus, tail_sum, tail_sum_p`.
pub fn t4b_floor_run(spec: &ConstructionSpec) -> Result<ExperimentReport> {
    if spec.theorem != Theorem::T4b {
        return Err(Error::Domain("the floor run takes a t4b construction".into()));
    }
    let rc = build(spec)?;
    let p = spec.p;
    let q = 1.0 / p - 1.0;
    let mut report = ExperimentReport::new(
        "t4b-floor",
        &[
            "k",
            "alpha",
            "gap",
            "measured",
            "tail",
            "measured_plus_tail",
            "modulus",
            "tail_sum",
            "tail_sum_p",
        ],
    );
    report
        .config("spec", spec)
        .config("alphas", &rc.alphas.values)
        .config("mode", rc.mode());
    let oracle = rc.verify_oracle()?;
    report.check("coefficient_oracle", oracle.ok(), format!("{} mismatches", oracle.mismatches));

    let cs: Vec<f64> = rc
        .alphas
        .values
        .iter()
        .map(|&a| (-(index::gap(a) as f64) * q).exp2())
        .collect();
    let mut measured = Vec::new();
    let mut c_hat = f64::INFINITY;
    let mut literal_ok = true;
    let mut quasi_ok = true;
    for (k, &alpha) in rc.alphas.values.iter().enumerate() {
        let m = weak_lp_norm(&partial_sum(&rc.f, alpha)?.sub(&rc.f)?, p)?.to_f64();
        let tail = 2.0 * cs[k];
        c_hat = c_hat.min(m + tail);
        let modulus = modulus_hp(&rc.f, index::order(alpha), p)?.to_f64();
        let tail_sum: f64 = cs[k..].iter().sum();
        let tail_sum_p = cs[k..].iter().map(|c| c.powf(p)).sum::<f64>().powf(1.0 / p);
        literal_ok &= modulus <= tail_sum * (1.0 + 1e-12);
        quasi_ok &= modulus <= tail_sum_p * (1.0 + 1e-12);
        report.push_row(vec![
            json!(k + 1),
            json!(alpha),
            json!(index::gap(alpha)),
            float_value(m),
            float_value(tail),
            float_value(m + tail),
            float_value(modulus),
            float_value(tail_sum),
            float_value(tail_sum_p),
        ]);
        measured.push(m);
    }
    let min_m = measured.iter().copied().fold(f64::INFINITY, f64::min);
    report
        .summary("c_hat", float_value(c_hat))
        .summary("min_measured", float_value(min_m))
        .summary("modulus_below_tail_sum", literal_ok)
        .summary("modulus_below_quasi_tail_sum", quasi_ok);
    report.check(
        "positive_floor",
        min_m > 0.0 && c_hat > 0.0 && min_m >= measured[0] / 2.0,
        format!("min ‖S_α F - F‖_(p,∞) = {min_m:.6}, ĉ = {c_hat:.6}"),
    );
    report.check(
        "modulus_quasi_tail",
        quasi_ok,
        "ω_{H_p}(2^{-|α_k|}, F) ≤ (Σ_{i≥k} c_i^p)^{1/p}",
    );
    Ok(report)
}
