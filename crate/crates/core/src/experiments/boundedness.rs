use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{float_value, ExperimentReport};
use crate::error::{Error, Result};
use crate::group::{random_step, Mode, StepFunction};
use crate::index;
use crate::martingale::random_p_atom;
use crate::norms::hp_norm;
use crate::transform::PartialSums;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundednessConfig {
    pub p: f64,
    pub level: u32,
    /// Partial sums `S_1 … S_{max_n}` are measured.
    pub max_n: u64,
    pub trials: usize,
    pub seed: u64,
}

impl BoundednessConfig {
    pub fn new(p: f64, level: u32, trials: usize, seed: u64) -> Self {
        BoundednessConfig {
            p,
            level,
            max_n: 1 << level,
            trials,
            seed,
        }
    }
}

/// `2^{d(n)(1/p-1)}` for `p < 1`, `V(n)` for `p = 1`.
pub fn growth_bound(n: u64, p: f64) -> f64 {
    if p >= 1.0 {
        index::variation(n) as f64
    } else {
        (index::gap(n) as f64 * (1.0 / p - 1.0)).exp2()
    }
}

/// Input function of trial `t`: a random p-atom on a random `I_M` when
/// `p < 1`, a random step function in `[-1, 1]` when `p = 1`.
pub fn trial_input(cfg: &BoundednessConfig, t: usize) -> Result<StepFunction> {
    let seed = cfg.seed.wrapping_add(t as u64);
    if cfg.p < 1.0 {
        let rank = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15).gen_range(0..cfg.level);
        Ok(random_p_atom(cfg.p, rank, cfg.level, seed)?.f.to_float())
    } else {
        random_step(cfg.level, seed, -1.0, 1.0, Mode::Float)
    }
}

/// `‖S_n F‖_{H_p} / (B(n) ‖F‖_{H_p})` for `n = 1..=max_n`.
pub fn normalized_ratios(f: &StepFunction, p: f64, max_n: u64) -> Result<Vec<f64>> {
    let norm = hp_norm(f, p)?.to_f64();
    if norm == 0.0 {
        return Err(Error::Domain("input has zero H_p norm".into()));
    }
    let mut sums = PartialSums::new(f)?;
    let mut out = Vec::with_capacity(max_n as usize);
    while let Some(step) = sums.advance() {
        let (n, s) = step?;
        if n > max_n {
            break;
        }
        out.push(hp_norm(&s, p)?.to_f64() / (growth_bound(n, p) * norm));
    }
    Ok(out)
}

/// Normalised partial-sum ratios over random inputs, with a no-growth check:
/// the maximum over each dyadic block `[2^j, 2^{j+1})` must stay within twice
/// the maximum over `n ≤ max_n / 2`.
///
/// Columns: `n, gap, variation, bound, max_ratio, mean_ratio`.
pub fn boundedness_sweep(cfg: &BoundednessConfig) -> Result<ExperimentReport> {
    if !(cfg.p > 0.0 && cfg.p <= 1.0) {
        return Err(Error::Domain(format!("p = {} must lie in (0, 1]", cfg.p)));
    }
    if cfg.level == 0 || cfg.max_n == 0 || cfg.max_n > 1 << cfg.level {
        return Err(Error::OutOfRange(format!(
            "max_n = {} must lie in 1..=2^{}",
            cfg.max_n, cfg.level
        )));
    }
    if cfg.trials == 0 {
        return Err(Error::Domain("at least one trial is needed".into()));
    }
    let per_trial = (0..cfg.trials)
        .into_par_iter()
        .map(|t| normalized_ratios(&trial_input(cfg, t)?, cfg.p, cfg.max_n))
        .collect::<Result<Vec<_>>>()?;

    let len = cfg.max_n as usize;
    let mut max_ratio = vec![0.0f64; len];
    let mut mean_ratio = vec![0.0f64; len];
    for ratios in &per_trial {
        for (i, &r) in ratios.iter().enumerate() {
            max_ratio[i] = max_ratio[i].max(r);
            mean_ratio[i] += r / cfg.trials as f64;
        }
    }

    let mut report = ExperimentReport::new(
        "boundedness",
        &["n", "gap", "variation", "bound", "max_ratio", "mean_ratio"],
    );
    report.config("config", cfg);
    for i in 0..len {
        let n = i as u64 + 1;
        report.push_row(vec![
            json!(n),
            json!(index::gap(n)),
            json!(index::variation(n)),
            float_value(growth_bound(n, cfg.p)),
            float_value(max_ratio[i]),
            float_value(mean_ratio[i]),
        ]);
    }

    let sup = max_ratio.iter().copied().fold(0.0, f64::max);
    let half = (cfg.max_n / 2).max(1) as usize;
    let first_half = max_ratio[..half].iter().copied().fold(0.0, f64::max);
    let mut blocks = Vec::new();
    let mut grown = Vec::new();
    for j in 0..=index::order(cfg.max_n) {
        let lo = 1u64 << j;
        let hi = ((lo << 1) - 1).min(cfg.max_n);
        let m = (lo..=hi).map(|n| max_ratio[n as usize - 1]).fold(0.0, f64::max);
        if m > 2.0 * first_half {
            grown.push(j);
        }
        blocks.push(json!({ "block": j, "from": lo, "to": hi, "max_ratio": float_value(m) }));
    }
    report
        .summary("sup_ratio", float_value(sup))
        .summary("first_half_max", float_value(first_half))
        .summary("block_maxima", blocks);
    report.check(
        "no_growth",
        grown.is_empty(),
        format!("block maxima within 2 × {first_half:.6}; blocks above: {grown:?}"),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::walsh;

    #[test]
    fn walsh_input_ratio_is_inverse_bound() {
        let w = walsh(5, 4).unwrap().to_float();
        let r = normalized_ratios(&w, 1.0, 16).unwrap();
        for (i, &x) in r.iter().enumerate() {
            let n = i as u64 + 1;
            let want = if n > 5 { 1.0 / growth_bound(n, 1.0) } else { 0.0 };
            assert!((x - want).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn atoms_vanish_below_their_rank() {
        let cfg = BoundednessConfig::new(0.5, 6, 4, 3);
        for t in 0..4 {
            let f = trial_input(&cfg, t).unwrap();
            let r = normalized_ratios(&f, 0.5, 64).unwrap();
            let rank = (0..6).rev().find(|&m| f.values_f64().iter().enumerate().all(|(ix, &v)| v == 0.0 || ix % (1 << m) == 0)).unwrap();
            for n in 1..=(1u64 << rank) {
                assert_eq!(r[n as usize - 1], 0.0);
            }
        }
    }

    #[test]
    fn small_sweep_is_deterministic() {
        let cfg = BoundednessConfig::new(1.0, 5, 6, 11);
        let a = boundedness_sweep(&cfg).unwrap();
        assert_eq!(a, boundedness_sweep(&cfg).unwrap());
        assert_eq!(a.rows.len(), 32);
    }
}
