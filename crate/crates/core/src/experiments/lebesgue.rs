use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{float_value, ExperimentReport};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::index;
use crate::transform::lebesgue_constant;

/// Largest `max_n` accepted for the exhaustive part of the sweep.
pub const EXHAUSTIVE_CAP: u64 = 1 << 12;

/// Random indices drawn from `[1, 2^max_exponent)` on top of the exhaustive range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub count: usize,
    pub seed: u64,
    pub max_exponent: u32,
}

/// `L_S(n)` with `V(n)/8 ≤ L_S(n) ≤ V(n)` checked exactly on every row.
///
/// Columns: `n, variation, gap, lebesgue, ratio` where `lebesgue` is exact.
pub fn lebesgue_sweep(max_n: u64, sample: Option<Sample>) -> Result<ExperimentReport> {
    if max_n > EXHAUSTIVE_CAP {
        return Err(Error::OutOfRange(format!(
            "exhaustive sweep is capped at {EXHAUSTIVE_CAP}, got {max_n}"
        )));
    }
    let mut ns: BTreeSet<u64> = (1..=max_n).collect();
    if let Some(s) = sample {
        if s.max_exponent == 0 || s.max_exponent > 29 {
            return Err(Error::OutOfRange(format!(
                "sample exponent {} must lie in 1..=29",
                s.max_exponent
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        ns.extend((0..s.count).map(|_| rng.gen_range(1..1u64 << s.max_exponent)));
    }
    let ns: Vec<u64> = ns.into_iter().collect();

    let rows = ns
        .par_iter()
        .map(|&n| {
            let v = index::variation(n);
            let l = lebesgue_constant(n)?;
            let within = Dyadic::new(v as i128, 3) <= l && l <= Dyadic::from_int(v as i128);
            Ok((n, v, index::gap(n), l, within))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new("lebesgue", &["n", "variation", "gap", "lebesgue", "ratio"]);
    report.config("max_n", max_n).config("sample", sample);
    let mut violations = Vec::new();
    let (mut min_ratio, mut max_ratio) = (f64::INFINITY, 0.0f64);
    for &(n, v, d, l, within) in &rows {
        let ratio = l.to_f64() / v as f64;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        if !within {
            violations.push(n);
        }
        report.push_row(vec![json!(n), json!(v), json!(d), json!(l), float_value(ratio)]);
    }
    report
        .summary("rows", rows.len())
        .summary("min_ratio", min_ratio)
        .summary("max_ratio", max_ratio)
        .summary("violations", &violations);
    report.check(
        "lebesgue_two_sided",
        violations.is_empty(),
        format!("V/8 ≤ L_S ≤ V on {} indices, {} violations", rows.len(), violations.len()),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_rows() {
        let r = lebesgue_sweep(8, None).unwrap();
        assert_eq!(r.rows.len(), 8);
        assert!(r.passed());
        // n = 3: V = 2, L_S = 3/2, ratio 3/4.
        assert_eq!(r.rows[2][0], json!(3));
        assert_eq!(r.rows[2][1], json!(2));
        assert_eq!(r.rows[2][3], json!("3/2^1"));
        assert_eq!(r.rows[2][4], json!(0.75));
        for k in 0..4 {
            let row = &r.rows[(1 << k) - 1];
            assert_eq!((row[1].clone(), row[3].clone()), (json!(2), json!("1/2^0")));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = Some(Sample { count: 10, seed: 4, max_exponent: 16 });
        assert_eq!(lebesgue_sweep(4, s).unwrap(), lebesgue_sweep(4, s).unwrap());
        assert!(lebesgue_sweep(EXHAUSTIVE_CAP + 1, None).is_err());
    }
}
