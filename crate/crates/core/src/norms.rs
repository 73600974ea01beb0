//! `L_p`, weak-`L_p`, maximal-function and `H_p` norms, moduli of continuity
//! and the two-sided best-approximation bounds.
//!
//! For `p < 1` the returned values are quasi-norms; nothing here relies on the
//! triangle inequality.

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{Dyadic, Number, MAX_SHIFT};
use crate::error::{Error, Result};
use crate::group::{Samples, StepFunction};
use crate::transform::partial_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue {
    pub value: Number,
    pub p: f64,
}

impl NormValue {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn exact(&self) -> Option<Dyadic> {
        self.value.exact()
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("exponent p = {p} must be positive and finite")));
    }
    Ok(())
}

fn float_lp(values: impl Iterator<Item = f64>, level: u32, p: f64) -> f64 {
    let sum: f64 = if p == 1.0 {
        values.map(f64::abs).sum()
    } else if p == 2.0 {
        values.map(|x| x * x).sum()
    } else {
        values.map(|x| x.abs().powf(p)).sum()
    };
    let mean = sum * (-(level as f64)).exp2();
    if p == 1.0 {
        mean
    } else if p == 2.0 {
        mean.sqrt()
    } else {
        mean.powf(1.0 / p)
    }
}

fn exact_l1(numer: &[i128], shift: u32, level: u32) -> Result<Dyadic> {
    let mut acc = 0i128;
    for a in numer {
        acc = acc.checked_add(a.abs()).ok_or(Error::Overflow("lp_norm"))?;
    }
    let s = shift + level;
    if s > MAX_SHIFT {
        return Err(Error::Overflow("lp_norm"));
    }
    Ok(Dyadic::new(acc, s))
}

/// `(2^{-N} Σ |f|^p)^{1/p}`; exact at `p = 1` for exact input.
pub fn lp_norm(f: &StepFunction, p: f64) -> Result<NormValue> {
    check_p(p)?;
    let value = match f.samples() {
        Samples::Exact { numer, shift } if p == 1.0 => {
            Number::Exact(exact_l1(numer, *shift, f.level())?)
        }
        Samples::Exact { numer, shift } => {
            let scale = (-(*shift as f64)).exp2();
            Number::Float(float_lp(numer.iter().map(|&a| a as f64 * scale), f.level(), p))
        }
        Samples::Float(v) => Number::Float(float_lp(v.iter().copied(), f.level(), p)),
    };
    Ok(NormValue { value, p })
}

/// `sup_λ λ μ(|f| > λ)^{1/p}`, evaluated as the maximum of `v^p μ(|f| ≥ v)`
/// over the attained values `v` of `|f|`, then the `p`-th root.
pub fn weak_lp_norm(f: &StepFunction, p: f64) -> Result<NormValue> {
    check_p(p)?;
    let level = f.level();
    let value = match f.samples() {
        Samples::Exact { numer, shift } if p == 1.0 => {
            let mut mags: Vec<i128> = numer.iter().map(|a| a.abs()).collect();
            mags.sort_unstable_by(|a, b| b.cmp(a));
            let mut best = 0i128;
            let mut i = 0;
            while i < mags.len() && mags[i] > 0 {
                let v = mags[i];
                while i < mags.len() && mags[i] == v {
                    i += 1;
                }
                let cand = v.checked_mul(i as i128).ok_or(Error::Overflow("weak_lp_norm"))?;
                best = best.max(cand);
            }
            if shift + level > MAX_SHIFT {
                return Err(Error::Overflow("weak_lp_norm"));
            }
            Number::Exact(Dyadic::new(best, shift + level))
        }
        samples => {
            let mut mags: Vec<f64> = samples.to_f64_vec().into_iter().map(f64::abs).collect();
            mags.sort_unstable_by(|a, b| b.total_cmp(a));
            let total = mags.len() as f64;
            let mut best = 0.0f64;
            let mut i = 0;
            while i < mags.len() && mags[i] > 0.0 {
                let v = mags[i];
                while i < mags.len() && mags[i] == v {
                    i += 1;
                }
                best = best.max(v.powf(p) * (i as f64 / total));
            }
            Number::Float(if p == 1.0 { best } else { best.powf(1.0 / p) })
        }
    };
    Ok(NormValue { value, p })
}

/// `f*(x) = max_{0≤n≤N} |E_n f(x)|`, where `E_n f` is the mean over `I_n(x)`.
///
/// Computed top-down over the dyadic tree: the running maximum at level
/// `n + 1` is the parent's maximum combined with the new block mean.
pub fn maximal_function(f: &StepFunction) -> Result<StepFunction> {
    let level = f.level();
    match f.samples() {
        Samples::Exact { numer, shift } => {
            // Lift to the shift of E_0 so every block mean is an integer.
            let top = shift + level;
            if top > MAX_SHIFT {
                return Err(Error::Overflow("maximal_function"));
            }
            let lifted = numer
                .iter()
                .map(|&a| a.checked_mul(1i128 << level).ok_or(Error::Overflow("maximal_function")))
                .collect::<Result<Vec<_>>>()?;
            let means = block_means(lifted, level, |a, b| {
                a.checked_add(b).map(|s| s >> 1).ok_or(Error::Overflow("maximal_function"))
            })?;
            let max = tree_max(&means, |a: &i128| a.abs());
            StepFunction::exact(level, max, top)
        }
        Samples::Float(v) => {
            let means = block_means(v.clone(), level, |a, b| Ok(0.5 * (a + b)))?;
            let max = tree_max(&means, |a: &f64| a.abs());
            StepFunction::float(level, max)
        }
    }
}

/// `means[n]` holds the `2^n` block means at rank `n`, for `n = 0..=N`.
fn block_means<T: Copy>(
    finest: Vec<T>,
    level: u32,
    avg: impl Fn(T, T) -> Result<T>,
) -> Result<Vec<Vec<T>>> {
    let mut means = vec![finest];
    for n in (0..level).rev() {
        let width = 1usize << n;
        let prev = means.last().expect("non-empty");
        let next = (0..width)
            .map(|j| avg(prev[j], prev[j + width]))
            .collect::<Result<Vec<_>>>()?;
        means.push(next);
    }
    means.reverse();
    Ok(means)
}

fn tree_max<T: Copy + PartialOrd>(means: &[Vec<T>], abs: impl Fn(&T) -> T) -> Vec<T> {
    let mut cur: Vec<T> = means[0].iter().map(&abs).collect();
    for m in &means[1..] {
        let width = cur.len();
        cur = m
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let a = abs(a);
                let parent = cur[j % width];
                if a > parent {
                    a
                } else {
                    parent
                }
            })
            .collect();
    }
    cur
}

/// `‖f*‖_p`.
pub fn hp_norm(f: &StepFunction, p: f64) -> Result<NormValue> {
    check_p(p)?;
    lp_norm(&maximal_function(f)?, p)
}

fn check_rank(f: &StepFunction, n: u32) -> Result<()> {
    if n > f.level() {
        return Err(Error::OutOfRange(format!(
            "rank {n} exceeds level {}",
            f.level()
        )));
    }
    Ok(())
}

/// `ω_p(2^{-n}, f) = max_{h ∈ I_n} ‖f(· ⊕ h) - f‖_p` over the `2^{N-n}`
/// translations whose first `n` coordinates vanish.
pub fn modulus_lp(f: &StepFunction, n: u32, p: f64) -> Result<NormValue> {
    check_p(p)?;
    if p < 1.0 {
        return Err(Error::Domain(format!("modulus_lp needs p ≥ 1, got {p}")));
    }
    check_rank(f, n)?;
    let level = f.level();
    let shifts: Vec<usize> = (0..1usize << (level - n)).map(|t| t << n).collect();
    let value = match f.samples() {
        Samples::Exact { numer, shift } if p == 1.0 => {
            let best = shifts
                .par_iter()
                .map(|&h| {
                    numer.iter().enumerate().try_fold(0i128, |acc, (ix, &a)| {
                        numer[ix ^ h]
                            .checked_sub(a)
                            .and_then(|d| acc.checked_add(d.abs()))
                    })
                })
                .collect::<Option<Vec<_>>>()
                .ok_or(Error::Overflow("modulus_lp"))?
                .into_iter()
                .max()
                .unwrap_or(0);
            if shift + level > MAX_SHIFT {
                return Err(Error::Overflow("modulus_lp"));
            }
            Number::Exact(Dyadic::new(best, shift + level))
        }
        samples => {
            let v = samples.to_f64_vec();
            let best = shifts
                .par_iter()
                .map(|&h| float_lp((0..v.len()).map(|ix| v[ix ^ h] - v[ix]), level, p))
                .reduce(|| 0.0, f64::max);
            Number::Float(best)
        }
    };
    Ok(NormValue { value, p })
}

/// `ω_{H_p}(2^{-n}, f) = ‖f - S_{2^n} f‖_{H_p}`.
pub fn modulus_hp(f: &StepFunction, n: u32, p: f64) -> Result<NormValue> {
    check_p(p)?;
    check_rank(f, n)?;
    hp_norm(&f.sub(&partial_sum(f, 1u64 << n)?)?, p)
}

/// Lower and upper bounds for the best approximation `E_{2^n}(f, L_p)`:
/// `(½‖f - S_{2^n} f‖_p, ‖f - S_{2^n} f‖_p)`.
pub fn best_approx_bounds(f: &StepFunction, n: u32, p: f64) -> Result<(NormValue, NormValue)> {
    check_p(p)?;
    if p < 1.0 {
        return Err(Error::Domain(format!("best_approx_bounds needs p ≥ 1, got {p}")));
    }
    check_rank(f, n)?;
    let upper = lp_norm(&f.sub(&partial_sum(f, 1u64 << n)?)?, p)?;
    let lower = NormValue {
        value: match upper.value {
            Number::Exact(d) => Number::Exact(d.div_pow2(1)?),
            Number::Float(x) => Number::Float(0.5 * x),
        },
        p,
    };
    Ok((lower, upper))
}
