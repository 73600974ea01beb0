//! Walsh–Paley system, fast Walsh–Hadamard transform, partial sums and
//! Dirichlet kernels.
//!
//! Coefficients carry the `2^{-N}` normalisation, so `f̂(k)` is exactly the
//! Haar integral `∫ f w_k`; the inverse transform is an unnormalised sum.

use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, MAX_SHIFT};
use crate::error::{Error, Result};
use crate::group::{check_level, samples_from_json, Mode, Samples, StepFunction};
use crate::index;

/// Walsh–Fourier coefficients `f̂(0..2^N)` of a level-`N` step function.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    level: u32,
    samples: Samples,
}

impl CoefficientVector {
    pub fn new(level: u32, samples: Samples) -> Result<Self> {
        check_level(level)?;
        if samples.len() != 1usize << level {
            return Err(Error::OutOfRange(format!(
                "{} coefficients given for level {level}",
                samples.len()
            )));
        }
        let mut samples = samples;
        samples.normalize();
        Ok(CoefficientVector { level, samples })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn mode(&self) -> Mode {
        self.samples.mode()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    pub fn coeff(&self, k: usize) -> crate::dyadic::Number {
        self.samples.get(k)
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.samples.to_f64_vec()
    }

    /// Zero every coefficient with index `>= n`.
    pub fn truncate(&self, n: usize) -> CoefficientVector {
        let mut samples = self.samples.clone();
        match &mut samples {
            Samples::Exact { numer, .. } => numer.iter_mut().skip(n).for_each(|a| *a = 0),
            Samples::Float(v) => v.iter_mut().skip(n).for_each(|x| *x = 0.0),
        }
        samples.normalize();
        CoefficientVector {
            level: self.level,
            samples,
        }
    }

    pub fn to_file(&self) -> CoefficientFile {
        let file = StepFunction::new(self.level, self.samples.clone())
            .expect("coefficient vector has a valid length")
            .to_file();
        CoefficientFile {
            level: file.level,
            mode: file.mode,
            coeffs: file.values,
        }
    }

    pub fn from_file(file: &CoefficientFile) -> Result<Self> {
        CoefficientVector::new(file.level, samples_from_json(file.mode, &file.coeffs)?)
    }
}

/// On-disk form of a coefficient vector, mirroring the step-function file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFile {
    pub level: u32,
    pub mode: Mode,
    pub coeffs: Vec<serde_json::Value>,
}

#[inline]
fn walsh_sign(n: u64, ix: u64) -> i128 {
    1 - 2 * ((n & ix).count_ones() & 1) as i128
}

/// `r_k(x) = (-1)^{x_k}` at level `N`.
pub fn rademacher(k: u32, level: u32) -> Result<StepFunction> {
    check_level(level)?;
    if k >= level {
        return Err(Error::OutOfRange(format!("r_{k} needs level > {k}, got {level}")));
    }
    let v = (0..1u64 << level)
        .map(|ix| 1 - 2 * ((ix >> k) & 1) as i128)
        .collect();
    StepFunction::from_integers(level, v)
}

/// Paley-ordered Walsh function `w_n(x) = (-1)^{popcount(n & x)}`.
pub fn walsh(n: u64, level: u32) -> Result<StepFunction> {
    check_level(level)?;
    if n >> level != 0 {
        return Err(Error::OutOfRange(format!("w_{n} is not resolved at level {level}")));
    }
    let v = (0..1u64 << level).map(|ix| walsh_sign(n, ix)).collect();
    StepFunction::from_integers(level, v)
}

fn butterfly_i128(v: &mut [i128]) -> Result<()> {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x.checked_add(y).ok_or(Error::Overflow("fwht"))?;
                *b = x.checked_sub(y).ok_or(Error::Overflow("fwht"))?;
            }
        }
        h *= 2;
    }
    Ok(())
}

fn butterfly_f64(v: &mut [f64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// In-place butterfly; `coeffs[k] = 2^{-N} Σ_x f(x) (-1)^{popcount(k & x)}`.
pub fn fwht(f: &StepFunction) -> Result<CoefficientVector> {
    let level = f.level();
    let samples = match f.samples() {
        Samples::Exact { numer, shift } => {
            let mut v = numer.clone();
            butterfly_i128(&mut v)?;
            let shift = shift + level;
            if shift > MAX_SHIFT {
                return Err(Error::Overflow("fwht"));
            }
            Samples::Exact { numer: v, shift }
        }
        Samples::Float(x) => {
            let mut v = x.clone();
            butterfly_f64(&mut v);
            let scale = (-(level as f64)).exp2();
            v.iter_mut().for_each(|c| *c *= scale);
            Samples::Float(v)
        }
    };
    CoefficientVector::new(level, samples)
}

/// `Σ_k c_k w_k`.
pub fn ifwht(c: &CoefficientVector) -> Result<StepFunction> {
    let samples = match c.samples() {
        Samples::Exact { numer, shift } => {
            let mut v = numer.clone();
            butterfly_i128(&mut v)?;
            Samples::Exact {
                numer: v,
                shift: *shift,
            }
        }
        Samples::Float(x) => {
            let mut v = x.clone();
            butterfly_f64(&mut v);
            Samples::Float(v)
        }
    };
    StepFunction::new(c.level(), samples)
}

/// `S_n f = Σ_{k<n} f̂(k) w_k`.
pub fn partial_sum(f: &StepFunction, n: u64) -> Result<StepFunction> {
    let full = 1u64 << f.level();
    if n > full {
        return Err(Error::OutOfRange(format!(
            "S_{n} needs coefficients above the resolution 2^{}",
            f.level()
        )));
    }
    if n == full {
        return Ok(f.clone());
    }
    ifwht(&fwht(f)?.truncate(n as usize))
}

/// Sequential partial sums `S_1 f, S_2 f, …, S_{2^N} f`, each obtained from
/// the previous one by adding `f̂(n) w_n` (O(2^N) per step).
pub struct PartialSums {
    coeffs: CoefficientVector,
    current: Samples,
    next_n: u64,
}

impl PartialSums {
    pub fn new(f: &StepFunction) -> Result<Self> {
        let coeffs = fwht(f)?;
        let len = coeffs.len();
        let current = match coeffs.samples() {
            Samples::Exact { shift, .. } => Samples::Exact {
                numer: vec![0; len],
                shift: *shift,
            },
            Samples::Float(_) => Samples::Float(vec![0.0; len]),
        };
        Ok(PartialSums {
            coeffs,
            current,
            next_n: 0,
        })
    }

    pub fn coefficients(&self) -> &CoefficientVector {
        &self.coeffs
    }

    /// Advance to `S_{n+1}` and return `(n + 1, S_{n+1} f)`.
    pub fn advance(&mut self) -> Option<Result<(u64, StepFunction)>> {
        let n = self.next_n;
        if n as usize >= self.coeffs.len() {
            return None;
        }
        self.next_n += 1;
        match (&mut self.current, self.coeffs.samples()) {
            (Samples::Exact { numer, .. }, Samples::Exact { numer: c, .. }) => {
                let c = c[n as usize];
                if c != 0 {
                    for (ix, a) in numer.iter_mut().enumerate() {
                        let term = walsh_sign(n, ix as u64) * c;
                        match a.checked_add(term) {
                            Some(v) => *a = v,
                            None => return Some(Err(Error::Overflow("partial sums"))),
                        }
                    }
                }
            }
            (Samples::Float(v), Samples::Float(c)) => {
                let c = c[n as usize];
                if c != 0.0 {
                    for (ix, a) in v.iter_mut().enumerate() {
                        *a += walsh_sign(n, ix as u64) as f64 * c;
                    }
                }
            }
            _ => unreachable!("partial-sum buffer and coefficients share a mode"),
        }
        Some(StepFunction::new(self.coeffs.level(), self.current.clone()).map(|s| (n + 1, s)))
    }
}

fn check_kernel_range(n: u64, level: u32) -> Result<()> {
    check_level(level)?;
    if n == 0 || n > 1u64 << level {
        return Err(Error::OutOfRange(format!(
            "D_{n} needs 1 ≤ n ≤ 2^{level}"
        )));
    }
    Ok(())
}

/// `D_n = Σ_{k<n} w_k`, summed term by term.
pub fn dirichlet_direct(n: u64, level: u32) -> Result<StepFunction> {
    check_kernel_range(n, level)?;
    let v = (0..1u64 << level)
        .map(|ix| (0..n).map(|k| walsh_sign(k, ix)).sum())
        .collect();
    StepFunction::from_integers(level, v)
}

/// Value of `D_n` at the cell `ix`, from `D_n = w_n Σ_k n_k r_k D_{2^k}`.
///
/// On `I_s \ I_{s+1}` only the digits `k ≤ s` contribute, with `D_{2^k} = 2^k`
/// and `r_k = 1` for `k < s`, `r_s = -1`; at the origin every term is `2^k`.
#[inline]
pub(crate) fn dirichlet_value(n: u64, ix: u64) -> i128 {
    if ix == 0 {
        return n as i128;
    }
    let s = ix.trailing_zeros();
    let below = (n & ((1u64 << s) - 1)) as i128;
    let digit = ((n >> s) & 1) as i128;
    walsh_sign(n, ix) * (below - (digit << s))
}

/// `D_n` from the binary-digit formula, O(2^N).
pub fn dirichlet_formula(n: u64, level: u32) -> Result<StepFunction> {
    check_kernel_range(n, level)?;
    let v = (0..1u64 << level).map(|ix| dirichlet_value(n, ix)).collect();
    StepFunction::from_integers(level, v)
}

/// Smallest level resolving `D_n` exactly.
fn kernel_level(n: u64) -> u32 {
    index::order(n) + 1
}

/// `L_S(n) = ‖D_n‖_1`, exact, evaluated at level `|n| + 1`.
pub fn lebesgue_constant(n: u64) -> Result<Dyadic> {
    if n == 0 {
        return Err(Error::Domain("L_S(0) is undefined".into()));
    }
    let level = kernel_level(n);
    check_level(level)?;
    let total: i128 = (0..1u64 << level).map(|ix| dirichlet_value(n, ix).abs()).sum();
    Ok(Dyadic::new(total, level))
}

/// Exact Haar measure of `supp D_n`, evaluated at level `|n| + 1`.
pub fn kernel_support_measure(n: u64) -> Result<Dyadic> {
    if n == 0 {
        return Err(Error::Domain("D_0 has no support".into()));
    }
    let level = kernel_level(n);
    check_level(level)?;
    let count = (0..1u64 << level)
        .filter(|&ix| dirichlet_value(n, ix) != 0)
        .count();
    Ok(Dyadic::new(count as i128, level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Number;
    use crate::group::{random_step, DyadicInterval};

    fn ints(level: u32, v: &[i128]) -> StepFunction {
        StepFunction::from_integers(level, v.to_vec()).unwrap()
    }

    #[test]
    fn rademacher_basics() {
        assert_eq!(rademacher(0, 1).unwrap(), ints(1, &[1, -1]));
        for k in 0..4 {
            let r = rademacher(k, 4).unwrap();
            assert_eq!(r.integrate().unwrap(), Number::Exact(Dyadic::ZERO));
            assert_eq!(r, walsh(1 << k, 4).unwrap());
        }
        assert!(rademacher(4, 4).is_err());
    }

    #[test]
    fn walsh_values() {
        assert_eq!(walsh(0, 3).unwrap(), StepFunction::constant(3, Number::Exact(Dyadic::ONE)).unwrap());
        assert_eq!(walsh(3, 2).unwrap(), ints(2, &[1, -1, -1, 1]));
        assert!(walsh(4, 2).is_err());
    }

    #[test]
    fn walsh_orthonormality() {
        let n = 4;
        for a in 0..16 {
            for b in 0..16 {
                let ip = walsh(a, n).unwrap().mul(&walsh(b, n).unwrap()).unwrap();
                let expected = if a == b { Dyadic::ONE } else { Dyadic::ZERO };
                assert_eq!(ip.integrate().unwrap(), Number::Exact(expected));
            }
        }
    }

    #[test]
    fn walsh_character_property() {
        for a in 0..16 {
            for b in 0..16 {
                let prod = walsh(a, 4).unwrap().mul(&walsh(b, 4).unwrap()).unwrap();
                assert_eq!(prod, walsh(a ^ b, 4).unwrap());
            }
        }
    }

    #[test]
    fn fwht_of_walsh_is_unit_vector() {
        for k in 0..8u64 {
            let c = fwht(&walsh(k, 3).unwrap()).unwrap();
            for j in 0..8 {
                let expected = if j == k as usize { Dyadic::ONE } else { Dyadic::ZERO };
                assert_eq!(c.coeff(j), Number::Exact(expected));
            }
        }
    }

    #[test]
    fn fwht_of_kernel_is_prefix_indicator() {
        for n in 1..=16 {
            let c = fwht(&dirichlet_direct(n, 4).unwrap()).unwrap();
            for j in 0..16 {
                let expected = if (j as u64) < n { Dyadic::ONE } else { Dyadic::ZERO };
                assert_eq!(c.coeff(j), Number::Exact(expected), "n={n} j={j}");
            }
        }
    }

    #[test]
    fn fwht_inverse_round_trip() {
        let f = random_step(8, 3, -5.0, 5.0, Mode::Exact).unwrap();
        assert_eq!(ifwht(&fwht(&f).unwrap()).unwrap(), f);
        let level0 = ints(0, &[9]);
        assert_eq!(fwht(&level0).unwrap().coeff(0), Number::Exact(Dyadic::from_int(9)));
    }

    #[test]
    fn partial_sum_examples() {
        let f = ints(2, &[1, 2, 3, 5]);
        assert_eq!(partial_sum(&f, 4).unwrap(), f);
        // S_2 averages over the rank-1 blocks {0, 2} and {1, 3}.
        assert_eq!(
            partial_sum(&f, 2).unwrap(),
            StepFunction::from_dyadics(
                2,
                &[Dyadic::from_int(2), Dyadic::new(7, 1), Dyadic::from_int(2), Dyadic::new(7, 1)]
            )
            .unwrap()
        );
        for k in 0..8 {
            let w = walsh(k, 3).unwrap();
            for n in 0..=8 {
                let s = partial_sum(&w, n).unwrap();
                if k < n {
                    assert_eq!(s, w);
                } else {
                    assert_eq!(s, StepFunction::zero(3, Mode::Exact).unwrap());
                }
            }
        }
        assert!(partial_sum(&f, 5).is_err());
    }

    #[test]
    fn sequential_partial_sums_agree_with_truncation() {
        let f = random_step(5, 11, -1.0, 1.0, Mode::Exact).unwrap();
        let mut sweep = PartialSums::new(&f).unwrap();
        while let Some(step) = sweep.advance() {
            let (n, s) = step.unwrap();
            assert_eq!(s, partial_sum(&f, n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(dirichlet_direct(1, 3).unwrap(), StepFunction::constant(3, Number::Exact(Dyadic::ONE)).unwrap());
        assert_eq!(dirichlet_direct(3, 2).unwrap(), ints(2, &[3, 1, 1, -1]));
        assert_eq!(dirichlet_formula(3, 2).unwrap(), ints(2, &[3, 1, 1, -1]));
        for m in 0..=5u32 {
            let d = dirichlet_formula(1 << m, 5).unwrap();
            let i_m = DyadicInterval::at_zero(m).unwrap();
            for ix in 0..32u64 {
                let expected = if i_m.contains(ix) { 1i128 << m } else { 0 };
                assert_eq!(d.value(ix as usize), Number::Exact(Dyadic::from_int(expected)));
            }
        }
        assert!(dirichlet_direct(0, 3).is_err());
        assert!(dirichlet_formula(9, 3).is_err());
    }

    #[test]
    fn doubling_recursion_small_case() {
        // D_3 = D_2 + w_2 D_1.
        let rhs = dirichlet_formula(2, 2)
            .unwrap()
            .add(&walsh(2, 2).unwrap().mul(&dirichlet_formula(1, 2).unwrap()).unwrap())
            .unwrap();
        assert_eq!(dirichlet_formula(2, 2).unwrap(), ints(2, &[2, 0, 2, 0]));
        assert_eq!(walsh(2, 2).unwrap(), ints(2, &[1, 1, -1, -1]));
        assert_eq!(rhs, ints(2, &[3, 1, 1, -1]));
    }

    #[test]
    fn lebesgue_examples() {
        assert_eq!(lebesgue_constant(3).unwrap(), Dyadic::new(3, 1));
        for k in 0..20 {
            assert_eq!(lebesgue_constant(1 << k).unwrap(), Dyadic::ONE);
        }
        assert!(lebesgue_constant(0).is_err());
    }

    #[test]
    fn support_measure_examples() {
        for k in 0..12 {
            assert_eq!(kernel_support_measure(1 << k).unwrap(), Dyadic::new(1, k));
        }
        assert_eq!(kernel_support_measure(3).unwrap(), Dyadic::ONE);
    }

    #[test]
    fn kernel_vanishes_below_lowest_digit() {
        for n in 1..256u64 {
            let d = dirichlet_formula(n, 9).unwrap();
            let low = index::low(n);
            for ix in 1..512u64 {
                let s = ix.trailing_zeros();
                let v = d.value(ix as usize).to_f64();
                if s < low {
                    assert_eq!(v, 0.0);
                }
                if s == low {
                    assert_eq!(v.abs(), (1u64 << low) as f64);
                }
            }
        }
    }
}
