//! Functions on the dyadic group as step functions on rank-`N` intervals.
//!
//! # Binary contract
//!
//! A point `x = (x_0, x_1, ...)` of the group is stored as an integer code
//! whose bit `j` is the coordinate `x_j` (least significant bit = `x_0`).
//! Group addition is bitwise exclusive-or. A [`StepFunction`] of level `N`
//! holds `2^N` values; entry `ix` is the value on the rank-`N` interval
//! whose first `N` coordinates are the bits of `ix`. With this layout the
//! Walsh function `w_n` evaluates to `(-1)^popcount(n & ix)`.
//!
//! The rank-`s` interval `I_s(x)` fixes the low `s` bits, so the entries of
//! one rank-`s` block are strided by `2^s`: coarsening a level averages the
//! first half of the array with the second half, and refining repeats it.

use std::fmt;
use std::ops::BitXor;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, Number, MAX_SHIFT};
use crate::error::{Error, Result};

/// Highest supported resolution.
pub const MAX_LEVEL: u32 = 30;

/// Exponent of the grid used by exact random step functions.
const RANDOM_GRID_SHIFT: u32 = 16;

/// A point of the group truncated to its first `level` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Point {
    code: u64,
    level: u32,
}

impl Point {
    pub fn new(code: u64, level: u32) -> Result<Self> {
        check_level(level)?;
        if code >> level != 0 {
            return Err(Error::OutOfRange(format!(
                "point code {code} does not fit in {level} coordinates"
            )));
        }
        Ok(Point { code, level })
    }

    pub fn zero(level: u32) -> Self {
        Point { code: 0, level }
    }

    /// The point `e_j` with a single nonzero coordinate.
    pub fn unit(j: u32, level: u32) -> Result<Self> {
        if j >= level {
            return Err(Error::OutOfRange(format!("e_{j} at level {level}")));
        }
        Point::new(1 << j, level)
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coordinate(&self, j: u32) -> u8 {
        ((self.code >> j) & 1) as u8
    }
}

impl BitXor for Point {
    type Output = Point;

    /// Group addition. Both points must share a level.
    fn bitxor(self, rhs: Point) -> Point {
        assert_eq!(self.level, rhs.level, "points at different levels");
        Point {
            code: self.code ^ rhs.code,
            level: self.level,
        }
    }
}

/// The interval `{y : y_0 = prefix_0, ..., y_{rank-1} = prefix_{rank-1}}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    rank: u32,
    prefix: u64,
}

impl DyadicInterval {
    pub fn new(rank: u32, prefix: u64) -> Result<Self> {
        check_level(rank)?;
        if prefix >> rank != 0 {
            return Err(Error::OutOfRange(format!(
                "prefix {prefix} does not fit in rank {rank}"
            )));
        }
        Ok(DyadicInterval { rank, prefix })
    }

    /// `I_rank = I_rank(0)`.
    pub fn at_zero(rank: u32) -> Result<Self> {
        DyadicInterval::new(rank, 0)
    }

    /// `I_rank(x)`.
    pub fn around(x: Point, rank: u32) -> Result<Self> {
        if rank > x.level {
            return Err(Error::OutOfRange(format!(
                "rank {rank} exceeds point level {}",
                x.level
            )));
        }
        DyadicInterval::new(rank, x.code & low_mask(rank))
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn prefix(&self) -> u64 {
        self.prefix
    }

    /// Whether the level-`N` cell `ix` (with `N >= rank`) lies in the interval.
    pub fn contains(&self, ix: u64) -> bool {
        ix & low_mask(self.rank) == self.prefix
    }

    /// `2^{-rank}`.
    pub fn measure(&self) -> Dyadic {
        Dyadic::new(1, self.rank)
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I_{}[{:#b}]", self.rank, self.prefix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// Sample storage shared by step functions and coefficient vectors.
///
/// Exact samples are `numer[i] / 2^shift` with one shared shift, kept in
/// lowest terms.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Exact { numer: Vec<i128>, shift: u32 },
    Float(Vec<f64>),
}

impl Samples {
    pub fn exact(numer: Vec<i128>, shift: u32) -> Self {
        let mut s = Samples::Exact { numer, shift };
        s.normalize();
        s
    }

    pub fn len(&self) -> usize {
        match self {
            Samples::Exact { numer, .. } => numer.len(),
            Samples::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode(&self) -> Mode {
        match self {
            Samples::Exact { .. } => Mode::Exact,
            Samples::Float(_) => Mode::Float,
        }
    }

    pub fn get(&self, i: usize) -> Number {
        match self {
            Samples::Exact { numer, shift } => Number::Exact(Dyadic::new(numer[i], *shift)),
            Samples::Float(v) => Number::Float(v[i]),
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        match self {
            Samples::Exact { numer, shift } => {
                let scale = (-(*shift as f64)).exp2();
                numer.iter().map(|&a| a as f64 * scale).collect()
            }
            Samples::Float(v) => v.clone(),
        }
    }

    pub fn to_float(&self) -> Samples {
        Samples::Float(self.to_f64_vec())
    }

    /// Exact form of the samples. Float samples are converted value by value,
    /// which is exact because every finite double is dyadic.
    pub fn to_exact(&self) -> Result<Samples> {
        match self {
            Samples::Exact { .. } => Ok(self.clone()),
            Samples::Float(v) => {
                let ds = v
                    .iter()
                    .map(|&x| Dyadic::from_f64(x))
                    .collect::<Result<Vec<_>>>()?;
                aligned(&ds)
            }
        }
    }

    pub fn to_mode(&self, mode: Mode) -> Result<Samples> {
        match mode {
            Mode::Exact => self.to_exact(),
            Mode::Float => Ok(self.to_float()),
        }
    }

    /// Reduce the shared shift while every numerator is even.
    pub(crate) fn normalize(&mut self) {
        if let Samples::Exact { numer, shift } = self {
            let acc = numer.iter().fold(0i128, |acc, &a| acc | a);
            if acc == 0 {
                *shift = 0;
                return;
            }
            let tz = acc.trailing_zeros().min(*shift);
            if tz > 0 {
                numer.iter_mut().for_each(|a| *a >>= tz);
                *shift -= tz;
            }
        }
    }
}

/// Put a list of dyadic values over one common shift.
pub(crate) fn aligned(values: &[Dyadic]) -> Result<Samples> {
    let shift = values.iter().map(|d| d.shift()).max().unwrap_or(0);
    let numer = values
        .iter()
        .map(|d| {
            d.numer()
                .checked_mul(1i128 << (shift - d.shift()))
                .ok_or(Error::Overflow("align"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Samples::exact(numer, shift))
}

/// Rescale exact numerators from `from` to the larger shift `to`.
pub(crate) fn rescale(numer: &[i128], from: u32, to: u32) -> Result<Vec<i128>> {
    debug_assert!(to >= from);
    let up = to - from;
    if up == 0 {
        return Ok(numer.to_vec());
    }
    if to > MAX_SHIFT {
        return Err(Error::Overflow("rescale"));
    }
    let f = 1i128 << up;
    numer
        .iter()
        .map(|&a| a.checked_mul(f).ok_or(Error::Overflow("rescale")))
        .collect()
}

pub(crate) fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

pub(crate) fn check_level(level: u32) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(Error::OutOfRange(format!(
            "level {level} exceeds the cap {MAX_LEVEL}"
        )));
    }
    Ok(())
}

/// A function on the group that is constant on every rank-`level` interval.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    level: u32,
    samples: Samples,
}

impl StepFunction {
    pub fn new(level: u32, samples: Samples) -> Result<Self> {
        check_level(level)?;
        if samples.len() != 1usize << level {
            return Err(Error::OutOfRange(format!(
                "{} samples given for level {level}",
                samples.len()
            )));
        }
        let mut samples = samples;
        samples.normalize();
        Ok(StepFunction { level, samples })
    }

    /// Exact function with values `numer[ix] / 2^shift`.
    pub fn exact(level: u32, numer: Vec<i128>, shift: u32) -> Result<Self> {
        StepFunction::new(level, Samples::Exact { numer, shift })
    }

    pub fn from_integers(level: u32, values: Vec<i128>) -> Result<Self> {
        StepFunction::exact(level, values, 0)
    }

    pub fn from_dyadics(level: u32, values: &[Dyadic]) -> Result<Self> {
        StepFunction::new(level, aligned(values)?)
    }

    pub fn float(level: u32, values: Vec<f64>) -> Result<Self> {
        StepFunction::new(level, Samples::Float(values))
    }

    pub fn constant(level: u32, c: Number) -> Result<Self> {
        check_level(level)?;
        let len = 1usize << level;
        let samples = match c {
            Number::Exact(d) => Samples::exact(vec![d.numer(); len], d.shift()),
            Number::Float(x) => Samples::Float(vec![x; len]),
        };
        StepFunction::new(level, samples)
    }

    pub fn zero(level: u32, mode: Mode) -> Result<Self> {
        match mode {
            Mode::Exact => StepFunction::constant(level, Number::Exact(Dyadic::ZERO)),
            Mode::Float => StepFunction::constant(level, Number::Float(0.0)),
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mode(&self) -> Mode {
        self.samples.mode()
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    pub fn into_samples(self) -> Samples {
        self.samples
    }

    pub fn value(&self, ix: usize) -> Number {
        self.samples.get(ix)
    }

    pub fn eval(&self, x: Point) -> Result<Number> {
        if x.level != self.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: x.level,
            });
        }
        Ok(self.value(x.code as usize))
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.samples.to_f64_vec()
    }

    /// Exact numerators and shared shift, if the function is exact.
    pub fn exact_parts(&self) -> Option<(&[i128], u32)> {
        match &self.samples {
            Samples::Exact { numer, shift } => Some((numer, *shift)),
            Samples::Float(_) => None,
        }
    }

    pub fn to_float(&self) -> StepFunction {
        StepFunction {
            level: self.level,
            samples: self.samples.to_float(),
        }
    }

    pub fn to_exact(&self) -> Result<StepFunction> {
        StepFunction::new(self.level, self.samples.to_exact()?)
    }

    pub fn to_mode(&self, mode: Mode) -> Result<StepFunction> {
        StepFunction::new(self.level, self.samples.to_mode(mode)?)
    }

    /// `x ↦ f(x ⊕ h)`.
    pub fn translate(&self, h: Point) -> Result<StepFunction> {
        if h.level != self.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: h.level,
            });
        }
        let h = h.code as usize;
        let samples = match &self.samples {
            Samples::Exact { numer, shift } => Samples::Exact {
                numer: (0..numer.len()).map(|ix| numer[ix ^ h]).collect(),
                shift: *shift,
            },
            Samples::Float(v) => Samples::Float((0..v.len()).map(|ix| v[ix ^ h]).collect()),
        };
        StepFunction::new(self.level, samples)
    }

    /// Haar integral `2^{-N} Σ values`, exact in exact mode.
    pub fn integrate(&self) -> Result<Number> {
        match &self.samples {
            Samples::Exact { numer, shift } => {
                let mut acc = 0i128;
                for &a in numer {
                    acc = acc.checked_add(a).ok_or(Error::Overflow("integrate"))?;
                }
                let shift = shift + self.level;
                if shift > MAX_SHIFT {
                    return Err(Error::Overflow("integrate"));
                }
                Ok(Number::Exact(Dyadic::new(acc, shift)))
            }
            Samples::Float(v) => Ok(Number::Float(
                v.iter().sum::<f64>() * (-(self.level as f64)).exp2(),
            )),
        }
    }

    /// The same function viewed at a finer level.
    pub fn refine(&self, level: u32) -> Result<StepFunction> {
        if level < self.level {
            return Err(Error::OutOfRange(format!(
                "cannot refine level {} down to {level}",
                self.level
            )));
        }
        check_level(level)?;
        let copies = 1usize << (level - self.level);
        let samples = match &self.samples {
            Samples::Exact { numer, shift } => Samples::Exact {
                numer: numer.repeat(copies),
                shift: *shift,
            },
            Samples::Float(v) => Samples::Float(v.repeat(copies)),
        };
        StepFunction::new(level, samples)
    }

    /// Block means over the rank-`level` intervals (conditional expectation).
    pub fn coarsen_average(&self, level: u32) -> Result<StepFunction> {
        if level > self.level {
            return Err(Error::OutOfRange(format!(
                "cannot coarsen level {} up to {level}",
                self.level
            )));
        }
        let width = 1usize << level;
        let copies = 1usize << (self.level - level);
        let samples = match &self.samples {
            Samples::Exact { numer, shift } => {
                let mut out = vec![0i128; width];
                for t in 0..copies {
                    for (j, o) in out.iter_mut().enumerate() {
                        *o = o
                            .checked_add(numer[t * width + j])
                            .ok_or(Error::Overflow("coarsen_average"))?;
                    }
                }
                let shift = shift + (self.level - level);
                if shift > MAX_SHIFT {
                    return Err(Error::Overflow("coarsen_average"));
                }
                Samples::Exact { numer: out, shift }
            }
            Samples::Float(v) => {
                let mut out = vec![0.0; width];
                for t in 0..copies {
                    for (j, o) in out.iter_mut().enumerate() {
                        *o += v[t * width + j];
                    }
                }
                let scale = 1.0 / copies as f64;
                out.iter_mut().for_each(|o| *o *= scale);
                Samples::Float(out)
            }
        };
        StepFunction::new(level, samples)
    }

    fn check_same_level(&self, other: &StepFunction) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: other.level,
            });
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &StepFunction,
        exact: impl Fn(i128, i128) -> Option<i128>,
        float: impl Fn(f64, f64) -> f64,
    ) -> Result<StepFunction> {
        self.check_same_level(other)?;
        let samples = match (&self.samples, &other.samples) {
            (Samples::Exact { numer: a, shift: sa }, Samples::Exact { numer: b, shift: sb }) => {
                let s = (*sa).max(*sb);
                let a = rescale(a, *sa, s)?;
                let b = rescale(b, *sb, s)?;
                let numer = a
                    .iter()
                    .zip(&b)
                    .map(|(&x, &y)| exact(x, y).ok_or(Error::Overflow("pointwise op")))
                    .collect::<Result<Vec<_>>>()?;
                Samples::Exact { numer, shift: s }
            }
            (a, b) => {
                let a = a.to_f64_vec();
                let b = b.to_f64_vec();
                Samples::Float(a.iter().zip(&b).map(|(&x, &y)| float(x, y)).collect())
            }
        };
        StepFunction::new(self.level, samples)
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, i128::checked_add, |x, y| x + y)
    }

    pub fn sub(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, i128::checked_sub, |x, y| x - y)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &StepFunction) -> Result<StepFunction> {
        self.check_same_level(other)?;
        let samples = match (&self.samples, &other.samples) {
            (Samples::Exact { numer: a, shift: sa }, Samples::Exact { numer: b, shift: sb }) => {
                let shift = sa + sb;
                if shift > MAX_SHIFT {
                    return Err(Error::Overflow("mul"));
                }
                let numer = a
                    .iter()
                    .zip(b)
                    .map(|(&x, &y)| x.checked_mul(y).ok_or(Error::Overflow("mul")))
                    .collect::<Result<Vec<_>>>()?;
                Samples::Exact { numer, shift }
            }
            (a, b) => {
                let a = a.to_f64_vec();
                let b = b.to_f64_vec();
                Samples::Float(a.iter().zip(&b).map(|(&x, &y)| x * y).collect())
            }
        };
        StepFunction::new(self.level, samples)
    }

    pub fn scale(&self, c: Number) -> Result<StepFunction> {
        let samples = match (&self.samples, c) {
            (Samples::Exact { numer, shift }, Number::Exact(d)) => {
                let shift = shift + d.shift();
                if shift > MAX_SHIFT {
                    return Err(Error::Overflow("scale"));
                }
                let numer = numer
                    .iter()
                    .map(|&a| a.checked_mul(d.numer()).ok_or(Error::Overflow("scale")))
                    .collect::<Result<Vec<_>>>()?;
                Samples::Exact { numer, shift }
            }
            (s, c) => {
                let c = c.to_f64();
                Samples::Float(s.to_f64_vec().into_iter().map(|x| x * c).collect())
            }
        };
        StepFunction::new(self.level, samples)
    }

    pub fn abs(&self) -> StepFunction {
        let samples = match &self.samples {
            Samples::Exact { numer, shift } => Samples::Exact {
                numer: numer.iter().map(|a| a.abs()).collect(),
                shift: *shift,
            },
            Samples::Float(v) => Samples::Float(v.iter().map(|x| x.abs()).collect()),
        };
        StepFunction {
            level: self.level,
            samples,
        }
    }

    pub fn neg(&self) -> StepFunction {
        let samples = match &self.samples {
            Samples::Exact { numer, shift } => Samples::Exact {
                numer: numer.iter().map(|a| -a).collect(),
                shift: *shift,
            },
            Samples::Float(v) => Samples::Float(v.iter().map(|x| -x).collect()),
        };
        StepFunction {
            level: self.level,
            samples,
        }
    }

    /// `f · 1_I`.
    pub fn restrict(&self, interval: &DyadicInterval) -> Result<StepFunction> {
        let ind = indicator(interval, self.level)?;
        self.mul(&ind)
    }

    /// Largest absolute value.
    pub fn sup_norm(&self) -> Number {
        match &self.samples {
            Samples::Exact { numer, shift } => Number::Exact(Dyadic::new(
                numer.iter().map(|a| a.abs()).max().unwrap_or(0),
                *shift,
            )),
            Samples::Float(v) => Number::Float(v.iter().fold(0.0f64, |m, x| m.max(x.abs()))),
        }
    }

    /// Haar measure of `{x : f(x) != 0}`.
    pub fn support_measure(&self) -> Dyadic {
        let count = match &self.samples {
            Samples::Exact { numer, .. } => numer.iter().filter(|&&a| a != 0).count(),
            Samples::Float(v) => v.iter().filter(|&&x| x != 0.0).count(),
        };
        Dyadic::new(count as i128, self.level)
    }

    pub fn to_file(&self) -> StepFunctionFile {
        let values = match &self.samples {
            Samples::Exact { numer, shift } => numer
                .iter()
                .map(|&a| serde_json::Value::String(Dyadic::new(a, *shift).to_string()))
                .collect(),
            Samples::Float(v) => v.iter().map(|&x| serde_json::Value::from(x)).collect(),
        };
        StepFunctionFile {
            level: self.level,
            mode: self.mode(),
            values,
        }
    }

    pub fn from_file(file: &StepFunctionFile) -> Result<StepFunction> {
        let samples = samples_from_json(file.mode, &file.values)?;
        StepFunction::new(file.level, samples)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<StepFunction> {
        let file: StepFunctionFile = serde_json::from_str(s)?;
        StepFunction::from_file(&file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<StepFunction> {
        StepFunction::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn samples_from_json(mode: Mode, values: &[serde_json::Value]) -> Result<Samples> {
    match mode {
        Mode::Exact => {
            let ds = values
                .iter()
                .map(|v| match v {
                    serde_json::Value::String(s) => s.parse::<Dyadic>(),
                    serde_json::Value::Number(n) if n.is_i64() => {
                        Ok(Dyadic::from_int(n.as_i64().unwrap_or_default() as i128))
                    }
                    other => Err(Error::Parse(format!("exact value expected, got {other}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            aligned(&ds)
        }
        Mode::Float => {
            let xs = values
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| Error::Parse(format!("float value expected, got {v}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Samples::Float(xs))
        }
    }
}

/// On-disk form: `{"level": N, "mode": "exact"|"float", "values": [...]}`,
/// exact entries written as `"a/2^b"` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunctionFile {
    pub level: u32,
    pub mode: Mode,
    pub values: Vec<serde_json::Value>,
}

/// `1_I` at level `level`.
pub fn indicator(interval: &DyadicInterval, level: u32) -> Result<StepFunction> {
    check_level(level)?;
    if interval.rank > level {
        return Err(Error::OutOfRange(format!(
            "interval rank {} exceeds level {level}",
            interval.rank
        )));
    }
    let numer = (0..1u64 << level)
        .map(|ix| interval.contains(ix) as i128)
        .collect();
    StepFunction::from_integers(level, numer)
}

/// Indicator of the ring `I_s \ I_{s+1}`: points whose first nonzero
/// coordinate is `x_s`. Requires `s < level`.
pub fn ring_indicator(s: u32, level: u32) -> Result<StepFunction> {
    check_level(level)?;
    if s >= level {
        return Err(Error::OutOfRange(format!("ring {s} at level {level}")));
    }
    let numer = (0..1u64 << level)
        .map(|ix| (ix != 0 && ix.trailing_zeros() == s) as i128)
        .collect();
    StepFunction::from_integers(level, numer)
}

/// Deterministic pseudo-random step function with values in `[lo, hi]`.
///
/// Float mode draws uniform doubles. Exact mode draws uniformly from the
/// grid `2^{-16} Z ∩ [lo, hi]`.
pub fn random_step(level: u32, seed: u64, lo: f64, hi: f64, mode: Mode) -> Result<StepFunction> {
    check_level(level)?;
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::Domain(format!("bad value range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = 1usize << level;
    match mode {
        Mode::Float => {
            let v = (0..len)
                .map(|_| if lo == hi { lo } else { rng.gen_range(lo..=hi) })
                .collect();
            StepFunction::float(level, v)
        }
        Mode::Exact => {
            let grid = (1i64 << RANDOM_GRID_SHIFT) as f64;
            let a = (lo * grid).ceil() as i64;
            let b = (hi * grid).floor() as i64;
            if a > b {
                return Err(Error::Domain(format!("no grid points in [{lo}, {hi}]")));
            }
            let v = (0..len).map(|_| rng.gen_range(a..=b) as i128).collect();
            StepFunction::exact(level, v, RANDOM_GRID_SHIFT)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(level: u32, v: &[i128]) -> StepFunction {
        StepFunction::from_integers(level, v.to_vec()).unwrap()
    }

    #[test]
    fn translate_identity_and_involution() {
        let f = random_step(4, 7, -1.0, 1.0, Mode::Exact).unwrap();
        assert_eq!(f.translate(Point::zero(4)).unwrap(), f);
        let h = Point::new(0b1011, 4).unwrap();
        assert_eq!(f.translate(h).unwrap().translate(h).unwrap(), f);
    }

    #[test]
    fn translate_half_indicator() {
        // 1_{I_1(0)} at N = 2 is 1 where x_0 = 0, i.e. codes 0b00 and 0b10.
        let f = indicator(&DyadicInterval::at_zero(1).unwrap(), 2).unwrap();
        assert_eq!(f, ints(2, &[1, 0, 1, 0]));
        let h = Point::unit(0, 2).unwrap();
        assert_eq!(f.translate(h).unwrap(), ints(2, &[0, 1, 0, 1]));
    }

    #[test]
    fn translate_rejects_level_mismatch() {
        let f = ints(2, &[1, 2, 3, 4]);
        assert!(matches!(
            f.translate(Point::zero(3)),
            Err(Error::LevelMismatch { .. })
        ));
    }

    #[test]
    fn integrate_exact() {
        assert_eq!(
            ints(2, &[3, 1, 1, -1]).integrate().unwrap(),
            Number::Exact(Dyadic::ONE)
        );
        let c = StepFunction::constant(3, Number::Exact(Dyadic::new(5, 3))).unwrap();
        assert_eq!(c.integrate().unwrap(), Number::Exact(Dyadic::new(5, 3)));
        let level0 = ints(0, &[7]);
        assert_eq!(level0.integrate().unwrap(), Number::Exact(Dyadic::from_int(7)));
    }

    #[test]
    fn coarsen_and_refine() {
        let f = ints(1, &[1, -1]);
        assert_eq!(f.coarsen_average(0).unwrap(), ints(0, &[0]));
        assert_eq!(f.coarsen_average(1).unwrap(), f);
        // Rank-1 blocks of a level-2 function pair codes {0,2} and {1,3}.
        let g = ints(2, &[1, 2, 3, 6]);
        assert_eq!(g.coarsen_average(1).unwrap(), ints(1, &[2, 4]));
        let r = f.refine(3).unwrap();
        for ix in 0..8 {
            assert_eq!(r.value(ix), f.value(ix & 1));
        }
        assert_eq!(r.coarsen_average(1).unwrap(), f);
        assert!(f.refine(0).is_err());
        assert!(f.coarsen_average(2).is_err());
    }

    #[test]
    fn indicator_of_whole_group_is_one() {
        let one = indicator(&DyadicInterval::at_zero(0).unwrap(), 3).unwrap();
        assert_eq!(one, StepFunction::constant(3, Number::Exact(Dyadic::ONE)).unwrap());
        assert!(indicator(&DyadicInterval::at_zero(4).unwrap(), 3).is_err());
    }

    #[test]
    fn complement_decomposition_sums_to_one() {
        let n = 6;
        for m in 0..=n {
            let mut acc = indicator(&DyadicInterval::at_zero(m).unwrap(), n).unwrap();
            for s in 0..m {
                acc = acc.add(&ring_indicator(s, n).unwrap()).unwrap();
            }
            assert_eq!(acc, StepFunction::constant(n, Number::Exact(Dyadic::ONE)).unwrap());
        }
    }

    #[test]
    fn pointwise_ops_mix_modes() {
        let a = ints(1, &[1, 2]);
        let b = StepFunction::float(1, vec![0.5, 0.25]).unwrap();
        assert_eq!(a.add(&b).unwrap().values_f64(), vec![1.5, 2.25]);
        assert_eq!(a.mul(&b).unwrap().mode(), Mode::Float);
        let half = a.scale(Number::Exact(Dyadic::new(1, 1))).unwrap();
        assert_eq!(half.value(0), Number::Exact(Dyadic::new(1, 1)));
        assert_eq!(ints(2, &[3, 1, 1, -1]).abs(), ints(2, &[3, 1, 1, 1]));
    }

    #[test]
    fn json_round_trip() {
        let f = StepFunction::exact(2, vec![3, -1, 0, 8], 3).unwrap();
        let s = f.to_json().unwrap();
        assert!(s.contains("\"3/2^3\""));
        assert!(s.contains("\"1/2^0\""));
        assert_eq!(StepFunction::from_json(&s).unwrap(), f);
        let g = StepFunction::float(1, vec![0.1, -1e-300]).unwrap();
        assert_eq!(StepFunction::from_json(&g.to_json().unwrap()).unwrap(), g);
        assert!(StepFunction::from_json(r#"{"level":1,"mode":"exact","values":["1/3","0"]}"#).is_err());
        assert!(StepFunction::from_json(r#"{"level":2,"mode":"float","values":[1.0]}"#).is_err());
    }

    #[test]
    fn random_step_is_deterministic() {
        let a = random_step(5, 42, -1.0, 1.0, Mode::Float).unwrap();
        let b = random_step(5, 42, -1.0, 1.0, Mode::Float).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_step(5, 43, -1.0, 1.0, Mode::Float).unwrap());
        let e = random_step(5, 42, -2.0, 2.0, Mode::Exact).unwrap();
        assert!(e.values_f64().iter().all(|x| (-2.0..=2.0).contains(x)));
    }

    #[test]
    fn point_and_interval_basics() {
        let x = Point::new(0b0110, 4).unwrap();
        assert_eq!(x.coordinate(1), 1);
        let i = DyadicInterval::around(x, 2).unwrap();
        assert_eq!(i.prefix(), 0b10);
        assert!(i.contains(0b1110));
        assert!(!i.contains(0b1111));
        assert_eq!(i.measure(), Dyadic::new(1, 2));
        assert!(Point::new(16, 4).is_err());
        assert!(DyadicInterval::new(2, 4).is_err());
    }
}
