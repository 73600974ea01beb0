//! Binary-expansion functionals of Walsh indices and the index sequences
//! used by the counterexample constructions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::martingale::WeightFunction;

/// A positive index together with its binary digits and derived functionals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexExpansion {
    pub n: u64,
    /// Binary digits, least significant first, up to and including `order`.
    pub bits: Vec<u8>,
    /// `|n|`, the position of the highest nonzero digit.
    pub order: u32,
    /// `⟨n⟩`, the position of the lowest nonzero digit.
    pub low: u32,
    /// `d(n) = |n| - ⟨n⟩`.
    pub gap: u32,
    /// `V(n) = n_0 + Σ_{k≥1} |n_k - n_{k-1}|` over the zero-padded digits.
    pub variation: u32,
}

impl IndexExpansion {
    /// Rebuild `n` from the stored digits.
    pub fn reconstruct(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, &b)| acc | ((b as u64) << j))
    }
}

pub fn expand(n: u64) -> Result<IndexExpansion> {
    if n == 0 {
        return Err(Error::Domain("⟨0⟩ and |0| are undefined".into()));
    }
    let order = 63 - n.leading_zeros();
    let low = n.trailing_zeros();
    let bits = (0..=order).map(|j| ((n >> j) & 1) as u8).collect();
    Ok(IndexExpansion {
        n,
        bits,
        order,
        low,
        gap: order - low,
        variation: variation(n),
    })
}

/// `|n|`; `n` must be positive.
pub fn order(n: u64) -> u32 {
    debug_assert!(n > 0);
    63 - n.leading_zeros()
}

/// `⟨n⟩`; `n` must be positive.
pub fn low(n: u64) -> u32 {
    debug_assert!(n > 0);
    n.trailing_zeros()
}

pub fn gap(n: u64) -> u32 {
    order(n) - low(n)
}

/// Variation of the zero-padded digit string: `n_0` plus the number of
/// adjacent digit changes, including the final drop above the top digit.
pub fn variation(n: u64) -> u32 {
    // n ^ (n << 1) marks every k with n_k != n_{k-1} (and bit 0 = n_0);
    // the carry-out of the shift accounts for the drop above bit 63.
    (n ^ (n << 1)).count_ones() + (n >> 63) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceKind {
    Explicit,
    /// `2^k + 1`, `k ≥ 1`.
    Pow2Plus1,
    /// `2^k + 2^{k-1}`, `k ≥ 1`.
    Pow2PlusHalf,
    /// `1010…01` with `k ≥ 1` ones.
    AlternatingBits,
    /// `2^k`, `k ≥ 0`.
    Pow2,
}

impl std::str::FromStr for SequenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(SequenceKind::Explicit),
            "pow2plus1" | "pow2-plus-1" => Ok(SequenceKind::Pow2Plus1),
            "pow2plushalf" | "pow2-plus-half" => Ok(SequenceKind::Pow2PlusHalf),
            "alternating" | "alternating-bits" => Ok(SequenceKind::AlternatingBits),
            "pow2" => Ok(SequenceKind::Pow2),
            other => Err(Error::Parse(format!("unknown sequence family {other:?}"))),
        }
    }
}

/// A strictly increasing list of positive indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSequence {
    pub kind: SequenceKind,
    pub values: Vec<u64>,
}

impl IndexSequence {
    pub fn explicit(values: Vec<u64>) -> Result<Self> {
        if values.first() == Some(&0) {
            return Err(Error::Domain("indices must be positive".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("index sequence must be strictly increasing".into()));
        }
        Ok(IndexSequence {
            kind: SequenceKind::Explicit,
            values,
        })
    }

    /// All members of a built-in family below `2^level`.
    pub fn family(kind: SequenceKind, level: u32) -> Result<Self> {
        if level > 63 {
            return Err(Error::OutOfRange(format!("level {level}")));
        }
        let bound = 1u64 << level;
        let values: Vec<u64> = match kind {
            SequenceKind::Explicit => {
                return Err(Error::Domain("explicit sequences need values".into()))
            }
            SequenceKind::Pow2Plus1 => (1..63).map(|k| (1u64 << k) + 1).collect(),
            SequenceKind::Pow2PlusHalf => (1..63).map(|k| (1u64 << k) + (1u64 << (k - 1))).collect(),
            SequenceKind::AlternatingBits => (1..32)
                .map(|k| (0..k).fold(0u64, |acc, i| acc | (1u64 << (2 * i))))
                .collect(),
            SequenceKind::Pow2 => (0..63).map(|k| 1u64 << k).collect(),
        };
        Ok(IndexSequence {
            kind,
            values: values.into_iter().filter(|&v| v < bound).collect(),
        })
    }

    /// Drop members that are not below `2^level`.
    pub fn bounded(&self, level: u32) -> IndexSequence {
        let bound = 1u64.checked_shl(level).unwrap_or(u64::MAX);
        IndexSequence {
            kind: self.kind,
            values: self.values.iter().copied().filter(|&v| v < bound).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_p_open(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} must lie in (0, 1)")));
    }
    Ok(())
}

/// Greedy scan shared by the selectors: take the earliest member with a
/// strictly larger order than the previous pick that satisfies `admissible`
/// (called with the previous pick and the number of picks so far).
fn greedy(
    ms: &IndexSequence,
    want: Option<usize>,
    mut admissible: impl FnMut(Option<u64>, usize, u64) -> bool,
) -> Result<IndexSequence> {
    let mut picked: Vec<u64> = Vec::new();
    for &m in &ms.values {
        if want.is_some_and(|w| picked.len() >= w) {
            break;
        }
        let prev = picked.last().copied();
        if prev.is_some_and(|q| order(m) <= order(q)) {
            continue;
        }
        if admissible(prev, picked.len(), m) {
            picked.push(m);
        }
    }
    if let Some(w) = want {
        if picked.len() < w {
            return Err(Error::Selection {
                achieved: picked.len(),
                required: w,
            });
        }
    }
    Ok(IndexSequence {
        kind: SequenceKind::Explicit,
        values: picked,
    })
}

/// Term of the summability series for index `m`:
/// `Φ^{p/2}(m) / 2^{d(m)(1-p)/2}` when `p < 1`, `Φ^{1/2}(m) / V^{1/2}(m)` when `p = 1`.
pub fn summable_term(m: u64, p: f64, phi: &WeightFunction) -> f64 {
    if p >= 1.0 {
        (phi.eval(m) / variation(m) as f64).sqrt()
    } else {
        phi.eval(m).powf(p / 2.0) / (gap(m) as f64 * (1.0 - p) / 2.0).exp2()
    }
}

/// Greedy subsequence whose `j`-th term of [`summable_term`] is at most
/// `budget · 2^{-j}`, so the whole series stays below `2 · budget`.
pub fn select_summable(
    ms: &IndexSequence,
    p: f64,
    phi: &WeightFunction,
    budget: f64,
    want: Option<usize>,
) -> Result<IndexSequence> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("p = {p} must lie in (0, 1]")));
    }
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::Domain(format!("budget {budget} must be positive")));
    }
    greedy(ms, want, |_, j, m| {
        summable_term(m, p, phi) <= budget * (-(j as f64)).exp2()
    })
}

/// Greedy subsequence with `d(α_{k+1}) ≥ 2 d(α_k)`, starting at the first
/// member with `d ≥ 1`; `d` is then strictly increasing.
pub fn select_gap_doubling(ms: &IndexSequence, p: f64, want: Option<usize>) -> Result<IndexSequence> {
    check_p_open(p)?;
    greedy(ms, want, |prev, _, m| match prev {
        None => gap(m) >= 1,
        Some(q) => gap(m) >= 2 * gap(q),
    })
}

/// Greedy subsequence with `V(α_{k+1}) ≥ V(α_k)^2`.
pub fn select_variation_squaring(ms: &IndexSequence, want: Option<usize>) -> Result<IndexSequence> {
    greedy(ms, want, |prev, _, m| match prev {
        None => true,
        Some(q) => {
            let v = variation(q) as u64;
            variation(m) as u64 >= v * v
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_small_values() {
        let e = expand(5).unwrap();
        assert_eq!(e.bits, vec![1, 0, 1]);
        assert_eq!((e.order, e.low, e.gap, e.variation), (2, 0, 2, 4));
        let e = expand(6).unwrap();
        assert_eq!((e.order, e.low, e.gap, e.variation), (2, 1, 1, 2));
        assert_eq!(expand(1).unwrap().variation, 2);
        assert_eq!(expand(1 << 20).unwrap().variation, 2);
        let e = expand(1025).unwrap();
        assert_eq!((e.order, e.low, e.gap, e.variation), (10, 0, 10, 4));
    }

    #[test]
    fn expand_rejects_zero() {
        assert!(matches!(expand(0), Err(Error::Domain(_))));
    }

    #[test]
    fn families_match_their_closed_forms() {
        for k in 1..20u32 {
            let e = expand((1 << k) + 1).unwrap();
            assert_eq!((e.order, e.low, e.gap), (k, 0, k));
            let e = expand((1 << k) + (1 << (k - 1))).unwrap();
            assert_eq!((e.order, e.low, e.gap), (k, k - 1, 1));
        }
        let alt = IndexSequence::family(SequenceKind::AlternatingBits, 20).unwrap();
        assert_eq!(&alt.values[..4], &[1, 5, 21, 85]);
        for (i, &m) in alt.values.iter().enumerate() {
            assert_eq!(variation(m), 2 * (i as u32 + 1));
        }
        assert!(alt.values.iter().all(|&m| m < 1 << 20));
    }

    #[test]
    fn explicit_sequences_are_validated() {
        assert!(IndexSequence::explicit(vec![1, 3, 2]).is_err());
        assert!(IndexSequence::explicit(vec![0, 3]).is_err());
        assert!(IndexSequence::explicit(vec![1, 3]).is_ok());
    }

    /// Index with the given gap and order exactly `gap` (`2^d + 1`, or 3 for d = 1).
    fn with_gap(d: u32) -> u64 {
        (1u64 << d) + 1
    }

    #[test]
    fn gap_doubling_on_pow2_plus_1() {
        let ms = IndexSequence::family(SequenceKind::Pow2Plus1, 20).unwrap();
        let sel = select_gap_doubling(&ms, 0.5, None).unwrap();
        assert_eq!(sel.values, vec![3, 5, 17, 257, 65537]);
        for w in sel.values.windows(2) {
            assert!(gap(w[1]) >= 2 * gap(w[0]));
        }
    }

    #[test]
    fn gap_doubling_on_explicit_gaps() {
        let ms = IndexSequence::explicit([1, 3, 5, 12, 25].map(with_gap).to_vec()).unwrap();
        let sel = select_gap_doubling(&ms, 0.5, None).unwrap();
        let gaps: Vec<u32> = sel.values.iter().map(|&m| gap(m)).collect();
        assert_eq!(gaps, vec![1, 3, 12, 25]);
    }

    #[test]
    fn gap_doubling_stalls_on_constant_gap() {
        let ms = IndexSequence::family(SequenceKind::Pow2PlusHalf, 30).unwrap();
        assert_eq!(select_gap_doubling(&ms, 0.5, None).unwrap().len(), 1);
        assert_eq!(
            select_gap_doubling(&ms, 0.5, Some(3)),
            Err(Error::Selection { achieved: 1, required: 3 })
        );
        assert!(select_gap_doubling(&ms, 1.0, None).is_err());
    }

    #[test]
    fn variation_squaring() {
        let alt = IndexSequence::family(SequenceKind::AlternatingBits, 20).unwrap();
        let sel = select_variation_squaring(&alt, None).unwrap();
        let vs: Vec<u32> = sel.values.iter().map(|&m| variation(m)).collect();
        assert_eq!(vs, vec![2, 4, 16]);

        let pow2 = IndexSequence::family(SequenceKind::Pow2, 30).unwrap();
        assert_eq!(select_variation_squaring(&pow2, None).unwrap().len(), 1);

        // Indices with V = 2, 4, 16, 300 and increasing orders.
        let v_index = |v: u32| -> u64 {
            // v/2 isolated ones spaced two apart give V = v (v even).
            (0..v / 2).fold(0u64, |acc, i| acc | (1u64 << (2 * i)))
        };
        let ms = IndexSequence::explicit(vec![v_index(2), v_index(4), v_index(16)]).unwrap();
        assert_eq!(select_variation_squaring(&ms, None).unwrap().len(), 3);
    }

    #[test]
    fn summable_selection_respects_budget() {
        let ms = IndexSequence::family(SequenceKind::Pow2Plus1, 20).unwrap();
        let phi = WeightFunction::One;
        let sel = select_summable(&ms, 0.5, &phi, 1.0, None).unwrap();
        // Term 2^{-d/4} ≤ 2^{-j} forces d ≥ 4j.
        assert_eq!(sel.values, vec![3, 17, 257, 4097, 65537]);
        let total: f64 = sel.values.iter().map(|&m| summable_term(m, 0.5, &phi)).sum();
        assert!(total <= 2.0);
    }

    #[test]
    fn summable_selection_fails_on_constant_gap() {
        let ms = IndexSequence::family(SequenceKind::Pow2PlusHalf, 30).unwrap();
        let sel = select_summable(&ms, 0.5, &WeightFunction::One, 1.0, None).unwrap();
        assert_eq!(sel.len(), 1);
        assert!(select_summable(&ms, 0.5, &WeightFunction::One, 1.0, Some(2)).is_err());
    }
}
