//! Partitions, pairings, colorings, the sampling distributions built on
//! them, and the combinatorial measures used by the rank experiments.
//!
//! All samplers are pure functions of `(params, seed)`. Randomness comes
//! from a splitmix-style 64-bit generator pinned by test vectors below,
//! so any reimplementation in another language reproduces identical
//! samples.

use serde_json::{json, Value};

use crate::hardpoly::BlockStructure;
use crate::{Error, Result};

/// Splitmix64: tiny, seedable, and easy to port bit-for-bit.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-enough value in `[0, bound)` by reduction; the modulo bias
    /// is irrelevant at the bounds used here and keeps the stream layout
    /// trivially portable.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }

    /// Nonzero canonical residue mod `p`.
    pub fn nonzero_mod(&mut self, p: u64) -> u64 {
        1 + self.below(p - 1)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Which side of a partition a variable is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Y,
    Z,
}

/// A total assignment of variable indices to sides Y and Z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    y_mask: u32,
}

impl Partition {
    pub fn new(n: usize, y_indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n > 32 {
            return Err(Error::TooManyVariables { n, cap: 32 });
        }
        let mut y_mask = 0u32;
        for i in y_indices {
            if i >= n {
                return Err(Error::InvalidPartition(format!(
                    "index {i} out of range for n = {n}"
                )));
            }
            y_mask |= 1 << i;
        }
        Ok(Self { n, y_mask })
    }

    pub fn from_y_mask(n: usize, y_mask: u32) -> Result<Self> {
        if n > 32 {
            return Err(Error::TooManyVariables { n, cap: 32 });
        }
        if n < 32 && y_mask >= (1u32 << n) {
            return Err(Error::InvalidPartition(format!(
                "mask {y_mask:#b} is not a subset of the first {n} indices"
            )));
        }
        Ok(Self { n, y_mask })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn side(&self, i: usize) -> Side {
        if self.y_mask >> i & 1 == 1 {
            Side::Y
        } else {
            Side::Z
        }
    }

    pub fn y_mask(&self) -> u32 {
        self.y_mask
    }

    pub fn z_mask(&self) -> u32 {
        !self.y_mask & ((1u64 << self.n) - 1) as u32
    }

    pub fn y_size(&self) -> usize {
        self.y_mask.count_ones() as usize
    }

    pub fn z_size(&self) -> usize {
        self.n - self.y_size()
    }

    pub fn is_equi(&self) -> bool {
        self.n % 2 == 0 && self.y_size() == self.n / 2
    }

    /// Swaps the two sides.
    pub fn swapped(&self) -> Partition {
        Partition {
            n: self.n,
            y_mask: self.z_mask(),
        }
    }

    pub fn to_json(&self) -> String {
        let y: Vec<usize> = (0..self.n).filter(|&i| self.side(i) == Side::Y).collect();
        serde_json::to_string_pretty(&json!({"n": self.n, "Y": y})).expect("partition json")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Json("missing \"n\"".into()))? as usize;
        let y: Vec<usize> = serde_json::from_value(
            v.get("Y")
                .ok_or_else(|| Error::Json("missing \"Y\"".into()))?
                .clone(),
        )?;
        Partition::new(n, y)
    }

    /// All equi-partitions of `[n]`, in ascending Y-mask order.
    pub fn enumerate_equi(n: usize) -> Result<Vec<Partition>> {
        if n % 2 != 0 {
            return Err(Error::OddLength(n));
        }
        if n > 24 {
            return Err(Error::TooManyVariables { n, cap: 24 });
        }
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize == n / 2 {
                out.push(Partition { n, y_mask: mask });
            }
        }
        Ok(out)
    }
}

/// A perfect matching on `{0, ..., n-1}`, stored as sorted `(lo, hi)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pairing {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        norm.sort_unstable();
        let mut seen = vec![false; n];
        for &(a, b) in &norm {
            if a == b || b >= n {
                return Err(Error::InvalidModel(format!("bad pair ({a},{b}) for n = {n}")));
            }
            for i in [a, b] {
                if seen[i] {
                    return Err(Error::InvalidModel(format!("index {i} appears twice")));
                }
                seen[i] = true;
            }
        }
        if norm.len() * 2 != n {
            return Err(Error::InvalidModel(format!(
                "{} pairs do not cover {n} indices",
                norm.len()
            )));
        }
        Ok(Self { n, pairs: norm })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.pairs.binary_search(&key).is_ok()
    }

    /// Canonical text key, e.g. `"0-1,2-3"`; used to address lambda values.
    pub fn key(&self) -> String {
        self.pairs
            .iter()
            .map(|(a, b)| format!("{a}-{b}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn to_json(&self) -> String {
        let pairs: Vec<[usize; 2]> = self.pairs.iter().map(|&(a, b)| [a, b]).collect();
        serde_json::to_string_pretty(&json!({"n": self.n, "pairs": pairs})).expect("pairing json")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Json("missing \"n\"".into()))? as usize;
        let pairs: Vec<[usize; 2]> = serde_json::from_value(
            v.get("pairs")
                .ok_or_else(|| Error::Json("missing \"pairs\"".into()))?
                .clone(),
        )?;
        Pairing::new(n, pairs.into_iter().map(|[a, b]| (a, b)))
    }
}

/// A `K`-coloring of `[n]` into contiguous equal-size classes
/// `S_c = {c*n/K, ..., (c+1)*n/K - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coloring {
    n: usize,
    k: usize,
}

impl Coloring {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || n % k != 0 {
            return Err(Error::InvalidModel(format!(
                "{k} colors do not evenly split {n} indices"
            )));
        }
        Ok(Self { n, k })
    }

    pub fn num_colors(&self) -> usize {
        self.k
    }

    pub fn class_size(&self) -> usize {
        self.n / self.k
    }

    pub fn class_of(&self, i: usize) -> usize {
        i / self.class_size()
    }
}

/// Uniform equi-partition of `[n]`.
pub fn sample_equipartition(n: usize, seed: u64) -> Result<Partition> {
    if n % 2 != 0 {
        return Err(Error::OddLength(n));
    }
    let mut rng = SplitMix64::new(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut idx);
    Partition::new(n, idx.into_iter().take(n / 2))
}

/// The block distribution: an independent equi-partition inside every
/// block, concatenated into a global equi-partition.
pub fn sample_db(bs: &BlockStructure, seed: u64) -> Result<Partition> {
    let mut rng = SplitMix64::new(seed);
    let mut y = Vec::with_capacity(bs.n() / 2);
    for block in bs.blocks() {
        let mut idx = block.clone();
        rng.shuffle(&mut idx);
        y.extend(idx.into_iter().take(bs.r() / 2));
    }
    Partition::new(bs.n(), y)
}

fn arc_pairs(n: usize, rng: &mut SplitMix64) -> Result<Vec<(usize, usize)>> {
    if n % 2 != 0 {
        return Err(Error::OddLength(n));
    }
    let m = n as i64;
    let red = |x: i64| x.rem_euclid(m) as usize;
    // first pair is always (0, 1); the spanned arc is [left, right]
    let mut pairs = vec![(0usize, 1usize)];
    let (mut left, mut right) = (0i64, 1i64);
    for _ in 1..n / 2 {
        let mv = rng.below(3);
        let pair = match mv {
            0 => {
                let p = (red(left - 2), red(left - 1));
                left -= 2;
                p
            }
            1 => {
                let p = (red(left - 1), red(right + 1));
                left -= 1;
                right += 1;
                p
            }
            _ => {
                let p = (red(right + 1), red(right + 2));
                right += 2;
                p
            }
        };
        pairs.push(pair);
    }
    Ok(pairs)
}

/// One draw from the arc-pairing process: grow pairs adjacently around
/// the cycle, each of the three extensions with probability 1/3.
pub fn sample_arc_pairing(n: usize, seed: u64) -> Result<Pairing> {
    let mut rng = SplitMix64::new(seed);
    Pairing::new(n, arc_pairs(n, &mut rng)?)
}

/// An arc-partition draw: an arc pairing plus a uniformly random
/// bichromatic coloring of each pair.
pub fn sample_arc_partition(n: usize, seed: u64) -> Result<(Pairing, Partition)> {
    let mut rng = SplitMix64::new(seed);
    let pairs = arc_pairs(n, &mut rng)?;
    let pairing = Pairing::new(n, pairs)?;
    let mut y = Vec::with_capacity(n / 2);
    for &(a, b) in pairing.pairs() {
        if rng.below(2) == 0 {
            y.push(a);
        } else {
            y.push(b);
        }
    }
    let partition = Partition::new(n, y)?;
    Ok((pairing, partition))
}

/// The pairing a ROABP induces on its own read order: consecutive reads
/// `(sigma(2i), sigma(2i+1))`.
pub fn f_arc_partition(order: &[usize]) -> Result<Pairing> {
    let n = order.len();
    if n % 2 != 0 {
        return Err(Error::OddLength(n));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || seen[i] {
            return Err(Error::InvalidPermutation(format!(
                "order is not a permutation of 0..{n}"
            )));
        }
        seen[i] = true;
    }
    Pairing::new(n, order.chunks_exact(2).map(|c| (c[0], c[1])))
}

/// Number of common pairs between two pairings.
pub fn similarity(p: &Pairing, q: &Pairing) -> Result<usize> {
    if p.num_vars() != q.num_vars() {
        return Err(Error::DimensionMismatch {
            left: p.num_vars(),
            right: q.num_vars(),
        });
    }
    Ok(p.pairs().iter().filter(|&&(a, b)| q.contains(a, b)).count())
}

/// Per-color violation counts `|V_c|` (pairs with exactly one endpoint in
/// the color class) and `G`, the number of colors with at least
/// `threshold` violations.
pub fn violations(
    pairing: &Pairing,
    coloring: &Coloring,
    threshold: usize,
) -> Result<(Vec<usize>, usize)> {
    if pairing.num_vars() != coloring.n {
        return Err(Error::DimensionMismatch {
            left: pairing.num_vars(),
            right: coloring.n,
        });
    }
    let mut counts = vec![0usize; coloring.num_colors()];
    for &(a, b) in pairing.pairs() {
        let (ca, cb) = (coloring.class_of(a), coloring.class_of(b));
        if ca != cb {
            counts[ca] += 1;
            counts[cb] += 1;
        }
    }
    let g = counts.iter().filter(|&&c| c >= threshold).count();
    Ok((counts, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn splitmix_reference_vectors() {
        // frozen reference outputs; any port must reproduce these exactly
        let mut g = SplitMix64::new(0);
        assert_eq!(g.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(g.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(g.next_u64(), 0x06C4_5D18_8009_454F);

        let mut g = SplitMix64::new(1234567);
        let got: Vec<u64> = (0..5).map(|_| g.next_u64()).collect();
        assert_eq!(
            got,
            vec![
                6457827717110365317,
                3203168211198807973,
                9817491932198370423,
                4593380528125082431,
                16408922859458223821,
            ]
        );
    }

    #[test]
    fn equipartition_contract() {
        for seed in 0..50 {
            let phi = sample_equipartition(8, seed).unwrap();
            assert!(phi.is_equi());
        }
        assert!(sample_equipartition(5, 1).is_err());
    }

    #[test]
    fn equipartition_frequency_roughly_uniform() {
        // n = 4 has 6 equi-partitions; each should show up ~1/6 of the time
        let mut counts: HashMap<u32, usize> = HashMap::new();
        let trials = 10_000;
        for seed in 0..trials {
            let phi = sample_equipartition(4, seed).unwrap();
            *counts.entry(phi.y_mask()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for &c in counts.values() {
            let freq = c as f64 / trials as f64;
            assert!((freq - 1.0 / 6.0).abs() < 0.02, "freq = {freq}");
        }
    }

    #[test]
    fn db_blocks_are_equi_split() {
        let bs = BlockStructure::new(8, 4).unwrap();
        for seed in 0..50 {
            let phi = sample_db(&bs, seed).unwrap();
            assert!(phi.is_equi());
            for block in bs.blocks() {
                let in_y = block.iter().filter(|&&i| phi.side(i) == Side::Y).count();
                assert_eq!(in_y, bs.r() / 2);
            }
        }
    }

    #[test]
    fn arc_pairing_n4_is_forced() {
        for seed in 0..20 {
            let p = sample_arc_pairing(4, seed).unwrap();
            assert_eq!(p.pairs(), &[(0, 1), (2, 3)]);
        }
    }

    #[test]
    fn arc_pairing_structure() {
        for seed in 0..200 {
            let p = sample_arc_pairing(10, seed).unwrap();
            assert_eq!(p.pairs().len(), 5);
            assert!(p.contains(0, 1));
        }
    }

    #[test]
    fn arc_partition_pairs_bichromatic() {
        for seed in 0..100 {
            let (pairing, phi) = sample_arc_partition(8, seed).unwrap();
            assert!(phi.is_equi());
            for &(a, b) in pairing.pairs() {
                assert_ne!(phi.side(a), phi.side(b));
            }
        }
    }

    #[test]
    fn f_arc_partition_examples() {
        let q = f_arc_partition(&[0, 1, 2, 3]).unwrap();
        assert_eq!(q.pairs(), &[(0, 1), (2, 3)]);

        // order x2, x1, x3, x4 (0-indexed: 1, 0, 2, 3)
        let q = f_arc_partition(&[1, 0, 2, 3]).unwrap();
        assert_eq!(q.pairs(), &[(0, 1), (2, 3)]);

        let q = f_arc_partition(&[2, 0, 1, 3]).unwrap();
        assert_eq!(q.pairs(), &[(0, 2), (1, 3)]);
        assert!(f_arc_partition(&[0, 0, 1, 2]).is_err());
    }

    #[test]
    fn similarity_examples() {
        let p = Pairing::new(6, [(0, 1), (2, 3), (4, 5)]).unwrap();
        assert_eq!(similarity(&p, &p).unwrap(), 3);

        let a = Pairing::new(4, [(0, 1), (2, 3)]).unwrap();
        let b = Pairing::new(4, [(0, 3), (1, 2)]).unwrap();
        assert_eq!(similarity(&a, &b).unwrap(), 0);

        let c = Pairing::new(6, [(0, 1), (2, 5), (3, 4)]).unwrap();
        assert_eq!(similarity(&p, &c).unwrap(), 1);
    }

    #[test]
    fn similarity_symmetric_and_bounded() {
        for seed in 0..50 {
            let p = sample_arc_pairing(8, seed).unwrap();
            let q = sample_arc_pairing(8, seed + 1000).unwrap();
            let s = similarity(&p, &q).unwrap();
            assert_eq!(s, similarity(&q, &p).unwrap());
            assert!(s <= 4);
        }
    }

    #[test]
    fn violations_examples() {
        let col = Coloring::new(4, 2).unwrap();
        let crossing = Pairing::new(4, [(0, 2), (1, 3)]).unwrap();
        let (v, g) = violations(&crossing, &col, 1).unwrap();
        assert_eq!(v, vec![2, 2]);
        assert_eq!(g, 2);

        let mono = Pairing::new(4, [(0, 1), (2, 3)]).unwrap();
        let (v, g) = violations(&mono, &col, 1).unwrap();
        assert_eq!(v, vec![0, 0]);
        assert_eq!(g, 0);

        // threshold n: V_c <= n/2 < n, so G = 0
        let (_, g) = violations(&crossing, &col, 4).unwrap();
        assert_eq!(g, 0);
    }

    #[test]
    fn violation_counts_sum_to_twice_crossings() {
        let col = Coloring::new(12, 3).unwrap();
        for seed in 0..50 {
            let p = sample_arc_pairing(12, seed).unwrap();
            let crossing = p
                .pairs()
                .iter()
                .filter(|&&(a, b)| col.class_of(a) != col.class_of(b))
                .count();
            let (v, _) = violations(&p, &col, 1).unwrap();
            assert_eq!(v.iter().sum::<usize>(), 2 * crossing);
        }
    }
}
