//! Explicit hard polynomial families and seeded random model instances.
//!
//! Auxiliary formal variables (the `w`, `lambda` and `mu` coefficients of
//! the explicit families) are realized by substituting seeded random
//! field elements; rank statements over the rational-function field then
//! hold except with probability `deg/p` (a random substitution misses
//! the zero set of a nonzero minor only that often).

use std::collections::{BTreeMap, HashMap};

use crate::field::validate_modulus;
use crate::models::{Abp, Edge, EdgeLabel, Formula, Node};
use crate::partitions::{Pairing, SplitMix64};
use crate::{Error, MultilinearPoly, Result};

/// Enumeration cap for the arc process (`3^(n/2-1)` sequences).
pub const MAX_ARC_VARS: usize = 16;

fn fnv1a64(key: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in key.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1_0000_0000_01b3);
    }
    h
}

/// Deterministic nonzero residue derived from `(seed, key)`.
fn derive_nonzero(seed: u64, key: &str, p: u64) -> u64 {
    SplitMix64::new(seed ^ fnv1a64(key)).nonzero_mod(p)
}

/// Equal-size contiguous variable blocks `B_i = {(i-1)r, ..., ir-1}`
/// (0-indexed).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockStructure {
    n: usize,
    r: usize,
}

impl BlockStructure {
    /// `r` must be even and divide `n`, so every block admits an
    /// equi-partition.
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if r == 0 || r % 2 != 0 {
            return Err(Error::InvalidBlockStructure(format!(
                "block size {r} must be positive and even"
            )));
        }
        if n == 0 || n % r != 0 {
            return Err(Error::InvalidBlockStructure(format!(
                "block size {r} does not divide n = {n}"
            )));
        }
        Ok(Self { n, r })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn num_blocks(&self) -> usize {
        self.n / self.r
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        (0..self.num_blocks())
            .map(|i| (i * self.r..(i + 1) * self.r).collect())
            .collect()
    }
}

/// Values for the auxiliary `w_{i,l,j}` coefficients: seeded-random
/// nonzero by default, with explicit overrides.
#[derive(Debug, Clone)]
pub struct WAssignment {
    seed: u64,
    modulus: u64,
    overrides: BTreeMap<(usize, usize, usize), u64>,
}

impl WAssignment {
    pub fn seeded(modulus: u64, seed: u64) -> Result<Self> {
        validate_modulus(modulus)?;
        Ok(Self {
            seed,
            modulus,
            overrides: BTreeMap::new(),
        })
    }

    pub fn set(&mut self, i: usize, l: usize, j: usize, value: u64) {
        self.overrides.insert((i, l, j), value % self.modulus);
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn value(&self, i: usize, l: usize, j: usize) -> u64 {
        match self.overrides.get(&(i, l, j)) {
            Some(&v) => v,
            None => derive_nonzero(self.seed, &format!("w:{i}:{l}:{j}"), self.modulus),
        }
    }
}

/// Values for the `lambda_P` coefficients of the arc polynomial and the
/// per-move tags of its branching-program variant.
#[derive(Debug, Clone)]
pub struct LambdaAssignment {
    modulus: u64,
    default: LambdaDefault,
    overrides: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
enum LambdaDefault {
    Seeded(u64),
    Constant(u64),
    None,
}

impl LambdaAssignment {
    pub fn seeded(modulus: u64, seed: u64) -> Result<Self> {
        validate_modulus(modulus)?;
        Ok(Self {
            modulus,
            default: LambdaDefault::Seeded(seed),
            overrides: BTreeMap::new(),
        })
    }

    pub fn constant(modulus: u64, c: u64) -> Result<Self> {
        validate_modulus(modulus)?;
        Ok(Self {
            modulus,
            default: LambdaDefault::Constant(c % modulus),
            overrides: BTreeMap::new(),
        })
    }

    /// Only the supplied values exist; anything else is an error.
    pub fn explicit(modulus: u64, values: BTreeMap<String, u64>) -> Result<Self> {
        validate_modulus(modulus)?;
        Ok(Self {
            modulus,
            default: LambdaDefault::None,
            overrides: values,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn get(&self, key: &str) -> Result<u64> {
        if let Some(&v) = self.overrides.get(key) {
            return Ok(v % self.modulus);
        }
        match self.default {
            LambdaDefault::Seeded(seed) => Ok(derive_nonzero(seed, key, self.modulus)),
            LambdaDefault::Constant(c) => Ok(c),
            LambdaDefault::None => Err(Error::MissingLambda(key.to_string())),
        }
    }

    /// `lambda_P` for a pairing, addressed by its canonical key.
    pub fn lambda(&self, pairing: &Pairing) -> Result<u64> {
        self.get(&pairing.key())
    }

    /// Tag for the transition taken at `step` from the arc starting at
    /// `left`, by move `mv` in `{0, 1, 2}`.
    pub fn tag(&self, step: usize, left: usize, mv: usize) -> Result<u64> {
        self.get(&format!("tag:{step}:{left}:{mv}"))
    }
}

fn ry_rec(
    vars: &[usize],
    a: usize,
    b: usize, // inclusive position interval, empty when b < a
    n: usize,
    w: &WAssignment,
    memo: &mut HashMap<(usize, usize), MultilinearPoly>,
) -> Result<MultilinearPoly> {
    let p = w.modulus();
    if b < a || b == usize::MAX {
        return MultilinearPoly::constant(n, p, 1);
    }
    if let Some(f) = memo.get(&(a, b)) {
        return Ok(f.clone());
    }
    // (1 + x_a x_b) * f(a+1, b-1)
    let bracket = MultilinearPoly::from_terms(
        n,
        p,
        [(0u32, 1u64), ((1u32 << vars[a]) | (1 << vars[b]), 1)],
    )?;
    let inner = ry_rec(vars, a + 1, b.wrapping_sub(1), n, w, memo)?;
    let mut acc = bracket.mul(&inner)?;
    // + sum over odd-offset split points: both halves have even length
    let mut l = a + 1;
    while l + 2 <= b {
        let left = ry_rec(vars, a, l, n, w, memo)?;
        let right = ry_rec(vars, l + 1, b, n, w, memo)?;
        let coeff = w.value(vars[a], vars[l], vars[b]);
        acc = acc.add(&left.mul(&right)?.scale(coeff))?;
        l += 2;
    }
    memo.insert((a, b), acc.clone());
    Ok(acc)
}

/// The recursive full-rank polynomial on an ordered, even-size variable
/// list, inside an ambient space of `n` variables.
///
/// Conventions: the empty interval contributes 1 and split points are
/// restricted so both halves have even length; the two-variable base
/// case is then `1 + x_a x_b`, which is what the full-rank statements
/// require.
pub fn gen_ry(vars: &[usize], n: usize, w: &WAssignment) -> Result<MultilinearPoly> {
    if vars.len() % 2 != 0 {
        return Err(Error::OddLength(vars.len()));
    }
    if vars.is_empty() {
        return MultilinearPoly::constant(n, w.modulus(), 1);
    }
    let mut memo = HashMap::new();
    ry_rec(vars, 0, vars.len() - 1, n, w, &mut memo)
}

/// The block product `f_RY(B_1) * ... * f_RY(B_{n/r})`.
pub fn gen_pry(bs: &BlockStructure, w: &WAssignment) -> Result<MultilinearPoly> {
    let n = bs.n();
    let mut acc = MultilinearPoly::constant(n, w.modulus(), 1)?;
    for block in bs.blocks() {
        acc = acc.mul(&gen_ry(&block, n, w)?)?;
    }
    Ok(acc)
}

/// The same polynomial as an interval formula: a top product gate over
/// per-block dense sum-of-products sub-formulas.
pub fn gen_pry_formula(bs: &BlockStructure, w: &WAssignment) -> Result<Formula> {
    let n = bs.n();
    let p = w.modulus();
    let mut factors = Vec::new();
    for block in bs.blocks() {
        let f = gen_ry(&block, n, w)?;
        let mut monomials = Vec::new();
        for (mask, coeff) in f.terms() {
            let mut leaves = Vec::new();
            if coeff != 1 || mask == 0 {
                leaves.push(Node::Const(coeff));
            }
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                leaves.push(Node::Var(i));
                bits &= bits - 1;
            }
            monomials.push(if leaves.len() == 1 {
                leaves.pop().unwrap()
            } else {
                Node::Prod(leaves)
            });
        }
        factors.push(if monomials.len() == 1 {
            monomials.pop().unwrap()
        } else {
            Node::Sum(monomials)
        });
    }
    Formula::new(n, p, Node::Prod(factors))
}

fn check_arc_n(n: usize) -> Result<()> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::OddLength(n));
    }
    if n > MAX_ARC_VARS {
        return Err(Error::TooManyVariables {
            n,
            cap: MAX_ARC_VARS,
        });
    }
    Ok(())
}

/// All `3^(n/2-1)` move sequences of the arc process, as pair lists in
/// construction order.
pub fn enum_arc_sequences(n: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    check_arc_n(n)?;
    let m = n as i64;
    let red = |x: i64| x.rem_euclid(m) as usize;
    let mut out = Vec::new();
    // stack entries: (pairs so far, left, right)
    let mut stack = vec![(vec![(0usize, 1usize)], 0i64, 1i64)];
    while let Some((pairs, left, right)) = stack.pop() {
        if pairs.len() == n / 2 {
            out.push(pairs);
            continue;
        }
        for mv in 0..3 {
            let (pair, l2, r2) = match mv {
                0 => ((red(left - 2), red(left - 1)), left - 2, right),
                1 => ((red(left - 1), red(right + 1)), left - 1, right + 1),
                _ => ((red(right + 1), red(right + 2)), left, right + 2),
            };
            let mut next = pairs.clone();
            next.push(pair);
            stack.push((next, l2, r2));
        }
    }
    out.sort();
    Ok(out)
}

/// The set of distinct pairings reachable by the arc process.
pub fn enum_arc_pairings(n: usize) -> Result<Vec<Pairing>> {
    let mut set: Vec<Pairing> = Vec::new();
    for seq in enum_arc_sequences(n)? {
        let pairing = Pairing::new(n, seq)?;
        if !set.contains(&pairing) {
            set.push(pairing);
        }
    }
    set.sort();
    Ok(set)
}

/// Distinct arc pairings with the number of move sequences producing each.
pub fn arc_pairing_multiplicities(n: usize) -> Result<BTreeMap<Pairing, usize>> {
    let mut map = BTreeMap::new();
    for seq in enum_arc_sequences(n)? {
        *map.entry(Pairing::new(n, seq)?).or_insert(0) += 1;
    }
    Ok(map)
}

/// The arc polynomial: `sum over pairings of lambda_P * prod (x_l + x_r)`.
pub fn gen_dmpy(n: usize, lambda: &LambdaAssignment) -> Result<MultilinearPoly> {
    let p = lambda.modulus();
    let mut acc = MultilinearPoly::zero(n, p)?;
    for pairing in enum_arc_pairings(n)? {
        let mut term = MultilinearPoly::constant(n, p, 1)?;
        for &(a, b) in pairing.pairs() {
            let factor =
                MultilinearPoly::from_terms(n, p, [(1u32 << a, 1u64), (1 << b, 1)])?;
            term = term.mul(&factor)?;
        }
        acc = acc.add(&term.scale(lambda.lambda(&pairing)?))?;
    }
    Ok(acc)
}

/// A syntactic multilinear branching program for the arc polynomial:
/// states are spanned arcs, each of the three moves contributes a pair
/// of parallel edges `(x_a + x_b)` scaled by a per-move tag. Each move
/// sequence contributes the product of its tags times its pairing
/// monomial, so distinct sequences reaching the same pairing add up.
pub fn gen_dmpy_smabp(n: usize, tags: &LambdaAssignment) -> Result<Abp> {
    check_arc_n(n)?;
    let p = tags.modulus();
    let m = n as i64;
    let red = |x: i64| x.rem_euclid(m) as usize;
    let steps = n / 2;
    let mut layers: Vec<Vec<usize>> = vec![vec![0]];
    let mut edges: Vec<Edge> = Vec::new();
    let mut next_id = 1usize;
    // states per layer keyed by the left endpoint of the spanned arc
    let mut current: BTreeMap<i64, usize> = BTreeMap::new();

    let sink_layer = steps; // layer index of the terminal node
    for step in 0..steps {
        let mut next: BTreeMap<i64, usize> = BTreeMap::new();
        let mut layer_nodes = Vec::new();
        let mut transitions: Vec<(usize, (usize, usize), u64, i64)> = Vec::new();
        if step == 0 {
            // the first pair (0, 1) is forced and carries no tag
            transitions.push((0, (0, 1), 1 % p, 0));
        } else {
            for (&left, &node) in &current {
                let right = left + 2 * step as i64 - 1;
                for mv in 0..3 {
                    let (pair, l2) = match mv {
                        0 => ((red(left - 2), red(left - 1)), left - 2),
                        1 => ((red(left - 1), red(right + 1)), left - 1),
                        _ => ((red(right + 1), red(right + 2)), left),
                    };
                    let tag = tags.tag(step, red(left), mv)?;
                    transitions.push((node, pair, tag, l2));
                }
            }
        }
        for (from, (a, b), tag, l2) in transitions {
            let to = if step + 1 == sink_layer {
                // all full arcs merge into the terminal node
                *next.entry(0).or_insert_with(|| {
                    let id = next_id;
                    next_id += 1;
                    layer_nodes.push(id);
                    id
                })
            } else {
                *next.entry(l2.rem_euclid(m)).or_insert_with(|| {
                    let id = next_id;
                    next_id += 1;
                    layer_nodes.push(id);
                    id
                })
            };
            edges.push(Edge {
                from,
                to,
                label: EdgeLabel::Var { index: a, coeff: tag },
            });
            edges.push(Edge {
                from,
                to,
                label: EdgeLabel::Var { index: b, coeff: tag },
            });
        }
        layers.push(layer_nodes);
        current = next;
    }
    Abp::new(n, p, layers, edges)
}

/// A uniformly shaped random read-once formula: full binary tree over a
/// shuffled variable order, fair-coin gate types, variable leaves only.
pub fn random_rof(n: usize, seed: u64, modulus: u64) -> Result<Formula> {
    validate_modulus(modulus)?;
    if n == 0 {
        return Err(Error::InvalidModel("a ROF needs at least one variable".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut vars: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut vars);
    fn build(vars: &[usize], rng: &mut SplitMix64) -> Node {
        if vars.len() == 1 {
            return Node::Var(vars[0]);
        }
        let cut = 1 + rng.below(vars.len() as u64 - 1) as usize;
        let (l, r) = vars.split_at(cut);
        let children = vec![build(l, rng), build(r, rng)];
        if rng.below(2) == 0 {
            Node::Sum(children)
        } else {
            Node::Prod(children)
        }
    }
    let root = build(&vars, &mut rng);
    Formula::new(n, modulus, root)
}

/// Random interval formula: product gates split the current index
/// interval into contiguous halves, sum gates recurse on the same
/// interval, leaves pick a variable inside it.
pub fn random_interval_formula(n: usize, size: usize, seed: u64, modulus: u64) -> Result<Formula> {
    validate_modulus(modulus)?;
    if n == 0 {
        return Err(Error::InvalidModel("need at least one variable".into()));
    }
    let mut rng = SplitMix64::new(seed);
    fn build(lo: usize, hi: usize, budget: usize, p: u64, rng: &mut SplitMix64) -> Node {
        let width = hi - lo;
        if budget < 3 || (width == 1 && rng.below(3) == 0) {
            return if rng.below(4) == 0 {
                Node::Const(rng.nonzero_mod(p))
            } else {
                Node::Var(lo + rng.below(width as u64) as usize)
            };
        }
        let make_prod = width >= 2 && rng.below(2) == 0;
        if make_prod {
            let cut = lo + 1 + rng.below(width as u64 - 1) as usize;
            let left_budget = (budget - 1) / 2;
            Node::Prod(vec![
                build(lo, cut, left_budget, p, rng),
                build(cut, hi, budget - 1 - left_budget, p, rng),
            ])
        } else {
            let left_budget = (budget - 1) / 2;
            Node::Sum(vec![
                build(lo, hi, left_budget, p, rng),
                build(lo, hi, budget - 1 - left_budget, p, rng),
            ])
        }
    }
    let root = build(0, n, size.max(1), modulus, &mut rng);
    Formula::new(n, modulus, root)
}

/// Per-transition random edges between consecutive layers. Each `(u, v)`
/// pair independently gets a variable edge, a constant edge, or nothing.
fn random_transition(
    rng: &mut SplitMix64,
    from: &[usize],
    to: &[usize],
    var: Option<usize>,
    p: u64,
    edges: &mut Vec<Edge>,
) {
    for &u in from {
        for &v in to {
            match rng.below(10) {
                0..=4 => {
                    if let Some(i) = var {
                        edges.push(Edge {
                            from: u,
                            to: v,
                            label: EdgeLabel::Var {
                                index: i,
                                coeff: rng.nonzero_mod(p),
                            },
                        });
                    }
                }
                5..=6 => edges.push(Edge {
                    from: u,
                    to: v,
                    label: EdgeLabel::Const(rng.nonzero_mod(p)),
                }),
                _ => {}
            }
        }
    }
}

/// Random ROABP of the given width over a seeded random variable order.
pub fn random_roabp(n: usize, width: usize, seed: u64, modulus: u64) -> Result<Abp> {
    validate_modulus(modulus)?;
    if n == 0 || width == 0 {
        return Err(Error::InvalidModel("n and width must be positive".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut layers: Vec<Vec<usize>> = vec![vec![0]];
    let mut next_id = 1;
    for _ in 0..n - 1 {
        layers.push((0..width).map(|_| {
            let id = next_id;
            next_id += 1;
            id
        }).collect());
    }
    layers.push(vec![next_id]);
    let mut edges = Vec::new();
    for k in 0..n {
        let (from, to) = (&layers[k], &layers[k + 1]);
        random_transition(&mut rng, from, to, Some(order[k]), modulus, &mut edges);
    }
    Abp::new(n, modulus, layers, edges)
}

/// Random strict-interval ABP: an ascending and a descending one-ordered
/// branch glued at shared source and sink.
pub fn random_strict_interval_abp(n: usize, size: usize, seed: u64, modulus: u64) -> Result<Abp> {
    validate_modulus(modulus)?;
    if n == 0 {
        return Err(Error::InvalidModel("need at least one variable".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let width = (size / (2 * n.max(1))).clamp(1, 4);
    let mut layers: Vec<Vec<usize>> = vec![vec![0]];
    let mut next_id = 1;
    let mut asc_layers: Vec<Vec<usize>> = Vec::new();
    let mut desc_layers: Vec<Vec<usize>> = Vec::new();
    for _ in 0..n - 1 {
        let asc: Vec<usize> = (0..width).map(|_| { let id = next_id; next_id += 1; id }).collect();
        let desc: Vec<usize> = (0..width).map(|_| { let id = next_id; next_id += 1; id }).collect();
        let mut combined = asc.clone();
        combined.extend(desc.iter().copied());
        asc_layers.push(asc);
        desc_layers.push(desc);
        layers.push(combined);
    }
    let sink = next_id;
    layers.push(vec![sink]);
    // each branch reads a random subset of variables, ascending resp.
    // descending; skipped transitions carry constants only
    let asc_reads: Vec<Option<usize>> = (0..n).map(|i| (rng.below(4) < 3).then_some(i)).collect();
    let desc_reads: Vec<Option<usize>> =
        (0..n).map(|k| (rng.below(4) < 3).then_some(n - 1 - k)).collect();
    let mut edges = Vec::new();
    let src = vec![0usize];
    let snk = vec![sink];
    for k in 0..n {
        let from_a = if k == 0 { &src } else { &asc_layers[k - 1] };
        let to_a = if k == n - 1 { &snk } else { &asc_layers[k] };
        random_transition(&mut rng, from_a, to_a, asc_reads[k], modulus, &mut edges);
        let from_d = if k == 0 { &src } else { &desc_layers[k - 1] };
        let to_d = if k == n - 1 { &snk } else { &desc_layers[k] };
        random_transition(&mut rng, from_d, to_d, desc_reads[k], modulus, &mut edges);
    }
    Abp::new(n, modulus, layers, edges)
}
