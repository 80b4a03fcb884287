//! Deterministic white-box identity testing for ROABPs, and for
//! strict-interval programs via conversion.
//!
//! The sweep maintains, per layer, a set of monomials whose coefficient
//! vectors (over the layer's nodes) span the row space of the full
//! coefficient matrix. Each transition maps every tracked vector through
//! the constant edges (same monomial) and through the variable edges
//! (monomial times the read variable); dependent images are discarded.
//! At the sink the tracked vectors are scalars, so the polynomial is
//! zero exactly when no tracked monomial survives with a nonzero value.

use std::collections::HashMap;

use crate::field::{addm, invm, mulm, subm};
use crate::models::{Abp, EdgeLabel};
use crate::transforms::strict_interval_to_roabp;
use crate::{Error, Result};

/// PIT verdict. A nonzero verdict carries a monomial with provably
/// nonzero coefficient and a boolean point where the polynomial does
/// not vanish.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PitResult {
    Zero,
    NonZero {
        witness_mask: u64,
        witness_point: Vec<u64>,
    },
}

impl PitResult {
    pub fn is_zero(&self) -> bool {
        matches!(self, PitResult::Zero)
    }
}

/// One tracked monomial and its coefficient vector over the current
/// layer's nodes.
struct Row {
    mask: u64,
    vec: Vec<u64>,
}

/// Reduces `v` against the echelon rows; returns the remainder if it is
/// nonzero, updating the echelon basis.
fn try_insert(echelon: &mut Vec<(usize, Vec<u64>)>, mut v: Vec<u64>, p: u64) -> bool {
    for (pivot, row) in echelon.iter() {
        if v[*pivot] != 0 {
            let factor = v[*pivot];
            for (x, y) in v.iter_mut().zip(row) {
                *x = subm(*x, mulm(factor, *y, p), p);
            }
        }
    }
    let Some(pivot) = v.iter().position(|&x| x != 0) else {
        return false;
    };
    let inv = invm(v[pivot], p).expect("pivot is nonzero");
    for x in v.iter_mut() {
        *x = mulm(*x, inv, p);
    }
    echelon.push((pivot, v));
    true
}

/// Zero test only; no witness point search.
fn sweep(p: &Abp) -> Result<Option<u64>> {
    let check = p.check_oblivious_roabp();
    if !check.report.verdict {
        return Err(Error::InvalidModel(format!(
            "not a ROABP: {}",
            check.report.witness.unwrap_or_default()
        )));
    }
    let pr = p.prune();
    let modulus = p.modulus();
    let mut col: HashMap<usize, usize> = HashMap::from([(pr.source(), 0)]);
    let mut rows: Vec<Row> = vec![Row {
        mask: 0,
        vec: vec![1 % modulus],
    }];
    let mut layer_of: HashMap<usize, usize> = HashMap::new();
    for (k, layer) in pr.layers().iter().enumerate() {
        for &id in layer {
            layer_of.insert(id, k);
        }
    }
    let mut edge_iter = pr.edges().iter().peekable();
    for k in 0..pr.layers().len() - 1 {
        let next_layer = &pr.layers()[k + 1];
        let next_col: HashMap<usize, usize> = next_layer
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        // gather this transition's edges (sorted by source layer)
        let mut const_edges = Vec::new();
        let mut var_edges = Vec::new();
        while let Some(e) = edge_iter.peek() {
            if layer_of[&e.from] != k {
                break;
            }
            let e = edge_iter.next().expect("peeked");
            match e.label {
                EdgeLabel::Const(c) => const_edges.push((e.from, e.to, c)),
                EdgeLabel::Var { index, coeff } => var_edges.push((e.from, e.to, index, coeff)),
            }
        }
        let width = next_layer.len();
        let mut echelon: Vec<(usize, Vec<u64>)> = Vec::new();
        let mut next_rows: Vec<Row> = Vec::new();
        for row in &rows {
            let mut images: Vec<(u64, Vec<u64>)> = Vec::new();
            if !const_edges.is_empty() {
                let mut v = vec![0u64; width];
                for &(from, to, c) in &const_edges {
                    if let Some(&i) = col.get(&from) {
                        let j = next_col[&to];
                        v[j] = addm(v[j], mulm(row.vec[i], c, modulus), modulus);
                    }
                }
                images.push((row.mask, v));
            }
            if !var_edges.is_empty() {
                let mut v = vec![0u64; width];
                let mut mask = row.mask;
                for &(from, to, index, coeff) in &var_edges {
                    if let Some(&i) = col.get(&from) {
                        let j = next_col[&to];
                        v[j] = addm(v[j], mulm(row.vec[i], coeff, modulus), modulus);
                        mask |= 1u64 << index;
                    }
                }
                images.push((mask, v));
            }
            for (mask, v) in images {
                if try_insert(&mut echelon, v.clone(), modulus) {
                    next_rows.push(Row { mask, vec: v });
                }
            }
        }
        debug_assert!(next_rows.len() <= width, "spanning set exceeds layer width");
        rows = next_rows;
        col = next_col;
    }
    // sink layer: vectors are scalars
    Ok(rows
        .into_iter()
        .find(|r| r.vec.iter().any(|&x| x != 0))
        .map(|r| r.mask))
}

/// Replaces every `x_i` edge by the constant `coeff * value`.
fn substitute(p: &Abp, i: usize, value: u64) -> Abp {
    let modulus = p.modulus();
    let edges = p
        .edges()
        .iter()
        .map(|e| {
            let label = match e.label {
                EdgeLabel::Var { index, coeff } if index == i => {
                    EdgeLabel::Const(mulm(coeff, value % modulus, modulus))
                }
                other => other,
            };
            crate::models::Edge {
                from: e.from,
                to: e.to,
                label,
            }
        })
        .collect();
    Abp::new(p.num_vars(), modulus, p.layers().to_vec(), edges).expect("substitution is shape-preserving")
}

/// Greedy boolean witness point: the polynomial is multilinear, so if it
/// vanishes identically with `x_i = 0` it has `x_i` as a factor and
/// `x_i = 1` keeps it nonzero.
fn witness_point(p: &Abp) -> Result<Vec<u64>> {
    let n = p.num_vars();
    let mut cur = p.clone();
    let mut point = vec![0u64; n];
    for i in 0..n {
        let at_zero = substitute(&cur, i, 0);
        if sweep(&at_zero)?.is_some() {
            point[i] = 0;
            cur = at_zero;
        } else {
            point[i] = 1;
            cur = substitute(&cur, i, 1);
        }
    }
    Ok(point)
}

/// White-box identity test for a ROABP.
pub fn roabp_pit(p: &Abp) -> Result<PitResult> {
    match sweep(p)? {
        None => Ok(PitResult::Zero),
        Some(mask) => Ok(PitResult::NonZero {
            witness_mask: mask,
            witness_point: witness_point(p)?,
        }),
    }
}

/// Identity test for a strict-interval program, via conversion. The
/// conversion keeps variable identities, so witnesses carry over.
pub fn strict_interval_pit(p: &Abp) -> Result<PitResult> {
    roabp_pit(&strict_interval_to_roabp(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DEFAULT_PRIME;
    use crate::hardpoly::{random_roabp, random_strict_interval_abp};
    use crate::models::Edge;

    const P: u64 = DEFAULT_PRIME;

    fn var(i: usize) -> EdgeLabel {
        EdgeLabel::Var { index: i, coeff: 1 }
    }

    fn path_x0_x1() -> Abp {
        Abp::new(
            2,
            P,
            vec![vec![0], vec![1], vec![2]],
            vec![
                Edge { from: 0, to: 1, label: var(0) },
                Edge { from: 1, to: 2, label: var(1) },
            ],
        )
        .unwrap()
    }

    fn check_witness(p: &Abp, res: &PitResult) {
        let PitResult::NonZero { witness_mask, witness_point } = res else {
            panic!("expected a nonzero verdict");
        };
        let f = p.expand().unwrap();
        assert_ne!(f.coeff(*witness_mask as u32), 0, "witness monomial");
        assert_ne!(p.eval(witness_point).unwrap(), 0, "witness point");
    }

    #[test]
    fn single_path_is_nonzero() {
        let p = path_x0_x1();
        let res = roabp_pit(&p).unwrap();
        assert_eq!(
            res,
            PitResult::NonZero {
                witness_mask: 0b11,
                witness_point: vec![1, 1],
            }
        );
        check_witness(&p, &res);
    }

    #[test]
    fn forced_cancellation_is_zero() {
        // parallel branches with weights 1 and -1
        let p = Abp::new(
            2,
            P,
            vec![vec![0], vec![1, 2], vec![3]],
            vec![
                Edge { from: 0, to: 1, label: var(0) },
                Edge { from: 1, to: 3, label: var(1) },
                Edge { from: 0, to: 2, label: EdgeLabel::Var { index: 0, coeff: P - 1 } },
                Edge { from: 2, to: 3, label: var(1) },
            ],
        )
        .unwrap();
        assert_eq!(roabp_pit(&p).unwrap(), PitResult::Zero);
    }

    #[test]
    fn trivial_zero_program() {
        assert_eq!(roabp_pit(&Abp::zero(3, P).unwrap()).unwrap(), PitResult::Zero);
    }

    #[test]
    fn non_roabp_rejected() {
        // two variables in one transition
        let p = Abp::new(
            2,
            P,
            vec![vec![0], vec![1, 2], vec![3]],
            vec![
                Edge { from: 0, to: 1, label: var(0) },
                Edge { from: 1, to: 3, label: var(1) },
                Edge { from: 0, to: 2, label: var(1) },
                Edge { from: 2, to: 3, label: var(0) },
            ],
        )
        .unwrap();
        assert!(matches!(roabp_pit(&p), Err(Error::InvalidModel(_))));
        // but the strict-interval route accepts it
        let res = strict_interval_pit(&p).unwrap();
        check_witness(&p, &res);
    }

    #[test]
    fn random_roabps_match_expansion_oracle() {
        let mut zeros = 0;
        for seed in 0..100 {
            let p = random_roabp(7, 3, seed, P).unwrap();
            let f = p.expand().unwrap();
            let res = roabp_pit(&p).unwrap();
            if f.is_zero() {
                zeros += 1;
                assert_eq!(res, PitResult::Zero, "seed {seed}");
            } else {
                check_witness(&p, &res);
            }
        }
        assert!(zeros > 0, "corpus should include zero programs");
    }

    #[test]
    fn strict_interval_branch_cancellation() {
        // (x0 then x1) minus (x1 then x0): computes 0
        let p = Abp::new(
            2,
            P,
            vec![vec![0], vec![1, 2], vec![3]],
            vec![
                Edge { from: 0, to: 1, label: var(0) },
                Edge { from: 1, to: 3, label: var(1) },
                Edge { from: 0, to: 2, label: EdgeLabel::Var { index: 1, coeff: P - 1 } },
                Edge { from: 2, to: 3, label: var(0) },
            ],
        )
        .unwrap();
        assert_eq!(strict_interval_pit(&p).unwrap(), PitResult::Zero);
    }

    #[test]
    fn random_strict_interval_matches_oracle() {
        for seed in 0..50 {
            let p = random_strict_interval_abp(6, 30, seed, P).unwrap();
            let f = p.expand().unwrap();
            let res = strict_interval_pit(&p).unwrap();
            assert_eq!(res.is_zero(), f.is_zero(), "seed {seed}");
            if !f.is_zero() {
                check_witness(&p, &res);
            }
        }
    }
}
