//! Taxonomy of the internal gates of a binary formula relative to a
//! variable partition.
//!
//! Gates with at least one variable-leaf input fall into four types:
//! sum/product crossed with both-inputs-variables / exactly-one. A
//! both-variable sum gate `x_i + x_j` additionally gets classified by
//! the rank of its own 2x2 coefficient matrix, which is 2 exactly when
//! the partition separates `i` from `j`.

use crate::models::{Formula, Node};
use crate::partitions::Partition;
use crate::rank::pd_rank;
use crate::{Error, MultilinearPoly, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateCensus {
    /// Sum gates with two variable inputs.
    pub a: usize,
    /// Product gates with two variable inputs.
    pub b: usize,
    /// Sum gates with exactly one variable input.
    pub c: usize,
    /// Product gates with exactly one variable input.
    pub d: usize,
    /// Count of `a` whose polynomial has rank 1 under the partition.
    pub a_one: usize,
    /// Count of `a` whose polynomial has rank 2 under the partition.
    pub a_two: usize,
}

fn sum_gate_rank(i: usize, j: usize, part: &Partition, modulus: u64) -> Result<usize> {
    // materialize x + y over two fresh variables, partitioned the same
    // way the ambient partition splits i and j
    let f = MultilinearPoly::from_terms(2, modulus, [(0b01u32, 1u64), (0b10, 1)])?;
    let y_side: Vec<usize> = [i, j]
        .iter()
        .enumerate()
        .filter(|(_, &v)| part.side(v) == crate::partitions::Side::Y)
        .map(|(pos, _)| pos)
        .collect();
    pd_rank(&f, &Partition::new(2, y_side)?)
}

fn walk(node: &Node, part: &Partition, modulus: u64, census: &mut GateCensus) -> Result<()> {
    let children = match node {
        Node::Var(_) | Node::Const(_) => return Ok(()),
        Node::Sum(c) | Node::Prod(c) => c,
    };
    for child in children {
        walk(child, part, modulus, census)?;
    }
    let var_inputs: Vec<usize> = children
        .iter()
        .filter_map(|c| match c {
            Node::Var(i) => Some(*i),
            _ => None,
        })
        .collect();
    match (node, var_inputs.as_slice()) {
        (Node::Sum(_), &[i, j]) => {
            census.a += 1;
            match sum_gate_rank(i, j, part, modulus)? {
                1 => census.a_one += 1,
                2 => census.a_two += 1,
                r => {
                    return Err(Error::Precondition(format!(
                        "two-variable sum gate with rank {r}"
                    )))
                }
            }
        }
        (Node::Prod(_), &[_, _]) => census.b += 1,
        (Node::Sum(_), &[_]) => census.c += 1,
        (Node::Prod(_), &[_]) => census.d += 1,
        _ => {}
    }
    Ok(())
}

pub fn gate_census(f: &Formula, part: &Partition) -> Result<GateCensus> {
    if !f.is_binary() {
        return Err(Error::Precondition(
            "gate census requires a binary formula; binarize first".into(),
        ));
    }
    if part.num_vars() != f.num_vars() {
        return Err(Error::InvalidPartition(format!(
            "partition over {} variables applied to a formula over {}",
            part.num_vars(),
            f.num_vars()
        )));
    }
    let mut census = GateCensus::default();
    walk(f.root(), part, f.modulus(), &mut census)?;
    Ok(census)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DEFAULT_PRIME;

    const P: u64 = DEFAULT_PRIME;

    fn census(f: &Formula, y: impl IntoIterator<Item = usize>) -> GateCensus {
        let part = Partition::new(f.num_vars(), y).unwrap();
        gate_census(f, &part).unwrap()
    }

    #[test]
    fn mixed_example() {
        // (x0 + x1) * (x2 * x3), split x0, x2 from x1, x3
        let f = Formula::new(
            4,
            P,
            Node::Prod(vec![
                Node::Sum(vec![Node::Var(0), Node::Var(1)]),
                Node::Prod(vec![Node::Var(2), Node::Var(3)]),
            ]),
        )
        .unwrap();
        let got = census(&f, [0, 2]);
        assert_eq!(
            got,
            GateCensus {
                a: 1,
                b: 1,
                c: 0,
                d: 0,
                a_one: 0,
                a_two: 1
            }
        );
    }

    #[test]
    fn same_side_sum_has_rank_one() {
        let f = Formula::new(2, P, Node::Sum(vec![Node::Var(0), Node::Var(1)])).unwrap();
        let got = census(&f, [0, 1]);
        assert_eq!(got.a, 1);
        assert_eq!(got.a_one, 1);
        assert_eq!(got.a_two, 0);
    }

    #[test]
    fn product_with_one_variable_input_is_type_d() {
        // ((x0 + x1) * x2): inner sum is Type A, outer product Type D
        let f = Formula::new(
            3,
            P,
            Node::Prod(vec![
                Node::Sum(vec![Node::Var(0), Node::Var(1)]),
                Node::Var(2),
            ]),
        )
        .unwrap();
        let got = census(&f, [0]);
        assert_eq!(got.a, 1);
        assert_eq!(got.a_two, 1);
        assert_eq!(got.d, 1);
        assert_eq!(got.b + got.c, 0);
    }

    #[test]
    fn sum_with_one_variable_input_is_type_c() {
        let f = Formula::new(
            3,
            P,
            Node::Sum(vec![
                Node::Prod(vec![Node::Var(0), Node::Var(1)]),
                Node::Var(2),
            ]),
        )
        .unwrap();
        let got = census(&f, [0, 2]);
        assert_eq!(got.b, 1);
        assert_eq!(got.c, 1);
        assert_eq!(got.a + got.d, 0);
    }

    #[test]
    fn split_invariants() {
        assert_eq!(census(
            &Formula::new(2, P, Node::Sum(vec![Node::Var(0), Node::Var(1)])).unwrap(),
            [0],
        ).a_two, 1);
        // census totals never exceed the internal gate count
        let f = Formula::new(
            4,
            P,
            Node::Sum(vec![
                Node::Prod(vec![Node::Var(0), Node::Var(1)]),
                Node::Prod(vec![Node::Var(2), Node::Var(3)]),
            ]),
        )
        .unwrap();
        let got = census(&f, [0, 2]);
        assert_eq!(got.a + got.b + got.c + got.d, 2);
        assert_eq!(got.a, got.a_one + got.a_two);
    }

    #[test]
    fn non_binary_rejected() {
        let f = Formula::new(
            3,
            P,
            Node::Sum(vec![Node::Var(0), Node::Var(1), Node::Var(2)]),
        )
        .unwrap();
        let part = Partition::new(3, [0]).unwrap();
        assert!(matches!(gate_census(&f, &part), Err(Error::Precondition(_))));
        let bin = f.binarize();
        assert!(gate_census(&bin, &part).is_ok());
    }
}
