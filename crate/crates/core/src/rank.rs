//! The partial-derivative (coefficient) matrix of a multilinear
//! polynomial under a variable partition, and its rank over `Z_p`.

use crate::partitions::Partition;
use crate::{Error, MultilinearPoly, Result};

/// Cap on the number of variables on either side of the partition: the
/// matrix is dense with `2^|Y| * 2^|Z|` entries.
pub const MAX_SIDE_VARS: usize = 14;

/// Dense `2^|Y| x 2^|Z|` matrix: the entry at row `S`, column `T` is the
/// coefficient of the monomial `prod(S) * prod(T)`. Rows and columns are
/// ordered by ascending subset mask over the sorted side variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdMatrix {
    pub y_vars: Vec<usize>,
    pub z_vars: Vec<usize>,
    pub modulus: u64,
    pub rows: Vec<Vec<u64>>,
}

impl PdMatrix {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn rank(&self) -> usize {
        rank_mod_p(self.rows.clone(), self.modulus)
    }
}

fn side_vars(mask: u32) -> Vec<usize> {
    let mut vars = Vec::new();
    let mut bits = mask;
    while bits != 0 {
        vars.push(bits.trailing_zeros() as usize);
        bits &= bits - 1;
    }
    vars
}

pub fn pd_matrix(f: &MultilinearPoly, part: &Partition) -> Result<PdMatrix> {
    if part.num_vars() != f.num_vars() {
        return Err(Error::InvalidPartition(format!(
            "partition over {} variables applied to a polynomial over {}",
            part.num_vars(),
            f.num_vars()
        )));
    }
    let y_vars = side_vars(part.y_mask());
    let z_vars = side_vars(part.z_mask());
    if y_vars.len() > MAX_SIDE_VARS {
        return Err(Error::RankCapExceeded {
            side: 'Y',
            size: y_vars.len(),
            cap: MAX_SIDE_VARS,
        });
    }
    if z_vars.len() > MAX_SIDE_VARS {
        return Err(Error::RankCapExceeded {
            side: 'Z',
            size: z_vars.len(),
            cap: MAX_SIDE_VARS,
        });
    }
    let cols = 1usize << z_vars.len();
    let mut rows = vec![vec![0u64; cols]; 1 << y_vars.len()];
    // invert the compressed-index maps once, then place each term
    let y_mask = part.y_mask();
    let z_mask = part.z_mask();
    for (mask, coeff) in f.terms() {
        let row = compress_subset(mask & y_mask, &y_vars);
        let col = compress_subset(mask & z_mask, &z_vars);
        rows[row as usize][col as usize] = coeff;
    }
    Ok(PdMatrix {
        y_vars,
        z_vars,
        modulus: f.modulus(),
        rows,
    })
}

fn compress_subset(mask: u32, vars: &[usize]) -> u32 {
    let mut index = 0u32;
    for (bit, &v) in vars.iter().enumerate() {
        if mask >> v & 1 == 1 {
            index |= 1 << bit;
        }
    }
    index
}

/// Matrix rank over `Z_p` by Gaussian elimination (consumes the rows).
pub fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    use crate::field::{invm, mulm, subm};
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] % p != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = invm(rows[rank][col] % p, p).expect("pivot is nonzero");
        for c in col..ncols {
            rows[rank][c] = mulm(rows[rank][c], inv, p);
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] % p != 0 {
                let factor = rows[r][col] % p;
                for c in col..ncols {
                    let delta = mulm(factor, rows[rank][c], p);
                    rows[r][c] = subm(rows[r][c] % p, delta, p);
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Rank of the coefficient matrix of `f` under `part`.
pub fn pd_rank(f: &MultilinearPoly, part: &Partition) -> Result<usize> {
    Ok(pd_matrix(f, part)?.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DEFAULT_PRIME;
    use crate::hardpoly::{gen_ry, WAssignment};
    use crate::partitions::{sample_equipartition, SplitMix64};
    use proptest::prelude::*;

    const P: u64 = DEFAULT_PRIME;

    fn poly(n: usize, terms: &[(u32, u64)]) -> MultilinearPoly {
        MultilinearPoly::from_terms(n, P, terms.iter().copied()).unwrap()
    }

    #[test]
    fn antidiagonal_for_x0_plus_x1() {
        // f = x0 + x1 with Y = {x0}: rows (1, x0), cols (1, x1)
        let f = poly(2, &[(0b01, 1), (0b10, 1)]);
        let part = Partition::new(2, [0]).unwrap();
        let m = pd_matrix(&f, &part).unwrap();
        assert_eq!(m.rows, vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn rank_one_product() {
        // (1 + x0)(1 + x1) has the all-ones matrix: rank 1
        let f = poly(2, &[(0b00, 1), (0b01, 1), (0b10, 1), (0b11, 1)]);
        let part = Partition::new(2, [0]).unwrap();
        let m = pd_matrix(&f, &part).unwrap();
        assert_eq!(m.rows, vec![vec![1, 1], vec![1, 1]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn zero_polynomial_has_rank_zero() {
        let f = MultilinearPoly::zero(4, P).unwrap();
        let part = Partition::new(4, [0, 1]).unwrap();
        assert_eq!(pd_rank(&f, &part).unwrap(), 0);
    }

    #[test]
    fn ry_four_vars_is_full_rank() {
        let w = WAssignment::seeded(P, 17).unwrap();
        let f = gen_ry(&[0, 1, 2, 3], 4, &w).unwrap();
        for part in Partition::enumerate_equi(4).unwrap() {
            assert_eq!(pd_rank(&f, &part).unwrap(), 4, "partition {:?}", part);
        }
    }

    #[test]
    fn rank_is_transposed_under_side_swap() {
        let mut rng = SplitMix64::new(99);
        for trial in 0..20 {
            let n = 6;
            let terms: Vec<(u32, u64)> = (0..12)
                .map(|_| (rng.below(1 << n) as u32, rng.below(P)))
                .collect();
            let f = MultilinearPoly::from_terms(n, P, terms).unwrap();
            let part = sample_equipartition(n, trial).unwrap();
            let a = pd_rank(&f, &part).unwrap();
            let b = pd_rank(&f, &part.swapped()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn side_cap_enforced() {
        let f = MultilinearPoly::zero(16, P).unwrap();
        let part = Partition::new(16, 0..15).unwrap();
        assert!(matches!(
            pd_matrix(&f, &part),
            Err(Error::RankCapExceeded { side: 'Y', .. })
        ));
        assert!(matches!(
            pd_matrix(&f, &part.swapped()),
            Err(Error::RankCapExceeded { side: 'Z', .. })
        ));
    }

    proptest! {
        #[test]
        fn rank_subadditive_and_submultiplicative(
            seed_a in 0u64..1000,
            seed_b in 1000u64..2000,
            pseed in 0u64..50,
        ) {
            let n = 6usize;
            let mut rng = SplitMix64::new(seed_a);
            let ta: Vec<(u32, u64)> = (0..10).map(|_| (rng.below(1 << n) as u32, rng.below(P))).collect();
            let a = MultilinearPoly::from_terms(n, P, ta).unwrap();
            let mut rng = SplitMix64::new(seed_b);
            // b on the high bits only, so the product is defined
            let tb: Vec<(u32, u64)> = (0..6).map(|_| ((rng.below(8) as u32) << 3, rng.below(P))).collect();
            let b = MultilinearPoly::from_terms(n, P, tb).unwrap();
            let part = sample_equipartition(n, pseed).unwrap();

            let ra = pd_rank(&a, &part).unwrap();
            let rb = pd_rank(&b, &part).unwrap();
            prop_assert!(pd_rank(&a.add(&b).unwrap(), &part).unwrap() <= ra + rb);
            prop_assert!(pd_rank(&a.restrict_to(0b000111).mul(&b).unwrap(), &part).unwrap()
                <= pd_rank(&a.restrict_to(0b000111), &part).unwrap() * rb);
        }
    }
}
