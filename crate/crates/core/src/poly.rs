//! Dense multilinear polynomials over a prime field.
//!
//! Monomials are variable subsets encoded as bitmasks over `{0, ..., n-1}`,
//! mapped to nonzero coefficients. A `BTreeMap` keeps the term order
//! canonical (ascending masks) so serialized polynomials diff cleanly.
//! The variable count is capped at [`MAX_VARS`]: the rank measure needs
//! `2^(n/2)`-dimensional matrices, so larger `n` would be unusable anyway.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::field::{addm, mulm, negm, validate_modulus};
use crate::{Error, FieldElem, Result};

/// Dense-representation cap on the number of variables.
pub const MAX_VARS: usize = 24;

/// A multilinear polynomial in `n` variables over `Z_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearPoly {
    n: usize,
    modulus: u64,
    coeffs: BTreeMap<u32, u64>,
}

impl MultilinearPoly {
    /// The zero polynomial.
    pub fn zero(n: usize, modulus: u64) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::TooManyVariables { n, cap: MAX_VARS });
        }
        validate_modulus(modulus)?;
        Ok(Self {
            n,
            modulus,
            coeffs: BTreeMap::new(),
        })
    }

    /// The constant polynomial `c`.
    pub fn constant(n: usize, modulus: u64, c: u64) -> Result<Self> {
        let mut f = Self::zero(n, modulus)?;
        f.add_term(0, c);
        Ok(f)
    }

    /// The single variable `x_i`.
    pub fn var(n: usize, modulus: u64, i: usize) -> Result<Self> {
        let mut f = Self::zero(n, modulus)?;
        if i >= n {
            return Err(Error::InvalidModel(format!(
                "variable index {i} out of range for n = {n}"
            )));
        }
        f.add_term(1 << i, 1);
        Ok(f)
    }

    /// Builds a polynomial from `(mask, coeff)` terms; repeated masks add up.
    pub fn from_terms(
        n: usize,
        modulus: u64,
        terms: impl IntoIterator<Item = (u32, u64)>,
    ) -> Result<Self> {
        let mut f = Self::zero(n, modulus)?;
        for (mask, c) in terms {
            if mask >= (1u32 << n) {
                return Err(Error::InvalidModel(format!(
                    "monomial mask {mask:#b} is not a subset of the first {n} variables"
                )));
            }
            f.add_term(mask, c);
        }
        Ok(f)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of the monomial given by `mask` (zero if absent).
    pub fn coeff(&self, mask: u32) -> u64 {
        self.coeffs.get(&mask).copied().unwrap_or(0)
    }

    /// Iterates over `(mask, coeff)` terms in ascending mask order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    /// Union of the variables of all nonzero monomials, as a bitmask.
    pub fn support_mask(&self) -> u32 {
        self.coeffs.keys().fold(0, |acc, &m| acc | m)
    }

    /// Adds `c` into the coefficient of `mask`, pruning on cancellation.
    fn add_term(&mut self, mask: u32, c: u64) {
        let c = c % self.modulus;
        if c == 0 {
            return;
        }
        let entry = self.coeffs.entry(mask).or_insert(0);
        *entry = addm(*entry, c, self.modulus);
        if *entry == 0 {
            self.coeffs.remove(&mask);
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            });
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (&mask, &c) in &other.coeffs {
            out.add_term(mask, c);
        }
        Ok(out)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Self, c: u64) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (&mask, &k) in &other.coeffs {
            out.add_term(mask, mulm(k, c, self.modulus));
        }
        Ok(out)
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, negm(1 % self.modulus, self.modulus))
    }

    /// Scales every coefficient by `c`.
    pub fn scale(&self, c: u64) -> Self {
        let mut out = Self {
            n: self.n,
            modulus: self.modulus,
            coeffs: BTreeMap::new(),
        };
        for (&mask, &k) in &self.coeffs {
            out.add_term(mask, mulm(k, c, self.modulus));
        }
        out
    }

    /// Product of two polynomials on disjoint variable sets.
    ///
    /// Syntactic multilinear models only ever multiply variable-disjoint
    /// operands, so this is the only product the crate needs. The result
    /// is multilinear by construction; overlapping supports are an error.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let overlap = self.support_mask() & other.support_mask();
        if overlap != 0 {
            return Err(Error::OverlappingSupports(overlap.trailing_zeros() as usize));
        }
        let mut out = Self::zero(self.n, self.modulus)?;
        for (&m1, &c1) in &self.coeffs {
            for (&m2, &c2) in &other.coeffs {
                out.add_term(m1 | m2, mulm(c1, c2, self.modulus));
            }
        }
        Ok(out)
    }

    /// Evaluates at a point of canonical residues.
    pub fn eval(&self, point: &[u64]) -> Result<u64> {
        if point.len() != self.n {
            return Err(Error::PointLengthMismatch {
                expected: self.n,
                got: point.len(),
            });
        }
        let p = self.modulus;
        let mut acc = 0u64;
        for (&mask, &c) in &self.coeffs {
            let mut term = c;
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                term = mulm(term, point[i] % p, p);
                bits &= bits - 1;
            }
            acc = addm(acc, term, p);
        }
        Ok(acc)
    }

    /// Evaluates at a point of field elements sharing the polynomial's modulus.
    pub fn eval_elems(&self, point: &[FieldElem]) -> Result<FieldElem> {
        let raw: Vec<u64> = point
            .iter()
            .map(|e| {
                if e.modulus() != self.modulus {
                    Err(Error::ModulusMismatch {
                        left: self.modulus,
                        right: e.modulus(),
                    })
                } else {
                    Ok(e.value())
                }
            })
            .collect::<Result<_>>()?;
        Ok(FieldElem::new(self.eval(&raw)?, self.modulus)?)
    }

    /// Restricts variables outside `keep_mask` to zero.
    pub fn restrict_to(&self, keep_mask: u32) -> Self {
        let mut out = Self {
            n: self.n,
            modulus: self.modulus,
            coeffs: BTreeMap::new(),
        };
        for (&mask, &c) in &self.coeffs {
            if mask & !keep_mask == 0 {
                out.add_term(mask, c);
            }
        }
        out
    }
}

/// Wire form of [`MultilinearPoly`]:
/// `{"n": int, "p": int, "terms": [{"mask": int, "coeff": int}]}`
/// with masks strictly increasing.
#[derive(Debug, Serialize, Deserialize)]
pub struct PolyJson {
    pub n: usize,
    pub p: u64,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub mask: u32,
    pub coeff: u64,
}

impl MultilinearPoly {
    pub fn to_wire(&self) -> PolyJson {
        PolyJson {
            n: self.n,
            p: self.modulus,
            terms: self
                .terms()
                .map(|(mask, coeff)| TermJson { mask, coeff })
                .collect(),
        }
    }

    pub fn from_wire(wire: &PolyJson) -> Result<Self> {
        Self::from_terms(wire.n, wire.p, wire.terms.iter().map(|t| (t.mask, t.coeff)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_wire()).expect("poly serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: PolyJson = serde_json::from_str(s)?;
        Self::from_wire(&wire)
    }
}
