//! Exact arithmetic in a prime field `Z_p`.
//!
//! Elements carry their modulus so mixed-modulus operations are caught at
//! runtime instead of silently producing garbage. The default modulus is
//! the Mersenne prime `2^31 - 1`, large enough that random substitution
//! arguments are reliable at the instance sizes this crate targets.

use crate::{Error, Result};

/// Default modulus: the Mersenne prime `2^31 - 1`.
pub const DEFAULT_PRIME: u64 = (1 << 31) - 1;

/// Moduli below this bound are verified prime by trial division;
/// larger ones are trusted.
const TRIAL_DIVISION_BOUND: u64 = 1 << 20;

/// Checks that `p` is usable as a field modulus.
pub fn validate_modulus(p: u64) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidModulus(p));
    }
    if p < TRIAL_DIVISION_BOUND {
        let mut d = 2u64;
        while d * d <= p {
            if p % d == 0 {
                return Err(Error::InvalidModulus(p));
            }
            d += 1;
        }
    }
    Ok(())
}

/// `(a + b) mod p` on canonical residues.
#[inline]
pub fn addm(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

/// `(a - b) mod p` on canonical residues.
#[inline]
pub fn subm(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

/// `(a * b) mod p` on canonical residues.
#[inline]
pub fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// `a^e mod p` by square-and-multiply.
pub fn powm(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulm(acc, a, p);
        }
        a = mulm(a, a, p);
        e >>= 1;
    }
    acc
}

/// Multiplicative inverse via Fermat: `a^(p-2) mod p`.
pub fn invm(a: u64, p: u64) -> Result<u64> {
    if a % p == 0 {
        return Err(Error::DivisionByZero);
    }
    Ok(powm(a, p - 2, p))
}

/// `-a mod p`.
#[inline]
pub fn negm(a: u64, p: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

/// An element of `Z_p`, stored as the canonical residue `0 <= value < p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    modulus: u64,
}

impl FieldElem {
    /// Builds an element from an arbitrary unsigned value, reducing mod `p`.
    pub fn new(value: u64, modulus: u64) -> Result<Self> {
        validate_modulus(modulus)?;
        Ok(Self {
            value: value % modulus,
            modulus,
        })
    }

    /// Builds an element from a signed value, reducing into `[0, p)`.
    pub fn from_signed(value: i64, modulus: u64) -> Result<Self> {
        validate_modulus(modulus)?;
        let m = modulus as i64;
        Ok(Self {
            value: value.rem_euclid(m) as u64,
            modulus,
        })
    }

    pub fn zero(modulus: u64) -> Self {
        Self { value: 0, modulus }
    }

    pub fn one(modulus: u64) -> Self {
        Self {
            value: 1 % modulus,
            modulus,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            value: addm(self.value, other.value, self.modulus),
            modulus: self.modulus,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            value: subm(self.value, other.value, self.modulus),
            modulus: self.modulus,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            value: mulm(self.value, other.value, self.modulus),
            modulus: self.modulus,
        })
    }

    /// `self / other`, computed as `self * other^(p-2)`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let inv = invm(other.value, self.modulus)?;
        Ok(Self {
            value: mulm(self.value, inv, self.modulus),
            modulus: self.modulus,
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            value: negm(self.value, self.modulus),
            modulus: self.modulus,
        }
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(Self {
            value: invm(self.value, self.modulus)?,
            modulus: self.modulus,
        })
    }

    pub fn pow(&self, e: u64) -> Self {
        Self {
            value: powm(self.value, e, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl std::fmt::Display for FieldElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}
