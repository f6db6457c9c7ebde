//! Seeded hash families over the Mersenne field `2^61 - 1`, Karp-Rabin
//! fingerprints, and reproducible seed derivation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// The field modulus used for every hash and fingerprint.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HashError {
    #[error("hash range must be at least 2, got {0}")]
    BadRange(u64),
    #[error("range {range} exceeds the field size {p}")]
    RangeAboveField { range: u64, p: u64 },
    #[error("{kind:?} family needs {expected} coefficients, got {got}")]
    BadShape {
        kind: FamilyKind,
        expected: usize,
        got: usize,
    },
    #[error("pairwise family needs a nonzero leading coefficient")]
    ZeroSlope,
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Multiplication in the Mersenne field without a division.
#[inline]
pub fn mersenne_mul(a: u64, b: u64) -> u64 {
    let prod = a as u128 * b as u128;
    let lo = (prod as u64) & MERSENNE_61;
    let hi = (prod >> 61) as u64;
    let s = lo + hi;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

#[inline]
pub fn mersenne_add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

#[inline]
pub fn mersenne_reduce(x: u64) -> u64 {
    let s = (x & MERSENNE_61) + (x >> 61);
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

pub fn mersenne_pow(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    base = mersenne_reduce(base);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mersenne_mul(acc, base);
        }
        base = mersenne_mul(base, base);
        exp >>= 1;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Pairwise,
    TWise(usize),
}

/// A function drawn from a pairwise or t-wise independent polynomial family,
/// mapping field elements to `[0, range)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashFamily {
    kind: FamilyKind,
    coeffs: Vec<u64>,
    p: u64,
    range: u64,
}

impl HashFamily {
    /// Draws coefficients uniformly from the field with a ChaCha stream keyed
    /// by `seed`.
    pub fn sample(seed: u64, kind: FamilyKind, range: u64) -> Result<Self, HashError> {
        check_range(range, MERSENNE_61)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let coeffs = match kind {
            FamilyKind::Pairwise => {
                let a = rng.gen_range(1..MERSENNE_61);
                let b = rng.gen_range(0..MERSENNE_61);
                vec![a, b]
            }
            FamilyKind::TWise(t) => {
                if t == 0 {
                    return Err(HashError::BadShape {
                        kind,
                        expected: 1,
                        got: 0,
                    });
                }
                (0..t).map(|_| rng.gen_range(0..MERSENNE_61)).collect()
            }
        };
        Ok(HashFamily {
            kind,
            coeffs,
            p: MERSENNE_61,
            range,
        })
    }

    /// Builds a family from explicit coefficients (highest degree first for
    /// t-wise families, `[a, b]` for pairwise).
    pub fn from_parts(kind: FamilyKind, coeffs: Vec<u64>, p: u64, range: u64) -> Result<Self, HashError> {
        check_range(range, p)?;
        let expected = match kind {
            FamilyKind::Pairwise => 2,
            FamilyKind::TWise(t) => t,
        };
        if coeffs.len() != expected {
            return Err(HashError::BadShape {
                kind,
                expected,
                got: coeffs.len(),
            });
        }
        if kind == FamilyKind::Pairwise && coeffs[0].is_multiple_of(p) {
            return Err(HashError::ZeroSlope);
        }
        let coeffs = coeffs.into_iter().map(|c| c % p).collect();
        Ok(HashFamily { kind, coeffs, p, range })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p;
        let x = x % p;
        let field = if p == MERSENNE_61 {
            self.coeffs
                .iter()
                .fold(0, |acc, &c| mersenne_add(mersenne_mul(acc, x), c))
        } else {
            self.coeffs.iter().fold(0, |acc, &c| (mul_mod(acc, x, p) + c) % p)
        };
        field % self.range
    }
}

fn check_range(range: u64, p: u64) -> Result<(), HashError> {
    if range < 2 {
        return Err(HashError::BadRange(range));
    }
    if range > p {
        return Err(HashError::RangeAboveField { range, p });
    }
    Ok(())
}

/// A master seed plus a derivation path. Every random choice in a run is
/// keyed by some node of this tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedTree {
    master: u64,
    path: Vec<(String, u64)>,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        SeedTree {
            master,
            path: Vec::new(),
        }
    }

    pub fn child(&self, label: &str, index: u64) -> SeedTree {
        let mut path = self.path.clone();
        path.push((label.to_owned(), index));
        SeedTree {
            master: self.master,
            path,
        }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// 64-bit seed for this node.
    pub fn seed(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(self.master.to_le_bytes());
        for (label, index) in &self.path {
            h.update((label.len() as u64).to_le_bytes());
            h.update(label.as_bytes());
            h.update(index.to_le_bytes());
        }
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("sha256 is 32 bytes"))
    }

    /// Uniform field element derived from this node.
    pub fn field_element(&self) -> u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed());
        rng.gen_range(2..MERSENNE_61)
    }
}

/// Karp-Rabin fingerprint of a sequence: value and `base^len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub value: u64,
    pub shift: u64,
}

impl Fingerprint {
    pub const EMPTY: Fingerprint = Fingerprint { value: 0, shift: 1 };

    pub fn of_symbol(sym: u32, base: u64) -> Self {
        Fingerprint {
            value: sym as u64 + 1,
            shift: base,
        }
    }

    /// Fingerprint of the concatenation `self . other`.
    pub fn concat(self, other: Fingerprint) -> Self {
        Fingerprint {
            value: mersenne_add(mersenne_mul(self.value, other.shift), other.value),
            shift: mersenne_mul(self.shift, other.shift),
        }
    }

    /// Fingerprint of `self` repeated `r` times, by doubling.
    pub fn repeat(self, mut r: u64) -> Self {
        let mut acc = Fingerprint::EMPTY;
        let mut sq = self;
        while r > 0 {
            if r & 1 == 1 {
                acc = acc.concat(sq);
            }
            sq = sq.concat(sq);
            r >>= 1;
        }
        acc
    }

    pub fn of_slice(symbols: &[u32], base: u64) -> Self {
        symbols.iter().fold(Fingerprint::EMPTY, |acc, &s| {
            acc.concat(Fingerprint::of_symbol(s, base))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_sampling() {
        let a = HashFamily::sample(42, FamilyKind::Pairwise, 16).unwrap();
        let b = HashFamily::sample(42, FamilyKind::Pairwise, 16).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.coeffs().len(), 2);
        assert_ne!(a.coeffs()[0], 0);
        let t = HashFamily::sample(42, FamilyKind::TWise(5), 16).unwrap();
        assert_eq!(t.coeffs().len(), 5);
    }

    #[test]
    fn bad_range() {
        assert_eq!(
            HashFamily::sample(1, FamilyKind::Pairwise, 1),
            Err(HashError::BadRange(1))
        );
    }

    #[test]
    fn explicit_parameters() {
        let id = HashFamily::from_parts(FamilyKind::Pairwise, vec![1, 0], 13, 13).unwrap();
        assert_eq!(id.eval(7), 7);
        // (3*2 + 5) mod 13 = 11, 11 mod 4 = 3
        let f = HashFamily::from_parts(FamilyKind::Pairwise, vec![3, 5], 13, 4).unwrap();
        assert_eq!(f.eval(2), 3);
        let zero = HashFamily::from_parts(FamilyKind::TWise(4), vec![0; 4], MERSENNE_61, 97).unwrap();
        assert!((0..1000).all(|x| zero.eval(x) == 0));
    }

    #[test]
    fn pairwise_buckets_are_uniform() {
        let f = HashFamily::sample(7, FamilyKind::Pairwise, 16).unwrap();
        let trials = 100_000u64;
        let mut counts = [0u64; 16];
        for x in 0..trials {
            counts[f.eval(x * 0x9E37_79B9 + 11) as usize] += 1;
        }
        let mean = trials as f64 / 16.0;
        let sd = (trials as f64 * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() < 5.0 * sd, "bucket {c} vs mean {mean}");
        }
    }

    #[test]
    fn mersenne_arithmetic_matches_generic() {
        let vals = [0, 1, 2, MERSENNE_61 - 1, 1 << 40, 123_456_789_012_345];
        for &a in &vals {
            for &b in &vals {
                assert_eq!(mersenne_mul(a, b), mul_mod(a, b, MERSENNE_61));
            }
        }
        assert_eq!(mersenne_pow(3, 5), 243);
    }

    #[test]
    fn seed_paths() {
        let root = SeedTree::new(5);
        assert_eq!(root.child("copy", 1).seed(), SeedTree::new(5).child("copy", 1).seed());
        assert_ne!(root.child("copy", 1).seed(), root.child("copy", 2).seed());
        assert_ne!(root.child("copy", 1).seed(), root.child("copz", 1).seed());
        assert_ne!(root.seed(), SeedTree::new(6).seed());
    }

    #[test]
    fn fingerprint_algebra() {
        let base = 1_000_003;
        let a = Fingerprint::of_slice(&[1, 2, 3], base);
        let b = Fingerprint::of_slice(&[4, 5], base);
        assert_eq!(a.concat(b), Fingerprint::of_slice(&[1, 2, 3, 4, 5], base));
        assert_eq!(a.repeat(3), Fingerprint::of_slice(&[1, 2, 3, 1, 2, 3, 1, 2, 3], base));
        assert_eq!(a.repeat(0), Fingerprint::EMPTY);
    }
}
