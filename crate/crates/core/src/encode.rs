//! Fixed-width encoding of block grammars.
//!
//! A grammar becomes `M` coordinates. Each coordinate carries one word of
//! the canonical serialization next to a tag that depends on the whole
//! serialization, so two distinct grammars disagree in every coordinate
//! with high probability while equal grammars always agree.

use crate::grammar::{Grammar, GrammarError, Rhs, Symbol};
use crate::hash::{mersenne_add, mersenne_mul, SeedTree};
use thiserror::Error;

/// Word value used for unused trailing slots.
pub const PAD: u64 = u64::MAX;

const KIND_PAIR: u64 = 0;
const KIND_POWER: u64 = 1;
const KIND_START: u64 = 2;
const LHS_BITS: u32 = 18;
const FIELD_BITS: u32 = 22;
const VALUE_BITS: u32 = FIELD_BITS - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("grammar needs {needed} words but the width is {width}")]
    TooBig { needed: usize, width: usize },
    #[error("malformed encoding: {0}")]
    Malformed(String),
    #[error("tag mismatch at coordinate {0}")]
    TagMismatch(usize),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

/// Parameters shared by every encoding in one matcher copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncParams {
    width: usize,
    alpha_bits: u32,
    point: u64,
    coord_keys: Vec<(u64, u64)>,
}

impl EncParams {
    /// Width `m`, failure bound `1/n` per pair of distinct grammars.
    pub fn new(m: usize, n: u64, seeds: &SeedTree) -> Self {
        let m = m.max(1);
        let need = (2 * m as u128 * n.max(1) as u128).max(2);
        let alpha_bits = (128 - (need - 1).leading_zeros()).min(61);
        let point = seeds.child("point", 0).field_element();
        let coord_keys = (0..m as u64)
            .map(|i| {
                (
                    seeds.child("slope", i).field_element(),
                    seeds.child("offset", i).field_element(),
                )
            })
            .collect();
        EncParams {
            width: m,
            alpha_bits,
            point,
            coord_keys,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn alpha_bits(&self) -> u32 {
        self.alpha_bits
    }

    fn fingerprint(&self, words: &[u64]) -> u64 {
        words.iter().fold(0, |acc, &w| {
            let acc = mersenne_add(mersenne_mul(acc, self.point), w >> 32);
            mersenne_add(mersenne_mul(acc, self.point), w & 0xFFFF_FFFF)
        })
    }

    fn tag(&self, i: usize, fp: u64) -> u64 {
        let (a, b) = self.coord_keys[i];
        let v = mersenne_add(mersenne_mul(a, fp), b);
        if self.alpha_bits >= 61 {
            v
        } else {
            v & ((1 << self.alpha_bits) - 1)
        }
    }
}

fn pack_symbol(s: Symbol) -> Result<u64, EncodeError> {
    let (flag, v) = match s {
        Symbol::Terminal(t) => (0, t),
        Symbol::Nonterminal(n) => (1, n),
    };
    if v as u64 >= 1 << VALUE_BITS {
        return Err(EncodeError::Malformed(format!("symbol value {v} too wide")));
    }
    Ok(flag << VALUE_BITS | v as u64)
}

fn unpack_symbol(f: u64) -> Symbol {
    let v = (f & ((1 << VALUE_BITS) - 1)) as u32;
    if f >> VALUE_BITS == 1 {
        Symbol::Nonterminal(v)
    } else {
        Symbol::Terminal(v)
    }
}

fn record(kind: u64, lhs: u64, a: u64, b: u64) -> u64 {
    kind << 62 | lhs << (2 * FIELD_BITS) | a << FIELD_BITS | b
}

/// Canonical serialization padded to `width` words.
pub fn serialize(g: &Grammar, width: usize) -> Result<Vec<u64>, EncodeError> {
    let mut out = Vec::with_capacity(width);
    if g.start().is_some() {
        let needed = g.size() + 1;
        if needed > width {
            return Err(EncodeError::TooBig { needed, width });
        }
        let canon;
        let g = if g.is_canonical() {
            g
        } else {
            canon = g.canonicalize();
            &canon
        };
        let start = g.start().expect("nonempty grammar has a start");
        out.push(record(KIND_START, 0, pack_symbol(start)?, 0));
        for (lhs, rhs) in g.rules() {
            if lhs as u64 >= 1 << LHS_BITS {
                return Err(EncodeError::Malformed(format!("rule id {lhs} too wide")));
            }
            let word = match rhs {
                Rhs::Pair(a, b) => record(KIND_PAIR, lhs as u64, pack_symbol(a)?, pack_symbol(b)?),
                Rhs::Power(a, e) => {
                    if e as u64 >= 1 << FIELD_BITS {
                        return Err(EncodeError::Malformed(format!("exponent {e} too wide")));
                    }
                    record(KIND_POWER, lhs as u64, pack_symbol(a)?, e as u64)
                }
            };
            out.push(word);
        }
    }
    out.resize(width, PAD);
    Ok(out)
}

/// Inverse of [`serialize`].
pub fn deserialize(words: &[u64]) -> Result<Grammar, EncodeError> {
    let used = words.iter().position(|&w| w == PAD).unwrap_or(words.len());
    if words[used..].iter().any(|&w| w != PAD) {
        return Err(EncodeError::Malformed("word after padding".into()));
    }
    let words = &words[..used];
    let Some((&head, body)) = words.split_first() else {
        return Ok(Grammar::empty());
    };
    let field = |w: u64, shift: u32| (w >> shift) & ((1 << FIELD_BITS) - 1);
    if head >> 62 != KIND_START {
        return Err(EncodeError::Malformed("missing start record".into()));
    }
    let start = unpack_symbol(field(head, FIELD_BITS));
    let mut rules = Vec::with_capacity(body.len());
    for &w in body {
        let lhs = ((w >> (2 * FIELD_BITS)) & ((1 << LHS_BITS) - 1)) as u32;
        let a = unpack_symbol(field(w, FIELD_BITS));
        let rhs = match w >> 62 {
            KIND_PAIR => Rhs::Pair(a, unpack_symbol(field(w, 0))),
            KIND_POWER => Rhs::Power(a, field(w, 0) as u32),
            kind => return Err(EncodeError::Malformed(format!("record kind {kind}"))),
        };
        rules.push((lhs, rhs));
    }
    let g = Grammar::new(Some(start), rules)?;
    if g.size() != body.len() || !g.is_canonical() {
        return Err(EncodeError::Malformed("rules are not in canonical form".into()));
    }
    Ok(g)
}

/// Encodes `g` into `ep.width()` nonzero coordinates.
pub fn encode(g: &Grammar, ep: &EncParams) -> Result<Vec<u128>, EncodeError> {
    let words = serialize(g, ep.width)?;
    let fp = ep.fingerprint(&words);
    Ok(words
        .iter()
        .enumerate()
        .map(|(i, &w)| ((w as u128) << 64 | ep.tag(i, fp) as u128) + 1)
        .collect())
}

/// Recovers the grammar behind an encoding, checking every tag.
pub fn decode(e: &[u128], ep: &EncParams) -> Result<Grammar, EncodeError> {
    if e.len() != ep.width {
        return Err(EncodeError::Malformed(format!(
            "expected {} coordinates, got {}",
            ep.width,
            e.len()
        )));
    }
    let mut words = Vec::with_capacity(e.len());
    let mut tags = Vec::with_capacity(e.len());
    for &c in e {
        let Some(c) = c.checked_sub(1) else {
            return Err(EncodeError::Malformed("zero coordinate".into()));
        };
        words.push((c >> 64) as u64);
        tags.push(c as u64);
    }
    let fp = ep.fingerprint(&words);
    if let Some(i) = (0..e.len()).find(|&i| tags[i] != ep.tag(i, fp)) {
        return Err(EncodeError::TagMismatch(i));
    }
    deserialize(&words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Symbol::{Nonterminal as N, Terminal as T};

    fn sample() -> Grammar {
        // # -> A B, A -> a^2, B -> b^3
        Grammar::new(
            Some(N(0)),
            [
                (0, Rhs::Pair(N(1), N(2))),
                (1, Rhs::Power(T(b'a' as u32), 2)),
                (2, Rhs::Power(T(b'b' as u32), 3)),
            ],
        )
        .unwrap()
    }

    fn params(m: usize) -> EncParams {
        EncParams::new(m, 1 << 20, &SeedTree::new(9))
    }

    #[test]
    fn round_trip() {
        let ep = params(16);
        let g = sample();
        let e = encode(&g, &ep).unwrap();
        assert_eq!(e.len(), 16);
        assert!(e.iter().all(|&c| c != 0));
        let back = decode(&e, &ep).unwrap();
        assert_eq!(back.to_symbols().unwrap(), g.to_symbols().unwrap());
        assert_eq!(back, g.canonicalize());
        for g in [Grammar::empty(), Grammar::terminal(7)] {
            assert_eq!(decode(&encode(&g, &ep).unwrap(), &ep).unwrap(), g);
        }
    }

    #[test]
    fn tampering_is_detected() {
        let ep = params(16);
        let mut e = encode(&sample(), &ep).unwrap();
        e[1] ^= 1 << 70;
        assert!(matches!(decode(&e, &ep), Err(EncodeError::TagMismatch(_))));
        let mut e = encode(&sample(), &ep).unwrap();
        e[5] += 1;
        assert_eq!(decode(&e, &ep), Err(EncodeError::TagMismatch(5)));
    }

    #[test]
    fn all_pad_is_empty() {
        assert_eq!(deserialize(&[PAD; 8]).unwrap(), Grammar::empty());
        assert!(deserialize(&[PAD, 3, PAD]).is_err());
    }

    #[test]
    fn too_big() {
        let ep = params(3);
        assert_eq!(encode(&sample(), &ep), Err(EncodeError::TooBig { needed: 4, width: 3 }));
    }

    #[test]
    fn distinct_grammars_differ_everywhere() {
        let ep = params(32);
        let a = encode(&sample(), &ep).unwrap();
        let b = encode(&Grammar::terminal(b'a' as u32), &ep).unwrap();
        let c = encode(&Grammar::empty(), &ep).unwrap();
        for (x, y) in [(&a, &b), (&a, &c), (&b, &c)] {
            assert!(x.iter().zip(y).all(|(p, q)| p != q));
        }
        assert_eq!(a, encode(&sample(), &ep).unwrap());
    }

    #[test]
    fn tag_range() {
        assert_eq!(EncParams::new(4, 1, &SeedTree::new(1)).alpha_bits(), 3);
        assert_eq!(EncParams::new(1024, 1 << 40, &SeedTree::new(1)).alpha_bits(), 51);
        assert_eq!(EncParams::new(1024, u64::MAX, &SeedTree::new(1)).alpha_bits(), 61);
    }
}
