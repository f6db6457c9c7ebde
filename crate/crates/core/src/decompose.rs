//! Locally consistent decomposition of a string into grammar blocks.
//!
//! # Construction
//!
//! Every position `j` gets a key: a seeded t-wise independent hash of the
//! Karp-Rabin fingerprint of `x[j..j+KEY_WIDTH]`, maintained by a rolling
//! update. Keys of distinct windows collide with negligible probability, so
//! ties come only from repeated windows. Position `j > 1` starts a block iff its
//! key is strictly smaller than every key in `[j - lookbehind, j)` and in
//! `(j, j + lookahead]`, and all of those keys are complete. Position 1
//! always starts a block.
//!
//! The rule looks at most `lookahead + KEY_WIDTH - 1` symbols to the right,
//! so appending symbols only ever adds boundaries near the end: every block
//! except the last is fixed forever once its right boundary is decided.
//! Strict minimality also keeps any two boundaries more than `lookbehind`
//! apart, which bounds how many blocks an extension can add.
//!
//! Each block is turned into a grammar by [`reduce_level`] rounds (run
//! collapse, then local-minimum pairing keyed by a pairwise family per level)
//! followed by a left-deep chain over whatever remains. Grammars depend only
//! on the block's content and are returned in canonical form.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::grammar::{Grammar, Rhs, Symbol};
use crate::hash::{
    mersenne_add, mersenne_mul, mersenne_pow, FamilyKind, Fingerprint, HashFamily, SeedTree, MERSENNE_61,
};

/// Number of symbols hashed into a position key.
pub const KEY_WIDTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompError {
    #[error("invalid decomposition parameters: {0}")]
    BadParams(String),
}

/// Tunables for one decomposition instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompParams {
    /// Upper bound on the decomposed string length.
    pub n: u64,
    pub k: u32,
    /// Number of reduction levels, `ceil(log_{3/2} n) + 3`.
    pub levels: usize,
    /// Definiteness window in blocks.
    pub rwin: usize,
    /// Per-grammar rule cap.
    pub size_cap: usize,
    /// Target block length in input symbols.
    pub beta: usize,
    pub lookahead: usize,
    pub lookbehind: usize,
    /// Independence degree of the key family.
    pub independence: usize,
    pub seeds: SeedTree,
}

impl DecompParams {
    /// Defaults: `beta = max(64, k * ceil(log2 n))`, `size_cap = 8 * beta`,
    /// `independence = min(size_cap, 64)`, and the smallest window that
    /// covers every block an extension can still split.
    pub fn new(n: u64, k: u32, seeds: SeedTree) -> Self {
        let n = n.max(2);
        let log2n = 64 - (n - 1).leading_zeros() as usize;
        let beta = 64.max(k as usize * log2n);
        let levels = ((n as f64).ln() / 1.5f64.ln()).ceil() as usize + 3;
        let mut p = DecompParams {
            n,
            k,
            levels,
            rwin: 0,
            size_cap: 0,
            beta: 0,
            lookahead: 0,
            lookbehind: 0,
            independence: 0,
            seeds,
        };
        p.set_beta(beta);
        p
    }

    /// Sets `beta` and resets every parameter derived from it.
    pub fn with_beta(mut self, beta: usize) -> Self {
        self.set_beta(beta);
        self
    }

    pub fn with_rwin(mut self, rwin: usize) -> Self {
        self.rwin = rwin;
        self
    }

    pub fn with_size_cap(mut self, size_cap: usize) -> Self {
        self.size_cap = size_cap;
        self
    }

    pub fn with_independence(mut self, t: usize) -> Self {
        self.independence = t;
        self
    }

    fn set_beta(&mut self, beta: usize) {
        self.beta = beta;
        self.lookahead = beta.saturating_sub(1).max(1);
        self.lookbehind = (beta / 4).max(1);
        self.size_cap = 8 * beta;
        self.independence = self.size_cap.min(64);
        self.rwin = self.horizon().div_ceil(self.lookbehind + 1) + 1;
    }

    /// Symbols after a position that its boundary decision depends on.
    pub fn horizon(&self) -> usize {
        self.lookahead + KEY_WIDTH - 1
    }

    pub fn validate(&self) -> Result<(), DecompError> {
        let bad = |m: &str| Err(DecompError::BadParams(m.to_owned()));
        if self.beta < 2 {
            return bad("beta must be at least 2");
        }
        if self.size_cap < self.beta {
            return bad("size cap must be at least beta");
        }
        if self.rwin < 1 {
            return bad("window must hold at least one block");
        }
        if self.independence < 1 {
            return bad("independence degree must be positive");
        }
        if self.lookahead < 1 || self.lookbehind < 1 {
            return bad("lookahead and lookbehind must be positive");
        }
        Ok(())
    }
}

/// Output of a batch decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSeq {
    pub grammars: Vec<Grammar>,
    /// 1-based start position of each block.
    pub boundaries: Vec<u64>,
    pub total_len: u64,
    /// Index of the first block whose grammar exceeds the size cap.
    pub oversize: Option<usize>,
}

/// A node of the reduction forest: its symbol and the fingerprint of its
/// expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Node {
    pub sym: Symbol,
    pub fp: Fingerprint,
}

/// Hash-consed rules created while reducing one block.
#[derive(Debug, Default)]
pub struct NodeTable {
    rules: Vec<Rhs>,
    ids: HashMap<Rhs, u32>,
}

impl NodeTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, rhs: Rhs) -> Symbol {
        let next = self.rules.len() as u32;
        let id = *self.ids.entry(rhs).or_insert_with(|| {
            self.rules.push(rhs);
            next
        });
        Symbol::Nonterminal(id)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn into_grammar(self, start: Symbol) -> Grammar {
        let rules = self.rules.into_iter().enumerate().map(|(i, r)| (i as u32, r));
        Grammar::new(Some(start), rules)
            .expect("reduction produces acyclic rules")
            .canonicalize()
    }
}

/// One reduction round: collapse maximal runs into power nodes, then pair
/// left to right inside the segments that start at local minima of
/// `family(fingerprint)`.
pub fn reduce_level(seq: &[Node], family: &HashFamily, table: &mut NodeTable) -> Vec<Node> {
    let mut runs: Vec<Node> = Vec::with_capacity(seq.len());
    let mut i = 0;
    while i < seq.len() {
        let mut j = i + 1;
        while j < seq.len() && seq[j].sym == seq[i].sym {
            j += 1;
        }
        let r = j - i;
        if r >= 2 {
            runs.push(Node {
                sym: table.intern(Rhs::Power(seq[i].sym, r as u32)),
                fp: seq[i].fp.repeat(r as u64),
            });
        } else {
            runs.push(seq[i]);
        }
        i = j;
    }
    if runs.len() < 2 {
        return runs;
    }
    let vals: Vec<u64> = runs.iter().map(|n| family.eval(n.fp.value)).collect();
    let is_min = |i: usize| {
        let left = i.checked_sub(1).is_none_or(|l| vals[i] < vals[l]);
        let right = vals.get(i + 1).is_none_or(|&r| vals[i] < r);
        left && right
    };
    let mut out = Vec::with_capacity(runs.len() / 2 + 1);
    let mut i = 0;
    while i < runs.len() {
        if i + 1 < runs.len() && !is_min(i + 1) {
            let (a, b) = (runs[i], runs[i + 1]);
            out.push(Node {
                sym: table.intern(Rhs::Pair(a.sym, b.sym)),
                fp: a.fp.concat(b.fp),
            });
            i += 2;
        } else {
            out.push(runs[i]);
            i += 1;
        }
    }
    out
}

/// Splits `[1, len]` into blocks at the given sorted 1-based boundaries.
pub fn blocks_from_boundaries(boundaries: &[u64], len: u64) -> Vec<(u64, u64)> {
    boundaries
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let end = boundaries.get(i + 1).map_or(len, |&nb| nb - 1);
            (b, end)
        })
        .collect()
}

/// Seeded hash functions of one decomposition instance.
#[derive(Debug, Clone)]
pub struct Decomposer {
    params: DecompParams,
    key_family: HashFamily,
    key_base: u64,
    /// `key_base^KEY_WIDTH`
    key_drop: u64,
    level_families: Vec<HashFamily>,
    kr_base: u64,
}

impl Decomposer {
    pub fn new(params: DecompParams) -> Result<Self, DecompError> {
        params.validate()?;
        let seeds = &params.seeds;
        let hash_err = |e| DecompError::BadParams(format!("{e}"));
        let key_family = HashFamily::sample(
            seeds.child("key", 0).seed(),
            FamilyKind::TWise(params.independence),
            MERSENNE_61,
        )
        .map_err(hash_err)?;
        let key_base = seeds.child("key-base", 0).field_element();
        let key_drop = mersenne_pow(key_base, KEY_WIDTH as u64);
        let level_families = (1..=params.levels)
            .map(|i| HashFamily::sample(seeds.child("level", i as u64).seed(), FamilyKind::Pairwise, 1 << 32))
            .collect::<Result<_, _>>()
            .map_err(hash_err)?;
        let kr_base = seeds.child("kr", 0).field_element();
        Ok(Decomposer {
            params,
            key_family,
            key_base,
            key_drop,
            level_families,
            kr_base,
        })
    }

    pub fn params(&self) -> &DecompParams {
        &self.params
    }

    pub fn level_family(&self, level: usize) -> &HashFamily {
        &self.level_families[level]
    }

    /// Rolling fingerprint after appending `add` and dropping `drop`, the
    /// symbol `KEY_WIDTH` positions back (if any).
    #[inline]
    pub fn roll(&self, fp: u64, add: u32, drop: Option<u32>) -> u64 {
        let mut v = mersenne_add(mersenne_mul(fp, self.key_base), add as u64 + 1);
        if let Some(d) = drop {
            let sub = mersenne_mul(d as u64 + 1, self.key_drop);
            v = mersenne_add(v, MERSENNE_61 - sub);
        }
        v
    }

    #[inline]
    pub fn key_of(&self, fp: u64) -> u64 {
        self.key_family.eval(fp)
    }

    /// Key of every position whose window is complete (0-based).
    pub fn keys(&self, x: &[u32]) -> Vec<u64> {
        let mut out = Vec::with_capacity(x.len());
        let mut fp = 0;
        for (i, &s) in x.iter().enumerate() {
            let drop = i.checked_sub(KEY_WIDTH).map(|j| x[j]);
            fp = self.roll(fp, s, drop);
            if i + 1 >= KEY_WIDTH {
                out.push(self.key_of(fp));
            }
        }
        out
    }

    /// Block start positions (1-based), decided directly from the
    /// definition by scanning each neighborhood.
    pub fn mark_boundaries(&self, x: &[u32]) -> Vec<u64> {
        if x.is_empty() {
            return Vec::new();
        }
        let keys = self.keys(x);
        let (la, lb) = (self.params.lookahead, self.params.lookbehind);
        let mut out = vec![1];
        for j in 1..keys.len() {
            if j + la >= keys.len() {
                break;
            }
            let lo = j.saturating_sub(lb);
            let kj = keys[j];
            let left = keys[lo..j].iter().all(|&k| kj < k);
            let right = keys[j + 1..=j + la].iter().all(|&k| kj < k);
            if left && right {
                out.push(j as u64 + 1);
            }
        }
        out
    }

    /// Grammar for one block, built from its content alone.
    pub fn block_grammar(&self, block: &[u32]) -> Grammar {
        match block.len() {
            0 => return Grammar::empty(),
            1 => return Grammar::terminal(block[0]),
            _ => {}
        }
        let mut table = NodeTable::new();
        let mut seq: Vec<Node> = block
            .iter()
            .map(|&s| Node {
                sym: Symbol::Terminal(s),
                fp: Fingerprint::of_symbol(s, self.kr_base),
            })
            .collect();
        for family in &self.level_families {
            if seq.len() < 2 {
                break;
            }
            seq = reduce_level(&seq, family, &mut table);
        }
        let mut acc = seq[0].sym;
        for node in &seq[1..] {
            acc = table.intern(Rhs::Pair(acc, node.sym));
        }
        table.into_grammar(acc)
    }

    pub fn decompose_batch(&self, x: &[u32]) -> BlockSeq {
        let boundaries = self.mark_boundaries(x);
        let mut grammars = Vec::with_capacity(boundaries.len());
        let mut oversize = None;
        for (i, (b, e)) in blocks_from_boundaries(&boundaries, x.len() as u64)
            .into_iter()
            .enumerate()
        {
            let g = self.block_grammar(&x[b as usize - 1..e as usize]);
            if g.size() > self.params.size_cap && oversize.is_none() {
                oversize = Some(i);
            }
            grammars.push(g);
        }
        BlockSeq {
            grammars,
            boundaries,
            total_len: x.len() as u64,
            oversize,
        }
    }

    pub fn stream(&self) -> ActiveTail {
        ActiveTail::default()
    }
}

/// A block that left the active window and will never change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefiniteBlock {
    /// 1-based index of the block in the stream's decomposition.
    pub serial: u64,
    pub grammar: Grammar,
    pub symbols: Vec<u32>,
}

#[derive(Debug, Clone)]
struct TailBlock {
    serial: u64,
    /// 0-based start position in the stream.
    start: u64,
    /// Set once the next boundary is decided.
    grammar: Option<Grammar>,
}

/// Incremental decomposition state: the last `rwin` blocks (all closed
/// except the last) and the raw symbols they cover.
#[derive(Debug, Clone, Default)]
pub struct ActiveTail {
    len: u64,
    raw: Vec<u32>,
    raw_start: u64,
    rolling: u64,
    recent: VecDeque<u32>,
    /// Monotone deque of (position, key) over the decision neighborhood.
    window: VecDeque<(u64, u64)>,
    blocks: VecDeque<TailBlock>,
    next_serial: u64,
    oversize: bool,
}

impl ActiveTail {
    /// Appends one symbol. Returns the blocks pushed out of the active
    /// window, oldest first.
    pub fn push(&mut self, a: u32, dec: &Decomposer) -> Vec<DefiniteBlock> {
        let p = dec.params();
        if self.blocks.is_empty() {
            self.open_block(0);
        }
        self.len += 1;
        self.raw.push(a);
        let drop = if self.recent.len() == KEY_WIDTH {
            self.recent.pop_front()
        } else {
            None
        };
        self.recent.push_back(a);
        self.rolling = dec.roll(self.rolling, a, drop);
        if self.len as usize >= KEY_WIDTH {
            let kp = self.len - KEY_WIDTH as u64;
            let key = dec.key_of(self.rolling);
            while self.window.back().is_some_and(|&(_, k)| k > key) {
                self.window.pop_back();
            }
            self.window.push_back((kp, key));
            if kp > p.lookahead as u64 {
                let q = kp - p.lookahead as u64;
                let lo = q.saturating_sub(p.lookbehind as u64);
                while self.window.front().is_some_and(|&(pos, _)| pos < lo) {
                    self.window.pop_front();
                }
                let (fpos, fkey) = self.window[0];
                let unique = self.window.get(1).is_none_or(|&(_, k)| k > fkey);
                if fpos == q && unique {
                    self.close_open_block(q, dec);
                    self.open_block(q);
                }
            }
        }
        let mut out = Vec::new();
        while self.blocks.len() > p.rwin {
            let b = self.blocks.pop_front().expect("nonempty");
            let end = self.blocks.front().expect("open block remains").start;
            let lo = (b.start - self.raw_start) as usize;
            let hi = (end - self.raw_start) as usize;
            let symbols = self.raw[lo..hi].to_vec();
            self.raw.drain(..hi);
            self.raw_start = end;
            out.push(DefiniteBlock {
                serial: b.serial,
                grammar: b.grammar.expect("closed block has a grammar"),
                symbols,
            });
        }
        out
    }

    fn open_block(&mut self, start: u64) {
        self.next_serial += 1;
        self.blocks.push_back(TailBlock {
            serial: self.next_serial,
            start,
            grammar: None,
        });
    }

    fn close_open_block(&mut self, end: u64, dec: &Decomposer) {
        let raw_start = self.raw_start;
        let block = self.blocks.back_mut().expect("open block");
        let lo = (block.start - raw_start) as usize;
        let hi = (end - raw_start) as usize;
        let g = dec.block_grammar(&self.raw[lo..hi]);
        if g.size() > dec.params().size_cap {
            self.oversize = true;
        }
        block.grammar = Some(g);
    }

    /// Total symbols received.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of active blocks, including the open one.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn oversize(&self) -> bool {
        self.oversize
    }

    /// Serial number of the `i`-th active block (0-based).
    pub fn serial(&self, i: usize) -> u64 {
        self.blocks[i].serial
    }

    /// Raw symbols of the `i`-th active block.
    pub fn block_symbols(&self, i: usize) -> &[u32] {
        let lo = (self.blocks[i].start - self.raw_start) as usize;
        let hi = match self.blocks.get(i + 1) {
            Some(next) => (next.start - self.raw_start) as usize,
            None => self.raw.len(),
        };
        &self.raw[lo..hi]
    }

    /// Grammar of the `i`-th active block; the open block's grammar is built
    /// on demand and may still change.
    pub fn block_grammar(&self, i: usize, dec: &Decomposer) -> Grammar {
        match &self.blocks[i].grammar {
            Some(g) => g.clone(),
            None => dec.block_grammar(self.block_symbols(i)),
        }
    }

    /// Grammars of all active blocks. Flags oversize if the open block's
    /// grammar exceeds the cap.
    pub fn active_grammars(&mut self, dec: &Decomposer) -> Vec<Grammar> {
        let out: Vec<Grammar> = (0..self.blocks.len()).map(|i| self.block_grammar(i, dec)).collect();
        if out.iter().any(|g| g.size() > dec.params().size_cap) {
            self.oversize = true;
        }
        out
    }

    /// Approximate bytes held: raw symbols, closed-block grammars and the
    /// key window.
    pub fn footprint_bytes(&self) -> usize {
        let grammars: usize = self
            .blocks
            .iter()
            .filter_map(|b| b.grammar.as_ref())
            .map(|g| 16 * g.size() + 16)
            .sum();
        4 * self.raw.len() + 16 * self.window.len() + 4 * self.recent.len() + grammars + 24 * self.blocks.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::MERSENNE_61;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dec(seed: u64, beta: usize) -> Decomposer {
        Decomposer::new(DecompParams::new(1 << 16, 2, SeedTree::new(seed)).with_beta(beta)).unwrap()
    }

    fn random(len: usize, sigma: u32, seed: u64) -> Vec<u32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| b'a' as u32 + rng.gen_range(0..sigma)).collect()
    }

    fn concat(seq: &BlockSeq) -> Vec<u32> {
        seq.grammars.iter().flat_map(|g| g.to_symbols().unwrap()).collect()
    }

    #[test]
    fn default_params() {
        let p = DecompParams::new(10_000, 2, SeedTree::new(1));
        assert_eq!(p.levels, 23 + 3);
        assert_eq!(p.beta, 64);
        assert_eq!(p.size_cap, 512);
        assert_eq!(p.independence, 64);
        assert!(p.validate().is_ok());
        let p = DecompParams::new(1 << 20, 10, SeedTree::new(1));
        assert_eq!(p.beta, 200);
        assert!(p.clone().with_beta(1).validate().is_err());
        assert!(p.with_rwin(0).validate().is_err());
    }

    #[test]
    fn empty_input() {
        let seq = dec(1, 64).decompose_batch(&[]);
        assert!(seq.grammars.is_empty());
        assert_eq!(seq.total_len, 0);
    }

    #[test]
    fn pure_run_is_one_power_node() {
        let f = HashFamily::sample(3, FamilyKind::Pairwise, 1 << 32).unwrap();
        let mut table = NodeTable::new();
        let seq: Vec<Node> = (0..4)
            .map(|_| Node {
                sym: Symbol::Terminal(b'a' as u32),
                fp: Fingerprint::of_symbol(b'a' as u32, 31),
            })
            .collect();
        let out = reduce_level(&seq, &f, &mut table);
        assert_eq!(out.len(), 1);
        assert_eq!(table.rules, vec![Rhs::Power(Symbol::Terminal(b'a' as u32), 4)]);
    }

    #[test]
    fn pairs_from_a_local_minimum() {
        // identity hash: h(a) = fp(a) = 'a' + 1 < h(b)
        let f = HashFamily::from_parts(FamilyKind::Pairwise, vec![1, 0], MERSENNE_61, 1 << 32).unwrap();
        let mut table = NodeTable::new();
        let seq: Vec<Node> = b"ab"
            .iter()
            .map(|&c| Node {
                sym: Symbol::Terminal(c as u32),
                fp: Fingerprint::of_symbol(c as u32, 31),
            })
            .collect();
        let out = reduce_level(&seq, &f, &mut table);
        assert_eq!(out.len(), 1);
        assert_eq!(
            table.rules,
            vec![Rhs::Pair(Symbol::Terminal(b'a' as u32), Symbol::Terminal(b'b' as u32))]
        );
    }

    #[test]
    fn alternating_string_shrinks() {
        let x: Vec<u32> = (0..1024).map(|i| if i % 2 == 0 { 1 } else { 2 }).collect();
        let mut ok = 0;
        for seed in 0..100 {
            let d = dec(seed, 64);
            let mut table = NodeTable::new();
            let mut seq: Vec<Node> = x
                .iter()
                .map(|&s| Node {
                    sym: Symbol::Terminal(s),
                    fp: Fingerprint::of_symbol(s, 1_000_003),
                })
                .collect();
            for l in 0..d.params().levels {
                seq = reduce_level(&seq, d.level_family(l), &mut table);
            }
            if seq.len() <= 8 {
                ok += 1;
            }
        }
        assert!(ok >= 95, "{ok}/100");
    }

    #[test]
    fn interval_arithmetic() {
        assert_eq!(
            blocks_from_boundaries(&[1, 40, 97], 120),
            vec![(1, 39), (40, 96), (97, 120)]
        );
    }

    #[test]
    fn short_input_is_one_block() {
        let x = random(50, 4, 9);
        let seq = dec(2, 64).decompose_batch(&x);
        assert_eq!(seq.boundaries, vec![1]);
        assert_eq!(concat(&seq), x);
    }

    #[test]
    fn long_run_stays_small() {
        let x = vec![b'a' as u32; 10_000];
        let d = dec(4, 64);
        let seq = d.decompose_batch(&x);
        assert_eq!(seq.oversize, None);
        assert!(seq.grammars.iter().all(|g| g.size() <= d.params().size_cap));
        assert_eq!(concat(&seq), x);
    }

    #[test]
    fn random_strings_reassemble() {
        for seed in 0..100 {
            let x = random(5000, 26, seed);
            let seq = dec(seed, 64).decompose_batch(&x);
            assert_eq!(concat(&seq), x, "seed {seed}");
        }
    }

    #[test]
    fn boundaries_are_spaced() {
        let d = dec(5, 64);
        let x = random(20_000, 4, 5);
        let b = d.mark_boundaries(&x);
        assert!(b.windows(2).all(|w| w[1] - w[0] > d.params().lookbehind as u64));
        assert!(b.len() > 100);
    }

    #[test]
    fn shared_region_shares_boundaries() {
        let d = dec(6, 64);
        let shared = random(2000, 4, 60);
        let mut x = random(300, 4, 61);
        x.extend(&shared);
        x.extend(random(300, 4, 62));
        let mut y = random(500, 4, 63);
        y.extend(&shared);
        y.extend(random(100, 4, 64));
        let margin = 2 * d.params().beta as u64;
        let inner = |b: &[u64], off: u64| -> Vec<u64> {
            b.iter()
                .filter(|&&p| p >= off + margin && p < off + 2000 - margin)
                .map(|&p| p - off)
                .collect()
        };
        let bx = inner(&d.mark_boundaries(&x), 301);
        let by = inner(&d.mark_boundaries(&y), 501);
        assert!(!bx.is_empty());
        assert_eq!(bx, by);
    }

    #[test]
    fn incremental_matches_batch() {
        let word: Vec<u32> = "abracadabra".bytes().map(u32::from).collect();
        let d = dec(7, 4);
        let mut tail = d.stream();
        let mut all: Vec<Grammar> = Vec::new();
        for &c in word.iter().chain([b'x' as u32].iter()) {
            all.extend(tail.push(c, &d).into_iter().map(|b| b.grammar));
        }
        all.extend(tail.active_grammars(&d));
        let mut expect = word.clone();
        expect.push(b'x' as u32);
        assert_eq!(all, d.decompose_batch(&expect).grammars);
    }

    #[test]
    fn first_symbol_opens_one_block() {
        let d = dec(8, 64);
        let mut tail = d.stream();
        assert!(tail.push(3, &d).is_empty());
        assert_eq!(tail.block_count(), 1);
        assert_eq!(tail.block_symbols(0), &[3]);
    }

    #[test]
    fn long_stream_matches_batch() {
        for seed in 0..50 {
            let d = dec(seed, 32);
            let x = random(10_000, 4, 100 + seed);
            let mut tail = d.stream();
            let mut all = Vec::new();
            for &c in &x {
                let out = tail.push(c, &d);
                assert!(out.len() <= 1);
                assert!(tail.block_count() <= d.params().rwin);
                for b in &out {
                    assert_eq!(b.grammar.to_symbols().unwrap(), b.symbols);
                }
                all.extend(out.into_iter().map(|b| b.grammar));
            }
            all.extend(tail.active_grammars(&d));
            assert_eq!(all, d.decompose_batch(&x).grammars, "seed {seed}");
        }
    }
}
