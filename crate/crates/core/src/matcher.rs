//! The streaming matcher: one copy per independent seed, and the ensemble
//! that reports the smallest estimate across copies.
//!
//! A copy decomposes the pattern into blocks `P_1..P_r`, sends the
//! encodings of `P_1..P_{r-R}` to the mismatch engine and keeps the last `R`
//! blocks. Text blocks are committed to the engine as they become definite.
//! After each commit the engine window is compared with the pattern; the
//! differing block pairs are decoded from the mismatch records and scored,
//! giving `m_s`, an upper bound on the distance from `P_1..P_{r-R}` to a
//! suffix of the committed text. A query adds the distances between the last
//! `R` pattern blocks and the active text blocks.

use std::collections::VecDeque;

use rayon::prelude::*;
use thiserror::Error;

use crate::decompose::{ActiveTail, DecompError, DecompParams, Decomposer, DefiniteBlock};
use crate::edit::{ed_bounded, ed_suffix_min, EdResult, FallbackMatcher, GrowingEd, SuffixEdResult};
use crate::encode::{decode, encode, EncParams};
use crate::hash::SeedTree;
use crate::mismatch::{MismatchEngine, MismatchRecord, ReferenceEngine, WindowQueryResult};

/// Per-position answer: the distance if at most `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditReport {
    Within(u32),
    OverK,
}

impl EditReport {
    pub fn value(self) -> Option<u32> {
        match self {
            EditReport::Within(d) => Some(d),
            EditReport::OverK => None,
        }
    }

    fn min(self, other: EditReport) -> EditReport {
        match (self.value(), other.value()) {
            (Some(a), Some(b)) => EditReport::Within(a.min(b)),
            (Some(_), None) => self,
            _ => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatcherError {
    #[error("{0} is not allowed in the current phase")]
    Phase(&'static str),
    #[error("stream exceeds the length bound {bound} at symbol {pos}")]
    StreamTooLong { pos: u64, bound: u64 },
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("every copy is poisoned")]
    AllPoisoned,
}

impl From<DecompError> for MatcherError {
    fn from(e: DecompError) -> Self {
        MatcherError::Config(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatcherConfig {
    /// Bound `N` on pattern plus text length.
    pub n_bound: u64,
    pub k: u32,
    pub seed: u64,
    /// Defaults to `2 * ceil(log2 N)`.
    pub copies: Option<usize>,
    pub beta: Option<usize>,
    pub rwin: Option<usize>,
    pub scap: Option<usize>,
    pub independence: Option<usize>,
    /// Hash ranges are sized for failure probability `N^-e`.
    pub failure_exponent: u32,
    pub parallel: bool,
}

impl MatcherConfig {
    pub fn new(n_bound: u64, k: u32) -> Self {
        MatcherConfig {
            n_bound,
            k,
            seed: 0,
            copies: None,
            beta: None,
            rwin: None,
            scap: None,
            independence: None,
            failure_exponent: 2,
            parallel: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_copies(mut self, copies: usize) -> Self {
        self.copies = Some(copies);
        self
    }

    pub fn copy_count(&self) -> usize {
        self.copies
            .unwrap_or_else(|| 2 * (64 - self.n_bound.max(2).saturating_sub(1).leading_zeros() as usize))
    }

    /// `N^e`, saturating.
    pub fn failure_n(&self) -> u64 {
        self.n_bound.max(2).saturating_pow(self.failure_exponent.max(1))
    }

    pub fn decomp_params(&self, seeds: SeedTree) -> DecompParams {
        let mut p = DecompParams::new(self.failure_n(), self.k, seeds);
        if let Some(b) = self.beta {
            p = p.with_beta(b);
        }
        if let Some(r) = self.rwin {
            p = p.with_rwin(r);
        }
        if let Some(s) = self.scap {
            p = p.with_size_cap(s);
        }
        if let Some(t) = self.independence {
            p = p.with_independence(t);
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Pattern,
    Text,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PoisonReason {
    Oversize,
    Encoding(String),
    Engine(String),
    Decoding(String),
    PartialRun { block: u64, len: usize },
}

/// Bytes of live state in one copy, by component.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StateSize {
    pub tail: usize,
    pub rings: usize,
    pub pattern: usize,
    pub fallback: usize,
    pub engine: usize,
}

impl StateSize {
    pub fn without_engine(&self) -> usize {
        self.tail + self.rings + self.pattern + self.fallback
    }

    pub fn total(&self) -> usize {
        self.without_engine() + self.engine
    }
}

/// One independently seeded instance of the algorithm.
pub struct MatcherCopy {
    k: u32,
    rwin: usize,
    width: usize,
    n_bound: u64,
    dec: Decomposer,
    ep: EncParams,
    engine: Box<dyn MismatchEngine + Send>,
    phase: Phase,
    consumed: u64,
    poisoned: Option<PoisonReason>,
    // pattern phase
    ptail: ActiveTail,
    pbuf: VecDeque<DefiniteBlock>,
    flushed: usize,
    // after the pattern
    r: usize,
    pat_tail: Vec<Vec<u32>>,
    fallback: Option<FallbackMatcher>,
    // text phase
    ttail: ActiveTail,
    s: u64,
    def_ring: VecDeque<Vec<u32>>,
    m_ring: VecDeque<Option<u32>>,
    open_serial: u64,
    base: Option<u32>,
    growing: Option<GrowingEd>,
}

impl MatcherCopy {
    pub fn new(cfg: &MatcherConfig, seeds: SeedTree) -> Result<Self, MatcherError> {
        let params = cfg.decomp_params(seeds.child("decompose", 0));
        let dec = Decomposer::new(params)?;
        let width = 2 * dec.params().size_cap;
        let ep = EncParams::new(width, cfg.failure_n(), &seeds.child("encode", 0));
        let engine = Box::new(ReferenceEngine::new(width, &seeds.child("engine", 0)));
        Ok(Self::with_engine(cfg, dec, ep, engine))
    }

    /// Builds a copy around a caller-supplied engine whose chunk size equals
    /// the encoding width.
    pub fn with_engine(
        cfg: &MatcherConfig,
        dec: Decomposer,
        ep: EncParams,
        engine: Box<dyn MismatchEngine + Send>,
    ) -> Self {
        MatcherCopy {
            k: cfg.k,
            rwin: dec.params().rwin,
            width: ep.width(),
            n_bound: cfg.n_bound,
            dec,
            ep,
            engine,
            phase: Phase::Pattern,
            consumed: 0,
            poisoned: None,
            ptail: ActiveTail::default(),
            pbuf: VecDeque::new(),
            flushed: 0,
            r: 0,
            pat_tail: Vec::new(),
            fallback: None,
            ttail: ActiveTail::default(),
            s: 0,
            def_ring: VecDeque::new(),
            m_ring: VecDeque::new(),
            open_serial: 0,
            base: None,
            growing: None,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn poisoned(&self) -> Option<&PoisonReason> {
        self.poisoned.as_ref()
    }

    pub fn poison(&mut self, why: PoisonReason) {
        if self.poisoned.is_none() {
            self.poisoned = Some(why);
        }
    }

    pub fn decomposer(&self) -> &Decomposer {
        &self.dec
    }

    /// Pattern block count `r`, known after the pattern ends.
    pub fn pattern_blocks(&self) -> usize {
        self.r
    }

    pub fn committed(&self) -> u64 {
        self.s
    }

    /// `m` values of the last committed blocks, oldest first.
    pub fn m_values(&self) -> Vec<Option<u32>> {
        self.m_ring.iter().copied().collect()
    }

    /// Cached `m_{s-d}` plus closed-pair distances, if finite.
    pub fn cached_base(&self) -> Option<u32> {
        self.base
    }

    pub fn engine_pattern_len(&self) -> u64 {
        self.engine.pattern_len()
    }

    fn count(&mut self) -> Result<(), MatcherError> {
        self.consumed += 1;
        if self.consumed > self.n_bound {
            return Err(MatcherError::StreamTooLong {
                pos: self.consumed,
                bound: self.n_bound,
            });
        }
        Ok(())
    }

    pub fn push_pattern_symbol(&mut self, a: u32) -> Result<(), MatcherError> {
        if self.phase != Phase::Pattern {
            return Err(MatcherError::Phase("pattern symbol"));
        }
        self.count()?;
        // symbols are kept even when poisoned: a short pattern still gets
        // the exact fallback
        let out = self.ptail.push(a, &self.dec);
        if self.ptail.oversize() {
            self.poison(PoisonReason::Oversize);
        }
        self.pbuf.extend(out);
        while self.pbuf.len() + self.ptail.block_count() > 2 * self.rwin {
            let b = self.pbuf.pop_front().expect("buffer is over capacity");
            self.feed_pattern_block(&b);
            self.flushed += 1;
        }
        Ok(())
    }

    fn feed_pattern_block(&mut self, b: &DefiniteBlock) {
        if self.poisoned.is_some() {
            return;
        }
        match encode(&b.grammar, &self.ep) {
            Ok(e) => {
                for c in e {
                    if let Err(err) = self.engine.feed_pattern(c) {
                        self.poison(PoisonReason::Engine(err.to_string()));
                        return;
                    }
                }
            }
            Err(err) => self.poison(PoisonReason::Encoding(err.to_string())),
        }
    }

    pub fn end_pattern(&mut self) -> Result<(), MatcherError> {
        if self.phase != Phase::Pattern {
            return Err(MatcherError::Phase("end of pattern"));
        }
        let t = self.ptail.block_count();
        self.r = self.flushed + self.pbuf.len() + t;
        let mut rest: Vec<DefiniteBlock> = self.pbuf.drain(..).collect();
        for i in 0..t {
            let grammar = self.ptail.block_grammar(i, &self.dec);
            if grammar.size() > self.dec.params().size_cap {
                self.poison(PoisonReason::Oversize);
            }
            rest.push(DefiniteBlock {
                serial: self.ptail.serial(i),
                grammar,
                symbols: self.ptail.block_symbols(i).to_vec(),
            });
        }
        self.ptail = ActiveTail::default();
        if self.r <= self.rwin {
            let p: Vec<u32> = rest.iter().flat_map(|b| b.symbols.iter().copied()).collect();
            self.fallback = Some(FallbackMatcher::new(p, self.k));
            self.phase = Phase::Fallback;
            // the fallback is exact and needs no hashing
            self.poisoned = None;
            return Ok(());
        }
        let keep = rest.len() - self.rwin;
        for b in &rest[..keep] {
            self.feed_pattern_block(b);
        }
        self.pat_tail = rest.drain(keep..).map(|b| b.symbols).collect();
        if let Err(err) = self.engine.end_pattern() {
            self.poison(PoisonReason::Engine(err.to_string()));
        }
        self.phase = Phase::Text;
        Ok(())
    }

    pub fn push_text_symbol(&mut self, a: u32) -> Result<EditReport, MatcherError> {
        match self.phase {
            Phase::Pattern => return Err(MatcherError::Phase("text symbol")),
            Phase::Fallback => {
                self.count()?;
                let f = self.fallback.as_mut().expect("fallback phase has a matcher");
                return Ok(match f.step(a) {
                    EdResult::Exact(d) => EditReport::Within(d),
                    EdResult::OverK => EditReport::OverK,
                });
            }
            Phase::Text => {}
        }
        self.count()?;
        if self.poisoned.is_some() {
            return Ok(EditReport::OverK);
        }
        let done = self.ttail.push(a, &self.dec);
        if self.ttail.oversize() {
            self.poison(PoisonReason::Oversize);
            return Ok(EditReport::OverK);
        }
        for b in done {
            self.commit_block(b);
            if self.poisoned.is_some() {
                return Ok(EditReport::OverK);
            }
        }
        let t = self.ttail.block_count();
        let open = self.ttail.serial(t - 1);
        if open != self.open_serial {
            self.open_serial = open;
            self.rebuild();
        } else if let Some(g) = self.growing.as_mut() {
            g.push(a);
        }
        Ok(self.query_distance())
    }

    /// Recomputes the cached part of the query after the block structure
    /// changed: `m_{s-d}` plus the distances of all closed aligned pairs.
    fn rebuild(&mut self) {
        let t = self.ttail.block_count();
        let d = self.rwin - t;
        let open = self.ttail.block_symbols(t - 1).to_vec();
        let mut g = GrowingEd::new(self.pat_tail[self.rwin - 1].clone(), self.k);
        for &c in &open {
            g.push(c);
        }
        self.growing = Some(g);
        self.base = None;
        // m_ring holds m for serials s - len + 1 ..= s
        if self.s <= d as u64 || d >= self.m_ring.len() || self.def_ring.len() < d {
            return;
        }
        let Some(mut total) = self.m_ring[self.m_ring.len() - 1 - d] else {
            return;
        };
        let k = self.k;
        let dl = self.def_ring.len();
        for i in 0..self.rwin - 1 {
            let text: &[u32] = if i < d {
                &self.def_ring[dl - d + i]
            } else {
                self.ttail.block_symbols(i - d)
            };
            match ed_bounded(text, &self.pat_tail[i], k - total) {
                EdResult::Exact(v) => total += v,
                EdResult::OverK => return,
            }
        }
        self.base = Some(total);
    }

    fn commit_block(&mut self, b: DefiniteBlock) {
        let coords = match encode(&b.grammar, &self.ep) {
            Ok(c) => c,
            Err(e) => return self.poison(PoisonReason::Encoding(e.to_string())),
        };
        for c in coords {
            if let Err(e) = self.engine.feed_text(c) {
                return self.poison(PoisonReason::Engine(e.to_string()));
            }
        }
        self.s += 1;
        let engine_blocks = (self.r - self.rwin) as u64;
        let m = if self.s < engine_blocks {
            None
        } else {
            self.window_distance()
        };
        self.m_ring.push_back(m);
        self.def_ring.push_back(b.symbols);
        while self.m_ring.len() > self.rwin {
            self.m_ring.pop_front();
        }
        while self.def_ring.len() > self.rwin {
            self.def_ring.pop_front();
        }
    }

    /// `m_s` from the engine window, or `None` for infinity.
    fn window_distance(&mut self) -> Option<u32> {
        // the first window block usually differs (it starts before the
        // occurrence) yet may contribute nothing after suffix minimization
        let threshold = (self.k as u64 + 1) * self.width as u64;
        let records = match self.engine.query_window(threshold) {
            Ok(WindowQueryResult::OverK) => return None,
            Ok(WindowQueryResult::Within(0)) => return Some(0),
            Ok(WindowQueryResult::Within(_)) => match self.engine.recover_mismatches() {
                Ok(r) => r,
                Err(e) => {
                    self.poison(PoisonReason::Engine(e.to_string()));
                    return None;
                }
            },
            Err(e) => {
                self.poison(PoisonReason::Engine(e.to_string()));
                return None;
            }
        };
        let mut total = 0u32;
        for run in records.chunk_by(|a, b| block_of(a, self.width) == block_of(b, self.width)) {
            let block = block_of(&run[0], self.width);
            if run.len() != self.width {
                self.poison(PoisonReason::PartialRun {
                    block: block + 1,
                    len: run.len(),
                });
                return None;
            }
            let text_coords: Vec<u128> = run.iter().map(|m| m.text_sym).collect();
            let pat_coords: Vec<u128> = run.iter().map(|m| m.pat_sym).collect();
            let decoded = decode(&text_coords, &self.ep)
                .and_then(|gt| Ok((gt, decode(&pat_coords, &self.ep)?)))
                .map_err(|e| e.to_string())
                .and_then(|(gt, gp)| {
                    Ok((
                        gt.to_symbols().map_err(|e| e.to_string())?,
                        gp.to_symbols().map_err(|e| e.to_string())?,
                    ))
                });
            let (x, y) = match decoded {
                Ok(v) => v,
                Err(e) => {
                    self.poison(PoisonReason::Decoding(e));
                    return None;
                }
            };
            let budget = self.k - total;
            let d = if block == 0 {
                match ed_suffix_min(&x, &y, budget) {
                    SuffixEdResult::Found { dist, .. } => Some(dist),
                    SuffixEdResult::NotFound => None,
                }
            } else {
                ed_bounded(&x, &y, budget).value()
            };
            total += d?;
        }
        Some(total)
    }

    /// Current estimate, `OverK` for infinity.
    pub fn query_distance(&self) -> EditReport {
        if self.poisoned.is_some() {
            return EditReport::OverK;
        }
        match (self.base, &self.growing) {
            (Some(b), Some(g)) => match g.result() {
                EdResult::Exact(v) if b + v <= self.k => EditReport::Within(b + v),
                _ => EditReport::OverK,
            },
            _ => EditReport::OverK,
        }
    }

    pub fn state_size(&self) -> StateSize {
        let growing = match &self.growing {
            Some(_) => 4 * (self.pat_tail[self.rwin - 1].len() + 1),
            None => 0,
        };
        StateSize {
            tail: self.ttail.footprint_bytes() + self.ptail.footprint_bytes(),
            rings: self.def_ring.iter().map(|b| 4 * b.len() + 24).sum::<usize>() + 8 * self.m_ring.len() + growing,
            pattern: self.pat_tail.iter().map(|b| 4 * b.len() + 24).sum::<usize>()
                + self
                    .pbuf
                    .iter()
                    .map(|b| 4 * b.symbols.len() + 16 * b.grammar.size())
                    .sum::<usize>(),
            fallback: self.fallback.as_ref().map_or(0, |f| 8 * (f.pattern().len() + 1)),
            engine: self.engine.footprint_bytes(),
        }
    }
}

fn block_of(m: &MismatchRecord, width: usize) -> u64 {
    (m.pos - 1) / width as u64
}

/// Independent copies run side by side; the answer is their minimum.
pub struct Ensemble {
    copies: Vec<MatcherCopy>,
    parallel: bool,
    last: Vec<EditReport>,
}

impl Ensemble {
    pub fn new(cfg: &MatcherConfig) -> Result<Self, MatcherError> {
        let n = cfg.copy_count();
        if n == 0 {
            return Err(MatcherError::Config("at least one copy is required".into()));
        }
        let root = SeedTree::new(cfg.seed);
        let copies = (0..n as u64)
            .map(|i| MatcherCopy::new(cfg, root.child("copy", i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Ensemble {
            last: vec![EditReport::OverK; copies.len()],
            copies,
            parallel: cfg.parallel,
        })
    }

    pub fn from_copies(copies: Vec<MatcherCopy>) -> Self {
        Ensemble {
            last: vec![EditReport::OverK; copies.len()],
            copies,
            parallel: false,
        }
    }

    pub fn copies(&self) -> &[MatcherCopy] {
        &self.copies
    }

    pub fn copies_mut(&mut self) -> &mut [MatcherCopy] {
        &mut self.copies
    }

    /// Reports of every copy for the last text symbol.
    pub fn last_reports(&self) -> &[EditReport] {
        &self.last
    }

    pub fn push_pattern_symbol(&mut self, a: u32) -> Result<(), MatcherError> {
        self.each(|c| c.push_pattern_symbol(a))?;
        Ok(())
    }

    pub fn end_pattern(&mut self) -> Result<(), MatcherError> {
        self.each(|c| c.end_pattern())?;
        Ok(())
    }

    pub fn push_text_symbol(&mut self, a: u32) -> Result<EditReport, MatcherError> {
        self.last = self.each(|c| c.push_text_symbol(a))?;
        if self.copies.iter().all(|c| c.poisoned.is_some()) {
            return Err(MatcherError::AllPoisoned);
        }
        Ok(self.last.iter().fold(EditReport::OverK, |acc, &r| acc.min(r)))
    }

    fn each<T: Send>(
        &mut self,
        f: impl Fn(&mut MatcherCopy) -> Result<T, MatcherError> + Sync + Send,
    ) -> Result<Vec<T>, MatcherError> {
        if self.parallel && self.copies.len() > 1 {
            self.copies.par_iter_mut().map(f).collect()
        } else {
            self.copies.iter_mut().map(f).collect()
        }
    }

    pub fn state_sizes(&self) -> Vec<StateSize> {
        self.copies.iter().map(MatcherCopy::state_size).collect()
    }

    /// Runs a whole pattern and text and returns one report per text symbol.
    pub fn run(&mut self, pattern: &[u32], text: &[u32]) -> Result<Vec<EditReport>, MatcherError> {
        for &a in pattern {
            self.push_pattern_symbol(a)?;
        }
        self.end_pattern()?;
        text.iter().map(|&a| self.push_text_symbol(a)).collect()
    }
}
