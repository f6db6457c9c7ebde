//! Streaming Hamming-distance engines over encoded grammar coordinates.
//!
//! [`MismatchEngine`] is the interface the matcher talks to. The provided
//! [`ReferenceEngine`] keeps the whole pattern and the current text window
//! and is exact; a small-space engine can implement the same trait.

use std::collections::VecDeque;

use crate::hash::{mersenne_add, mersenne_mul, SeedTree};
use thiserror::Error;

/// One differing coordinate of the current window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MismatchRecord {
    /// 1-based coordinate within the engine pattern.
    pub pos: u64,
    pub text_sym: u128,
    pub pat_sym: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowQueryResult {
    Within(u64),
    OverK,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("operation not allowed in the {0} phase")]
    Phase(&'static str),
    #[error("text has {text} coordinates, the window needs {pattern}")]
    WindowIncomplete { text: u64, pattern: u64 },
    #[error("query at text length {0}, which is not a chunk boundary")]
    NotAtBoundary(u64),
    #[error("pattern length {len} is not a multiple of the chunk size {chunk}")]
    PatternLength { len: u64, chunk: usize },
    #[error("text advanced since the last query")]
    Stale,
    #[error("no successful query to recover from")]
    NoQuery,
}

pub trait MismatchEngine {
    fn feed_pattern(&mut self, sym: u128) -> Result<(), EngineError>;
    fn end_pattern(&mut self) -> Result<(), EngineError>;
    fn feed_text(&mut self, sym: u128) -> Result<(), EngineError>;
    /// Hamming distance between the pattern and the last pattern-length
    /// text coordinates, if at most `threshold`.
    fn query_window(&mut self, threshold: u64) -> Result<WindowQueryResult, EngineError>;
    /// All mismatches of the window seen by the last `Within` query, sorted
    /// by position.
    fn recover_mismatches(&self) -> Result<Vec<MismatchRecord>, EngineError>;
    fn pattern_len(&self) -> u64;
    fn text_len(&self) -> u64;
    /// Bytes of live state.
    fn footprint_bytes(&self) -> usize;
}

#[derive(Debug, Clone)]
struct Chunk {
    syms: Vec<u128>,
    digest: u64,
}

/// Exact engine storing the pattern and the window in chunks of `chunk`
/// coordinates, each with a Karp-Rabin digest so equal chunks are skipped.
#[derive(Debug, Clone)]
pub struct ReferenceEngine {
    chunk: usize,
    point: u64,
    text_phase: bool,
    pattern: Vec<Chunk>,
    pattern_len: u64,
    window: VecDeque<Chunk>,
    open: Chunk,
    text_len: u64,
    last: Option<(u64, Vec<MismatchRecord>)>,
}

impl ReferenceEngine {
    pub fn new(chunk: usize, seeds: &SeedTree) -> Self {
        let chunk = chunk.max(1);
        ReferenceEngine {
            chunk,
            point: seeds.child("engine", 0).field_element(),
            text_phase: false,
            pattern: Vec::new(),
            pattern_len: 0,
            window: VecDeque::new(),
            open: Chunk::with_capacity(chunk),
            text_len: 0,
            last: None,
        }
    }

    pub fn chunk(&self) -> usize {
        self.chunk
    }

    fn absorb(&self, c: &mut Chunk, sym: u128) {
        for limb in (0..4).rev().map(|i| (sym >> (32 * i)) as u64 & 0xFFFF_FFFF) {
            c.digest = mersenne_add(mersenne_mul(c.digest, self.point), limb);
        }
        c.syms.push(sym);
    }
}

impl Chunk {
    fn with_capacity(n: usize) -> Self {
        Chunk {
            syms: Vec::with_capacity(n),
            digest: 0,
        }
    }
}

impl MismatchEngine for ReferenceEngine {
    fn feed_pattern(&mut self, sym: u128) -> Result<(), EngineError> {
        if self.text_phase {
            return Err(EngineError::Phase("text"));
        }
        if self.pattern.last().is_none_or(|c| c.syms.len() == self.chunk) {
            self.pattern.push(Chunk::with_capacity(self.chunk));
        }
        let mut c = self.pattern.pop().expect("just ensured");
        self.absorb(&mut c, sym);
        self.pattern.push(c);
        self.pattern_len += 1;
        Ok(())
    }

    fn end_pattern(&mut self) -> Result<(), EngineError> {
        if self.text_phase {
            return Err(EngineError::Phase("text"));
        }
        if !self.pattern_len.is_multiple_of(self.chunk as u64) {
            return Err(EngineError::PatternLength {
                len: self.pattern_len,
                chunk: self.chunk,
            });
        }
        self.text_phase = true;
        Ok(())
    }

    fn feed_text(&mut self, sym: u128) -> Result<(), EngineError> {
        if !self.text_phase {
            return Err(EngineError::Phase("pattern"));
        }
        let mut open = std::mem::replace(&mut self.open, Chunk::with_capacity(0));
        self.absorb(&mut open, sym);
        if open.syms.len() == self.chunk {
            self.window.push_back(open);
            if self.window.len() > self.pattern.len() {
                self.window.pop_front();
            }
            self.open = Chunk::with_capacity(self.chunk);
        } else {
            self.open = open;
        }
        self.text_len += 1;
        Ok(())
    }

    fn query_window(&mut self, threshold: u64) -> Result<WindowQueryResult, EngineError> {
        if !self.text_phase {
            return Err(EngineError::Phase("pattern"));
        }
        self.last = None;
        if self.pattern_len == 0 {
            return Ok(WindowQueryResult::OverK);
        }
        if !self.text_len.is_multiple_of(self.chunk as u64) {
            return Err(EngineError::NotAtBoundary(self.text_len));
        }
        if self.text_len < self.pattern_len {
            return Err(EngineError::WindowIncomplete {
                text: self.text_len,
                pattern: self.pattern_len,
            });
        }
        let mut records = Vec::new();
        for (ci, (p, t)) in self.pattern.iter().zip(&self.window).enumerate() {
            if p.digest == t.digest {
                continue;
            }
            let base = (ci * self.chunk) as u64;
            for (j, (&ps, &ts)) in p.syms.iter().zip(&t.syms).enumerate() {
                if ps != ts {
                    records.push(MismatchRecord {
                        pos: base + j as u64 + 1,
                        text_sym: ts,
                        pat_sym: ps,
                    });
                }
            }
            if records.len() as u64 > threshold {
                return Ok(WindowQueryResult::OverK);
            }
        }
        let ham = records.len() as u64;
        self.last = Some((self.text_len, records));
        Ok(WindowQueryResult::Within(ham))
    }

    fn recover_mismatches(&self) -> Result<Vec<MismatchRecord>, EngineError> {
        match &self.last {
            None => Err(EngineError::NoQuery),
            Some((at, _)) if *at != self.text_len => Err(EngineError::Stale),
            Some((_, r)) => Ok(r.clone()),
        }
    }

    fn pattern_len(&self) -> u64 {
        self.pattern_len
    }

    fn text_len(&self) -> u64 {
        self.text_len
    }

    fn footprint_bytes(&self) -> usize {
        let per = |c: &Chunk| c.syms.capacity() * 16 + 8;
        self.pattern.iter().map(per).sum::<usize>()
            + self.window.iter().map(per).sum::<usize>()
            + per(&self.open)
            + self.last.as_ref().map_or(0, |(_, r)| r.len() * 40)
    }
}
