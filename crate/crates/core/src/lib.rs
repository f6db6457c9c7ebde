//! Streaming k-edit approximate pattern matching.
//!
//! The pattern and then the text arrive one symbol at a time. After every
//! text symbol the matcher reports the smallest edit distance, capped at
//! `k`, between the pattern and any suffix of the text received so far.
//!
//! Both strings are cut into small grammar blocks by a locally consistent
//! decomposition ([`decompose`]). Blocks that can no longer change are
//! encoded ([`encode`]) so that distinct blocks differ in every coordinate,
//! which turns edit distance over blocks into Hamming distance over the
//! encoded stream ([`mismatch`]). Differing block pairs are recovered from
//! the mismatch information and scored with bounded edit distance
//! ([`edit`]). Several independently seeded copies run side by side and the
//! smallest report wins ([`matcher`]).

pub mod cli;
pub mod decompose;
pub mod edit;
pub mod encode;
pub mod grammar;
pub mod hash;
pub mod matcher;
pub mod mismatch;
pub mod oracle;
