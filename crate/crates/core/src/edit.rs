//! Threshold-bounded edit distance kernels.
//!
//! All kernels work on evaluated block strings with a diagonal band of
//! half-width `k`; cells outside the band are treated as `k + 1`.

use crate::grammar::{Grammar, GrammarError};

/// Outcome of a bounded edit distance computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdResult {
    Exact(u32),
    OverK,
}

impl EdResult {
    pub fn value(self) -> Option<u32> {
        match self {
            EdResult::Exact(d) => Some(d),
            EdResult::OverK => None,
        }
    }
}

/// Outcome of a suffix-minimized edit distance computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuffixEdResult {
    /// `suffix_start` is 1-based in `x`; `x.len() + 1` denotes the empty
    /// suffix.
    Found {
        dist: u32,
        suffix_start: usize,
    },
    NotFound,
}

impl SuffixEdResult {
    pub fn value(self) -> Option<u32> {
        match self {
            SuffixEdResult::Found { dist, .. } => Some(dist),
            SuffixEdResult::NotFound => None,
        }
    }
}

/// Edit distance of `x` and `y` if it is at most `k`.
pub fn ed_bounded(x: &[u32], y: &[u32], k: u32) -> EdResult {
    let (n, m) = (x.len(), y.len());
    if n.abs_diff(m) > k as usize {
        return EdResult::OverK;
    }
    if x == y {
        return EdResult::Exact(0);
    }
    let cap = k + 1;
    let kk = k as usize;
    let mut prev = vec![cap; m + 1];
    let mut cur = vec![cap; m + 1];
    for (j, v) in prev.iter_mut().enumerate().take(kk.min(m) + 1) {
        *v = j as u32;
    }
    for i in 1..=n {
        let lo = i.saturating_sub(kk);
        let hi = (i + kk).min(m);
        if lo > 0 {
            cur[lo - 1] = cap;
        }
        let mut row_min = cap;
        for j in lo..=hi {
            let v = if j == 0 {
                i as u32
            } else {
                let sub = prev[j - 1] + (x[i - 1] != y[j - 1]) as u32;
                let del = prev[j] + 1;
                let ins = cur[j - 1] + 1;
                sub.min(del).min(ins)
            };
            let v = v.min(cap);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < m {
            cur[hi + 1] = cap;
        }
        if row_min > k {
            return EdResult::OverK;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    match prev[m] {
        d if d <= k => EdResult::Exact(d),
        _ => EdResult::OverK,
    }
}

/// Smallest edit distance between `y` and any suffix of `x`, if at most `k`.
pub fn ed_suffix_min(x: &[u32], y: &[u32], k: u32) -> SuffixEdResult {
    let m = y.len();
    // suffixes longer than m + k are more than k edits away
    let offset = x.len().saturating_sub(m + k as usize);
    let xs = &x[offset..];
    let n = xs.len();
    let cap = k + 1;
    let kk = k as i64;
    let end_diag = n as i64 - m as i64;
    // columns are positions in xs, rows positions in y
    let band = |j: usize| {
        let lo = (j as i64 + end_diag - kk).max(0) as usize;
        let hi = (j as i64 + end_diag + kk).min(n as i64);
        (lo, hi)
    };
    let mut prev = vec![(cap, 0usize); n + 1];
    let mut cur = vec![(cap, 0usize); n + 1];
    let (lo0, hi0) = band(0);
    if hi0 >= lo0 as i64 {
        for (i, cell) in prev.iter_mut().enumerate().take(hi0 as usize + 1).skip(lo0) {
            *cell = (0, i);
        }
    }
    for j in 1..=m {
        let (lo, hi) = band(j);
        cur.iter_mut().for_each(|c| *c = (cap, 0));
        if hi < lo as i64 {
            std::mem::swap(&mut prev, &mut cur);
            continue;
        }
        for i in lo..=hi as usize {
            let mut best = (prev[i].0 + 1, prev[i].1);
            if i > 0 {
                let sub = prev[i - 1].0 + (xs[i - 1] != y[j - 1]) as u32;
                if sub < best.0 {
                    best = (sub, prev[i - 1].1);
                }
                let del = cur[i - 1].0 + 1;
                if del < best.0 {
                    best = (del, cur[i - 1].1);
                }
            }
            best.0 = best.0.min(cap);
            cur[i] = best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (d, origin) = prev[n];
    if d <= k {
        SuffixEdResult::Found {
            dist: d,
            suffix_start: offset + origin + 1,
        }
    } else {
        SuffixEdResult::NotFound
    }
}

pub fn ed_bounded_grammars(gx: &Grammar, gy: &Grammar, k: u32) -> Result<EdResult, GrammarError> {
    if gx == gy {
        return Ok(EdResult::Exact(0));
    }
    Ok(ed_bounded(&gx.to_symbols()?, &gy.to_symbols()?, k))
}

pub fn ed_suffix_min_grammars(gx: &Grammar, gy: &Grammar, k: u32) -> Result<SuffixEdResult, GrammarError> {
    Ok(ed_suffix_min(&gx.to_symbols()?, &gy.to_symbols()?, k))
}

/// Bounded edit distance between a growing string and a fixed one, one
/// banded DP column per appended symbol.
#[derive(Debug, Clone)]
pub struct GrowingEd {
    target: Vec<u32>,
    k: u32,
    col: Vec<u32>,
    len: usize,
}

impl GrowingEd {
    pub fn new(target: Vec<u32>, k: u32) -> Self {
        let cap = k + 1;
        let col = (0..=target.len())
            .map(|j| if j <= k as usize { j as u32 } else { cap })
            .collect();
        GrowingEd { target, k, col, len: 0 }
    }

    pub fn push(&mut self, a: u32) {
        let cap = self.k + 1;
        let kk = self.k as usize;
        let m = self.target.len();
        let i = self.len + 1;
        let lo = i.saturating_sub(kk);
        let hi = (i + kk).min(m);
        self.len = i;
        if lo > m {
            self.col.iter_mut().for_each(|c| *c = cap);
            return;
        }
        // diagonal predecessor of row lo, read before it is overwritten
        let mut diag = if lo == 0 { cap } else { self.col[lo - 1] };
        if lo > 0 {
            self.col[lo - 1] = cap;
        }
        let mut above = cap;
        for j in lo..=hi {
            let old = self.col[j];
            let v = if j == 0 {
                (i as u32).min(cap)
            } else {
                let sub = diag + (a != self.target[j - 1]) as u32;
                (sub.min(old + 1).min(above + 1)).min(cap)
            };
            diag = old;
            self.col[j] = v;
            above = v;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn result(&self) -> EdResult {
        let m = self.target.len();
        if self.len.abs_diff(m) > self.k as usize {
            return EdResult::OverK;
        }
        match self.col[m] {
            d if d <= self.k => EdResult::Exact(d),
            _ => EdResult::OverK,
        }
    }
}

/// Exact online matcher for short patterns: the text-prefix-free DP column
/// over the whole pattern.
#[derive(Debug, Clone)]
pub struct FallbackMatcher {
    pattern: Vec<u32>,
    col: Vec<u32>,
    k: u32,
}

impl FallbackMatcher {
    pub fn new(pattern: Vec<u32>, k: u32) -> Self {
        let col = (0..=pattern.len() as u32).collect();
        FallbackMatcher { pattern, col, k }
    }

    /// Consumes one text symbol and returns the minimum distance of the
    /// pattern to a suffix of the text, if at most `k`.
    pub fn step(&mut self, a: u32) -> EdResult {
        let mut diag = self.col[0];
        for j in 1..self.col.len() {
            let up = self.col[j];
            let v = (diag + (self.pattern[j - 1] != a) as u32)
                .min(up + 1)
                .min(self.col[j - 1] + 1);
            diag = up;
            self.col[j] = v;
        }
        match self.col[self.pattern.len()] {
            d if d <= self.k => EdResult::Exact(d),
            _ => EdResult::OverK,
        }
    }

    pub fn pattern(&self) -> &[u32] {
        &self.pattern
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(x: &str) -> Vec<u32> {
        x.bytes().map(u32::from).collect()
    }

    fn full_dp(x: &[u32], y: &[u32]) -> u32 {
        let mut prev: Vec<u32> = (0..=y.len() as u32).collect();
        for i in 1..=x.len() {
            let mut cur = vec![i as u32; y.len() + 1];
            for j in 1..=y.len() {
                cur[j] = (prev[j - 1] + (x[i - 1] != y[j - 1]) as u32)
                    .min(prev[j] + 1)
                    .min(cur[j - 1] + 1);
            }
            prev = cur;
        }
        prev[y.len()]
    }

    #[test]
    fn bounded_examples() {
        assert_eq!(ed_bounded(&s("abc"), &s("abc"), 0), EdResult::Exact(0));
        assert_eq!(ed_bounded(&s("kitten"), &s("sitting"), 5), EdResult::Exact(3));
        assert_eq!(ed_bounded(&s("kitten"), &s("sitting"), 2), EdResult::OverK);
        assert_eq!(ed_bounded(&s("aaaa"), &s("bbbb"), 2), EdResult::OverK);
        assert_eq!(ed_bounded(&s(""), &s("ab"), 2), EdResult::Exact(2));
    }

    #[test]
    fn suffix_examples() {
        assert_eq!(
            ed_suffix_min(&s("zzzabc"), &s("abc"), 3),
            SuffixEdResult::Found {
                dist: 0,
                suffix_start: 4
            }
        );
        // brute force: suffixes "abab" and "ab" both reach 1
        match ed_suffix_min(&s("ababab"), &s("abb"), 2) {
            SuffixEdResult::Found { dist, suffix_start } => {
                assert_eq!(dist, 1);
                assert_eq!(full_dp(&s("ababab")[suffix_start - 1..], &s("abb")), 1);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(ed_suffix_min(&s("aaaa"), &s("zzzz"), 1), SuffixEdResult::NotFound);
        assert_eq!(
            ed_suffix_min(&s("abc"), &s(""), 0),
            SuffixEdResult::Found {
                dist: 0,
                suffix_start: 4
            }
        );
    }

    #[test]
    fn fallback_examples() {
        let mut f = FallbackMatcher::new(s("abc"), 3);
        let out: Vec<_> = s("abc").into_iter().map(|c| f.step(c)).collect();
        assert_eq!(out, vec![EdResult::Exact(2), EdResult::Exact(1), EdResult::Exact(0)]);
        let mut f = FallbackMatcher::new(s("a"), 1);
        assert_eq!(f.step(b'z' as u32), EdResult::Exact(1));
        let mut f = FallbackMatcher::new(vec![], 0);
        assert!(s("xyz").into_iter().all(|c| f.step(c) == EdResult::Exact(0)));
    }

    #[test]
    fn growing_matches_bounded() {
        let y = s("abcabcabd");
        let x = s("abdabcxabcd");
        for k in 0..6 {
            let mut g = GrowingEd::new(y.clone(), k);
            for i in 0..x.len() {
                g.push(x[i]);
                assert_eq!(g.result(), ed_bounded(&x[..=i], &y, k), "k={k} i={i}");
            }
        }
    }

    fn small_string() -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(0u32..3, 0..40)
    }

    proptest! {
        #[test]
        fn bounded_agrees_with_full_dp(x in small_string(), y in small_string(), k in 0u32..12) {
            let d = full_dp(&x, &y);
            let expect = if d <= k { EdResult::Exact(d) } else { EdResult::OverK };
            prop_assert_eq!(ed_bounded(&x, &y, k), expect);
            prop_assert_eq!(ed_bounded(&y, &x, k), expect);
        }

        #[test]
        fn suffix_agrees_with_enumeration(x in small_string(), y in small_string(), k in 0u32..12) {
            let best = (0..=x.len()).map(|b| full_dp(&x[b..], &y)).min().unwrap();
            match ed_suffix_min(&x, &y, k) {
                SuffixEdResult::Found { dist, suffix_start } => {
                    prop_assert_eq!(dist, best);
                    prop_assert_eq!(full_dp(&x[suffix_start - 1..], &y), best);
                }
                SuffixEdResult::NotFound => prop_assert!(best > k),
            }
        }

        #[test]
        fn growing_agrees_with_full_dp(x in small_string(), y in small_string(), k in 0u32..8) {
            let mut g = GrowingEd::new(y.clone(), k);
            for (i, &c) in x.iter().enumerate() {
                g.push(c);
                let d = full_dp(&x[..=i], &y);
                let expect = if d <= k { EdResult::Exact(d) } else { EdResult::OverK };
                prop_assert_eq!(g.result(), expect);
            }
        }

        #[test]
        fn triangle(x in small_string(), y in small_string(), z in small_string()) {
            let k = 30;
            if let (EdResult::Exact(a), EdResult::Exact(b), EdResult::Exact(c)) =
                (ed_bounded(&x, &z, k), ed_bounded(&x, &y, k), ed_bounded(&y, &z, k)) {
                prop_assert!(a <= b + c);
            }
        }
    }
}
