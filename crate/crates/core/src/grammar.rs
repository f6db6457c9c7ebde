//! Deterministic straight-line grammars with pair rules (`c -> a b`) and
//! power rules (`c -> a^r`).
//!
//! A [`Grammar`] is validated on construction: every nonterminal has at most
//! one rule, every reachable nonterminal is defined and the rule graph is
//! acyclic. All string positions exposed by this module are 1-based.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

/// Default guard on the length of an evaluated grammar.
pub const DEFAULT_MAX_LEN: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("rule graph contains a cycle through N{0}")]
    CycleDetected(u32),
    #[error("expansion of {len} symbols exceeds the limit of {max}")]
    TooLong { len: u64, max: u64 },
    #[error("nonterminal N{0} has no rule")]
    Undefined(u32),
    #[error("nonterminal N{0} has more than one rule")]
    DuplicateRule(u32),
    #[error("position {pos} is outside 1..={len}")]
    OutOfRange { pos: u64, len: u64 },
    #[error("power rule for N{0} has exponent 0")]
    ZeroExponent(u32),
}

/// A grammar symbol: either a terminal from the input alphabet or a nonterminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Terminal(u32),
    Nonterminal(u32),
}

/// Right-hand side of a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rhs {
    Pair(Symbol, Symbol),
    Power(Symbol, u32),
}

impl Rhs {
    fn children(&self) -> [Option<Symbol>; 2] {
        match *self {
            Rhs::Pair(a, b) => [Some(a), Some(b)],
            Rhs::Power(a, _) => [Some(a), None],
        }
    }
}

/// A deterministic grammar. The start symbol `#` derives `start`; an empty
/// grammar (no start) evaluates to the empty string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Grammar {
    rules: BTreeMap<u32, Rhs>,
    start: Option<Symbol>,
    eval_len: u64,
}

impl Grammar {
    /// Builds and validates a grammar.
    ///
    /// Power rules with exponent 1 are aliases and get substituted away.
    pub fn new(start: Option<Symbol>, rules: impl IntoIterator<Item = (u32, Rhs)>) -> Result<Self, GrammarError> {
        let mut map = BTreeMap::new();
        for (lhs, rhs) in rules {
            if let Rhs::Power(_, 0) = rhs {
                return Err(GrammarError::ZeroExponent(lhs));
            }
            if map.insert(lhs, rhs).is_some() {
                return Err(GrammarError::DuplicateRule(lhs));
            }
        }
        let (map, start) = remove_aliases(map, start)?;
        let eval_len = match start {
            None => 0,
            Some(s) => {
                let sizes = subtree_sizes(&map, s)?;
                symbol_len(s, &sizes)
            }
        };
        Ok(Grammar {
            rules: map,
            start,
            eval_len,
        })
    }

    pub fn empty() -> Self {
        Grammar::default()
    }

    /// Grammar for a single terminal.
    pub fn terminal(sym: u32) -> Self {
        Grammar {
            rules: BTreeMap::new(),
            start: Some(Symbol::Terminal(sym)),
            eval_len: 1,
        }
    }

    pub fn start(&self) -> Option<Symbol> {
        self.start
    }

    pub fn rules(&self) -> impl Iterator<Item = (u32, Rhs)> + '_ {
        self.rules.iter().map(|(&l, &r)| (l, r))
    }

    pub fn rule(&self, lhs: u32) -> Option<Rhs> {
        self.rules.get(&lhs).copied()
    }

    /// Number of rules, `|G|`.
    pub fn size(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start.is_none()
    }

    /// Length of `eval(G)`, computed once at construction by a memoized
    /// depth-first pass.
    pub fn eval_size(&self) -> u64 {
        self.eval_len
    }

    /// Expands the grammar into its terminal string.
    pub fn eval(&self, max_len: u64) -> Result<Vec<u32>, GrammarError> {
        if self.eval_len > max_len {
            return Err(GrammarError::TooLong {
                len: self.eval_len,
                max: max_len,
            });
        }
        let mut out = Vec::with_capacity(self.eval_len as usize);
        let Some(start) = self.start else {
            return Ok(out);
        };
        // (symbol, remaining repetitions)
        let mut stack = vec![(start, 1u32)];
        while let Some((sym, reps)) = stack.pop() {
            if reps > 1 {
                stack.push((sym, reps - 1));
            }
            match sym {
                Symbol::Terminal(t) => out.push(t),
                Symbol::Nonterminal(n) => match self.rules[&n] {
                    Rhs::Pair(a, b) => {
                        stack.push((b, 1));
                        stack.push((a, 1));
                    }
                    Rhs::Power(a, r) => stack.push((a, r)),
                },
            }
        }
        Ok(out)
    }

    /// Expansion with the default length guard.
    pub fn to_symbols(&self) -> Result<Vec<u32>, GrammarError> {
        self.eval(DEFAULT_MAX_LEN)
    }

    /// Grammar deriving `eval(self)[m..]` (1-based `m`).
    ///
    /// Walks the derivation path to position `m` once, splitting at most one
    /// power rule per level and chaining the right remnants with fresh
    /// nonterminals numbered above every existing id.
    pub fn suffix(&self, m: u64) -> Result<Grammar, GrammarError> {
        if m == 0 || m > self.eval_len {
            return Err(GrammarError::OutOfRange {
                pos: m,
                len: self.eval_len,
            });
        }
        let start = self.start.expect("nonempty grammar has a start");
        if m == 1 {
            return Ok(self.clone());
        }
        let sizes = subtree_sizes(&self.rules, start)?;
        let mut next_id = self.rules.keys().next_back().map_or(0, |&k| k + 1);
        let mut fresh = Vec::new();
        let mut remnants: Vec<Symbol> = Vec::new();
        let mut cur = start;
        let mut offset = m;
        while offset > 1 {
            let Symbol::Nonterminal(n) = cur else {
                unreachable!("offset beyond a terminal");
            };
            match self.rules[&n] {
                Rhs::Pair(a, b) => {
                    let la = symbol_len(a, &sizes);
                    if offset <= la {
                        remnants.push(b);
                        cur = a;
                    } else {
                        offset -= la;
                        cur = b;
                    }
                }
                Rhs::Power(a, r) => {
                    let la = symbol_len(a, &sizes);
                    let q = (offset - 1) / la;
                    offset -= q * la;
                    let after = r as u64 - q - 1;
                    if offset == 1 {
                        // whole copies from here on
                        let copies = after + 1;
                        cur = if copies >= 2 {
                            let id = next_id;
                            next_id += 1;
                            fresh.push((id, Rhs::Power(a, copies as u32)));
                            Symbol::Nonterminal(id)
                        } else {
                            a
                        };
                        break;
                    }
                    if after >= 2 {
                        let id = next_id;
                        next_id += 1;
                        fresh.push((id, Rhs::Power(a, after as u32)));
                        remnants.push(Symbol::Nonterminal(id));
                    } else if after == 1 {
                        remnants.push(a);
                    }
                    cur = a;
                }
            }
        }
        let mut acc = cur;
        for rem in remnants.into_iter().rev() {
            let id = next_id;
            next_id += 1;
            fresh.push((id, Rhs::Pair(acc, rem)));
            acc = Symbol::Nonterminal(id);
        }
        let mut rules = self.rules.clone();
        rules.extend(fresh);
        let rules = prune_unreachable(&rules, acc);
        Grammar::new(Some(acc), rules)
    }

    /// Renumbers nonterminals in first-visit depth-first order from the
    /// start symbol and drops unreachable rules.
    pub fn canonicalize(&self) -> Grammar {
        let Some(start) = self.start else {
            return Grammar::empty();
        };
        let mut ids: HashMap<u32, u32> = HashMap::new();
        let mut order: Vec<u32> = Vec::new();
        let mut stack = vec![start];
        while let Some(sym) = stack.pop() {
            let Symbol::Nonterminal(n) = sym else { continue };
            if ids.contains_key(&n) {
                continue;
            }
            ids.insert(n, order.len() as u32);
            order.push(n);
            let [a, b] = self.rules[&n].children();
            // push right first so the left child is visited first
            if let Some(b) = b {
                stack.push(b);
            }
            if let Some(a) = a {
                stack.push(a);
            }
        }
        let remap = |s: Symbol| match s {
            Symbol::Nonterminal(n) => Symbol::Nonterminal(ids[&n]),
            t => t,
        };
        let rules = order
            .iter()
            .map(|n| {
                let rhs = match self.rules[n] {
                    Rhs::Pair(a, b) => Rhs::Pair(remap(a), remap(b)),
                    Rhs::Power(a, r) => Rhs::Power(remap(a), r),
                };
                (ids[n], rhs)
            })
            .collect();
        Grammar {
            rules,
            start: Some(remap(start)),
            eval_len: self.eval_len,
        }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonicalize()
    }

    /// One rule per line, start symbol first.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        match self.start {
            None => {}
            Some(Symbol::Terminal(t)) => {
                out.push_str(&format!("# -> {}\n", Symbol::Terminal(t)));
            }
            Some(Symbol::Nonterminal(s)) => {
                let first = std::iter::once(s);
                let rest = self.rules.keys().copied().filter(|&k| k != s);
                for lhs in first.chain(rest) {
                    let line = match self.rules[&lhs] {
                        Rhs::Pair(a, b) => format!("N{lhs} -> {a} {b}"),
                        Rhs::Power(a, r) => format!("N{lhs} -> {a} ^ {r}"),
                    };
                    out.push_str(&line);
                    out.push('\n');
                }
            }
        }
        out
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Symbol::Nonterminal(n) => write!(f, "N{n}"),
            Symbol::Terminal(t) => match char::from_u32(t) {
                Some(c) if c.is_ascii_graphic() => write!(f, "'{c}'"),
                _ => write!(f, "t{t}"),
            },
        }
    }
}

fn symbol_len(sym: Symbol, sizes: &HashMap<u32, u64>) -> u64 {
    match sym {
        Symbol::Terminal(_) => 1,
        Symbol::Nonterminal(n) => sizes[&n],
    }
}

/// Memoized evaluation sizes of every nonterminal reachable from `start`.
fn subtree_sizes(rules: &BTreeMap<u32, Rhs>, start: Symbol) -> Result<HashMap<u32, u64>, GrammarError> {
    let mut sizes: HashMap<u32, u64> = HashMap::new();
    let Symbol::Nonterminal(root) = start else {
        return Ok(sizes);
    };
    let mut on_path: HashMap<u32, ()> = HashMap::new();
    // (nonterminal, children expanded?)
    let mut stack = vec![(root, false)];
    while let Some((n, expanded)) = stack.pop() {
        if sizes.contains_key(&n) {
            continue;
        }
        let rhs = *rules.get(&n).ok_or(GrammarError::Undefined(n))?;
        if expanded {
            on_path.remove(&n);
            let len = match rhs {
                Rhs::Pair(a, b) => symbol_len(a, &sizes).saturating_add(symbol_len(b, &sizes)),
                Rhs::Power(a, r) => symbol_len(a, &sizes).saturating_mul(r as u64),
            };
            sizes.insert(n, len);
            continue;
        }
        if on_path.insert(n, ()).is_some() {
            return Err(GrammarError::CycleDetected(n));
        }
        stack.push((n, true));
        for child in rhs.children().into_iter().flatten() {
            if let Symbol::Nonterminal(c) = child {
                if on_path.contains_key(&c) {
                    return Err(GrammarError::CycleDetected(c));
                }
                if !sizes.contains_key(&c) {
                    stack.push((c, false));
                }
            }
        }
    }
    Ok(sizes)
}

fn prune_unreachable(rules: &BTreeMap<u32, Rhs>, start: Symbol) -> BTreeMap<u32, Rhs> {
    let mut keep = BTreeMap::new();
    let mut stack = vec![start];
    while let Some(sym) = stack.pop() {
        let Symbol::Nonterminal(n) = sym else { continue };
        if keep.contains_key(&n) {
            continue;
        }
        let rhs = rules[&n];
        keep.insert(n, rhs);
        stack.extend(rhs.children().into_iter().flatten());
    }
    keep
}

/// Substitutes every `c -> a^1` rule by `a`.
fn remove_aliases(
    mut rules: BTreeMap<u32, Rhs>,
    start: Option<Symbol>,
) -> Result<(BTreeMap<u32, Rhs>, Option<Symbol>), GrammarError> {
    let aliases: HashMap<u32, Symbol> = rules
        .iter()
        .filter_map(|(&l, r)| match *r {
            Rhs::Power(a, 1) => Some((l, a)),
            _ => None,
        })
        .collect();
    if aliases.is_empty() {
        return Ok((rules, start));
    }
    let resolve = |mut s: Symbol| -> Result<Symbol, GrammarError> {
        let mut steps = 0;
        while let Symbol::Nonterminal(n) = s {
            match aliases.get(&n) {
                Some(&next) => {
                    steps += 1;
                    if steps > aliases.len() {
                        return Err(GrammarError::CycleDetected(n));
                    }
                    s = next;
                }
                None => break,
            }
        }
        Ok(s)
    };
    rules.retain(|l, _| !aliases.contains_key(l));
    for rhs in rules.values_mut() {
        *rhs = match *rhs {
            Rhs::Pair(a, b) => Rhs::Pair(resolve(a)?, resolve(b)?),
            Rhs::Power(a, r) => Rhs::Power(resolve(a)?, r),
        };
    }
    let start = start.map(resolve).transpose()?;
    Ok((rules, start))
}
