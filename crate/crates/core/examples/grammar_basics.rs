//! Builds a small straight-line grammar by hand, evaluates it, takes a
//! suffix and prints the canonical form.
use kedit_stream::grammar::{Grammar, Rhs, Symbol};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    use Symbol::{Nonterminal as N, Terminal as T};
    // X1 -> a b, X2 -> X1^4, X3 -> X2 c
    let g = Grammar::new(
        Some(N(3)),
        [
            (1, Rhs::Pair(T(b'a' as u32), T(b'b' as u32))),
            (2, Rhs::Power(N(1), 4)),
            (3, Rhs::Pair(N(2), T(b'c' as u32))),
        ],
    )?;
    let show = |s: Vec<u32>| s.into_iter().map(|c| c as u8 as char).collect::<String>();
    println!("rules={} length={}", g.size(), g.eval_size());
    println!("eval   = {}", show(g.to_symbols()?));
    let tail = g.suffix(6)?;
    println!("suffix = {}", show(tail.to_symbols()?));
    println!("canonical:\n{}", g.canonicalize().dump());
    Ok(())
}
