//! Splits a stream into content-defined blocks, emitting each block once it
//! can no longer change, and checks the result against batch decomposition.
use kedit_stream::decompose::{DecompParams, Decomposer};
use kedit_stream::hash::SeedTree;
use rand::{Rng, SeedableRng};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let x: Vec<u32> = (0..20_000).map(|_| rng.gen_range(0..4)).collect();

    let dec = Decomposer::new(DecompParams::new(1 << 20, 2, SeedTree::new(9)))?;
    let p = dec.params();
    println!(
        "beta={} lookahead={} lookbehind={} rwin={}",
        p.beta, p.lookahead, p.lookbehind, p.rwin
    );

    let mut tail = dec.stream();
    let mut lens = Vec::new();
    for (i, &a) in x.iter().enumerate() {
        for b in tail.push(a, &dec) {
            if b.serial <= 5 {
                println!(
                    "block {} final at position {}: {} symbols, {} rules",
                    b.serial,
                    i + 1,
                    b.symbols.len(),
                    b.grammar.size()
                );
            }
            lens.push(b.symbols.len());
        }
    }
    let batch = dec.decompose_batch(&x);
    let mean = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
    println!(
        "{} final blocks plus {} still open, mean length {mean:.1}, batch has {}",
        lens.len(),
        tail.block_count(),
        batch.grammars.len()
    );
    Ok(())
}
