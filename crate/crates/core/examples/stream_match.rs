//! Runs the full streaming matcher on a text with a planted noisy copy of
//! the pattern and prints the positions it reports.
use kedit_stream::matcher::{EditReport, Ensemble, MatcherConfig};
use rand::{Rng, SeedableRng};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let k = 4;
    let pattern: Vec<u32> = (0..3000).map(|_| rng.gen_range(0..4)).collect();
    let mut text: Vec<u32> = (0..20_000).map(|_| rng.gen_range(0..4)).collect();
    let mut noisy = pattern.clone();
    noisy.remove(100);
    noisy[2000] ^= 1;
    noisy.insert(2500, 3);
    text.splice(12_000..12_000, noisy);

    let cfg = MatcherConfig::new((pattern.len() + text.len()) as u64, k).with_seed(1);
    let mut ens = Ensemble::new(&cfg)?;
    for &a in &pattern {
        ens.push_pattern_symbol(a)?;
    }
    ens.end_pattern()?;
    println!("{} copies, phase {:?}", ens.copies().len(), ens.copies()[0].phase());
    for (i, &a) in text.iter().enumerate() {
        if let EditReport::Within(d) = ens.push_text_symbol(a)? {
            println!("position {}: distance {d}", i + 1);
        }
    }
    let state = ens.state_sizes();
    println!("per-copy state without engine: {} bytes", state[0].without_engine());
    Ok(())
}
