//! Exact reference answers: the smallest edit distance between the pattern
//! and any substring ending at each text position.
use kedit_stream::oracle::{oracle_all_positions, DEFAULT_BUDGET};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = b"needle";
    let t = b"haystack with a neddle and a needle in it";
    let row = oracle_all_positions(p, t, DEFAULT_BUDGET)?;
    for (i, d) in row.iter().enumerate().filter(|&(_, &d)| d <= 1) {
        println!(
            "{:>3} {d} ...{}",
            i + 1,
            String::from_utf8_lossy(&t[i.saturating_sub(7)..=i])
        );
    }
    println!("{}", oracle_all_positions(&[0u8; 100], &[0u8; 100], 1000).unwrap_err());
    Ok(())
}
