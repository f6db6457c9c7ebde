//! Streams a pattern and a text of large symbols through the reference
//! mismatch engine and queries each aligned window.
use kedit_stream::hash::SeedTree;
use kedit_stream::mismatch::{MismatchEngine, ReferenceEngine, WindowQueryResult};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let chunk = 4;
    let mut eng = ReferenceEngine::new(chunk, &SeedTree::new(5));
    let pattern: Vec<u128> = (0..8).map(|i| 1000 + i).collect();
    for &s in &pattern {
        eng.feed_pattern(s)?;
    }
    eng.end_pattern()?;

    let mut text: Vec<u128> = vec![7, 7, 7, 7];
    text.extend(&pattern);
    text[9] = 1;
    for (i, &s) in text.iter().enumerate() {
        eng.feed_text(s)?;
        if (i + 1) % chunk != 0 || i + 1 < pattern.len() {
            continue;
        }
        match eng.query_window(2)? {
            WindowQueryResult::Within(w) => {
                let diffs: Vec<u64> = eng.recover_mismatches()?.iter().map(|r| r.pos).collect();
                println!("window ending at {}: {w} mismatches at {diffs:?}", i + 1);
            }
            WindowQueryResult::OverK => println!("window ending at {}: more than 2 mismatches", i + 1),
        }
    }
    Ok(())
}
