//! Bounded edit distance, best-suffix distance and the symbol-at-a-time
//! matcher used for short patterns.
use kedit_stream::edit::{ed_bounded, ed_suffix_min, FallbackMatcher, GrowingEd};

fn syms(s: &str) -> Vec<u32> {
    s.bytes().map(u32::from).collect()
}

fn main() {
    println!(
        "ed(kitten, sitting) within 3: {:?}",
        ed_bounded(&syms("kitten"), &syms("sitting"), 3)
    );
    println!(
        "ed(kitten, sitting) within 2: {:?}",
        ed_bounded(&syms("kitten"), &syms("sitting"), 2)
    );
    println!(
        "best suffix of ababab vs abb: {:?}",
        ed_suffix_min(&syms("ababab"), &syms("abb"), 2)
    );

    let mut grow = GrowingEd::new(syms("banana"), 2);
    for c in syms("bandana") {
        grow.push(c);
    }
    println!("growing bandana vs banana: {:?}", grow.result());

    let text = "a banana, a bandana and a cabana";
    let mut m = FallbackMatcher::new(syms("banana"), 1);
    let hits: Vec<usize> = text
        .bytes()
        .enumerate()
        .filter(|&(_, c)| m.step(c as u32).value().is_some())
        .map(|(i, _)| i + 1)
        .collect();
    println!("positions within 1 edit of banana: {hits:?}");
}
