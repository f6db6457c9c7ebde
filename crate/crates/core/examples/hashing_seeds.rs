//! Derives independent seeds from one master seed and evaluates hash
//! functions and fingerprints with them.
use kedit_stream::hash::{FamilyKind, Fingerprint, HashFamily, SeedTree};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = SeedTree::new(42);
    for i in 0..3 {
        let child = root.child("copy", i);
        let h = HashFamily::sample(child.seed(), FamilyKind::TWise(8), 1 << 20)?;
        println!("copy {i}: seed={:#018x} h(7)={}", child.seed(), h.eval(7));
    }

    let base = root.child("fingerprint", 0).field_element();
    let abc: Vec<u32> = b"abcabc".iter().map(|&c| c as u32).collect();
    let whole = Fingerprint::of_slice(&abc, base);
    let halves = Fingerprint::of_slice(&abc[..3], base).concat(Fingerprint::of_slice(&abc[3..], base));
    let power = Fingerprint::of_slice(&abc[..3], base).repeat(2);
    println!("fingerprints agree: {}", whole == halves && halves == power);
    Ok(())
}
