//! Encodes block grammars as fixed-width vectors, decodes them back and shows
//! that a corrupted coordinate is detected.
use kedit_stream::decompose::{DecompParams, Decomposer};
use kedit_stream::encode::{decode, encode, EncParams};
use kedit_stream::hash::SeedTree;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seeds = SeedTree::new(3);
    let dec = Decomposer::new(DecompParams::new(1 << 16, 1, seeds.child("decompose", 0)))?;
    let text: Vec<u32> = (0..2000u64)
        .map(|i| ((i * i * 2654435761) >> 7) as u32 % 26 + 97)
        .collect();
    let blocks = dec.decompose_batch(&text).grammars;

    let ep = EncParams::new(2 * dec.params().size_cap, 1 << 16, &seeds.child("encode", 0));
    println!(
        "{} blocks, width {}, tag bits {}",
        blocks.len(),
        ep.width(),
        ep.alpha_bits()
    );
    for g in &blocks {
        assert_eq!(&decode(&encode(g, &ep)?, &ep)?, g);
    }
    println!("all blocks round-trip");

    let mut e = encode(&blocks[0], &ep)?;
    e[3] ^= 1 << 70;
    println!("corrupted: {}", decode(&e, &ep).unwrap_err());
    Ok(())
}
