//! Walks the strategy space: counts, a few encodings and the decoded
//! meta-genome of a hand-picked point.

use metade::meta::decode_params;
use metade::strategy::CrossoverScheme;
use metade::{decode_strategy_name, encode_strategy, Strategy};

fn main() -> metade::Result<()> {
    let all: Vec<Strategy> = Strategy::all().collect();
    let directional = all.iter().filter(|s| s.is_directional()).count();
    println!("{} strategies, {directional} directional", all.len());
    for scheme in CrossoverScheme::ALL {
        let n = all.iter().filter(|s| s.crossover == scheme).count();
        println!("  {:>5}: {n}", scheme.token());
    }

    for name in ["DE/rand/1/bin", "DE/current-to-pbest/1/bin", "DE/current-to-rand/1", "best-to-rand/3/exp"] {
        let (bl, br, dn, cs) = encode_strategy(name)?.codes();
        println!("{name:<28} -> ({bl}, {br}, {dn}, {cs}) -> {}", decode_strategy_name(bl, br, dn, cs)?);
    }

    // Continuous genome as the evolver sees it.
    let cfg = decode_params(&[0.42, 0.91, 4.7, 2.2, 1.0, 3.99]);
    println!("genome decodes to {cfg}");
    Ok(())
}
