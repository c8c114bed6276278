//! Overlap poset of the default five-coin space-time game, checked against
//! the grid oracle.

use stratkit::spaces::coin::coin_spacing;
use stratkit::spaces::{overlap_poset, overlap_poset_bruteforce, CoinConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = CoinConfig::default5();
    for c in &cfg.coins {
        println!("coin {} at t={}, y={}", c.label, c.t, c.y);
    }
    let o = overlap_poset(&cfg)?;
    println!("{} overlap strata, at most {} coins per run", o.len(), cfg.max_jointly_collectible());
    for (name, apex) in o.poset.elements().iter().zip(&o.apexes) {
        println!("  {name:<10} apex ({:.2}, {:.2})", apex.t, apex.y);
    }
    let oracle = overlap_poset_bruteforce(&cfg, coin_spacing(&cfg) / 20.0)?;
    println!("grid oracle agrees: {}", oracle.element_names() == o.element_names());
    print!("{}", o.poset.to_dot("overlap"));
    Ok(())
}
