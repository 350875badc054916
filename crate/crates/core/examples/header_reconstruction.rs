//! Five users, the topology of the running example and its hand-picked
//! selections: assemble the base matrix, ship bitmap headers, rebuild it.

use gancc::construction::{assemble_base, example_selections, example_topology, header_encode, reconstruct_base};

fn main() -> gancc::Result<()> {
    let m = 5;
    let topo = example_topology();
    println!("links (u -> v): {:?}", topo.links());

    let selections = example_selections();
    let base = assemble_base(&selections, m)?;
    println!("base matrix:");
    for row in base.to_dense() {
        println!("  {:?}", row);
    }

    let headers = selections
        .iter()
        .map(|s| header_encode(&s.selected, m))
        .collect::<gancc::Result<Vec<_>>>()?;
    for (s, h) in selections.iter().zip(&headers) {
        println!("relay {} header 0x{h:x} ({:?})", s.relay, s.selected);
    }
    let rebuilt = reconstruct_base(&headers, m)?;
    println!("destination rebuilds the same matrix: {}", rebuilt == base);
    Ok(())
}
