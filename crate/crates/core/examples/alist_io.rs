//! Writes a lifted network code to alist, reads it back and recomputes its girth.

use gancc::alist::{read_alist, to_alist_string};
use gancc::codes::{girth, lift, Ensemble, OffsetTable};
use gancc::construction::{assemble_base, example_selections};

fn main() -> gancc::Result<()> {
    let base = assemble_base(&example_selections(), 5)?;
    let n = 37;
    let h = lift(&base, n, Ensemble::LtLdpc, &OffsetTable::product_scheme(&base, n))?;
    let text = to_alist_string(h.matrix());
    println!("{}", text.lines().take(2).collect::<Vec<_>>().join("\n"));
    println!("... ({} lines)", text.lines().count());

    let back = read_alist(text.as_bytes())?;
    println!("round trip identical: {}", &back == h.matrix());
    println!("girth {}", girth(&back));
    Ok(())
}
