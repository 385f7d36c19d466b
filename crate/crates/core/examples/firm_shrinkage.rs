//! The scalar MCP proximal map (firm shrinkage) next to soft thresholding.
//!
//! cargo run --example firm_shrinkage -- [w] [zeta]

use firmlogit::{Mcp, WeaklyConvex};

fn main() -> firmlogit::Result<()> {
    let mut args = std::env::args().skip(1);
    let w: f64 = args.next().map_or(1.0, |a| a.parse().expect("w"));
    let zeta: f64 = args.next().map_or(0.25, |a| a.parse().expect("zeta"));
    let mcp = Mcp::new(zeta)?;
    let l1 = Mcp::new(0.0)?;
    // rejects w ζ ≥ 1/2 before printing anything
    mcp.check_prox_weight(w)?;

    println!("# w = {w}, zeta = {zeta}, kink 1/(2 zeta) = {}", mcp.kink());
    println!("v,firm,soft,penalty");
    for i in -40..=40 {
        let v = 0.1 * f64::from(i);
        println!("{v},{},{},{}", mcp.prox(v, w)?, l1.prox(v, w)?, mcp.value(v));
    }
    Ok(())
}
