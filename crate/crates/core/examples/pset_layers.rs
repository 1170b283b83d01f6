//! Correction exponents and boundary-layer schedule for two parameter pairs:
//! γ = 2, α = 1/3 in exact rationals and γ = √3, α = √3/4 in floats.

use hartree_cascade::params::{ModelParams, Real};
use hartree_cascade::pset::{build_pset, layer_schedule};

fn main() -> hartree_cascade::Result<()> {
    let s3 = 3f64.sqrt();
    let cases = [
        ("gamma = 2, alpha = 1/3", ModelParams::new(4, Real::ratio(2, 1), Real::ratio(1, 3), 1.0)?),
        ("gamma = sqrt3, alpha = sqrt3/4", ModelParams::new(4, s3, s3 / 4.0, 1.0)?),
    ];
    for (name, p) in cases {
        let set = build_pset(&p);
        println!("{name}: N = {} (exact: {})", set.n, set.exact);
        for e in &set.entries[1..] {
            let q = e.p.exact.map(|q| format!(" = {}/{}", q.numer(), q.denom())).unwrap_or_default();
            println!("  p = {:.15}{q}  {:?}  from {:?}", e.p.value, e.class, e.provenance);
        }
        println!("  equ tags {:?}, closure violations {:?}", set.equ_tags, set.closure_violations());
        let t = layer_schedule(&p, 4);
        println!("  first layer {:.6}, final layer {:.6}, tau0 ~ h^{:.6}", t.first_layer, t.final_layer, t.initial_tau_exponent);
        for r in &t.rows {
            println!("    J = {}: 1 - t ~ eps^{:.6}, tau ~ h^{:.6}", r.j, r.exponent, r.tau_exponent);
        }
    }
    Ok(())
}
