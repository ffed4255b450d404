//! Exact Bergman kernels on the football `P^1 / (Z/m)`.
//!
//! `cargo run --example football_kernel`

use orb_bergman::bergman::{bergman_value, football_value_f64, weighted_bergman};
use orb_bergman::coeffs::canonical_sequence;
use orb_bergman::models::{h0, section_basis, Model, PointSpec, Rho};

fn main() -> orb_bergman::Result<()> {
    let model = Model::football(3, 1)?;
    let fb = model.as_football()?;

    println!("sections of L^7 and their norms:");
    for e in &section_basis(&model, 7, None)?.entries {
        println!("  z0^{} z1^{}  |s|^2 = {}", e.exponent[0], e.exponent[1], e.norm_sq);
    }
    println!("h0(L^k), k = 0..12: {:?}", (0..12).map(|k| h0(&model, k)).collect::<Result<Vec<_>, _>>()?);

    println!("\nplain B_k at the two orbifold points and at rho = 1:");
    for k in [3, 4, 5, 6] {
        let at = |r: Rho| bergman_value(&model, k, &PointSpec::Football(r)).map(|v| v.to_f64());
        println!(
            "  k={k}: B(0) = {}, B(inf) = {}, B(1) = {:.6}",
            at(Rho::integer(0))?,
            at(Rho::Infinity)?,
            at(Rho::integer(1))?
        );
    }

    let c = canonical_sequence(3, 2);
    println!("\nweighted kernel with c = {c}: exactly 9k + 27 at rho = 0");
    for k in [10, 11, 12] {
        let v = weighted_bergman(&model, &c, k, &PointSpec::Football(Rho::integer(0)))?;
        println!("  k={k}: {}", v.as_exact().expect("exact"));
    }

    // far beyond where binomials fit in f64
    println!("\nB_5000(rho = 1) = {:.6}", football_value_f64(fb, 5000, 1.0));
    Ok(())
}
