//! Weighted Hilbert function against `a_0 k + a_1` on the football.
//!
//! `cargo run --example riemann_roch`

use orb_bergman::coeffs::{canonical_sequence, CoefficientSequence};
use orb_bergman::models::Model;
use orb_bergman::riemannroch::rr_check;

fn main() -> orb_bergman::Result<()> {
    for (m, t) in [(3, 1), (5, 1), (5, 3)] {
        let model = Model::football(m, t)?;
        let c = canonical_sequence(m, 2);
        let rep = rr_check(&model, &c, 1..=40)?;
        println!("{model}, c = canonical({m}, 2): a0 = {}, a1 = {}, exact from k0 = {:?}", rep.a0, rep.a1, rep.k0);
    }

    let model = Model::football(3, 1)?;
    let c = canonical_sequence(3, 2);
    println!("\nk  sum c_i h0(k+i)  a0 k + a1");
    for row in rr_check(&model, &c, 1..=9)?.rows {
        println!("{:<2} {:<16} {}", row.k, row.weighted_h0, row.predicted);
    }

    let single = CoefficientSequence::from_dense(&[1])?;
    let rep = rr_check(&model, &single, 1..=12)?;
    let diffs: Vec<String> = rep.rows.iter().map(|r| r.difference.to_string()).collect();
    println!("\nunweighted h0 - (k/3 + 1/3) oscillates: {}", diffs.join(" "));
    println!("period of the differences: {:?}", rep.difference_period());
    Ok(())
}
