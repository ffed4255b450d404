//! Residue-class moment condition and its root-of-unity form.
//!
//! `cargo run --example coefficient_conditions`

use orb_bergman::coeffs::{
    canonical_sequence, divisors, root_order_at_unity, satisfies_condition, CoefficientSequence,
};

fn main() -> orb_bergman::Result<()> {
    let m = 3;
    let candidates = [
        ("canonical q=2", canonical_sequence(m, 2)),
        ("single {0:1}", CoefficientSequence::from_dense(&[1])?),
        ("flat {1,1,1}", CoefficientSequence::from_dense(&[1, 1, 1])?),
        ("{0:1, 2:1}", CoefficientSequence::from_dense(&[1, 0, 1])?),
    ];
    for (name, c) in &candidates {
        let report = satisfies_condition(c, m, 3);
        println!("{name}: c = {c}");
        for row in &report.rows {
            let sums: Vec<String> = row.residue_sums.iter().map(ToString::to_string).collect();
            println!("  p={} sums=[{}] balanced={}", row.p, sums.join(", "), row.balanced);
        }
        println!(
            "  root order at nontrivial {m}-th roots: {}, first failing moment: {:?}",
            root_order_at_unity(c, m),
            report.first_failing_moment()
        );
    }

    // the condition for m implies it for every divisor of m
    let c = canonical_sequence(6, 2);
    for d in divisors(6) {
        println!("m=6 canonical q=2, divisor {d}: holds to p=1: {}", satisfies_condition(&c, d, 1).holds);
    }
    Ok(())
}
