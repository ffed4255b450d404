//! Without the moment condition the weighted kernel keeps a period-m
//! oscillation whose size grows like k^{n-p}.
//!
//! `cargo run --example necessity_probe`

use orb_bergman::coeffs::{canonical_sequence, satisfies_condition, CoefficientSequence};
use orb_bergman::expansion::periodicity_probe;
use orb_bergman::models::{Model, PointSpec, Rho};

fn main() -> orb_bergman::Result<()> {
    let model = Model::football(3, 1)?;
    let at0 = PointSpec::Football(Rho::integer(0));
    let ks: Vec<u64> = (10..=200).collect();
    let cases = [
        ("{0:1}", CoefficientSequence::from_dense(&[1])?),
        ("{0:1,1:1,2:1}", CoefficientSequence::from_dense(&[1, 1, 1])?),
        ("canonical(3,2)", canonical_sequence(3, 2)),
    ];
    for (name, c) in &cases {
        let cond = satisfies_condition(c, 3, 1);
        let rep = periodicity_probe(&model, c, &at0, &ks)?;
        println!(
            "{name}: first failing moment {:?}, period {:?}, amplitude {:.3}, growth exponent {:?}",
            cond.first_failing_moment(),
            rep.period,
            rep.amplitude,
            rep.growth_exponent
        );
    }
    Ok(())
}
