//! Fit `b_0 k + b_1` to the weighted football kernel and compare with
//! `b_0 = sum c_i`, `b_1 = sum c_i (i + Scal/2)`.
//!
//! `cargo run --example expansion_fit`

use num_rational::BigRational;
use orb_bergman::coeffs::canonical_sequence;
use orb_bergman::expansion::{
    compare, derivative_check, fit_expansion, predicted_coefficients, sample_weighted,
};
use orb_bergman::models::{scalar_curvature, Model, PointSpec, Rho};

fn main() -> orb_bergman::Result<()> {
    let model = Model::football(3, 1)?;
    let c = canonical_sequence(3, 2);
    let ks: Vec<u64> = (20..=200).collect();
    for rho in [Rho::integer(0), Rho::ratio(1, 4), Rho::integer(1), Rho::integer(4)] {
        let point = PointSpec::Football(rho.clone());
        let samples: Vec<(u64, f64)> = sample_weighted(&model, &c, None, &point, &ks)?
            .iter()
            .map(|v| (v.k, v.to_f64()))
            .collect();
        let fit = fit_expansion(&samples, 1, 1)?;
        let pred = predicted_coefficients(&c, 1, &scalar_curvature(&model, &point)?, None);
        let verdict = compare(&fit, &pred);
        println!(
            "rho={rho}: b_hat = ({:.8}, {:.6}), predicted ({}, {}), remainder slope {}, pass {}",
            fit.b_hat[0],
            fit.b_hat[1],
            pred.b0,
            pred.b1,
            fit.remainder_slope,
            verdict.passed()
        );
    }

    let one = BigRational::from_integer(1.into());
    let h = BigRational::new(1.into(), 1000.into());
    let d = derivative_check(&model, &c, &one, &h, &(20..=120).step_by(10).collect::<Vec<_>>())?;
    println!("\nd/drho at rho = 1 (exact centered differences, h = 1/1000):");
    for (k, v) in &d.derivatives {
        println!("  k={k:>3}: {v:.3e}");
    }
    println!("  log-log slope {}", d.slope);
    Ok(())
}
