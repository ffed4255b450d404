//! Polynomially weighted kernel `sum_i c_i (k + i) B_{k+i}`.
//!
//! `cargo run --example gamma_weighting`

use num_rational::BigRational;
use orb_bergman::bergman::{weighted_bergman_gamma, HomogeneousPoly};
use orb_bergman::coeffs::canonical_sequence;
use orb_bergman::expansion::{fit_expansion, predicted_coefficients, sample_weighted, GammaWeights};
use orb_bergman::models::{Model, PointSpec, Rho};

fn main() -> orb_bergman::Result<()> {
    let model = Model::football(3, 1)?;
    let c = canonical_sequence(3, 2);
    let gamma = HomogeneousPoly::k_plus_i();
    for k in [3, 6, 9] {
        let v = weighted_bergman_gamma(&model, &c, &gamma, k, &PointSpec::Football(Rho::integer(0)))?;
        println!("k={k}: {} (9k^2 + 45k + 72 = {})", v.as_exact().expect("exact"), 9 * k * k + 45 * k + 72);
    }
    let ks: Vec<u64> = (20..=200).collect();
    let samples: Vec<(u64, f64)> = sample_weighted(&model, &c, Some(&gamma), &PointSpec::Football(Rho::integer(1)), &ks)?
        .iter()
        .map(|v| (v.k, v.to_f64()))
        .collect();
    let fit = fit_expansion(&samples, 2, 2)?;
    let pred = predicted_coefficients(&c, 1, &BigRational::from_integer(2.into()), Some(&GammaWeights::from_poly(&gamma)));
    println!("rho=1 fit: {:?}, predicted ({}, {})", fit.b_hat, pred.b0, pred.b1);
    Ok(())
}
