//! Flat quotient `C^n / (Z/m)`: monomial series, closed form and group average.
//!
//! `cargo run --example flat_averaged_kernel`

use num_complex::Complex64;
use orb_bergman::bergman::{bergman_value, bergman_value_closed_flat, weighted_bergman};
use orb_bergman::coeffs::canonical_sequence;
use orb_bergman::localkernel::AveragedKernelFlat;
use orb_bergman::models::{FlatCyclicModel, Model, PointSpec};

fn main() -> orb_bergman::Result<()> {
    let model = Model::flat(4, vec![1, 3])?;
    let kav = AveragedKernelFlat::new(FlatCyclicModel::new(4, vec![1, 3])?);
    let moduli = [0.4, 0.7];
    let x: Vec<Complex64> = moduli.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    let phi: f64 = moduli.iter().map(|r| r * r).sum();

    println!("{model} at |x| = {moduli:?}");
    for k in [1, 2, 5, 10, 20] {
        let series = bergman_value(&model, k, &PointSpec::Flat(moduli.to_vec()))?;
        let closed = bergman_value_closed_flat(&model, k, &x)?;
        let averaged = kav.averaged_kernel(k, &x, &x)? * (-(k as f64) * phi).exp();
        println!(
            "  k={k:>2}: series {:.12e} (+- {:.1e}), closed {:.12e}, averaged {:.12e}",
            series.to_f64(),
            series.err_bound(),
            closed.to_f64(),
            averaged.re
        );
    }

    let c = canonical_sequence(4, 3);
    println!("\nat the origin, c = canonical(4, 3) gives sum_i c_i (k + i)^2 exactly:");
    for k in 1..=6 {
        let v = weighted_bergman(&model, &c, k, &PointSpec::flat_origin(2))?;
        println!("  k={k}: {}", v.as_exact().expect("exact at the origin"));
    }
    Ok(())
}
