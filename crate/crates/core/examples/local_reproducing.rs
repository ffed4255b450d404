//! The averaged kernel reproduces weight-k functions up to a cutoff tail that
//! decays like e^{-k R^2 / 4}.
//!
//! `cargo run --release --example local_reproducing`

use num_complex::Complex64;
use orb_bergman::localkernel::{AveragedKernelFlat, QuadratureOptions};
use orb_bergman::models::FlatCyclicModel;

fn main() -> orb_bergman::Result<()> {
    let kav = AveragedKernelFlat::new(FlatCyclicModel::new(2, vec![1])?);
    let x = Complex64::new(0.3, 0.0);
    println!("u = z, |x| = 0.3, cutoff radius 3");
    for k in [5, 11, 21, 41] {
        let chk = kav.verify_reproducing(k, 1, x, 3.0, QuadratureOptions::default())?;
        println!(
            "  k={k:>2}: residual {:.6e} with {} x {} nodes",
            chk.residual, chk.radial_nodes, chk.angular_nodes
        );
    }
    Ok(())
}
