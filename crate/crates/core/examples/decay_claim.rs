//! `k^s |(eta - 1)^s eta^k|` stays bounded as k grows.
//!
//! `cargo run --example decay_claim`

use orb_bergman::localkernel::AveragedKernelFlat;
use orb_bergman::models::FlatCyclicModel;

fn main() -> orb_bergman::Result<()> {
    let grid: Vec<Vec<f64>> = (0..=400).map(|j| vec![j as f64 / 200.0]).collect();
    let ks: Vec<u64> = vec![10, 20, 50, 100, 200, 400];
    for m in [2, 3, 5] {
        let kav = AveragedKernelFlat::new(FlatCyclicModel::new(m, vec![1])?);
        for s in 1..=3 {
            let rep = kav.decay_check(s, 0, 1, &grid, &ks)?;
            let vals: Vec<String> = rep.per_k.iter().map(|(_, v)| format!("{v:.4}")).collect();
            println!("m={m} s={s}: {} (bound {:.4})", vals.join(" "), rep.bound);
        }
    }
    Ok(())
}
