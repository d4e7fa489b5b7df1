//! Additivity of the minimal output entropy for a depolarizing factor:
//! S_min(Phi_dep x Psi) = S_min(Phi_dep) + S_min(Psi), even though the joint
//! optimizer is free to search over entangled inputs.
//!
//! Run with `cargo run --example smin_additivity`.

use qsa::channels::{depolarizing_channel, DepolarizingParams};
use qsa::entropy_opt::OptimizerConfig;
use qsa::superadd::smin_additivity_check;

fn main() {
    let psi = depolarizing_channel(DepolarizingParams::new(2, 0.3).unwrap()).unwrap();
    println!("Phi = dep(d = 2, p), Psi = dep(d = 2, 0.3)");
    println!("{:>8} {:>14} {:>14} {:>10}", "p", "joint", "sum", "gap");
    for i in 0..=6 {
        let p = i as f64 * 4.0 / 3.0 / 6.0;
        let params = DepolarizingParams::new(2, p).unwrap();
        let cfg = OptimizerConfig::default().with_seed(i as u64);
        let rep = smin_additivity_check(&psi, params, &cfg).unwrap();
        println!(
            "{p:>8.4} {:>14.10} {:>14.10} {:>10.2e}",
            rep.joint, rep.sum, rep.gap
        );
    }
}
