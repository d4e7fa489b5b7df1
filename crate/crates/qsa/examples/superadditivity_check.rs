//! Strong superadditivity of the constrained ensemble minimum for a
//! depolarizing factor: for any bipartite state,
//!
//!     H_hat_{Phi x Psi}(rho) >= s_min(Phi_dep) + H_hat_Psi(Tr_H rho).
//!
//! A product state attains equality, which makes it a useful certificate that
//! the optimizer on the left-hand side is tight.
//!
//! Run with `cargo run --example superadditivity_check`.

use qsa::channels::{random_kraus_channel, DepolarizingParams};
use qsa::entropy_opt::OptimizerConfig;
use qsa::qstate::{random_density, tensor_product, BipartiteDims, DensityMatrix, RngSeed};
use qsa::superadd::strong_superadd_check;

fn main() {
    let dims = BipartiteDims::new(2, 2).unwrap();
    let psi = random_kraus_channel(2, 3, RngSeed(7));
    let params = DepolarizingParams::new(2, 0.5).unwrap();
    let cfg = OptimizerConfig {
        restarts: 6,
        ensemble_cap: Some(8),
        ..OptimizerConfig::default()
    }
    .with_seed(1);

    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "state", "lhs", "rhs_dep", "rhs_psi", "margin");
    for s in 0..4u64 {
        let rho = random_density(4, 1 + (s as usize) % 4, RngSeed(10 + s)).unwrap();
        let rep = strong_superadd_check(&psi, &rho, dims, params, &cfg).unwrap();
        println!(
            "{:>10} {:>12.8} {:>12.8} {:>12.8} {:>12.3e}",
            format!("random#{s}"),
            rep.lhs,
            rep.rhs_dep,
            rep.rhs_psi,
            rep.margin
        );
    }

    let rho_h = random_density(2, 2, RngSeed(20)).unwrap();
    let rho_k = random_density(2, 2, RngSeed(21)).unwrap();
    let prod = DensityMatrix::new_unchecked(tensor_product(rho_h.matrix(), rho_k.matrix()));
    let rep = strong_superadd_check(&psi, &prod, dims, params, &cfg).unwrap();
    println!(
        "{:>10} {:>12.8} {:>12.8} {:>12.8} {:>12.3e}",
        "product", rep.lhs, rep.rhs_dep, rep.rhs_psi, rep.margin
    );
    println!();
    println!("the product state's margin collapses to zero: the tensor of the");
    println!("two marginal optima is itself an admissible joint ensemble.");
}
