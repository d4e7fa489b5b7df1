//! Entropy lower bound for a depolarizing factor tensored with an arbitrary
//! channel. For a bipartite state rho, a basis balanced for its H-marginal
//! yields normalized conditional states rho_s, and
//!
//!     S((Phi_dep x Psi)(rho)) >= s_min(Phi_dep) + (1/d) sum_s S(Psi(rho_s)).
//!
//! Run with `cargo run --example lemma_king_bound`.

use qsa::channels::{random_kraus_channel, DepolarizingParams};
use qsa::qstate::{random_density, BipartiteDims, RngSeed};
use qsa::superadd::verify_lemma_instance;

fn main() {
    let dims = BipartiteDims::new(2, 3).unwrap();
    let psi = random_kraus_channel(3, 3, RngSeed(42));
    let params = DepolarizingParams::new(2, 0.75).unwrap();

    println!("d = 2, d_K = 3, p = 0.75, Psi = random Kraus channel");
    println!(
        "{:>6} {:>6} {:>12} {:>12} {:>12} {:>12}",
        "state", "basis", "lhs", "bound", "margin", "marg_dev"
    );
    for s in 0..4u64 {
        let rho = random_density(6, 1 + (s as usize) % 4, RngSeed(100 + s)).unwrap();
        let reports =
            verify_lemma_instance(&rho, dims, &psi, params, 3, RngSeed(200 + s)).unwrap();
        for (b, rep) in reports.iter().enumerate() {
            println!(
                "{s:>6} {b:>6} {:>12.8} {:>12.8} {:>12.3e} {:>12.3e}",
                rep.lhs, rep.bound, rep.margin, rep.marginal_check
            );
        }
    }
    println!();
    println!("margins stay nonnegative; the conditional states always average");
    println!("back to the K-marginal of rho (marg_dev column).");
}
