//! Balanced bases: for any density matrix a there is an orthonormal basis in
//! which all diagonal entries of a are exactly 1/d. The construction composes
//! the eigenbasis of a with a discrete Fourier rotation, and the remaining
//! phase freedom yields infinitely many such bases.
//!
//! Run with `cargo run --example balanced_basis`.

use qsa::qstate::{balanced_basis, random_density, RngSeed};

fn main() {
    let d = 3;
    let a = random_density(d, d, RngSeed(1)).unwrap();
    println!("spectrum is generic, yet every sampled basis balances the diagonal:");
    for s in 0..3u64 {
        let basis = balanced_basis(&a, Some(RngSeed(s)));
        print!("basis {s}: diag =");
        for k in 0..d {
            let e = basis.vector(k);
            let diag = (e.adjoint() * a.matrix() * &e)[(0, 0)].re;
            print!(" {diag:.12}");
        }
        println!();
    }
    println!("target value: {:.12}", 1.0 / d as f64);
}
