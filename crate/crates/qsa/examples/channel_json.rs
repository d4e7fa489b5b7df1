//! Channel plumbing: Kraus completeness, the Choi matrix test for complete
//! positivity, the sharp endpoint of the depolarizing parameter range, and
//! lossless JSON round-tripping of a channel.
//!
//! Run with `cargo run --example channel_json`.

use qsa::channels::{
    choi_of_map, depolarizing_apply_affine, depolarizing_channel, random_kraus_channel, Channel,
    DepolarizingParams,
};
use qsa::qstate::{hermitian_eigenvalues, RngSeed};

fn min_eig(m: &qsa::qstate::CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

fn main() {
    let ch = random_kraus_channel(3, 3, RngSeed(4));
    println!(
        "random Kraus channel: sum K^dag K deviates from I by {:.2e}",
        ch.trace_preservation_deviation()
    );
    println!("Choi minimum eigenvalue: {:+.3e}", min_eig(&ch.choi()));

    let json = ch.to_json().to_string();
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    let back = Channel::from_json(&parsed).unwrap();
    let mut max_dev = 0.0f64;
    for (a, b) in ch.kraus().iter().zip(back.kraus()) {
        max_dev = max_dev.max((a - b).camax());
    }
    println!("JSON round-trip deviation: {max_dev:.2e} ({} bytes)", json.len());
    println!();

    let d = 2;
    let max_p = DepolarizingParams::max_p(d);
    println!("depolarizing CP range endpoint at d = {d}: p_max = {max_p:.6}");
    for p in [max_p - 0.01, max_p, max_p + 0.01] {
        let params = DepolarizingParams::new_unchecked(d, p);
        let choi = choi_of_map(d, |m| depolarizing_apply_affine(params, m));
        println!("  p = {p:.6}: Choi min eigenvalue {:+.3e}", min_eig(&choi));
    }
    println!();

    let dep = depolarizing_channel(DepolarizingParams::new(2, 0.5).unwrap()).unwrap();
    println!(
        "dep(2, 0.5) as Kraus operators: {} operators, completeness {:.2e}",
        dep.kraus().len(),
        dep.trace_preservation_deviation()
    );
}
