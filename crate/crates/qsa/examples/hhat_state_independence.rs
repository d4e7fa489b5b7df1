//! The constrained ensemble minimum of the depolarizing channel does not
//! depend on the average state: for every input it collapses to the minimal
//! output entropy.
//!
//! Run with `cargo run --example hhat_state_independence`.

use qsa::channels::{depolarizing_channel, DepolarizingParams};
use qsa::entropy_opt::{h_hat_dep_closed, h_hat_numeric, OptimizerConfig};
use qsa::qstate::{random_density, RngSeed};

fn main() {
    let d = 3;
    let params = DepolarizingParams::new(d, 0.6).unwrap();
    let ch = depolarizing_channel(params).unwrap();
    let closed = h_hat_dep_closed(params).unwrap();
    println!("d = {d}, p = {}, closed form = {closed:.10} nats", params.p);
    println!("{:>6} {:>6} {:>14} {:>10}", "state", "rank", "numeric", "diff");
    for s in 0..8u64 {
        let rank = 1 + (s as usize) % d;
        let rho = random_density(d, rank, RngSeed(s)).unwrap();
        let cfg = OptimizerConfig::default().with_seed(100 + s);
        let res = h_hat_numeric(&ch, &rho, &cfg).unwrap();
        println!(
            "{s:>6} {rank:>6} {:>14.10} {:>10.2e}",
            res.value,
            (res.value - closed).abs()
        );
    }
}
