//! Minimal output entropy of the depolarizing channel: multi-start sphere
//! optimization against the exact closed form, across the full range of the
//! mixing parameter.
//!
//! Run with `cargo run --example smin_depolarizing`.

use qsa::channels::{depolarizing_channel, DepolarizingParams};
use qsa::entropy_opt::{s_min_dep_closed, s_min_numeric, OptimizerConfig};

fn main() {
    for d in [2usize, 3] {
        let max_p = DepolarizingParams::max_p(d);
        println!("d = {d}, valid range 0 <= p <= {max_p:.6}");
        println!("{:>8} {:>14} {:>14} {:>10}", "p", "closed", "numeric", "diff");
        let mut ps: Vec<f64> = (0..=5).map(|i| i as f64 / 5.0).collect();
        ps.push(max_p);
        for (i, &p) in ps.iter().enumerate() {
            let params = DepolarizingParams::new(d, p).unwrap();
            let closed = s_min_dep_closed(params).unwrap();
            let ch = depolarizing_channel(params).unwrap();
            let cfg = OptimizerConfig::default().with_seed(i as u64);
            let res = s_min_numeric(&ch, &cfg);
            println!(
                "{p:>8.4} {closed:>14.10} {:>14.10} {:>10.2e}",
                res.value,
                (res.value - closed).abs()
            );
        }
        println!();
    }
}
