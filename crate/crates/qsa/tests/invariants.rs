//! Property-based invariants over randomized inputs: state validity, entropy
//! bounds, channel algebra, and the balanced-basis postcondition.

use proptest::prelude::*;

use qsa::channels::{
    apply_channel, depolarizing_apply_affine, depolarizing_channel, random_kraus_channel, Channel,
    DepolarizingParams,
};
use qsa::qstate::{
    balanced_basis, partial_trace, random_density, tensor_product, von_neumann_entropy,
    BipartiteDims, DensityMatrix, RngSeed, TraceSide,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_density_is_valid_and_entropy_in_range(
        d in 2usize..5,
        rank_off in 0usize..4,
        seed in any::<u64>(),
    ) {
        let rank = 1 + rank_off % d;
        let rho = random_density(d, rank, RngSeed(seed)).unwrap();
        // Re-validating exercises the Hermiticity, trace, and PSD checks.
        let rho = DensityMatrix::new(rho.matrix().clone()).unwrap();
        let s = von_neumann_entropy(&rho);
        prop_assert!(s >= 0.0);
        prop_assert!(s <= (d as f64).ln() + 1e-12);
        // A rank-r state cannot carry more than ln r of entropy.
        prop_assert!(s <= (rank as f64).ln() + 1e-9);
    }

    #[test]
    fn depolarizing_kraus_matches_affine_form(
        d in 2usize..4,
        t in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let p = t * DepolarizingParams::max_p(d);
        let params = DepolarizingParams::new(d, p).unwrap();
        let ch = depolarizing_channel(params).unwrap();
        let rho = random_density(d, d, RngSeed(seed)).unwrap();
        let out = apply_channel(&ch, &rho).unwrap();
        let affine = depolarizing_apply_affine(params, rho.matrix());
        prop_assert!((out.matrix() - affine).camax() < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace_and_validity(
        dh in 2usize..4,
        dk in 2usize..4,
        seed in any::<u64>(),
    ) {
        let dims = BipartiteDims::new(dh, dk).unwrap();
        let rho = random_density(dh * dk, dh * dk, RngSeed(seed)).unwrap();
        for side in [TraceSide::OverH, TraceSide::OverK] {
            let marg = partial_trace(&rho, dims, side).unwrap();
            // The constructor inside partial_trace enforces unit trace and
            // positivity; entropy bounds double-check the spectrum.
            let s = von_neumann_entropy(&marg);
            prop_assert!(s >= -1e-12);
            prop_assert!(s <= (marg.dim() as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn balanced_basis_flattens_any_diagonal(
        d in 2usize..5,
        rank_off in 0usize..4,
        seed in any::<u64>(),
        basis_seed in any::<u64>(),
    ) {
        let rank = 1 + rank_off % d;
        let a = random_density(d, rank, RngSeed(seed)).unwrap();
        let basis = balanced_basis(&a, Some(RngSeed(basis_seed)));
        for k in 0..d {
            let e = basis.vector(k);
            let diag = (e.adjoint() * a.matrix() * &e)[(0, 0)].re;
            prop_assert!((diag - 1.0 / d as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn random_kraus_channels_are_channels(
        d in 2usize..4,
        env in 2usize..5,
        seed in any::<u64>(),
    ) {
        let ch = random_kraus_channel(d, env, RngSeed(seed));
        prop_assert!(ch.trace_preservation_deviation() < 1e-10);
        // Re-validating runs the Choi positivity check.
        prop_assert!(Channel::new(ch.kraus().to_vec()).is_ok());
    }

    #[test]
    fn entropy_is_additive_over_tensor_products(
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
    ) {
        let a = random_density(2, 2, RngSeed(seed_a)).unwrap();
        let b = random_density(3, 3, RngSeed(seed_b)).unwrap();
        let joint = DensityMatrix::new(tensor_product(a.matrix(), b.matrix())).unwrap();
        let sum = von_neumann_entropy(&a) + von_neumann_entropy(&b);
        prop_assert!((von_neumann_entropy(&joint) - sum).abs() < 1e-9);
    }
}

proptest! {
    // The bound evaluation is heavier, so fewer cases.
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn king_bound_margin_is_nonnegative(
        t in 0.0f64..1.0,
        rank_off in 0usize..4,
        seed in any::<u64>(),
    ) {
        let d = 2;
        let p = t * DepolarizingParams::max_p(d);
        let params = DepolarizingParams::new(d, p).unwrap();
        let dims = BipartiteDims::new(d, 2).unwrap();
        let rank = 1 + rank_off % 4;
        let rho = random_density(4, rank, RngSeed(seed)).unwrap();
        let psi = random_kraus_channel(2, 2, RngSeed(seed ^ 0xABCD));
        let reports = qsa::superadd::verify_lemma_instance(
            &rho, dims, &psi, params, 2, RngSeed(seed ^ 0x1234),
        ).unwrap();
        for rep in &reports {
            prop_assert!(rep.margin >= -1e-9);
            prop_assert!(rep.marginal_check <= 1e-10);
        }
    }
}
