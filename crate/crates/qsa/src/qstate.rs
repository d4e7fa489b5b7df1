//! Dense complex matrix and quantum-state algebra: tensor products, partial
//! traces, von Neumann entropy, validated density operators, seeded random
//! sampling, and the balanced-basis construction used by the entropy bound.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{QsaError, Result};

/// Dense complex matrix, the carrier for all operators in this crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector.
pub type CVector = DVector<Complex64>;

/// Hermiticity / trace tolerance for density-matrix validation.
pub const HERM_TOL: f64 = 1e-10;
/// Per-dimension slack allowed on the smallest eigenvalue.
pub const PSD_SLACK: f64 = 1e-10;
/// Eigenvalues below this contribute zero to the entropy.
pub const EIG_FLOOR: f64 = 1e-15;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Deterministic seed for all sampling operations. Identical seeds produce
/// identical sample sequences; `stream` derives independent substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Derive an independent substream seed (splitmix64 finalizer over the pair).
    pub fn stream(self, idx: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(idx.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            .wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }

    pub fn rng(self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.0)
    }
}

/// Dimensions of a bipartite space H ⊗ K.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteDims {
    pub dim_h: usize,
    pub dim_k: usize,
}

impl BipartiteDims {
    pub fn new(dim_h: usize, dim_k: usize) -> Result<Self> {
        if dim_h < 1 || dim_k < 1 {
            return Err(QsaError::DimensionMismatch(
                "bipartite dimensions must be >= 1".into(),
            ));
        }
        Ok(BipartiteDims { dim_h, dim_k })
    }

    pub fn total(&self) -> usize {
        self.dim_h * self.dim_k
    }
}

/// Which factor of H ⊗ K a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSide {
    OverH,
    OverK,
}

/// Validated d×d density operator: Hermitian, unit trace, positive
/// semidefinite within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(QsaError::NotADensityMatrix(format!(
                "matrix is {}x{}, expected square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let dim = mat.nrows();
        let herm_dev = (&mat - mat.adjoint()).camax();
        if herm_dev > HERM_TOL {
            return Err(QsaError::NotADensityMatrix(format!(
                "Hermiticity deviation {herm_dev:.3e}"
            )));
        }
        let trace_dev = (mat.trace() - c(1.0, 0.0)).norm();
        if trace_dev > HERM_TOL {
            return Err(QsaError::NotADensityMatrix(format!(
                "trace deviation {trace_dev:.3e}"
            )));
        }
        let min_eig = hermitian_eigenvalues(&mat)
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_SLACK * dim as f64 {
            return Err(QsaError::NotADensityMatrix(format!(
                "minimum eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(DensityMatrix { dim, mat })
    }

    /// Construct without validation. Caller guarantees the invariants.
    pub fn new_unchecked(mat: CMatrix) -> Self {
        let dim = mat.nrows();
        DensityMatrix { dim, mat }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mat = CMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0);
        DensityMatrix { dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Eigendecomposition sorted by descending eigenvalue with a deterministic
    /// tie-break. Returns (eigenvalues, eigenvectors as columns).
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        hermitian_eig(&self.mat)
    }
}

/// Unit vector in C^d.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dim: usize,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(QsaError::NotADensityMatrix(format!(
                "pure-state norm {norm} deviates from 1"
            )));
        }
        Ok(PureState {
            dim: amplitudes.len(),
            amplitudes,
        })
    }

    /// Normalize an arbitrary nonzero vector.
    pub fn from_vector(v: CVector) -> Self {
        let n = v.norm();
        PureState {
            dim: v.len(),
            amplitudes: v / c(n, 0.0),
        }
    }

    pub fn basis_state(dim: usize, idx: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[idx] = c(1.0, 0.0);
        PureState {
            dim,
            amplitudes: v,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn projector(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::new_unchecked(m)
    }
}

/// d pairwise-orthogonal unit vectors, stored as the columns of a unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    dim: usize,
    vectors: CMatrix,
}

impl OrthonormalBasis {
    pub fn new(vectors: CMatrix) -> Result<Self> {
        if vectors.nrows() != vectors.ncols() {
            return Err(QsaError::DimensionMismatch(
                "basis matrix must be square".into(),
            ));
        }
        let dim = vectors.nrows();
        let gram_dev = (vectors.adjoint() * &vectors - CMatrix::identity(dim, dim)).camax();
        if gram_dev > 1e-10 {
            return Err(QsaError::NotAChannel(format!(
                "Gram matrix deviates from identity by {gram_dev:.3e}"
            )));
        }
        Ok(OrthonormalBasis { dim, vectors })
    }

    pub fn computational(dim: usize) -> Self {
        OrthonormalBasis {
            dim,
            vectors: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unitary whose columns are the basis vectors.
    pub fn as_matrix(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, s: usize) -> CVector {
        self.vectors.column(s).into_owned()
    }
}

/// Kronecker product with index convention (i·dim_b + k, j·dim_b + l).
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Tr_H or Tr_K of a bipartite density matrix.
pub fn partial_trace(
    rho: &DensityMatrix,
    dims: BipartiteDims,
    side: TraceSide,
) -> Result<DensityMatrix> {
    let m = partial_trace_raw(rho.matrix(), dims, side)?;
    Ok(DensityMatrix::new_unchecked(m))
}

/// Partial trace of an arbitrary (not necessarily normalized) operator.
pub fn partial_trace_raw(m: &CMatrix, dims: BipartiteDims, side: TraceSide) -> Result<CMatrix> {
    let (dh, dk) = (dims.dim_h, dims.dim_k);
    if m.nrows() != dh * dk || m.ncols() != dh * dk {
        return Err(QsaError::DimensionMismatch(format!(
            "operator is {}x{}, expected {}x{}",
            m.nrows(),
            m.ncols(),
            dh * dk,
            dh * dk
        )));
    }
    match side {
        // Tr_H: sum over the H index, output on K.
        TraceSide::OverH => {
            let mut out = CMatrix::zeros(dk, dk);
            for i in 0..dh {
                for k in 0..dk {
                    for l in 0..dk {
                        out[(k, l)] += m[(i * dk + k, i * dk + l)];
                    }
                }
            }
            Ok(out)
        }
        // Tr_K: sum over the K index, output on H.
        TraceSide::OverK => {
            let mut out = CMatrix::zeros(dh, dh);
            for k in 0..dk {
                for i in 0..dh {
                    for j in 0..dh {
                        out[(i, j)] += m[(i * dk + k, j * dk + k)];
                    }
                }
            }
            Ok(out)
        }
    }
}

/// x ln x with the continuous extension 0 ln 0 = 0.
#[inline]
pub fn xlnx(x: f64) -> f64 {
    if x < EIG_FLOOR {
        0.0
    } else {
        x * x.ln()
    }
}

/// Von Neumann entropy −Tr ρ ln ρ in nats, clamped to [0, ln d].
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&hermitian_eigenvalues(rho.matrix())).min((rho.dim() as f64).ln())
}

/// −Σ λ ln λ over a spectrum, clamped below at 0.
pub fn entropy_of_spectrum(eigs: &[f64]) -> f64 {
    let s: f64 = eigs.iter().map(|&l| -xlnx(l)).sum();
    s.max(0.0)
}

/// Eigenvalues of a Hermitian matrix (unsorted).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect()
}

/// Full Hermitian eigendecomposition with deterministic ordering: descending
/// eigenvalue, ties broken by lexicographic comparison of the rounded
/// eigenvector entries. Returns (eigenvalues, eigenvector columns).
pub fn hermitian_eig(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    let round = |x: f64| (x * 1e9).round();
    order.sort_by(|&a, &b| {
        let la = eig.eigenvalues[a];
        let lb = eig.eigenvalues[b];
        lb.partial_cmp(&la).unwrap().then_with(|| {
            for r in 0..n {
                let ea = eig.eigenvectors[(r, a)];
                let eb = eig.eigenvectors[(r, b)];
                let cmp = round(ea.re)
                    .partial_cmp(&round(eb.re))
                    .unwrap()
                    .then(round(ea.im).partial_cmp(&round(eb.im)).unwrap());
                if cmp != std::cmp::Ordering::Equal {
                    return cmp;
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Matrix of independent standard complex Gaussians (re and im each N(0,1)).
pub fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha12Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Random density matrix GG†/Tr(GG†) with G a dim×rank complex Ginibre matrix.
pub fn random_density(dim: usize, rank: usize, seed: RngSeed) -> Result<DensityMatrix> {
    if rank < 1 || rank > dim {
        return Err(QsaError::BadRank(format!(
            "rank {rank} outside [1, {dim}]"
        )));
    }
    let mut rng = seed.rng();
    let g = ginibre(dim, rank, &mut rng);
    let gg = &g * g.adjoint();
    let tr = gg.trace().re;
    Ok(DensityMatrix::new_unchecked(gg / c(tr, 0.0)))
}

/// Haar-distributed random unitary: QR of a Ginibre matrix with the phases of
/// the triangular factor's diagonal absorbed into Q.
pub fn random_unitary(dim: usize, seed: RngSeed) -> CMatrix {
    let mut rng = seed.rng();
    haar_unitary(dim, &mut rng)
}

pub fn haar_unitary(dim: usize, rng: &mut ChaCha12Rng) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / c(d.norm(), 0.0)
        } else {
            c(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// d-point discrete Fourier matrix F_{js} = exp(2πi js/d)/√d.
pub fn fourier_matrix(dim: usize) -> CMatrix {
    let d = dim as f64;
    CMatrix::from_fn(dim, dim, |j, s| {
        let arg = 2.0 * std::f64::consts::PI * (j as f64) * (s as f64) / d;
        c(arg.cos() / d.sqrt(), arg.sin() / d.sqrt())
    })
}

/// Orthonormal basis in which `a` has all diagonal entries equal to 1/d.
///
/// Built as (eigenbasis of a) · D₁ · F · D₂ with F the discrete Fourier
/// matrix and D₁, D₂ diagonal phase unitaries (identity when `phase_seed` is
/// absent). Every Fourier column has unimodular entries, so each diagonal
/// entry of the transformed `a` is the mean of the eigenvalues, 1/d, for any
/// choice of phases.
pub fn balanced_basis(a: &DensityMatrix, phase_seed: Option<RngSeed>) -> OrthonormalBasis {
    let d = a.dim();
    let (_, u) = a.eigen();
    let f = fourier_matrix(d);
    let m = match phase_seed {
        None => u * f,
        Some(seed) => {
            let mut rng = seed.rng();
            let phase_diag = |rng: &mut ChaCha12Rng| {
                CMatrix::from_diagonal(&CVector::from_fn(d, |_, _| {
                    let th: f64 = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
                    c(th.cos(), th.sin())
                }))
            };
            let d1 = phase_diag(&mut rng);
            let d2 = phase_diag(&mut rng);
            u * d1 * f * d2
        }
    };
    OrthonormalBasis { dim: d, vectors: m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rand_state(dim: usize, seed: u64) -> DensityMatrix {
        random_density(dim, dim, RngSeed(seed)).unwrap()
    }

    #[test]
    fn tensor_product_identity_scaling() {
        let half = DensityMatrix::maximally_mixed(2);
        let t = tensor_product(half.matrix(), half.matrix());
        let quarter = CMatrix::identity(4, 4) * c(0.25, 0.0);
        assert!((t - quarter).camax() < 1e-15);
    }

    #[test]
    fn tensor_product_projector_block() {
        let p0 = PureState::basis_state(2, 0).projector();
        let sigma = rand_state(2, 3);
        let t = tensor_product(p0.matrix(), sigma.matrix());
        for i in 0..2 {
            for j in 0..2 {
                assert!((t[(i, j)] - sigma.matrix()[(i, j)]).norm() < 1e-15);
                assert!(t[(2 + i, 2 + j)].norm() < 1e-15);
            }
        }
    }

    #[test]
    fn tensor_product_index_convention() {
        let mut rng = RngSeed(1).rng();
        let a = ginibre(2, 2, &mut rng);
        let b = ginibre(3, 3, &mut rng);
        let t = tensor_product(&a, &b);
        assert_eq!(t.nrows(), 6);
        assert!((t[(0, 0)] - a[(0, 0)] * b[(0, 0)]).norm() < 1e-15);
        assert!((t[(1 * 3 + 2, 0 * 3 + 1)] - a[(1, 0)] * b[(2, 1)]).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_product_marginals() {
        let dims = BipartiteDims::new(2, 3).unwrap();
        let rho = rand_state(2, 10);
        let sigma = rand_state(3, 11);
        let joint =
            DensityMatrix::new_unchecked(tensor_product(rho.matrix(), sigma.matrix()));
        let over_k = partial_trace(&joint, dims, TraceSide::OverK).unwrap();
        let over_h = partial_trace(&joint, dims, TraceSide::OverH).unwrap();
        assert!((over_k.matrix() - rho.matrix()).camax() < 1e-12);
        assert!((over_h.matrix() - sigma.matrix()).camax() < 1e-12);
    }

    #[test]
    fn partial_trace_bell_state() {
        let mut v = CVector::zeros(4);
        v[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[3] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = PureState::new(v).unwrap().projector();
        let dims = BipartiteDims::new(2, 2).unwrap();
        let marg = partial_trace(&bell, dims, TraceSide::OverH).unwrap();
        assert!((marg.matrix() - DensityMatrix::maximally_mixed(2).matrix()).camax() < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_summation_oracle() {
        // Independent loop-based oracle: (Tr_H ρ)_{kl} = Σ_i ρ_{(i,k),(i,l)}.
        let dims = BipartiteDims::new(2, 2).unwrap();
        let rho = rand_state(4, 42);
        let got = partial_trace(&rho, dims, TraceSide::OverH).unwrap();
        let mut oracle = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    oracle[(k, l)] += rho.matrix()[(i * 2 + k, i * 2 + l)];
                }
            }
        }
        assert!((got.matrix() - oracle).camax() < 1e-12);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let rho = rand_state(3, 1);
        let dims = BipartiteDims::new(2, 2).unwrap();
        assert!(matches!(
            partial_trace(&rho, dims, TraceSide::OverH),
            Err(QsaError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn entropy_maximally_mixed() {
        for d in 2..=4 {
            let s = von_neumann_entropy(&DensityMatrix::maximally_mixed(d));
            assert_abs_diff_eq!(s, (d as f64).ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn entropy_pure_state_is_zero() {
        let psi = PureState::from_vector(CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]));
        assert!(von_neumann_entropy(&psi.projector()) < 1e-12);
    }

    #[test]
    fn entropy_diag_three_quarters() {
        // −(3/4)ln(3/4) − (1/4)ln(1/4) computed directly.
        let expected = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.75, 0.0), c(0.25, 0.0)]));
        let rho = DensityMatrix::new(m).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&rho), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.562335, epsilon = 1e-6);
    }

    #[test]
    fn random_density_rank_one_is_pure() {
        let rho = random_density(3, 1, RngSeed(5)).unwrap();
        assert!(von_neumann_entropy(&rho) < 1e-10);
    }

    #[test]
    fn random_density_mean_is_maximally_mixed() {
        let n = 10_000;
        let mut acc = CMatrix::zeros(2, 2);
        for i in 0..n {
            acc += random_density(2, 2, RngSeed(1000).stream(i)).unwrap().into_matrix();
        }
        acc /= c(n as f64, 0.0);
        assert!((acc - DensityMatrix::maximally_mixed(2).matrix()).camax() < 0.02);
    }

    #[test]
    fn random_density_deterministic() {
        let a = random_density(3, 2, RngSeed(7)).unwrap();
        let b = random_density(3, 2, RngSeed(7)).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn random_density_bad_rank() {
        assert!(matches!(
            random_density(2, 3, RngSeed(0)),
            Err(QsaError::BadRank(_))
        ));
        assert!(matches!(
            random_density(2, 0, RngSeed(0)),
            Err(QsaError::BadRank(_))
        ));
    }

    #[test]
    fn random_unitary_is_unitary() {
        for d in 1..=4 {
            let u = random_unitary(d, RngSeed(9));
            let dev = (u.adjoint() * &u - CMatrix::identity(d, d)).camax();
            assert!(dev < 1e-10, "d={d} dev={dev}");
        }
    }

    #[test]
    fn random_unitary_dim_one_unimodular() {
        let u = random_unitary(1, RngSeed(2));
        assert_abs_diff_eq!(u[(0, 0)].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_unitary_haar_moment() {
        // E |U_00|^2 = 1/d for Haar measure.
        let n = 10_000;
        let mut acc = 0.0;
        for i in 0..n {
            let u = random_unitary(2, RngSeed(77).stream(i));
            acc += u[(0, 0)].norm_sqr();
        }
        assert!((acc / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn balanced_basis_flat_spectrum_is_fourier() {
        let a = DensityMatrix::maximally_mixed(3);
        let b = balanced_basis(&a, None);
        // Eigenbasis of I/3 under the deterministic tie-break is a permutation
        // of the computational basis, so columns stay unimodular.
        let m = b.as_matrix().adjoint() * a.matrix() * b.as_matrix();
        for s in 0..3 {
            assert_abs_diff_eq!(m[(s, s)].re, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn balanced_basis_two_level() {
        let a = DensityMatrix::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(0.75, 0.0),
            c(0.25, 0.0),
        ])))
        .unwrap();
        let b = balanced_basis(&a, None);
        let m = b.as_matrix().adjoint() * a.matrix() * b.as_matrix();
        for s in 0..2 {
            assert_abs_diff_eq!(m[(s, s)].re, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn balanced_basis_three_level_random_phases() {
        let a = DensityMatrix::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(0.6, 0.0),
            c(0.3, 0.0),
            c(0.1, 0.0),
        ])))
        .unwrap();
        let b = balanced_basis(&a, Some(RngSeed(13)));
        let m = b.as_matrix().adjoint() * a.matrix() * b.as_matrix();
        for s in 0..3 {
            assert_abs_diff_eq!(m[(s, s)].re, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn balanced_basis_random_inputs() {
        for d in 2..=4 {
            for i in 0..100 {
                let a = random_density(d, d, RngSeed(500).stream((d * 100 + i) as u64)).unwrap();
                let b = balanced_basis(&a, Some(RngSeed(501).stream(i as u64)));
                let m = b.as_matrix().adjoint() * a.matrix() * b.as_matrix();
                for s in 0..d {
                    assert!((m[(s, s)].re - 1.0 / d as f64).abs() < 1e-10);
                    assert!(m[(s, s)].im.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn basis_resolution_of_identity_marginal() {
        // (1/d) Σ_s d·Tr_H((|e_s><e_s| ⊗ I)ρ) = Tr_H(ρ) for any basis.
        let dims = BipartiteDims::new(2, 3).unwrap();
        let rho = rand_state(6, 21);
        let basis = OrthonormalBasis::new(random_unitary(2, RngSeed(22))).unwrap();
        let mut acc = CMatrix::zeros(3, 3);
        for s in 0..2 {
            let e = basis.vector(s);
            let proj = &e * e.adjoint();
            let big = tensor_product(&proj, &CMatrix::identity(3, 3));
            let cond = partial_trace_raw(&(&big * rho.matrix()), dims, TraceSide::OverH).unwrap();
            acc += cond * c(2.0, 0.0);
        }
        acc /= c(2.0, 0.0);
        let marg = partial_trace(&rho, dims, TraceSide::OverH).unwrap();
        assert!((acc - marg.matrix()).camax() < 1e-11);
    }

    #[test]
    fn entropy_additivity_and_concavity() {
        let rho = rand_state(2, 31);
        let sigma = rand_state(3, 32);
        let joint =
            DensityMatrix::new_unchecked(tensor_product(rho.matrix(), sigma.matrix()));
        let lhs = von_neumann_entropy(&joint);
        let rhs = von_neumann_entropy(&rho) + von_neumann_entropy(&sigma);
        assert!((lhs - rhs).abs() < 1e-9);

        let tau = rand_state(3, 33);
        let mix = DensityMatrix::new_unchecked(
            (sigma.matrix() + tau.matrix()) * c(0.5, 0.0),
        );
        let s_mix = von_neumann_entropy(&mix);
        let avg = 0.5 * (von_neumann_entropy(&sigma) + von_neumann_entropy(&tau));
        assert!(s_mix >= avg - 1e-9);
    }
}
