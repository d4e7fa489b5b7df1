//! Quantum channels as Kraus families: the depolarizing family over its full
//! completely-positive parameter range, Choi-matrix validation, product
//! channels on bipartite states, and random test channels.


use crate::error::{QsaError, Result};
use crate::qstate::{
    c, haar_unitary, hermitian_eigenvalues, tensor_product, BipartiteDims, CMatrix, DensityMatrix,
    RngSeed,
};

/// Max-entry tolerance on the trace-preservation identity Σ K†K = I.
pub const TP_TOL: f64 = 1e-10;
/// Slack allowed on the smallest Choi eigenvalue.
pub const CP_SLACK: f64 = 1e-9;

/// Completely positive trace-preserving map given by its Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl Channel {
    /// Validates trace preservation and complete positivity at construction.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(QsaError::NotAChannel("empty Kraus list".into()));
        }
        let dim_out = kraus[0].nrows();
        let dim_in = kraus[0].ncols();
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(QsaError::NotAChannel(
                    "Kraus operators have inconsistent shapes".into(),
                ));
            }
        }
        let ch = Channel {
            dim_in,
            dim_out,
            kraus,
        };
        let tp_dev = ch.trace_preservation_deviation();
        if tp_dev > TP_TOL {
            return Err(QsaError::NotAChannel(format!(
                "Σ K†K deviates from identity by {tp_dev:.3e}"
            )));
        }
        let min_choi = hermitian_eigenvalues(&ch.choi())
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_choi < -CP_SLACK {
            return Err(QsaError::NotAChannel(format!(
                "Choi matrix has eigenvalue {min_choi:.3e}"
            )));
        }
        Ok(ch)
    }

    /// Skips validation. Needed only where a deliberately invalid map is under
    /// inspection.
    pub fn new_unchecked(kraus: Vec<CMatrix>) -> Self {
        let dim_out = kraus[0].nrows();
        let dim_in = kraus[0].ncols();
        Channel {
            dim_in,
            dim_out,
            kraus,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Channel {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![CMatrix::identity(dim, dim)],
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn trace_preservation_deviation(&self) -> f64 {
        let mut acc = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            acc += k.adjoint() * k;
        }
        (acc - CMatrix::identity(self.dim_in, self.dim_in)).camax()
    }

    /// Σ K m K† on an arbitrary operator.
    pub fn apply_raw(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }

    /// Adjoint map Σ K† m K (the dual with respect to the trace pairing).
    pub fn apply_adjoint_raw(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * m * k;
        }
        out
    }

    /// Choi matrix (Φ ⊗ id)(|Ω⟩⟨Ω|) with |Ω⟩ = Σ_i |ii⟩/√d.
    pub fn choi(&self) -> CMatrix {
        choi_of_map(self.dim_in, |m| self.apply_raw(m))
    }

    /// JSON form {"dim_in", "dim_out", "kraus": [[[re, im], ...], ...]},
    /// row-major, one nested list per Kraus operator.
    pub fn to_json(&self) -> serde_json::Value {
        let kraus: Vec<serde_json::Value> = self
            .kraus
            .iter()
            .map(|k| {
                let mut entries = Vec::with_capacity(k.nrows() * k.ncols());
                for i in 0..k.nrows() {
                    for j in 0..k.ncols() {
                        let z = k[(i, j)];
                        entries.push(serde_json::json!([z.re, z.im]));
                    }
                }
                serde_json::Value::Array(entries)
            })
            .collect();
        serde_json::json!({
            "dim_in": self.dim_in,
            "dim_out": self.dim_out,
            "kraus": kraus,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |msg: &str| QsaError::ConfigInvalid(format!("channel JSON: {msg}"));
        let dim_in = v["dim_in"].as_u64().ok_or_else(|| bad("missing dim_in"))? as usize;
        let dim_out = v["dim_out"].as_u64().ok_or_else(|| bad("missing dim_out"))? as usize;
        let arr = v["kraus"].as_array().ok_or_else(|| bad("missing kraus"))?;
        let mut kraus = Vec::with_capacity(arr.len());
        for op in arr {
            let entries = op.as_array().ok_or_else(|| bad("kraus op not a list"))?;
            if entries.len() != dim_in * dim_out {
                return Err(bad("kraus entry count does not match dimensions"));
            }
            let mut m = CMatrix::zeros(dim_out, dim_in);
            for (idx, e) in entries.iter().enumerate() {
                let pair = e.as_array().ok_or_else(|| bad("entry not [re, im]"))?;
                let re = pair[0].as_f64().ok_or_else(|| bad("re not a number"))?;
                let im = pair[1].as_f64().ok_or_else(|| bad("im not a number"))?;
                m[(idx / dim_in, idx % dim_in)] = c(re, im);
            }
            kraus.push(m);
        }
        Channel::new(kraus)
    }
}

/// Choi matrix of an arbitrary linear map on d×d operators, built by applying
/// the map to matrix units: (1/d) Σ_{ij} f(|i⟩⟨j|) ⊗ |i⟩⟨j|.
pub fn choi_of_map(dim: usize, f: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let probe = f(&CMatrix::from_fn(dim, dim, |i, j| {
        if i == 0 && j == 0 {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    }));
    let dim_out = probe.nrows();
    let mut choi = CMatrix::zeros(dim_out * dim, dim_out * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut unit = CMatrix::zeros(dim, dim);
            unit[(i, j)] = c(1.0, 0.0);
            let mapped = f(&unit);
            for a in 0..dim_out {
                for b in 0..dim_out {
                    choi[(a * dim + i, b * dim + j)] += mapped[(a, b)] / c(dim as f64, 0.0);
                }
            }
        }
    }
    choi
}

/// Parameters of the depolarizing channel ρ ↦ (1−p)ρ + (p/d)I,
/// completely positive for 0 ≤ p ≤ d²/(d²−1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepolarizingParams {
    pub dim: usize,
    pub p: f64,
}

impl DepolarizingParams {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        let max = Self::max_p(dim);
        if !(0.0..=max + 1e-12).contains(&p) {
            return Err(QsaError::POutOfRange { p, max });
        }
        Ok(DepolarizingParams { dim, p })
    }

    /// Skips the range check; for probing the CP boundary.
    pub fn new_unchecked(dim: usize, p: f64) -> Self {
        DepolarizingParams { dim, p }
    }

    /// Upper end of the completely positive range, d²/(d²−1).
    pub fn max_p(dim: usize) -> f64 {
        let d2 = (dim * dim) as f64;
        d2 / (d2 - 1.0)
    }
}

/// Weyl shift–phase unitary W_{a,b} = X^a Z^b on C^d:
/// W|j⟩ = ω^{bj} |j+a mod d⟩ with ω = e^{2πi/d}.
pub fn weyl_operator(dim: usize, a: usize, b: usize) -> CMatrix {
    let mut w = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let arg = 2.0 * std::f64::consts::PI * (b as f64) * (j as f64) / dim as f64;
        w[((j + a) % dim, j)] = c(arg.cos(), arg.sin());
    }
    w
}

/// Kraus representation of the depolarizing channel over the d² Weyl
/// unitaries: weight √(1 − p(d²−1)/d²) on the identity and √p/d on each of
/// the others. Valid on the whole range 0 ≤ p ≤ d²/(d²−1).
pub fn depolarizing_channel(params: DepolarizingParams) -> Result<Channel> {
    let d = params.dim;
    let p = params.p;
    let max = DepolarizingParams::max_p(d);
    if !(0.0..=max + 1e-12).contains(&p) {
        return Err(QsaError::POutOfRange { p, max });
    }
    let d2 = (d * d) as f64;
    let id_weight = (1.0 - p * (d2 - 1.0) / d2).max(0.0).sqrt();
    let weyl_weight = p.sqrt() / d as f64;
    let mut kraus = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let weight = if a == 0 && b == 0 {
                id_weight
            } else {
                weyl_weight
            };
            if weight > 0.0 {
                kraus.push(weyl_operator(d, a, b) * c(weight, 0.0));
            }
        }
    }
    Channel::new(kraus)
}

/// Closed affine form (1−p)m + (p/d)·Tr(m)·I, independent of the Kraus
/// representation; also meaningful outside the completely positive range.
pub fn depolarizing_apply_affine(params: DepolarizingParams, m: &CMatrix) -> CMatrix {
    let d = params.dim;
    let p = params.p;
    m * c(1.0 - p, 0.0) + CMatrix::identity(d, d) * (m.trace() * c(p / d as f64, 0.0))
}

/// Σ K ρ K†, validated output.
pub fn apply_channel(ch: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.dim_in {
        return Err(QsaError::DimensionMismatch(format!(
            "state dim {} vs channel input dim {}",
            rho.dim(),
            ch.dim_in
        )));
    }
    Ok(DensityMatrix::new_unchecked(ch.apply_raw(rho.matrix())))
}

/// (Φ ⊗ Ψ)(ρ) as Σ_{i,j} (K_i ⊗ L_j) ρ (K_i ⊗ L_j)†.
pub fn apply_product_channel(
    ch_h: &Channel,
    ch_k: &Channel,
    rho: &DensityMatrix,
    dims: BipartiteDims,
) -> Result<DensityMatrix> {
    if dims.dim_h != ch_h.dim_in || dims.dim_k != ch_k.dim_in {
        return Err(QsaError::DimensionMismatch(format!(
            "dims ({}, {}) vs channel inputs ({}, {})",
            dims.dim_h, dims.dim_k, ch_h.dim_in, ch_k.dim_in
        )));
    }
    if rho.dim() != dims.total() {
        return Err(QsaError::DimensionMismatch(format!(
            "state dim {} vs bipartite total {}",
            rho.dim(),
            dims.total()
        )));
    }
    let n_out = ch_h.dim_out * ch_k.dim_out;
    let mut out = CMatrix::zeros(n_out, n_out);
    for k in &ch_h.kraus {
        for l in &ch_k.kraus {
            let kl = tensor_product(k, l);
            out += &kl * rho.matrix() * kl.adjoint();
        }
    }
    Ok(DensityMatrix::new_unchecked(out))
}

/// Φ ⊗ Ψ as a single channel with explicitly tensored Kraus lists.
pub fn product_channel(ch_h: &Channel, ch_k: &Channel) -> Channel {
    let mut kraus = Vec::with_capacity(ch_h.kraus.len() * ch_k.kraus.len());
    for k in &ch_h.kraus {
        for l in &ch_k.kraus {
            kraus.push(tensor_product(k, l));
        }
    }
    Channel {
        dim_in: ch_h.dim_in * ch_k.dim_in,
        dim_out: ch_h.dim_out * ch_k.dim_out,
        kraus,
    }
}

/// True iff the channel fixes the maximally mixed state.
pub fn is_bistochastic(ch: &Channel) -> Result<bool> {
    if ch.dim_in != ch.dim_out {
        return Err(QsaError::DimensionMismatch(
            "bistochasticity requires dim_in = dim_out".into(),
        ));
    }
    let mixed = DensityMatrix::maximally_mixed(ch.dim_in);
    let out = ch.apply_raw(mixed.matrix());
    Ok((out - mixed.matrix()).camax() <= 1e-10)
}

/// Random channel from a Haar isometry into system ⊗ environment
/// (Stinespring dilation): K_e = (I ⊗ ⟨e|) V.
pub fn random_kraus_channel(dim: usize, env_dim: usize, seed: RngSeed) -> Channel {
    let mut rng = seed.rng();
    let u = haar_unitary(dim * env_dim, &mut rng);
    // Isometry V: C^dim -> C^dim ⊗ C^env, columns j -> u[:, j*env] block? Use
    // the first `dim` columns of u as V with rows indexed (i, e) = i*env + e.
    let mut kraus = Vec::with_capacity(env_dim);
    for e in 0..env_dim {
        let mut k = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                k[(i, j)] = u[(i * env_dim + e, j)];
            }
        }
        kraus.push(k);
    }
    Channel {
        dim_in: dim,
        dim_out: dim,
        kraus,
    }
}
