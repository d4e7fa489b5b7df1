//! Output-entropy minimization: the minimal output entropy of a channel by
//! multi-start descent over pure input states, and the constrained quantity
//! Ĥ_Φ(ρ) by descent over pure-state decompositions of a fixed average state,
//! parametrized by isometric mixing of the eigen-ensemble. Exact closed forms
//! for the depolarizing family sit alongside the numeric routes.


use crate::channels::{Channel, DepolarizingParams};
use crate::error::{QsaError, Result};
use crate::qstate::{
    c, entropy_of_spectrum, ginibre, hermitian_eig, xlnx, CMatrix, CVector, DensityMatrix,
    PureState, RngSeed,
};

/// Eigenvalue floor inside matrix logarithms; keeps gradients finite at
/// rank-deficient channel outputs.
const LOG_FLOOR: f64 = 1e-18;
/// Eigenvalues of the average state below this are excluded from the support.
const SUPPORT_TOL: f64 = 1e-12;
/// Ensemble members with weight below this are dropped.
const WEIGHT_TOL: f64 = 1e-14;

/// Probability weights with states of a common dimension; the decompositions
/// minimized over in the constrained quantity.
#[derive(Debug, Clone)]
pub struct Ensemble {
    weights: Vec<f64>,
    members: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, members: Vec<DensityMatrix>) -> Result<Self> {
        if weights.len() != members.len() || weights.is_empty() {
            return Err(QsaError::DimensionMismatch(
                "ensemble weights and members must match and be nonempty".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-10 || weights.iter().any(|&w| w < 0.0) {
            return Err(QsaError::NotADensityMatrix(format!(
                "ensemble weights sum to {sum}"
            )));
        }
        let dim = members[0].dim();
        if members.iter().any(|m| m.dim() != dim) {
            return Err(QsaError::DimensionMismatch(
                "ensemble members have mixed dimensions".into(),
            ));
        }
        let ens = Ensemble { weights, members };
        DensityMatrix::new(ens.average_matrix())?;
        Ok(ens)
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn members(&self) -> &[DensityMatrix] {
        &self.members
    }

    fn average_matrix(&self) -> CMatrix {
        let d = self.members[0].dim();
        let mut acc = CMatrix::zeros(d, d);
        for (w, m) in self.weights.iter().zip(&self.members) {
            acc += m.matrix() * c(*w, 0.0);
        }
        acc
    }

    pub fn average(&self) -> DensityMatrix {
        DensityMatrix::new_unchecked(self.average_matrix())
    }

    /// Σ_j π_j S(Φ(ρ_j)).
    pub fn average_output_entropy(&self, ch: &Channel) -> f64 {
        self.weights
            .iter()
            .zip(&self.members)
            .map(|(w, m)| {
                let out = ch.apply_raw(m.matrix());
                w * entropy_of_spectrum(&crate::qstate::hermitian_eigenvalues(&out))
            })
            .sum()
    }
}

/// Multi-start optimizer settings. `ensemble_cap` of `None` defaults to the
/// square of the channel input dimension.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub value_tol: f64,
    pub step_tol: f64,
    pub ensemble_cap: Option<usize>,
    pub seed: RngSeed,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 32,
            max_iters: 2000,
            value_tol: 1e-7,
            step_tol: 1e-10,
            ensemble_cap: None,
            seed: RngSeed(0),
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = RngSeed(seed);
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts.max(1);
        self
    }
}

/// The argument attaining the reported minimum.
#[derive(Debug, Clone)]
pub enum Argmin {
    Pure(PureState),
    Ensemble(Ensemble),
}

/// Outcome of a multi-start minimization; the value is an upper bound on the
/// true minimum, `converged` means the best two restarts agreed within
/// `value_tol`.
#[derive(Debug, Clone)]
pub struct OptResult {
    pub value: f64,
    pub argmin: Argmin,
    pub restarts_used: usize,
    pub converged: bool,
    pub best_restart_index: usize,
}

impl OptResult {
    pub fn to_json(&self) -> serde_json::Value {
        let argmin = match &self.argmin {
            Argmin::Pure(psi) => {
                let amps: Vec<serde_json::Value> = psi
                    .amplitudes()
                    .iter()
                    .map(|z| serde_json::json!([z.re, z.im]))
                    .collect();
                serde_json::json!({ "kind": "pure", "amplitudes": amps })
            }
            Argmin::Ensemble(ens) => {
                let members: Vec<serde_json::Value> = ens
                    .members()
                    .iter()
                    .map(|m| {
                        let mut entries = Vec::new();
                        for i in 0..m.dim() {
                            for j in 0..m.dim() {
                                let z = m.matrix()[(i, j)];
                                entries.push(serde_json::json!([z.re, z.im]));
                            }
                        }
                        serde_json::json!({ "dim": m.dim(), "entries": entries })
                    })
                    .collect();
                serde_json::json!({
                    "kind": "ensemble",
                    "weights": ens.weights(),
                    "members": members,
                })
            }
        };
        serde_json::json!({
            "value": self.value,
            "converged": self.converged,
            "restarts_used": self.restarts_used,
            "best_restart_index": self.best_restart_index,
            "argmin": argmin,
        })
    }
}

/// Exact minimal output entropy of the depolarizing channel:
/// −(1 − (d−1)p/d) ln(1 − (d−1)p/d) − ((d−1)p/d) ln(p/d), in nats.
pub fn s_min_dep_closed(params: DepolarizingParams) -> Result<f64> {
    let max = DepolarizingParams::max_p(params.dim);
    if !(0.0..=max + 1e-12).contains(&params.p) {
        return Err(QsaError::POutOfRange { p: params.p, max });
    }
    let d = params.dim as f64;
    let p = params.p;
    // Output spectrum of a pure input: {1 − p + p/d} ∪ {p/d} × (d−1).
    let top = 1.0 - (d - 1.0) / d * p;
    Ok((-xlnx(top) - (d - 1.0) * xlnx(p / d)).max(0.0))
}

/// The constrained quantity for the depolarizing channel is state-independent
/// and equals the minimal output entropy.
pub fn h_hat_dep_closed(params: DepolarizingParams) -> Result<f64> {
    s_min_dep_closed(params)
}

/// Pure-state decomposition of `rho` generated by an isometric mixing of its
/// eigen-ensemble: w_j = Σ_i mix_{ji} √λ_i u_i, weights π_j = ⟨w_j|w_j⟩,
/// members w_j w_j†/π_j. Runs over the support of `rho`.
pub fn decompositions_from_isometry(rho: &DensityMatrix, mix: &CMatrix) -> Result<Ensemble> {
    let (vals, vecs) = rho.eigen();
    let r = vals.iter().filter(|&&l| l > SUPPORT_TOL).count();
    if mix.ncols() != r {
        return Err(QsaError::RankMismatch(format!(
            "isometry has {} columns, state has rank {r}",
            mix.ncols()
        )));
    }
    if mix.nrows() < r {
        return Err(QsaError::RankMismatch(format!(
            "isometry has {} rows, needs at least {r}",
            mix.nrows()
        )));
    }
    let iso_dev = (mix.adjoint() * mix - CMatrix::identity(r, r)).camax();
    if iso_dev > 1e-10 {
        return Err(QsaError::NotAnIsometry(format!(
            "mix†·mix deviates from identity by {iso_dev:.3e}"
        )));
    }
    let scaled = scaled_support(rho, &vals, &vecs, r);
    let mut weights = Vec::new();
    let mut members = Vec::new();
    for j in 0..mix.nrows() {
        let mut w = CVector::zeros(rho.dim());
        for i in 0..r {
            w += scaled.column(i) * mix[(j, i)];
        }
        let pi = w.norm_squared();
        if pi < WEIGHT_TOL {
            continue;
        }
        let proj = (&w * w.adjoint()) / c(pi, 0.0);
        weights.push(pi);
        members.push(DensityMatrix::new_unchecked(proj));
    }
    // Weights sum to Σλ_i = 1 up to the dropped tail; renormalize the dust.
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    Ensemble::new(weights, members)
}

/// Columns √λ_i u_i over the support.
fn scaled_support(rho: &DensityMatrix, vals: &[f64], vecs: &CMatrix, r: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rho.dim(), r);
    for i in 0..r {
        m.set_column(i, &(vecs.column(i) * c(vals[i].sqrt(), 0.0)));
    }
    m
}

/// Minimal output entropy by multi-start Riemannian descent over pure input
/// states on the unit sphere.
pub fn s_min_numeric(ch: &Channel, cfg: &OptimizerConfig) -> OptResult {
    let d = ch.dim_in();
    let mut best: Option<(f64, CVector, usize)> = None;
    let mut values = Vec::new();
    let restarts = cfg.restarts.max(1);
    let mut used = 0;
    for i in 0..restarts {
        let mut rng = cfg.seed.stream(i as u64).rng();
        let start = normalize(ginibre(d, 1, &mut rng).column(0).into_owned());
        let (value, psi) = sphere_descent(ch, start, cfg);
        values.push(value);
        used = i + 1;
        if best.as_ref().map_or(true, |(bv, _, _)| value < *bv) {
            best = Some((value, psi, i));
        }
        if stop_early(&values, cfg, used) {
            break;
        }
    }
    let (value, psi, best_idx) = best.unwrap();
    OptResult {
        value,
        argmin: Argmin::Pure(PureState::from_vector(psi)),
        restarts_used: used,
        converged: restarts_agree(&values, cfg.value_tol),
        best_restart_index: best_idx,
    }
}

/// Ĥ_Φ(ρ): minimal average output entropy over pure-state decompositions of
/// `rho`, parametrized by k×r isometries and refined by Riemannian descent on
/// the Stiefel manifold. The result is an upper bound on the true minimum.
pub fn h_hat_numeric(ch: &Channel, rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<OptResult> {
    let d = ch.dim_in();
    if rho.dim() != d {
        return Err(QsaError::DimensionMismatch(format!(
            "state dim {} vs channel input dim {d}",
            rho.dim()
        )));
    }
    let (vals, vecs) = rho.eigen();
    let r = vals.iter().filter(|&&l| l > SUPPORT_TOL).count();
    let scaled = scaled_support(rho, &vals, &vecs, r);

    if r == 1 {
        // A pure state decomposes only into itself.
        let out = ch.apply_raw(rho.matrix());
        let value = entropy_of_spectrum(&crate::qstate::hermitian_eigenvalues(&out));
        let ens = Ensemble::new(vec![1.0], vec![rho.clone()])?;
        return Ok(OptResult {
            value,
            argmin: Argmin::Ensemble(ens),
            restarts_used: 0,
            converged: true,
            best_restart_index: 0,
        });
    }

    let k = cfg.ensemble_cap.unwrap_or(d * d).max(r);
    let restarts = cfg.restarts.max(1);
    let mut best: Option<(f64, CMatrix, usize)> = None;
    let mut values = Vec::new();
    let mut used = 0;
    for i in 0..restarts {
        // Restart 0 starts from the eigen-ensemble embedding; the rest from
        // Haar-random isometries.
        let start = if i == 0 {
            let mut v = CMatrix::zeros(k, r);
            for j in 0..r {
                v[(j, j)] = c(1.0, 0.0);
            }
            v
        } else {
            let mut rng = cfg.seed.stream(i as u64).rng();
            stiefel_qf(&ginibre(k, r, &mut rng))
        };
        let (value, v) = stiefel_descent(ch, &scaled, start, cfg);
        values.push(value);
        used = i + 1;
        if best.as_ref().map_or(true, |(bv, _, _)| value < *bv) {
            best = Some((value, v, i));
        }
        if stop_early(&values, cfg, used) {
            break;
        }
    }
    let (value, v, best_idx) = best.unwrap();
    let ens = decompositions_from_isometry(rho, &v)?;
    Ok(OptResult {
        value,
        argmin: Argmin::Ensemble(ens),
        restarts_used: used,
        converged: restarts_agree(&values, cfg.value_tol),
        best_restart_index: best_idx,
    })
}

fn restarts_agree(values: &[f64], tol: f64) -> bool {
    if values.len() < 2 {
        return values.len() == 1;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted[1] - sorted[0] <= tol
}

/// Prefix-stable early stop: once several restarts agree with the incumbent
/// best, further restarts are redundant. Depends only on the completed prefix,
/// so raising the restart budget never changes an already-stopped run.
fn stop_early(values: &[f64], cfg: &OptimizerConfig, used: usize) -> bool {
    if used < 6 {
        return false;
    }
    let best = values.iter().cloned().fold(f64::INFINITY, f64::min);
    values.iter().filter(|&&v| v - best <= cfg.value_tol).count() >= 3
}

fn normalize(v: CVector) -> CVector {
    let n = v.norm();
    v / c(n, 0.0)
}

/// Hermitian matrix logarithm with floored eigenvalues, plus the spectrum.
fn log_and_spectrum(m: &CMatrix) -> (CMatrix, Vec<f64>) {
    let (vals, vecs) = hermitian_eig(m);
    let n = m.nrows();
    let mut log = CMatrix::zeros(n, n);
    for i in 0..n {
        let l = vals[i].max(LOG_FLOOR).ln();
        let col = vecs.column(i);
        // log += l * |u_i><u_i|
        for a in 0..n {
            for b in 0..n {
                log[(a, b)] += col[a] * col[b].conj() * c(l, 0.0);
            }
        }
    }
    (log, vals)
}

/// Σ_K (Kw)(Kw)†.
fn apply_to_outer(ch: &Channel, w: &CVector) -> CMatrix {
    let n = ch.dim_out();
    let mut out = CMatrix::zeros(n, n);
    for k in ch.kraus() {
        let kw = k * w;
        out += &kw * kw.adjoint();
    }
    out
}

/// Output entropy S(Φ(ψψ†)) and its Riemannian gradient on the sphere.
fn sphere_fg(ch: &Channel, psi: &CVector) -> (f64, CVector) {
    let out = apply_to_outer(ch, psi);
    let (log_out, spectrum) = log_and_spectrum(&out);
    let f = entropy_of_spectrum(&spectrum);
    let g = -(ch.apply_adjoint_raw(&log_out) * psi);
    let radial = psi.dotc(&g);
    let g_t = g - psi * radial;
    (f, g_t)
}

fn sphere_f(ch: &Channel, psi: &CVector) -> f64 {
    entropy_of_spectrum(&crate::qstate::hermitian_eigenvalues(&apply_to_outer(
        ch, psi,
    )))
}

fn sphere_descent(ch: &Channel, start: CVector, cfg: &OptimizerConfig) -> (f64, CVector) {
    let mut psi = start;
    let mut step = 0.5;
    let (mut f, mut g) = sphere_fg(ch, &psi);
    for _ in 0..cfg.max_iters {
        let gnorm2 = g.norm_squared();
        if gnorm2.sqrt() < 1e-9 {
            break;
        }
        let mut accepted = false;
        while step > 1e-18 {
            let trial = normalize(&psi - &g * c(step, 0.0));
            let f_trial = sphere_f(ch, &trial);
            if f_trial <= f - 1e-4 * step * gnorm2 {
                psi = trial;
                let improvement = f - f_trial;
                f = f_trial;
                accepted = true;
                step = (step * 2.0).min(8.0);
                if improvement < 1e-16 {
                    return (sphere_f(ch, &psi), psi);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let fg = sphere_fg(ch, &psi);
        f = fg.0;
        g = fg.1;
        let _ = cfg.step_tol;
    }
    (f, psi)
}

/// Thin QR orthonormalization with the triangular factor's diagonal phases
/// absorbed, so an isometry maps to itself.
fn stiefel_qf(m: &CMatrix) -> CMatrix {
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / c(d.norm(), 0.0)
        } else {
            c(1.0, 0.0)
        };
        for i in 0..q.nrows() {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Objective for the decomposition search: with w_j the columns of
/// `scaled`·Vᵀ, f(V) = Σ_j [−Tr(A_j ln A_j) + π_j ln π_j], A_j = Φ(w_j w_j†).
/// This equals Σ_j π_j S(Φ(w_j w_j†/π_j)).
fn hhat_f(ch: &Channel, scaled: &CMatrix, v: &CMatrix) -> f64 {
    let k = v.nrows();
    let mut f = 0.0;
    for j in 0..k {
        let w = member_vector(scaled, v, j);
        let pi = w.norm_squared();
        if pi < WEIGHT_TOL {
            continue;
        }
        let a = apply_to_outer(ch, &w);
        let spectrum = crate::qstate::hermitian_eigenvalues(&a);
        f += spectrum.iter().map(|&l| -xlnx(l)).sum::<f64>() + xlnx(pi);
    }
    f.max(0.0)
}

fn member_vector(scaled: &CMatrix, v: &CMatrix, j: usize) -> CVector {
    let r = v.ncols();
    let mut w = CVector::zeros(scaled.nrows());
    for i in 0..r {
        w += scaled.column(i) * v[(j, i)];
    }
    w
}

/// Objective and Riemannian gradient on the Stiefel manifold.
fn hhat_fg(ch: &Channel, scaled: &CMatrix, v: &CMatrix) -> (f64, CMatrix) {
    let k = v.nrows();
    let r = v.ncols();
    let mut f = 0.0;
    let mut grad = CMatrix::zeros(k, r);
    for j in 0..k {
        let w = member_vector(scaled, v, j);
        let pi = w.norm_squared();
        if pi < WEIGHT_TOL {
            continue;
        }
        let a = apply_to_outer(ch, &w);
        let (log_a, spectrum) = log_and_spectrum(&a);
        f += spectrum.iter().map(|&l| -xlnx(l)).sum::<f64>() + xlnx(pi);
        // ∂f/∂w̄_j = −Φ*(ln A_j) w_j + (ln π_j) w_j
        let y = -(ch.apply_adjoint_raw(&log_a) * &w) + &w * c(pi.ln(), 0.0);
        let row = scaled.adjoint() * y;
        for i in 0..r {
            grad[(j, i)] = row[i];
        }
    }
    // Project onto the Stiefel tangent space: G − V·herm(V†G).
    let vg = v.adjoint() * &grad;
    let herm = (&vg + vg.adjoint()) * c(0.5, 0.0);
    let tangent = &grad - v * herm;
    (f.max(0.0), tangent)
}

fn stiefel_descent(
    ch: &Channel,
    scaled: &CMatrix,
    start: CMatrix,
    cfg: &OptimizerConfig,
) -> (f64, CMatrix) {
    let mut v = start;
    let mut step = 0.5;
    let (mut f, mut g) = hhat_fg(ch, scaled, &v);
    for _ in 0..cfg.max_iters {
        let gnorm2 = g.norm_squared();
        if gnorm2.sqrt() < 1e-9 {
            break;
        }
        let mut accepted = false;
        while step > 1e-18 {
            let trial = stiefel_qf(&(&v - &g * c(step, 0.0)));
            let f_trial = hhat_f(ch, scaled, &trial);
            if f_trial <= f - 1e-4 * step * gnorm2 {
                v = trial;
                let improvement = f - f_trial;
                f = f_trial;
                accepted = true;
                step = (step * 2.0).min(8.0);
                if improvement < 1e-16 {
                    return (f, v);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let fg = hhat_fg(ch, scaled, &v);
        f = fg.0;
        g = fg.1;
    }
    (f, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        apply_channel, depolarizing_channel, random_kraus_channel, Channel,
    };
    use crate::qstate::{fourier_matrix, random_density, von_neumann_entropy};
    use approx::assert_abs_diff_eq;

    fn dep(d: usize, p: f64) -> Channel {
        depolarizing_channel(DepolarizingParams::new(d, p).unwrap()).unwrap()
    }

    fn quick_cfg(seed: u64) -> OptimizerConfig {
        OptimizerConfig::default().with_seed(seed).with_restarts(8)
    }

    #[test]
    fn closed_form_endpoints() {
        assert_abs_diff_eq!(
            s_min_dep_closed(DepolarizingParams::new(2, 0.0).unwrap()).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            s_min_dep_closed(DepolarizingParams::new(2, 1.0).unwrap()).unwrap(),
            2.0f64.ln(),
            epsilon = 1e-12
        );
        // p = 1/2, d = 2: spectrum {3/4, 1/4}.
        let expected = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert_abs_diff_eq!(
            s_min_dep_closed(DepolarizingParams::new(2, 0.5).unwrap()).unwrap(),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn closed_form_monotone_on_unit_interval() {
        for d in [2usize, 3] {
            let mut prev = -1.0;
            let mut p = 0.0f64;
            while p <= 1.0 + 1e-9 {
                let s = s_min_dep_closed(DepolarizingParams::new(d, p.min(1.0)).unwrap()).unwrap();
                assert!(s >= prev - 1e-12, "d={d} p={p}");
                prev = s;
                p += 0.01;
            }
        }
    }

    #[test]
    fn h_hat_closed_delegates() {
        let params = DepolarizingParams::new(3, 0.7).unwrap();
        assert_eq!(
            h_hat_dep_closed(params).unwrap(),
            s_min_dep_closed(params).unwrap()
        );
    }

    #[test]
    fn smin_identity_channel_is_zero() {
        let res = s_min_numeric(&Channel::identity(3), &quick_cfg(1));
        assert!(res.value < 1e-9);
        assert!(res.converged);
    }

    #[test]
    fn smin_fully_depolarizing() {
        let res = s_min_numeric(&dep(2, 1.0), &quick_cfg(2));
        assert_abs_diff_eq!(res.value, 2.0f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn smin_matches_closed_form() {
        for d in [2usize, 3] {
            let params = DepolarizingParams::new(d, 0.5).unwrap();
            let res = s_min_numeric(&dep(d, 0.5), &quick_cfg(3));
            assert_abs_diff_eq!(
                res.value,
                s_min_dep_closed(params).unwrap(),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn covariance_flatness() {
        // S(Φ_dep(ψ)) is the same for every pure input.
        for d in [2usize, 3] {
            let ch = dep(d, 0.6);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..100 {
                let psi = random_density(d, 1, RngSeed(900).stream(i)).unwrap();
                let s = von_neumann_entropy(&apply_channel(&ch, &psi).unwrap());
                lo = lo.min(s);
                hi = hi.max(s);
            }
            assert!(hi - lo < 1e-12);
        }
    }

    #[test]
    fn decomposition_identity_mix_recovers_eigen_ensemble() {
        let rho = random_density(3, 3, RngSeed(5)).unwrap();
        let ens = decompositions_from_isometry(&rho, &CMatrix::identity(3, 3)).unwrap();
        let (vals, _) = rho.eigen();
        assert_eq!(ens.size(), 3);
        for (w, l) in ens.weights().iter().zip(vals.iter()) {
            assert_abs_diff_eq!(w, l, epsilon = 1e-10);
        }
        assert!((ens.average().matrix() - rho.matrix()).camax() < 1e-11);
    }

    #[test]
    fn decomposition_fourier_mix_of_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(2);
        let ens = decompositions_from_isometry(&rho, &fourier_matrix(2)).unwrap();
        assert_eq!(ens.size(), 2);
        for w in ens.weights() {
            assert_abs_diff_eq!(*w, 0.5, epsilon = 1e-12);
        }
        // Members are orthogonal pure states.
        let overlap = (ens.members()[0].matrix() * ens.members()[1].matrix()).trace();
        assert!(overlap.norm() < 1e-12);
    }

    #[test]
    fn decomposition_random_isometry_reconstructs_average() {
        let rho = random_density(3, 3, RngSeed(6)).unwrap();
        let mut rng = RngSeed(7).rng();
        let mix = stiefel_qf(&ginibre(9, 3, &mut rng));
        let ens = decompositions_from_isometry(&rho, &mix).unwrap();
        assert!((ens.average().matrix() - rho.matrix()).camax() < 1e-11);
    }

    #[test]
    fn decomposition_rejects_non_isometry() {
        let rho = random_density(2, 2, RngSeed(8)).unwrap();
        let mut rng = RngSeed(9).rng();
        let bad = ginibre(4, 2, &mut rng);
        assert!(matches!(
            decompositions_from_isometry(&rho, &bad),
            Err(QsaError::NotAnIsometry(_))
        ));
        let wrong_rank = CMatrix::identity(4, 3);
        assert!(matches!(
            decompositions_from_isometry(&rho, &wrong_rank),
            Err(QsaError::RankMismatch(_))
        ));
    }

    #[test]
    fn hhat_gradient_matches_finite_differences() {
        let ch = random_kraus_channel(2, 3, RngSeed(20));
        let rho = random_density(2, 2, RngSeed(21)).unwrap();
        let (vals, vecs) = rho.eigen();
        let scaled = scaled_support(&rho, &vals, &vecs, 2);
        let mut rng = RngSeed(22).rng();
        let v = stiefel_qf(&ginibre(4, 2, &mut rng));
        let (_, tangent) = hhat_fg(&ch, &scaled, &v);

        // Directional finite difference along a random tangent direction.
        let raw = ginibre(4, 2, &mut rng);
        let vg = v.adjoint() * &raw;
        let herm = (&vg + vg.adjoint()) * c(0.5, 0.0);
        let dir = &raw - &v * herm;
        let h = 1e-6;
        let fp = hhat_f(&ch, &scaled, &stiefel_qf(&(&v + &dir * c(h, 0.0))));
        let fm = hhat_f(&ch, &scaled, &stiefel_qf(&(&v - &dir * c(h, 0.0))));
        let numeric = (fp - fm) / (2.0 * h);
        // df along `dir` is 2·Re⟨tangent, dir⟩ in the Wirtinger convention.
        let analytic: f64 = 2.0
            * tangent
                .iter()
                .zip(dir.iter())
                .map(|(g, d)| (g.conj() * d).re)
                .sum::<f64>();
        assert_abs_diff_eq!(numeric, analytic, epsilon = 1e-4);
    }

    #[test]
    fn hhat_identity_channel_is_zero() {
        let rho = random_density(3, 3, RngSeed(30)).unwrap();
        let res = h_hat_numeric(&Channel::identity(3), &rho, &quick_cfg(31)).unwrap();
        assert!(res.value < 1e-9);
    }

    #[test]
    fn hhat_pure_input_is_output_entropy() {
        let ch = random_kraus_channel(2, 2, RngSeed(32));
        let rho = random_density(2, 1, RngSeed(33)).unwrap();
        let res = h_hat_numeric(&ch, &rho, &quick_cfg(34)).unwrap();
        let direct = von_neumann_entropy(&apply_channel(&ch, &rho).unwrap());
        assert_abs_diff_eq!(res.value, direct, epsilon = 1e-12);
        assert!(res.converged);
    }

    #[test]
    fn hhat_depolarizing_state_independent() {
        for d in [2usize, 3] {
            let params = DepolarizingParams::new(d, 0.5).unwrap();
            let closed = s_min_dep_closed(params).unwrap();
            let ch = dep(d, 0.5);
            let rho = random_density(d, d, RngSeed(40 + d as u64)).unwrap();
            let res = h_hat_numeric(&ch, &rho, &quick_cfg(41)).unwrap();
            assert_abs_diff_eq!(res.value, closed, epsilon = 1e-6);
        }
    }

    #[test]
    fn hhat_sandwich() {
        let ch = random_kraus_channel(2, 3, RngSeed(50));
        let rho = random_density(2, 2, RngSeed(51)).unwrap();
        let cfg = quick_cfg(52);
        let hhat = h_hat_numeric(&ch, &rho, &cfg).unwrap().value;
        let smin = s_min_numeric(&ch, &cfg).value;
        let upper = von_neumann_entropy(&apply_channel(&ch, &rho).unwrap());
        assert!(hhat >= smin - 1e-9, "hhat={hhat} smin={smin}");
        assert!(hhat <= upper + 1e-9, "hhat={hhat} upper={upper}");
    }

    #[test]
    fn restart_determinism() {
        let ch = random_kraus_channel(2, 2, RngSeed(60));
        let rho = random_density(2, 2, RngSeed(61)).unwrap();
        let cfg = quick_cfg(62);
        let a = h_hat_numeric(&ch, &rho, &cfg).unwrap();
        let b = h_hat_numeric(&ch, &rho, &cfg).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.best_restart_index, b.best_restart_index);
        assert_eq!(a.restarts_used, b.restarts_used);
        let sa = s_min_numeric(&ch, &cfg);
        let sb = s_min_numeric(&ch, &cfg);
        assert_eq!(sa.value, sb.value);
    }

    #[test]
    fn ensemble_validation() {
        let rho = random_density(2, 2, RngSeed(70)).unwrap();
        assert!(Ensemble::new(vec![0.6, 0.6], vec![rho.clone(), rho.clone()]).is_err());
        assert!(Ensemble::new(vec![0.5, 0.5], vec![rho.clone(), rho]).is_ok());
    }
}
