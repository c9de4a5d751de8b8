//! Genie side information: construction, validation and search.
//!
//! Receiver `i` is handed `S_i = H_ji X_i + W_i` where `(Z_i, W_i)` is
//! jointly Gaussian with covariance `[[I, A_i], [A_iᵀ, Σ_i]]`. A genie is
//! *useful* when Gaussian inputs with TIN achieve the genie-aided sum
//! capacity, and *smart* with respect to `(Q₁, Q₂)` when it adds nothing to
//! the TIN rate at those covariances.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::channel::{diff_rate, ChannelMatrices, CovariancePair, SymmetricVectorChannel, VectorKind};
use crate::covopt::{classify_rank, OptimizationReport, RankClass, KKT_CERTIFY_TOL};
use crate::error::{Error, Result};
use crate::matkit::{self, inverse_pd, sym_eigen, SymMatrix};

/// Relative tolerance for the least-squares smartness solve.
pub const SMART_SOLVE_TOL: f64 = 1e-8;

/// Genie parameters `Ψ = {A₁, A₂, Σ₁, Σ₂}`.
///
/// `A₁` is `rx₁ × rx₂` and `Σ₁` is `rx₂ × rx₂` (receiver 1 observes a noisy
/// copy of what user 1 sends to receiver 2); user 2 mirrors this.
#[derive(Debug, Clone, PartialEq)]
pub struct GenieParams {
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub sigma1: SymMatrix,
    pub sigma2: SymMatrix,
}

impl GenieParams {
    /// Builds a genie and checks that both noise covariance blocks are valid.
    pub fn new(a1: DMatrix<f64>, a2: DMatrix<f64>, sigma1: SymMatrix, sigma2: SymMatrix) -> Result<Self> {
        let g = GenieParams {
            a1,
            a2,
            sigma1,
            sigma2,
        };
        g.validate()?;
        Ok(g)
    }

    /// Side information independent of the receiver noise: `A_i = 0`, `Σ_i = I`.
    pub fn independent(ch: &ChannelMatrices) -> Self {
        GenieParams {
            a1: DMatrix::zeros(ch.rx1(), ch.rx2()),
            a2: DMatrix::zeros(ch.rx2(), ch.rx1()),
            sigma1: SymMatrix::identity(ch.rx2()),
            sigma2: SymMatrix::identity(ch.rx1()),
        }
    }

    /// Symmetric scalar genie of a MISO channel.
    pub fn from_miso(g: &MisoGenie) -> Self {
        let a = DMatrix::from_element(1, 1, g.a);
        let s = SymMatrix::from_diagonal(&[g.sigma]);
        GenieParams {
            a1: a.clone(),
            a2: a,
            sigma1: s.clone(),
            sigma2: s,
        }
    }

    /// Symmetric structured genie `A = k v cᵀ`, `Σ = η I` of a SIMO channel.
    pub fn from_simo(g: &SimoGenie, c: &DVector<f64>) -> Self {
        let a = &g.v * c.transpose() * g.k;
        let s = SymMatrix::identity(c.len()).scale(g.eta);
        GenieParams {
            a1: a.clone(),
            a2: a,
            sigma1: s.clone(),
            sigma2: s,
        }
    }

    pub fn get(&self, user: usize) -> (&DMatrix<f64>, &SymMatrix) {
        if user == 0 {
            (&self.a1, &self.sigma1)
        } else {
            (&self.a2, &self.sigma2)
        }
    }

    pub fn check_dims(&self, ch: &ChannelMatrices) -> Result<()> {
        let expect = [
            ("A1", &self.a1, ch.rx1(), ch.rx2()),
            ("A2", &self.a2, ch.rx2(), ch.rx1()),
        ];
        for (name, a, r, c) in expect {
            if a.nrows() != r || a.ncols() != c {
                return Err(Error::InvalidInput(format!(
                    "dimension mismatch: {name} is {}x{}, expected {r}x{c}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        for (name, s, n) in [("Sigma1", &self.sigma1, ch.rx2()), ("Sigma2", &self.sigma2, ch.rx1())] {
            if s.dim() != n {
                return Err(Error::InvalidInput(format!(
                    "dimension mismatch: {name} is {}x{}, expected {n}x{n}",
                    s.dim(),
                    s.dim()
                )));
            }
        }
        Ok(())
    }

    /// `Σ_i ≻ 0` and `[[I, A_i], [A_iᵀ, Σ_i]] ⪰ 0` for both users.
    pub fn validate(&self) -> Result<()> {
        for user in 0..2 {
            let (a, s) = self.get(user);
            if a.ncols() != s.dim() {
                return Err(Error::InvalidGenie(format!(
                    "A{} has {} columns but Sigma{} is {}x{}",
                    user + 1,
                    a.ncols(),
                    user + 1,
                    s.dim(),
                    s.dim()
                )));
            }
            match matkit::schur_psd_check(a, s) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(Error::InvalidGenie(format!(
                        "[[I, A{0}], [A{0}ᵀ, Sigma{0}]] is not PSD",
                        user + 1
                    )))
                }
                Err(Error::NotPositiveDefinite { min_eigenvalue, .. }) => {
                    return Err(Error::InvalidGenie(format!(
                        "Sigma{} is not positive definite (min eigenvalue {min_eigenvalue:e})",
                        user + 1
                    )))
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

/// Smallest eigenvalues of `I - A₂Σ₂⁻¹A₂ᵀ - Σ₁` and `I - A₁Σ₁⁻¹A₁ᵀ - Σ₂`.
/// Both are nonnegative for a useful genie and zero when the usefulness
/// inequalities hold with equality.
pub fn usefulness_margins(g: &GenieParams) -> Result<[f64; 2]> {
    let slack = |a: &DMatrix<f64>, s_other: &SymMatrix, s_own: &SymMatrix, name: &str| -> Result<f64> {
        if a.nrows() != s_own.dim() || a.ncols() != s_other.dim() {
            return Err(Error::InvalidInput(format!("{name}: genie blocks have inconsistent sizes")));
        }
        let inv = inverse_pd(s_other, name)?;
        let d = SymMatrix::identity(a.nrows())
            .sub(&inv.congruence(a))
            .sub(s_own);
        Ok(sym_eigen(&d)?.min())
    };
    Ok([
        slack(&g.a2, &g.sigma2, &g.sigma1, "Sigma2")?,
        slack(&g.a1, &g.sigma1, &g.sigma2, "Sigma1")?,
    ])
}

/// Usefulness LMIs: `Σ₁ ⪯ I - A₂Σ₂⁻¹A₂ᵀ` and `Σ₂ ⪯ I - A₁Σ₁⁻¹A₁ᵀ`.
pub fn usefulness_check(g: &GenieParams) -> Result<bool> {
    let margins = usefulness_margins(g)?;
    let scale = [&g.sigma1, &g.sigma2]
        .iter()
        .map(|s| s.frobenius_norm())
        .fold(1.0, f64::max);
    Ok(margins.iter().all(|&m| m >= -matkit::psd_tol(scale)))
}

/// Residual of the smartness equations
/// `(A₁ᵀ(H₁₂Q₂H₁₂ᵀ + I)⁻¹H₁₁ - H₂₁)Q₁ = 0` and its mirror, as the sum of the
/// two Frobenius norms.
pub fn smartness_residual(ch: &ChannelMatrices, q: &CovariancePair, g: &GenieParams) -> Result<f64> {
    q.check_dims(ch)?;
    g.check_dims(ch)?;
    let mut total = 0.0;
    for user in 0..2 {
        let v = ch.view(user);
        let (a, _) = g.get(user);
        let smart = smart_combiner(v.cross_in, q.get(1 - user), v.direct)?;
        let term = (a.transpose() * smart - v.cross_out) * q.get(user).as_matrix();
        total += term.norm();
    }
    Ok(total)
}

// (H_cross Q_other H_crossᵀ + I)⁻¹ H_direct
fn smart_combiner(cross_in: &DMatrix<f64>, q_other: &SymMatrix, direct: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rx = cross_in.nrows();
    let noise = q_other.congruence(cross_in).add(&SymMatrix::identity(rx));
    Ok(inverse_pd(&noise, "interference-plus-noise")?.as_matrix() * direct)
}

/// Symmetric scalar genie of the canonical MISO channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MisoGenie {
    /// `E[W_i Z_i]`.
    pub a: f64,
    /// `E[W_i²]`, the larger root of `Σ² - Σ + a² = 0`.
    pub sigma: f64,
    /// MMSE weight of `S_i` when estimating `Y_i` at the optimal beam.
    pub mu: f64,
}

/// Closed-form smart-and-useful genie for a symmetric MISO channel, smart at
/// `Q₁ = Q₂ = P b bᵀ` and useful with equality.
pub fn miso_genie(sch: &SymmetricVectorChannel) -> Result<MisoGenie> {
    if sch.kind != VectorKind::Miso {
        return Err(Error::InvalidInput("miso_genie needs a MISO channel".into()));
    }
    let (h, p) = (sch.h, sch.power);
    let (cos, sin) = (sch.theta.cos(), sch.theta.sin());
    let g = 1.0 + h * h * p;
    let a = h * g * cos / (cos * cos + g * g * sin * sin);
    if a > 0.5 {
        return Err(Error::NoValidGenie { a });
    }
    let sigma = 0.5 + 0.5 * (1.0 - 4.0 * a * a).max(0.0).sqrt();
    let b = sch.beam();
    let (bc, bd) = (b.dot(&sch.c()), b.dot(&sch.d()));
    let mu = (a + h * p * bc * bd) / (sigma + h * h * p * bc * bc);
    Ok(MisoGenie { a, sigma, mu })
}

/// Structured SIMO genie `A = k v cᵀ`, `Σ = η I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimoGenie {
    pub k: f64,
    pub eta: f64,
    pub v: DVector<f64>,
}

/// Relaxed SIMO usefulness condition in its scalar form
/// `η ≤ (η - k²) / (η - k²(1 - (cᵀv)²))`.
///
/// When `cᵀv = 0` the `v`-component of `A Σ⁻¹ Aᵀ` is orthogonal to `c` and
/// the right-hand side is identically 1.
pub fn simo_usefulness_check(g: &SimoGenie, c: &DVector<f64>) -> Result<bool> {
    Ok(simo_usefulness_slack(g, c)? >= -1e-12)
}

/// Right-hand side minus left-hand side of the SIMO usefulness condition.
pub fn simo_usefulness_slack(g: &SimoGenie, c: &DVector<f64>) -> Result<f64> {
    if g.eta.is_nan() || g.eta <= 0.0 {
        return Err(Error::InvalidGenie(format!("eta must be positive, got {}", g.eta)));
    }
    let t = g.eta - g.k * g.k;
    if t < -1e-15 * g.eta.max(1.0) {
        return Err(Error::InvalidGenie(format!(
            "eta = {} is below k² = {}",
            g.eta,
            g.k * g.k
        )));
    }
    let t = t.max(0.0);
    let cv = c.dot(&g.v);
    let rhs = if cv.abs() <= 1e-15 {
        1.0
    } else {
        t / (t + g.k * g.k * cv * cv)
    };
    Ok(rhs - g.eta)
}

/// Residual of the SIMO smartness equation `h = k vᵀ J⁻¹ d`.
pub fn simo_smartness_residual(sch: &SymmetricVectorChannel, g: &SimoGenie) -> f64 {
    (sch.h - g.k * g.v.dot(&sch.j_inv_d())).abs()
}

/// Explicit genie construction for the symmetric SIMO channel. Returns
/// `None` exactly when no `(k, η, v)` satisfies validity, usefulness and
/// smartness, i.e. when `h` exceeds the low-interference threshold.
pub fn simo_genie_search(sch: &SymmetricVectorChannel) -> Result<Option<SimoGenie>> {
    if sch.kind != VectorKind::Simo {
        return Err(Error::InvalidInput("simo_genie_search needs a SIMO channel".into()));
    }
    let (cos, sin) = (sch.theta.cos(), sch.theta.sin());
    let x = cos / (1.0 + sch.inr()) - sch.h;
    let (alpha, beta) = if x >= 0.0 {
        let n = x.hypot(sin);
        if n == 0.0 {
            (1.0, 0.0)
        } else {
            (x / n, sin / n)
        }
    } else {
        (0.0, 1.0)
    };
    let v = DVector::from_vec(vec![alpha, beta]);
    let gain = v.dot(&sch.j_inv_d());
    let k = if sch.h == 0.0 {
        0.0
    } else if gain > 0.0 {
        sch.h / gain
    } else {
        return Ok(None);
    };
    if k * (1.0 + alpha.abs()) > 1.0 + 1e-12 {
        return Ok(None);
    }
    // Vertex of t² + bt + c with b = k²(1 + α²) - 1.
    let t = (0.5 * (1.0 - k * k * (1.0 + alpha * alpha))).max(0.0);
    Ok(Some(SimoGenie {
        k,
        eta: t + k * k,
        v,
    }))
}

/// Outcome of the full-rank certificate check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem1Status {
    Certified,
    NotFullRank,
    NoGenieFound,
    Invalid,
}

#[derive(Debug, Clone)]
pub struct Theorem1Report {
    pub status: Theorem1Status,
    pub genie: Option<GenieParams>,
    pub smartness_residual: Option<f64>,
    pub diff_rate: Option<f64>,
    pub detail: String,
}

impl Theorem1Report {
    fn without_genie(status: Theorem1Status, detail: impl Into<String>) -> Self {
        Theorem1Report {
            status,
            genie: None,
            smartness_residual: None,
            diff_rate: None,
            detail: detail.into(),
        }
    }
}

/// Tries to certify that TIN is sum-capacity optimal at a full-rank
/// stationary point of the TIN sum rate.
///
/// Smartness is linear in `A_i` once the invertible `Q_i*` is cancelled, so
/// `A_i` comes from a least-squares solve. `Σ_i` is then searched: first the
/// fixed point of the usefulness equalities, then a grid of scaled
/// identities. `NoGenieFound` means this search failed, not that no genie
/// exists.
pub fn theorem1_verify(ch: &ChannelMatrices, report: &OptimizationReport) -> Theorem1Report {
    let q = &report.q_star;
    if let Err(e) = q.check_dims(ch) {
        return Theorem1Report::without_genie(Theorem1Status::Invalid, e.to_string());
    }
    if !(report.kkt_residual.is_finite() && report.kkt_residual <= KKT_CERTIFY_TOL) {
        return Theorem1Report::without_genie(
            Theorem1Status::Invalid,
            format!(
                "KKT residual {:e} exceeds {KKT_CERTIFY_TOL:e}; not a stationary point",
                report.kkt_residual
            ),
        );
    }
    for user in 0..2 {
        match classify_rank(q.get(user)) {
            Ok((RankClass::Full, _)) => {}
            Ok((class, ratio)) => {
                return Theorem1Report::without_genie(
                    Theorem1Status::NotFullRank,
                    format!("Q{}* is {class:?} (λmin/λmax = {ratio:e})", user + 1),
                )
            }
            Err(e) => return Theorem1Report::without_genie(Theorem1Status::Invalid, e.to_string()),
        }
    }

    let mut cross = Vec::with_capacity(2);
    for user in 0..2 {
        let v = ch.view(user);
        let combiner = match smart_combiner(v.cross_in, q.get(1 - user), v.direct) {
            Ok(m) => m,
            Err(e) => return Theorem1Report::without_genie(Theorem1Status::Invalid, e.to_string()),
        };
        // Aᵀ B = H_out  =>  Aᵀ = H_out B⁺
        let pinv = match combiner.clone().pseudo_inverse(1e-13) {
            Ok(p) => p,
            Err(e) => return Theorem1Report::without_genie(Theorem1Status::Invalid, e.to_string()),
        };
        let a_t = v.cross_out * pinv;
        let residual = (&a_t * &combiner - v.cross_out).norm();
        if residual > SMART_SOLVE_TOL * v.cross_out.norm().max(1.0) {
            return Theorem1Report::without_genie(
                Theorem1Status::NoGenieFound,
                format!("smartness equations for user {} have no exact solution (residual {residual:e})", user + 1),
            );
        }
        cross.push(a_t.transpose());
    }
    let (a1, a2) = (cross[0].clone(), cross[1].clone());

    let Some(genie) = search_sigma(a1, a2) else {
        return Theorem1Report::without_genie(
            Theorem1Status::NoGenieFound,
            "no Σ pair in the searched family satisfies the usefulness conditions",
        );
    };
    let smart = smartness_residual(ch, q, &genie);
    let diff = diff_rate(ch, q, &genie);
    match (smart, diff) {
        (Ok(s), Ok(d)) if s <= SMART_SOLVE_TOL && d.abs() <= 1e-8 => Theorem1Report {
            status: Theorem1Status::Certified,
            genie: Some(genie),
            smartness_residual: Some(s),
            diff_rate: Some(d),
            detail: "useful genie that is smart at the full-rank stationary point".into(),
        },
        (Ok(s), Ok(d)) => Theorem1Report {
            status: Theorem1Status::NoGenieFound,
            genie: Some(genie),
            smartness_residual: Some(s),
            diff_rate: Some(d),
            detail: format!("genie fails the smartness check numerically (residual {s:e}, diff {d:e})"),
        },
        (Err(e), _) | (_, Err(e)) => Theorem1Report::without_genie(Theorem1Status::Invalid, e.to_string()),
    }
}

fn search_sigma(a1: DMatrix<f64>, a2: DMatrix<f64>) -> Option<GenieParams> {
    let (n1, n2) = (a1.ncols(), a2.ncols());
    if let Some(g) = equality_fixed_point(&a1, &a2) {
        return Some(g);
    }
    const STEPS: usize = 100;
    for i in (1..=STEPS).rev() {
        for j in (1..=STEPS).rev() {
            let g = GenieParams {
                a1: a1.clone(),
                a2: a2.clone(),
                sigma1: SymMatrix::identity(n1).scale(i as f64 / STEPS as f64),
                sigma2: SymMatrix::identity(n2).scale(j as f64 / STEPS as f64),
            };
            if g.validate().is_ok() && usefulness_check(&g).unwrap_or(false) {
                return Some(g);
            }
        }
    }
    None
}

// Iterates Σ₁ ← I - A₂Σ₂⁻¹A₂ᵀ, Σ₂ ← I - A₁Σ₁⁻¹A₁ᵀ from Σ = I. For scalar
// genies this converges to the larger root of Σ² - Σ + a² = 0.
fn equality_fixed_point(a1: &DMatrix<f64>, a2: &DMatrix<f64>) -> Option<GenieParams> {
    let mut s1 = SymMatrix::identity(a1.ncols());
    let mut s2 = SymMatrix::identity(a2.ncols());
    for _ in 0..500 {
        let n1 = SymMatrix::identity(a2.nrows()).sub(&inverse_pd(&s2, "Sigma2").ok()?.congruence(a2));
        let n2 = SymMatrix::identity(a1.nrows()).sub(&inverse_pd(&n1, "Sigma1").ok()?.congruence(a1));
        let change = n1.sub(&s1).frobenius_norm() + n2.sub(&s2).frobenius_norm();
        s1 = n1;
        s2 = n2;
        if change <= 1e-15 {
            break;
        }
    }
    let g = GenieParams {
        a1: a1.clone(),
        a2: a2.clone(),
        sigma1: s1,
        sigma2: s2,
    };
    (g.validate().is_ok() && usefulness_check(&g).ok()?).then_some(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ga_sum_rate, tin_sum_rate};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn scalar_genie(a: f64, s1: f64, s2: f64) -> GenieParams {
        GenieParams {
            a1: DMatrix::from_element(1, 1, a),
            a2: DMatrix::from_element(1, 1, a),
            sigma1: SymMatrix::from_diagonal(&[s1]),
            sigma2: SymMatrix::from_diagonal(&[s2]),
        }
    }

    #[test]
    fn usefulness_examples() {
        let g = GenieParams {
            a1: DMatrix::zeros(2, 2),
            a2: DMatrix::zeros(2, 2),
            sigma1: SymMatrix::identity(2).scale(0.5),
            sigma2: SymMatrix::identity(2).scale(0.5),
        };
        assert!(usefulness_check(&g).unwrap());

        let s = 0.5 + 0.5 * (1.0f64 - 4.0 * 0.16).sqrt();
        assert!((s - 0.8).abs() < 1e-15);
        let g = scalar_genie(0.4, s, s);
        assert!(usefulness_check(&g).unwrap());
        let m = usefulness_margins(&g).unwrap();
        assert!(m[0].abs() < 1e-15 && m[1].abs() < 1e-15);

        for s in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            assert!(!usefulness_check(&scalar_genie(0.6, s, s)).unwrap());
        }
        assert!(matches!(
            usefulness_check(&scalar_genie(0.1, 0.0, 0.5)),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn invalid_block_is_rejected() {
        let g = scalar_genie(0.9, 0.5, 0.5);
        assert!(matches!(g.validate(), Err(Error::InvalidGenie(_))));
        let sch = SymmetricVectorChannel::miso(0.5, 0.2, 1.0).unwrap();
        let r = ga_sum_rate(&sch.to_matrices(), &sch.optimal_pair(), &g);
        assert!(matches!(r, Err(Error::InvalidGenie(_))));
    }

    #[test]
    fn simo_usefulness_examples() {
        let c = DVector::from_vec(vec![1.0, 0.0]);
        let v = DVector::from_vec(vec![0.6, 0.8]);
        for (eta, ok) in [(0.5, true), (1.0, true), (1.2, false)] {
            let g = SimoGenie { k: 0.0, eta, v: v.clone() };
            assert_eq!(simo_usefulness_check(&g, &c).unwrap(), ok, "eta = {eta}");
        }
        let g = SimoGenie { k: 0.5, eta: 0.25, v: v.clone() };
        assert!(!simo_usefulness_check(&g, &c).unwrap());
        let g = SimoGenie { k: 0.5, eta: 0.0, v };
        assert!(matches!(simo_usefulness_check(&g, &c), Err(Error::InvalidGenie(_))));
    }

    #[test]
    fn smartness_vanishes_at_zero_covariance() {
        let sch = SymmetricVectorChannel::miso(0.4, 0.6, 2.0).unwrap();
        let ch = sch.to_matrices();
        let g = scalar_genie(0.3, 0.5, 0.5);
        let r = smartness_residual(&ch, &CovariancePair::zeros(&ch), &g).unwrap();
        assert_eq!(r, 0.0);
        assert!(smartness_residual(&ch, &sch.optimal_pair(), &g).unwrap() > 1e-3);
    }

    #[test]
    fn miso_genie_is_smart_at_beamformer() {
        let sch = SymmetricVectorChannel::miso(0.7, 0.4, 2.0).unwrap();
        let g = miso_genie(&sch).unwrap();
        let ch = sch.to_matrices();
        let gp = GenieParams::from_miso(&g);
        assert!(smartness_residual(&ch, &sch.optimal_pair(), &gp).unwrap() <= 1e-10);
        assert!(diff_rate(&ch, &sch.optimal_pair(), &gp).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn miso_genie_limits() {
        let g = miso_genie(&SymmetricVectorChannel::miso(FRAC_PI_2, 0.7, 2.0).unwrap()).unwrap();
        assert!(g.a.abs() < 1e-15);
        assert!((g.sigma - 1.0).abs() < 1e-15);

        let (h, p) = (0.3, 1.5);
        let g = miso_genie(&SymmetricVectorChannel::miso(0.0, h, p).unwrap()).unwrap();
        assert!((g.a - h * (1.0 + h * h * p)).abs() < 1e-15);

        let err = miso_genie(&SymmetricVectorChannel::miso(0.1, 0.9, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NoValidGenie { .. }));
        assert!(miso_genie(&SymmetricVectorChannel::simo(0.1, 0.1, 1.0).unwrap()).is_err());
    }

    #[test]
    fn miso_a_closed_form_matches_definition() {
        let sch = SymmetricVectorChannel::miso(FRAC_PI_4, 0.3, 1.0).unwrap();
        let g = miso_genie(&sch).unwrap();
        let b = sch.beam();
        let (bc, bd) = (b.dot(&sch.c()), b.dot(&sch.d()));
        let direct = sch.h * bc / bd * (1.0 + sch.inr() * bc * bc);
        assert!((g.a - direct).abs() <= 1e-12);
    }

    #[test]
    fn simo_orthogonal_case() {
        for (h, found) in [(0.4, true), (1.0, true), (1.01, false)] {
            let sch = SymmetricVectorChannel::simo(FRAC_PI_2, h, 3.0).unwrap();
            let g = simo_genie_search(&sch).unwrap();
            assert_eq!(g.is_some(), found, "h = {h}");
            if let Some(g) = g {
                assert_eq!(g.v.as_slice(), &[0.0, 1.0]);
                assert!((g.k - h).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn simo_genie_satisfies_all_conditions() {
        let th = 0.8f64;
        let sch = SymmetricVectorChannel::simo(th, 0.5 * th.sin(), 2.0).unwrap();
        let g = simo_genie_search(&sch).unwrap().expect("below threshold");
        assert!(g.eta >= g.k * g.k);
        assert!(simo_usefulness_check(&g, &sch.c()).unwrap());
        assert!(simo_smartness_residual(&sch, &g) <= 1e-12);
        let gp = GenieParams::from_simo(&g, &sch.c());
        gp.validate().unwrap();
        let ch = sch.to_matrices();
        assert!(smartness_residual(&ch, &sch.optimal_pair(), &gp).unwrap() <= 1e-12);
        let d = diff_rate(&ch, &sch.optimal_pair(), &gp).unwrap();
        assert!(d.abs() <= 1e-9, "diff {d}");
    }

    #[test]
    fn independent_genie_never_hurts() {
        let sch = SymmetricVectorChannel::miso(0.5, 0.6, 2.0).unwrap();
        let ch = sch.to_matrices();
        let q = CovariancePair::isotropic(&ch);
        let g = GenieParams::independent(&ch);
        let ga = ga_sum_rate(&ch, &q, &g).unwrap();
        assert!(ga > tin_sum_rate(&ch, &q).unwrap());
    }
}
