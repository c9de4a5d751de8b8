//! Channel model and rate functionals.
//!
//! The two-user channel is `Y₁ = H₁₁X₁ + H₁₂X₂ + Z₁`,
//! `Y₂ = H₂₁X₁ + H₂₂X₂ + Z₂` with unit-covariance Gaussian noise. All rates
//! are Gaussian-input mutual informations in bits per real channel use
//! (`½ log₂ det` convention).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genie::GenieParams;
use crate::matkit::{self, log2_det_chol, rank_one_inv_apply, SymMatrix};

/// Gain matrices and power budgets of a two-user interference channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrices {
    pub h11: DMatrix<f64>,
    pub h12: DMatrix<f64>,
    pub h21: DMatrix<f64>,
    pub h22: DMatrix<f64>,
    pub p1: f64,
    pub p2: f64,
}

/// One receiver's view of the channel: its own link, the interfering link,
/// and the link its own signal leaks into the other receiver.
pub(crate) struct UserView<'a> {
    pub direct: &'a DMatrix<f64>,
    pub cross_in: &'a DMatrix<f64>,
    pub cross_out: &'a DMatrix<f64>,
}

impl ChannelMatrices {
    pub fn new(
        h11: DMatrix<f64>,
        h12: DMatrix<f64>,
        h21: DMatrix<f64>,
        h22: DMatrix<f64>,
        p1: f64,
        p2: f64,
    ) -> Result<Self> {
        let ch = ChannelMatrices {
            h11,
            h12,
            h21,
            h22,
            p1,
            p2,
        };
        ch.validate()?;
        Ok(ch)
    }

    fn validate(&self) -> Result<()> {
        let dims = |m: &DMatrix<f64>| (m.nrows(), m.ncols());
        let (r11, c11) = dims(&self.h11);
        let (r12, c12) = dims(&self.h12);
        let (r21, c21) = dims(&self.h21);
        let (r22, c22) = dims(&self.h22);
        let mismatch = |what: &str, a: usize, b: usize| {
            Error::InvalidInput(format!("dimension mismatch: {what} ({a} vs {b})"))
        };
        if [r11, c11, r12, c12, r21, c21, r22, c22].contains(&0) {
            return Err(Error::InvalidInput("channel matrices must be non-empty".into()));
        }
        if r11 != r12 {
            return Err(mismatch("rows(H11) != rows(H12)", r11, r12));
        }
        if r21 != r22 {
            return Err(mismatch("rows(H21) != rows(H22)", r21, r22));
        }
        if c11 != c21 {
            return Err(mismatch("cols(H11) != cols(H21)", c11, c21));
        }
        if c12 != c22 {
            return Err(mismatch("cols(H12) != cols(H22)", c12, c22));
        }
        let finite = [&self.h11, &self.h12, &self.h21, &self.h22]
            .iter()
            .all(|m| m.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(Error::InvalidInput("channel matrices must be finite".into()));
        }
        for (name, p) in [("P1", self.p1), ("P2", self.p2)] {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {p}")));
            }
        }
        Ok(())
    }

    pub fn rx1(&self) -> usize {
        self.h11.nrows()
    }

    pub fn rx2(&self) -> usize {
        self.h22.nrows()
    }

    pub fn tx1(&self) -> usize {
        self.h11.ncols()
    }

    pub fn tx2(&self) -> usize {
        self.h22.ncols()
    }

    pub fn tx(&self, user: usize) -> usize {
        if user == 0 {
            self.tx1()
        } else {
            self.tx2()
        }
    }

    pub fn power(&self, user: usize) -> f64 {
        if user == 0 {
            self.p1
        } else {
            self.p2
        }
    }

    pub(crate) fn view(&self, user: usize) -> UserView<'_> {
        if user == 0 {
            UserView {
                direct: &self.h11,
                cross_in: &self.h12,
                cross_out: &self.h21,
            }
        } else {
            UserView {
                direct: &self.h22,
                cross_in: &self.h21,
                cross_out: &self.h12,
            }
        }
    }

    /// Same channel with both cross links negated.
    pub fn with_negated_cross(&self) -> Self {
        ChannelMatrices {
            h12: -&self.h12,
            h21: -&self.h21,
            ..self.clone()
        }
    }
}

/// Transmit (MISO) or receive (SIMO) vector channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorKind {
    Miso,
    Simo,
}

/// Symmetric two-antenna MISO/SIMO channel in canonical coordinates:
/// cross direction `c = [1, 0]`, direct direction `d = [cos θ, sin θ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricVectorChannel {
    pub theta: f64,
    /// Cross gain, stored as `|h|`.
    pub h: f64,
    pub power: f64,
    pub kind: VectorKind,
}

impl SymmetricVectorChannel {
    pub fn new(theta: f64, h: f64, power: f64, kind: VectorKind) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidInput(format!(
                "theta must lie in [0, π/2], got {theta}"
            )));
        }
        if !h.is_finite() {
            return Err(Error::InvalidInput(format!("h must be finite, got {h}")));
        }
        if !(power.is_finite() && power > 0.0) {
            return Err(Error::InvalidInput(format!("P must be positive, got {power}")));
        }
        Ok(SymmetricVectorChannel {
            theta,
            h: h.abs(),
            power,
            kind,
        })
    }

    pub fn miso(theta: f64, h: f64, power: f64) -> Result<Self> {
        Self::new(theta, h, power, VectorKind::Miso)
    }

    pub fn simo(theta: f64, h: f64, power: f64) -> Result<Self> {
        Self::new(theta, h, power, VectorKind::Simo)
    }

    pub fn c(&self) -> DVector<f64> {
        DVector::from_vec(vec![1.0, 0.0])
    }

    pub fn d(&self) -> DVector<f64> {
        DVector::from_vec(vec![self.theta.cos(), self.theta.sin()])
    }

    /// `h² P`, the interference-to-noise ratio.
    pub fn inr(&self) -> f64 {
        self.h * self.h * self.power
    }

    /// `J = I + h²P c cᵀ`.
    pub fn j_matrix(&self) -> SymMatrix {
        SymMatrix::identity(2).add(&SymMatrix::outer(&self.c()).scale(self.inr()))
    }

    /// `J⁻¹ d`.
    pub fn j_inv_d(&self) -> DVector<f64> {
        rank_one_inv_apply(self.inr(), &self.c(), &self.d())
    }

    /// SINR-maximising unit beam `b = J⁻¹d / ‖J⁻¹d‖`.
    pub fn beam(&self) -> DVector<f64> {
        let v = self.j_inv_d();
        let n = v.norm();
        v / n
    }

    /// `P cos²θ / (1 + h²P) + P sin²θ`.
    pub fn sinr(&self) -> f64 {
        let p = self.power;
        p * self.theta.cos().powi(2) / (1.0 + self.inr()) + p * self.theta.sin().powi(2)
    }

    /// Symmetric beamforming sum rate `log₂(1 + SINR)`.
    pub fn beamforming_sum_rate(&self) -> f64 {
        (1.0 + self.sinr()).log2()
    }

    /// `P b bᵀ` (MISO) or the scalar `P` (SIMO).
    pub fn optimal_covariance(&self) -> SymMatrix {
        match self.kind {
            VectorKind::Miso => SymMatrix::outer(&self.beam()).scale(self.power),
            VectorKind::Simo => SymMatrix::from_diagonal(&[self.power]),
        }
    }

    pub fn optimal_pair(&self) -> CovariancePair {
        let q = self.optimal_covariance();
        CovariancePair { q1: q.clone(), q2: q }
    }

    /// The channel as general gain matrices.
    pub fn to_matrices(&self) -> ChannelMatrices {
        let d = self.d();
        let hc = self.c() * self.h;
        let (direct, cross) = match self.kind {
            VectorKind::Miso => (
                DMatrix::from_row_slice(1, 2, d.as_slice()),
                DMatrix::from_row_slice(1, 2, hc.as_slice()),
            ),
            VectorKind::Simo => (
                DMatrix::from_column_slice(2, 1, d.as_slice()),
                DMatrix::from_column_slice(2, 1, hc.as_slice()),
            ),
        };
        ChannelMatrices {
            h11: direct.clone(),
            h12: cross.clone(),
            h21: cross,
            h22: direct,
            p1: self.power,
            p2: self.power,
        }
    }
}

/// Pair of input covariance matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariancePair {
    pub q1: SymMatrix,
    pub q2: SymMatrix,
}

impl CovariancePair {
    pub fn new(q1: SymMatrix, q2: SymMatrix) -> Self {
        CovariancePair { q1, q2 }
    }

    pub fn get(&self, user: usize) -> &SymMatrix {
        if user == 0 {
            &self.q1
        } else {
            &self.q2
        }
    }

    pub fn zeros(ch: &ChannelMatrices) -> Self {
        CovariancePair {
            q1: SymMatrix::zeros(ch.tx1()),
            q2: SymMatrix::zeros(ch.tx2()),
        }
    }

    /// `Q_i = P_i / n_i · I`.
    pub fn isotropic(ch: &ChannelMatrices) -> Self {
        let iso = |n: usize, p: f64| SymMatrix::identity(n).scale(p / n as f64);
        CovariancePair {
            q1: iso(ch.tx1(), ch.p1),
            q2: iso(ch.tx2(), ch.p2),
        }
    }

    pub fn lerp(&self, other: &CovariancePair, t: f64) -> Self {
        CovariancePair {
            q1: self.q1.lerp(&other.q1, t),
            q2: self.q2.lerp(&other.q2, t),
        }
    }

    /// Dimensions must match the channel.
    pub fn check_dims(&self, ch: &ChannelMatrices) -> Result<()> {
        for (user, q) in [(0, &self.q1), (1, &self.q2)] {
            if q.dim() != ch.tx(user) {
                return Err(Error::InvalidInput(format!(
                    "dimension mismatch: Q{} is {}x{} but user {} has {} transmit antennas",
                    user + 1,
                    q.dim(),
                    q.dim(),
                    user + 1,
                    ch.tx(user)
                )));
            }
        }
        Ok(())
    }

    /// PSD within tolerance and `tr Q_i ≤ P_i + 1e-9`.
    pub fn check_feasible(&self, ch: &ChannelMatrices) -> Result<()> {
        self.check_dims(ch)?;
        for (user, q) in [(0, &self.q1), (1, &self.q2)] {
            if !matkit::is_psd(q)? {
                return Err(Error::InvalidInput(format!("Q{} is not PSD", user + 1)));
            }
            if q.trace() > ch.power(user) + 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "tr(Q{}) = {} exceeds budget {}",
                    user + 1,
                    q.trace(),
                    ch.power(user)
                )));
            }
        }
        Ok(())
    }
}

/// Result of reducing an `M`-antenna symmetric vector channel to two antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct Canonical {
    /// Angle between the direct and cross directions, in `[0, π/2]`.
    pub theta: f64,
    /// Orthonormal columns `(c, c⊥)`; only `c` when `M = 1`.
    pub basis: DMatrix<f64>,
    /// `-1` when the cross direction was flipped to make `dᵀc ≥ 0`
    /// (equivalent to `h → -h`), `+1` otherwise.
    pub cross_sign: f64,
}

/// Reduces direct/cross directions of any length `M` to the canonical
/// two-antenna form: `c → [1, 0]`, `d → [cos θ, sin θ]`.
///
/// When `θ = 0` the second basis vector completes `c` with the
/// smallest-index coordinate axis `e_k` having `c_k² ≤ ½`.
pub fn canonicalize(d_raw: &DVector<f64>, c_raw: &DVector<f64>) -> Result<Canonical> {
    if d_raw.len() != c_raw.len() || d_raw.is_empty() {
        return Err(Error::InvalidInput(format!(
            "direction vectors must share a nonzero length ({} vs {})",
            d_raw.len(),
            c_raw.len()
        )));
    }
    let (dn, cn) = (d_raw.norm(), c_raw.norm());
    if !(dn > 0.0 && cn > 0.0 && dn.is_finite() && cn.is_finite()) {
        return Err(Error::InvalidInput("direction vectors must be finite and nonzero".into()));
    }
    let d = d_raw / dn;
    let mut c = c_raw / cn;
    let mut cross_sign = 1.0;
    if d.dot(&c) < 0.0 {
        c.neg_mut();
        cross_sign = -1.0;
    }
    let m = d.len();
    let cos = d.dot(&c);
    let perp = &d - &c * cos;
    let sin = perp.norm();
    let theta = sin.atan2(cos);

    if m == 1 {
        return Ok(Canonical {
            theta: 0.0,
            basis: DMatrix::from_column_slice(1, 1, c.as_slice()),
            cross_sign,
        });
    }

    let c_perp = if sin > 1e-12 {
        perp / sin
    } else {
        let k = (0..m)
            .find(|&k| c[k] * c[k] <= 0.5)
            .expect("a unit vector has a coordinate with c_k² ≤ 1/2 when M ≥ 2");
        let mut e = DVector::zeros(m);
        e[k] = 1.0;
        let r = &e - &c * c[k];
        let n = r.norm();
        r / n
    };
    let mut basis = DMatrix::zeros(m, 2);
    basis.set_column(0, &c);
    basis.set_column(1, &c_perp);
    Ok(Canonical {
        theta: if sin > 1e-12 { theta } else { 0.0 },
        basis,
        cross_sign,
    })
}

fn half_log_ratio(k: &DMatrix<f64>, n: &DMatrix<f64>) -> Result<f64> {
    let lk = log2_det_chol(k).ok_or_else(|| Error::not_pd("signal-plus-noise covariance", f64::NAN))?;
    let ln = log2_det_chol(n).ok_or_else(|| Error::not_pd("noise covariance", f64::NAN))?;
    Ok(0.5 * (lk - ln))
}

/// Rate of a single user when the other user's signal is treated as noise.
pub(crate) fn tin_user_rate(ch: &ChannelMatrices, q: &CovariancePair, user: usize) -> Result<f64> {
    let v = ch.view(user);
    let own = q.get(user);
    let other = q.get(1 - user);
    let rx = v.direct.nrows();
    let noise = DMatrix::identity(rx, rx) + v.cross_in * other.as_matrix() * v.cross_in.transpose();
    let total = &noise + v.direct * own.as_matrix() * v.direct.transpose();
    half_log_ratio(&total, &noise)
}

/// Gaussian-input sum rate with interference treated as noise:
/// `Σ_i ½ log₂ det(I + H_ii Q_i H_iiᵀ (I + H_ij Q_j H_ijᵀ)⁻¹)`.
pub fn tin_sum_rate(ch: &ChannelMatrices, q: &CovariancePair) -> Result<f64> {
    q.check_dims(ch)?;
    Ok(tin_user_rate(ch, q, 0)? + tin_user_rate(ch, q, 1)?)
}

/// Sum rate of the genie-aided channel where receiver `i` also observes
/// `S_i = H_ji X_i + W_i`, evaluated from the joint covariance of
/// `(Y_i, S_i)` with and without conditioning on `X_i`.
///
/// Returns `+∞` when a valid genie makes the conditional covariance
/// singular (the side information then cancels the noise exactly).
pub fn ga_sum_rate(ch: &ChannelMatrices, q: &CovariancePair, g: &GenieParams) -> Result<f64> {
    q.check_dims(ch)?;
    g.check_dims(ch)?;
    g.validate()?;
    let mut total = 0.0;
    for user in 0..2 {
        total += ga_user_rate(ch, q, g, user)?;
    }
    Ok(total)
}

fn ga_user_rate(ch: &ChannelMatrices, q: &CovariancePair, g: &GenieParams, user: usize) -> Result<f64> {
    let v = ch.view(user);
    let (a, sigma) = g.get(user);
    let own = q.get(user).as_matrix();
    let other = q.get(1 - user).as_matrix();
    let ry = v.direct.nrows();
    let rs = v.cross_out.nrows();
    let n = ry + rs;

    let mut cond = DMatrix::zeros(n, n);
    let interference = DMatrix::identity(ry, ry) + v.cross_in * other * v.cross_in.transpose();
    cond.view_mut((0, 0), (ry, ry)).copy_from(&interference);
    cond.view_mut((0, ry), (ry, rs)).copy_from(a);
    cond.view_mut((ry, 0), (rs, ry)).copy_from(&a.transpose());
    cond.view_mut((ry, ry), (rs, rs)).copy_from(sigma.as_matrix());

    let mut stacked = DMatrix::zeros(n, v.direct.ncols());
    stacked.view_mut((0, 0), (ry, v.direct.ncols())).copy_from(v.direct);
    stacked
        .view_mut((ry, 0), (rs, v.direct.ncols()))
        .copy_from(v.cross_out);
    let joint = &cond + &stacked * own * stacked.transpose();

    match log2_det_chol(&cond) {
        Some(lc) => {
            let lj = log2_det_chol(&joint)
                .ok_or_else(|| Error::not_pd("genie-aided output covariance", f64::NAN))?;
            Ok(0.5 * (lj - lc))
        }
        None => Ok(f64::INFINITY),
    }
}

/// Extra sum rate handed out by the genie: `ga_sum_rate - tin_sum_rate`.
pub fn diff_rate(ch: &ChannelMatrices, q: &CovariancePair, g: &GenieParams) -> Result<f64> {
    Ok(ga_sum_rate(ch, q, g)? - tin_sum_rate(ch, q)?)
}

/// Raw JSON form of a general channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixChannelSpec {
    #[serde(rename = "H11")]
    pub h11: Vec<Vec<f64>>,
    #[serde(rename = "H12")]
    pub h12: Vec<Vec<f64>>,
    #[serde(rename = "H21")]
    pub h21: Vec<Vec<f64>>,
    #[serde(rename = "H22")]
    pub h22: Vec<Vec<f64>>,
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
}

/// Raw JSON form of a symmetric vector channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorChannelSpec {
    pub kind: VectorKind,
    pub theta: f64,
    pub h: f64,
    #[serde(rename = "P")]
    pub p: f64,
}

/// Either accepted channel description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Matrices(MatrixChannelSpec),
    Vector(VectorChannelSpec),
}

/// A parsed and validated channel description.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelInput {
    Matrices(ChannelMatrices),
    Vector(SymmetricVectorChannel),
}

impl ChannelInput {
    pub fn to_matrices(&self) -> ChannelMatrices {
        match self {
            ChannelInput::Matrices(m) => m.clone(),
            ChannelInput::Vector(v) => v.to_matrices(),
        }
    }
}

/// Converts nested row arrays into a matrix, naming the matrix on failure.
pub fn matrix_from_rows(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if nr == 0 || nc == 0 {
        return Err(Error::InvalidInput(format!("{name} must be a non-empty matrix")));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != nc) {
        return Err(Error::InvalidInput(format!(
            "{name}: row {i} has {} entries, expected {nc}",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl ChannelSpec {
    pub fn into_input(self) -> Result<ChannelInput> {
        match self {
            ChannelSpec::Matrices(s) => Ok(ChannelInput::Matrices(ChannelMatrices::new(
                matrix_from_rows("H11", &s.h11)?,
                matrix_from_rows("H12", &s.h12)?,
                matrix_from_rows("H21", &s.h21)?,
                matrix_from_rows("H22", &s.h22)?,
                s.p1,
                s.p2,
            )?)),
            ChannelSpec::Vector(s) => Ok(ChannelInput::Vector(SymmetricVectorChannel::new(
                s.theta, s.h, s.p, s.kind,
            )?)),
        }
    }
}

impl From<&ChannelMatrices> for MatrixChannelSpec {
    fn from(ch: &ChannelMatrices) -> Self {
        MatrixChannelSpec {
            h11: matrix_to_rows(&ch.h11),
            h12: matrix_to_rows(&ch.h12),
            h21: matrix_to_rows(&ch.h21),
            h22: matrix_to_rows(&ch.h22),
            p1: ch.p1,
            p2: ch.p2,
        }
    }
}
