//! Low-interference threshold and certification of symmetric MISO/SIMO
//! channels.
//!
//! For a symmetric two-antenna channel with angle `θ` between the direct and
//! cross directions, beamforming with TIN is sum-capacity optimal whenever
//! `h` lies below `h₀(θ, P)`, the positive root of
//! `h² = sin²θ + ((cos θ / (1 + h²P) - h)₊)²`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

use crate::channel::{diff_rate, SymmetricVectorChannel, VectorKind};
use crate::covopt::random_feasible;
use crate::error::{Error, Result};
use crate::genie::{
    miso_genie, simo_genie_search, simo_smartness_residual, simo_usefulness_slack, smartness_residual,
    usefulness_margins, GenieParams,
};
use crate::matkit::{schur_margin, sym_eigen, top_eig_rank2_predicate, SymMatrix};

/// `(θ, P)` pair for the threshold equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdQuery {
    pub theta: f64,
    pub power: f64,
}

impl ThresholdQuery {
    /// `θ ∈ [0, π/2]`, `P ≥ 0`. `P = 0` is accepted as the interference-free
    /// limit of the equation.
    pub fn new(theta: f64, power: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidInput(format!("theta must lie in [0, π/2], got {theta}")));
        }
        if !(power.is_finite() && power >= 0.0) {
            return Err(Error::InvalidInput(format!("P must be finite and nonnegative, got {power}")));
        }
        Ok(ThresholdQuery { theta, power })
    }

    /// `cos θ / (1 + P sin²θ) ≤ sin θ`: the threshold is exactly `sin θ`.
    pub fn collapsed(&self) -> bool {
        let (s, c) = self.theta.sin_cos();
        c / (1.0 + self.power * s * s) <= s
    }
}

/// `g(h) = h² - sin²θ - ((cos θ / (1 + h²P) - h)₊)²`.
pub fn threshold_residual(q: &ThresholdQuery, h: f64) -> f64 {
    let (s, c) = q.theta.sin_cos();
    let x = (c / (1.0 + h * h * q.power) - h).max(0.0);
    h * h - s * s - x * x
}

/// Positive root `h₀(θ, P)` of the threshold equation, by bisection on
/// `[sin θ·(1 - 10⁻¹⁵), 1]` run down to adjacent floating-point values.
pub fn threshold_h0(q: &ThresholdQuery) -> f64 {
    let s = q.theta.sin();
    if q.collapsed() {
        return s;
    }
    let mut lo = s * (1.0 - 1e-15);
    let mut hi = 1.0;
    if threshold_residual(q, hi) <= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if threshold_residual(q, mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if threshold_residual(q, hi).abs() < threshold_residual(q, lo).abs() {
        hi
    } else {
        lo
    }
}

/// Root of `h (1 + h²P) = 1/2` on `[0, 1/2]`: the threshold at `θ = 0`.
pub fn siso_threshold(power: f64) -> Result<f64> {
    if !(power.is_finite() && power >= 0.0) {
        return Err(Error::InvalidInput(format!("P must be finite and nonnegative, got {power}")));
    }
    let f = |h: f64| h * (1.0 + h * h * power) - 0.5;
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(hi).abs() < f(lo).abs() { hi } else { lo })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    CertifiedLowInterference,
    /// Nothing is claimed either way.
    Uncertified,
}

/// One named step of a certification chain. `margin` is signed so that
/// nonnegative values pass; it is `None` when the step could not be
/// evaluated because an earlier step failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub margin: Option<f64>,
    pub detail: String,
}

impl Check {
    fn margin(name: &'static str, margin: f64, detail: impl Into<String>) -> Self {
        Check {
            name,
            passed: margin >= 0.0,
            margin: Some(margin),
            detail: detail.into(),
        }
    }

    fn skipped(name: &'static str, why: &str) -> Self {
        Check {
            name,
            passed: false,
            margin: None,
            detail: format!("not evaluated: {why}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeVerdict {
    pub kind: VectorKind,
    pub theta: f64,
    pub power: f64,
    pub h: f64,
    pub h0: f64,
    pub classification: Classification,
    pub evidence: Vec<Check>,
    /// Genie-aided minus TIN sum rate at the beamforming optimum.
    pub diff_rate: Option<f64>,
}

impl RegimeVerdict {
    fn from_checks(sch: &SymmetricVectorChannel, h0: f64, evidence: Vec<Check>, diff: Option<f64>) -> Self {
        let classification = if evidence.iter().all(|c| c.passed) {
            Classification::CertifiedLowInterference
        } else {
            Classification::Uncertified
        };
        RegimeVerdict {
            kind: sch.kind,
            theta: sch.theta,
            power: sch.power,
            h: sch.h,
            h0,
            classification,
            evidence,
            diff_rate: diff,
        }
    }

    pub fn certified(&self) -> bool {
        self.classification == Classification::CertifiedLowInterference
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.evidence.iter().find(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.evidence.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    /// Random feasible covariances for the trace inequality.
    pub samples: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { samples: 500, seed: 42 }
    }
}

const EQ_TOL: f64 = 1e-9;
const SMART_TOL: f64 = 1e-10;

fn threshold_of(sch: &SymmetricVectorChannel) -> f64 {
    threshold_h0(&ThresholdQuery {
        theta: sch.theta,
        power: sch.power,
    })
}

/// Theorem-level certificate for a symmetric MISO channel: builds the
/// scalar genie and checks every step that makes beamforming with TIN
/// sum-capacity optimal.
pub fn certify_miso(sch: &SymmetricVectorChannel) -> Result<RegimeVerdict> {
    certify_miso_with(sch, &CertifyOptions::default())
}

pub fn certify_miso_with(sch: &SymmetricVectorChannel, opts: &CertifyOptions) -> Result<RegimeVerdict> {
    if sch.kind != VectorKind::Miso {
        return Err(Error::InvalidInput("certify_miso needs a MISO channel".into()));
    }
    let h0 = threshold_of(sch);
    let (h, p) = (sch.h, sch.power);
    let (c, d, b) = (sch.c(), sch.d(), sch.beam());
    let mut ev = vec![Check::margin(
        "below_threshold",
        h0 - h,
        format!("h = {h}, h0 = {h0}"),
    )];
    if h >= h0 {
        ev.last_mut().unwrap().passed = false;
    }

    let genie = match miso_genie(sch) {
        Ok(g) => g,
        Err(Error::NoValidGenie { a }) => {
            ev.push(Check::margin("a_lt_half", 0.5 - a, format!("a = {a}")));
            ev.last_mut().unwrap().passed = false;
            for name in ["mu_h_lt_cos", "eigvec_M", "trace_ineq", "genie_valid", "usefulness", "smartness"] {
                ev.push(Check::skipped(name, "no genie with a ≤ 1/2"));
            }
            return Ok(RegimeVerdict::from_checks(sch, h0, ev, None));
        }
        Err(e) => return Err(e),
    };
    let mut a_check = Check::margin("a_lt_half", 0.5 - genie.a, format!("a = {}", genie.a));
    a_check.passed = genie.a < 0.5;
    ev.push(a_check);

    let cos = sch.theta.cos();
    let mut mu_check = Check::margin(
        "mu_h_lt_cos",
        cos - genie.mu * h,
        format!("μh = {}, cos θ = {cos}", genie.mu * h),
    );
    mu_check.passed = genie.mu * h < cos || h == 0.0;
    ev.push(mu_check);

    // M = x₁x₁ᵀ + x₂x₂ᵀ with x₁ = d - μhc, x₂ = hc.
    let x1 = &d - &c * (genie.mu * h);
    let x2 = &c * h;
    let m = SymMatrix::outer(&x1).add(&SymMatrix::outer(&x2));
    ev.push(eigvec_check(&m, &x1, &x2, &b)?);

    let q_star = sch.optimal_covariance();
    let target = m.inner(&q_star);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = f64::INFINITY;
    let extremes = [
        SymMatrix::outer(&c).scale(p),
        SymMatrix::outer(&d).scale(p),
        SymMatrix::identity(2).scale(0.5 * p),
    ];
    for q in extremes.into_iter().chain((0..opts.samples).map(|_| random_feasible(2, p, &mut rng))) {
        worst = worst.min(target - m.inner(&q));
    }
    let mut trace_check = Check::margin(
        "trace_ineq",
        worst,
        format!("min tr(MQ*) - tr(MQ) over {} samples and 3 extreme points", opts.samples),
    );
    trace_check.passed = worst >= -EQ_TOL;
    ev.push(trace_check);

    let gp = GenieParams::from_miso(&genie);
    let valid = schur_margin(&gp.a1, &gp.sigma1)?;
    ev.push(Check::margin(
        "genie_valid",
        valid,
        format!("Σ = {}, a = {}", genie.sigma, genie.a),
    ));

    let margins = usefulness_margins(&gp)?;
    let worst_eq = margins[0].abs().max(margins[1].abs());
    let mut use_check = Check::margin(
        "usefulness",
        EQ_TOL - worst_eq,
        format!("slack of Σ² - Σ + a² ≤ 0: {:e}, {:e}", margins[0], margins[1]),
    );
    use_check.passed = worst_eq <= EQ_TOL;
    ev.push(use_check);

    let ch = sch.to_matrices();
    let q = sch.optimal_pair();
    let smart = smartness_residual(&ch, &q, &gp)?;
    ev.push(Check::margin(
        "smartness",
        SMART_TOL - smart,
        format!("residual {smart:e} at Q* = P b bᵀ"),
    ));
    let diff = diff_rate(&ch, &q, &gp)?;
    Ok(RegimeVerdict::from_checks(sch, h0, ev, Some(diff)))
}

fn eigvec_check(m: &SymMatrix, x1: &DVector<f64>, x2: &DVector<f64>, b: &DVector<f64>) -> Result<Check> {
    let eig = sym_eigen(m)?;
    let mb = m.as_matrix() * b;
    let rayleigh = b.dot(&mb);
    let residual = (&mb - b * rayleigh).norm();
    let lambda_max = eig.max();
    let is_top = rayleigh >= lambda_max - EQ_TOL * lambda_max.max(1.0);
    let cross = x1.dot(x2);
    let predicate = if cross > 0.0 && residual <= EQ_TOL {
        Some(top_eig_rank2_predicate(x1, x2, b)?)
    } else {
        None
    };
    let gap = rayleigh - eig.values[eig.values.len() - 1];
    Ok(Check {
        name: "eigvec_M",
        passed: residual <= EQ_TOL && is_top && predicate != Some(false),
        margin: Some(if is_top { gap } else { rayleigh - lambda_max }),
        detail: format!(
            "residual {residual:e}, bᵀMb = {rayleigh}, λmax = {lambda_max}, rank-2 predicate {}",
            match predicate {
                Some(p) => p.to_string(),
                None => "n/a".into(),
            }
        ),
    })
}

/// Certificate for a symmetric SIMO channel through the explicit genie
/// construction. The threshold is inclusive here because the construction
/// succeeds on the boundary itself.
pub fn certify_simo(sch: &SymmetricVectorChannel) -> Result<RegimeVerdict> {
    if sch.kind != VectorKind::Simo {
        return Err(Error::InvalidInput("certify_simo needs a SIMO channel".into()));
    }
    let h0 = threshold_of(sch);
    let mut ev = vec![Check::margin(
        "below_threshold",
        h0 - sch.h,
        format!("h = {}, h0 = {h0}", sch.h),
    )];
    let Some(g) = simo_genie_search(sch)? else {
        ev.push(Check {
            name: "genie_found",
            passed: false,
            margin: None,
            detail: "no (k, η, v) satisfies validity, usefulness and smartness".into(),
        });
        for name in ["genie_valid", "usefulness", "smartness"] {
            ev.push(Check::skipped(name, "no genie"));
        }
        return Ok(RegimeVerdict::from_checks(sch, h0, ev, None));
    };
    ev.push(Check {
        name: "genie_found",
        passed: true,
        margin: None,
        detail: format!("k = {}, η = {}, v = [{}, {}]", g.k, g.eta, g.v[0], g.v[1]),
    });
    let c = sch.c();
    let gp = GenieParams::from_simo(&g, &c);
    ev.push(Check::margin(
        "genie_valid",
        schur_margin(&gp.a1, &gp.sigma1)?,
        "I - AΣ⁻¹Aᵀ ⪰ 0",
    ));
    let slack = simo_usefulness_slack(&g, &c)?;
    let mut use_check = Check::margin("usefulness", slack, "η ≤ (η - k²) / (η - k²(1 - (cᵀv)²))");
    use_check.passed = slack >= -1e-12;
    ev.push(use_check);
    let smart = simo_smartness_residual(sch, &g);
    ev.push(Check::margin(
        "smartness",
        SMART_TOL - smart,
        format!("|h - k vᵀJ⁻¹d| = {smart:e}"),
    ));
    let diff = diff_rate(&sch.to_matrices(), &sch.optimal_pair(), &gp)?;
    Ok(RegimeVerdict::from_checks(sch, h0, ev, Some(diff)))
}

/// Dispatches on the channel kind.
pub fn classify(sch: &SymmetricVectorChannel) -> Result<RegimeVerdict> {
    match sch.kind {
        VectorKind::Miso => certify_miso(sch),
        VectorKind::Simo => certify_simo(sch),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    #[serde(rename = "P")]
    pub power: f64,
    pub h0: f64,
    pub sin_theta: f64,
}

/// Threshold table over `θ × P`, θ-major.
pub fn sweep_threshold(thetas: &[f64], powers: &[f64]) -> Result<Vec<SweepRow>> {
    if thetas.is_empty() || powers.is_empty() {
        return Err(Error::InvalidInput("sweep grids must be nonempty".into()));
    }
    let queries = thetas
        .iter()
        .flat_map(|&t| powers.iter().map(move |&p| ThresholdQuery::new(t, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(queries
        .par_iter()
        .map(|q| SweepRow {
            theta: q.theta,
            power: q.power,
            h0: threshold_h0(q),
            sin_theta: q.theta.sin(),
        })
        .collect())
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Places where a larger `P` gives a larger threshold at the same `θ`, as
/// `(θ, P_small, P_large, excess)`. Figure-level observation only.
pub fn monotonicity_violations(rows: &[SweepRow], tol: f64) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            if a.theta == b.theta && b.power > a.power && b.h0 > a.h0 + tol {
                out.push((a.theta, a.power, b.power, b.h0 - a.h0));
            }
        }
    }
    out
}

/// CSV with header `theta,P,h0,sin_theta`, 17 significant digits.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("theta,P,h0,sin_theta\n");
    for r in rows {
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.theta, r.power, r.h0, r.sin_theta
        ));
    }
    s
}
