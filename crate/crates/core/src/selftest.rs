//! Quick invariant suite exposed through the CLI.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{ChannelMatrices, CovariancePair, SymmetricVectorChannel};
use crate::covopt::{brute_force_best, optimize_tin, random_feasible, tin_gradient, GridSpec, OptimizeOptions};
use crate::channel::tin_sum_rate;
use crate::error::Result;
use crate::matkit::{rank2_eigenvalues, sym_eigen, top_eig_rank2_predicate, SymMatrix};
use crate::regime::{certify_miso, certify_simo, siso_threshold, threshold_h0, threshold_residual, ThresholdQuery};

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<SelfCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.len() - self.passed()
    }
}

fn record(checks: &mut Vec<SelfCheck>, name: &'static str, outcome: Result<(bool, String)>) {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    checks.push(SelfCheck { name, passed, detail });
}

/// Runs the invariant suite with random draws from `seed`.
pub fn run(seed: u64) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    record(&mut checks, "threshold_siso_consistency", (|| {
        let mut worst: f64 = 0.0;
        for p in [0.0, 0.1, 1.0, 10.0, 100.0] {
            let a = threshold_h0(&ThresholdQuery::new(0.0, p)?);
            worst = worst.max((a - siso_threshold(p)?).abs());
        }
        Ok((worst <= 1e-9, format!("max |h0(0,P) - siso(P)| = {worst:e}")))
    })());

    record(&mut checks, "threshold_root_and_lower_bound", (|| {
        let (mut res, mut below): (f64, f64) = (0.0, 0.0);
        for _ in 0..200 {
            let q = ThresholdQuery::new(rng.random_range(0.0..=FRAC_PI_2), 10f64.powf(rng.random_range(-2.0..3.0)))?;
            let h = threshold_h0(&q);
            res = res.max(threshold_residual(&q, h).abs());
            below = below.max(q.theta.sin() - h);
        }
        Ok((res <= 1e-9 && below <= 1e-12, format!("max |g(h0)| = {res:e}, max sinθ - h0 = {below:e}")))
    })());

    record(&mut checks, "miso_simo_certificates", (|| {
        let mut failures = 0;
        for _ in 0..20 {
            let theta = rng.random_range(0.05..FRAC_PI_2);
            let p = 10f64.powf(rng.random_range(-1.0..2.0));
            let h = 0.99 * threshold_h0(&ThresholdQuery::new(theta, p)?);
            let m = certify_miso(&SymmetricVectorChannel::miso(theta, h, p)?)?;
            let s = certify_simo(&SymmetricVectorChannel::simo(theta, h, p)?)?;
            if !m.certified() || !s.certified() {
                failures += 1;
            }
        }
        Ok((failures == 0, format!("{failures}/20 instances not certified")))
    })());

    record(&mut checks, "rank2_eigen_predicate", (|| {
        let mut bad = 0;
        for _ in 0..200 {
            let x1 = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            let mut x2 = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            if x1.dot(&x2) <= 0.0 {
                x2.neg_mut();
            }
            if x1.dot(&x2) <= 1e-6 {
                continue;
            }
            let m = SymMatrix::outer(&x1).add(&SymMatrix::outer(&x2));
            let eig = sym_eigen(&m)?;
            let (l1, l2) = rank2_eigenvalues(&x1, &x2);
            let closed_ok = (l1 - eig.values[0]).abs() <= 1e-10 && (l2 - eig.values[1]).abs() <= 1e-10;
            let top = top_eig_rank2_predicate(&x1, &x2, &eig.vector(0))?;
            let bottom = top_eig_rank2_predicate(&x1, &x2, &eig.vector(1))?;
            if !(closed_ok && top && !bottom) {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("{bad} disagreements")))
    })());

    record(&mut checks, "gradient_finite_difference", (|| {
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let ch = random_channel(&mut rng, 2)?;
            let q = CovariancePair::new(random_feasible(2, ch.p1, &mut rng), random_feasible(2, ch.p2, &mut rng));
            let (g1, _) = tin_gradient(&ch, &q)?;
            let eps = 1e-5;
            let e = SymMatrix::from_diagonal(&[1.0, 0.0]).scale(eps);
            let up = tin_sum_rate(&ch, &CovariancePair::new(q.q1.add(&e), q.q2.clone()))?;
            let dn = tin_sum_rate(&ch, &CovariancePair::new(q.q1.sub(&e), q.q2.clone()))?;
            let fd = (up - dn) / (2.0 * eps);
            worst = worst.max((fd - g1[(0, 0)]).abs() / g1[(0, 0)].abs().max(1e-3));
        }
        Ok((worst <= 1e-5, format!("max relative error {worst:e}")))
    })());

    record(&mut checks, "optimizer_vs_brute_force", (|| {
        let ch = random_channel(&mut rng, 2)?;
        let r = optimize_tin(&ch, &OptimizeOptions { seed, ..Default::default() })?;
        let (_, brute) = brute_force_best(&ch, &GridSpec::default())?;
        Ok((r.rate >= brute - 1e-4, format!("optimizer {} vs grid {brute}", r.rate)))
    })());

    record(&mut checks, "miso_optimizer_matches_beamforming", (|| {
        let sch = SymmetricVectorChannel::miso(FRAC_PI_4, 0.3, 1.0)?;
        let r = optimize_tin(&sch.to_matrices(), &OptimizeOptions { seed, ..Default::default() })?;
        let gap = (r.rate - sch.beamforming_sum_rate()).abs();
        Ok((gap <= 1e-6, format!("|rate - log2(1+SINR)| = {gap:e}")))
    })());

    SelftestReport { checks }
}

fn random_channel(rng: &mut ChaCha8Rng, n: usize) -> Result<ChannelMatrices> {
    use rand_distr::StandardNormal;
    let mut m = |scale: f64| nalgebra::DMatrix::from_fn(n, n, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
    let (h11, h12, h21, h22) = (m(1.0), m(0.5), m(0.5), m(1.0));
    ChannelMatrices::new(h11, h12, h21, h22, 1.0 + 4.0 * rng.random::<f64>(), 1.0 + 4.0 * rng.random::<f64>())
}
