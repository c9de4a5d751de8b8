//! TIN sum-rate maximisation over trace-constrained covariance pairs.
//!
//! The TIN objective is not concave, so the optimiser runs projected
//! gradient ascent from several starts and reports every distinct
//! stationary point it lands on together with KKT and rank diagnostics.

use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{LN_2, PI};

use crate::channel::{tin_sum_rate, ChannelMatrices, CovariancePair};
use crate::error::{Error, Result};
use crate::matkit::{inverse_pd, sym_eigen, SymMatrix};

/// `λ_min / λ_max` above this is full rank.
pub const FULL_RANK_RATIO: f64 = 1e-6;
/// `λ_min / λ_max` at or below this is rank deficient.
pub const DEFICIENT_RATIO: f64 = 1e-8;
/// Largest KKT residual accepted as a stationary point.
pub const KKT_CERTIFY_TOL: f64 = 1e-6;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-18;
const MAX_STEP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankClass {
    Full,
    Indeterminate,
    Deficient,
}

/// Rank class of a PSD matrix and its eigenvalue ratio `λ_min / λ_max`
/// (negative eigenvalues clamped to zero; the zero matrix has ratio 0).
pub fn classify_rank(q: &SymMatrix) -> Result<(RankClass, f64)> {
    let eig = sym_eigen(q)?;
    let max = eig.max();
    let ratio = if max > 0.0 { eig.min().max(0.0) / max } else { 0.0 };
    let class = if ratio > FULL_RANK_RATIO {
        RankClass::Full
    } else if ratio <= DEFICIENT_RATIO {
        RankClass::Deficient
    } else {
        RankClass::Indeterminate
    };
    Ok((class, ratio))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankFlag {
    pub full_rank: bool,
    pub min_eig_ratio: f64,
    pub class: RankClass,
}

impl RankFlag {
    pub fn of(q: &SymMatrix) -> Result<Self> {
        let (class, min_eig_ratio) = classify_rank(q)?;
        Ok(RankFlag {
            full_rank: class == RankClass::Full,
            min_eig_ratio,
            class,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    /// Number of starting points; the first is always the isotropic one.
    pub restarts: usize,
    /// First trial step of the line search.
    pub step: f64,
    /// Projected-gradient norm that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Keep the rate sequence of the winning restart.
    pub record_trajectory: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            restarts: 8,
            step: 1.0,
            tol: 1e-8,
            max_iter: 20_000,
            seed: 42,
            record_trajectory: false,
        }
    }
}

/// A stationary point reached by one restart.
#[derive(Debug, Clone)]
pub struct LocalOptimum {
    pub q: CovariancePair,
    pub rate: f64,
    pub kkt_residual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Restarts that ended here.
    pub hits: usize,
}

#[derive(Debug, Clone)]
pub struct OptimizationReport {
    pub q_star: CovariancePair,
    pub rate: f64,
    pub kkt_residual: f64,
    pub rank_flags: [RankFlag; 2],
    pub restarts_used: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Distinct local optima ordered best first; `local_optima[0]` is `q_star`.
    pub local_optima: Vec<LocalOptimum>,
    pub trajectory: Vec<f64>,
}

/// Analytic gradient of the TIN sum rate (bits) with respect to `Q₁` and
/// `Q₂`, in the sense `dR = tr(∇₁ dQ₁) + tr(∇₂ dQ₂)`.
pub fn tin_gradient(ch: &ChannelMatrices, q: &CovariancePair) -> Result<(SymMatrix, SymMatrix)> {
    q.check_dims(ch)?;
    let c = 0.5 / LN_2;
    let mut own_terms = Vec::with_capacity(2);
    let mut leak_terms = Vec::with_capacity(2);
    for user in 0..2 {
        let v = ch.view(user);
        let rx = v.direct.nrows();
        let noise = q.get(1 - user).congruence(v.cross_in).add(&SymMatrix::identity(rx));
        let total = noise.add(&q.get(user).congruence(v.direct));
        let total_inv = inverse_pd(&total, "signal-plus-noise covariance")?;
        let noise_inv = inverse_pd(&noise, "interference-plus-noise covariance")?;
        // Receiver `user` sees its own signal through `direct`, and the other
        // user's signal through `cross_in` in both log-dets.
        own_terms.push(total_inv.congruence(&v.direct.transpose()));
        leak_terms.push(total_inv.sub(&noise_inv).congruence(&v.cross_in.transpose()));
    }
    let g1 = own_terms[0].add(&leak_terms[1]).scale(c);
    let g2 = own_terms[1].add(&leak_terms[0]).scale(c);
    Ok((g1, g2))
}

/// Frobenius projection onto `{Q ⪰ 0, tr Q ≤ budget}`: clamp the spectrum
/// at zero, then water-fill it down onto the budget if needed.
pub fn psd_trace_project(s: &SymMatrix, budget: f64) -> Result<SymMatrix> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::InvalidInput(format!("budget must be positive, got {budget}")));
    }
    let eig = sym_eigen(s)?;
    let clamped: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if total <= budget {
        return Ok(eig.reconstruct_with(|x| x.max(0.0)));
    }
    let tau = simplex_shift(&clamped, budget);
    Ok(eig.reconstruct_with(|x| (x - tau).max(0.0)))
}

// Smallest τ ≥ 0 with Σ max(λ - τ, 0) = budget, for λ sorted descending.
fn simplex_shift(desc: &[f64], budget: f64) -> f64 {
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (k, &x) in desc.iter().enumerate() {
        acc += x;
        let t = (acc - budget) / (k + 1) as f64;
        if k + 1 == desc.len() || desc[k + 1] <= t {
            tau = t;
            break;
        }
    }
    tau.max(0.0)
}

/// Residual of the KKT system `∇_i R = λ_i I - M_i`, `M_i ⪰ 0`,
/// `M_i Q_i = 0`, `λ_i (tr Q_i - P_i) = 0`, `λ_i ≥ 0`, with the multiplier
/// fitted as `λ_i = max(0, tr(∇_i Q_i) / tr Q_i)`.
pub fn kkt_residual(ch: &ChannelMatrices, q: &CovariancePair) -> Result<f64> {
    let grads = tin_gradient(ch, q)?;
    let mut total = 0.0;
    for (user, g) in [&grads.0, &grads.1].into_iter().enumerate() {
        let qi = q.get(user);
        let tr = qi.trace();
        let lambda = if tr > 0.0 { (g.inner(qi) / tr).max(0.0) } else { 0.0 };
        let m = SymMatrix::identity(qi.dim()).scale(lambda).sub(g);
        let eig = sym_eigen(&m)?;
        let neg = eig.values.iter().map(|x| x.min(0.0).powi(2)).sum::<f64>().sqrt();
        let comp = (m.as_matrix() * qi.as_matrix()).norm();
        let slack = lambda * (tr - ch.power(user)).abs();
        total += neg + comp + slack;
    }
    Ok(total)
}

/// Random PSD matrix with trace drawn uniformly in `(0, budget]`.
pub fn random_feasible<R: Rng + ?Sized>(n: usize, budget: f64, rng: &mut R) -> SymMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let s = SymMatrix::from_square(&g * g.transpose());
    let tr = s.trace();
    let target = budget * (1.0 - rng.random::<f64>());
    if tr > 0.0 {
        s.scale(target / tr)
    } else {
        SymMatrix::identity(n).scale(target / n as f64)
    }
}

struct Run {
    q: CovariancePair,
    rate: f64,
    converged: bool,
    iterations: usize,
    trajectory: Vec<f64>,
}

fn project_pair(ch: &ChannelMatrices, q1: &SymMatrix, q2: &SymMatrix) -> Result<CovariancePair> {
    Ok(CovariancePair::new(
        psd_trace_project(q1, ch.p1)?,
        psd_trace_project(q2, ch.p2)?,
    ))
}

fn pg_norm(ch: &ChannelMatrices, q: &CovariancePair, g: &(SymMatrix, SymMatrix)) -> Result<f64> {
    let p = project_pair(ch, &q.q1.add(&g.0), &q.q2.add(&g.1))?;
    Ok((p.q1.sub(&q.q1).frobenius_norm().powi(2) + p.q2.sub(&q.q2).frobenius_norm().powi(2)).sqrt())
}

fn ascend(ch: &ChannelMatrices, start: CovariancePair, opts: &OptimizeOptions) -> Result<Run> {
    let mut q = project_pair(ch, &start.q1, &start.q2)?;
    let mut rate = tin_sum_rate(ch, &q)?;
    let mut step = opts.step;
    let mut trajectory = if opts.record_trajectory { vec![rate] } else { Vec::new() };
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let g = tin_gradient(ch, &q)?;
        if pg_norm(ch, &q, &g)? <= opts.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut t = step;
        let accepted = loop {
            let cand = project_pair(ch, &q.q1.add(&g.0.scale(t)), &q.q2.add(&g.1.scale(t)))?;
            let gain = g.0.inner(&cand.q1.sub(&q.q1)) + g.1.inner(&cand.q2.sub(&q.q2));
            let r = tin_sum_rate(ch, &cand)?;
            if r >= rate + ARMIJO * gain && gain >= 0.0 {
                break Some((cand, r));
            }
            t *= 0.5;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((cand, r)) = accepted else {
            // No ascent step left at machine precision.
            converged = pg_norm(ch, &q, &g)? <= opts.tol.max(1e-12) * 10.0;
            break;
        };
        q = cand;
        rate = r;
        if opts.record_trajectory {
            trajectory.push(rate);
        }
        step = (2.0 * t).min(MAX_STEP);
    }
    Ok(Run {
        q,
        rate,
        converged,
        iterations,
        trajectory,
    })
}

fn starting_points(ch: &ChannelMatrices, opts: &OptimizeOptions) -> Vec<CovariancePair> {
    let mut starts = vec![CovariancePair::isotropic(ch)];
    for k in 1..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
        starts.push(CovariancePair::new(
            random_feasible(ch.tx1(), ch.p1, &mut rng),
            random_feasible(ch.tx2(), ch.p2, &mut rng),
        ));
    }
    starts
}

fn vectorised(q: &SymMatrix) -> Vec<f64> {
    q.as_matrix().iter().copied().collect()
}

// Highest rate, then lowest KKT residual, then lexicographic on Q₁.
fn better(a: &LocalOptimum, b: &LocalOptimum) -> std::cmp::Ordering {
    b.rate
        .total_cmp(&a.rate)
        .then(a.kkt_residual.total_cmp(&b.kkt_residual))
        .then_with(|| {
            let (va, vb) = (vectorised(&a.q.q1), vectorised(&b.q.q1));
            va.iter()
                .zip(&vb)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
}

/// Maximises the TIN sum rate by multi-start projected gradient ascent with
/// Armijo backtracking. Restarts run in parallel; the result does not
/// depend on scheduling.
pub fn optimize_tin(ch: &ChannelMatrices, opts: &OptimizeOptions) -> Result<OptimizationReport> {
    if !(opts.tol > 0.0 && opts.step > 0.0) {
        return Err(Error::InvalidInput("tol and step must be positive".into()));
    }
    let starts = starting_points(ch, opts);
    let runs: Vec<Result<Run>> = starts.into_par_iter().map(|s| ascend(ch, s, opts)).collect();
    let mut found = Vec::new();
    let mut trajectories = Vec::new();
    for run in runs {
        let run = run?;
        let kkt = kkt_residual(ch, &run.q)?;
        trajectories.push(run.trajectory);
        found.push(LocalOptimum {
            q: run.q,
            rate: run.rate,
            kkt_residual: kkt,
            converged: run.converged,
            iterations: run.iterations,
            hits: 1,
        });
    }
    let restarts_used = found.len();
    let total_iterations = found.iter().map(|o| o.iterations).sum();

    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&i, &j| better(&found[i], &found[j]));
    let trajectory = std::mem::take(&mut trajectories[order[0]]);

    let mut distinct: Vec<LocalOptimum> = Vec::new();
    for i in order {
        let cand = &found[i];
        let dup = distinct.iter_mut().find(|d| {
            (d.rate - cand.rate).abs() <= 1e-8
                && d.q.q1.sub(&cand.q.q1).frobenius_norm() + d.q.q2.sub(&cand.q.q2).frobenius_norm() <= 1e-4
        });
        match dup {
            Some(d) => d.hits += 1,
            None => distinct.push(cand.clone()),
        }
    }

    let best = &distinct[0];
    Ok(OptimizationReport {
        q_star: best.q.clone(),
        rate: best.rate,
        kkt_residual: best.kkt_residual,
        rank_flags: [RankFlag::of(&best.q.q1)?, RankFlag::of(&best.q.q2)?],
        restarts_used,
        converged: best.converged,
        iterations: total_iterations,
        local_optima: distinct,
        trajectory,
    })
}

/// Resolution of the brute-force covariance grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Beam angles in `[0, π)` for unit-rank covariances.
    pub beam_angles: usize,
    /// Power levels `P·k/L`, `k = 1..=L`, for beams and scalar inputs.
    pub power_levels: usize,
    /// Eigenbasis angles of the full-power full-rank mixtures.
    pub mixture_angles: usize,
    /// Mixture weights strictly between 0 and 1.
    pub mixture_weights: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            beam_angles: 720,
            power_levels: 2,
            mixture_angles: 36,
            mixture_weights: 10,
        }
    }
}

fn candidates(n: usize, p: f64, grid: &GridSpec) -> Vec<Matrix2<f64>> {
    let mut out = Vec::new();
    let levels = grid.power_levels.max(1);
    if n == 1 {
        let steps = (levels * 32).max(64);
        for k in 0..=steps {
            out.push(Matrix2::new(p * k as f64 / steps as f64, 0.0, 0.0, 0.0));
        }
        return out;
    }
    out.push(Matrix2::zeros());
    for l in 1..=levels {
        let pw = p * l as f64 / levels as f64;
        for a in 0..grid.beam_angles {
            let phi = PI * a as f64 / grid.beam_angles as f64;
            let (s, c) = phi.sin_cos();
            out.push(Matrix2::new(c * c, c * s, c * s, s * s) * pw);
        }
    }
    for a in 0..grid.mixture_angles {
        let phi = 0.5 * PI * a as f64 / grid.mixture_angles.max(1) as f64;
        let (s, c) = phi.sin_cos();
        let u = Matrix2::new(c * c, c * s, c * s, s * s);
        let w = Matrix2::identity() - u;
        for k in 1..=grid.mixture_weights {
            let t = k as f64 / (grid.mixture_weights + 1) as f64;
            out.push((u * t + w * (1.0 - t)) * p);
        }
    }
    out
}

fn pad(m: &DMatrix<f64>) -> Matrix2<f64> {
    let mut out = Matrix2::zeros();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

fn det_ratio_bits(total: &Matrix2<f64>, noise: &Matrix2<f64>) -> f64 {
    0.5 * (total.determinant() / noise.determinant()).log2()
}

/// Exhaustive search over a covariance grid for channels with at most two
/// antennas on every terminal. Returns the best grid pair, a lower bound on
/// the TIN optimum.
pub fn brute_force_best(ch: &ChannelMatrices, grid: &GridSpec) -> Result<(CovariancePair, f64)> {
    let dims = [ch.tx1(), ch.tx2(), ch.rx1(), ch.rx2()];
    if dims.iter().any(|&d| d > 2) {
        return Err(Error::Unsupported(format!(
            "brute force needs at most 2 antennas per terminal, got tx = ({}, {}), rx = ({}, {})",
            dims[0], dims[1], dims[2], dims[3]
        )));
    }
    if grid.beam_angles < 720 && (ch.tx1() == 2 || ch.tx2() == 2) {
        return Err(Error::InvalidInput("beam grid needs at least 720 angles".into()));
    }
    let (h11, h12, h21, h22) = (pad(&ch.h11), pad(&ch.h12), pad(&ch.h21), pad(&ch.h22));
    let c1 = candidates(ch.tx1(), ch.p1, grid);
    let c2 = candidates(ch.tx2(), ch.p2, grid);
    // Per-candidate received covariances at both receivers.
    let r1: Vec<(Matrix2<f64>, Matrix2<f64>)> =
        c1.iter().map(|q| (h11 * q * h11.transpose(), h21 * q * h21.transpose())).collect();
    let r2: Vec<(Matrix2<f64>, Matrix2<f64>)> =
        c2.iter().map(|q| (h22 * q * h22.transpose(), h12 * q * h12.transpose())).collect();
    let eye = Matrix2::identity();

    let (i, j, _) = r1
        .par_iter()
        .enumerate()
        .map(|(i, (s1, leak1))| {
            let n2 = eye + leak1;
            let mut best = (i, 0, f64::NEG_INFINITY);
            for (j, (s2, leak2)) in r2.iter().enumerate() {
                let n1 = eye + leak2;
                let rate = det_ratio_bits(&(n1 + s1), &n1) + det_ratio_bits(&(n2 + s2), &n2);
                if rate > best.2 {
                    best = (i, j, rate);
                }
            }
            best
        })
        .reduce(
            || (0, 0, f64::NEG_INFINITY),
            |a, b| if b.2 > a.2 || (b.2 == a.2 && (b.0, b.1) < (a.0, a.1)) { b } else { a },
        );

    let unpad = |m: &Matrix2<f64>, n: usize| {
        SymMatrix::from_square(DMatrix::from_fn(n, n, |r, c| m[(r, c)]))
    };
    let q = CovariancePair::new(unpad(&c1[i], ch.tx1()), unpad(&c2[j], ch.tx2()));
    let rate = tin_sum_rate(ch, &q)?;
    Ok((q, rate))
}
