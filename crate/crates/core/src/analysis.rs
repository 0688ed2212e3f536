//! Monte Carlo harness, jackknife intervals, finite-size-scaling threshold
//! fits and logical spacetime surface areas.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_ls_xx, build_memory, build_tcnot_gadget, build_teleportation, Basis, Circuit, Experiment, LatticeSurgeryLayout};
use crate::decoders::{DecoderKind, Decoder};
use crate::error::{Error, Result};
use crate::frames::{define_detectors, DetectorSet};
use crate::lattice::{build_rotated_code, Pauli};
use crate::noise::{apply_noise, ErasureKind, ErasureTarget, NoiseModel, NoiseParams, NoisyCircuit};
use crate::sampler::{build_dem, DetectorErrorModel, FaultTable, Sampler};

/// Failure rates at or below this are too rare to trust at typical shot counts.
pub const LOW_STATISTICS_RATE: f64 = 1e-4;
/// 95% two-sided normal quantile.
pub const Z95: f64 = 1.96;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub decoder: DecoderKind,
    pub d: usize,
    /// Extraction rounds for memory experiments; defaults to `d` (SCQM) or `2d` (2SCQM).
    pub rounds: Option<u32>,
    pub p: f64,
    pub noise_model: NoiseModel,
    pub r_e: f64,
    pub erasure_kind: ErasureKind,
    pub erasure_target: ErasureTarget,
    /// Bridge width of the lattice-surgery experiment.
    pub b: usize,
    pub shots: u64,
    pub seed: u64,
    /// Jackknife blocks.
    pub blocks: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::TwoScqm,
            decoder: DecoderKind::Mwpm,
            d: 3,
            rounds: None,
            p: 0.001,
            noise_model: NoiseModel::Circuit,
            r_e: 0.0,
            erasure_kind: ErasureKind::None,
            erasure_target: ErasureTarget::Both,
            b: 1,
            shots: 10_000,
            seed: 0,
            blocks: 100,
        }
    }
}

impl ExperimentConfig {
    pub fn noise(&self) -> NoiseParams {
        NoiseParams {
            p: self.p,
            model: self.noise_model,
            r_e: self.r_e,
            erasure_kind: self.erasure_kind,
            erasure_target: self.erasure_target,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.decoder.check_compatible(self.experiment)?;
        self.noise().validate()?;
        if self.d < 3 || self.d.is_multiple_of(2) {
            return Err(Error::InvalidDistance(self.d));
        }
        if self.shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        if self.rounds == Some(0) {
            return Err(Error::InvalidParameter("rounds must be at least 1".into()));
        }
        if self.experiment == Experiment::LsXx {
            LatticeSurgeryLayout::new(self.d, self.b)?;
        }
        Ok(())
    }
}

/// Builds the noiseless circuit of an experiment.
pub fn build_circuit(cfg: &ExperimentConfig) -> Result<Circuit> {
    let layout = build_rotated_code(cfg.d)?;
    let d = cfg.d as u32;
    match cfg.experiment {
        Experiment::Scqm => build_memory(&layout, cfg.rounds.unwrap_or(d), Basis::Both, 1),
        Experiment::TwoScqm => build_memory(&layout, cfg.rounds.unwrap_or(2 * d), Basis::Both, 2),
        Experiment::Tcnot => build_tcnot_gadget(&layout, d, d, Basis::Both),
        Experiment::Teleport => build_teleportation(&layout, Basis::Both),
        Experiment::LsXx => build_ls_xx(&layout, &LatticeSurgeryLayout::new(cfg.d, cfg.b)?, d, Basis::Both),
    }
}

/// Everything needed to sample and decode shots of one configuration.
pub struct PreparedExperiment {
    pub config: ExperimentConfig,
    pub noisy: NoisyCircuit,
    pub detectors: DetectorSet,
    pub dem: DetectorErrorModel,
    pub sampler: Sampler,
    pub decoder: Decoder,
}

impl PreparedExperiment {
    pub fn new(cfg: &ExperimentConfig) -> Result<PreparedExperiment> {
        cfg.validate()?;
        let circuit = build_circuit(cfg)?;
        let noisy = apply_noise(&circuit, cfg.noise())?;
        let detectors = define_detectors(&circuit, cfg.decoder.frame())?;
        let table = FaultTable::new(&noisy);
        let dem = build_dem(&noisy, &table, &detectors);
        let sampler = Sampler::new(&noisy, &table, &detectors);
        let decoder = Decoder::new(cfg.decoder, cfg.experiment, &detectors, &dem)?;
        Ok(PreparedExperiment { config: cfg.clone(), noisy, detectors, dem, sampler, decoder })
    }

    /// Failed circuit observables of every shot, in shot order.
    pub fn failure_masks(&self) -> Result<Vec<u64>> {
        let seed = self.config.seed;
        (0..self.config.shots)
            .into_par_iter()
            .map(|s| self.decoder.decode(&self.sampler.sample(seed, s)).map(|o| o.failures))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub rate: f64,
    pub low: f64,
    pub high: f64,
    /// Zero width because every block agrees (for example, no failures).
    pub degenerate: bool,
}

/// Leave-one-block-out jackknife estimate of a failure rate with a 95%
/// normal interval. `blocks` holds `(failures, shots)` per block.
pub fn jackknife_ci(blocks: &[(u64, u64)]) -> Result<Interval> {
    let n = blocks.len();
    if n < 2 {
        return Err(Error::TooFewBlocks(n));
    }
    let total_f: u64 = blocks.iter().map(|b| b.0).sum();
    let total_s: u64 = blocks.iter().map(|b| b.1).sum();
    if total_s == 0 {
        return Err(Error::InvalidParameter("no shots".into()));
    }
    let rate = total_f as f64 / total_s as f64;
    let loo: Vec<f64> = blocks
        .iter()
        .map(|&(f, s)| {
            let rest = total_s - s;
            if rest == 0 {
                rate
            } else {
                (total_f - f) as f64 / rest as f64
            }
        })
        .collect();
    // shifted by the first value so identical blocks give exactly zero
    let shift = loo[0];
    let mean = loo.iter().map(|r| r - shift).sum::<f64>() / n as f64;
    let var = (n as f64 - 1.0) / n as f64 * loo.iter().map(|r| (r - shift - mean).powi(2)).sum::<f64>();
    let sigma = var.sqrt();
    Ok(Interval {
        rate,
        low: (rate - Z95 * sigma).max(0.0),
        high: (rate + Z95 * sigma).min(1.0),
        degenerate: sigma == 0.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentStats {
    pub config: ExperimentConfig,
    pub shots: u64,
    pub observables: Vec<String>,
    pub observable_failures: Vec<u64>,
    /// Shots where any X-type observable failed.
    pub failures_x: u64,
    pub failures_z: u64,
    /// Shots where any observable failed.
    pub failures_total: u64,
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub low_statistics: bool,
    pub wall_time_s: f64,
}

/// Aggregates per-shot failure masks.
pub fn summarize(cfg: &ExperimentConfig, names: &[(String, Pauli)], masks: &[u64]) -> ExperimentStats {
    let shots = masks.len() as u64;
    let kind_mask = |k: Pauli| names.iter().enumerate().filter(|(_, n)| n.1 == k).fold(0u64, |m, (i, _)| m | 1 << i);
    let (mx, mz) = (kind_mask(Pauli::X), kind_mask(Pauli::Z));
    let observable_failures = (0..names.len()).map(|i| masks.iter().filter(|&&m| m >> i & 1 == 1).count() as u64).collect();
    let failures_x = masks.iter().filter(|&&m| m & mx != 0).count() as u64;
    let failures_z = masks.iter().filter(|&&m| m & mz != 0).count() as u64;
    let failures_total = masks.iter().filter(|&&m| m != 0).count() as u64;
    let nb = cfg.blocks.min(masks.len()).max(1);
    let mut blocks = vec![(0u64, 0u64); nb];
    for (i, &m) in masks.iter().enumerate() {
        let b = i * nb / masks.len();
        blocks[b].1 += 1;
        blocks[b].0 += (m != 0) as u64;
    }
    let p_l = if shots == 0 { 0.0 } else { failures_total as f64 / shots as f64 };
    let (ci_low, ci_high) = match jackknife_ci(&blocks) {
        Ok(iv) => (iv.low, iv.high),
        Err(_) => (p_l, p_l),
    };
    ExperimentStats {
        config: cfg.clone(),
        shots,
        observables: names.iter().map(|n| n.0.clone()).collect(),
        observable_failures,
        failures_x,
        failures_z,
        failures_total,
        p_l,
        ci_low,
        ci_high,
        low_statistics: p_l <= LOW_STATISTICS_RATE,
        wall_time_s: 0.0,
    }
}

/// Samples and decodes `cfg.shots` shots.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentStats> {
    let start = Instant::now();
    let prepared = PreparedExperiment::new(cfg)?;
    let masks = prepared.failure_masks()?;
    let names: Vec<(String, Pauli)> = prepared.noisy.circuit.observables.iter().map(|o| (o.name.clone(), o.kind)).collect();
    let mut stats = summarize(cfg, &names, &masks);
    stats.wall_time_s = start.elapsed().as_secs_f64();
    Ok(stats)
}

/// One point of a logical-failure curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub d: usize,
    pub p: f64,
    pub p_l: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub p_t: f64,
    pub p_t_err: f64,
    pub nu: f64,
    pub nu_err: f64,
    /// `nu` was held at 1 because the free fit was ill-conditioned.
    pub nu_fixed: bool,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub window: (f64, f64),
    pub distances: Vec<usize>,
    pub chi2: f64,
    pub dof: usize,
}

fn interpolate(curve: &[(f64, f64)], p: f64) -> Option<f64> {
    curve.windows(2).find(|w| w[0].0 <= p && p <= w[1].0).map(|w| {
        if w[1].0 == w[0].0 {
            w[0].1
        } else {
            w[0].1 + (w[1].1 - w[0].1) * (p - w[0].0) / (w[1].0 - w[0].0)
        }
    })
}

/// Crossing points of every pair of curves, by linear interpolation.
fn crossings(curves: &[(usize, Vec<(f64, f64)>)]) -> Vec<f64> {
    let mut out = Vec::new();
    for (i, (_, small)) in curves.iter().enumerate() {
        for (_, large) in &curves[i + 1..] {
            let mut grid: Vec<f64> = small.iter().chain(large.iter()).map(|x| x.0).collect();
            grid.sort_by(f64::total_cmp);
            grid.dedup();
            let diffs: Vec<(f64, f64)> = grid
                .iter()
                .filter_map(|&p| Some((p, interpolate(large, p)? - interpolate(small, p)?)))
                .collect();
            for w in diffs.windows(2) {
                if w[0].1 < 0.0 && w[1].1 >= 0.0 {
                    out.push(w[0].0 + (w[1].0 - w[0].0) * (-w[0].1) / (w[1].1 - w[0].1));
                    break;
                }
            }
        }
    }
    out
}

struct FitOutcome {
    theta: Vec<f64>,
    cov: DMatrix<f64>,
    chi2: f64,
}

/// Residuals and Jacobian for `theta = [p_t, nu, A, B, C]`; columns for
/// fixed parameters are dropped.
fn model(points: &[CurvePoint], theta: &[f64], free_nu: bool) -> (DVector<f64>, DMatrix<f64>) {
    let (pt, nu, a, b, c) = (theta[0], theta[1], theta[2], theta[3], theta[4]);
    let cols = if free_nu { 5 } else { 4 };
    let mut r = DVector::zeros(points.len());
    let mut j = DMatrix::zeros(points.len(), cols);
    for (i, pt_) in points.iter().enumerate() {
        let ln_d = (pt_.d as f64).ln();
        let scale = (ln_d / nu).exp();
        let x = (pt_.p - pt) * scale;
        let f = a + b * x + c * x * x;
        let dfdx = b + 2.0 * c * x;
        let w = 1.0 / pt_.sigma;
        r[i] = (pt_.p_l - f) * w;
        // derivatives of the model, weighted
        let mut col = 0;
        j[(i, col)] = dfdx * (-scale) * w;
        col += 1;
        if free_nu {
            j[(i, col)] = dfdx * x * (-ln_d / (nu * nu)) * w;
            col += 1;
        }
        j[(i, col)] = w;
        j[(i, col + 1)] = x * w;
        j[(i, col + 2)] = x * x * w;
    }
    (r, j)
}

fn chi2(points: &[CurvePoint], theta: &[f64]) -> f64 {
    model(points, theta, false).0.norm_squared()
}

/// Weighted linear least squares for `A, B, C` at fixed `p_t, nu`.
fn linear_part(points: &[CurvePoint], pt: f64, nu: f64) -> Option<[f64; 3]> {
    let mut m = DMatrix::zeros(points.len(), 3);
    let mut y = DVector::zeros(points.len());
    for (i, p) in points.iter().enumerate() {
        let x = (p.p - pt) * (p.d as f64).powf(1.0 / nu);
        let w = 1.0 / p.sigma;
        m[(i, 0)] = w;
        m[(i, 1)] = x * w;
        m[(i, 2)] = x * x * w;
        y[i] = p.p_l * w;
    }
    let sol = m.svd(true, true).solve(&y, 1e-14).ok()?;
    Some([sol[0], sol[1], sol[2]])
}

/// Levenberg-Marquardt on the weighted residuals.
fn levenberg_marquardt(points: &[CurvePoint], start: [f64; 5], free_nu: bool) -> Option<FitOutcome> {
    let mut theta = start.to_vec();
    let mut lambda = 1e-3;
    let mut current = chi2(points, &theta);
    let expand = |delta: &DVector<f64>| -> Vec<f64> {
        let mut full = vec![0.0; 5];
        let mut k = 0;
        for (i, v) in full.iter_mut().enumerate() {
            if i == 1 && !free_nu {
                continue;
            }
            *v = delta[k];
            k += 1;
        }
        full
    };
    for _ in 0..500 {
        let (r, j) = model(points, &theta, free_nu);
        let jtj = j.transpose() * &j;
        let jtr = j.transpose() * &r;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..a.nrows() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(delta) = a.clone().cholesky().map(|c| c.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let step = expand(&delta);
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + s).collect();
            if trial[1] <= 0.0 || !trial.iter().all(|t| t.is_finite()) {
                lambda *= 10.0;
                continue;
            }
            let c = chi2(points, &trial);
            if c < current {
                let converged = (current - c) <= 1e-12 * current.max(1e-300);
                theta = trial;
                current = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = !converged;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let (_, j) = model(points, &theta, free_nu);
    let cov = (j.transpose() * &j).try_inverse()?;
    Some(FitOutcome { theta, cov, chi2: current })
}

/// Finite-size-scaling fit of `p_L = A + Bx + Cx^2`, `x = (p - p_t) d^{1/nu}`.
pub fn fit_threshold(points: &[CurvePoint]) -> Result<ThresholdFit> {
    let mut points: Vec<CurvePoint> = points.to_vec();
    points.sort_by(|a, b| a.d.cmp(&b.d).then(a.p.total_cmp(&b.p)));
    let mut distances: Vec<usize> = points.iter().map(|p| p.d).collect();
    distances.dedup();
    if distances.len() < 2 {
        return Err(Error::FitFailed(format!("need at least two distances, got {}", distances.len())));
    }
    let curves: Vec<(usize, Vec<(f64, f64)>)> = distances
        .iter()
        .map(|&d| (d, points.iter().filter(|p| p.d == d).map(|p| (p.p, p.p_l)).collect()))
        .collect();
    if let Some((d, c)) = curves.iter().find(|c| c.1.len() < 4) {
        return Err(Error::FitFailed(format!("distance {d} has {} points, need at least 4", c.len())));
    }
    let cross = crossings(&curves);
    if cross.is_empty() {
        return Err(Error::FitFailed("curves do not cross in the fit window".into()));
    }
    // sigma floor so that zero-failure points do not dominate
    let floor = points.iter().map(|p| p.sigma).filter(|&s| s > 0.0).fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 1e-6 };
    for p in &mut points {
        p.sigma = p.sigma.max(floor);
    }
    let window = (
        points.iter().map(|p| p.p).fold(f64::INFINITY, f64::min),
        points.iter().map(|p| p.p).fold(f64::NEG_INFINITY, f64::max),
    );
    let p0 = cross.iter().sum::<f64>() / cross.len() as f64;
    let attempt = |free_nu: bool| -> Option<FitOutcome> {
        let [a, b, c] = linear_part(&points, p0, 1.0)?;
        let fit = levenberg_marquardt(&points, [p0, 1.0, a, b, c], free_nu)?;
        let (pt, nu) = (fit.theta[0], fit.theta[1]);
        let sane = pt.is_finite() && pt >= window.0 && pt <= window.1 && nu > 0.2 && nu < 10.0;
        sane.then_some(fit)
    };
    let (fit, free_nu) = match attempt(true) {
        Some(f) => (f, true),
        None => (attempt(false).ok_or_else(|| Error::FitFailed("no threshold inside the fit window".into()))?, false),
    };
    let params = if free_nu { 5 } else { 4 };
    let dof = points.len().saturating_sub(params);
    let inflate = if dof > 0 { (fit.chi2 / dof as f64).max(1.0) } else { 1.0 };
    let err = |k: usize| (fit.cov[(k, k)] * inflate).sqrt();
    Ok(ThresholdFit {
        p_t: fit.theta[0],
        p_t_err: err(0),
        nu: fit.theta[1],
        nu_err: if free_nu { err(1) } else { 0.0 },
        nu_fixed: !free_nu,
        a: fit.theta[2],
        b: fit.theta[3],
        c: fit.theta[4],
        window,
        distances,
        chi2: fit.chi2,
        dof,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LssaKind {
    Identity,
    XxMerge,
    LsCnot,
    TcnotOrdered,
    LsCnotMulti(u32),
    TcnotMulti(u32),
}

impl LssaKind {
    /// Parses `identity`, `xx_merge`, `ls_cnot`, `tcnot_ordered`,
    /// `ls_cnot_multi`, `tcnot_multi`; `n` is used by the multi-target kinds.
    pub fn parse(s: &str, n: u32) -> Option<LssaKind> {
        Some(match s {
            "identity" => LssaKind::Identity,
            "xx_merge" => LssaKind::XxMerge,
            "ls_cnot" => LssaKind::LsCnot,
            "tcnot_ordered" => LssaKind::TcnotOrdered,
            "ls_cnot_multi" => LssaKind::LsCnotMulti(n),
            "tcnot_multi" => LssaKind::TcnotMulti(n),
            _ => return None,
        })
    }
}

/// Logical spacetime surface area in units of `d^2`, the area of the
/// matching identity operation, and their ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lssa {
    pub area: Ratio<i64>,
    pub identity: Ratio<i64>,
    pub ratio: Ratio<i64>,
}

pub fn lssa(kind: LssaKind, d: u32, b: u32) -> Result<Lssa> {
    if d == 0 {
        return Err(Error::InvalidDistance(0));
    }
    let r = |n: i64| Ratio::from_integer(n);
    let (d, b) = (d as i64, b as i64);
    let bd = Ratio::new(b, d);
    let two_patch = r(16);
    let (area, identity) = match kind {
        LssaKind::Identity => (two_patch, two_patch),
        LssaKind::XxMerge => (r(22) + bd * 4, two_patch),
        LssaKind::LsCnot => (r(36) + bd * 8, two_patch),
        LssaKind::TcnotOrdered => (r(20), two_patch),
        LssaKind::LsCnotMulti(n) | LssaKind::TcnotMulti(n) if n < 1 => {
            return Err(Error::InvalidParameter(format!("target count must be at least 1, got {n}")));
        }
        LssaKind::LsCnotMulti(n) => {
            let n = n as i64;
            let half = (n + 1) / 2;
            (r(21 + 15 * n + half * 8 * b * d), r(8 * (n + 1)))
        }
        LssaKind::TcnotMulti(n) => {
            let n = n as i64;
            // (n + 1) + 1.5 n + (1 + 0.5 n) logical-area units over 2 (n + 1)
            let num = r(n + 1) + Ratio::new(3 * n, 2) + r(1) + Ratio::new(n, 2);
            let ratio = num / r(2 * (n + 1));
            (ratio * r(8 * (n + 1)), r(8 * (n + 1)))
        }
    };
    Ok(Lssa { area, identity, ratio: area / identity })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lssa_closed_forms() {
        assert_eq!(lssa(LssaKind::Identity, 5, 1).unwrap().area, Ratio::from_integer(16));
        for d in [3u32, 4, 5, 7, 12] {
            let xx = lssa(LssaKind::XxMerge, d, 1).unwrap().ratio;
            assert_eq!(xx, Ratio::new(11, 8) + Ratio::new(1, 4 * d as i64));
            let cx = lssa(LssaKind::LsCnot, d, 1).unwrap().ratio;
            assert_eq!(cx, Ratio::new(9, 4) + Ratio::new(1, 2 * d as i64));
        }
        assert_eq!(lssa(LssaKind::TcnotOrdered, 5, 1).unwrap().ratio, Ratio::new(5, 4));
        assert_eq!(lssa(LssaKind::TcnotMulti(1), 5, 1).unwrap().ratio, Ratio::new(5, 4));
        assert!(lssa(LssaKind::TcnotMulti(0), 5, 1).is_err());
        // (21 + 15 + 8 b d) / 16 at n = 1
        assert_eq!(lssa(LssaKind::LsCnotMulti(1), 3, 1).unwrap().ratio, Ratio::new(21 + 15 + 24, 16));
        assert_eq!(lssa(LssaKind::LsCnotMulti(3), 3, 1).unwrap().ratio, Ratio::new(21 + 45 + 2 * 24, 32));
    }

    #[test]
    fn jackknife_basics() {
        assert_eq!(jackknife_ci(&[(1, 10)]), Err(Error::TooFewBlocks(1)));
        let same = jackknife_ci(&[(3, 100); 10]).unwrap();
        assert_eq!(same.low, same.high);
        assert!(same.degenerate);
        let zero = jackknife_ci(&[(0, 100); 10]).unwrap();
        assert_eq!((zero.rate, zero.degenerate), (0.0, true));
    }
}
