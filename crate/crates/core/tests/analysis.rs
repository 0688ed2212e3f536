use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use tcnot_core::analysis::Z95;
use tcnot_core::*;

fn bernoulli_blocks(rng: &mut ChaCha8Rng, blocks: usize, per_block: u64, p: f64) -> Vec<(u64, u64)> {
    (0..blocks).map(|_| (Binomial::new(per_block, p).unwrap().sample(rng), per_block)).collect()
}

#[test]
fn jackknife_agrees_with_binomial_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (p, shots) = (0.05, 100_000u64);
    let binomial = (p * (1.0 - p) / shots as f64).sqrt();
    let reps = 20;
    let mean_sigma: f64 = (0..reps)
        .map(|_| {
            let iv = jackknife_ci(&bernoulli_blocks(&mut rng, 100, shots / 100, p)).unwrap();
            (iv.high - iv.low) / (2.0 * Z95)
        })
        .sum::<f64>()
        / reps as f64;
    assert!((mean_sigma / binomial - 1.0).abs() < 0.10, "{mean_sigma} vs {binomial}");
}

#[test]
fn jackknife_edge_cases() {
    let same = jackknife_ci(&[(3, 100); 10]).unwrap();
    assert_eq!((same.low, same.high), (0.03, 0.03));
    let zero = jackknife_ci(&[(0, 100); 10]).unwrap();
    assert_eq!(zero.rate, 0.0);
    assert!(zero.degenerate);
    assert!(matches!(jackknife_ci(&[(1, 10)]), Err(Error::TooFewBlocks(1))));
}

/// Binomially sampled curves from p_L = A + B x + C x^2, x = (p - p_t) d^(1/nu).
fn synthetic(p_t: f64, nu: f64, rng: &mut ChaCha8Rng) -> Vec<CurvePoint> {
    let shots = 100_000u64;
    let mut out = Vec::new();
    for d in [3usize, 5, 7] {
        for i in 0..6 {
            let p = 0.008 + 0.001 * i as f64;
            let x = (p - p_t) * (d as f64).powf(1.0 / nu);
            let truth = 0.12 + 4.0 * x + 40.0 * x * x;
            let k = Binomial::new(shots, truth).unwrap().sample(rng);
            let p_l = k as f64 / shots as f64;
            out.push(CurvePoint { d, p, p_l, sigma: (p_l * (1.0 - p_l) / shots as f64).sqrt() });
        }
    }
    out
}

#[test]
fn fit_recovers_a_known_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let fit = fit_threshold(&synthetic(0.01, 1.0, &mut rng)).unwrap();
        assert!((fit.p_t - 0.01).abs() < 2.0 * fit.p_t_err, "{} ± {}", fit.p_t, fit.p_t_err);
        assert!(fit.window.0 <= fit.p_t && fit.p_t <= fit.window.1);
    }
}

#[test]
fn fit_is_invariant_under_reordering() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pts = synthetic(0.0105, 1.0, &mut rng);
    let a = fit_threshold(&pts).unwrap();
    let mut shuffled = pts.clone();
    shuffled.shuffle(&mut rng);
    let b = fit_threshold(&shuffled).unwrap();
    assert_eq!(a, b);
}

#[test]
fn curves_that_never_cross_fail_to_fit() {
    let mut pts = Vec::new();
    for d in [3usize, 5, 7] {
        for i in 0..5 {
            let p = 0.001 * (i + 1) as f64;
            // larger codes are always better: no crossing
            pts.push(CurvePoint { d, p, p_l: p * 10.0 / d as f64, sigma: 1e-4 });
        }
    }
    assert!(matches!(fit_threshold(&pts), Err(Error::FitFailed(_))));
    let one_d: Vec<CurvePoint> = pts.iter().copied().filter(|p| p.d == 3).collect();
    assert!(matches!(fit_threshold(&one_d), Err(Error::FitFailed(_))));
    let sparse: Vec<CurvePoint> = pts.iter().copied().filter(|p| p.p < 0.0035).collect();
    assert!(matches!(fit_threshold(&sparse), Err(Error::FitFailed(_))));
}

#[test]
fn lssa_values() {
    let r = Ratio::new;
    assert_eq!(lssa(LssaKind::Identity, 5, 1).unwrap().area, r(16, 1));
    assert_eq!(lssa(LssaKind::TcnotOrdered, 7, 1).unwrap().ratio, r(5, 4));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let d = rng.random_range(1..50u32);
        let b = rng.random_range(1..20u32);
        let xx = lssa(LssaKind::XxMerge, d, b).unwrap();
        assert_eq!(xx.ratio, r(11, 8) + r(b as i64, 4 * d as i64));
        assert_eq!(lssa(LssaKind::LsCnot, d, b).unwrap().ratio, r(9, 4) + r(b as i64, 2 * d as i64));
        let n = rng.random_range(1..30u32) as i64;
        let tm = lssa(LssaKind::TcnotMulti(n as u32), d, b).unwrap().ratio;
        assert_eq!(tm, (r(n + 1, 1) + r(3 * n, 2) + r(1, 1) + r(n, 2)) / r(2 * (n + 1), 1));
        let lm = lssa(LssaKind::LsCnotMulti(n as u32), d, b).unwrap().ratio;
        let half = (n + 1) / 2;
        assert_eq!(lm, r(21 + 15 * n + half * 8 * b as i64 * d as i64, 8 * (n + 1)));
    }
    assert_eq!(lssa(LssaKind::TcnotMulti(1), 3, 1).unwrap().ratio, r(5, 4));
    assert!(lssa(LssaKind::LsCnotMulti(0), 3, 1).is_err());
}

#[test]
fn stats_bracket_the_estimate() {
    let cfg = ExperimentConfig { experiment: Experiment::TwoScqm, d: 3, p: 0.01, shots: 5000, seed: 4, ..Default::default() };
    let st = run_experiment(&cfg).unwrap();
    assert!(st.ci_low <= st.p_l && st.p_l <= st.ci_high);
    assert!(st.failures_total <= st.failures_x + st.failures_z);
    assert!(st.failures_total >= st.failures_x.max(st.failures_z));
    assert_eq!(st.observable_failures.len(), 4);
    assert!(!st.low_statistics);
    assert_eq!(st, { let mut again = run_experiment(&cfg).unwrap(); again.wall_time_s = st.wall_time_s; again });
}
