mod common;

use common::*;
use tcnot_core::*;

/// Exact firing probability of each detector if the DEM mechanisms were
/// independent: P(odd) = (1 - prod(1 - 2 p)) / 2.
fn dem_marginals(dem: &DetectorErrorModel) -> (Vec<f64>, Vec<f64>) {
    let mut det = vec![1.0; dem.num_detectors];
    let mut obs = vec![1.0; dem.num_observables];
    for m in &dem.mechanisms {
        let f = 1.0 - 2.0 * m.prior;
        for &d in &m.detectors {
            det[d as usize] *= f;
        }
        for (o, v) in obs.iter_mut().enumerate() {
            if m.observables >> o & 1 == 1 {
                *v *= f;
            }
        }
    }
    let half = |v: Vec<f64>| v.into_iter().map(|x| (1.0 - x) / 2.0).collect();
    (half(det), half(obs))
}

fn compare(cfg: &ExperimentConfig, shots: u64) {
    let prep = prepare(cfg);
    let (want_det, want_obs) = dem_marginals(&prep.dem);
    let mut det = vec![0u64; want_det.len()];
    let mut obs = vec![0u64; want_obs.len()];
    for s in prep.sampler.sample_shots(shots, 3) {
        for &d in &s.defects {
            det[d as usize] += 1;
        }
        for (o, c) in obs.iter_mut().enumerate() {
            *c += s.observables >> o & 1;
        }
    }
    let n = shots as f64;
    for (what, got, want) in [("detector", det, want_det), ("observable", obs, want_obs)] {
        for (i, (&g, &p)) in got.iter().zip(&want).enumerate() {
            let sigma = (p * (1.0 - p) / n).sqrt().max(1.0 / n);
            let rate = g as f64 / n;
            assert!((rate - p).abs() < 5.0 * sigma, "{} {what} {i}: sampled {rate} vs {p}", cfg.experiment.name());
        }
    }
}

#[test]
fn sampled_marginals_match_the_dem() {
    compare(&config(Experiment::Scqm, DecoderKind::Mwpm, 3, 0.004), 100_000);
    compare(&config(Experiment::Tcnot, DecoderKind::SingleUpdate, 3, 0.004), 50_000);
    compare(&config(Experiment::Teleport, DecoderKind::Teleport, 3, 0.004), 50_000);
    let mut ph = config(Experiment::TwoScqm, DecoderKind::Mwpm, 3, 0.01);
    ph.noise_model = NoiseModel::Phenomenological;
    compare(&ph, 50_000);
}

#[test]
fn erasure_heralds_arrive_at_the_expected_rate() {
    let mut cfg = config(Experiment::TwoScqm, DecoderKind::Mwpm, 3, 0.01);
    cfg.r_e = 0.5;
    cfg.erasure_kind = ErasureKind::Conventional;
    let prep = prepare(&cfg);
    let gates = prep.noisy.circuit.num_cnots() as f64;
    let shots = 20_000;
    let heralds: usize = prep.sampler.sample_shots(shots, 1).iter().map(|s| s.heralds.len()).sum();
    // both qubits of the gate are erased by default
    assert_eq!(cfg.erasure_target, ErasureTarget::Both);
    let want = 2.0 * gates * cfg.p * cfg.r_e * shots as f64;
    assert!((heralds as f64 - want).abs() < 5.0 * want.sqrt(), "{heralds} vs {want}");
}

#[test]
fn shots_are_reproducible_and_independent_of_batching() {
    let prep = prepare(&config(Experiment::Tcnot, DecoderKind::Ordered, 3, 0.02));
    let batch = prep.sampler.sample_shots(500, 77);
    for (i, s) in batch.iter().enumerate() {
        assert_eq!(*s, prep.sampler.sample(77, i as u64));
    }
    assert_ne!(batch, prep.sampler.sample_shots(500, 78));
}
