//! Checks shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcnot_core::circuit::MeasKind;
use tcnot_core::frames::DetectorSet;
use tcnot_core::sampler::FaultTable;
use tcnot_core::*;

pub fn config(experiment: Experiment, decoder: DecoderKind, d: usize, p: f64) -> ExperimentConfig {
    ExperimentConfig { experiment, decoder, d, p, shots: 1000, seed: 11, ..Default::default() }
}

pub fn prepare(cfg: &ExperimentConfig) -> PreparedExperiment {
    PreparedExperiment::new(cfg).expect("valid configuration")
}

/// Every (experiment, decoder) pair the decoders accept.
pub const PAIRS: [(Experiment, DecoderKind); 6] = [
    (Experiment::Scqm, DecoderKind::Mwpm),
    (Experiment::TwoScqm, DecoderKind::Mwpm),
    (Experiment::LsXx, DecoderKind::Mwpm),
    (Experiment::Tcnot, DecoderKind::SingleUpdate),
    (Experiment::Tcnot, DecoderKind::Ordered),
    (Experiment::Teleport, DecoderKind::Teleport),
];

/// Decodes each DEM mechanism on its own; returns the mechanisms that
/// cause a logical failure.
pub fn single_fault_failures(prep: &PreparedExperiment) -> Vec<usize> {
    prep.dem
        .mechanisms
        .iter()
        .enumerate()
        .filter(|(_, m)| {
            let sample = DetectionSample {
                seed: 0,
                shot: 0,
                defects: m.detectors.clone(),
                observables: m.observables,
                heralds: m.herald.into_iter().collect(),
            };
            prep.decoder.decode(&sample).expect("decodable").failures != 0
        })
        .map(|(i, _)| i)
        .collect()
}

/// Every stage's correction must reproduce the defects it was given.
pub fn check_syndrome_validity(prep: &PreparedExperiment, shots: u64, seed: u64) -> std::result::Result<(), String> {
    for s in 0..shots {
        let sample = prep.sampler.sample(seed, s);
        let out = prep.decoder.decode(&sample).map_err(|e| format!("shot {s}: {e}"))?;
        for st in &out.stages {
            if st.correction != st.defects {
                return Err(format!("shot {s}, stage {}: correction {:?} vs defects {:?}", st.name, st.correction, st.defects));
            }
        }
    }
    Ok(())
}

type Bits = Vec<u64>;

fn bits_of(ms: &[usize], words: usize) -> Bits {
    let mut b = vec![0u64; words];
    for &m in ms {
        b[m / 64] ^= 1 << (m % 64);
    }
    b
}

/// Writes each detector of `target` as an XOR of detectors of `basis`, both
/// viewed as sets of measurements that noise can flip (`noisy[m]`).
/// Gaussian elimination over GF(2).
pub fn express_in(target: &DetectorSet, basis: &DetectorSet, noisy: &[bool]) -> Option<Vec<Vec<u32>>> {
    let num_meas = noisy.len();
    let words = num_meas.div_ceil(64);
    let combo_words = basis.len().div_ceil(64);
    let bits_of = |ms: &[usize], words: usize| {
        let kept: Vec<usize> = ms.iter().copied().filter(|&m| noisy[m]).collect();
        bits_of(&kept, words)
    };
    // reduced rows: (measurement bits, basis combination), keyed by pivot
    let mut rows: Vec<(usize, Bits, Bits)> = Vec::new();
    for (i, d) in basis.detectors.iter().enumerate() {
        let mut v = bits_of(&d.measurements, words);
        let mut c = vec![0u64; combo_words];
        c[i / 64] ^= 1 << (i % 64);
        for (pivot, rv, rc) in &rows {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                v.iter_mut().zip(rv).for_each(|(a, b)| *a ^= b);
                c.iter_mut().zip(rc).for_each(|(a, b)| *a ^= b);
            }
        }
        if let Some(p) = (0..num_meas).find(|&m| v[m / 64] >> (m % 64) & 1 == 1) {
            // keep earlier rows reduced on the new pivot
            for (_, rv, rc) in rows.iter_mut() {
                if rv[p / 64] >> (p % 64) & 1 == 1 {
                    rv.iter_mut().zip(&v).for_each(|(a, b)| *a ^= b);
                    rc.iter_mut().zip(&c).for_each(|(a, b)| *a ^= b);
                }
            }
            rows.push((p, v, c));
        }
    }
    target
        .detectors
        .iter()
        .map(|d| {
            let mut v = bits_of(&d.measurements, words);
            let mut c = vec![0u64; combo_words];
            for (pivot, rv, rc) in &rows {
                if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                    v.iter_mut().zip(rv).for_each(|(a, b)| *a ^= b);
                    c.iter_mut().zip(rc).for_each(|(a, b)| *a ^= b);
                }
            }
            v.iter().all(|&w| w == 0).then(|| (0..basis.len() as u32).filter(|&i| c[i as usize / 64] >> (i % 64) & 1 == 1).collect())
        })
        .collect()
}

/// Samples the same faults in the static and dynamic frames of a tCNOT
/// circuit and checks that each dynamic detector equals its XOR of static
/// detectors, and that both frames agree on the circuit observables.
pub fn check_static_dynamic_identity(d: usize, p: f64, shots: u64, seed: u64) -> std::result::Result<(), String> {
    let cfg = config(Experiment::Tcnot, DecoderKind::Ordered, d, p);
    let circuit = tcnot_core::analysis::build_circuit(&cfg).map_err(|e| e.to_string())?;
    let noisy = apply_noise(&circuit, cfg.noise()).map_err(|e| e.to_string())?;
    let table = FaultTable::new(&noisy);
    let fixed = define_detectors(&circuit, Frame::Static).map_err(|e| e.to_string())?;
    let moving = define_detectors(&circuit, Frame::Dynamic).map_err(|e| e.to_string())?;
    // perfect round-0 check measurements never flip
    let flippable: Vec<bool> = circuit.measurements.iter().map(|m| !matches!(m.kind, MeasKind::Init(_))).collect();
    let combos = express_in(&moving, &fixed, &flippable)
        .ok_or("a dynamic detector is not a combination of static detectors")?;
    if combos.iter().zip(&moving.detectors).all(|(c, _)| c.len() == 1) {
        return Err("the frames coincide; nothing to test".into());
    }
    let s_fixed = Sampler::new(&noisy, &table, &fixed);
    let s_moving = Sampler::new(&noisy, &table, &moving);
    for shot in 0..shots {
        let a = s_fixed.sample(seed, shot);
        let b = s_moving.sample(seed, shot);
        let fixed_bits = a.detector_bits(fixed.len());
        let moving_bits = b.detector_bits(moving.len());
        for (j, combo) in combos.iter().enumerate() {
            let x = combo.iter().fold(false, |acc, &i| acc ^ fixed_bits[i as usize]);
            if x != moving_bits[j] {
                return Err(format!("shot {shot}: dynamic detector {j} disagrees with its static combination"));
            }
        }
        if fixed.map_to_circuit(a.observables) != moving.map_to_circuit(b.observables) {
            return Err(format!("shot {shot}: observable flips differ between frames"));
        }
    }
    Ok(())
}

/// Hyperedge counts of the teleportation DEM and of the tCNOT DEM in the
/// hybrid frame.
pub fn hyperedge_counts(d: usize, p: f64) -> (usize, usize) {
    let count = |experiment: Experiment, frame: Frame| {
        let cfg = config(experiment, DecoderKind::Mwpm, d, p);
        let circuit = tcnot_core::analysis::build_circuit(&cfg).unwrap();
        let noisy = apply_noise(&circuit, cfg.noise()).unwrap();
        let set = define_detectors(&circuit, frame).unwrap();
        build_dem(&noisy, &FaultTable::new(&noisy), &set).num_hyperedges()
    };
    (count(Experiment::Teleport, Frame::Hybrid), count(Experiment::Tcnot, Frame::Hybrid))
}

/// Runs `cfg` inside rayon pools of each size and checks the statistics agree.
pub fn check_thread_determinism(cfg: &ExperimentConfig, threads: &[usize]) -> std::result::Result<(), String> {
    let mut reference: Option<ExperimentStats> = None;
    for &n in threads {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| e.to_string())?;
        let mut stats = pool.install(|| run_experiment(cfg)).map_err(|e| e.to_string())?;
        stats.wall_time_s = 0.0;
        match &reference {
            None => reference = Some(stats),
            Some(r) if *r != stats => return Err(format!("{n} threads gave different statistics")),
            Some(_) => {}
        }
    }
    Ok(())
}

/// Compares blossom matching with the brute-force oracle on random defect
/// sets of at most 12 defects drawn from the decoding graphs of several
/// configurations, with and without erasure heralds. Returns the number of
/// instances checked.
pub fn check_blossom_against_oracle(instances: usize, seed: u64) -> std::result::Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut configs = vec![
        config(Experiment::Scqm, DecoderKind::Mwpm, 3, 0.01),
        config(Experiment::TwoScqm, DecoderKind::Mwpm, 5, 0.01),
        config(Experiment::Tcnot, DecoderKind::Ordered, 3, 0.01),
        config(Experiment::Teleport, DecoderKind::Teleport, 3, 0.01),
        config(Experiment::LsXx, DecoderKind::Mwpm, 3, 0.01),
    ];
    let mut erasure = config(Experiment::TwoScqm, DecoderKind::Mwpm, 3, 0.02);
    erasure.r_e = 0.5;
    erasure.erasure_kind = ErasureKind::Conventional;
    configs.push(erasure);
    let preps: Vec<PreparedExperiment> = configs.iter().map(prepare).collect();
    for i in 0..instances {
        let prep = &preps[i % preps.len()];
        let graphs = prep.decoder.graphs();
        let (name, graph) = graphs[rng.random_range(0..graphs.len())];
        let members: Vec<u32> = (0..prep.detectors.len() as u32).filter(|&d| graph.contains(d)).collect();
        let k = rng.random_range(1..=12.min(members.len()));
        let mut defects: Vec<u32> = sample(&mut rng, members.len(), k).into_iter().map(|j| members[j]).collect();
        defects.sort_unstable();
        let heralds: Vec<u32> = if prep.noisy.num_heralds > 0 {
            let h = rng.random_range(0..=8.min(prep.noisy.num_heralds as usize));
            let mut v: Vec<u32> = sample(&mut rng, prep.noisy.num_heralds as usize, h).into_iter().map(|x| x as u32).collect();
            v.sort_unstable();
            v
        } else {
            Vec::new()
        };
        let fast = graph.mwpm(&defects, &heralds).map_err(|e| e.to_string())?;
        let slow = graph.brute_force_match(&defects, &heralds).map_err(|e| e.to_string())?;
        if fast.weight != slow.weight {
            return Err(format!(
                "instance {i} ({} {name}): blossom weight {} vs oracle {} for defects {defects:?}",
                prep.config.experiment.name(),
                fast.weight,
                slow.weight
            ));
        }
    }
    Ok(instances)
}
