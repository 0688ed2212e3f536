//! Pauli-frame propagation, detector error models and shot sampling.
//!
//! Every fault site is split into elementary components (an X or Z on one
//! qubit after one operation, or a classical measurement flip). Components
//! are propagated once, 64 at a time, through the rest of the circuit; a
//! shot is then the XOR of the effects of its active components.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::frames::DetectorSet;
use crate::lattice::Pauli;
use crate::noise::{ErasureKind, ErasureTarget, FaultKind, NoisyCircuit, SinglePauli};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Component {
    Pauli { op: u32, qubit: u32, z: bool },
    Flip { meas: u32 },
}

/// Measurement flips of every fault component of a noisy circuit.
#[derive(Clone, Debug)]
pub struct FaultTable {
    components: Vec<Component>,
    meas_flips: Vec<Vec<u32>>,
    /// Per site: up to four component ids (`[Xa, Za, Xb, Zb]` for two-qubit sites).
    site_components: Vec<[u32; 4]>,
}

fn op_measurements(circuit: &Circuit) -> Vec<u32> {
    let mut out = vec![NONE; circuit.ops.len()];
    for (m, meas) in circuit.measurements.iter().enumerate() {
        out[meas.op] = m as u32;
    }
    out
}

/// Propagates up to 64 Pauli components; returns flipped measurements per component.
fn propagate_batch(circuit: &Circuit, op_meas: &[u32], batch: &[(u32, u32, bool)]) -> Vec<Vec<u32>> {
    debug_assert!(batch.len() <= 64);
    let nq = circuit.qubits.len();
    let (mut x, mut z) = (vec![0u64; nq], vec![0u64; nq]);
    let mut out = vec![Vec::new(); batch.len()];
    let start = batch.iter().map(|b| b.0).min().unwrap_or(0) as usize;
    let mut next = 0;
    for (i, op) in circuit.ops.iter().enumerate().skip(start) {
        let record = match &op.gate {
            Gate::PrepZ(q) | Gate::PrepX(q) => {
                x[*q] = 0;
                z[*q] = 0;
                None
            }
            Gate::Cnot(c, t) => {
                x[*t] ^= x[*c];
                z[*c] ^= z[*t];
                None
            }
            Gate::MeasZ(q) => Some(x[*q]),
            Gate::MeasX(q) => Some(z[*q]),
            Gate::MeasPauli(kind, qs) => {
                let bits = if *kind == Pauli::Z { &x } else { &z };
                Some(qs.iter().fold(0, |acc, &q| acc ^ bits[q]))
            }
            Gate::Idle(_) => None,
        };
        if let Some(mut bits) = record {
            let m = op_meas[i];
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                out[j].push(m);
                bits &= bits - 1;
            }
        }
        while next < batch.len() && batch[next].0 as usize == i {
            let (_, q, is_z) = batch[next];
            if is_z {
                z[q as usize] |= 1 << next;
            } else {
                x[q as usize] |= 1 << next;
            }
            next += 1;
        }
    }
    out
}

impl FaultTable {
    pub fn new(noisy: &NoisyCircuit) -> FaultTable {
        let mut index: HashMap<Component, u32> = HashMap::new();
        let mut components = Vec::new();
        let mut id = |c: Component| {
            *index.entry(c).or_insert_with(|| {
                components.push(c);
                (components.len() - 1) as u32
            })
        };
        let pauli = |op: usize, q: usize, z: bool| Component::Pauli { op: op as u32, qubit: q as u32, z };
        let site_components = noisy
            .sites
            .iter()
            .map(|s| match s.kind {
                FaultKind::TwoQubitPauli { qubits: [a, b] } | FaultKind::Erasure { qubits: [a, b], .. } => [
                    id(pauli(s.op, a, false)),
                    id(pauli(s.op, a, true)),
                    id(pauli(s.op, b, false)),
                    id(pauli(s.op, b, true)),
                ],
                FaultKind::DataX { qubit } => [id(pauli(s.op, qubit, false)), NONE, NONE, NONE],
                FaultKind::MeasFlip { meas } => [id(Component::Flip { meas: meas as u32 }), NONE, NONE, NONE],
            })
            .collect();

        let op_meas = op_measurements(&noisy.circuit);
        let mut order: Vec<u32> = (0..components.len() as u32)
            .filter(|&c| matches!(components[c as usize], Component::Pauli { .. }))
            .collect();
        order.sort_by_key(|&c| components[c as usize]);
        let mut meas_flips = vec![Vec::new(); components.len()];
        for (c, comp) in components.iter().enumerate() {
            if let Component::Flip { meas } = comp {
                meas_flips[c] = vec![*meas];
            }
        }
        let batches: Vec<&[u32]> = order.chunks(64).collect();
        let results: Vec<Vec<Vec<u32>>> = batches
            .par_iter()
            .map(|chunk| {
                let batch: Vec<(u32, u32, bool)> = chunk
                    .iter()
                    .map(|&c| match components[c as usize] {
                        Component::Pauli { op, qubit, z } => (op, qubit, z),
                        Component::Flip { .. } => unreachable!(),
                    })
                    .collect();
                propagate_batch(&noisy.circuit, &op_meas, &batch)
            })
            .collect();
        for (chunk, res) in batches.iter().zip(results) {
            for (&c, flips) in chunk.iter().zip(res) {
                meas_flips[c as usize] = flips;
            }
        }
        FaultTable { components, meas_flips, site_components }
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }
}

/// Detector and observable flips of one fault pattern in one detector set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Effect {
    pub detectors: Vec<u32>,
    pub observables: u64,
}

impl Effect {
    pub fn xor(&self, other: &Effect) -> Effect {
        Effect { detectors: sym_diff(&self.detectors, &other.detectors), observables: self.observables ^ other.observables }
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty() && self.observables == 0
    }
}

/// Symmetric difference of two sorted lists.
pub fn sym_diff(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Maps measurement flips to detector and observable flips.
struct Incidence {
    detectors: Vec<Vec<u32>>,
    observables: Vec<u64>,
}

impl Incidence {
    fn new(num_meas: usize, set: &DetectorSet) -> Incidence {
        let mut detectors = vec![Vec::new(); num_meas];
        let mut observables = vec![0u64; num_meas];
        for (i, d) in set.detectors.iter().enumerate() {
            for &m in &d.measurements {
                detectors[m].push(i as u32);
            }
        }
        for (i, o) in set.observables.iter().enumerate() {
            for &m in &o.measurements {
                observables[m] ^= 1 << i;
            }
        }
        Incidence { detectors, observables }
    }

    fn effect(&self, flips: &[u32]) -> Effect {
        let mut dets: Vec<u32> = flips.iter().flat_map(|&m| self.detectors[m as usize].iter().copied()).collect();
        dets.sort_unstable();
        let mut out: Vec<u32> = Vec::with_capacity(dets.len());
        for d in dets {
            if out.last() == Some(&d) {
                out.pop();
            } else {
                out.push(d);
            }
        }
        let observables = flips.iter().fold(0, |acc, &m| acc ^ self.observables[m as usize]);
        Effect { detectors: out, observables }
    }
}

/// Propagates a Pauli applied after operation `op` and returns its effect in `set`.
pub fn propagate_fault(circuit: &Circuit, op: usize, paulis: &[(usize, SinglePauli)], set: &DetectorSet) -> Result<Effect> {
    if op >= circuit.ops.len() {
        return Err(Error::UnknownFaultSite(op));
    }
    let mut batch = Vec::new();
    for &(q, p) in paulis {
        if q >= circuit.qubits.len() {
            return Err(Error::UnknownFaultSite(op));
        }
        let (bx, bz) = p.bits();
        if bx {
            batch.push((op as u32, q as u32, false));
        }
        if bz {
            batch.push((op as u32, q as u32, true));
        }
    }
    let flips = propagate_batch(circuit, &op_measurements(circuit), &batch);
    let inc = Incidence::new(circuit.measurements.len(), set);
    Ok(flips.iter().fold(Effect::default(), |acc, f| acc.xor(&inc.effect(f))))
}

/// Effect of flipping a single measurement outcome.
pub fn measurement_flip_effect(circuit: &Circuit, meas: usize, set: &DetectorSet) -> Result<Effect> {
    if meas >= circuit.measurements.len() {
        return Err(Error::UnknownFaultSite(meas));
    }
    Ok(Incidence::new(circuit.measurements.len(), set).effect(&[meas as u32]))
}

/// An independent error mechanism.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mechanism {
    pub detectors: Vec<u32>,
    pub observables: u64,
    /// Probability of the mechanism; for erasure mechanisms, conditional on the herald.
    pub probability: f64,
    /// Unconditional probability (equal to `probability` for Pauli mechanisms).
    pub prior: f64,
    pub herald: Option<u32>,
    pub sources: Vec<u32>,
    pub hyperedge: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetectorErrorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub mechanisms: Vec<Mechanism>,
}

/// `p1 ⊕ p2`: probability that exactly one of two independent events happens.
pub fn merge_probability(p1: f64, p2: f64) -> f64 {
    p1 + p2 - 2.0 * p1 * p2
}

impl DetectorErrorModel {
    pub fn num_hyperedges(&self) -> usize {
        self.mechanisms.iter().filter(|m| m.hyperedge).count()
    }

    /// One mechanism per line: probability, detectors, observables, herald, hyperedge flag.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for m in &self.mechanisms {
            let dets: Vec<String> = m.detectors.iter().map(|d| format!("D{d}")).collect();
            let obs: Vec<String> = (0..64).filter(|i| m.observables >> i & 1 == 1).map(|i| format!("L{i}")).collect();
            let herald = m.herald.map(|h| format!(" E{h}")).unwrap_or_default();
            let hyper = if m.hyperedge { " hyperedge" } else { "" };
            let _ = writeln!(out, "{:.6e} {} {}{}{}", m.probability, dets.join(" "), obs.join(" "), herald, hyper);
        }
        out
    }
}

fn site_effects(table: &FaultTable, inc: &Incidence) -> Vec<Effect> {
    table.meas_flips.iter().map(|f| inc.effect(f)).collect()
}

fn xor_components(effects: &[Effect], comps: &[u32]) -> Effect {
    comps.iter().fold(Effect::default(), |acc, &c| acc.xor(&effects[c as usize]))
}

/// Builds the detector error model of `noisy` in `set`. The X and Z parts of
/// every two-qubit Pauli fault become separate mechanisms.
pub fn build_dem(noisy: &NoisyCircuit, table: &FaultTable, set: &DetectorSet) -> DetectorErrorModel {
    let inc = Incidence::new(noisy.circuit.measurements.len(), set);
    let effects = site_effects(table, &inc);
    let mut index: HashMap<(Vec<u32>, u64, Option<u32>), usize> = HashMap::new();
    let mut mechanisms: Vec<Mechanism> = Vec::new();
    let mut add = |e: Effect, p: f64, prior: f64, herald: Option<u32>, site: u32| {
        if e.is_empty() || p <= 0.0 {
            return;
        }
        let key = (e.detectors, e.observables, herald);
        match index.get(&key) {
            Some(&i) => {
                let m = &mut mechanisms[i];
                m.probability = merge_probability(m.probability, p);
                m.prior = merge_probability(m.prior, prior);
                m.sources.push(site);
            }
            None => {
                index.insert(key.clone(), mechanisms.len());
                mechanisms.push(Mechanism {
                    detectors: key.0,
                    observables: key.1,
                    probability: p,
                    prior,
                    herald,
                    sources: vec![site],
                    hyperedge: false,
                });
            }
        }
    };
    let target = noisy.params.erasure_target;
    let kind = noisy.params.erasure_kind;
    for (s, site) in noisy.sites.iter().enumerate() {
        let c = &table.site_components[s];
        let s = s as u32;
        match site.kind {
            FaultKind::TwoQubitPauli { .. } => {
                let p = 4.0 * site.probability / 15.0;
                for part in [[c[0]].as_slice(), &[c[2]], &[c[0], c[2]], &[c[1]], &[c[3]], &[c[1], c[3]]] {
                    add(xor_components(&effects, part), p, p, None, s);
                }
            }
            FaultKind::Erasure { herald, .. } => {
                let side_prior = match target {
                    ErasureTarget::One => site.probability / 2.0,
                    ErasureTarget::Both => site.probability,
                };
                for side in 0..2u32 {
                    let (cx, cz) = (c[2 * side as usize], c[2 * side as usize + 1]);
                    let parts: Vec<u32> = match (kind, side) {
                        (ErasureKind::Biased, 0) => vec![cz],
                        (ErasureKind::Biased, _) => vec![cx],
                        _ => vec![cx, cz],
                    };
                    for comp in parts {
                        add(effects[comp as usize].clone(), 0.5, side_prior * 0.5, Some(herald + side), s);
                    }
                }
            }
            FaultKind::DataX { .. } | FaultKind::MeasFlip { .. } => {
                add(effects[c[0] as usize].clone(), site.probability, site.probability, None, s);
            }
        }
    }
    let groups = set.groups.len();
    for m in &mut mechanisms {
        let mut count = vec![0usize; groups];
        for &d in &m.detectors {
            count[set.detectors[d as usize].group as usize] += 1;
        }
        m.hyperedge = count.iter().any(|&n| n >= 3);
    }
    DetectorErrorModel { num_detectors: set.len(), num_observables: set.observables.len(), mechanisms }
}

/// One Monte Carlo shot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionSample {
    pub seed: u64,
    pub shot: u64,
    /// Sorted ids of detectors that fired.
    pub defects: Vec<u32>,
    pub observables: u64,
    /// Sorted ids of heralded erasures.
    pub heralds: Vec<u32>,
}

impl DetectionSample {
    pub fn detector_bits(&self, n: usize) -> Vec<bool> {
        let mut bits = vec![false; n];
        for &d in &self.defects {
            bits[d as usize] = true;
        }
        bits
    }
}

fn class_tag(kind: &FaultKind) -> u8 {
    match kind {
        FaultKind::TwoQubitPauli { .. } => 0,
        FaultKind::Erasure { .. } => 1,
        FaultKind::DataX { .. } => 2,
        FaultKind::MeasFlip { .. } => 3,
    }
}

#[derive(Clone, Copy, Debug)]
enum SiteKind {
    TwoQubit,
    Erasure(u32),
    Single,
}

/// Samples shots of a noisy circuit in one detector set.
#[derive(Clone, Debug)]
pub struct Sampler {
    effects: Vec<Effect>,
    site_components: Vec<[u32; 4]>,
    site_kinds: Vec<SiteKind>,
    /// Sites grouped by probability, in circuit order within a group.
    classes: Vec<(f64, Vec<u32>)>,
    num_detectors: usize,
    erasure_kind: ErasureKind,
    erasure_target: ErasureTarget,
}

impl Sampler {
    pub fn new(noisy: &NoisyCircuit, table: &FaultTable, set: &DetectorSet) -> Sampler {
        let inc = Incidence::new(noisy.circuit.measurements.len(), set);
        let effects = site_effects(table, &inc);
        let mut classes: Vec<((u64, u8), f64, Vec<u32>)> = Vec::new();
        let mut site_kinds = Vec::with_capacity(noisy.sites.len());
        for (i, s) in noisy.sites.iter().enumerate() {
            site_kinds.push(match s.kind {
                FaultKind::TwoQubitPauli { .. } => SiteKind::TwoQubit,
                FaultKind::Erasure { herald, .. } => SiteKind::Erasure(herald),
                _ => SiteKind::Single,
            });
            let key = (s.probability.to_bits(), class_tag(&s.kind));
            match classes.iter().position(|c| c.0 == key) {
                Some(k) => classes[k].2.push(i as u32),
                None => classes.push((key, s.probability, vec![i as u32])),
            }
        }
        let classes = classes.into_iter().map(|(_, p, list)| (p, list)).collect();
        Sampler {
            effects,
            site_components: table.site_components.clone(),
            site_kinds,
            classes,
            num_detectors: set.len(),
            erasure_kind: noisy.params.erasure_kind,
            erasure_target: noisy.params.erasure_target,
        }
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    /// Shot `shot` of the stream seeded by `seed`; independent of any other shot.
    pub fn sample(&self, seed: u64, shot: u64) -> DetectionSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot);
        let mut bits = vec![0u64; self.num_detectors.div_ceil(64)];
        let mut obs = 0u64;
        let mut heralds = Vec::new();
        let toggle = |c: u32, bits: &mut Vec<u64>, obs: &mut u64| {
            let e = &self.effects[c as usize];
            for &d in &e.detectors {
                bits[d as usize / 64] ^= 1 << (d % 64);
            }
            *obs ^= e.observables;
        };
        for (p, sites) in &self.classes {
            let p = *p;
            if p <= 0.0 {
                continue;
            }
            let log_q = (1.0 - p).ln();
            let mut i = 0usize;
            loop {
                if p < 1.0 {
                    let u: f64 = rng.random();
                    let skip = ((1.0 - u).ln() / log_q).floor();
                    i = i.saturating_add(if skip.is_finite() { skip as usize } else { usize::MAX });
                }
                if i >= sites.len() {
                    break;
                }
                let s = sites[i] as usize;
                let comps = self.site_components[s];
                match self.site_kinds[s] {
                    SiteKind::TwoQubit => {
                        let r: u32 = rng.random_range(1..16);
                        for (k, &c) in comps.iter().enumerate() {
                            if r >> k & 1 == 1 {
                                toggle(c, &mut bits, &mut obs);
                            }
                        }
                    }
                    SiteKind::Erasure(herald) => {
                        let sides: &[usize] = match self.erasure_target {
                            ErasureTarget::One => {
                                if rng.random::<bool>() { &[1] } else { &[0] }
                            }
                            ErasureTarget::Both => &[0, 1],
                        };
                        for &side in sides {
                            heralds.push(herald + side as u32);
                            let (cx, cz) = (comps[2 * side], comps[2 * side + 1]);
                            match self.erasure_kind {
                                ErasureKind::Biased => {
                                    if rng.random::<bool>() {
                                        toggle(if side == 0 { cz } else { cx }, &mut bits, &mut obs);
                                    }
                                }
                                _ => {
                                    let r: u32 = rng.random_range(0..4);
                                    if r & 1 == 1 {
                                        toggle(cx, &mut bits, &mut obs);
                                    }
                                    if r & 2 == 2 {
                                        toggle(cz, &mut bits, &mut obs);
                                    }
                                }
                            }
                        }
                    }
                    SiteKind::Single => toggle(comps[0], &mut bits, &mut obs),
                }
                i += 1;
            }
        }
        let mut defects = Vec::new();
        for (w, &word) in bits.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                defects.push((w * 64) as u32 + word.trailing_zeros());
                word &= word - 1;
            }
        }
        heralds.sort_unstable();
        DetectionSample { seed, shot, defects, observables: obs, heralds }
    }

    /// Shots `0..n` in parallel; the result does not depend on the thread count.
    pub fn sample_shots(&self, n: u64, seed: u64) -> Vec<DetectionSample> {
        (0..n).into_par_iter().map(|s| self.sample(seed, s)).collect()
    }
}
