//! Detector definitions in the static, dynamic and hybrid frames.
//!
//! With `g` the last round before the transversal CNOT, the frames differ
//! only in how the control X checks and target Z checks are compared across
//! the gate:
//!
//! * static: `S^{r-1} ⊕ S^r` everywhere;
//! * dynamic: for `r > g` the control X check is replaced by
//!   `S_CX^r ⊕ S_TX^r` and the target Z check by `S_TZ^r ⊕ S_CZ^r`, and the
//!   observables `X_C`, `Z_T` become `X_C ⊕ X_T`, `Z_T ⊕ Z_C`;
//! * hybrid: static, except that round `g + 1` of those checks compares
//!   against the product `S^g_CX ⊕ S^g_TX` (and `S^g_TZ ⊕ S^g_CZ`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{merged_origins, Block, Circuit, Experiment, MergedOrigin, ObservableDef};
use crate::error::{Error, Result};
use crate::lattice::Pauli;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Static,
    Dynamic,
    Hybrid,
}

impl Frame {
    pub fn name(self) -> &'static str {
        match self {
            Frame::Static => "static",
            Frame::Dynamic => "dynamic",
            Frame::Hybrid => "hybrid",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detector {
    pub block: Block,
    pub kind: Pauli,
    pub check: usize,
    pub round: u32,
    /// Hyperedges are counted within a group.
    pub group: u8,
    pub measurements: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetectorSet {
    pub frame: Frame,
    pub detectors: Vec<Detector>,
    pub observables: Vec<ObservableDef>,
    pub groups: Vec<String>,
    /// For each observable of the circuit, the mask of observables of this
    /// set whose parity equals it.
    pub to_circuit_obs: Vec<u64>,
    pub gate_round: Option<u32>,
}

impl DetectorSet {
    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }

    /// Maps an observable mask of this set to the circuit's observables.
    pub fn map_to_circuit(&self, mask: u64) -> u64 {
        self.to_circuit_obs
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &m)| acc | ((((mask & m).count_ones() & 1) as u64) << i))
    }

    pub fn find(&self, block: Block, kind: Pauli, check: usize, round: u32) -> Option<usize> {
        self.detectors
            .iter()
            .position(|d| d.block == block && d.kind == kind && d.check == check && d.round == round)
    }
}

fn xor_into(acc: &mut Vec<usize>, other: &[usize]) {
    acc.extend_from_slice(other);
    acc.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(acc.len());
    for &m in acc.iter() {
        if out.last() == Some(&m) {
            out.pop();
        } else {
            out.push(m);
        }
    }
    *acc = out;
}

fn xor_all(parts: &[&[usize]]) -> Vec<usize> {
    let mut acc = Vec::new();
    for p in parts {
        xor_into(&mut acc, p);
    }
    acc
}

/// Builds the detectors of `circuit` in `frame`.
pub fn define_detectors(circuit: &Circuit, frame: Frame) -> Result<DetectorSet> {
    let unavailable = || Error::FrameUnavailable { frame: frame.name().into(), experiment: circuit.experiment.name().into() };
    match (circuit.experiment, frame) {
        (Experiment::LsXx, Frame::Static) => Ok(lattice_surgery_detectors(circuit)),
        (Experiment::Scqm | Experiment::TwoScqm, Frame::Static) => Ok(patch_detectors(circuit, frame)),
        (Experiment::Scqm | Experiment::TwoScqm | Experiment::LsXx, _) => Err(unavailable()),
        (Experiment::Teleport, Frame::Dynamic) => Err(unavailable()),
        (Experiment::Teleport, Frame::Hybrid) => Ok(teleport_detectors(circuit)),
        _ => Ok(patch_detectors(circuit, frame)),
    }
}

/// Rounds (ascending) for which a check value exists.
fn rounds_of(circuit: &Circuit, block: Block, kind: Pauli, check: usize) -> Vec<u32> {
    let lo = crate::circuit::CheckKey { block, kind, check, round: 0 };
    let hi = crate::circuit::CheckKey { block, kind, check, round: u32::MAX };
    circuit.check_values.range(lo..=hi).map(|(k, _)| k.round).collect()
}

fn sector_group(kind: Pauli) -> u8 {
    match kind {
        Pauli::X => 0,
        Pauli::Z => 1,
    }
}

fn identity_map(n: usize) -> Vec<u64> {
    (0..n).map(|i| 1u64 << i).collect()
}

/// Static, dynamic or hybrid detectors on the separate C/T patches.
fn patch_detectors(circuit: &Circuit, frame: Frame) -> DetectorSet {
    let g = circuit.gate_round;
    let v = |b: Block, k: Pauli, c: usize, r: u32| circuit.check_value(b, k, c, r).unwrap_or(&[]);
    // (block, kind) pairs whose checks change meaning at the gate, and their partner
    let dependent = |b: Block, k: Pauli| match (b, k) {
        (Block::C, Pauli::X) => Some(Block::T),
        (Block::T, Pauli::Z) => Some(Block::C),
        _ => None,
    };
    let mut detectors = Vec::new();
    for (&block, layout) in &circuit.layouts {
        for kind in [Pauli::X, Pauli::Z] {
            for check in 0..layout.checks(kind).len() {
                let rounds = rounds_of(circuit, block, kind, check);
                for w in rounds.windows(2) {
                    let (r0, r1) = (w[0], w[1]);
                    let partner = g.and(dependent(block, kind));
                    let measurements = match (frame, partner, g) {
                        (Frame::Dynamic, Some(other), Some(g)) if r1 > g => {
                            let cur = xor_all(&[v(block, kind, check, r1), v(other, kind, check, r1)]);
                            let prev = if r0 > g {
                                xor_all(&[v(block, kind, check, r0), v(other, kind, check, r0)])
                            } else {
                                v(block, kind, check, r0).to_vec()
                            };
                            xor_all(&[&cur, &prev])
                        }
                        (Frame::Hybrid, Some(other), Some(g)) if r1 == g + 1 => {
                            xor_all(&[v(block, kind, check, r1), v(block, kind, check, r0), v(other, kind, check, r0)])
                        }
                        _ => xor_all(&[v(block, kind, check, r0), v(block, kind, check, r1)]),
                    };
                    detectors.push(Detector { block, kind, check, round: r1, group: sector_group(kind), measurements });
                }
            }
        }
    }
    let mut observables = circuit.observables.clone();
    let mut to_circuit_obs = identity_map(observables.len());
    if frame == Frame::Dynamic {
        let pairs = [("logical_x_control", "logical_x_target"), ("logical_z_target", "logical_z_control")];
        for (dep, ind) in pairs {
            if let (Some(a), Some(b)) = (circuit.observable(dep), circuit.observable(ind)) {
                let extra = circuit.observables[b].measurements.clone();
                xor_into(&mut observables[a].measurements, &extra);
                to_circuit_obs[a] |= 1 << b;
            }
        }
    }
    DetectorSet {
        frame,
        detectors,
        observables,
        groups: vec!["x".into(), "z".into()],
        to_circuit_obs,
        gate_round: g,
    }
}

/// Group ids of the teleportation detector set.
pub const TELEPORT_X: u8 = 0;
pub const TELEPORT_Z_FIRST: u8 = 1;
pub const TELEPORT_Z_SECOND: u8 = 2;

/// Hybrid detectors of the teleportation circuit, split into the X sector,
/// the Z detectors up to the target readout, and the later control Z
/// detectors.
fn teleport_detectors(circuit: &Circuit) -> DetectorSet {
    let mut set = patch_detectors(circuit, Frame::Hybrid);
    let g = circuit.gate_round.expect("teleportation has a gate round");
    for det in &mut set.detectors {
        det.group = match (det.kind, det.block) {
            (Pauli::X, _) => TELEPORT_X,
            (Pauli::Z, Block::C) if det.round > g => TELEPORT_Z_SECOND,
            (Pauli::Z, _) => TELEPORT_Z_FIRST,
        };
    }
    set.groups = vec!["x".into(), "z_first".into(), "z_second".into()];
    set
}

/// Static detectors of the lattice-surgery XX circuit.
fn lattice_surgery_detectors(circuit: &Circuit) -> DetectorSet {
    let r = circuit.gate_round.expect("merge round");
    let (m_start, m_end) = (r + 1, 2 * r);
    let v = |b: Block, k: Pauli, c: usize, round: u32| circuit.check_value(b, k, c, round).unwrap_or(&[]);
    let mut detectors = Vec::new();
    let mut push = |block, kind, check, round, measurements: Vec<usize>| {
        detectors.push(Detector { block, kind, check, round, group: sector_group(kind), measurements });
    };

    // patch checks: buffer rounds, split rounds and readout
    for block in [Block::C, Block::T] {
        let layout = circuit.layout(block);
        for kind in [Pauli::X, Pauli::Z] {
            for check in 0..layout.checks(kind).len() {
                let rounds = rounds_of(circuit, block, kind, check);
                for w in rounds.windows(2) {
                    let (r0, r1) = (w[0], w[1]);
                    if r1 <= r || r0 > m_end {
                        push(block, kind, check, r1, xor_all(&[v(block, kind, check, r0), v(block, kind, check, r1)]));
                    }
                }
            }
        }
    }

    let merged = circuit.layout(Block::Merged);
    let bridge_part = |kind: Pauli, check: usize| -> Vec<usize> {
        let mut out: Vec<usize> = merged.checks(kind)[check]
            .qubits()
            .filter_map(|q| circuit.bridge_meas.get(&merged.data[q]).copied())
            .collect();
        out.sort_unstable();
        out
    };
    for kind in [Pauli::X, Pauli::Z] {
        let origins = merged_origins(circuit, kind);
        for (check, origin) in origins.iter().enumerate() {
            // merge start
            let first = v(Block::Merged, kind, check, m_start);
            match origin {
                MergedOrigin::Same(b, i) | MergedOrigin::Extended(b, i) => {
                    push(Block::Merged, kind, check, m_start, xor_all(&[v(*b, kind, *i, r), first]));
                }
                MergedOrigin::BridgeOnly => push(Block::Merged, kind, check, m_start, first.to_vec()),
                MergedOrigin::New => {}
            }
            for round in m_start + 1..=m_end {
                let m = xor_all(&[v(Block::Merged, kind, check, round - 1), v(Block::Merged, kind, check, round)]);
                push(Block::Merged, kind, check, round, m);
            }
            // split
            let last = v(Block::Merged, kind, check, m_end);
            match origin {
                MergedOrigin::Same(b, i) => {
                    push(*b, kind, *i, m_end + 1, xor_all(&[last, v(*b, kind, *i, m_end + 1)]));
                }
                MergedOrigin::Extended(b, i) => {
                    let m = xor_all(&[last, &bridge_part(kind, check), v(*b, kind, *i, m_end + 1)]);
                    push(*b, kind, *i, m_end + 1, m);
                }
                MergedOrigin::BridgeOnly => {
                    push(Block::Merged, kind, check, m_end + 1, xor_all(&[last, &bridge_part(kind, check)]));
                }
                MergedOrigin::New => {}
            }
        }
    }
    // every patch check has a merged counterpart and so a split detector
    for block in [Block::C, Block::T] {
        let layout = circuit.layout(block);
        for check in 0..layout.x_checks.len() {
            let covered = detectors.iter().any(|d| d.block == block && d.kind == Pauli::X && d.check == check && d.round == m_end + 1);
            debug_assert!(covered, "patch X check {check} of {block:?} has no split detector");
        }
    }
    let observables = circuit.observables.clone();
    let n = observables.len();
    DetectorSet {
        frame: Frame::Static,
        detectors,
        observables,
        groups: vec!["x".into(), "z".into()],
        to_circuit_obs: identity_map(n),
        gate_round: Some(r),
    }
}

/// One decoding subgraph: a set of detectors and the observables decoded on it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgraph {
    pub name: String,
    pub sector: Pauli,
    pub dependent: bool,
    pub detectors: Vec<u32>,
    pub observables: u64,
    /// Round-`g+1` detectors of a dependent subgraph.
    pub gate_detectors: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub independent: Vec<Subgraph>,
    pub dependent: Vec<Subgraph>,
}

fn obs_mask(set: &DetectorSet, f: impl Fn(&ObservableDef) -> bool) -> u64 {
    set.observables.iter().enumerate().filter(|(_, o)| f(o)).fold(0, |m, (i, _)| m | (1 << i))
}

/// Splits a transversal-CNOT detector set into `G_ind = {G_TX, G_CZ}` and
/// `G_dep = {G_CX, G_TZ}`. Circuits without a transversal gate give one
/// independent subgraph per sector.
pub fn partition_subgraphs(set: &DetectorSet, experiment: Experiment) -> Partition {
    let tcnot = matches!(experiment, Experiment::Tcnot | Experiment::Teleport);
    let mut part = Partition { independent: Vec::new(), dependent: Vec::new() };
    if !tcnot {
        for sector in [Pauli::X, Pauli::Z] {
            let detectors = (0..set.len() as u32).filter(|&i| set.detectors[i as usize].kind == sector).collect();
            part.independent.push(Subgraph {
                name: format!("G_{}", sector.as_char()),
                sector,
                dependent: false,
                detectors,
                observables: obs_mask(set, |o| o.kind == sector),
                gate_detectors: Vec::new(),
            });
        }
        return part;
    }
    let g = set.gate_round.unwrap_or(0);
    for (block, sector) in [(Block::T, Pauli::X), (Block::C, Pauli::Z), (Block::C, Pauli::X), (Block::T, Pauli::Z)] {
        let dependent = matches!((block, sector), (Block::C, Pauli::X) | (Block::T, Pauli::Z));
        let ids: Vec<u32> = (0..set.len() as u32)
            .filter(|&i| {
                let d = &set.detectors[i as usize];
                d.kind == sector && d.block == block
            })
            .collect();
        let gate_detectors = if dependent {
            ids.iter().copied().filter(|&i| set.detectors[i as usize].round == g + 1).collect()
        } else {
            Vec::new()
        };
        let sg = Subgraph {
            name: format!("G_{}{}", block.label(), sector.as_char()),
            sector,
            dependent,
            detectors: ids,
            observables: obs_mask(set, |o| o.kind == sector && o.block == block),
            gate_detectors,
        };
        if dependent { part.dependent.push(sg) } else { part.independent.push(sg) }
    }
    part
}

/// Number of detectors per `(block, kind)` for diagnostics.
pub fn detector_census(set: &DetectorSet) -> BTreeMap<(Block, Pauli), usize> {
    let mut out = BTreeMap::new();
    for d in &set.detectors {
        *out.entry((d.block, d.kind)).or_insert(0) += 1;
    }
    out
}
