//! Matching decoders: plain MWPM, single-update, ordered and teleportation.
//!
//! Every decoder is a list of sector plans. A plan is either one matching
//! problem or two chained ones, where the corrections of the first stage
//! are copied into the second stage's detectors and logical status before
//! the second stage runs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Block, Experiment};
use crate::error::{Error, Result};
use crate::frames::{partition_subgraphs, DetectorSet, Frame, Subgraph, TELEPORT_X, TELEPORT_Z_FIRST, TELEPORT_Z_SECOND};
use crate::lattice::Pauli;
use crate::matching::{DecodingGraph, GraphMechanism, MatchResult};
use crate::sampler::{sym_diff, DetectionSample, DetectorErrorModel, Mechanism};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecoderKind {
    Mwpm,
    SingleUpdate,
    Ordered,
    Teleport,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Mwpm => "mwpm",
            DecoderKind::SingleUpdate => "single_update",
            DecoderKind::Ordered => "ordered",
            DecoderKind::Teleport => "teleport",
        }
    }

    pub fn parse(s: &str) -> Option<DecoderKind> {
        match s {
            "mwpm" => Some(DecoderKind::Mwpm),
            "single_update" => Some(DecoderKind::SingleUpdate),
            "ordered" => Some(DecoderKind::Ordered),
            "teleport" => Some(DecoderKind::Teleport),
            _ => None,
        }
    }

    /// Detector frame the decoder works in.
    pub fn frame(self) -> Frame {
        match self {
            DecoderKind::SingleUpdate => Frame::Dynamic,
            DecoderKind::Teleport => Frame::Hybrid,
            _ => Frame::Static,
        }
    }

    pub fn check_compatible(self, experiment: Experiment) -> Result<()> {
        let ok = match self {
            DecoderKind::Mwpm => matches!(experiment, Experiment::Scqm | Experiment::TwoScqm | Experiment::LsXx),
            DecoderKind::SingleUpdate | DecoderKind::Ordered => experiment == Experiment::Tcnot,
            DecoderKind::Teleport => experiment == Experiment::Teleport,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleDecoder { decoder: self.name().into(), experiment: experiment.name().into() })
        }
    }
}

/// The matching problem of one stage.
#[derive(Clone, Debug)]
struct Stage {
    name: String,
    graph: DecodingGraph,
    observables: u64,
}

/// Detectors and observables a first-stage mechanism copies into the second stage.
#[derive(Clone, Debug, Default)]
struct Copy {
    detectors: Vec<u32>,
    observables: u64,
}

#[derive(Clone, Debug)]
struct Chain {
    first: Stage,
    second: Stage,
    copies: HashMap<u32, Copy>,
    /// Pairs whose detectors all lie after this round copy nothing.
    skip_after: Option<u32>,
}

#[derive(Clone, Debug)]
enum Plan {
    Single(Stage),
    Chain(Box<Chain>),
}

/// What one matching stage saw and did.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub name: String,
    /// Defects handed to the matcher, after any copied flips.
    pub defects: Vec<u32>,
    /// Detectors flipped by the correction.
    pub correction: Vec<u32>,
    pub observables: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    /// Predicted observable flips in the detector set's basis.
    pub predicted: u64,
    /// Failed circuit observables.
    pub failures: u64,
    /// Logical status propagated from first to second stages.
    pub l_prime: u64,
    /// Stages in execution order.
    pub stages: Vec<StageReport>,
}

#[derive(Clone, Debug)]
pub struct Decoder {
    pub kind: DecoderKind,
    set: DetectorSet,
    plans: Vec<Plan>,
    rounds: Vec<u32>,
}

fn graph_mechanisms<'a>(dem: &'a DetectorErrorModel, mask: u64) -> impl Iterator<Item = GraphMechanism> + 'a {
    dem.mechanisms.iter().enumerate().map(move |(i, m)| GraphMechanism {
        detectors: m.detectors.clone(),
        observables: m.observables & mask,
        probability: m.probability,
        herald: m.herald,
        id: i as u32,
    })
}

fn stage(name: &str, detectors: Vec<u32>, observables: u64, dem: &DetectorErrorModel) -> Stage {
    let mut graph = DecodingGraph::new(detectors, graph_mechanisms(dem, observables));
    graph.precompute();
    Stage { name: name.into(), graph, observables }
}

fn obs_mask(set: &DetectorSet, kind: Pauli, block: Option<Block>) -> u64 {
    set.observables
        .iter()
        .enumerate()
        .filter(|(_, o)| o.kind == kind && block.is_none_or(|b| o.block == b))
        .fold(0, |m, (i, _)| m | 1 << i)
}

fn restrict(m: &Mechanism, graph: &DecodingGraph) -> Vec<u32> {
    m.detectors.iter().copied().filter(|&d| graph.contains(d)).collect()
}

/// Chains `first` into `second`. The second graph is built from residual
/// mechanisms: each mechanism's own second-stage part combined with what
/// the first stage would copy when it corrects the mechanism's first part.
fn chain(
    dem: &DetectorErrorModel,
    rounds: &[u32],
    first: (&str, Vec<u32>, u64),
    second: (&str, Vec<u32>, u64),
    skip_after: Option<u32>,
) -> Chain {
    let first = stage(first.0, first.1, first.2, dem);
    let second_dets = second.1.clone();
    let in_second: std::collections::HashSet<u32> = second_dets.iter().copied().collect();
    let mut copies = HashMap::new();
    for (i, m) in dem.mechanisms.iter().enumerate() {
        let d1 = restrict(m, &first.graph);
        if d1.is_empty() {
            continue;
        }
        let late = skip_after.is_some_and(|g| d1.iter().all(|&d| rounds[d as usize] > g));
        let copy = if late {
            Copy::default()
        } else {
            Copy {
                detectors: m.detectors.iter().copied().filter(|d| in_second.contains(d)).collect(),
                observables: m.observables & second.2,
            }
        };
        copies.insert(i as u32, copy);
    }
    let empty = Copy::default();
    let residual = dem.mechanisms.iter().enumerate().map(|(i, m)| {
        let own: Vec<u32> = m.detectors.iter().copied().filter(|d| in_second.contains(d)).collect();
        let d1 = restrict(m, &first.graph);
        let copy = if d1.is_empty() {
            &empty
        } else if m.herald.is_some() {
            copies.get(&(i as u32)).unwrap_or(&empty)
        } else {
            first
                .graph
                .edge_between(&d1)
                .and_then(|e| first.graph.edges[e].mechanism)
                .and_then(|rep| copies.get(&rep))
                .unwrap_or(&empty)
        };
        GraphMechanism {
            detectors: sym_diff(&own, &copy.detectors),
            observables: (m.observables & second.2) ^ copy.observables,
            probability: m.probability,
            herald: m.herald,
            id: i as u32,
        }
    });
    let mut residual: Vec<GraphMechanism> = residual.collect();
    // Without Pauli mechanisms on a first-stage edge, the first stage may
    // explain heralded defects along other edges than the ones that fired.
    // The second-stage parts of those erasures, unheralded at the prior
    // rate, keep the resulting defects matchable.
    for (i, m) in dem.mechanisms.iter().enumerate() {
        let d1 = restrict(m, &first.graph);
        if m.herald.is_none() || d1.is_empty() {
            continue;
        }
        if first.graph.edge_between(&d1).is_none_or(|e| first.graph.edges[e].mechanism.is_some()) {
            continue;
        }
        let Some(copy) = copies.get(&(i as u32)) else { continue };
        if copy.detectors.is_empty() && copy.observables == 0 {
            continue;
        }
        residual.push(GraphMechanism {
            detectors: copy.detectors.clone(),
            observables: copy.observables,
            probability: m.prior,
            herald: None,
            id: i as u32,
        });
    }
    let mut graph = DecodingGraph::new(second_dets, residual);
    graph.precompute();
    Chain { first, second: Stage { name: second.0.into(), graph, observables: second.2 }, copies, skip_after }
}

fn ids_where(set: &DetectorSet, f: impl Fn(&crate::frames::Detector) -> bool) -> Vec<u32> {
    (0..set.len() as u32).filter(|&i| f(&set.detectors[i as usize])).collect()
}

fn from_subgraph(sg: &Subgraph) -> (&str, Vec<u32>, u64) {
    (sg.name.as_str(), sg.detectors.clone(), sg.observables)
}

impl Decoder {
    /// Builds `kind` for a detector set of `experiment` and its error model.
    pub fn new(kind: DecoderKind, experiment: Experiment, set: &DetectorSet, dem: &DetectorErrorModel) -> Result<Decoder> {
        kind.check_compatible(experiment)?;
        if set.frame != kind.frame() {
            return Err(Error::InvalidParameter(format!(
                "decoder {} needs {} detectors, got {}",
                kind.name(),
                kind.frame().name(),
                set.frame.name()
            )));
        }
        let rounds: Vec<u32> = set.detectors.iter().map(|d| d.round).collect();
        let part = partition_subgraphs(set, experiment);
        let named = |name: &str| -> &Subgraph {
            part.independent.iter().chain(&part.dependent).find(|s| s.name == name).expect("subgraph")
        };
        let plans = match kind {
            DecoderKind::Mwpm | DecoderKind::SingleUpdate => part
                .independent
                .iter()
                .chain(&part.dependent)
                .map(|sg| Plan::Single(stage(&sg.name, sg.detectors.clone(), sg.observables, dem)))
                .collect(),
            DecoderKind::Ordered => {
                let g = set.gate_round;
                vec![
                    Plan::Chain(Box::new(chain(dem, &rounds, from_subgraph(named("G_TX")), from_subgraph(named("G_CX")), g))),
                    Plan::Chain(Box::new(chain(dem, &rounds, from_subgraph(named("G_CZ")), from_subgraph(named("G_TZ")), g))),
                ]
            }
            DecoderKind::Teleport => {
                let x = ids_where(set, |d| d.group == TELEPORT_X);
                let z1 = ids_where(set, |d| d.group == TELEPORT_Z_FIRST);
                let z2 = ids_where(set, |d| d.group == TELEPORT_Z_SECOND);
                let x_stage = stage("G_X", x, obs_mask(set, Pauli::X, None), dem);
                let z = chain(
                    dem,
                    &rounds,
                    ("G_Z1", z1, obs_mask(set, Pauli::Z, Some(Block::T))),
                    ("G_Z2", z2, obs_mask(set, Pauli::Z, Some(Block::C))),
                    None,
                );
                for g in [&x_stage.graph, &z.first.graph, &z.second.graph] {
                    if let Some(&h) = g.hyperedges.first() {
                        return Err(Error::UnexpectedHyperedge(format!("mechanism {h}: {:?}", dem.mechanisms[h as usize].detectors)));
                    }
                }
                vec![Plan::Single(x_stage), Plan::Chain(Box::new(z))]
            }
        };
        Ok(Decoder { kind, set: set.clone(), plans, rounds })
    }

    pub fn detector_set(&self) -> &DetectorSet {
        &self.set
    }

    /// Graphs of all stages, in execution order.
    pub fn graphs(&self) -> Vec<(&str, &DecodingGraph)> {
        let mut out = Vec::new();
        for p in &self.plans {
            match p {
                Plan::Single(s) => out.push((s.name.as_str(), &s.graph)),
                Plan::Chain(c) => {
                    out.push((c.first.name.as_str(), &c.first.graph));
                    out.push((c.second.name.as_str(), &c.second.graph));
                }
            }
        }
        out
    }

    fn run_stage(stage: &Stage, defects: Vec<u32>, heralds: &[u32]) -> Result<(MatchResult, StageReport)> {
        let m = stage.graph.mwpm(&defects, heralds)?;
        let report = StageReport {
            name: stage.name.clone(),
            correction: stage.graph.edge_signature(&m.edges),
            defects,
            observables: m.observables,
        };
        Ok((m, report))
    }

    pub fn decode(&self, sample: &DetectionSample) -> Result<DecodeOutcome> {
        let mut predicted = 0u64;
        let mut l_prime = 0u64;
        let mut stages = Vec::new();
        let select = |g: &DecodingGraph| -> Vec<u32> { sample.defects.iter().copied().filter(|&d| g.contains(d)).collect() };
        for plan in &self.plans {
            match plan {
                Plan::Single(s) => {
                    let (m, report) = Self::run_stage(s, select(&s.graph), &sample.heralds)?;
                    predicted ^= m.observables & s.observables;
                    stages.push(report);
                }
                Plan::Chain(c) => {
                    let (m1, report) = Self::run_stage(&c.first, select(&c.first.graph), &sample.heralds)?;
                    predicted ^= m1.observables & c.first.observables;
                    stages.push(report);
                    let mut flips: Vec<u32> = Vec::new();
                    let mut carried = 0u64;
                    for (pair, path) in m1.pairs.iter().zip(&m1.paths) {
                        if let Some(g) = c.skip_after {
                            let late = |d: u32| self.rounds[d as usize] > g;
                            if late(pair.0) && pair.1.is_none_or(late) {
                                continue;
                            }
                        }
                        for mech in m1.mechanisms[path.clone()].iter().flatten() {
                            if let Some(copy) = c.copies.get(mech) {
                                flips = sym_diff(&flips, &copy.detectors);
                                carried ^= copy.observables;
                            }
                        }
                    }
                    let defects2 = sym_diff(&select(&c.second.graph), &flips);
                    let (m2, report) = Self::run_stage(&c.second, defects2, &sample.heralds)?;
                    predicted ^= (m2.observables ^ carried) & c.second.observables;
                    l_prime ^= carried;
                    stages.push(report);
                }
            }
        }
        let failures = self.set.map_to_circuit(predicted ^ sample.observables);
        Ok(DecodeOutcome { predicted, failures, l_prime, stages })
    }
}
