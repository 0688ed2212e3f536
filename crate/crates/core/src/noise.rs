//! Fault sites for the supported noise models.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, MeasKind, Stage};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseModel {
    /// Two-qubit gate faults only.
    Circuit,
    /// Data bit flips before each round plus check measurement flips.
    Phenomenological,
}

impl NoiseModel {
    pub fn name(self) -> &'static str {
        match self {
            NoiseModel::Circuit => "circuit",
            NoiseModel::Phenomenological => "phenomenological",
        }
    }

    pub fn parse(s: &str) -> Option<NoiseModel> {
        match s {
            "circuit" => Some(NoiseModel::Circuit),
            "phenomenological" | "phenom" => Some(NoiseModel::Phenomenological),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErasureKind {
    None,
    Conventional,
    Biased,
}

impl ErasureKind {
    pub fn name(self) -> &'static str {
        match self {
            ErasureKind::None => "none",
            ErasureKind::Conventional => "conventional",
            ErasureKind::Biased => "biased",
        }
    }

    pub fn parse(s: &str) -> Option<ErasureKind> {
        match s {
            "none" => Some(ErasureKind::None),
            "conventional" => Some(ErasureKind::Conventional),
            "biased" => Some(ErasureKind::Biased),
            _ => None,
        }
    }
}

/// Which qubits of a gate an erasure event hits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErasureTarget {
    /// One of the two qubits, chosen uniformly.
    One,
    /// Both qubits.
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
    pub model: NoiseModel,
    pub r_e: f64,
    pub erasure_kind: ErasureKind,
    pub erasure_target: ErasureTarget,
}

impl NoiseParams {
    pub fn circuit(p: f64) -> NoiseParams {
        NoiseParams { p, model: NoiseModel::Circuit, r_e: 0.0, erasure_kind: ErasureKind::None, erasure_target: ErasureTarget::Both }
    }

    pub fn phenomenological(p: f64) -> NoiseParams {
        NoiseParams { model: NoiseModel::Phenomenological, ..NoiseParams::circuit(p) }
    }

    pub fn erasure(p: f64, r_e: f64, kind: ErasureKind) -> NoiseParams {
        NoiseParams { r_e, erasure_kind: kind, ..NoiseParams::circuit(p) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!("p = {} is not a probability", self.p)));
        }
        if !(0.0..=1.0).contains(&self.r_e) {
            return Err(Error::InvalidParameter(format!("r_e = {} is outside [0, 1]", self.r_e)));
        }
        if self.r_e > 0.0 && self.erasure_kind == ErasureKind::None {
            return Err(Error::InvalidParameter("r_e > 0 needs an erasure kind".into()));
        }
        if self.model == NoiseModel::Phenomenological && self.erasure_kind != ErasureKind::None {
            return Err(Error::InvalidParameter("erasures are defined for circuit noise only".into()));
        }
        Ok(())
    }

    /// Probability of a Pauli fault after each two-qubit gate.
    pub fn p_pauli(&self) -> f64 {
        self.p * (1.0 - self.r_e)
    }

    /// Probability of an erasure event at each two-qubit gate.
    pub fn p_erasure(&self) -> f64 {
        if self.erasure_kind == ErasureKind::None { 0.0 } else { self.p * self.r_e }
    }
}

/// Role of a qubit in the gate where it was erased.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateRole {
    Control,
    Target,
    Cz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SinglePauli {
    I,
    X,
    Y,
    Z,
}

impl SinglePauli {
    /// `(x, z)` components.
    pub fn bits(self) -> (bool, bool) {
        match self {
            SinglePauli::I => (false, false),
            SinglePauli::X => (true, false),
            SinglePauli::Y => (true, true),
            SinglePauli::Z => (false, true),
        }
    }
}

/// Twirled single-qubit channel applied after an erasure, always heralded.
#[derive(Clone, Debug, PartialEq)]
pub struct ErasureChannel {
    pub mixture: Vec<(SinglePauli, f64)>,
    pub heralded: bool,
}

pub fn erasure_channel(kind: ErasureKind, role: GateRole) -> Result<ErasureChannel> {
    use SinglePauli::*;
    let mixture = match (kind, role) {
        (ErasureKind::None, _) => return Err(Error::InvalidParameter("no erasure channel for kind `none`".into())),
        (ErasureKind::Conventional, _) => vec![(I, 0.25), (X, 0.25), (Y, 0.25), (Z, 0.25)],
        (ErasureKind::Biased, GateRole::Control | GateRole::Cz) => vec![(I, 0.5), (Z, 0.5)],
        (ErasureKind::Biased, GateRole::Target) => vec![(I, 0.5), (X, 0.5)],
    };
    Ok(ErasureChannel { mixture, heralded: true })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaultKind {
    /// Uniform draw from the 15 non-identity two-qubit Paulis.
    TwoQubitPauli { qubits: [usize; 2] },
    /// Heralded erasure; herald ids are `herald + side`.
    Erasure { qubits: [usize; 2], roles: [GateRole; 2], herald: u32 },
    /// Bit flip on a data qubit.
    DataX { qubit: usize },
    /// Classical flip of one measurement outcome.
    MeasFlip { meas: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultSite {
    /// Index of the operation after which the fault acts.
    pub op: usize,
    pub kind: FaultKind,
    pub probability: f64,
}

impl FaultSite {
    pub fn heralded(&self) -> bool {
        matches!(self.kind, FaultKind::Erasure { .. })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoisyCircuit {
    pub circuit: Circuit,
    pub params: NoiseParams,
    pub sites: Vec<FaultSite>,
    pub num_heralds: u32,
}

/// Attaches gate faults after every CNOT (including transversal ones).
pub fn apply_circuit_noise(circuit: &Circuit, params: NoiseParams) -> Result<NoisyCircuit> {
    params.validate()?;
    if params.model != NoiseModel::Circuit {
        return Err(Error::InvalidParameter("circuit noise needs model = circuit".into()));
    }
    let (pp, pe) = (params.p_pauli(), params.p_erasure());
    let mut sites = Vec::new();
    let mut gate = 0u32;
    for (i, op) in circuit.ops.iter().enumerate() {
        let Gate::Cnot(a, b) = op.gate else { continue };
        if pp > 0.0 {
            sites.push(FaultSite { op: i, kind: FaultKind::TwoQubitPauli { qubits: [a, b] }, probability: pp });
        }
        if pe > 0.0 {
            let kind = FaultKind::Erasure { qubits: [a, b], roles: [GateRole::Control, GateRole::Target], herald: 2 * gate };
            sites.push(FaultSite { op: i, kind, probability: pe });
        }
        gate += 1;
    }
    let num_heralds = if pe > 0.0 { 2 * gate } else { 0 };
    Ok(NoisyCircuit { circuit: circuit.clone(), params, sites, num_heralds })
}

/// Data bit flips at the start of each extraction round and flips of every
/// extraction-round check outcome.
pub fn apply_phenomenological_noise(circuit: &Circuit, params: NoiseParams) -> Result<NoisyCircuit> {
    params.validate()?;
    if params.model != NoiseModel::Phenomenological {
        return Err(Error::InvalidParameter("phenomenological noise needs model = phenomenological".into()));
    }
    let mut sites = Vec::new();
    if params.p > 0.0 {
        for (i, op) in circuit.ops.iter().enumerate() {
            if let (Gate::Idle(q), Stage::Extraction) = (&op.gate, op.stage) {
                sites.push(FaultSite { op: i, kind: FaultKind::DataX { qubit: *q }, probability: params.p });
            }
        }
        for (m, meas) in circuit.measurements.iter().enumerate() {
            if let MeasKind::Check(_) = meas.kind {
                sites.push(FaultSite { op: meas.op, kind: FaultKind::MeasFlip { meas: m }, probability: params.p });
            }
        }
    }
    Ok(NoisyCircuit { circuit: circuit.clone(), params, sites, num_heralds: 0 })
}

/// Dispatches on `params.model`.
pub fn apply_noise(circuit: &Circuit, params: NoiseParams) -> Result<NoisyCircuit> {
    match params.model {
        NoiseModel::Circuit => apply_circuit_noise(circuit, params),
        NoiseModel::Phenomenological => apply_phenomenological_noise(circuit, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_memory, Basis};
    use crate::lattice::build_rotated_code;

    fn mem() -> Circuit {
        build_memory(&build_rotated_code(3).unwrap(), 3, Basis::Both, 1).unwrap()
    }

    #[test]
    fn probabilities_split_by_erasure_fraction() {
        let p = NoiseParams::erasure(0.01, 0.3, ErasureKind::Biased);
        assert!((p.p_pauli() + p.p_erasure() - 0.01).abs() < 1e-15);
        let n = apply_circuit_noise(&mem(), p).unwrap();
        let cnots = n.circuit.num_cnots();
        assert_eq!(n.sites.len(), 2 * cnots);
        assert_eq!(n.num_heralds as usize, 2 * cnots);
    }

    #[test]
    fn zero_rate_has_no_sites() {
        assert!(apply_circuit_noise(&mem(), NoiseParams::circuit(0.0)).unwrap().sites.is_empty());
        assert!(apply_phenomenological_noise(&mem(), NoiseParams::phenomenological(0.0)).unwrap().sites.is_empty());
    }

    #[test]
    fn full_erasure_fraction_heralds_everything() {
        let n = apply_circuit_noise(&mem(), NoiseParams::erasure(0.02, 1.0, ErasureKind::Conventional)).unwrap();
        assert!(n.sites.iter().all(FaultSite::heralded));
    }

    #[test]
    fn model_mismatch_rejected() {
        assert!(apply_circuit_noise(&mem(), NoiseParams::phenomenological(0.01)).is_err());
        assert!(apply_phenomenological_noise(&mem(), NoiseParams::circuit(0.01)).is_err());
    }

    #[test]
    fn phenomenological_populations_match() {
        let n = apply_phenomenological_noise(&mem(), NoiseParams::phenomenological(0.01)).unwrap();
        let data = n.sites.iter().filter(|s| matches!(s.kind, FaultKind::DataX { .. })).count();
        let flips = n.sites.iter().filter(|s| matches!(s.kind, FaultKind::MeasFlip { .. })).count();
        // 9 data qubits and 8 checks per round
        assert_eq!(data, 9 * 3);
        assert_eq!(flips, 8 * 3);
    }

    #[test]
    fn channels() {
        use SinglePauli::*;
        let c = erasure_channel(ErasureKind::Biased, GateRole::Control).unwrap();
        assert_eq!(c.mixture, vec![(I, 0.5), (Z, 0.5)]);
        let t = erasure_channel(ErasureKind::Biased, GateRole::Target).unwrap();
        assert_eq!(t.mixture, vec![(I, 0.5), (X, 0.5)]);
        let u = erasure_channel(ErasureKind::Conventional, GateRole::Cz).unwrap();
        assert_eq!(u.mixture.len(), 4);
        for ch in [c, t, u] {
            assert!(ch.heralded);
            assert!((ch.mixture.iter().map(|m| m.1).sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert!(erasure_channel(ErasureKind::None, GateRole::Target).is_err());
    }
}
