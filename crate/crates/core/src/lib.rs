//! Surface-code simulation and matching decoders for transversal CNOT,
//! teleportation and lattice-surgery gadgets.

pub mod analysis;
pub mod circuit;
pub mod decoders;
pub mod error;
pub mod frames;
pub mod lattice;
pub mod matching;
pub mod noise;
pub mod sampler;

pub use analysis::{
    fit_threshold, jackknife_ci, lssa, run_experiment, CurvePoint, ExperimentConfig, ExperimentStats, Lssa, LssaKind,
    PreparedExperiment, ThresholdFit,
};
pub use circuit::{Basis, Block, Circuit, Experiment, LatticeSurgeryLayout};
pub use decoders::{DecodeOutcome, Decoder, DecoderKind};
pub use error::{Error, Result};
pub use frames::{define_detectors, partition_subgraphs, DetectorSet, Frame};
pub use lattice::{build_rotated_code, CodeLayout, Pauli};
pub use matching::{DecodingGraph, MatchResult};
pub use noise::{apply_noise, ErasureKind, ErasureTarget, NoiseModel, NoiseParams, NoisyCircuit};
pub use sampler::{build_dem, DetectionSample, DetectorErrorModel, FaultTable, Mechanism, Sampler};
