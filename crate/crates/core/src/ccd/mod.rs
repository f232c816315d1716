//! CCD response and event reconstruction: Gaussian energy smearing,
//! synthetic read-out frames with noise and charged-particle tracks, and the
//! cluster finding and classification that reject non-X-ray patterns.

mod cluster;
mod corpus;
mod frame;
mod resolution;

pub use cluster::{calibrate, classify_cluster, find_clusters, Cluster, ClusterClass, ClusterPixel, ClusterThresholds};
pub use corpus::{corpus_frame, reconstruct_energies, run_corpus, CorpusSpec, CorpusStats};
pub use frame::{
    synthesize_frame, EnergyCalibration, Frame, FrameSynthesis, Hit, SyntheticFrame, DEFAULT_EXPOSURE_MIN,
    DEFAULT_FRAME_SIZE,
};
pub use resolution::{smear_energy, ResolutionModel, ResolutionScaling};
