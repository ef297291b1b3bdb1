//! Fidelity of stabilizer states (cluster states and planar surface codes)
//! under random local X/Z fields, by exact state-vector integration of the
//! time-dependent Schrödinger equation on small registers.
//!
//! Units: energies and field amplitudes in units of the gap `delta`, times
//! in `hbar / delta`, with `hbar = 1`.

pub mod analysis;
pub mod code;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod noise;
pub mod oracle;
pub mod output;
pub mod pauli;
pub mod state;

pub use analysis::{
    defect_sweep, delta_sweep, delta_sweep_windows, fit_nmax, run_ensemble, threshold_delta, time_average,
    DefectPoint, LinearFit, MaskPolicy, SweepPoint, Threshold, Window,
};
pub use code::{builtin, cluster_stabilizers, surface_stabilizers, ModelSpec, QubitGraph, StabilizerModel, SurfaceLayout};
pub use error::{Error, Result};
pub use evolution::{evolve_trace, rk4_step, EvolutionConfig, Evolver, FidelityTrace};
pub use noise::{sample_fields, DefectMask, FieldSample, NoiseParams};
pub use pauli::{OperatorSum, Pauli, PauliString};
pub use state::StateVector;
