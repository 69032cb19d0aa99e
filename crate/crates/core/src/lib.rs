//! Dissipative dynamics of two cavity-field qubits, each damped by its own
//! thermal reservoir, with logarithmic negativity and concurrence along
//! the trajectory and detection of entanglement sudden death.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod qstate;
pub mod sampling;
pub mod verify;

pub use analysis::{
    esd_sweep, esd_time, esd_time_general, esd_vs_amplitude, esd_vs_nbar, measure_comparison, EsdMeasure, EsdReport,
    MeasureComparison, NcOrdering, SweepCase, SweepRow,
};
pub use dynamics::{
    evolve_analytic, evolve_rk4, evolve_rk4_substeps, lindblad_rhs, steady_state, trajectory_analytic,
    AnalyticPropagator, Method, Propagator, ReservoirParams, Rk4Propagator, Sample, SymmetricParams, TimeGrid,
    Trajectory,
};
pub use error::{Error, Result};
pub use linalg::{general_eigenvalues, hermitian_eigenvalues, Mat4, Spectrum};
pub use measures::{
    concurrence, concurrence_x, initial_measures, log_negativity, log_negativity_x, measure_pair, relation_noon_vacuum,
    relation_phi, EprFamily, MeasurePair,
};
pub use qstate::{density_from_pure, partial_transpose_b, pure_state, ComplexScalar, DensityMatrix, PureState};
