//! Spectral numerical laboratory for the spatially inhomogeneous Boltzmann
//! equation on the torus, for hard potentials and Maxwellian molecules, with
//! and without angular cutoff.

pub mod collision;
pub mod dynamics;
pub mod experiments;
pub mod functionals;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod num;

pub use collision::{q_direct, CollisionError, CollisionOpts, DirectOpts, SpectralKernelTable, TableParams};
pub use dynamics::{advect, collide_step, run, BkwSolution, RunOpts, SplitScheme, TimeStepper};
pub use experiments::{ExperimentConfig, ExperimentOutput, InitialCondition, Verdict};
pub use functionals::{DiagnosticsReport, EntropyReport, HydroFields};
pub use io::config::RunConfig;
pub use grid::{make_grids, DistributionField, TorusGrid, VelocityGrid};
pub use kernel::{AngularProfile, BumpPair, KernelSpec};
