//! Construction-A lattice Gaussian coding for the AWGN channel.
//!
//! The crate is organised bottom-up:
//!
//! - [`params`]: parameter quadruples `(n, k, p, a)`, volumes, VNR, primes and
//!   the parameter-selection rules for reliable and flat lattice ensembles.
//! - [`gf`]: linear algebra over `F_p`, random generator-matrix ensembles,
//!   rank laws, collision statistics and q-Pochhammer products.
//! - [`theta`]: Jacobi and coset theta series, flatness factors, error
//!   exponents, the Chernoff radial tail and ball volumes.
//! - [`bounds`]: the nearest-neighbour and flatness bound pipelines.
//! - [`lattice`]: exact closest-point decoding of construction-A lattices,
//!   point counting in balls and discrete lattice Gaussian tables.
//! - [`simulate`]: seeded, worker-count independent Monte Carlo and
//!   exhaustive verification of the averaging inequalities.

pub mod bounds;
pub mod error;
pub mod gf;
pub mod lattice;
pub mod numeric;
pub mod params;
pub mod simulate;
pub mod theta;

pub use error::{Error, Result};
pub use gf::{EnsembleSpec, GeneratorMatrix, XiStats};
pub use lattice::{ConstructionALattice, DiscreteGaussianTable};
pub use numeric::Truncated;
pub use params::{NoiseModel, ParameterQuadruple, ParameterSchedule, ScheduleEntry};
pub use simulate::{ErrorEstimate, TrialPlan};
pub use theta::ThetaValue;
