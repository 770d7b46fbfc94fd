//! Planar toy models of death-birth bifurcations.
//!
//! Two built-in families, `degenerate` (`x^2 + lambda y^2 + y^3`) and `generic`
//! (`x^2 + lambda y + y^3`), plus user families of the same separable
//! shape. Critical points come in closed form; flows are integrated with
//! RK4 and step halving, and decay or scaling laws are read off
//! least-squares fits.

mod csvout;
mod error;
mod family;
mod fit;
mod integrate;
mod scan;

pub use csvout::{write_fits, write_scan, write_trace};
pub use error::{SimError, SimResult};
pub use family::{Affine, PlanarFamily};
pub use fit::{
    classify_decay, exponential_fit, line_fit, power_fit, DecayFit, DecayKind, LineFit, LINEARITY_THRESHOLD,
};
pub use integrate::{
    energy_check, integrate, integrate_and_fit, sample_times, EnergyCheck, FitReport, FlowTrace, IntegrateOptions,
    Sample,
};
pub use scan::{
    critical_points, critical_scan, geometric_grid, merge_parameters, quadratic_roots, CriticalPoint, CriticalScan,
    ScanRow,
};
