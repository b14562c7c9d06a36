//! Exact coefficients and saddle-point asymptotics of mixed powers of
//! generating functions, `[z^{n_0}] prod_j f_j(z)^{n_j}`.
//!
//! The exact side ([`exact_series`]) works in rational arithmetic with
//! arbitrary-precision logarithms. The asymptotic side locates the critical
//! point of a direction ([`critical_locus`]), expands the phase term
//! ([`phase_term`]) and evaluates the oscillatory integral representation
//! ([`saddle_engine`]). [`applications`] holds two canned pipelines and the
//! map-Airy density, and [`sweep`] runs regression sweeps.

pub mod applications;
pub mod critical_locus;
pub mod error;
pub mod exact_series;
pub mod function_system;
pub mod phase_term;
pub mod precision;
pub mod quadrature;
pub mod saddle_engine;
pub mod sweep;

pub use critical_locus::{solve_critical, verify_strict_minimality, CriticalPoint, MinimalityCertificate};
pub use error::{Error, Hypothesis, Result};
pub use exact_series::{coeff_of_product, BigCoefficient, RationalPoly};
pub use function_system::{
    exact_coefficient, AnalyticFactor, Direction, ExponentVector, Factor, FunctionSystem, NormSpec,
    SystemDescriptor,
};
pub use phase_term::{taylor_F, PhaseExpansion};
pub use precision::{HighPrecisionReal, Precision};
pub use saddle_engine::{AsymptoticEstimate, Diagnostics, Method, MethodChoice, Regime};
pub use sweep::{SweepReport, SweepSpec, Tolerance};
