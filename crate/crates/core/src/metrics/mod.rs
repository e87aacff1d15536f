//! Distances to the Gaussian attractor family, the A-operator spread and
//! outcome statistics.

mod born;
mod counterexample;
mod distance;
mod variance;

pub use born::{born_statistics, born_statistics_from_finals, collapse_threshold, BornStatistics, Region};
pub use counterexample::{counterexample_sequence, CounterexampleTerm, Spectrum};
pub use distance::{gaussian_distance, gaussian_width_distance, GaussianFit, GRADIENT_TOLERANCE};
pub use variance::{a_momentum_coefficient, operator_a_variance, AVariance};
