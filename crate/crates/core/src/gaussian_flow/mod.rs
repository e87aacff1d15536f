//! Reduced dynamics on the Gaussian manifold and the long-time laws of
//! collapsed trajectories.

mod asymptotic;
mod flow;
mod riccati;
mod trajectory;

pub use asymptotic::{
    asymptotic_paths, asymptotic_x_variance, fit_long_time, AsymptoticLaw, LongTimeFit, MIN_FIT_SPAN,
};
pub use flow::{mean_flow_det, mean_flow_stoch};
pub use riccati::{riccati_decay_rate, riccati_rhs, riccati_solve, riccati_step, uniform_times};
pub use trajectory::{gaussian_trajectory, GaussianScheme};
