//! Numerical toolkit for the semirelativistic kinetic operator
//! `T = √(1 − Δ) − 1` on periodic grids.

mod bessel;
mod commutator;
mod cutoff;
mod decay;
mod eigen;
mod grid;
mod kernel;
mod zhislin;

pub use bessel::{bessel_k01, bessel_k2};
pub use commutator::{
    commutator_norm, fourier_bound, ims_error, power_iteration, CommutatorEstimate, ImsError, POWER_ITERATIONS,
    SHELL_POINTS, STAGNATION_TOL,
};
pub use cutoff::{profile, smooth_step, CutoffFunction, PartitionOfUnity, INNER, OUTER};
pub use decay::{decay_rate, linear_fit, DecayFit, LinearFit, MIN_R2, UNDERFLOW};
pub use eigen::{ground_state, ground_state_with, smoothed_coulomb, Eigenpairs, LanczosOptions, RESIDUAL_TOL};
pub use grid::{apply_t, apply_t_real, symbol, SpectralGrid};
pub use kernel::{
    compare_forms, diagonal_bump_pair, fourier_form, kernel_decay, kernel_form, polynomial_bump, KernelComparison,
    KernelDecay,
};
pub use zhislin::{
    shell_profile, trial_family, zhislin_trial_bound, NuclearPotential, TrialFamily, TrialValue, ZhislinReport,
    SHELL_INNER, SHELL_OUTER,
};
