//! Phase-space entropy of quantum states on uniform grids.
//!
//! Wavefunctions are sampled on centered power-of-two grids, carried to
//! momentum space with a continuum-normalized FFT, and scored with the
//! position and momentum differential entropies (in nats, ħ = m = 1).

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod factory;
pub mod grid;
pub mod spectral;
pub mod spin;
pub mod spinor;
pub mod transform;

pub use dynamics::{
    entropy_series, evolve, EntropySeries, EvolutionSpec, Potential, SeriesRow, Snapshot,
};
pub use entropy::{
    bbm_bound, bbm_check, continuous_entropy, differential_entropy, joint_entropy_two_particle,
    product_entropy, EntropyReport,
};
pub use error::{QpseError, Result};
pub use factory::{
    make_spinor_packet, make_state, make_two_particle, EnergyBranch, SpinorPacketSpec, StateSpec,
};
pub use grid::{density, integrate, normalize, Axis, DensityField, GridSpec, WaveFunction};
pub use spectral::{conjugate_grid, from_k_space, to_k_space, KAmplitude};
pub use spin::{spin_entropy_entangled_pair, spin_entropy_single, SpinSpec, SpinValue};
pub use spinor::{apply_c, apply_cpt, apply_p, apply_t, spinor_entropy, GammaSet, SpinorField};
pub use transform::{
    apply_transform, dilate, lorentz_measure_check, translate, TransformKind, TransformSpec,
    Translation,
};
