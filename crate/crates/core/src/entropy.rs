//! Phase-space entropy `S = S_r + S_k` of pure states.
//!
//! `S_r` and `S_k` are the differential entropies (in nats) of the position
//! density `|ψ|²` and the spatial-frequency density `|φ|²`. With ħ = 1 the
//! entropic uncertainty bound reads `S_r + S_k ≥ d(1 + ln π)`, saturated by
//! Gaussians.

use std::f64::consts::PI;

use crate::error::{QpseError, Result};
use crate::grid::{density, DensityField, WaveFunction, NORMALIZATION_TOLERANCE};
use crate::spectral::to_k_space;

/// Density values at or below this floor contribute exactly zero (`0 ln 0 = 0`).
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Slack on the uncertainty margin attributed to quadrature truncation.
pub const BBM_SLACK: f64 = 1e-6;

/// `d (1 + ln π)`, the minimum of `S_r + S_k` in `d` dimensions.
pub fn bbm_bound(dim: usize) -> f64 {
    dim as f64 * (1.0 + PI.ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub s_r: f64,
    pub s_k: f64,
    pub s_spin: f64,
    pub s_total: f64,
    pub norm_residual_r: f64,
    pub norm_residual_k: f64,
    pub bbm_margin: f64,
    pub dim: usize,
}

impl EntropyReport {
    fn from_parts(s_r: f64, s_k: f64, residual_r: f64, residual_k: f64, dim: usize) -> Self {
        EntropyReport {
            s_r,
            s_k,
            s_spin: 0.0,
            s_total: s_r + s_k,
            norm_residual_r: residual_r,
            norm_residual_k: residual_k,
            bbm_margin: s_r + s_k - bbm_bound(dim),
            dim,
        }
    }

    /// Same report with a spin-entropy term added to the total.
    pub fn with_spin(self, s_spin: f64) -> Self {
        EntropyReport {
            s_spin,
            s_total: self.s_r + self.s_k + s_spin,
            ..self
        }
    }

    pub fn satisfies_bbm(&self) -> bool {
        self.bbm_margin >= -BBM_SLACK
    }
}

/// `-Σ ρ ln ρ ΔV` for a normalized density.
pub fn differential_entropy(rho: &DensityField) -> Result<f64> {
    let residual = (rho.total() - 1.0).abs();
    if !(residual <= NORMALIZATION_TOLERANCE) {
        return Err(QpseError::NotNormalized {
            residual,
            tolerance: NORMALIZATION_TOLERANCE,
        });
    }
    Ok(entropy_sum(&rho.values) * rho.cell_volume)
}

pub(crate) fn entropy_sum(values: &[f64]) -> f64 {
    -values
        .iter()
        .filter(|&&v| v > DENSITY_FLOOR)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// Position and spatial-frequency entropies of a normalized state.
pub fn continuous_entropy(psi: &WaveFunction) -> Result<EntropyReport> {
    let rho_r = density(psi)?;
    let s_r = differential_entropy(&rho_r)?;
    let phi = to_k_space(psi)?;
    let rho_k = DensityField {
        values: phi.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        cell_volume: phi.kgrid.cell_volume(),
        grid: phi.kgrid,
    };
    let s_k = differential_entropy(&rho_k)?;
    Ok(EntropyReport::from_parts(
        s_r,
        s_k,
        (rho_r.total() - 1.0).abs(),
        (rho_k.total() - 1.0).abs(),
        psi.grid.dim(),
    ))
}

/// Joint entropy of two particles in one dimension each, stored as a 2D state
/// with axis 0 = particle 1 and axis 1 = particle 2.
pub fn joint_entropy_two_particle(psi2: &WaveFunction) -> Result<EntropyReport> {
    if psi2.grid.dim() != 2 {
        return Err(QpseError::InvalidParameter(format!(
            "two-particle state must live on a 2D grid, got dimension {}",
            psi2.grid.dim()
        )));
    }
    continuous_entropy(psi2)
}

/// Entropy of a product state `Π ψ_i(x_i)` from its factors.
///
/// For product densities both marginal entropies are additive, so this is
/// exact and avoids building the full tensor-product grid.
pub fn product_entropy(factors: &[WaveFunction]) -> Result<EntropyReport> {
    if factors.is_empty() {
        return Err(QpseError::InvalidParameter("no factors given".into()));
    }
    let mut total = EntropyReport::from_parts(0.0, 0.0, 0.0, 0.0, 0);
    for psi in factors {
        let r = continuous_entropy(psi)?;
        total.s_r += r.s_r;
        total.s_k += r.s_k;
        total.norm_residual_r = total.norm_residual_r.max(r.norm_residual_r);
        total.norm_residual_k = total.norm_residual_k.max(r.norm_residual_k);
        total.dim += r.dim;
    }
    Ok(EntropyReport::from_parts(
        total.s_r,
        total.s_k,
        total.norm_residual_r,
        total.norm_residual_k,
        total.dim,
    ))
}

/// `S_r + S_k - d(1 + ln π)`; a value `≥ -BBM_SLACK` passes.
pub fn bbm_check(report: &EntropyReport, dim: usize) -> f64 {
    report.s_r + report.s_k - bbm_bound(dim)
}
