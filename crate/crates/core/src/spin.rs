//! Spin-entropy terms.
//!
//! A definite-`m` spin state has a uniform azimuthal density `1/2π`, giving
//! `2s ln 2π` for `s ∈ {0, 1/2}`. Entangled fermion pairs add the mixing
//! entropy of the two product branches.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{QpseError, Result};

/// Default number of azimuthal cells; smooth trigonometric densities are
/// converged below 1e-9 here.
pub const AZIMUTHAL_CELLS: usize = 1 << 12;

/// `ln 2π`: the s = 1/2 spin entropy.
pub fn ln_two_pi() -> f64 {
    (2.0 * PI).ln()
}

/// Massless spin-1 (two helicities) carries the same entropy as s = 1/2.
pub fn massless_spin_one_entropy() -> f64 {
    ln_two_pi()
}

/// Entropy left in the partner after one particle of an entangled pair is measured.
pub fn collapse_remainder() -> f64 {
    ln_two_pi()
}

/// A spin quantum number `s = twice / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinValue {
    twice: u32,
}

impl SpinValue {
    pub const ZERO: SpinValue = SpinValue { twice: 0 };
    pub const HALF: SpinValue = SpinValue { twice: 1 };

    pub fn from_twice(twice: u32) -> Self {
        SpinValue { twice }
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn as_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl fmt::Display for SpinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for SpinValue {
    type Err = QpseError;

    /// Accepts `"0"`, `"1/2"`, `"1"`, `"3/2"`, ... and exact decimals like `"0.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || QpseError::InvalidParameter(format!("not a spin value: {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "1" => Ok(SpinValue::from_twice(2 * num)),
                "2" => Ok(SpinValue::from_twice(num)),
                _ => Err(bad()),
            };
        }
        let value: f64 = s.parse().map_err(|_| bad())?;
        let twice = 2.0 * value;
        if value < 0.0 || twice.fract() != 0.0 || twice > u32::MAX as f64 {
            return Err(bad());
        }
        Ok(SpinValue::from_twice(twice as u32))
    }
}

/// `2s ln 2π` for s = 0 or 1/2.
pub fn spin_entropy_single(s: SpinValue) -> Result<f64> {
    match s.twice {
        0 => Ok(0.0),
        1 => Ok(ln_two_pi()),
        _ => Err(QpseError::UnsupportedSpin(s.to_string())),
    }
}

fn x_ln_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Entropy of the entangled pair `cos θ |+-⟩ - sin θ |-+⟩`:
/// `2 ln 2π - (cos²θ ln cos²θ + sin²θ ln sin²θ)`.
pub fn spin_entropy_entangled_pair(theta_alpha: f64) -> f64 {
    let (s, c) = theta_alpha.sin_cos();
    2.0 * ln_two_pi() - (x_ln_x(c * c) + x_ln_x(s * s))
}

/// Reduces an angle into `[0, π/2]` without changing `cos²θ`.
pub fn canonical_theta(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t > FRAC_PI_2 {
        PI - t
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinSpec {
    Single(SpinValue),
    /// Two s = 1/2 particles; `theta_alpha` is kept in `[0, π/2]`.
    EntangledPair {
        theta_alpha: f64,
    },
}

impl SpinSpec {
    pub fn entangled_pair(theta_alpha: f64) -> Self {
        SpinSpec::EntangledPair {
            theta_alpha: canonical_theta(theta_alpha),
        }
    }

    pub fn entropy(&self) -> Result<f64> {
        match *self {
            SpinSpec::Single(s) => spin_entropy_single(s),
            SpinSpec::EntangledPair { theta_alpha } => Ok(spin_entropy_entangled_pair(theta_alpha)),
        }
    }
}

/// Entropy of `ρ(φ) = |Σ_m α_m e^{i(s+m)φ}|² / 2π` for s = 1/2, with
/// `alphas[0]` the m = -1/2 and `alphas[1]` the m = +1/2 coefficient.
pub fn azimuthal_density_entropy(alphas: &[Complex64; 2]) -> Result<f64> {
    azimuthal_density_entropy_with(alphas, AZIMUTHAL_CELLS)
}

pub fn azimuthal_density_entropy_with(alphas: &[Complex64; 2], cells: usize) -> Result<f64> {
    let mass: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
    let residual = (mass - 1.0).abs();
    if !(residual <= 1e-10) {
        return Err(QpseError::NotNormalized {
            residual,
            tolerance: 1e-10,
        });
    }
    if cells == 0 {
        return Err(QpseError::InvalidParameter(
            "need at least one azimuthal cell".into(),
        ));
    }
    let dphi = 2.0 * PI / cells as f64;
    let sum: f64 = (0..cells)
        .map(|j| {
            let phi = j as f64 * dphi;
            let amp = alphas[0] + alphas[1] * Complex64::from_polar(1.0, phi);
            let rho = amp.norm_sqr() / (2.0 * PI);
            -x_ln_x(rho)
        })
        .sum();
    Ok(sum * dphi)
}
