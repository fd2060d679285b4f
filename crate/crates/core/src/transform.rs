//! Phase-space transformations and their effect on the entropy.
//!
//! Translations in x and k, dilations (the linear point transformation
//! `x ↦ a x`), parity, complex conjugation, and the Lorentz-invariant
//! momentum measure `dk/ω_k`.

use num_complex::Complex64;

use crate::entropy::{continuous_entropy, EntropyReport};
use crate::error::{QpseError, Result};
use crate::factory::NYQUIST_GUARD;
use crate::grid::{normalize, reflected_indices, Axis, GridSpec, WaveFunction, EDGE_MASS_LIMIT};
use crate::spectral::{conjugate_axis, evaluate_1d, from_k_space, to_k_space, KAmplitude};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    TranslateX,
    TranslateK,
    Dilate,
    Parity,
    Conjugate,
    LorentzBoostK,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::TranslateX => "translate_x",
            TransformKind::TranslateK => "translate_k",
            TransformKind::Dilate => "dilate",
            TransformKind::Parity => "parity",
            TransformKind::Conjugate => "conjugate",
            TransformKind::LorentzBoostK => "lorentz_boost_k",
        }
    }
}

/// `amount` is the shift x0, boost k0, dilation factor a, or rapidity η,
/// depending on `kind`; it is ignored for parity and conjugation. `mass` is
/// used only by the Lorentz check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSpec {
    pub kind: TransformKind,
    pub amount: f64,
    pub mass: f64,
}

impl TransformSpec {
    pub fn new(kind: TransformKind, amount: f64) -> Self {
        TransformSpec {
            kind,
            amount,
            mass: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amount.is_finite() {
            return Err(QpseError::InvalidParameter(
                "transform amount must be finite".into(),
            ));
        }
        match self.kind {
            TransformKind::Dilate if !(self.amount > 0.0) => Err(QpseError::InvalidParameter(
                format!("dilation factor must be positive, got {}", self.amount),
            )),
            TransformKind::LorentzBoostK if !(self.mass > 0.0) => Err(QpseError::InvalidParameter(
                format!("mass must be positive, got {}", self.mass),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Translation {
    Position,
    Momentum,
}

/// Translates by `amount` along every axis.
pub fn translate(psi: &WaveFunction, kind: Translation, amount: f64) -> Result<WaveFunction> {
    let shifts = vec![amount; psi.grid.dim()];
    match kind {
        Translation::Position => translate_x(psi, &shifts),
        Translation::Momentum => translate_k(psi, &shifts),
    }
}

/// `ψ(x) ↦ ψ(x - x0)`. Whole-grid-step shifts are exact array rotations;
/// other shifts multiply `φ(k)` by `e^{-i k·x0}`.
pub fn translate_x(psi: &WaveFunction, shifts: &[f64]) -> Result<WaveFunction> {
    check_per_axis(psi, shifts)?;
    let steps: Vec<f64> = shifts
        .iter()
        .zip(psi.grid.axes())
        .map(|(s, a)| s / a.spacing)
        .collect();
    let whole = steps.iter().all(|s| (s - s.round()).abs() < 1e-9);
    if whole {
        let shape = psi.grid.shape();
        let offsets: Vec<usize> = steps
            .iter()
            .zip(&shape)
            .map(|(s, &n)| (s.round() as i64).rem_euclid(n as i64) as usize)
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); psi.amplitudes.len()];
        let mut idx = vec![0usize; shape.len()];
        for (flat, a) in psi.amplitudes.iter().enumerate() {
            psi.grid.unflatten(flat, &mut idx);
            let target = idx
                .iter()
                .zip(&offsets)
                .zip(&shape)
                .fold(0, |acc, ((&i, &o), &n)| acc * n + (i + o) % n);
            out[target] = *a;
        }
        return Ok(WaveFunction {
            grid: psi.grid.clone(),
            amplitudes: out,
            time: psi.time,
        });
    }
    let mut phi = to_k_space(psi)?;
    let kgrid = phi.kgrid.clone();
    kgrid.for_each_point(|i, k| {
        let phase: f64 = k.iter().zip(shifts).map(|(k, s)| -k * s).sum();
        phi.amplitudes[i] *= Complex64::from_polar(1.0, phase);
    });
    normalize(&from_k_space(&phi, &psi.grid)?)
}

/// `ψ(x) ↦ e^{i k0·x} ψ(x)`.
pub fn translate_k(psi: &WaveFunction, boosts: &[f64]) -> Result<WaveFunction> {
    check_per_axis(psi, boosts)?;
    let mut out = psi.clone();
    psi.grid.for_each_point(|i, x| {
        let phase: f64 = x.iter().zip(boosts).map(|(x, k)| x * k).sum();
        out.amplitudes[i] *= Complex64::from_polar(1.0, phase);
    });
    let aliased = to_k_space(&out)?.mass_beyond(NYQUIST_GUARD);
    if !(aliased <= EDGE_MASS_LIMIT) {
        return Err(QpseError::AliasedMomentum(format!(
            "boost leaves k-space mass {aliased:e} within 10% of the Nyquist edge"
        )));
    }
    normalize(&out)
}

fn check_per_axis(psi: &WaveFunction, values: &[f64]) -> Result<()> {
    if values.len() != psi.grid.dim() {
        return Err(QpseError::InvalidParameter(format!(
            "expected {} per-axis values, got {}",
            psi.grid.dim(),
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(QpseError::NonFinite("translation amount".into()));
    }
    Ok(())
}

/// `ψ'(x') = a^{-d/2} ψ(x'/a)` sampled on the grid scaled by `a`: exact, no
/// interpolation.
pub fn dilate(psi: &WaveFunction, a: f64) -> Result<WaveFunction> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(QpseError::InvalidParameter(format!(
            "dilation factor must be positive, got {a}"
        )));
    }
    let axes = psi
        .grid
        .axes()
        .iter()
        .map(|ax| Axis {
            points: ax.points,
            origin: ax.origin * a,
            spacing: ax.spacing * a,
        })
        .collect();
    let grid = GridSpec::new(axes)?;
    let scale = a.powf(-(psi.grid.dim() as f64) / 2.0);
    Ok(WaveFunction {
        grid,
        amplitudes: psi.amplitudes.iter().map(|z| z * scale).collect(),
        time: psi.time,
    })
}

/// `ψ(x) ↦ ψ(-x)` (reflection about the grid center on every axis).
pub fn parity(psi: &WaveFunction) -> WaveFunction {
    let src = reflected_indices(&psi.grid);
    WaveFunction {
        grid: psi.grid.clone(),
        amplitudes: src.iter().map(|&j| psi.amplitudes[j]).collect(),
        time: psi.time,
    }
}

/// `ψ ↦ ψ*`.
pub fn conjugate(psi: &WaveFunction) -> WaveFunction {
    WaveFunction {
        grid: psi.grid.clone(),
        amplitudes: psi.amplitudes.iter().map(|z| z.conj()).collect(),
        time: psi.time,
    }
}

/// Relativistic frequency `ω_k = √(k² + m²)` (ħ = c = 1).
pub fn omega(k: f64, mass: f64) -> f64 {
    k.hypot(mass)
}

/// `k' = k cosh η - ω_k sinh η`.
pub fn boost_momentum(k: f64, rapidity: f64, mass: f64) -> f64 {
    k * rapidity.cosh() - omega(k, mass) * rapidity.sinh()
}

/// Integrals entering the Lorentz measure check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzMeasure {
    /// `∫ |φ(k)|² dk/ω_k` in the original frame.
    pub rest_integral: f64,
    /// Same scalar integrand carried to the boosted frame, `∫ f'(k') dk'/ω_{k'}`.
    pub boosted_integral: f64,
    /// `∫ |φ'(k')|² dk'` with `φ'(k') = √(ω_k/ω_{k'}) φ(k)`.
    pub boosted_probability: f64,
}

impl LorentzMeasure {
    pub fn residual(&self) -> f64 {
        (self.rest_integral - self.boosted_integral).abs()
    }
}

/// Evaluates both frames of the Lorentz measure check for a 1D k-amplitude.
///
/// The boosted-frame integrals are computed on their own uniform `k'` grid:
/// each node is pulled back to `k = k' cosh η + ω_{k'} sinh η` and `φ(k)` is
/// evaluated there by band-limited interpolation.
pub fn lorentz_boost_k(phi: &KAmplitude, rapidity: f64, mass: f64) -> Result<LorentzMeasure> {
    if phi.kgrid.dim() != 1 {
        return Err(QpseError::InvalidParameter(
            "the Lorentz check takes a 1D k-amplitude".into(),
        ));
    }
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(QpseError::InvalidParameter(format!(
            "mass must be positive, got {mass}"
        )));
    }
    if !rapidity.is_finite()
        || phi
            .amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
    {
        return Err(QpseError::NonFinite("Lorentz check input".into()));
    }
    let kaxis = *phi.kgrid.axis(0);
    let dk = kaxis.spacing;
    let density: Vec<f64> = phi.amplitudes.iter().map(|a| a.norm_sqr()).collect();

    let rest_integral = (0..kaxis.points)
        .map(|m| density[m] / omega(kaxis.coordinate(m), mass))
        .sum::<f64>()
        * dk;

    if rapidity == 0.0 {
        return Ok(LorentzMeasure {
            rest_integral,
            boosted_integral: rest_integral,
            boosted_probability: density.iter().sum::<f64>() * dk,
        });
    }

    // Center the boosted grid on the image of the mean momentum, snapped to Δk.
    let total: f64 = density.iter().sum();
    let mean_k = (0..kaxis.points)
        .map(|m| kaxis.coordinate(m) * density[m])
        .sum::<f64>()
        / total;
    let shift = (boost_momentum(mean_k, rapidity, mass) / dk).round() * dk;
    let boosted_axis = Axis {
        origin: kaxis.origin + shift,
        ..kaxis
    };

    let psi = from_k_space(phi, &phi.position_grid())?;
    let k_lo = kaxis.origin;
    let k_hi = kaxis.coordinate(kaxis.points - 1);
    let (mut integral, mut probability) = (0.0, 0.0);
    for j in 0..boosted_axis.points {
        let kp = boosted_axis.coordinate(j);
        let w_p = omega(kp, mass);
        let k = kp * rapidity.cosh() + w_p * rapidity.sinh();
        if k < k_lo || k > k_hi {
            continue;
        }
        let f = evaluate_1d(&psi, k).norm_sqr();
        integral += f / w_p;
        probability += omega(k, mass) / w_p * f;
    }
    Ok(LorentzMeasure {
        rest_integral,
        boosted_integral: integral * dk,
        boosted_probability: probability * dk,
    })
}

/// `|I - I'|` for the invariant measure `dk/ω_k`.
pub fn lorentz_measure_check(phi: &KAmplitude, rapidity: f64, mass: f64) -> Result<f64> {
    Ok(lorentz_boost_k(phi, rapidity, mass)?.residual())
}

/// Outcome of applying one transformation to a state.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformOutcome {
    State {
        before: EntropyReport,
        after: EntropyReport,
        state: WaveFunction,
    },
    Lorentz(LorentzMeasure),
}

impl TransformOutcome {
    pub fn deltas(&self) -> Option<(f64, f64, f64)> {
        match self {
            TransformOutcome::State { before, after, .. } => Some((
                after.s_r - before.s_r,
                after.s_k - before.s_k,
                after.s_total - before.s_total,
            )),
            TransformOutcome::Lorentz(_) => None,
        }
    }
}

/// Applies `spec` to a normalized state and reports the entropy change.
pub fn apply_transform(psi: &WaveFunction, spec: &TransformSpec) -> Result<TransformOutcome> {
    spec.validate()?;
    let before = continuous_entropy(psi)?;
    let state = match spec.kind {
        TransformKind::TranslateX => translate(psi, Translation::Position, spec.amount)?,
        TransformKind::TranslateK => translate(psi, Translation::Momentum, spec.amount)?,
        TransformKind::Dilate => dilate(psi, spec.amount)?,
        TransformKind::Parity => parity(psi),
        TransformKind::Conjugate => conjugate(psi),
        TransformKind::LorentzBoostK => {
            let phi = to_k_space(psi)?;
            return Ok(TransformOutcome::Lorentz(lorentz_boost_k(
                &phi,
                spec.amount,
                spec.mass,
            )?));
        }
    };
    let after = continuous_entropy(&state)?;
    Ok(TransformOutcome::State {
        before,
        after,
        state,
    })
}

/// Conjugate k-axis of a position axis; re-exported for callers sizing boosts.
pub fn nyquist(axis: &Axis) -> f64 {
    let k = conjugate_axis(axis);
    (k.points as f64 / 2.0) * k.spacing
}
