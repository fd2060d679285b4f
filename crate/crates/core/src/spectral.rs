//! Continuum-normalized Fourier transform between position and
//! spatial-frequency amplitudes.
//!
//! With `x_n = x0 + nΔx` and the centered frequency grid
//! `k_m = (m - N/2)Δk`, `Δk = 2π/(NΔx)`, the forward transform is
//!
//! ```text
//! φ(k_m) = (Δx/√(2π))^d Σ_n ψ(x_n) e^{-i k_m·x_n}
//! ```
//!
//! so that `Σ|φ|²(Δk)^d = Σ|ψ|²(Δx)^d` exactly. Per axis this is a plain DFT
//! of `(-1)^n ψ_n` followed by the phase `e^{-i k_m x0}`, which is how it is
//! evaluated here.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{QpseError, Result};
use crate::grid::{Axis, GridSpec, WaveFunction};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// Spatial-frequency amplitudes on the grid conjugate to a position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KAmplitude {
    pub kgrid: GridSpec,
    /// Origin of the position grid the amplitudes were computed from.
    pub position_origin: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl KAmplitude {
    /// The position grid this k-grid is conjugate to.
    pub fn position_grid(&self) -> GridSpec {
        let axes = self
            .kgrid
            .axes()
            .iter()
            .zip(&self.position_origin)
            .map(|(k, &origin)| Axis {
                points: k.points,
                origin,
                spacing: 2.0 * PI / (k.points as f64 * k.spacing),
            })
            .collect();
        GridSpec::new(axes).expect("conjugate of a valid k-grid is valid")
    }

    /// `Σ|φ|²(Δk)^d`.
    pub fn mass(&self) -> f64 {
        crate::grid::mass_of(&self.amplitudes, self.kgrid.cell_volume())
    }

    /// Probability weight at `|k| ≥ fraction · k_nyquist` on any axis.
    pub fn mass_beyond(&self, fraction: f64) -> f64 {
        let limits: Vec<f64> = self
            .kgrid
            .axes()
            .iter()
            .map(|a| fraction * (a.points as f64 / 2.0) * a.spacing)
            .collect();
        let mut sum = 0.0;
        self.kgrid.for_each_point(|flat, k| {
            if k.iter().zip(&limits).any(|(k, lim)| k.abs() >= *lim) {
                sum += self.amplitudes[flat].norm_sqr();
            }
        });
        sum * self.kgrid.cell_volume()
    }
}

/// Centered frequency axis conjugate to `axis`.
pub fn conjugate_axis(axis: &Axis) -> Axis {
    let n = axis.points as f64;
    let dk = 2.0 * PI / (n * axis.spacing);
    Axis {
        points: axis.points,
        origin: -(n / 2.0) * dk,
        spacing: dk,
    }
}

pub fn conjugate_grid(grid: &GridSpec) -> GridSpec {
    GridSpec::new(grid.axes().iter().map(conjugate_axis).collect())
        .expect("conjugate of a valid grid is valid")
}

/// Checks `N Δx Δk = 2π` (to a few ulps) and the centered k-origin.
pub fn is_conjugate_pair(x: &Axis, k: &Axis) -> bool {
    if x.points != k.points {
        return false;
    }
    let n = x.points as f64;
    let ulps = 8.0 * f64::EPSILON;
    let product_ok = ((n * x.spacing * k.spacing) / (2.0 * PI) - 1.0).abs() <= ulps;
    let origin_ok = ((k.origin / (-(n / 2.0) * k.spacing)) - 1.0).abs() <= ulps;
    product_ok && origin_ok
}

pub fn to_k_space(psi: &WaveFunction) -> Result<KAmplitude> {
    if psi
        .amplitudes
        .iter()
        .any(|a| !a.re.is_finite() || !a.im.is_finite())
    {
        return Err(QpseError::NonFinite(
            "wavefunction has non-finite amplitudes".into(),
        ));
    }
    let mut data = psi.amplitudes.clone();
    forward_in_place(&mut data, &psi.grid);
    Ok(KAmplitude {
        kgrid: conjugate_grid(&psi.grid),
        position_origin: psi.grid.axes().iter().map(|a| a.origin).collect(),
        amplitudes: data,
        time: psi.time,
    })
}

/// Inverse of [`to_k_space`] onto `grid`, which must be conjugate to `phi.kgrid`.
pub fn from_k_space(phi: &KAmplitude, grid: &GridSpec) -> Result<WaveFunction> {
    if grid.dim() != phi.kgrid.dim() {
        return Err(QpseError::GridMismatch(format!(
            "k-grid has dimension {}, target grid {}",
            phi.kgrid.dim(),
            grid.dim()
        )));
    }
    for (i, (x, k)) in grid.axes().iter().zip(phi.kgrid.axes()).enumerate() {
        if !is_conjugate_pair(x, k) {
            return Err(QpseError::GridMismatch(format!(
                "axis {i}: k-grid (N={}, Δk={}) is not conjugate to (N={}, Δx={})",
                k.points, k.spacing, x.points, x.spacing
            )));
        }
    }
    if phi
        .amplitudes
        .iter()
        .any(|a| !a.re.is_finite() || !a.im.is_finite())
    {
        return Err(QpseError::NonFinite("k-amplitudes are not finite".into()));
    }
    let mut data = phi.amplitudes.clone();
    inverse_in_place(&mut data, grid);
    Ok(WaveFunction {
        grid: grid.clone(),
        amplitudes: data,
        time: phi.time,
    })
}

/// Evaluates the band-limited transform `φ(k)` of a 1D state at an arbitrary `k`.
pub(crate) fn evaluate_1d(psi: &WaveFunction, k: f64) -> Complex64 {
    let axis = psi.grid.axis(0);
    let step = Complex64::from_polar(1.0, -k * axis.spacing);
    let mut phase = Complex64::from_polar(1.0, -k * axis.origin);
    let mut sum = Complex64::new(0.0, 0.0);
    for (n, a) in psi.amplitudes.iter().enumerate() {
        // Re-anchor the recurrence periodically to bound drift.
        if n % 64 == 0 {
            phase = Complex64::from_polar(1.0, -k * axis.coordinate(n));
        }
        sum += a * phase;
        phase *= step;
    }
    sum * (axis.spacing / (2.0 * PI).sqrt())
}

fn sign_factors(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect()
}

fn forward_phase_factors(axis: &Axis) -> Vec<Complex64> {
    let k = conjugate_axis(axis);
    let scale = axis.spacing / (2.0 * PI).sqrt();
    (0..axis.points)
        .map(|m| Complex64::from_polar(scale, -k.coordinate(m) * axis.origin))
        .collect()
}

pub(crate) fn forward_in_place(data: &mut [Complex64], grid: &GridSpec) {
    let shape = grid.shape();
    let signs: Vec<_> = shape.iter().map(|&n| sign_factors(n)).collect();
    apply_axis_factors(data, &shape, &signs);
    fft_all_axes(data, &shape, FftDirection::Forward);
    let phases: Vec<_> = grid.axes().iter().map(forward_phase_factors).collect();
    apply_axis_factors(data, &shape, &phases);
}

pub(crate) fn inverse_in_place(data: &mut [Complex64], grid: &GridSpec) {
    let shape = grid.shape();
    let phases: Vec<Vec<Complex64>> = grid
        .axes()
        .iter()
        .map(|a| {
            forward_phase_factors(a)
                .into_iter()
                .map(|f| f.inv())
                .collect()
        })
        .collect();
    apply_axis_factors(data, &shape, &phases);
    fft_all_axes(data, &shape, FftDirection::Inverse);
    let post: Vec<Vec<Complex64>> = shape
        .iter()
        .map(|&n| sign_factors(n).into_iter().map(|s| s / n as f64).collect())
        .collect();
    apply_axis_factors(data, &shape, &post);
}

/// Multiplies element `(i_0, .., i_{d-1})` by `Π_a factors[a][i_a]`.
fn apply_axis_factors(data: &mut [Complex64], shape: &[usize], factors: &[Vec<Complex64>]) {
    let last = *shape.last().unwrap();
    let last_factors = factors.last().unwrap();
    let outer_shape = &shape[..shape.len() - 1];
    data.par_chunks_mut(last)
        .enumerate()
        .for_each(|(row, chunk)| {
            let mut prefix = Complex64::new(1.0, 0.0);
            let mut rem = row;
            for (axis, &n) in outer_shape.iter().enumerate().rev() {
                prefix *= factors[axis][rem % n];
                rem /= n;
            }
            for (v, f) in chunk.iter_mut().zip(last_factors) {
                *v *= prefix * f;
            }
        });
}

const LINE_BATCH: usize = 16;

fn fft_all_axes(data: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    for axis in 0..shape.len() {
        let n = shape[axis];
        let fft = plan(n, direction);
        let stride: usize = shape[axis + 1..].iter().product();
        if stride == 1 {
            let lines_per_task = (4096 / n).max(1);
            data.par_chunks_mut(n * lines_per_task).for_each(|chunk| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(chunk, &mut scratch);
            });
        } else {
            data.par_chunks_mut(n * stride).for_each(|block| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
                let mut buf = vec![Complex64::new(0.0, 0.0); n * LINE_BATCH];
                let mut s0 = 0;
                while s0 < stride {
                    let batch = LINE_BATCH.min(stride - s0);
                    for i in 0..n {
                        let row = &block[i * stride + s0..i * stride + s0 + batch];
                        for (b, v) in row.iter().enumerate() {
                            buf[b * n + i] = *v;
                        }
                    }
                    fft.process_with_scratch(&mut buf[..batch * n], &mut scratch);
                    for i in 0..n {
                        let row = &mut block[i * stride + s0..i * stride + s0 + batch];
                        for (b, v) in row.iter_mut().enumerate() {
                            *v = buf[b * n + i];
                        }
                    }
                    s0 += batch;
                }
            });
        }
    }
}
