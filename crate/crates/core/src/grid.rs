//! Uniform grids, sampled wavefunctions and probability densities.
//!
//! Arrays are stored row-major: the last axis varies fastest. All quadrature
//! is the Riemann sum `Σ f · ΔV` with `ΔV = Π Δx_i`, which is the rule that
//! makes the discrete Parseval identity in [`crate::spectral`] exact.

use num_complex::Complex64;

use crate::error::{QpseError, Result};

/// Mass below which a state is treated as identically zero.
pub const ZERO_NORM_FLOOR: f64 = 1e-250;

/// Tolerance on `Σρ ΔV - 1` accepted by operations that require a normalized input.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-8;

/// Edge mass above which a sampled state is considered clipped by the box.
pub const EDGE_MASS_LIMIT: f64 = 1e-12;

/// One axis of a uniform grid: `x_n = origin + n * spacing`, `n = 0..points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub points: usize,
    pub origin: f64,
    pub spacing: f64,
}

impl Axis {
    /// Axis of `points` cells covering `[-extent/2, extent/2)`.
    pub fn centered(points: usize, extent: f64) -> Self {
        let spacing = extent / points as f64;
        Axis {
            points,
            origin: -(points as f64 / 2.0) * spacing,
            spacing,
        }
    }

    pub fn extent(&self) -> f64 {
        self.points as f64 * self.spacing
    }

    #[inline]
    pub fn coordinate(&self, n: usize) -> f64 {
        self.origin + n as f64 * self.spacing
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|n| self.coordinate(n)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.points < 8 || !self.points.is_power_of_two() {
            return Err(QpseError::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {}",
                self.points
            )));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(QpseError::InvalidGrid(format!(
                "spacing must be positive and finite, got {}",
                self.spacing
            )));
        }
        if !self.origin.is_finite() || !self.extent().is_finite() {
            return Err(QpseError::InvalidGrid(
                "origin and extent must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// A uniform grid in 1, 2 or 3 dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(QpseError::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {}",
                axes.len()
            )));
        }
        for axis in &axes {
            axis.validate()?;
        }
        Ok(GridSpec { axes })
    }

    /// `dim` identical centered axes of `points` cells over `[-extent/2, extent/2)`.
    pub fn centered(dim: usize, points: usize, extent: f64) -> Result<Self> {
        GridSpec::new(vec![Axis::centered(points, extent); dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing).product()
    }

    /// Multi-index of the flat row-major index `flat`.
    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            *slot = flat % axis.points;
            flat /= axis.points;
        }
    }

    /// Calls `f(flat_index, coordinates)` for every cell in storage order.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[f64])) {
        let dim = self.dim();
        let mut index = vec![0usize; dim];
        let mut coords: Vec<f64> = self.axes.iter().map(|a| a.origin).collect();
        for flat in 0..self.len() {
            f(flat, &coords);
            for d in (0..dim).rev() {
                index[d] += 1;
                if index[d] < self.axes[d].points {
                    coords[d] = self.axes[d].coordinate(index[d]);
                    break;
                }
                index[d] = 0;
                coords[d] = self.axes[d].origin;
            }
        }
    }

    /// True if the cell lies in the outermost layer along any axis.
    fn is_edge(&self, flat: usize, scratch: &mut [usize]) -> bool {
        self.unflatten(flat, scratch);
        scratch
            .iter()
            .zip(&self.axes)
            .any(|(&i, a)| i == 0 || i + 1 == a.points)
    }
}

/// Complex amplitudes sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub grid: GridSpec,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl WaveFunction {
    pub fn new(grid: GridSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(QpseError::InvalidParameter(format!(
                "expected {} amplitudes, got {}",
                grid.len(),
                amplitudes.len()
            )));
        }
        Ok(WaveFunction {
            grid,
            amplitudes,
            time: 0.0,
        })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let mut amplitudes = Vec::with_capacity(grid.len());
        grid.for_each_point(|_, x| amplitudes.push(f(x)));
        WaveFunction {
            grid,
            amplitudes,
            time: 0.0,
        }
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// `Σ|ψ|² ΔV`.
    pub fn mass(&self) -> f64 {
        mass_of(&self.amplitudes, self.grid.cell_volume())
    }

    /// Probability weight in the outermost layer of cells.
    pub fn edge_mass(&self) -> f64 {
        edge_mass_of(&self.grid, &self.amplitudes)
    }

    /// `⟨self|other⟩ = Σ conj(ψ) φ ΔV`.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(QpseError::GridMismatch(
                "inner product of states on different grids".into(),
            ));
        }
        let sum: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.grid.cell_volume())
    }
}

/// Source index for each cell under the reflection `x ↦ 2c - x` about the
/// grid center `c = origin + NΔx/2` on every axis, i.e. `n ↦ (N - n) mod N`.
pub fn reflected_indices(grid: &GridSpec) -> Vec<usize> {
    let shape = grid.shape();
    let mut idx = vec![0usize; shape.len()];
    (0..grid.len())
        .map(|flat| {
            grid.unflatten(flat, &mut idx);
            idx.iter()
                .zip(&shape)
                .fold(0, |acc, (&i, &n)| acc * n + (n - i) % n)
        })
        .collect()
}

pub(crate) fn mass_of(amplitudes: &[Complex64], cell_volume: f64) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * cell_volume
}

pub(crate) fn edge_mass_of(grid: &GridSpec, amplitudes: &[Complex64]) -> f64 {
    let mut scratch = vec![0usize; grid.dim()];
    let mut sum = 0.0;
    for (flat, a) in amplitudes.iter().enumerate() {
        if grid.is_edge(flat, &mut scratch) {
            sum += a.norm_sqr();
        }
    }
    sum * grid.cell_volume()
}

/// Nonnegative probability density on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub cell_volume: f64,
}

impl DensityField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(QpseError::InvalidParameter(format!(
                "expected {} density values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(QpseError::InvalidParameter(format!(
                "density values must be finite and nonnegative, found {v}"
            )));
        }
        let cell_volume = grid.cell_volume();
        Ok(DensityField {
            grid,
            values,
            cell_volume,
        })
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume
    }
}

/// Rescales `psi` by a positive real so that `Σ|ψ|² ΔV = 1`.
pub fn normalize(psi: &WaveFunction) -> Result<WaveFunction> {
    let mass = psi.mass();
    if !mass.is_finite() {
        return Err(QpseError::NonFinite("state mass is not finite".into()));
    }
    if mass < ZERO_NORM_FLOOR {
        return Err(QpseError::ZeroNorm { mass });
    }
    let scale = mass.sqrt().recip();
    Ok(WaveFunction {
        grid: psi.grid.clone(),
        amplitudes: psi.amplitudes.iter().map(|a| a * scale).collect(),
        time: psi.time,
    })
}

/// Born-rule density `|ψ|²` of a normalized state.
pub fn density(psi: &WaveFunction) -> Result<DensityField> {
    let values: Vec<f64> = psi.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let field = DensityField {
        cell_volume: psi.grid.cell_volume(),
        grid: psi.grid.clone(),
        values,
    };
    let residual = (field.total() - 1.0).abs();
    if !(residual <= NORMALIZATION_TOLERANCE) {
        return Err(QpseError::NotNormalized {
            residual,
            tolerance: NORMALIZATION_TOLERANCE,
        });
    }
    Ok(field)
}

/// Riemann quadrature `Σ f ΔV` over `grid`.
pub fn integrate(f: &[f64], grid: &GridSpec) -> Result<f64> {
    if f.len() != grid.len() {
        return Err(QpseError::InvalidParameter(format!(
            "expected {} samples, got {}",
            grid.len(),
            f.len()
        )));
    }
    if let Some(i) = f.iter().position(|v| !v.is_finite()) {
        return Err(QpseError::NonFinite(format!("sample {i} is {}", f[i])));
    }
    Ok(f.iter().sum::<f64>() * grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian_1d(n: usize, extent: f64, sigma: f64) -> WaveFunction {
        let grid = GridSpec::centered(1, n, extent).unwrap();
        let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
        WaveFunction::from_fn(grid, |x| {
            Complex64::new(norm * (-x[0] * x[0] / (4.0 * sigma * sigma)).exp(), 0.0)
        })
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(GridSpec::centered(1, 12, 1.0).is_err());
        assert!(GridSpec::centered(1, 4, 1.0).is_err());
        assert!(GridSpec::centered(4, 8, 1.0).is_err());
        assert!(GridSpec::centered(1, 8, 0.0).is_err());
        assert!(GridSpec::centered(1, 8, -1.0).is_err());
        assert!(GridSpec::centered(3, 8, 1.0).is_ok());
    }

    #[test]
    fn normalize_uniform_constant() {
        let grid = GridSpec::centered(1, 8, 4.0).unwrap();
        let psi = WaveFunction::new(grid, vec![Complex64::new(1.0, 0.0); 8]).unwrap();
        let out = normalize(&psi).unwrap();
        for a in &out.amplitudes {
            assert!((a.re - 0.5).abs() < 1e-15 && a.im == 0.0);
        }
        let rho = density(&out).unwrap();
        for v in &rho.values {
            assert!((v - 0.25).abs() < 1e-15);
        }
        assert!((rho.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_is_idempotent_and_keeps_phases() {
        let mut psi = gaussian_1d(256, 40.0, 1.0);
        for (i, a) in psi.amplitudes.iter_mut().enumerate() {
            *a *= Complex64::from_polar(1.0, 0.1 * i as f64);
        }
        let once = normalize(&psi).unwrap();
        let twice = normalize(&once).unwrap();
        for ((a, b), c) in once
            .amplitudes
            .iter()
            .zip(&twice.amplitudes)
            .zip(&psi.amplitudes)
        {
            assert!((a - b).norm() < 1e-12);
            if c.norm() > 1e-8 {
                assert!((a.arg() - c.arg()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalize_zero_state() {
        let grid = GridSpec::centered(1, 8, 1.0).unwrap();
        let psi = WaveFunction::new(grid, vec![Complex64::new(0.0, 0.0); 8]).unwrap();
        assert!(matches!(normalize(&psi), Err(QpseError::ZeroNorm { .. })));
    }

    #[test]
    fn density_of_standard_gaussian_peak() {
        let psi = normalize(&gaussian_1d(1024, 40.0, 1.0)).unwrap();
        let rho = density(&psi).unwrap();
        // x = 0 sits at index N/2 on a centered grid.
        assert!((rho.values[512] - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn density_rejects_unnormalized() {
        let psi = gaussian_1d(256, 40.0, 1.0);
        let doubled = WaveFunction {
            amplitudes: psi.amplitudes.iter().map(|a| a * 2.0).collect(),
            ..psi
        };
        assert!(matches!(
            density(&doubled),
            Err(QpseError::NotNormalized { .. })
        ));
    }

    #[test]
    fn product_state_density_is_outer_product() {
        let g = normalize(&gaussian_1d(64, 20.0, 1.0)).unwrap();
        let grid2 = GridSpec::centered(2, 64, 20.0).unwrap();
        let mut amps = Vec::with_capacity(64 * 64);
        for a in &g.amplitudes {
            for b in &g.amplitudes {
                amps.push(a * b);
            }
        }
        let psi2 = WaveFunction::new(grid2, amps).unwrap();
        let rho2 = density(&psi2).unwrap();
        let rho1 = density(&g).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                let expected = rho1.values[i] * rho1.values[j];
                assert!((rho2.values[i * 64 + j] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn integrate_constant_and_normal_pdf() {
        let grid = GridSpec::centered(1, 16, 4.0).unwrap();
        assert_eq!(integrate(&[1.0; 16], &grid).unwrap(), 4.0);

        let grid = GridSpec::centered(1, 1024, 40.0).unwrap();
        let pdf: Vec<f64> = grid
            .axis(0)
            .coordinates()
            .iter()
            .map(|x| (-x * x / 2.0).exp() / (2.0 * PI).sqrt())
            .collect();
        assert!((integrate(&pdf, &grid).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn integrate_rejects_nan() {
        let grid = GridSpec::centered(1, 8, 1.0).unwrap();
        let mut f = vec![1.0; 8];
        f[3] = f64::NAN;
        assert!(matches!(integrate(&f, &grid), Err(QpseError::NonFinite(_))));
    }

    #[test]
    fn edge_mass_counts_outer_layer_only() {
        let grid = GridSpec::centered(2, 8, 8.0).unwrap();
        let psi = WaveFunction::new(grid, vec![Complex64::new(1.0, 0.0); 64]).unwrap();
        // 64 cells minus the 6x6 interior.
        assert_eq!(psi.edge_mass(), 28.0);
    }

    #[test]
    fn for_each_point_matches_unflatten() {
        let grid = GridSpec::new(vec![Axis::centered(8, 2.0), Axis::centered(16, 4.0)]).unwrap();
        let mut idx = [0usize; 2];
        grid.for_each_point(|flat, x| {
            grid.unflatten(flat, &mut idx);
            assert_eq!(x[0], grid.axis(0).coordinate(idx[0]));
            assert_eq!(x[1], grid.axis(1).coordinate(idx[1]));
        });
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn integrate_is_linear(
                f in proptest::collection::vec(-10.0f64..10.0, 32),
                g in proptest::collection::vec(-10.0f64..10.0, 32),
                a in -5.0f64..5.0,
                b in -5.0f64..5.0,
            ) {
                let grid = GridSpec::centered(1, 32, 3.0).unwrap();
                let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
                let lhs = integrate(&combo, &grid).unwrap();
                let rhs = a * integrate(&f, &grid).unwrap() + b * integrate(&g, &grid).unwrap();
                let scale = f.iter().chain(&g).map(|v| v.abs()).sum::<f64>() * (a.abs() + b.abs()) + 1.0;
                prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
            }

            #[test]
            fn density_is_nonnegative(
                re in proptest::collection::vec(-1.0f64..1.0, 16),
                im in proptest::collection::vec(-1.0f64..1.0, 16),
            ) {
                let grid = GridSpec::centered(1, 16, 4.0).unwrap();
                let amps: Vec<Complex64> = re.iter().zip(&im).map(|(r, i)| Complex64::new(*r, *i)).collect();
                let psi = WaveFunction::new(grid, amps).unwrap();
                prop_assume!(psi.mass() > 1e-6);
                let rho = density(&normalize(&psi).unwrap()).unwrap();
                prop_assert!(rho.values.iter().all(|v| *v >= 0.0 && v.is_sign_positive()));
                prop_assert!((rho.total() - 1.0).abs() < 1e-10);
            }
        }
    }
}
