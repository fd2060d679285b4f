//! Parametric construction of test states.
//!
//! Gaussians are parameterized by the standard deviation `σ` of `|ψ|²`, so a
//! Gaussian with `σ σ_k = 1/2` is a minimum-uncertainty (coherent) state.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{QpseError, Result};
use crate::grid::{normalize, GridSpec, WaveFunction, EDGE_MASS_LIMIT};
use crate::spectral::to_k_space;
use crate::spinor::SpinorField;

/// States must fit in a box of at least this many σ per axis.
pub const MIN_EXTENT_IN_SIGMA: f64 = 20.0;

/// Fraction of the Nyquist frequency beyond which k-space mass counts as aliased.
pub const NYQUIST_GUARD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyBranch {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorPacketSpec {
    pub center: f64,
    pub sigma: f64,
    pub k0: f64,
    pub branch: EnergyBranch,
    pub spin_up: Complex64,
    pub spin_down: Complex64,
    pub mass: f64,
}

impl SpinorPacketSpec {
    /// Positive-energy, spin-up packet with unit mass.
    pub fn spin_up(center: f64, sigma: f64, k0: f64) -> Self {
        SpinorPacketSpec {
            center,
            sigma,
            k0,
            branch: EnergyBranch::Positive,
            spin_up: Complex64::new(1.0, 0.0),
            spin_down: Complex64::new(0.0, 0.0),
            mass: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// Per-axis center, density width and momentum boost.
    Gaussian {
        center: Vec<f64>,
        sigma: Vec<f64>,
        boost: Vec<f64>,
    },
    /// Product of Hermite functions of the given orders, centered at 0.
    Hermite { order: Vec<u32>, sigma: f64 },
    /// Renormalized linear combination.
    Superposition(Vec<(Complex64, StateSpec)>),
    /// Correlated Gaussian of two particles in 1D; use [`make_two_particle`].
    TwoParticleGaussian { sigma: f64, correlation: f64 },
    /// Four-component Dirac packet; use [`make_spinor_packet`].
    SpinorPacket(SpinorPacketSpec),
}

impl StateSpec {
    /// Centered, unboosted Gaussian of width `sigma` on every one of `dim` axes.
    pub fn gaussian(dim: usize, sigma: f64) -> Self {
        StateSpec::Gaussian {
            center: vec![0.0; dim],
            sigma: vec![sigma; dim],
            boost: vec![0.0; dim],
        }
    }

    pub fn gaussian_1d(center: f64, sigma: f64, boost: f64) -> Self {
        StateSpec::Gaussian {
            center: vec![center],
            sigma: vec![sigma],
            boost: vec![boost],
        }
    }
}

/// Builds a normalized state and checks that the grid resolves it.
pub fn make_state(spec: &StateSpec, grid: &GridSpec) -> Result<WaveFunction> {
    match spec {
        StateSpec::TwoParticleGaussian { .. } => make_two_particle(spec, grid),
        StateSpec::SpinorPacket(_) => Err(QpseError::InvalidParameter(
            "spinor packets are built with make_spinor_packet".into(),
        )),
        _ => {
            check_extent(spec, grid)?;
            let psi = normalize(&sample(spec, grid)?)?;
            check_resolved(&psi)?;
            Ok(psi)
        }
    }
}

fn check_extent(spec: &StateSpec, grid: &GridSpec) -> Result<()> {
    let sigmas: Vec<f64> = match spec {
        StateSpec::Gaussian { sigma, .. } => sigma.clone(),
        StateSpec::Hermite { sigma, .. } => vec![*sigma; grid.dim()],
        StateSpec::Superposition(terms) => {
            for (_, s) in terms {
                check_extent(s, grid)?;
            }
            return Ok(());
        }
        _ => return Ok(()),
    };
    for (axis, sigma) in grid.axes().iter().zip(sigmas) {
        if axis.extent() < MIN_EXTENT_IN_SIGMA * sigma {
            return Err(QpseError::GridTooSmall(format!(
                "box extent {} is below {MIN_EXTENT_IN_SIGMA}σ = {}",
                axis.extent(),
                MIN_EXTENT_IN_SIGMA * sigma
            )));
        }
    }
    Ok(())
}

/// Edge-mass and Nyquist guards shared by all factory outputs.
pub fn check_resolved(psi: &WaveFunction) -> Result<()> {
    let edge = psi.edge_mass();
    if !(edge <= EDGE_MASS_LIMIT) {
        return Err(QpseError::GridTooSmall(format!(
            "edge mass {edge:e} exceeds {EDGE_MASS_LIMIT:e}"
        )));
    }
    let aliased = to_k_space(psi)?.mass_beyond(NYQUIST_GUARD);
    if !(aliased <= EDGE_MASS_LIMIT) {
        return Err(QpseError::AliasedMomentum(format!(
            "k-space mass {aliased:e} lies within {}% of the Nyquist edge",
            ((1.0 - NYQUIST_GUARD) * 100.0).round()
        )));
    }
    Ok(())
}

fn sample(spec: &StateSpec, grid: &GridSpec) -> Result<WaveFunction> {
    let dim = grid.dim();
    match spec {
        StateSpec::Gaussian {
            center,
            sigma,
            boost,
        } => {
            if center.len() != dim || sigma.len() != dim || boost.len() != dim {
                return Err(QpseError::InvalidParameter(format!(
                    "gaussian needs {dim} entries per parameter"
                )));
            }
            if sigma.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
                return Err(QpseError::InvalidParameter("σ must be positive".into()));
            }
            Ok(WaveFunction::from_fn(grid.clone(), |x| {
                (0..dim)
                    .map(|d| gaussian_amplitude(x[d], center[d], sigma[d], boost[d]))
                    .product()
            }))
        }
        StateSpec::Hermite { order, sigma } => {
            if order.len() != dim {
                return Err(QpseError::InvalidParameter(format!(
                    "hermite needs {dim} orders"
                )));
            }
            if !(*sigma > 0.0) || !sigma.is_finite() {
                return Err(QpseError::InvalidParameter("σ must be positive".into()));
            }
            Ok(WaveFunction::from_fn(grid.clone(), |x| {
                let v: f64 = (0..dim)
                    .map(|d| hermite_function(order[d], x[d], *sigma))
                    .product();
                Complex64::new(v, 0.0)
            }))
        }
        StateSpec::Superposition(terms) => {
            if terms.is_empty() {
                return Err(QpseError::InvalidParameter("empty superposition".into()));
            }
            let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
            for (coef, term) in terms {
                let part = normalize(&sample(term, grid)?)?;
                for (a, p) in acc.iter_mut().zip(&part.amplitudes) {
                    *a += coef * p;
                }
            }
            WaveFunction::new(grid.clone(), acc)
        }
        StateSpec::TwoParticleGaussian { .. } | StateSpec::SpinorPacket(_) => Err(
            QpseError::InvalidParameter("not a single-particle state kind".into()),
        ),
    }
}

/// `(2πσ²)^{-1/4} exp(-(x-x0)²/4σ²) exp(i k0 x)`.
pub fn gaussian_amplitude(x: f64, x0: f64, sigma: f64, k0: f64) -> Complex64 {
    let u = x - x0;
    let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
    Complex64::from_polar(norm * (-u * u / (4.0 * sigma * sigma)).exp(), k0 * x)
}

/// Normalized Hermite function of order `n` whose `n = 0` member has density width `σ`.
pub fn hermite_function(n: u32, x: f64, sigma: f64) -> f64 {
    // Orthonormal recurrence in u = x / (√2 σ), then rescaled to x.
    let u = x / (2f64.sqrt() * sigma);
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-u * u / 2.0).exp();
    for k in 0..n {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * u * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur / (2f64.sqrt() * sigma).sqrt()
}

/// Correlated two-particle Gaussian
/// `ψ ∝ exp(-(x1² + x2² - 2r x1 x2) / (4σ²(1 - r²)))` on a 2D grid.
pub fn make_two_particle(spec: &StateSpec, grid2d: &GridSpec) -> Result<WaveFunction> {
    let StateSpec::TwoParticleGaussian { sigma, correlation } = *spec else {
        return Err(QpseError::InvalidParameter(
            "make_two_particle needs a two_particle_gaussian spec".into(),
        ));
    };
    if grid2d.dim() != 2 {
        return Err(QpseError::InvalidParameter(
            "two-particle states need a 2D grid".into(),
        ));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(QpseError::InvalidParameter("σ must be positive".into()));
    }
    if !(correlation.abs() < 1.0) {
        return Err(QpseError::InvalidParameter(format!(
            "correlation must satisfy |r| < 1, got {correlation}"
        )));
    }
    // Narrowest principal axis of the density has std σ√(1 - |r|).
    let minor = sigma * (1.0 - correlation.abs()).sqrt();
    let coarsest = grid2d.axes().iter().map(|a| a.spacing).fold(0.0, f64::max);
    if minor < 2.0 * coarsest {
        return Err(QpseError::IllConditioned(format!(
            "correlation {correlation} leaves a principal width {minor:e} below two grid steps ({:e})",
            2.0 * coarsest
        )));
    }
    for axis in grid2d.axes() {
        if axis.extent() < MIN_EXTENT_IN_SIGMA * sigma {
            return Err(QpseError::GridTooSmall(format!(
                "box extent {} is below {MIN_EXTENT_IN_SIGMA}σ",
                axis.extent()
            )));
        }
    }
    let denom = 4.0 * sigma * sigma * (1.0 - correlation * correlation);
    let psi = WaveFunction::from_fn(grid2d.clone(), |x| {
        let q = x[0] * x[0] + x[1] * x[1] - 2.0 * correlation * x[0] * x[1];
        Complex64::new((-q / denom).exp(), 0.0)
    });
    let psi = normalize(&psi)?;
    check_resolved(&psi)?;
    Ok(psi)
}

/// Free Dirac spinor for momentum `k` along x in the standard representation.
pub fn free_spinor(
    k: f64,
    mass: f64,
    branch: EnergyBranch,
    up: Complex64,
    down: Complex64,
) -> [Complex64; 4] {
    let energy = (k * k + mass * mass).sqrt();
    let ratio = k / (energy + mass);
    // σ_x swaps the two spin components.
    let small = [down * ratio, up * ratio];
    let v = match branch {
        EnergyBranch::Positive => [up, down, small[0], small[1]],
        EnergyBranch::Negative => [small[0], small[1], up, down],
    };
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / norm)
}

/// `u(k0) g(x) e^{i k0 x}` with a Gaussian envelope `g` of density width `σ`.
pub fn make_spinor_packet(spec: &StateSpec, grid: &GridSpec) -> Result<SpinorField> {
    let StateSpec::SpinorPacket(p) = spec else {
        return Err(QpseError::InvalidParameter(
            "make_spinor_packet needs a spinor_packet spec".into(),
        ));
    };
    if grid.dim() != 1 {
        return Err(QpseError::InvalidParameter(
            "spinor packets need a 1D grid".into(),
        ));
    }
    if !(p.sigma > 0.0) || !(p.mass > 0.0) {
        return Err(QpseError::InvalidParameter(
            "σ and mass must be positive".into(),
        ));
    }
    if p.spin_up.norm_sqr() + p.spin_down.norm_sqr() == 0.0 {
        return Err(QpseError::InvalidParameter(
            "spin weights are both zero".into(),
        ));
    }
    let axis = grid.axis(0);
    let limit = 0.5 * PI / axis.spacing;
    if !(p.k0.abs() < limit) {
        return Err(QpseError::AliasedMomentum(format!(
            "|k0| = {} must stay below half the Nyquist frequency ({limit})",
            p.k0.abs()
        )));
    }
    if axis.extent() < MIN_EXTENT_IN_SIGMA * p.sigma {
        return Err(QpseError::GridTooSmall(format!(
            "box extent {} is below {MIN_EXTENT_IN_SIGMA}σ",
            axis.extent()
        )));
    }
    let u = free_spinor(p.k0, p.mass, p.branch, p.spin_up, p.spin_down);
    let envelope: Vec<Complex64> = axis
        .coordinates()
        .iter()
        .map(|&x| gaussian_amplitude(x, p.center, p.sigma, p.k0))
        .collect();
    let components = std::array::from_fn(|a| envelope.iter().map(|g| g * u[a]).collect());
    let field = SpinorField::new(grid.clone(), components)?.normalized()?;
    let edge: f64 = field
        .density_values()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i == 0 || *i + 1 == axis.points)
        .map(|(_, v)| v)
        .sum::<f64>()
        * axis.spacing;
    if !(edge <= EDGE_MASS_LIMIT) {
        return Err(QpseError::GridTooSmall(format!(
            "edge mass {edge:e} exceeds {EDGE_MASS_LIMIT:e}"
        )));
    }
    Ok(field)
}

fn random_coefficient(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..2.0 * PI))
}

/// Superposition of `terms` Hermite functions of distinct orders below
/// `max_order` (all of width `sigma`) with random complex weights.
pub fn random_hermite_superposition(
    rng: &mut impl Rng,
    terms: usize,
    max_order: u32,
    sigma: f64,
) -> Result<StateSpec> {
    if terms < 1 || terms > max_order as usize {
        return Err(QpseError::InvalidParameter(format!(
            "cannot draw {terms} distinct orders below {max_order}"
        )));
    }
    let mut orders: Vec<u32> = (0..max_order).collect();
    for i in 0..terms {
        let j = rng.gen_range(i..orders.len());
        orders.swap(i, j);
    }
    Ok(StateSpec::Superposition(
        orders[..terms]
            .iter()
            .map(|&n| {
                (
                    random_coefficient(rng),
                    StateSpec::Hermite {
                        order: vec![n],
                        sigma,
                    },
                )
            })
            .collect(),
    ))
}

/// A smooth random 1D state: a Gaussian or a superposition of 2-3 displaced,
/// boosted Gaussians, all fitting comfortably inside `extent` and below `k_max`.
pub fn random_smooth_state(rng: &mut impl Rng, extent: f64, k_max: f64) -> StateSpec {
    let terms = rng.gen_range(1..=3usize);
    let mut parts = Vec::with_capacity(terms);
    for _ in 0..terms {
        let sigma = rng.gen_range(0.6..1.4);
        let center = rng.gen_range(-0.1..0.1) * extent;
        let boost = rng.gen_range(-0.3..0.3) * k_max;
        parts.push((
            random_coefficient(rng),
            StateSpec::gaussian_1d(center, sigma, boost),
        ));
    }
    if parts.len() == 1 {
        parts.pop().unwrap().1
    } else {
        StateSpec::Superposition(parts)
    }
}

/// Random smooth normalized 4-component field: each component is a random
/// complex combination of two Gaussian envelopes.
pub fn random_spinor_field(rng: &mut impl Rng, grid: &GridSpec) -> Result<SpinorField> {
    if grid.dim() != 1 {
        return Err(QpseError::InvalidParameter("spinor fields are 1D".into()));
    }
    let axis = grid.axis(0);
    let extent = axis.extent();
    let k_max = PI / axis.spacing;
    let xs = axis.coordinates();
    let components = std::array::from_fn(|_| {
        let lobes: Vec<(Complex64, f64, f64, f64)> = (0..2)
            .map(|_| {
                (
                    random_coefficient(rng),
                    rng.gen_range(-0.1..0.1) * extent,
                    rng.gen_range(0.6..1.4),
                    rng.gen_range(-0.2..0.2) * k_max,
                )
            })
            .collect();
        xs.iter()
            .map(|&x| {
                lobes
                    .iter()
                    .map(|(c, x0, s, k0)| c * gaussian_amplitude(x, *x0, *s, *k0))
                    .sum()
            })
            .collect()
    });
    SpinorField::new(grid.clone(), components)?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_has_requested_width() {
        let grid = GridSpec::centered(1, 1024, 40.0).unwrap();
        let psi = make_state(&StateSpec::gaussian(1, 1.0), &grid).unwrap();
        let rho = density(&psi).unwrap();
        let xs = grid.axis(0).coordinates();
        let mean: f64 =
            xs.iter().zip(&rho.values).map(|(x, r)| x * r).sum::<f64>() * rho.cell_volume;
        let var: f64 = xs
            .iter()
            .zip(&rho.values)
            .map(|(x, r)| (x - mean).powi(2) * r)
            .sum::<f64>()
            * rho.cell_volume;
        assert!((var.sqrt() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn hermite_one_has_node_at_origin() {
        let grid = GridSpec::centered(1, 1024, 40.0).unwrap();
        let psi = make_state(
            &StateSpec::Hermite {
                order: vec![1],
                sigma: 1.0,
            },
            &grid,
        )
        .unwrap();
        assert!(psi.amplitudes[512].norm_sqr() < 1e-20);
    }

    #[test]
    fn small_box_is_rejected() {
        let grid = GridSpec::centered(1, 1024, 4.0).unwrap();
        assert!(matches!(
            make_state(&StateSpec::gaussian(1, 1.0), &grid),
            Err(QpseError::GridTooSmall(_))
        ));
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let grid = GridSpec::centered(1, 1024, 40.0).unwrap();
        let states: Vec<WaveFunction> = (0..8)
            .map(|n| {
                let psi = WaveFunction::from_fn(grid.clone(), |x| {
                    Complex64::new(hermite_function(n, x[0], 1.0), 0.0)
                });
                assert!((psi.mass() - 1.0).abs() < 1e-10, "order {n} not unit norm");
                psi
            })
            .collect();
        for m in 0..8 {
            for n in 0..8 {
                if m != n {
                    assert!(states[m].inner(&states[n]).unwrap().norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn boosted_gaussian_k_mean() {
        let grid = GridSpec::centered(1, 1024, 40.0).unwrap();
        let psi = make_state(&StateSpec::gaussian_1d(0.0, 1.0, 2.5), &grid).unwrap();
        let phi = to_k_space(&psi).unwrap();
        let mut mean = 0.0;
        phi.kgrid
            .for_each_point(|i, k| mean += k[0] * phi.amplitudes[i].norm_sqr());
        mean *= phi.kgrid.cell_volume();
        assert!((mean - 2.5).abs() < phi.kgrid.axis(0).spacing);
    }

    #[test]
    fn two_particle_reduces_to_product_at_zero_correlation() {
        let grid = GridSpec::centered(2, 128, 20.0).unwrap();
        let psi = make_two_particle(
            &StateSpec::TwoParticleGaussian {
                sigma: 1.0,
                correlation: 0.0,
            },
            &grid,
        )
        .unwrap();
        let g = make_state(
            &StateSpec::gaussian(1, 1.0),
            &GridSpec::centered(1, 128, 20.0).unwrap(),
        )
        .unwrap();
        for i in 0..128 {
            for j in 0..128 {
                let expected = g.amplitudes[i] * g.amplitudes[j];
                assert!((psi.amplitudes[i * 128 + j] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn correlated_marginal_keeps_sigma() {
        let grid = GridSpec::centered(2, 256, 40.0).unwrap();
        let psi = make_two_particle(
            &StateSpec::TwoParticleGaussian {
                sigma: 1.0,
                correlation: 0.8,
            },
            &grid,
        )
        .unwrap();
        let rho = density(&psi).unwrap();
        let xs = grid.axis(0).coordinates();
        let mut second = 0.0;
        for (x, row) in xs.iter().zip(rho.values.chunks(256)) {
            second += x * x * row.iter().sum::<f64>();
        }
        second *= rho.cell_volume;
        assert!((second.sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn near_singular_correlation_is_guarded() {
        let grid = GridSpec::centered(2, 256, 40.0).unwrap();
        let err = make_two_particle(
            &StateSpec::TwoParticleGaussian {
                sigma: 1.0,
                correlation: 0.999,
            },
            &grid,
        )
        .unwrap_err();
        assert!(err.guard_name().is_some(), "{err}");
        assert!(make_two_particle(
            &StateSpec::TwoParticleGaussian {
                sigma: 1.0,
                correlation: 1.0
            },
            &grid
        )
        .is_err());
    }

    #[test]
    fn rest_frame_spinor_has_no_lower_components() {
        let grid = GridSpec::centered(1, 512, 40.0).unwrap();
        let f = make_spinor_packet(
            &StateSpec::SpinorPacket(SpinorPacketSpec::spin_up(0.0, 1.0, 0.0)),
            &grid,
        )
        .unwrap();
        assert!(f.components[2]
            .iter()
            .chain(&f.components[3])
            .all(|z| z.norm() < 1e-14));
        assert!((f.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boosted_spinor_lower_fraction() {
        let grid = GridSpec::centered(1, 512, 40.0).unwrap();
        let f = make_spinor_packet(
            &StateSpec::SpinorPacket(SpinorPacketSpec::spin_up(0.0, 1.0, 1.0)),
            &grid,
        )
        .unwrap();
        let lower: f64 = f.components[2]
            .iter()
            .chain(&f.components[3])
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            * grid.cell_volume();
        let e = 2f64.sqrt();
        let expected = 1.0 / ((e + 1.0).powi(2) + 1.0);
        assert!((lower - expected).abs() < 1e-12);
    }

    #[test]
    fn spinor_momentum_beyond_half_nyquist() {
        let grid = GridSpec::centered(1, 512, 40.0).unwrap();
        let k = 0.9 * PI / grid.axis(0).spacing;
        assert!(matches!(
            make_spinor_packet(
                &StateSpec::SpinorPacket(SpinorPacketSpec::spin_up(0.0, 1.0, k)),
                &grid
            ),
            Err(QpseError::AliasedMomentum(_))
        ));
    }

    #[test]
    fn random_superposition_has_distinct_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = random_hermite_superposition(&mut rng, 5, 8, 1.0).unwrap();
        let StateSpec::Superposition(terms) = spec else {
            panic!()
        };
        let mut orders: Vec<u32> = terms
            .iter()
            .map(|(_, s)| match s {
                StateSpec::Hermite { order, .. } => order[0],
                _ => unreachable!(),
            })
            .collect();
        orders.sort();
        orders.dedup();
        assert_eq!(orders.len(), 5);
    }

    #[test]
    fn factory_outputs_are_resolved() {
        let grid = GridSpec::centered(1, 1024, 40.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let spec = random_smooth_state(&mut rng, 40.0, PI / grid.axis(0).spacing);
            let psi = make_state(&spec, &grid).unwrap();
            assert!((psi.mass() - 1.0).abs() < 1e-10);
            assert!(psi.edge_mass() < 1e-12);
        }
    }
}
