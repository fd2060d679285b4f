//! Dirac spinor fields in the standard representation and the discrete
//! C, P, T and CPT maps.
//!
//! The density identities only use unitarity of `C`, `T` and `γ⁰`, so the
//! fields here are kinematic test functions; nothing is evolved under the
//! Dirac Hamiltonian.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::entropy::{differential_entropy, EntropyReport};
use crate::error::{QpseError, Result};
use crate::grid::{reflected_indices, DensityField, GridSpec, WaveFunction};
use crate::spectral::to_k_space;
use crate::spin::ln_two_pi;

pub type Mat4 = Matrix4<Complex64>;

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const O: Complex64 = c(0.0, 0.0);
const I1: Complex64 = c(1.0, 0.0);
const M1: Complex64 = c(-1.0, 0.0);
const IU: Complex64 = c(0.0, 1.0);
const MI: Complex64 = c(0.0, -1.0);

/// Gamma matrices in the Dirac representation with `C = iγ²γ⁰`, `P = γ⁰`,
/// `T = iγ¹γ³`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    pub gamma: [Mat4; 4],
    pub c: Mat4,
    pub p: Mat4,
    pub t: Mat4,
}

impl GammaSet {
    pub fn standard() -> Self {
        #[rustfmt::skip]
        let g0 = Mat4::new(
            I1, O, O, O,
            O, I1, O, O,
            O, O, M1, O,
            O, O, O, M1,
        );
        #[rustfmt::skip]
        let g1 = Mat4::new(
            O, O, O, I1,
            O, O, I1, O,
            O, M1, O, O,
            M1, O, O, O,
        );
        #[rustfmt::skip]
        let g2 = Mat4::new(
            O, O, O, MI,
            O, O, IU, O,
            O, IU, O, O,
            MI, O, O, O,
        );
        #[rustfmt::skip]
        let g3 = Mat4::new(
            O, O, I1, O,
            O, O, O, M1,
            M1, O, O, O,
            O, I1, O, O,
        );
        let c = g2 * g0 * IU;
        let t = g1 * g3 * IU;
        GammaSet {
            gamma: [g0, g1, g2, g3],
            c,
            p: g0,
            t,
        }
    }

    /// Minkowski metric diag(+, -, -, -).
    pub fn metric(mu: usize, nu: usize) -> f64 {
        match (mu, nu) {
            (0, 0) => 1.0,
            (a, b) if a == b => -1.0,
            _ => 0.0,
        }
    }

    /// Largest entrywise deviation over all algebraic identities the set must satisfy:
    /// hermiticity, the Clifford relation, unitarity of C and T, and
    /// `C γ^μ C⁻¹ = -γ^μᵀ`.
    pub fn algebra_residual(&self) -> f64 {
        let id = Mat4::identity();
        let mut worst: f64 = 0.0;
        let mut track = |m: Mat4| worst = worst.max(m.iter().map(|z| z.norm()).fold(0.0, f64::max));

        track(self.gamma[0].adjoint() - self.gamma[0]);
        for g in &self.gamma[1..] {
            track(g.adjoint() + g);
        }
        for mu in 0..4 {
            for nu in 0..4 {
                let anti = self.gamma[mu] * self.gamma[nu] + self.gamma[nu] * self.gamma[mu];
                track(anti - id * c(2.0 * Self::metric(mu, nu), 0.0));
            }
        }
        track(self.c.adjoint() * self.c - id);
        track(self.t.adjoint() * self.t - id);
        let c_inv = self.c.adjoint();
        for g in &self.gamma {
            track(self.c * g * c_inv + g.transpose());
        }
        worst
    }
}

/// Four complex components on a 1D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: GridSpec,
    pub components: [Vec<Complex64>; 4],
    pub time: f64,
}

impl SpinorField {
    pub fn new(grid: GridSpec, components: [Vec<Complex64>; 4]) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(QpseError::InvalidParameter(format!(
                "spinor fields live on a 1D grid, got dimension {}",
                grid.dim()
            )));
        }
        if components.iter().any(|c| c.len() != grid.len()) {
            return Err(QpseError::InvalidParameter(
                "every spinor component needs one value per grid point".into(),
            ));
        }
        Ok(SpinorField {
            grid,
            components,
            time: 0.0,
        })
    }

    /// Pointwise `Ψ†Ψ`.
    pub fn density_values(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.components.iter().map(|c| c[i].norm_sqr()).sum())
            .collect()
    }

    pub fn mass(&self) -> f64 {
        self.density_values().iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn normalized(&self) -> Result<SpinorField> {
        let mass = self.mass();
        if mass < crate::grid::ZERO_NORM_FLOOR {
            return Err(QpseError::ZeroNorm { mass });
        }
        let s = mass.sqrt().recip();
        let mut out = self.clone();
        for comp in out.components.iter_mut() {
            for v in comp.iter_mut() {
                *v *= s;
            }
        }
        Ok(out)
    }

    /// `Σ_a ⟨self_a|other_a⟩ Δx`.
    pub fn inner(&self, other: &SpinorField) -> Complex64 {
        let sum: Complex64 = self
            .components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.conj() * y))
            .sum();
        sum * self.grid.cell_volume()
    }

    /// Spinor at grid point `i`.
    pub fn at(&self, i: usize) -> [Complex64; 4] {
        [
            self.components[0][i],
            self.components[1][i],
            self.components[2][i],
            self.components[3][i],
        ]
    }

    /// Applies `matrix · (conj? Ψ)(reflected? -x)` pointwise.
    fn map(&self, matrix: &Mat4, conjugate: bool, reflect: bool, time: f64) -> SpinorField {
        let n = self.grid.len();
        let source: Vec<usize> = if reflect {
            reflected_indices(&self.grid)
        } else {
            (0..n).collect()
        };
        let mut components: [Vec<Complex64>; 4] = std::array::from_fn(|_| Vec::with_capacity(n));
        for &j in &source {
            let mut v = self.at(j);
            if conjugate {
                for z in v.iter_mut() {
                    *z = z.conj();
                }
            }
            for (row, comp) in components.iter_mut().enumerate() {
                let mut acc = O;
                for (col, z) in v.iter().enumerate() {
                    acc += matrix[(row, col)] * z;
                }
                comp.push(acc);
            }
        }
        SpinorField {
            grid: self.grid.clone(),
            components,
            time,
        }
    }
}

/// Charge conjugation `Ψ^C = C Ψ̄ᵀ = C (γ⁰)ᵀ Ψ*`.
pub fn apply_c(field: &SpinorField) -> SpinorField {
    let g = GammaSet::standard();
    field.map(&(g.c * g.gamma[0].transpose()), true, false, field.time)
}

/// Parity `Ψ^P(x) = γ⁰ Ψ(-x)`.
pub fn apply_p(field: &SpinorField) -> SpinorField {
    let g = GammaSet::standard();
    field.map(&g.p, false, true, field.time)
}

/// Time reversal `Ψ^T = T Ψ*`, with the time tag negated.
pub fn apply_t(field: &SpinorField) -> SpinorField {
    let g = GammaSet::standard();
    field.map(&g.t, true, false, -field.time)
}

/// `Ψ^CPT(x) = C P T Ψ̄ᵀ(-x) = C γ⁰ T (γ⁰)ᵀ Ψ*(-x)`, with the time tag negated.
pub fn apply_cpt(field: &SpinorField) -> SpinorField {
    let g = GammaSet::standard();
    let m = g.c * g.p * g.t * g.gamma[0].transpose();
    field.map(&m, true, true, -field.time)
}

/// Position and spatial-frequency entropies of the total spinor density,
/// plus the s = 1/2 spin entropy.
pub fn spinor_entropy(field: &SpinorField) -> Result<EntropyReport> {
    let rho_r = DensityField::new(field.grid.clone(), field.density_values())?;
    let s_r = differential_entropy(&rho_r)?;

    let mut rho_k: Option<DensityField> = None;
    for comp in &field.components {
        let psi = WaveFunction::new(field.grid.clone(), comp.clone())?;
        let phi = to_k_space(&psi)?;
        match rho_k.as_mut() {
            None => {
                rho_k = Some(DensityField {
                    values: phi.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
                    cell_volume: phi.kgrid.cell_volume(),
                    grid: phi.kgrid,
                })
            }
            Some(acc) => {
                for (v, a) in acc.values.iter_mut().zip(&phi.amplitudes) {
                    *v += a.norm_sqr();
                }
            }
        }
    }
    let rho_k = rho_k.expect("four components");
    let s_k = differential_entropy(&rho_k)?;
    let dim = 1;
    Ok(EntropyReport {
        s_r,
        s_k,
        s_spin: 0.0,
        s_total: s_r + s_k,
        norm_residual_r: (rho_r.total() - 1.0).abs(),
        norm_residual_k: (rho_k.total() - 1.0).abs(),
        bbm_margin: s_r + s_k - crate::entropy::bbm_bound(dim),
        dim,
    }
    .with_spin(ln_two_pi()))
}

/// Momentum-space density `Σ_a |Φ_a(k)|²` on the conjugate grid.
pub fn spinor_k_density(field: &SpinorField) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; field.grid.len()];
    for comp in &field.components {
        let phi = to_k_space(&WaveFunction::new(field.grid.clone(), comp.clone())?)?;
        for (v, a) in acc.iter_mut().zip(&phi.amplitudes) {
            *v += a.norm_sqr();
        }
    }
    Ok(acc)
}
