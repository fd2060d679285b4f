//! Built-in self-test: each row names the property, the check run, the
//! measured figure, and pass/fail.

use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use qpse_core::dynamics::{entropy_series, evolve, EvolutionSpec, Potential};
use qpse_core::entropy::{continuous_entropy, joint_entropy_two_particle, product_entropy};
use qpse_core::factory::{
    make_spinor_packet, make_state, make_two_particle, random_hermite_superposition,
    random_smooth_state, random_spinor_field, SpinorPacketSpec, StateSpec,
};
use qpse_core::grid::{reflected_indices, GridSpec, WaveFunction};
use qpse_core::spectral::to_k_space;
use qpse_core::spin::{
    azimuthal_density_entropy, ln_two_pi, spin_entropy_entangled_pair, spin_entropy_single,
    SpinValue,
};
use qpse_core::spinor::{
    apply_c, apply_cpt, apply_p, apply_t, spinor_entropy, GammaSet, SpinorField,
};
use qpse_core::transform::{dilate, lorentz_boost_k, translate_k, translate_x};
use qpse_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type SpinorMap = fn(&SpinorField) -> SpinorField;

pub struct Row {
    pub property: &'static str,
    pub check: &'static str,
    pub measured: String,
    pub pass: bool,
}

fn row(property: &'static str, check: &'static str, measured: String, pass: bool) -> Row {
    Row {
        property,
        check,
        measured,
        pass,
    }
}

fn one_plus_ln_pi() -> f64 {
    1.0 + PI.ln()
}

fn gaussian(dim: usize, sigma: f64, grid: &GridSpec) -> Result<WaveFunction> {
    make_state(&StateSpec::gaussian(dim, sigma), grid)
}

fn spin_constants() -> Result<Row> {
    let zero = spin_entropy_single(SpinValue::ZERO)?;
    let half = spin_entropy_single(SpinValue::HALF)?;
    let err = (half - ln_two_pi()).abs();
    Ok(row(
        "spin entropy",
        "S(s=0) = 0, S(s=1/2) = ln 2pi",
        format!("{err:.1e}"),
        zero == 0.0 && err < 1e-12,
    ))
}

fn azimuthal_extremum(seed: u64) -> Result<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max = f64::NEG_INFINITY;
    for _ in 0..500 {
        let p: f64 = rng.gen_range(0.0..1.0);
        let alpha = [
            Complex64::from_polar(p.sqrt(), rng.gen_range(0.0..2.0 * PI)),
            Complex64::from_polar((1.0 - p).sqrt(), rng.gen_range(0.0..2.0 * PI)),
        ];
        max = max.max(azimuthal_density_entropy(&alpha)?);
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let basis =
        azimuthal_density_entropy(&[one, zero])?.min(azimuthal_density_entropy(&[zero, one])?);
    let pass = max <= ln_two_pi() + 1e-12 && (basis - ln_two_pi()).abs() < 1e-10;
    Ok(row(
        "spin entropy",
        "azimuthal entropy <= ln 2pi over 500 states, = at basis states",
        format!("{:.1e}", ln_two_pi() - max),
        pass,
    ))
}

fn entangled_pair() -> Row {
    let base = 2.0 * ln_two_pi();
    let refs = [
        (0.0, base),
        (FRAC_PI_4, base + 2f64.ln()),
        (FRAC_PI_2, base),
    ];
    let err = refs
        .iter()
        .map(|(t, v)| (spin_entropy_entangled_pair(*t) - v).abs())
        .fold(0.0, f64::max);
    let sym = (0..100)
        .map(|i| {
            let t = FRAC_PI_2 * i as f64 / 99.0;
            (spin_entropy_entangled_pair(t) - spin_entropy_entangled_pair(FRAC_PI_2 - t)).abs()
        })
        .fold(0.0, f64::max);
    row(
        "entangled spin pair",
        "reference values at 0, pi/4, pi/2; mirror symmetry",
        format!("{:.1e}", err.max(sym)),
        err < 1e-9 && sym < 1e-12,
    )
}

fn minimum_entropy() -> Result<Row> {
    let line = GridSpec::centered(1, 1024, 40.0)?;
    let g = gaussian(1, 1.0, &line)?;
    let separable = product_entropy(&[g.clone(), g.clone(), g])?;
    let cube = GridSpec::centered(3, 64, 20.0)?;
    let full = continuous_entropy(&gaussian(3, 1.0, &cube)?)?;
    let target = 3.0 * one_plus_ln_pi();
    let err = (separable.s_total - target)
        .abs()
        .max((full.s_total - target).abs());
    Ok(row(
        "minimum entropy",
        "3D coherent Gaussian S = 3(1 + ln pi)",
        format!("{err:.1e}"),
        err < 1e-6,
    ))
}

fn uncertainty(seed: u64) -> Result<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = GridSpec::centered(1, 4096, 40.0)?;
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let spec = if i % 2 == 0 {
            let terms = rng.gen_range(1..=4);
            random_hermite_superposition(&mut rng, terms, 8, 1.0)?
        } else {
            random_smooth_state(&mut rng, 40.0, 5.0)
        };
        worst = worst.min(continuous_entropy(&make_state(&spec, &grid)?)?.bbm_margin);
    }
    let mut gaussian_worst: f64 = 0.0;
    for sigma in [0.1, 0.5, 1.0, 5.0] {
        let g = GridSpec::centered(1, 1024, 40.0 * sigma)?;
        gaussian_worst = gaussian_worst.max(
            continuous_entropy(&gaussian(1, sigma, &g)?)?
                .bbm_margin
                .abs(),
        );
    }
    Ok(row(
        "entropic uncertainty",
        "random superpositions margin >= -1e-6; Gaussians |margin| < 1e-5",
        format!("{worst:.1e}"),
        worst >= -1e-6 && gaussian_worst < 1e-5,
    ))
}

fn two_particle() -> Result<Row> {
    let line = GridSpec::centered(1, 256, 40.0)?;
    let plane = GridSpec::centered(2, 256, 40.0)?;
    let single = continuous_entropy(&gaussian(1, 1.0, &line)?)?;
    let product = joint_entropy_two_particle(&gaussian(2, 1.0, &plane)?)?;
    let additivity = (product.s_total - 2.0 * single.s_total).abs();
    let correlated = make_two_particle(
        &StateSpec::TwoParticleGaussian {
            sigma: 1.0,
            correlation: 0.8,
        },
        &plane,
    )?;
    let closed = 0.5 * ((2.0 * PI * E).powi(2) * (1.0 - 0.64f64)).ln();
    let bivariate = (joint_entropy_two_particle(&correlated)?.s_r - closed).abs();
    Ok(row(
        "two-particle entropy",
        "product state additive; correlated Gaussian closed form",
        format!("{:.1e}", additivity.max(bivariate)),
        additivity < 1e-8 && bivariate < 1e-5,
    ))
}

fn point_transformation(seed: u64) -> Result<Row> {
    let grid = GridSpec::centered(1, 1024, 40.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = [
        gaussian(1, 1.0, &grid)?,
        make_state(&random_hermite_superposition(&mut rng, 3, 6, 1.0)?, &grid)?,
    ];
    let mut worst: f64 = 0.0;
    for psi in &states {
        let before = continuous_entropy(psi)?;
        for a in [0.25, 0.5, 2.0, 4.0] {
            let after = continuous_entropy(&dilate(psi, a)?)?;
            worst = worst
                .max((after.s_r - before.s_r - a.ln()).abs())
                .max((after.s_k - before.s_k + a.ln()).abs())
                .max((after.s_total - before.s_total).abs());
        }
    }
    Ok(row(
        "point transformation",
        "dilation by 1/4, 1/2, 2, 4 leaves S unchanged",
        format!("{worst:.1e}"),
        worst < 1e-8,
    ))
}

fn reference_frame(seed: u64) -> Result<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = GridSpec::centered(1, 1 << 17, 1280.0)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let psi = make_state(&random_smooth_state(&mut rng, 40.0, 5.0), &grid)?;
        let x0 = rng.gen_range(-5.0..5.0);
        let k0 = rng.gen_range(-5.0..5.0);
        let before = continuous_entropy(&psi)?;
        let after = continuous_entropy(&translate_k(&translate_x(&psi, &[x0])?, &[k0])?)?;
        worst = worst
            .max((after.s_r - before.s_r).abs())
            .max((after.s_k - before.s_k).abs());
    }
    Ok(row(
        "reference frame",
        "20 random translations and boosts leave S_r, S_k unchanged",
        format!("{worst:.1e}"),
        worst < 1e-8,
    ))
}

fn cpt(seed: u64) -> Result<Row> {
    let grid = GridSpec::centered(1, 512, 40.0)?;
    let reflect = reflected_indices(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fields = vec![make_spinor_packet(
        &StateSpec::SpinorPacket(SpinorPacketSpec::spin_up(0.0, 1.0, 0.0)),
        &grid,
    )?];
    for _ in 0..20 {
        fields.push(random_spinor_field(&mut rng, &grid)?);
    }
    let (mut density, mut entropy): (f64, f64) = (0.0, 0.0);
    for f in &fields {
        let rho = f.density_values();
        let mirrored: Vec<f64> = reflect.iter().map(|&j| rho[j]).collect();
        let base = spinor_entropy(f)?;
        let maps: [(SpinorMap, bool); 4] = [
            (apply_c, false),
            (apply_p, true),
            (apply_t, false),
            (apply_cpt, true),
        ];
        for (map, reflects) in maps {
            let out = map(f);
            let expected = if reflects { &mirrored } else { &rho };
            let gap = out
                .density_values()
                .iter()
                .zip(expected)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            density = density.max(gap);
            entropy = entropy.max((spinor_entropy(&out)?.s_total - base.s_total).abs());
        }
    }
    let algebra = GammaSet::standard().algebra_residual();
    Ok(row(
        "CPT",
        "C, P, T, CPT keep density and entropy; gamma algebra exact",
        format!("{:.1e}", density.max(entropy)),
        density < 1e-12 && entropy < 1e-9 && algebra <= 1e-15,
    ))
}

fn lorentz() -> Result<Row> {
    let grid = GridSpec::centered(1, 2048, 80.0)?;
    let phi = to_k_space(&gaussian(1, 1.0, &grid)?)?;
    let mut worst: f64 = 0.0;
    for eta in [0.1, 0.5, 1.0] {
        for mass in [0.5, 1.0, 2.0] {
            let m = lorentz_boost_k(&phi, eta, mass)?;
            worst = worst
                .max(m.residual())
                .max((m.boosted_probability - 1.0).abs());
        }
    }
    Ok(row(
        "Lorentz scalar",
        "measure dk/omega invariant; boosted probability 1",
        format!("{worst:.1e}"),
        worst < 1e-8,
    ))
}

fn dynamics() -> Result<Row> {
    let grid = GridSpec::centered(1, 1024, 40.0)?;
    let free = EvolutionSpec {
        potential: Potential::Free,
        dt: 0.01,
        steps: 200,
        record_every: 50,
    };
    let series = entropy_series(&evolve(&gaussian(1, 1.0, &grid)?, &free)?)?;
    let mut worst: f64 = 0.0;
    for r in &series.rows {
        let closed = 0.5 * (2.0 * PI * E * (1.0 + r.time * r.time / 4.0)).ln();
        worst = worst.max((r.report.s_r - closed).abs());
    }
    let coherent = make_state(&StateSpec::gaussian_1d(2.0, 0.5f64.sqrt(), 0.0), &grid)?;
    let harmonic = EvolutionSpec {
        potential: Potential::Harmonic { omega: 1.0 },
        dt: 0.01,
        steps: (2.0 * PI / 0.01).ceil() as usize,
        record_every: 20,
    };
    for r in entropy_series(&evolve(&coherent, &harmonic)?)?.rows {
        worst = worst.max((r.report.s_total - one_plus_ln_pi()).abs());
    }
    Ok(row(
        "dynamics",
        "free spreading closed form; coherent state stays minimal",
        format!("{worst:.1e}"),
        worst < 1e-4,
    ))
}

type Check = Box<dyn Fn() -> Result<Row>>;

pub fn run_all(seed: u64) -> Vec<Row> {
    let checks: Vec<(&'static str, &'static str, Check)> = vec![
        ("spin entropy", "constants", Box::new(spin_constants)),
        (
            "spin entropy",
            "azimuthal extremum",
            Box::new(move || azimuthal_extremum(seed)),
        ),
        (
            "entangled spin pair",
            "curve",
            Box::new(|| Ok(entangled_pair())),
        ),
        (
            "minimum entropy",
            "coherent Gaussian",
            Box::new(minimum_entropy),
        ),
        (
            "entropic uncertainty",
            "sweep",
            Box::new(move || uncertainty(seed)),
        ),
        ("two-particle entropy", "additivity", Box::new(two_particle)),
        (
            "point transformation",
            "dilation",
            Box::new(move || point_transformation(seed)),
        ),
        (
            "reference frame",
            "translations",
            Box::new(move || reference_frame(seed)),
        ),
        ("CPT", "discrete maps", Box::new(move || cpt(seed))),
        ("Lorentz scalar", "measure", Box::new(lorentz)),
        ("dynamics", "oracles", Box::new(dynamics)),
    ];
    checks
        .into_iter()
        .map(|(property, check, f)| {
            f().unwrap_or_else(|e| row(property, check, format!("error: {e}"), false))
        })
        .collect()
}

pub fn render(rows: &[Row]) -> String {
    let wp = rows
        .iter()
        .map(|r| r.property.len())
        .max()
        .unwrap_or(0)
        .max("property".len());
    let wc = rows
        .iter()
        .map(|r| r.check.len())
        .max()
        .unwrap_or(0)
        .max("check".len());
    let wm = rows
        .iter()
        .map(|r| r.measured.len())
        .max()
        .unwrap_or(0)
        .max("error".len());
    let mut out = format!(
        "{:<wp$}  {:<wc$}  {:<wm$}  status\n",
        "property", "check", "error"
    );
    for r in rows {
        let status = if r.pass { "pass" } else { "FAIL" };
        out.push_str(&format!(
            "{:<wp$}  {:<wc$}  {:<wm$}  {status}\n",
            r.property, r.check, r.measured
        ));
    }
    out
}
