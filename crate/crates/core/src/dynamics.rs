//! Split-step Fourier time evolution (ħ = m = 1) and entropy time series.

use num_complex::Complex64;

use crate::entropy::{continuous_entropy, EntropyReport};
use crate::error::{QpseError, Result};
use crate::grid::{edge_mass_of, WaveFunction};
use crate::spectral::{conjugate_grid, forward_in_place, inverse_in_place};

/// Evolution aborts once this much probability sits in the outer cell layer.
pub const WRAPAROUND_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Free,
    /// `V(x) = ω² |x|² / 2`.
    Harmonic {
        omega: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSpec {
    pub potential: Potential,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
}

impl EvolutionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(QpseError::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(QpseError::InvalidParameter(
                "record_every must be at least 1".into(),
            ));
        }
        if !(self.dt * self.steps as f64).is_finite() {
            return Err(QpseError::InvalidParameter("horizon is not finite".into()));
        }
        if let Potential::Harmonic { omega } = self.potential {
            if !(omega > 0.0) || !omega.is_finite() {
                return Err(QpseError::InvalidParameter(format!(
                    "ω must be positive, got {omega}"
                )));
            }
            if self.dt > 0.1 / omega {
                return Err(QpseError::InvalidParameter(format!(
                    "dt = {} exceeds 0.1/ω = {}",
                    self.dt,
                    0.1 / omega
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub state: WaveFunction,
}

/// Strang-split propagation: half potential kick, full kinetic drift in k
/// space, half kick. Returns the initial state plus every `record_every`-th
/// step (and the final step).
pub fn evolve(psi: &WaveFunction, spec: &EvolutionSpec) -> Result<Vec<Snapshot>> {
    spec.validate()?;
    let grid = &psi.grid;
    let kgrid = conjugate_grid(grid);

    let mut drift = Vec::with_capacity(kgrid.len());
    kgrid.for_each_point(|_, k| {
        let k2: f64 = k.iter().map(|v| v * v).sum();
        drift.push(Complex64::from_polar(1.0, -0.5 * k2 * spec.dt));
    });
    let kick: Option<Vec<Complex64>> = match spec.potential {
        Potential::Free => None,
        Potential::Harmonic { omega } => {
            let mut v = Vec::with_capacity(grid.len());
            grid.for_each_point(|_, x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                v.push(Complex64::from_polar(
                    1.0,
                    -0.25 * omega * omega * r2 * spec.dt,
                ));
            });
            Some(v)
        }
    };

    let mut data = psi.amplitudes.clone();
    let mut snapshots = vec![Snapshot {
        time: psi.time,
        state: psi.clone(),
    }];
    for step in 1..=spec.steps {
        if let Some(kick) = &kick {
            data.iter_mut().zip(kick).for_each(|(a, k)| *a *= k);
        }
        forward_in_place(&mut data, grid);
        data.iter_mut().zip(&drift).for_each(|(a, d)| *a *= d);
        inverse_in_place(&mut data, grid);
        if let Some(kick) = &kick {
            data.iter_mut().zip(kick).for_each(|(a, k)| *a *= k);
        }

        let time = psi.time + step as f64 * spec.dt;
        let edge = edge_mass_of(grid, &data);
        if edge > WRAPAROUND_LIMIT {
            return Err(QpseError::EdgeMassExceeded {
                time,
                mass: edge,
                limit: WRAPAROUND_LIMIT,
            });
        }
        if step % spec.record_every == 0 || step == spec.steps {
            snapshots.push(Snapshot {
                time,
                state: WaveFunction {
                    grid: grid.clone(),
                    amplitudes: data.clone(),
                    time,
                },
            });
        }
    }
    Ok(snapshots)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub time: f64,
    pub report: EntropyReport,
    pub norm_residual: f64,
}

/// Descriptive statistics of `S_total(t)`; nothing is asserted about them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monotonicity {
    pub decreasing_steps: usize,
    pub max_decrease: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    pub rows: Vec<SeriesRow>,
    pub monotonicity: Option<Monotonicity>,
}

pub fn entropy_series(snapshots: &[Snapshot]) -> Result<EntropySeries> {
    let rows = snapshots
        .iter()
        .map(|s| {
            Ok(SeriesRow {
                time: s.time,
                report: continuous_entropy(&s.state)?,
                norm_residual: (s.state.mass() - 1.0).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotonicity = (rows.len() > 1).then(|| {
        let mut stats = Monotonicity {
            decreasing_steps: 0,
            max_decrease: 0.0,
        };
        for pair in rows.windows(2) {
            let change = pair[1].report.s_total - pair[0].report.s_total;
            if change < 0.0 {
                stats.decreasing_steps += 1;
                stats.max_decrease = stats.max_decrease.max(-change);
            }
        }
        stats
    });
    Ok(EntropySeries { rows, monotonicity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::{make_state, StateSpec};
    use crate::grid::GridSpec;
    use crate::spectral::to_k_space;
    use std::f64::consts::{E, PI};

    fn free(dt: f64, steps: usize, record_every: usize) -> EvolutionSpec {
        EvolutionSpec {
            potential: Potential::Free,
            dt,
            steps,
            record_every,
        }
    }

    fn spreading_s_r(sigma0: f64, t: f64) -> f64 {
        let var = sigma0 * sigma0 + t * t / (4.0 * sigma0 * sigma0);
        0.5 * (2.0 * PI * E * var).ln()
    }

    #[test]
    fn free_gaussian_spreads_as_closed_form() {
        let grid = GridSpec::centered(1, 1024, 40.0).unwrap();
        let psi = make_state(&StateSpec::gaussian(1, 1.0), &grid).unwrap();
        let snaps = evolve(&psi, &free(0.01, 200, 50)).unwrap();
        let series = entropy_series(&snaps).unwrap();
        let s_k0 = series.rows[0].report.s_k;
        for row in &series.rows {
            assert!((row.report.s_r - spreading_s_r(1.0, row.time)).abs() < 1e-4);
            assert!((row.report.s_k - s_k0).abs() < 1e-9);
            assert!(row.norm_residual < 1e-10);
        }
        let stats = series.monotonicity.unwrap();
        assert_eq!(stats.decreasing_steps, 0);
    }

    #[test]
    fn free_k_density_is_stationary() {
        let grid = GridSpec::centered(1, 512, 40.0).unwrap();
        let psi = make_state(&StateSpec::gaussian_1d(-1.0, 0.8, 1.5), &grid).unwrap();
        let snaps = evolve(&psi, &free(0.05, 20, 5)).unwrap();
        let k0: Vec<f64> = to_k_space(&psi)
            .unwrap()
            .amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .collect();
        for s in &snaps {
            let k: Vec<f64> = to_k_space(&s.state)
                .unwrap()
                .amplitudes
                .iter()
                .map(|a| a.norm_sqr())
                .collect();
            for (a, b) in k.iter().zip(&k0) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn halving_dt_is_consistent() {
        let grid = GridSpec::centered(1, 1024, 40.0).unwrap();
        let psi = make_state(&StateSpec::gaussian(1, 1.0), &grid).unwrap();
        let coarse = evolve(&psi, &free(0.02, 50, 50)).unwrap();
        let fine = evolve(&psi, &free(0.01, 100, 100)).unwrap();
        let a = continuous_entropy(&coarse.last().unwrap().state).unwrap();
        let b = continuous_entropy(&fine.last().unwrap().state).unwrap();
        assert!((a.s_r - b.s_r).abs() < 1e-6);
    }

    #[test]
    fn harmonic_coherent_state_keeps_minimum_entropy() {
        let grid = GridSpec::centered(1, 512, 40.0).unwrap();
        let sigma = (0.5f64).sqrt();
        let psi = make_state(&StateSpec::gaussian_1d(2.0, sigma, 0.0), &grid).unwrap();
        let spec = EvolutionSpec {
            potential: Potential::Harmonic { omega: 1.0 },
            dt: 0.01,
            steps: (2.0 * PI / 0.01).ceil() as usize,
            record_every: 20,
        };
        let series = entropy_series(&evolve(&psi, &spec).unwrap()).unwrap();
        for row in &series.rows {
            assert!((row.report.s_total - (1.0 + PI.ln())).abs() < 1e-4);
        }
    }

    #[test]
    fn wraparound_aborts() {
        let grid = GridSpec::centered(1, 256, 20.0).unwrap();
        let psi = make_state(&StateSpec::gaussian_1d(0.0, 0.5, 0.0), &grid).unwrap();
        let err = evolve(&psi, &free(0.05, 400, 10)).unwrap_err();
        assert!(matches!(err, QpseError::EdgeMassExceeded { .. }));
    }

    #[test]
    fn single_snapshot_series() {
        let grid = GridSpec::centered(1, 256, 40.0).unwrap();
        let psi = make_state(&StateSpec::gaussian(1, 1.0), &grid).unwrap();
        let series = entropy_series(&evolve(&psi, &free(0.1, 0, 1)).unwrap()).unwrap();
        assert_eq!(series.rows.len(), 1);
        assert!(series.monotonicity.is_none());
    }

    #[test]
    fn spec_validation() {
        assert!(free(0.0, 1, 1).validate().is_err());
        assert!(free(0.1, 1, 0).validate().is_err());
        let h = EvolutionSpec {
            potential: Potential::Harmonic { omega: 2.0 },
            dt: 0.06,
            steps: 1,
            record_every: 1,
        };
        assert!(h.validate().is_err());
    }
}
