//! Initial fields built from the configured profiles.

use std::f64::consts::PI;

use nsch_core::coupled;
use nsch_core::diagnostics::{self, DiagRecord};
use nsch_core::momentum::SolverSettings;
use nsch_core::{BoundaryKind, Grid, ScalarField, State, VectorField, ViscosityLaw};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Axis, Config, ScalarProfile, VelocityProfile};
use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Warn,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Warn => "warn",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Initial {
    pub state: State,
    pub record: DiagRecord,
    pub smallness: f64,
    /// `pass` when the smallness quantity is within the configured target.
    pub verdict: Verdict,
}

pub fn grid_of(config: &Config) -> SimResult<Grid> {
    let g = &config.grid;
    Grid::new(g.nx, g.ny, g.lx, g.ly).map_err(|e| SimError::invalid("grid", e.to_string()))
}

pub fn law_of(config: &Config) -> SimResult<ViscosityLaw> {
    ViscosityLaw::new(config.fluids.nu1, config.fluids.nu2)
        .map_err(|e| SimError::invalid("fluids", e.to_string()))
}

pub fn scalar_field(grid: Grid, profile: &ScalarProfile, rng: &mut ChaCha8Rng) -> ScalarField {
    let bc = BoundaryKind::NeumannZero;
    match *profile {
        ScalarProfile::Constant { value } => ScalarField::constant(grid, value, bc),
        ScalarProfile::Tanh {
            low,
            high,
            center,
            width,
            axis,
        } => ScalarField::from_fn(grid, bc, |x, y| {
            let s = match axis {
                Axis::X => x,
                Axis::Y => y,
            };
            low + (high - low) * 0.5 * (1.0 + ((s - center) / width).tanh())
        }),
        ScalarProfile::Random {
            mean,
            amplitude,
            modes,
        } => {
            let mut coefs = Vec::new();
            for ky in 0..=modes {
                for kx in 0..=modes {
                    if kx + ky > 0 {
                        coefs.push((kx as f64, ky as f64, rng.gen_range(-1.0..1.0)));
                    }
                }
            }
            let (lx, ly) = (grid.lx(), grid.ly());
            let pert = ScalarField::from_fn(grid, bc, |x, y| {
                coefs
                    .iter()
                    .map(|&(kx, ky, a)| a * (PI * kx * x / lx).cos() * (PI * ky * y / ly).cos())
                    .sum()
            });
            let peak = pert.max_abs();
            let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
            pert.map(|p| mean + scale * p)
        }
        ScalarProfile::Blob {
            inside,
            outside,
            cx,
            cy,
            radius,
            width,
        } => ScalarField::from_fn(grid, bc, |x, y| {
            let r = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
            outside + (inside - outside) * 0.5 * (1.0 - ((r - radius) / width).tanh())
        }),
    }
}

/// Face velocities before projection.
pub fn velocity_field(grid: Grid, profile: &VelocityProfile) -> VectorField {
    match *profile {
        VelocityProfile::Zero => VectorField::zeros(grid),
        VelocityProfile::TaylorGreen { amplitude, .. } => {
            let (lx, ly) = (grid.lx(), grid.ly());
            let (hx, hy) = (grid.hx(), grid.hy());
            let psi = |x: f64, y: f64| amplitude * (PI * x / lx).sin() * (PI * y / ly).sin();
            // differences of a node streamfunction are discretely divergence-free
            VectorField::from_fn(
                grid,
                |x, y| (psi(x, y + 0.5 * hy) - psi(x, y - 0.5 * hy)) / hy,
                |x, y| -(psi(x + 0.5 * hx, y) - psi(x - 0.5 * hx, y)) / hx,
            )
        }
    }
}

/// Instantiates the profiles, projects `u0`, derives `mu0` and evaluates
/// the smallness quantity against the configured target.
pub fn build_initial(config: &Config) -> SimResult<Initial> {
    let grid = grid_of(config)?;
    let law = law_of(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.scheme.seed);
    let rho = scalar_field(grid, &config.rho, &mut rng);
    let phi = scalar_field(grid, &config.phi, &mut rng);
    let u0 = velocity_field(grid, &config.velocity);
    let settings = SolverSettings {
        tol: config.scheme.projection_tol,
        max_iter: config.scheme.max_iter,
    };
    let numerical = |source| SimError::Numerical { step: 0, source };
    let mut state = coupled::initial_state(rho, phi, &u0, &settings).map_err(numerical)?;
    if let VelocityProfile::TaylorGreen {
        grad_norm: Some(target),
        ..
    } = config.velocity
    {
        let current = diagnostics::grad_u_l2(&state.u);
        if current > 0.0 {
            state.u.scale(target / current);
        }
    }
    let record = diagnostics::record(&state, &law, config.scheme.serrin_r, 0.0).map_err(numerical)?;
    let smallness = diagnostics::smallness_quantity(&state).map_err(numerical)?;
    let verdict = if smallness <= config.fluids.eps0 {
        Verdict::Pass
    } else {
        Verdict::Warn
    };
    Ok(Initial {
        state,
        record,
        smallness,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn config(text: &str) -> Config {
        Config::parse(Path::new("t.ini"), text).unwrap()
    }

    #[test]
    fn constant_small_data() {
        let eps = 0.03;
        let c = config(&format!(
            "[grid]\nnx = 8\nny = 8\n[rho]\nprofile = constant\nvalue = {eps}\n[fluids]\neps0 = 0.05\n"
        ));
        let init = build_initial(&c).unwrap();
        assert_eq!(init.smallness, eps);
        assert_eq!(init.verdict, Verdict::Pass);
        assert_eq!(init.record.energy, 0.0);

        let c = config(&format!("[rho]\nprofile = constant\nvalue = {eps}\n[fluids]\neps0 = 0.01\n"));
        assert_eq!(build_initial(&c).unwrap().verdict, Verdict::Warn);
    }

    #[test]
    fn tanh_interface_at_rest() {
        let c = config("[grid]\nnx = 32\nny = 16\n[phi]\nprofile = tanh\nwidth = 0.1\n");
        let init = build_initial(&c).unwrap();
        assert!(init.record.energy > 0.0);
        assert!(init.state.mu.max() - init.state.mu.min() > 1e-3);
        assert_eq!(init.record.divu_max, 0.0);
        let phi = &init.state.phi;
        assert!(phi.get(0, 5) < -0.99 && phi.get(31, 5) > 0.99);
    }

    #[test]
    fn random_profile_is_seeded() {
        let text = "[phi]\nprofile = random\namplitude = 0.1\n[scheme]\nseed = 11\n";
        let a = build_initial(&config(text)).unwrap().state;
        let b = build_initial(&config(text)).unwrap().state;
        assert_eq!(a.phi.values(), b.phi.values());
        assert!((a.phi.max_abs() - 1.1).abs() < 0.1 + 1e-12);
        let peak = a.phi.values().iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
        assert!((peak - 0.1).abs() < 1e-12);
        let c = build_initial(&config(&text.replace("11", "12"))).unwrap().state;
        assert_ne!(a.phi.values(), c.phi.values());
    }

    #[test]
    fn taylor_green_is_rescaled_and_solenoidal() {
        let c = config(
            "[grid]\nnx = 24\nny = 16\nlx = 1.5\n[velocity]\nprofile = taylor-green\ngrad_norm = 0.01\n",
        );
        let init = build_initial(&c).unwrap();
        assert!((diagnostics::grad_u_l2(&init.state.u) - 0.01).abs() < 1e-15);
        assert!(init.record.divu_max < 1e-12);
        assert!(init.state.u.has_no_slip());
    }
}
