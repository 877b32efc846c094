//! Stabilized linearly implicit Cahn-Hilliard step.
//!
//! With `delta = phi' - phi`, the scheme
//!
//! ```text
//! rho (phi' - phi) / dt + rho u.grad(phi) = lap(mu')
//! rho mu' = -lap(phi') + rho (psi'(phi) + S (phi' - phi))
//! ```
//!
//! reduces, after eliminating `mu'`, to the symmetric positive definite
//! problem
//!
//! ```text
//! (rho/dt) delta + lap(lap(delta) / rho) - S lap(delta) = lap(mu_hat) - rho u.grad(phi)
//! ```
//!
//! where `mu_hat` is the chemical potential of the old state. Both `phi'` and
//! `mu'` carry zero-Neumann ghosts.

use alloc::vec;
use alloc::vec::Vec;

use crate::elliptic::{self, CgOptions, LinearOperator, SolveReport, SpectralModel};
use crate::grid::{self, dot, BoundaryKind, Grid, ScalarField, VectorField};
use crate::materials::psi_prime;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChParams {
    /// Stabilization constant `S >= 0`.
    pub stabilization: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ChParams {
    fn default() -> Self {
        Self {
            stabilization: 2.0,
            tol: 1e-9,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChOutcome {
    pub phi: ScalarField,
    pub mu: ScalarField,
    pub report: SolveReport,
}

pub(crate) fn check_density(rho: &ScalarField) -> Result<()> {
    match rho.values().iter().position(|&r| !(r > 0.0 && r.is_finite())) {
        Some(index) => Err(Error::NonPositiveDensity {
            index,
            value: rho.values()[index],
        }),
        None => Ok(()),
    }
}

fn check_phase(phi: &ScalarField) -> Result<()> {
    match phi.boundary() {
        BoundaryKind::NeumannZero => Ok(()),
        BoundaryKind::None => Err(Error::BoundaryUnset { op: "cahn_hilliard" }),
        BoundaryKind::DirichletZero => Err(Error::InvalidArgument(
            "phase field needs zero-Neumann ghosting",
        )),
    }
}

/// Pointwise solve of `rho mu = -lap(phi) + rho psi'(phi)`.
pub fn chemical_potential(rho: &ScalarField, phi: &ScalarField) -> Result<ScalarField> {
    grid::same_grid(rho.grid(), phi.grid())?;
    check_density(rho)?;
    check_phase(phi)?;
    let lap = grid::laplacian(phi)?;
    let mu: Vec<f64> = phi
        .values()
        .iter()
        .zip(lap.values())
        .zip(rho.values())
        .map(|((&p, &l), &r)| -l / r + psi_prime(p))
        .collect();
    grid::check_finite("chemical_potential", &mu)?;
    ScalarField::from_values(*phi.grid(), mu, BoundaryKind::NeumannZero)
}

/// `x -> (rho/dt) x + lap(lap(x)/rho) - S lap(x)` with zero-Neumann ghosts.
pub struct ChOperator {
    grid: Grid,
    rho: Vec<f64>,
    inv_rho: Vec<f64>,
    dt: f64,
    stabilization: f64,
}

impl ChOperator {
    pub fn new(rho: &ScalarField, dt: f64, stabilization: f64) -> Result<Self> {
        check_density(rho)?;
        if !(dt > 0.0) || !(stabilization >= 0.0) {
            return Err(Error::InvalidArgument("need dt > 0 and S >= 0"));
        }
        Ok(Self {
            grid: *rho.grid(),
            rho: rho.values().to_vec(),
            inv_rho: rho.values().iter().map(|r| 1.0 / r).collect(),
            dt,
            stabilization,
        })
    }
}

impl LinearOperator for ChOperator {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        let mut lap = vec![0.0; n];
        grid::laplacian_into(&self.grid, 1.0, x, &mut lap);
        let scaled: Vec<f64> = lap.iter().zip(&self.inv_rho).map(|(l, w)| l * w).collect();
        grid::laplacian_into(&self.grid, 1.0, &scaled, out);
        for k in 0..n {
            out[k] += self.rho[k] / self.dt * x[k] - self.stabilization * lap[k];
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let g = &self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let (ax, ay) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
        let mut d = vec![0.0; g.cells()];
        for j in 0..ny {
            for i in 0..nx {
                let mut self_coef = 0.0;
                let mut neighbours = 0.0;
                let mut visit = |ci: usize, cj: usize, a: f64| {
                    self_coef -= a;
                    neighbours += a * a * self.inv_rho[g.idx(ci, cj)];
                };
                if i > 0 {
                    visit(i - 1, j, ax);
                }
                if i + 1 < nx {
                    visit(i + 1, j, ax);
                }
                if j > 0 {
                    visit(i, j - 1, ay);
                }
                if j + 1 < ny {
                    visit(i, j + 1, ay);
                }
                let k = g.idx(i, j);
                d[k] = self.rho[k] / self.dt
                    + self.inv_rho[k] * self_coef * self_coef
                    + neighbours
                    - self.stabilization * self_coef;
            }
        }
        d
    }

    fn spectral_model(&self) -> Option<SpectralModel> {
        let n = self.rho.len() as f64;
        Some(SpectralModel {
            boundary: BoundaryKind::NeumannZero,
            constant: self.rho.iter().sum::<f64>() / n / self.dt,
            laplacian: -self.stabilization,
            bilaplacian: self.inv_rho.iter().sum::<f64>() / n,
        })
    }

    fn name(&self) -> &'static str {
        "cahn-hilliard"
    }
}

/// Advances `(phi, mu)` by one step with the density frozen at `rho`.
pub fn ch_step(
    rho: &ScalarField,
    u: &VectorField,
    phi: &ScalarField,
    dt: f64,
    params: &ChParams,
) -> Result<ChOutcome> {
    grid::same_grid(rho.grid(), phi.grid())?;
    grid::same_grid(rho.grid(), u.grid())?;
    check_density(rho)?;
    check_phase(phi)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("time step must be positive"));
    }
    if !(params.stabilization >= 0.0) {
        return Err(Error::InvalidArgument("stabilization must be non-negative"));
    }
    let g = *phi.grid();
    let n = g.cells();
    let r = rho.values();

    let mu_hat = chemical_potential(rho, phi)?;
    let lap_mu = grid::laplacian(&mu_hat)?;
    let adv = grid::advect_scalar(phi, u)?;
    let rhs: Vec<f64> = (0..n)
        .map(|k| lap_mu.values()[k] - r[k] * adv.values()[k])
        .collect();
    let rhs = ScalarField::from_values(g, rhs, BoundaryKind::NeumannZero)?;

    // accuracy is measured against the full right-hand side rho phi / dt
    let full: Vec<f64> = (0..n).map(|k| r[k] * phi.values()[k] / dt).collect();
    let opts = CgOptions {
        tol: params.tol,
        max_iter: params.max_iter,
        residual_floor: libm::sqrt(dot(&full, &full)),
    };
    let op = ChOperator::new(rho, dt, params.stabilization)?;
    let (delta, report) = elliptic::solve_cg_with(&op, &rhs, &opts)?;
    if !report.converged {
        return Err(Error::NotConverged {
            stage: "cahn_hilliard",
            iterations: report.iterations,
            residual: report.final_residual,
        });
    }

    // Constants only see the rho/dt term, so shifting delta by one fixes
    // sum(rho delta) to its exact value dt * sum(rhs) without touching the
    // fourth-order part.
    let mut delta = delta.into_values();
    let target = dt * rhs.sum();
    let shift = (dot(r, &delta) - target) / r.iter().sum::<f64>();
    delta.iter_mut().for_each(|d| *d -= shift);

    let mut lap_delta = vec![0.0; n];
    grid::laplacian_into(&g, 1.0, &delta, &mut lap_delta);
    let s = params.stabilization;
    let mut phi_next = Vec::with_capacity(n);
    let mut mu_next = Vec::with_capacity(n);
    for k in 0..n {
        phi_next.push(phi.values()[k] + delta[k]);
        mu_next.push(mu_hat.values()[k] - lap_delta[k] / r[k] + s * delta[k]);
    }
    grid::check_finite("ch_step", &phi_next)?;
    grid::check_finite("ch_step", &mu_next)?;
    Ok(ChOutcome {
        phi: ScalarField::from_values(g, phi_next, BoundaryKind::NeumannZero)?,
        mu: ScalarField::from_values(g, mu_next, BoundaryKind::NeumannZero)?,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::phase_energy;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bumpy_density(g: Grid) -> ScalarField {
        ScalarField::from_fn(g, BoundaryKind::NeumannZero, |x, y| {
            1.0 + 0.5 * (2.0 * PI * x).cos() * (PI * y).cos()
        })
    }

    #[test]
    fn constant_phase_potential() {
        let g = Grid::unit(16).unwrap();
        let rho = bumpy_density(g);
        for c in [-1.3, 0.0, 0.4, 1.0] {
            let phi = ScalarField::constant(g, c, BoundaryKind::NeumannZero);
            let mu = chemical_potential(&rho, &phi).unwrap();
            assert!(mu.values().iter().all(|&m| m == c * c * c - c));
        }
    }

    #[test]
    fn potential_rejects_bad_density() {
        let g = Grid::unit(8).unwrap();
        let mut rho = ScalarField::constant(g, 1.0, BoundaryKind::NeumannZero);
        rho.values_mut()[9] = 0.0;
        let phi = ScalarField::zeros(g, BoundaryKind::NeumannZero);
        assert!(matches!(
            chemical_potential(&rho, &phi),
            Err(Error::NonPositiveDensity { index: 9, .. })
        ));
    }

    #[test]
    fn manufactured_potential_converges_second_order() {
        let lx = 1.0;
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let g = Grid::unit(n).unwrap();
            let rho = ScalarField::constant(g, 1.0, BoundaryKind::NeumannZero);
            let phi = ScalarField::from_fn(g, BoundaryKind::NeumannZero, |x, _| (PI * x / lx).cos());
            let mu = chemical_potential(&rho, &phi).unwrap();
            let exact = ScalarField::from_fn(g, BoundaryKind::NeumannZero, |x, _| {
                let p = (PI * x / lx).cos();
                (PI / lx).powi(2) * p + p * p * p - p
            });
            let err = mu
                .values()
                .iter()
                .zip(exact.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.9);
        }
    }

    #[test]
    fn operator_is_symmetric_with_exact_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Grid::new(7, 6, 1.0, 0.9).unwrap();
        let rho = ScalarField::from_values(
            g,
            (0..g.cells()).map(|_| rng.gen_range(0.2..3.0)).collect(),
            BoundaryKind::NeumannZero,
        )
        .unwrap();
        let op = ChOperator::new(&rho, 1e-3, 2.0).unwrap();
        let n = g.cells();
        let d = op.diagonal();
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        let mut matrix = vec![0.0; n * n];
        for k in 0..n {
            e[k] = 1.0;
            op.apply(&e, &mut col);
            e[k] = 0.0;
            for m in 0..n {
                matrix[m * n + k] = col[m];
            }
            assert!((col[k] - d[k]).abs() <= 1e-10 * d[k]);
        }
        for a in 0..n {
            for b in 0..n {
                let (x, y) = (matrix[a * n + b], matrix[b * n + a]);
                assert!((x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1.0));
            }
        }
    }

    #[test]
    fn pure_phases_are_fixed_points() {
        let g = Grid::unit(16).unwrap();
        let rho = bumpy_density(g);
        let u = VectorField::zeros(g);
        for c in [1.0, -1.0, 0.0] {
            let phi = ScalarField::constant(g, c, BoundaryKind::NeumannZero);
            for dt in [1e-4, 1e-1, 10.0] {
                let out = ch_step(&rho, &u, &phi, dt, &ChParams::default()).unwrap();
                assert!(out.phi.values().iter().all(|&p| p == c));
                assert!(out.mu.values().iter().all(|&m| m == 0.0));
            }
        }
    }

    #[test]
    fn weighted_mass_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = Grid::unit(32).unwrap();
        let rho = bumpy_density(g);
        let u = VectorField::zeros(g);
        let mut phi = ScalarField::from_values(
            g,
            (0..g.cells()).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            BoundaryKind::NeumannZero,
        )
        .unwrap();
        let params = ChParams::default();
        let before = rho.dot(&phi);
        for _ in 0..5 {
            let prev = rho.dot(&phi);
            phi = ch_step(&rho, &u, &phi, 1e-3, &params).unwrap().phi;
            let now = rho.dot(&phi);
            assert!((now - prev).abs() <= 10.0 * params.tol * prev.abs());
        }
        assert!((rho.dot(&phi) - before).abs() <= 1e-12 * before.abs().max(1e-3));
    }

    #[test]
    fn free_energy_decreases_from_small_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = Grid::unit(32).unwrap();
        let rho = ScalarField::constant(g, 1.0, BoundaryKind::NeumannZero);
        let u = VectorField::zeros(g);
        for &dt in &[1e-4, 1e-3, 1e-2] {
            let mut phi = ScalarField::from_values(
                g,
                (0..g.cells()).map(|_| rng.gen_range(-0.05..0.05)).collect(),
                BoundaryKind::NeumannZero,
            )
            .unwrap();
            let params = ChParams::default();
            for _ in 0..10 {
                let e0 = phase_energy(&rho, &phi).unwrap();
                phi = ch_step(&rho, &u, &phi, dt, &params).unwrap().phi;
                let e1 = phase_energy(&rho, &phi).unwrap();
                assert!(e1 <= e0, "dt {dt}: {e1} > {e0}");
            }
        }
    }

    #[test]
    fn returned_potential_is_consistent() {
        let g = Grid::unit(32).unwrap();
        let rho = bumpy_density(g);
        let u = VectorField::zeros(g);
        let phi = ScalarField::from_fn(g, BoundaryKind::NeumannZero, |x, y| {
            0.6 * (PI * x).cos() * (PI * y).cos()
        });
        let params = ChParams::default();
        let mut gaps = Vec::new();
        for dt in [1e-5, 5e-6, 2.5e-6] {
            let out = ch_step(&rho, &u, &phi, dt, &params).unwrap();
            let mu = chemical_potential(&rho, &out.phi).unwrap();
            let gap = mu
                .values()
                .iter()
                .zip(out.mu.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            gaps.push(gap);
        }
        // O(S dt): halving dt roughly halves the gap
        for w in gaps.windows(2) {
            assert!(w[1] < 0.6 * w[0], "{gaps:?}");
        }
    }
}
