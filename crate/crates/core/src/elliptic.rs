//! Preconditioned conjugate gradients for the symmetric elliptic problems
//! of the projection and Cahn-Hilliard steps.
//!
//! An operator may describe a constant-coefficient model of itself, which
//! is then inverted exactly in the Laplacian eigenbasis and used as the
//! preconditioner; otherwise the diagonal is used.
//!
//! The iterates are passed through minimal residual smoothing, so the
//! recorded residual norms never increase and the returned solution is the
//! smoothed iterate.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{self, dot, BoundaryKind, Grid, ScalarField, VectorField};
use crate::spectral::Eigenbasis;
use crate::{Error, Result};

/// `x -> constant x + laplacian lap(x) + bilaplacian lap(lap(x))` with the
/// given ghosts, standing in for a variable-coefficient operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralModel {
    pub boundary: BoundaryKind,
    pub constant: f64,
    pub laplacian: f64,
    pub bilaplacian: f64,
}

impl SpectralModel {
    fn symbol(&self, lambda: f64) -> f64 {
        self.constant + self.laplacian * lambda + self.bilaplacian * lambda * lambda
    }
}

enum Preconditioner {
    Jacobi(Vec<f64>),
    Spectral(Eigenbasis, SpectralModel, f64),
}

impl Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Jacobi(inv) => {
                for k in 0..r.len() {
                    z[k] = r[k] * inv[k];
                }
            }
            Preconditioner::Spectral(basis, model, sign) => {
                basis.solve_diagonal(|l| sign * model.symbol(l), r, z);
            }
        }
    }
}

/// A symmetric semi-definite operator on cell-centered values.
pub trait LinearOperator {
    fn grid(&self) -> &Grid;

    fn apply(&self, x: &[f64], out: &mut [f64]);

    /// Diagonal of `apply`, used for Jacobi preconditioning.
    fn diagonal(&self) -> Vec<f64>;

    fn spectral_model(&self) -> Option<SpectralModel> {
        None
    }

    /// Constants span the null space (pure-Neumann problems).
    fn constant_null_space(&self) -> bool {
        false
    }

    /// `true` for negative semi-definite operators; the solver then works
    /// with `-A`.
    fn is_negative(&self) -> bool {
        false
    }

    fn name(&self) -> &'static str;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||b - A x|| / max(||b||, residual_floor)` of the returned solution.
    pub final_residual: f64,
    pub converged: bool,
    /// Smoothed residual norms, relative, one per iteration plus the start.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Lower bound on the norm the residual is measured against. Lets a
    /// caller solving for a small correction measure accuracy against the
    /// full right-hand side rather than the correction.
    pub residual_floor: f64,
}

impl CgOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            residual_floor: 0.0,
        }
    }
}

/// Solves `A x = b` to relative tolerance `tol`.
pub fn solve_cg(
    op: &dyn LinearOperator,
    b: &ScalarField,
    tol: f64,
    max_iter: usize,
) -> Result<(ScalarField, SolveReport)> {
    solve_cg_with(op, b, &CgOptions::new(tol, max_iter))
}

pub fn solve_cg_with(
    op: &dyn LinearOperator,
    b: &ScalarField,
    opts: &CgOptions,
) -> Result<(ScalarField, SolveReport)> {
    let g = *op.grid();
    grid::same_grid(&g, b.grid())?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("solver tolerance must be positive"));
    }
    let n = g.cells();
    let name = op.name();
    let sign = if op.is_negative() { -1.0 } else { 1.0 };

    let mut rhs: Vec<f64> = b.values().iter().map(|&x| sign * x).collect();
    if op.constant_null_space() {
        remove_mean(&mut rhs);
    }

    let apply = |x: &[f64], out: &mut [f64]| {
        op.apply(x, out);
        if sign < 0.0 {
            out.iter_mut().for_each(|y| *y = -*y);
        }
    };
    let precond = match op.spectral_model() {
        Some(model) => Preconditioner::Spectral(Eigenbasis::new(&g, model.boundary), model, sign),
        None => Preconditioner::Jacobi(
            op.diagonal()
                .into_iter()
                .map(|d| {
                    let d = sign * d;
                    if d > 0.0 {
                        1.0 / d
                    } else {
                        1.0
                    }
                })
                .collect(),
        ),
    };

    let b_norm = libm::sqrt(dot(&rhs, &rhs));
    let scale = b_norm.max(opts.residual_floor);
    let out_field = |mut x: Vec<f64>| {
        if op.constant_null_space() {
            remove_mean(&mut x);
        }
        ScalarField::from_values(g, x, b.boundary())
    };
    if scale == 0.0 || b_norm <= opts.tol * scale {
        let report = SolveReport {
            iterations: 0,
            final_residual: if scale == 0.0 { 0.0 } else { b_norm / scale },
            converged: true,
            history: vec![if scale == 0.0 { 0.0 } else { b_norm / scale }],
        };
        return Ok((out_field(vec![0.0; n])?, report));
    }

    let mut x = vec![0.0; n];
    let mut r = rhs.clone();
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    // smoothed iterate and residual
    let mut y = x.clone();
    let mut s = r.clone();
    let mut s_norm = b_norm;
    let mut history = vec![s_norm / scale];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() || !rz.is_finite() {
            return Err(Error::SolverDiverged {
                operator: name,
                iteration: iterations,
            });
        }
        if pap <= 0.0 {
            // Krylov space exhausted (or operator not definite on it)
            break;
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }

        let mut sd = 0.0;
        let mut dd = 0.0;
        for k in 0..n {
            let d = r[k] - s[k];
            sd += s[k] * d;
            dd += d * d;
        }
        if dd > 0.0 {
            let eta = -sd / dd;
            for k in 0..n {
                s[k] += eta * (r[k] - s[k]);
                y[k] += eta * (x[k] - y[k]);
            }
            s_norm = libm::sqrt(dot(&s, &s));
        }
        if !s_norm.is_finite() {
            return Err(Error::SolverDiverged {
                operator: name,
                iteration: iterations,
            });
        }
        history.push(s_norm / scale);

        if s_norm <= opts.tol * scale {
            let true_res = residual_norm(&apply, &rhs, &y);
            if true_res <= opts.tol * scale {
                converged = true;
                break;
            }
        }

        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }

    let final_residual = residual_norm(&apply, &rhs, &y) / scale;
    if !final_residual.is_finite() {
        return Err(Error::SolverDiverged {
            operator: name,
            iteration: iterations,
        });
    }
    let converged = converged || final_residual <= opts.tol;
    let report = SolveReport {
        iterations,
        final_residual,
        converged,
        history,
    };
    Ok((out_field(y)?, report))
}

fn residual_norm(apply: &dyn Fn(&[f64], &mut [f64]), rhs: &[f64], x: &[f64]) -> f64 {
    let mut ax = vec![0.0; x.len()];
    apply(x, &mut ax);
    libm::sqrt(rhs.iter().zip(&ax).map(|(b, a)| (b - a) * (b - a)).sum())
}

fn remove_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// `f -> div(coef * grad f)`.
#[derive(Debug, Clone)]
pub struct VariablePoisson {
    grid: Grid,
    coef: VectorField,
    boundary: BoundaryKind,
    sign: f64,
    scratch_len: (usize, usize),
}

pub fn make_variable_poisson(coef: VectorField, boundary: BoundaryKind) -> Result<VariablePoisson> {
    let g = *coef.grid();
    let sign = match boundary {
        BoundaryKind::NeumannZero => 1.0,
        BoundaryKind::DirichletZero => -1.0,
        BoundaryKind::None => return Err(Error::BoundaryUnset { op: "make_variable_poisson" }),
    };
    for j in 0..g.ny() {
        for i in 0..=g.nx() {
            let c = coef.get_u(i, j);
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::NonPositiveCoefficient {
                    component: 'u',
                    i,
                    j,
                    value: c,
                });
            }
        }
    }
    for j in 0..=g.ny() {
        for i in 0..g.nx() {
            let c = coef.get_v(i, j);
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::NonPositiveCoefficient {
                    component: 'v',
                    i,
                    j,
                    value: c,
                });
            }
        }
    }
    Ok(VariablePoisson {
        grid: g,
        coef,
        boundary,
        sign,
        scratch_len: (g.u_faces(), g.v_faces()),
    })
}

impl VariablePoisson {
    pub fn boundary(&self) -> BoundaryKind {
        self.boundary
    }
}

impl LinearOperator for VariablePoisson {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut gu = vec![0.0; self.scratch_len.0];
        let mut gv = vec![0.0; self.scratch_len.1];
        grid::gradient_into(&self.grid, self.sign, x, &mut gu, &mut gv);
        gu.iter_mut().zip(self.coef.u()).for_each(|(g, c)| *g *= c);
        gv.iter_mut().zip(self.coef.v()).for_each(|(g, c)| *g *= c);
        grid::divergence_into(&self.grid, &gu, &gv, out);
    }

    fn diagonal(&self) -> Vec<f64> {
        let g = &self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let (ihx2, ihy2) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
        // a wall face contributes (1 - ghost sign) times its coefficient
        let wall = 1.0 - self.sign;
        let mut d = vec![0.0; g.cells()];
        for j in 0..ny {
            for i in 0..nx {
                let cl = self.coef.get_u(i, j) * if i == 0 { wall } else { 1.0 };
                let cr = self.coef.get_u(i + 1, j) * if i == nx - 1 { wall } else { 1.0 };
                let cb = self.coef.get_v(i, j) * if j == 0 { wall } else { 1.0 };
                let ct = self.coef.get_v(i, j + 1) * if j == ny - 1 { wall } else { 1.0 };
                d[g.idx(i, j)] = -((cl + cr) * ihx2 + (cb + ct) * ihy2);
            }
        }
        d
    }

    fn spectral_model(&self) -> Option<SpectralModel> {
        let total: f64 = self.coef.u().iter().chain(self.coef.v()).sum();
        let count = (self.coef.u().len() + self.coef.v().len()) as f64;
        Some(SpectralModel {
            boundary: self.boundary,
            constant: 0.0,
            laplacian: total / count,
            bilaplacian: 0.0,
        })
    }

    fn constant_null_space(&self) -> bool {
        self.boundary == BoundaryKind::NeumannZero
    }

    fn is_negative(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "variable-coefficient poisson"
    }
}
