//! Exact eigenbasis of the cell-centered 3-point Laplacian.
//!
//! With zero-Neumann ghosts the eigenvectors are `cos(pi k (i + 1/2) / n)`,
//! with odd (Dirichlet) ghosts `sin(pi (k + 1) (i + 1/2) / n)`. Both are
//! applied as dense orthonormal matrices along each axis, which is cheap at
//! the grid sizes in use and needs no FFT.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{BoundaryKind, Grid};

struct Axis {
    /// Row `k` holds eigenvector `k`, orthonormal.
    basis: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl Axis {
    fn new(n: usize, h: f64, dirichlet: bool) -> Self {
        let pi = core::f64::consts::PI;
        let mut basis = vec![0.0; n * n];
        let mut eigenvalues = vec![0.0; n];
        for k in 0..n {
            let m = if dirichlet { k + 1 } else { k } as f64;
            let row = &mut basis[k * n..(k + 1) * n];
            for (i, b) in row.iter_mut().enumerate() {
                let arg = pi * m * (i as f64 + 0.5) / n as f64;
                *b = if dirichlet { libm::sin(arg) } else { libm::cos(arg) };
            }
            let norm = libm::sqrt(row.iter().map(|b| b * b).sum::<f64>());
            row.iter_mut().for_each(|b| *b /= norm);
            let s = libm::sin(pi * m / (2.0 * n as f64));
            eigenvalues[k] = -4.0 * s * s / (h * h);
        }
        Self { basis, eigenvalues }
    }
}

pub(crate) struct Eigenbasis {
    nx: usize,
    ny: usize,
    x: Axis,
    y: Axis,
}

impl Eigenbasis {
    pub fn new(g: &Grid, boundary: BoundaryKind) -> Self {
        let dirichlet = boundary == BoundaryKind::DirichletZero;
        Self {
            nx: g.nx(),
            ny: g.ny(),
            x: Axis::new(g.nx(), g.hx(), dirichlet),
            y: Axis::new(g.ny(), g.hy(), dirichlet),
        }
    }

    /// Laplacian eigenvalue of mode `(kx, ky)`.
    pub fn eigenvalue(&self, kx: usize, ky: usize) -> f64 {
        self.x.eigenvalues[kx] + self.y.eigenvalues[ky]
    }

    /// Coefficients in the eigenbasis; `transpose` applies the inverse.
    fn transform(&self, input: &[f64], out: &mut [f64], transpose: bool) {
        let (nx, ny) = (self.nx, self.ny);
        let mut tmp = vec![0.0; nx * ny];
        let (bx, by) = (&self.x.basis, &self.y.basis);
        for j in 0..ny {
            let src = &input[j * nx..(j + 1) * nx];
            for k in 0..nx {
                let mut acc = 0.0;
                for (i, s) in src.iter().enumerate() {
                    acc += s * if transpose { bx[i * nx + k] } else { bx[k * nx + i] };
                }
                tmp[j * nx + k] = acc;
            }
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        for l in 0..ny {
            for j in 0..ny {
                let w = if transpose { by[j * ny + l] } else { by[l * ny + j] };
                if w == 0.0 {
                    continue;
                }
                let (dst, src) = (&mut out[l * nx..(l + 1) * nx], &tmp[j * nx..(j + 1) * nx]);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }

    /// `out = V diag(1 / symbol(lambda)) V^T r`; modes with a zero symbol are dropped.
    pub fn solve_diagonal(&self, symbol: impl Fn(f64) -> f64, r: &[f64], out: &mut [f64]) {
        let mut coef = vec![0.0; r.len()];
        self.transform(r, &mut coef, false);
        for ky in 0..self.ny {
            for kx in 0..self.nx {
                let s = symbol(self.eigenvalue(kx, ky));
                let c = &mut coef[ky * self.nx + kx];
                *c = if s != 0.0 { *c / s } else { 0.0 };
            }
        }
        self.transform(&coef, out, true);
    }

    #[cfg(test)]
    fn mode(&self, kx: usize, ky: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.nx * self.ny];
        for j in 0..self.ny {
            for i in 0..self.nx {
                out[j * self.nx + i] = self.x.basis[kx * self.nx + i] * self.y.basis[ky * self.ny + j];
            }
        }
        out
    }
}
