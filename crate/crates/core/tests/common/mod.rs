//! Test oracles written against plain arrays, independent of the library
//! stencils.

#![allow(dead_code)]

pub fn psi(s: f64) -> f64 {
    0.25 * (s * s - 1.0).powi(2)
}

pub fn psi_prime(s: f64) -> f64 {
    s * s * s - s
}

/// Cell array with mirrored ghosts.
pub struct Cells<'a> {
    pub nx: usize,
    pub ny: usize,
    pub v: &'a [f64],
}

impl Cells<'_> {
    pub fn at(&self, i: isize, j: isize) -> f64 {
        let ci = i.clamp(0, self.nx as isize - 1) as usize;
        let cj = j.clamp(0, self.ny as isize - 1) as usize;
        self.v[cj * self.nx + ci]
    }
}

/// Capillary force in the form `mu grad(phi) - grad(psi(phi)) - grad(|grad phi|^2 / 2)`
/// with `mu = -lap(phi) + psi'(phi)` and unit density, sampled on interior
/// faces (wall faces are zero). Returns `(fx, fy)` in face layout.
pub fn capillary_potential_form(nx: usize, ny: usize, hx: f64, hy: f64, phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let c = Cells { nx, ny, v: phi };
    let mut mu = vec![0.0; nx * ny];
    let mut half_sq = vec![0.0; nx * ny];
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            let p = c.at(i, j);
            let lap = (c.at(i + 1, j) - 2.0 * p + c.at(i - 1, j)) / (hx * hx)
                + (c.at(i, j + 1) - 2.0 * p + c.at(i, j - 1)) / (hy * hy);
            let k = j as usize * nx + i as usize;
            mu[k] = -lap + psi_prime(p);
            let gx = (c.at(i + 1, j) - c.at(i - 1, j)) / (2.0 * hx);
            let gy = (c.at(i, j + 1) - c.at(i, j - 1)) / (2.0 * hy);
            half_sq[k] = 0.5 * (gx * gx + gy * gy);
        }
    }
    let mut fx = vec![0.0; (nx + 1) * ny];
    let mut fy = vec![0.0; nx * (ny + 1)];
    for j in 0..ny {
        for i in 1..nx {
            let (l, r) = (j * nx + i - 1, j * nx + i);
            let grad = (phi[r] - phi[l]) / hx;
            fx[j * (nx + 1) + i] = 0.5 * (mu[l] + mu[r]) * grad
                - (psi(phi[r]) - psi(phi[l])) / hx
                - (half_sq[r] - half_sq[l]) / hx;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let (b, t) = ((j - 1) * nx + i, j * nx + i);
            let grad = (phi[t] - phi[b]) / hy;
            fy[j * nx + i] = 0.5 * (mu[b] + mu[t]) * grad
                - (psi(phi[t]) - psi(phi[b])) / hy
                - (half_sq[t] - half_sq[b]) / hy;
        }
    }
    (fx, fy)
}
