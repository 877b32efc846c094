mod common;

use std::f64::consts::PI;

use nsch_core::momentum::korteweg_force;
use nsch_core::{BoundaryKind, Grid, ScalarField};

fn residual(n: usize) -> f64 {
    let g = Grid::new(n, n, 1.0, 1.0).unwrap();
    let phi = ScalarField::from_fn(g, BoundaryKind::NeumannZero, |x, y| {
        0.6 * (PI * x).cos() * (2.0 * PI * y).cos() + 0.3 * (3.0 * PI * y).cos()
    });
    let f = korteweg_force(&phi).unwrap();
    let (fx, fy) = common::capillary_potential_form(n, n, g.hx(), g.hy(), phi.values());
    f.u().iter().zip(&fx).chain(f.v().iter().zip(&fy)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn stress_and_potential_forms_agree_at_second_order() {
    let r: Vec<f64> = [32, 64, 128].iter().map(|&n| residual(n)).collect();
    for w in r.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "residuals {r:?}");
    }
}
