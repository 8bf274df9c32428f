use std::f64::consts::PI;

use crate::mesh::Point;
use crate::nonlinearity::Nonlinearity;

/// A smooth function with known gradient, used as a reference solution.
pub trait ExactSolution: Send + Sync {
    fn value(&self, x: Point) -> f64;
    fn gradient(&self, x: Point) -> [f64; 2];
}

/// `sin(πx) sin(πy)`, which vanishes on the boundary of the unit square.
#[derive(Debug, Clone, Copy, Default)]
pub struct SineProduct;

impl SineProduct {
    pub fn neg_laplacian(&self, x: Point) -> f64 {
        2.0 * PI * PI * self.value(x)
    }
}

impl ExactSolution for SineProduct {
    fn value(&self, x: Point) -> f64 {
        (PI * x[0]).sin() * (PI * x[1]).sin()
    }

    fn gradient(&self, x: Point) -> [f64; 2] {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        [PI * cx * sy, PI * sx * cy]
    }
}

/// Exact solution given by a pair of closures.
pub struct ExactFn<F, G> {
    value: F,
    gradient: G,
}

impl<F, G> ExactFn<F, G>
where
    F: Fn(Point) -> f64 + Send + Sync,
    G: Fn(Point) -> [f64; 2] + Send + Sync,
{
    pub fn new(value: F, gradient: G) -> Self {
        Self { value, gradient }
    }
}

impl<F, G> ExactSolution for ExactFn<F, G>
where
    F: Fn(Point) -> f64 + Send + Sync,
    G: Fn(Point) -> [f64; 2] + Send + Sync,
{
    fn value(&self, x: Point) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: Point) -> [f64; 2] {
        (self.gradient)(x)
    }
}

/// Right-hand side `f = 2π² u + d(x, u)` that makes [`SineProduct`] the
/// exact solution on the unit square.
pub fn sine_product_rhs<D: Nonlinearity + ?Sized>(d: &D, x: Point) -> f64 {
    let u = SineProduct.value(x);
    SineProduct.neg_laplacian(x) + d.eval(x, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 1e-6;
        for x in [[0.1, 0.2], [0.5, 0.5], [0.9, 0.33]] {
            let g = SineProduct.gradient(x);
            let gx = (SineProduct.value([x[0] + h, x[1]]) - SineProduct.value([x[0] - h, x[1]])) / (2.0 * h);
            let gy = (SineProduct.value([x[0], x[1] + h]) - SineProduct.value([x[0], x[1] - h])) / (2.0 * h);
            assert!((g[0] - gx).abs() < 1e-8 && (g[1] - gy).abs() < 1e-8);
        }
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let h = 1e-4;
        let x = [0.3, 0.7];
        let u = |p: Point| SineProduct.value(p);
        let lap = (u([x[0] + h, x[1]]) + u([x[0] - h, x[1]]) + u([x[0], x[1] + h]) + u([x[0], x[1] - h])
            - 4.0 * u(x))
            / (h * h);
        assert!((SineProduct.neg_laplacian(x) + lap).abs() < 1e-5);
    }
}
