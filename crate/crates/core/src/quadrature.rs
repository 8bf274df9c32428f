//! Symmetric quadrature rules on the reference triangle.
//!
//! Points are barycentric; weights are normalized to sum to one, so an
//! element integral is `area * sum(w_q * g(x_q))`.

/// A quadrature rule in barycentric coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    name: &'static str,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    degree: usize,
}

impl QuadRule {
    /// One-point centroid rule, exact for degree 1.
    pub fn centroid() -> Self {
        Self {
            name: "centroid",
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![1.0],
            degree: 1,
        }
    }

    /// Three edge midpoints, exact for degree 2.
    pub fn edge_midpoints() -> Self {
        Self {
            name: "edge-midpoint-3",
            points: vec![[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
            weights: vec![1.0 / 3.0; 3],
            degree: 2,
        }
    }

    /// Radon's seven-point rule, exact for degree 5.
    pub fn seven_point() -> Self {
        let s15 = 15f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let b1 = (9.0 + 2.0 * s15) / 21.0;
        let w1 = (155.0 - s15) / 1200.0;
        let a2 = (6.0 + s15) / 21.0;
        let b2 = (9.0 - 2.0 * s15) / 21.0;
        let w2 = (155.0 + s15) / 1200.0;
        Self {
            name: "radon-7",
            points: vec![
                [1.0 / 3.0; 3],
                [b1, a1, a1],
                [a1, b1, a1],
                [a1, a1, b1],
                [b2, a2, a2],
                [a2, b2, a2],
                [a2, a2, b2],
            ],
            weights: vec![9.0 / 40.0, w1, w1, w1, w2, w2, w2],
            degree: 5,
        }
    }

    /// Every rule this crate ships.
    pub fn all() -> Vec<QuadRule> {
        vec![Self::centroid(), Self::edge_midpoints(), Self::seven_point()]
    }

    /// Lowest-degree shipped rule exact to at least `degree`.
    pub fn with_degree(degree: usize) -> Option<QuadRule> {
        Self::all().into_iter().find(|r| r.degree >= degree)
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(barycentric point, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 3], f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn monomials_on_reference_triangle() {
        // reference triangle (0,0),(1,0),(0,1): x = l2, y = l3, area 1/2
        for rule in QuadRule::all() {
            assert!((rule.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(rule.weights().iter().all(|w| *w > 0.0));
            for a in 0..=rule.degree() as u32 {
                for b in 0..=(rule.degree() as u32 - a) {
                    let approx: f64 = 0.5
                        * rule.iter().map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32)).sum::<f64>();
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!(
                        ((approx - exact) / exact).abs() < 1e-13,
                        "{} fails on x^{a} y^{b}",
                        rule.name()
                    );
                }
            }
        }
    }

    #[test]
    fn degree_lookup() {
        assert_eq!(QuadRule::with_degree(2).unwrap().len(), 3);
        assert_eq!(QuadRule::with_degree(4).unwrap().degree(), 5);
        assert!(QuadRule::with_degree(6).is_none());
    }
}
