//! Monotone nonlinearities `d(x, u)`.
//!
//! The reaction term only has to be non-decreasing in `u`; it may be
//! non-Lipschitz (sign-power laws with exponent below one) and is never
//! regularized. [`Cut`] clamps a nonlinearity to its values at `±M`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::mesh::Point;

/// Closure type for spatially varying coefficients.
pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonlinearityError {
    #[error("scale must be positive and finite, got {0}")]
    Scale(f64),
    #[error("exponent must lie in (0, 1], got {0}")]
    Exponent(f64),
    #[error("weight must be non-negative and finite, got {0}")]
    Weight(f64),
    #[error("shift must be finite, got {0}")]
    Shift(f64),
    #[error("cut level must be positive and finite, got {0}")]
    CutLevel(f64),
}

/// Interval `[-rho, rho]` on which `d(x, .)` is Lipschitz with constant `lipschitz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzBand {
    pub rho: f64,
    pub lipschitz: f64,
}

/// Pointwise reaction term, non-decreasing in `u`.
pub trait Nonlinearity: Send + Sync {
    fn eval(&self, x: Point, u: f64) -> f64;

    /// Whether the constructor guarantees monotonicity.
    fn claims_monotone(&self) -> bool {
        true
    }

    /// Lipschitz band around zero, when the constructor knows one.
    fn lipschitz_band(&self) -> Option<LipschitzBand> {
        None
    }

    fn describe(&self) -> String;
}

impl<N: Nonlinearity + ?Sized> Nonlinearity for &N {
    fn eval(&self, x: Point, u: f64) -> f64 {
        (**self).eval(x, u)
    }
    fn claims_monotone(&self) -> bool {
        (**self).claims_monotone()
    }
    fn lipschitz_band(&self) -> Option<LipschitzBand> {
        (**self).lipschitz_band()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<N: Nonlinearity + ?Sized> Nonlinearity for Arc<N> {
    fn eval(&self, x: Point, u: f64) -> f64 {
        (**self).eval(x, u)
    }
    fn claims_monotone(&self) -> bool {
        (**self).claims_monotone()
    }
    fn lipschitz_band(&self) -> Option<LipschitzBand> {
        (**self).lipschitz_band()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<N: Nonlinearity + ?Sized> Nonlinearity for Box<N> {
    fn eval(&self, x: Point, u: f64) -> f64 {
        (**self).eval(x, u)
    }
    fn claims_monotone(&self) -> bool {
        (**self).claims_monotone()
    }
    fn lipschitz_band(&self) -> Option<LipschitzBand> {
        (**self).lipschitz_band()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// `sgn(t) |t|^s` with `sgn(0) = 0`.
pub fn signed_power(t: f64, s: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if s == 1.0 {
        t
    } else if s == 0.5 {
        t.signum() * t.abs().sqrt()
    } else if s == 1.0 / 3.0 {
        t.cbrt()
    } else {
        t.signum() * t.abs().powf(s)
    }
}

/// A coefficient that is either constant or a spatial field.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Field(ScalarField),
}

impl Coefficient {
    pub fn at(&self, x: Point) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f(x),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "{c}"),
            Coefficient::Field(_) => f.write_str("<field>"),
        }
    }
}

/// `d(x, u) = weight(x) * scale * sgn(u - shift(x)) |u - shift(x)|^exponent`.
#[derive(Clone, Debug)]
pub struct PowerLaw {
    weight: Coefficient,
    shift: Coefficient,
    scale: f64,
    exponent: f64,
}

impl PowerLaw {
    /// Unit weight, zero shift.
    pub fn new(scale: f64, exponent: f64) -> Result<Self, NonlinearityError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(NonlinearityError::Scale(scale));
        }
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(NonlinearityError::Exponent(exponent));
        }
        Ok(Self { weight: Coefficient::Constant(1.0), shift: Coefficient::Constant(0.0), scale, exponent })
    }

    pub fn with_weight(mut self, weight: f64) -> Result<Self, NonlinearityError> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(NonlinearityError::Weight(weight));
        }
        self.weight = Coefficient::Constant(weight);
        Ok(self)
    }

    /// The field must be non-negative for the result to be monotone; this is
    /// not checked.
    pub fn with_weight_field(mut self, weight: ScalarField) -> Self {
        self.weight = Coefficient::Field(weight);
        self
    }

    pub fn with_shift(mut self, shift: f64) -> Result<Self, NonlinearityError> {
        if !shift.is_finite() {
            return Err(NonlinearityError::Shift(shift));
        }
        self.shift = Coefficient::Constant(shift);
        Ok(self)
    }

    pub fn with_shift_field(mut self, shift: ScalarField) -> Self {
        self.shift = Coefficient::Field(shift);
        self
    }

    /// `50 sgn(u + 1) |u + 1|^(1/3)`: the cube-root benchmark reaction term.
    pub fn cube_root_benchmark() -> Self {
        Self::new(50.0, 1.0 / 3.0).and_then(|p| p.with_shift(-1.0)).expect("valid constants")
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn weight(&self) -> &Coefficient {
        &self.weight
    }

    pub fn shift(&self) -> &Coefficient {
        &self.shift
    }
}

impl Nonlinearity for PowerLaw {
    fn eval(&self, x: Point, u: f64) -> f64 {
        let w = self.weight.at(x);
        if w == 0.0 {
            return 0.0;
        }
        w * self.scale * signed_power(u - self.shift.at(x), self.exponent)
    }

    fn lipschitz_band(&self) -> Option<LipschitzBand> {
        let Coefficient::Constant(w) = self.weight else { return None };
        let lip_global = w * self.scale;
        if self.exponent == 1.0 {
            return Some(LipschitzBand { rho: f64::INFINITY, lipschitz: lip_global });
        }
        let Coefficient::Constant(psi) = self.shift else { return None };
        if psi == 0.0 {
            return None;
        }
        // |u| <= |psi|/2 keeps u - psi at least |psi|/2 away from the kink
        let rho = 0.5 * psi.abs();
        Some(LipschitzBand { rho, lipschitz: lip_global * self.exponent * rho.powf(self.exponent - 1.0) })
    }

    fn describe(&self) -> String {
        format!(
            "power_law(weight={:?}, scale={}, exponent={}, shift={:?})",
            self.weight, self.scale, self.exponent, self.shift
        )
    }
}

/// Wraps a closure `(x, u) -> d`.
pub struct FnNonlinearity<F> {
    f: F,
    name: String,
    monotone: bool,
}

impl<F: Fn(Point, f64) -> f64 + Send + Sync> FnNonlinearity<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { f, name: name.into(), monotone: true }
    }

    /// Marks the closure as not known to be monotone.
    pub fn unchecked(mut self) -> Self {
        self.monotone = false;
        self
    }
}

impl<F: Fn(Point, f64) -> f64 + Send + Sync> Nonlinearity for FnNonlinearity<F> {
    fn eval(&self, x: Point, u: f64) -> f64 {
        (self.f)(x, u)
    }
    fn claims_monotone(&self) -> bool {
        self.monotone
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// The zero nonlinearity.
#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl Nonlinearity for Zero {
    fn eval(&self, _x: Point, _u: f64) -> f64 {
        0.0
    }
    fn lipschitz_band(&self) -> Option<LipschitzBand> {
        Some(LipschitzBand { rho: f64::INFINITY, lipschitz: 0.0 })
    }
    fn describe(&self) -> String {
        "zero".into()
    }
}

/// `d` clamped to `d(x, -M)` below `-M` and `d(x, M)` above `M`.
#[derive(Debug, Clone)]
pub struct Cut<D> {
    inner: D,
    level: f64,
}

/// Cut nonlinearity `d_M`.
pub fn cut<D: Nonlinearity>(d: D, level: f64) -> Result<Cut<D>, NonlinearityError> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(NonlinearityError::CutLevel(level));
    }
    Ok(Cut { inner: d, level })
}

impl<D> Cut<D> {
    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn inner(&self) -> &D {
        &self.inner
    }
}

impl<D: Nonlinearity> Nonlinearity for Cut<D> {
    fn eval(&self, x: Point, u: f64) -> f64 {
        self.inner.eval(x, u.clamp(-self.level, self.level))
    }
    fn claims_monotone(&self) -> bool {
        self.inner.claims_monotone()
    }
    fn lipschitz_band(&self) -> Option<LipschitzBand> {
        self.inner.lipschitz_band()
    }
    fn describe(&self) -> String {
        format!("cut({}, M={})", self.inner.describe(), self.level)
    }
}

/// First monotonicity or finiteness violation found by [`check_monotone`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Decreasing { x: Point, u_lo: f64, u_hi: f64, d_lo: f64, d_hi: f64 },
    NonFinite { x: Point, u: f64, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport {
    pub evaluations: usize,
    pub violation: Option<Violation>,
}

impl MonotoneReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Samples `d(x, .)` at `n` equispaced values of `u_range` for every point
/// and reports the first pair with `d(x, u_i) > d(x, u_{i+1}) + 1e-12`.
pub fn check_monotone<D: Nonlinearity + ?Sized>(
    d: &D,
    points: &[Point],
    u_range: (f64, f64),
    n: usize,
) -> MonotoneReport {
    assert!(n >= 2, "need at least two samples");
    let (lo, hi) = u_range;
    let us: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let mut evaluations = 0;
    for &x in points {
        let mut prev: Option<(f64, f64)> = None;
        for &u in &us {
            let v = d.eval(x, u);
            evaluations += 1;
            if !v.is_finite() {
                return MonotoneReport { evaluations, violation: Some(Violation::NonFinite { x, u, value: v }) };
            }
            if let Some((u_lo, d_lo)) = prev {
                if d_lo > v + 1e-12 {
                    return MonotoneReport {
                        evaluations,
                        violation: Some(Violation::Decreasing { x, u_lo, u_hi: u, d_lo, d_hi: v }),
                    };
                }
            }
            prev = Some((u, v));
        }
    }
    MonotoneReport { evaluations, violation: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const X: Point = [0.3, 0.4];

    fn grid() -> Vec<Point> {
        vec![[0.0, 0.0], [0.5, 0.5], [1.0, 0.25]]
    }

    #[test]
    fn benchmark_values() {
        let d = PowerLaw::cube_root_benchmark();
        assert_eq!(d.eval(X, 0.0), 50.0);
        assert_eq!(d.eval(X, -1.0), 0.0);
        assert!((d.eval(X, 7.0) - 100.0).abs() < 1e-12);
        assert!((d.eval(X, -9.0) + 100.0).abs() < 1e-12);
    }

    #[test]
    fn cut_branches() {
        let id = FnNonlinearity::new("u", |_, u| u);
        let c = cut(&id, 1.0).unwrap();
        assert_eq!(c.eval(X, 2.0), 1.0);
        assert_eq!(c.eval(X, -0.25), -0.25);
        let cube = FnNonlinearity::new("u^3", |_, u: f64| u.powi(3));
        assert_eq!(cut(cube, 2.0).unwrap().eval(X, -5.0), -8.0);
        assert!(cut(Zero, 0.0).is_err());
    }

    #[test]
    fn monotone_reports() {
        let p = PowerLaw::new(2.0, 0.5).unwrap().with_weight(3.0).unwrap().with_shift(0.2).unwrap();
        assert!(check_monotone(&p, &grid(), (-3.0, 3.0), 101).passed());
        let neg = FnNonlinearity::new("-u", |_, u| -u).unchecked();
        let rep = check_monotone(&neg, &grid(), (-1.0, 1.0), 5);
        match rep.violation {
            Some(Violation::Decreasing { u_lo, u_hi, d_lo, d_hi, .. }) => {
                assert!(u_lo < u_hi && d_lo > d_hi);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
        assert!(check_monotone(&cut(p, 0.5).unwrap(), &grid(), (-3.0, 3.0), 101).passed());
        let blowup = FnNonlinearity::new("1/u", |_, u| 1.0 / u);
        assert!(matches!(
            check_monotone(&blowup, &[X], (0.0, 1.0), 3).violation,
            Some(Violation::NonFinite { .. })
        ));
    }

    #[test]
    fn constructor_validation() {
        assert!(PowerLaw::new(0.0, 0.5).is_err());
        assert!(PowerLaw::new(1.0, 1.5).is_err());
        assert!(PowerLaw::new(1.0, 0.0).is_err());
        assert!(PowerLaw::new(1.0, 1.0).unwrap().with_weight(-1.0).is_err());
        let zero = PowerLaw::new(1.0, 1.0).unwrap().with_weight(0.0).unwrap();
        assert_eq!(zero.eval(X, 123.0), 0.0);
    }

    #[test]
    fn lipschitz_metadata() {
        let lin = PowerLaw::new(3.0, 1.0).unwrap().with_weight(2.0).unwrap();
        assert_eq!(lin.lipschitz_band().unwrap().lipschitz, 6.0);
        let shifted = PowerLaw::new(1.0, 0.5).unwrap().with_shift(4.0).unwrap();
        let band = shifted.lipschitz_band().unwrap();
        assert_eq!(band.rho, 2.0);
        // derivative of sqrt at distance 2 from the kink
        assert!((band.lipschitz - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert!(PowerLaw::new(1.0, 0.5).unwrap().lipschitz_band().is_none());
    }

    proptest! {
        #[test]
        fn power_law_monotone(s in 0.05f64..=1.0, c in 0.1f64..100.0, psi in -2.0f64..2.0,
                              a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let d = PowerLaw::new(c, s).unwrap().with_shift(psi).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(d.eval(X, lo) <= d.eval(X, hi));
        }

        #[test]
        fn power_law_odd_about_shift(s in 0.05f64..=1.0, j in -2048i32..2048, k in 0i32..5120) {
            // dyadic grid keeps psi +- t exact
            let (psi, t) = (f64::from(j) / 1024.0, f64::from(k) / 1024.0);
            let d = PowerLaw::new(50.0, s).unwrap().with_shift(psi).unwrap();
            let sum = d.eval(X, psi + t) + d.eval(X, psi - t);
            prop_assert!(sum.abs() <= 1e-13 * d.eval(X, psi + t).abs().max(1.0));
        }

        #[test]
        fn cut_agrees_inside_constant_outside(m in 0.1f64..5.0, u in -10.0f64..10.0) {
            let d = PowerLaw::new(2.0, 0.3).unwrap().with_shift(0.1).unwrap();
            let c = cut(&d, m).unwrap();
            if u.abs() <= m {
                prop_assert_eq!(c.eval(X, u), d.eval(X, u));
            } else if u > m {
                prop_assert_eq!(c.eval(X, u), d.eval(X, m));
            } else {
                prop_assert_eq!(c.eval(X, u), d.eval(X, -m));
            }
        }
    }
}
