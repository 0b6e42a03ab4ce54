//! Singular conformal metrics `lambda^2 dw dwbar` on the target plane of the
//! normal Gauss map, and the harmonic-map equations for `g`.
//!
//! * Kokubu metric, `lambda^2 = 1 / |1 - |w|^4|`, singular on `|w| = 1`; the
//!   target for `mu1 = mu2 != 0`.
//! * Sol metric, `lambda^2 = 1 / |w^2 - wbar^2|`, singular on the coordinate
//!   axes; the target for `mu1 = -mu2 != 0`.
//!
//! For `mu1^2 != mu2^2` the Gauss map equation is not a harmonic-map equation
//! for any metric of this form, and [`SingularMetric::for_params`] fails.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ambient::Params;
use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A point is on the singular set when the metric denominator has magnitude
/// below this times `1 + |w|^4`.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Kokubu,
    Sol,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularMetric {
    pub kind: MetricKind,
    pub singular_tol: f64,
}

impl SingularMetric {
    pub const fn kokubu() -> Self {
        SingularMetric {
            kind: MetricKind::Kokubu,
            singular_tol: DEFAULT_SINGULAR_TOL,
        }
    }

    pub const fn sol() -> Self {
        SingularMetric {
            kind: MetricKind::Sol,
            singular_tol: DEFAULT_SINGULAR_TOL,
        }
    }

    /// The target metric making the Gauss map equation of `G(mu1, mu2)` a
    /// harmonic-map equation.
    pub fn for_params(p: Params) -> Result<Self> {
        let scale = p.mu1.abs().max(p.mu2.abs());
        if scale == 0.0 || !p.is_finite() {
            return Err(Error::NoTargetMetric { mu1: p.mu1, mu2: p.mu2 });
        }
        if (p.mu1 - p.mu2).abs() <= 1e-12 * scale {
            Ok(Self::kokubu())
        } else if (p.mu1 + p.mu2).abs() <= 1e-12 * scale {
            Ok(Self::sol())
        } else {
            Err(Error::NoTargetMetric { mu1: p.mu1, mu2: p.mu2 })
        }
    }

    pub fn with_singular_tol(mut self, tol: f64) -> Self {
        self.singular_tol = tol;
        self
    }

    /// Signed denominator of `lambda^2`: `1 - |w|^4` or `(w^2 - wbar^2) / i = 4 Re(w) Im(w)`.
    fn denominator(&self, w: Complex64) -> f64 {
        match self.kind {
            MetricKind::Kokubu => 1.0 - w.norm_sqr() * w.norm_sqr(),
            MetricKind::Sol => 4.0 * w.re * w.im,
        }
    }

    fn check(&self, w: Complex64) -> Result<f64> {
        let d = self.denominator(w);
        let m2 = w.norm_sqr();
        if !(d.abs() >= self.singular_tol * (1.0 + m2 * m2)) {
            return Err(Error::OnSingularSet { re: w.re, im: w.im });
        }
        Ok(d)
    }

    /// Euclidean distance from `w` to the singular set.
    pub fn distance_to_singular_set(&self, w: Complex64) -> f64 {
        match self.kind {
            MetricKind::Kokubu => (w.norm() - 1.0).abs(),
            MetricKind::Sol => w.re.abs().min(w.im.abs()),
        }
    }

    pub fn lambda2(&self, w: Complex64) -> Result<f64> {
        Ok(1.0 / self.check(w)?.abs())
    }

    /// `Gamma^w_{ww} = d/dw log lambda^2`.
    pub fn christoffel(&self, w: Complex64) -> Result<Complex64> {
        self.check(w)?;
        Ok(self.christoffel_unchecked(w))
    }

    #[inline]
    pub(crate) fn christoffel_unchecked(&self, w: Complex64) -> Complex64 {
        match self.kind {
            MetricKind::Kokubu => {
                let m = w.norm_sqr();
                2.0 * m * w.conj() / (1.0 - m * m)
            }
            MetricKind::Sol => -2.0 * w / (w * w - w.conj() * w.conj()),
        }
    }

    /// Tension field `4 lambda^{-2} (g_{z zbar} + Gamma g_z g_zbar)` of a map at one jet.
    pub fn tension(&self, jet: &JetSample) -> Result<Complex64> {
        let l2 = self.lambda2(jet.g)?;
        let gamma = self.christoffel_unchecked(jet.g);
        Ok(4.0 / l2 * (jet.gzzbar + gamma * jet.gz * jet.gzbar))
    }

    /// Gaussian curvature of the metric at `w`, from finite differences of
    /// `log lambda` and from the closed form `-8|w|^2 / |denominator|`.
    pub fn gauss_curvature(&self, w: Complex64) -> Result<CurvatureSample> {
        let d = self.check(w)?;
        let closed_form = -8.0 * w.norm_sqr() / d.abs();
        // K = -(1/lambda^2) Laplacian(log lambda); the step stays well inside
        // the component of the complement of the singular set containing w.
        let dist = self.distance_to_singular_set(w);
        let h = (1e-3f64).min(dist / 8.0);
        let log_lambda = |x: f64, y: f64| -> Result<f64> { Ok(0.5 * self.lambda2(Complex64::new(x, y))?.ln()) };
        let (x, y) = (w.re, w.im);
        let d2 = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
            // fourth-order central second difference
            Ok((-f(2.0 * h)? + 16.0 * f(h)? - 30.0 * f(0.0)? + 16.0 * f(-h)? - f(-2.0 * h)?) / (12.0 * h * h))
        };
        let lxx = d2(&|s| log_lambda(x + s, y))?;
        let lyy = d2(&|s| log_lambda(x, y + s))?;
        let numeric = -(lxx + lyy) / self.lambda2(w)?;
        Ok(CurvatureSample { numeric, closed_form })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub numeric: f64,
    pub closed_form: f64,
}

impl CurvatureSample {
    pub fn relative_mismatch(&self) -> f64 {
        (self.numeric - self.closed_form).abs() / self.closed_form.abs().max(f64::MIN_POSITIVE)
    }
}

/// Pointwise 2-jet `(g, g_z, g_zbar, g_{z zbar})` of a map into the target plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JetSample {
    pub g: Complex64,
    pub gz: Complex64,
    pub gzbar: Complex64,
    pub gzzbar: Complex64,
}

impl JetSample {
    pub fn new(g: Complex64, gz: Complex64, gzbar: Complex64, gzzbar: Complex64) -> Self {
        JetSample { g, gz, gzbar, gzzbar }
    }

    pub fn constant(g: Complex64) -> Self {
        JetSample {
            g,
            ..Default::default()
        }
    }
}

/// Left-hand side of the Gauss map equation of `G(mu1, mu2)`, obtained by
/// eliminating `f` from the first-order system.
pub fn harm_general_residual(jet: &JetSample, p: Params) -> Result<Complex64> {
    let g = jet.g;
    let gb = g.conj();
    let (g2, gb2) = (g * g, gb * gb);
    let (m1, m2) = (p.mu1, p.mu2);
    let denom1 = m1 * (ONE + g2) * (ONE - gb2) + m2 * (ONE - g2) * (ONE + gb2);
    let one_minus_g4 = ONE - g2 * g2;
    let cross = (ONE + g2).powi(2) * (ONE - gb2).powi(2) + (ONE + gb2).powi(2) * (ONE - g2).powi(2);
    // cross is a sum of a number and its conjugate, hence real
    let denom2 = (m1 * m1 + m2 * m2) * one_minus_g4.norm_sqr() + m1 * m2 * cross.re;
    let scale = 1.0 + g.norm_sqr() * g.norm_sqr();
    let mscale = m1.abs().max(m2.abs()).max(f64::MIN_POSITIVE);
    if denom1.norm() <= 1e-14 * mscale * scale || denom2.abs() <= 1e-28 * mscale * mscale * scale * scale {
        return Err(Error::DegenerateDenominator);
    }
    let middle = 2.0 * g * (m1 * (ONE - gb2) - m2 * (ONE + gb2)) * jet.gz * jet.gzbar / denom1;
    let last = 4.0 * gb * one_minus_g4 * (m1 * m1 - m2 * m2) * jet.gzbar.norm_sqr() / denom2;
    Ok(jet.gzzbar - middle + last)
}

/// `g_{z zbar} + 2|g|^2 gbar / (1 - |g|^4) g_z g_zbar` (equation for `mu1 = mu2`).
pub fn harm2_residual(jet: &JetSample) -> Result<Complex64> {
    let m = SingularMetric::kokubu();
    m.check(jet.g)?;
    Ok(jet.gzzbar + m.christoffel_unchecked(jet.g) * jet.gz * jet.gzbar)
}

/// `g_{z zbar} - 2g / (g^2 - gbar^2) g_z g_zbar` (equation for `mu1 = -mu2`).
pub fn harm3_residual(jet: &JetSample) -> Result<Complex64> {
    let m = SingularMetric::sol();
    m.check(jet.g)?;
    Ok(jet.gzzbar + m.christoffel_unchecked(jet.g) * jet.gz * jet.gzbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lambda2_examples() {
        assert_eq!(SingularMetric::kokubu().lambda2(c(0.0, 0.0)).unwrap(), 1.0);
        // 1/|(1+i)^2 - (1-i)^2| = 1/|4i|
        assert!((SingularMetric::sol().lambda2(c(1.0, 1.0)).unwrap() - 0.25).abs() < 1e-16);
        assert!(matches!(
            SingularMetric::kokubu().lambda2(c(1.0, 0.0)),
            Err(Error::OnSingularSet { .. })
        ));
        assert!(SingularMetric::sol().lambda2(c(0.0, 2.0)).is_err());
    }

    #[test]
    fn christoffel_examples() {
        assert_eq!(SingularMetric::kokubu().christoffel(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        // -2(1+i)/(4i) = (-1 + i)/2
        let g = SingularMetric::sol().christoffel(c(1.0, 1.0)).unwrap();
        assert!((g - c(-0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn metric_selection() {
        assert_eq!(
            SingularMetric::for_params(Params::new(2.0, 2.0)).unwrap().kind,
            MetricKind::Kokubu
        );
        assert_eq!(
            SingularMetric::for_params(Params::new(-0.5, 0.5)).unwrap().kind,
            MetricKind::Sol
        );
        assert!(SingularMetric::for_params(Params::new(1.0, 0.5)).is_err());
        assert!(SingularMetric::for_params(Params::EUCLIDEAN).is_err());
    }

    #[test]
    fn tension_examples() {
        for m in [SingularMetric::kokubu(), SingularMetric::sol()] {
            let w = c(0.4, 0.3);
            assert_eq!(m.tension(&JetSample::constant(w)).unwrap(), c(0.0, 0.0));
            let holo = JetSample::new(w, c(1.5, -2.0), c(0.0, 0.0), c(0.0, 0.0));
            assert_eq!(m.tension(&holo).unwrap(), c(0.0, 0.0));
        }
        let g = c(1.0, 1.0);
        let gzzbar = 2.0 * g / (g * g - g.conj() * g.conj());
        let jet = JetSample::new(g, c(1.0, 0.0), c(1.0, 0.0), gzzbar);
        assert!(SingularMetric::sol().tension(&jet).unwrap().norm() < 1e-15);
    }

    #[test]
    fn harm3_exact_value() {
        let jet = JetSample::new(c(1.0, 1.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        // -2(1+i)/(4i), computed by hand as (-1 + i)/2
        assert!((harm3_residual(&jet).unwrap() - c(-0.5, 0.5)).norm() < 1e-15);
        let holo = JetSample::new(c(0.3, 0.7), c(2.0, 1.0), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(harm2_residual(&holo).unwrap(), c(0.0, 0.0));
        assert_eq!(harm3_residual(&holo).unwrap(), c(0.0, 0.0));
        assert_eq!(
            harm_general_residual(&JetSample::constant(c(0.3, 0.2)), Params::new(1.0, 0.3)).unwrap(),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn curvature_examples() {
        let k = SingularMetric::kokubu();
        let s0 = k.gauss_curvature(c(0.0, 0.0)).unwrap();
        assert_eq!(s0.closed_form, 0.0);
        assert!(s0.numeric.abs() < 1e-9);
        let s = k.gauss_curvature(c(0.5, 0.0)).unwrap();
        assert!((s.closed_form + 32.0 / 15.0).abs() < 1e-14);
        assert!(s.relative_mismatch() < 1e-5);
        let s = SingularMetric::sol().gauss_curvature(c(1.0, 1.0)).unwrap();
        assert!((s.closed_form + 4.0).abs() < 1e-14);
        assert!(s.relative_mismatch() < 1e-5);
    }

    fn jet(bound: f64) -> impl Strategy<Value = JetSample> {
        proptest::array::uniform8(-bound..bound)
            .prop_map(|a| JetSample::new(c(a[0], a[1]), c(a[2], a[3]), c(a[4], a[5]), c(a[6], a[7])))
    }

    proptest! {
        #[test]
        fn general_equation_reduces_for_equal_mu(j in jet(10.0), mu in 0.2..3.0f64) {
            let gen = harm_general_residual(&j, Params::new(mu, mu));
            let h2 = harm2_residual(&j);
            if let (Ok(a), Ok(b)) = (gen, h2) {
                // relative to the size of the two summed terms
                let scale = j.gzzbar.norm() + (b - j.gzzbar).norm();
                prop_assert!((a - b).norm() <= 1e-12 * scale, "{} vs {}", a, b);
            }
        }

        #[test]
        fn general_equation_reduces_for_opposite_mu(j in jet(10.0), mu in 0.2..3.0f64) {
            if let (Ok(a), Ok(b)) = (harm_general_residual(&j, Params::new(mu, -mu)), harm3_residual(&j)) {
                let scale = j.gzzbar.norm() + (b - j.gzzbar).norm();
                prop_assert!((a - b).norm() <= 1e-12 * scale, "{} vs {}", a, b);
            }
        }

        #[test]
        fn harm_residual_is_scaled_tension(j in jet(3.0)) {
            if let Ok(r) = harm3_residual(&j) {
                let m = SingularMetric::sol();
                let t = m.tension(&j).unwrap();
                let l2 = m.lambda2(j.g).unwrap();
                prop_assert!((r * 4.0 / l2 - t).norm() <= 1e-12 * (1.0 + t.norm()));
            }
            if let Ok(r) = harm2_residual(&j) {
                let m = SingularMetric::kokubu();
                let t = m.tension(&j).unwrap();
                let l2 = m.lambda2(j.g).unwrap();
                prop_assert!((r * 4.0 / l2 - t).norm() <= 1e-12 * (1.0 + t.norm()));
            }
        }
    }
}
