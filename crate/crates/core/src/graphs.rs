//! Primitive divergent graphs of λφ⁴ in `n = 4 + ε` Euclidean dimensions.
//!
//! Every evaluator returns the regularized graph as an [`EpsilonSeries`] with the
//! overall `μ^(n−4)` factor stripped, together with its minimal-subtraction split.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{gamma_laurent, pole_constant, scale_power, EpsilonSeries, SplitValue};
use crate::quad::{self, DEFAULT_MAX_INTERVALS};

/// `(4π)²`.
pub const FOUR_PI_SQ: f64 = 16.0 * PI * PI;

/// Default absolute tolerance for the Feynman-parameter integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Constant term of the closed-form fish finite part, fixed by matching the
/// Feynman-parameter quadrature (`∫₀¹ ln[1 − α(1−α)s/m²] dα` at `s → 0`).
pub const FISH_CLOSED_FORM_OFFSET: f64 = -2.0;

/// Model parameters plus the arbitrary mass scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicPoint {
    /// Mass squared (energy²).
    pub m_sq: f64,
    /// Dimensionless coupling λ₀.
    pub lambda0: f64,
    /// Arbitrary mass μ.
    pub mu: f64,
    /// Cosmological constant Λ₀ (energy⁴).
    pub cosmological: f64,
}

impl KinematicPoint {
    pub fn new(m_sq: f64, lambda0: f64, mu: f64, cosmological: f64) -> Result<Self> {
        let k = KinematicPoint {
            m_sq,
            lambda0,
            mu,
            cosmological,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::InvalidArgument(format!("mu must be > 0, got {}", self.mu)));
        }
        if !(self.m_sq >= 0.0) || !self.m_sq.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "m_sq must be >= 0, got {}",
                self.m_sq
            )));
        }
        if !(self.lambda0 >= 0.0) || !self.lambda0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda0 must be >= 0, got {}",
                self.lambda0
            )));
        }
        if !self.cosmological.is_finite() {
            return Err(Error::InvalidArgument("cosmological constant must be finite".into()));
        }
        Ok(())
    }

    fn require_massive(&self) -> Result<()> {
        self.validate()?;
        if self.m_sq <= 0.0 {
            return Err(Error::InvalidArgument(
                "massive propagators required (m_sq > 0)".into(),
            ));
        }
        Ok(())
    }

    /// `x / (4π μ²)`, the argument of the scale powers.
    pub fn scale_ratio(&self, x: f64) -> f64 {
        x / (4.0 * PI * self.mu * self.mu)
    }

    /// `ln(m² / 4πμ²)`.
    pub fn log_mass_ratio(&self) -> f64 {
        self.scale_ratio(self.m_sq).ln()
    }
}

/// Position-space shape of a local pole term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionTag {
    /// `δ(z)`
    Delta,
    /// `∇²δ(x)`
    LaplacianDelta,
}

/// Local singular form carried by a graph: `coefficient · tag / ε^pole_order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSingularity {
    pub tag: DistributionTag,
    pub pole_order: u32,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphResult {
    pub graph_name: &'static str,
    pub series: EpsilonSeries,
    pub split: SplitValue,
    pub local_form: Option<LocalSingularity>,
}

impl GraphResult {
    fn new(graph_name: &'static str, series: EpsilonSeries) -> Self {
        let split = series.split();
        GraphResult {
            graph_name,
            series,
            split,
            local_form: None,
        }
    }

    fn with_local_form(mut self, tag: DistributionTag, coefficient: f64) -> Self {
        self.local_form = Some(LocalSingularity {
            tag,
            pole_order: 1,
            coefficient,
        });
        self
    }
}

fn check_order(order: i32, max: i32) -> Result<()> {
    if !(1..=max).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "graph order must lie in 1..={max}, got {order}"
        )));
    }
    Ok(())
}

/// Tadpole `Δ_E(0) = m²/(4π)² (m²/4πμ²)^{ε/2} Γ(−1 − ε/2)`.
pub fn tadpole(k: &KinematicPoint, order: i32) -> Result<GraphResult> {
    k.validate()?;
    check_order(order, 4)?;
    if k.m_sq == 0.0 {
        return Ok(GraphResult::new("tadpole", EpsilonSeries::zero(order)));
    }
    let scale = scale_power(k.scale_ratio(k.m_sq), 0.5, order + 1)?;
    let gamma = gamma_laurent(-1, -0.5, order)?;
    let series = scale.mul(&gamma)?.scale(k.m_sq / FOUR_PI_SQ);
    Ok(GraphResult::new("tadpole", series))
}

/// Moments `∫₀¹ (½ ln X)^j / j! dα` for `j = 0..=top`, `X = (m² + α(1−α)P²)/4πμ²`.
fn feynman_moments(p_sq: f64, k: &KinematicPoint, top: i32, quad_tol: f64) -> Result<Vec<f64>> {
    let m_sq = k.m_sq;
    let norm = 4.0 * PI * k.mu * k.mu;
    let half_log = move |alpha: f64| 0.5 * ((m_sq + alpha * (1.0 - alpha) * p_sq) / norm).ln();
    let mut moments = vec![1.0];
    let mut factorial = 1.0;
    for j in 1..=top {
        factorial *= j as f64;
        let r = quad::integrate(
            |alpha| half_log(alpha).powi(j),
            0.0,
            1.0,
            quad_tol,
            DEFAULT_MAX_INTERVALS,
        )?;
        moments.push(r.value / factorial);
    }
    Ok(moments)
}

/// Fish graph `F(−P²) = −(1/(4π)²) Γ(−ε/2) ∫₀¹ dα X^{ε/2}` by Feynman-parameter quadrature.
pub fn fish(p_sq: f64, k: &KinematicPoint, order: i32, quad_tol: f64) -> Result<GraphResult> {
    k.require_massive()?;
    if !(0..=4).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "fish order must lie in 0..=4, got {order}"
        )));
    }
    if !(p_sq > -4.0 * k.m_sq) || !p_sq.is_finite() {
        return Err(Error::BranchCutCrossing {
            p_sq,
            m_sq: k.m_sq,
        });
    }
    let moments = feynman_moments(p_sq, k, order + 1, quad_tol)?;
    let integral = EpsilonSeries::from_real(0, &moments)?;
    let gamma = gamma_laurent(0, -0.5, order)?;
    let series = gamma.mul(&integral)?.scale(-1.0 / FOUR_PI_SQ);
    let residue = series.coeff(-1).re;
    Ok(GraphResult::new("fish", series).with_local_form(DistributionTag::Delta, residue))
}

/// Closed-form finite part `F^(r)(s)` for spacelike `s < 0` and timelike `s ≥ 4m²`.
///
/// Uses the `s + i0` prescription, so the absorptive part above threshold is
/// `−πβ/(4π)²` with `β = √(1 − 4m²/s)`.
pub fn fish_closed_form(s: f64, k: &KinematicPoint) -> Result<Complex64> {
    k.require_massive()?;
    let m_sq = k.m_sq;
    if !s.is_finite() || (s >= 0.0 && s < 4.0 * m_sq) {
        return Err(Error::DomainUnsupported { s, m_sq });
    }
    let beta_sq = 1.0 - 4.0 * m_sq / s;
    let velocity_term = if s < 0.0 {
        let beta = beta_sq.sqrt();
        Complex64::new(beta * (2.0 / (beta - 1.0)).ln_1p(), 0.0)
    } else if beta_sq == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let beta = beta_sq.sqrt();
        Complex64::new(beta * ((1.0 + beta) / (1.0 - beta)).ln(), -PI * beta)
    };
    let constant = k.log_mass_ratio() + pole_constant() + FISH_CLOSED_FORM_OFFSET;
    Ok((velocity_term + constant) / FOUR_PI_SQ)
}

/// Fish series for a Mandelstam argument `s`, through `ε⁰`.
///
/// The pole comes from the `Γ(−ε/2)` expansion; the finite part uses the closed
/// form where it is defined and the quadrature at `P² = −s` inside `[0, 4m²)`.
pub fn fish_channel(s: f64, k: &KinematicPoint, quad_tol: f64) -> Result<EpsilonSeries> {
    k.require_massive()?;
    if s < 0.0 || s >= 4.0 * k.m_sq {
        let gamma = gamma_laurent(0, -0.5, 0)?;
        let pole = -gamma.coeff(-1) / FOUR_PI_SQ;
        EpsilonSeries::new(-1, vec![pole, fish_closed_form(s, k)?])
    } else {
        fish(-s, k, 0, quad_tol)?.series.truncate(0)
    }
}

/// Double scoop `Σ^(2,1) = −¼ λ₀² ∫dⁿy Δ_E(y)² · Δ_E(0)`.
///
/// The Euclidean bubble `∫Δ_E²` is the fish integral at zero momentum with the
/// opposite sign, `∫Δ_E² = −F(0)`.
pub fn double_scoop(k: &KinematicPoint, order: i32) -> Result<GraphResult> {
    k.require_massive()?;
    check_order(order, 3)?;
    let bubble = fish(0.0, k, order + 1, DEFAULT_QUAD_TOL)?.series.scale(-1.0);
    let tad = tadpole(k, order + 1)?.series;
    let series = bubble
        .mul(&tad)?
        .scale(-0.25 * k.lambda0 * k.lambda0)
        .truncate(order)?;
    Ok(GraphResult::new("double_scoop", series))
}

/// `Γ(n/2 − 1)³ Γ(3 − n) / Γ(3n/2 − 3)` expanded in ε through `ε^order`.
pub fn setting_sun_gamma_ratio(order: i32) -> Result<EpsilonSeries> {
    check_order(order, 3)?;
    let g1 = gamma_laurent(1, 0.5, order + 1)?;
    let cube = g1.mul(&g1)?.mul(&g1)?;
    let pole = gamma_laurent(-1, -1.0, order)?;
    let denom = gamma_laurent(3, 1.5, order + 1)?.reciprocal()?;
    cube.mul(&pole)?.mul(&denom)?.truncate(order)
}

/// The constant in `Σ^(2,2) = −(1/12)(λ/(4π)²)² p² (ln(p²/4πμ²) + const)`: twice the
/// `ε⁰` coefficient of the Γ-ratio.
pub fn setting_sun_constant() -> f64 {
    2.0 * setting_sun_gamma_ratio(1)
        .expect("fixed valid order")
        .coeff(0)
        .re
}

/// Massless setting sun `Σ^(2,2)(p) = −(1/6)(λ/(4π)²)² p² (p²/4πμ²)^ε R(ε)`.
pub fn setting_sun(p_sq: f64, k: &KinematicPoint, order: i32) -> Result<GraphResult> {
    k.validate()?;
    check_order(order, 3)?;
    if !(p_sq >= 0.0) || !p_sq.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "setting sun needs Euclidean p_sq >= 0, got {p_sq}"
        )));
    }
    let coupling = k.lambda0 / FOUR_PI_SQ;
    let prefactor = -coupling * coupling * p_sq / 6.0;
    if p_sq == 0.0 || prefactor == 0.0 {
        return Ok(GraphResult::new("setting_sun", EpsilonSeries::zero(order)));
    }
    let scale = scale_power(k.scale_ratio(p_sq), 1.0, order + 1)?;
    let series = setting_sun_gamma_ratio(order + 1)?
        .mul(&scale)?
        .scale(prefactor)
        .truncate(order)?;
    let per_p_sq = series.coeff(-1).re / p_sq;
    Ok(GraphResult::new("setting_sun", series)
        .with_local_form(DistributionTag::LaplacianDelta, per_p_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::EULER_GAMMA;
    use approx::assert_relative_eq;

    fn point(m_sq: f64, lambda0: f64) -> KinematicPoint {
        KinematicPoint::new(m_sq, lambda0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn tadpole_pole_and_massless_limit() {
        let k = point(2.5, 0.1);
        let t = tadpole(&k, 2).unwrap();
        assert_relative_eq!(t.split.pole(1).re, 2.0 * 2.5 / FOUR_PI_SQ, max_relative = 1e-15);
        assert_eq!(t.split.singular.len(), 1);

        let t0 = tadpole(&point(0.0, 0.1), 2).unwrap();
        assert!(t0.series.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn tadpole_finite_part_at_unit_ratio() {
        let mu: f64 = 0.7;
        let m_sq = 4.0 * PI * mu * mu;
        let k = KinematicPoint::new(m_sq, 0.0, mu, 0.0).unwrap();
        let t = tadpole(&k, 2).unwrap();
        assert_relative_eq!(
            t.split.finite.re,
            m_sq / FOUR_PI_SQ * (EULER_GAMMA - 1.0),
            max_relative = 1e-13
        );
    }

    #[test]
    fn fish_rejects_branch_cut() {
        let k = point(1.0, 0.1);
        assert!(matches!(
            fish(-4.5, &k, 1, 1e-10),
            Err(Error::BranchCutCrossing { .. })
        ));
        assert!(fish(1.0, &point(0.0, 0.1), 1, 1e-10).is_err());
    }

    #[test]
    fn fish_singular_part_is_momentum_independent() {
        let k = point(1.3, 0.1);
        let reference = 2.0 / FOUR_PI_SQ;
        for p_sq in [0.0, 1.3, 13.0] {
            let f = fish(p_sq, &k, 1, 1e-10).unwrap();
            assert_eq!(f.split.singular.len(), 1);
            assert_relative_eq!(f.split.pole(1).re, reference, max_relative = 1e-10);
            assert_eq!(f.local_form.unwrap().tag, DistributionTag::Delta);
        }
    }

    #[test]
    fn fish_at_zero_momentum() {
        let k = point(1.3, 0.1);
        let f = fish(0.0, &k, 1, 1e-10).unwrap();
        let expected = (k.log_mass_ratio() + EULER_GAMMA) / FOUR_PI_SQ;
        assert_relative_eq!(f.split.finite.re, expected, max_relative = 1e-12);

        let mu: f64 = 1.0;
        let k = KinematicPoint::new(4.0 * PI * mu * mu, 0.1, mu, 0.0).unwrap();
        let f = fish(0.0, &k, 1, 1e-10).unwrap();
        assert_relative_eq!(f.split.finite.re, EULER_GAMMA / FOUR_PI_SQ, max_relative = 1e-12);
    }

    #[test]
    fn closed_form_domain() {
        let k = point(1.0, 0.1);
        assert!(matches!(fish_closed_form(0.0, &k), Err(Error::DomainUnsupported { .. })));
        assert!(matches!(fish_closed_form(2.0, &k), Err(Error::DomainUnsupported { .. })));
        // threshold: velocity factor vanishes
        let at = fish_closed_form(4.0, &k).unwrap();
        let constant = (k.log_mass_ratio() + EULER_GAMMA - 2.0) / FOUR_PI_SQ;
        assert_relative_eq!(at.re, constant, max_relative = 1e-14);
        assert_eq!(at.im, 0.0);
        // above threshold the absorptive part is negative
        assert!(fish_closed_form(10.0, &k).unwrap().im < 0.0);
        assert_eq!(fish_closed_form(-3.0, &k).unwrap().im, 0.0);
    }

    #[test]
    fn closed_form_matches_quadrature_at_minus_m_sq() {
        let k = point(1.0, 0.1);
        let quad = fish(1.0, &k, 1, 1e-12).unwrap().split.finite.re;
        let closed = fish_closed_form(-1.0, &k).unwrap().re;
        assert_relative_eq!(closed, quad, max_relative = 1e-8);
    }

    #[test]
    fn fish_channel_uses_quadrature_below_threshold() {
        let k = point(1.0, 0.1);
        let inside = fish_channel(1.0, &k, 1e-12).unwrap();
        let direct = fish(-1.0, &k, 0, 1e-12).unwrap();
        assert_eq!(inside.coeff(0), direct.series.coeff(0));
        let outside = fish_channel(-2.0, &k, 1e-12).unwrap();
        assert_relative_eq!(outside.coeff(-1).re, 2.0 / FOUR_PI_SQ, max_relative = 1e-15);
    }

    #[test]
    fn double_scoop_structure() {
        let k = point(1.7, 0.3);
        let d = double_scoop(&k, 1).unwrap();
        assert_eq!(d.split.singular.keys().copied().collect::<Vec<_>>(), vec![1, 2]);
        let expected = 0.3 * 0.3 * 1.7 / (FOUR_PI_SQ * FOUR_PI_SQ);
        assert_relative_eq!(d.split.pole(2).re, expected, max_relative = 1e-12);

        let zero = double_scoop(&point(1.7, 0.0), 1).unwrap();
        assert!(zero.series.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn setting_sun_pole_and_zero_momentum() {
        let k = point(1.0, 0.4);
        let p_sq = 2.2;
        let s = setting_sun(p_sq, &k, 1).unwrap();
        let a = 0.4 / FOUR_PI_SQ;
        assert_relative_eq!(s.split.pole(1).re, -a * a * p_sq / 12.0, max_relative = 1e-14);
        assert_eq!(s.local_form.unwrap().tag, DistributionTag::LaplacianDelta);
        let z = setting_sun(0.0, &k, 1).unwrap();
        assert!(z.series.coeffs().iter().all(|c| c.norm() == 0.0));
        assert!(setting_sun(-1.0, &k, 1).is_err());
    }

    #[test]
    fn gamma_ratio_pole_is_one_half() {
        let r = setting_sun_gamma_ratio(2).unwrap();
        assert_relative_eq!(r.coeff(-1).re, 0.5, epsilon = 1e-15);
        // ε⁰: (γ − 13/4)/2
        assert_relative_eq!(r.coeff(0).re, 0.5 * (EULER_GAMMA - 3.25), epsilon = 1e-14);
    }
}
