//! DeWitt–Schwinger coefficients, the split of the one-loop effective Lagrangian
//! and the renormalized gravitational constants.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::FOUR_PI_SQ;
use crate::laurent::{pole_constant, scale_power, EpsilonSeries};

/// Curvature invariants at a point. Flat space is all zeros.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CurvatureInvariants {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "RicciSq")]
    pub ricci_sq: f64,
    #[serde(rename = "RiemannSq")]
    pub riemann_sq: f64,
    #[serde(rename = "BoxR")]
    pub box_r: f64,
    pub xi: f64,
}

impl CurvatureInvariants {
    pub fn flat(xi: f64) -> Self {
        CurvatureInvariants {
            xi,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.r, self.ricci_sq, self.riemann_sq, self.box_r, self.xi];
        if all.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("curvature invariants must be finite".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravitationalConstants {
    #[serde(rename = "G0")]
    pub g0: f64,
    #[serde(rename = "Lambda0")]
    pub cosmological: f64,
    pub l: f64,
    pub g: f64,
    /// Finite coefficients of the three quadratic-curvature terms.
    pub alpha_abc: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DewittCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl DewittCoefficients {
    pub fn as_array(&self) -> [f64; 3] {
        [self.a0, self.a1, self.a2]
    }
}

pub fn dewitt_coefficients(c: &CurvatureInvariants) -> DewittCoefficients {
    let conformal = 1.0 / 6.0 - c.xi;
    DewittCoefficients {
        a0: 1.0,
        a1: conformal * c.r,
        a2: c.riemann_sq / 180.0 - c.ricci_sq / 180.0 - (0.2 - c.xi) * c.box_r / 6.0
            + 0.5 * conformal * conformal * c.r * c.r,
    }
}

/// Pole-carrying part of the effective Lagrangian, one series per `a_k` channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularBundle {
    /// Channel `k` is `−(4π)^{−n/2}{1/ε + ½[γ + ln(m²/μ²)]} · w_k(ε) · a_k`.
    pub channels: [EpsilonSeries; 3],
    /// The channel weights `w_k(ε)`: `4m⁴/(n(n−2))`, `−2m²/(n−2)` and `1`.
    pub weights: [EpsilonSeries; 3],
}

impl SingularBundle {
    pub fn total(&self) -> EpsilonSeries {
        self.channels[0].add(&self.channels[1]).add(&self.channels[2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagrangianSplit {
    pub singular: SingularBundle,
    pub regular: f64,
}

fn check_mass(m: f64) -> Result<()> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("mass must be > 0, got {m}")))
    }
}

/// `{1/ε + ½[γ + ln(m²/μ²)]}` times `(4π)^{−n/2}`, exact through `ε^order`.
fn singular_prefactor(m: f64, mu: f64, order: i32) -> Result<EpsilonSeries> {
    let bracket = EpsilonSeries::monomial(1.0, -1, order + 1)?.add(&EpsilonSeries::constant(
        0.5 * (pole_constant() + (m * m / (mu * mu)).ln()),
        order + 1,
    ));
    let loop_measure = scale_power(4.0 * PI, -0.5, order + 1)?.scale(1.0 / FOUR_PI_SQ);
    loop_measure.mul(&bracket)?.truncate(order)
}

/// `1 / (c + ε)` through `ε^order`.
fn inverse_shifted(c: f64, order: i32) -> Result<EpsilonSeries> {
    let coeffs: Vec<f64> = (0..=order).map(|k| (-1.0f64).powi(k) / c.powi(k + 1)).collect();
    EpsilonSeries::from_real(0, &coeffs)
}

/// Singular and regular parts of the one-loop effective Lagrangian.
///
/// `tail` holds `a_3, a_4, …`. The regular value is
/// `(1/32π²)[2l m⁴ + g m² a₁ + a₂ ln m² + Σ_{j≥3} (j−3)! a_j / m^{2j−4}]`.
pub fn effective_lagrangian_split(
    c: &CurvatureInvariants,
    m: f64,
    mu: f64,
    order: i32,
    tail: &[f64],
    l: f64,
    g: f64,
) -> Result<LagrangianSplit> {
    c.validate()?;
    check_mass(m)?;
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!("mu must be > 0, got {mu}")));
    }
    if !(0..=3).contains(&order) {
        return Err(Error::InvalidArgument(format!("order must lie in 0..=3, got {order}")));
    }
    let m_sq = m * m;
    let a = dewitt_coefficients(c).as_array();
    let work = order + 1;
    let w0 = inverse_shifted(4.0, work)?
        .mul(&inverse_shifted(2.0, work)?)?
        .scale(4.0 * m_sq * m_sq);
    let w1 = inverse_shifted(2.0, work)?.scale(-2.0 * m_sq);
    let w2 = EpsilonSeries::constant(1.0, work);
    let prefactor = singular_prefactor(m, mu, work)?.scale(-1.0);
    let channel = |w: &EpsilonSeries, ak: f64| -> Result<EpsilonSeries> {
        prefactor.mul(w)?.scale(ak).truncate(order)
    };
    let channels = [channel(&w0, a[0])?, channel(&w1, a[1])?, channel(&w2, a[2])?];

    let mut regular = 2.0 * l * m_sq * m_sq + g * m_sq * a[1] + a[2] * m_sq.ln();
    let mut factorial = 1.0;
    for (i, aj) in tail.iter().enumerate() {
        if i > 0 {
            factorial *= i as f64;
        }
        // j = i + 3
        regular += factorial * aj / m_sq.powi(i as i32 + 1);
    }
    regular /= 32.0 * PI * PI;

    Ok(LagrangianSplit {
        singular: SingularBundle {
            channels,
            weights: [w0.truncate(order)?, w1.truncate(order)?, w2.truncate(order)?],
        },
        regular,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoincidenceLimit {
    /// `lim Δ_F^(r)` (purely imaginary for real inputs).
    pub feynman: Complex64,
    /// Tail entries beyond `a_4`, which carry no known coefficient and are left out.
    pub dropped_tail: usize,
}

impl CoincidenceLimit {
    /// Euclidean value `−i · lim Δ_F^(r)`.
    pub fn euclidean(&self) -> f64 {
        (self.feynman * Complex64::new(0.0, -1.0)).re
    }
}

/// `lim Δ_F^(r) = (i/(4π)²){4l m² + g a₁ + a₂/m² + a₃/m⁴ + a₄/(2m⁶)}`.
pub fn coincidence_limit(
    c: &CurvatureInvariants,
    m: f64,
    tail: &[f64],
    l: f64,
    g: f64,
) -> Result<CoincidenceLimit> {
    c.validate()?;
    check_mass(m)?;
    let m_sq = m * m;
    let a = dewitt_coefficients(c);
    let mut value = 4.0 * l * m_sq + g * a.a1 + a.a2 / m_sq;
    if let Some(a3) = tail.first() {
        value += a3 / (m_sq * m_sq);
    }
    if let Some(a4) = tail.get(1) {
        value += a4 / (2.0 * m_sq * m_sq * m_sq);
    }
    Ok(CoincidenceLimit {
        feynman: Complex64::new(0.0, value / FOUR_PI_SQ),
        dropped_tail: tail.len().saturating_sub(2),
    })
}

/// The finite-ambiguity coefficient `l` matching the flat-space scale `μ`:
/// `4l = ln(m²/4πμ²) + γ − 1`.
pub fn l_from_mu(m: f64, mu: f64) -> f64 {
    0.25 * ((m * m / (4.0 * PI * mu * mu)).ln() + pole_constant() - 1.0)
}

/// Flat-space cosmological constant `Λ = m⁴ l / 16π²`.
pub fn flat_cosmological_constant(m: f64, l: f64) -> f64 {
    m.powi(4) * l / (16.0 * PI * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormalizedConstants {
    #[serde(rename = "G_phys")]
    pub g_phys: f64,
    #[serde(rename = "Lambda_phys")]
    pub lambda_phys: f64,
}

/// `G_phys = G₀/(1 + G₀ g m²/6)`, `Λ_phys = Λ₀ − ½ G₀ m² l`.
pub fn renormalized_constants(gc: &GravitationalConstants, m: f64) -> Result<RenormalizedConstants> {
    if !(gc.g0 > 0.0) {
        return Err(Error::InvalidArgument(format!("G0 must be > 0, got {}", gc.g0)));
    }
    let m_sq = m * m;
    let shift = gc.g0 * gc.g * m_sq / 6.0;
    let denominator = 1.0 + shift;
    if denominator.abs() <= 4.0 * f64::EPSILON * (1.0 + shift.abs()) {
        return Err(Error::DenominatorVanishes);
    }
    Ok(RenormalizedConstants {
        g_phys: gc.g0 / denominator,
        lambda_phys: gc.cosmological - 0.5 * gc.g0 * m_sq * gc.l,
    })
}

/// Dimensional-regularization forms of the renormalized constants, kept as series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountertermSeries {
    /// `Λ₀ + 32π m² G₀/((4π)^{n/2} n(n−2)) {1/ε + ½[γ + ln(m²/μ²)]}`.
    pub lambda_phys: EpsilonSeries,
    /// `G₀ / G_phys = 1 + 16 G₀ · 2m²(1/6 − ξ)/((4π)^{n/2}(n−2)) {…}`.
    pub g0_over_g_phys: EpsilonSeries,
}

pub fn counterterm_series(
    gc: &GravitationalConstants,
    xi: f64,
    m: f64,
    mu: f64,
    order: i32,
) -> Result<CountertermSeries> {
    check_mass(m)?;
    if !(0..=3).contains(&order) {
        return Err(Error::InvalidArgument(format!("order must lie in 0..=3, got {order}")));
    }
    let work = order + 1;
    let m_sq = m * m;
    let prefactor = singular_prefactor(m, mu, work)?;
    let inv_n_n2 = inverse_shifted(4.0, work)?.mul(&inverse_shifted(2.0, work)?)?;
    let lambda_phys = prefactor
        .mul(&inv_n_n2)?
        .scale(32.0 * PI * m_sq * gc.g0)
        .add(&EpsilonSeries::constant(gc.cosmological, work))
        .truncate(order)?;
    let g_ratio = prefactor
        .mul(&inverse_shifted(2.0, work)?)?
        .scale(32.0 * gc.g0 * m_sq * (1.0 / 6.0 - xi))
        .add(&EpsilonSeries::constant(1.0, work))
        .truncate(order)?;
    Ok(CountertermSeries {
        lambda_phys,
        g0_over_g_phys: g_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{tadpole, KinematicPoint};
    use approx::assert_relative_eq;

    fn sample() -> CurvatureInvariants {
        CurvatureInvariants {
            r: 0.7,
            ricci_sq: 0.3,
            riemann_sq: 1.1,
            box_r: -0.4,
            xi: 0.05,
        }
    }

    #[test]
    fn flat_and_conformal() {
        let d = dewitt_coefficients(&CurvatureInvariants::flat(0.3));
        assert_eq!(d.as_array(), [1.0, 0.0, 0.0]);
        let conformal = CurvatureInvariants {
            xi: 1.0 / 6.0,
            ..sample()
        };
        assert_eq!(dewitt_coefficients(&conformal).a1, 0.0);
    }

    #[test]
    fn a2_for_pure_scalar_curvature() {
        let c = CurvatureInvariants {
            r: 1.0,
            ..Default::default()
        };
        assert_relative_eq!(dewitt_coefficients(&c).a2, 1.0 / 72.0, max_relative = 1e-15);
    }

    #[test]
    fn xi_dependence_is_polynomial() {
        // second differences of a1 vanish, third differences of a2 vanish
        let h = 0.25;
        let a = |k: i32| dewitt_coefficients(&CurvatureInvariants { xi: k as f64 * h, ..sample() });
        let a1: Vec<f64> = (0..5).map(|k| a(k).a1).collect();
        let a2: Vec<f64> = (0..5).map(|k| a(k).a2).collect();
        assert!((a1[2] - 2.0 * a1[1] + a1[0]).abs() < 1e-14);
        assert!((a2[3] - 3.0 * a2[2] + 3.0 * a2[1] - a2[0]).abs() < 1e-13);
        // leading coefficients: −R and ½R²
        assert_relative_eq!((a1[1] - a1[0]) / h, -0.7, max_relative = 1e-12);
        assert_relative_eq!((a2[2] - 2.0 * a2[1] + a2[0]) / (h * h), 0.49, max_relative = 1e-12);
    }

    #[test]
    fn flat_split_has_only_mass_channel() {
        let s = effective_lagrangian_split(&CurvatureInvariants::flat(0.0), 1.3, 0.8, 1, &[], 0.0, 0.0)
            .unwrap();
        assert_eq!(s.regular, 0.0);
        assert!(s.singular.channels[0].max_abs() > 0.0);
        assert_eq!(s.singular.channels[1].max_abs(), 0.0);
        assert_eq!(s.singular.channels[2].max_abs(), 0.0);
        // pole of the a₀ channel: −m⁴/(2(4π)²)
        assert_relative_eq!(
            s.singular.channels[0].coeff(-1).re,
            -1.3f64.powi(4) / (2.0 * FOUR_PI_SQ),
            max_relative = 1e-14
        );
    }

    #[test]
    fn channels_proportional_to_weights() {
        let s = effective_lagrangian_split(&sample(), 0.9, 1.0, 1, &[], 0.0, 0.0).unwrap();
        let a = dewitt_coefficients(&sample()).as_array();
        let r0 = s.singular.channels[0].coeff(-1) / (s.singular.weights[0].coeff(0) * a[0]);
        for (k, ak) in a.iter().enumerate().take(3).skip(1) {
            let rk = s.singular.channels[k].coeff(-1) / (s.singular.weights[k].coeff(0) * ak);
            assert!((rk - r0).norm() < 1e-14 * r0.norm());
        }
    }

    #[test]
    fn regular_tail_terms() {
        let m: f64 = 1.5;
        let s = effective_lagrangian_split(&CurvatureInvariants::flat(0.0), m, 1.0, 0, &[0.2, 0.3], 0.0, 0.0)
            .unwrap();
        let expected = (0.2 / m.powi(2) + 0.3 / m.powi(4)) / (32.0 * PI * PI);
        assert_relative_eq!(s.regular, expected, max_relative = 1e-14);
    }

    #[test]
    fn coincidence_tail_check() {
        let m: f64 = 1.2;
        let (a3, a4) = (0.4, -0.9);
        let c = coincidence_limit(&CurvatureInvariants::flat(0.0), m, &[a3, a4, 1.0], 0.0, 0.0).unwrap();
        let expected = (a3 / (4.0 * m.powi(4)) + a4 / (8.0 * m.powi(6))) / (4.0 * PI * PI);
        assert_relative_eq!(c.feynman.im, expected, max_relative = 1e-14);
        assert_eq!(c.feynman.re, 0.0);
        assert_eq!(c.dropped_tail, 1);
    }

    #[test]
    fn flat_bridge_to_tadpole() {
        let (m, mu): (f64, f64) = (1.7, 0.6);
        let l = l_from_mu(m, mu);
        let c = coincidence_limit(&CurvatureInvariants::flat(0.0), m, &[], l, 0.0).unwrap();
        let k = KinematicPoint::new(m * m, 0.0, mu, 0.0).unwrap();
        let t = tadpole(&k, 1).unwrap().split.finite.re;
        assert_relative_eq!(c.euclidean(), t, max_relative = 1e-12);
    }

    #[test]
    fn constants_identity_and_half() {
        let gc = GravitationalConstants {
            g0: 2.0,
            cosmological: 0.3,
            l: 0.0,
            g: 0.0,
            alpha_abc: [0.0; 3],
        };
        let r = renormalized_constants(&gc, 1.4).unwrap();
        assert_eq!((r.g_phys, r.lambda_phys), (2.0, 0.3));
        let half = GravitationalConstants { g: 3.0, ..gc };
        assert_relative_eq!(renormalized_constants(&half, 1.0).unwrap().g_phys, 1.0, max_relative = 1e-15);
        let bad = GravitationalConstants { g: -3.0, ..gc };
        assert_eq!(renormalized_constants(&bad, 1.0), Err(Error::DenominatorVanishes));
    }

    #[test]
    fn flat_cosmological_constant_matches_energy_term() {
        let (m, mu): (f64, f64) = (1.1, 0.7);
        let l = l_from_mu(m, mu);
        let direct = m.powi(4) / (4.0 * FOUR_PI_SQ)
            * ((m * m / (4.0 * PI * mu * mu)).ln() + pole_constant() - 1.0);
        assert_relative_eq!(flat_cosmological_constant(m, l), direct, max_relative = 1e-14);
    }

    #[test]
    fn counterterms_carry_simple_poles() {
        let gc = GravitationalConstants {
            g0: 0.5,
            cosmological: 0.1,
            l: 0.0,
            g: 0.0,
            alpha_abc: [0.0; 3],
        };
        let s = counterterm_series(&gc, 0.0, 1.0, 1.0, 1).unwrap();
        assert_relative_eq!(
            s.lambda_phys.coeff(-1).re,
            32.0 * PI * 0.5 / (8.0 * FOUR_PI_SQ),
            max_relative = 1e-14
        );
        let conformal = counterterm_series(&gc, 1.0 / 6.0, 1.0, 1.0, 1).unwrap();
        assert!(conformal.g0_over_g_phys.coeff(-1).norm() < 1e-16);
    }
}
