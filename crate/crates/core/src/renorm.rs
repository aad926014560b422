//! Physical quantities from the subtraction recipe, their standard-renormalization
//! counterparts, pole-cancellation reports and the renormalization-group flow.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{
    double_scoop, fish_channel, setting_sun, tadpole, KinematicPoint, DEFAULT_QUAD_TOL,
    FOUR_PI_SQ,
};
use crate::laurent::{gamma_laurent, pole_constant, scale_power, EpsilonSeries};

/// Relative tolerance used to call a pole residual zero.
pub const POLE_RESIDUAL_TOL: f64 = 1e-10;

/// Step in `ln μ` for the central differences behind [`beta_functions`].
pub const LN_MU_STEP: f64 = 1e-4;

/// Coupling above which the flow is stopped.
pub const LANDAU_GUARD: f64 = 10.0;

/// Minimum number of RK4 steps accepted by [`rg_flow`].
pub const MIN_FLOW_STEPS: usize = 16;

/// Relative endpoint change tolerated under step doubling.
pub const STEP_DOUBLING_TOL: f64 = 1e-8;

/// Running parameters at the scale `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSet {
    pub lambda0: f64,
    pub m0_sq: f64,
    #[serde(rename = "Lambda0")]
    pub cosmological: f64,
    pub mu: f64,
}

impl CouplingSet {
    pub fn new(lambda0: f64, m0_sq: f64, cosmological: f64, mu: f64) -> Result<Self> {
        let c = CouplingSet {
            lambda0,
            m0_sq,
            cosmological,
            mu,
        };
        c.kinematics()?;
        Ok(c)
    }

    /// The same parameters viewed as graph inputs.
    pub fn kinematics(&self) -> Result<KinematicPoint> {
        KinematicPoint::new(self.m0_sq, self.lambda0, self.mu, self.cosmological)
    }

    fn at_ln_mu_shift(&self, h: f64) -> Self {
        CouplingSet {
            mu: self.mu * h.exp(),
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleReport {
    pub quantity_name: String,
    pub residuals: BTreeMap<u32, Complex64>,
    pub finite: Complex64,
    pub is_finite: bool,
}

impl PoleReport {
    fn from_series(name: &str, series: &EpsilonSeries) -> Self {
        let residuals: BTreeMap<u32, Complex64> = (series.min_order()..0)
            .map(|k| ((-k) as u32, series.coeff(k)))
            .collect();
        let finite = series.coeff(0);
        let bound = POLE_RESIDUAL_TOL * finite.norm();
        let is_finite = residuals.values().all(|r| r.norm() <= bound);
        PoleReport {
            quantity_name: name.to_string(),
            residuals,
            finite,
            is_finite,
        }
    }
}

/// `m_phys² = m₀² + ½λ₀ Δ_E^(r)(0)`.
pub fn physical_mass_sq(c: &CouplingSet) -> Result<f64> {
    let k = c.kinematics()?;
    let tad = tadpole(&k, 1)?;
    Ok(c.m0_sq + 0.5 * c.lambda0 * tad.split.finite.re)
}

/// Subtraction-recipe amplitude `T = λ₀ + ½λ₀² [F^(r)(s) + F^(r)(t) + F^(r)(u)]`.
#[allow(non_snake_case)]
pub fn amplitude_T(c: &CouplingSet, s: f64, t: f64, u: f64) -> Result<Complex64> {
    let k = c.kinematics()?;
    if c.lambda0 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for x in [s, t, u] {
        sum += fish_channel(x, &k, DEFAULT_QUAD_TOL)?.coeff(0);
    }
    Ok(c.lambda0 + 0.5 * c.lambda0 * c.lambda0 * sum)
}

/// `λ(1 − 3λ/((4π)² ε))` exact through `ε^order`, without the scale factor.
fn bare_coupling_bracket(lambda_ren: f64, order: i32) -> Result<EpsilonSeries> {
    EpsilonSeries::constant(lambda_ren, order)
        .add(&EpsilonSeries::monomial(
            -3.0 * lambda_ren * lambda_ren / FOUR_PI_SQ,
            -1,
            order,
        )?)
        .truncate(order)
}

/// Standard-path bare coupling `λ₀ = μ^{−ε} λ (1 − 3λ/((4π)² ε))` through `ε^order`.
pub fn bare_coupling_standard(lambda_ren: f64, mu: f64, order: i32) -> Result<EpsilonSeries> {
    if order < 0 {
        return Err(Error::InvalidArgument(format!("order must be >= 0, got {order}")));
    }
    let scale = scale_power(mu, -1.0, order + 1)?;
    scale.mul(&bare_coupling_bracket(lambda_ren, order + 1)?)?.truncate(order)
}

fn check_energy_order(order: u8) -> Result<()> {
    if order == 1 || order == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "perturbative order must be 1 or 2, got {order}"
        )))
    }
}

/// Subtraction-path vacuum energy density at first or second order in λ.
pub fn energy_density(c: &CouplingSet, perturbative_order: u8) -> Result<f64> {
    check_energy_order(perturbative_order)?;
    let k = c.kinematics()?;
    if k.m_sq == 0.0 {
        return Ok(-c.cosmological);
    }
    let m4 = k.m_sq * k.m_sq / FOUR_PI_SQ;
    let bracket = k.log_mass_ratio() + pole_constant() - 1.0;
    let mut e = 0.25 * m4 * bracket - c.cosmological;
    if perturbative_order == 2 {
        e += c.lambda0 / 8.0 * m4 * bracket * bracket;
    }
    Ok(e)
}

/// Standard-path vacuum energy density assembled as an ε-series.
///
/// `(m⁴/(4π)²)(m²/4πμ²)^{ε/2} Γ(−1−ε/2)/(4+ε) − ½ m⁴/((4π)² ε) − Λ`, plus the
/// second-order `½ λ m⁴/(4π)² [(m²/4πμ²)^{ε/2} ½Γ(−1−ε/2) − 1/ε]²`.
pub fn energy_density_series(c: &CouplingSet, perturbative_order: u8) -> Result<EpsilonSeries> {
    check_energy_order(perturbative_order)?;
    let k = c.kinematics()?;
    let order = 1;
    if k.m_sq == 0.0 {
        return Ok(EpsilonSeries::constant(-c.cosmological, order));
    }
    let m4 = k.m_sq * k.m_sq / FOUR_PI_SQ;
    let scaled_gamma = scale_power(k.scale_ratio(k.m_sq), 0.5, order + 2)?
        .mul(&gamma_laurent(-1, -0.5, order + 1)?)?;
    let one_over_n = EpsilonSeries::from_real(0, &[4.0, 1.0, 0.0, 0.0, 0.0])?.reciprocal()?;
    let vacuum = scaled_gamma.mul(&one_over_n)?.scale(m4);
    let counter = EpsilonSeries::monomial(-0.5 * m4, -1, order + 1)?;
    let mut e = vacuum
        .add(&counter)
        .add(&EpsilonSeries::constant(-c.cosmological, order + 1));
    if perturbative_order == 2 {
        let inner = scaled_gamma
            .scale(0.5)
            .sub(&EpsilonSeries::monomial(1.0, -1, order + 1)?);
        let inner = regular_part(&inner)?;
        e = e.add(&inner.mul(&inner)?.scale(0.5 * c.lambda0 * m4));
    }
    e.truncate(order)
}

/// Drops negative powers that vanish to rounding, failing if a genuine pole remains.
fn regular_part(s: &EpsilonSeries) -> Result<EpsilonSeries> {
    let scale = s.max_abs();
    for k in s.min_order()..0 {
        if s.coeff(k).norm() > 1e-14 * scale {
            return Err(Error::InvalidArgument(format!(
                "bracket keeps a pole of order {}",
                -k
            )));
        }
    }
    let coeffs = (0..=s.max_order()).map(|k| s.coeff(k)).collect();
    EpsilonSeries::new(0, coeffs)
}

/// Standard-path energy density at `n → 4`: the finite part of [`energy_density_series`].
pub fn energy_density_standard(c: &CouplingSet, perturbative_order: u8) -> Result<f64> {
    Ok(energy_density_series(c, perturbative_order)?.coeff(0).re)
}

/// Measured offset between the two energy-density paths (standard minus subtraction).
pub fn energy_scheme_offset(c: &CouplingSet, perturbative_order: u8) -> Result<f64> {
    Ok(energy_density_standard(c, perturbative_order)? - energy_density(c, perturbative_order)?)
}

/// `G(p)⁻¹ = p² + m₀² + ½λ₀ Δ^(r)(0) + Σ^(2,1)_fin + Σ^(2,2)_fin(p)`, with `z₁ = 1`.
pub fn propagator_inverse(p_sq: f64, c: &CouplingSet) -> Result<f64> {
    if !(p_sq > 0.0) {
        return Err(Error::InvalidArgument(format!("p_sq must be > 0, got {p_sq}")));
    }
    let k = c.kinematics()?;
    let mut g = p_sq + c.m0_sq;
    if c.lambda0 == 0.0 {
        return Ok(g);
    }
    g += 0.5 * c.lambda0 * tadpole(&k, 1)?.split.finite.re;
    if k.m_sq > 0.0 {
        g += double_scoop(&k, 1)?.split.finite.re;
    }
    g += setting_sun(p_sq, &k, 1)?.split.finite.re;
    Ok(g)
}

/// `ln μ`-derivatives that keep `T`, `m_phys²` and `E` stationary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaFunctions {
    pub beta_lambda: f64,
    pub gamma_m: f64,
    #[serde(rename = "beta_Lambda")]
    pub beta_cosmological: f64,
}

fn central_difference<F: Fn(&CouplingSet) -> Result<f64>>(c: &CouplingSet, f: F) -> Result<f64> {
    let up = f(&c.at_ln_mu_shift(LN_MU_STEP))?;
    let down = f(&c.at_ln_mu_shift(-LN_MU_STEP))?;
    Ok((up - down) / (2.0 * LN_MU_STEP))
}

/// Beta functions from one-loop stationarity.
///
/// Each quantity is tree term plus loop term; stationarity at this order sets the
/// running of the tree parameter to minus the explicit `ln μ` derivative of the
/// loop term, which is taken by central differences. `T` is probed at the
/// symmetric point `s = t = u = −m₀²`.
pub fn beta_functions(c: &CouplingSet) -> Result<BetaFunctions> {
    let k = c.kinematics()?;
    let beta_cosmological = if k.m_sq > 0.0 {
        // E = loop − Λ₀  ⇒  dΛ₀/dlnμ = ∂_lnμ loop
        central_difference(c, |x| Ok(energy_density(x, 1)? + x.cosmological))?
    } else {
        0.0
    };
    if c.lambda0 == 0.0 {
        return Ok(BetaFunctions {
            beta_lambda: 0.0,
            gamma_m: 0.0,
            beta_cosmological,
        });
    }
    let gamma_m = -central_difference(c, |x| Ok(physical_mass_sq(x)? - x.m0_sq))?;
    if k.m_sq <= 0.0 {
        return Err(Error::InvalidArgument(
            "beta_lambda needs m0_sq > 0 for the symmetric reference point".into(),
        ));
    }
    let s = -c.m0_sq;
    let beta_lambda = -central_difference(c, |x| Ok(amplitude_T(x, s, s, s)?.re - x.lambda0))?;
    Ok(BetaFunctions {
        beta_lambda,
        gamma_m,
        beta_cosmological,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<CouplingSet>,
    /// Set when the flow stopped because `λ₀` exceeded the Landau guard.
    pub halted_at_landau: bool,
}

fn rk4_flow(start: &CouplingSet, mu_end: f64, steps: usize) -> Result<Trajectory> {
    let h = (mu_end / start.mu).ln() / steps as f64;
    let ln_mu0 = start.mu.ln();
    let rhs = |y: [f64; 3], ln_mu: f64| -> Result<[f64; 3]> {
        let c = CouplingSet {
            lambda0: y[0],
            m0_sq: y[1],
            cosmological: y[2],
            mu: ln_mu.exp(),
        };
        let b = beta_functions(&c)?;
        Ok([b.beta_lambda, b.gamma_m, b.beta_cosmological])
    };
    let axpy = |y: [f64; 3], a: f64, k: [f64; 3]| [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2]];

    let mut points = Vec::with_capacity(steps + 1);
    points.push(*start);
    let mut y = [start.lambda0, start.m0_sq, start.cosmological];
    for i in 0..steps {
        let x = ln_mu0 + i as f64 * h;
        let k1 = rhs(y, x)?;
        let k2 = rhs(axpy(y, 0.5 * h, k1), x + 0.5 * h)?;
        let k3 = rhs(axpy(y, 0.5 * h, k2), x + 0.5 * h)?;
        let k4 = rhs(axpy(y, h, k3), x + h)?;
        for j in 0..3 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let mu = if i + 1 == steps {
            mu_end
        } else {
            (x + h).exp()
        };
        let point = CouplingSet {
            lambda0: y[0],
            m0_sq: y[1],
            cosmological: y[2],
            mu,
        };
        points.push(point);
        if !(y[0] <= LANDAU_GUARD) {
            return Ok(Trajectory {
                points,
                halted_at_landau: true,
            });
        }
    }
    Ok(Trajectory {
        points,
        halted_at_landau: false,
    })
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Integrates the beta functions in `ln μ` from `start.mu` to `mu_end` with fixed-step RK4.
pub fn rg_flow(start: &CouplingSet, mu_end: f64, steps: usize) -> Result<Trajectory> {
    start.kinematics()?;
    if !(mu_end > 0.0) || !mu_end.is_finite() {
        return Err(Error::InvalidArgument(format!("mu_end must be > 0, got {mu_end}")));
    }
    if steps < MIN_FLOW_STEPS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_FLOW_STEPS} steps required, got {steps}"
        )));
    }
    let coarse = rk4_flow(start, mu_end, steps)?;
    if coarse.halted_at_landau {
        return Ok(coarse);
    }
    let fine = rk4_flow(start, mu_end, 2 * steps)?;
    if !fine.halted_at_landau {
        let a = coarse.points.last().expect("non-empty");
        let b = fine.points.last().expect("non-empty");
        let change = relative_change(a.lambda0, b.lambda0)
            .max(relative_change(a.m0_sq, b.m0_sq))
            .max(relative_change(a.cosmological, b.cosmological));
        if change > STEP_DOUBLING_TOL {
            return Err(Error::StepCountInsufficient {
                steps,
                relative_change: change,
            });
        }
    }
    Ok(coarse)
}

/// Polynomial in λ through λ² whose coefficients are ε-series.
#[derive(Debug, Clone)]
struct LambdaPoly([EpsilonSeries; 3]);

impl LambdaPoly {
    fn add(&self, other: &Self) -> Self {
        LambdaPoly(std::array::from_fn(|i| self.0[i].add(&other.0[i])))
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        let mut out: [EpsilonSeries; 3] = std::array::from_fn(|_| EpsilonSeries::zero(2));
        for i in 0..3 {
            for j in 0..3 - i {
                if self.0[i].max_abs() == 0.0 || other.0[j].max_abs() == 0.0 {
                    continue;
                }
                out[i + j] = out[i + j].add(&self.0[i].mul(&other.0[j])?);
            }
        }
        Ok(LambdaPoly(out))
    }

    fn at(&self, lambda: f64) -> Result<EpsilonSeries> {
        let mut acc = EpsilonSeries::zero(2);
        for (i, c) in self.0.iter().enumerate() {
            acc = acc.add(&c.scale(lambda.powi(i as i32)));
        }
        acc.truncate(0)
    }
}

const PAD: i32 = 2;

fn exact(c: f64) -> EpsilonSeries {
    EpsilonSeries::constant(c, PAD)
}

fn pole(c: f64, power: i32) -> EpsilonSeries {
    EpsilonSeries::monomial(c, -power, PAD).expect("pole depth within limits")
}

/// Standard-path amplitude `T/μ^{−ε} = λ₀ + ½ λ₀² ΣF` with the bare coupling
/// inserted and everything kept through `λ²`.
pub fn standard_amplitude_series(c: &CouplingSet, s: f64, t: f64, u: f64) -> Result<EpsilonSeries> {
    let k = c.kinematics()?;
    let zero = || exact(0.0);
    if c.lambda0 == 0.0 {
        return EpsilonSeries::zero(0).truncate(0);
    }
    let bare = LambdaPoly([zero(), exact(1.0), pole(-3.0 / FOUR_PI_SQ, 1)]);
    let mut fish_sum = EpsilonSeries::zero(0);
    for x in [s, t, u] {
        fish_sum = fish_sum.add(&fish_channel(x, &k, DEFAULT_QUAD_TOL)?);
    }
    let loop_factor = LambdaPoly([fish_sum.scale(0.5), zero(), zero()]);
    let t_poly = bare.add(&bare.mul(&bare)?.mul(&loop_factor)?);
    t_poly.at(c.lambda0)
}

/// Standard-path inverse propagator `z₁² G₀(p)⁻¹` through `λ²`.
///
/// Pole coefficients follow the renormalization bookkeeping (bare mass, wave-function
/// factor and the two-loop mass poles); the finite functions are the graph results.
pub fn standard_propagator_series(p_sq: f64, c: &CouplingSet) -> Result<EpsilonSeries> {
    if !(p_sq > 0.0) {
        return Err(Error::InvalidArgument(format!("p_sq must be > 0, got {p_sq}")));
    }
    let k = c.kinematics()?;
    let m_sq = c.m0_sq;
    let a2 = 1.0 / (FOUR_PI_SQ * FOUR_PI_SQ);
    let unit = KinematicPoint { lambda0: 1.0, ..k };

    let one_loop_finite = 0.5 * tadpole(&unit, 1)?.split.finite.re;
    let mut two_loop_finite = setting_sun(p_sq, &unit, 1)?.split.finite.re;
    if m_sq > 0.0 {
        two_loop_finite += double_scoop(&unit, 1)?.split.finite.re;
    }

    let momentum = LambdaPoly([exact(p_sq), exact(0.0), pole(-p_sq * a2 / 12.0, 1)]);
    let bare_mass = LambdaPoly([
        exact(m_sq),
        pole(-m_sq / FOUR_PI_SQ, 1),
        pole(2.0 * m_sq * a2, 2).add(&pole(5.0 / 12.0 * m_sq * a2, 1)),
    ]);
    let loops = LambdaPoly([
        exact(0.0),
        pole(m_sq / FOUR_PI_SQ, 1).add(&EpsilonSeries::constant(one_loop_finite, 0)),
        pole(-2.0 * m_sq * a2, 2)
            .add(&pole(-0.5 * m_sq * a2, 1))
            .add(&EpsilonSeries::constant(two_loop_finite, 0)),
    ]);
    let z1_sq = LambdaPoly([exact(1.0), exact(0.0), pole(a2 / 12.0, 1)]);
    let g0_inv = momentum.add(&bare_mass).add(&loops);
    z1_sq.mul(&g0_inv)?.at(c.lambda0)
}

/// Default kinematics for [`pole_cancellation_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportKinematics {
    pub s: f64,
    pub t: f64,
    pub u: f64,
    pub p_sq: f64,
}

impl ReportKinematics {
    /// `s = t = u = −m₀²`, `p² = m₀²` (or `μ²` in the massless case).
    pub fn symmetric(c: &CouplingSet) -> Self {
        let m_sq = if c.m0_sq > 0.0 { c.m0_sq } else { c.mu * c.mu };
        ReportKinematics {
            s: -m_sq,
            t: -m_sq,
            u: -m_sq,
            p_sq: m_sq,
        }
    }
}

/// Residual poles of the standard-path `T` and `G⁻¹` after renormalization.
pub fn pole_cancellation_report(c: &CouplingSet) -> Result<Vec<PoleReport>> {
    pole_cancellation_report_at(c, &ReportKinematics::symmetric(c))
}

pub fn pole_cancellation_report_at(
    c: &CouplingSet,
    kin: &ReportKinematics,
) -> Result<Vec<PoleReport>> {
    let t = standard_amplitude_series(c, kin.s, kin.t, kin.u)?;
    let g = standard_propagator_series(kin.p_sq, c)?;
    Ok(vec![
        PoleReport::from_series("T", &t),
        PoleReport::from_series("G_inverse", &g),
    ])
}

/// Superficial degree of divergence `D = 4 − N` for `N` external legs.
pub fn superficial_divergence(external_legs: u32) -> i64 {
    4 - external_legs as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::EULER_GAMMA;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn couplings(lambda0: f64) -> CouplingSet {
        CouplingSet::new(lambda0, 1.3, 0.02, 0.9).unwrap()
    }

    #[test]
    fn free_theory_limits() {
        let c = couplings(0.0);
        assert_eq!(physical_mass_sq(&c).unwrap(), c.m0_sq);
        assert_eq!(amplitude_T(&c, -1.0, -2.0, -3.0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(propagator_inverse(2.0, &c).unwrap(), 2.0 + c.m0_sq);
        let b = beta_functions(&c).unwrap();
        assert_eq!((b.beta_lambda, b.gamma_m), (0.0, 0.0));
        for r in pole_cancellation_report(&c).unwrap() {
            assert!(r.residuals.values().all(|v| v.norm() == 0.0));
            assert!(r.is_finite);
        }
    }

    #[test]
    fn mass_at_unit_log() {
        let mu: f64 = 0.5;
        let m_sq = 4.0 * PI * mu * mu;
        let c = CouplingSet::new(0.1, m_sq, 0.0, mu).unwrap();
        let expected = m_sq * (1.0 + 0.05 * (EULER_GAMMA - 1.0) / FOUR_PI_SQ);
        assert_relative_eq!(physical_mass_sq(&c).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn bare_coupling_residue() {
        let s = bare_coupling_standard(0.3, 2.0, 1).unwrap();
        assert_relative_eq!(s.coeff(-1).re, -3.0 * 0.09 / FOUR_PI_SQ, max_relative = 1e-15);
        assert!(bare_coupling_standard(0.0, 2.0, 1)
            .unwrap()
            .coeffs()
            .iter()
            .all(|c| c.norm() == 0.0));
    }

    #[test]
    fn bare_coupling_cancels_fish_poles() {
        let lambda = 0.4;
        let bare = bare_coupling_bracket(lambda, 2).unwrap();
        let fish_poles = EpsilonSeries::monomial(3.0 * 2.0 / FOUR_PI_SQ, -1, 2).unwrap();
        // λ₀ + ½λ₀²·(3·2/(4π)²)/ε, truncated at λ²
        let t = bare.add(&fish_poles.scale(0.5 * lambda * lambda));
        assert!(t.coeff(-1).norm() < 1e-17);
    }

    #[test]
    fn energy_paths_and_offset() {
        let c = couplings(0.3);
        let m4 = c.m0_sq * c.m0_sq / FOUR_PI_SQ;
        for order in [1, 2] {
            let off = energy_scheme_offset(&c, order).unwrap();
            assert_relative_eq!(off, -m4 / 8.0, max_relative = 1e-12);
        }
        let c0 = CouplingSet { lambda0: 0.0, ..c };
        assert_eq!(energy_density(&c0, 2).unwrap(), energy_density(&c0, 1).unwrap());
        let first = energy_density(&CouplingSet { cosmological: 0.0, ..c }, 1).unwrap();
        let cancel = CouplingSet { cosmological: first, ..c };
        assert!(energy_density(&cancel, 1).unwrap().abs() < 1e-18);
        assert!(energy_density(&c, 3).is_err());
    }

    #[test]
    fn energy_series_is_finite() {
        let s = energy_density_series(&couplings(0.5), 2).unwrap();
        assert!(s.is_finite(1e-13));
    }

    #[test]
    fn beta_function_values() {
        let c = couplings(0.2);
        let b = beta_functions(&c).unwrap();
        assert_relative_eq!(b.beta_lambda, 3.0 * 0.04 / FOUR_PI_SQ, max_relative = 1e-6);
        assert_relative_eq!(b.gamma_m, 0.2 * c.m0_sq / FOUR_PI_SQ, max_relative = 1e-6);
        assert_relative_eq!(
            b.beta_cosmological,
            -c.m0_sq * c.m0_sq / (2.0 * FOUR_PI_SQ),
            max_relative = 1e-6
        );
    }

    #[test]
    fn amplitude_explicit_mu_derivative() {
        let c = couplings(0.3);
        let d = central_difference(&c, |x| Ok(amplitude_T(x, -0.5, -1.5, -4.0)?.re)).unwrap();
        assert_relative_eq!(d, -3.0 * 0.09 / FOUR_PI_SQ, max_relative = 1e-6);
    }

    #[test]
    fn propagator_slope_at_unit_log() {
        let mu: f64 = 0.8;
        let c = CouplingSet::new(0.7, 1.1, 0.0, mu).unwrap();
        let p_sq = 4.0 * PI * mu * mu;
        let h = 1e-4 * p_sq;
        let slope = (propagator_inverse(p_sq + h, &c).unwrap()
            - propagator_inverse(p_sq - h, &c).unwrap())
            / (2.0 * h);
        let a = 0.7 / FOUR_PI_SQ;
        let expected = 1.0 - a * a / 12.0 * (1.0 + crate::graphs::setting_sun_constant());
        assert_relative_eq!(slope, expected, max_relative = 1e-9);
    }

    #[test]
    fn flow_validation() {
        let c = couplings(0.1);
        assert!(rg_flow(&c, 2.0, 8).is_err());
        assert!(rg_flow(&c, -1.0, 32).is_err());
        let free = CouplingSet::new(0.0, 0.0, 0.3, 1.0).unwrap();
        let traj = rg_flow(&free, 10.0, 16).unwrap();
        assert!(traj.points.iter().all(|p| p.lambda0 == 0.0 && p.m0_sq == 0.0 && p.cosmological == 0.3));
    }

    #[test]
    fn flow_stops_at_landau_guard() {
        let c = CouplingSet::new(9.0, 1.0, 0.0, 1.0).unwrap();
        let traj = rg_flow(&c, 1e6, 64).unwrap();
        assert!(traj.halted_at_landau);
        assert!(traj.points.last().unwrap().lambda0 > LANDAU_GUARD);
    }

    #[test]
    fn divergence_degree() {
        assert_eq!(superficial_divergence(2), 2);
        assert_eq!(superficial_divergence(4), 0);
        assert_eq!(superficial_divergence(6), -2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn amplitude_crossing_symmetric(s in -50.0..-0.01f64, t in -50.0..-0.01f64, u in -50.0..-0.01f64) {
            let c = couplings(0.4);
            let base = amplitude_T(&c, s, t, u).unwrap();
            for (a, b, d) in [(s, u, t), (t, s, u), (t, u, s), (u, s, t), (u, t, s)] {
                let other = amplitude_T(&c, a, b, d).unwrap();
                prop_assert!((other - base).norm() <= 1e-14 * base.norm());
            }
        }

        #[test]
        fn reports_finite(lambda in prop::sample::select(vec![0.0, 0.1, 0.5]), m_sq in 0.1..5.0f64) {
            let c = CouplingSet::new(lambda, m_sq, 0.0, 1.0).unwrap();
            for r in pole_cancellation_report(&c).unwrap() {
                prop_assert!(r.is_finite, "{:?}", r);
            }
        }

        #[test]
        fn standard_and_subtraction_agree(s in -20.0..-0.01f64, t in -20.0..-0.01f64, u in -20.0..-0.01f64, p_sq in 0.1..10.0f64) {
            let c = couplings(0.3);
            let std_t = standard_amplitude_series(&c, s, t, u).unwrap().coeff(0);
            let sub_t = amplitude_T(&c, s, t, u).unwrap();
            prop_assert!((std_t - sub_t).norm() <= 1e-12 * sub_t.norm());
            let std_g = standard_propagator_series(p_sq, &c).unwrap().coeff(0).re;
            let sub_g = propagator_inverse(p_sq, &c).unwrap();
            prop_assert!((std_g - sub_g).abs() <= 1e-12 * sub_g.abs());
        }
    }
}
