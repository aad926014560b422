//! Truncated Laurent series in `ε = n − 4`.
//!
//! An [`EpsilonSeries`] stores the coefficients of `ε^min_order … ε^max_order`.
//! Everything above `max_order` is unknown, so products only keep the powers
//! that are fully determined by the stored coefficients of both factors:
//!
//! ```text
//! max(a·b) = min(a.max + b.min, b.max + a.min)
//! ```
//!
//! Exact expressions (like `1/ε + c`) are built with an explicit `max_order`
//! and zero padding, which makes them exact up to that order.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest pole an [`EpsilonSeries`] may carry.
pub const MAX_POLE_DEPTH: i32 = -4;

/// Default truncation order for graph evaluations.
pub const DEFAULT_MAX_ORDER: i32 = 2;

/// Highest order accepted by [`gamma_laurent`].
pub const MAX_GAMMA_ORDER: i32 = 4;

/// Euler–Mascheroni constant. Feeds the `ln Γ(1+x)` expansion only; callers that
/// need the `ε⁰` constant of a Gamma expansion read it off the series instead.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// ζ(2) … ζ(5) for the ln Γ(1+x) Taylor series.
const ZETA: [f64; 4] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_37,
];

/// Absolute tolerance for exact-cancellation checks.
pub const CANCELLATION_TOL: f64 = 1e-12;

/// Truncated Laurent series `Σ_{k=min}^{max} c_k ε^k` with complex coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRecord", into = "SeriesRecord")]
pub struct EpsilonSeries {
    min_order: i32,
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct SeriesRecord {
    min_order: i32,
    coeffs: Vec<[f64; 2]>,
}

impl TryFrom<SeriesRecord> for EpsilonSeries {
    type Error = Error;

    fn try_from(rec: SeriesRecord) -> Result<Self> {
        let coeffs = rec
            .coeffs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        EpsilonSeries::new(rec.min_order, coeffs)
    }
}

impl From<EpsilonSeries> for SeriesRecord {
    fn from(s: EpsilonSeries) -> Self {
        SeriesRecord {
            min_order: s.min_order,
            coeffs: s.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl EpsilonSeries {
    /// Builds a series from `coeffs[i]` = coefficient of `ε^(min_order + i)`.
    pub fn new(min_order: i32, coeffs: Vec<Complex64>) -> Result<Self> {
        if min_order > 0 {
            return Err(Error::InvalidArgument(format!(
                "min_order must be <= 0, got {min_order}"
            )));
        }
        if min_order < MAX_POLE_DEPTH {
            return Err(Error::PoleDepthExceeded { order: min_order });
        }
        let max_order = min_order + coeffs.len() as i32 - 1;
        if max_order < 0 {
            return Err(Error::InvalidArgument(format!(
                "series must reach at least eps^0 (min_order {min_order}, {} coefficients)",
                coeffs.len()
            )));
        }
        Ok(EpsilonSeries { min_order, coeffs })
    }

    pub fn from_real(min_order: i32, coeffs: &[f64]) -> Result<Self> {
        Self::new(
            min_order,
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        )
    }

    /// The zero series known exactly up to `ε^max_order`.
    pub fn zero(max_order: i32) -> Self {
        Self::constant(Complex64::new(0.0, 0.0), max_order)
    }

    /// A constant, exact up to `ε^max_order`.
    pub fn constant(c: impl Into<Complex64>, max_order: i32) -> Self {
        let max_order = max_order.max(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); max_order as usize + 1];
        coeffs[0] = c.into();
        EpsilonSeries {
            min_order: 0,
            coeffs,
        }
    }

    /// `c · ε^power`, exact up to `ε^max_order`.
    pub fn monomial(c: impl Into<Complex64>, power: i32, max_order: i32) -> Result<Self> {
        let min_order = power.min(0);
        let max_order = max_order.max(0).max(power);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (max_order - min_order) as usize + 1];
        coeffs[(power - min_order) as usize] = c.into();
        Self::new(min_order, coeffs)
    }

    pub fn min_order(&self) -> i32 {
        self.min_order
    }

    pub fn max_order(&self) -> i32 {
        self.min_order + self.coeffs.len() as i32 - 1
    }

    /// Coefficients for `min_order ..= max_order`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `ε^power`; zero outside the stored range.
    pub fn coeff(&self, power: i32) -> Complex64 {
        if power < self.min_order || power > self.max_order() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(power - self.min_order) as usize]
        }
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when every negative power vanishes within `tol` relative to the largest coefficient.
    pub fn is_finite(&self, tol: f64) -> bool {
        let scale = self.max_abs();
        (self.min_order..0).all(|k| self.coeff(k).norm() <= tol * scale)
    }

    /// Drops every power above `max_order`.
    pub fn truncate(&self, max_order: i32) -> Result<Self> {
        if max_order < 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate below eps^0 (requested {max_order})"
            )));
        }
        let keep = (max_order.min(self.max_order()) - self.min_order) as usize + 1;
        Ok(EpsilonSeries {
            min_order: self.min_order,
            coeffs: self.coeffs[..keep].to_vec(),
        })
    }

    pub fn scale(&self, factor: impl Into<Complex64>) -> Self {
        let f = factor.into();
        EpsilonSeries {
            min_order: self.min_order,
            coeffs: self.coeffs.iter().map(|c| c * f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let min_order = self.min_order.min(other.min_order);
        let max_order = self.max_order().min(other.max_order());
        let coeffs = (min_order..=max_order)
            .map(|k| self.coeff(k) + other.coeff(k))
            .collect();
        EpsilonSeries { min_order, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Cauchy product keeping only the powers fixed by the stored coefficients.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let min_order = self.min_order + other.min_order;
        if min_order < MAX_POLE_DEPTH {
            return Err(Error::PoleDepthExceeded { order: min_order });
        }
        let max_order =
            (self.max_order() + other.min_order).min(other.max_order() + self.min_order);
        if max_order < 0 {
            return Err(Error::InvalidArgument(format!(
                "product of truncated series does not determine eps^0 (usable max order {max_order})"
            )));
        }
        let coeffs = (min_order..=max_order)
            .map(|k| {
                (self.min_order..=self.max_order())
                    .map(|i| self.coeff(i) * other.coeff(k - i))
                    .sum()
            })
            .collect();
        Ok(EpsilonSeries { min_order, coeffs })
    }

    /// Reciprocal of a series that starts at `ε^0` with a non-zero constant.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeff(0);
        if self.min_order < 0 && (self.min_order..0).any(|k| self.coeff(k) != Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidArgument(
                "reciprocal needs a series without poles".into(),
            ));
        }
        if c0 == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument(
                "reciprocal of a series with vanishing constant term".into(),
            ));
        }
        let n = self.max_order() as usize;
        let a: Vec<Complex64> = (0..=n as i32).map(|k| self.coeff(k)).collect();
        let mut r = vec![Complex64::new(0.0, 0.0); n + 1];
        r[0] = 1.0 / c0;
        for k in 1..=n {
            let acc: Complex64 = (1..=k).map(|j| a[j] * r[k - j]).sum();
            r[k] = -acc / c0;
        }
        Ok(EpsilonSeries {
            min_order: 0,
            coeffs: r,
        })
    }

    /// `exp(s)` for a pole-free series.
    pub fn exp(&self) -> Result<Self> {
        if (self.min_order..0).any(|k| self.coeff(k) != Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidArgument("exp of a series with poles".into()));
        }
        let n = self.max_order() as usize;
        let a: Vec<Complex64> = (0..=n as i32).map(|k| self.coeff(k)).collect();
        // e' = a' e  =>  k e_k = Σ_{j=1}^{k} j a_j e_{k-j}
        let mut e = vec![Complex64::new(0.0, 0.0); n + 1];
        e[0] = a[0].exp();
        for k in 1..=n {
            let acc: Complex64 = (1..=k).map(|j| a[j] * e[k - j] * j as f64).sum();
            e[k] = acc / k as f64;
        }
        Ok(EpsilonSeries {
            min_order: 0,
            coeffs: e,
        })
    }

    /// Evaluates `Σ c_k ε^k` over the stored powers.
    pub fn eval(&self, epsilon: f64) -> Result<Complex64> {
        if epsilon == 0.0 {
            if (self.min_order..0).any(|k| self.coeff(k) != Complex64::new(0.0, 0.0)) {
                return Err(Error::EvalAtZeroWithPoles);
            }
            return Ok(self.coeff(0));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * epsilon + c;
        }
        Ok(acc * epsilon.powi(self.min_order))
    }

    /// Minimal-subtraction split: poles are singular, the `ε^0` coefficient is regular.
    pub fn split(&self) -> SplitValue {
        let singular = (self.min_order..0)
            .filter_map(|k| {
                let c = self.coeff(k);
                (c != Complex64::new(0.0, 0.0)).then_some(((-k) as u32, c))
            })
            .collect();
        SplitValue {
            singular,
            finite: self.coeff(0),
        }
    }
}

impl fmt::Display for EpsilonSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.min_order + i as i32;
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            if k != 0 {
                write!(f, "·ε^{k}")?;
            }
        }
        write!(f, " + O(ε^{})", self.max_order() + 1)
    }
}

/// Singular poles and finite part of a regularized quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitValue {
    /// Pole order γ ≥ 1 → coefficient of `ε^(−γ)`. Never holds exact zeros.
    pub singular: BTreeMap<u32, Complex64>,
    pub finite: Complex64,
}

impl SplitValue {
    /// Rebuilds the `ε ≤ 0` part of the source series.
    pub fn to_series(&self) -> EpsilonSeries {
        let depth = self.singular.keys().copied().max().unwrap_or(0) as i32;
        let coeffs = (-depth..=0)
            .map(|k| {
                if k == 0 {
                    self.finite
                } else {
                    self.singular
                        .get(&((-k) as u32))
                        .copied()
                        .unwrap_or_default()
                }
            })
            .collect();
        EpsilonSeries {
            min_order: -depth,
            coeffs,
        }
    }

    pub fn pole(&self, order: u32) -> Complex64 {
        self.singular.get(&order).copied().unwrap_or_default()
    }

    pub fn is_finite(&self) -> bool {
        self.singular.is_empty()
    }
}

pub fn series_add(a: &EpsilonSeries, b: &EpsilonSeries) -> EpsilonSeries {
    a.add(b)
}

pub fn series_mul(a: &EpsilonSeries, b: &EpsilonSeries) -> Result<EpsilonSeries> {
    a.mul(b)
}

pub fn series_eval(s: &EpsilonSeries, epsilon: f64) -> Result<Complex64> {
    s.eval(epsilon)
}

pub fn ms_split(s: &EpsilonSeries) -> SplitValue {
    s.split()
}

/// Expansion of `ln Γ(1 + bε)` through `ε^order` (order ≤ 5).
fn ln_gamma_one_plus(b: f64, order: i32) -> EpsilonSeries {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); order as usize + 1];
    if order >= 1 {
        coeffs[1] = Complex64::new(-EULER_GAMMA * b, 0.0);
    }
    for k in 2..=order as usize {
        // ζ(k) (−b)^k / k
        coeffs[k] = Complex64::new(ZETA[k - 2] * (-b).powi(k as i32) / k as f64, 0.0);
    }
    EpsilonSeries {
        min_order: 0,
        coeffs,
    }
}

/// Laurent expansion of `Γ(a + bε)` about `ε = 0` through `ε^order`.
///
/// For `a ≥ 1` the result is regular. For `a ≤ 0` it carries a simple pole with
/// residue `(−1)^|a| / (|a|! · b)`.
pub fn gamma_laurent(a: i32, b: f64, order: i32) -> Result<EpsilonSeries> {
    if b == 0.0 || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "gamma_laurent needs a finite non-zero slope, got b = {b}"
        )));
    }
    if !(0..=MAX_GAMMA_ORDER).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "gamma_laurent order must lie in 0..={MAX_GAMMA_ORDER}, got {order}"
        )));
    }
    let work = order + 1;
    let mut series = ln_gamma_one_plus(b, work).exp()?;
    if a >= 1 {
        for j in 1..a {
            // exact polynomial, padded so the product keeps every order
            let mut poly = vec![0.0; work as usize + 1];
            poly[0] = j as f64;
            poly[1] = b;
            let factor = EpsilonSeries::from_real(0, &poly)?;
            series = series.mul(&factor)?;
        }
    } else {
        // Γ(a + x) = Γ(1 + x) / (x · Π_{j=a}^{-1} (j + x))
        for j in a..0 {
            let jf = j as f64;
            let inv: Vec<f64> = (0..=work).map(|k| (-b / jf).powi(k) / jf).collect();
            series = series.mul(&EpsilonSeries::from_real(0, &inv)?)?;
        }
        let inv_x = EpsilonSeries::monomial(1.0 / b, -1, work)?;
        series = series.mul(&inv_x)?;
    }
    series.truncate(order)
}

/// `ratio^(bε) = Σ_k (b ln ratio)^k ε^k / k!` through `ε^order`.
pub fn scale_power(ratio: f64, b: f64, order: i32) -> Result<EpsilonSeries> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale_power needs a positive ratio, got {ratio}"
        )));
    }
    if order < 0 {
        return Err(Error::InvalidArgument(format!(
            "scale_power order must be >= 0, got {order}"
        )));
    }
    let l = b * ratio.ln();
    let mut coeffs = Vec::with_capacity(order as usize + 1);
    let mut term = 1.0;
    for k in 0..=order {
        if k > 0 {
            term *= l / k as f64;
        }
        coeffs.push(Complex64::new(term, 0.0));
    }
    EpsilonSeries::new(0, coeffs)
}

/// The `ε⁰` constant of `Γ(−1 − ε/2)`, i.e. `γ − 1` (the tadpole constant).
pub fn tadpole_gamma_constant() -> f64 {
    gamma_laurent(-1, -0.5, 1)
        .map(|s| s.coeff(0).re)
        .expect("fixed valid arguments")
}

/// The constant `γ̂ = −(ε⁰ coefficient of Γ(−ε/2))`, the "γ" entering the finite parts.
pub fn pole_constant() -> f64 {
    -gamma_laurent(0, -0.5, 1)
        .map(|s| s.coeff(0).re)
        .expect("fixed valid arguments")
}
