//! σ-expansion of the DeWitt–Schwinger Feynman function and its Hadamard split.
//!
//! `Δ_F = Δ̄_F + ½ i Δ^(1)`. Every displayed term is stored as a real coefficient
//! keyed by the part it belongs to, its structural function of σ and the `a_j`
//! that carries it, so the split is a partition of keys.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::EULER_GAMMA;

/// Which part of `Δ_F` a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// `Δ̄_F`, real.
    Feynman,
    /// `Δ^(1)`, entering `Δ_F` multiplied by `i/2`.
    Hadamard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTag {
    DeltaSigma,
    ThetaConst,
    ThetaSigma,
    ThetaSigmaSq,
    InvSigma,
    LogConst,
    LogSigma,
    LogSigmaSq,
    Const,
    LinearSigma,
    QuadSigma,
}

impl BasisTag {
    pub const ALL: [BasisTag; 11] = [
        BasisTag::DeltaSigma,
        BasisTag::ThetaConst,
        BasisTag::ThetaSigma,
        BasisTag::ThetaSigmaSq,
        BasisTag::InvSigma,
        BasisTag::LogConst,
        BasisTag::LogSigma,
        BasisTag::LogSigmaSq,
        BasisTag::Const,
        BasisTag::LinearSigma,
        BasisTag::QuadSigma,
    ];

    /// Whether the function and its first σ-derivative have finite limits at σ = 0.
    pub fn is_regular(self) -> bool {
        matches!(
            self,
            BasisTag::Const
                | BasisTag::LinearSigma
                | BasisTag::QuadSigma
                | BasisTag::ThetaSigmaSq
                | BasisTag::LogSigmaSq
        )
    }

    /// Value of the structural function at `σ ≠ 0` (δ vanishes there).
    pub fn value(self, sigma: f64) -> f64 {
        let theta = if sigma > 0.0 { 1.0 } else { 0.0 };
        let log = sigma.abs().ln();
        match self {
            BasisTag::DeltaSigma => 0.0,
            BasisTag::ThetaConst => theta,
            BasisTag::ThetaSigma => theta * sigma,
            BasisTag::ThetaSigmaSq => theta * sigma * sigma,
            BasisTag::InvSigma => 1.0 / sigma,
            BasisTag::LogConst => log,
            BasisTag::LogSigma => sigma * log,
            BasisTag::LogSigmaSq => sigma * sigma * log,
            BasisTag::Const => 1.0,
            BasisTag::LinearSigma => sigma,
            BasisTag::QuadSigma => sigma * sigma,
        }
    }

    /// First σ-derivative at `σ ≠ 0`.
    pub fn derivative(self, sigma: f64) -> f64 {
        let theta = if sigma > 0.0 { 1.0 } else { 0.0 };
        let log = sigma.abs().ln();
        match self {
            BasisTag::DeltaSigma | BasisTag::ThetaConst | BasisTag::Const => 0.0,
            BasisTag::ThetaSigma => theta,
            BasisTag::ThetaSigmaSq => 2.0 * theta * sigma,
            BasisTag::InvSigma => -1.0 / (sigma * sigma),
            BasisTag::LogConst => 1.0 / sigma,
            BasisTag::LogSigma => log + 1.0,
            BasisTag::LogSigmaSq => sigma * (2.0 * log + 1.0),
            BasisTag::LinearSigma => 1.0,
            BasisTag::QuadSigma => 2.0 * sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TermKey {
    pub channel: Channel,
    pub tag: BasisTag,
    /// Index `j` of the coefficient `a_j` carrying the term.
    pub source: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(flatten)]
    pub key: TermKey,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardInput {
    pub sigma: f64,
    pub m: f64,
    pub a: Vec<f64>,
    pub vanvleck: f64,
}

impl HadamardInput {
    pub fn new(sigma: f64, m: f64, a: Vec<f64>) -> Self {
        HadamardInput {
            sigma,
            m,
            a,
            vanvleck: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SingularBasisExpansion {
    #[serde(with = "term_list")]
    pub terms: BTreeMap<TermKey, f64>,
    /// Highest power of σ kept.
    pub truncation_order: u32,
    /// Displayed terms left out because the needed `a_j` was not supplied.
    pub dropped: Vec<TermKey>,
}

impl SingularBasisExpansion {
    pub fn term_list(&self) -> Vec<Term> {
        self.terms
            .iter()
            .map(|(&key, &coefficient)| Term { key, coefficient })
            .collect()
    }

    /// Summed coefficient of one structural function within one channel.
    pub fn coefficient(&self, channel: Channel, tag: BasisTag) -> f64 {
        self.terms
            .iter()
            .filter(|(k, _)| k.channel == channel && k.tag == tag)
            .map(|(_, v)| v)
            .sum()
    }

    /// Coefficients per basis tag for one channel.
    pub fn by_tag(&self, channel: Channel) -> BTreeMap<BasisTag, f64> {
        let mut out = BTreeMap::new();
        for (k, v) in &self.terms {
            if k.channel == channel {
                *out.entry(k.tag).or_insert(0.0) += v;
            }
        }
        out
    }

    /// `Δ_F` at `σ ≠ 0`: the Feynman channel plus `i/2` times the Hadamard channel.
    pub fn evaluate(&self, sigma: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in &self.terms {
            let v = c * k.tag.value(sigma);
            match k.channel {
                Channel::Feynman => acc.re += v,
                Channel::Hadamard => acc.im += 0.5 * v,
            }
        }
        acc
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

mod term_list {
    use super::{Term, TermKey};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(terms: &BTreeMap<TermKey, f64>, s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<Term> = terms
            .iter()
            .map(|(&key, &coefficient)| Term { key, coefficient })
            .collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<TermKey, f64>, D::Error> {
        let list = Vec::<Term>::deserialize(d)?;
        Ok(list.into_iter().map(|t| (t.key, t.coefficient)).collect())
    }
}

struct Builder<'a> {
    a: &'a [f64],
    out: SingularBasisExpansion,
}

impl Builder<'_> {
    /// Adds `factor · a_j` (or `factor` alone when `with_a` is false) under the key.
    fn push(&mut self, channel: Channel, tag: BasisTag, source: usize, factor: f64, with_a: bool) {
        let key = TermKey {
            channel,
            tag,
            source,
        };
        match self.a.get(source) {
            Some(&aj) => {
                let c = if with_a { factor * aj } else { factor };
                *self.out.terms.entry(key).or_insert(0.0) += c;
            }
            None => {
                if !self.out.dropped.contains(&key) {
                    self.out.dropped.push(key);
                }
            }
        }
    }

    fn term(&mut self, channel: Channel, tag: BasisTag, source: usize, factor: f64) {
        self.push(channel, tag, source, factor, true);
    }

    /// `factor · a_j · log(e^γ m²|σ|) · σ^power` expanded into a log channel and a polynomial channel.
    fn log_term(&mut self, power: u32, source: usize, factor: f64, log_shift: f64) {
        let (log_tag, poly_tag) = match power {
            0 => (BasisTag::LogConst, BasisTag::Const),
            1 => (BasisTag::LogSigma, BasisTag::LinearSigma),
            _ => (BasisTag::LogSigmaSq, BasisTag::QuadSigma),
        };
        self.term(Channel::Hadamard, log_tag, source, factor);
        self.term(Channel::Hadamard, poly_tag, source, factor * log_shift);
    }
}

/// Populates every displayed term of the expansion through σ².
pub fn hadamard_expand(inp: &HadamardInput) -> Result<SingularBasisExpansion> {
    if !(inp.m > 0.0) || !inp.m.is_finite() {
        return Err(Error::InvalidArgument(format!("mass must be > 0, got {}", inp.m)));
    }
    if inp.a.is_empty() {
        return Err(Error::InvalidArgument("at least a_0 is required".into()));
    }
    let d = inp.vanvleck;
    let m2 = inp.m * inp.m;
    let m4 = m2 * m2;
    let m6 = m4 * m2;
    let mut b = Builder {
        a: &inp.a,
        out: SingularBasisExpansion {
            truncation_order: 2,
            ..Default::default()
        },
    };
    use BasisTag::*;
    use Channel::*;

    // Δ̄_F: D a₀/8π δ(σ) − D/8π θ(σ)[½(m²a₀ − a₁) − (2σ/2²·4)(m⁴a₀ − 2m²a₁ + 2a₂)
    //       + ((2σ)²/2²·4²·6)(m⁶a₀ − 3m⁴a₁ + 6m²a₂ − 6a₃)]
    let f = d / (8.0 * PI);
    b.term(Feynman, DeltaSigma, 0, f);
    b.term(Feynman, ThetaConst, 0, -f * 0.5 * m2);
    b.term(Feynman, ThetaConst, 1, f * 0.5);
    let lin = f / 8.0;
    b.term(Feynman, ThetaSigma, 0, lin * m4);
    b.term(Feynman, ThetaSigma, 1, -lin * 2.0 * m2);
    b.term(Feynman, ThetaSigma, 2, lin * 2.0);
    let quad = -f / 96.0;
    b.term(Feynman, ThetaSigmaSq, 0, quad * m6);
    b.term(Feynman, ThetaSigmaSq, 1, -quad * 3.0 * m4);
    b.term(Feynman, ThetaSigmaSq, 2, quad * 6.0 * m2);
    b.term(Feynman, ThetaSigmaSq, 3, -quad * 6.0);

    // Δ^(1): −D a₀/(4π²σ)
    let h = d / (2.0 * PI * PI);
    b.term(Hadamard, InvSigma, 0, -2.0 * h / 4.0);
    // + D/2π² log(e^γ m²|σ|)[½(m²a₀ − a₁) − (2σ/2²·4)(m⁴a₀ − 2m²a₁ + a₂) + …]
    // (the a₂ weight is 1 here, against 2 in the θ bracket; kept as printed)
    let shift = EULER_GAMMA + m2.ln();
    b.log_term(0, 0, h * 0.5 * m2, shift);
    b.log_term(0, 1, -h * 0.5, shift);
    b.log_term(1, 0, -h / 8.0 * m4, shift);
    b.log_term(1, 1, h / 8.0 * 2.0 * m2, shift);
    b.log_term(1, 2, -h / 8.0, shift);
    // the σ² log term survives only through a₃, with the θ-bracket weight −6/96
    b.log_term(2, 3, h / 96.0 * -6.0, shift);
    // − D/2π²[¼m²a₀ − (2σ/2²·4)((5/4)m⁴ − 2m²a₁ − a₂)
    //         + ((2σ)²/2²·4²·6)((5/3)m⁶a₀ − (9/2)m⁴a₁ + (15/2)m²a₂ − (9/2)a₃)]
    b.term(Hadamard, Const, 0, -h * 0.25 * m2);
    // (5/4)m⁴ is printed without a₀
    b.push(Hadamard, LinearSigma, 0, h / 8.0 * 1.25 * m4, false);
    b.term(Hadamard, LinearSigma, 1, -h / 8.0 * 2.0 * m2);
    b.term(Hadamard, LinearSigma, 2, -h / 8.0);
    let pq = -h / 96.0;
    b.term(Hadamard, QuadSigma, 0, pq * 5.0 / 3.0 * m6);
    b.term(Hadamard, QuadSigma, 1, -pq * 4.5 * m4);
    b.term(Hadamard, QuadSigma, 2, pq * 7.5 * m2);
    b.term(Hadamard, QuadSigma, 3, -pq * 4.5);
    // + D/2π²[(a₂/4m² + a₃/4m⁴ + a₄/8m⁶ + …) − (2σ/2²·4)(a₃/m² + a₄/m⁴ + …)]
    b.term(Hadamard, Const, 2, h / (4.0 * m2));
    b.term(Hadamard, Const, 3, h / (4.0 * m4));
    b.term(Hadamard, Const, 4, h / (8.0 * m6));
    b.term(Hadamard, LinearSigma, 3, -h / 8.0 / m2);
    b.term(Hadamard, LinearSigma, 4, -h / 8.0 / m4);

    Ok(b.out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardSplit {
    pub singular: SingularBasisExpansion,
    pub regular: SingularBasisExpansion,
}

/// Partitions the expansion by source: terms carried by `a_j` with `j < a_count`
/// are singular, the rest regular.
pub fn hadamard_split(e: &SingularBasisExpansion, a_count: usize) -> Result<HadamardSplit> {
    if a_count < 3 {
        return Err(Error::InvalidArgument(format!(
            "the singular sector needs a_count >= 3, got {a_count}"
        )));
    }
    let mut singular = SingularBasisExpansion {
        truncation_order: e.truncation_order,
        ..Default::default()
    };
    let mut regular = singular.clone();
    for (&k, &v) in &e.terms {
        let target = if k.source < a_count {
            &mut singular
        } else {
            &mut regular
        };
        target.terms.insert(k, v);
    }
    for &k in &e.dropped {
        if k.source < a_count {
            singular.dropped.push(k);
        } else {
            regular.dropped.push(k);
        }
    }
    Ok(HadamardSplit { singular, regular })
}
